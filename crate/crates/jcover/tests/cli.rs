//! CLI behavior: exit codes, file formats, seeded permutations, and
//! round-trip agreement between generated files and in-memory construction.

mod common;

use common::{field, jcover};
use jcover::cli::seed_permutation;
use jcover::constructions::family_generalized;
use jcover::files::{parse_family, read_family, serialize_family, ParamsHint, ReportDoc};
use jcover::verifier::{verify_fast_range, VerifyOptions};
use tempfile::TempDir;

#[test]
fn gen_gen2m_exact_output() {
    let dir = TempDir::new().unwrap();
    let run = jcover(dir.path(), &["gen", "gen2m", "--m", "6"]);
    assert_eq!(run.code, 0);
    let text = std::fs::read_to_string(dir.path().join("gen2m-6.blocks")).unwrap();
    assert_eq!(
        text,
        "# provenance: generalized-2m(6)\n# params: n=12 k=6 r=3\n1 2 3 4 5 6\n7 8 9 10 11 12\n"
    );

    let missing_m = jcover(dir.path(), &["gen", "gen2m"]);
    assert_eq!(missing_m.code, 1);
    let odd_m = jcover(dir.path(), &["gen", "gen2m", "--m", "7"]);
    assert_eq!(odd_m.code, 1);
}

#[test]
fn gen_seed_relabels_and_records_permutation() {
    let dir = TempDir::new().unwrap();
    let run = jcover(dir.path(), &["gen", "gen2m", "--m", "8", "--seed", "5", "--out", "p.blocks"]);
    assert_eq!(run.code, 0);
    let text = std::fs::read_to_string(dir.path().join("p.blocks")).unwrap();
    assert!(text.contains("# provenance: generalized-2m(8)+perm(seed=5)"));
    assert!(text.contains("# seed: 5"));
    let perm = seed_permutation(16, 5);
    let listed: Vec<String> = perm.iter().map(u32::to_string).collect();
    assert!(text.contains(&format!("# permutation: {}", listed.join(" "))));

    // the permuted family is the plain family relabeled
    let parsed = read_family(&dir.path().join("p.blocks"), ParamsHint::default()).unwrap();
    let plain = family_generalized(8).unwrap();
    let expect = plain.permuted(&perm, parsed.provenance()).unwrap();
    assert_eq!(parsed.blocks(), expect.blocks());

    // constructive verification reconstructs the permuted scheme from the header
    let verify = jcover(dir.path(), &["verify", "p.blocks", "--expect-cover", "--mode", "constructive"]);
    assert_eq!(verify.code, 0, "{}", verify.stderr);

    // same seed, same file; different seed, different blocks
    let again = jcover(dir.path(), &["gen", "gen2m", "--m", "8", "--seed", "5", "--out", "q.blocks"]);
    assert_eq!(again.code, 0);
    assert_eq!(std::fs::read(dir.path().join("p.blocks")).unwrap(), std::fs::read(dir.path().join("q.blocks")).unwrap());
    jcover(dir.path(), &["gen", "gen2m", "--m", "8", "--seed", "6", "--out", "r.blocks"]);
    assert_ne!(std::fs::read(dir.path().join("p.blocks")).unwrap(), std::fs::read(dir.path().join("r.blocks")).unwrap());
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "f388"]).code, 0);

    // expecting a cover from a non-cover is the distinguishable failure;
    // the range brackets the first uncovered rank (colex 2,706,468)
    let run = jcover(dir.path(), &["verify", "f388.blocks", "--expect-cover", "--range", "2700000:2810000"]);
    assert_eq!(run.code, 2);
    assert!(field(&run.stdout, "covered") == "no");
    assert!(run.stdout.contains("witness: 1 2 19 20 37 38"));

    // missing file is a plain error
    let run = jcover(dir.path(), &["verify", "nope.blocks"]);
    assert_eq!(run.code, 1);

    // constructive mode needs a two-part provenance
    let run = jcover(dir.path(), &["verify", "f388.blocks", "--mode", "constructive"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("two-part"));

    // corrupt file: non-ascending line
    std::fs::write(dir.path().join("bad.blocks"), "1 2 3 5 4 6\n").unwrap();
    let run = jcover(dir.path(), &["verify", "bad.blocks"]);
    assert_eq!(run.code, 1);

    // usage errors exit 1, not clap's default 2
    let run = jcover(dir.path(), &["verify"]);
    assert_eq!(run.code, 1);
    let run = jcover(dir.path(), &["no-such-command"]);
    assert_eq!(run.code, 1);
}

#[test]
fn verify_constructive_rejects_pruned_provenance() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "gen2m", "--m", "8"]).code, 0);
    assert_eq!(
        jcover(dir.path(), &["prune", "gen2m-8.blocks", "--out", "p8.blocks"]).code,
        0
    );
    let run = jcover(dir.path(), &["verify", "p8.blocks", "--mode", "constructive"]);
    assert_eq!(run.code, 1, "pruned families have no generating scheme");
}

#[test]
fn query_exit_codes_and_validation() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "f388"]).code, 0);

    // a balanced (2,2,2) pick defeats the grouped family: exit 2
    let run = jcover(dir.path(), &["query", "f388.blocks", "--pick", "1,2,19,20,37,38"]);
    assert_eq!(run.code, 2);
    assert_eq!(field(&run.stdout, "matches"), "0");
    assert_eq!(field(&run.stdout, "trios covered"), "0/20");

    // duplicates and out-of-range picks are usage errors
    assert_eq!(jcover(dir.path(), &["query", "f388.blocks", "--pick", "1,1,2,3,4,5"]).code, 1);
    assert_eq!(jcover(dir.path(), &["query", "f388.blocks", "--pick", "1,2,3,4,5,61"]).code, 1);
    assert_eq!(jcover(dir.path(), &["query", "f388.blocks", "--pick", "1,2,3"]).code, 1);
    assert_eq!(jcover(dir.path(), &["query", "f388.blocks", "--pick", "1,2,x,4,5,6"]).code, 1);

    // a concentrated pick matches
    let run = jcover(dir.path(), &["query", "f388.blocks", "--pick", "1,2,3,4,5,6"]);
    assert_eq!(run.code, 0);
}

#[test]
fn prune_non_cover_is_semantic_failure() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "f388"]).code, 0);
    let run = jcover(dir.path(), &["prune", "f388.blocks", "--out", "x.blocks"]);
    assert_eq!(run.code, 2);
    assert!(run.stdout.contains("does not cover"));
    assert!(run.stdout.contains("1 2 19 20 37 38"), "first uncovered subset by rank");
    assert!(!dir.path().join("x.blocks").exists());
}

#[test]
fn prune_seeded_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "gen2m", "--m", "8"]).code, 0);
    let a = jcover(
        dir.path(),
        &["prune", "gen2m-8.blocks", "--order", "random", "--seed", "3", "--out", "a.blocks"],
    );
    let b = jcover(
        dir.path(),
        &["prune", "gen2m-8.blocks", "--order", "random", "--seed", "3", "--out", "b.blocks"],
    );
    assert_eq!(a.code, 0);
    assert_eq!(b.code, 0);
    assert_eq!(
        std::fs::read(dir.path().join("a.blocks")).unwrap(),
        std::fs::read(dir.path().join("b.blocks")).unwrap()
    );
    let reverify = jcover(dir.path(), &["verify", "a.blocks", "--expect-cover"]);
    assert_eq!(reverify.code, 0);
}

#[test]
fn compositions_argument_checks() {
    let dir = TempDir::new().unwrap();
    let mismatch = jcover(dir.path(), &["compositions", "--k", "6", "--parts", "2", "--scheme", "f334"]);
    assert_eq!(mismatch.code, 1);
    let ok = jcover(dir.path(), &["compositions", "--k", "6", "--parts", "2", "--scheme", "f55"]);
    assert_eq!(ok.code, 0);
    assert!(ok.stdout.contains("total 50063860"));
    let zero = jcover(dir.path(), &["compositions", "--k", "6", "--parts", "0"]);
    assert_eq!(zero.code, 1);
}

#[test]
fn bounds_small_and_invalid() {
    let dir = TempDir::new().unwrap();
    let run = jcover(dir.path(), &["bounds", "--n", "12", "--k", "6", "--r", "3"]);
    assert_eq!(run.code, 0);
    assert_eq!(field(&run.stdout, "neighborhood"), "662");
    assert_eq!(field(&run.stdout, "lower_bound"), "2");

    let run = jcover(dir.path(), &["bounds", "--n", "12", "--k", "6", "--r", "6"]);
    assert_eq!(field(&run.stdout, "lower_bound"), "1");

    assert_eq!(jcover(dir.path(), &["bounds", "--n", "5", "--k", "6", "--r", "3"]).code, 1);
    assert_eq!(jcover(dir.path(), &["bounds", "--n", "65", "--k", "6", "--r", "3"]).code, 1);
}

#[test]
fn generated_file_verifies_like_memory() {
    // gen -> file -> parse -> verify equals in-memory construct -> verify
    let fam = family_generalized(8).unwrap();
    let text = serialize_family(&fam, &[]);
    let parsed = parse_family(&text, ParamsHint::default()).unwrap();
    assert_eq!(parsed, fam);
    let opts = VerifyOptions { histogram: true, witness_limit: 16, workers: 2 };
    let total = fam.params().total_subsets();
    let direct = verify_fast_range(&fam, 0, total, &opts).unwrap();
    let roundtrip = verify_fast_range(&parsed, 0, total, &opts).unwrap();
    assert!(direct.same_census(&roundtrip));
}

#[test]
fn verify_range_modes_agree_via_cli() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "f910"]).code, 0);
    let fast = jcover(
        dir.path(),
        &["verify", "f910.blocks", "--range", "123456:173456", "--report", "f.json"],
    );
    let reference = jcover(
        dir.path(),
        &["verify", "f910.blocks", "--range", "123456:173456", "--mode", "reference", "--report", "r.json"],
    );
    assert_eq!(fast.code, 0);
    assert_eq!(reference.code, 0);
    let f = ReportDoc::read(&dir.path().join("f.json")).unwrap();
    let r = ReportDoc::read(&dir.path().join("r.json")).unwrap();
    assert_eq!(f.histogram, r.histogram);
    assert_eq!(f.uncovered_count, r.uncovered_count);
    assert_eq!(f.subsets_total, 50_000);
    assert_eq!(f.mode, "fast");
    assert_eq!(r.mode, "reference");
}

#[test]
fn report_field_layout_is_fixed() {
    let dir = TempDir::new().unwrap();
    assert_eq!(jcover(dir.path(), &["gen", "gen2m", "--m", "6"]).code, 0);
    assert_eq!(
        jcover(dir.path(), &["verify", "gen2m-6.blocks", "--report", "r.json"]).code,
        0
    );
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let keys = ["\"n\"", "\"k\"", "\"radius\"", "\"family_size\"", "\"subsets_total\"",
        "\"uncovered_count\"", "\"histogram\"", "\"witnesses\"", "\"mode\"",
        "\"elapsed_ms\"", "\"workers\"", "\"provenance\""];
    let mut last = 0usize;
    for key in keys {
        let at = text.find(key).unwrap_or_else(|| panic!("missing {key}"));
        assert!(at > last || last == 0, "{key} out of order");
        last = at;
    }
    let doc = ReportDoc::from_json(&text).unwrap();
    assert_eq!(doc.provenance, "generalized-2m(6)");
    assert_eq!(doc.uncovered_count, 0);
}
