//! Command-line surface: gen, verify, bounds, query, prune, compositions.
//!
//! Exit codes are fixed: 0 success (or covered), 2 semantic failure
//! (uncovered when a cover was expected, no matching block, input not a
//! cover), 1 usage or IO error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bounds::sphere_covering_lower_bound;
use crate::constructions::{
    composition_profiles, enumerate_compositions, family_388, family_828, family_910,
    family_generalized, scheme_generalized, scheme_two_halves, CompositionProfile,
    ConstructionError, PartitionScheme,
};
use crate::core::{binomial, Block, CoreError, Family, Params};
use crate::files::{self, FileError, ParamsHint, ReportDoc};
use crate::optimizer::{prune_redundant, OptimizerError, PruneOrder};
use crate::verifier::{
    verify_constructive, verify_fast_range, verify_reference_range, CoverageReport, VerifyError,
    VerifyOptions,
};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(
    name = "jcover",
    version,
    about = "Build, verify, bound, and shrink covering families of 6-subsets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    F910,
    F388,
    F828,
    Gen2m,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fast,
    Reference,
    Constructive,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Index,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    F55,
    F334,
}

#[derive(Subcommand)]
enum Command {
    /// Write one of the shipped block families to a file
    Gen {
        /// Which construction to emit
        family: FamilyName,
        /// Half size m for gen2m (even, m/2 >= 3; ground set is [2m])
        #[arg(long)]
        m: Option<u32>,
        /// Relabel the ground set with a seeded permutation
        #[arg(long)]
        seed: Option<u64>,
        /// Output path (default <family>.blocks)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively census a block file's covering radius
    Verify {
        blocks: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
        mode: ModeArg,
        /// Exit 2 unless every subset is covered; enables the early-exit scan
        #[arg(long)]
        expect_cover: bool,
        /// Uncovered subsets to keep as witnesses (0 = count only)
        #[arg(long, default_value_t = 16)]
        witness_limit: usize,
        /// Worker threads (0 = all available)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write the full report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
        /// Restrict to subset ranks START:END
        #[arg(long, value_parser = parse_range)]
        range: Option<(u64, u64)>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Print the neighborhood size and sphere-covering lower bound
    Bounds {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
    },
    /// List every family block sharing enough elements with a drawn subset
    Query {
        blocks: PathBuf,
        /// Comma-separated drawn numbers, e.g. 1,2,7,9,31,45
        #[arg(long)]
        pick: String,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Drop redundant blocks while preserving full coverage
    Prune {
        blocks: PathBuf,
        #[arg(long, value_enum, default_value_t = OrderArg::Index)]
        order: OrderArg,
        /// Seed for --order random (default 0)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the ledger build (0 = all available)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Tabulate how k elements can distribute across scheme parts
    Compositions {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        parts: usize,
        /// Attach subset counts for a named scheme (f55 = 30/30, f334 = 18/18/24)
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
    },
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a: u64 = a.parse().map_err(|_| "bad START".to_string())?;
    let b: u64 = b.parse().map_err(|_| "bad END".to_string())?;
    if a > b {
        return Err("START must not exceed END".into());
    }
    Ok((a, b))
}

/// Deterministic relabeling of 1..=n drawn from a seeded generator.
pub fn seed_permutation(n: u32, seed: u64) -> Vec<u32> {
    let mut perm: Vec<u32> = (1..=n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    perm
}

/// Rebuild the partition scheme a family was generated from, when its
/// provenance names one (including seeded relabelings). Pruned or ad-hoc
/// families have no scheme and cannot be verified constructively.
pub fn scheme_for_provenance(provenance: &str) -> Option<PartitionScheme> {
    let (base, suffix) = match provenance.split_once('+') {
        Some((a, b)) => (a, Some(b)),
        None => (provenance, None),
    };
    let scheme = if base == "two-halves-910" {
        scheme_two_halves()
    } else {
        let m: u32 =
            base.strip_prefix("generalized-2m(")?.strip_suffix(')')?.parse().ok()?;
        scheme_generalized(m).ok()?
    };
    match suffix {
        None => Some(scheme),
        Some(s) => {
            let seed: u64 = s.strip_prefix("perm(seed=")?.strip_suffix(')')?.parse().ok()?;
            let perm = seed_permutation(scheme.params().n(), seed);
            scheme.permuted(&perm).ok()
        }
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Gen { family, m, seed, out } => cmd_gen(family, m, seed, out),
        Command::Verify { blocks, mode, expect_cover, witness_limit, workers, report, range, n, k, r } => {
            cmd_verify(&blocks, mode, expect_cover, witness_limit, workers, report, range, ParamsHint { n, k, radius: r })
        }
        Command::Bounds { n, k, r } => cmd_bounds(n, k, r),
        Command::Query { blocks, pick, n, k, r } => {
            cmd_query(&blocks, &pick, ParamsHint { n, k, radius: r })
        }
        Command::Prune { blocks, order, seed, out, workers, n, k, r } => {
            cmd_prune(&blocks, order, seed, &out, workers, ParamsHint { n, k, radius: r })
        }
        Command::Compositions { k, parts, scheme } => cmd_compositions(k, parts, scheme),
    }
}

fn load_family(path: &Path, hint: ParamsHint) -> Result<Family, CliError> {
    Ok(files::read_family(path, hint)?)
}

fn join_elements(elems: &[u32]) -> String {
    elems.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_gen(
    name: FamilyName,
    m: Option<u32>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let family = match name {
        FamilyName::F910 => family_910(),
        FamilyName::F388 => family_388(),
        FamilyName::F828 => family_828(),
        FamilyName::Gen2m => {
            let m = m.ok_or_else(|| CliError::Usage("gen2m requires --m".into()))?;
            family_generalized(m)?
        }
    };
    let default_name = match name {
        FamilyName::F910 => "f910.blocks".to_string(),
        FamilyName::F388 => "f388.blocks".to_string(),
        FamilyName::F828 => "f828.blocks".to_string(),
        FamilyName::Gen2m => format!("gen2m-{}.blocks", m.unwrap()),
    };
    let path = out.unwrap_or_else(|| PathBuf::from(default_name));
    let (family, extra) = match seed {
        None => (family, Vec::new()),
        Some(s) => {
            let perm = seed_permutation(family.params().n(), s);
            let provenance = format!("{}+perm(seed={s})", family.provenance());
            let permuted = family.permuted(&perm, provenance)?;
            let listed = join_elements(&perm);
            (permuted, vec![format!("seed: {s}"), format!("permutation: {listed}")])
        }
    };
    files::write_family(&path, &family, &extra)?;
    println!("wrote {} blocks ({}) to {}", family.len(), family.provenance(), path.display());
    Ok(0)
}

fn print_summary(report: &CoverageReport) {
    println!("mode: {}", report.mode.as_str());
    println!("blocks: {}", report.family_size);
    println!("subsets: {}", report.subsets_total);
    println!("uncovered: {}", report.uncovered_count);
    println!("covered: {}", if report.covered() { "yes" } else { "no" });
    for w in &report.witnesses {
        println!("witness: {}", join_elements(w));
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    blocks: &Path,
    mode: ModeArg,
    expect_cover: bool,
    witness_limit: usize,
    workers: usize,
    report_path: Option<PathBuf>,
    range: Option<(u64, u64)>,
    hint: ParamsHint,
) -> Result<i32, CliError> {
    let family = load_family(blocks, hint)?;
    let total = family.params().total_subsets();
    let (start, end) = range.unwrap_or((0, total));
    let outcome = match mode {
        ModeArg::Fast => {
            let opts = VerifyOptions { histogram: !expect_cover, witness_limit, workers };
            verify_fast_range(&family, start, end, &opts)
        }
        ModeArg::Reference => verify_reference_range(&family, start, end, witness_limit),
        ModeArg::Constructive => {
            if range.is_some() {
                return Err(CliError::Usage("--range is not supported with --mode constructive".into()));
            }
            let scheme = scheme_for_provenance(family.provenance()).ok_or_else(|| {
                CliError::Usage(format!(
                    "constructive mode needs a two-part construction; provenance {:?} names none",
                    family.provenance()
                ))
            })?;
            let opts = VerifyOptions { histogram: false, witness_limit, workers };
            verify_constructive(&scheme, &family, &opts)
        }
    };
    let report = match outcome {
        Ok(r) => r,
        Err(VerifyError::ConstructionFailure { subset }) => {
            println!("constructive check failed at subset: {}", join_elements(&subset));
            return Ok(2);
        }
        Err(e) => return Err(e.into()),
    };
    print_summary(&report);
    if let Some(path) = report_path {
        ReportDoc::from_report(&report, family.provenance()).write(&path)?;
    }
    if expect_cover && report.uncovered_count > 0 {
        return Ok(2);
    }
    Ok(0)
}

fn cmd_bounds(n: u32, k: u32, r: u32) -> Result<i32, CliError> {
    let params = Params::new(n, k, r)?;
    let summary = sphere_covering_lower_bound(&params);
    println!("n = {n}");
    println!("k = {k}");
    println!("radius = {r}");
    println!("neighborhood = {}", summary.neighborhood_size);
    println!("total_subsets = {}", summary.total_subsets);
    println!("lower_bound = {}", summary.lower_bound);
    Ok(0)
}

fn trio_subsets(elems: &[u32], take: usize) -> Vec<Vec<u32>> {
    fn rec(elems: &[u32], take: usize, from: usize, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if acc.len() == take {
            out.push(acc.clone());
            return;
        }
        for i in from..elems.len() {
            acc.push(elems[i]);
            rec(elems, take, i + 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(elems, take, 0, &mut Vec::new(), &mut out);
    out
}

fn cmd_query(blocks: &Path, pick: &str, hint: ParamsHint) -> Result<i32, CliError> {
    let family = load_family(blocks, hint)?;
    let params = *family.params();
    let elems: Vec<u32> = pick
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("bad pick element {t:?}"))))
        .collect::<Result<_, _>>()?;
    let s = Block::from_elements(&elems, &params)?;
    let t = params.threshold();
    println!("pick: {s}");

    let mut matches = 0u64;
    for b in family.blocks() {
        if s.intersection_size(*b) >= t {
            matches += 1;
            let shared = Block::from_mask_unchecked(s.mask() & b.mask()).elements();
            println!("match: {b} | shared: {}", join_elements(&shared));
        }
    }
    let mut covered = 0u64;
    let trio_size = t as usize;
    for trio in trio_subsets(&s.elements(), trio_size) {
        let mask = trio.iter().fold(0u64, |acc, &e| acc | (1u64 << (e - 1)));
        if let Some(b) = family.blocks().iter().find(|b| b.mask() & mask == mask) {
            covered += 1;
            println!("trio: {} | block: {b}", join_elements(&trio));
        }
    }
    println!("matches: {matches}");
    println!("trios covered: {covered}/{}", binomial(params.k(), t));
    Ok(if matches > 0 { 0 } else { 2 })
}

fn cmd_prune(
    blocks: &Path,
    order: OrderArg,
    seed: Option<u64>,
    out: &Path,
    workers: usize,
    hint: ParamsHint,
) -> Result<i32, CliError> {
    let family = load_family(blocks, hint)?;
    let order = match order {
        OrderArg::Index => PruneOrder::Index,
        OrderArg::Random => PruneOrder::Seeded(seed.unwrap_or(0)),
    };
    match prune_redundant(&family, order, workers) {
        Ok(pruned) => {
            files::write_family(out, &pruned, &[])?;
            println!("pruned: {} -> {}", family.len(), pruned.len());
            println!("wrote {}", out.display());
            Ok(0)
        }
        Err(OptimizerError::NotACover { witness }) => {
            println!("input does not cover; first uncovered subset: {}", join_elements(&witness));
            Ok(2)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_compositions(k: u32, parts: usize, scheme: Option<SchemeArg>) -> Result<i32, CliError> {
    if parts == 0 {
        return Err(CliError::Usage("--parts must be at least 1".into()));
    }
    let sizes: Option<Vec<u32>> = scheme.map(|s| match s {
        SchemeArg::F55 => vec![30, 30],
        SchemeArg::F334 => vec![18, 18, 24],
    });
    if let Some(sizes) = &sizes {
        if sizes.len() != parts {
            return Err(CliError::Usage(format!(
                "scheme has {} parts but --parts is {parts}",
                sizes.len()
            )));
        }
    }
    let threshold = 3;
    let rows: Vec<CompositionProfile> = match &sizes {
        Some(sizes) => composition_profiles(k, sizes, threshold),
        None => enumerate_compositions(k, parts)
            .into_iter()
            .map(|counts| CompositionProfile {
                guaranteed: counts.iter().any(|&x| x >= threshold),
                counts,
                subset_count: 0,
            })
            .collect(),
    };
    let mut total = 0u64;
    for row in &rows {
        let profile = row
            .counts
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let flag = if row.guaranteed { "guaranteed" } else { "not-guaranteed" };
        if sizes.is_some() {
            println!("({profile}) {flag} {}", row.subset_count);
            total += row.subset_count;
        } else {
            println!("({profile}) {flag}");
        }
    }
    if sizes.is_some() {
        println!("total {total}");
    }
    Ok(0)
}
