//! Shared helpers for the integration suites: an independent Pascal binomial,
//! a region-composition counting oracle, and a runner for the CLI binary.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// Pascal-recurrence binomial, independent of the crate's arithmetic.
pub fn pascal(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let mut row = vec![0u64; k as usize + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k as usize).rev() {
            row[j] += row[j - 1];
        }
    }
    row[k as usize]
}

/// Count k-subsets NOT covered by any complete pair-recombination region.
///
/// The ground set is partitioned into cells (the base blocks); each region is
/// a union of cells, carries every pair-triple of its elements, and therefore
/// covers a subset exactly when the subset puts `threshold` or more elements
/// inside it. Counting walks all distributions of k elements over the cells,
/// weighting each by a product of binomials.
pub fn uncovered_by_regions(
    cell_sizes: &[u32],
    regions: &[Vec<usize>],
    k: u32,
    threshold: u32,
) -> u64 {
    fn rec(
        sizes: &[u32],
        regions: &[Vec<usize>],
        threshold: u32,
        cell: usize,
        left: u32,
        dist: &mut Vec<u32>,
        total: &mut u64,
    ) {
        if cell == sizes.len() {
            if left == 0
                && regions
                    .iter()
                    .all(|r| r.iter().map(|&c| dist[c]).sum::<u32>() < threshold)
            {
                let weight: u64 =
                    dist.iter().zip(sizes).map(|(&x, &s)| pascal(s, x)).product();
                *total += weight;
            }
            return;
        }
        for x in 0..=left.min(sizes[cell]) {
            dist.push(x);
            rec(sizes, regions, threshold, cell + 1, left - x, dist, total);
            dist.pop();
        }
    }
    let mut total = 0;
    rec(cell_sizes, regions, threshold, 0, k, &mut Vec::new(), &mut total);
    total
}

/// Ten 6-element cells of [60]; regions given as 1-based base-block lists.
pub fn uncovered_over_60(regions: &[&[usize]]) -> u64 {
    let cells = vec![6u32; 10];
    let regions: Vec<Vec<usize>> =
        regions.iter().map(|r| r.iter().map(|&g| g - 1).collect()).collect();
    uncovered_by_regions(&cells, &regions, 6, 3)
}

pub struct CliResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run the jcover binary with the given working directory.
pub fn jcover(dir: &Path, args: &[&str]) -> CliResult {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_jcover"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn jcover");
    CliResult {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Grab the `value` out of a `key = value` or `key: value` stdout line.
pub fn field<'a>(stdout: &'a str, key: &str) -> &'a str {
    for line in stdout.lines() {
        if let Some(rest) = line.strip_prefix(key) {
            let rest = rest.trim_start();
            if let Some(v) = rest.strip_prefix('=').or_else(|| rest.strip_prefix(':')) {
                return v.trim();
            }
        }
    }
    panic!("no line starting with {key:?} in:\n{stdout}");
}
