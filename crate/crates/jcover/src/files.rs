//! Flat-file formats: block files (one ascending k-subset per line, `#`
//! header comments) and JSON coverage reports. Both are byte-stable for
//! fixed inputs so generated families diff cleanly.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Block, CoreError, Family, Params};
use crate::verifier::CoverageReport;

#[derive(Debug, Error)]
pub enum FileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("report: {0}")]
    Report(#[from] serde_json::Error),
}

/// Fields a caller may pin before parsing; anything unspecified comes from
/// the file header, then from the blocks themselves (n = largest element,
/// k = first line's width, radius = 3).
#[derive(Debug, Clone, Copy, Default)]
pub struct ParamsHint {
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub radius: Option<u32>,
}

/// Render a family as a block file: provenance and parameter header comments,
/// then one block per line, elements ascending, single-space separated.
pub fn serialize_family(family: &Family, extra_comments: &[String]) -> String {
    let p = family.params();
    let mut out = String::new();
    writeln!(out, "# provenance: {}", family.provenance()).unwrap();
    writeln!(out, "# params: n={} k={} r={}", p.n(), p.k(), p.radius()).unwrap();
    for c in extra_comments {
        writeln!(out, "# {c}").unwrap();
    }
    for b in family.blocks() {
        writeln!(out, "{b}").unwrap();
    }
    out
}

pub fn write_family(path: &Path, family: &Family, extra_comments: &[String]) -> Result<(), FileError> {
    std::fs::write(path, serialize_family(family, extra_comments))?;
    Ok(())
}

fn parse_header_params(value: &str, line: usize) -> Result<(u32, u32, u32), FileError> {
    let mut n = None;
    let mut k = None;
    let mut r = None;
    for token in value.split_whitespace() {
        let (key, num) = token.split_once('=').ok_or_else(|| FileError::Parse {
            line,
            msg: format!("malformed params token {token:?}"),
        })?;
        let num: u32 = num.parse().map_err(|_| FileError::Parse {
            line,
            msg: format!("bad number in params token {token:?}"),
        })?;
        match key {
            "n" => n = Some(num),
            "k" => k = Some(num),
            "r" => r = Some(num),
            _ => {
                return Err(FileError::Parse { line, msg: format!("unknown params key {key:?}") })
            }
        }
    }
    match (n, k, r) {
        (Some(n), Some(k), Some(r)) => Ok((n, k, r)),
        _ => Err(FileError::Parse { line, msg: "params header needs n=, k=, r=".into() }),
    }
}

/// Parse a block file. Explicit `hint` fields override the header, the header
/// overrides inference. Rejects empty lines, non-ascending or duplicate
/// elements within a line, wrong-width lines, and duplicate blocks.
pub fn parse_family(text: &str, hint: ParamsHint) -> Result<Family, FileError> {
    let mut provenance: Option<String> = None;
    let mut header: (Option<u32>, Option<u32>, Option<u32>) = (None, None, None);
    let mut rows: Vec<(usize, Vec<u32>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("provenance:") {
                provenance = Some(v.trim().to_string());
            } else if let Some(v) = comment.strip_prefix("params:") {
                let (n, k, r) = parse_header_params(v, line_no)?;
                header = (Some(n), Some(k), Some(r));
            }
            continue;
        }
        if line.is_empty() {
            return Err(FileError::Parse { line: line_no, msg: "empty line".into() });
        }
        let mut elems = Vec::new();
        for token in line.split(' ') {
            let e: u32 = token.parse().map_err(|_| FileError::Parse {
                line: line_no,
                msg: format!("bad element {token:?}"),
            })?;
            elems.push(e);
        }
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FileError::Parse {
                line: line_no,
                msg: "elements must be strictly ascending".into(),
            });
        }
        rows.push((line_no, elems));
    }

    let k = hint
        .k
        .or(header.1)
        .or_else(|| rows.first().map(|(_, r)| r.len() as u32))
        .ok_or(FileError::Parse { line: 0, msg: "no blocks and no k".into() })?;
    let inferred_n = rows.iter().flat_map(|(_, r)| r.iter().copied()).max().unwrap_or(k);
    let n = hint.n.or(header.0).unwrap_or(inferred_n);
    let radius = hint.radius.or(header.2).unwrap_or(3);
    let params = Params::new(n, k, radius)?;

    let mut blocks = Vec::with_capacity(rows.len());
    let mut seen: HashSet<u64> = HashSet::with_capacity(rows.len());
    for (line_no, elems) in rows {
        let block = Block::from_elements(&elems, &params).map_err(|e| FileError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if !seen.insert(block.mask()) {
            return Err(FileError::Parse { line: line_no, msg: "duplicate block".into() });
        }
        blocks.push(block);
    }
    let provenance = provenance.unwrap_or_else(|| "file".to_string());
    Ok(Family::new(params, blocks, provenance)?)
}

pub fn read_family(path: &Path, hint: ParamsHint) -> Result<Family, FileError> {
    let text = std::fs::read_to_string(path)?;
    parse_family(&text, hint)
}

/// The report document, field-for-field what a verification run produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub n: u32,
    pub k: u32,
    pub radius: u32,
    pub family_size: u64,
    pub subsets_total: u64,
    pub uncovered_count: u64,
    pub histogram: Option<Vec<u64>>,
    pub witnesses: Vec<Vec<u32>>,
    pub mode: String,
    pub elapsed_ms: u64,
    pub workers: u64,
    pub provenance: String,
}

impl ReportDoc {
    pub fn from_report(report: &CoverageReport, provenance: &str) -> Self {
        Self {
            n: report.params.n(),
            k: report.params.k(),
            radius: report.params.radius(),
            family_size: report.family_size as u64,
            subsets_total: report.subsets_total,
            uncovered_count: report.uncovered_count,
            histogram: report.histogram.clone(),
            witnesses: report.witnesses.clone(),
            mode: report.mode.as_str().to_string(),
            elapsed_ms: report.elapsed_ms,
            workers: report.worker_count as u64,
            provenance: provenance.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
