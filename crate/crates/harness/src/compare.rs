//! Checks a summary file against a reference table.
//!
//! A cell is an (algorithm, SNR) pair present in both files. It passes when
//! both steady-state levels are within `±mse_tol_db` of the reference and
//! both convergence iterations are within a multiplicative `iter_factor`.
//! Reference rows for algorithms the summary does not contain are listed as
//! skipped; the timing column is never compared.

use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::{REFERENCE_HEADER, SUMMARY_HEADER};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub snr_db: f64,
    pub steady_mse_db: f64,
    pub mse_conv_iter: Option<usize>,
    pub steady_nwd_db: f64,
    pub nwd_conv_iter: Option<usize>,
    pub runs_used: usize,
    pub runs_diverged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub algorithm: String,
    pub snr_db: f64,
    pub mse_conv_iter: usize,
    pub steady_mse_db: f64,
    pub nwd_conv_iter: usize,
    pub steady_nwd_db: f64,
    pub time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub ours: Option<f64>,
    pub reference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellVerdict {
    pub algorithm: String,
    pub snr_db: f64,
    pub checks: Vec<Check>,
}

impl CellVerdict {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub cells: Vec<CellVerdict>,
    pub skipped: Vec<(String, f64)>,
    pub mse_tol_db: f64,
    pub iter_factor: f64,
}

impl Comparison {
    pub fn pass(&self) -> bool {
        !self.cells.is_empty() && self.cells.iter().all(CellVerdict::pass)
    }

    /// Mean `ours − reference` steady-state NWD per algorithm, in first-seen
    /// order. The NWD normalisation differs between implementations, so a
    /// constant offset is reported rather than hidden.
    pub fn nwd_offsets(&self) -> Vec<(String, f64)> {
        let mut acc: Vec<(String, f64, usize)> = Vec::new();
        for cell in &self.cells {
            let Some(check) = cell.checks.iter().find(|c| c.name == "steady_nwd_db") else {
                continue;
            };
            let Some(ours) = check.ours else { continue };
            let diff = ours - check.reference;
            match acc.iter_mut().find(|(a, _, _)| *a == cell.algorithm) {
                Some(slot) => {
                    slot.1 += diff;
                    slot.2 += 1;
                }
                None => acc.push((cell.algorithm.clone(), diff, 1)),
            }
        }
        acc.into_iter()
            .map(|(a, sum, n)| (a, sum / n as f64))
            .collect()
    }
}

fn read_records(path: &Path, header: &str) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let found = reader
        .headers()
        .map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(HarnessError::format(
            path,
            format!("expected header `{header}`, found `{found}`"),
        ));
    }
    reader
        .records()
        .map(|r| {
            r.map_err(|source| HarnessError::Csv {
                path: path.to_path_buf(),
                source,
            })
        })
        .collect()
}

fn field<T: std::str::FromStr>(
    path: &Path,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| HarnessError::format(path, format!("bad {name} in row {:?}", rec)))
}

fn conv(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<Option<usize>> {
    match rec.get(i) {
        Some("none") => Ok(None),
        _ => field(path, rec, i, name).map(Some),
    }
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    read_records(path, SUMMARY_HEADER)?
        .iter()
        .map(|r| {
            Ok(SummaryRow {
                algorithm: field(path, r, 0, "algorithm")?,
                snr_db: field(path, r, 1, "snr_db")?,
                steady_mse_db: field(path, r, 2, "steady_mse_db")?,
                mse_conv_iter: conv(path, r, 3, "mse_conv_iter")?,
                steady_nwd_db: field(path, r, 4, "steady_nwd_db")?,
                nwd_conv_iter: conv(path, r, 5, "nwd_conv_iter")?,
                runs_used: field(path, r, 6, "runs_used")?,
                runs_diverged: field(path, r, 7, "runs_diverged")?,
            })
        })
        .collect()
}

pub fn read_reference(path: impl AsRef<Path>) -> Result<Vec<ReferenceRow>> {
    let path = path.as_ref();
    read_records(path, REFERENCE_HEADER)?
        .iter()
        .map(|r| {
            Ok(ReferenceRow {
                algorithm: field(path, r, 0, "algorithm")?,
                snr_db: field(path, r, 1, "snr_db")?,
                mse_conv_iter: field(path, r, 2, "mse_conv_iter")?,
                steady_mse_db: field(path, r, 3, "steady_mse_db")?,
                nwd_conv_iter: field(path, r, 4, "nwd_conv_iter")?,
                steady_nwd_db: field(path, r, 5, "steady_nwd_db")?,
                time_s: r.get(6).and_then(|s| s.parse().ok()),
            })
        })
        .collect()
}

fn level_check(name: &'static str, ours: f64, reference: f64, tol: f64) -> Check {
    Check {
        name,
        ours: Some(ours),
        reference,
        pass: (ours - reference).abs() <= tol,
    }
}

fn iter_check(name: &'static str, ours: Option<usize>, reference: usize, factor: f64) -> Check {
    let pass = match ours {
        // an iteration index of 0 is compared as 1 so the ratio stays finite
        Some(n) => {
            let (a, b) = ((n.max(1)) as f64, (reference.max(1)) as f64);
            a <= b * factor && b <= a * factor
        }
        None => false,
    };
    Check {
        name,
        ours: ours.map(|n| n as f64),
        reference: reference as f64,
        pass,
    }
}

/// Compares parsed rows.
pub fn compare_rows(
    summary: &[SummaryRow],
    reference: &[ReferenceRow],
    mse_tol_db: f64,
    iter_factor: f64,
) -> Comparison {
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for r in reference {
        let Some(s) = summary
            .iter()
            .find(|s| s.algorithm == r.algorithm && s.snr_db == r.snr_db)
        else {
            skipped.push((r.algorithm.clone(), r.snr_db));
            continue;
        };
        cells.push(CellVerdict {
            algorithm: r.algorithm.clone(),
            snr_db: r.snr_db,
            checks: vec![
                level_check(
                    "steady_mse_db",
                    s.steady_mse_db,
                    r.steady_mse_db,
                    mse_tol_db,
                ),
                iter_check(
                    "mse_conv_iter",
                    s.mse_conv_iter,
                    r.mse_conv_iter,
                    iter_factor,
                ),
                level_check(
                    "steady_nwd_db",
                    s.steady_nwd_db,
                    r.steady_nwd_db,
                    mse_tol_db,
                ),
                iter_check(
                    "nwd_conv_iter",
                    s.nwd_conv_iter,
                    r.nwd_conv_iter,
                    iter_factor,
                ),
            ],
        });
    }
    Comparison {
        cells,
        skipped,
        mse_tol_db,
        iter_factor,
    }
}

/// Reads both files and compares them cell by cell.
pub fn compare_to_reference(
    summary_path: impl AsRef<Path>,
    reference_path: impl AsRef<Path>,
    mse_tol_db: f64,
    iter_factor: f64,
) -> Result<Comparison> {
    let summary = read_summary(&summary_path)?;
    let reference = read_reference(&reference_path)?;
    let cmp = compare_rows(&summary, &reference, mse_tol_db, iter_factor);
    if cmp.cells.is_empty() {
        return Err(HarnessError::format(
            summary_path.as_ref(),
            "no (algorithm, snr_db) cell in common with the reference",
        ));
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: &str, snr: f64, mse: f64, it: usize) -> (SummaryRow, ReferenceRow) {
        (
            SummaryRow {
                algorithm: alg.into(),
                snr_db: snr,
                steady_mse_db: mse,
                mse_conv_iter: Some(it),
                steady_nwd_db: mse - 5.0,
                nwd_conv_iter: Some(it),
                runs_used: 1,
                runs_diverged: 0,
            },
            ReferenceRow {
                algorithm: alg.into(),
                snr_db: snr,
                mse_conv_iter: it,
                steady_mse_db: mse,
                nwd_conv_iter: it,
                steady_nwd_db: mse - 5.0,
                time_s: None,
            },
        )
    }

    #[test]
    fn identical_tables_pass() {
        let (s, r) = row("FLMS", 10.0, -10.2, 45);
        let cmp = compare_rows(&[s], &[r], 0.5, 2.0);
        assert!(cmp.pass());
    }

    #[test]
    fn level_off_by_twice_tolerance_fails() {
        let (mut s, r) = row("FLMS", 10.0, -10.2, 45);
        let (s2, r2) = row("FLMS", 20.0, -20.2, 60);
        s.steady_mse_db += 1.0;
        let cmp = compare_rows(&[s, s2], &[r, r2], 0.5, 2.0);
        assert!(!cmp.cells[0].pass());
        assert!(cmp.cells[1].pass());
        assert!(!cmp.pass());
    }

    #[test]
    fn iteration_factor_is_symmetric() {
        assert!(iter_check("x", Some(90), 45, 2.0).pass);
        assert!(iter_check("x", Some(23), 45, 2.0).pass);
        assert!(!iter_check("x", Some(91), 45, 2.0).pass);
        assert!(!iter_check("x", Some(22), 45, 2.0).pass);
        assert!(!iter_check("x", None, 45, 2.0).pass);
    }

    #[test]
    fn missing_algorithms_are_skipped() {
        let (s, r) = row("FLMS", 10.0, -10.2, 45);
        let (_, amf) = row("AMFLMS", 10.0, -10.2, 80);
        let cmp = compare_rows(&[s], &[r, amf], 0.5, 2.0);
        assert_eq!(cmp.skipped, vec![("AMFLMS".to_string(), 10.0)]);
        assert!(cmp.pass());
    }

    #[test]
    fn nwd_offset_is_mean_difference_per_algorithm() {
        let (mut a, ra) = row("RVSS-FLMS", 10.0, -10.2, 20);
        let (mut b, rb) = row("RVSS-FLMS", 20.0, -20.2, 38);
        let (f, rf) = row("FLMS", 10.0, -10.2, 45);
        a.steady_nwd_db -= 10.0;
        b.steady_nwd_db -= 20.0;
        let cmp = compare_rows(&[a, b, f], &[ra, rb, rf], 0.5, 2.0);
        let offsets = cmp.nwd_offsets();
        assert_eq!(offsets.len(), 2);
        assert_eq!(offsets[0].0, "RVSS-FLMS");
        assert!((offsets[0].1 + 15.0).abs() < 1e-12);
        assert_eq!(offsets[1], ("FLMS".to_string(), 0.0));
    }
}
