//! Learning-curve metrics: ensemble MSE, normalized weight difference,
//! steady-state levels and convergence iterations.
//!
//! Power quantities use `10 log10`, amplitude ratios `20 log10`. Values that
//! would be `-inf` (exact zero) are reported as [`DB_FLOOR`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::RunSeries;

/// Reported value for an exactly-zero power or ratio.
pub const DB_FLOOR: f64 = -320.0;

fn floor_db<T: Scalar>(db: T) -> T {
    let floor = T::lit(DB_FLOOR);
    if db.is_nan() || db < floor {
        floor
    } else {
        db
    }
}

#[inline]
fn power_db<T: Scalar>(power: T) -> T {
    if power <= T::zero() {
        return T::lit(DB_FLOOR);
    }
    floor_db(T::lit(10.0) * power.log10())
}

/// `20 log10(‖truth - estimated‖ / ‖truth‖)`.
pub fn nwd_db<T: Scalar>(estimated: &[T], truth: &[T]) -> Result<T> {
    if estimated.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: estimated.len(),
        });
    }
    let (mut diff, mut norm) = (T::zero(), T::zero());
    for (&w, &h) in estimated.iter().zip(truth) {
        diff = diff + (h - w) * (h - w);
        norm = norm + h * h;
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(norm > T::zero()) {
        return Err(Error::Domain {
            name: "truth norm",
            value: norm.as_f64(),
            domain: "(0, inf)",
        });
    }
    if diff == T::zero() {
        return Ok(T::lit(DB_FLOOR));
    }
    // 20 log10 of the norm ratio = 10 log10 of the squared ratio
    Ok(power_db(diff / norm))
}

/// One Monte-Carlo run tagged with its index; `Err` marks a diverged run.
#[derive(Debug, Clone)]
pub struct IndexedRun<T> {
    pub index: u64,
    pub outcome: Result<RunSeries<T>>,
}

impl<T> IndexedRun<T> {
    pub fn new(index: u64, outcome: Result<RunSeries<T>>) -> Self {
        Self { index, outcome }
    }
}

fn used_runs_sorted<T: Scalar>(runs: &[IndexedRun<T>]) -> Result<Vec<&RunSeries<T>>> {
    let mut ordered: Vec<&IndexedRun<T>> = runs.iter().collect();
    ordered.sort_by_key(|r| r.index);
    let used: Vec<&RunSeries<T>> = ordered
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let Some(first) = used.first() else {
        return Err(Error::EmptyEnsemble(runs.len()));
    };
    let len = first.len();
    if let Some(bad) = used.iter().find(|s| s.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: bad.len(),
        });
    }
    Ok(used)
}

// Accumulates deviations from the first run so that identical runs
// average to that run exactly.
fn mean_curve<T: Scalar>(used: &[&RunSeries<T>], pick: impl Fn(&RunSeries<T>) -> &[T]) -> Vec<T> {
    let base = pick(used[0]);
    let mut acc = vec![T::zero(); base.len()];
    for series in &used[1..] {
        for ((a, &v), &b) in acc.iter_mut().zip(pick(series)).zip(base) {
            *a = *a + (v - b);
        }
    }
    let inv = T::one() / T::lit(used.len() as f64);
    base.iter().zip(acc).map(|(&b, a)| b + a * inv).collect()
}

/// `10 log10` of the per-iteration mean of `e²` over non-diverged runs,
/// summed in run-index order.
pub fn ensemble_mse_db<T: Scalar>(runs: &[IndexedRun<T>]) -> Result<Vec<T>> {
    let used = used_runs_sorted(runs)?;
    Ok(mean_curve(&used, |s| &s.squared_error)
        .into_iter()
        .map(power_db)
        .collect())
}

/// Per-iteration mean of the per-run NWD (already in dB).
pub fn ensemble_nwd_db<T: Scalar>(runs: &[IndexedRun<T>]) -> Result<Vec<T>> {
    let used = used_runs_sorted(runs)?;
    Ok(mean_curve(&used, |s| &s.nwd_db))
}

/// Mean of the last `⌈tail_fraction · N⌉` entries.
pub fn steady_state_level<T: Scalar>(curve_db: &[T], tail_fraction: T) -> Result<T> {
    if curve_db.is_empty() {
        return Err(Error::Domain {
            name: "curve length",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    if !(tail_fraction > T::zero() && tail_fraction <= T::one()) {
        return Err(Error::Domain {
            name: "tail_fraction",
            value: tail_fraction.as_f64(),
            domain: "(0, 1]",
        });
    }
    let n = curve_db.len();
    let tail = (tail_fraction.as_f64() * n as f64).ceil() as usize;
    let tail = tail.clamp(1, n);
    let sum = curve_db[n - tail..]
        .iter()
        .fold(T::zero(), |acc, &v| acc + v);
    Ok(sum / T::lit(tail as f64))
}

/// Smallest `n` such that every `curve_db[m]`, `m ≥ n`, is at most
/// `steady_db + margin_db`. `None` if the last entry is still above.
pub fn convergence_iteration<T: Scalar>(
    curve_db: &[T],
    steady_db: T,
    margin_db: T,
) -> Option<usize> {
    let threshold = steady_db + margin_db;
    // NaN counts as above the threshold
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    match curve_db.iter().rposition(|&v| !(v <= threshold)) {
        None => Some(0),
        Some(last) if last + 1 < curve_db.len() => Some(last + 1),
        Some(_) => None,
    }
}

/// Averaged learning curves and their summary numbers for one
/// (algorithm, SNR) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport<T> {
    pub mse_db: Vec<T>,
    pub nwd_db: Vec<T>,
    pub steady_state_mse_db: T,
    pub convergence_iteration: Option<usize>,
    pub steady_state_nwd_db: T,
    pub nwd_convergence_iteration: Option<usize>,
    pub runs_used: usize,
    pub runs_diverged: usize,
}

impl<T: Scalar> EnsembleReport<T> {
    pub fn from_runs(runs: &[IndexedRun<T>], tail_fraction: T, margin_db: T) -> Result<Self> {
        let mse_db = ensemble_mse_db(runs)?;
        let nwd_db = ensemble_nwd_db(runs)?;
        let steady_state_mse_db = steady_state_level(&mse_db, tail_fraction)?;
        let steady_state_nwd_db = steady_state_level(&nwd_db, tail_fraction)?;
        let runs_diverged = runs.iter().filter(|r| r.outcome.is_err()).count();
        Ok(Self {
            convergence_iteration: convergence_iteration(&mse_db, steady_state_mse_db, margin_db),
            nwd_convergence_iteration: convergence_iteration(
                &nwd_db,
                steady_state_nwd_db,
                margin_db,
            ),
            mse_db,
            nwd_db,
            steady_state_mse_db,
            steady_state_nwd_db,
            runs_used: runs.len() - runs_diverged,
            runs_diverged,
        })
    }
}
