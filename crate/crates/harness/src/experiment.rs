//! The SNR × algorithm × Monte-Carlo grid and its on-disk reports.
//!
//! Each run `r` draws one training set per SNR from the streams keyed by
//! `(seed, r)`; every algorithm trains on that same set, so the curves of
//! different algorithms share their random numbers. Runs are independent and
//! may execute on any number of threads; aggregation always happens in
//! run-index order, so outputs do not depend on the thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use fraclms::{
    train, Algorithm, EnsembleReport, Error as CoreError, IndexedRun, PlantSpec, Recording,
    RunStreams, TrainingSet,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::{emit_plot, PlotCurve, PlotKind};
use crate::{snr_tag, CURVES_HEADER, SUMMARY_HEADER};

/// Command-line overrides applied on top of the loaded config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub parallel: Option<usize>,
}

impl RunOptions {
    pub fn apply(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = cfg.clone();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(runs) = self.runs {
            cfg.monte_carlo_runs = runs;
        }
        cfg
    }
}

/// Ensemble result of one (algorithm, SNR) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub algorithm: Algorithm,
    pub snr_db: f64,
    pub report: EnsembleReport<f64>,
}

fn base_plant(cfg: &ExperimentConfig) -> Result<PlantSpec<f64>> {
    Ok(PlantSpec::new(cfg.plant.coeffs.clone(), 0.0)?)
}

/// Runs every cell of the grid on the current rayon pool.
///
/// Cells are returned algorithm-major in config order, SNRs in config order.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    cfg.validate()?;
    let base = base_plant(cfg)?;
    let jobs: Vec<(usize, u64)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.monte_carlo_runs as u64).map(move |r| (s, r)))
        .collect();

    let per_job: Vec<Result<Vec<IndexedRun<f64>>>> = jobs
        .par_iter()
        .map(|&(s, run)| {
            let plant = base.at_snr(cfg.snr_db[s])?;
            let mut streams = RunStreams::new(cfg.seed, run);
            let set = TrainingSet::generate(&plant, cfg.samples_per_run, &mut streams)?;
            cfg.algorithms
                .iter()
                .map(|spec| {
                    match train(
                        spec.kind,
                        &spec.filter,
                        &plant,
                        &set,
                        cfg.passes,
                        cfg.recording,
                    ) {
                        Ok(series) => Ok(IndexedRun::new(run, Ok(series))),
                        Err(e @ CoreError::Diverged { .. }) => Ok(IndexedRun::new(run, Err(e))),
                        Err(e) => Err(e.into()),
                    }
                })
                .collect()
        })
        .collect();

    let n_alg = cfg.algorithms.len();
    let mut cells: Vec<Vec<Vec<IndexedRun<f64>>>> =
        vec![vec![Vec::with_capacity(cfg.monte_carlo_runs); cfg.snr_db.len()]; n_alg];
    for (&(s, _), job) in jobs.iter().zip(per_job) {
        for (a, run) in job?.into_iter().enumerate() {
            cells[a][s].push(run);
        }
    }

    let mut out = Vec::with_capacity(n_alg * cfg.snr_db.len());
    for (spec, per_snr) in cfg.algorithms.iter().zip(cells) {
        for (&snr_db, runs) in cfg.snr_db.iter().zip(per_snr) {
            let report =
                EnsembleReport::from_runs(&runs, cfg.metrics.tail_fraction, cfg.metrics.margin_db)?;
            out.push(CellResult {
                algorithm: spec.kind,
                snr_db,
                report,
            });
        }
    }
    Ok(out)
}

/// Wall-clock time to train one run of each algorithm at the first SNR.
/// Informative only.
pub fn bench(cfg: &ExperimentConfig) -> Result<Vec<(Algorithm, Duration)>> {
    cfg.validate()?;
    let plant = base_plant(cfg)?.at_snr(cfg.snr_db[0])?;
    let set = TrainingSet::generate(
        &plant,
        cfg.samples_per_run,
        &mut RunStreams::new(cfg.seed, 0),
    )?;
    cfg.algorithms
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let _ = train(
                spec.kind,
                &spec.filter,
                &plant,
                &set,
                cfg.passes,
                cfg.recording,
            );
            Ok((spec.kind, start.elapsed()))
        })
        .collect()
}

fn conv_field(it: Option<usize>) -> String {
    it.map_or_else(|| "none".to_string(), |n| n.to_string())
}

/// Curve file contents for one cell.
pub fn curves_csv(report: &EnsembleReport<f64>) -> String {
    let mut s = String::with_capacity(report.mse_db.len() * 32);
    s.push_str(CURVES_HEADER);
    s.push('\n');
    for (i, (m, n)) in report.mse_db.iter().zip(&report.nwd_db).enumerate() {
        let _ = writeln!(s, "{i},{m:.6},{n:.6}");
    }
    s
}

/// Summary file contents, one row per cell in the given order.
pub fn summary_csv(cells: &[CellResult]) -> String {
    let mut s = String::new();
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for c in cells {
        let r = &c.report;
        let _ = writeln!(
            s,
            "{},{},{:.4},{},{:.4},{},{},{}",
            c.algorithm.label(),
            c.snr_db,
            r.steady_state_mse_db,
            conv_field(r.convergence_iteration),
            r.steady_state_nwd_db,
            conv_field(r.nwd_convergence_iteration),
            r.runs_used,
            r.runs_diverged
        );
    }
    s
}

/// Definitions a reader needs to interpret the numbers in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub snr: String,
    pub mse_db: String,
    pub nwd_db: String,
    pub iteration: String,
    pub frac_power_policy: Vec<(String, String)>,
}

impl Conventions {
    fn for_config(cfg: &ExperimentConfig) -> Self {
        Self {
            snr: "10*log10(sum(a_k^2) / disturbance_variance), output referred".into(),
            mse_db: "10*log10(ensemble mean of e^2)".into(),
            nwd_db: "ensemble mean of 20*log10(||a - w|| / ||a||)".into(),
            iteration: match cfg.recording {
                Recording::PerSample => "one input sample".into(),
                Recording::PerPass => format!(
                    "one pass over the {}-sample training set (e^2 averaged over the pass, NWD at its end)",
                    cfg.samples_per_run
                ),
            },
            frac_power_policy: cfg
                .algorithms
                .iter()
                .map(|a| (a.kind.label().to_string(), a.filter.frac_power_policy.name().to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellArtifact {
    pub algorithm: String,
    pub snr_db: f64,
    pub curves: String,
}

/// Written last; lists every artifact of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    /// `complete`, or `incomplete` when a write failed part way.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub software_version: String,
    pub timestamp: String,
    pub config: ExperimentConfig,
    pub conventions: Conventions,
    pub summary: Option<String>,
    pub artifact_paths: Vec<CellArtifact>,
    pub plots: Vec<String>,
    pub runs_diverged: usize,
}

struct Writer<'a> {
    root: &'a Path,
}

impl Writer<'_> {
    fn write(&self, rel: &str, contents: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))
    }
}

/// Loads `config_path`, runs the grid and writes curves, summary, plots and
/// finally `manifest.json` into `out_dir`.
pub fn run_experiment(
    config_path: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    opts: &RunOptions,
) -> Result<ExperimentManifest> {
    let cfg = opts.apply(&ExperimentConfig::load(config_path)?);
    cfg.validate()?;
    let cells = match opts.parallel {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))?
            .install(|| run_grid(&cfg))?,
        None => run_grid(&cfg)?,
    };
    write_outputs(&cfg, &cells, out_dir.as_ref())
}

/// Writes the artifacts of an already computed grid.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    cells: &[CellResult],
    out_dir: &Path,
) -> Result<ExperimentManifest> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut manifest = ExperimentManifest {
        status: "incomplete".into(),
        error: None,
        software_version: env!("CARGO_PKG_VERSION").into(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: cfg.clone(),
        conventions: Conventions::for_config(cfg),
        summary: None,
        artifact_paths: Vec::new(),
        plots: Vec::new(),
        runs_diverged: cells.iter().map(|c| c.report.runs_diverged).sum(),
    };
    let writer = Writer { root: out_dir };
    match write_artifacts(cfg, cells, &writer, &mut manifest) {
        Ok(()) => {
            manifest.status = "complete".into();
            writer.write("manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            // best effort: leave a record of what was written
            if let Ok(json) = serde_json::to_string_pretty(&manifest) {
                let _ = writer.write("manifest.json", &json);
            }
            Err(e)
        }
    }
}

fn write_artifacts(
    cfg: &ExperimentConfig,
    cells: &[CellResult],
    writer: &Writer<'_>,
    manifest: &mut ExperimentManifest,
) -> Result<()> {
    for cell in cells {
        let rel = format!(
            "curves/{}_{}dB.csv",
            cell.algorithm.label(),
            snr_tag(cell.snr_db)
        );
        writer.write(&rel, &curves_csv(&cell.report))?;
        manifest.artifact_paths.push(CellArtifact {
            algorithm: cell.algorithm.label().into(),
            snr_db: cell.snr_db,
            curves: rel,
        });
    }
    writer.write("summary.csv", &summary_csv(cells))?;
    manifest.summary = Some("summary.csv".into());

    for &snr in &cfg.snr_db {
        let at_snr: Vec<&CellResult> = cells.iter().filter(|c| c.snr_db == snr).collect();
        for kind in [PlotKind::Mse, PlotKind::Nwd] {
            let curves: Vec<PlotCurve> = at_snr
                .iter()
                .map(|c| PlotCurve {
                    label: c.algorithm.label().to_string(),
                    values: match kind {
                        PlotKind::Mse => c.report.mse_db.clone(),
                        PlotKind::Nwd => c.report.nwd_db.clone(),
                    },
                })
                .collect();
            let rel = format!("plots/{}_{}dB.svg", kind.name(), snr_tag(snr));
            let path: PathBuf = writer.root.join(&rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
            }
            emit_plot(&curves, &path, kind, &format!("{} dB SNR", snr))?;
            manifest.plots.push(rel);
        }
    }
    Ok(())
}
