use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use fraclms_harness::{
    compare_to_reference, emit_plot, experiment, run_experiment, ExperimentConfig, PlotCurve,
    PlotKind, RunOptions, CURVES_HEADER,
};

#[derive(Parser)]
#[command(
    name = "fraclms",
    version,
    about = "Fractional LMS system-identification benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the SNR x algorithm Monte-Carlo grid described by a config file.
    Run {
        /// Experiment config (TOML).
        config: PathBuf,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of Monte-Carlo runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        parallel: Option<usize>,
        /// Also print the wall-clock time of one training run per algorithm.
        #[arg(long)]
        bench: bool,
    },
    /// Compare a summary file with a reference table.
    Verify {
        /// summary.csv written by `run`.
        summary: PathBuf,
        /// Reference table with the same cells.
        #[arg(long)]
        reference: PathBuf,
        /// Allowed steady-state level difference, dB.
        #[arg(long, default_value_t = 0.5)]
        mse_tol: f64,
        /// Allowed multiplicative difference in convergence iterations.
        #[arg(long, default_value_t = 2.0)]
        iter_factor: f64,
    },
    /// Plot one column of one or more curve files as an SVG chart.
    Plot {
        /// Curve CSV files; each file becomes one labelled line.
        #[arg(required = true)]
        curves: Vec<PathBuf>,
        /// Column to plot: `mse` or `nwd`.
        #[arg(long)]
        kind: PlotKind,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Self {
        Self {
            color: std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()),
        }
    }

    fn verdict(&self, pass: bool) -> String {
        match (pass, self.color) {
            (true, true) => "\x1b[32mPASS\x1b[0m".into(),
            (false, true) => "\x1b[31mFAIL\x1b[0m".into(),
            (true, false) => "PASS".into(),
            (false, false) => "FAIL".into(),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let style = Style::from_env();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            runs,
            parallel,
            bench,
        } => {
            let opts = RunOptions {
                seed,
                runs,
                parallel,
            };
            let manifest = run_experiment(&config, &out, &opts)?;
            println!(
                "wrote {} curve files, {} plots and summary.csv to {}",
                manifest.artifact_paths.len(),
                manifest.plots.len(),
                out.display()
            );
            if manifest.runs_diverged > 0 {
                println!("{} runs diverged and were excluded", manifest.runs_diverged);
            }
            print!("{}", std::fs::read_to_string(out.join("summary.csv"))?);
            if bench {
                let cfg = opts.apply(&ExperimentConfig::load(&config)?);
                for (alg, t) in experiment::bench(&cfg)? {
                    println!("bench {alg}: {:.3} s for one run", t.as_secs_f64());
                }
            }
            Ok(true)
        }
        Command::Verify {
            summary,
            reference,
            mse_tol,
            iter_factor,
        } => {
            let cmp = compare_to_reference(&summary, &reference, mse_tol, iter_factor)?;
            for cell in &cmp.cells {
                let detail: Vec<String> = cell
                    .checks
                    .iter()
                    .map(|c| {
                        let prec = if c.name.ends_with("_iter") { 0 } else { 2 };
                        let ours = c.ours.map_or("none".to_string(), |v| format!("{v:.prec$}"));
                        format!(
                            "{}={} (ref {:.prec$}{})",
                            c.name,
                            ours,
                            c.reference,
                            if c.pass { "" } else { " !" }
                        )
                    })
                    .collect();
                println!(
                    "{} {:>10} {:>5} dB  {}",
                    style.verdict(cell.pass()),
                    cell.algorithm,
                    cell.snr_db,
                    detail.join("  ")
                );
            }
            for (alg, snr) in &cmp.skipped {
                println!("skip {alg:>10} {snr:>5} dB  (not in summary)");
            }
            for (alg, offset) in cmp.nwd_offsets() {
                println!("nwd offset {alg:>10}: {offset:+.2} dB (mean ours - ref)");
            }
            println!("overall: {}", style.verdict(cmp.pass()));
            Ok(cmp.pass())
        }
        Command::Plot { curves, kind, out } => {
            let series = curves
                .iter()
                .map(|p| read_curve(p, kind))
                .collect::<anyhow::Result<Vec<_>>>()?;
            emit_plot(
                &series,
                &out,
                kind,
                &format!("{} learning curves", kind.name().to_uppercase()),
            )?;
            println!("wrote {}", out.display());
            Ok(true)
        }
    }
}

fn read_curve(path: &Path, kind: PlotKind) -> anyhow::Result<PlotCurve> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next() != Some(CURVES_HEADER) {
        bail!("{}: expected header `{CURVES_HEADER}`", path.display());
    }
    let column = match kind {
        PlotKind::Mse => 1,
        PlotKind::Nwd => 2,
    };
    let values = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .nth(column)
                .and_then(|v| v.parse::<f64>().ok())
                .with_context(|| format!("{}: bad row `{l}`", path.display()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "curve".into());
    Ok(PlotCurve { label, values })
}
