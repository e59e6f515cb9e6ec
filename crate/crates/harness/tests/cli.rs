use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use fraclms::{Algorithm, FilterConfig, FracPowerPolicy, Recording};
use fraclms_harness::{
    compare_to_reference, run_experiment, ExperimentConfig, HarnessError, RunOptions,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn small_config(dir: &Path, runs: usize) -> PathBuf {
    let text = fs::read_to_string(data("paper.config"))
        .unwrap()
        .replace(
            "monte_carlo_runs = 200",
            &format!("monte_carlo_runs = {runs}"),
        )
        .replace("passes = 200", "passes = 30");
    let path = dir.join("small.config");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn shipped_config_encodes_the_experiment_constants() {
    let cfg = ExperimentConfig::load(data("paper.config")).unwrap();
    assert_eq!(cfg.samples_per_run, 600);
    assert_eq!(cfg.snr_db, vec![10.0, 20.0, 30.0, 40.0]);
    assert_eq!(cfg.plant.coeffs, vec![0.9, 0.3, -0.1]);
    assert_eq!(cfg.monte_carlo_runs, 200);
    assert_eq!(cfg.recording, Recording::PerPass);
    let kinds: Vec<Algorithm> = cfg.algorithms.iter().map(|a| a.kind).collect();
    assert_eq!(kinds, vec![Algorithm::Flms, Algorithm::RvssFlms]);
    for spec in &cfg.algorithms {
        let f = &spec.filter;
        assert_eq!(f, &FilterConfig::paper_defaults());
        assert_eq!(f.tap_count, 3);
        assert_eq!(f.weight_init, 1e-20);
        assert_eq!((f.nu_init, f.nu_f_init), (1e-4, 1e-4));
        assert_eq!(f.frac_order, 0.5);
        assert_eq!((f.alpha, f.beta, f.gamma), (0.5, 0.5, 0.5));
        assert_eq!((f.nu_min, f.nu_max), (1e-4, 3e-4));
        assert_eq!(f.frac_power_policy, FracPowerPolicy::SignedMagnitude);
    }
}

#[test]
fn config_round_trips() {
    let cfg = ExperimentConfig::load(data("paper.config")).unwrap();
    let text = cfg.to_toml_string().unwrap();
    let again = ExperimentConfig::from_toml_str(&text, Path::new("roundtrip")).unwrap();
    assert_eq!(cfg, again);
}

#[test]
fn inverted_step_bounds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(data("paper.config")).unwrap().replacen(
        "nu_min = 1e-4",
        "nu_min = 5e-4",
        1,
    );
    let path = dir.path().join("bad.config");
    fs::write(&path, text).unwrap();
    let err = run_experiment(&path, dir.path().join("out"), &RunOptions::default()).unwrap_err();
    let HarnessError::Validation(v) = &err else {
        panic!("expected validation error, got {err}");
    };
    assert!(
        v.iter()
            .any(|m| m.contains("FLMS: nu_max") && m.contains("nu_min")),
        "{v:?}"
    );
    assert!(!dir.path().join("out").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 1);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_experiment(
        &cfg,
        &a,
        &RunOptions {
            seed: Some(7),
            ..Default::default()
        },
    )
    .unwrap();
    run_experiment(
        &cfg,
        &b,
        &RunOptions {
            seed: Some(7),
            parallel: Some(2),
            ..Default::default()
        },
    )
    .unwrap();
    let summary = fs::read(a.join("summary.csv")).unwrap();
    assert_eq!(summary, fs::read(b.join("summary.csv")).unwrap());
    for entry in fs::read_dir(a.join("curves")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join("curves").join(&name)).unwrap(),
            fs::read(b.join("curves").join(&name)).unwrap()
        );
    }
    for entry in fs::read_dir(a.join("plots")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join("plots").join(&name)).unwrap(),
            fs::read(b.join("plots").join(&name)).unwrap()
        );
    }
    let c = dir.path().join("c");
    run_experiment(
        &cfg,
        &c,
        &RunOptions {
            seed: Some(8),
            ..Default::default()
        },
    )
    .unwrap();
    assert_ne!(summary, fs::read(c.join("summary.csv")).unwrap());
}

#[test]
fn outputs_follow_the_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 3);
    let out = dir.path().join("out");
    let manifest = run_experiment(&cfg, &out, &RunOptions::default()).unwrap();
    assert_eq!(manifest.status, "complete");
    assert_eq!(manifest.artifact_paths.len(), 8);
    // one MSE and one NWD chart per SNR
    assert_eq!(manifest.plots.len(), 2 * 4);
    for a in &manifest.artifact_paths {
        let text = fs::read_to_string(out.join(&a.curves)).unwrap();
        assert!(text.starts_with("iteration,mse_db,nwd_db\n"));
        assert_eq!(text.lines().count(), 31);
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,snr_db,steady_mse_db,mse_conv_iter,steady_nwd_db,nwd_conv_iter,runs_used,runs_diverged"
    );
    assert_eq!(lines.count(), 8);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(
        json["conventions"]["frac_power_policy"][0][1],
        "signed_magnitude"
    );
    for plot in &manifest.plots {
        let svg = fs::read_to_string(out.join(plot)).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}

#[test]
fn reference_against_itself_passes() {
    let dir = tempfile::tempdir().unwrap();
    let reference = fs::read_to_string(data("table1.reference")).unwrap();
    let mut summary = String::from(fraclms_harness::SUMMARY_HEADER);
    summary.push('\n');
    for line in reference.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        summary.push_str(&format!(
            "{},{},{},{},{},{},200,0\n",
            f[0], f[1], f[3], f[2], f[5], f[4]
        ));
    }
    let path = dir.path().join("summary.csv");
    fs::write(&path, &summary).unwrap();
    let cmp = compare_to_reference(&path, data("table1.reference"), 0.5, 2.0).unwrap();
    assert!(cmp.pass());
    assert_eq!(cmp.cells.len(), 12);

    // push one MSE cell off by twice the tolerance
    let shifted = summary.replacen("RVSS-FLMS,10,-10.22", "RVSS-FLMS,10,-11.22", 1);
    fs::write(&path, shifted).unwrap();
    let cmp = compare_to_reference(&path, data("table1.reference"), 0.5, 2.0).unwrap();
    assert!(!cmp.pass());
    assert_eq!(cmp.cells.iter().filter(|c| !c.pass()).count(), 1);
}

#[test]
fn schema_mismatch_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.csv");
    fs::write(&path, "algo,snr\nFLMS,10\n").unwrap();
    let err = compare_to_reference(&path, data("table1.reference"), 0.5, 2.0).unwrap_err();
    assert!(matches!(err, HarnessError::Format { .. }), "{err}");
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fraclms"));
    cmd.env("NO_COLOR", "1");
    cmd
}

#[test]
fn command_line_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 2);
    let out = dir.path().join("out");
    let status = bin()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--runs",
            "2",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );

    let verify = bin()
        .args([
            "verify",
            out.join("summary.csv").to_str().unwrap(),
            "--reference",
        ])
        .arg(data("table1.reference"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&verify.stdout);
    assert!(stdout.contains("overall:"));
    assert!(!stdout.contains('\x1b'));
    assert_eq!(verify.status.success(), stdout.contains("overall: PASS"));

    let svg = dir.path().join("cmp.svg");
    let plot = bin()
        .arg("plot")
        .arg(out.join("curves/FLMS_10dB.csv"))
        .arg(out.join("curves/RVSS-FLMS_10dB.csv"))
        .args(["--kind", "nwd", "--out", svg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        plot.status.success(),
        "{}",
        String::from_utf8_lossy(&plot.stderr)
    );
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert!(text.contains("RVSS-FLMS_10dB"));

    let bad = bin()
        .args(["verify", "/nonexistent.csv", "--reference", "/nonexistent"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
