use std::fs;
use std::path::Path;

use smdamp_core::solver::checkpoint::read_checkpoint;
use smdamp_core::{run_experiment, ExperimentConfig, Mode};

fn config(text: &str, dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse(text).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn run_summary_reports_couette_rate() {
    let dir = tempfile::tempdir().unwrap();
    // C_s delta = 0.1 at Re = 100: nu (U/L)^2 + (C_s delta)^2 (U/L)^3 = 0.01 + 0.01
    let cfg = config(
        "[domain]\nre = 100\nc_s = 1\ndelta = 0.1\n[grid]\nnx = 4\nny = 4\nnz = 16\n[damping]\nprofile = one\n\
         [solver]\nend_time = 1\nmax_steps = 20\n",
        dir.path(),
    );
    let art = run_experiment(&cfg).unwrap();
    assert_eq!(art.failures, 0);
    let eps: f64 = column(&dir.path().join("summary.csv"), "final_eps")[0].parse().unwrap();
    assert!((eps - 0.02).abs() <= 1e-6 * 0.02, "{eps}");
    let avg: f64 = column(&dir.path().join("summary.csv"), "measured_avg")[0].parse().unwrap();
    assert!((avg - 0.02).abs() <= 1e-6 * 0.02, "{avg}");
    assert!(art.summary.contains("c1 = "));
}

#[test]
fn checkpoint_restart_continues_in_time() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let cfg = config(
        "[domain]\nre = 50\n[grid]\nnx = 4\nny = 4\nnz = 8\n[solver]\nend_time = 0.1\ninitial = perturbed\nseed = 1\n",
        &first,
    );
    run_experiment(&cfg).unwrap();
    let (field, domain) = read_checkpoint(first.join("final.smdl")).unwrap();
    assert!((field.time - 0.1).abs() < 1e-12);
    assert!((domain.re() - 50.0).abs() < 1e-12);

    let second = dir.path().join("second");
    fs::create_dir_all(&second).unwrap();
    let text = format!(
        "[domain]\nre = 50\n[grid]\nnx = 4\nny = 4\nnz = 8\n[solver]\nend_time = 0.2\ninitial = checkpoint\ncheckpoint = {}\n",
        first.join("final.smdl").display()
    );
    run_experiment(&config(&text, &second)).unwrap();
    let times = column(&second.join("dissipation.csv"), "time");
    let t0: f64 = times[0].parse().unwrap();
    let t1: f64 = times.last().unwrap().parse().unwrap();
    assert!((t0 - 0.1).abs() < 1e-12 && (t1 - 0.2).abs() < 1e-12);
}

#[test]
fn sweep_slopes_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(
        "[domain]\ndelta = 0.1\n[grid]\nnx = 4\nny = 4\nnz = 8\n[solver]\nend_time = 0.01\n\
         [sweep]\nre = 100, 1000, 10000\nprofile = algebraic, hermite\nalpha = 1, 2\n",
        dir.path(),
    );
    cfg.mode = Mode::Bounds;
    run_experiment(&cfg).unwrap();
    let slopes = dir.path().join("slopes.csv");
    let profiles = column(&slopes, "profile");
    let alphas = column(&slopes, "alpha");
    let fits = column(&slopes, "corollary_model_slope");
    for ((p, a), s) in profiles.iter().zip(&alphas).zip(&fits) {
        let s: f64 = s.parse().unwrap();
        let expected = match (p.as_str(), a.as_str()) {
            ("algebraic", _) => 2.0,
            ("hermite", "1") => 1.0,
            _ => 0.0,
        };
        assert!((s - expected).abs() <= 0.01, "{p} {a}: {s}");
    }
    assert_eq!(profiles.len(), 4);
}

#[test]
fn coarse_sweep_flags_unresolved_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "[grid]\nnx = 4\nny = 4\nnz = 8\n[solver]\nend_time = 0.02\n[sweep]\nre = 20, 200\n[output]\nmode = sweep\n",
        dir.path(),
    );
    let art = run_experiment(&cfg).unwrap();
    assert_eq!(art.failures, 0);
    let within = column(&dir.path().join("sweep.csv"), "within_bound");
    // strip width 1/(5.1 Re) against h = 1/8
    assert_eq!(within, vec!["unresolved", "unresolved"]);
    assert!(dir.path().join("points").is_dir());
}
