use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn smdamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smdamp")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("exp.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bounds_subcommand_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[domain]\nre = 100\ndelta = 0.1\n[damping]\nprofile = algebraic\nalpha = 2\n[sweep]\nre = 100, 1000\n",
    );
    let out = dir.path().join("out");
    let res = smdamp(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let mut reader = csv::Reader::from_path(out.join("bounds.csv")).unwrap();
    let ratio_col = reader.headers().unwrap().iter().position(|h| h == "model_term_ratio").unwrap();
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let ratio: f64 = rows[1][ratio_col].parse().unwrap();
    assert!((ratio - 100.0).abs() < 1e-9);
    let slopes = fs::read_to_string(out.join("slopes.csv")).unwrap();
    assert!(slopes.lines().count() == 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[domain]\nre = 100\n[grid]\nnx = four\n");
    let res = smdamp(&["run", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 4"));

    let res = smdamp(&["run", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));

    let cfg = write_config(dir.path(), "[domain]\nre = 100\n");
    let res = smdamp(&["sweep", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn damping_table_has_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[domain]\nre = 100\n[damping]\nprofile = hermite\nalpha = 2\n[output]\nsamples = 1001\n",
    );
    let out = dir.path().join("tab");
    let res = smdamp(&["damping-table", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let mut reader = csv::Reader::from_path(out.join("damping_hermite_a2.csv")).unwrap();
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1001);
    assert_eq!(rows[0].1, 0.0);
    assert_eq!(rows[1000].1, 0.0);
    assert!(rows[500].1 == 1.0);
}

#[test]
fn run_is_reproducible_with_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[domain]\nre = 50\n[grid]\nnx = 4\nny = 4\nnz = 16\n[damping]\nprofile = hermite\n\
         [solver]\nend_time = 0.05\ninitial = perturbed\namplitude = 0.1\n",
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let res = smdamp(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "5", "--deterministic"]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push(out);
    }
    for name in ["dissipation.csv", "summary.csv", "final.smdl"] {
        assert_eq!(fs::read(outputs[0].join(name)).unwrap(), fs::read(outputs[1].join(name)).unwrap(), "{name}");
    }
    let res = smdamp(&["run", "--config", &cfg, "--out", dir.path().join("c").to_str().unwrap(), "--seed", "6"]);
    assert!(res.status.success());
    assert_ne!(
        fs::read(outputs[0].join("dissipation.csv")).unwrap(),
        fs::read(dir.path().join("c/dissipation.csv")).unwrap()
    );
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let res = smdamp(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let text = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
