//! Experiment driver: runs, parameter sweeps, bound tables, damping tables
//! and the verification suite, all writing CSV.
//!
//! Output files per mode (inside the output directory):
//!
//! * `run`: `dissipation.csv` (columns of [`crate::dissipation::CSV_HEADER`]),
//!   `summary.csv` (one row, columns [`POINT_HEADER`]), `summary.txt`
//!   (bound derivations) and the final state `final.smdl`.
//! * `sweep`: `sweep.csv` (one [`POINT_HEADER`] row per point),
//!   `slopes.csv` ([`SLOPE_HEADER`]) and `points/<label>/dissipation.csv`.
//! * `bounds`: `bounds.csv` ([`BOUNDS_HEADER`]), `slopes.csv` and
//!   `bounds.txt`.
//! * `damping-table`: `damping_<profile>[_a<alpha>].csv` with columns `z,beta`.
//! * `verify`: `verify.csv` ([`verify::VERIFY_HEADER`]).
//!
//! Point columns:
//!
//! | column | meaning |
//! |---|---|
//! | `re`, `delta`, `alpha`, `profile`, `nx`, `ny`, `nz` | sweep key and grid |
//! | `strip_resolved` | at least two cells across the boundary strip |
//! | `status` | `ok` or `failed: <reason>` |
//! | `steps`, `stop`, `final_time` | how the run ended |
//! | `measured_avg` | running-average dissipation rate at the end |
//! | `limsup_proxy` | largest running average over the final quarter |
//! | `final_eps` | instantaneous dissipation rate at the end |
//! | `theorem_bound` | generic bound (physical units) |
//! | `corollary_kind`, `corollary_bound` | closed-form bound for the profile family, if any |
//! | `undamped_rate`, `kolmogorov_rate` | reference estimates |
//! | `within_bound` | `yes`/`no` (`limsup_proxy <= theorem_bound`), `unresolved` or empty on failure |
//!
//! All numbers are written in `{:e}` notation, so identical runs produce
//! identical files.

pub mod config;
pub mod verify;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub use config::{DomainSpec, ExperimentConfig, Mode, SweepAxes};

use crate::bounds::{
    corollary_bound, log_log_slope, reference_rates, theorem_bound, BoundKind, BoundReport, ReferenceRates,
};
use crate::damping::{DampingProfile, ProfileKind};
use crate::dissipation::write_csv;
use crate::domain::{DomainParams, Grid};
use crate::error::{Error, Result};
use crate::solver::checkpoint::write_checkpoint;
use crate::solver::{initial_field, run, RunOutput, StopReason};

/// Files written by an experiment and a human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// Failed verification checks (verify mode) or failed sweep points.
    pub failures: usize,
}

pub const POINT_HEADER: [&str; 21] = [
    "re",
    "delta",
    "alpha",
    "profile",
    "nx",
    "ny",
    "nz",
    "strip_resolved",
    "status",
    "steps",
    "stop",
    "final_time",
    "measured_avg",
    "limsup_proxy",
    "final_eps",
    "theorem_bound",
    "corollary_kind",
    "corollary_bound",
    "undamped_rate",
    "kolmogorov_rate",
    "within_bound",
];

pub const SLOPE_HEADER: [&str; 8] =
    ["profile", "alpha", "delta", "nz", "points", "theorem_model_slope", "corollary_model_slope", "measured_slope"];

pub const BOUNDS_HEADER: [&str; 14] = [
    "re",
    "delta",
    "profile",
    "alpha",
    "c1",
    "c2",
    "strip_integral",
    "theorem_model_term",
    "theorem_bound",
    "corollary_kind",
    "corollary_model_term",
    "corollary_bound",
    "scaling_exponent",
    "model_term_ratio",
];

/// Outcome of one solver run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub steps: usize,
    pub stop: StopReason,
    pub final_time: f64,
    pub average: f64,
    pub limsup_proxy: f64,
    pub final_eps: f64,
}

/// One point of a run or sweep: measurement joined with the bounds.
#[derive(Debug, Clone)]
pub struct PointRow {
    pub domain: DomainParams,
    pub grid: Grid,
    pub profile: String,
    pub alpha: Option<u32>,
    pub measured: std::result::Result<Measured, String>,
    pub theorem: std::result::Result<BoundReport, String>,
    pub corollary: Option<std::result::Result<BoundReport, String>>,
    pub reference: ReferenceRates,
}

impl PointRow {
    /// `Some(true)` when the proxy is within the theorem bound on a grid
    /// resolving the strip; `None` when either side is unavailable or the
    /// strip is unresolved.
    pub fn within_bound(&self) -> Option<bool> {
        match (&self.measured, &self.theorem) {
            (Ok(m), Ok(b)) if self.grid.strip_resolved() => Some(m.limsup_proxy <= b.bound_value),
            _ => None,
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        let e = |x: f64| format!("{x:e}");
        let (status, steps, stop, time, avg, proxy, last) = match &self.measured {
            Ok(m) => (
                "ok".to_string(),
                m.steps.to_string(),
                stop_name(m.stop).to_string(),
                e(m.final_time),
                e(m.average),
                e(m.limsup_proxy),
                e(m.final_eps),
            ),
            Err(reason) => (
                format!("failed: {reason}"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ),
        };
        let theorem = self.theorem.as_ref().map(|b| e(b.bound_value)).unwrap_or_default();
        let (ckind, cbound) = match &self.corollary {
            Some(Ok(b)) => (b.kind.name().to_string(), e(b.bound_value)),
            _ => (String::new(), String::new()),
        };
        let within = if !self.grid.strip_resolved() {
            "unresolved".to_string()
        } else {
            match self.within_bound() {
                Some(true) => "yes".into(),
                Some(false) => "no".into(),
                None => String::new(),
            }
        };
        vec![
            e(self.domain.re()),
            e(self.domain.delta()),
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.profile.clone(),
            self.grid.nx.to_string(),
            self.grid.ny.to_string(),
            self.grid.nz.to_string(),
            self.grid.strip_resolved().to_string(),
            status,
            steps,
            stop,
            time,
            avg,
            proxy,
            last,
            theorem,
            ckind,
            cbound,
            e(self.reference.undamped),
            e(self.reference.kolmogorov),
            within,
        ]
    }

    fn label(&self) -> String {
        let alpha = self.alpha.map(|a| format!("_a{a}")).unwrap_or_default();
        sanitize(&format!(
            "re{:e}_d{:e}_{}{}_nz{}",
            self.domain.re(),
            self.domain.delta(),
            self.profile,
            alpha,
            self.grid.nz
        ))
    }
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::EndTime => "end_time",
        StopReason::Steady => "steady",
        StopReason::StepLimit => "step_limit",
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

/// Closed-form corollary that applies to a profile family, if any.
pub fn corollary_for(profile: &DampingProfile) -> Option<(BoundKind, u32)> {
    match profile.kind() {
        ProfileKind::Algebraic { alpha } => Some((BoundKind::Algebraic, *alpha)),
        ProfileKind::Hermite { alpha: 1 } => Some((BoundKind::HermiteLinear, 1)),
        ProfileKind::Hermite { alpha } if *alpha >= 2 => Some((BoundKind::Hermite, *alpha)),
        _ => None,
    }
}

fn bounds_for(
    domain: &DomainParams,
    profile: &DampingProfile,
) -> (std::result::Result<BoundReport, String>, Option<std::result::Result<BoundReport, String>>) {
    let theorem = theorem_bound(domain, profile).map_err(|e| e.to_string());
    let corollary = corollary_for(profile).map(|(k, a)| corollary_bound(domain, k, a).map_err(|e| e.to_string()));
    (theorem, corollary)
}

/// Profile name / alpha combinations of the sweep (alpha only varies for
/// the families that carry a contact order).
fn profile_axis(cfg: &ExperimentConfig) -> Vec<(String, Option<u32>)> {
    let names = if cfg.sweep.profile.is_empty() { vec![cfg.profile_name.clone()] } else { cfg.sweep.profile.clone() };
    let alphas = if cfg.sweep.alpha.is_empty() { vec![cfg.alpha] } else { cfg.sweep.alpha.clone() };
    let mut out = Vec::new();
    for name in names {
        if name == "algebraic" || name == "hermite" {
            out.extend(alphas.iter().map(|a| (name.clone(), Some(*a))));
        } else {
            out.push((name, None));
        }
    }
    out
}

fn option_axis(values: &[f64]) -> Vec<Option<f64>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Execute the configured mode.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Artifacts> {
    create_dir(&cfg.output_dir)?;
    match cfg.mode {
        Mode::Run => run_mode(cfg),
        Mode::Sweep => sweep(cfg),
        Mode::Bounds => bounds_mode(cfg),
        Mode::DampingTable => damping_table(cfg),
        Mode::Verify => verify::run_verify(cfg),
    }
}

fn measure(out: &RunOutput) -> Measured {
    let acc = &out.accumulator;
    Measured {
        steps: out.steps,
        stop: out.stop,
        final_time: out.field.time,
        average: acc.average().unwrap_or(f64::NAN),
        limsup_proxy: acc.limsup_proxy().unwrap_or(f64::NAN),
        final_eps: acc.last().map(|r| r.eps_total).unwrap_or(f64::NAN),
    }
}

fn run_mode(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let domain = cfg.build_domain()?;
    let grid = cfg.build_grid(&domain)?;
    let profile = cfg.profile()?;
    let field = initial_field(&domain, &grid, &cfg.solver)?;
    let out = run(field, &profile, &domain, &cfg.solver)?;

    let dir = &cfg.output_dir;
    let mut files = Vec::new();
    let path = dir.join("dissipation.csv");
    write_csv(out.records(), BufWriter::new(File::create(&path)?))?;
    files.push(path);

    let (theorem, corollary) = bounds_for(&domain, &profile);
    let row = PointRow {
        domain,
        grid,
        profile: profile.name(),
        alpha: profile.alpha(),
        measured: Ok(measure(&out)),
        theorem,
        corollary,
        reference: reference_rates(&domain),
    };
    let path = dir.join("summary.csv");
    write_rows(&path, &POINT_HEADER, [row.csv_row()])?;
    files.push(path);

    let summary = describe_point(&row, &out);
    let path = dir.join("summary.txt");
    fs::write(&path, &summary)?;
    files.push(path);

    let path = dir.join("final.smdl");
    write_checkpoint(&path, &out.field, &domain)?;
    files.push(path);
    Ok(Artifacts { files, summary, failures: 0 })
}

fn describe_point(row: &PointRow, out: &RunOutput) -> String {
    let mut s = String::new();
    let d = &row.domain;
    let g = &row.grid;
    let _ =
        writeln!(s, "profile {} on {}x{}x{}, Re = {}, delta = {}", row.profile, g.nx, g.ny, g.nz, d.re(), d.delta());
    let _ = writeln!(s, "strip width {:e}, resolved: {}", d.strip_width(), g.strip_resolved());
    if let Ok(m) = &row.measured {
        let _ = writeln!(s, "stopped ({}) at t = {:e} after {} steps", stop_name(m.stop), m.final_time, m.steps);
        let _ = writeln!(s, "final eps = {:e}", m.final_eps);
        let _ = writeln!(s, "running average eps = {:e}", m.average);
        let _ = writeln!(s, "limsup proxy = {:e}", m.limsup_proxy);
    }
    let _ = writeln!(s, "max relative divergence = {:e}", out.max_divergence);
    let _ = writeln!(s, "max model energy rate = {:e}", out.max_model_energy);
    for b in [Some(&row.theorem), row.corollary.as_ref()].into_iter().flatten() {
        match b {
            Ok(b) => {
                let _ = write!(s, "{b}");
                let _ = writeln!(s, "  bound = {:e}", b.bound_value);
            }
            Err(e) => {
                let _ = writeln!(s, "bound unavailable: {e}");
            }
        }
    }
    let _ = writeln!(s, "reference: undamped {:e}, kolmogorov {:e}", row.reference.undamped, row.reference.kolmogorov);
    if let Some(w) = row.within_bound() {
        let _ = writeln!(s, "within theorem bound: {}", if w { "yes" } else { "no" });
    }
    s
}

/// Cartesian product of the sweep axes, one run per point. Failed points
/// are kept as flagged rows; the error of the first failure is reported
/// in the summary.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Artifacts> {
    if cfg.sweep.is_empty() {
        return Err(Error::Config { line: 0, reason: "sweep needs at least one non-empty axis".into() });
    }
    create_dir(&cfg.output_dir)?;
    let nzs = if cfg.sweep.nz.is_empty() { vec![cfg.grid.2] } else { cfg.sweep.nz.clone() };
    let mut rows = Vec::new();
    let mut files = Vec::new();
    let mut failures = Vec::new();
    for re in option_axis(&cfg.sweep.re) {
        for delta in option_axis(&cfg.sweep.delta) {
            for (name, alpha) in profile_axis(cfg) {
                for &nz in &nzs {
                    let dims = (cfg.grid.0, cfg.grid.1, nz);
                    let key = format!(
                        "(re={}, delta={}, profile={}, alpha={}, nz={nz})",
                        re.map(|r| r.to_string()).unwrap_or_else(|| "default".into()),
                        delta.map(|r| r.to_string()).unwrap_or_else(|| "default".into()),
                        name,
                        alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into()),
                    );
                    let point = |e: Error| Error::Point { point: key.clone(), source: Box::new(e) };
                    let domain = cfg.domain.build(dims, re, delta).map_err(point)?;
                    let grid = Grid::new(&domain, dims.0, dims.1, dims.2).map_err(point)?;
                    let profile = cfg.profile_named(&name, alpha.unwrap_or(cfg.alpha)).map_err(point)?;
                    let (theorem, corollary) = bounds_for(&domain, &profile);
                    let outcome =
                        initial_field(&domain, &grid, &cfg.solver).and_then(|f| run(f, &profile, &domain, &cfg.solver));
                    let mut row = PointRow {
                        domain,
                        grid,
                        profile: name.clone(),
                        alpha,
                        measured: Err(String::new()),
                        theorem,
                        corollary,
                        reference: reference_rates(&domain),
                    };
                    match outcome {
                        Ok(out) => {
                            row.measured = Ok(measure(&out));
                            let dir = cfg.output_dir.join("points").join(row.label());
                            create_dir(&dir)?;
                            let path = dir.join("dissipation.csv");
                            write_csv(out.records(), BufWriter::new(File::create(&path)?))?;
                            files.push(path);
                        }
                        Err(e) => {
                            row.measured = Err(e.to_string());
                            failures.push(point(e).to_string());
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }

    let path = cfg.output_dir.join("sweep.csv");
    write_rows(&path, &POINT_HEADER, rows.iter().map(PointRow::csv_row))?;
    files.insert(0, path);
    let slopes = slope_rows(&rows);
    let path = cfg.output_dir.join("slopes.csv");
    write_rows(&path, &SLOPE_HEADER, slopes.iter().map(|s| s.csv_row()))?;
    files.insert(1, path);

    let mut summary = format!("{} sweep points, {} failed\n", rows.len(), failures.len());
    for f in &failures {
        let _ = writeln!(summary, "  {f}");
    }
    for s in &slopes {
        let _ = writeln!(summary, "{s}");
    }
    let violations = rows.iter().filter(|r| r.within_bound() == Some(false)).count();
    let _ = writeln!(summary, "resolved points above the theorem bound: {violations}");
    Ok(Artifacts { files, summary, failures: failures.len() })
}

/// Log-log slope of the bound model terms (and measurement) against Re
/// within one `(profile, alpha, delta, nz)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub profile: String,
    pub alpha: Option<u32>,
    pub delta: f64,
    pub nz: usize,
    pub points: usize,
    pub theorem: Option<f64>,
    pub corollary: Option<f64>,
    pub measured: Option<f64>,
}

impl SlopeRow {
    pub fn csv_row(&self) -> Vec<String> {
        let o = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        vec![
            self.profile.clone(),
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            format!("{:e}", self.delta),
            self.nz.to_string(),
            self.points.to_string(),
            o(self.theorem),
            o(self.corollary),
            o(self.measured),
        ]
    }
}

impl std::fmt::Display for SlopeRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let o = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        write!(
            f,
            "slope vs Re for {}{} (delta {:e}, nz {}): theorem {}, corollary {}, measured {}",
            self.profile,
            self.alpha.map(|a| format!(" alpha {a}")).unwrap_or_default(),
            self.delta,
            self.nz,
            o(self.theorem),
            o(self.corollary),
            o(self.measured)
        )
    }
}

fn model_term(b: &std::result::Result<BoundReport, String>) -> Option<f64> {
    b.as_ref().ok().map(|b| b.model_term)
}

fn slope_rows(rows: &[PointRow]) -> Vec<SlopeRow> {
    let mut groups: BTreeMap<(String, Option<u32>, String, usize), Vec<&PointRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.profile.clone(), r.alpha, format!("{:e}", r.domain.delta()), r.grid.nz);
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((profile, alpha, _, nz), members) in groups {
        if members.len() < 2 {
            continue;
        }
        let re: Vec<f64> = members.iter().map(|r| r.domain.re()).collect();
        let fit = |ys: Option<Vec<f64>>| ys.and_then(|y| log_log_slope(&re, &y).ok());
        let theorem = fit(members.iter().map(|r| model_term(&r.theorem)).collect());
        let corollary = fit(members.iter().map(|r| r.corollary.as_ref().and_then(model_term)).collect());
        let measured = fit(members.iter().map(|r| r.measured.as_ref().ok().map(|m| m.limsup_proxy)).collect());
        out.push(SlopeRow {
            profile,
            alpha,
            delta: members[0].domain.delta(),
            nz,
            points: members.len(),
            theorem,
            corollary,
            measured,
        });
    }
    out
}

fn bounds_mode(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let res = if cfg.sweep.re.is_empty() { vec![cfg.build_domain()?.re()] } else { cfg.sweep.re.clone() };
    let mut table = Vec::new();
    let mut text = String::new();
    let mut rows = Vec::new();
    for delta in option_axis(&cfg.sweep.delta) {
        for (name, alpha) in profile_axis(cfg) {
            let profile = cfg.profile_named(&name, alpha.unwrap_or(cfg.alpha))?;
            let mut first: Option<f64> = None;
            for &re in &res {
                let domain = cfg.domain.build(cfg.grid, Some(re), delta)?;
                let theorem = theorem_bound(&domain, &profile)?;
                let corollary = corollary_for(&profile).map(|(k, a)| corollary_bound(&domain, k, a)).transpose()?;
                let reference = corollary.as_ref().unwrap_or(&theorem).model_term;
                let base = *first.get_or_insert(reference);
                let e = |x: f64| format!("{x:e}");
                table.push(vec![
                    e(re),
                    e(domain.delta()),
                    name.clone(),
                    alpha.map(|a| a.to_string()).unwrap_or_default(),
                    e(theorem.constants.c1),
                    e(theorem.constants.c2),
                    e(theorem.strip_integral_value),
                    e(theorem.model_term),
                    e(theorem.bound_value),
                    corollary.as_ref().map(|c| c.kind.name().to_string()).unwrap_or_default(),
                    corollary.as_ref().map(|c| e(c.model_term)).unwrap_or_default(),
                    corollary.as_ref().map(|c| e(c.bound_value)).unwrap_or_default(),
                    corollary.as_ref().unwrap_or(&theorem).scaling_exponent.map(|x| x.to_string()).unwrap_or_default(),
                    e(reference / base),
                ]);
                let _ = write!(text, "Re = {re:e}, delta = {:e}\n{theorem}", domain.delta());
                if let Some(c) = &corollary {
                    let _ = write!(text, "{c}");
                }
                rows.push(PointRow {
                    domain,
                    grid: cfg.build_grid(&domain)?,
                    profile: name.clone(),
                    alpha,
                    measured: Err("not run".into()),
                    theorem: Ok(theorem),
                    corollary: corollary.map(Ok),
                    reference: reference_rates(&domain),
                });
            }
        }
    }
    let dir = &cfg.output_dir;
    let mut files = Vec::new();
    let path = dir.join("bounds.csv");
    write_rows(&path, &BOUNDS_HEADER, table)?;
    files.push(path);
    let slopes = slope_rows(&rows);
    let path = dir.join("slopes.csv");
    write_rows(&path, &SLOPE_HEADER, slopes.iter().map(|s| s.csv_row()))?;
    files.push(path);
    let path = dir.join("bounds.txt");
    fs::write(&path, &text)?;
    files.push(path);
    let mut summary = format!("{} bound rows\n", rows.len());
    for s in &slopes {
        let _ = writeln!(summary, "{s}");
    }
    Ok(Artifacts { files, summary, failures: 0 })
}

fn damping_table(cfg: &ExperimentConfig) -> Result<Artifacts> {
    if cfg.samples < 2 {
        return Err(Error::Parameter(format!("damping table needs at least 2 samples, got {}", cfg.samples)));
    }
    let domain = cfg.build_domain()?;
    let mut files = Vec::new();
    let mut summary = String::new();
    for (name, alpha) in profile_axis(cfg) {
        let profile = cfg.profile_named(&name, alpha.unwrap_or(cfg.alpha))?;
        let resolved = profile.resolve(&domain)?;
        let n = cfg.samples;
        let rows: Vec<[String; 2]> = (0..n)
            .map(|k| {
                let z = domain.length() * k as f64 / (n - 1) as f64;
                [format!("{z:e}"), format!("{:e}", resolved.value_unchecked(z))]
            })
            .collect();
        let suffix = alpha.map(|a| format!("_a{a}")).unwrap_or_default();
        let path = cfg.output_dir.join(format!("damping_{}{suffix}.csv", sanitize(&name)));
        write_rows(&path, &["z", "beta"], rows)?;
        let _ = writeln!(summary, "{} samples of {name}{suffix} -> {}", n, path.display());
        files.push(path);
    }
    Ok(Artifacts { files, summary, failures: 0 })
}
