//! Quick property checks across all modules, run by the `verify` mode.
//!
//! Each check records a measured deviation and the tolerance it must stay
//! within. The parameters are fixed so results do not depend on the config.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Artifacts, ExperimentConfig};
use crate::background::{hardy_ratio, phi_norms, poincare_ratio, BackgroundFlow, RandomStripField, StripRegion};
use crate::bounds::{corollary_bound, log_log_slope, BoundConstants, BoundKind};
use crate::damping::{strip_integral, taylor_approx_f_w, van_driest_exact, DampingProfile, Table};
use crate::domain::{DomainParams, Grid};
use crate::error::Result;
use crate::field::{Gradient, VelocityField};
use crate::solver::operators::{add_stress_divergence, sub_advection, trilinear, EddyViscosity, StressPart};
use crate::solver::{add_perturbation, run, steady_shear_profile, InitialCondition, SolverConfig};

pub const VERIFY_HEADER: [&str; 4] = ["check", "value", "tolerance", "pass"];

/// One verification result: passes when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Checks that fail with an error are reported as failures with value
/// infinity rather than aborting the suite.
fn guarded(name: &str, checks: &mut Vec<Check>, f: impl FnOnce(&mut Vec<Check>) -> Result<()>) {
    let mut local = Vec::new();
    if f(&mut local).is_err() {
        local.push(Check::new(format!("{name}: error"), f64::INFINITY, 0.0));
    }
    checks.extend(local);
}

pub fn bound_checks(out: &mut Vec<Check>) -> Result<()> {
    let c = BoundConstants::from_gamma_re(1.0 / 5.1)?;
    out.push(Check::new("bounds: c1 = 583.1", rel(c.c1, 583.1), 1e-12));
    out.push(Check::new("bounds: c2 = 4510.134", (c.c2 - 4510.134).abs(), 5e-4));
    let res = [1e2, 1e3, 1e4];
    for (kind, alpha, expected) in [
        (BoundKind::Algebraic, 2, 2.0),
        (BoundKind::Hermite, 2, 0.0),
        (BoundKind::Hermite, 3, 0.0),
        (BoundKind::HermiteLinear, 1, 1.0),
    ] {
        let terms = res
            .iter()
            .map(|&re| {
                let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0)?;
                Ok(corollary_bound(&d, kind, alpha)?.model_term)
            })
            .collect::<Result<Vec<f64>>>()?;
        let slope = log_log_slope(&res, &terms)?;
        out.push(Check::new(format!("bounds: {} alpha {alpha} slope", kind.name()), (slope - expected).abs(), 0.01));
    }
    Ok(())
}

pub fn damping_checks(out: &mut Vec<Check>) -> Result<()> {
    let mut worst_junction = 0.0f64;
    for re in [1.0, 10.0, 100.0, 1e4] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0)?;
        for alpha in 1..=4 {
            let (v, s) = DampingProfile::hermite(alpha).resolve(&d)?.junction_mismatch();
            worst_junction = worst_junction.max(v).max(s);
        }
    }
    out.push(Check::new("damping: hermite junction mismatch", worst_junction, 1e-10));

    let d = DomainParams::with_reynolds(1.0, 1.0, 100.0, 0.1, 0.1, 1.0)?;
    let table =
        Table::new(vec![0.0, 0.5, 0.99, 1.0], vec![0.0, 1.0, 0.3, 0.0]).map_err(crate::error::Error::Parameter)?;
    let mut worst_strip = 0.0f64;
    for p in [
        DampingProfile::one(),
        DampingProfile::constant(0.5)?,
        DampingProfile::van_driest(),
        DampingProfile::algebraic(2),
        DampingProfile::hermite(1),
        DampingProfile::hermite(2),
        DampingProfile::hermite(3),
        DampingProfile::tabulated(table),
    ] {
        worst_strip = worst_strip.max(strip_integral(&p, &d)?.relative_difference());
    }
    out.push(Check::new("damping: strip integral closed form vs quadrature", worst_strip, 1e-10));

    let mut worst_taylor = 0.0f64;
    let h = 1.0 / d.re();
    for k in 0..=100 {
        let z = 1.0 - h * k as f64 / 101.0;
        worst_taylor = worst_taylor.max((taylor_approx_f_w(z, &d, 8)? - van_driest_exact(z, &d)?).abs());
    }
    out.push(Check::new("damping: taylor order 8 vs van Driest", worst_taylor, 1e-6));
    Ok(())
}

pub fn background_checks(out: &mut Vec<Check>) -> Result<()> {
    let mut worst_norm = 0.0f64;
    for re in [10.0, 100.0, 1000.0] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0)?;
        worst_norm = worst_norm.max(phi_norms(&BackgroundFlow::new(&d))?.max_relative_error());
    }
    out.push(Check::new("background: norm closed forms", worst_norm, 1e-10));

    let d = DomainParams::with_reynolds(1.0, 1.0, 100.0, 0.1, 0.1, 1.0)?;
    let strip = StripRegion::new(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut poincare, mut hardy) = (0usize, 0usize);
    for _ in 0..100 {
        let field = RandomStripField::generate(&mut rng, &strip);
        if poincare_ratio(&field, &strip)? > strip.width() {
            poincare += 1;
        }
        for p in [1.5, 2.0, 3.0] {
            if hardy_ratio(&field, p, &strip)? > p / (p - 1.0) {
                hardy += 1;
            }
        }
    }
    out.push(Check::new("background: Poincare violations (100 fields)", poincare as f64, 0.0));
    out.push(Check::new("background: Hardy violations (100 fields x 3 p)", hardy as f64, 0.0));
    Ok(())
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> VelocityField {
    let mut f = VelocityField::zeros(grid, 1.0);
    for x in f.u.iter_mut().chain(f.v.iter_mut()) {
        *x = rng.gen_range(-1.0..1.0);
    }
    let layer = grid.nx * grid.ny;
    let n = f.w.len();
    for x in &mut f.w[layer..n - layer] {
        *x = rng.gen_range(-1.0..1.0);
    }
    f
}

pub fn solver_checks(out: &mut Vec<Check>) -> Result<()> {
    let d = DomainParams::with_reynolds(1.0, 1.0, 1000.0, 0.1, 0.5, 1.0)?;
    let g = Grid::new(&d, 6, 5, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a = random_field(&g, &mut rng);
        let phi = random_field(&g, &mut rng);
        let scale = a.inner(&a).sqrt() * phi.inner(&phi) / g.min_width();
        worst = worst.max(trilinear(&a, &phi).abs() / scale);
    }
    out.push(Check::new("solver: advection skew residual", worst, 1e-12));

    let d1 = DomainParams::with_reynolds(1.0, 1.0, 100.0, 0.1, 0.1, 1.0)?;
    let g1 = Grid::new(&d1, 4, 4, 16)?;
    let f = VelocityField::couette(&d1, &g1);
    let grad = Gradient::new(&f);
    let visc = EddyViscosity::new(&grad, &g1, &DampingProfile::one().resolve(&d1)?);
    let mut tend = VelocityField::zeros(&g1, 0.0);
    add_stress_divergence(&grad, &visc, StressPart::Total, &g1, &mut tend);
    sub_advection(&f, &f, &mut tend);
    let residual = tend.u.iter().chain(&tend.v).chain(&tend.w).fold(0.0f64, |m, x| m.max(x.abs()));
    out.push(Check::new("solver: Couette is a discrete equilibrium", residual, 1e-12));

    let mut pert = VelocityField::couette(&d, &Grid::new(&d, 8, 8, 16)?);
    add_perturbation(&mut pert, &d, 0.2, 11);
    out.push(Check::new("solver: perturbation divergence", pert.relative_divergence(), 1e-12));

    let g2 = Grid::new(&d, 8, 8, 16)?;
    let cfg = SolverConfig {
        end_time: 10.0,
        max_steps: Some(100),
        initial_condition: InitialCondition::Perturbed { amplitude: 0.2, seed: 11 },
        ..SolverConfig::default()
    };
    let field = crate::solver::initial_field(&d, &g2, &cfg)?;
    let run_out = run(field, &DampingProfile::hermite(2), &d, &cfg)?;
    out.push(Check::new("solver: post-projection divergence", run_out.max_divergence, 1e-10));
    out.push(Check::new("solver: model energy rate (max over steps)", run_out.max_model_energy.max(0.0), 0.0));

    let d3 = DomainParams::with_reynolds(1.0, 1.0, 1.0, 0.3, 1.0, 1.0)?;
    let s = steady_shear_profile(&DampingProfile::hermite(2), &d3, 201)?;
    out.push(Check::new("solver: shear oracle power balance", rel(s.dissipation()?, s.tau), 1e-10));
    Ok(())
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let mut checks = Vec::new();
    guarded("bounds", &mut checks, bound_checks);
    guarded("damping", &mut checks, damping_checks);
    guarded("background", &mut checks, background_checks);
    guarded("solver", &mut checks, solver_checks);

    let path = cfg.output_dir.join("verify.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
    w.write_record(VERIFY_HEADER)?;
    let mut summary = String::new();
    for c in &checks {
        w.write_record([
            c.name.clone(),
            format!("{:e}", c.value),
            format!("{:e}", c.tolerance),
            c.passed().to_string(),
        ])?;
        let _ = writeln!(
            summary,
            "{} {} ({:e} <= {:e})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    w.flush()?;
    let failures = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(summary, "{} checks, {failures} failed", checks.len());
    Ok(Artifacts { files: vec![path], summary, failures })
}
