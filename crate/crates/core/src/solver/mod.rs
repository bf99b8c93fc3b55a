//! Explicit projection solver for the damped Smagorinsky equations in the
//! lid-driven shear box.
//!
//! Each step is Heun's method (two-stage Runge-Kutta) on
//! `u_t = -N(u, u) + div(nu_eff grad u)`, with a pressure projection after
//! each stage. `N` is the skew-symmetric advection and
//! `nu_eff = nu + beta(z) (C_s delta)^2 |grad u|` sits on cell centres.

pub mod checkpoint;
pub mod operators;
pub mod oracle;
pub mod poisson;

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::damping::{DampingProfile, ResolvedProfile};
use crate::dissipation::{eps_from_gradient, kinetic_energy, Accumulator, DissipationRecord, EpsParts};
use crate::domain::{DomainParams, Grid};
use crate::error::{Error, Result};
use crate::field::{Gradient, VelocityField};
use operators::{add_stress_divergence, lid_power, model_energy_rate, sub_advection, EddyViscosity, StressPart};
use poisson::PoissonSolver;

pub use oracle::{steady_shear_profile, SteadyShearProfile};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Couette,
    /// Couette plus divergence-free trigonometric modes whose amplitudes
    /// (relative to `U`) are drawn from a seeded generator.
    Perturbed {
        amplitude: f64,
        seed: u64,
    },
    Checkpoint(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub cfl_number: f64,
    pub projection_tolerance: f64,
    pub end_time: f64,
    /// Time between diagnostic samples; 0 samples every step.
    pub sample_interval: f64,
    /// Reductions run in a fixed order. The solver is serial, so this holds
    /// either way; the flag is kept so configs state the requirement.
    pub deterministic_reduction: bool,
    pub initial_condition: InitialCondition,
    /// Stop once `max |du/dt| L / U^2` drops below this.
    pub steady_tolerance: Option<f64>,
    pub max_steps: Option<usize>,
    /// Upper limit on the step size (the stability limit still applies).
    pub max_dt: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl_number: 0.4,
            projection_tolerance: 1e-10,
            end_time: 1.0,
            sample_interval: 0.0,
            deterministic_reduction: true,
            initial_condition: InitialCondition::Couette,
            steady_tolerance: None,
            max_steps: None,
            max_dt: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_number > 0.0 && self.cfl_number < 1.0) {
            return Err(Error::Parameter(format!("cfl number must lie in (0, 1), got {}", self.cfl_number)));
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(Error::Parameter(format!("end time must be positive, got {}", self.end_time)));
        }
        if !(self.projection_tolerance > 0.0) {
            return Err(Error::Parameter("projection tolerance must be positive".into()));
        }
        if !(self.sample_interval >= 0.0) {
            return Err(Error::Parameter("sample interval must be >= 0".into()));
        }
        if let InitialCondition::Perturbed { amplitude, .. } = self.initial_condition {
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(Error::Parameter(format!("perturbation amplitude must be >= 0, got {amplitude}")));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one completed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub time: f64,
    pub dt: f64,
    /// Relative divergence after each projection (the larger one).
    pub divergence: f64,
    /// `-(beta (C_s delta)^2 |grad u| grad u, grad u)_h` at the start of the step.
    pub model_energy: f64,
    /// Energy input through the lid at the start of the step.
    pub lid_power: f64,
    /// `max |du/dt| L / U^2` over the step.
    pub change_rate: f64,
}

/// Initial field for a configuration.
pub fn initial_field(domain: &DomainParams, grid: &Grid, config: &SolverConfig) -> Result<VelocityField> {
    match &config.initial_condition {
        InitialCondition::Couette => Ok(VelocityField::couette(domain, grid)),
        InitialCondition::Perturbed { amplitude, seed } => {
            let mut f = VelocityField::couette(domain, grid);
            add_perturbation(&mut f, domain, *amplitude, *seed);
            Ok(f)
        }
        InitialCondition::Checkpoint(path) => {
            let (field, _) = checkpoint::read_checkpoint(path)?;
            let g = field.grid();
            if (g.nx, g.ny, g.nz) != (grid.nx, grid.ny, grid.nz) {
                return Err(Error::Checkpoint(format!(
                    "checkpoint grid {}x{}x{} does not match {}x{}x{}",
                    g.nx, g.ny, g.nz, grid.nx, grid.ny, grid.nz
                )));
            }
            let mut out = VelocityField::zeros(grid, domain.lid_speed());
            out.u = field.u;
            out.v = field.v;
            out.w = field.w;
            out.p = field.p;
            out.time = field.time;
            Ok(out)
        }
    }
}

/// Add discretely divergence-free modes built from stream functions
/// `psi = A U L / pi sin^2(pi z / L) sin(2 pi (m x + n y) / L + phase)`:
/// one acting in the `x`-`z` plane (`u += d psi/dz`, `w -= d psi/dx`) and
/// one in the `y`-`z` plane. Differencing the stream function on the grid
/// makes the discrete divergence vanish identically.
pub fn add_perturbation(field: &mut VelocityField, domain: &DomainParams, amplitude: f64, seed: u64) {
    let g = *field.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length = domain.length();
    let scale = amplitude * domain.lid_speed().max(f64::MIN_POSITIVE) * length / PI;
    let modes = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (1.0, 2.0)];
    for plane in 0..2 {
        for (m, n) in modes {
            let a = scale * rng.gen_range(-1.0..1.0);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let k = 2.0 * PI / length;
            // stream function on the edges shared with the differenced component
            let psi =
                |x: f64, y: f64, z: f64| a * (PI * z / length).sin().powi(2) * (k * (m * x + n * y) + phase).sin();
            for kk in 0..g.nz {
                let (zl, zh) = (kk as f64 * g.hz, (kk + 1) as f64 * g.hz);
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let s = g.idx(i, j, kk);
                        if plane == 0 {
                            let (x, y) = (i as f64 * g.hx, (j as f64 + 0.5) * g.hy);
                            field.u[s] += (psi(x, y, zh) - psi(x, y, zl)) / g.hz;
                        } else {
                            let (x, y) = ((i as f64 + 0.5) * g.hx, j as f64 * g.hy);
                            field.v[s] += (psi(x, y, zh) - psi(x, y, zl)) / g.hz;
                        }
                    }
                }
            }
            for kk in 1..g.nz {
                let z = kk as f64 * g.hz;
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let s = g.idx(i, j, kk);
                        field.w[s] -= if plane == 0 {
                            let y = (j as f64 + 0.5) * g.hy;
                            (psi((i + 1) as f64 * g.hx, y, z) - psi(i as f64 * g.hx, y, z)) / g.hx
                        } else {
                            let x = (i as f64 + 0.5) * g.hx;
                            (psi(x, (j + 1) as f64 * g.hy, z) - psi(x, j as f64 * g.hy, z)) / g.hy
                        };
                    }
                }
            }
        }
    }
}

/// A field together with everything needed to advance it.
#[derive(Debug)]
pub struct Solver {
    domain: DomainParams,
    grid: Grid,
    profile: ResolvedProfile,
    config: SolverConfig,
    poisson: PoissonSolver,
    field: VelocityField,
    steps: usize,
}

impl Solver {
    pub fn new(domain: &DomainParams, grid: &Grid, profile: &DampingProfile, config: &SolverConfig) -> Result<Self> {
        let field = initial_field(domain, grid, config)?;
        Self::with_field(field, domain, profile, config)
    }

    pub fn with_field(
        field: VelocityField,
        domain: &DomainParams,
        profile: &DampingProfile,
        config: &SolverConfig,
    ) -> Result<Self> {
        config.validate()?;
        let grid = *field.grid();
        if field.lid_speed() != domain.lid_speed() {
            return Err(Error::Parameter("field and domain disagree on the lid speed".into()));
        }
        let mut solver = Self {
            domain: *domain,
            grid,
            profile: profile.resolve(domain)?,
            config: config.clone(),
            poisson: PoissonSolver::new(&grid),
            field,
            steps: 0,
        };
        // Start from a solenoidal field whatever the source.
        let div = solver.project(1.0)?;
        if div > solver.config.projection_tolerance {
            return Err(Error::Projection { divergence: div, tolerance: solver.config.projection_tolerance });
        }
        solver.field.p.fill(0.0);
        Ok(solver)
    }

    pub fn field(&self) -> &VelocityField {
        &self.field
    }

    pub fn into_field(self) -> VelocityField {
        self.field
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn profile(&self) -> &ResolvedProfile {
        &self.profile
    }

    /// Dissipation and energy of the current field.
    pub fn diagnostics(&self) -> (f64, EpsParts) {
        let grad = Gradient::new(&self.field);
        (kinetic_energy(&self.field), eps_from_gradient(&self.field, &grad, &self.profile))
    }

    /// Stable step for the current field: advective and diffusive limits
    /// scaled by the CFL number.
    fn stable_dt(&self, visc: &EddyViscosity) -> f64 {
        let g = &self.grid;
        let max = |a: &[f64]| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let speed = (max(&self.field.u).max(self.field.lid_speed().abs())) / g.hx
            + max(&self.field.v) / g.hy
            + max(&self.field.w) / g.hz;
        let inv_h2 = 1.0 / (g.hx * g.hx) + 1.0 / (g.hy * g.hy) + 1.0 / (g.hz * g.hz);
        let diffusive = 1.0 / (2.0 * visc.max_total() * inv_h2);
        let advective = if speed > 0.0 { 1.0 / speed } else { f64::INFINITY };
        self.config.cfl_number * advective.min(diffusive)
    }

    fn tendency(&self, field: &VelocityField, grad: &Gradient, visc: &EddyViscosity) -> VelocityField {
        let mut out = VelocityField::zeros(&self.grid, 0.0);
        add_stress_divergence(grad, visc, StressPart::Total, &self.grid, &mut out);
        sub_advection(field, field, &mut out);
        out
    }

    /// Remove the gradient part of the current field; stores `phi / dt_stage`
    /// as pressure and returns the relative divergence afterwards.
    fn project(&mut self, dt_stage: f64) -> Result<f64> {
        let g = self.grid;
        let mut phi = self.field.divergence();
        self.poisson.solve(&mut phi);
        let f = &mut self.field;
        for k in 0..g.nz {
            for j in 0..g.ny {
                let jp = crate::field::prev(j, g.ny);
                for i in 0..g.nx {
                    let ip = crate::field::prev(i, g.nx);
                    let s = g.idx(i, j, k);
                    f.u[s] -= (phi[s] - phi[g.idx(ip, j, k)]) / g.hx;
                    f.v[s] -= (phi[s] - phi[g.idx(i, jp, k)]) / g.hy;
                    if k > 0 {
                        f.w[s] -= (phi[s] - phi[g.idx(i, j, k - 1)]) / g.hz;
                    }
                }
            }
        }
        for (p, q) in f.p.iter_mut().zip(&phi) {
            *p = q / dt_stage;
        }
        Ok(f.relative_divergence())
    }

    /// Advance by one stable step (clipped so as not to pass `end_time`).
    pub fn step(&mut self) -> Result<StepReport> {
        let time = self.field.time;
        let u0 = self.field.clone();
        let grad0 = Gradient::new(&u0);
        let visc0 = EddyViscosity::new(&grad0, &self.grid, &self.profile);
        let model_energy = model_energy_rate(&grad0, &visc0, &self.grid);
        let power = lid_power(&u0, &grad0, &visc0, StressPart::Total);

        let mut dt = self.stable_dt(&visc0);
        if let Some(cap) = self.config.max_dt {
            dt = dt.min(cap);
        }
        let floor = 1e-12 * self.config.end_time.max(f64::MIN_POSITIVE);
        if !dt.is_finite() || dt < floor {
            return Err(Error::Stability { dt, time });
        }
        let remaining = self.config.end_time - time;
        if remaining > 0.0 && remaining < dt * (1.0 + 1e-9) {
            dt = remaining;
        }

        // stage 1
        let r0 = self.tendency(&u0, &grad0, &visc0);
        axpy(&mut self.field, dt, &r0);
        let div1 = self.project(dt)?;

        // stage 2
        let u1 = self.field.clone();
        let grad1 = Gradient::new(&u1);
        let visc1 = EddyViscosity::new(&grad1, &self.grid, &self.profile);
        let r1 = self.tendency(&u1, &grad1, &visc1);
        axpy(&mut self.field, dt, &r1);
        average_into(&mut self.field, &u0);
        let div2 = self.project(0.5 * dt)?;

        let divergence = div1.max(div2);
        if divergence > self.config.projection_tolerance {
            return Err(Error::Projection { divergence, tolerance: self.config.projection_tolerance });
        }
        self.field.time = time + dt;
        self.steps += 1;
        if !self.field.is_finite() {
            return Err(Error::Boundedness { time: self.field.time, energy: f64::NAN, median: f64::NAN });
        }

        let change = max_diff(&self.field, &u0);
        let u_ref = self.domain.lid_speed().abs().max(u0.velocity_scale());
        let change_rate = change / dt * self.domain.length() / (u_ref * u_ref);
        Ok(StepReport { time: self.field.time, dt, divergence, model_energy, lid_power: power, change_rate })
    }
}

fn axpy(field: &mut VelocityField, a: f64, x: &VelocityField) {
    for (f, r) in [(&mut field.u, &x.u), (&mut field.v, &x.v), (&mut field.w, &x.w)] {
        f.iter_mut().zip(r).for_each(|(f, r)| *f += a * r);
    }
}

fn average_into(field: &mut VelocityField, other: &VelocityField) {
    for (f, o) in [(&mut field.u, &other.u), (&mut field.v, &other.v), (&mut field.w, &other.w)] {
        f.iter_mut().zip(o).for_each(|(f, o)| *f = 0.5 * (*f + o));
    }
}

fn max_diff(a: &VelocityField, b: &VelocityField) -> f64 {
    [(&a.u, &b.u), (&a.v, &b.v), (&a.w, &b.w)]
        .iter()
        .flat_map(|(x, y)| x.iter().zip(y.iter()))
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// One step of the scheme on a copy of `field`.
pub fn advance(
    field: &VelocityField,
    profile: &DampingProfile,
    domain: &DomainParams,
    config: &SolverConfig,
) -> Result<VelocityField> {
    let mut solver = Solver::with_field(field.clone(), domain, profile, config)?;
    solver.step()?;
    Ok(solver.into_field())
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EndTime,
    Steady,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: VelocityField,
    pub accumulator: Accumulator,
    pub steps: usize,
    pub stop: StopReason,
    /// Largest relative divergence seen after any projection.
    pub max_divergence: f64,
    /// Largest (least negative) model energy contribution over all steps.
    pub max_model_energy: f64,
    pub last_step: Option<StepReport>,
}

impl RunOutput {
    pub fn records(&self) -> &[DissipationRecord] {
        self.accumulator.records()
    }
}

/// Guard against runaway growth: trips when the kinetic energy exceeds 100
/// times the median of the earlier samples (never less than `U^2 L^3 / 2`,
/// so a flow starting near rest is not flagged for spinning up).
#[derive(Debug, Clone)]
pub struct EnergyGuard {
    sorted: Vec<f64>,
    floor: f64,
}

impl EnergyGuard {
    pub fn new(domain: &DomainParams) -> Self {
        Self { sorted: Vec::new(), floor: 0.5 * domain.lid_speed().powi(2) * domain.volume() }
    }

    pub fn median(&self) -> Option<f64> {
        let n = self.sorted.len();
        match n {
            0 => None,
            _ if n % 2 == 1 => Some(self.sorted[n / 2]),
            _ => Some(0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])),
        }
    }

    pub fn check(&mut self, time: f64, energy: f64) -> Result<()> {
        let reference = self.median().unwrap_or(energy).max(self.floor);
        if !energy.is_finite() || energy > 100.0 * reference {
            return Err(Error::Boundedness { time, energy, median: reference });
        }
        let at = self.sorted.partition_point(|x| *x < energy);
        self.sorted.insert(at, energy);
        Ok(())
    }
}

/// Step to `end_time` (or a steady state / step limit), sampling the
/// dissipation diagnostics at the configured cadence.
pub fn run(
    field: VelocityField,
    profile: &DampingProfile,
    domain: &DomainParams,
    config: &SolverConfig,
) -> Result<RunOutput> {
    let mut solver = Solver::with_field(field, domain, profile, config)?;
    run_solver(&mut solver, config, |_| Ok(()))
}

/// [`run`] on an existing solver, calling `observe` after every step.
pub fn run_solver(
    solver: &mut Solver,
    config: &SolverConfig,
    mut observe: impl FnMut(&StepReport) -> Result<()>,
) -> Result<RunOutput> {
    let mut acc = Accumulator::new();
    let mut guard = EnergyGuard::new(&solver.domain);
    let sample = |solver: &Solver, acc: &mut Accumulator, guard: &mut EnergyGuard| -> Result<()> {
        let (ke, eps) = solver.diagnostics();
        let t = solver.field.time;
        guard.check(t, ke)?;
        acc.accumulate(t, ke, eps)?;
        Ok(())
    };
    sample(solver, &mut acc, &mut guard)?;
    let mut next_sample = solver.field.time + config.sample_interval;
    let (mut max_div, mut max_model) = (0.0f64, f64::NEG_INFINITY);
    let mut last = None;
    let mut stop = StopReason::EndTime;
    let end = config.end_time;
    let mut sampled_last = true;
    while solver.field.time < end {
        if config.max_steps.is_some_and(|m| solver.steps >= m) {
            stop = StopReason::StepLimit;
            break;
        }
        let report = solver.step()?;
        observe(&report)?;
        max_div = max_div.max(report.divergence);
        max_model = max_model.max(report.model_energy);
        last = Some(report);
        sampled_last = false;
        if config.sample_interval == 0.0 || report.time >= next_sample - 1e-12 * end {
            sample(solver, &mut acc, &mut guard)?;
            sampled_last = true;
            if config.sample_interval > 0.0 {
                while next_sample <= report.time + 1e-12 * end {
                    next_sample += config.sample_interval;
                }
            }
        }
        if config.steady_tolerance.is_some_and(|tol| report.change_rate < tol) {
            stop = StopReason::Steady;
            break;
        }
    }
    if !sampled_last {
        sample(solver, &mut acc, &mut guard)?;
    }
    Ok(RunOutput {
        field: solver.field.clone(),
        accumulator: acc,
        steps: solver.steps,
        stop,
        max_divergence: max_div,
        max_model_energy: max_model,
        last_step: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_domain;

    #[test]
    fn couette_stays_put() {
        let d = make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap();
        let g = Grid::new(&d, 4, 4, 16).unwrap();
        let f = VelocityField::couette(&d, &g);
        let cfg = SolverConfig::default();
        let next = advance(&f, &DampingProfile::one(), &d, &cfg).unwrap();
        let diff = max_diff(&next, &f);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn rest_stays_at_rest() {
        let d = make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap().with_lid_speed(0.0).unwrap();
        let g = Grid::new(&d, 4, 4, 8).unwrap();
        let cfg = SolverConfig { end_time: 0.05, ..SolverConfig::default() };
        let out = run(VelocityField::zeros(&g, 0.0), &DampingProfile::one(), &d, &cfg).unwrap();
        assert!(out.field.u.iter().chain(&out.field.v).chain(&out.field.w).all(|x| *x == 0.0));
    }

    #[test]
    fn perturbation_is_solenoidal_and_projection_holds() {
        let d = make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap();
        let g = Grid::new(&d, 8, 8, 8).unwrap();
        let mut f = VelocityField::couette(&d, &g);
        add_perturbation(&mut f, &d, 0.3, 7);
        assert!(f.relative_divergence() < 1e-13);
        assert!(max_diff(&f, &VelocityField::couette(&d, &g)) > 0.05);
        let cfg = SolverConfig { end_time: 0.05, ..SolverConfig::default() };
        let out = run(f, &DampingProfile::hermite(2), &d, &cfg).unwrap();
        assert!(out.max_divergence < 1e-10);
        assert!(out.max_model_energy <= 0.0);
    }

    #[test]
    fn sampling_cadence() {
        let d = make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap();
        let g = Grid::new(&d, 4, 4, 8).unwrap();
        let cfg = SolverConfig { end_time: 0.1, max_dt: Some(0.01), ..SolverConfig::default() };
        let out = run(VelocityField::couette(&d, &g), &DampingProfile::one(), &d, &cfg).unwrap();
        assert_eq!(out.records().len(), out.steps + 1);
        assert!((out.field.time - 0.1).abs() < 1e-12);
        let cfg = SolverConfig { end_time: 0.1, sample_interval: 0.05, max_dt: Some(0.01), ..SolverConfig::default() };
        let out = run(VelocityField::couette(&d, &g), &DampingProfile::one(), &d, &cfg).unwrap();
        assert_eq!(out.records().len(), 3);
    }

    #[test]
    fn energy_guard() {
        let d = make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap();
        let mut guard = EnergyGuard::new(&d);
        for e in [0.1, 0.2, 0.15] {
            guard.check(0.0, e).unwrap();
        }
        assert_eq!(guard.median(), Some(0.15));
        assert!(guard.check(1.0, 49.0).is_ok());
        assert!(matches!(guard.check(1.0, 51.0), Err(Error::Boundedness { .. })));
        assert!(guard.check(1.0, f64::NAN).is_err());
    }
}
