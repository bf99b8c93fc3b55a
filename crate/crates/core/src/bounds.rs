//! Upper bounds on the mean dissipation rate with explicit constants.
//!
//! Every bound has the shape
//! `[c1 + c2 (C_s delta / L)^2 Re^3 (1/L) int_{L - gamma L}^L beta dz] U^3 / L`
//! with
//!
//! * `m  = min(1/2 - (5/2) gamma Re, 1/3)`,
//! * `c1 = (19/6 + 1 / (2 gamma Re)) / m`,
//! * `c2 = (1 / (gamma Re))^3 / (3 m)`.
//!
//! With `gamma Re = 1/5.1` these are `m = 1/102`, `c1 = 583.1` and
//! `c2 = 4510.134`.

use std::fmt;
use std::io::Write;

use crate::damping::{hermite_envelope_constant, strip_integral, DampingProfile, ProfileKind};
use crate::domain::DomainParams;
use crate::error::{Error, Result};

/// Which estimate a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Generic bound for an arbitrary damping profile.
    Theorem,
    /// Algebraic wall damping of contact order `alpha`.
    Algebraic,
    /// Hermite-blended damping with `alpha >= 2`; Re-independent envelope.
    Hermite,
    /// Hermite-blended damping with `alpha = 1`; linear growth in Re.
    HermiteLinear,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::Theorem => "theorem",
            BoundKind::Algebraic => "algebraic",
            BoundKind::Hermite => "hermite",
            BoundKind::HermiteLinear => "hermite_alpha1",
        }
    }
}

/// The proof constants for a given `gamma Re`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub gamma_re: f64,
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BoundConstants {
    pub fn new(domain: &DomainParams) -> Result<Self> {
        let gamma_re = domain.gamma() * domain.re();
        Self::from_gamma_re(gamma_re)
    }

    pub fn from_gamma_re(gamma_re: f64) -> Result<Self> {
        let m = (0.5 - 2.5 * gamma_re).min(1.0 / 3.0);
        if !(gamma_re > 0.0 && m > 0.0) {
            return Err(Error::Precondition(format!(
                "the energy estimate needs 1/2 - (5/2) gamma Re > 0, i.e. gamma Re < 1/5; got gamma Re = {gamma_re}"
            )));
        }
        Ok(Self { gamma_re, m, c1: (19.0 / 6.0 + 0.5 / gamma_re) / m, c2: gamma_re.powi(-3) / 3.0 / m })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub profile: String,
    pub alpha: Option<u32>,
    pub re: f64,
    pub delta: f64,
    pub constants: BoundConstants,
    /// `int_{L - gamma L}^L beta dz` (for the hermite envelope, `C_a L gamma^(a+1)`).
    pub strip_integral_value: f64,
    /// Model contribution in units of `U^3 / L`.
    pub model_term: f64,
    /// Full bound in physical units.
    pub bound_value: f64,
    /// Power of Re carried by the model term, when it is a pure power.
    pub scaling_exponent: Option<i32>,
    pub derivation: Vec<String>,
}

impl BoundReport {
    /// Bound in units of `U^3 / L`.
    pub fn dimensionless(&self) -> f64 {
        self.constants.c1 + self.model_term
    }

    pub const CSV_HEADER: [&'static str; 11] = [
        "kind",
        "profile",
        "alpha",
        "re",
        "delta",
        "c1",
        "c2",
        "strip_integral",
        "model_term",
        "bound",
        "scaling_exponent",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |o: Option<String>| o.unwrap_or_default();
        vec![
            self.kind.name().to_string(),
            self.profile.clone(),
            opt(self.alpha.map(|a| a.to_string())),
            format!("{:e}", self.re),
            format!("{:e}", self.delta),
            format!("{:e}", self.constants.c1),
            format!("{:e}", self.constants.c2),
            format!("{:e}", self.strip_integral_value),
            format!("{:e}", self.model_term),
            format!("{:e}", self.bound_value),
            opt(self.scaling_exponent.map(|e| e.to_string())),
        ]
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound [{}] for profile {}", self.kind.name(), self.profile)?;
        for line in &self.derivation {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

pub fn write_reports<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BoundReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn constants_trace(c: &BoundConstants) -> Vec<String> {
    vec![
        format!("gamma Re = {:.10}", c.gamma_re),
        format!("m = min(1/2 - (5/2) gamma Re, 1/3) = {:.10}", c.m),
        format!("c1 = (19/6 + 1/(2 gamma Re)) / m = {:.6}", c.c1),
        format!("c2 = (1/(gamma Re))^3 / (3 m) = {:.6}", c.c2),
    ]
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    kind: BoundKind,
    domain: &DomainParams,
    profile: &DampingProfile,
    constants: BoundConstants,
    strip: f64,
    model_term: f64,
    scaling_exponent: Option<i32>,
    mut derivation: Vec<String>,
) -> BoundReport {
    let dimensionless = constants.c1 + model_term;
    derivation.push(format!("model term = {model_term:.6} U^3/L"));
    derivation.push(format!(
        "bound = ({:.6} + {:.6}) U^3/L = {:.6}",
        constants.c1,
        model_term,
        dimensionless * domain.dissipation_scale()
    ));
    BoundReport {
        kind,
        profile: profile.name(),
        alpha: profile.alpha(),
        re: domain.re(),
        delta: domain.delta(),
        constants,
        strip_integral_value: strip,
        model_term,
        bound_value: dimensionless * domain.dissipation_scale(),
        scaling_exponent,
        derivation,
    }
}

/// `(C_s delta / L)^2`.
fn model_ratio_sq(domain: &DomainParams) -> f64 {
    (domain.model_length() / domain.length()).powi(2)
}

/// Generic bound for any nonnegative integrable damping profile.
pub fn theorem_bound(domain: &DomainParams, profile: &DampingProfile) -> Result<BoundReport> {
    let constants = BoundConstants::new(domain)?;
    let strip = strip_integral(profile, domain)?.value();
    let re = domain.re();
    let model_term = constants.c2 * model_ratio_sq(domain) * re.powi(3) * strip / domain.length();
    let exponent = match profile.kind() {
        ProfileKind::Constant(c) if *c > 0.0 => Some(2),
        ProfileKind::Algebraic { .. } => Some(2),
        ProfileKind::Hermite { alpha } => Some(2 - *alpha as i32),
        _ => None,
    };
    let mut trace = constants_trace(&constants);
    trace.push(format!("strip integral of beta = {strip:.10e}"));
    trace.push(format!(
        "c2 (C_s delta/L)^2 Re^3 (1/L) int beta = {:.6} * {:.6e} * {:.6e} * {:.6e}",
        constants.c2,
        model_ratio_sq(domain),
        re.powi(3),
        strip / domain.length()
    ));
    Ok(assemble(BoundKind::Theorem, domain, profile, constants, strip, model_term, exponent, trace))
}

/// Closed-form corollaries for the wall-damping families.
pub fn corollary_bound(domain: &DomainParams, kind: BoundKind, alpha: u32) -> Result<BoundReport> {
    let constants = BoundConstants::new(domain)?;
    let (re, gamma, length) = (domain.re(), domain.gamma(), domain.length());
    let gr = constants.gamma_re;
    let ratio = model_ratio_sq(domain);
    let mut trace = constants_trace(&constants);
    let (profile, strip, model, exponent) = match kind {
        BoundKind::Theorem => return Err(Error::Precondition("use theorem_bound for the generic case".into())),
        BoundKind::Algebraic => {
            let strip = length * gamma * gr.powi(alpha as i32) / (alpha as f64 + 1.0);
            let model = constants.c2 * ratio * re * re * gr.powi(alpha as i32 + 1) / (alpha as f64 + 1.0);
            trace.push(format!(
                "int beta_w = L gamma (gamma Re)^a / (a+1); model = c2 (C_s delta/L)^2 Re^2 (gamma Re)^(a+1) / (a+1), a = {alpha}"
            ));
            (DampingProfile::algebraic(alpha), strip, model, 2)
        }
        BoundKind::Hermite => {
            if alpha < 2 {
                return Err(Error::Precondition(format!(
                    "the Re-independent hermite bound needs contact order >= 2, got {alpha}"
                )));
            }
            let c_alpha = hermite_envelope_constant(alpha);
            let strip = c_alpha * length * gamma.powi(alpha as i32 + 1);
            let model = constants.c2 * ratio * gr.powi(3) * c_alpha;
            trace.push(format!(
                "int beta_d <= C_a L gamma^(a+1), C_a = {c_alpha:.10}; Re^3 gamma^(a+1) <= (gamma Re)^3 since gamma < 1"
            ));
            (DampingProfile::hermite(alpha), strip, model, 0)
        }
        BoundKind::HermiteLinear => {
            if alpha != 1 {
                return Err(Error::Precondition(format!(
                    "the linear-in-Re hermite bound is for contact order 1, got {alpha}"
                )));
            }
            let c_alpha = hermite_envelope_constant(1);
            let strip = c_alpha * length * gamma * gamma;
            let model = constants.c2 * ratio * gr * gr * c_alpha * re;
            trace.push(format!("int beta_d <= C_1 L gamma^2, C_1 = {c_alpha:.10}; Re^3 gamma^2 = (gamma Re)^2 Re"));
            (DampingProfile::hermite(1), strip, model, 1)
        }
    };
    Ok(assemble(kind, domain, &profile, constants, strip, model, Some(exponent), trace))
}

/// Older dissipation estimates, for side-by-side comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRates {
    /// Undamped Smagorinsky with boundary layers:
    /// `[1 + C_s^2 (delta/L)^2 (1 + Re)^2] U^3 / L`.
    pub undamped: f64,
    /// Rate without boundary layers, `U^3 / L`.
    pub kolmogorov: f64,
}

pub fn reference_rates(domain: &DomainParams) -> ReferenceRates {
    let scale = domain.dissipation_scale();
    ReferenceRates { undamped: undamped_coefficient(model_ratio_sq(domain), domain.re()) * scale, kolmogorov: scale }
}

/// `1 + (C_s delta / L)^2 (1 + Re)^2`.
pub fn undamped_coefficient(model_ratio_sq: f64, re: f64) -> f64 {
    1.0 + model_ratio_sq * (1.0 + re).powi(2)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Parameter("slope fit needs two or more paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Parameter("slope fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("slope fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}
