//! Wall-damping functions `beta(z)` multiplying the Smagorinsky viscosity.
//!
//! Available profiles:
//!
//! * `Constant(c)`: `beta = c` everywhere (`c = 1` is the undamped model,
//!   `c = 0` switches the model off).
//! * `VanDriest`: `1 - exp(-z+/26)` measured from the lid, with the wall
//!   shear velocity estimated as `U / 2^(1/4)`.
//! * `Algebraic { alpha }`: `Re^a (z/L)^a` in the bottom strip, `1` in the
//!   core and `Re^a (1 - z/L)^a` in the top strip (`beta_w`).
//! * `Hermite { alpha }`: `(z/L)^a (1 - z/L)^a` in both strips, joined to the
//!   undamped core by cubic Hermite blends over one more strip width
//!   (`beta_d`, continuously differentiable).
//! * `Tabulated`: piecewise-linear interpolation of user samples.
//!
//! Strip widths are `gamma L` with `gamma = kappa / (5.1 Re)`.

use std::fmt;
use std::path::Path;

use nalgebra::{Matrix4, Vector4};

use crate::domain::DomainParams;
use crate::error::{Error, Result};
use crate::quadrature;

/// Van Driest constant `A+`.
pub const A_PLUS: f64 = 26.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Constant(f64),
    VanDriest,
    Algebraic { alpha: u32 },
    Hermite { alpha: u32 },
    Tabulated(Table),
}

/// A damping function, independent of any particular domain. Bind it to a
/// domain with [`DampingProfile::resolve`] before evaluating in a loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingProfile {
    kind: ProfileKind,
}

impl DampingProfile {
    pub fn one() -> Self {
        Self { kind: ProfileKind::Constant(1.0) }
    }

    pub fn zero() -> Self {
        Self { kind: ProfileKind::Constant(0.0) }
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Parameter(format!("constant damping must be >= 0, got {value}")));
        }
        Ok(Self { kind: ProfileKind::Constant(value) })
    }

    pub fn van_driest() -> Self {
        Self { kind: ProfileKind::VanDriest }
    }

    pub fn algebraic(alpha: u32) -> Self {
        Self { kind: ProfileKind::Algebraic { alpha } }
    }

    pub fn hermite(alpha: u32) -> Self {
        Self { kind: ProfileKind::Hermite { alpha } }
    }

    pub fn tabulated(table: Table) -> Self {
        Self { kind: ProfileKind::Tabulated(table) }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn alpha(&self) -> Option<u32> {
        match self.kind {
            ProfileKind::Algebraic { alpha } | ProfileKind::Hermite { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Short identifier used in CSV output and config files.
    pub fn name(&self) -> String {
        match &self.kind {
            ProfileKind::Constant(c) if *c == 1.0 => "one".into(),
            ProfileKind::Constant(c) if *c == 0.0 => "zero".into(),
            ProfileKind::Constant(c) => format!("constant({c})"),
            ProfileKind::VanDriest => "van_driest".into(),
            ProfileKind::Algebraic { .. } => "algebraic".into(),
            ProfileKind::Hermite { .. } => "hermite".into(),
            ProfileKind::Tabulated(_) => "table".into(),
        }
    }

    /// Precompute everything domain dependent.
    pub fn resolve(&self, domain: &DomainParams) -> Result<ResolvedProfile> {
        let hermite = match self.kind {
            ProfileKind::Hermite { alpha } => Some(hermite_coefficients(domain, alpha)?.matching),
            _ => None,
        };
        if let ProfileKind::Tabulated(table) = &self.kind {
            table.check_covers(domain.length())?;
        }
        if matches!(self.kind, ProfileKind::Algebraic { .. } | ProfileKind::Hermite { .. })
            && !domain.gamma().is_finite()
        {
            return Err(Error::Parameter("wall-strip profiles need a moving lid (finite gamma)".into()));
        }
        Ok(ResolvedProfile { profile: self.clone(), domain: *domain, hermite })
    }
}

impl fmt::Display for DampingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alpha() {
            Some(alpha) => write!(f, "{}(alpha={alpha})", self.name()),
            None => f.write_str(&self.name()),
        }
    }
}

/// Sampled damping profile; linear between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    z: Vec<f64>,
    beta: Vec<f64>,
}

impl Table {
    pub fn new(z: Vec<f64>, beta: Vec<f64>) -> std::result::Result<Self, String> {
        if z.len() != beta.len() {
            return Err("column lengths differ".into());
        }
        if z.len() < 2 {
            return Err("need at least two samples".into());
        }
        if let Some(w) = z.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(format!("z must be strictly increasing ({} then {})", w[0], w[1]));
        }
        if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(format!("beta must be finite and nonnegative, got {b}"));
        }
        if z[0] < 0.0 || !z.iter().all(|z| z.is_finite()) {
            return Err("z must be finite and nonnegative".into());
        }
        Ok(Self { z, beta })
    }

    /// Two whitespace-separated columns `z beta`; `#` starts a comment.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut z = Vec::new();
        let mut beta = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(format!("line {}: expected two columns", n + 1));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {s:?}: {e}", n + 1));
            z.push(parse(cols[0])?);
            beta.push(parse(cols[1])?);
        }
        Self::new(z, beta)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|reason| Error::Table { path: path.to_owned(), reason })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.z
    }

    pub fn values(&self) -> &[f64] {
        &self.beta
    }

    fn check_covers(&self, length: f64) -> Result<()> {
        let tol = 1e-12 * length;
        let (first, last) = (self.z[0], self.z[self.z.len() - 1]);
        if first > tol || (last - length).abs() > tol {
            return Err(Error::Parameter(format!(
                "table spans [{first}, {last}] but must cover exactly [0, {length}]"
            )));
        }
        Ok(())
    }

    fn eval(&self, z: f64) -> f64 {
        let n = self.z.len();
        let k = self.z.partition_point(|&zk| zk <= z).clamp(1, n - 1);
        let (z0, z1) = (self.z[k - 1], self.z[k]);
        let t = ((z - z0) / (z1 - z0)).clamp(0.0, 1.0);
        self.beta[k - 1] + t * (self.beta[k] - self.beta[k - 1])
    }

    fn slope(&self, z: f64) -> f64 {
        let n = self.z.len();
        let k = self.z.partition_point(|&zk| zk <= z).clamp(1, n - 1);
        (self.beta[k] - self.beta[k - 1]) / (self.z[k] - self.z[k - 1])
    }

    /// Exact integral of the interpolant over `[a, b]`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        let mut pts = vec![a];
        pts.extend(self.z.iter().copied().filter(|&z| z > a && z < b));
        pts.push(b);
        pts.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1]))).sum()
    }
}

/// Cubic blend coefficients of `beta_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl HermiteCoefficients {
    fn as_array(&self) -> [f64; 6] {
        [self.a1, self.b1, self.c1, self.d1, self.a2, self.b2]
    }

    /// Largest difference between two coefficient sets on the blend scale
    /// `h = gamma L`: cubic terms times `h^3`, quadratic times `h^2`, slope
    /// times `h`, relative to the larger magnitude or 1 (the blends span
    /// `[d1, 1]`).
    pub fn scaled_difference(&self, other: &Self, h: f64) -> f64 {
        let scales = [h.powi(3), h * h, h, 1.0, h.powi(3), h * h];
        self.as_array()
            .iter()
            .zip(other.as_array())
            .zip(scales)
            .map(|((a, b), s)| (a - b).abs() * s / (a.abs() * s).max(b.abs() * s).max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Both derivations of the blend coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteDerivation {
    /// Closed-form coefficient formulas; these cancel badly for small gamma.
    pub bullets: HermiteCoefficients,
    /// Solution of the value/slope matching system; authoritative.
    pub matching: HermiteCoefficients,
    /// [`HermiteCoefficients::scaled_difference`] between the two.
    pub discrepancy: f64,
}

/// Outer piece `(z/L)^a (1 - z/L)^a` and its derivative.
fn outer(z: f64, length: f64, alpha: u32) -> f64 {
    let s = z / length;
    (s * (1.0 - s)).powi(alpha as i32)
}

fn outer_slope(z: f64, length: f64, alpha: u32) -> f64 {
    if alpha == 0 {
        return 0.0;
    }
    let s = z / length;
    let a = alpha as f64;
    a / length * (s * (1.0 - s)).powi(alpha as i32 - 1) * (1.0 - 2.0 * s)
}

pub fn hermite_coefficients(domain: &DomainParams, alpha: u32) -> Result<HermiteDerivation> {
    let gamma = domain.gamma();
    if !(gamma < 0.25) {
        return Err(Error::Overlap { gamma });
    }
    let length = domain.length();
    let a = alpha as f64;
    let ai = alpha as i32;
    let (l2, l3) = (length * length, length.powi(3));
    let g = 1.0 - gamma;

    let c1 = a / length * gamma.powi(ai - 1) * g.powi(ai - 1) * (1.0 - 2.0 * gamma);
    let d1 = gamma.powi(ai) * g.powi(ai);
    let a1 = -2.0 / (gamma.powi(3) * l3)
        + a * gamma.powi(ai - 3) * g.powi(ai - 1) * (1.0 - 2.0 * gamma) / l3
        + 2.0 * gamma.powi(ai - 3) * g.powi(ai) / l3;
    let b1 = 3.0 / (gamma * gamma * l2)
        - 2.0 * a * gamma.powi(ai - 2) * g.powi(ai - 1) * (1.0 - 2.0 * gamma) / l2
        - 3.0 * gamma.powi(ai - 2) * g.powi(ai) / l2;
    let b2 = -3.0 / (gamma * gamma * l2)
        + a * gamma.powi(ai - 2) * g.powi(ai - 1) * (1.0 - 2.0 * gamma) / l2
        + 3.0 * gamma.powi(ai - 2) * g.powi(ai) / l2;
    let bullets = HermiteCoefficients { a1, b1, c1, d1, a2: -a1, b2 };

    let matching = solve_matching(length, gamma, alpha)?;
    let discrepancy = bullets.scaled_difference(&matching, gamma * length);
    Ok(HermiteDerivation { bullets, matching, discrepancy })
}

/// Value and slope continuity at the four junctions, solved in the scaled
/// unknowns `(a1 h^3, b1 h^2, a2 h^3, b2 h^2)` with `h = gamma L`.
fn solve_matching(length: f64, gamma: f64, alpha: u32) -> Result<HermiteCoefficients> {
    let h = gamma * length;
    let z_lo = h;
    let z_hi = length - h;
    let d1 = outer(z_lo, length, alpha);
    let c1 = outer_slope(z_lo, length, alpha);
    let top_value = outer(z_hi, length, alpha);
    let top_slope = outer_slope(z_hi, length, alpha);

    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0, 1.0, 0.0, 0.0,
        3.0, 2.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 1.0,
        0.0, 0.0, 3.0, 2.0,
    );
    let rhs = Vector4::new(1.0 - d1 - c1 * h, -c1 * h, top_value - 1.0, top_slope * h);
    let x = m.lu().solve(&rhs).ok_or_else(|| Error::Parameter("singular Hermite matching system".into()))?;
    Ok(HermiteCoefficients {
        a1: x[0] / h.powi(3),
        b1: x[1] / (h * h),
        c1,
        d1,
        a2: x[2] / h.powi(3),
        b2: x[3] / (h * h),
    })
}

/// A profile bound to a domain, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ResolvedProfile {
    profile: DampingProfile,
    domain: DomainParams,
    hermite: Option<HermiteCoefficients>,
}

impl ResolvedProfile {
    pub fn profile(&self) -> &DampingProfile {
        &self.profile
    }

    pub fn domain(&self) -> &DomainParams {
        &self.domain
    }

    pub fn hermite(&self) -> Option<&HermiteCoefficients> {
        self.hermite.as_ref()
    }

    /// `beta(z)` without the range check; callers guarantee `0 <= z <= L`.
    pub fn value_unchecked(&self, z: f64) -> f64 {
        let d = &self.domain;
        let length = d.length();
        match &self.profile.kind {
            ProfileKind::Constant(c) => *c,
            ProfileKind::VanDriest => van_driest_value(z, d),
            ProfileKind::Algebraic { alpha } => {
                let h = d.strip_width();
                let ai = *alpha as i32;
                if z <= h {
                    (d.re() * z / length).powi(ai)
                } else if z >= length - h {
                    (d.re() * (1.0 - z / length)).powi(ai)
                } else {
                    1.0
                }
            }
            ProfileKind::Hermite { alpha } => {
                let c = self.hermite.as_ref().expect("hermite coefficients resolved");
                let h = d.strip_width();
                if z <= h || z >= length - h {
                    outer(z, length, *alpha)
                } else if z < 2.0 * h {
                    let s = z - h;
                    ((c.a1 * s + c.b1) * s + c.c1) * s + c.d1
                } else if z > length - 2.0 * h {
                    let t = z + 2.0 * h - length;
                    (c.a2 * t + c.b2) * t * t + 1.0
                } else {
                    1.0
                }
            }
            ProfileKind::Tabulated(t) => t.eval(z),
        }
    }

    pub fn value(&self, z: f64) -> Result<f64> {
        self.domain.check_height(z)?;
        Ok(self.value_unchecked(z))
    }

    /// `d beta / dz`; one-sided from the piece selected by `above`.
    pub fn slope(&self, z: f64, above: bool) -> f64 {
        let d = &self.domain;
        let length = d.length();
        let h = d.strip_width();
        match &self.profile.kind {
            ProfileKind::Constant(_) => 0.0,
            ProfileKind::VanDriest => {
                let ell = A_PLUS * d.viscosity() / WallScales::new(d).u_tau;
                -(-(length - z) / ell).exp() / ell
            }
            ProfileKind::Algebraic { alpha } => {
                let a = *alpha as f64;
                let in_bottom = if above { z < h } else { z <= h };
                let in_top = if above { z >= length - h } else { z > length - h };
                if alpha == &0 {
                    0.0
                } else if in_bottom {
                    a * d.re() / length * (d.re() * z / length).powi(*alpha as i32 - 1)
                } else if in_top {
                    -a * d.re() / length * (d.re() * (1.0 - z / length)).powi(*alpha as i32 - 1)
                } else {
                    0.0
                }
            }
            ProfileKind::Hermite { alpha } => {
                let c = self.hermite.as_ref().expect("hermite coefficients resolved");
                let piece = hermite_piece(z, h, length, above);
                match piece {
                    0 | 4 => outer_slope(z, length, *alpha),
                    1 => {
                        let s = z - h;
                        (3.0 * c.a1 * s + 2.0 * c.b1) * s + c.c1
                    }
                    3 => {
                        let t = z + 2.0 * h - length;
                        (3.0 * c.a2 * t + 2.0 * c.b2) * t
                    }
                    _ => 0.0,
                }
            }
            ProfileKind::Tabulated(t) => t.slope(z),
        }
    }

    /// Value from a specific side of a junction (for continuity checks).
    pub fn value_one_sided(&self, z: f64, above: bool) -> f64 {
        let d = &self.domain;
        let length = d.length();
        let h = d.strip_width();
        match (&self.profile.kind, self.hermite.as_ref()) {
            (ProfileKind::Hermite { alpha }, Some(c)) => match hermite_piece(z, h, length, above) {
                0 | 4 => outer(z, length, *alpha),
                1 => {
                    let s = z - h;
                    ((c.a1 * s + c.b1) * s + c.c1) * s + c.d1
                }
                3 => {
                    let t = z + 2.0 * h - length;
                    (c.a2 * t + c.b2) * t * t + 1.0
                }
                _ => 1.0,
            },
            _ => self.value_unchecked(z),
        }
    }

    /// Points where the profile (or its derivative) is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let d = &self.domain;
        let length = d.length();
        let h = d.strip_width();
        match &self.profile.kind {
            ProfileKind::Constant(_) | ProfileKind::VanDriest => Vec::new(),
            ProfileKind::Algebraic { .. } => vec![h, length - h],
            ProfileKind::Hermite { .. } => vec![h, 2.0 * h, length - 2.0 * h, length - h],
            ProfileKind::Tabulated(t) => t.nodes().to_vec(),
        }
    }

    /// `int_a^b beta(z) dz` by quadrature.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        quadrature::integrate(|z| self.value_unchecked(z), a, b, &self.breakpoints(), quadrature::DEFAULT_REL_TOL)
    }

    /// Junction points of `beta_d`, bottom to top.
    pub fn junctions(&self) -> Vec<f64> {
        match self.profile.kind {
            ProfileKind::Hermite { .. } => self.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Largest relative value and slope jumps across the `beta_d` junctions.
    pub fn junction_mismatch(&self) -> (f64, f64) {
        let h = self.domain.strip_width();
        let mut worst = (0.0f64, 0.0f64);
        for z in self.junctions() {
            let (v0, v1) = (self.value_one_sided(z, false), self.value_one_sided(z, true));
            let (s0, s1) = (self.slope(z, false), self.slope(z, true));
            // blends span [d1, 1], so unit is the local value scale
            let v_scale = v0.abs().max(v1.abs()).max(1.0);
            let s_scale = s0.abs().max(s1.abs()).max(1.0 / h);
            worst.0 = worst.0.max((v0 - v1).abs() / v_scale);
            worst.1 = worst.1.max((s0 - s1).abs() / s_scale);
        }
        worst
    }
}

/// Piece index 0..=4 of `beta_d` containing `z`; at a junction `above`
/// selects the upper piece.
fn hermite_piece(z: f64, h: f64, length: f64, above: bool) -> usize {
    let edges = [h, 2.0 * h, length - 2.0 * h, length - h];
    edges.iter().filter(|&&e| if above { z >= e } else { z > e }).count()
}

pub fn eval_beta(profile: &DampingProfile, z: f64, domain: &DomainParams) -> Result<f64> {
    profile.resolve(domain)?.value(z)
}

/// Near-wall scales under the equilibrium estimate: the wall dissipation is
/// `eps_w = U^4 / (2 nu)` so that `u_tau = (nu eps_w)^(1/4) = U / 2^(1/4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallScales {
    pub u_tau: f64,
    pub a_plus: f64,
    pub eps_wall: f64,
    viscosity: f64,
    length: f64,
}

impl WallScales {
    pub fn new(domain: &DomainParams) -> Self {
        let eps_wall = 0.5 * domain.lid_speed().powi(4) / domain.viscosity();
        Self {
            u_tau: (domain.viscosity() * eps_wall).powf(0.25),
            a_plus: A_PLUS,
            eps_wall,
            viscosity: domain.viscosity(),
            length: domain.length(),
        }
    }

    /// Distance from the lid in wall units.
    pub fn z_plus(&self, z: f64) -> f64 {
        self.u_tau * (self.length - z) / self.viscosity
    }
}

fn van_driest_value(z: f64, domain: &DomainParams) -> f64 {
    let scales = WallScales::new(domain);
    -(-scales.z_plus(z) / scales.a_plus).exp_m1()
}

pub fn van_driest_exact(z: f64, domain: &DomainParams) -> Result<f64> {
    domain.check_height(z)?;
    Ok(van_driest_value(z, domain))
}

/// Partial sum of the Taylor series of the van Driest function about the
/// lid, `sum_{n=1}^k (-1)^(n+1) x^n / n!` with `x = Re (1 - z/L) / (26 2^(1/4))`.
/// Only valid where `Re (1 - z/L) < 1`.
pub fn taylor_approx_f_w(z: f64, domain: &DomainParams, order: u32) -> Result<f64> {
    domain.check_height(z)?;
    let remainder = domain.re() * (1.0 - z / domain.length());
    if !(remainder < 1.0) {
        return Err(Error::Validity { z, remainder });
    }
    let x = remainder / (A_PLUS * 2f64.powf(0.25));
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..=order {
        term *= x / n as f64;
        sum += if n % 2 == 1 { term } else { -term };
    }
    Ok(sum)
}

/// Closed form and quadrature value of `int_{L - gamma L}^L beta(z) dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripIntegral {
    pub closed_form: f64,
    pub quadrature: f64,
}

impl StripIntegral {
    pub fn value(&self) -> f64 {
        self.closed_form
    }

    pub fn difference(&self) -> f64 {
        (self.closed_form - self.quadrature).abs()
    }

    pub fn relative_difference(&self) -> f64 {
        let scale = self.closed_form.abs().max(self.quadrature.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.difference() / scale
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `int_0^{gamma L} (z/L)^a (1 - z/L)^a dz` via the binomial expansion of
/// `(1 - z/L)^a`: `L gamma^(a+1) sum_k (-1)^k C(a,k) gamma^k / (a + 1 + k)`.
pub fn hermite_strip_closed_form(length: f64, gamma: f64, alpha: u32) -> f64 {
    let sum: f64 = (0..=alpha)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(alpha, k) * gamma.powi(k as i32) / (alpha + 1 + k) as f64
        })
        .sum();
    length * gamma.powi(alpha as i32 + 1) * sum
}

/// Envelope constant `C_a` with `int beta_d <= C_a L gamma^(a+1)`: the
/// positive (even-k) terms of the binomial sum with `gamma^k <= 1`.
pub fn hermite_envelope_constant(alpha: u32) -> f64 {
    (0..=alpha).step_by(2).map(|k| binomial(alpha, k) / (alpha + 1 + k) as f64).sum()
}

pub fn strip_integral(profile: &DampingProfile, domain: &DomainParams) -> Result<StripIntegral> {
    let resolved = profile.resolve(domain)?;
    let length = domain.length();
    let gamma = domain.gamma();
    let h = domain.strip_width();
    let closed_form = match &profile.kind {
        ProfileKind::Constant(c) => c * h,
        ProfileKind::VanDriest => {
            let ell = A_PLUS * domain.viscosity() / WallScales::new(domain).u_tau;
            h + ell * (-h / ell).exp_m1()
        }
        ProfileKind::Algebraic { alpha } => {
            length * gamma * (domain.re() * gamma).powi(*alpha as i32) / (*alpha as f64 + 1.0)
        }
        ProfileKind::Hermite { alpha } => hermite_strip_closed_form(length, gamma, *alpha),
        ProfileKind::Tabulated(t) => t.integral(length - h, length),
    };
    let quadrature = resolved.integral(length - h, length)?;
    Ok(StripIntegral { closed_form, quadrature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_domain;
    use approx::assert_relative_eq;

    fn re100() -> DomainParams {
        make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap()
    }

    /// gamma = 0.1 at kappa = 1 requires Re = 1/0.51.
    fn gamma_tenth() -> DomainParams {
        make_domain(1.0, 1.0, 0.51, 0.1, 0.1, 1.0).unwrap()
    }

    #[test]
    fn algebraic_values() {
        let d = re100();
        let p = DampingProfile::algebraic(2);
        assert_eq!(eval_beta(&p, 1.0, &d).unwrap(), 0.0);
        assert_eq!(eval_beta(&p, 0.0, &d).unwrap(), 0.0);
        let z = 1.0 - d.strip_width();
        assert_relative_eq!(eval_beta(&p, z, &d).unwrap(), 0.0384468, max_relative = 1e-5);
        assert_relative_eq!(eval_beta(&p, z, &d).unwrap(), (1.0f64 / 5.1).powi(2), max_relative = 1e-12);
        assert_eq!(eval_beta(&p, 0.5, &d).unwrap(), 1.0);
        assert!(matches!(eval_beta(&p, 1.1, &d), Err(Error::Domain { .. })));
    }

    #[test]
    fn hermite_coefficient_values() {
        let d = gamma_tenth();
        let h = hermite_coefficients(&d, 2).unwrap();
        assert_relative_eq!(h.bullets.d1, 0.0081, max_relative = 1e-12);
        assert_relative_eq!(h.bullets.c1, 0.144, max_relative = 1e-12);
        assert_eq!(h.bullets.a2, -h.bullets.a1);
        assert!(h.discrepancy < 1e-10, "discrepancy {}", h.discrepancy);
        assert_relative_eq!(h.matching.a2, -h.matching.a1, max_relative = 1e-10);

        let p = DampingProfile::hermite(2);
        assert_relative_eq!(eval_beta(&p, 0.1, &d).unwrap(), 0.0081, max_relative = 1e-12);
    }

    #[test]
    fn hermite_overlap_rejected() {
        // gamma = 1/5.1 * 1/Re; Re = 0.7 gives gamma = 0.28
        let d = make_domain(1.0, 0.7, 1.0, 0.1, 0.1, 1.0).unwrap();
        assert!(matches!(hermite_coefficients(&d, 2), Err(Error::Overlap { .. })));
    }

    #[test]
    fn hermite_junctions_are_c1() {
        for re in [1.0, 10.0, 100.0, 1e4] {
            let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).unwrap();
            for alpha in 0..=4 {
                let r = DampingProfile::hermite(alpha).resolve(&d).unwrap();
                let (dv, ds) = r.junction_mismatch();
                assert!(dv < 1e-10 && ds < 1e-10, "re {re} alpha {alpha}: {dv} {ds}");
            }
        }
    }

    #[test]
    fn hermite_shape() {
        let d = re100();
        let r = DampingProfile::hermite(2).resolve(&d).unwrap();
        let h = d.strip_width();
        assert_eq!(r.value(0.0).unwrap(), 0.0);
        assert_eq!(r.value(1.0).unwrap(), 0.0);
        for k in 0..=100 {
            let z = 2.0 * h + (1.0 - 4.0 * h) * k as f64 / 100.0;
            assert_eq!(r.value(z).unwrap(), 1.0);
        }
        for k in 0..=1000 {
            let z = k as f64 / 1000.0 * 2.0 * h;
            let (a, b) = (r.value(z).unwrap(), r.value(1.0 - z).unwrap());
            assert!((a - b).abs() <= 1e-12, "asymmetry at {z}: {a} {b}");
        }
    }

    #[test]
    fn van_driest_values() {
        let d = re100();
        assert_eq!(van_driest_exact(1.0, &d).unwrap(), 0.0);
        let s = WallScales::new(&d);
        assert_relative_eq!(s.u_tau, 2f64.powf(-0.25), max_relative = 1e-14);
        assert_relative_eq!(s.z_plus(0.9), 8.40896, max_relative = 1e-5);
        let expected = 1.0 - (-8.408964152537145f64 / 26.0).exp();
        assert_relative_eq!(van_driest_exact(0.9, &d).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(van_driest_exact(0.9, &d).unwrap(), 0.276331, max_relative = 1e-5);
        let mut last = 0.0;
        for k in 0..=100 {
            let v = van_driest_exact(1.0 - k as f64 / 100.0, &d).unwrap();
            assert!(v >= last);
            last = v;
        }
        // z+ = 84 at the bottom wall for Re = 100
        assert!(last > 0.95 && last < 1.0);
    }

    #[test]
    fn taylor_series() {
        let d = re100();
        assert_eq!(taylor_approx_f_w(1.0, &d, 5).unwrap(), 0.0);
        assert_relative_eq!(
            taylor_approx_f_w(0.999, &d, 1).unwrap(),
            0.1 / (26.0 * 2f64.powf(0.25)),
            max_relative = 1e-12
        );
        assert_relative_eq!(taylor_approx_f_w(0.999, &d, 1).unwrap(), 0.0032343, max_relative = 1e-4);
        let z = 1.0 - 0.5 * d.strip_width();
        let exact = van_driest_exact(z, &d).unwrap();
        assert!((taylor_approx_f_w(z, &d, 8).unwrap() - exact).abs() < 1e-6);
        assert!(matches!(taylor_approx_f_w(0.5, &d, 3), Err(Error::Validity { .. })));
    }

    #[test]
    fn strip_integrals() {
        let d = re100();
        let s = strip_integral(&DampingProfile::one(), &d).unwrap();
        assert_relative_eq!(s.value(), d.strip_width(), max_relative = 1e-15);

        let s = strip_integral(&DampingProfile::algebraic(2), &d).unwrap();
        assert_relative_eq!(s.value(), 2.5128e-5, max_relative = 1e-4);
        assert_relative_eq!(s.value(), (1.0 / 510.0) * (1.0f64 / 5.1).powi(2) / 3.0, max_relative = 1e-13);
        assert!(s.relative_difference() < 1e-10);

        for alpha in 1..=4 {
            let s = strip_integral(&DampingProfile::hermite(alpha), &d).unwrap();
            assert!(s.relative_difference() < 1e-12, "alpha {alpha}: {s:?}");
            let env = hermite_envelope_constant(alpha) * d.gamma().powi(alpha as i32 + 1);
            assert!(s.value() <= env);
        }

        let s = strip_integral(&DampingProfile::van_driest(), &d).unwrap();
        assert!(s.relative_difference() < 1e-10, "{s:?}");
    }

    #[test]
    fn envelope_constants() {
        assert_relative_eq!(hermite_envelope_constant(1), 0.5);
        assert_relative_eq!(hermite_envelope_constant(2), 1.0 / 3.0 + 1.0 / 5.0);
        assert_relative_eq!(hermite_envelope_constant(3), 0.25 + 3.0 / 6.0);
    }

    #[test]
    fn table_parsing_and_integral() {
        let t = Table::parse("# z beta\n0 0\n0.5 1.0\n1.0 0.0\n").unwrap();
        let d = re100();
        let p = DampingProfile::tabulated(t);
        assert_relative_eq!(eval_beta(&p, 0.25, &d).unwrap(), 0.5);
        let s = strip_integral(&p, &d).unwrap();
        let h = d.strip_width();
        assert_relative_eq!(s.value(), h * h, max_relative = 1e-12);
        assert!(s.relative_difference() < 1e-10);

        assert!(Table::parse("0 1\n0 2\n").is_err());
        assert!(Table::parse("0 1\n1 -2\n").is_err());
        assert!(Table::parse("0 1 3\n").is_err());
        let short = DampingProfile::tabulated(Table::parse("0 1\n0.5 1\n").unwrap());
        assert!(short.resolve(&d).is_err());
    }

    #[test]
    fn contact_order_limits() {
        let d = re100();
        let bd = DampingProfile::hermite(2).resolve(&d).unwrap();
        let bw = DampingProfile::algebraic(2).resolve(&d).unwrap();
        for eps in [1e-4, 1e-5, 1e-6] {
            let z = 1.0 - eps;
            assert_relative_eq!(bd.value(z).unwrap() / eps.powi(2), 1.0, max_relative = 1e-3);
            assert_relative_eq!(bw.value(z).unwrap() / (eps.powi(2) * d.re().powi(2)), 1.0, max_relative = 1e-9);
        }
    }
}
