//! Background flow `Phi = (phi(z), 0, 0)` carrying the lid speed inside a
//! thin strip below the lid, and numerical checks of the functional
//! inequalities that the energy estimates lean on.

use std::f64::consts::PI;

use rand::Rng;

use crate::domain::DomainParams;
use crate::error::{Error, Result};
use crate::quadrature;

/// Linear ramp from `0` at `z = L - gamma L` to `U` at the lid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundFlow {
    domain: DomainParams,
}

impl BackgroundFlow {
    pub fn new(domain: &DomainParams) -> Self {
        Self { domain: *domain }
    }

    pub fn domain(&self) -> &DomainParams {
        &self.domain
    }

    pub fn strip(&self) -> StripRegion {
        StripRegion::new(&self.domain)
    }

    pub fn phi_unchecked(&self, z: f64) -> f64 {
        let d = &self.domain;
        let foot = d.length() - d.strip_width();
        if z <= foot {
            0.0
        } else {
            d.lid_speed() / d.strip_width() * (z - foot)
        }
    }

    pub fn phi_slope(&self, z: f64) -> f64 {
        let d = &self.domain;
        if z < d.length() - d.strip_width() {
            0.0
        } else {
            d.lid_speed() / d.strip_width()
        }
    }
}

pub fn eval_phi(z: f64, flow: &BackgroundFlow) -> Result<f64> {
    flow.domain.check_height(z)?;
    Ok(flow.phi_unchecked(z))
}

/// The slab `L - gamma L <= z <= L` (full period in `x` and `y`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripRegion {
    pub z_lo: f64,
    pub z_hi: f64,
    pub length: f64,
}

impl StripRegion {
    pub fn new(domain: &DomainParams) -> Self {
        let length = domain.length();
        Self { z_lo: length - domain.strip_width(), z_hi: length, length }
    }

    pub fn width(&self) -> f64 {
        self.z_hi - self.z_lo
    }

    pub fn volume(&self) -> f64 {
        self.length * self.length * self.width()
    }
}

/// An analytic value next to its numerical counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked {
    pub analytic: f64,
    pub numeric: f64,
}

impl Checked {
    pub fn relative_error(&self) -> f64 {
        let scale = self.analytic.abs().max(f64::MIN_POSITIVE);
        (self.numeric - self.analytic).abs() / scale
    }
}

/// Sup and L2 norms of the background flow and its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormsReport {
    pub sup_phi: Checked,
    pub sup_grad_phi: Checked,
    pub l2_phi_sq: Checked,
    pub l2_grad_phi_sq: Checked,
}

impl NormsReport {
    pub fn max_relative_error(&self) -> f64 {
        [self.sup_phi, self.sup_grad_phi, self.l2_phi_sq, self.l2_grad_phi_sq]
            .iter()
            .map(Checked::relative_error)
            .fold(0.0, f64::max)
    }
}

pub fn phi_norms(flow: &BackgroundFlow) -> Result<NormsReport> {
    let d = flow.domain();
    let (length, u, gamma) = (d.length(), d.lid_speed(), d.gamma());
    let h = d.strip_width();
    let breaks = [length - h];
    let area = length * length;

    let samples = 10_001;
    let (mut sup, mut sup_grad) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let z = length * k as f64 / (samples - 1) as f64;
        sup = sup.max(flow.phi_unchecked(z).abs());
        sup_grad = sup_grad.max(flow.phi_slope(z).abs());
    }
    let tol = quadrature::DEFAULT_REL_TOL;
    let l2 = area * quadrature::integrate(|z| flow.phi_unchecked(z).powi(2), 0.0, length, &breaks, tol)?;
    let l2_grad = area * quadrature::integrate(|z| flow.phi_slope(z).powi(2), 0.0, length, &breaks, tol)?;

    Ok(NormsReport {
        sup_phi: Checked { analytic: u, numeric: sup },
        sup_grad_phi: Checked { analytic: u / h, numeric: sup_grad },
        l2_phi_sq: Checked { analytic: u * u * gamma * length.powi(3) / 3.0, numeric: l2 },
        l2_grad_phi_sq: Checked { analytic: u * u * length / gamma, numeric: l2_grad },
    })
}

/// A vector field on the strip with a known gradient, vanishing at `z = L`.
pub trait StripField {
    fn value(&self, x: f64, y: f64, z: f64) -> [f64; 3];
    /// `grad[i][j] = d v_j / d x_i`.
    fn gradient(&self, x: f64, y: f64, z: f64) -> [[f64; 3]; 3];
}

/// A scalar profile `v(z)` embedded as the first component.
pub struct ZProfile<F, G> {
    pub value: F,
    pub derivative: G,
}

impl<F, G> StripField for ZProfile<F, G>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    fn value(&self, _x: f64, _y: f64, z: f64) -> [f64; 3] {
        [(self.value)(z), 0.0, 0.0]
    }

    fn gradient(&self, _x: f64, _y: f64, z: f64) -> [[f64; 3]; 3] {
        [[0.0; 3], [0.0; 3], [(self.derivative)(z), 0.0, 0.0]]
    }
}

/// Tensor-product rule over the strip: periodic trapezoid in `x`, `y`
/// (exact for the trigonometric factors used here) and composite
/// Gauss-Legendre in `z`.
struct StripRule {
    xy: Vec<f64>,
    z: Vec<(f64, f64)>,
    w_xy: f64,
}

impl StripRule {
    fn new(strip: &StripRegion) -> Self {
        let n_xy = 16;
        let panels = 8;
        let (gx, gw) = quadrature::gauss_legendre(12);
        let pw = strip.width() / panels as f64;
        let mut z = Vec::with_capacity(panels * gx.len());
        for p in 0..panels {
            let mid = strip.z_lo + (p as f64 + 0.5) * pw;
            for (x, w) in gx.iter().zip(&gw) {
                z.push((mid + 0.5 * pw * x, 0.5 * pw * w));
            }
        }
        let h = strip.length / n_xy as f64;
        Self { xy: (0..n_xy).map(|i| i as f64 * h).collect(), z, w_xy: h * h }
    }

    fn sum(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for &(z, wz) in &self.z {
            let mut layer = 0.0;
            for &y in &self.xy {
                for &x in &self.xy {
                    layer += f(x, y, z);
                }
            }
            total += wz * layer;
        }
        total * self.w_xy
    }
}

fn check_gradient(norm: f64, strip: &StripRegion) -> Result<()> {
    // RMS variation across the strip below 1e-12 field units counts as zero.
    let rms = norm / strip.volume().sqrt();
    if !rms.is_finite() || rms * strip.width() < 1e-12 {
        return Err(Error::UndefinedRatio);
    }
    Ok(())
}

/// `||v|| / ||grad v||` over the strip.
pub fn poincare_ratio(field: &impl StripField, strip: &StripRegion) -> Result<f64> {
    let rule = StripRule::new(strip);
    let v2 = rule.sum(|x, y, z| field.value(x, y, z).iter().map(|c| c * c).sum());
    let g2 = rule.sum(|x, y, z| field.gradient(x, y, z).iter().flat_map(|r| r.iter()).map(|c| c * c).sum());
    let g = g2.sqrt();
    check_gradient(g, strip)?;
    Ok(v2.sqrt() / g)
}

/// `||v / (L - z)||_p / ||dv/dz||_p` over the strip (Euclidean norm of the
/// vector value). At the lid the quotient takes its limit `|dv/dz|`.
pub fn hardy_ratio(field: &impl StripField, p: f64, strip: &StripRegion) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("Hardy exponent must exceed 1, got {p}")));
    }
    let rule = StripRule::new(strip);
    let norm = |v: [f64; 3]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let dz = |x, y, z| field.gradient(x, y, z)[2];
    let lhs = rule.sum(|x, y, z| {
        let dist = strip.z_hi - z;
        let q = if dist <= 1e-14 * strip.length { norm(dz(x, y, z)) } else { norm(field.value(x, y, z)) / dist };
        q.powf(p)
    });
    let rhs = rule.sum(|x, y, z| norm(dz(x, y, z)).powf(p));
    check_gradient(rhs.powf(1.0 / p) * strip.volume().powf(0.5 - 1.0 / p), strip)?;
    Ok((lhs / rhs).powf(1.0 / p))
}

/// Random trace-free field: each component is a polynomial in `s = L - z`
/// without constant term, times `a + b cos(2 pi m x / L + phase) +
/// c sin(2 pi n y / L + phase)`.
#[derive(Debug, Clone)]
pub struct RandomStripField {
    length: f64,
    width: f64,
    comps: [Component; 3],
}

#[derive(Debug, Clone)]
struct Component {
    poly: Vec<f64>,
    trig: [f64; 3],
    modes: [f64; 2],
    phases: [f64; 2],
}

impl RandomStripField {
    pub fn generate<R: Rng>(rng: &mut R, strip: &StripRegion) -> Self {
        let width = strip.width();
        let comp = |rng: &mut R| {
            let degree = rng.gen_range(1..=5);
            // coefficient of s^n scaled by width^-n keeps values O(1)
            let poly = (0..degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Component {
                poly,
                trig: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                modes: [rng.gen_range(0..=3) as f64, rng.gen_range(0..=3) as f64],
                phases: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)],
            }
        };
        Self { length: strip.length, width, comps: [comp(rng), comp(rng), comp(rng)] }
    }

    fn poly(&self, c: &Component, s: f64) -> (f64, f64) {
        let t = s / self.width;
        let (mut val, mut der, mut pow) = (0.0, 0.0, 1.0);
        for (n, a) in c.poly.iter().enumerate() {
            der += (n + 1) as f64 * a * pow;
            pow *= t;
            val += a * pow;
        }
        (val, der / self.width)
    }

    fn trig(&self, c: &Component, x: f64, y: f64) -> (f64, f64, f64) {
        let k = 2.0 * PI / self.length;
        let ax = k * c.modes[0] * x + c.phases[0];
        let ay = k * c.modes[1] * y + c.phases[1];
        (
            c.trig[0] + c.trig[1] * ax.cos() + c.trig[2] * ay.sin(),
            -c.trig[1] * k * c.modes[0] * ax.sin(),
            c.trig[2] * k * c.modes[1] * ay.cos(),
        )
    }
}

impl StripField for RandomStripField {
    fn value(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let s = self.length - z;
        let mut out = [0.0; 3];
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = self.poly(c, s).0 * self.trig(c, x, y).0;
        }
        out
    }

    fn gradient(&self, x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
        let s = self.length - z;
        let mut g = [[0.0; 3]; 3];
        for (j, c) in self.comps.iter().enumerate() {
            let (p, dp_ds) = self.poly(c, s);
            let (t, dt_dx, dt_dy) = self.trig(c, x, y);
            g[0][j] = p * dt_dx;
            g[1][j] = p * dt_dy;
            g[2][j] = -dp_ds * t;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_domain;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_gamma_tenth() -> DomainParams {
        make_domain(1.0, 1.0, 0.51, 0.1, 0.1, 1.0).unwrap()
    }

    #[test]
    fn phi_values() {
        let d = unit_gamma_tenth();
        let f = BackgroundFlow::new(&d);
        let h = d.strip_width();
        assert_eq!(eval_phi(1.0 - h, &f).unwrap(), 0.0);
        assert_relative_eq!(eval_phi(1.0, &f).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(eval_phi(1.0 - 0.5 * h, &f).unwrap(), 0.5, max_relative = 1e-12);
        assert_eq!(eval_phi(0.3, &f).unwrap(), 0.0);
        assert!(eval_phi(-0.1, &f).is_err());
    }

    #[test]
    fn norms_match_closed_forms() {
        let d = unit_gamma_tenth();
        let r = phi_norms(&BackgroundFlow::new(&d)).unwrap();
        assert_relative_eq!(r.l2_phi_sq.analytic, 1.0 / 30.0, max_relative = 1e-12);
        assert_relative_eq!(r.l2_grad_phi_sq.analytic, 10.0, max_relative = 1e-12);
        assert!(r.l2_phi_sq.relative_error() < 1e-10);
        assert!(r.l2_grad_phi_sq.relative_error() < 1e-10);
        assert!(r.sup_phi.relative_error() < 1e-12);
        assert!(r.sup_grad_phi.relative_error() < 1e-12);
    }

    #[test]
    fn poincare_linear_and_sine() {
        let d = unit_gamma_tenth();
        let strip = StripRegion::new(&d);
        let h = d.strip_width();
        let lin = ZProfile { value: |z: f64| (1.0 - z) / h, derivative: |_z: f64| -1.0 / h };
        assert_relative_eq!(poincare_ratio(&lin, &strip).unwrap(), h / 3f64.sqrt(), max_relative = 1e-12);

        let sine = ZProfile {
            value: |z: f64| (PI * (1.0 - z) / (2.0 * h)).sin(),
            derivative: |z: f64| -PI / (2.0 * h) * (PI * (1.0 - z) / (2.0 * h)).cos(),
        };
        assert_relative_eq!(poincare_ratio(&sine, &strip).unwrap(), 2.0 * h / PI, max_relative = 1e-12);

        let noise = ZProfile { value: |_z: f64| 1e-17, derivative: |_z: f64| 1e-17 };
        assert!(matches!(poincare_ratio(&noise, &strip), Err(Error::UndefinedRatio)));
    }

    #[test]
    fn hardy_polynomials() {
        let d = unit_gamma_tenth();
        let strip = StripRegion::new(&d);
        let lin = ZProfile { value: |z: f64| 1.0 - z, derivative: |_z: f64| -1.0 };
        assert_relative_eq!(hardy_ratio(&lin, 2.0, &strip).unwrap(), 1.0, max_relative = 1e-12);
        let quad = ZProfile { value: |z: f64| (1.0 - z).powi(2), derivative: |z: f64| -2.0 * (1.0 - z) };
        assert_relative_eq!(hardy_ratio(&quad, 2.0, &strip).unwrap(), 0.5, max_relative = 1e-12);
        assert!(matches!(hardy_ratio(&lin, 1.0, &strip), Err(Error::Parameter(_))));
    }

    #[test]
    fn random_fields_gradient_matches_finite_differences() {
        let d = unit_gamma_tenth();
        let strip = StripRegion::new(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let f = RandomStripField::generate(&mut rng, &strip);
            assert!(f.value(0.3, 0.7, 1.0).iter().all(|c| *c == 0.0));
            let (x, y, z) = (0.31, 0.77, 0.95);
            let g = f.gradient(x, y, z);
            let e = 1e-6;
            for i in 0..3 {
                let mut p = [x, y, z];
                let mut m = [x, y, z];
                p[i] += e;
                m[i] -= e;
                let (vp, vm) = (f.value(p[0], p[1], p[2]), f.value(m[0], m[1], m[2]));
                for j in 0..3 {
                    let fd = (vp[j] - vm[j]) / (2.0 * e);
                    assert!((fd - g[i][j]).abs() < 1e-5 * (1.0 + g[i][j].abs()), "{i}{j}");
                }
            }
        }
    }
}
