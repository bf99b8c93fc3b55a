//! Steady unidirectional shear flow `u = (u(z), 0, 0)`: the shear stress
//! `(nu + beta (C_s delta)^2 |u'|) u'` is the same constant `tau` at every
//! height, and `u` climbs from 0 at the floor to `U` at the lid.

use crate::damping::{DampingProfile, ResolvedProfile};
use crate::domain::DomainParams;
use crate::error::{Error, Result};
use crate::quadrature::{self, DEFAULT_REL_TOL};

#[derive(Debug, Clone)]
pub struct SteadyShearProfile {
    pub z_nodes: Vec<f64>,
    pub u_of_z: Vec<f64>,
    pub tau: f64,
    /// Largest relative stress defect at the nodes, or the lid mismatch
    /// `|u(L) - U| / U` if larger.
    pub residual: f64,
    profile: ResolvedProfile,
}

impl SteadyShearProfile {
    /// Shear rate `u'(z)` carrying stress `tau`.
    pub fn shear_rate(&self, z: f64) -> f64 {
        shear_rate(&self.profile, self.tau, z)
    }

    /// `u(z)`, integrated from the floor.
    pub fn velocity_at(&self, z: f64) -> Result<f64> {
        self.profile.domain().check_height(z)?;
        let breaks = self.profile.breakpoints();
        quadrature::integrate(|s| self.shear_rate(s), 0.0, z, &breaks, DEFAULT_REL_TOL)
    }

    /// `(1/L) int (nu u'^2 + (C_s delta)^2 beta u'^3) dz`.
    pub fn dissipation(&self) -> Result<f64> {
        let d = self.profile.domain();
        let ell2 = d.model_length().powi(2);
        let breaks = self.profile.breakpoints();
        let integral = quadrature::integrate(
            |z| {
                let s = self.shear_rate(z);
                d.viscosity() * s * s + ell2 * self.profile.value_unchecked(z) * s * s * s
            },
            0.0,
            d.length(),
            &breaks,
            DEFAULT_REL_TOL,
        )?;
        Ok(integral / d.length())
    }
}

/// Positive root of `(nu + b s) s = tau` with `b = beta (C_s delta)^2`, in the
/// cancellation-free form `2 tau / (nu + sqrt(nu^2 + 4 b tau))`.
fn shear_rate(profile: &ResolvedProfile, tau: f64, z: f64) -> f64 {
    let d = profile.domain();
    let nu = d.viscosity();
    let b = profile.value_unchecked(z) * d.model_length().powi(2);
    2.0 * tau / (nu + (nu * nu + 4.0 * b * tau).sqrt())
}

pub fn steady_shear_profile(
    profile: &DampingProfile,
    domain: &DomainParams,
    n_nodes: usize,
) -> Result<SteadyShearProfile> {
    if n_nodes < 64 {
        return Err(Error::Precondition(format!("the shear oracle needs at least 64 nodes, got {n_nodes}")));
    }
    let resolved = profile.resolve(domain)?;
    let (length, lid) = (domain.length(), domain.lid_speed());
    let breaks = resolved.breakpoints();
    let lift = |tau: f64| {
        quadrature::integrate(|z| shear_rate(&resolved, tau, z), 0.0, length, &breaks, DEFAULT_REL_TOL).map(|v| v - lid)
    };

    let tau = if lid == 0.0 {
        0.0
    } else {
        // Damping only slows the shear, so the Newtonian stress is a lower
        // bracket; grow the upper one until it overshoots.
        let mut lo = domain.viscosity() * lid / length;
        let mut hi = 2.0 * lo;
        let mut tries = 0;
        while lift(hi)? < 0.0 {
            lo = hi;
            hi *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(Error::Oracle(format!("no stress bracket found up to tau = {hi:e}")));
            }
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let g = lift(mid)?;
            if g.abs() <= 1e-13 * lid || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            if g < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lift(mid)?.abs() > 1e-12 * lid {
            return Err(Error::Oracle(format!("bisection stalled at tau = {mid:e}")));
        }
        mid
    };

    let z_nodes: Vec<f64> = (0..n_nodes).map(|n| length * n as f64 / (n_nodes - 1) as f64).collect();
    let mut u_of_z = Vec::with_capacity(n_nodes);
    let mut acc = 0.0;
    u_of_z.push(0.0);
    for pair in z_nodes.windows(2) {
        acc += quadrature::integrate(|z| shear_rate(&resolved, tau, z), pair[0], pair[1], &breaks, DEFAULT_REL_TOL)?;
        u_of_z.push(acc);
    }

    let ell2 = domain.model_length().powi(2);
    let mut residual = if lid == 0.0 { 0.0 } else { (acc - lid).abs() / lid };
    if tau > 0.0 {
        for &z in &z_nodes {
            let s = shear_rate(&resolved, tau, z);
            let stress = (domain.viscosity() + resolved.value_unchecked(z) * ell2 * s) * s;
            residual = residual.max((stress - tau).abs() / tau);
        }
    }
    Ok(SteadyShearProfile { z_nodes, u_of_z, tau, residual, profile: resolved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_domain;
    use approx::assert_relative_eq;

    #[test]
    fn constant_damping_gives_linear_profile() {
        let d = make_domain(1.0, 1.0, 1.0, 0.1, 1.0, 1.0).unwrap();
        let s = steady_shear_profile(&DampingProfile::one(), &d, 101).unwrap();
        assert_relative_eq!(s.tau, 1.0 + 0.01, max_relative = 1e-12);
        for (z, u) in s.z_nodes.iter().zip(&s.u_of_z) {
            assert!((u - z).abs() < 1e-12);
        }
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn newtonian_limit() {
        let d = make_domain(2.0, 3.0, 0.5, 0.1, 0.1, 1.0).unwrap();
        let s = steady_shear_profile(&DampingProfile::zero(), &d, 64).unwrap();
        assert_relative_eq!(s.tau, 0.5 * 3.0 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn hermite_power_balance() {
        let d = DomainParams::with_reynolds(1.0, 1.0, 1.0, 0.3, 1.0, 1.0).unwrap();
        let s = steady_shear_profile(&DampingProfile::hermite(2), &d, 201).unwrap();
        assert_relative_eq!(s.dissipation().unwrap(), s.tau, max_relative = 1e-10);
        assert_relative_eq!(*s.u_of_z.last().unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.velocity_at(0.5).unwrap(), s.u_of_z[100], max_relative = 1e-12);
        assert!(steady_shear_profile(&DampingProfile::one(), &d, 10).is_err());
    }
}
