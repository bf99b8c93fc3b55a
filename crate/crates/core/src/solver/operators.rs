//! Spatial operators on the staggered grid: eddy viscosity, stress
//! divergence and skew-symmetric advection.

use crate::damping::ResolvedProfile;
use crate::domain::Grid;
use crate::field::{next, prev, Gradient, VelocityField};

/// Model (eddy) viscosity `beta (C_s delta)^2 |grad u|` at every location
/// where a gradient component lives. The molecular part is kept separate so
/// the model's energy contribution can be reported on its own.
#[derive(Debug, Clone)]
pub struct EddyViscosity {
    pub molecular: f64,
    pub center: Vec<f64>,
    pub zedge: Vec<f64>,
    pub yedge: Vec<f64>,
    pub xedge: Vec<f64>,
}

impl EddyViscosity {
    /// Centre values from `|grad u|`, edge values as the arithmetic mean of
    /// the adjacent centres (two at the walls, four elsewhere).
    pub fn new(grad: &Gradient, grid: &Grid, profile: &ResolvedProfile) -> Self {
        let g = grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let d = profile.domain();
        let ell2 = d.model_length().powi(2);
        let norm_sq = grad.center_norm_sq(g);
        let layer = nx * ny;
        let mut center = vec![0.0; g.cells()];
        for k in 0..nz {
            let coeff = profile.value_unchecked(g.z_center(k)) * ell2;
            for c in k * layer..(k + 1) * layer {
                center[c] = coeff * norm_sq[c].sqrt();
            }
        }
        let ne = layer * (nz + 1);
        let (mut zedge, mut yedge, mut xedge) = (vec![0.0; g.cells()], vec![0.0; ne], vec![0.0; ne]);
        for k in 0..nz {
            for j in 0..ny {
                let jp = prev(j, ny);
                for i in 0..nx {
                    let ip = prev(i, nx);
                    zedge[g.idx(i, j, k)] = 0.25
                        * (center[g.idx(ip, jp, k)]
                            + center[g.idx(i, jp, k)]
                            + center[g.idx(ip, j, k)]
                            + center[g.idx(i, j, k)]);
                }
            }
        }
        for k in 0..=nz {
            let layers: &[usize] = if k == 0 {
                &[0]
            } else if k == nz {
                &[nz - 1]
            } else {
                &[k - 1, k]
            };
            let w = 0.5 / layers.len() as f64;
            for j in 0..ny {
                let jp = prev(j, ny);
                for i in 0..nx {
                    let ip = prev(i, nx);
                    let (mut ye, mut xe) = (0.0, 0.0);
                    for &kk in layers {
                        ye += center[g.idx(ip, j, kk)] + center[g.idx(i, j, kk)];
                        xe += center[g.idx(i, jp, kk)] + center[g.idx(i, j, kk)];
                    }
                    yedge[g.idx(i, j, k)] = w * ye;
                    xedge[g.idx(i, j, k)] = w * xe;
                }
            }
        }
        Self { molecular: d.viscosity(), center, zedge, yedge, xedge }
    }

    /// Largest total viscosity anywhere.
    pub fn max_total(&self) -> f64 {
        self.molecular + self.center.iter().fold(0.0f64, |m, x| m.max(*x))
    }
}

/// Which part of the viscosity a stress evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StressPart {
    Total,
    Model,
}

/// `div(nu_eff grad u_j)` for every velocity component, added into `out`.
pub fn add_stress_divergence(
    grad: &Gradient,
    visc: &EddyViscosity,
    part: StressPart,
    grid: &Grid,
    out: &mut VelocityField,
) {
    let g = grid;
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let nu = match part {
        StressPart::Total => visc.molecular,
        StressPart::Model => 0.0,
    };
    let (c, ze, ye, xe) = (&visc.center, &visc.zedge, &visc.yedge, &visc.xedge);
    for k in 0..nz {
        for j in 0..ny {
            let (jp, jn) = (prev(j, ny), next(j, ny));
            for i in 0..nx {
                let (ip, inx) = (prev(i, nx), next(i, nx));
                let s = g.idx(i, j, k);
                let (sxm, sym, sup) = (g.idx(ip, j, k), g.idx(i, jp, k), g.idx(i, j, k + 1));
                let (sxp, syp) = (g.idx(inx, j, k), g.idx(i, jn, k));

                // u on the x-face at i
                out.u[s] += ((nu + c[s]) * grad.dudx[s] - (nu + c[sxm]) * grad.dudx[sxm]) / g.hx
                    + ((nu + ze[syp]) * grad.dudy[syp] - (nu + ze[s]) * grad.dudy[s]) / g.hy
                    + ((nu + ye[sup]) * grad.dudz[sup] - (nu + ye[s]) * grad.dudz[s]) / g.hz;

                // v on the y-face at j
                out.v[s] += ((nu + ze[sxp]) * grad.dvdx[sxp] - (nu + ze[s]) * grad.dvdx[s]) / g.hx
                    + ((nu + c[s]) * grad.dvdy[s] - (nu + c[sym]) * grad.dvdy[sym]) / g.hy
                    + ((nu + xe[sup]) * grad.dvdz[sup] - (nu + xe[s]) * grad.dvdz[s]) / g.hz;

                // w on the interior z-face at k
                if k > 0 {
                    let below = g.idx(i, j, k - 1);
                    out.w[s] += ((nu + ye[sxp]) * grad.dwdx[sxp] - (nu + ye[s]) * grad.dwdx[s]) / g.hx
                        + ((nu + xe[syp]) * grad.dwdy[syp] - (nu + xe[s]) * grad.dwdy[s]) / g.hy
                        + ((nu + c[s]) * grad.dwdz[s] - (nu + c[below]) * grad.dwdz[below]) / g.hz;
                }
            }
        }
    }
}

/// `-sum nu_t |D|^2 dV` over all gradient locations: the energy the model
/// stress removes per unit time. Wall edges carry half a cell of volume.
pub fn model_energy_rate(grad: &Gradient, visc: &EddyViscosity, grid: &Grid) -> f64 {
    let g = grid;
    let layer = g.nx * g.ny;
    let mut sum = 0.0;
    for n in 0..g.cells() {
        sum += visc.center[n] * (grad.dudx[n].powi(2) + grad.dvdy[n].powi(2) + grad.dwdz[n].powi(2));
        sum += visc.zedge[n] * (grad.dudy[n].powi(2) + grad.dvdx[n].powi(2));
    }
    for k in 0..=g.nz {
        let weight = if k == 0 || k == g.nz { 0.5 } else { 1.0 };
        let mut part = 0.0;
        for n in k * layer..(k + 1) * layer {
            part += visc.yedge[n] * (grad.dudz[n].powi(2) + grad.dwdx[n].powi(2));
            part += visc.xedge[n] * (grad.dvdz[n].powi(2) + grad.dwdy[n].powi(2));
        }
        sum += weight * part;
    }
    -sum * g.cell_volume()
}

/// Power delivered by the lid: `U` times the shear stress integrated over
/// the lid, using the same one-sided wall gradient as the interior stencil.
pub fn lid_power(field: &VelocityField, grad: &Gradient, visc: &EddyViscosity, part: StressPart) -> f64 {
    let g = field.grid();
    let nu = match part {
        StressPart::Total => visc.molecular,
        StressPart::Model => 0.0,
    };
    let layer = g.nx * g.ny;
    let top = layer * g.nz;
    let stress: f64 = (top..top + layer).map(|n| (nu + visc.yedge[n]) * grad.dudz[n]).sum();
    field.lid_speed() * stress * g.hx * g.hy
}

/// Subtract the skew-symmetric advection `1/2 [a . grad phi + div(a phi)]`
/// of `phi` by `a` from `out`.
///
/// In compact form each direction contributes
/// `(F+ phi(+1) - F- phi(-1)) / (2h)`, with `F` the advecting velocity at the
/// midpoints. `F+` at one point equals `F-` at the next, so
/// `sum phi . N(a, phi) = 0` for any `a`; across the walls `F` is a wall
/// normal velocity and vanishes.
pub fn sub_advection(a: &VelocityField, phi: &VelocityField, out: &mut VelocityField) {
    let g = *a.grid();
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let (hx2, hy2, hz2) = (2.0 * g.hx, 2.0 * g.hy, 2.0 * g.hz);
    let (au, av, aw) = (&a.u, &a.v, &a.w);
    let (pu, pv, pw) = (&phi.u, &phi.v, &phi.w);
    for k in 0..nz {
        for j in 0..ny {
            let (jp, jn) = (prev(j, ny), next(j, ny));
            for i in 0..nx {
                let (ip, inx) = (prev(i, nx), next(i, nx));
                let s = g.idx(i, j, k);
                let (sxm, sxp) = (g.idx(ip, j, k), g.idx(inx, j, k));
                let (sym, syp) = (g.idx(i, jp, k), g.idx(i, jn, k));
                let sup = g.idx(i, j, k + 1);
                let below = if k > 0 { Some(g.idx(i, j, k - 1)) } else { None };
                let above = if k + 1 < nz { Some(sup) } else { None };
                let at = |arr: &[f64], n: Option<usize>| n.map_or(0.0, |n| arr[n]);

                // u
                {
                    let fxp = 0.5 * (au[s] + au[sxp]);
                    let fxm = 0.5 * (au[sxm] + au[s]);
                    let fyp = 0.5 * (av[g.idx(ip, jn, k)] + av[syp]);
                    let fym = 0.5 * (av[g.idx(ip, j, k)] + av[s]);
                    let fzp = 0.5 * (aw[g.idx(ip, j, k + 1)] + aw[sup]);
                    let fzm = 0.5 * (aw[g.idx(ip, j, k)] + aw[s]);
                    out.u[s] -= (fxp * pu[sxp] - fxm * pu[sxm]) / hx2
                        + (fyp * pu[syp] - fym * pu[sym]) / hy2
                        + (fzp * at(pu, above) - fzm * at(pu, below)) / hz2;
                }
                // v
                {
                    let fxp = 0.5 * (au[g.idx(inx, jp, k)] + au[sxp]);
                    let fxm = 0.5 * (au[g.idx(i, jp, k)] + au[s]);
                    let fyp = 0.5 * (av[s] + av[syp]);
                    let fym = 0.5 * (av[sym] + av[s]);
                    let fzp = 0.5 * (aw[g.idx(i, jp, k + 1)] + aw[sup]);
                    let fzm = 0.5 * (aw[g.idx(i, jp, k)] + aw[s]);
                    out.v[s] -= (fxp * pv[sxp] - fxm * pv[sxm]) / hx2
                        + (fyp * pv[syp] - fym * pv[sym]) / hy2
                        + (fzp * at(pv, above) - fzm * at(pv, below)) / hz2;
                }
                // w (interior faces only)
                if let Some(b) = below {
                    let fxp = 0.5 * (au[g.idx(inx, j, k - 1)] + au[sxp]);
                    let fxm = 0.5 * (au[b] + au[s]);
                    let fyp = 0.5 * (av[g.idx(i, jn, k - 1)] + av[syp]);
                    let fym = 0.5 * (av[b] + av[s]);
                    let fzp = 0.5 * (aw[s] + aw[sup]);
                    let fzm = 0.5 * (aw[b] + aw[s]);
                    out.w[s] -= (fxp * pw[sxp] - fxm * pw[sxm]) / hx2
                        + (fyp * pw[syp] - fym * pw[sym]) / hy2
                        + (fzp * pw[sup] - fzm * pw[b]) / hz2;
                }
            }
        }
    }
}

/// Discrete trilinear form `b_h(a, phi, phi) = sum phi . N(a, phi) dV`.
pub fn trilinear(a: &VelocityField, phi: &VelocityField) -> f64 {
    let mut n = VelocityField::zeros(a.grid(), 0.0);
    sub_advection(a, phi, &mut n);
    -phi.inner(&n)
}
