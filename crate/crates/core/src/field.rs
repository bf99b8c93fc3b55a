//! Staggered velocity/pressure storage and the gradient stencil.
//!
//! Layout for cell `(i, j, k)` of a [`Grid`]:
//!
//! * `u[i,j,k]` on the face `x = i hx`, `v[i,j,k]` on `y = j hy`, both at
//!   mid-height `z = (k + 1/2) hz`;
//! * `w[i,j,k]` on `z = k hz` for `k = 0..=nz`; the wall faces `k = 0` and
//!   `k = nz` are kept at zero;
//! * `p[i,j,k]` at the cell centre.
//!
//! Arrays are flat with `x` fastest and `z` slowest. The wall conditions
//! for `u` and `v` live in implicit ghost layers: `u(-1) = -u(0)`,
//! `u(nz) = 2U - u(nz - 1)` and `v(-1) = -v(0)`, `v(nz) = -v(nz - 1)`.

use crate::background::BackgroundFlow;
use crate::domain::{DomainParams, Grid};

#[inline]
pub(crate) fn prev(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

#[inline]
pub(crate) fn next(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    lid_speed: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub time: f64,
}

impl VelocityField {
    pub fn zeros(grid: &Grid, lid_speed: f64) -> Self {
        let n = grid.cells();
        Self {
            grid: *grid,
            lid_speed,
            u: vec![0.0; n],
            v: vec![0.0; n],
            w: vec![0.0; grid.nx * grid.ny * (grid.nz + 1)],
            p: vec![0.0; n],
            time: 0.0,
        }
    }

    /// Linear shear `u = U z / L`.
    pub fn couette(domain: &DomainParams, grid: &Grid) -> Self {
        let mut f = Self::zeros(grid, domain.lid_speed());
        let slope = domain.lid_speed() / domain.length();
        f.fill_u(|z| slope * z);
        f
    }

    /// The background flow sampled on the `u` faces.
    pub fn from_background(flow: &BackgroundFlow, grid: &Grid) -> Self {
        let mut f = Self::zeros(grid, flow.domain().lid_speed());
        f.fill_u(|z| flow.phi_unchecked(z));
        f
    }

    /// Set `u` to a function of height, `v = w = 0`.
    pub fn fill_u(&mut self, profile: impl Fn(f64) -> f64) {
        let g = self.grid;
        for k in 0..g.nz {
            let value = profile(g.z_center(k));
            let start = g.idx(0, 0, k);
            self.u[start..start + g.nx * g.ny].fill(value);
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lid_speed(&self) -> f64 {
        self.lid_speed
    }

    /// Layer-averaged `u` at each cell-centre height.
    pub fn mean_u_profile(&self) -> Vec<f64> {
        let g = &self.grid;
        let layer = g.nx * g.ny;
        self.u.chunks(layer).map(|c| c.iter().sum::<f64>() / layer as f64).collect()
    }

    /// Discrete divergence at every cell centre.
    pub fn divergence(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; g.cells()];
        for k in 0..g.nz {
            for j in 0..g.ny {
                let jn = next(j, g.ny);
                for i in 0..g.nx {
                    let c = g.idx(i, j, k);
                    let ux = self.u[g.idx(next(i, g.nx), j, k)] - self.u[c];
                    let vy = self.v[g.idx(i, jn, k)] - self.v[c];
                    let wz = self.w[g.idx(i, j, k + 1)] - self.w[c];
                    out[c] = ux / g.hx + vy / g.hy + wz / g.hz;
                }
            }
        }
        out
    }

    /// `max |div u| * h_min / velocity scale`, the quantity compared with the
    /// projection tolerance.
    pub fn relative_divergence(&self) -> f64 {
        let max_div = self.divergence().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        max_div * self.grid.min_width() / self.velocity_scale()
    }

    /// `max(U, max |velocity|)`, floored so a field at rest has scale 1.
    pub fn velocity_scale(&self) -> f64 {
        let max = |a: &[f64]| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let s = self.lid_speed.abs().max(max(&self.u)).max(max(&self.v)).max(max(&self.w));
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.v, &self.w].iter().all(|a| a.iter().all(|x| x.is_finite()))
    }

    /// Volume-weighted `sum a . b` over velocity unknowns (wall `w` faces
    /// excluded, they are fixed).
    pub fn inner(&self, other: &VelocityField) -> f64 {
        let g = &self.grid;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let layer = g.nx * g.ny;
        let w_end = layer * g.nz;
        (dot(&self.u, &other.u) + dot(&self.v, &other.v) + dot(&self.w[layer..w_end], &other.w[layer..w_end]))
            * g.cell_volume()
    }
}

/// All nine velocity-gradient components, each at its natural staggered
/// location.
///
/// * cell centres: `du/dx`, `dv/dy`, `dw/dz`;
/// * `z`-edges `(i hx, j hy, (k + 1/2) hz)`: `du/dy`, `dv/dx`;
/// * `y`-edges `(i hx, (j + 1/2) hy, k hz)`, `k = 0..=nz`: `du/dz`, `dw/dx`;
/// * `x`-edges `((i + 1/2) hx, j hy, k hz)`, `k = 0..=nz`: `dv/dz`, `dw/dy`.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub dudx: Vec<f64>,
    pub dvdy: Vec<f64>,
    pub dwdz: Vec<f64>,
    pub dudy: Vec<f64>,
    pub dvdx: Vec<f64>,
    pub dudz: Vec<f64>,
    pub dwdx: Vec<f64>,
    pub dvdz: Vec<f64>,
    pub dwdy: Vec<f64>,
}

impl Gradient {
    pub fn new(f: &VelocityField) -> Self {
        let g = *f.grid();
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let n = g.cells();
        let ne = nx * ny * (nz + 1);
        let mut out = Self {
            dudx: vec![0.0; n],
            dvdy: vec![0.0; n],
            dwdz: vec![0.0; n],
            dudy: vec![0.0; n],
            dvdx: vec![0.0; n],
            dudz: vec![0.0; ne],
            dwdx: vec![0.0; ne],
            dvdz: vec![0.0; ne],
            dwdy: vec![0.0; ne],
        };
        let (u, v, w) = (&f.u, &f.v, &f.w);
        for k in 0..nz {
            for j in 0..ny {
                let (jp, jn) = (prev(j, ny), next(j, ny));
                for i in 0..nx {
                    let (ip, inx) = (prev(i, nx), next(i, nx));
                    let c = g.idx(i, j, k);
                    out.dudx[c] = (u[g.idx(inx, j, k)] - u[c]) / g.hx;
                    out.dvdy[c] = (v[g.idx(i, jn, k)] - v[c]) / g.hy;
                    out.dwdz[c] = (w[g.idx(i, j, k + 1)] - w[c]) / g.hz;
                    out.dudy[c] = (u[c] - u[g.idx(i, jp, k)]) / g.hy;
                    out.dvdx[c] = (v[c] - v[g.idx(ip, j, k)]) / g.hx;
                }
            }
        }
        let lid = f.lid_speed();
        for k in 0..=nz {
            for j in 0..ny {
                let jp = prev(j, ny);
                for i in 0..nx {
                    let ip = prev(i, nx);
                    let e = g.idx(i, j, k);
                    let (u_lo, u_hi, v_lo, v_hi) = if k == 0 {
                        let (u0, v0) = (u[g.idx(i, j, 0)], v[g.idx(i, j, 0)]);
                        (-u0, u0, -v0, v0)
                    } else if k == nz {
                        let (ut, vt) = (u[g.idx(i, j, nz - 1)], v[g.idx(i, j, nz - 1)]);
                        (ut, 2.0 * lid - ut, vt, -vt)
                    } else {
                        (u[g.idx(i, j, k - 1)], u[e], v[g.idx(i, j, k - 1)], v[e])
                    };
                    out.dudz[e] = (u_hi - u_lo) / g.hz;
                    out.dvdz[e] = (v_hi - v_lo) / g.hz;
                    out.dwdx[e] = (w[e] - w[g.idx(ip, j, k)]) / g.hx;
                    out.dwdy[e] = (w[e] - w[g.idx(i, jp, k)]) / g.hy;
                }
            }
        }
        out
    }

    /// `|grad u|^2` at every cell centre: the diagonal terms are native
    /// there, each off-diagonal square is averaged over the four
    /// surrounding edges.
    pub fn center_norm_sq(&self, grid: &Grid) -> Vec<f64> {
        let g = grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let mut out = vec![0.0; g.cells()];
        let sq = |a: &[f64], idx: [usize; 4]| idx.iter().map(|&n| a[n] * a[n]).sum::<f64>() / 4.0;
        for k in 0..nz {
            for j in 0..ny {
                let jn = next(j, ny);
                for i in 0..nx {
                    let inx = next(i, nx);
                    let c = g.idx(i, j, k);
                    let zedges = [c, g.idx(inx, j, k), g.idx(i, jn, k), g.idx(inx, jn, k)];
                    let yedges = [c, g.idx(inx, j, k), g.idx(i, j, k + 1), g.idx(inx, j, k + 1)];
                    let xedges = [c, g.idx(i, jn, k), g.idx(i, j, k + 1), g.idx(i, jn, k + 1)];
                    out[c] = self.dudx[c].powi(2)
                        + self.dvdy[c].powi(2)
                        + self.dwdz[c].powi(2)
                        + sq(&self.dudy, zedges)
                        + sq(&self.dvdx, zedges)
                        + sq(&self.dudz, yedges)
                        + sq(&self.dwdx, yedges)
                        + sq(&self.dvdz, xedges)
                        + sq(&self.dwdy, xedges);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_domain;

    #[test]
    fn couette_gradient_is_uniform() {
        let d = make_domain(1.0, 2.0, 0.02, 0.1, 0.1, 1.0).unwrap();
        let g = Grid::new(&d, 4, 5, 8).unwrap();
        let f = VelocityField::couette(&d, &g);
        let grad = Gradient::new(&f);
        for x in &grad.dudz {
            assert!((x - 2.0).abs() < 1e-13, "{x}");
        }
        for x in grad.center_norm_sq(&g) {
            assert!((x - 4.0).abs() < 1e-12);
        }
        assert_eq!(f.relative_divergence(), 0.0);
    }

    #[test]
    fn background_is_divergence_free() {
        for (re, n) in [(1.0 / 0.51, 8), (100.0, 16), (3.0, 5)] {
            let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).unwrap();
            let g = Grid::new(&d, n, n + 1, 2 * n).unwrap();
            let f = VelocityField::from_background(&BackgroundFlow::new(&d), &g);
            assert!(f.divergence().iter().all(|x| *x == 0.0));
        }
    }
}
