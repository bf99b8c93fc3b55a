//! Pressure Poisson solver: FFT in the periodic directions, one tridiagonal
//! solve in `z` per horizontal wavenumber (homogeneous Neumann at the walls).

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::domain::Grid;

pub struct PoissonSolver {
    grid: Grid,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    /// Eigenvalue of the horizontal second difference for each `(m, n)`.
    lambda: Vec<f64>,
    data: Vec<Complex64>,
    column: Vec<Complex64>,
    transposed: Vec<Complex64>,
    scratch: Vec<f64>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl PoissonSolver {
    pub fn new(grid: &Grid) -> Self {
        let g = *grid;
        let mut planner = FftPlanner::new();
        let eig = |m: usize, n: usize, h: f64| -4.0 / (h * h) * (PI * m as f64 / n as f64).sin().powi(2);
        let mut lambda = Vec::with_capacity(g.nx * g.ny);
        for n in 0..g.ny {
            for m in 0..g.nx {
                lambda.push(eig(m, g.nx, g.hx) + eig(n, g.ny, g.hy));
            }
        }
        Self {
            grid: g,
            fwd_x: planner.plan_fft_forward(g.nx),
            inv_x: planner.plan_fft_inverse(g.nx),
            fwd_y: planner.plan_fft_forward(g.ny),
            inv_y: planner.plan_fft_inverse(g.ny),
            lambda,
            data: vec![Complex64::default(); g.cells()],
            column: vec![Complex64::default(); g.nz],
            transposed: vec![Complex64::default(); g.nx * g.ny],
            scratch: vec![0.0; g.nz],
        }
    }

    /// Overwrite `rhs` with the zero-mean solution of `L phi = rhs`, where
    /// `L` is the cell-centred Laplacian (divergence of the face gradient,
    /// no flux through the walls). `rhs` must sum to zero.
    pub fn solve(&mut self, rhs: &mut [f64]) {
        let g = self.grid;
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let layer = nx * ny;
        for (d, r) in self.data.iter_mut().zip(rhs.iter()) {
            *d = Complex64::new(*r, 0.0);
        }
        self.fwd_x.process(&mut self.data);
        for k in 0..nz {
            self.along_y(k, true);
        }

        let hz2 = g.hz * g.hz;
        for mode in 0..layer {
            for k in 0..nz {
                self.column[k] = self.data[k * layer + mode];
            }
            let lam = self.lambda[mode];
            if mode == 0 {
                // Singular mean mode: integrate the Neumann problem upward
                // from phi_0 = 0, then remove the mean.
                let r: Vec<Complex64> = self.column.clone();
                let col = &mut self.column;
                col[0] = Complex64::default();
                if nz > 1 {
                    col[1] = col[0] + r[0] * hz2;
                }
                for k in 1..nz - 1 {
                    col[k + 1] = col[k] * 2.0 - col[k - 1] + r[k] * hz2;
                }
                let mean = col.iter().sum::<Complex64>() / nz as f64;
                col.iter_mut().for_each(|c| *c -= mean);
            } else {
                thomas(&mut self.column, &mut self.scratch, 1.0 / hz2, lam - 2.0 / hz2, lam - 1.0 / hz2);
            }
            for k in 0..nz {
                self.data[k * layer + mode] = self.column[k];
            }
        }

        for k in 0..nz {
            self.along_y(k, false);
        }
        self.inv_x.process(&mut self.data);
        let scale = 1.0 / layer as f64;
        for (r, d) in rhs.iter_mut().zip(&self.data) {
            *r = d.re * scale;
        }
    }

    fn along_y(&mut self, k: usize, forward: bool) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let base = k * nx * ny;
        for j in 0..ny {
            for i in 0..nx {
                self.transposed[i * ny + j] = self.data[base + j * nx + i];
            }
        }
        if forward {
            self.fwd_y.process(&mut self.transposed);
        } else {
            self.inv_y.process(&mut self.transposed);
        }
        for j in 0..ny {
            for i in 0..nx {
                self.data[base + j * nx + i] = self.transposed[i * ny + j];
            }
        }
    }
}

/// Solve the symmetric tridiagonal system with off-diagonal `off`, interior
/// diagonal `diag` and end diagonal `end` in place.
fn thomas(x: &mut [Complex64], c_prime: &mut [f64], off: f64, diag: f64, end: f64) {
    let n = x.len();
    let d = |k: usize| if k == 0 || k == n - 1 { end } else { diag };
    let mut denom = d(0);
    c_prime[0] = off / denom;
    x[0] /= denom;
    for k in 1..n {
        denom = d(k) - off * c_prime[k - 1];
        c_prime[k] = off / denom;
        let prev = x[k - 1];
        x[k] = (x[k] - prev * off) / denom;
    }
    for k in (0..n - 1).rev() {
        let nextv = x[k + 1];
        x[k] -= nextv * c_prime[k];
    }
}
