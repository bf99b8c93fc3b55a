//! Box geometry, physical parameters and the staggered grid.
//!
//! The flow domain is the cube `(0, L)^3`, periodic in `x` and `y`, with a
//! fixed wall at `z = 0` and a lid moving with speed `U` in `x` at `z = L`.

use crate::error::{Error, Result};

/// Denominator in the strip fraction `gamma = kappa / (5.1 Re)`.
pub const STRIP_DIVISOR: f64 = 5.1;

/// Physical parameters of the shear-flow box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainParams {
    length: f64,
    lid_speed: f64,
    viscosity: f64,
    delta: f64,
    c_s: f64,
    kappa: f64,
    re: f64,
    gamma: f64,
}

impl DomainParams {
    /// Validated constructor. `re = U L / nu`, `gamma = kappa / (5.1 re)`.
    pub fn new(length: f64, lid_speed: f64, viscosity: f64, delta: f64, c_s: f64, kappa: f64) -> Result<Self> {
        for (name, value) in [
            ("length", length),
            ("lid speed", lid_speed),
            ("viscosity", viscosity),
            ("delta", delta),
            ("c_s", c_s),
            ("kappa", kappa),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {value}")));
            }
        }
        if kappa > 1.0 {
            return Err(Error::Parameter(format!("kappa must lie in (0, 1], got {kappa}")));
        }
        if delta >= length {
            return Err(Error::Parameter(format!("model scale delta = {delta} must be smaller than L = {length}")));
        }
        let re = lid_speed * length / viscosity;
        let gamma = kappa / (STRIP_DIVISOR * re);
        if gamma * re >= 0.2 {
            return Err(Error::Parameter(format!("gamma * Re = {} must stay below 1/5", gamma * re)));
        }
        Ok(Self { length, lid_speed, viscosity, delta, c_s, kappa, re, gamma })
    }

    /// Parameters with the viscosity chosen to hit a target Reynolds number.
    pub fn with_reynolds(length: f64, lid_speed: f64, re: f64, delta: f64, c_s: f64, kappa: f64) -> Result<Self> {
        if !(re.is_finite() && re > 0.0) {
            return Err(Error::Parameter(format!("Reynolds number must be positive, got {re}")));
        }
        Self::new(length, lid_speed, lid_speed * length / re, delta, c_s, kappa)
    }

    /// Copy with a different lid speed; `U = 0` is accepted and describes a
    /// box at rest, for which `re = 0` and no boundary strip exists
    /// (`gamma` is infinite).
    pub fn with_lid_speed(&self, lid_speed: f64) -> Result<Self> {
        if lid_speed == 0.0 {
            return Ok(Self { lid_speed: 0.0, re: 0.0, gamma: f64::INFINITY, ..*self });
        }
        Self::new(self.length, lid_speed, self.viscosity, self.delta, self.c_s, self.kappa)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.length, self.lid_speed, self.viscosity, delta, self.c_s, self.kappa)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn lid_speed(&self) -> f64 {
        self.lid_speed
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn c_s(&self) -> f64 {
        self.c_s
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `C_s * delta`, the Smagorinsky length.
    pub fn model_length(&self) -> f64 {
        self.c_s * self.delta
    }

    /// Thickness `gamma L` of the boundary strip below the lid.
    pub fn strip_width(&self) -> f64 {
        self.gamma * self.length
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Energy input scale `U^3 / L`.
    pub fn dissipation_scale(&self) -> f64 {
        self.lid_speed.powi(3) / self.length
    }

    pub fn check_height(&self, z: f64) -> Result<()> {
        if (0.0..=self.length).contains(&z) {
            Ok(())
        } else {
            Err(Error::Domain { z, length: self.length })
        }
    }
}

/// Uniform staggered grid: velocity components on face centres, pressure
/// on cell centres. `x` and `y` wrap periodically; `z` is bounded by walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
    strip_resolved: bool,
}

impl Grid {
    pub fn new(domain: &DomainParams, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx < 4 || ny < 4 || nz < 4 {
            return Err(Error::Grid(format!("cell counts must be at least 4, got {nx} x {ny} x {nz}")));
        }
        let length = domain.length();
        Ok(Self {
            nx,
            ny,
            nz,
            hx: length / nx as f64,
            hy: length / ny as f64,
            hz: length / nz as f64,
            strip_resolved: nz as f64 * domain.gamma() >= 2.0,
        })
    }

    /// True when at least two cells fit inside the `gamma L` strip.
    pub fn strip_resolved(&self) -> bool {
        self.strip_resolved
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy * self.hz
    }

    pub fn min_width(&self) -> f64 {
        self.hx.min(self.hy).min(self.hz)
    }

    pub fn max_width(&self) -> f64 {
        self.hx.max(self.hy).max(self.hz)
    }

    /// Height of the cell centres in layer `k`.
    pub fn z_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.hz
    }

    /// Flat index of a cell-centred (or `u`/`v` face) value.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }
}

pub fn make_domain(
    length: f64,
    lid_speed: f64,
    viscosity: f64,
    delta: f64,
    c_s: f64,
    kappa: f64,
) -> Result<DomainParams> {
    DomainParams::new(length, lid_speed, viscosity, delta, c_s, kappa)
}

pub fn make_grid(domain: &DomainParams, nx: usize, ny: usize, nz: usize) -> Result<Grid> {
    Grid::new(domain, nx, ny, nz)
}
