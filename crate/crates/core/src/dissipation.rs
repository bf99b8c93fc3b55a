//! Energy and dissipation diagnostics, and the running time average whose
//! long-time limit is the mean dissipation rate.

use std::io::Write;

use crate::damping::{DampingProfile, ResolvedProfile};
use crate::domain::DomainParams;
use crate::error::{Error, Result};
use crate::field::{next, Gradient, VelocityField};

/// Volume-averaged dissipation split into its viscous and model parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsParts {
    pub viscous: f64,
    pub model: f64,
}

impl EpsParts {
    pub fn total(&self) -> f64 {
        self.viscous + self.model
    }
}

/// `(1/L^3) int nu |grad u|^2` and `(1/L^3) int (C_s delta)^2 beta |grad u|^3`
/// by the midpoint rule on cell centres.
pub fn eps_instant(field: &VelocityField, profile: &DampingProfile, domain: &DomainParams) -> Result<EpsParts> {
    Ok(eps_resolved(field, &profile.resolve(domain)?))
}

pub fn eps_resolved(field: &VelocityField, profile: &ResolvedProfile) -> EpsParts {
    let grad = Gradient::new(field);
    eps_from_gradient(field, &grad, profile)
}

pub(crate) fn eps_from_gradient(field: &VelocityField, grad: &Gradient, profile: &ResolvedProfile) -> EpsParts {
    let g = field.grid();
    let d = profile.domain();
    let norm_sq = grad.center_norm_sq(g);
    let ell2 = d.model_length().powi(2);
    let layer = g.nx * g.ny;
    let (mut viscous, mut model) = (0.0, 0.0);
    for k in 0..g.nz {
        let beta = profile.value_unchecked(g.z_center(k));
        let (mut sq, mut cube) = (0.0, 0.0);
        for s in &norm_sq[k * layer..(k + 1) * layer] {
            sq += s;
            cube += s * s.sqrt();
        }
        viscous += sq;
        model += beta * cube;
    }
    let scale = g.cell_volume() / d.volume();
    EpsParts { viscous: d.viscosity() * viscous * scale, model: ell2 * model * scale }
}

/// `1/2 sum |u|^2` over cells, with each component averaged to the centre.
pub fn kinetic_energy(field: &VelocityField) -> f64 {
    let g = field.grid();
    let mut sum = 0.0;
    for k in 0..g.nz {
        for j in 0..g.ny {
            let jn = next(j, g.ny);
            for i in 0..g.nx {
                let c = g.idx(i, j, k);
                let uc = 0.5 * (field.u[c] + field.u[g.idx(next(i, g.nx), j, k)]);
                let vc = 0.5 * (field.v[c] + field.v[g.idx(i, jn, k)]);
                let wc = 0.5 * (field.w[c] + field.w[g.idx(i, j, k + 1)]);
                sum += uc * uc + vc * vc + wc * wc;
            }
        }
    }
    0.5 * sum * g.cell_volume()
}

/// One diagnostic sample and the running average up to its time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationRecord {
    pub time: f64,
    pub kinetic_energy: f64,
    pub eps_viscous: f64,
    pub eps_model: f64,
    pub eps_total: f64,
    pub running_average: f64,
}

/// Running trapezoidal average of `eps_total` over `[t_0, t]`, where `t_0`
/// is the time of the first sample.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    records: Vec<DissipationRecord>,
    integral: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[DissipationRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&DissipationRecord> {
        self.records.last()
    }

    pub fn accumulate(&mut self, time: f64, kinetic_energy: f64, eps: EpsParts) -> Result<DissipationRecord> {
        let eps_total = eps.total();
        let running_average = match self.records.last() {
            None => eps_total,
            Some(last) => {
                if !(time > last.time) {
                    return Err(Error::Sequencing { last: last.time, next: time });
                }
                self.integral += 0.5 * (time - last.time) * (last.eps_total + eps_total);
                self.integral / (time - self.records[0].time)
            }
        };
        let record = DissipationRecord {
            time,
            kinetic_energy,
            eps_viscous: eps.viscous,
            eps_model: eps.model,
            eps_total,
            running_average,
        };
        self.records.push(record);
        Ok(record)
    }

    pub fn average(&self) -> Option<f64> {
        self.last().map(|r| r.running_average)
    }

    /// Finite-horizon stand-in for the limsup: the largest running average
    /// over the final quarter of the sampled horizon.
    pub fn limsup_proxy(&self) -> Option<f64> {
        let first = self.records.first()?.time;
        let last = self.records.last()?.time;
        let cut = first + 0.75 * (last - first);
        self.records.iter().filter(|r| r.time >= cut).map(|r| r.running_average).reduce(f64::max)
    }
}

pub const CSV_HEADER: [&str; 6] = ["time", "ke", "eps_viscous", "eps_model", "eps_total", "running_avg"];

pub fn write_csv<W: Write>(records: &[DissipationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(
            [r.time, r.kinetic_energy, r.eps_viscous, r.eps_model, r.eps_total, r.running_average]
                .map(|x| format!("{x:e}")),
        )?;
    }
    w.flush()?;
    Ok(())
}
