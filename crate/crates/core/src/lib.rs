//! Smagorinsky model with wall damping in a lid-driven plane shear box:
//! damping profiles, analytic dissipation bounds, a staggered-grid solver
//! measuring the time-averaged dissipation, and an experiment driver.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod bounds;
pub mod damping;
pub mod dissipation;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod field;
pub mod quadrature;
pub mod solver;

pub use background::{BackgroundFlow, StripRegion};
pub use bounds::{BoundConstants, BoundKind, BoundReport, ReferenceRates};
pub use damping::{DampingProfile, ProfileKind, ResolvedProfile, Table};
pub use dissipation::{Accumulator, DissipationRecord, EpsParts};
pub use domain::{DomainParams, Grid};
pub use error::{Error, Result};
pub use experiments::{run_experiment, Artifacts, ExperimentConfig, Mode};
pub use field::VelocityField;
pub use solver::{InitialCondition, RunOutput, Solver, SolverConfig, StopReason};
