//! Multigrid-reduction-in-time for semi-Lagrangian discretizations of
//! variable-wave-speed linear advection in one and two space dimensions.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod backtracking;
pub mod coarse_correction;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod mgrit;
pub mod oracle;
pub mod scalar;
pub mod semi_lagrangian;

pub use coarse_correction::{CorrectionField, GmresConfig};
pub use error::{Error, Result};
pub use grid::{Dimension, WaveSpeedId};
pub use mgrit::{Coarsening, ConvergenceReport, DeparturePolicy, OperatorKind, Relaxation, Status};
pub use scalar::Real;
pub use semi_lagrangian::{ErkScheme, InterpDegree};

pub type SpatialGrid = grid::SpatialGrid<f64>;
pub type SpatialGrid1D = grid::SpatialGrid1D<f64>;
pub type TimeGrid = grid::TimeGrid<f64>;
pub type WaveSpeed = grid::WaveSpeed<f64>;
pub type GridFunction = grid::GridFunction<f64>;
pub type DepartureSet = semi_lagrangian::DepartureSet<f64>;
pub type Field = coarse_correction::CorrectionField<f64>;
pub type SolverConfig = mgrit::SolverConfig<f64>;
pub type Hierarchy = mgrit::Hierarchy<f64>;
pub type SpaceTimeState = mgrit::SpaceTimeState<f64>;
pub type Solution = mgrit::Solution<f64>;
