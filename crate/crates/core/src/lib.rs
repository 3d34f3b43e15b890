//! Trajectories, closure and phase of a spin-carrying diamagnetic
//! nanocrystal in a switched linear magnetic field.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar for the common cases.
//!
//! ```
//! use sgi_core::{close_run, RunSpec64};
//!
//! let run = RunSpec64::reference(1e-17, 40.0, 2.0895e-6);
//! let closed = close_run(&run).unwrap();
//! assert!((closed.closure.tau6 - 1.48).abs() < 0.05);
//! ```

pub mod closure;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod field;
pub mod integrator;
pub mod model;
pub mod output;
pub mod phase;
pub mod roots;
pub mod scalar;

pub use closure::{close_run, max_superposition, solve_closure, ClosedRun, ClosureResult};
pub use dynamics::{simulate, ArmLabel, Prelude, Trajectory};
pub use error::{Result, SimError};
pub use field::FieldSchedule;
pub use model::{validate_spec, FieldSpec, Numerics, ParticleSpec, PhysicalConstants, RunSpec, StageTimes};
pub use phase::{phase_report, PhaseReport};
pub use scalar::Real;

pub type RunSpec64 = RunSpec<f64>;
pub type RunSpec32 = RunSpec<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type ClosureResult64 = ClosureResult<f64>;
pub type ClosureResult32 = ClosureResult<f32>;
pub type PhaseReport64 = PhaseReport<f64>;
pub type FieldSchedule64 = FieldSchedule<f64>;
pub type StageTimes64 = StageTimes<f64>;
