//! Solvers for semi-explicit index-1 differential-algebraic systems
//! `x' = f(t, x, y)`, `0 = g(t, x, y)`, built around three interchangeable
//! stepping schemes:
//!
//! * a simultaneous implicit-trapezoidal method solving states and
//!   algebraic variables in one Newton iteration,
//! * a partitioned predictor-corrector holding the previous algebraic
//!   values through the corrector, guarded by a consistency check, and
//! * the same partitioned structure with a second-order extrapolated
//!   algebraic estimate that removes the need for the check.
//!
//! Adaptive stepping uses a PI controller on the predictor-corrector
//! difference. Power-system test models (single machine vs. infinite bus,
//! multi-machine cases from text files) and instrumentation for
//! cross-solver comparison, convergence studies and benchmarking are
//! included; see the `examples/` directory for end-to-end usage.

pub mod cli;
pub mod control;
pub mod dae;
pub mod error;
pub mod estimate;
pub mod integrate;
pub mod io;
pub mod metrics;
pub mod models;
pub mod nonlinear;

pub use control::{AlgebraicCheck, PiController};
pub use dae::{consistent_initialize, DaeSystem, Event, SystemState};
pub use error::{Result, SolverError};
pub use estimate::AlgebraicHistory;
pub use integrate::{
    simulate, simulate_fixed, CorrectorMode, SchemeKind, SimOptions, SimulationOutput,
    SolverScheme, StepResult,
};
pub use metrics::{DivergenceReason, RunMetrics, StepRecord, Trajectory};
pub use nonlinear::{NewtonConfig, NewtonReport};
