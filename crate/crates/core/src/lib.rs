//! Method-of-lines solvers for one-dimensional hyperbolic PDEs together with
//! the machinery needed to measure their spatial and temporal orders of
//! convergence: manufactured-solution problems, upwind finite differences,
//! piecewise-parabolic finite volumes, explicit Runge-Kutta and
//! Adams-Bashforth steppers, refinement studies and report generation.

pub mod config;
pub mod convergence;
pub mod error;
pub mod figures;
pub mod mesh;
pub mod ode_verify;
pub mod problems;
pub mod report;
pub mod scheme;
pub mod spatial_fd;
pub mod spatial_ppr;
pub mod time_steppers;

pub use error::{Error, Result};
pub use mesh::{wrap_index, StateField, StateKind, UniformMesh};
pub use problems::{ManufacturedSolution, ProblemSpec};
pub use scheme::{SchemeConfig, SpatialMethod};
pub use time_steppers::{History, Method, StepperSpec};
