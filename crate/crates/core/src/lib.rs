//! Distributionally robust multi-objective optimization (DR-MOO) through the
//! Lagrangian dual of an f-divergence regularized worst case.
//!
//! Each objective `i` is replaced by its robust counterpart
//!
//! ```text
//! phi_i(theta) = min_eta  lambda * E[f*((loss_i(theta; xi) - eta) / lambda)] + eta
//! ```
//!
//! and the vector `(phi_1, ..., phi_m)` is driven to Pareto stationarity with
//! MGDA-style solvers. The crate is organized as:
//!
//! - [`dro`]: conjugates, the dual objective, its gradients and exact oracles.
//! - [`simplex`]: preference vectors and Euclidean projection onto the simplex.
//! - [`problems`]: synthetic linear regression, wine logistic regression and the
//!   bi-objective toy example.
//! - [`solvers`]: double-loop MGDA, double-clip MGDA and two baselines.
//! - [`metrics`]: stationarity measures and Pareto filtering.
//! - [`check`]: the runtime invariant suite behind `drmoo check`.

pub mod check;
pub mod dro;
mod error;
mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod simplex;
pub mod solvers;

pub use dro::{Conjugate, ConjugateKind, DualContext, DualVector, ObjectiveJacobian, ParamVector, SampleBatch};
pub use error::{Error, Result};
pub use problems::{LinearSpec, LossKind, MultiTaskProblem, ToySpec};
pub use simplex::PreferenceVector;
pub use solvers::{DoubleClipConfig, DoubleLoopConfig, BaselineConfig, RunTrace, TraceRecord};
