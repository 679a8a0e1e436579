//! Distributed projected subgradient method for multi-agent convex
//! optimization over fixed and time-varying communication graphs.
//!
//! Each agent `i` holds a private convex objective `f_i` and a private closed
//! convex set `X_i`. At every round it mixes its neighbors' estimates with
//! row-stochastic weights, takes a subgradient step of size `alpha_i(k)` and
//! projects back onto `X_i`. The agents reach consensus on a minimizer of
//! `sum_i q_i f_i` over `∩ X_i`, where `q` is the common left eigenvector of
//! the weight matrices, for any positive, vanishing, non-summable step sizes.
//!
//! Modules:
//! - [`graph`]: weight matrices, graph sequences and their validators
//! - [`convex`]: objectives, constraint sets, projections, problem data
//! - [`schedule`]: step-size sequences and their classification
//! - [`engine`]: the round-based iteration and its trace
//! - [`oracle`]: centralized reference solutions
//! - [`validation`]: aggregated assumption checks
//! - [`experiment`]: config files, bundled presets and on-disk artifacts

pub mod convex;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod schedule;
pub mod validation;

pub use convex::{BoxBounds, ConstraintSet, Mode, Objective, ProblemSpec};
pub use engine::{run, step, Init, RoundRecord, RunConfig, RunTrace};
pub use error::{Error, Result};
pub use graph::{GraphConfig, GraphSequence, LeftEigenvector, Topology, WeightMatrix};
pub use oracle::{OracleMethod, OracleSolution};
pub use schedule::StepSchedule;
