//! Cross-validation hypothesis tests for ridge regression against an
//! intercept-only null model.
//!
//! The crate computes exhaustive leave-one-out and leave-two-out estimators
//! (plain and nested) from a single SVD per dataset, builds paired tests on
//! the resulting per-unit losses, and runs seeded simulation sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cv;
pub mod error;
pub mod hypothesis;
pub mod io;
pub mod linalg;
pub mod nested;
pub mod sim;

pub use error::{Error, Result};
pub use hypothesis::{ExhaustiveLosses, PairedLossVectors, TestKind, TestReport};
pub use linalg::{Dataset, Penalty, RidgeContext, RidgeSolver};
pub use nested::{LambdaGrid, NestedCvResult, RidgePath};
pub use sim::{CovStructure, SimConfig, SweepResult};
