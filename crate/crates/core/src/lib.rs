//! Brjuno-type functions: continued-fraction engine, real evaluators,
//! regularity defects, complex extensions and a high-precision oracle.

// Negated float comparisons are how NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brjuno;
pub mod cf;
pub mod complex;
pub mod delta;
pub mod dilog;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod real;
mod special;

pub use brjuno::{EvalConfig, EvalResult, RealFn};
pub use cf::{CfExpansion, CfKind, Digit, FareyTriple};
pub use complex::{ComplexSums, TruncationPlan};
pub use delta::{HolderReport, JumpReport};
pub use error::{Error, Result};
pub use harness::{DefectReport, FnName, SamplePlan};
pub use real::Real;
