//! Borel-Cantelli laboratory: sequence primitives, interval machinery,
//! stationary process simulators, mixing coefficients, criterion evaluators
//! and a reproducible experiment harness.

// `!(x > y)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod harness;
pub mod intervals;
pub mod mixing;
pub mod processes;
pub mod seqcore;
pub mod stats;

pub use error::{Error, Result};
pub use intervals::{Interval, IntervalFamily, Measure, MeasureSpec, Space};
pub use processes::{HitRecord, ProcessSpec};
pub use seqcore::{QuantileFn, RealSeq};
