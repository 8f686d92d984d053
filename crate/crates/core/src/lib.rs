#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

//! Simulation of Byzantine-robust asynchronous distributed SGD with a
//! validation-filtered, fastest-k aggregation rule and synchronous baselines.

pub mod adversary;
pub mod aggregation;
mod error;
pub mod models;
pub mod numerics;
pub mod simulator;

pub use error::{Error, Result};
