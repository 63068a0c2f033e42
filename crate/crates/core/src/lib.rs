//! Simulation laboratory for nonparametric dynamic pricing under Hölder
//! smoothness: local polynomial pricing policies, a smoothness estimator,
//! adversarial demand constructions and a Monte Carlo regret harness.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod environments;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod policies;

pub use error::{Error, Result};
