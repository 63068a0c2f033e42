//! Pricing policies and the smoothness estimator.

pub mod beta;
pub mod hsdp;
pub mod partition;
pub mod sadp;
pub mod simple;

use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

pub use beta::{beta_from_distance, estimate_beta, BetaEstimate, PiecewisePoly};
pub use hsdp::{
    hsdp_init, hsdp_step, hsdp_update, BinState, Decision, HsdpConfig, HsdpPolicy, HsdpSnapshot,
    HsdpState, Observation,
};
pub use partition::UniformPartition;
pub use sadp::{
    explore_and_estimate, sadp_run, ExplorationOutcome, SadpConfig, SadpPolicy, SadpSchedule,
};
pub use simple::FixedPricePolicy;

/// `w(beta)`: the largest integer strictly below `beta`.
pub fn holder_degree(beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(format!(
            "smoothness {beta} must be positive and finite"
        )));
    }
    Ok(beta.ceil() as usize - 1)
}

/// A sequential pricing rule driven by the episode loop.
///
/// Each round the loop calls [`next_price`](Self::next_price) and then
/// [`observe`](Self::observe) with the realized demand. Rounds are 1-based.
pub trait PricingPolicy {
    fn next_price(&mut self, t: u64, rng: &mut ChaCha8Rng) -> Result<f64>;
    fn observe(&mut self, t: u64, price: f64, demand: f64) -> Result<()>;

    fn beta_hat(&self) -> Option<f64> {
        None
    }

    /// Rounds spent exploring before the policy starts exploiting.
    fn exploration_rounds(&self) -> u64 {
        0
    }

    /// Observations per pricing bin at the end of the run.
    fn occupancy(&self) -> Vec<usize> {
        Vec::new()
    }
}
