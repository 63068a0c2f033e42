use rand_chacha::ChaCha8Rng;

use super::PricingPolicy;
use crate::error::Result;

/// Plays the same price every round; at the optimal price this is the
/// oracle policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPricePolicy {
    pub price: f64,
}

impl PricingPolicy for FixedPricePolicy {
    fn next_price(&mut self, _t: u64, _rng: &mut ChaCha8Rng) -> Result<f64> {
        Ok(self.price)
    }

    fn observe(&mut self, _t: u64, _price: f64, _demand: f64) -> Result<()> {
        Ok(())
    }
}
