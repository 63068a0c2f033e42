use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::DemandModel;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    GaussianClipped,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub sigma: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            sigma: 0.0,
        }
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = Self {
            kind: NoiseKind::GaussianClipped,
            sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!(
                "noise sigma={} must be finite and >= 0",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// One noisy demand at price `p`: `clamp(f(p) + eps, 0, d_max)`.
///
/// Gaussian noise consumes exactly one standard-normal draw per call, even
/// when `sigma = 0`; `None` consumes nothing. `clips` counts the draws that
/// hit either bound.
pub fn sample_demand<R: Rng + ?Sized>(
    model: &DemandModel,
    noise: &NoiseSpec,
    p: f64,
    rng: &mut R,
    clips: &mut u64,
) -> f64 {
    let mean = model.demand(p);
    match noise.kind {
        NoiseKind::None => mean,
        NoiseKind::GaussianClipped => {
            let z: f64 = rng.sample(StandardNormal);
            let raw = mean + noise.sigma * z;
            if raw < 0.0 || raw > model.d_max() {
                *clips += 1;
            }
            raw.clamp(0.0, model.d_max())
        }
    }
}
