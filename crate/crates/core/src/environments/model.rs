use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::shapes::{CustomFn, Shape};
use crate::error::{domain, Error, Result};
use crate::numerics::jet::{Jet, MAX_ORDER};
use crate::numerics::Interval;

/// Points of the range audit run at construction.
pub const AUDIT_GRID: usize = 10_000;
const FD_POINTS: usize = 100;
const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-4;

/// Self-similarity parameters `(l, M1, M2)` of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimParams {
    pub degree: usize,
    pub m1: f64,
    pub m2: f64,
}

/// A demand function on `[p_min, 1]` with values in `[0, d_max]`, together
/// with its smoothness metadata.
#[derive(Debug, Clone)]
pub struct DemandModel {
    label: String,
    shape: Shape,
    beta: f64,
    lipschitz: f64,
    p_min: f64,
    d_max: f64,
    selfsim: Option<SelfSimParams>,
    maximizers: Vec<f64>,
}

impl DemandModel {
    /// Validates the parameters and audits the range on [`AUDIT_GRID`]
    /// points. Shapes with a derivative oracle also get their first
    /// derivative compared against central differences.
    pub fn new(
        label: impl Into<String>,
        shape: Shape,
        beta: f64,
        lipschitz: f64,
        p_min: f64,
        d_max: f64,
    ) -> Result<Self> {
        let label = label.into();
        if !(p_min > 0.0 && p_min < 1.0) {
            return Err(domain(format!("p_min={p_min} must lie in (0, 1)")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain(format!("beta={beta} must be positive")));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(domain(format!("L={lipschitz} must be positive")));
        }
        if !(d_max > 0.0 && d_max.is_finite()) {
            return Err(domain(format!("d_max={d_max} must be positive")));
        }
        let model = Self {
            label,
            shape,
            beta,
            lipschitz,
            p_min,
            d_max,
            selfsim: None,
            maximizers: Vec::new(),
        };
        model.audit_range()?;
        if model.has_derivative_oracle() {
            model.audit_derivative_oracle()?;
        }
        Ok(model)
    }

    /// A model backed by an arbitrary function; it has no derivative oracle.
    pub fn custom<F>(
        label: impl Into<String>,
        f: F,
        beta: f64,
        lipschitz: f64,
        p_min: f64,
        d_max: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            label,
            Shape::Custom(CustomFn(Arc::new(f))),
            beta,
            lipschitz,
            p_min,
            d_max,
        )
    }

    pub(crate) fn with_selfsim(mut self, params: Option<SelfSimParams>) -> Self {
        self.selfsim = params;
        self
    }

    /// Prices where the revenue is known to peak; ground truth evaluates
    /// them alongside its grid.
    pub(crate) fn with_maximizers(mut self, prices: Vec<f64>) -> Self {
        self.maximizers = prices;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn selfsim(&self) -> Option<SelfSimParams> {
        self.selfsim
    }

    pub fn maximizers(&self) -> &[f64] {
        &self.maximizers
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.p_min, 1.0).expect("p_min validated at construction")
    }

    #[inline]
    pub fn demand(&self, p: f64) -> f64 {
        self.shape.value(p)
    }

    #[inline]
    pub fn revenue(&self, p: f64) -> f64 {
        p * self.demand(p)
    }

    pub fn has_derivative_oracle(&self) -> bool {
        self.shape.has_derivatives()
    }

    /// Taylor jet of the demand at `p`, when the shape supports it.
    pub fn jet(&self, p: f64) -> Option<Jet> {
        self.shape.eval(Jet::variable(p))
    }

    /// `f^(order)(p)` from the analytic oracle.
    pub fn derivative(&self, order: usize, p: f64) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(domain(format!(
                "derivative order {order} exceeds {MAX_ORDER}"
            )));
        }
        if !(p >= self.p_min && p <= 1.0) {
            return Err(domain(format!("price {p} outside [{}, 1]", self.p_min)));
        }
        self.jet(p).map(|j| j.derivative(order)).ok_or_else(|| {
            Error::Unsupported(format!("model '{}' has no derivative oracle", self.label))
        })
    }

    fn audit_range(&self) -> Result<()> {
        for p in self.domain().grid(AUDIT_GRID) {
            let v = self.demand(p);
            if !(0.0..=self.d_max).contains(&v) {
                return Err(Error::Construction(format!(
                    "model '{}': f({p}) = {v} leaves [0, {}]",
                    self.label, self.d_max
                )));
            }
        }
        Ok(())
    }

    /// Compares the oracle's first derivative with central differences at
    /// 100 fixed pseudo-random interior prices, to relative tolerance 1e-4.
    pub fn audit_derivative_oracle(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let lo = self.p_min + 10.0 * FD_STEP;
        let hi = 1.0 - 10.0 * FD_STEP;
        for _ in 0..FD_POINTS {
            let p = rng.random_range(lo..hi);
            let exact = self.derivative(1, p)?;
            let fd = (self.demand(p + FD_STEP) - self.demand(p - FD_STEP)) / (2.0 * FD_STEP);
            if !((exact - fd).abs() <= FD_TOL * exact.abs().max(1.0)) {
                return Err(Error::Construction(format!(
                    "model '{}': derivative oracle gives {exact} at {p}, finite difference {fd}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}
