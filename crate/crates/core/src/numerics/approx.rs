//! Runtime check of the Taylor approximation bound
//! `sup_I |f - P_I| <= L |I|^beta_hat`.

use serde::{Deserialize, Serialize};

use super::basis::{Interval, PolyCoeffs};
use super::projection::sup_norm_diff;
use crate::environments::DemandModel;
use crate::error::{domain, Error, Result};
use crate::policies::holder_degree;

/// Sup-norm grid used by [`check_poly_approx`].
pub const APPROX_GRID: usize = 1001;
/// Absolute slack on the comparison, for rounding in the extremal cases.
pub const APPROX_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxCheck {
    pub sup_error: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Degree-`w(beta_hat)` Taylor polynomial of the model's demand at the left
/// endpoint, in the interval's scaled basis: `a_m = f^(m)(a) / m! * (b - a)^m`.
pub fn taylor_at_left(
    model: &DemandModel,
    interval: &Interval,
    degree: usize,
) -> Result<PolyCoeffs> {
    let jet = model.jet(interval.a()).ok_or_else(|| {
        Error::Unsupported(format!(
            "model '{}' has no derivative oracle",
            model.label()
        ))
    })?;
    let width = interval.width();
    let coeffs: Vec<f64> = (0..=degree)
        .map(|m| jet.coeffs()[m] * width.powi(m as i32))
        .collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical(format!(
            "derivatives of '{}' up to order {degree} are not finite at {}",
            model.label(),
            interval.a()
        )));
    }
    Ok(PolyCoeffs::new(*interval, coeffs))
}

pub fn check_poly_approx(
    model: &DemandModel,
    interval: &Interval,
    beta_hat: f64,
) -> Result<ApproxCheck> {
    if !(beta_hat > 0.0 && beta_hat <= model.beta()) {
        return Err(domain(format!(
            "beta_hat={beta_hat} must lie in (0, {}]",
            model.beta()
        )));
    }
    if interval.a() < model.p_min() {
        return Err(domain(format!(
            "interval [{}, {}] leaves the price domain [{}, 1]",
            interval.a(),
            interval.b(),
            model.p_min()
        )));
    }
    let degree = holder_degree(beta_hat)?;
    if degree > crate::numerics::jet::MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "Taylor degree {degree} exceeds the oracle order"
        )));
    }
    let taylor = taylor_at_left(model, interval, degree)?;
    let sup_error = sup_norm_diff(
        |p| model.demand(p),
        |p| taylor.eval_unchecked(p),
        interval,
        APPROX_GRID,
    );
    let bound = model.lipschitz() * interval.width().powf(beta_hat);
    Ok(ApproxCheck {
        sup_error,
        bound,
        ok: sup_error <= bound + APPROX_SLACK,
    })
}
