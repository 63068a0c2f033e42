use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Least-squares fit of `ln(regret) = intercept + slope ln(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub horizons: Vec<f64>,
    pub mean_regrets: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Needs at least three strictly increasing horizons and positive regrets.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(domain(format!(
            "rate fit needs at least 3 horizons, got {}",
            points.len()
        )));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(domain(format!(
                "horizons must increase strictly: {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    for &(t, r) in points {
        if !(t > 0.0) || !(r > 0.0) || !r.is_finite() {
            return Err(domain(format!(
                "need positive horizon and regret, got T={t}, regret={r}"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    // a flat line fitted exactly explains everything
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(RateFit {
        horizons: points.iter().map(|p| p.0).collect(),
        mean_regrets: points.iter().map(|p| p.1).collect(),
        slope,
        intercept,
        r_squared,
    })
}
