use serde::{Deserialize, Serialize};

use super::model::DemandModel;
use crate::error::{domain, Result};

pub const DEFAULT_TRUTH_GRID: usize = 100_000;
/// Revenues within this of the maximum count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub p_star: f64,
    pub r_star: f64,
    pub grid_resolution: usize,
}

/// Golden-section search for a maximum of `r` on `[lo, hi]`.
fn golden_max<F: Fn(f64) -> f64>(r: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (r(x1), r(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = r(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = r(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Revenue maximizer over a uniform grid of `grid_resolution` prices.
///
/// The grid maximum is polished by a golden-section search between its grid
/// neighbours, and the model's known peak prices are evaluated too, so
/// `r_star` dominates every price a policy can play up to rounding. Among
/// prices within [`TIE_TOL`] of `r_star` the smallest wins.
pub fn optimal_price(model: &DemandModel, grid_resolution: usize) -> Result<GroundTruth> {
    if grid_resolution < 1000 {
        return Err(domain(format!(
            "grid resolution {grid_resolution} must be at least 1000"
        )));
    }
    let grid = model.domain().grid(grid_resolution);
    let values: Vec<f64> = grid.iter().map(|&p| model.revenue(p)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |bi, (i, &v)| if v > values[bi] { i } else { bi });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let mut extra = vec![golden_max(|p| model.revenue(p), lo, hi)];
    for &p in model.maximizers() {
        if p >= model.p_min() && p <= 1.0 {
            extra.push((p, model.revenue(p)));
        }
    }
    let r_star = extra.iter().map(|e| e.1).fold(values[best], f64::max);
    let p_star = grid
        .iter()
        .zip(&values)
        .map(|(&p, &v)| (p, v))
        .chain(extra.iter().copied())
        .filter(|&(_, v)| v >= r_star - TIE_TOL)
        .map(|(p, _)| p)
        .fold(f64::INFINITY, f64::min);
    Ok(GroundTruth {
        p_star,
        r_star,
        grid_resolution,
    })
}
