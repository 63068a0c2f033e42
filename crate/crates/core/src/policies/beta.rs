//! Two-scale smoothness estimate from the sup distance of two piecewise fits.

use serde::{Deserialize, Serialize};

use super::partition::UniformPartition;
use crate::error::{domain, Error, Result};
use crate::numerics::PolyCoeffs;

/// Piecewise polynomial over an equal partition of `[p_min, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    pieces: Vec<PolyCoeffs>,
}

impl PiecewisePoly {
    /// The pieces must tile `[p_min, 1]` in order with equal widths.
    pub fn new(pieces: Vec<PolyCoeffs>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| domain("a piecewise fit needs at least one piece"))?;
        let p_min = first.interval().a();
        let part = UniformPartition::new(p_min, pieces.len())?;
        for (cell, piece) in part.cells().iter().zip(&pieces) {
            let iv = piece.interval();
            if (iv.a() - cell.a()).abs() > 1e-12 || (iv.b() - cell.b()).abs() > 1e-12 {
                return Err(domain(format!(
                    "piece [{}, {}] does not match cell [{}, {}]",
                    iv.a(),
                    iv.b(),
                    cell.a(),
                    cell.b()
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[PolyCoeffs] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn p_min(&self) -> f64 {
        self.pieces[0].interval().a()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub value: f64,
    pub raw_sup_norm: f64,
    pub clamped: bool,
}

/// `-ln(D) / ln T - ln(ln T) / ln T`, before clamping.
pub fn beta_from_distance(distance: f64, ln_t: f64) -> f64 {
    -distance.ln() / ln_t - ln_t.ln() / ln_t
}

/// Smoothness estimate from the grid sup distance between a fine fit and a
/// coarse fit.
///
/// The grid has `grid_per_bin` evenly spaced points (ends included) on
/// every cell of the finer partition; the coarse fit is evaluated on the
/// piece covering that cell. A zero distance gives `beta_max`.
pub fn estimate_beta(
    fine: &PiecewisePoly,
    coarse: &PiecewisePoly,
    horizon: f64,
    bounds: (f64, f64),
    grid_per_bin: usize,
) -> Result<BetaEstimate> {
    let (beta_min, beta_max) = bounds;
    if !(beta_min > 0.0 && beta_min <= beta_max) {
        return Err(domain(format!(
            "need 0 < beta_min <= beta_max, got [{beta_min}, {beta_max}]"
        )));
    }
    if !(horizon > 1.0) {
        return Err(domain(format!("horizon {horizon} must exceed 1")));
    }
    if grid_per_bin < 2 {
        return Err(domain("need at least two grid points per cell"));
    }
    if (fine.p_min() - coarse.p_min()).abs() > 1e-12 {
        return Err(domain("the two fits cover different domains"));
    }
    let (fine, coarse) = if fine.len() >= coarse.len() {
        (fine, coarse)
    } else {
        (coarse, fine)
    };
    let coarse_part = UniformPartition::new(coarse.p_min(), coarse.len())?;
    let mut raw = 0.0f64;
    for piece in fine.pieces() {
        let cell = piece.interval();
        let host = coarse_part
            .locate(cell.midpoint())
            .expect("midpoint inside the domain");
        let other = &coarse.pieces()[host];
        for p in cell.grid(grid_per_bin) {
            raw = raw.max((piece.eval_unchecked(p) - other.eval_unchecked(p)).abs());
        }
    }
    if !raw.is_finite() {
        return Err(Error::Numerical(format!(
            "sup distance {raw} is not finite"
        )));
    }
    if raw == 0.0 {
        return Ok(BetaEstimate {
            value: beta_max,
            raw_sup_norm: 0.0,
            clamped: true,
        });
    }
    let value = beta_from_distance(raw, horizon.ln());
    Ok(BetaEstimate {
        value: value.clamp(beta_min, beta_max),
        raw_sup_norm: raw,
        clamped: !(beta_min..=beta_max).contains(&value),
    })
}
