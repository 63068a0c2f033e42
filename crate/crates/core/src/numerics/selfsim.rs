//! Dyadic-cell projection errors and the self-similarity check built on them.
//!
//! A function is self-similar at scale `c` when the worst cell of the scale-`c`
//! dyadic partition cannot be approximated by its L2 polynomial projection
//! better than `M2 * 2^(-c * beta)` in sup norm.

use serde::{Deserialize, Serialize};

use super::basis::Interval;
use super::projection::{project_l2, sup_norm_diff};
use crate::error::{domain, Result};

/// Sup-norm grid per dyadic cell: 64 subintervals, so dyadic midpoints are
/// always grid points.
pub const DEFAULT_CELL_GRID: usize = 65;

/// Cells `[a + i/2^c, a + (i+1)/2^c] ∩ [0, 1]` for `i = 0..2^c`, dropping
/// empty and degenerate intersections.
pub fn dyadic_intervals(a: f64, c: u32) -> Result<Vec<Interval>> {
    if c == 0 || c > 40 {
        return Err(domain(format!("dyadic scale must be in 1..=40, got {c}")));
    }
    if !a.is_finite() {
        return Err(domain("dyadic anchor must be finite"));
    }
    let cells = 1u64 << c;
    let width = 1.0 / cells as f64;
    let mut out = Vec::new();
    for i in 0..cells {
        let lo = (a + i as f64 * width).max(0.0);
        let hi = (a + (i + 1) as f64 * width).min(1.0);
        if lo < hi {
            out.push(Interval::new(lo, hi)?);
        }
    }
    Ok(out)
}

/// Largest sup-norm projection error over the scale-`c` dyadic cells.
pub fn selfsim_deficit<F: Fn(f64) -> f64>(f: F, degree: usize, c: u32, a: f64) -> Result<f64> {
    selfsim_deficit_grid(&f, degree, c, a, DEFAULT_CELL_GRID)
}

pub fn selfsim_deficit_grid<F: Fn(f64) -> f64>(
    f: &F,
    degree: usize,
    c: u32,
    a: f64,
    grid_points: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for cell in dyadic_intervals(a, c)? {
        let proj = project_l2(f, &cell, degree)?;
        let err = sup_norm_diff(|p| proj.eval_unchecked(p), f, &cell, grid_points);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimReport {
    pub scale: u32,
    pub deficit: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Checks the lower bound `deficit >= M2 * 2^(-c * beta)` at every integer
/// scale `c` with `M1 < c <= c_max`.
#[allow(clippy::too_many_arguments)]
pub fn verify_selfsim<F: Fn(f64) -> f64>(
    f: F,
    beta: f64,
    degree: usize,
    m1: f64,
    m2: f64,
    c_max: u32,
    a: f64,
) -> Result<Vec<SelfSimReport>> {
    if !(m1 >= 0.0) || !(m2 > 0.0) {
        return Err(domain(format!(
            "need M1 >= 0 and M2 > 0, got M1={m1}, M2={m2}"
        )));
    }
    if f64::from(c_max) <= m1 {
        return Err(domain(format!("c_max={c_max} must exceed M1={m1}")));
    }
    let first = (m1.floor() as u32 + 1).max(1);
    (first..=c_max)
        .map(|c| {
            let deficit = selfsim_deficit(&f, degree, c, a)?;
            let threshold = m2 * (-(c as f64) * beta).exp2();
            Ok(SelfSimReport {
                scale: c,
                deficit,
                threshold,
                passed: deficit >= threshold,
            })
        })
        .collect()
}

/// Largest `M2` for which every listed scale passes: `min_c deficit_c * 2^(c * beta)`.
pub fn largest_passing_m2(deficits: &[(u32, f64)], beta: f64) -> f64 {
    let mut m2 = deficits
        .iter()
        .map(|&(c, d)| d * (c as f64 * beta).exp2())
        .fold(f64::INFINITY, f64::min);
    // the round trip through 2^(c beta) can overshoot by an ulp
    while m2 > 0.0
        && m2.is_finite()
        && deficits.iter().any(|&(c, d)| d < m2 * (-(c as f64) * beta).exp2())
    {
        m2 = m2.next_down();
    }
    m2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_examples() {
        let c1 = dyadic_intervals(0.0, 1).unwrap();
        assert_eq!(c1.len(), 2);
        assert_eq!(
            (c1[0].a(), c1[0].b(), c1[1].a(), c1[1].b()),
            (0.0, 0.5, 0.5, 1.0)
        );
        let c2 = dyadic_intervals(0.0, 2).unwrap();
        assert_eq!(c2.len(), 4);
        assert!(c2.iter().all(|v| (v.width() - 0.25).abs() < 1e-15));
        let shifted = dyadic_intervals(0.9, 2).unwrap();
        assert_eq!(shifted.len(), 1);
        assert_eq!((shifted[0].a(), shifted[0].b()), (0.9, 1.0));
        assert!(dyadic_intervals(0.0, 0).is_err());
    }

    #[test]
    fn square_against_constants_matches_closed_form() {
        // best L2 constant of x^2 on [l, r] is (l^2 + lr + r^2)/3; the sup error
        // sits at an endpoint
        let cell_err = |l: f64, r: f64| {
            let mean = (l * l + l * r + r * r) / 3.0;
            (mean - l * l).abs().max((r * r - mean).abs())
        };
        let oracle = cell_err(0.0, 0.5).max(cell_err(0.5, 1.0));
        let got = selfsim_deficit(|x| x * x, 0, 1, 0.0).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn polynomials_have_zero_deficit() {
        for c in 1..=6 {
            let d = selfsim_deficit(|x| 0.3 - x + 2.0 * x * x, 2, c, 0.0).unwrap();
            assert!(d < 1e-10, "c={c}: {d}");
        }
        let reports = verify_selfsim(|x| 1.0 + x, 1.0, 1, 0.0, 1e-6, 5, 0.0).unwrap();
        assert_eq!(reports.len(), 5);
        assert!(reports.iter().all(|r| !r.passed));
    }

    #[test]
    fn example_power_class_is_self_similar() {
        let f = |x: f64| 0.3 * x.powf(0.7) - 0.2 * x + 0.5;
        let deficits: Vec<_> = (3..=7)
            .map(|c| (c, selfsim_deficit(f, 0, c, 0.0).unwrap()))
            .collect();
        let m2 = largest_passing_m2(&deficits, 0.7);
        assert!(m2 > 0.0);
        let reports = verify_selfsim(f, 0.7, 0, 2.0, m2, 7, 0.0).unwrap();
        assert!(reports.iter().all(|r| r.passed));
    }

    #[test]
    fn verify_rejects_bad_parameters() {
        assert!(verify_selfsim(|x| x, 1.0, 0, 3.0, 1.0, 3, 0.0).is_err());
        assert!(verify_selfsim(|x| x, 1.0, 0, 0.0, 0.0, 3, 0.0).is_err());
    }
}
