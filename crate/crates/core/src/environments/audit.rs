//! Numeric audits of Hölder constants on a grid, using jets for the
//! derivatives.

use crate::numerics::jet::Jet;
use crate::policies::holder_degree;

/// Grid estimate of the smallest `L` with `f` in the Hölder class `(beta, L)`
/// on `[lo, hi]`: the larger of `sup |f^(k)|` for `k <= w(beta)` and the
/// Hölder quotient of `f^(w(beta))` with exponent `beta - w(beta)`.
///
/// Quotients are taken over grid pairs whose separation is `2^i` or
/// `3 * 2^i` grid steps. The result is a lower bound of the true constant
/// that tightens with `points`.
pub fn holder_constant<F: Fn(Jet) -> Jet>(f: F, beta: f64, lo: f64, hi: f64, points: usize) -> f64 {
    let w = holder_degree(beta).expect("beta > 0");
    let s = beta - w as f64;
    let n = points.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let mut top = vec![0.0; n];
    let mut est = 0.0f64;
    for (i, slot) in top.iter_mut().enumerate() {
        let x = if i + 1 == n { hi } else { lo + i as f64 * h };
        let jet = f(Jet::variable(x));
        for k in 0..=w {
            est = est.max(jet.derivative(k).abs());
        }
        *slot = jet.derivative(w);
    }
    let mut steps = Vec::new();
    let mut base = 1usize;
    while base < n {
        steps.push(base);
        if 3 * base < n {
            steps.push(3 * base);
        }
        base *= 2;
    }
    for step in steps {
        let denom = (step as f64 * h).powf(s);
        for i in 0..n - step {
            est = est.max((top[i + step] - top[i]).abs() / denom);
        }
    }
    est
}

/// Largest `2^-k`, `k = k0..=k0+40`, for which `passes` holds.
pub fn largest_power_of_two<P: Fn(f64) -> bool>(k0: i32, passes: P) -> Option<f64> {
    (k0..=k0 + 40)
        .map(|k| (-(k as f64)).exp2())
        .find(|&c| passes(c))
}

/// Min and max of `f` over `points` evenly spaced points of `[lo, hi]`.
pub fn grid_range<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let n = points.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * h })
        .map(f)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), v| {
            (mn.min(v), mx.max(v))
        })
}
