//! Scaled monomial basis on a price interval.
//!
//! On `[a, b]` the basis functions are `t_m(p) = ((p - a) / (b - a))^m`, so
//! every component lies in `[0, 1]` and the basis reads `(1, 0, ..., 0)` at
//! the left endpoint and `(1, ..., 1)` at the right one.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    /// Builds `[a, b]` with `0 <= a < b <= 1`.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > 1.0 || a >= b {
            return Err(domain(format!(
                "interval [{a}, {b}] must satisfy 0 <= a < b <= 1"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    #[inline]
    pub fn contains(&self, p: f64) -> bool {
        p >= self.a && p <= self.b
    }

    /// Normalized coordinate of `p`, i.e. `1/2 + (p - (a+b)/2) / (b - a)`.
    #[inline]
    pub fn local(&self, p: f64) -> f64 {
        ((p - self.a) / self.width()).clamp(0.0, 1.0)
    }

    /// Price at normalized coordinate `t`; `t = 1` maps to `b` exactly.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        if t >= 1.0 {
            self.b
        } else {
            self.a + t * self.width()
        }
    }

    /// `n >= 2` evenly spaced points, endpoints included exactly.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let last = (n - 1) as f64;
        (0..n).map(|i| self.at(i as f64 / last)).collect()
    }

    /// Splits the interval into `n` equal cells; the last cell ends at `b` exactly.
    pub fn split(&self, n: usize) -> Vec<Interval> {
        assert!(n >= 1);
        let w = self.width() / n as f64;
        (0..n)
            .map(|j| {
                let a = self.a + j as f64 * w;
                let b = if j + 1 == n {
                    self.b
                } else {
                    self.a + (j + 1) as f64 * w
                };
                Interval { a, b }
            })
            .collect()
    }
}

/// Fills `out` with `t^0, ..., t^l` for a normalized coordinate `t`.
#[inline]
pub(crate) fn powers_into(t: f64, out: &mut [f64]) {
    let mut acc = 1.0;
    for slot in out.iter_mut() {
        *slot = acc;
        acc *= t;
    }
}

/// The feature vector `phi^(l)(p)` on `interval`.
pub fn scaled_basis(p: f64, interval: &Interval, degree: usize) -> Result<Vec<f64>> {
    if !interval.contains(p) {
        return Err(domain(format!(
            "price {p} outside [{}, {}]",
            interval.a, interval.b
        )));
    }
    let mut out = vec![0.0; degree + 1];
    powers_into(interval.local(p), &mut out);
    Ok(out)
}

/// Polynomial in the scaled basis of a fixed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    interval: Interval,
    coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(interval: Interval, coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a polynomial needs at least one coefficient"
        );
        Self { interval, coeffs }
    }

    pub fn zero(interval: Interval, degree: usize) -> Self {
        Self::new(interval, vec![0.0; degree + 1])
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation in the normalized coordinate; no domain check.
    #[inline]
    pub(crate) fn eval_unchecked(&self, p: f64) -> f64 {
        let t = self.interval.local(p);
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// `<phi(p), coeffs>`, defined on the polynomial's own interval.
pub fn eval_poly(poly: &PolyCoeffs, p: f64) -> Result<f64> {
    if !poly.interval.contains(p) {
        return Err(domain(format!(
            "price {p} outside [{}, {}]",
            poly.interval.a, poly.interval.b
        )));
    }
    Ok(poly.eval_unchecked(p))
}
