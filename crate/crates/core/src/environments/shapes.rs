//! Closed-form demand shapes, generic over [`Real`] so the same formula
//! serves plain evaluation and exact derivatives.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::jet::Real;

/// `exp(-1/x)` for `x > 0`, zero otherwise. Below `1/700` the value
/// underflows anyway and the jet recurrences would produce `0 * inf`.
fn flat<R: Real>(x: R) -> R {
    if x.value() > 1.0 / 700.0 {
        (R::cst(-1.0) / x).exp()
    } else {
        R::cst(0.0)
    }
}

/// Smooth step from `u(0) = 1` to `u(1) = 0` with every derivative vanishing
/// at both ends.
pub fn smooth_step<R: Real>(x: R) -> R {
    let hi = flat(R::cst(1.0) - x);
    let lo = flat(x);
    if lo.value() == 0.0 {
        return R::cst(1.0);
    }
    if hi.value() == 0.0 {
        return R::cst(0.0);
    }
    hi / (hi + lo)
}

/// The bump `g` on `[0, 1]`: a cusp of order `beta` at the midpoint, tapered
/// smoothly to zero at both ends; extended by zero outside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpG {
    pub beta: f64,
    pub c1: f64,
}

impl BumpG {
    pub fn eval<R: Real>(&self, x: R) -> R {
        let xv = x.value();
        if !(0.0..=1.0).contains(&xv) {
            return R::cst(0.0);
        }
        let sigma = (x - R::cst(0.5)).abs();
        let profile = (R::cst(1.0) - sigma.powf(self.beta)) * R::cst(0.5 * self.c1);
        if sigma.value() < 0.25 {
            profile
        } else {
            let s = (R::cst(FRAC_PI_2) * smooth_step(R::cst(4.0) * sigma - R::cst(1.0))).sin();
            s * s * profile
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    /// `g(1/2) = c1 / 2`.
    pub fn peak(&self) -> f64 {
        0.5 * self.c1
    }
}

/// `c * exp(-1 / ((p - lo)(1 - p)))` on `(lo, 1)`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Psi {
    pub lo: f64,
    pub c: f64,
}

impl Psi {
    pub fn eval<R: Real>(&self, p: R) -> R {
        let v = p.value();
        if v <= self.lo || v >= 1.0 {
            return R::cst(0.0);
        }
        let q = (p - R::cst(self.lo)) * (R::cst(1.0) - p);
        if q.value() < 1.0 / 700.0 {
            return R::cst(0.0);
        }
        (R::cst(-1.0) / q).exp() * R::cst(self.c)
    }
}

/// A custom demand function without a derivative oracle.
#[derive(Clone)]
pub struct CustomFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomFn(..)")
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// `offset + slope (p - origin) + c0 (p - origin)^beta`.
    Power {
        offset: f64,
        slope: f64,
        c0: f64,
        beta: f64,
        origin: f64,
    },
    /// `(base + amplitude * g((p - start) / width)) / p`: revenue is `base`
    /// plus a bump on `[start, start + width]`.
    RevenueBump {
        base: f64,
        amplitude: f64,
        start: f64,
        width: f64,
        g: BumpG,
    },
    /// `(1/2 + psi_a(p) + [psi_b(p)]) / p` with
    /// `psi_a(p) = a^-alpha psi(a (p - p_min))` and
    /// `psi_b(p) = b^-beta psi(b (p - p_min) - m0)`.
    PsiPair {
        psi: Psi,
        alpha: f64,
        beta: f64,
        a: f64,
        b: f64,
        m0: f64,
        with_b: bool,
    },
    /// `sum_k coeffs[k] p^k`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    Custom(CustomFn),
}

impl Shape {
    /// Evaluates the shape; `None` for a custom function on a non-`f64` type.
    pub fn eval<R: Real>(&self, p: R) -> Option<R> {
        Some(match self {
            Shape::Power {
                offset,
                slope,
                c0,
                beta,
                origin,
            } => {
                let x = p - R::cst(*origin);
                let mut v = R::cst(*offset) + R::cst(*slope) * x;
                if *c0 != 0.0 {
                    v = v + R::cst(*c0) * x.powf(*beta);
                }
                v
            }
            Shape::RevenueBump {
                base,
                amplitude,
                start,
                width,
                g,
            } => {
                let bump = if *amplitude == 0.0 {
                    R::cst(0.0)
                } else {
                    g.eval((p - R::cst(*start)) / R::cst(*width)) * R::cst(*amplitude)
                };
                (R::cst(*base) + bump) / p
            }
            Shape::PsiPair {
                psi,
                alpha,
                beta,
                a,
                b,
                m0,
                with_b,
            } => {
                let lo = psi.lo;
                let pa = psi.eval(R::cst(*a) * (p - R::cst(lo))) * R::cst(a.powf(-alpha));
                let mut rev = R::cst(0.5) + pa;
                if *with_b {
                    let pb = psi.eval(R::cst(*b) * (p - R::cst(lo)) - R::cst(*m0))
                        * R::cst(b.powf(-beta));
                    rev = rev + pb;
                }
                rev / p
            }
            Shape::Polynomial { coeffs } => coeffs
                .iter()
                .rev()
                .fold(R::cst(0.0), |acc, &c| acc * p + R::cst(c)),
            Shape::Custom(_) => return None,
        })
    }

    pub fn value(&self, p: f64) -> f64 {
        match self {
            Shape::Custom(f) => (f.0)(p),
            other => other.eval(p).expect("closed-form shapes evaluate on f64"),
        }
    }

    pub fn has_derivatives(&self) -> bool {
        !matches!(self, Shape::Custom(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::jet::Jet;

    #[test]
    fn smooth_step_boundary_values() {
        assert_eq!(smooth_step(0.0), 1.0);
        assert_eq!(smooth_step(1.0), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        let d = smooth_step(Jet::variable(1e-4));
        assert!(d.derivative(1).abs() < 1e-12);
    }

    #[test]
    fn bump_values() {
        let g = BumpG { beta: 0.8, c1: 0.5 };
        assert_eq!(g.value(0.0), 0.0);
        assert_eq!(g.value(1.0), 0.0);
        assert!((g.value(0.5) - 0.25).abs() < 1e-15);
        // the two branches meet smoothly at sigma = 1/4
        let left = g.value(0.25 - 1e-9);
        let right = g.value(0.25 + 1e-9);
        assert!((left - right).abs() < 1e-8);
        // unique maximum at the midpoint
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            if i != 500 {
                assert!(g.value(x) < g.value(0.5));
            }
        }
    }

    #[test]
    fn psi_vanishes_at_the_ends() {
        let psi = Psi { lo: 0.5, c: 0.25 };
        assert_eq!(psi.eval(0.5), 0.0);
        assert_eq!(psi.eval(1.0), 0.0);
        assert!(psi.eval(0.75) > 0.0);
    }
}
