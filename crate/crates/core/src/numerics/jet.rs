//! Truncated Taylor arithmetic used as an exact derivative oracle.
//!
//! Demand shapes are written once against [`Real`] and evaluated either on
//! `f64` or on a [`Jet`], whose coefficient `k` is `f^(k)(x) / k!`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order a jet carries.
pub const MAX_ORDER: usize = 5;
const LEN: usize = MAX_ORDER + 1;

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powf(self, e: f64) -> Self;
    fn abs(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    /// The independent variable at `x`.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x;
        c[1] = 1.0;
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64; LEN] {
        &self.c
    }

    /// `f^(order)(x)` recovered from the Taylor coefficient.
    pub fn derivative(&self, order: usize) -> f64 {
        assert!(
            order <= MAX_ORDER,
            "jets carry derivatives up to order {MAX_ORDER}"
        );
        let fact: f64 = (1..=order).map(|k| k as f64).product();
        self.c[order] * fact
    }

    fn scale(mut self, s: f64) -> Self {
        self.c.iter_mut().for_each(|v| *v *= s);
        self
    }

    fn powi(self, n: u32) -> Self {
        let mut out = Jet::cst(1.0);
        for _ in 0..n {
            out = out * self;
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        Jet {
            c: std::array::from_fn(|k| (0..=k).map(|i| self.c[i] * rhs.c[k - i]).sum()),
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            let acc: f64 = (1..=k).map(|i| rhs.c[i] * c[k - i]).sum();
            c[k] = (self.c[k] - acc) / rhs.c[0];
        }
        Jet { c }
    }
}

impl Real for Jet {
    fn cst(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c }
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn exp(self) -> Self {
        let mut e = [0.0; LEN];
        e[0] = self.c[0].exp();
        for k in 1..LEN {
            let acc: f64 = (1..=k).map(|i| i as f64 * self.c[i] * e[k - i]).sum();
            e[k] = acc / k as f64;
        }
        Jet { c: e }
    }

    fn ln(self) -> Self {
        let mut l = [0.0; LEN];
        l[0] = self.c[0].ln();
        for k in 1..LEN {
            let acc: f64 = (1..k).map(|i| i as f64 * l[i] * self.c[k - i]).sum();
            l[k] = (self.c[k] - acc / k as f64) / self.c[0];
        }
        Jet { c: l }
    }

    fn sin(self) -> Self {
        sin_cos(self).0
    }

    fn cos(self) -> Self {
        sin_cos(self).1
    }

    fn powf(self, e: f64) -> Self {
        if self.c[0] > 0.0 {
            return (self.ln().scale(e)).exp();
        }
        if e >= 0.0 && e.fract() == 0.0 {
            return self.powi(e as u32);
        }
        // (a1 dt + ...)^e at a zero base: orders below e vanish, orders above
        // e blow up.
        let mut c = [0.0; LEN];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = if (k as f64) < e { 0.0 } else { f64::INFINITY };
        }
        Jet { c }
    }

    fn abs(self) -> Self {
        let lead = self.c.iter().copied().find(|&v| v != 0.0).unwrap_or(0.0);
        if lead < 0.0 {
            -self
        } else {
            self
        }
    }
}

fn sin_cos(x: Jet) -> (Jet, Jet) {
    let mut s = [0.0; LEN];
    let mut c = [0.0; LEN];
    s[0] = x.c[0].sin();
    c[0] = x.c[0].cos();
    for k in 1..LEN {
        let mut sa = 0.0;
        let mut ca = 0.0;
        for i in 1..=k {
            sa += i as f64 * x.c[i] * c[k - i];
            ca += i as f64 * x.c[i] * s[k - i];
        }
        s[k] = sa / k as f64;
        c[k] = -ca / k as f64;
    }
    (Jet { c: s }, Jet { c })
}
