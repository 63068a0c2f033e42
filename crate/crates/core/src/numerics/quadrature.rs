//! Composite Gauss–Legendre quadrature with adaptive bisection.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const GL_POINTS: usize = 16;
/// Absolute tolerance on successive panel estimates.
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 50;

/// Nodes and weights of the 16-point rule on `[-1, 1]`, computed once by
/// Newton iteration on the Legendre recurrence.
fn rule() -> &'static ([f64; GL_POINTS], [f64; GL_POINTS]) {
    static RULE: OnceLock<([f64; GL_POINTS], [f64; GL_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut x = [0.0; GL_POINTS];
        let mut w = [0.0; GL_POINTS];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        (x, w)
    })
}

/// Single-panel estimate of a vector-valued integral over `[a, b]`.
fn panel<F: Fn(f64, &mut [f64])>(
    f: &F,
    a: f64,
    b: f64,
    dim: usize,
    scratch: &mut [f64],
) -> Vec<f64> {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; dim];
    for k in 0..GL_POINTS {
        f(mid + half * x[k], scratch);
        for (s, &v) in acc.iter_mut().zip(scratch.iter()) {
            *s += w[k] * v;
        }
    }
    acc.iter_mut().for_each(|s| *s *= half);
    acc
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

struct Adaptive<'f, F> {
    f: &'f F,
    dim: usize,
    tol: f64,
    total_width: f64,
    unresolved: f64,
    scratch: Vec<f64>,
}

impl<F: Fn(f64, &mut [f64])> Adaptive<'_, F> {
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        whole: Vec<f64>,
        depth: u32,
        out: &mut [f64],
    ) -> Result<()> {
        let m = 0.5 * (a + b);
        let left = panel(self.f, a, m, self.dim, &mut self.scratch);
        let right = panel(self.f, m, b, self.dim, &mut self.scratch);
        let split: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        if split.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let diff = max_diff(&split, &whole);
        // Panels touching a point singularity keep a tolerance floor so the
        // recursion terminates; at most a few such panels exist per level.
        let local_tol = self.tol * ((b - a) / self.total_width).max(1.0 / 64.0);
        if diff < local_tol {
            out.iter_mut().zip(&split).for_each(|(o, s)| *o += s);
            return Ok(());
        }
        if depth >= MAX_DEPTH {
            self.unresolved += diff;
            out.iter_mut().zip(&split).for_each(|(o, s)| *o += s);
            return Ok(());
        }
        self.refine(a, m, left, depth + 1, out)?;
        self.refine(m, b, right, depth + 1, out)
    }
}

/// Integrates the vector-valued `f` over `[a, b]`.
///
/// `f(x, out)` writes `dim` values. Panels are bisected until a panel's
/// estimate and the sum of its halves agree within `tol` (scaled by the
/// panel's share of the interval). Fails when the bisection depth runs out
/// with more than `tol` of unresolved disagreement.
pub fn integrate_vec<F: Fn(f64, &mut [f64])>(
    f: &F,
    a: f64,
    b: f64,
    dim: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut scratch = vec![0.0; dim];
    let whole = panel(f, a, b, dim, &mut scratch);
    let mut state = Adaptive {
        f,
        dim,
        tol,
        total_width: b - a,
        unresolved: 0.0,
        scratch,
    };
    let mut out = vec![0.0; dim];
    state.refine(a, b, whole, 0, &mut out)?;
    if state.unresolved > tol {
        return Err(Error::Numerical(format!(
            "quadrature on [{a}, {b}] did not converge: {:.3e} unresolved after {MAX_DEPTH} bisections",
            state.unresolved
        )));
    }
    Ok(out)
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let g = |x: f64, out: &mut [f64]| out[0] = f(x);
    Ok(integrate_vec(&g, a, b, 1, tol)?[0])
}
