use nalgebra::{DMatrix, DVector};

use super::basis::{Interval, PolyCoeffs};
use super::quadrature::{integrate_vec, DEFAULT_TOL};
use crate::error::{Error, Result};

/// L2 projection of `f` onto polynomials of degree `<= degree` over
/// `interval`, in that interval's scaled basis.
///
/// Works on the reference cell: with `t = (p - a) / (b - a)` the Gram
/// matrix is `int_0^1 t^(i+j) dt` and the moments are
/// `int_0^1 f(a + (b - a) t) t^i dt`, both by adaptive Gauss–Legendre.
pub fn project_l2<F: Fn(f64) -> f64>(
    f: F,
    interval: &Interval,
    degree: usize,
) -> Result<PolyCoeffs> {
    project_l2_tol(f, interval, degree, DEFAULT_TOL)
}

pub fn project_l2_tol<F: Fn(f64) -> f64>(
    f: F,
    interval: &Interval,
    degree: usize,
    tol: f64,
) -> Result<PolyCoeffs> {
    let k = degree + 1;
    let gram_len = 2 * degree + 1;
    let integrand = |t: f64, out: &mut [f64]| {
        let v = f(interval.at(t));
        let mut pow = 1.0;
        for m in 0..gram_len {
            out[m] = pow;
            if m < k {
                out[gram_len + m] = v * pow;
            }
            pow *= t;
        }
    };
    let ints = integrate_vec(&integrand, 0.0, 1.0, gram_len + k, tol).map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "L2 projection on [{}, {}]: {msg}",
            interval.a(),
            interval.b()
        )),
        other => other,
    })?;
    let gram = DMatrix::from_fn(k, k, |i, j| ints[i + j]);
    let moments = DVector::from_iterator(k, ints[gram_len..].iter().copied());
    let theta = gram
        .cholesky()
        .ok_or_else(|| {
            Error::Numerical(format!(
                "projection Gram matrix of degree {degree} is singular"
            ))
        })?
        .solve(&moments);
    Ok(PolyCoeffs::new(*interval, theta.iter().copied().collect()))
}

/// Grid maximum of `|f - g|` over `grid_points >= 2` evenly spaced points,
/// endpoints included.
pub fn sup_norm_diff<F, G>(f: F, g: G, interval: &Interval, grid_points: usize) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    interval
        .grid(grid_points.max(2))
        .into_iter()
        .map(|p| (f(p) - g(p)).abs())
        .fold(0.0, f64::max)
}
