//! Least-squares and ridge fits in the scaled monomial basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::{powers_into, Interval, PolyCoeffs};
use crate::error::{domain, Result};

/// Normal-equation condition numbers above this are treated as a
/// non-unique minimizer.
pub const MAX_NORMAL_CONDITION: f64 = 1e12;

fn check_prices(obs: &[(f64, f64)], interval: &Interval) -> Result<()> {
    for (i, &(p, d)) in obs.iter().enumerate() {
        if !interval.contains(p) {
            return Err(domain(format!(
                "observation {i}: price {p} outside [{}, {}]",
                interval.a(),
                interval.b()
            )));
        }
        if !d.is_finite() {
            return Err(domain(format!("observation {i}: demand {d} is not finite")));
        }
    }
    Ok(())
}

fn design_matrix(obs: &[(f64, f64)], interval: &Interval, degree: usize) -> DMatrix<f64> {
    let mut row = vec![0.0; degree + 1];
    let mut m = DMatrix::zeros(obs.len(), degree + 1);
    for (i, &(p, _)) in obs.iter().enumerate() {
        powers_into(interval.local(p), &mut row);
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Ordinary least squares in the scaled basis.
///
/// Returns the all-zero polynomial when the minimizer is not unique: fewer
/// than `degree + 1` observations, or a normal matrix whose condition number
/// exceeds [`MAX_NORMAL_CONDITION`].
pub fn fit_least_squares(
    obs: &[(f64, f64)],
    interval: &Interval,
    degree: usize,
) -> Result<PolyCoeffs> {
    check_prices(obs, interval)?;
    let zero = PolyCoeffs::zero(*interval, degree);
    if obs.len() < degree + 1 {
        return Ok(zero);
    }
    let design = design_matrix(obs, interval, degree);
    let rhs = DVector::from_iterator(obs.len(), obs.iter().map(|&(_, d)| d));
    let svd = design.svd(true, true);
    let s = &svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    // cond(P^T P) = cond(P)^2
    if smin <= 0.0 || (smax / smin).powi(2) > MAX_NORMAL_CONDITION {
        return Ok(zero);
    }
    match svd.solve(&rhs, 0.0) {
        Ok(theta) if theta.iter().all(|v| v.is_finite()) => {
            Ok(PolyCoeffs::new(*interval, theta.iter().copied().collect()))
        }
        _ => Ok(zero),
    }
}

/// Result of a unit-penalty ridge fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub coeffs: PolyCoeffs,
    /// `I + sum phi phi^T`.
    pub gram: DMatrix<f64>,
    pub sample_count: usize,
}

/// Running sufficient statistics of a ridge fit: the Gram matrix
/// `I + P^T P` and the moment vector `P^T d`, updated one observation at a
/// time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeAccumulator {
    interval: Interval,
    degree: usize,
    gram: Vec<f64>,
    moment: Vec<f64>,
    count: usize,
}

impl RidgeAccumulator {
    pub fn new(interval: Interval, degree: usize) -> Self {
        let k = degree + 1;
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            gram[i * k + i] = 1.0;
        }
        Self {
            interval,
            degree,
            gram,
            moment: vec![0.0; k],
            count: 0,
        }
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Rank-one update with an observation whose price lies in the interval.
    pub fn push(&mut self, p: f64, d: f64) {
        let k = self.degree + 1;
        let mut phi = [0.0; 16];
        let phi = &mut phi[..k];
        powers_into(self.interval.local(p), phi);
        for i in 0..k {
            self.moment[i] += phi[i] * d;
            for j in 0..k {
                self.gram[i * k + j] += phi[i] * phi[j];
            }
        }
        self.count += 1;
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let k = self.degree + 1;
        DMatrix::from_row_slice(k, k, &self.gram)
    }

    pub fn moment(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.moment)
    }

    /// Solves `(I + P^T P) theta = P^T d`. The Gram matrix is at least the
    /// identity, so the Cholesky factorization always exists.
    pub fn solve(&self) -> RidgeFit {
        let gram = self.gram();
        let chol = gram
            .clone()
            .cholesky()
            .expect("ridge Gram matrix is positive definite");
        let theta = chol.solve(&self.moment());
        RidgeFit {
            coeffs: PolyCoeffs::new(self.interval, theta.iter().copied().collect()),
            gram,
            sample_count: self.count,
        }
    }
}

/// Ridge regression with unit penalty; well defined for any number of
/// observations, including none.
pub fn fit_ridge(obs: &[(f64, f64)], interval: &Interval, degree: usize) -> Result<RidgeFit> {
    check_prices(obs, interval)?;
    let mut acc = RidgeAccumulator::new(*interval, degree);
    for &(p, d) in obs {
        acc.push(p, d);
    }
    Ok(acc.solve())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_data_is_reproduced() {
        let iv = Interval::new(0.2, 0.7).unwrap();
        let obs: Vec<_> = [0.2, 0.3, 0.45, 0.6, 0.7]
            .iter()
            .map(|&p| (p, 0.4))
            .collect();
        let fit = fit_least_squares(&obs, &iv, 2).unwrap();
        assert!((fit.coeffs()[0] - 0.4).abs() < 1e-10);
        assert!(fit.coeffs()[1].abs() < 1e-9 && fit.coeffs()[2].abs() < 1e-9);
    }

    #[test]
    fn underdetermined_fit_is_zero() {
        let iv = Interval::new(0.2, 0.7).unwrap();
        assert!(fit_least_squares(&[(0.3, 0.9)], &iv, 2).unwrap().is_zero());
        assert!(fit_least_squares(&[], &iv, 0).unwrap().is_zero());
        // three copies of one price: rank one
        let rep = vec![(0.3, 0.5); 3];
        assert!(fit_least_squares(&rep, &iv, 2).unwrap().is_zero());
    }

    #[test]
    fn linear_fit_matches_two_by_two_normal_equations() {
        let iv = Interval::new(0.2, 0.4).unwrap();
        let obs: Vec<_> = (0..50)
            .map(|i| {
                let p = 0.2 + 0.2 * i as f64 / 49.0;
                (p, 2.0 * (p - 0.2) / 0.2)
            })
            .collect();
        // oracle: explicit 2x2 normal equations
        let (mut s0, mut s1, mut s2, mut m0, mut m1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(p, d) in &obs {
            let t = (p - 0.2) / 0.2;
            s0 += 1.0;
            s1 += t;
            s2 += t * t;
            m0 += d;
            m1 += t * d;
        }
        let det = s0 * s2 - s1 * s1;
        let oracle = [(s2 * m0 - s1 * m1) / det, (s0 * m1 - s1 * m0) / det];
        let fit = fit_least_squares(&obs, &iv, 1).unwrap();
        assert!((fit.coeffs()[0] - oracle[0]).abs() < 1e-8);
        assert!((fit.coeffs()[1] - oracle[1]).abs() < 1e-8);
        assert!(fit.coeffs()[0].abs() < 1e-8 && (fit.coeffs()[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn ridge_trivial_cases() {
        let iv = Interval::new(0.2, 0.4).unwrap();
        let empty = fit_ridge(&[], &iv, 1).unwrap();
        assert_eq!(empty.coeffs.coeffs(), &[0.0, 0.0]);
        assert_eq!(empty.gram, DMatrix::identity(2, 2));
        assert_eq!(empty.sample_count, 0);

        let one = fit_ridge(&[(iv.midpoint(), 1.0)], &iv, 0).unwrap();
        assert!((one.coeffs.coeffs()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ridge_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let iv = Interval::new(0.3, 0.55).unwrap();
        let obs: Vec<_> = (0..100)
            .map(|_| (rng.random_range(0.3..=0.55), rng.random::<f64>()))
            .collect();
        let fit = fit_ridge(&obs, &iv, 3).unwrap();
        // oracle: build P explicitly and invert with LU
        let p = DMatrix::from_fn(obs.len(), 4, |i, j| {
            ((obs[i].0 - 0.3) / 0.25).powi(j as i32)
        });
        let d = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.1));
        let lhs = DMatrix::identity(4, 4) + p.transpose() * &p;
        let theta = lhs.lu().solve(&(p.transpose() * d)).unwrap();
        for (a, b) in fit.coeffs.coeffs().iter().zip(theta.iter()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        assert_eq!(fit.sample_count, 100);
    }

    #[test]
    fn prices_outside_interval_are_rejected() {
        let iv = Interval::new(0.2, 0.4).unwrap();
        assert!(fit_ridge(&[(0.5, 1.0)], &iv, 1).is_err());
        assert!(fit_least_squares(&[(0.1, 1.0)], &iv, 1).is_err());
    }
}
