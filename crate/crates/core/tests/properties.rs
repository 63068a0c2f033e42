use proptest::prelude::*;

use smoothprice::environments::{optimal_price, DemandModel, NoiseSpec};
use smoothprice::harness::{rate_fit, run_episode, PolicySpec};
use smoothprice::numerics::quadrature::{integrate, DEFAULT_TOL};
use smoothprice::numerics::selfsim::{largest_passing_m2, selfsim_deficit};
use smoothprice::numerics::{
    dyadic_intervals, eval_poly, fit_least_squares, fit_ridge, project_l2, scaled_basis, verify_selfsim, Interval, PolyCoeffs,
};
use smoothprice::policies::beta::beta_from_distance;
use smoothprice::policies::partition::UniformPartition;
use smoothprice::policies::{HsdpConfig, HsdpState, Observation};

fn interval() -> impl Strategy<Value = Interval> {
    (0.0..0.9f64, 0.05..1.0f64).prop_map(|(a, w)| Interval::new(a, (a + w).min(1.0)).unwrap())
}

fn poly_on(iv: Interval, degree: usize) -> impl Strategy<Value = PolyCoeffs> {
    prop::collection::vec(-2.0..2.0f64, degree + 1).prop_map(move |c| PolyCoeffs::new(iv, c))
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ridge_solves_its_normal_equations(
        iv in interval(),
        degree in 0usize..=4,
        raw in prop::collection::vec((0.0..=1.0f64, 0.0..2.0f64), 1..64),
    ) {
        let obs: Vec<(f64, f64)> = raw.iter().map(|&(s, d)| (iv.at(s), d)).collect();
        let fit = fit_ridge(&obs, &iv, degree).unwrap();
        let theta = fit.coeffs.coeffs();
        let k = degree + 1;
        // (I + P^T P) theta - P^T d, accumulated row by row
        let mut residual = theta.to_vec();
        let mut scale = 1.0f64;
        for &(p, d) in &obs {
            let phi = scaled_basis(p, &iv, degree).unwrap();
            let pred: f64 = phi.iter().zip(theta).map(|(a, b)| a * b).sum();
            for m in 0..k {
                residual[m] += phi[m] * (pred - d);
                scale = scale.max((phi[m] * d).abs());
            }
        }
        prop_assert!(max_abs(&residual) <= 1e-9 * scale * obs.len() as f64);
        prop_assert_eq!(fit.sample_count, obs.len());
    }

    #[test]
    fn least_squares_recovers_exact_polynomials(iv in interval(), degree in 0usize..=3, seed in any::<u64>()) {
        let coeffs: Vec<f64> = (0..=degree).map(|m| ((seed >> (8 * m)) & 0xff) as f64 / 128.0 - 1.0).collect();
        let truth = PolyCoeffs::new(iv, coeffs.clone());
        let n = 4 * (degree + 1);
        let obs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let p = iv.at((i as f64 + 0.5) / n as f64);
                (p, eval_poly(&truth, p).unwrap())
            })
            .collect();
        let fit = fit_least_squares(&obs, &iv, degree).unwrap();
        for (a, b) in fit.coeffs().iter().zip(&coeffs) {
            prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn projection_is_linear_and_idempotent(
        iv in interval(),
        degree in 0usize..=3,
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        w in 1.0..9.0f64,
    ) {
        let f = |p: f64| (w * p).sin();
        let g = |p: f64| (p + 0.3).sqrt();
        let pf = project_l2(f, &iv, degree).unwrap();
        let pg = project_l2(g, &iv, degree).unwrap();
        let pfg = project_l2(|p| a * f(p) + b * g(p), &iv, degree).unwrap();
        for m in 0..=degree {
            let lin = a * pf.coeffs()[m] + b * pg.coeffs()[m];
            prop_assert!((pfg.coeffs()[m] - lin).abs() <= 1e-7 * (1.0 + lin.abs()));
        }
        let again = project_l2(|p| eval_poly(&pf, p).unwrap(), &iv, degree).unwrap();
        for p in iv.grid(65) {
            let (x, y) = (eval_poly(&pf, p).unwrap(), eval_poly(&again, p).unwrap());
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn projection_reproduces_polynomials(
        (iv, poly) in (interval(), 0usize..=4).prop_flat_map(|(iv, d)| (Just(iv), poly_on(iv, d))),
    ) {
        let degree = poly.degree();
        let proj = project_l2(|p| eval_poly(&poly, p).unwrap(), &iv, degree).unwrap();
        for p in iv.grid(101) {
            prop_assert!((eval_poly(&proj, p).unwrap() - eval_poly(&poly, p).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn basis_depends_only_on_relative_position(iv in interval(), s in 0.0..=1.0f64, degree in 0usize..=5) {
        let phi = scaled_basis(iv.at(s), &iv, degree).unwrap();
        for (m, v) in phi.iter().enumerate() {
            prop_assert!((v - s.powi(m as i32)).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_residual_shrinks_with_degree(w in 1.0..12.0f64, c in 1u32..=4, degree in 0usize..=3) {
        let f = |p: f64| (w * p).cos() + p.sqrt();
        let residual = |l: usize| -> f64 {
            dyadic_intervals(0.0, c)
                .unwrap()
                .iter()
                .map(|iv| {
                    let proj = project_l2(f, iv, l).unwrap();
                    integrate(|p| (f(p) - eval_poly(&proj, p).unwrap()).powi(2), iv.a(), iv.b(), DEFAULT_TOL).unwrap()
                })
                .sum()
        };
        let (lo, hi) = (residual(degree), residual(degree + 1));
        prop_assert!(hi <= lo + 1e-10, "degree {degree}: {lo} -> {hi}");
    }

    #[test]
    fn fitted_m2_passes_every_scale(w in 1.0..12.0f64, beta in 0.2..3.0f64) {
        let f = |p: f64| (w * p).sin() + 0.1 * p.powf(0.3);
        let degree = beta.ceil() as usize - 1;
        let deficits: Vec<(u32, f64)> = (3..=6).map(|c| (c, selfsim_deficit(f, degree, c, 0.0).unwrap())).collect();
        let m2 = largest_passing_m2(&deficits, beta);
        prop_assume!(m2 > 0.0);
        let reports = verify_selfsim(f, beta, degree, 2.0, m2, 6, 0.0).unwrap();
        prop_assert!(reports.iter().all(|r| r.passed));
    }

    #[test]
    fn beta_estimate_falls_as_distance_grows(d1 in 1e-9..1.0f64, factor in 1.0001..100.0f64, ln_t in 2.0..30.0f64) {
        prop_assert!(beta_from_distance(d1 * factor, ln_t) < beta_from_distance(d1, ln_t));
    }

    #[test]
    fn rate_fit_ignores_constant_factors(scale in 0.01..100.0f64, exponent in 0.1..1.0f64, other in 0.01..100.0f64) {
        let pts = |s: f64| (10..15).map(|k| { let t = (1u64 << k) as f64; (t, s * t.powf(exponent)) }).collect::<Vec<_>>();
        let a = rate_fit(&pts(scale)).unwrap();
        let b = rate_fit(&pts(other)).unwrap();
        prop_assert!((a.slope - exponent).abs() <= 1e-9);
        prop_assert!((a.slope - b.slope).abs() <= 1e-9);
    }

    #[test]
    fn partition_locates_prices_in_their_cell(p_min in 0.01..0.9f64, n in 1usize..64, s in 0.0..=1.0f64) {
        let part = UniformPartition::new(p_min, n).unwrap();
        let p = p_min + s * (1.0 - p_min);
        let j = part.locate(p).unwrap();
        prop_assert!(part.cell(j).contains(p));
    }

    #[test]
    fn bin_statistics_track_updates(
        bins in 1usize..8,
        demands in prop::collection::vec(0.0..1.0f64, 0..40),
    ) {
        let cfg = HsdpConfig::new(1000, 1.0, 0.2, 1.0, 1.0).unwrap().with_bins(bins).unwrap();
        let mut state = HsdpState::new(cfg, &[]).unwrap();
        let mut revenue = vec![0.0; bins];
        let mut count = vec![0usize; bins];
        for (i, &d) in demands.iter().enumerate() {
            let t = i as u64 + 1;
            let dec = state.step(t).unwrap();
            state.update(Observation { round: t, price: dec.price, demand: d, bin: dec.bin }).unwrap();
            revenue[dec.bin] += dec.price * d;
            count[dec.bin] += 1;
        }
        prop_assert_eq!(state.occupancy(), count.clone());
        for (j, b) in state.bins().iter().enumerate() {
            prop_assert_eq!(b.count, b.history.len());
            prop_assert!((b.revenue_sum - revenue[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn empty_bins_are_visited_first_in_order(bins in 1usize..30) {
        let cfg = HsdpConfig::new(10_000, 1.0, 0.1, 1.0, 1.0).unwrap().with_bins(bins).unwrap();
        let mut state = HsdpState::new(cfg, &[]).unwrap();
        for t in 1..=bins as u64 {
            let dec = state.step(t).unwrap();
            prop_assert_eq!(dec.bin, t as usize - 1);
            prop_assert!(dec.ci.is_infinite());
            state.update(Observation { round: t, price: dec.price, demand: 0.5, bin: dec.bin }).unwrap();
        }
        prop_assert!(state.occupancy().iter().all(|&n| n == 1));
    }

    #[test]
    fn regret_is_nonnegative_and_nondecreasing(seed in any::<u64>(), beta_hat in 0.3..2.5f64, sigma in 0.0..0.2f64) {
        let model = DemandModel::custom("lin", |p| 1.2 - p, 1.0, 1.0, 0.1, 2.0).unwrap();
        let truth = optimal_price(&model, 10_001).unwrap();
        let policy = PolicySpec::Hsdp { beta_hat, lipschitz: None, bins: None, delta: None, price_grid: None };
        let rec = run_episode(&policy, &model, &NoiseSpec::gaussian(sigma).unwrap(), &truth, 300, seed).unwrap();
        prop_assert_eq!(rec.cumulative_regret.len(), 300);
        prop_assert!(rec.cumulative_regret[0] >= 0.0);
        prop_assert!(rec.cumulative_regret.windows(2).all(|w| w[1] >= w[0]));
        let again = run_episode(&policy, &model, &NoiseSpec::gaussian(sigma).unwrap(), &truth, 300, seed).unwrap();
        prop_assert_eq!(rec, again);
    }
}

/// The sup-norm deficit is not monotone in the degree: the L2 projection
/// minimises the mean square, and one degree more can raise the peak error.
#[test]
fn sup_deficit_can_grow_with_degree() {
    let f = |p: f64| (10.255745754591956 * p).cos() + p.sqrt();
    let d0 = selfsim_deficit(f, 0, 1, 0.0).unwrap();
    let d1 = selfsim_deficit(f, 1, 1, 0.0).unwrap();
    assert!(d1 > d0, "{d0} vs {d1}");
}
