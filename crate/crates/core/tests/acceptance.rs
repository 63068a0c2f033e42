//! Acceptance criteria 1 through 9. Each test prints one PASS/FAIL line
//! and then asserts it; run with `--nocapture` to see the lines live.
//! The tests hold a shared lock so timings are not skewed by each other.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothprice::environments::{
    bump_c1, make_bump_g, make_power_selfsim, make_scaled_power, optimal_price, DemandModel, NoiseSpec,
};
use smoothprice::harness::{beta_coverage, monte_carlo, occupancy_audit, rate_fit, ExperimentSpec, PolicySpec};
use smoothprice::numerics::quadrature::{integrate, DEFAULT_TOL};
use smoothprice::numerics::{
    check_poly_approx, eval_poly, fit_ridge, project_l2, scaled_basis, sup_norm_diff, verify_selfsim, Interval, PolyCoeffs,
};
use smoothprice::policies::SadpConfig;

static SERIAL: Mutex<()> = Mutex::new(());

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn verdict(id: u32, name: &str, pass: bool, detail: String, elapsed: Duration) {
    println!(
        "criterion {id} {name}: {} ({detail}; {:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(pass, "criterion {id} {name} failed: {detail}");
}

fn random_interval(rng: &mut ChaCha8Rng, lo: f64, hi: f64, min_width: f64) -> Interval {
    loop {
        let x = rng.random_range(lo..=hi);
        let y = rng.random_range(lo..=hi);
        if (x - y).abs() >= min_width {
            return Interval::new(x.min(y), x.max(y)).unwrap();
        }
    }
}

fn bump(beta: f64) -> DemandModel {
    make_bump_g(beta, 1.0, bump_c1(beta, 1.0).unwrap()).unwrap()
}

#[test]
fn criterion_1_ridge_matches_dense_solve() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=64);
        let degree = rng.random_range(0..=4);
        let iv = random_interval(&mut rng, 0.0, 1.0, 0.05);
        let obs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(iv.a()..=iv.b()), rng.random_range(0.0..2.0)))
            .collect();
        let fit = fit_ridge(&obs, &iv, degree).unwrap();
        let k = degree + 1;
        let mut design = DMatrix::zeros(n, k);
        for (i, &(p, _)) in obs.iter().enumerate() {
            for (m, v) in scaled_basis(p, &iv, degree).unwrap().into_iter().enumerate() {
                design[(i, m)] = v;
            }
        }
        let d = DVector::from_iterator(n, obs.iter().map(|o| o.1));
        let lhs = DMatrix::identity(k, k) + design.transpose() * &design;
        let direct = lhs.lu().solve(&(design.transpose() * d)).unwrap();
        let got = DVector::from_column_slice(fit.coeffs.coeffs());
        worst = worst.max((got - &direct).amax() / direct.amax().max(f64::MIN_POSITIVE));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-8 && elapsed < Duration::from_secs(1);
    verdict(1, "ridge solver", pass, format!("max relative error {worst:.3e}"), elapsed);
}

#[test]
fn criterion_2_projection_reproduces_polynomials() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_sup = 0.0f64;
    let mut worst_orth = 0.0f64;
    for _ in 0..100 {
        let degree = rng.random_range(0..=4);
        let iv = random_interval(&mut rng, 0.0, 1.0, 0.01);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let poly = PolyCoeffs::new(iv, coeffs);
        let f = |p: f64| eval_poly(&poly, p).unwrap();
        let proj = project_l2(f, &iv, degree).unwrap();
        worst_sup = worst_sup.max(sup_norm_diff(f, |p| eval_poly(&proj, p).unwrap(), &iv, 1001));

        // residual of a non-polynomial target against every basis function
        let g = |p: f64| f(p) + (7.0 * p).sin();
        let pg = project_l2(g, &iv, degree).unwrap();
        for m in 0..=degree {
            let r = integrate(
                |p| (g(p) - eval_poly(&pg, p).unwrap()) * iv.local(p).powi(m as i32),
                iv.a(),
                iv.b(),
                DEFAULT_TOL,
            )
            .unwrap();
            worst_orth = worst_orth.max(r.abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_sup <= 1e-9 && worst_orth <= 1e-8 && elapsed < Duration::from_secs(5);
    verdict(
        2,
        "projection exactness",
        pass,
        format!("sup error {worst_sup:.3e}, orthogonality residual {worst_orth:.3e}"),
        elapsed,
    );
}

#[test]
fn criterion_3_polynomial_approximation_bound() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut models = Vec::new();
    for beta in [0.5, 1.0, 2.5] {
        models.push(bump(beta));
    }
    for beta in [0.3, 0.6, 1.0, 1.7, 2.5] {
        models.push(make_scaled_power(1.0, beta, 0.1, 1.0).unwrap());
    }
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for model in &models {
        for _ in 0..100 {
            let iv = random_interval(&mut rng, model.p_min(), 1.0, 1e-3);
            for beta_hat in [model.beta(), model.beta() / 2.0] {
                let c = check_poly_approx(model, &iv, beta_hat).unwrap();
                checks += 1;
                worst_ratio = worst_ratio.max(c.sup_error / c.bound);
                if !c.ok {
                    failures.push(format!("{} beta_hat={beta_hat} on [{}, {}]", model.label(), iv.a(), iv.b()));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(10);
    verdict(
        3,
        "approximation bound",
        pass,
        format!(
            "{} of {checks} checks failed, worst error/bound {worst_ratio:.3}{}",
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
        elapsed,
    );
}

#[test]
fn criterion_4_smoothness_estimate_coverage() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let model = make_power_selfsim(0.3, 0.7, -0.2, 0.1, 3.0).unwrap();
    let noise = NoiseSpec::gaussian(0.05).unwrap();
    let rep = beta_coverage(&model, &noise, 1 << 17, (0.1, 2.0), 32, 0, workers()).unwrap();
    let elapsed = start.elapsed();
    let mut values: Vec<f64> = rep.estimates.iter().map(|e| e.value).collect();
    values.sort_by(f64::total_cmp);
    let pass = rep.hit_fraction >= 0.6 && rep.median_abs_error <= 0.25;
    verdict(
        4,
        "smoothness coverage",
        pass,
        format!(
            "hit fraction {:.3} in [{:.4}, {:.4}], median |error| {:.4}, estimates {:.3}..{:.3}",
            rep.hit_fraction,
            rep.interval.0,
            rep.interval.1,
            rep.median_abs_error,
            values[0],
            values[values.len() - 1]
        ),
        elapsed,
    );
}

fn mean_finals(model: &DemandModel, policy: PolicySpec, horizons: &[u64], reps: usize) -> Vec<f64> {
    let truth = optimal_price(model, 100_000).unwrap();
    horizons
        .iter()
        .map(|&horizon| {
            let spec = ExperimentSpec {
                policy: policy.clone(),
                model: model.clone(),
                noise: NoiseSpec::gaussian(0.05).unwrap(),
                truth,
                horizon,
            };
            monte_carlo(&spec, reps, 0, workers()).unwrap().aggregate.mean_final
        })
        .collect()
}

fn hsdp(beta_hat: f64) -> PolicySpec {
    PolicySpec::Hsdp {
        beta_hat,
        lipschitz: None,
        bins: None,
        delta: None,
        price_grid: None,
    }
}

#[test]
fn criterion_5_regret_rates() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let model = bump(1.0);
    let horizons: Vec<u64> = (12..=16).map(|k| 1u64 << k).collect();
    let known = mean_finals(&model, hsdp(1.0), &horizons, 20);
    let adaptive = mean_finals(
        &model,
        PolicySpec::Sadp {
            beta_min: 0.1,
            beta_max: 2.0,
            lipschitz: None,
            price_grid: None,
            grid_per_bin: None,
        },
        &horizons,
        20,
    );
    let pts = |v: &[f64]| horizons.iter().zip(v).map(|(&t, &r)| (t as f64, r)).collect::<Vec<_>>();
    let fit_known = rate_fit(&pts(&known)).unwrap();
    let fit_adaptive = rate_fit(&pts(&adaptive)).unwrap();
    let ratio = adaptive[4] / known[4];
    let elapsed = start.elapsed();
    let pass = (0.50..=0.85).contains(&fit_known.slope)
        && fit_known.r_squared >= 0.95
        && (0.50..=0.90).contains(&fit_adaptive.slope)
        && ratio <= 3.0;
    verdict(
        5,
        "regret rates",
        pass,
        format!(
            "known-smoothness slope {:.3} (r2 {:.3}), adaptive slope {:.3} (r2 {:.3}), final ratio {ratio:.2}, \
             known finals {known:.1?}, adaptive finals {adaptive:.1?}",
            fit_known.slope, fit_known.r_squared, fit_adaptive.slope, fit_adaptive.r_squared
        ),
        elapsed,
    );
}

#[test]
fn criterion_6_overconfident_smoothness_costs_regret() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let model = make_power_selfsim(0.3, 0.5, -0.2, 0.1, 3.0).unwrap();
    let horizon = [1u64 << 16];
    let wrong = mean_finals(&model, hsdp(2.0), &horizon, 20)[0];
    let right = mean_finals(&model, hsdp(0.5), &horizon, 20)[0];
    let elapsed = start.elapsed();
    let ratio = wrong / right;
    verdict(
        6,
        "misspecified smoothness",
        ratio >= 1.5,
        format!("mean final regret {wrong:.2} at beta_hat=2 vs {right:.2} at beta_hat=0.5, ratio {ratio:.3}"),
        elapsed,
    );
}

#[test]
fn criterion_7_selfsim_verifier() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();
    let mut pass = true;
    for beta in [0.5, 1.0, 2.5] {
        let model = bump(beta);
        let params = model.selfsim().expect("the bump carries fitted parameters");
        let reports = verify_selfsim(
            |p| model.demand(p),
            beta,
            params.degree,
            params.m1,
            params.m2,
            7,
            model.p_min(),
        )
        .unwrap();
        let scales: Vec<u32> = reports.iter().map(|r| r.scale).collect();
        let bump_ok = params.m2 > 0.0 && scales == vec![3, 4, 5, 6, 7] && reports.iter().all(|r| r.passed);
        let mut poly_passes = 0;
        for _ in 0..20 {
            let degree = rng.random_range(0..=params.degree);
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
            let poly = PolyCoeffs::new(model.domain(), coeffs);
            let r = verify_selfsim(
                |p| eval_poly(&poly, p).unwrap(),
                beta,
                params.degree,
                params.m1,
                params.m2,
                7,
                model.p_min(),
            )
            .unwrap();
            poly_passes += r.iter().filter(|x| x.passed).count();
        }
        pass &= bump_ok && poly_passes == 0;
        notes.push(format!(
            "beta {beta}: l={} M2={:.3e} bump {} polynomial passes {poly_passes}",
            params.degree,
            params.m2,
            if bump_ok { "ok" } else { "failed" }
        ));
    }
    let elapsed = start.elapsed();
    verdict(
        7,
        "self-similarity verifier",
        pass && elapsed < Duration::from_secs(30),
        notes.join("; "),
        elapsed,
    );
}

#[test]
fn criterion_8_exploration_occupancy() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = SadpConfig::new(1 << 17, 0.1, 2.0, 0.1, 1.0, 1.0).unwrap();
    let rep = occupancy_audit(&cfg, 2, 10_000, 0, workers()).unwrap();
    let elapsed = start.elapsed();
    let worst = rep.violation_freq.iter().copied().fold(0.0, f64::max);
    verdict(
        8,
        "exploration occupancy",
        rep.passed && elapsed < Duration::from_secs(300),
        format!(
            "K2={} T2={} worst violation frequency {worst:.4} vs bound {:.4}",
            rep.cells, rep.rounds, rep.bound
        ),
        elapsed,
    );
}

#[test]
fn criterion_9_simulate_is_deterministic() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
  "schema_version": 1,
  "model": {"label": "bump_g"},
  "noise": {"kind": "gaussian_clipped", "sigma": 0.05},
  "policy": {"kind": "sadp", "beta_min": 0.1, "beta_max": 2.0},
  "horizons": [4096],
  "reps": 3,
  "base_seed": 11
}
"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let argv: Vec<String> = ["smoothprice", "simulate", "--config"]
            .iter()
            .map(|s| s.to_string())
            .chain([config.display().to_string(), "--out-dir".into(), out.display().to_string()])
            .collect();
        assert_eq!(smoothprice::cli::run_cli(&argv), 0);
        (
            std::fs::read(out.join("rounds.csv")).unwrap(),
            std::fs::read(out.join("summary.json")).unwrap(),
        )
    };
    let first = run("a");
    let second = run("b");
    let elapsed = start.elapsed();
    verdict(
        9,
        "determinism",
        first == second,
        format!("rounds.csv {} bytes, summary.json {} bytes", first.0.len(), first.1.len()),
        elapsed,
    );
}
