//! Smoothness-estimate coverage and exploration occupancy experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::monte_carlo::parallel_reps;
use crate::environments::{DemandModel, NoiseSpec};
use crate::error::{domain, Result};
use crate::policies::sadp::{explore_and_estimate, phase_occupancy};
use crate::policies::{BetaEstimate, SadpConfig};

/// `[beta - 4 (beta_max + 1) ln(ln T) / ln T, beta]`.
pub fn coverage_interval(beta: f64, beta_max: f64, horizon: u64) -> (f64, f64) {
    let ln_t = (horizon as f64).ln();
    (beta - 4.0 * (beta_max + 1.0) * ln_t.ln() / ln_t, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub horizon: u64,
    pub beta: f64,
    pub beta_max: f64,
    pub interval: (f64, f64),
    pub estimates: Vec<BetaEstimate>,
    pub hit_fraction: f64,
    pub median_abs_error: f64,
    pub clip_count: u64,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Runs only the exploration phases and the estimate, `reps` times with
/// seeds `base_seed + r`, and scores the estimates against the interval.
#[allow(clippy::too_many_arguments)]
pub fn beta_coverage(
    model: &DemandModel,
    noise: &NoiseSpec,
    horizon: u64,
    bounds: (f64, f64),
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<CoverageReport> {
    if reps == 0 {
        return Err(domain("reps must be at least 1"));
    }
    let (beta_min, beta_max) = bounds;
    if model.beta() > beta_max {
        return Err(domain(format!(
            "model smoothness {} exceeds beta_max={beta_max}",
            model.beta()
        )));
    }
    let config = SadpConfig::new(
        horizon,
        beta_min,
        beta_max,
        model.p_min(),
        model.d_max(),
        model.lipschitz(),
    )?;
    let runs = parallel_reps(reps, workers, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r as u64));
        let mut clips = 0;
        let out = explore_and_estimate(&config, model, noise, &mut rng, &mut clips)?;
        Ok((out.beta, clips))
    })?;
    let interval = coverage_interval(model.beta(), beta_max, horizon);
    let estimates: Vec<BetaEstimate> = runs.iter().map(|r| r.0).collect();
    let hits = estimates
        .iter()
        .filter(|e| e.value >= interval.0 && e.value <= interval.1)
        .count();
    let mut errors: Vec<f64> = estimates
        .iter()
        .map(|e| (e.value - model.beta()).abs())
        .collect();
    Ok(CoverageReport {
        horizon,
        beta: model.beta(),
        beta_max,
        interval,
        hit_fraction: hits as f64 / reps as f64,
        median_abs_error: median(&mut errors),
        clip_count: runs.iter().map(|r| r.1).sum(),
        estimates,
    })
}

/// Per-cell frequency of under-filled cells over repeated exploration
/// phases, against the bound `exp(-T_i / (50 K_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyReport {
    pub phase: u8,
    pub cells: usize,
    pub rounds: u64,
    /// A cell is under-filled when its count is below `T_i / (2 K_i)`.
    pub threshold: f64,
    pub phases: usize,
    pub violation_freq: Vec<f64>,
    pub stderr: Vec<f64>,
    pub bound: f64,
    pub passed: bool,
}

pub fn occupancy_audit(
    config: &SadpConfig,
    phase: u8,
    phases: usize,
    base_seed: u64,
    workers: usize,
) -> Result<OccupancyReport> {
    config.validate()?;
    if phases == 0 {
        return Err(domain("need at least one phase"));
    }
    let s = config.schedule();
    let (cells, rounds) = match phase {
        1 => (s.cells1, s.rounds1),
        2 => (s.cells2, s.rounds2),
        other => return Err(domain(format!("phase must be 1 or 2, got {other}"))),
    };
    let threshold = rounds as f64 / (2.0 * cells as f64);
    let counts = parallel_reps(phases, workers, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r as u64));
        phase_occupancy(config.p_min, cells, rounds, &mut rng)
    })?;
    let n = phases as f64;
    let mut violation_freq = vec![0.0; cells];
    for c in &counts {
        for (j, &k) in c.iter().enumerate() {
            if (k as f64) < threshold {
                violation_freq[j] += 1.0 / n;
            }
        }
    }
    let stderr: Vec<f64> = violation_freq
        .iter()
        .map(|f| (f * (1.0 - f) / n).sqrt())
        .collect();
    let bound = (-(rounds as f64) / (50.0 * cells as f64)).exp();
    let passed = violation_freq
        .iter()
        .zip(&stderr)
        .all(|(f, se)| *f <= bound + 3.0 * se);
    Ok(OccupancyReport {
        phase,
        cells,
        rounds,
        threshold,
        phases,
        violation_freq,
        stderr,
        bound,
        passed,
    })
}
