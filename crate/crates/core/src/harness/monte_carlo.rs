use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, PolicySpec, RunRecord};
use crate::environments::{DemandModel, GroundTruth, NoiseSpec};
use crate::error::{domain, Error, Result};

/// Everything one replication needs besides its seed.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub policy: PolicySpec,
    pub model: DemandModel,
    pub noise: NoiseSpec,
    pub truth: GroundTruth,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub reps: usize,
    pub mean_trajectory: Vec<f64>,
    pub finals: Vec<f64>,
    pub mean_final: f64,
    /// Sample standard deviation of the finals over `sqrt(reps)`; zero for
    /// a single replication.
    pub stderr_final: f64,
}

impl Aggregate {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        let reps = records.len();
        if reps == 0 {
            return Err(domain("cannot aggregate zero replications"));
        }
        let len = records[0].cumulative_regret.len();
        let mut mean = vec![0.0; len];
        for r in records {
            if r.cumulative_regret.len() != len {
                return Err(domain("replications have different horizons"));
            }
            mean.iter_mut()
                .zip(&r.cumulative_regret)
                .for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= reps as f64);
        let finals: Vec<f64> = records.iter().map(RunRecord::final_regret).collect();
        let (mean_final, stderr_final) = mean_and_stderr(&finals);
        Ok(Self {
            reps,
            mean_trajectory: mean,
            finals,
            mean_final,
            stderr_final,
        })
    }
}

/// Arithmetic mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub records: Vec<RunRecord>,
    pub aggregate: Aggregate,
}

/// Runs `f(rep)` for `rep in 0..reps` on `workers` threads and returns the
/// results in replication order.
pub fn parallel_reps<T, F>(reps: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..reps).into_par_iter().map(&f).collect())
}

/// Replication `r` runs with seed `base_seed + r`. Any failed replication
/// fails the experiment.
pub fn monte_carlo(
    spec: &ExperimentSpec,
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<MonteCarloResult> {
    if reps == 0 {
        return Err(domain("reps must be at least 1"));
    }
    let records = parallel_reps(reps, workers, |r| {
        run_episode(
            &spec.policy,
            &spec.model,
            &spec.noise,
            &spec.truth,
            spec.horizon,
            base_seed.wrapping_add(r as u64),
        )
    })?;
    let aggregate = Aggregate::from_records(&records)?;
    Ok(MonteCarloResult { records, aggregate })
}
