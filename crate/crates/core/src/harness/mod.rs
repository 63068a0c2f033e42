//! Episodes, Monte Carlo aggregation, rate fits and coverage experiments.

pub mod coverage;
pub mod episode;
pub mod monte_carlo;
pub mod output;
pub mod rates;

pub use coverage::{
    beta_coverage, coverage_interval, occupancy_audit, CoverageReport, OccupancyReport,
};
pub use episode::{run_episode, run_policy, Diagnostics, PolicySpec, RunRecord, REGRET_TOL};
pub use monte_carlo::{monte_carlo, Aggregate, ExperimentSpec, MonteCarloResult};
pub use rates::{rate_fit, RateFit};
