//! Smoothness-adaptive pricing: two uniform exploration phases at a fine
//! and a coarse granularity, a smoothness estimate from the distance of the
//! two piecewise fits, then binned optimistic pricing warm-started with
//! every exploration observation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::beta::{estimate_beta, BetaEstimate, PiecewisePoly};
use super::hsdp::{
    default_bins, HsdpConfig, HsdpPolicy, HsdpState, Observation, DEFAULT_PRICE_GRID,
};
use super::partition::UniformPartition;
use super::{holder_degree, PricingPolicy};
use crate::environments::{
    optimal_price, sample_demand, DemandModel, NoiseSpec, DEFAULT_TRUTH_GRID,
};
use crate::error::{domain, Error, Result};
use crate::harness::{run_policy, RunRecord};
use crate::numerics::fit_least_squares;
use crate::numerics::selfsim::DEFAULT_CELL_GRID;

fn default_price_grid() -> usize {
    DEFAULT_PRICE_GRID
}

fn default_grid_per_bin() -> usize {
    DEFAULT_CELL_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SadpConfig {
    pub horizon: u64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub p_min: f64,
    pub d_max: f64,
    pub lipschitz: f64,
    #[serde(default = "default_price_grid")]
    pub price_grid: usize,
    #[serde(default = "default_grid_per_bin")]
    pub grid_per_bin: usize,
}

/// Quantities derived from a [`SadpConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SadpSchedule {
    /// Fit degree `w(beta_max)`.
    pub degree: usize,
    pub k1: f64,
    pub k2: f64,
    pub cells1: usize,
    pub cells2: usize,
    pub rounds1: u64,
    pub rounds2: u64,
}

impl SadpSchedule {
    pub fn exploration_rounds(&self) -> u64 {
        self.rounds1 + self.rounds2
    }
}

impl SadpConfig {
    pub fn new(
        horizon: u64,
        beta_min: f64,
        beta_max: f64,
        p_min: f64,
        d_max: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        let cfg = Self {
            horizon,
            beta_min,
            beta_max,
            p_min,
            d_max,
            lipschitz,
            price_grid: DEFAULT_PRICE_GRID,
            grid_per_bin: DEFAULT_CELL_GRID,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `k1 = 1/(2 beta_max + 2)`, `k2 = 1/(4 beta_max + 2)`,
    /// `K_i = 2^floor(k_i log2 T)` and `T_i = floor(T^(1/2 + k_i))`.
    pub fn schedule(&self) -> SadpSchedule {
        let log2_t = (self.horizon as f64).log2();
        let k1 = 1.0 / (2.0 * self.beta_max + 2.0);
        let k2 = 1.0 / (4.0 * self.beta_max + 2.0);
        // both floors are nudged so exact integers are not lost to rounding
        let cells = |k: f64| 1usize << ((k * log2_t + 1e-9).floor().max(0.0) as u32);
        let rounds = |k: f64| {
            let v = (log2_t * (0.5 + k)).exp2();
            (v * (1.0 + 1e-12)).floor() as u64
        };
        SadpSchedule {
            degree: holder_degree(self.beta_max).expect("validated"),
            k1,
            k2,
            cells1: cells(k1),
            cells2: cells(k2),
            rounds1: rounds(k1),
            rounds2: rounds(k2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta_max && self.beta_max.is_finite()) {
            return Err(domain(format!(
                "need 0 < beta_min <= beta_max, got [{}, {}]",
                self.beta_min, self.beta_max
            )));
        }
        if !(self.p_min > 0.0 && self.p_min < 1.0) {
            return Err(domain(format!("p_min={} must lie in (0, 1)", self.p_min)));
        }
        if !(self.d_max > 0.0 && self.lipschitz > 0.0) {
            return Err(domain("d_max and L must be positive"));
        }
        if self.horizon < 2 {
            return Err(domain("horizon must be at least 2"));
        }
        if self.price_grid < 2 || self.grid_per_bin < 2 {
            return Err(domain(
                "price and estimation grids need at least two points",
            ));
        }
        let s = self.schedule();
        if s.degree > 15 {
            return Err(domain(format!(
                "beta_max={} gives a degree above 15",
                self.beta_max
            )));
        }
        if s.rounds1 + s.rounds2 >= self.horizon {
            return Err(domain(format!(
                "exploration T1 + T2 = {} leaves no pricing rounds in T = {}",
                s.rounds1 + s.rounds2,
                self.horizon
            )));
        }
        Ok(())
    }
}

/// A price drawn uniformly from the open interval `(p_min, 1)`.
pub fn explore_price(p_min: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let p = rng.random_range(p_min..1.0);
        if p > p_min {
            return p;
        }
    }
}

/// Per-cell least squares of degree `degree`; cells with fewer than
/// `degree + 2` observations get the zero polynomial.
pub fn fit_cells(
    obs: &[Observation],
    part: &UniformPartition,
    degree: usize,
) -> Result<PiecewisePoly> {
    let mut per_cell: Vec<Vec<(f64, f64)>> = vec![Vec::new(); part.len()];
    for o in obs {
        let j = part
            .locate(o.price)
            .ok_or_else(|| domain(format!("exploration price {} outside the domain", o.price)))?;
        per_cell[j].push((o.price, o.demand));
    }
    let pieces = per_cell
        .iter()
        .zip(part.cells())
        .map(|(data, cell)| {
            if data.len() < degree + 2 {
                Ok(crate::numerics::PolyCoeffs::zero(*cell, degree))
            } else {
                fit_least_squares(data, cell, degree)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewisePoly::new(pieces)
}

/// What the exploration phases produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationOutcome {
    pub beta: BetaEstimate,
    pub fine: PiecewisePoly,
    pub coarse: PiecewisePoly,
    /// Observations per fine cell in phase one.
    pub counts1: Vec<usize>,
    /// Observations per coarse cell in phase two.
    pub counts2: Vec<usize>,
    /// Phase-one observations followed by phase-two observations; `bin` is
    /// the cell index within the phase's own partition.
    pub observations: Vec<Observation>,
}

fn estimate_from(
    config: &SadpConfig,
    observations: Vec<Observation>,
) -> Result<ExplorationOutcome> {
    let s = config.schedule();
    let part1 = UniformPartition::new(config.p_min, s.cells1)?;
    let part2 = UniformPartition::new(config.p_min, s.cells2)?;
    let split = s.rounds1 as usize;
    let fine = fit_cells(&observations[..split], &part1, s.degree)?;
    let coarse = fit_cells(&observations[split..], &part2, s.degree)?;
    let beta = estimate_beta(
        &fine,
        &coarse,
        config.horizon as f64,
        (config.beta_min, config.beta_max),
        config.grid_per_bin,
    )?;
    let count = |obs: &[Observation], n: usize| {
        let mut c = vec![0usize; n];
        obs.iter().for_each(|o| c[o.bin] += 1);
        c
    };
    Ok(ExplorationOutcome {
        beta,
        counts1: count(&observations[..split], s.cells1),
        counts2: count(&observations[split..], s.cells2),
        fine,
        coarse,
        observations,
    })
}

/// Runs both exploration phases and the smoothness estimate, without the
/// pricing phase. Draw order per round: price, then demand noise.
pub fn explore_and_estimate(
    config: &SadpConfig,
    model: &DemandModel,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
    clips: &mut u64,
) -> Result<ExplorationOutcome> {
    config.validate()?;
    let s = config.schedule();
    let part1 = UniformPartition::new(config.p_min, s.cells1)?;
    let part2 = UniformPartition::new(config.p_min, s.cells2)?;
    let mut obs = Vec::with_capacity(s.exploration_rounds() as usize);
    for t in 1..=s.exploration_rounds() {
        let part = if t <= s.rounds1 { &part1 } else { &part2 };
        let price = explore_price(config.p_min, rng);
        let demand = sample_demand(model, noise, price, rng, clips);
        let bin = part
            .locate(price)
            .expect("exploration price inside the domain");
        obs.push(Observation {
            round: t,
            price,
            demand,
            bin,
        });
    }
    estimate_from(config, obs)
}

/// Cell counts of one exploration phase: `rounds` uniform prices binned
/// into `cells` cells. Consumes only price draws.
pub fn phase_occupancy(
    p_min: f64,
    cells: usize,
    rounds: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let part = UniformPartition::new(p_min, cells)?;
    let mut counts = vec![0usize; cells];
    for _ in 0..rounds {
        let p = explore_price(p_min, rng);
        counts[part.locate(p).expect("inside the domain")] += 1;
    }
    Ok(counts)
}

/// SADP as a round-by-round policy.
#[derive(Debug, Clone)]
pub struct SadpPolicy {
    config: SadpConfig,
    schedule: SadpSchedule,
    part1: UniformPartition,
    part2: UniformPartition,
    observations: Vec<Observation>,
    outcome: Option<ExplorationOutcome>,
    pricing: Option<HsdpPolicy>,
}

impl SadpPolicy {
    pub fn new(config: SadpConfig) -> Result<Self> {
        config.validate()?;
        let schedule = config.schedule();
        Ok(Self {
            part1: UniformPartition::new(config.p_min, schedule.cells1)?,
            part2: UniformPartition::new(config.p_min, schedule.cells2)?,
            observations: Vec::with_capacity(schedule.exploration_rounds() as usize),
            config,
            schedule,
            outcome: None,
            pricing: None,
        })
    }

    pub fn schedule(&self) -> &SadpSchedule {
        &self.schedule
    }

    pub fn outcome(&self) -> Option<&ExplorationOutcome> {
        self.outcome.as_ref()
    }

    pub fn pricing_state(&self) -> Option<&HsdpState> {
        self.pricing.as_ref().map(|p| p.state())
    }

    /// Pricing configuration once `beta_hat` is known: `N` from the full
    /// horizon, slack from `N`, horizon `T - T1 - T2`.
    pub fn pricing_config(&self, beta_hat: f64) -> Result<HsdpConfig> {
        let c = &self.config;
        let bins = default_bins(c.horizon, beta_hat);
        HsdpConfig::new(
            c.horizon - self.schedule.exploration_rounds(),
            beta_hat,
            c.p_min,
            c.d_max,
            c.lipschitz,
        )?
        .with_bins(bins)?
        .with_price_grid(c.price_grid)
    }

    fn hand_off(&mut self) -> Result<()> {
        let outcome = estimate_from(&self.config, std::mem::take(&mut self.observations))?;
        let cfg = self.pricing_config(outcome.beta.value)?;
        let state = HsdpState::new(cfg, &outcome.observations)?;
        self.pricing = Some(HsdpPolicy::from_state(state));
        self.outcome = Some(outcome);
        Ok(())
    }
}

impl PricingPolicy for SadpPolicy {
    fn next_price(&mut self, t: u64, rng: &mut ChaCha8Rng) -> Result<f64> {
        let explore = self.schedule.exploration_rounds();
        if t <= explore {
            return Ok(explore_price(self.config.p_min, rng));
        }
        match self.pricing.as_mut() {
            Some(p) => p.next_price(t - explore, rng),
            None => Err(Error::Consistency(format!(
                "round {t} reached before the hand-off"
            ))),
        }
    }

    fn observe(&mut self, t: u64, price: f64, demand: f64) -> Result<()> {
        let explore = self.schedule.exploration_rounds();
        if t > explore {
            return match self.pricing.as_mut() {
                Some(p) => p.observe(t - explore, price, demand),
                None => Err(Error::Consistency("pricing phase not initialized".into())),
            };
        }
        let part = if t <= self.schedule.rounds1 {
            &self.part1
        } else {
            &self.part2
        };
        let bin = part.locate(price).ok_or_else(|| {
            Error::Consistency(format!("exploration price {price} outside the domain"))
        })?;
        self.observations.push(Observation {
            round: t,
            price,
            demand,
            bin,
        });
        if t == explore {
            self.hand_off()?;
        }
        Ok(())
    }

    fn beta_hat(&self) -> Option<f64> {
        self.outcome.as_ref().map(|o| o.beta.value)
    }

    fn exploration_rounds(&self) -> u64 {
        self.schedule.exploration_rounds()
    }

    fn occupancy(&self) -> Vec<usize> {
        self.pricing
            .as_ref()
            .map(|p| p.occupancy())
            .unwrap_or_default()
    }
}

/// One full SADP episode against `model`.
pub fn sadp_run(
    config: &SadpConfig,
    model: &DemandModel,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<RunRecord> {
    let truth = optimal_price(model, DEFAULT_TRUTH_GRID)?;
    let mut policy = SadpPolicy::new(config.clone())?;
    run_policy(
        &mut policy,
        "sadp",
        model,
        noise,
        &truth,
        config.horizon,
        seed,
    )
}
