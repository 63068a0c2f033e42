//! Binned optimistic pricing with a known smoothness level.
//!
//! The price range is split into `N` bins. Each round the bin with the
//! largest revenue index `tau_j / n_j + CI_j` is chosen (unvisited bins
//! first), a ridge fit of the bin's data is refreshed, and the price
//! maximizing an optimistic revenue over a grid of the bin is played.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::partition::UniformPartition;
use super::{holder_degree, PricingPolicy};
use crate::error::{domain, Error, Result};
use crate::numerics::basis::powers_into;
use crate::numerics::{Interval, RidgeAccumulator};

pub const DEFAULT_PRICE_GRID: usize = 256;
pub const SNAPSHOT_VERSION: u32 = 1;

/// `ceil(T^(1 / (2 beta + 1)))`, guarded against rounding just above an
/// exact integer.
pub fn default_bins(horizon: u64, beta_hat: f64) -> usize {
    let v = (horizon as f64).powf(1.0 / (2.0 * beta_hat + 1.0));
    ((v * (1.0 - 1e-12)).ceil() as usize).max(1)
}

/// `L ((1 - p_min) / N)^beta_hat`.
pub fn auto_delta(lipschitz: f64, p_min: f64, bins: usize, beta_hat: f64) -> f64 {
    lipschitz * ((1.0 - p_min) / bins as f64).powf(beta_hat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsdpConfig {
    pub horizon: u64,
    pub beta_hat: f64,
    pub p_min: f64,
    pub d_max: f64,
    pub bins: usize,
    pub lipschitz: f64,
    pub delta: f64,
    pub price_grid: usize,
}

impl HsdpConfig {
    /// Bin count and slack derived from the horizon and `beta_hat`.
    pub fn new(
        horizon: u64,
        beta_hat: f64,
        p_min: f64,
        d_max: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        if !(beta_hat > 0.0) {
            return Err(domain(format!("beta_hat={beta_hat} must be positive")));
        }
        let bins = default_bins(horizon, beta_hat);
        let cfg = Self {
            horizon,
            beta_hat,
            p_min,
            d_max,
            bins,
            lipschitz,
            delta: auto_delta(lipschitz, p_min, bins, beta_hat),
            price_grid: DEFAULT_PRICE_GRID,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides the bin count and re-derives the slack.
    pub fn with_bins(mut self, bins: usize) -> Result<Self> {
        self.bins = bins;
        self.delta = auto_delta(self.lipschitz, self.p_min, bins, self.beta_hat);
        self.validate()?;
        Ok(self)
    }

    pub fn with_price_grid(mut self, points: usize) -> Result<Self> {
        self.price_grid = points;
        self.validate()?;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        holder_degree(self.beta_hat).expect("validated")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(domain("horizon must be at least 1"));
        }
        if !(self.beta_hat > 0.0 && self.beta_hat.is_finite()) {
            return Err(domain(format!(
                "beta_hat={} must be positive",
                self.beta_hat
            )));
        }
        if !(self.p_min > 0.0 && self.p_min < 1.0) {
            return Err(domain(format!("p_min={} must lie in (0, 1)", self.p_min)));
        }
        if !(self.d_max > 0.0 && self.d_max.is_finite()) {
            return Err(domain(format!("d_max={} must be positive", self.d_max)));
        }
        if self.bins < 1 {
            return Err(domain("need at least one bin"));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(domain(format!("L={} must be positive", self.lipschitz)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(domain(format!(
                "delta={} must be finite and >= 0",
                self.delta
            )));
        }
        if self.price_grid < 2 {
            return Err(domain("the in-bin price grid needs at least two points"));
        }
        if self.degree() > 15 {
            return Err(domain(format!(
                "beta_hat={} gives a degree above 15",
                self.beta_hat
            )));
        }
        Ok(())
    }
}

/// One round's record: `bin` is the index of the bin the price was charged to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub round: u64,
    pub price: f64,
    pub demand: f64,
    pub bin: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinState {
    pub interval: Interval,
    pub history: Vec<Observation>,
    /// `sum p * d` over the history.
    pub revenue_sum: f64,
    pub count: usize,
}

impl BinState {
    fn new(interval: Interval) -> Self {
        Self {
            interval,
            history: Vec::new(),
            revenue_sum: 0.0,
            count: 0,
        }
    }

    pub fn mean_revenue(&self) -> Option<f64> {
        (self.count > 0).then(|| self.revenue_sum / self.count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub price: f64,
    pub bin: usize,
    /// Confidence width of the chosen bin; infinite for an unvisited bin.
    pub ci: f64,
    pub gamma: f64,
}

/// Versioned dump of an [`HsdpState`]; restoring it replays every bin's
/// history in order, which reproduces the live state exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsdpSnapshot {
    pub version: u32,
    pub config: HsdpConfig,
    pub bins: Vec<Vec<Observation>>,
    pub pending: Option<(u64, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsdpState {
    config: HsdpConfig,
    degree: usize,
    partition: UniformPartition,
    bins: Vec<BinState>,
    ridge: Vec<RidgeAccumulator>,
    /// Basis powers at the in-bin grid, `price_grid x (degree + 1)` row-major.
    grid_basis: Vec<f64>,
    pending: Option<(u64, usize)>,
}

pub fn hsdp_init(config: HsdpConfig, warm_history: Option<&[Observation]>) -> Result<HsdpState> {
    HsdpState::new(config, warm_history.unwrap_or(&[]))
}

pub fn hsdp_step(state: &mut HsdpState, t: u64, total_t: u64) -> Result<Decision> {
    state.step_with_horizon(t, total_t)
}

pub fn hsdp_update(state: &mut HsdpState, obs: Observation) -> Result<()> {
    state.update(obs)
}

impl HsdpState {
    /// Empty bins, then every warm observation routed by price.
    pub fn new(config: HsdpConfig, warm_history: &[Observation]) -> Result<Self> {
        let mut state = Self::empty(config)?;
        for (i, obs) in warm_history.iter().enumerate() {
            state.check_record(i, obs)?;
            let bin = state.partition.locate(obs.price).expect("price checked");
            state.record(Observation { bin, ..*obs });
        }
        Ok(state)
    }

    fn empty(config: HsdpConfig) -> Result<Self> {
        config.validate()?;
        let degree = config.degree();
        let partition = UniformPartition::new(config.p_min, config.bins)?;
        let bins = partition
            .cells()
            .iter()
            .map(|&iv| BinState::new(iv))
            .collect();
        let ridge = partition
            .cells()
            .iter()
            .map(|&iv| RidgeAccumulator::new(iv, degree))
            .collect();
        let k = degree + 1;
        let g = config.price_grid;
        let mut grid_basis = vec![0.0; g * k];
        for i in 0..g {
            let t = i as f64 / (g - 1) as f64;
            powers_into(t, &mut grid_basis[i * k..(i + 1) * k]);
        }
        Ok(Self {
            config,
            degree,
            partition,
            bins,
            ridge,
            grid_basis,
            pending: None,
        })
    }

    fn check_record(&self, index: usize, obs: &Observation) -> Result<()> {
        let bad = |reason: String| Error::MalformedHistory { index, reason };
        if !(obs.price >= self.config.p_min && obs.price <= 1.0) {
            return Err(bad(format!(
                "price {} outside [{}, 1]",
                obs.price, self.config.p_min
            )));
        }
        if !(obs.demand >= 0.0 && obs.demand <= self.config.d_max) {
            return Err(bad(format!(
                "demand {} outside [0, {}]",
                obs.demand, self.config.d_max
            )));
        }
        Ok(())
    }

    fn record(&mut self, obs: Observation) {
        let bin = &mut self.bins[obs.bin];
        bin.revenue_sum += obs.price * obs.demand;
        bin.count += 1;
        bin.history.push(obs);
        self.ridge[obs.bin].push(obs.price, obs.demand);
    }

    pub fn config(&self) -> &HsdpConfig {
        &self.config
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bins(&self) -> &[BinState] {
        &self.bins
    }

    pub fn partition(&self) -> &UniformPartition {
        &self.partition
    }

    pub fn occupancy(&self) -> Vec<usize> {
        self.bins.iter().map(|b| b.count).collect()
    }

    /// `[Delta + (3 d_max + L) sqrt(2 / n)] (k + 1) ln(2 (k + 1) T)`, or
    /// infinity for `n = 0`.
    pub fn confidence_width(&self, n: usize, horizon: u64) -> f64 {
        confidence_width(&self.config, self.degree, n, horizon)
    }

    pub fn step(&mut self, t: u64) -> Result<Decision> {
        self.step_with_horizon(t, self.config.horizon)
    }

    pub fn step_with_horizon(&mut self, t: u64, horizon: u64) -> Result<Decision> {
        if t < 1 {
            return Err(domain("rounds are numbered from 1"));
        }
        if let Some((round, _)) = self.pending {
            return Err(Error::Consistency(format!(
                "round {round} still awaits its observation"
            )));
        }
        let mut chosen = 0;
        let mut best = f64::NEG_INFINITY;
        let mut chosen_ci = f64::INFINITY;
        for (j, bin) in self.bins.iter().enumerate() {
            let ci = self.confidence_width(bin.count, horizon);
            let index = match bin.mean_revenue() {
                Some(mean) => mean + ci,
                None => f64::INFINITY,
            };
            if index > best {
                best = index;
                chosen = j;
                chosen_ci = ci;
            }
        }
        let (price, gamma) = self.optimistic_price(chosen, t, horizon);
        self.pending = Some((t, chosen));
        Ok(Decision {
            price,
            bin: chosen,
            ci: chosen_ci,
            gamma,
        })
    }

    /// `gamma = L sqrt(k+1) + Delta sqrt(n) + d_max sqrt(2 (k+1) ln(4 (k+1) t / delta)) + 2`
    /// with `delta = 1 / T^2`.
    pub fn gamma(&self, n: usize, t: u64, horizon: u64) -> f64 {
        let c = &self.config;
        let k1 = (self.degree + 1) as f64;
        let log_term = (4.0 * k1 * t as f64).ln() + 2.0 * (horizon as f64).ln();
        c.lipschitz * k1.sqrt()
            + c.delta * (n as f64).sqrt()
            + c.d_max * (2.0 * k1 * log_term).sqrt()
            + 2.0
    }

    fn optimistic_price(&self, j: usize, t: u64, horizon: u64) -> (f64, f64) {
        let c = &self.config;
        let fit = self.ridge[j].solve();
        let k = self.degree + 1;
        let chol = fit
            .gram
            .clone()
            .cholesky()
            .expect("ridge Gram is positive definite");
        let lower: DMatrix<f64> = chol.l();
        let theta = fit.coeffs.coeffs();
        let gamma = self.gamma(self.bins[j].count, t, horizon);
        let interval = self.bins[j].interval;
        let g = c.price_grid;
        let mut best_price = interval.a();
        let mut best = f64::NEG_INFINITY;
        let mut v = [0.0; 16];
        for i in 0..g {
            let phi = &self.grid_basis[i * k..(i + 1) * k];
            let mean: f64 = theta.iter().zip(phi).map(|(a, b)| a * b).sum();
            // phi^T Lambda^-1 phi = |L^-1 phi|^2 by forward substitution
            let mut quad = 0.0;
            for r in 0..k {
                let mut s = phi[r];
                for q in 0..r {
                    s -= lower[(r, q)] * v[q];
                }
                v[r] = s / lower[(r, r)];
                quad += v[r] * v[r];
            }
            let price = interval.at(i as f64 / (g - 1) as f64);
            let value = price * c.d_max.min(mean + gamma * quad.sqrt() + c.delta);
            if value > best {
                best = value;
                best_price = price;
            }
        }
        (best_price, gamma)
    }

    /// Records the realized demand of the pending decision.
    pub fn update(&mut self, obs: Observation) -> Result<()> {
        match self.pending {
            Some((round, bin)) if round == obs.round && bin == obs.bin => {}
            Some((round, bin)) => return Err(Error::Consistency(format!(
                "observation for round {} bin {} does not match pending round {round} bin {bin}",
                obs.round, obs.bin
            ))),
            None => {
                return Err(Error::Consistency(format!(
                    "observation for round {} without a pending decision",
                    obs.round
                )))
            }
        }
        if !self.bins[obs.bin].interval.contains(obs.price) {
            return Err(Error::Consistency(format!(
                "price {} outside bin {}",
                obs.price, obs.bin
            )));
        }
        if !(obs.demand >= 0.0 && obs.demand <= self.config.d_max) {
            return Err(Error::Consistency(format!(
                "demand {} outside [0, {}]",
                obs.demand, self.config.d_max
            )));
        }
        self.pending = None;
        self.record(obs);
        Ok(())
    }

    pub fn snapshot(&self) -> HsdpSnapshot {
        HsdpSnapshot {
            version: SNAPSHOT_VERSION,
            config: self.config.clone(),
            bins: self.bins.iter().map(|b| b.history.clone()).collect(),
            pending: self.pending,
        }
    }

    /// Rebuilds a state from a snapshot, keeping each observation in its
    /// recorded bin.
    pub fn restore(snapshot: &HsdpSnapshot) -> Result<Self> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::Config(format!(
                "snapshot version {} is not {SNAPSHOT_VERSION}",
                snapshot.version
            )));
        }
        let mut state = Self::empty(snapshot.config.clone())?;
        if snapshot.bins.len() != state.bins.len() {
            return Err(Error::Config(format!(
                "snapshot has {} bins, config has {}",
                snapshot.bins.len(),
                state.bins.len()
            )));
        }
        let mut index = 0;
        for (j, history) in snapshot.bins.iter().enumerate() {
            for obs in history {
                state.check_record(index, obs)?;
                if obs.bin != j || !state.bins[j].interval.contains(obs.price) {
                    return Err(Error::MalformedHistory {
                        index,
                        reason: format!("record filed under bin {j} but belongs elsewhere"),
                    });
                }
                state.record(*obs);
                index += 1;
            }
        }
        if let Some((_, bin)) = snapshot.pending {
            if bin >= state.bins.len() {
                return Err(Error::Config(format!("pending bin {bin} out of range")));
            }
        }
        state.pending = snapshot.pending;
        Ok(state)
    }
}

fn confidence_width(config: &HsdpConfig, degree: usize, n: usize, horizon: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let k1 = (degree + 1) as f64;
    let spread = config.delta + (3.0 * config.d_max + config.lipschitz) * (2.0 / n as f64).sqrt();
    spread * k1 * (2.0 * k1 * horizon as f64).ln()
}

/// HSDP driven by the episode loop.
#[derive(Debug, Clone)]
pub struct HsdpPolicy {
    state: HsdpState,
    last: Option<Decision>,
}

impl HsdpPolicy {
    pub fn new(config: HsdpConfig) -> Result<Self> {
        Ok(Self {
            state: HsdpState::new(config, &[])?,
            last: None,
        })
    }

    pub fn from_state(state: HsdpState) -> Self {
        Self { state, last: None }
    }

    pub fn state(&self) -> &HsdpState {
        &self.state
    }
}

impl PricingPolicy for HsdpPolicy {
    fn next_price(&mut self, t: u64, _rng: &mut ChaCha8Rng) -> Result<f64> {
        let d = self.state.step(t)?;
        self.last = Some(d);
        Ok(d.price)
    }

    fn observe(&mut self, t: u64, price: f64, demand: f64) -> Result<()> {
        let d = self
            .last
            .take()
            .ok_or_else(|| Error::Consistency("observation without a decision".into()))?;
        self.state.update(Observation {
            round: t,
            price,
            demand,
            bin: d.bin,
        })
    }

    fn occupancy(&self) -> Vec<usize> {
        self.state.occupancy()
    }
}
