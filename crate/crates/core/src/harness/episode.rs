use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environments::{sample_demand, DemandModel, GroundTruth, NoiseSpec};
use crate::error::{domain, Error, Result};
use crate::policies::{
    FixedPricePolicy, HsdpConfig, HsdpPolicy, PricingPolicy, SadpConfig, SadpPolicy,
};

/// Per-round regret increments down to `-REGRET_TOL` are rounding noise
/// around a tie with the benchmark and count as zero; anything lower
/// aborts the episode.
pub const REGRET_TOL: f64 = 1e-9;

/// Which policy an episode runs. Omitted constants default to the model's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    /// Always plays the benchmark price.
    Oracle {},
    FixedPrice {
        price: f64,
    },
    Hsdp {
        beta_hat: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        price_grid: Option<usize>,
    },
    Sadp {
        beta_min: f64,
        beta_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        price_grid: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_per_bin: Option<usize>,
    },
    /// Synthetic regret `scale * t^exponent` at the benchmark price, for
    /// exercising the rate pipeline.
    PowerLawStub {
        scale: f64,
        exponent: f64,
    },
}

impl PolicySpec {
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Oracle {} => "oracle",
            PolicySpec::FixedPrice { .. } => "fixed_price",
            PolicySpec::Hsdp { .. } => "hsdp",
            PolicySpec::Sadp { .. } => "sadp",
            PolicySpec::PowerLawStub { .. } => "power_law_stub",
        }
    }

    pub fn hsdp_config(&self, model: &DemandModel, horizon: u64) -> Result<Option<HsdpConfig>> {
        let PolicySpec::Hsdp {
            beta_hat,
            lipschitz,
            bins,
            delta,
            price_grid,
        } = self
        else {
            return Ok(None);
        };
        let l = lipschitz.unwrap_or(model.lipschitz());
        let mut cfg = HsdpConfig::new(horizon, *beta_hat, model.p_min(), model.d_max(), l)?;
        if let Some(n) = bins {
            cfg = cfg.with_bins(*n)?;
        }
        if let Some(g) = price_grid {
            cfg = cfg.with_price_grid(*g)?;
        }
        if let Some(d) = delta {
            cfg.delta = *d;
            cfg.validate()?;
        }
        Ok(Some(cfg))
    }

    pub fn sadp_config(&self, model: &DemandModel, horizon: u64) -> Result<Option<SadpConfig>> {
        let PolicySpec::Sadp {
            beta_min,
            beta_max,
            lipschitz,
            price_grid,
            grid_per_bin,
        } = self
        else {
            return Ok(None);
        };
        let l = lipschitz.unwrap_or(model.lipschitz());
        let mut cfg = SadpConfig::new(
            horizon,
            *beta_min,
            *beta_max,
            model.p_min(),
            model.d_max(),
            l,
        )?;
        if let Some(g) = price_grid {
            cfg.price_grid = *g;
        }
        if let Some(g) = grid_per_bin {
            cfg.grid_per_bin = *g;
        }
        cfg.validate()?;
        Ok(Some(cfg))
    }

    /// Checks the parameters against a model without running anything.
    pub fn validate(&self, model: &DemandModel, horizon: u64) -> Result<()> {
        match self {
            PolicySpec::Oracle {} => Ok(()),
            PolicySpec::FixedPrice { price } => {
                if !(*price >= model.p_min() && *price <= 1.0) {
                    return Err(domain(format!(
                        "fixed price {price} outside [{}, 1]",
                        model.p_min()
                    )));
                }
                Ok(())
            }
            PolicySpec::Hsdp { .. } => self.hsdp_config(model, horizon).map(|_| ()),
            PolicySpec::Sadp { .. } => self.sadp_config(model, horizon).map(|_| ()),
            PolicySpec::PowerLawStub { scale, exponent } => {
                if !(*scale > 0.0 && exponent.is_finite() && *exponent >= 0.0) {
                    return Err(domain(format!(
                        "stub needs scale > 0 and exponent >= 0, got {scale}, {exponent}"
                    )));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub clip_count: u64,
    pub bin_occupancy: Vec<usize>,
    pub exploration_rounds: u64,
    pub exploration_regret: f64,
    /// Exploration regret over final regret; zero when the final regret is.
    pub exploration_regret_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub policy: String,
    pub prices: Vec<f64>,
    /// Cumulative expected-revenue regret after each round.
    pub cumulative_regret: Vec<f64>,
    pub beta_hat: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

/// Drives `policy` for `horizon` rounds with one generator seeded by `seed`.
///
/// Per round: the policy draws its price (SADP exploration consumes one
/// uniform draw), then one noise draw produces the demand. Regret is the
/// expected-revenue gap `r* - p f(p)`; the noisy demand only feeds the
/// policy.
pub fn run_policy(
    policy: &mut dyn PricingPolicy,
    label: &str,
    model: &DemandModel,
    noise: &NoiseSpec,
    truth: &GroundTruth,
    horizon: u64,
    seed: u64,
) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = horizon as usize;
    let mut prices = Vec::with_capacity(n);
    let mut cumulative = Vec::with_capacity(n);
    let mut clips = 0u64;
    let mut total = 0.0;
    for t in 1..=horizon {
        let price = policy.next_price(t, &mut rng)?;
        if !(price >= model.p_min() && price <= 1.0) {
            return Err(Error::Abort(format!(
                "{label} played price {price} outside [{}, 1] in round {t} (seed {seed})",
                model.p_min()
            )));
        }
        let demand = sample_demand(model, noise, price, &mut rng, &mut clips);
        policy.observe(t, price, demand)?;
        let gap = truth.r_star - model.revenue(price);
        if gap < -REGRET_TOL {
            return Err(Error::Abort(format!(
                "{label} beat the benchmark by {} at price {price} in round {t} (seed {seed})",
                -gap
            )));
        }
        total += gap.max(0.0);
        prices.push(price);
        cumulative.push(total);
    }
    let explore = policy.exploration_rounds().min(horizon);
    let exploration_regret = if explore > 0 {
        cumulative[explore as usize - 1]
    } else {
        0.0
    };
    Ok(RunRecord {
        seed,
        policy: label.to_string(),
        prices,
        cumulative_regret: cumulative,
        beta_hat: policy.beta_hat(),
        diagnostics: Diagnostics {
            clip_count: clips,
            bin_occupancy: policy.occupancy(),
            exploration_rounds: explore,
            exploration_regret,
            exploration_regret_share: if total > 0.0 {
                exploration_regret / total
            } else {
                0.0
            },
        },
    })
}

fn stub_record(
    scale: f64,
    exponent: f64,
    truth: &GroundTruth,
    horizon: u64,
    seed: u64,
) -> RunRecord {
    RunRecord {
        seed,
        policy: "power_law_stub".into(),
        prices: vec![truth.p_star; horizon as usize],
        cumulative_regret: (1..=horizon)
            .map(|t| scale * (t as f64).powf(exponent))
            .collect(),
        beta_hat: None,
        diagnostics: Diagnostics {
            clip_count: 0,
            bin_occupancy: Vec::new(),
            exploration_rounds: 0,
            exploration_regret: 0.0,
            exploration_regret_share: 0.0,
        },
    }
}

pub fn run_episode(
    spec: &PolicySpec,
    model: &DemandModel,
    noise: &NoiseSpec,
    truth: &GroundTruth,
    horizon: u64,
    seed: u64,
) -> Result<RunRecord> {
    if horizon < 1 {
        return Err(domain("horizon must be at least 1"));
    }
    spec.validate(model, horizon)?;
    let label = spec.label();
    match spec {
        PolicySpec::Oracle {} => run_policy(
            &mut FixedPricePolicy {
                price: truth.p_star,
            },
            label,
            model,
            noise,
            truth,
            horizon,
            seed,
        ),
        PolicySpec::FixedPrice { price } => run_policy(
            &mut FixedPricePolicy { price: *price },
            label,
            model,
            noise,
            truth,
            horizon,
            seed,
        ),
        PolicySpec::Hsdp { .. } => {
            let cfg = spec.hsdp_config(model, horizon)?.expect("hsdp spec");
            run_policy(
                &mut HsdpPolicy::new(cfg)?,
                label,
                model,
                noise,
                truth,
                horizon,
                seed,
            )
        }
        PolicySpec::Sadp { .. } => {
            let cfg = spec.sadp_config(model, horizon)?.expect("sadp spec");
            run_policy(
                &mut SadpPolicy::new(cfg)?,
                label,
                model,
                noise,
                truth,
                horizon,
                seed,
            )
        }
        PolicySpec::PowerLawStub { scale, exponent } => {
            Ok(stub_record(*scale, *exponent, truth, horizon, seed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::optimal_price;

    fn linear_revenue() -> (DemandModel, GroundTruth) {
        // revenue p (1.2 - p) peaks at 0.6 with r* = 0.36
        let m = DemandModel::custom("lin", |p| 1.2 - p, 1.0, 1.0, 0.1, 2.0).unwrap();
        let g = optimal_price(&m, 10_001).unwrap();
        (m, g)
    }

    #[test]
    fn oracle_has_zero_regret() {
        let (m, g) = linear_revenue();
        let r = run_episode(
            &PolicySpec::Oracle {},
            &m,
            &NoiseSpec::gaussian(0.05).unwrap(),
            &g,
            500,
            1,
        )
        .unwrap();
        assert_eq!(r.cumulative_regret.len(), 500);
        assert!(r.cumulative_regret.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fixed_price_regret_is_linear() {
        let (m, g) = linear_revenue();
        // upper root of p (1.2 - p) = r* - 0.1
        let target = g.r_star - 0.1;
        let price = (1.2 + (1.44 - 4.0 * target).sqrt()) / 2.0;
        let r = run_episode(
            &PolicySpec::FixedPrice { price },
            &m,
            &NoiseSpec::none(),
            &g,
            100,
            3,
        )
        .unwrap();
        for (t, v) in r.cumulative_regret.iter().enumerate() {
            assert!((v - 0.1 * (t + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_fixed_price_is_rejected() {
        let (m, g) = linear_revenue();
        assert!(run_episode(
            &PolicySpec::FixedPrice { price: 0.05 },
            &m,
            &NoiseSpec::none(),
            &g,
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn beating_the_benchmark_aborts() {
        let (m, mut g) = linear_revenue();
        g.r_star -= 0.01;
        let err = run_episode(&PolicySpec::Oracle {}, &m, &NoiseSpec::none(), &g, 10, 0).unwrap_err();
        assert!(matches!(err, Error::Abort(_)));
    }

    #[test]
    fn hsdp_is_deterministic() {
        let (m, g) = linear_revenue();
        let spec = PolicySpec::Hsdp {
            beta_hat: 1.0,
            lipschitz: None,
            bins: None,
            delta: None,
            price_grid: None,
        };
        let noise = NoiseSpec::gaussian(0.05).unwrap();
        let a = run_episode(&spec, &m, &noise, &g, 400, 9).unwrap();
        let b = run_episode(&spec, &m, &noise, &g, 400, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.cumulative_regret.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn policy_spec_json() {
        let spec: PolicySpec =
            serde_json::from_str(r#"{"kind":"hsdp","beta_hat":1.0,"bins":4}"#).unwrap();
        assert!(matches!(spec, PolicySpec::Hsdp { bins: Some(4), .. }));
        assert!(
            serde_json::from_str::<PolicySpec>(r#"{"kind":"hsdp","beta_hat":1.0,"typo":1}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<PolicySpec>(r#"{"kind":"oracle"}"#).is_ok());
        assert!(serde_json::from_str::<PolicySpec>(r#"{"kind":"oracle","price":1}"#).is_err());
        assert_eq!(serde_json::to_string(&PolicySpec::Oracle {}).unwrap(), r#"{"kind":"oracle"}"#);
    }
}
