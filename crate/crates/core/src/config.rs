//! JSON experiment configuration. The layout is documented in
//! `docs/schema.md`; unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::environments::{
    bump_c1, make_bump_g_on, make_lowerbound_family_with, make_nonadaptive_pair, make_polynomial,
    make_power_selfsim, make_scaled_power, DemandModel, NoiseSpec, BUMP_DEFAULT_L, BUMP_D_MAX,
    BUMP_P_MIN, DEFAULT_TRUTH_GRID,
};
use crate::error::{Error, Result};
use crate::harness::PolicySpec;

pub const SCHEMA_VERSION: u32 = 1;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    #[serde(default = "NoiseSpec::none")]
    pub noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
    #[serde(default)]
    pub horizons: Vec<u64>,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selfsim: Option<SelfSimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxSection>,
    /// Output directory; `--out-dir` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// Uniform grid behind the benchmark price.
    pub truth: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            truth: DEFAULT_TRUTH_GRID,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSection {
    pub beta_min: f64,
    pub beta_max: f64,
}

/// Omitted fields fall back to the model's fitted parameters, or to
/// `degree = w(beta)`, `m1 = 2`, `m2 = 1` when it has none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfSimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(default = "default_c_max")]
    pub c_max: u32,
}

fn default_c_max() -> u32 {
    7
}

impl Default for SelfSimSection {
    fn default() -> Self {
        Self {
            degree: None,
            m1: None,
            m2: None,
            c_max: default_c_max(),
        }
    }
}

/// Random subintervals of `[p_min, 1]` checked at each smoothness guess.
/// Without `beta_hats` the sweep uses `beta` and `beta / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxSection {
    #[serde(default = "default_intervals")]
    pub intervals: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_hats: Option<Vec<f64>>,
}

fn default_intervals() -> usize {
    100
}

impl Default for ApproxSection {
    fn default() -> Self {
        Self {
            intervals: default_intervals(),
            beta_hats: None,
        }
    }
}

/// A demand model by label. `params` depends on the label; absent keys
/// take the defaults listed in `docs/schema.md`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub label: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PowerSelfsimParams {
    c0: f64,
    beta: f64,
    slope: f64,
    p_min: f64,
    d_max: f64,
}

impl Default for PowerSelfsimParams {
    fn default() -> Self {
        Self {
            c0: 0.3,
            beta: 0.7,
            slope: -0.2,
            p_min: 0.1,
            d_max: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BumpParams {
    beta: f64,
    lipschitz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    p_min: f64,
    d_max: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            lipschitz: BUMP_DEFAULT_L,
            c1: None,
            p_min: BUMP_P_MIN,
            d_max: BUMP_D_MAX,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FamilyParams {
    cells: usize,
    beta: f64,
    p_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_max: Option<f64>,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            cells: 8,
            beta: 1.0,
            p_min: 0.1,
            c1: None,
            d_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PairParams {
    alpha: f64,
    beta: f64,
    p_min: f64,
    a: u32,
    b: u32,
    m0: u32,
}

impl Default for PairParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 0.5,
            p_min: 0.5,
            a: 2,
            b: 16,
            m0: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PolynomialParams {
    coeffs: Vec<f64>,
    p_min: f64,
    d_max: f64,
}

impl Default for PolynomialParams {
    fn default() -> Self {
        Self {
            coeffs: vec![0.8, -0.5],
            p_min: 0.1,
            d_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScaledPowerParams {
    lipschitz: f64,
    beta: f64,
    p_min: f64,
    d_max: f64,
}

impl Default for ScaledPowerParams {
    fn default() -> Self {
        Self {
            lipschitz: 1.0,
            beta: 0.5,
            p_min: 0.1,
            d_max: 1.0,
        }
    }
}

fn parse_params<T: DeserializeOwned>(label: &str, params: &Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(params.clone()))
        .map_err(|e| config_err(format!("model.params for '{label}': {e}")))
}

fn to_map<T: Serialize>(params: &T) -> Map<String, Value> {
    match serde_json::to_value(params) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("parameter structs serialize to objects"),
    }
}

/// Splits `name:index` into its parts; a missing suffix gives `None`.
fn split_label(label: &str) -> Result<(&str, Option<usize>)> {
    match label.split_once(':') {
        None => Ok((label, None)),
        Some((name, idx)) => idx
            .parse()
            .map(|i| (name, Some(i)))
            .map_err(|_| config_err(format!("model.label '{label}': '{idx}' is not an index"))),
    }
}

impl ModelSpec {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            params: Map::new(),
        }
    }

    /// Builds the model and returns it with this spec's parameters filled
    /// in with every default, so the echo rebuilds the same model.
    pub fn build(&self) -> Result<(DemandModel, ModelSpec)> {
        let (name, index) = split_label(&self.label)?;
        let no_index = |kind: &str| -> Result<()> {
            match index {
                None => Ok(()),
                Some(_) => Err(config_err(format!(
                    "model.label '{}': '{kind}' takes no index",
                    self.label
                ))),
            }
        };
        let (model, params) = match name {
            "power_selfsim" => {
                no_index(name)?;
                let p: PowerSelfsimParams = parse_params(name, &self.params)?;
                (make_power_selfsim(p.c0, p.beta, p.slope, p.p_min, p.d_max)?, to_map(&p))
            }
            "bump_g" => {
                no_index(name)?;
                let mut p: BumpParams = parse_params(name, &self.params)?;
                let c1 = match p.c1 {
                    Some(c) => c,
                    None => bump_c1(p.beta, p.lipschitz)?,
                };
                p.c1 = Some(c1);
                (make_bump_g_on(p.beta, p.lipschitz, c1, p.p_min, p.d_max)?, to_map(&p))
            }
            "lb_family" => {
                let j = index.ok_or_else(|| config_err("model.label 'lb_family' needs a member index, as in 'lb_family:3'"))?;
                let mut p: FamilyParams = parse_params(name, &self.params)?;
                let c1 = match p.c1 {
                    Some(c) => c,
                    None => bump_c1(p.beta, BUMP_DEFAULT_L)?,
                };
                let d_max = p.d_max.unwrap_or(1.0 / p.p_min);
                p.c1 = Some(c1);
                p.d_max = Some(d_max);
                (
                    make_lowerbound_family_with(j, p.cells, p.beta, p.p_min, c1, d_max)?,
                    to_map(&p),
                )
            }
            "nonadaptive_pair" => {
                let p: PairParams = parse_params(name, &self.params)?;
                let (g1, g2) = make_nonadaptive_pair(p.alpha, p.beta, p.p_min, p.a, p.b, p.m0)?;
                let model = match index {
                    None | Some(1) => g1,
                    Some(2) => g2,
                    Some(i) => return Err(config_err(format!("model.label '{}': pair member {i} is not 1 or 2", self.label))),
                };
                (model, to_map(&p))
            }
            "polynomial" => {
                no_index(name)?;
                let p: PolynomialParams = parse_params(name, &self.params)?;
                (make_polynomial(&p.coeffs, p.p_min, p.d_max)?, to_map(&p))
            }
            "scaled_power" => {
                no_index(name)?;
                let p: ScaledPowerParams = parse_params(name, &self.params)?;
                (make_scaled_power(p.lipschitz, p.beta, p.p_min, p.d_max)?, to_map(&p))
            }
            other => {
                return Err(config_err(format!(
                    "model.label: unknown model '{other}' (expected power_selfsim, bump_g, lb_family:<j>, \
                     nonadaptive_pair[:1|:2], polynomial or scaled_power)"
                )))
            }
        };
        Ok((
            model,
            ModelSpec {
                label: self.label.clone(),
                params,
            },
        ))
    }
}

/// The five experiments the CLI runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Beta,
    Selfsim,
    Rates,
    ApproxCheck,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the sections `command` needs, before any computation.
    pub fn validate(&self, command: Command) -> Result<()> {
        self.noise.validate()?;
        if self.reps == 0 {
            return Err(config_err("reps: must be at least 1"));
        }
        if self.grids.truth < 1000 {
            return Err(config_err("grids.truth: must be at least 1000"));
        }
        if self.horizons.contains(&0) {
            return Err(config_err("horizons: every horizon must be positive"));
        }
        let need_policy = || {
            self.policy
                .as_ref()
                .map(|_| ())
                .ok_or_else(|| config_err(format!("policy: required by {command:?}")))
        };
        match command {
            Command::Simulate => {
                need_policy()?;
                if self.horizons.len() != 1 {
                    return Err(config_err("horizons: simulate takes exactly one horizon"));
                }
            }
            Command::Rates => {
                need_policy()?;
                if self.horizons.len() < 3 {
                    return Err(config_err("horizons: rates needs at least three horizons"));
                }
                if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(config_err("horizons: must be strictly increasing"));
                }
            }
            Command::Beta => {
                let b = self
                    .beta
                    .ok_or_else(|| config_err("beta: section required by beta"))?;
                if !(b.beta_min > 0.0 && b.beta_min <= b.beta_max && b.beta_max.is_finite()) {
                    return Err(config_err("beta: need 0 < beta_min <= beta_max"));
                }
                if self.horizons.is_empty() {
                    return Err(config_err("horizons: beta needs at least one horizon"));
                }
            }
            Command::Selfsim => {
                if let Some(s) = &self.selfsim {
                    if s.c_max == 0 {
                        return Err(config_err("selfsim.c_max: must be positive"));
                    }
                }
            }
            Command::ApproxCheck => {
                if let Some(a) = &self.approx {
                    if a.intervals == 0 {
                        return Err(config_err("approx.intervals: must be positive"));
                    }
                }
            }
        }
        Ok(())
    }
}
