//! JSON experiment configuration consumed by the `hvacrl` CLI.
//!
//! The file mirrors [`ExperimentConfig`](crate::harness::ExperimentConfig)
//! field by field, all fields optional with documented defaults, plus a
//! weather source string and optional building-parameter overrides. Unknown
//! keys are rejected so a typo in an ablation config cannot silently fall
//! back to a default.

use crate::env::{BuildingKind, RewardParams, VarGroup, ViolationForm};
use crate::harness::{AgentKind, ExperimentConfig, WeatherSource};
use crate::thermal::{BuildingModel, ZoneOccupancy};
use crate::weather::ClimateProfile;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Default synthetic series length when a config names a profile without a
/// length: one year of hourly records.
pub const DEFAULT_SYNTHETIC_HOURS: usize = 8760;

/// Parses a weather source string: a path to an `.epw` file, or
/// `synthetic:hot` / `synthetic:cool` with an optional `:HOURS` suffix.
pub fn parse_weather_source(s: &str) -> Result<WeatherSource, ConfigError> {
    if let Some(rest) = s.strip_prefix("synthetic:") {
        let mut parts = rest.splitn(2, ':');
        let profile = match parts.next() {
            Some("hot") => ClimateProfile::Hot,
            Some("cool") => ClimateProfile::Cool,
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown synthetic profile {other:?}; use synthetic:hot or synthetic:cool"
                )))
            }
        };
        let hours = match parts.next() {
            Some(h) => h
                .parse::<usize>()
                .map_err(|_| ConfigError::Invalid(format!("bad synthetic hours {h:?}")))?,
            None => DEFAULT_SYNTHETIC_HOURS,
        };
        Ok(WeatherSource::Synthetic { profile, hours })
    } else {
        Ok(WeatherSource::Epw {
            path: PathBuf::from(s),
        })
    }
}

/// Reward section of the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    #[serde(default = "defaults::omega")]
    pub omega: f64,
    #[serde(default = "defaults::lambda_p")]
    pub lambda_p: f64,
    #[serde(default = "defaults::lambda_t")]
    pub lambda_t: f64,
    #[serde(default = "defaults::t_min")]
    pub t_min: f64,
    #[serde(default = "defaults::t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub violation_form: ViolationForm,
}

impl Default for RewardSection {
    fn default() -> Self {
        let r = RewardParams::default();
        Self {
            omega: r.omega,
            lambda_p: r.lambda_p,
            lambda_t: r.lambda_t,
            t_min: r.t_min,
            t_max: r.t_max,
            violation_form: r.violation_form,
        }
    }
}

impl RewardSection {
    fn to_params(&self) -> Result<RewardParams, ConfigError> {
        if !(self.t_min < self.t_max) {
            return Err(ConfigError::Invalid(format!(
                "t_min {} must be below t_max {}",
                self.t_min, self.t_max
            )));
        }
        if self.lambda_p <= 0.0 || self.lambda_t <= 0.0 {
            return Err(ConfigError::Invalid(
                "reward scales must be positive".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(ConfigError::Invalid(format!(
                "omega {} must lie in [0, 1]",
                self.omega
            )));
        }
        Ok(RewardParams {
            omega: self.omega,
            lambda_p: self.lambda_p,
            lambda_t: self.lambda_t,
            t_min: self.t_min,
            t_max: self.t_max,
            violation_form: self.violation_form,
        })
    }
}

/// Partial override of one zone's parameters, matched by position.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneOverride {
    pub capacitance: Option<f64>,
    pub envelope_conductance: Option<f64>,
    pub heat_capacity: Option<f64>,
    pub cool_capacity: Option<f64>,
    pub cop_heat: Option<f64>,
    pub cop_cool: Option<f64>,
    pub internal_gain_base: Option<f64>,
    pub occupant_gain: Option<f64>,
    pub controller_gain: Option<f64>,
    pub occupancy: Option<ZoneOccupancy>,
}

/// Building-parameter overrides applied on top of the built-in defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingOverrides {
    /// Per-zone overrides in zone order; shorter lists leave later zones at
    /// their defaults.
    #[serde(default)]
    pub zones: Vec<ZoneOverride>,
    /// Full replacement interzone conductance matrix, row-major.
    #[serde(default)]
    pub interzone_conductance: Option<Vec<Vec<f64>>>,
}

impl BuildingOverrides {
    fn is_empty(&self) -> bool {
        self.zones.is_empty() && self.interzone_conductance.is_none()
    }

    fn apply(&self, kind: BuildingKind) -> Result<BuildingModel, ConfigError> {
        let base = kind.model();
        let mut zones = base.zones.clone();
        let mut occupancy = base.occupancy.clone();
        if self.zones.len() > zones.len() {
            return Err(ConfigError::Invalid(format!(
                "{} zone overrides for a {} zone building",
                self.zones.len(),
                zones.len()
            )));
        }
        for (i, over) in self.zones.iter().enumerate() {
            let z = &mut zones[i];
            if let Some(v) = over.capacitance {
                z.capacitance = v;
            }
            if let Some(v) = over.envelope_conductance {
                z.envelope_conductance = v;
            }
            if let Some(v) = over.heat_capacity {
                z.heat_capacity = v;
            }
            if let Some(v) = over.cool_capacity {
                z.cool_capacity = v;
            }
            if let Some(v) = over.cop_heat {
                z.cop_heat = v;
            }
            if let Some(v) = over.cop_cool {
                z.cop_cool = v;
            }
            if let Some(v) = over.internal_gain_base {
                z.internal_gain_base = v;
            }
            if let Some(v) = over.occupant_gain {
                z.occupant_gain = v;
            }
            if let Some(v) = over.controller_gain {
                z.controller_gain = v;
            }
            if let Some(o) = over.occupancy {
                occupancy[i] = o;
            }
        }
        let n = zones.len();
        let interzone = match &self.interzone_conductance {
            Some(rows) => {
                let mut flat = Vec::with_capacity(n * n);
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::Invalid(format!(
                        "interzone_conductance must be {n}x{n}"
                    )));
                }
                for r in rows {
                    flat.extend_from_slice(r);
                }
                flat
            }
            None => (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| base.interzone_conductance(i, j))
                .collect(),
        };
        BuildingModel::new(zones, interzone, occupancy)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

mod defaults {
    pub fn omega() -> f64 {
        0.5
    }
    pub fn lambda_p() -> f64 {
        1e-4
    }
    pub fn lambda_t() -> f64 {
        1.0
    }
    pub fn t_min() -> f64 {
        18.0
    }
    pub fn t_max() -> f64 {
        27.0
    }
    pub fn episodes() -> u32 {
        50
    }
    pub fn split_fraction() -> f64 {
        0.8
    }
    pub fn tile_temp_width() -> f64 {
        5.0
    }
    pub fn tile_humidity_width() -> f64 {
        10.0
    }
    pub fn fixed_action() -> usize {
        7
    }
    pub fn dt() -> f64 {
        900.0
    }
    pub fn weather() -> String {
        "synthetic:hot".to_string()
    }
}

/// The JSON experiment file. Every field is optional except none; unknown
/// keys are an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "BuildingKind::default_warehouse")]
    pub building: BuildingKind,
    /// `path/to/file.epw`, `synthetic:hot`, `synthetic:cool`, or
    /// `synthetic:<profile>:<hours>`.
    #[serde(default = "defaults::weather")]
    pub weather: String,
    #[serde(default = "AgentKind::default_fixed")]
    pub agent: AgentKind,
    #[serde(default = "defaults::episodes")]
    pub episodes: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::split_fraction")]
    pub split_fraction: f64,
    #[serde(default)]
    pub reward: RewardSection,
    /// Defaults to `[Env]` for qlearning and the full set otherwise.
    #[serde(default)]
    pub obs_groups: Option<Vec<VarGroup>>,
    #[serde(default = "defaults::tile_temp_width")]
    pub tile_temp_width: f64,
    #[serde(default = "defaults::tile_humidity_width")]
    pub tile_humidity_width: f64,
    #[serde(default)]
    pub ql: crate::tabular::QLearningConfig,
    #[serde(default)]
    pub dqn: crate::dqn::DqnConfig,
    #[serde(default = "defaults::fixed_action")]
    pub fixed_action: usize,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default)]
    pub building_overrides: BuildingOverrides,
    /// Output root; overridden by `--out` and the `HVACRL_OUT` variable.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl BuildingKind {
    fn default_warehouse() -> Self {
        BuildingKind::Warehouse
    }
}

impl AgentKind {
    fn default_fixed() -> Self {
        AgentKind::Fixed
    }
}

impl Default for ConfigFile {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config uses defaults")
    }
}

impl ConfigFile {
    /// Strict parse: malformed JSON and unknown keys are both errors.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Resolves the file into a runnable [`ExperimentConfig`].
    pub fn to_experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let weather = parse_weather_source(&self.weather)?;
        let obs_groups = match &self.obs_groups {
            Some(groups) => {
                if groups.is_empty() {
                    return Err(ConfigError::Invalid("obs_groups is empty".to_string()));
                }
                groups.clone()
            }
            None => match self.agent {
                AgentKind::QLearning => vec![VarGroup::Env],
                _ => VarGroup::ALL.to_vec(),
            },
        };
        let model = if self.building_overrides.is_empty() {
            None
        } else {
            Some(self.building_overrides.apply(self.building)?)
        };
        let cfg = ExperimentConfig {
            building: self.building,
            weather,
            agent: self.agent,
            episodes: self.episodes,
            seed: self.seed,
            split_fraction: self.split_fraction,
            reward: self.reward.to_params()?,
            obs_groups,
            tile_temp_width: self.tile_temp_width,
            tile_humidity_width: self.tile_humidity_width,
            ql: self.ql,
            dqn: self.dqn,
            fixed_action: self.fixed_action,
            dt: self.dt,
            model,
        };
        cfg.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    /// The full default config as pretty JSON: the generated schema of every
    /// key and its default value.
    pub fn schema_json() -> String {
        serde_json::to_string_pretty(&ConfigFile::default()).expect("defaults serialize")
    }
}
