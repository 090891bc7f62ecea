//! Training and evaluation protocol, the three ablation suites, and result
//! file output.
//!
//! A run is described by an [`ExperimentConfig`]. Training makes `episodes`
//! passes over the chronological train split of the weather; evaluation is a
//! single greedy pass over the held-out split, reporting total electric
//! energy, the percentage of steps with any zone outside the comfort band,
//! and the mean per-step reward. Everything is deterministic given the
//! config, including its seed.

use crate::dqn::{self, DqnAgent, DqnConfig, Mlp, Normalizer};
use crate::env::{
    BuildingKind, EnvError, Environment, ObsError, Observation,
    ObservationSpec, RewardParams, VarGroup,
};
use crate::rngutil::derive_seed;
use crate::tabular::{
    anneal_eps, encode, select_action, state_space_guard, update, QLearningConfig, QTable,
    QTableArtifact, TabularError, TileCodingSpec,
};
use crate::thermal::BuildingModel;
use crate::weather::{synthesize, ClimateProfile, WeatherError, WeatherSeries};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Obs(#[from] ObsError),
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Dqn(#[from] dqn::DqnError),
    #[error(transparent)]
    Weather(#[from] WeatherError),
    #[error("io failure at {path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Controller under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Constant action baseline.
    Fixed,
    /// Uniform random action baseline.
    Random,
    /// Tabular Q-learning over tile-coded observations.
    QLearning,
    /// Deep Q-network.
    Dqn,
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AgentKind::Fixed => "fixed",
            AgentKind::Random => "random",
            AgentKind::QLearning => "qlearning",
            AgentKind::Dqn => "dqn",
        })
    }
}

/// Where the weather comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeatherSource {
    /// An EPW file on disk.
    Epw { path: PathBuf },
    /// A built-in synthetic profile of the given length; the generator seed
    /// is the experiment seed, so matched-seed runs share identical weather.
    Synthetic {
        profile: ClimateProfile,
        hours: usize,
    },
}

impl WeatherSource {
    pub fn load(&self, seed: u64) -> Result<WeatherSeries, HarnessError> {
        match self {
            WeatherSource::Epw { path } => {
                let text = std::fs::read_to_string(path).map_err(io_err(path))?;
                Ok(crate::weather::parse_epw(&text)?)
            }
            WeatherSource::Synthetic { profile, hours } => {
                Ok(synthesize(*profile, seed, *hours)?)
            }
        }
    }
}

/// Full description of one run. Serialized verbatim into every result
/// record, so a record can be re-executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub building: BuildingKind,
    pub weather: WeatherSource,
    pub agent: AgentKind,
    pub episodes: u32,
    pub seed: u64,
    pub split_fraction: f64,
    pub reward: RewardParams,
    /// Observation groups visible to the agent.
    pub obs_groups: Vec<VarGroup>,
    /// Temperature tile width, degC (tabular agent).
    pub tile_temp_width: f64,
    /// Humidity tile width, % (tabular agent).
    pub tile_humidity_width: f64,
    pub ql: QLearningConfig,
    pub dqn: DqnConfig,
    /// Action index held by the fixed baseline.
    pub fixed_action: usize,
    /// Control timestep, seconds.
    pub dt: f64,
    /// Building model override; `None` uses the building's defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<BuildingModel>,
}

impl ExperimentConfig {
    /// Config with the suite defaults for one agent on one building:
    /// 50 episodes, 80/20 split, 900 s steps, default reward, the Env
    /// observation group for the tabular agent and the full space otherwise.
    pub fn new(
        building: BuildingKind,
        weather: WeatherSource,
        agent: AgentKind,
        seed: u64,
    ) -> Self {
        let obs_groups = match agent {
            AgentKind::QLearning => vec![VarGroup::Env],
            _ => VarGroup::ALL.to_vec(),
        };
        Self {
            building,
            weather,
            agent,
            episodes: 50,
            seed,
            split_fraction: 0.8,
            reward: RewardParams::default(),
            obs_groups,
            tile_temp_width: 5.0,
            tile_humidity_width: 10.0,
            ql: QLearningConfig::default(),
            dqn: DqnConfig::default(),
            fixed_action: 7,
            dt: 900.0,
            model: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.episodes < 1 {
            return Err(HarnessError::Precondition(
                "episodes must be at least 1".to_string(),
            ));
        }
        if self.fixed_action > 9 {
            return Err(HarnessError::Precondition(format!(
                "fixed_action {} is outside [0, 9]",
                self.fixed_action
            )));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(HarnessError::Precondition(
                "split_fraction must lie in (0, 1)".to_string(),
            ));
        }
        if !self.obs_groups.contains(&VarGroup::Env) {
            return Err(HarnessError::Precondition(
                "obs_groups must include Env".to_string(),
            ));
        }
        Ok(())
    }

    /// Stable hash of the serialized config, used to key result rows and
    /// curve files.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        // FNV-1a, 64 bit.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    fn env(&self, weather: WeatherSeries, seed: u64) -> Result<Environment, HarnessError> {
        let env = match &self.model {
            Some(model) => Environment::with_model(
                self.building,
                model.clone(),
                weather,
                self.reward,
                self.dt,
                seed,
            )?,
            None => Environment::new(self.building, weather, self.reward, self.dt, seed)?,
        };
        Ok(env)
    }
}

/// Evaluation outputs of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Total electric energy over the evaluation pass, kWh.
    pub energy_kwh: f64,
    /// Percentage of evaluation steps with any zone outside the band.
    pub violation_pct: f64,
    /// Mean per-step reward over the evaluation pass.
    pub mean_eval_reward: f64,
    /// Mean per-step reward of each training episode (empty for the
    /// training-free baselines).
    pub episode_returns: Vec<f64>,
}

/// One completed run: the config snapshot, its metrics, and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub metrics: Metrics,
    pub seed: u64,
    pub code_version: String,
    /// Wall-clock seconds; kept out of the serialized record so repeated
    /// runs produce byte-identical result files.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

/// A trained (or trivial) policy ready for evaluation.
#[derive(Debug, Clone)]
pub enum AgentArtifact {
    Fixed { action: usize },
    Random,
    QLearning { artifact: QTableArtifact },
    Dqn { mlp: Mlp, normalizer: Normalizer },
}

/// Projection of full observations onto the configured group subset.
struct ObsProjector {
    indices: Vec<usize>,
    spec: ObservationSpec,
}

impl ObsProjector {
    fn new(full: &ObservationSpec, groups: &[VarGroup]) -> Result<Self, HarnessError> {
        let spec = full.filter(groups)?;
        Ok(Self {
            indices: full.group_indices(groups),
            spec,
        })
    }

    fn project(&self, obs: &Observation) -> Observation {
        Observation {
            values: self.indices.iter().map(|&i| obs.values[i]).collect(),
        }
    }
}

// Seed streams derived from the experiment seed.
const STREAM_TRAIN_ENV: u64 = 1000;
const STREAM_EXPLORATION: u64 = 2;
const STREAM_AGENT_INIT: u64 = 3;
const STREAM_EVAL_ENV: u64 = 4;
const STREAM_EVAL_POLICY: u64 = 5;

/// Trains a learning agent and returns its artifact together with the
/// training curve (mean per-step reward per episode).
pub fn train(cfg: &ExperimentConfig) -> Result<(AgentArtifact, Vec<f64>), HarnessError> {
    cfg.validate()?;
    let weather = cfg.weather.load(cfg.seed)?;
    let split = weather.split(cfg.split_fraction)?;
    let full_spec = cfg.building.observation_spec();
    let projector = ObsProjector::new(&full_spec, &cfg.obs_groups)?;

    match cfg.agent {
        AgentKind::QLearning => train_qlearning(cfg, &split.train, &projector),
        AgentKind::Dqn => train_dqn(cfg, &split.train, &projector),
        other => Err(HarnessError::Precondition(format!(
            "agent {other} does not train; use evaluate or run_fixed_baseline"
        ))),
    }
}

fn train_qlearning(
    cfg: &ExperimentConfig,
    train_weather: &WeatherSeries,
    projector: &ObsProjector,
) -> Result<(AgentArtifact, Vec<f64>), HarnessError> {
    let tiles = TileCodingSpec::from_observation_spec(
        &projector.spec,
        cfg.tile_temp_width,
        cfg.tile_humidity_width,
    );
    state_space_guard(&tiles, 10, cfg.ql.memory_cap)?;
    let mut table = QTable::new(10);
    let mut explore = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_EXPLORATION));
    let mut curve = Vec::with_capacity(cfg.episodes as usize);

    for episode in 0..cfg.episodes {
        let eps = anneal_eps(episode, &cfg.ql);
        let env_seed = derive_seed(cfg.seed, STREAM_TRAIN_ENV + episode as u64);
        let mut env = cfg.env(train_weather.clone(), env_seed)?;
        let mut obs = env.reset();
        let mut s = encode(&projector.project(&obs), &tiles)?;
        let mut total = 0.0;
        let steps = env.episode_len();
        for _ in 0..steps {
            let a = select_action(&table, &s, eps, &mut explore);
            let result = env.step(a)?;
            obs = result.observation;
            let s_next = encode(&projector.project(&obs), &tiles)?;
            update(&mut table, &s, a, result.reward, &s_next, &cfg.ql)?;
            s = s_next;
            total += result.reward;
        }
        curve.push(total / steps as f64);
    }
    Ok((
        AgentArtifact::QLearning {
            artifact: QTableArtifact::from_table(&table, tiles),
        },
        curve,
    ))
}

fn train_dqn(
    cfg: &ExperimentConfig,
    train_weather: &WeatherSeries,
    projector: &ObsProjector,
) -> Result<(AgentArtifact, Vec<f64>), HarnessError> {
    let normalizer = Normalizer::from_spec(&projector.spec);
    let mut agent = DqnAgent::new(
        normalizer,
        10,
        cfg.dqn,
        derive_seed(cfg.seed, STREAM_AGENT_INIT),
    );
    let mut explore = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_EXPLORATION));
    let mut curve = Vec::with_capacity(cfg.episodes as usize);

    let probe_env = cfg.env(train_weather.clone(), 0)?;
    let steps_per_episode = probe_env.episode_len();
    let total_steps = steps_per_episode * cfg.episodes as usize;
    let mut global_step = 0usize;

    for episode in 0..cfg.episodes {
        let env_seed = derive_seed(cfg.seed, STREAM_TRAIN_ENV + episode as u64);
        let mut env = cfg.env(train_weather.clone(), env_seed)?;
        let mut obs = projector.project(&env.reset());
        let mut total = 0.0;
        for _ in 0..steps_per_episode {
            let eps = dqn::eps_at(global_step, total_steps, &cfg.dqn);
            let a = agent.act(&obs, eps, &mut explore)?;
            let result = env.step(a)?;
            let next = projector.project(&result.observation);
            // A year-end is a time limit, not a terminal state, so the
            // bootstrap stays on for every stored transition.
            agent.push_transition(&obs, a, result.reward, &next, false);
            global_step += 1;
            agent.train_step(global_step)?;
            obs = next;
            total += result.reward;
        }
        curve.push(total / steps_per_episode as f64);
    }
    Ok((
        AgentArtifact::Dqn {
            mlp: agent.online().clone(),
            normalizer: agent.normalizer().clone(),
        },
        curve,
    ))
}

/// Greedy evaluation pass over the held-out weather split.
pub fn evaluate(artifact: &AgentArtifact, cfg: &ExperimentConfig) -> Result<Metrics, HarnessError> {
    cfg.validate()?;
    let weather = cfg.weather.load(cfg.seed)?;
    let split = weather.split(cfg.split_fraction)?;
    let full_spec = cfg.building.observation_spec();
    let projector = ObsProjector::new(&full_spec, &cfg.obs_groups)?;

    let mut env = cfg.env(split.eval, derive_seed(cfg.seed, STREAM_EVAL_ENV))?;
    let mut policy_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_EVAL_POLICY));

    let tabular = match artifact {
        AgentArtifact::QLearning { artifact } => {
            let (table, tiles) = artifact.clone().into_table();
            Some((table, tiles))
        }
        _ => None,
    };

    let steps = env.episode_len();
    let mut energy_j = 0.0;
    let mut violations = 0usize;
    let mut reward_sum = 0.0;
    let mut obs = env.reset();

    for _ in 0..steps {
        let a = match artifact {
            AgentArtifact::Fixed { action } => *action,
            AgentArtifact::Random => policy_rng.gen_range(0..env.action_count()),
            AgentArtifact::QLearning { .. } => {
                let (table, tiles) = tabular.as_ref().expect("tabular artifact prepared");
                let s = encode(&projector.project(&obs), tiles)?;
                table.argmax(&s)
            }
            AgentArtifact::Dqn { mlp, normalizer } => {
                let x = normalizer.normalize(&projector.project(&obs).values);
                let q = mlp.forward(&x).map_err(dqn::DqnError::from)?;
                let mut best = 0;
                for i in 1..q.len() {
                    if q[i] > q[best] {
                        best = i;
                    }
                }
                best
            }
        };
        let result = env.step(a)?;
        energy_j += result.info.p_total * cfg.dt;
        if result.info.violations.iter().any(|&v| v) {
            violations += 1;
        }
        reward_sum += result.reward;
        obs = result.observation;
    }

    Ok(Metrics {
        energy_kwh: energy_j / 3.6e6,
        violation_pct: 100.0 * violations as f64 / steps as f64,
        mean_eval_reward: reward_sum / steps as f64,
        episode_returns: Vec::new(),
    })
}

/// Evaluates the constant-action baseline; no training happens.
pub fn run_fixed_baseline(cfg: &ExperimentConfig) -> Result<Metrics, HarnessError> {
    cfg.validate()?;
    evaluate(
        &AgentArtifact::Fixed {
            action: cfg.fixed_action,
        },
        cfg,
    )
}

/// Trains (when the agent learns) and evaluates one config.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let (artifact, curve) = match cfg.agent {
        AgentKind::Fixed => (
            AgentArtifact::Fixed {
                action: cfg.fixed_action,
            },
            Vec::new(),
        ),
        AgentKind::Random => (AgentArtifact::Random, Vec::new()),
        AgentKind::QLearning | AgentKind::Dqn => train(cfg)?,
    };
    let mut metrics = evaluate(&artifact, cfg)?;
    metrics.episode_returns = curve;
    Ok(ResultRecord {
        config: cfg.clone(),
        metrics,
        seed: cfg.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs a batch of configs on a bounded worker pool, preserving input order.
pub fn run_all(
    configs: &[ExperimentConfig],
    jobs: usize,
) -> Result<Vec<ResultRecord>, HarnessError> {
    let jobs = jobs.max(1);
    if jobs == 1 {
        return configs.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Precondition(e.to_string()))?;
    pool.install(|| configs.par_iter().map(run).collect())
}

/// Observation-space ablation: the tabular agent runs the Env and
/// Env+Energy sets; the network agent adds Action and Aux cumulatively.
pub fn ablate_observations(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<ResultRecord>, HarnessError> {
    use VarGroup::*;
    let sets: Vec<Vec<VarGroup>> = match cfg.agent {
        AgentKind::QLearning => vec![vec![Env], vec![Env, Energy]],
        AgentKind::Dqn => vec![
            vec![Env],
            vec![Env, Energy],
            vec![Env, Energy, Action],
            vec![Env, Energy, Action, Aux],
        ],
        other => {
            return Err(HarnessError::Precondition(format!(
                "observation ablation needs a learning agent, got {other}"
            )))
        }
    };
    let configs: Vec<ExperimentConfig> = sets
        .into_iter()
        .map(|obs_groups| ExperimentConfig {
            obs_groups,
            ..cfg.clone()
        })
        .collect();
    run_all(&configs, jobs)
}

/// Reward-weight ablation over omega in {0.25, 0.5, 0.75}.
pub fn ablate_reward_weights(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<ResultRecord>, HarnessError> {
    if cfg.agent != AgentKind::Dqn {
        return Err(HarnessError::Precondition(format!(
            "reward-weight ablation uses the dqn agent, got {}",
            cfg.agent
        )));
    }
    let configs: Vec<ExperimentConfig> = [0.25, 0.5, 0.75]
        .into_iter()
        .map(|omega| ExperimentConfig {
            reward: RewardParams {
                omega,
                ..cfg.reward
            },
            ..cfg.clone()
        })
        .collect();
    run_all(&configs, jobs)
}

/// Tile-density ablation: 5 degC / 10 % tiles versus 2 degC / 4 % tiles on
/// the Env observation group.
pub fn ablate_tile_density(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<ResultRecord>, HarnessError> {
    if cfg.agent != AgentKind::QLearning {
        return Err(HarnessError::Precondition(format!(
            "tile-density ablation uses the qlearning agent, got {}",
            cfg.agent
        )));
    }
    let configs: Vec<ExperimentConfig> = [(5.0, 10.0), (2.0, 4.0)]
        .into_iter()
        .map(|(temp, humidity)| ExperimentConfig {
            obs_groups: vec![VarGroup::Env],
            tile_temp_width: temp,
            tile_humidity_width: humidity,
            ..cfg.clone()
        })
        .collect();
    run_all(&configs, jobs)
}

fn groups_label(groups: &[VarGroup]) -> String {
    groups
        .iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// Writes `results.csv`, `results.json`, and one `curves/<run>.csv` per
/// record with a training curve. Idempotent for identical records.
pub fn write_results(records: &[ResultRecord], dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let curves_dir = dir.join("curves");
    std::fs::create_dir_all(&curves_dir).map_err(io_err(&curves_dir))?;

    let csv_path = dir.join("results.csv");
    let csv_err = |e: csv::Error| HarnessError::Io {
        path: csv_path.clone(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record([
        "config_hash",
        "agent",
        "building",
        "omega",
        "groups",
        "tile_width",
        "seed",
        "energy_kwh",
        "violation_pct",
    ])
    .map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.config.hash(),
            r.config.agent.to_string(),
            r.config.building.to_string(),
            format!("{}", r.config.reward.omega),
            groups_label(&r.config.obs_groups),
            format!("{}", r.config.tile_temp_width),
            format!("{}", r.seed),
            format!("{:.6}", r.metrics.energy_kwh),
            format!("{:.4}", r.metrics.violation_pct),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&csv_path))?;

    let json_path = dir.join("results.json");
    let json = serde_json::to_string_pretty(records).map_err(|e| HarnessError::Io {
        path: json_path.clone(),
        message: e.to_string(),
    })?;
    std::fs::write(&json_path, json).map_err(io_err(&json_path))?;

    for r in records {
        if r.metrics.episode_returns.is_empty() {
            continue;
        }
        let path = curves_dir.join(format!("{}-{}.csv", r.config.agent, r.config.hash()));
        let mut f = std::fs::File::create(&path).map_err(io_err(&path))?;
        writeln!(f, "episode,mean_reward").map_err(io_err(&path))?;
        for (episode, mean_reward) in r.metrics.episode_returns.iter().enumerate() {
            writeln!(f, "{episode},{mean_reward}").map_err(io_err(&path))?;
        }
    }
    Ok(())
}

/// Reads every `results.json` under `dir` (recursively) back into records.
pub fn collect_results(dir: &Path) -> Result<Vec<ResultRecord>, HarnessError> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(io_err(&d))?;
        for entry in entries {
            let entry = entry.map_err(io_err(&d))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "results.json") {
                let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
                let records: Vec<ResultRecord> =
                    serde_json::from_str(&text).map_err(|e| HarnessError::Io {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
                found.extend(records);
            }
        }
    }
    Ok(found)
}

/// Saves a trained artifact into `dir`; returns the file path.
pub fn save_artifact(artifact: &AgentArtifact, dir: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    match artifact {
        AgentArtifact::QLearning { artifact } => {
            let path = dir.join("qtable.json");
            let f = std::fs::File::create(&path).map_err(io_err(&path))?;
            artifact.save(f)?;
            Ok(path)
        }
        AgentArtifact::Dqn { mlp, .. } => {
            let path = dir.join("dqn.ckpt");
            let f = std::fs::File::create(&path).map_err(io_err(&path))?;
            dqn::save_checkpoint(mlp, f).map_err(dqn::DqnError::from)?;
            Ok(path)
        }
        AgentArtifact::Fixed { .. } | AgentArtifact::Random => Err(HarnessError::Precondition(
            "baseline agents have no artifact to save".to_string(),
        )),
    }
}

/// Loads an artifact produced by [`save_artifact`]. The DQN checkpoint only
/// stores weights, so the normalizer is rebuilt from the config's
/// observation groups.
pub fn load_artifact(path: &Path, cfg: &ExperimentConfig) -> Result<AgentArtifact, HarnessError> {
    match cfg.agent {
        AgentKind::QLearning => {
            let f = std::fs::File::open(path).map_err(io_err(path))?;
            Ok(AgentArtifact::QLearning {
                artifact: QTableArtifact::load(f)?,
            })
        }
        AgentKind::Dqn => {
            let f = std::fs::File::open(path).map_err(io_err(path))?;
            let mlp = dqn::load_checkpoint(f).map_err(dqn::DqnError::from)?;
            let spec = cfg.building.observation_spec().filter(&cfg.obs_groups)?;
            Ok(AgentArtifact::Dqn {
                mlp,
                normalizer: Normalizer::from_spec(&spec),
            })
        }
        AgentKind::Fixed => Ok(AgentArtifact::Fixed {
            action: cfg.fixed_action,
        }),
        AgentKind::Random => Ok(AgentArtifact::Random),
    }
}
