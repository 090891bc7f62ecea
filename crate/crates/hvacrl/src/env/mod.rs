//! MDP layer over the thermal simulator: observation assembly, discrete
//! setpoint actions, and the energy/comfort reward.

mod actions;
mod obs;

pub use actions::{ActionError, ActionTable};
pub use obs::{filter_observation, ObsError, ObsSource, ObsVar, Observation, ObservationSpec, VarGroup};

use crate::thermal::{
    datacenter_model, warehouse_model, BuildingModel, BuildingState, ThermalError,
};
use crate::weather::{WeatherError, WeatherSeries};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Setpoint row the thermostat observation reports before the first action.
pub const INITIAL_ACTION: usize = 5;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("weather series is empty or too short for one step")]
    EmptyWeather,
    #[error("episode is finished; reset the environment")]
    EpisodeFinished,
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    #[error(transparent)]
    Weather(#[from] WeatherError),
}

/// Which building an environment simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildingKind {
    Warehouse,
    Datacenter,
}

impl BuildingKind {
    pub fn model(self) -> BuildingModel {
        match self {
            BuildingKind::Warehouse => warehouse_model(),
            BuildingKind::Datacenter => datacenter_model(),
        }
    }

    pub fn action_table(self) -> ActionTable {
        match self {
            BuildingKind::Warehouse => ActionTable::warehouse(),
            BuildingKind::Datacenter => ActionTable::datacenter(),
        }
    }

    pub fn observation_spec(self) -> ObservationSpec {
        match self {
            BuildingKind::Warehouse => ObservationSpec::warehouse(),
            BuildingKind::Datacenter => ObservationSpec::datacenter(),
        }
    }
}

impl std::fmt::Display for BuildingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BuildingKind::Warehouse => "warehouse",
            BuildingKind::Datacenter => "datacenter",
        })
    }
}

/// How the temperature term treats out-of-band temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ViolationForm {
    /// `|T - t_max| + |T - t_min|` outside the band, zero inside.
    #[default]
    Paper,
    /// Distance to the nearest band edge, zero inside.
    Distance,
}

/// Weights and comfort band of the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Energy weight in [0, 1]; the temperature term gets `1 - omega`.
    pub omega: f64,
    /// Energy scale, 1/W.
    pub lambda_p: f64,
    /// Temperature scale, 1/degC.
    pub lambda_t: f64,
    /// Comfort band lower edge, degC.
    pub t_min: f64,
    /// Comfort band upper edge, degC.
    pub t_max: f64,
    /// Shape of the out-of-band penalty.
    pub violation_form: ViolationForm,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            omega: 0.5,
            lambda_p: 1e-4,
            lambda_t: 1.0,
            t_min: 18.0,
            t_max: 27.0,
            violation_form: ViolationForm::Paper,
        }
    }
}

impl RewardParams {
    /// Out-of-band penalty for one zone temperature; zero inside the band.
    pub fn violation(&self, t: f64) -> f64 {
        if t >= self.t_min && t <= self.t_max {
            0.0
        } else {
            match self.violation_form {
                ViolationForm::Paper => (t - self.t_max).abs() + (t - self.t_min).abs(),
                ViolationForm::Distance => {
                    if t > self.t_max {
                        t - self.t_max
                    } else {
                        self.t_min - t
                    }
                }
            }
        }
    }
}

/// Reward for one step: a weighted negative energy term plus a weighted
/// negative temperature-violation term summed over zones. Never positive.
pub fn reward(p_total: f64, zone_temps: &[f64], params: &RewardParams) -> f64 {
    let violation: f64 = zone_temps.iter().map(|&t| params.violation(t)).sum();
    -params.omega * params.lambda_p * p_total
        - (1.0 - params.omega) * params.lambda_t * violation
}

/// Per-step diagnostics alongside the reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Average electric power over the step, W.
    pub p_total: f64,
    /// Per-zone flag: temperature outside the comfort band after the step.
    pub violations: Vec<bool>,
    /// Simulation clock after the step, seconds.
    pub sim_time: f64,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// A sequential decision process: weather drives the thermal model, the
/// agent picks one of 10 setpoint rows each step.
#[derive(Debug, Clone)]
pub struct Environment {
    kind: BuildingKind,
    model: BuildingModel,
    actions: ActionTable,
    spec: ObservationSpec,
    weather: WeatherSeries,
    reward_params: RewardParams,
    dt: f64,
    seed: u64,
    episode_len: usize,
    state: BuildingState,
    last_action: usize,
    last_p_total: f64,
    steps_taken: usize,
}

impl Environment {
    /// Builds an environment with the building's default model.
    pub fn new(
        kind: BuildingKind,
        weather: WeatherSeries,
        reward_params: RewardParams,
        dt: f64,
        seed: u64,
    ) -> Result<Self, EnvError> {
        Self::with_model(kind, kind.model(), weather, reward_params, dt, seed)
    }

    /// Builds an environment with a custom building model (parameter
    /// overrides from the experiment config).
    pub fn with_model(
        kind: BuildingKind,
        model: BuildingModel,
        weather: WeatherSeries,
        reward_params: RewardParams,
        dt: f64,
        seed: u64,
    ) -> Result<Self, EnvError> {
        if dt <= 0.0 {
            return Err(EnvError::Thermal(ThermalError::NonPositiveDt { dt }));
        }
        let hours = weather.len();
        if hours < 2 {
            return Err(EnvError::EmptyWeather);
        }
        let episode_len = (3600.0 * (hours as f64 - 1.0) / dt).floor() as usize;
        if episode_len == 0 {
            return Err(EnvError::EmptyWeather);
        }
        let state = BuildingState {
            zone_temps: Vec::new(),
            zone_rh: Vec::new(),
            energy_meter: 0.0,
            sim_time: 0.0,
        };
        let mut env = Self {
            kind,
            model,
            actions: kind.action_table(),
            spec: kind.observation_spec(),
            weather,
            reward_params,
            dt,
            seed,
            episode_len,
            state,
            last_action: INITIAL_ACTION,
            last_p_total: 0.0,
            steps_taken: 0,
        };
        env.reset();
        Ok(env)
    }

    /// Restores the initial state drawn from the environment seed and
    /// returns the first observation. Initial zone temperatures are uniform
    /// in [18, 24] degC.
    pub fn reset(&mut self) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let temps: Vec<f64> = (0..self.model.zone_count())
            .map(|_| rng.gen_range(18.0..24.0))
            .collect();
        self.state = self.model.initial_state(temps);
        self.last_action = INITIAL_ACTION;
        self.last_p_total = 0.0;
        self.steps_taken = 0;
        self.observe()
    }

    pub fn kind(&self) -> BuildingKind {
        self.kind
    }

    pub fn spec(&self) -> &ObservationSpec {
        &self.spec
    }

    pub fn action_table(&self) -> &ActionTable {
        &self.actions
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn reward_params(&self) -> &RewardParams {
        &self.reward_params
    }

    pub fn model(&self) -> &BuildingModel {
        &self.model
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Steps in one full pass over the weather segment.
    pub fn episode_len(&self) -> usize {
        self.episode_len
    }

    pub fn done(&self) -> bool {
        self.steps_taken >= self.episode_len
    }

    /// Current observation vector, aligned with [`Self::spec`].
    pub fn observe(&self) -> Observation {
        let outdoor = self
            .weather
            .sample(self.state.sim_time.min(self.weather.max_time_s()))
            .expect("sim_time stays within the weather series");
        let cmd = self
            .actions
            .decode(self.last_action)
            .expect("last action is always valid");
        let occupants = self.model.occupants_at(self.state.sim_time);
        let values = self
            .spec
            .vars()
            .iter()
            .map(|v| match v.source {
                ObsSource::OutdoorTemp => outdoor.t_out,
                ObsSource::OutdoorHumidity => outdoor.h_out,
                ObsSource::WindSpeed => outdoor.v_out,
                ObsSource::WindDirection => outdoor.w_out,
                ObsSource::DiffuseSolar => outdoor.s_diffuse,
                ObsSource::DirectSolar => outdoor.s_direct,
                ObsSource::ZoneTemp(z) => self.state.zone_temps[z],
                ObsSource::ZoneHumidity(z) => self.state.zone_rh[z],
                ObsSource::HeatingSetpoint(z) => cmd.zones[z].heating,
                ObsSource::CoolingSetpoint(z) => {
                    cmd.zones[z].cooling.expect("cooled zone has a setpoint")
                }
                ObsSource::OccupantCount(z) => occupants[z],
                ObsSource::MeanRadiantTemp(z) => self.state.zone_temps[z],
                ObsSource::ClothingValue(_) => 0.5,
                ObsSource::FangerPpd(z) => {
                    (100.0 * (self.state.zone_temps[z] - 23.0).abs() / 10.0).clamp(0.0, 100.0)
                }
                ObsSource::PeopleAirTemp(z) => self.state.zone_temps[z],
                ObsSource::TotalPower => self.last_p_total,
            })
            .collect();
        Observation { values }
    }

    /// Applies action `a` for one step of `dt` seconds.
    pub fn step(&mut self, a: usize) -> Result<StepResult, EnvError> {
        if self.done() {
            return Err(EnvError::EpisodeFinished);
        }
        let cmd = self.actions.decode(a)?.clone();
        let outdoor = self.weather.sample(self.state.sim_time)?;
        let (next, p_total) = self.model.step(&self.state, &outdoor, &cmd, self.dt)?;
        self.state = next;
        self.last_action = a;
        self.last_p_total = p_total;
        self.steps_taken += 1;
        let r = reward(p_total, &self.state.zone_temps, &self.reward_params);
        let violations = self
            .state
            .zone_temps
            .iter()
            .map(|&t| self.reward_params.violation(t) > 0.0)
            .collect();
        Ok(StepResult {
            observation: self.observe(),
            reward: r,
            done: self.done(),
            info: StepInfo {
                p_total,
                violations,
                sim_time: self.state.sim_time,
            },
        })
    }
}
