//! Tabular Q-learning over a tile-coded state space.
//!
//! Each continuous observation variable is aggregated into uniform bands
//! (one tiling); the joint bin vector is flattened into a mixed-radix index
//! that keys a sparse Q table. Absent entries read as zero.

use crate::env::{ObsSource, Observation, ObservationSpec};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("tile spec has {spec} dimensions but the observation has {obs}")]
    SpecMismatch { spec: usize, obs: usize },
    #[error("state space of {states} states x {actions} actions exceeds the cap of {cap} entries")]
    StateSpaceTooLarge {
        states: u128,
        actions: usize,
        cap: u64,
    },
    #[error("Q table is at its memory cap of {cap} entries")]
    MemoryCapExceeded { cap: u64 },
    #[error("invalid tile dimension {name}: lo {lo}, hi {hi}, width {width}")]
    BadTileDim {
        name: String,
        lo: f64,
        hi: f64,
        width: f64,
    },
    #[error("artifact format error: {0}")]
    BadArtifact(String),
}

/// One tiled variable: values are clamped into `[lo, hi)` and binned at
/// uniform `width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileDim {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
}

impl TileDim {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, width: f64) -> Result<Self, TabularError> {
        let name = name.into();
        if !(lo < hi) || !(width > 0.0) {
            return Err(TabularError::BadTileDim {
                name,
                lo,
                hi,
                width,
            });
        }
        Ok(Self {
            name,
            lo,
            hi,
            width,
        })
    }

    /// Number of bins, `ceil((hi - lo) / width)`, at least 1.
    pub fn bins(&self) -> usize {
        (((self.hi - self.lo) / self.width).ceil() as usize).max(1)
    }

    fn bin_of(&self, x: f64) -> usize {
        let bins = self.bins();
        if x < self.lo {
            return 0;
        }
        let b = ((x - self.lo) / self.width).floor() as usize;
        b.min(bins - 1)
    }
}

/// Tile layout for every variable of an observation, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileCodingSpec {
    pub dims: Vec<TileDim>,
}

/// Default tile widths for observation variables the agent bins coarsely.
/// Temperatures and humidities carry the paper-style resolutions passed by
/// the caller; wind, direction, and solar collapse into a single tile since
/// the setpoint policy does not hinge on them.
fn default_dim(var: &crate::env::ObsVar, temp_width: f64, humidity_width: f64) -> TileDim {
    let (lo, hi, width) = match var.source {
        ObsSource::OutdoorTemp => (0.0, 45.0, temp_width),
        ObsSource::ZoneTemp(_) | ObsSource::MeanRadiantTemp(_) | ObsSource::PeopleAirTemp(_) => {
            (15.0, 40.0, temp_width)
        }
        ObsSource::OutdoorHumidity => (30.0, 90.0, humidity_width),
        ObsSource::ZoneHumidity(_) => (30.0, 80.0, humidity_width),
        ObsSource::WindSpeed => (0.0, 25.0, 25.0),
        ObsSource::WindDirection => (0.0, 360.0, 360.0),
        ObsSource::DiffuseSolar | ObsSource::DirectSolar => (0.0, 1200.0, 1200.0),
        ObsSource::HeatingSetpoint(_) | ObsSource::CoolingSetpoint(_) => (15.0, 30.0, temp_width),
        ObsSource::OccupantCount(_) => (0.0, 20.0, 10.0),
        ObsSource::ClothingValue(_) => (0.0, 1.0, 1.0),
        ObsSource::FangerPpd(_) => (0.0, 100.0, 50.0),
        ObsSource::TotalPower => (var.lo, var.hi, (var.hi - var.lo) / 10.0),
    };
    TileDim {
        name: var.name.clone(),
        lo,
        hi,
        width,
    }
}

impl TileCodingSpec {
    /// Builds a spec for every variable of `obs_spec` with the given
    /// temperature and humidity tile widths (degC and % respectively).
    pub fn from_observation_spec(
        obs_spec: &ObservationSpec,
        temp_width: f64,
        humidity_width: f64,
    ) -> Self {
        Self {
            dims: obs_spec
                .vars()
                .iter()
                .map(|v| default_dim(v, temp_width, humidity_width))
                .collect(),
        }
    }

    /// Total number of discrete states, the product of per-variable bins.
    pub fn state_count(&self) -> u128 {
        self.dims
            .iter()
            .map(|d| d.bins() as u128)
            .fold(1u128, |acc, b| acc.saturating_mul(b))
    }
}

/// A tile-coded observation: per-variable bins and the flat index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteState {
    pub bins: Vec<usize>,
    pub flat: u64,
}

/// Maps an observation to its discrete state. Values outside a dimension's
/// range clamp to the edge bins.
pub fn encode(obs: &Observation, spec: &TileCodingSpec) -> Result<DiscreteState, TabularError> {
    if obs.values.len() != spec.dims.len() {
        return Err(TabularError::SpecMismatch {
            spec: spec.dims.len(),
            obs: obs.values.len(),
        });
    }
    let mut bins = Vec::with_capacity(spec.dims.len());
    let mut flat: u64 = 0;
    for (dim, &x) in spec.dims.iter().zip(&obs.values) {
        let b = dim.bin_of(x);
        bins.push(b);
        flat = flat
            .saturating_mul(dim.bins() as u64)
            .saturating_add(b as u64);
    }
    Ok(DiscreteState { bins, flat })
}

/// Hyperparameters of the Q-learning agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QLearningConfig {
    /// Learning rate alpha.
    pub alpha: f64,
    /// Discount factor gamma.
    pub gamma: f64,
    /// Exploration rate at episode 0.
    pub eps_init: f64,
    /// Linear decrement of epsilon per completed episode.
    pub eps_rate: f64,
    /// Exploration floor.
    pub eps_final: f64,
    /// Maximum number of stored (state, action) entries.
    pub memory_cap: u64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0001,
            gamma: 0.99,
            eps_init: 1.0,
            eps_rate: 0.12,
            eps_final: 0.1,
            memory_cap: 100_000_000_000,
        }
    }
}

/// Exploration rate after `episode` completed episodes:
/// `max(eps_final, eps_init - eps_rate * episode)`.
pub fn anneal_eps(episode: u32, cfg: &QLearningConfig) -> f64 {
    (cfg.eps_init - cfg.eps_rate * episode as f64).max(cfg.eps_final)
}

/// Rejects tile specs whose dense size `states x actions` exceeds `cap`.
pub fn state_space_guard(
    spec: &TileCodingSpec,
    n_actions: usize,
    cap: u64,
) -> Result<(), TabularError> {
    let states = spec.state_count();
    if states.saturating_mul(n_actions as u128) > cap as u128 {
        return Err(TabularError::StateSpaceTooLarge {
            states,
            actions: n_actions,
            cap,
        });
    }
    Ok(())
}

/// Sparse action-value table keyed by (flat state, action). Missing entries
/// are zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QTable {
    entries: HashMap<(u64, usize), f64>,
    n_actions: usize,
}

impl QTable {
    pub fn new(n_actions: usize) -> Self {
        Self {
            entries: HashMap::new(),
            n_actions,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, s: &DiscreteState, a: usize) -> f64 {
        self.entries.get(&(s.flat, a)).copied().unwrap_or(0.0)
    }

    /// Greedy action with ties broken toward the lowest index.
    pub fn argmax(&self, s: &DiscreteState) -> usize {
        let mut best = 0;
        let mut best_v = self.get(s, 0);
        for a in 1..self.n_actions {
            let v = self.get(s, a);
            if v > best_v {
                best = a;
                best_v = v;
            }
        }
        best
    }

    fn max_value(&self, s: &DiscreteState) -> f64 {
        (0..self.n_actions)
            .map(|a| self.get(s, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Epsilon-greedy action selection over the table.
pub fn select_action<R: Rng>(q: &QTable, s: &DiscreteState, eps: f64, rng: &mut R) -> usize {
    if eps > 0.0 && rng.gen::<f64>() < eps {
        rng.gen_range(0..q.n_actions())
    } else {
        q.argmax(s)
    }
}

/// One temporal-difference update:
/// `Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a))`.
pub fn update(
    q: &mut QTable,
    s: &DiscreteState,
    a: usize,
    r: f64,
    s_next: &DiscreteState,
    cfg: &QLearningConfig,
) -> Result<(), TabularError> {
    let target = r + cfg.gamma * q.max_value(s_next);
    let key = (s.flat, a);
    if !q.entries.contains_key(&key) && q.entries.len() as u64 >= cfg.memory_cap {
        return Err(TabularError::MemoryCapExceeded {
            cap: cfg.memory_cap,
        });
    }
    let entry = q.entries.entry(key).or_insert(0.0);
    *entry += cfg.alpha * (target - *entry);
    Ok(())
}

/// Serializable Q-learning artifact: the tile layout plus the sorted sparse
/// entries as (flat index, action, value) triples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QTableArtifact {
    pub tiles: TileCodingSpec,
    pub n_actions: usize,
    pub entries: Vec<(u64, usize, f64)>,
}

impl QTableArtifact {
    pub fn from_table(table: &QTable, tiles: TileCodingSpec) -> Self {
        let mut entries: Vec<(u64, usize, f64)> = table
            .entries
            .iter()
            .map(|(&(s, a), &v)| (s, a, v))
            .collect();
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Self {
            tiles,
            n_actions: table.n_actions,
            entries,
        }
    }

    pub fn into_table(self) -> (QTable, TileCodingSpec) {
        let mut table = QTable::new(self.n_actions);
        for (s, a, v) in self.entries {
            table.entries.insert((s, a), v);
        }
        (table, self.tiles)
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<(), TabularError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| TabularError::BadArtifact(e.to_string()))?;
        w.write_all(json.as_bytes())
            .map_err(|e| TabularError::BadArtifact(e.to_string()))
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self, TabularError> {
        let mut buf = String::new();
        r.read_to_string(&mut buf)
            .map_err(|e| TabularError::BadArtifact(e.to_string()))?;
        serde_json::from_str(&buf).map_err(|e| TabularError::BadArtifact(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(lo: f64, hi: f64, width: f64) -> TileDim {
        TileDim::new("x", lo, hi, width).unwrap()
    }

    fn state(spec: &TileCodingSpec, values: Vec<f64>) -> DiscreteState {
        encode(&Observation { values }, spec).unwrap()
    }

    #[test]
    fn binning_arithmetic() {
        let spec = TileCodingSpec {
            dims: vec![dim(-20.0, 50.0, 5.0)],
        };
        assert_eq!(state(&spec, vec![21.3]).bins, vec![8]);
        assert_eq!(state(&spec, vec![-25.0]).bins, vec![0]);
        assert_eq!(state(&spec, vec![50.0]).bins, vec![13]);
        assert_eq!(state(&spec, vec![1000.0]).bins, vec![13]);
        assert_eq!(spec.dims[0].bins(), 14);
    }

    #[test]
    fn same_band_same_state() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 50.0, 5.0), dim(0.0, 100.0, 10.0)],
        };
        let a = state(&spec, vec![21.0, 55.0]);
        let b = state(&spec, vec![24.9, 59.9]);
        assert_eq!(a, b);
        let c = state(&spec, vec![25.0, 55.0]);
        assert_ne!(a, c);
    }

    #[test]
    fn encode_rejects_mismatched_lengths() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 1.0, 0.5)],
        };
        let obs = Observation {
            values: vec![0.1, 0.2],
        };
        assert!(matches!(
            encode(&obs, &spec),
            Err(TabularError::SpecMismatch { spec: 1, obs: 2 })
        ));
    }

    #[test]
    fn flat_index_is_mixed_radix() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 30.0, 10.0), dim(0.0, 20.0, 10.0)],
        };
        // bins: 3 and 2; flat = b0 * 2 + b1.
        let s = state(&spec, vec![25.0, 15.0]);
        assert_eq!(s.bins, vec![2, 1]);
        assert_eq!(s.flat, 5);
        assert_eq!(spec.state_count(), 6);
    }

    #[test]
    fn greedy_selection_breaks_ties_low() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 1.0, 1.0)],
        };
        let s = state(&spec, vec![0.5]);
        let mut q = QTable::new(10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_action(&q, &s, 0.0, &mut rng), 0);
        q.entries.insert((s.flat, 3), 1.0);
        assert_eq!(select_action(&q, &s, 0.0, &mut rng), 3);
    }

    #[test]
    fn greedy_is_invariant_to_constant_shift() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 1.0, 1.0)],
        };
        let s = state(&spec, vec![0.5]);
        let mut q = QTable::new(4);
        for (a, v) in [(0, -1.0), (1, 2.0), (2, 0.5), (3, -3.0)] {
            q.entries.insert((s.flat, a), v);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let before = select_action(&q, &s, 0.0, &mut rng);
        for a in 0..4 {
            *q.entries.get_mut(&(s.flat, a)).unwrap() += 17.5;
        }
        assert_eq!(select_action(&q, &s, 0.0, &mut rng), before);
    }

    #[test]
    fn update_matches_hand_examples() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 2.0, 1.0)],
        };
        let s = state(&spec, vec![0.5]);
        let s_next = state(&spec, vec![1.5]);

        let mut q = QTable::new(2);
        let cfg = QLearningConfig {
            alpha: 0.0001,
            gamma: 0.99,
            ..QLearningConfig::default()
        };
        update(&mut q, &s, 0, -1.0, &s_next, &cfg).unwrap();
        assert!((q.get(&s, 0) - (-0.0001)).abs() < 1e-15);

        let mut q = QTable::new(2);
        q.entries.insert((s.flat, 0), 2.0);
        q.entries.insert((s_next.flat, 1), 3.0);
        let cfg = QLearningConfig {
            alpha: 0.5,
            gamma: 0.9,
            ..QLearningConfig::default()
        };
        update(&mut q, &s, 0, 1.0, &s_next, &cfg).unwrap();
        assert!((q.get(&s, 0) - 2.85).abs() < 1e-12);

        let mut q = QTable::new(2);
        q.entries.insert((s.flat, 0), 2.0);
        let cfg = QLearningConfig {
            alpha: 0.0,
            ..QLearningConfig::default()
        };
        update(&mut q, &s, 0, -5.0, &s_next, &cfg).unwrap();
        assert_eq!(q.get(&s, 0), 2.0);
    }

    #[test]
    fn update_fixed_point() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 10.0, 1.0)],
        };
        let cfg = QLearningConfig {
            alpha: 0.3,
            gamma: 0.9,
            ..QLearningConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            // Disjoint value ranges keep s and s_next in different tiles.
            let s = state(&spec, vec![rng.gen_range(0.0..5.0)]);
            let s_next = state(&spec, vec![rng.gen_range(5.0..10.0)]);
            let mut q = QTable::new(3);
            for a in 0..3 {
                q.entries.insert((s_next.flat, a), rng.gen_range(-5.0..5.0));
            }
            let r = rng.gen_range(-3.0..0.0);
            let fixed = r + cfg.gamma * q.max_value(&s_next);
            q.entries.insert((s.flat, 0), fixed);
            update(&mut q, &s, 0, r, &s_next, &cfg).unwrap();
            assert!((q.get(&s, 0) - fixed).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_cap_is_enforced() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 10.0, 1.0)],
        };
        let cfg = QLearningConfig {
            memory_cap: 2,
            ..QLearningConfig::default()
        };
        let mut q = QTable::new(2);
        let s0 = state(&spec, vec![0.5]);
        let s1 = state(&spec, vec![1.5]);
        let s2 = state(&spec, vec![2.5]);
        update(&mut q, &s0, 0, -1.0, &s1, &cfg).unwrap();
        update(&mut q, &s1, 0, -1.0, &s2, &cfg).unwrap();
        assert!(matches!(
            update(&mut q, &s2, 0, -1.0, &s0, &cfg),
            Err(TabularError::MemoryCapExceeded { cap: 2 })
        ));
        // Updating an existing entry is still allowed at the cap.
        update(&mut q, &s0, 0, -2.0, &s1, &cfg).unwrap();
    }

    #[test]
    fn epsilon_anneals_linearly_to_floor() {
        let cfg = QLearningConfig::default();
        assert_eq!(anneal_eps(0, &cfg), 1.0);
        assert!((anneal_eps(1, &cfg) - 0.88).abs() < 1e-12);
        assert!((anneal_eps(8, &cfg) - 0.1).abs() < 1e-12);
        assert_eq!(anneal_eps(100, &cfg), 0.1);
    }

    #[test]
    fn guard_arithmetic() {
        // 12 variables of 14 bins each: far beyond a 1e7-entry cap.
        let spec = TileCodingSpec {
            dims: (0..12).map(|_| dim(-20.0, 50.0, 5.0)).collect(),
        };
        assert!(matches!(
            state_space_guard(&spec, 10, 10_000_000),
            Err(TabularError::StateSpaceTooLarge { .. })
        ));
        // 3 variables of 10 bins: 10^4 entries fits easily.
        let spec = TileCodingSpec {
            dims: (0..3).map(|_| dim(0.0, 100.0, 10.0)).collect(),
        };
        state_space_guard(&spec, 10, 10_000_000).unwrap();
        assert!(matches!(
            state_space_guard(&spec, 10, 0),
            Err(TabularError::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn default_env_group_tiles_fit_a_1e7_cap() {
        let spec = crate::env::ObservationSpec::warehouse()
            .filter(&[crate::env::VarGroup::Env])
            .unwrap();
        let tiles = TileCodingSpec::from_observation_spec(&spec, 5.0, 10.0);
        state_space_guard(&tiles, 10, 10_000_000).unwrap();
        // The finer ablation layout still passes the default cap.
        let fine = TileCodingSpec::from_observation_spec(&spec, 2.0, 4.0);
        state_space_guard(&fine, 10, QLearningConfig::default().memory_cap).unwrap();
    }

    #[test]
    fn encode_is_idempotent_on_bin_centers() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 50.0, 5.0), dim(0.0, 100.0, 10.0)],
        };
        let s = state(&spec, vec![23.7, 68.2]);
        let centers: Vec<f64> = spec
            .dims
            .iter()
            .zip(&s.bins)
            .map(|(d, &b)| d.lo + (b as f64 + 0.5) * d.width)
            .collect();
        let again = state(&spec, centers);
        assert_eq!(s, again);
    }

    #[test]
    fn artifact_round_trips_and_is_sorted() {
        let spec = TileCodingSpec {
            dims: vec![dim(0.0, 10.0, 1.0)],
        };
        let mut q = QTable::new(3);
        q.entries.insert((5, 2), -1.5);
        q.entries.insert((1, 0), -0.25);
        q.entries.insert((5, 0), 4.0);
        let artifact = QTableArtifact::from_table(&q, spec.clone());
        assert_eq!(
            artifact.entries,
            vec![(1, 0, -0.25), (5, 0, 4.0), (5, 2, -1.5)]
        );
        let mut buf = Vec::new();
        artifact.save(&mut buf).unwrap();
        let loaded = QTableArtifact::load(&buf[..]).unwrap();
        let (table, tiles) = loaded.into_table();
        assert_eq!(tiles, spec);
        let s = DiscreteState {
            bins: vec![5],
            flat: 5,
        };
        assert_eq!(table.get(&s, 0), 4.0);
        assert_eq!(table.get(&s, 1), 0.0);
    }
}
