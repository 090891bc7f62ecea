//! Deep Q-network agent: a feed-forward Q-value approximator trained from a
//! uniform replay buffer against a periodically synchronized target network.
//! The network, backpropagation, and the optimizer live in [`mlp`]; nothing
//! here depends on an external autodiff or tensor crate.

mod mlp;
mod replay;

pub use mlp::{
    batch_loss, gradient, load_checkpoint, save_checkpoint, Gradients, Layer, Loss, Mlp,
    MlpError, Optimizer, OptimizerKind,
};
pub use replay::{ReplayBuffer, ReplayError, Transition};

use crate::env::{Observation, ObservationSpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DqnError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
}

/// Hyperparameters of the DQN agent. The defaults mirror the common
/// reference-implementation settings with the buffer sized for desk-scale
/// runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    /// Optimizer learning rate.
    pub lr: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Minibatch size per update.
    pub batch_size: usize,
    /// Replay capacity N.
    pub buffer_capacity: usize,
    /// Env steps between target-network synchronizations (C).
    pub target_sync_interval: usize,
    /// Env steps between gradient updates.
    pub train_frequency: usize,
    /// Transitions collected before learning starts.
    pub learning_starts: usize,
    /// Exploration at step 0.
    pub eps_init: f64,
    /// Exploration floor.
    pub eps_final: f64,
    /// Fraction of total training steps over which epsilon decays linearly.
    pub eps_decay_fraction: f64,
    /// Update rule.
    pub optimizer: OptimizerKind,
    /// Loss shape.
    pub loss: Loss,
    /// Hidden layer widths.
    pub hidden: [usize; 2],
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            gamma: 0.99,
            batch_size: 32,
            buffer_capacity: 100_000,
            target_sync_interval: 10_000,
            train_frequency: 4,
            learning_starts: 1000,
            eps_init: 1.0,
            eps_final: 0.05,
            eps_decay_fraction: 0.1,
            optimizer: OptimizerKind::AdaptiveMoment,
            loss: Loss::Squared,
            hidden: [64, 64],
        }
    }
}

/// Exploration rate at `step` of a run planned for `total_steps`: linear
/// from `eps_init` to `eps_final` over the first `eps_decay_fraction` of the
/// run, constant after.
pub fn eps_at(step: usize, total_steps: usize, cfg: &DqnConfig) -> f64 {
    let horizon = (total_steps as f64 * cfg.eps_decay_fraction).max(1.0);
    if step as f64 >= horizon {
        return cfg.eps_final;
    }
    cfg.eps_init + (cfg.eps_final - cfg.eps_init) * (step as f64 / horizon)
}

/// Fixed min-max scaler taken from an observation spec's variable ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Normalizer {
    pub fn from_spec(spec: &ObservationSpec) -> Self {
        Self {
            lo: spec.vars().iter().map(|v| v.lo).collect(),
            hi: spec.vars().iter().map(|v| v.hi).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Maps each value into [0, 1] over its spec range (values outside the
    /// range extrapolate linearly).
    pub fn normalize(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&x, (&lo, &hi))| (x - lo) / (hi - lo))
            .collect()
    }

    pub fn denormalize(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&z, (&lo, &hi))| lo + z * (hi - lo))
            .collect()
    }
}

/// Bootstrap targets `y_i = r_i + gamma max_a' Qhat(s'_i, a')`, with the
/// bootstrap dropped on terminal transitions.
pub fn compute_targets(
    batch: &[&Transition],
    target: &Mlp,
    gamma: f64,
) -> Result<Vec<f64>, DqnError> {
    let mut y = Vec::with_capacity(batch.len());
    for t in batch {
        if t.terminal {
            y.push(t.r);
        } else {
            let q = target.forward(&t.s_next)?;
            let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            y.push(t.r + gamma * max);
        }
    }
    Ok(y)
}

/// The learning agent: online network, delayed target copy, replay store,
/// and optimizer state.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    online: Mlp,
    target: Mlp,
    buffer: ReplayBuffer,
    optimizer: Optimizer,
    normalizer: Normalizer,
    cfg: DqnConfig,
    sample_rng: ChaCha8Rng,
}

impl DqnAgent {
    /// Builds an agent for observations described by `normalizer` and
    /// `n_actions` outputs. Weight init and minibatch sampling both derive
    /// from `seed`.
    pub fn new(normalizer: Normalizer, n_actions: usize, cfg: DqnConfig, seed: u64) -> Self {
        let dims = [
            normalizer.len(),
            cfg.hidden[0],
            cfg.hidden[1],
            n_actions,
        ];
        let online = Mlp::init(&dims, seed);
        let target = online.clone();
        let optimizer = Optimizer::new(cfg.optimizer, cfg.lr, &online);
        Self {
            online,
            target,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            optimizer,
            normalizer,
            cfg,
            sample_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9),
        }
    }

    pub fn config(&self) -> &DqnConfig {
        &self.cfg
    }

    pub fn online(&self) -> &Mlp {
        &self.online
    }

    pub fn target(&self) -> &Mlp {
        &self.target
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn buffer_fill(&self) -> usize {
        self.buffer.fill()
    }

    /// Epsilon-greedy action over the online network's Q-values; greedy ties
    /// break to the lowest index.
    pub fn act<R: Rng>(
        &self,
        obs: &Observation,
        eps: f64,
        rng: &mut R,
    ) -> Result<usize, DqnError> {
        let n = self.online.output_dim();
        if eps > 0.0 && rng.gen::<f64>() < eps {
            return Ok(rng.gen_range(0..n));
        }
        let q = self.online.forward(&self.normalizer.normalize(&obs.values))?;
        let mut best = 0;
        for a in 1..n {
            if q[a] > q[best] {
                best = a;
            }
        }
        Ok(best)
    }

    /// Greedy Q-values for a raw observation (diagnostics and evaluation).
    pub fn q_values(&self, obs: &Observation) -> Result<Vec<f64>, DqnError> {
        Ok(self
            .online
            .forward(&self.normalizer.normalize(&obs.values))?)
    }

    /// Normalizes and stores one environment transition.
    pub fn push_transition(
        &mut self,
        s: &Observation,
        a: usize,
        r: f64,
        s_next: &Observation,
        terminal: bool,
    ) {
        self.buffer.push(Transition {
            s: self.normalizer.normalize(&s.values),
            a,
            r,
            s_next: self.normalizer.normalize(&s_next.values),
            terminal,
        });
    }

    /// Learning hook called once per environment step.
    ///
    /// Every `train_frequency` steps (after `learning_starts` transitions
    /// have been collected) it samples a minibatch, computes targets from
    /// the frozen network, and applies one optimizer update; every
    /// `target_sync_interval` steps it copies the online weights into the
    /// target. Returns whether an update happened.
    pub fn train_step(&mut self, env_step: usize) -> Result<bool, DqnError> {
        let mut updated = false;
        if self.buffer.fill() >= self.cfg.learning_starts
            && env_step % self.cfg.train_frequency == 0
        {
            let batch = self.buffer.sample(self.cfg.batch_size, &mut self.sample_rng)?;
            let y = compute_targets(&batch, &self.target, self.cfg.gamma)?;
            let states: Vec<&[f64]> = batch.iter().map(|t| t.s.as_slice()).collect();
            let actions: Vec<usize> = batch.iter().map(|t| t.a).collect();
            let grads = gradient(&self.online, &states, &actions, &y, self.cfg.loss)?;
            self.optimizer.step(&mut self.online, &grads);
            updated = true;
        }
        if env_step % self.cfg.target_sync_interval == 0 {
            self.sync_target();
        }
        Ok(updated)
    }

    /// Copies the online weights into the target network.
    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{BuildingKind, VarGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_normalizer() -> Normalizer {
        let spec = BuildingKind::Warehouse
            .observation_spec()
            .filter(&[VarGroup::Env])
            .unwrap();
        Normalizer::from_spec(&spec)
    }

    fn obs(dim: usize, fill: f64) -> Observation {
        Observation {
            values: vec![fill; dim],
        }
    }

    #[test]
    fn targets_match_hand_examples() {
        // A zero target net bootstraps nothing.
        let net = Mlp {
            layers: vec![Layer {
                in_dim: 1,
                out_dim: 2,
                w: vec![0.0, 0.0],
                b: vec![0.0, -2.0],
            }],
        };
        let t1 = Transition {
            s: vec![0.0],
            a: 0,
            r: -1.0,
            s_next: vec![0.0],
            terminal: false,
        };
        // max Q = 0 -> y = -1.
        let y = compute_targets(&[&t1], &net, 0.99).unwrap();
        assert!((y[0] - (-1.0)).abs() < 1e-15);

        // max Q = -2 with both outputs at -2.
        let net = Mlp {
            layers: vec![Layer {
                in_dim: 1,
                out_dim: 2,
                w: vec![0.0, 0.0],
                b: vec![-2.0, -2.0],
            }],
        };
        let y = compute_targets(&[&t1], &net, 0.99).unwrap();
        assert!((y[0] - (-2.98)).abs() < 1e-12);

        // Terminal transitions ignore the bootstrap.
        let t2 = Transition {
            terminal: true,
            r: -5.0,
            ..t1.clone()
        };
        let y = compute_targets(&[&t2], &net, 0.99).unwrap();
        assert_eq!(y[0], -5.0);
    }

    #[test]
    fn targets_are_stale_between_syncs() {
        let mut agent = DqnAgent::new(toy_normalizer(), 10, DqnConfig::default(), 5);
        let t = Transition {
            s: vec![0.1; 12],
            a: 3,
            r: -1.0,
            s_next: vec![0.2; 12],
            terminal: false,
        };
        let y1 = compute_targets(&[&t], agent.target(), 0.99).unwrap();
        // Move the online net; without a sync the targets stay identical.
        let states = [t.s.as_slice()];
        let g = gradient(&agent.online, &states, &[3], &[5.0], Loss::Squared).unwrap();
        agent.optimizer.step(&mut agent.online, &g);
        let y2 = compute_targets(&[&t], agent.target(), 0.99).unwrap();
        assert_eq!(y1, y2);
        agent.sync_target();
        let y3 = compute_targets(&[&t], agent.target(), 0.99).unwrap();
        assert_ne!(y1, y3);
    }

    #[test]
    fn warmup_blocks_updates_and_sync_copies_bits() {
        let cfg = DqnConfig {
            learning_starts: 8,
            batch_size: 4,
            target_sync_interval: 10,
            train_frequency: 1,
            ..DqnConfig::default()
        };
        let mut agent = DqnAgent::new(toy_normalizer(), 10, cfg, 3);
        let dim = agent.normalizer().len();
        let before = agent.online().clone();
        for step in 1..=7 {
            agent.push_transition(&obs(dim, 20.0), 1, -1.0, &obs(dim, 21.0), false);
            assert!(!agent.train_step(step).unwrap());
        }
        assert_eq!(agent.online(), &before, "no update during warm-up");
        agent.push_transition(&obs(dim, 22.0), 2, -2.0, &obs(dim, 23.0), false);
        assert!(agent.train_step(8).unwrap());
        assert_ne!(agent.online(), &before);
        // At the sync step the copies are bit-identical.
        for step in 9..=10 {
            agent
                .push_transition(&obs(dim, 20.0), 0, -1.0, &obs(dim, 20.5), false);
            agent.train_step(step).unwrap();
        }
        assert_eq!(agent.online(), agent.target());
    }

    #[test]
    fn buffer_smaller_than_batch_errors() {
        let cfg = DqnConfig {
            learning_starts: 1,
            batch_size: 4,
            train_frequency: 1,
            ..DqnConfig::default()
        };
        let mut agent = DqnAgent::new(toy_normalizer(), 10, cfg, 3);
        let dim = agent.normalizer().len();
        agent.push_transition(&obs(dim, 20.0), 1, -1.0, &obs(dim, 21.0), false);
        assert!(matches!(
            agent.train_step(1),
            Err(DqnError::Replay(ReplayError::BufferTooSmall { .. }))
        ));
    }

    #[test]
    fn epsilon_schedule_hits_floor_at_decay_fraction() {
        let cfg = DqnConfig::default();
        assert_eq!(eps_at(0, 10_000, &cfg), 1.0);
        assert!((eps_at(500, 10_000, &cfg) - 0.525).abs() < 1e-12);
        assert!((eps_at(1000, 10_000, &cfg) - 0.05).abs() < 1e-12);
        assert_eq!(eps_at(5000, 10_000, &cfg), 0.05);
    }

    #[test]
    fn greedy_act_picks_max_and_random_act_is_uniform() {
        let mut agent = DqnAgent::new(toy_normalizer(), 10, DqnConfig::default(), 1);
        // Pin the last layer to prefer action 6.
        let last = agent.online.layers.last_mut().unwrap();
        last.w.iter_mut().for_each(|w| *w = 0.0);
        last.b.iter_mut().for_each(|b| *b = 0.0);
        last.b[6] = 1.0;
        let dim = agent.normalizer().len();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(agent.act(&obs(dim, 20.0), 0.0, &mut rng).unwrap(), 6);

        let n = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..n {
            counts[agent.act(&obs(dim, 20.0), 1.0, &mut rng).unwrap()] += 1;
        }
        let sigma = (0.1 * 0.9 / n as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.1).abs() < 3.0 * sigma, "freq {freq}");
        }
    }

    #[test]
    fn normalization_midpoint_and_inverse() {
        let norm = toy_normalizer();
        let mid: Vec<f64> = {
            let spec = BuildingKind::Warehouse
                .observation_spec()
                .filter(&[VarGroup::Env])
                .unwrap();
            spec.vars().iter().map(|v| 0.5 * (v.lo + v.hi)).collect()
        };
        for z in norm.normalize(&mid) {
            assert!((z - 0.5).abs() < 1e-12);
        }
        let x = vec![12.0; norm.len()];
        let back = norm.denormalize(&norm.normalize(&x));
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_seed_gives_bit_identical_training() {
        let cfg = DqnConfig {
            learning_starts: 16,
            batch_size: 8,
            train_frequency: 2,
            target_sync_interval: 20,
            ..DqnConfig::default()
        };
        let run = || {
            let mut agent = DqnAgent::new(toy_normalizer(), 10, cfg, 99);
            let dim = agent.normalizer().len();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for step in 1..=200 {
                let fill = rng.gen_range(15.0..30.0);
                agent.push_transition(
                    &obs(dim, fill),
                    step % 10,
                    -(fill / 10.0),
                    &obs(dim, fill + 0.5),
                    false,
                );
                agent.train_step(step).unwrap();
            }
            agent.online().clone()
        };
        assert_eq!(run(), run());
    }
}
