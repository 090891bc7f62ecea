//! Dense feed-forward Q-network with hand-rolled backpropagation.
//!
//! The network is a chain of affine layers with ReLU between them and a
//! linear output, one unit per action. Gradients are the exact derivative of
//! the mean squared error between the taken-action outputs and their
//! targets; the test suite checks them against central finite differences.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("input has {got} values but the first layer expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("target vector has {y} entries for a batch of {batch}")]
    TargetLengthMismatch { y: usize, batch: usize },
    #[error("checkpoint format error: {0}")]
    BadCheckpoint(String),
}

/// One affine layer, weights stored row-major as `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
        }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.b[o];
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }
}

/// The Q-value network parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Glorot-uniform initialization (`+-sqrt(6 / (fan_in + fan_out))`),
    /// deterministic for a fixed seed.
    pub fn init(dims: &[usize], seed: u64) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|d| {
                let (in_dim, out_dim) = (d[0], d[1]);
                let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
                Layer {
                    in_dim,
                    out_dim,
                    w: (0..in_dim * out_dim)
                        .map(|_| rng.gen_range(-bound..bound))
                        .collect(),
                    b: vec![0.0; out_dim],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// Q-values for one input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        if x.len() != self.input_dim() {
            return Err(MlpError::DimensionMismatch {
                got: x.len(),
                expected: self.input_dim(),
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i < last {
                for v in next.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass keeping every layer's post-activation output, input
    /// first. Used by backpropagation.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.apply(acts.last().unwrap(), &mut out);
            if i < last {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(out);
        }
        acts
    }
}

/// Per-layer gradient buffers, same shapes as the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            layers: mlp
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim, l.out_dim))
                .collect(),
        }
    }
}

/// Loss applied to the per-sample residual `Q(s,a) - y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Mean of squared residuals.
    #[default]
    Squared,
    /// Huber with delta = 1; quadratic near zero, linear tails.
    Huber,
}

impl Loss {
    pub fn value(self, residual: f64) -> f64 {
        match self {
            Loss::Squared => residual * residual,
            Loss::Huber => {
                if residual.abs() <= 1.0 {
                    0.5 * residual * residual
                } else {
                    residual.abs() - 0.5
                }
            }
        }
    }

    fn derivative(self, residual: f64) -> f64 {
        match self {
            Loss::Squared => 2.0 * residual,
            Loss::Huber => residual.clamp(-1.0, 1.0),
        }
    }
}

/// Mean loss of the taken-action outputs against their targets.
pub fn batch_loss(
    mlp: &Mlp,
    states: &[&[f64]],
    actions: &[usize],
    y: &[f64],
    loss: Loss,
) -> Result<f64, MlpError> {
    let mut total = 0.0;
    for ((s, &a), &target) in states.iter().zip(actions).zip(y) {
        let q = mlp.forward(s)?;
        total += loss.value(q[a] - target);
    }
    Ok(total / states.len() as f64)
}

/// Exact gradient of [`batch_loss`] with respect to every weight and bias.
/// Only the taken action's output unit contributes per sample.
pub fn gradient(
    mlp: &Mlp,
    states: &[&[f64]],
    actions: &[usize],
    y: &[f64],
    loss: Loss,
) -> Result<Gradients, MlpError> {
    if y.len() != states.len() || actions.len() != states.len() {
        return Err(MlpError::TargetLengthMismatch {
            y: y.len(),
            batch: states.len(),
        });
    }
    let mut grads = Gradients::zeros_like(mlp);
    let batch = states.len() as f64;
    let n_layers = mlp.layers.len();

    for ((s, &a), &target) in states.iter().zip(actions).zip(y) {
        let acts = mlp.forward_trace(s);
        let out = acts.last().unwrap();
        // dL/d(output unit a); other outputs do not enter the loss.
        let mut delta = vec![0.0; mlp.output_dim()];
        delta[a] = loss.derivative(out[a] - target) / batch;

        for l in (0..n_layers).rev() {
            let layer = &mlp.layers[l];
            let input = &acts[l];
            let g = &mut grads.layers[l];
            for o in 0..layer.out_dim {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                g.b[o] += d;
                let row = &mut g.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (gw, xi) in row.iter_mut().zip(input) {
                    *gw += d * xi;
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (p, wi) in prev.iter_mut().zip(row) {
                        *p += d * wi;
                    }
                }
                // ReLU mask: the stored activation is already rectified.
                for (p, &act) in prev.iter_mut().zip(&acts[l]) {
                    if act <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    Ok(grads)
}

/// Gradient-descent rule applied to the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    /// Plain gradient descent: `theta -= lr * g`.
    PlainGradient,
    /// Adaptive moments (beta1 0.9, beta2 0.999, eps 1e-8).
    #[default]
    AdaptiveMoment,
}

/// Optimizer state; moment buffers mirror the parameter shapes.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    t: u64,
    m: Vec<Layer>,
    v: Vec<Layer>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, mlp: &Mlp) -> Self {
        let zeros: Vec<Layer> = mlp
            .layers
            .iter()
            .map(|l| Layer::zeros(l.in_dim, l.out_dim))
            .collect();
        Self {
            kind,
            lr,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// Applies one update step in place.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) {
        match self.kind {
            OptimizerKind::PlainGradient => {
                for (layer, g) in mlp.layers.iter_mut().zip(&grads.layers) {
                    for (w, gw) in layer.w.iter_mut().zip(&g.w) {
                        *w -= self.lr * gw;
                    }
                    for (b, gb) in layer.b.iter_mut().zip(&g.b) {
                        *b -= self.lr * gb;
                    }
                }
            }
            OptimizerKind::AdaptiveMoment => {
                self.t += 1;
                let bias1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
                let bias2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
                for l in 0..mlp.layers.len() {
                    let layer = &mut mlp.layers[l];
                    let g = &grads.layers[l];
                    let m = &mut self.m[l];
                    let v = &mut self.v[l];
                    for i in 0..layer.w.len() {
                        m.w[i] = ADAM_BETA1 * m.w[i] + (1.0 - ADAM_BETA1) * g.w[i];
                        v.w[i] = ADAM_BETA2 * v.w[i] + (1.0 - ADAM_BETA2) * g.w[i] * g.w[i];
                        let m_hat = m.w[i] / bias1;
                        let v_hat = v.w[i] / bias2;
                        layer.w[i] -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                    for i in 0..layer.b.len() {
                        m.b[i] = ADAM_BETA1 * m.b[i] + (1.0 - ADAM_BETA1) * g.b[i];
                        v.b[i] = ADAM_BETA2 * v.b[i] + (1.0 - ADAM_BETA2) * g.b[i] * g.b[i];
                        let m_hat = m.b[i] / bias1;
                        let v_hat = v.b[i] / bias2;
                        layer.b[i] -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}

/// Writes the checkpoint layout: `u32` layer count, then `(u32 in, u32 out)`
/// per layer, then per layer the row-major weights followed by the bias, all
/// little-endian with 64-bit weights.
pub fn save_checkpoint<W: Write>(mlp: &Mlp, mut w: W) -> Result<(), MlpError> {
    let io = |e: std::io::Error| MlpError::BadCheckpoint(e.to_string());
    w.write_all(&(mlp.layers.len() as u32).to_le_bytes())
        .map_err(io)?;
    for l in &mlp.layers {
        w.write_all(&(l.in_dim as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&(l.out_dim as u32).to_le_bytes()).map_err(io)?;
    }
    for l in &mlp.layers {
        for x in l.w.iter().chain(&l.b) {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

/// Reads the layout written by [`save_checkpoint`].
pub fn load_checkpoint<R: Read>(mut r: R) -> Result<Mlp, MlpError> {
    let io = |e: std::io::Error| MlpError::BadCheckpoint(e.to_string());
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf).map_err(io)?;
    let n_layers = u32::from_le_bytes(u32buf) as usize;
    if n_layers == 0 || n_layers > 64 {
        return Err(MlpError::BadCheckpoint(format!(
            "implausible layer count {n_layers}"
        )));
    }
    let mut dims = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        r.read_exact(&mut u32buf).map_err(io)?;
        let in_dim = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf).map_err(io)?;
        let out_dim = u32::from_le_bytes(u32buf) as usize;
        dims.push((in_dim, out_dim));
    }
    for pair in dims.windows(2) {
        if pair[0].1 != pair[1].0 {
            return Err(MlpError::BadCheckpoint(
                "layer dimensions do not chain".to_string(),
            ));
        }
    }
    let mut f64buf = [0u8; 8];
    let mut layers = Vec::with_capacity(n_layers);
    for (in_dim, out_dim) in dims {
        let mut l = Layer::zeros(in_dim, out_dim);
        for x in l.w.iter_mut().chain(l.b.iter_mut()) {
            r.read_exact(&mut f64buf).map_err(io)?;
            *x = f64::from_le_bytes(f64buf);
            if !x.is_finite() {
                return Err(MlpError::BadCheckpoint("non-finite weight".to_string()));
            }
        }
        layers.push(l);
    }
    Ok(Mlp { layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_1_1_1(w: f64) -> Mlp {
        Mlp {
            layers: vec![
                Layer {
                    in_dim: 1,
                    out_dim: 1,
                    w: vec![w],
                    b: vec![0.0],
                },
                Layer {
                    in_dim: 1,
                    out_dim: 1,
                    w: vec![w],
                    b: vec![0.0],
                },
            ],
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mlp = Mlp {
            layers: vec![Layer::zeros(3, 4), Layer::zeros(4, 2)],
        };
        assert_eq!(mlp.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn toy_network_hand_computation() {
        // x=3 -> 2*3=6 -> ReLU 6 -> 2*6=12.
        let mlp = toy_1_1_1(2.0);
        assert_eq!(mlp.forward(&[3.0]).unwrap(), vec![12.0]);
        // Negative pre-activation is rectified away.
        assert_eq!(mlp.forward(&[-3.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn forward_is_deterministic_and_checks_dims() {
        let mlp = Mlp::init(&[4, 8, 3], 11);
        let x = [0.3, -0.2, 0.9, 0.1];
        assert_eq!(mlp.forward(&x).unwrap(), mlp.clone().forward(&x).unwrap());
        assert!(matches!(
            mlp.forward(&[1.0]),
            Err(MlpError::DimensionMismatch {
                got: 1,
                expected: 4
            })
        ));
    }

    #[test]
    fn single_linear_layer_gradient_by_hand() {
        // Q = w x with x=2, w=1, y=0: dL/dw = 2 (Q - y) x = 8.
        let mlp = Mlp {
            layers: vec![Layer {
                in_dim: 1,
                out_dim: 1,
                w: vec![1.0],
                b: vec![0.0],
            }],
        };
        let s: &[f64] = &[2.0];
        let g = gradient(&mlp, &[s], &[0], &[0.0], Loss::Squared).unwrap();
        assert!((g.layers[0].w[0] - 8.0).abs() < 1e-12);
        assert!((g.layers[0].b[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_residual_means_zero_gradient() {
        let mlp = Mlp::init(&[3, 8, 4], 5);
        let s1 = vec![0.2, -0.4, 0.6];
        let s2 = vec![-0.1, 0.3, 0.9];
        let y1 = mlp.forward(&s1).unwrap()[2];
        let y2 = mlp.forward(&s2).unwrap()[0];
        let g = gradient(
            &mlp,
            &[&s1, &s2],
            &[2, 0],
            &[y1, y2],
            Loss::Squared,
        )
        .unwrap();
        for l in &g.layers {
            assert!(l.w.iter().all(|&x| x == 0.0));
            assert!(l.b.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..5 {
            let mlp = Mlp::init(&[4, 6, 5, 3], 100 + trial);
            let states: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let refs: Vec<&[f64]> = states.iter().map(|s| s.as_slice()).collect();
            let actions: Vec<usize> = (0..8).map(|_| rng.gen_range(0..3)).collect();
            let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let g = gradient(&mlp, &refs, &actions, &y, Loss::Squared).unwrap();

            let h = 1e-5;
            let mut worst: f64 = 0.0;
            for l in 0..mlp.layers.len() {
                for i in 0..mlp.layers[l].w.len() {
                    let mut plus = mlp.clone();
                    plus.layers[l].w[i] += h;
                    let mut minus = mlp.clone();
                    minus.layers[l].w[i] -= h;
                    let fd = (batch_loss(&plus, &refs, &actions, &y, Loss::Squared).unwrap()
                        - batch_loss(&minus, &refs, &actions, &y, Loss::Squared).unwrap())
                        / (2.0 * h);
                    let analytic = g.layers[l].w[i];
                    let denom = analytic.abs().max(fd.abs()).max(1e-6);
                    worst = worst.max((analytic - fd).abs() / denom);
                }
            }
            assert!(worst < 1e-4, "trial {trial}: max rel deviation {worst}");
        }
    }

    #[test]
    fn optimizer_descends_on_a_frozen_batch() {
        let mut mlp = Mlp::init(&[3, 16, 4], 9);
        let states: Vec<Vec<f64>> = vec![
            vec![0.1, 0.5, -0.2],
            vec![0.9, -0.3, 0.4],
            vec![-0.6, 0.2, 0.8],
        ];
        let refs: Vec<&[f64]> = states.iter().map(|s| s.as_slice()).collect();
        let actions = vec![0, 2, 3];
        let y = vec![-1.0, 0.5, 2.0];
        let mut opt = Optimizer::new(OptimizerKind::AdaptiveMoment, 1e-3, &mlp);
        let mut last = batch_loss(&mlp, &refs, &actions, &y, Loss::Squared).unwrap();
        for _ in 0..50 {
            let g = gradient(&mlp, &refs, &actions, &y, Loss::Squared).unwrap();
            opt.step(&mut mlp, &g);
            let loss = batch_loss(&mlp, &refs, &actions, &y, Loss::Squared).unwrap();
            assert!(loss < last, "loss must strictly decrease");
            last = loss;
        }
    }

    #[test]
    fn checkpoint_round_trips_bit_exact() {
        let mlp = Mlp::init(&[5, 64, 64, 10], 3);
        let mut buf = Vec::new();
        save_checkpoint(&mlp, &mut buf).unwrap();
        // 4 + 3*8 bytes of header, then f64 payload.
        let n_params: usize = mlp
            .layers
            .iter()
            .map(|l| l.w.len() + l.b.len())
            .sum();
        assert_eq!(buf.len(), 4 + 3 * 8 + n_params * 8);
        let loaded = load_checkpoint(&buf[..]).unwrap();
        assert_eq!(loaded, mlp);
    }

    #[test]
    fn checkpoint_rejects_broken_chain() {
        let mlp = Mlp::init(&[3, 4, 2], 1);
        let mut buf = Vec::new();
        save_checkpoint(&mlp, &mut buf).unwrap();
        // Corrupt the second layer's input dim.
        buf[12] = 9;
        assert!(load_checkpoint(&buf[..]).is_err());
    }
}
