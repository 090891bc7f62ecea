//! Cyclic experience replay with uniform without-replacement minibatches.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("buffer holds {fill} transitions but {requested} were requested")]
    BufferTooSmall { fill: usize, requested: usize },
}

/// One stored step: normalized observations, the taken action, the reward,
/// and whether the successor state is terminal for bootstrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub terminal: bool,
}

/// Fixed-capacity cyclic store; once full, pushes overwrite the oldest
/// transition.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            data: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn fill(&self) -> usize {
        self.data.len()
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform minibatch without replacement within the batch.
    pub fn sample<R: Rng>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<&Transition>, ReplayError> {
        if batch_size > self.data.len() {
            return Err(ReplayError::BufferTooSmall {
                fill: self.data.len(),
                requested: batch_size,
            });
        }
        let picks = rand::seq::index::sample(rng, self.data.len(), batch_size);
        Ok(picks.into_iter().map(|i| &self.data[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        Transition {
            s: vec![tag],
            a: 0,
            r: -tag,
            s_next: vec![tag + 1.0],
            terminal: false,
        }
    }

    #[test]
    fn fifo_overwrite_at_capacity() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..4 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.fill(), 3);
        let tags: Vec<f64> = buf.data.iter().map(|t| t.s[0]).collect();
        // Oldest (tag 0) evicted.
        assert!(tags.contains(&1.0) && tags.contains(&2.0) && tags.contains(&3.0));
    }

    #[test]
    fn full_sample_is_a_permutation() {
        let mut buf = ReplayBuffer::new(8);
        for i in 0..8 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let batch = buf.sample(8, &mut rng).unwrap();
        let mut tags: Vec<f64> = batch.iter().map(|t| t.s[0]).collect();
        tags.sort_by(f64::total_cmp);
        assert_eq!(tags, (0..8).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn oversized_sample_is_rejected() {
        let mut buf = ReplayBuffer::new(4);
        buf.push(transition(0.0));
        assert!(matches!(
            buf.sample(2, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(ReplayError::BufferTooSmall {
                fill: 1,
                requested: 2
            })
        ));
    }

    #[test]
    fn single_draws_are_uniform() {
        let mut buf = ReplayBuffer::new(10);
        for i in 0..10 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..n {
            let batch = buf.sample(1, &mut rng).unwrap();
            counts[batch[0].s[0] as usize] += 1;
        }
        // 3-sigma binomial bound around p = 0.1.
        let sigma = (0.1 * 0.9 / n as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.1).abs() < 3.0 * sigma, "freq {freq}");
        }
    }
}
