//! Replay storage and sampling.
//!
//! [`ReplayBuffer`] is a fixed-capacity FIFO ring. Once full, every push
//! overwrites the oldest resident transition. Sampling is uniform and with
//! replacement, so a buffer holding a single transition can still produce a
//! batch of any size.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("empty buffer")]
    EmptyBuffer,
    #[error("empty batch request")]
    EmptyBatchRequest,
    #[error("replay buffer capacity must be at least 1")]
    ZeroCapacity,
    #[error("empty buffer has no replay probability")]
    NoReplayProbability,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// One experienced step `(s, a, r, s')`.
///
/// `terminal` is true only when the environment genuinely terminated. A step
/// cut off by a time limit keeps `terminal == false` so that learning still
/// bootstraps from `next_state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub action: usize,
    pub reward: f64,
    pub next_state: S,
    pub terminal: bool,
}

/// A training batch drawn from a [`ReplayBuffer`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<S> {
    pub transitions: Vec<Transition<S>>,
    /// Set for combined batches, whose final slot is the latest transition.
    pub contains_latest: bool,
}

impl<S> SampleBatch<S> {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<S> {
    capacity: usize,
    storage: Vec<Transition<S>>,
    // Slot the next push writes to once the ring is full.
    head: usize,
    insert_count: u64,
}

impl<S: Clone> ReplayBuffer<S> {
    /// Storage grows on demand, so very large capacities cost nothing until
    /// they are actually filled.
    pub fn new(capacity: usize) -> Result<Self, ReplayError> {
        if capacity == 0 {
            return Err(ReplayError::ZeroCapacity);
        }
        Ok(Self {
            capacity,
            storage: Vec::new(),
            head: 0,
            insert_count: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.storage.len() == self.capacity
    }

    /// Total number of pushes over the buffer's lifetime.
    pub fn insert_count(&self) -> u64 {
        self.insert_count
    }

    /// Number of transitions that have been overwritten.
    pub fn evictions(&self) -> u64 {
        self.insert_count.saturating_sub(self.capacity as u64)
    }

    pub fn push(&mut self, transition: Transition<S>) {
        if self.storage.len() < self.capacity {
            self.storage.push(transition);
        } else {
            self.storage[self.head] = transition;
            self.head = (self.head + 1) % self.capacity;
        }
        self.insert_count += 1;
    }

    /// The `index`-th resident transition counted from the oldest.
    pub fn get(&self, index: usize) -> Option<&Transition<S>> {
        if index >= self.storage.len() {
            return None;
        }
        let physical = if self.is_full() {
            (self.head + index) % self.capacity
        } else {
            index
        };
        self.storage.get(physical)
    }

    pub fn latest(&self) -> Option<&Transition<S>> {
        self.storage.len().checked_sub(1).and_then(|i| self.get(i))
    }

    /// Resident transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition<S>> + '_ {
        (0..self.storage.len()).filter_map(move |i| self.get(i))
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Transition<S> {
        // Physical order is irrelevant for uniform draws.
        self.storage[rng.gen_range(0..self.storage.len())].clone()
    }

    /// Draws `n` transitions independently and uniformly with replacement.
    pub fn sample_uniform<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<SampleBatch<S>, ReplayError> {
        if self.storage.is_empty() {
            return Err(ReplayError::EmptyBuffer);
        }
        let transitions = (0..n).map(|_| self.draw(rng)).collect();
        Ok(SampleBatch {
            transitions,
            contains_latest: false,
        })
    }

    /// Samples `n - 1` transitions uniformly and appends `latest` as the final
    /// slot. With `n == 1` no random numbers are consumed.
    pub fn combined_batch<R: Rng + ?Sized>(
        &self,
        latest: &Transition<S>,
        n: usize,
        rng: &mut R,
    ) -> Result<SampleBatch<S>, ReplayError> {
        if n == 0 {
            return Err(ReplayError::EmptyBatchRequest);
        }
        if self.storage.is_empty() {
            return Err(ReplayError::EmptyBuffer);
        }
        let mut transitions = Vec::with_capacity(n);
        transitions.extend((0..n - 1).map(|_| self.draw(rng)));
        transitions.push(latest.clone());
        Ok(SampleBatch {
            transitions,
            contains_latest: true,
        })
    }
}

/// Probability that a newly inserted transition is drawn at least once within
/// `k` steps from a full buffer of size `m`, sampling one transition per step:
/// `1 - (1 - 1/m)^k`.
pub fn replay_within_prob(m: u64, k: u64) -> Result<f64, ReplayError> {
    if m == 0 {
        return Err(ReplayError::NoReplayProbability);
    }
    let miss = 1.0 - 1.0 / m as f64;
    let survive = match i32::try_from(k) {
        Ok(k) => miss.powi(k),
        Err(_) => miss.powf(k as f64),
    };
    Ok(1.0 - survive)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    /// Distance to `reference` in units of the binomial standard error.
    /// Returns 0 when both the error and the distance vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.probability - reference;
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        } else {
            diff / self.std_error
        }
    }
}

/// Simulates the replay-latency scenario with a real [`ReplayBuffer`].
///
/// The buffer is pre-filled to capacity `m`. Each trial pushes a marked
/// transition, then for `k` steps draws one uniform sample (pushing a fresh
/// filler transition between steps). The estimate is the fraction of trials in
/// which the marked transition was drawn at least once.
pub fn replay_within_monte_carlo<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    trials: u64,
    rng: &mut R,
) -> Result<MonteCarloEstimate, ReplayError> {
    if m == 0 {
        return Err(ReplayError::NoReplayProbability);
    }
    if k == 0 || k > m {
        return Err(ReplayError::InvalidArgument(format!(
            "k must satisfy 1 <= k <= m (k={k}, m={m})"
        )));
    }
    if trials == 0 {
        return Err(ReplayError::InvalidArgument("trials must be positive".into()));
    }

    let filler = |id: u64| Transition {
        state: id,
        action: 0,
        reward: 0.0,
        next_state: id,
        terminal: false,
    };
    let mut buffer = ReplayBuffer::new(m)?;
    let mut next_id = 0u64;
    for _ in 0..m {
        buffer.push(filler(next_id));
        next_id += 1;
    }

    let mut hits = 0u64;
    for _ in 0..trials {
        let marked = next_id;
        buffer.push(filler(marked));
        next_id += 1;
        let mut seen = false;
        for step in 0..k {
            if step > 0 {
                buffer.push(filler(next_id));
                next_id += 1;
            }
            let drawn = buffer.sample_uniform(1, rng)?;
            if drawn.transitions[0].state == marked {
                seen = true;
            }
        }
        if seen {
            hits += 1;
        }
    }

    let probability = hits as f64 / trials as f64;
    let std_error = (probability * (1.0 - probability) / trials as f64).sqrt();
    Ok(MonteCarloEstimate {
        probability,
        std_error,
        trials,
    })
}
