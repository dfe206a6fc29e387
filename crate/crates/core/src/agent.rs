//! Online, buffered and combined Q-learning agents.
//!
//! All three share the same loop: pick an action ε-greedily from the online
//! value function, step the environment, then learn. They differ only in what
//! they learn from:
//!
//! * [`Algorithm::Online`] updates on the fresh transition alone and never
//!   touches a buffer.
//! * [`Algorithm::Buffer`] stores the fresh transition and updates on a
//!   uniformly sampled batch.
//! * [`Algorithm::Combined`] stores the fresh transition and updates on a
//!   sampled batch whose last slot is always the fresh transition.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::approx::ActionValue;
use crate::env::Environment;
use crate::replay::{ReplayBuffer, ReplayError, Transition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("cannot select an action from an empty value vector")]
    EmptyValues,
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Online,
    Buffer,
    Combined,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Self::Online, Self::Buffer, Self::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Online => "online",
            Self::Buffer => "buffer",
            Self::Combined => "combined",
        }
    }

    pub fn uses_buffer(self) -> bool {
        self != Self::Online
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected online, buffer or combined)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub batch_size: usize,
    /// Ignored by the online agent.
    pub buffer_capacity: usize,
    /// Minimum buffer length before sampled updates start. `None` picks
    /// `batch_size` for the buffer agent and `batch_size - 1` (at least 1)
    /// for the combined agent.
    pub warmup: Option<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Online,
            epsilon: 0.1,
            batch_size: 10,
            buffer_capacity: 10_000,
            warmup: None,
        }
    }
}

impl AgentConfig {
    pub fn effective_warmup(&self) -> usize {
        self.warmup.unwrap_or(match self.algorithm {
            Algorithm::Online => 0,
            Algorithm::Buffer => self.batch_size,
            Algorithm::Combined => self.batch_size.saturating_sub(1).max(1),
        })
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let invalid = |m: String| Err(AgentError::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.epsilon) {
            return invalid(format!("epsilon {} outside [0, 1]", self.epsilon));
        }
        if self.batch_size == 0 {
            return invalid("batch_size must be at least 1".into());
        }
        if self.algorithm.uses_buffer() {
            if self.buffer_capacity == 0 {
                return invalid("buffer_capacity must be at least 1".into());
            }
            if self.warmup == Some(0) {
                return invalid("warmup must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// With probability `epsilon` a uniformly random action, otherwise a uniformly
/// random choice among the maximal entries of `q_values`.
pub fn epsilon_greedy<R: Rng + ?Sized>(
    q_values: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize, AgentError> {
    if q_values.is_empty() {
        return Err(AgentError::EmptyValues);
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..q_values.len()));
    }
    let best = q_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..q_values.len()).filter(|i| q_values[*i] == best).collect();
    Ok(match ties.len() {
        // Only possible when every value is NaN.
        0 => rng.gen_range(0..q_values.len()),
        1 => ties[0],
        n => ties[rng.gen_range(0..n)],
    })
}

/// What one agent step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    pub transition: Transition<S>,
    pub timed_out: bool,
}

impl<S> Step<S> {
    pub fn done(&self) -> bool {
        self.transition.terminal || self.timed_out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    /// Undiscounted sum of rewards.
    pub ret: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct Agent<S> {
    config: AgentConfig,
    buffer: Option<ReplayBuffer<S>>,
    state: Option<S>,
    update_count: u64,
    env_steps: u64,
}

impl<S: Clone> Agent<S> {
    pub fn new(config: AgentConfig) -> Result<Self, AgentError> {
        config.validate()?;
        let buffer = if config.algorithm.uses_buffer() {
            Some(ReplayBuffer::new(config.buffer_capacity)?)
        } else {
            None
        };
        Ok(Self {
            config,
            buffer,
            state: None,
            update_count: 0,
            env_steps: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn buffer(&self) -> Option<&ReplayBuffer<S>> {
        self.buffer.as_ref()
    }

    /// Calls made to the value function's `update`.
    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn evictions(&self) -> u64 {
        self.buffer.as_ref().map_or(0, ReplayBuffer::evictions)
    }

    /// Resets the environment and starts a new episode.
    pub fn begin_episode<E: Environment<State = S>>(&mut self, env: &mut E) {
        self.state = Some(env.reset());
    }

    fn act<E, Q, R>(&mut self, env: &mut E, q: &mut Q, rng: &mut R) -> Result<Step<S>, AgentError>
    where
        E: Environment<State = S>,
        Q: ActionValue<S>,
        R: Rng + ?Sized,
    {
        let state = match self.state.take() {
            Some(s) => s,
            None => env.reset(),
        };
        let action = epsilon_greedy(&q.action_values(&state), self.config.epsilon, rng)?;
        let result = env.step(action);
        self.env_steps += 1;
        let done = result.done();
        let transition = Transition {
            state,
            action,
            reward: result.reward,
            next_state: result.next_state,
            // A time-limit cut is not a real termination.
            terminal: result.terminal,
        };
        if !done {
            self.state = Some(transition.next_state.clone());
        }
        Ok(Step {
            transition,
            timed_out: result.timed_out,
        })
    }

    /// Online Q-learning: one update on the fresh transition.
    pub fn online_step<E, Q, R>(&mut self, env: &mut E, q: &mut Q, rng: &mut R) -> Result<Step<S>, AgentError>
    where
        E: Environment<State = S>,
        Q: ActionValue<S>,
        R: Rng + ?Sized,
    {
        let step = self.act(env, q, rng)?;
        q.update(std::slice::from_ref(&step.transition));
        self.update_count += 1;
        Ok(step)
    }

    fn stored_len(&mut self, t: &Transition<S>) -> Result<usize, AgentError> {
        let buffer = self
            .buffer
            .as_mut()
            .ok_or_else(|| AgentError::InvalidConfig("agent has no replay buffer".into()))?;
        buffer.push(t.clone());
        Ok(buffer.len())
    }

    /// Buffered Q-learning: store, then update on `batch_size` uniform samples
    /// once the buffer holds `warmup` transitions.
    pub fn buffer_step<E, Q, R>(&mut self, env: &mut E, q: &mut Q, rng: &mut R) -> Result<Step<S>, AgentError>
    where
        E: Environment<State = S>,
        Q: ActionValue<S>,
        R: Rng + ?Sized,
    {
        let step = self.act(env, q, rng)?;
        if self.stored_len(&step.transition)? >= self.config.effective_warmup() {
            let buffer = self.buffer.as_ref().expect("checked by stored_len");
            let batch = buffer.sample_uniform(self.config.batch_size, rng)?;
            q.update(&batch.transitions);
            self.update_count += 1;
        }
        Ok(step)
    }

    /// Combined replay: like [`Agent::buffer_step`], but the last batch slot
    /// always holds the fresh transition.
    pub fn combined_step<E, Q, R>(
        &mut self,
        env: &mut E,
        q: &mut Q,
        rng: &mut R,
    ) -> Result<Step<S>, AgentError>
    where
        E: Environment<State = S>,
        Q: ActionValue<S>,
        R: Rng + ?Sized,
    {
        let step = self.act(env, q, rng)?;
        if self.stored_len(&step.transition)? >= self.config.effective_warmup() {
            let buffer = self.buffer.as_ref().expect("checked by stored_len");
            let batch = buffer.combined_batch(&step.transition, self.config.batch_size, rng)?;
            q.update(&batch.transitions);
            self.update_count += 1;
        }
        Ok(step)
    }

    pub fn step<E, Q, R>(&mut self, env: &mut E, q: &mut Q, rng: &mut R) -> Result<Step<S>, AgentError>
    where
        E: Environment<State = S>,
        Q: ActionValue<S>,
        R: Rng + ?Sized,
    {
        match self.config.algorithm {
            Algorithm::Online => self.online_step(env, q, rng),
            Algorithm::Buffer => self.buffer_step(env, q, rng),
            Algorithm::Combined => self.combined_step(env, q, rng),
        }
    }

    /// Runs one full episode from a fresh reset until termination or timeout.
    pub fn run_episode<E, Q, R>(
        &mut self,
        env: &mut E,
        q: &mut Q,
        rng: &mut R,
    ) -> Result<EpisodeStats, AgentError>
    where
        E: Environment<State = S>,
        Q: ActionValue<S>,
        R: Rng + ?Sized,
    {
        self.begin_episode(env);
        let mut stats = EpisodeStats { ret: 0.0, steps: 0 };
        loop {
            let step = self.step(env, q, rng)?;
            stats.ret += step.transition.reward;
            stats.steps += 1;
            if step.done() {
                return Ok(stats);
            }
        }
    }
}
