//! Q-learning with experience replay.
//!
//! Three learning rules ([`agent::Algorithm`]) share one step loop: online
//! Q-learning, Q-learning from a uniformly sampled replay buffer, and combined
//! replay, which always adds the latest transition to each sampled batch. Each
//! can drive a tabular, tile-coded linear or one-hidden-layer network value
//! function ([`approx`]) on a grid world or mountain car ([`env`]). The
//! [`experiment`] module runs seeded multi-run sweeps and writes long-format
//! CSV; [`cli`] exposes it all as the `replaylab` binary.

pub mod agent;
pub mod approx;
pub mod cli;
pub mod env;
pub mod experiment;
pub mod replay;
pub mod rng;

pub use agent::{Agent, AgentConfig, Algorithm};
pub use replay::{ReplayBuffer, SampleBatch, Transition};
