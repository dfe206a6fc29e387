//! Action-value representations and their Q-learning updates.

mod linear;
mod mlp;
mod tabular;
mod tiles;

pub use linear::{TileCodedQ, TileScaling};
pub use mlp::{
    mlp_td_gradient, one_hot_encode, rmsprop_step, CheckpointError, MlpConfig, MlpParams, MlpQ,
    MountainCarInput, OneHot, ShapeError, StateEncoder,
};
pub use tabular::TabularQ;
pub use tiles::{tiles, IndexHashTable};

use crate::replay::Transition;

/// An action-value function that can be queried and trained on transitions.
///
/// Queries take `&mut self` because some representations (the tile coder's
/// index hash table) allocate state lazily on first sight of an input.
pub trait ActionValue<S> {
    fn action_count(&self) -> usize;

    fn action_values(&mut self, state: &S) -> Vec<f64>;

    /// Q-learning target for `t`: the reward alone when `t` is terminal,
    /// otherwise reward plus discounted maximum next-state value.
    fn td_target(&mut self, t: &Transition<S>) -> f64;

    /// Applies one update from `batch`. A single online transition is a batch
    /// of one.
    fn update(&mut self, batch: &[Transition<S>]);
}

pub(crate) fn max_value(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
