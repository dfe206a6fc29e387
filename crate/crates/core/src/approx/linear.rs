use std::collections::HashMap;

use super::tiles::{quantize, tiles_quantized, IndexHashTable};
use super::{max_value, ActionValue};
use crate::env::{MountainCarState, POSITION_RANGE, VELOCITY_RANGE};
use crate::replay::Transition;

/// Affine map from raw coordinates to tile units: each dimension's
/// `[low, high]` range spans `tiles_per_dim` tile widths.
#[derive(Debug, Clone, PartialEq)]
pub struct TileScaling {
    pub lows: Vec<f64>,
    pub highs: Vec<f64>,
    pub tiles_per_dim: f64,
}

impl TileScaling {
    /// Position and velocity each mapped onto `[0, 8]`.
    pub fn mountain_car() -> Self {
        Self {
            lows: vec![POSITION_RANGE.0, VELOCITY_RANGE.0],
            highs: vec![POSITION_RANGE.1, VELOCITY_RANGE.1],
            tiles_per_dim: 8.0,
        }
    }

    /// Identity scaling, for coordinates already expressed in tile units.
    pub fn unit(dims: usize) -> Self {
        Self {
            lows: vec![0.0; dims],
            highs: vec![1.0; dims],
            tiles_per_dim: 1.0,
        }
    }

    pub fn scale(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.lows.iter().zip(&self.highs))
            .map(|(x, (lo, hi))| (x - lo) / (hi - lo) * self.tiles_per_dim)
            .collect()
    }
}

/// States that can be tile coded.
pub trait TileCoordinates {
    fn coordinates(&self) -> Vec<f64>;
}

impl TileCoordinates for MountainCarState {
    fn coordinates(&self) -> Vec<f64> {
        vec![self.position, self.velocity]
    }
}

impl TileCoordinates for Vec<f64> {
    fn coordinates(&self) -> Vec<f64> {
        self.clone()
    }
}

/// Linear action values over hashed tile features.
///
/// The action index is appended to every tile coordinate tuple, so all actions
/// share one weight vector of length `iht_size`. Each weight moves by
/// `base_rate / num_tilings` times the TD error, which moves the value of the
/// updated pair by `base_rate` times the error.
#[derive(Debug, Clone)]
pub struct TileCodedQ {
    action_count: usize,
    num_tilings: usize,
    scaling: TileScaling,
    iht: IndexHashTable,
    weights: Vec<f64>,
    base_rate: f64,
    discount: f64,
    // Quantised coordinates -> active tiles for every action, action-major.
    // Tiles depend on the input only through its quantisation.
    cache: HashMap<Vec<i64>, Vec<usize>>,
}

impl TileCodedQ {
    pub fn new(
        action_count: usize,
        num_tilings: usize,
        iht_size: usize,
        scaling: TileScaling,
        base_rate: f64,
        discount: f64,
    ) -> Self {
        Self {
            action_count,
            num_tilings,
            scaling,
            iht: IndexHashTable::new(iht_size),
            weights: vec![0.0; iht_size],
            base_rate,
            discount,
            cache: HashMap::new(),
        }
    }

    pub fn num_tilings(&self) -> usize {
        self.num_tilings
    }

    pub fn iht_size(&self) -> usize {
        self.iht.size()
    }

    pub fn overflow_count(&self) -> u64 {
        self.iht.overflow_count()
    }

    pub fn per_weight_rate(&self) -> f64 {
        self.base_rate / self.num_tilings as f64
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn all_tiles(&mut self, raw: &[f64]) -> &[usize] {
        let quantized = quantize(&self.scaling.scale(raw), self.num_tilings);
        let Self {
            cache,
            iht,
            num_tilings,
            action_count,
            ..
        } = self;
        cache.entry(quantized).or_insert_with_key(|q| {
            (0..*action_count)
                .flat_map(|a| tiles_quantized(iht, *num_tilings, q, &[a as i64]))
                .collect()
        })
    }

    /// Active tile indices for `(state, action)`.
    pub fn active_tiles<S: TileCoordinates>(&mut self, state: &S, action: usize) -> Vec<usize> {
        let n = self.num_tilings;
        self.all_tiles(&state.coordinates())[action * n..(action + 1) * n].to_vec()
    }

    fn values_raw(&mut self, raw: &[f64]) -> Vec<f64> {
        let n = self.num_tilings;
        let tiles = self.all_tiles(raw).to_vec();
        tiles
            .chunks(n)
            .map(|active| active.iter().map(|i| self.weights[*i]).sum())
            .collect()
    }

    fn update_one<S: TileCoordinates>(&mut self, t: &Transition<S>) {
        let target = self.td_target(t);
        let n = self.num_tilings;
        let active = self.all_tiles(&t.state.coordinates())[t.action * n..(t.action + 1) * n].to_vec();
        let current: f64 = active.iter().map(|i| self.weights[*i]).sum();
        let step = self.per_weight_rate() * (target - current);
        for i in active {
            self.weights[i] += step;
        }
    }
}

impl<S: TileCoordinates> ActionValue<S> for TileCodedQ {
    fn action_count(&self) -> usize {
        self.action_count
    }

    fn action_values(&mut self, state: &S) -> Vec<f64> {
        self.values_raw(&state.coordinates())
    }

    fn td_target(&mut self, t: &Transition<S>) -> f64 {
        if t.terminal {
            t.reward
        } else {
            t.reward + self.discount * max_value(&self.values_raw(&t.next_state.coordinates()))
        }
    }

    fn update(&mut self, batch: &[Transition<S>]) {
        for t in batch {
            self.update_one(t);
        }
    }
}
