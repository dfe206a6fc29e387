//! Single-hidden-layer ReLU network trained with RMSProp against a
//! periodically synchronised target copy.

use std::fmt::Write as _;
use std::io::{self, Write};

use rand::Rng;
use thiserror::Error;

use super::{max_value, ActionValue};
use crate::env::{Cell, MountainCarState, POSITION_RANGE, VELOCITY_RANGE};
use crate::replay::Transition;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("input has length {found}, network expects {expected}")]
    InputLength { expected: usize, found: usize },
    #[error("cell {cell} lies outside a {width}x{height} grid")]
    CellOutOfBounds { cell: Cell, width: usize, height: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckpointError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing tensor {0}")]
    MissingTensor(&'static str),
    #[error("inconsistent tensor shapes: {0}")]
    Shape(String),
}

const TENSOR_NAMES: [&str; 4] = ["w1", "b1", "w2", "b2"];

/// Network parameters. `w1` is `hidden x input` and `w2` is `output x hidden`,
/// both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            output_dim,
            w1: vec![0.0; hidden_dim * input_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; output_dim * hidden_dim],
            b2: vec![0.0; output_dim],
        }
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn glorot<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        output_dim: usize,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim, output_dim);
        let l1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let l2 = (6.0 / (hidden_dim + output_dim) as f64).sqrt();
        p.w1.iter_mut().for_each(|w| *w = rng.gen_range(-l1..=l1));
        p.w2.iter_mut().for_each(|w| *w = rng.gen_range(-l2..=l2));
        p
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// `(name, values, rows, cols)` for every tensor.
    pub fn tensors(&self) -> [(&'static str, &[f64], usize, usize); 4] {
        [
            ("w1", &self.w1, self.hidden_dim, self.input_dim),
            ("b1", &self.b1, self.hidden_dim, 1),
            ("w2", &self.w2, self.output_dim, self.hidden_dim),
            ("b2", &self.b2, self.output_dim, 1),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ShapeError> {
        if x.len() != self.input_dim {
            return Err(ShapeError::InputLength {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    // Zero inputs are skipped, which makes one-hot inputs cheap.
    fn pre_activations(&self, x: &[f64]) -> Vec<f64> {
        let mut pre = self.b1.clone();
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (j, p) in pre.iter_mut().enumerate() {
                *p += self.w1[j * self.input_dim + i] * xi;
            }
        }
        pre
    }

    fn outputs(&self, hidden: &[f64]) -> Vec<f64> {
        (0..self.output_dim)
            .map(|o| {
                let row = &self.w2[o * self.hidden_dim..(o + 1) * self.hidden_dim];
                self.b2[o] + row.iter().zip(hidden).map(|(w, h)| w * h).sum::<f64>()
            })
            .collect()
    }

    fn forward_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let hidden: Vec<f64> = self.pre_activations(x).into_iter().map(|p| p.max(0.0)).collect();
        self.outputs(&hidden)
    }

    /// `w2 · relu(w1 · x + b1) + b2`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, ShapeError> {
        self.check_input(x)?;
        Ok(self.forward_unchecked(x))
    }

    /// Writes a plain-text checkpoint: for each tensor a `name rows cols`
    /// header followed by one line of values per row.
    pub fn write_checkpoint<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# replaylab mlp checkpoint")?;
        for (name, values, rows, cols) in self.tensors() {
            writeln!(out, "{name} {rows} {cols}")?;
            for row in values.chunks(cols.max(1)) {
                let mut line = String::new();
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        line.push(' ');
                    }
                    let _ = write!(line, "{v:?}");
                }
                writeln!(out, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn parse_checkpoint(text: &str) -> Result<Self, CheckpointError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut found: [Option<(usize, usize, Vec<f64>)>; 4] = Default::default();

        while let Some((line_no, header)) = lines.next() {
            let syntax = |message: String| CheckpointError::Syntax {
                line: line_no,
                message,
            };
            let mut parts = header.split_whitespace();
            let name = parts.next().unwrap_or_default();
            let slot = TENSOR_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| syntax(format!("unknown tensor {name:?}")))?;
            let mut dim = || -> Result<usize, CheckpointError> {
                parts
                    .next()
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| syntax("expected `name rows cols`".into()))
            };
            let (rows, cols) = (dim()?, dim()?);
            if found[slot].is_some() {
                return Err(syntax(format!("duplicate tensor {name}")));
            }
            let mut values = Vec::new();
            for _ in 0..rows {
                let (row_no, row) = lines
                    .next()
                    .ok_or_else(|| syntax(format!("{name}: missing rows")))?;
                let before = values.len();
                for tok in row.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| CheckpointError::Syntax {
                        line: row_no,
                        message: format!("bad number {tok:?}"),
                    })?;
                    values.push(v);
                }
                if values.len() - before != cols {
                    return Err(CheckpointError::Syntax {
                        line: row_no,
                        message: format!("{name}: expected {cols} values"),
                    });
                }
            }
            found[slot] = Some((rows, cols, values));
        }

        let [w1, b1, w2, b2] = found;
        let w1 = w1.ok_or(CheckpointError::MissingTensor("w1"))?;
        let b1 = b1.ok_or(CheckpointError::MissingTensor("b1"))?;
        let w2 = w2.ok_or(CheckpointError::MissingTensor("w2"))?;
        let b2 = b2.ok_or(CheckpointError::MissingTensor("b2"))?;
        let (hidden_dim, input_dim) = (w1.0, w1.1);
        let output_dim = w2.0;
        if b1.0 != hidden_dim || b1.1 != 1 || w2.1 != hidden_dim || b2.0 != output_dim || b2.1 != 1 {
            return Err(CheckpointError::Shape(format!(
                "w1 {}x{}, b1 {}x{}, w2 {}x{}, b2 {}x{}",
                w1.0, w1.1, b1.0, b1.1, w2.0, w2.1, b2.0, b2.1
            )));
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            output_dim,
            w1: w1.2,
            b1: b1.2,
            w2: w2.2,
            b2: b2.2,
        })
    }
}

/// `cache ← rho·cache + (1−rho)·g²`, then `param ← param − lr·g / (√cache + eps)`.
pub fn rmsprop_step(params: &mut [f64], cache: &mut [f64], grads: &[f64], lr: f64, rho: f64, eps: f64) {
    assert!(params.len() == cache.len() && cache.len() == grads.len());
    for (c, g) in cache.iter_mut().zip(grads) {
        *c = rho * *c + (1.0 - rho) * g * g;
    }
    for ((p, c), g) in params.iter_mut().zip(cache.iter()).zip(grads) {
        // A zero gradient leaves the parameter exactly where it is.
        if *g != 0.0 {
            *p -= lr * g / (c.sqrt() + eps);
        }
    }
}

/// Maps task states to network inputs.
pub trait StateEncoder<S> {
    fn input_dim(&self) -> usize;
    fn encode(&self, state: &S) -> Vec<f64>;
}

/// One-hot vector of length `width * height` with a 1 at the row-major index
/// of `cell`.
pub fn one_hot_encode(cell: Cell, width: usize, height: usize) -> Result<Vec<f64>, ShapeError> {
    if cell.row >= height || cell.col >= width {
        return Err(ShapeError::CellOutOfBounds { cell, width, height });
    }
    let mut v = vec![0.0; width * height];
    v[cell.row * width + cell.col] = 1.0;
    Ok(v)
}

/// One-hot encoding of grid cell ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneHot {
    pub cells: usize,
}

impl StateEncoder<usize> for OneHot {
    fn input_dim(&self) -> usize {
        self.cells
    }

    fn encode(&self, state: &usize) -> Vec<f64> {
        let mut v = vec![0.0; self.cells];
        v[*state] = 1.0;
        v
    }
}

/// Mountain-car position and velocity rescaled to `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MountainCarInput;

impl StateEncoder<MountainCarState> for MountainCarInput {
    fn input_dim(&self) -> usize {
        2
    }

    fn encode(&self, s: &MountainCarState) -> Vec<f64> {
        let unit = |x: f64, (lo, hi): (f64, f64)| 2.0 * (x - lo) / (hi - lo) - 1.0;
        vec![unit(s.position, POSITION_RANGE), unit(s.velocity, VELOCITY_RANGE)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub eps: f64,
    pub discount: f64,
    /// Online updates between target synchronisations.
    pub sync_interval: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_units: 50,
            learning_rate: 0.01,
            rho: 0.99,
            eps: 1e-8,
            discount: 1.0,
            sync_interval: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpQ<E> {
    encoder: E,
    config: MlpConfig,
    online: MlpParams,
    target: MlpParams,
    cache: MlpParams,
    update_count: u64,
    sync_count: u64,
}

impl<E> MlpQ<E> {
    pub fn new<S, R>(encoder: E, action_count: usize, config: MlpConfig, rng: &mut R) -> Self
    where
        E: StateEncoder<S>,
        R: Rng + ?Sized,
    {
        let online = MlpParams::glorot(encoder.input_dim(), config.hidden_units, action_count, rng);
        Self::from_params(encoder, online, config)
    }

    /// Starts from explicit online parameters; the target starts as a copy.
    pub fn from_params(encoder: E, online: MlpParams, config: MlpConfig) -> Self {
        let cache = MlpParams::zeros(online.input_dim, online.hidden_dim, online.output_dim);
        Self {
            encoder,
            config,
            target: online.clone(),
            online,
            cache,
            update_count: 0,
            sync_count: 0,
        }
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn online(&self) -> &MlpParams {
        &self.online
    }

    pub fn online_mut(&mut self) -> &mut MlpParams {
        &mut self.online
    }

    pub fn target(&self) -> &MlpParams {
        &self.target
    }

    pub fn target_mut(&mut self) -> &mut MlpParams {
        &mut self.target
    }

    pub fn rmsprop_cache(&self) -> &MlpParams {
        &self.cache
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn sync_count(&self) -> u64 {
        self.sync_count
    }

    pub fn sync_target(&mut self) {
        self.target.clone_from(&self.online);
        self.sync_count += 1;
    }

    pub fn encoder(&self) -> &E {
        &self.encoder
    }
}

impl<E> MlpQ<E> {
    fn target_of<S>(&self, t: &Transition<S>) -> f64
    where
        E: StateEncoder<S>,
    {
        if t.terminal {
            t.reward
        } else {
            let next = self.target.forward_unchecked(&self.encoder.encode(&t.next_state));
            t.reward + self.config.discount * max_value(&next)
        }
    }

    /// Mean squared TD error of the online network over `batch`.
    pub fn td_loss<S>(&self, batch: &[Transition<S>]) -> f64
    where
        E: StateEncoder<S>,
    {
        let total: f64 = batch
            .iter()
            .map(|t| {
                let q = self.online.forward_unchecked(&self.encoder.encode(&t.state))[t.action];
                (self.target_of(t) - q).powi(2)
            })
            .sum();
        total / batch.len() as f64
    }
}

/// Gradient of the mean squared TD error with respect to the online
/// parameters. Targets come from the target copy and are held constant.
pub fn mlp_td_gradient<S, E: StateEncoder<S>>(q: &MlpQ<E>, batch: &[Transition<S>]) -> MlpParams {
    let net = &q.online;
    let mut grad = MlpParams::zeros(net.input_dim, net.hidden_dim, net.output_dim);
    let scale = 1.0 / batch.len() as f64;
    for t in batch {
        let y = q.target_of(t);
        let x = q.encoder.encode(&t.state);
        let pre = net.pre_activations(&x);
        let hidden: Vec<f64> = pre.iter().map(|p| p.max(0.0)).collect();
        let out = net.outputs(&hidden);
        let a = t.action;
        // d/dq of (y - q)^2 / B
        let g = -2.0 * (y - out[a]) * scale;

        grad.b2[a] += g;
        let w2_row = &net.w2[a * net.hidden_dim..(a + 1) * net.hidden_dim];
        for j in 0..net.hidden_dim {
            grad.w2[a * net.hidden_dim + j] += g * hidden[j];
            if pre[j] <= 0.0 {
                continue;
            }
            let d = g * w2_row[j];
            grad.b1[j] += d;
            let row = &mut grad.w1[j * net.input_dim..(j + 1) * net.input_dim];
            for (gw, xi) in row.iter_mut().zip(&x) {
                if *xi != 0.0 {
                    *gw += d * xi;
                }
            }
        }
    }
    grad
}

impl<S, E: StateEncoder<S>> ActionValue<S> for MlpQ<E> {
    fn action_count(&self) -> usize {
        self.online.output_dim
    }

    fn action_values(&mut self, state: &S) -> Vec<f64> {
        self.online.forward_unchecked(&self.encoder.encode(state))
    }

    fn td_target(&mut self, t: &Transition<S>) -> f64 {
        self.target_of(t)
    }

    /// One RMSProp step on the batch loss; every `sync_interval` updates the
    /// target copy is refreshed.
    fn update(&mut self, batch: &[Transition<S>]) {
        if batch.is_empty() {
            return;
        }
        let grad = mlp_td_gradient(self, batch);
        let MlpConfig {
            learning_rate: lr,
            rho,
            eps,
            ..
        } = self.config;
        for ((p, c), g) in self
            .online
            .tensors_mut()
            .into_iter()
            .zip(self.cache.tensors_mut())
            .zip(grad.tensors())
        {
            rmsprop_step(p, c, g.1, lr, rho, eps);
        }
        self.update_count += 1;
        if self.update_count.is_multiple_of(self.config.sync_interval.max(1)) {
            self.sync_target();
        }
    }
}
