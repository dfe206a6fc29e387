//! Experiment configuration files.
//!
//! The format is flat `key = value` text. `#` starts a comment line. A
//! `[name]` header opens a new experiment; keys that appear before the first
//! header are defaults shared by every experiment in the file. A file with no
//! header describes a single experiment named `experiment`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::agent::{AgentConfig, Algorithm};
use crate::approx::MlpConfig;
use crate::env::{load_grid_map, parse_grid_map, GridWorldSpec, MapError, DEFAULT_MAP};

pub const GRID_TIMEOUT: usize = 5_000;
pub const MOUNTAIN_CAR_TIMEOUT: usize = 1_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("experiment {id}: {message}")]
    Invalid { id: String, message: String },
    #[error("cannot read config {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("experiment {id}: {source}")]
    Map {
        id: String,
        #[source]
        source: MapError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    Tabular,
    TileLinear,
    Mlp,
}

impl Representation {
    pub const ALL: [Representation; 3] = [Self::Tabular, Self::TileLinear, Self::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tabular => "tabular",
            Self::TileLinear => "tile_linear",
            Self::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown representation {s:?} (expected tabular, tile_linear or mlp)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    /// The built-in 13x13 map.
    Default,
    File(PathBuf),
    Spec(GridWorldSpec),
}

impl MapSource {
    pub fn load(&self) -> Result<GridWorldSpec, MapError> {
        match self {
            Self::Default => parse_grid_map(DEFAULT_MAP),
            Self::File(path) => load_grid_map(path),
            Self::Spec(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskConfig {
    GridWorld { map: MapSource, timeout: usize },
    MountainCar { timeout: usize },
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GridWorld { .. } => "grid_world",
            Self::MountainCar { .. } => "mountain_car",
        }
    }

    pub fn timeout(&self) -> usize {
        match self {
            Self::GridWorld { timeout, .. } | Self::MountainCar { timeout } => *timeout,
        }
    }

    pub fn default_grid() -> Self {
        Self::GridWorld {
            map: MapSource::Default,
            timeout: GRID_TIMEOUT,
        }
    }

    pub fn default_mountain_car() -> Self {
        Self::MountainCar {
            timeout: MOUNTAIN_CAR_TIMEOUT,
        }
    }
}

/// Learning hyperparameters. `None` fields take a task-dependent default.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub epsilon: f64,
    pub batch_size: usize,
    pub warmup: Option<usize>,
    pub discount: f64,
    pub tabular_learning_rate: f64,
    /// Split evenly across tilings.
    pub linear_base_rate: f64,
    pub num_tilings: usize,
    pub iht_size: usize,
    pub mlp_learning_rate: Option<f64>,
    pub hidden_units: Option<usize>,
    pub sync_interval: u64,
    pub rmsprop_rho: f64,
    pub rmsprop_eps: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            batch_size: 10,
            warmup: None,
            discount: 1.0,
            tabular_learning_rate: 0.1,
            linear_base_rate: 0.1,
            num_tilings: 8,
            iht_size: 4096,
            mlp_learning_rate: None,
            hidden_units: None,
            sync_interval: 200,
            rmsprop_rho: 0.99,
            rmsprop_eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub task: TaskConfig,
    pub representation: Representation,
    pub algorithm: Algorithm,
    pub buffer_capacity: usize,
    pub episodes: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub hyper: Hyperparameters,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            id: "experiment".into(),
            task: TaskConfig::default_grid(),
            representation: Representation::Tabular,
            algorithm: Algorithm::Online,
            buffer_capacity: 10_000,
            episodes: 1_000,
            runs: 30,
            base_seed: 0,
            hyper: Hyperparameters::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            algorithm: self.algorithm,
            epsilon: self.hyper.epsilon,
            batch_size: self.hyper.batch_size,
            buffer_capacity: self.buffer_capacity,
            warmup: self.hyper.warmup,
        }
    }

    /// 50 hidden units and rate 0.01 on the grid world; 100 units and rate
    /// 0.0005 on mountain car.
    pub fn mlp_config(&self) -> MlpConfig {
        let grid = matches!(self.task, TaskConfig::GridWorld { .. });
        MlpConfig {
            hidden_units: self.hyper.hidden_units.unwrap_or(if grid { 50 } else { 100 }),
            learning_rate: self
                .hyper
                .mlp_learning_rate
                .unwrap_or(if grid { 0.01 } else { 0.0005 }),
            rho: self.hyper.rmsprop_rho,
            eps: self.hyper.rmsprop_eps,
            discount: self.hyper.discount,
            sync_interval: self.hyper.sync_interval,
        }
    }

    fn invalid<T>(&self, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid {
            id: self.id.clone(),
            message: message.into(),
        })
    }

    /// Checks field ranges and the task/representation pairing, and that the
    /// grid map (if any) loads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.id.is_empty()
            || !self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return self.invalid("experiment names may only use letters, digits, '_', '-' and '.'");
        }
        match (self.representation, &self.task) {
            (Representation::Tabular, TaskConfig::MountainCar { .. }) => {
                return self.invalid(
                    "tabular representation requires the grid_world task \
                     (only the grid world is compatible with tabular methods)",
                )
            }
            (Representation::TileLinear, TaskConfig::GridWorld { .. }) => {
                return self.invalid(
                    "tile_linear representation requires the continuous mountain_car task \
                     (tile coding only applies to continuous state spaces)",
                )
            }
            _ => {}
        }
        let h = &self.hyper;
        let positive = [
            ("runs", self.runs),
            ("episodes", self.episodes),
            ("buffer_size", self.buffer_capacity),
            ("batch_size", h.batch_size),
            ("timeout", self.task.timeout()),
            ("num_tilings", h.num_tilings),
            ("iht_size", h.iht_size),
            ("hidden_units", h.hidden_units.unwrap_or(1)),
            ("warmup", h.warmup.unwrap_or(1)),
            ("sync_interval", h.sync_interval as usize),
        ];
        for (key, value) in positive {
            if value == 0 {
                return self.invalid(format!("{key} must be at least 1"));
            }
        }
        if !(0.0..=1.0).contains(&h.epsilon) {
            return self.invalid(format!("epsilon {} outside [0, 1]", h.epsilon));
        }
        if !(0.0..=1.0).contains(&h.discount) {
            return self.invalid(format!("discount {} outside [0, 1]", h.discount));
        }
        if !(0.0..1.0).contains(&h.rmsprop_rho) {
            return self.invalid(format!("rmsprop_rho {} outside [0, 1)", h.rmsprop_rho));
        }
        for (key, value) in [
            ("tabular_learning_rate", h.tabular_learning_rate),
            ("linear_base_rate", h.linear_base_rate),
            ("mlp_learning_rate", h.mlp_learning_rate.unwrap_or(1.0)),
            ("rmsprop_eps", h.rmsprop_eps),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return self.invalid(format!("{key} must be a positive number"));
            }
        }
        if let TaskConfig::GridWorld { map, .. } = &self.task {
            map.load().map_err(|source| ConfigError::Map {
                id: self.id.clone(),
                source,
            })?;
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

#[derive(Debug, Clone, Default)]
struct RawSection {
    name: Option<(usize, String)>,
    entries: Vec<(usize, String, String)>,
}

fn apply(
    cfg: &mut ExperimentConfig,
    task: &mut Option<String>,
    map: &mut Option<String>,
    timeout: &mut Option<usize>,
    (line, key, value): &(usize, String, String),
) -> Result<(), ConfigError> {
    let line = *line;
    let v = value.as_str();
    let h = &mut cfg.hyper;
    match key.as_str() {
        "task" => *task = Some(v.to_string()),
        "map" => *map = Some(v.to_string()),
        "timeout" => *timeout = Some(parse_value(line, key, v)?),
        "representation" => {
            cfg.representation = v
                .parse()
                .map_err(|message| ConfigError::Syntax { line, message })?
        }
        "algorithm" => {
            cfg.algorithm = v
                .parse()
                .map_err(|message| ConfigError::Syntax { line, message })?
        }
        "buffer_size" | "buffer_capacity" => cfg.buffer_capacity = parse_value(line, key, v)?,
        "episodes" => cfg.episodes = parse_value(line, key, v)?,
        "runs" => cfg.runs = parse_value(line, key, v)?,
        "base_seed" => cfg.base_seed = parse_value(line, key, v)?,
        "epsilon" => h.epsilon = parse_value(line, key, v)?,
        "batch_size" => h.batch_size = parse_value(line, key, v)?,
        "warmup" => h.warmup = Some(parse_value(line, key, v)?),
        "discount" => h.discount = parse_value(line, key, v)?,
        "tabular_learning_rate" => h.tabular_learning_rate = parse_value(line, key, v)?,
        "linear_base_rate" => h.linear_base_rate = parse_value(line, key, v)?,
        "num_tilings" => h.num_tilings = parse_value(line, key, v)?,
        "iht_size" => h.iht_size = parse_value(line, key, v)?,
        "mlp_learning_rate" => h.mlp_learning_rate = Some(parse_value(line, key, v)?),
        "hidden_units" => h.hidden_units = Some(parse_value(line, key, v)?),
        "sync_interval" => h.sync_interval = parse_value(line, key, v)?,
        "rmsprop_rho" => h.rmsprop_rho = parse_value(line, key, v)?,
        "rmsprop_eps" => h.rmsprop_eps = parse_value(line, key, v)?,
        other => {
            return Err(ConfigError::Syntax {
                line,
                message: format!("unknown key {other:?}"),
            })
        }
    }
    Ok(())
}

fn build(
    shared: &RawSection,
    section: &RawSection,
    base_dir: Option<&Path>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    if let Some((_, name)) = &section.name {
        cfg.id = name.clone();
    }
    let (mut task, mut map, mut timeout) = (None, None, None);
    for entry in shared.entries.iter().chain(&section.entries) {
        apply(&mut cfg, &mut task, &mut map, &mut timeout, entry)?;
    }
    let task_line = section.name.as_ref().map_or(0, |(l, _)| *l);
    cfg.task = match task.as_deref().unwrap_or("grid_world") {
        "grid_world" => {
            let map = match map.as_deref() {
                None | Some("default") => MapSource::Default,
                Some(path) => {
                    let path = PathBuf::from(path);
                    MapSource::File(match base_dir {
                        Some(dir) if path.is_relative() => dir.join(path),
                        _ => path,
                    })
                }
            };
            TaskConfig::GridWorld {
                map,
                timeout: timeout.unwrap_or(GRID_TIMEOUT),
            }
        }
        "mountain_car" => TaskConfig::MountainCar {
            timeout: timeout.unwrap_or(MOUNTAIN_CAR_TIMEOUT),
        },
        other => {
            return Err(ConfigError::Syntax {
                line: task_line,
                message: format!("unknown task {other:?} (expected grid_world or mountain_car)"),
            })
        }
    };
    Ok(cfg)
}

/// Parses every experiment in `text` without validating it. Relative map
/// paths are resolved against `base_dir` when given.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<Vec<ExperimentConfig>, ConfigError> {
    let mut shared = RawSection::default();
    let mut sections: Vec<RawSection> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim().to_string();
            if sections
                .iter()
                .any(|s| s.name.as_ref().is_some_and(|(_, n)| *n == name))
            {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate experiment [{name}]"),
                });
            }
            sections.push(RawSection {
                name: Some((line, name)),
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "missing key".into(),
            });
        }
        let target = sections.last_mut().unwrap_or(&mut shared);
        if target.entries.iter().any(|(_, k, _)| *k == key) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key {key:?}"),
            });
        }
        target.entries.push((line, key, value));
    }

    if sections.is_empty() {
        return Ok(vec![build(&RawSection::default(), &shared, base_dir)?]);
    }
    sections.iter().map(|s| build(&shared, s, base_dir)).collect()
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let configs = parse_config(&text, path.parent())?;
    for cfg in &configs {
        cfg.validate()?;
    }
    Ok(configs)
}
