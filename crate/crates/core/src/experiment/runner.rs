use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, Representation, TaskConfig};
use crate::agent::{Agent, AgentError};
use crate::approx::{ActionValue, MlpQ, MountainCarInput, OneHot, TabularQ, TileCodedQ, TileScaling};
use crate::env::{Environment, GridWorld, GridWorldSpec, MapError, MountainCar, TimeLimit};
use crate::rng::{stream, Stream};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("run {run_id}: {source}")]
    Agent {
        run_id: usize,
        #[source]
        source: AgentError,
    },
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub ret: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub episodes: Vec<EpisodeRecord>,
    /// Environment steps over the whole run.
    pub total_steps: u64,
    /// Transitions overwritten in the replay buffer.
    pub evictions: u64,
}

impl RunRecord {
    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    pub fn steps(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.steps as f64).collect()
    }
}

/// Seed of run `run_id`.
pub fn run_seed(cfg: &ExperimentConfig, run_id: usize) -> u64 {
    cfg.base_seed.wrapping_add(run_id as u64)
}

fn drive<E, Q>(
    cfg: &ExperimentConfig,
    run_id: usize,
    mut env: E,
    mut q: Q,
    mut rng: ChaCha8Rng,
) -> Result<RunRecord, ExperimentError>
where
    E: Environment,
    Q: ActionValue<E::State>,
{
    let agent_err = |source| ExperimentError::Agent { run_id, source };
    let mut agent = Agent::new(cfg.agent_config()).map_err(agent_err)?;
    let mut episodes = Vec::with_capacity(cfg.episodes);
    for episode in 0..cfg.episodes {
        let stats = agent.run_episode(&mut env, &mut q, &mut rng).map_err(agent_err)?;
        episodes.push(EpisodeRecord {
            episode,
            ret: stats.ret,
            steps: stats.steps,
        });
    }
    Ok(RunRecord {
        run_id,
        seed: run_seed(cfg, run_id),
        episodes,
        total_steps: agent.env_steps(),
        evictions: agent.evictions(),
    })
}

/// Executes run `run_id` of `cfg`. `map` must be the loaded grid map when the
/// task is the grid world.
pub fn run_single(
    cfg: &ExperimentConfig,
    map: Option<&GridWorldSpec>,
    run_id: usize,
) -> Result<RunRecord, ExperimentError> {
    let seed = run_seed(cfg, run_id);
    let agent_rng = stream(seed, Stream::Agent);
    let mut init_rng = stream(seed, Stream::Init);
    let h = &cfg.hyper;
    let timeout = cfg.task.timeout();

    match (&cfg.task, cfg.representation) {
        (TaskConfig::GridWorld { .. }, representation) => {
            let spec = match map {
                Some(spec) => spec.clone(),
                None => cfg.task_map()?,
            };
            let cells = spec.cell_count();
            let env = TimeLimit::new(GridWorld::new(spec), timeout);
            let actions = env.action_count();
            match representation {
                Representation::Tabular => {
                    let q = TabularQ::new(cells, actions, h.tabular_learning_rate, h.discount);
                    drive(cfg, run_id, env, q, agent_rng)
                }
                Representation::Mlp => {
                    let q = MlpQ::new::<usize, _>(OneHot { cells }, actions, cfg.mlp_config(), &mut init_rng);
                    drive(cfg, run_id, env, q, agent_rng)
                }
                Representation::TileLinear => {
                    cfg.validate()?;
                    unreachable!("validate rejects tile coding on the grid world")
                }
            }
        }
        (TaskConfig::MountainCar { .. }, representation) => {
            let env = TimeLimit::new(MountainCar::new(stream(seed, Stream::Environment)), timeout);
            let actions = env.action_count();
            match representation {
                Representation::TileLinear => {
                    let q = TileCodedQ::new(
                        actions,
                        h.num_tilings,
                        h.iht_size,
                        TileScaling::mountain_car(),
                        h.linear_base_rate,
                        h.discount,
                    );
                    drive(cfg, run_id, env, q, agent_rng)
                }
                Representation::Mlp => {
                    let q = MlpQ::new::<crate::env::MountainCarState, _>(
                        MountainCarInput,
                        actions,
                        cfg.mlp_config(),
                        &mut init_rng,
                    );
                    drive(cfg, run_id, env, q, agent_rng)
                }
                Representation::Tabular => {
                    cfg.validate()?;
                    unreachable!("validate rejects tabular mountain car")
                }
            }
        }
    }
}

impl ExperimentConfig {
    fn task_map(&self) -> Result<GridWorldSpec, MapError> {
        match &self.task {
            TaskConfig::GridWorld { map, .. } => map.load(),
            TaskConfig::MountainCar { .. } => Err(MapError::Malformed("mountain car has no map".into())),
        }
    }
}

/// Runs every run of `cfg`, using up to `jobs` worker threads. Run `i` is
/// seeded with `base_seed + i`, and results come back in run order, so the
/// output does not depend on `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RunRecord>, ExperimentError> {
    cfg.validate()?;
    let map = match &cfg.task {
        TaskConfig::GridWorld { .. } => Some(cfg.task_map()?),
        TaskConfig::MountainCar { .. } => None,
    };
    let map = map.as_ref();
    if jobs <= 1 || cfg.runs == 1 {
        return (0..cfg.runs).map(|i| run_single(cfg, map, i)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
    pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|i| run_single(cfg, map, i))
            .collect()
    })
}
