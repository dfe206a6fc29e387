//! Episodic tasks.

mod grid;
mod mountain_car;
mod timeout;

pub use grid::{
    distances_to_goal, grid_optimal_steps, grid_step, load_grid_map, parse_grid_map, Cell, GridAction,
    GridWorld, GridWorldSpec, MapError, DEFAULT_MAP,
};
pub use mountain_car::{
    mountain_car_step, MountainCar, MountainCarAction, MountainCarState, POSITION_RANGE, VELOCITY_RANGE,
};
pub use timeout::TimeLimit;

/// Outcome of a single environment step.
///
/// `terminal` and `timed_out` are never both set. When the goal is reached on
/// the final allowed step, `terminal` takes precedence.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<S> {
    pub next_state: S,
    pub reward: f64,
    pub terminal: bool,
    pub timed_out: bool,
}

impl<S> StepResult<S> {
    /// Whether the episode is over for either reason.
    pub fn done(&self) -> bool {
        self.terminal || self.timed_out
    }
}

pub trait Environment {
    type State: Clone;

    fn action_count(&self) -> usize;

    /// Starts a new episode and returns its initial state.
    fn reset(&mut self) -> Self::State;

    fn step(&mut self, action: usize) -> StepResult<Self::State>;
}

impl<E: Environment + ?Sized> Environment for &mut E {
    type State = E::State;

    fn action_count(&self) -> usize {
        (**self).action_count()
    }

    fn reset(&mut self) -> Self::State {
        (**self).reset()
    }

    fn step(&mut self, action: usize) -> StepResult<Self::State> {
        (**self).step(action)
    }
}
