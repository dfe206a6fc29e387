use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Environment, StepResult};

pub const POSITION_RANGE: (f64, f64) = (-1.2, 0.6);
pub const VELOCITY_RANGE: (f64, f64) = (-0.07, 0.07);
const GOAL_POSITION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

impl MountainCarState {
    pub fn new(position: f64, velocity: f64) -> Self {
        Self { position, velocity }
    }

    pub fn in_bounds(&self) -> bool {
        (POSITION_RANGE.0..=POSITION_RANGE.1).contains(&self.position)
            && (VELOCITY_RANGE.0..=VELOCITY_RANGE.1).contains(&self.velocity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MountainCarAction {
    Reverse,
    Coast,
    Forward,
}

impl MountainCarAction {
    pub const ALL: [MountainCarAction; 3] = [Self::Reverse, Self::Coast, Self::Forward];

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn thrust(self) -> f64 {
        match self {
            Self::Reverse => -1.0,
            Self::Coast => 0.0,
            Self::Forward => 1.0,
        }
    }
}

/// Classic mountain-car dynamics with -1 reward per step.
pub fn mountain_car_step(state: MountainCarState, action: MountainCarAction) -> StepResult<MountainCarState> {
    let (vmin, vmax) = VELOCITY_RANGE;
    let (pmin, pmax) = POSITION_RANGE;
    let mut velocity =
        (state.velocity + 0.001 * action.thrust() - 0.0025 * (3.0 * state.position).cos()).clamp(vmin, vmax);
    let position = (state.position + velocity).clamp(pmin, pmax);
    if position <= pmin {
        velocity = 0.0;
    }
    StepResult {
        next_state: MountainCarState { position, velocity },
        reward: -1.0,
        terminal: position >= GOAL_POSITION,
        timed_out: false,
    }
}

/// Mountain car with episodes starting at rest somewhere in [-0.6, -0.4).
#[derive(Debug, Clone)]
pub struct MountainCar {
    state: MountainCarState,
    rng: ChaCha8Rng,
}

impl MountainCar {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self {
            state: MountainCarState::new(-0.5, 0.0),
            rng,
        }
    }

    pub fn state(&self) -> MountainCarState {
        self.state
    }
}

impl Environment for MountainCar {
    type State = MountainCarState;

    fn action_count(&self) -> usize {
        MountainCarAction::ALL.len()
    }

    fn reset(&mut self) -> MountainCarState {
        self.state = MountainCarState::new(self.rng.gen_range(-0.6..-0.4), 0.0);
        self.state
    }

    fn step(&mut self, action: usize) -> StepResult<MountainCarState> {
        let action = MountainCarAction::from_index(action)
            .unwrap_or_else(|| panic!("mountain car action index {action} out of range"));
        let result = mountain_car_step(self.state, action);
        self.state = result.next_state;
        result
    }
}
