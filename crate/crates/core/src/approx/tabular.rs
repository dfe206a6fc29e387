use super::{max_value, ActionValue};
use crate::replay::Transition;

/// Look-up table over `(state id, action)` pairs, initialised to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    state_count: usize,
    action_count: usize,
    table: Vec<f64>,
    learning_rate: f64,
    discount: f64,
}

impl TabularQ {
    pub fn new(state_count: usize, action_count: usize, learning_rate: f64, discount: f64) -> Self {
        Self {
            state_count,
            action_count,
            table: vec![0.0; state_count * action_count],
            learning_rate,
            discount,
        }
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn value(&self, state: usize, action: usize) -> f64 {
        self.table[state * self.action_count + action]
    }

    pub fn set_value(&mut self, state: usize, action: usize, value: f64) {
        self.table[state * self.action_count + action] = value;
    }

    pub fn values(&self, state: usize) -> &[f64] {
        let start = state * self.action_count;
        &self.table[start..start + self.action_count]
    }

    fn target(&self, t: &Transition<usize>) -> f64 {
        if t.terminal {
            t.reward
        } else {
            t.reward + self.discount * max_value(self.values(t.next_state))
        }
    }

    /// `Q(s,a) += lr * (target - Q(s,a))`.
    pub fn update_one(&mut self, t: &Transition<usize>) {
        let target = self.target(t);
        let slot = &mut self.table[t.state * self.action_count + t.action];
        *slot += self.learning_rate * (target - *slot);
    }
}

impl ActionValue<usize> for TabularQ {
    fn action_count(&self) -> usize {
        self.action_count
    }

    fn action_values(&mut self, state: &usize) -> Vec<f64> {
        self.values(*state).to_vec()
    }

    fn td_target(&mut self, t: &Transition<usize>) -> f64 {
        self.target(t)
    }

    /// Transitions are applied one after another in batch order, so a
    /// duplicate sees the effect of its earlier copy.
    fn update(&mut self, batch: &[Transition<usize>]) {
        for t in batch {
            self.update_one(t);
        }
    }
}
