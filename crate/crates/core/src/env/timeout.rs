use super::{Environment, StepResult};

/// Caps episode length at `limit` steps.
///
/// The step that exhausts the budget is flagged `timed_out` with
/// `terminal == false`, unless it also reached the goal, in which case it is
/// reported as a genuine termination.
#[derive(Debug, Clone)]
pub struct TimeLimit<E> {
    inner: E,
    limit: usize,
    elapsed: usize,
}

impl<E: Environment> TimeLimit<E> {
    pub fn new(inner: E, limit: usize) -> Self {
        assert!(limit >= 1, "time limit must be at least one step");
        Self {
            inner,
            limit,
            elapsed: 0,
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Steps taken in the current episode.
    pub fn elapsed(&self) -> usize {
        self.elapsed
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn into_inner(self) -> E {
        self.inner
    }
}

impl<E: Environment> Environment for TimeLimit<E> {
    type State = E::State;

    fn action_count(&self) -> usize {
        self.inner.action_count()
    }

    fn reset(&mut self) -> E::State {
        self.elapsed = 0;
        self.inner.reset()
    }

    fn step(&mut self, action: usize) -> StepResult<E::State> {
        let mut result = self.inner.step(action);
        self.elapsed += 1;
        result.timed_out = !result.terminal && self.elapsed >= self.limit;
        result
    }
}
