use std::collections::VecDeque;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{Environment, StepResult};

/// The shipped 13x13 map: a vertical wall between start and goal forces a
/// detour around either end.
pub const DEFAULT_MAP: &str = include_str!("../../maps/default.txt");

#[derive(Debug, Error)]
pub enum MapError {
    #[error("malformed map: {0}")]
    Malformed(String),
    #[error("non-rectangular map: row {row} has {found} cells, expected {expected}")]
    NonRectangular {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("goal unreachable")]
    GoalUnreachable,
    #[error("cannot read map {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridAction {
    Left,
    Right,
    Up,
    Down,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [Self::Left, Self::Right, Self::Up, Self::Down];

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridWorldSpec {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    start: Cell,
    goal: Cell,
}

impl GridWorldSpec {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().filter(|w| **w).count()
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn is_wall(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.walls[self.cell_id(cell)]
    }

    /// Row-major index of `cell`.
    pub fn cell_id(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_at(&self, id: usize) -> Cell {
        Cell::new(id / self.width, id % self.width)
    }

    /// Where `action` leads from `pos`; walls and the boundary block movement.
    fn target(&self, pos: Cell, action: GridAction) -> Cell {
        let moved = match action {
            GridAction::Left => pos.col.checked_sub(1).map(|c| Cell::new(pos.row, c)),
            GridAction::Right => Some(Cell::new(pos.row, pos.col + 1)),
            GridAction::Up => pos.row.checked_sub(1).map(|r| Cell::new(r, pos.col)),
            GridAction::Down => Some(Cell::new(pos.row + 1, pos.col)),
        };
        match moved {
            Some(next) if self.in_bounds(next) && !self.is_wall(next) => next,
            _ => pos,
        }
    }
}

/// Parses a map made of `#` (wall), `S` (start), `G` (goal) and `.` (open).
///
/// Trailing whitespace on each line and trailing blank lines are ignored.
pub fn parse_grid_map(text: &str) -> Result<GridWorldSpec, MapError> {
    let mut rows: Vec<&str> = text.lines().map(str::trim_end).collect();
    while rows.last().is_some_and(|r| r.is_empty()) {
        rows.pop();
    }
    if rows.is_empty() {
        return Err(MapError::Malformed("map is empty".into()));
    }

    let width = rows[0].chars().count();
    let height = rows.len();
    let mut walls = Vec::with_capacity(width * height);
    let mut start = None;
    let mut goal = None;

    for (row, line) in rows.iter().enumerate() {
        let found = line.chars().count();
        if found != width {
            return Err(MapError::NonRectangular {
                row,
                found,
                expected: width,
            });
        }
        for (col, ch) in line.chars().enumerate() {
            let cell = Cell::new(row, col);
            match ch {
                '#' => walls.push(true),
                '.' => walls.push(false),
                'S' | 'G' => {
                    let slot = if ch == 'S' { &mut start } else { &mut goal };
                    if slot.replace(cell).is_some() {
                        return Err(MapError::Malformed(format!("more than one '{ch}'")));
                    }
                    walls.push(false);
                }
                other => {
                    return Err(MapError::Malformed(format!(
                        "unexpected character {other:?} at {cell}"
                    )))
                }
            }
        }
    }

    let start = start.ok_or_else(|| MapError::Malformed("missing start 'S'".into()))?;
    let goal = goal.ok_or_else(|| MapError::Malformed("missing goal 'G'".into()))?;
    let spec = GridWorldSpec {
        width,
        height,
        walls,
        start,
        goal,
    };
    grid_optimal_steps(&spec)?;
    Ok(spec)
}

pub fn load_grid_map(path: &Path) -> Result<GridWorldSpec, MapError> {
    let text = std::fs::read_to_string(path).map_err(|source| MapError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_grid_map(&text)
}

/// Deterministic grid move. The reward is -1 on every step, including the one
/// that reaches the goal.
pub fn grid_step(spec: &GridWorldSpec, pos: Cell, action: GridAction) -> StepResult<Cell> {
    let next_state = spec.target(pos, action);
    StepResult {
        next_state,
        reward: -1.0,
        terminal: next_state == spec.goal,
        timed_out: false,
    }
}

/// Breadth-first distances (in steps) from every cell to the goal, indexed by
/// [`GridWorldSpec::cell_id`]. Walls and unreachable cells are `None`.
pub fn distances_to_goal(spec: &GridWorldSpec) -> Vec<Option<usize>> {
    let mut dist = vec![None; spec.cell_count()];
    let mut queue = VecDeque::new();
    dist[spec.cell_id(spec.goal)] = Some(0);
    queue.push_back(spec.goal);
    // Moves are reversible, so searching outward from the goal is equivalent
    // to searching from each cell towards it.
    while let Some(cell) = queue.pop_front() {
        let d = dist[spec.cell_id(cell)].unwrap_or_default();
        for action in GridAction::ALL {
            let next = spec.target(cell, action);
            let id = spec.cell_id(next);
            if dist[id].is_none() {
                dist[id] = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Length of the shortest path from start to goal.
pub fn grid_optimal_steps(spec: &GridWorldSpec) -> Result<usize, MapError> {
    distances_to_goal(spec)[spec.cell_id(spec.start)].ok_or(MapError::GoalUnreachable)
}

/// Grid world environment. States are row-major cell ids.
#[derive(Debug, Clone)]
pub struct GridWorld {
    spec: GridWorldSpec,
    position: Cell,
}

impl GridWorld {
    pub fn new(spec: GridWorldSpec) -> Self {
        let position = spec.start;
        Self { spec, position }
    }

    pub fn spec(&self) -> &GridWorldSpec {
        &self.spec
    }

    pub fn position(&self) -> Cell {
        self.position
    }
}

impl Environment for GridWorld {
    type State = usize;

    fn action_count(&self) -> usize {
        GridAction::ALL.len()
    }

    fn reset(&mut self) -> usize {
        self.position = self.spec.start;
        self.spec.cell_id(self.position)
    }

    fn step(&mut self, action: usize) -> StepResult<usize> {
        let action = GridAction::from_index(action)
            .unwrap_or_else(|| panic!("grid action index {action} out of range"));
        let result = grid_step(&self.spec, self.position, action);
        self.position = result.next_state;
        StepResult {
            next_state: self.spec.cell_id(result.next_state),
            reward: result.reward,
            terminal: result.terminal,
            timed_out: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const OPEN_3X3: &str = "S..\n...\n..G\n";

    #[test]
    fn open_map_has_no_walls() {
        let spec = parse_grid_map(OPEN_3X3).unwrap();
        assert_eq!((spec.width(), spec.height()), (3, 3));
        assert_eq!(spec.wall_count(), 0);
        assert_eq!(spec.start(), Cell::new(0, 0));
        assert_eq!(spec.goal(), Cell::new(2, 2));
        assert_eq!(grid_optimal_steps(&spec).unwrap(), 4);
    }

    #[test]
    fn two_cell_map() {
        let spec = parse_grid_map("SG").unwrap();
        assert_eq!(grid_optimal_steps(&spec).unwrap(), 1);
    }

    #[test]
    fn parse_errors() {
        let err = parse_grid_map("SS.\n..G").unwrap_err();
        assert!(err.to_string().starts_with("malformed map"), "{err}");
        let err = parse_grid_map("S..\n..").unwrap_err();
        assert!(err.to_string().starts_with("non-rectangular map"), "{err}");
        let err = parse_grid_map("S#G").unwrap_err();
        assert_eq!(err.to_string(), "goal unreachable");
        assert!(matches!(parse_grid_map("S..\n..."), Err(MapError::Malformed(_))));
        assert!(matches!(parse_grid_map(""), Err(MapError::Malformed(_))));
        assert!(matches!(parse_grid_map("S.x\n..G"), Err(MapError::Malformed(_))));
    }

    #[test]
    fn trailing_whitespace_and_crlf_are_ignored() {
        let spec = parse_grid_map("S.. \r\n..G\r\n\n\n").unwrap();
        assert_eq!((spec.width(), spec.height()), (3, 2));
    }

    #[test]
    fn default_map_optimum_is_pinned() {
        let spec = parse_grid_map(DEFAULT_MAP).unwrap();
        assert_eq!((spec.width(), spec.height()), (13, 13));
        assert_eq!(spec.wall_count(), 9);
        assert_eq!(grid_optimal_steps(&spec).unwrap(), 22);
    }

    #[test]
    fn bumping_a_wall_stays_put() {
        let spec = parse_grid_map("S#.\n..G").unwrap();
        let r = grid_step(&spec, Cell::new(0, 0), GridAction::Right);
        assert_eq!(r.next_state, Cell::new(0, 0));
        assert_eq!(r.reward, -1.0);
        assert!(!r.terminal);
        let r = grid_step(&spec, Cell::new(0, 0), GridAction::Up);
        assert_eq!(r.next_state, Cell::new(0, 0));
    }

    #[test]
    fn stepping_onto_goal_terminates() {
        let spec = parse_grid_map(OPEN_3X3).unwrap();
        let r = grid_step(&spec, Cell::new(2, 1), GridAction::Right);
        assert!(r.terminal);
        assert_eq!(r.reward, -1.0);
    }

    #[test]
    fn open_field_move() {
        let spec = parse_grid_map(OPEN_3X3).unwrap();
        let r = grid_step(&spec, Cell::new(1, 1), GridAction::Down);
        assert_eq!(r.next_state, Cell::new(2, 1));
        assert_eq!(r.reward, -1.0);
        assert!(!r.terminal);
    }

    #[test]
    fn greedy_descent_on_bfs_distances_is_optimal() {
        let spec = parse_grid_map(DEFAULT_MAP).unwrap();
        let dist = distances_to_goal(&spec);
        let mut env = GridWorld::new(spec.clone());
        let mut state = env.reset();
        let mut steps = 0;
        loop {
            let here = dist[state].unwrap();
            let action = GridAction::ALL
                .iter()
                .position(|a| {
                    let next = spec.target(spec.cell_at(state), *a);
                    dist[spec.cell_id(next)] == Some(here - 1)
                })
                .unwrap();
            let r = env.step(action);
            steps += 1;
            state = r.next_state;
            if r.terminal {
                break;
            }
        }
        assert_eq!(steps, grid_optimal_steps(&spec).unwrap());
    }

    proptest! {
        #[test]
        fn episode_return_equals_minus_length(actions in proptest::collection::vec(0usize..4, 1..300)) {
            let spec = parse_grid_map(DEFAULT_MAP).unwrap();
            let mut env = GridWorld::new(spec);
            env.reset();
            let mut ret = 0.0;
            let mut steps = 0;
            for a in actions {
                let r = env.step(a);
                ret += r.reward;
                steps += 1;
                if r.terminal {
                    break;
                }
            }
            prop_assert_eq!(ret, -(steps as f64));
        }

        #[test]
        fn grid_step_is_deterministic(id in 0usize..169, a in 0usize..4) {
            let spec = parse_grid_map(DEFAULT_MAP).unwrap();
            let cell = spec.cell_at(id);
            prop_assume!(!spec.is_wall(cell) && cell != spec.goal());
            let action = GridAction::from_index(a).unwrap();
            prop_assert_eq!(grid_step(&spec, cell, action), grid_step(&spec, cell, action));
        }

        #[test]
        fn parser_never_panics(text in "[#SG.\n x]{0,64}") {
            let _ = parse_grid_map(&text);
        }
    }
}
