//! Heated gridworlds in one and two dimensions.
//!
//! Every frame the agent's chosen move is followed by `T` random unit moves,
//! where `T` is the temperature of the cell the frame started in, and
//! optionally by one leftward drift move. Moves are applied one at a time so
//! walls, obstacles and the absorbing set interact with each of them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer grid coordinate. In 1D only `x` is used and `y` is always zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub const fn at(x: i32) -> Self {
        Cell { x, y: 0 }
    }

    #[inline]
    pub fn shifted(self, mv: Move) -> Cell {
        Cell::new(self.x + mv.dx, self.y + mv.dy)
    }
}

impl From<[i32; 2]> for Cell {
    fn from(v: [i32; 2]) -> Self {
        Cell::new(v[0], v[1])
    }
}

impl From<Cell> for [i32; 2] {
    fn from(c: Cell) -> Self {
        [c.x, c.y]
    }
}

/// A unit displacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub dx: i32,
    pub dy: i32,
}

impl Move {
    pub const UP: Move = Move { dx: 0, dy: 1 };
    pub const RIGHT: Move = Move { dx: 1, dy: 0 };
    pub const DOWN: Move = Move { dx: 0, dy: -1 };
    pub const LEFT: Move = Move { dx: -1, dy: 0 };
}

/// Action sets by dimension. Index into these is the action id used by Q-tables.
pub const ACTIONS_1D: [Move; 2] = [Move::LEFT, Move::RIGHT];
pub const ACTIONS_2D: [Move; 4] = [Move::UP, Move::RIGHT, Move::DOWN, Move::LEFT];

/// Action id of "left" / "right" in 1D worlds.
pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// 2D: the episode ends when the agent stands on this cell.
    Cell(Cell),
    /// 1D: leaving the interval through either end ends the episode.
    IntervalEnds,
}

/// When the termination condition is tested within a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Absorption {
    /// Only the position after the whole move sequence counts.
    FinalPosition,
    /// The first micro-move satisfying the condition ends the episode.
    FirstCrossing,
}

/// Where the drift move sits in the per-frame move list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftOrder {
    /// `[action, drift, noise...]`
    AfterAction,
    /// `[action, noise..., drift]`
    AfterNoise,
}

/// Complete description of a heated gridworld.
///
/// `temperature` and `drift` are dense, row-major over the grid
/// (`index = y * width + x`); in 1D they are indexed by `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: u8,
    pub extent: Vec<usize>,
    #[serde(default)]
    pub obstacles: Vec<Cell>,
    pub temperature: Vec<u32>,
    pub drift: Vec<f64>,
    pub start: Cell,
    pub goal: Goal,
    pub r_tick: i32,
    pub r_target: i32,
    pub absorption: Absorption,
    #[serde(default = "default_drift_order")]
    pub drift_order: DriftOrder,
}

fn default_drift_order() -> DriftOrder {
    DriftOrder::AfterAction
}

impl GridSpec {
    pub fn width(&self) -> usize {
        self.extent[0]
    }

    pub fn height(&self) -> usize {
        if self.dims == 2 {
            self.extent[1]
        } else {
            1
        }
    }

    pub fn n_cells(&self) -> usize {
        self.width() * self.height()
    }

    pub fn n_actions(&self) -> usize {
        self.actions().len()
    }

    pub fn actions(&self) -> &'static [Move] {
        if self.dims == 1 {
            &ACTIONS_1D
        } else {
            &ACTIONS_2D
        }
    }

    /// Center index of a 1D interval.
    pub fn center(&self) -> i32 {
        (self.width() / 2) as i32
    }

    /// Half-width of a 1D interval when its cells are relabelled `-ζ..=ζ`.
    pub fn half_width(&self) -> usize {
        self.width() / 2
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && (c.x as usize) < self.width() && c.y >= 0 && (c.y as usize) < self.height()
    }

    /// Dense index of an in-bounds cell.
    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width() + c.x as usize
    }

    pub fn cell(&self, index: usize) -> Cell {
        let w = self.width();
        Cell::new((index % w) as i32, (index / w) as i32)
    }

    pub fn temperature_at(&self, c: Cell) -> u32 {
        self.temperature[self.index(c)]
    }

    pub fn drift_at(&self, c: Cell) -> f64 {
        self.drift[self.index(c)]
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.obstacles.contains(&c)
    }

    /// Cells the agent can occupy: every in-grid non-obstacle, non-goal cell.
    pub fn interior_cells(&self) -> Vec<Cell> {
        (0..self.n_cells())
            .map(|i| self.cell(i))
            .filter(|&c| !self.is_obstacle(c) && !self.is_terminal_cell(c))
            .collect()
    }

    fn is_terminal_cell(&self, c: Cell) -> bool {
        match self.goal {
            Goal::Cell(g) => g == c,
            Goal::IntervalEnds => !self.in_bounds(c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self.dims {
            1 => {
                if self.extent.len() != 1 {
                    return bad("1D spec needs exactly one extent".into());
                }
                if self.extent[0].is_multiple_of(2) {
                    return bad(format!("1D interval length {} must be odd", self.extent[0]));
                }
                if self.goal != Goal::IntervalEnds {
                    return bad("1D spec must use interval_ends goal".into());
                }
                if !self.obstacles.is_empty() {
                    return bad("obstacles are only supported in 2D".into());
                }
            }
            2 => {
                if self.extent.len() != 2 {
                    return bad("2D spec needs width and height".into());
                }
                match self.goal {
                    Goal::Cell(g) if self.in_bounds(g) && !self.is_obstacle(g) => {}
                    _ => return bad("2D goal must be a free in-grid cell".into()),
                }
                for &o in &self.obstacles {
                    if !self.in_bounds(o) {
                        return bad(format!("obstacle {:?} lies outside the grid", o));
                    }
                }
            }
            d => return bad(format!("unsupported dimension count {d}")),
        }
        if self.extent.contains(&0) {
            return bad("extent must be positive".into());
        }
        if self.temperature.len() != self.n_cells() {
            return bad(format!(
                "temperature has {} entries, grid has {} cells",
                self.temperature.len(),
                self.n_cells()
            ));
        }
        if self.drift.len() != self.n_cells() {
            return bad(format!(
                "drift has {} entries, grid has {} cells",
                self.drift.len(),
                self.n_cells()
            ));
        }
        if let Some(p) = self.drift.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("drift probability {p} outside [0, 1]"));
        }
        if !self.in_bounds(self.start) || self.is_obstacle(self.start) || self.is_terminal_cell(self.start) {
            return bad(format!("start {:?} must be a free, non-absorbing cell", self.start));
        }
        if self.r_tick >= 0 {
            return bad(format!("r_tick must be negative, got {}", self.r_tick));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GridSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("GridSpec is always serializable")
    }
}

/// Agent position: a cell, or the absorbing token once the episode is over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Cell(Cell),
    Absorbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvState {
    pub position: Position,
    pub frame_count: u64,
}

impl EnvState {
    pub fn cell(&self) -> Option<Cell> {
        match self.position {
            Position::Cell(c) => Some(c),
            Position::Absorbed => None,
        }
    }

    pub fn is_absorbed(&self) -> bool {
        self.position == Position::Absorbed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub next: EnvState,
    pub reward: i32,
    pub done: bool,
    /// Cells reached after each applied micro-move, in order.
    pub micro_trail: Vec<Cell>,
}

/// `T` independent uniform cardinal unit moves.
pub fn sample_noise<R: Rng + ?Sized>(temperature: u32, dims: u8, rng: &mut R) -> Vec<Move> {
    (0..temperature).map(|_| noise_move(dims, rng)).collect()
}

#[inline]
fn noise_move<R: Rng + ?Sized>(dims: u8, rng: &mut R) -> Move {
    if dims == 1 {
        ACTIONS_1D[rng.random_range(0..2)]
    } else {
        ACTIONS_2D[rng.random_range(0..4)]
    }
}

/// Applies one micro-move. In 2D, leaving the grid or entering an obstacle
/// is a void move. In 1D the exterior is representable, so the move always
/// happens and absorption is judged by the caller.
pub fn apply_micro_move(cell: Cell, mv: Move, spec: &GridSpec) -> Cell {
    let next = cell.shifted(mv);
    if spec.dims == 1 {
        return next;
    }
    if !spec.in_bounds(next) || spec.is_obstacle(next) {
        cell
    } else {
        next
    }
}

pub fn reset(spec: &GridSpec) -> EnvState {
    EnvState { position: Position::Cell(spec.start), frame_count: 0 }
}

/// A validated [`GridSpec`] with an obstacle mask for fast stepping.
#[derive(Clone, Debug)]
pub struct Env {
    spec: GridSpec,
    blocked: Vec<bool>,
}

impl Env {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let mut blocked = vec![false; spec.n_cells()];
        for &o in &spec.obstacles {
            blocked[spec.index(o)] = true;
        }
        Ok(Env { spec, blocked })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n_states(&self) -> usize {
        self.spec.n_cells()
    }

    pub fn n_actions(&self) -> usize {
        self.spec.n_actions()
    }

    #[inline]
    pub fn state_index(&self, c: Cell) -> usize {
        self.spec.index(c)
    }

    pub fn reset(&self) -> EnvState {
        reset(&self.spec)
    }

    #[inline]
    fn micro(&self, cell: Cell, mv: Move) -> Cell {
        let next = cell.shifted(mv);
        if self.spec.dims == 1 {
            return next;
        }
        if !self.spec.in_bounds(next) || self.blocked[self.spec.index(next)] {
            cell
        } else {
            next
        }
    }

    #[inline]
    fn terminal(&self, c: Cell) -> bool {
        match self.spec.goal {
            Goal::Cell(g) => c == g,
            Goal::IntervalEnds => c.x < 0 || c.x as usize >= self.spec.width(),
        }
    }

    /// Core frame transition. Calls `visit` with the cell reached after each
    /// applied micro-move and returns the next position.
    #[inline]
    pub fn advance<R: Rng + ?Sized>(
        &self,
        from: Cell,
        action: usize,
        rng: &mut R,
        mut visit: impl FnMut(Cell),
    ) -> Position {
        let idx = self.spec.index(from);
        let temperature = self.spec.temperature[idx];
        let drift_p = self.spec.drift[idx];
        let first_crossing = self.spec.absorption == Absorption::FirstCrossing;
        let dims = self.spec.dims;

        let mut pos = from;
        let mut step = |pos: &mut Cell, mv: Move| -> bool {
            *pos = self.micro(*pos, mv);
            visit(*pos);
            first_crossing && self.terminal(*pos)
        };

        if step(&mut pos, self.spec.actions()[action]) {
            return Position::Absorbed;
        }
        let drifts = drift_p > 0.0 && rng.random::<f64>() < drift_p;
        if drifts && self.spec.drift_order == DriftOrder::AfterAction && step(&mut pos, Move::LEFT) {
            return Position::Absorbed;
        }
        for _ in 0..temperature {
            if step(&mut pos, noise_move(dims, rng)) {
                return Position::Absorbed;
            }
        }
        if drifts && self.spec.drift_order == DriftOrder::AfterNoise && step(&mut pos, Move::LEFT) {
            return Position::Absorbed;
        }
        if self.terminal(pos) {
            Position::Absorbed
        } else {
            Position::Cell(pos)
        }
    }

    /// One environment frame.
    ///
    /// Panics if `state` is already absorbed.
    pub fn step<R: Rng + ?Sized>(&self, state: &EnvState, action: usize, rng: &mut R) -> StepOutcome {
        let from = state.cell().expect("step called on an absorbed state; reset first");
        let mut micro_trail = Vec::with_capacity(2 + self.spec.temperature_at(from) as usize);
        let position = self.advance(from, action, rng, |c| micro_trail.push(c));
        let done = position == Position::Absorbed;
        let reward = if done { self.spec.r_tick + self.spec.r_target } else { self.spec.r_tick };
        StepOutcome {
            next: EnvState { position, frame_count: state.frame_count + 1 },
            reward,
            done,
            micro_trail,
        }
    }
}

/// Free-function form of [`Env::step`] for one-off use.
pub fn step<R: Rng + ?Sized>(state: &EnvState, action: usize, spec: &GridSpec, rng: &mut R) -> Result<StepOutcome> {
    Ok(Env::new(spec.clone())?.step(state, action, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::seed::seed_stream;
    use proptest::prelude::*;

    fn open_grid(w: usize, h: usize) -> GridSpec {
        GridSpec {
            dims: 2,
            extent: vec![w, h],
            obstacles: vec![],
            temperature: vec![0; w * h],
            drift: vec![0.0; w * h],
            start: Cell::new(0, 0),
            goal: Goal::Cell(Cell::new(w as i32 - 1, h as i32 - 1)),
            r_tick: -1,
            r_target: 100,
            absorption: Absorption::FirstCrossing,
            drift_order: DriftOrder::AfterAction,
        }
    }

    #[test]
    fn zero_temperature_is_noiseless() {
        let mut rng = seed_stream(1, 0, "t");
        assert!(sample_noise(0, 2, &mut rng).is_empty());
        assert_eq!(sample_noise(5, 1, &mut rng).len(), 5);
    }

    #[test]
    fn one_dimensional_noise_follows_binomial_displacement() {
        // 2 * Binomial(2, 1/2) - 2 has pmf {-2: 1/4, 0: 1/2, 2: 1/4}.
        let mut rng = seed_stream(7, 0, "noise1d");
        let n = 1_000_000;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            let d: i32 = sample_noise(2, 1, &mut rng).iter().map(|m| m.dx).sum();
            counts[((d + 2) / 2) as usize] += 1;
        }
        for (count, p) in counts.iter().zip([0.25, 0.5, 0.25]) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*count as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn two_dimensional_noise_is_uniform() {
        let mut rng = seed_stream(8, 0, "noise2d");
        let n = 1_000_000;
        let mut counts = [0u64; 4];
        for _ in 0..n {
            let m = sample_noise(1, 2, &mut rng)[0];
            counts[ACTIONS_2D.iter().position(|&a| a == m).unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * 0.25).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn micro_moves_reflect_off_walls_and_obstacles() {
        let mut spec = open_grid(10, 10);
        assert_eq!(apply_micro_move(Cell::new(0, 0), Move::LEFT, &spec), Cell::new(0, 0));
        assert_eq!(apply_micro_move(Cell::new(3, 3), Move::UP, &spec), Cell::new(3, 4));
        spec.obstacles.push(Cell::new(4, 3));
        assert_eq!(apply_micro_move(Cell::new(3, 3), Move::RIGHT, &spec), Cell::new(3, 3));
        let line = catalog::interval41(0, 0.0);
        assert_eq!(apply_micro_move(Cell::at(0), Move::LEFT, &line), Cell::at(-1));
    }

    #[test]
    fn deterministic_step_and_terminal_reward() {
        let env = Env::new(open_grid(10, 10)).unwrap();
        let mut rng = seed_stream(0, 0, "t");
        let out = env.step(&env.reset(), RIGHT, &mut rng);
        assert_eq!(out.next.cell(), Some(Cell::new(1, 0)));
        assert_eq!((out.reward, out.done), (-1, false));

        let near = EnvState { position: Position::Cell(Cell::new(8, 9)), frame_count: 3 };
        let out = env.step(&near, 1, &mut rng);
        assert!(out.done && out.next.is_absorbed());
        assert_eq!(out.reward, 99);
        assert_eq!(out.next.frame_count, 4);
    }

    #[test]
    #[should_panic(expected = "absorbed")]
    fn stepping_from_absorbing_state_panics() {
        let env = Env::new(open_grid(3, 3)).unwrap();
        let gone = EnvState { position: Position::Absorbed, frame_count: 1 };
        env.step(&gone, 0, &mut seed_stream(0, 0, "t"));
    }

    #[test]
    fn final_position_step_matches_convolution_law() {
        // Heated cell at T=3, action right, final-position semantics: the
        // displacement is 1 + (2 * Binomial(3, 1/2) - 3) in {-2, 0, 2, 4}
        // with weights 1/8, 3/8, 3/8, 1/8.
        let mut spec = catalog::interval41(3, 0.0);
        spec.absorption = Absorption::FinalPosition;
        for t in spec.temperature.iter_mut() {
            *t = 3;
        }
        let env = Env::new(spec).unwrap();
        let mut rng = seed_stream(3, 0, "conv");
        let n = 1_000_000u64;
        let mut counts = [0u64; 4];
        let state = env.reset();
        for _ in 0..n {
            let out = env.step(&state, RIGHT, &mut rng);
            let d = out.next.cell().unwrap().x - 20;
            counts[((d + 2) / 2) as usize] += 1;
        }
        for (count, p) in counts.iter().zip([0.125, 0.375, 0.375, 0.125]) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*count as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn first_crossing_discards_remaining_moves() {
        let spec = catalog::interval41(0, 0.0);
        let env = Env::new(spec).unwrap();
        let edge = EnvState { position: Position::Cell(Cell::at(40)), frame_count: 0 };
        let out = env.step(&edge, RIGHT, &mut seed_stream(0, 0, "t"));
        assert!(out.done);
        assert_eq!(out.micro_trail, vec![Cell::at(41)]);
    }

    #[test]
    fn reset_places_agent_on_start() {
        assert_eq!(reset(&catalog::grid2d_l(0)).cell(), Some(Cell::new(0, 0)));
        assert_eq!(reset(&catalog::interval41(3, 0.0)).cell(), Some(Cell::at(20)));
        let env = Env::new(catalog::grid2d_l(2)).unwrap();
        let mut rng = seed_stream(0, 0, "t");
        let mut s = env.reset();
        while !s.is_absorbed() && s.frame_count < 10_000 {
            s = env.step(&s, rng.random_range(0..4), &mut rng).next;
        }
        assert_eq!(env.reset(), reset(env.spec()));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let spec = catalog::grid2d_l(3);
        assert_eq!(GridSpec::from_json(&spec.to_json()).unwrap(), spec);

        let mut bad = spec.clone();
        bad.r_tick = 0;
        assert!(bad.validate().is_err());
        let mut bad = spec.clone();
        bad.start = Cell::new(8, 3);
        assert!(bad.validate().is_err());
        let mut bad = catalog::interval41(1, 0.0);
        bad.extent = vec![40];
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn reflective_moves_stay_on_free_cells(x in 0i32..10, y in 0i32..10, m in 0usize..4, t in 0u32..4) {
            let spec = catalog::grid2d_l(t);
            let c = Cell::new(x, y);
            prop_assume!(!spec.is_obstacle(c));
            let next = apply_micro_move(c, ACTIONS_2D[m], &spec);
            prop_assert!(spec.in_bounds(next));
            prop_assert!(!spec.is_obstacle(next));
        }

        #[test]
        fn episode_reward_is_target_minus_length(seed in 0u64..200, t in 0u32..4) {
            let env = Env::new(catalog::grid2d_l(t)).unwrap();
            let mut rng = seed_stream(seed, 0, "episode");
            let mut state = env.reset();
            let mut total = 0i64;
            let mut frames = 0i64;
            while !state.is_absorbed() && frames < 20_000 {
                let a = rng.random_range(0..4);
                let out = env.step(&state, a, &mut rng);
                total += out.reward as i64;
                frames += 1;
                state = out.next;
            }
            prop_assume!(state.is_absorbed());
            prop_assert_eq!(total, 100 - frames);
        }

        #[test]
        fn trail_length_counts_every_applied_move(seed in 0u64..500, x in 0i32..41) {
            let mut spec = catalog::interval41_drift(3, 0.5);
            spec.absorption = Absorption::FinalPosition;
            let env = Env::new(spec).unwrap();
            let mut rng = seed_stream(seed, 1, "trail");
            let state = EnvState { position: Position::Cell(Cell::at(x)), frame_count: 0 };
            let out = env.step(&state, RIGHT, &mut rng);
            let t = env.spec().temperature_at(Cell::at(x)) as usize;
            let len = out.micro_trail.len();
            prop_assert!(len == 1 + t || (env.spec().drift_at(Cell::at(x)) > 0.0 && len == 2 + t));
        }

        #[test]
        fn final_position_displacement_parity(seed in 0u64..500, t in 0u32..6) {
            let mut spec = catalog::interval41(t, 0.0);
            spec.absorption = Absorption::FinalPosition;
            let env = Env::new(spec).unwrap();
            let mut rng = seed_stream(seed, 2, "parity");
            let state = EnvState { position: Position::Cell(Cell::at(25)), frame_count: 0 };
            let out = env.step(&state, LEFT, &mut rng);
            let last = *out.micro_trail.last().unwrap();
            prop_assert_eq!((last.x - 25).rem_euclid(2), ((1 + t) % 2) as i32);
        }

        #[test]
        fn identical_seed_gives_identical_trajectory(seed in 0u64..100) {
            let env = Env::new(catalog::grid2d_l(3)).unwrap();
            let run = |seed| {
                let mut rng = seed_stream(seed, 0, "det");
                let mut s = env.reset();
                let mut trail = vec![];
                for i in 0..200 {
                    if s.is_absorbed() { break; }
                    let out = env.step(&s, i % 4, &mut rng);
                    trail.extend(out.micro_trail);
                    s = out.next;
                }
                trail
            };
            prop_assert_eq!(run(seed), run(seed));
        }
    }
}
