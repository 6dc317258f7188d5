//! Simple random walk on the cylinder and the storage of its trace.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{block_sites, BlockKind, BlockSpec, Cylinder, CylinderPoint, GeometryError, Site};
use crate::rng::StepRng;

/// A stopping time that either happened at a known step or has not been
/// observed within the simulated horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observed<T> {
    At(T),
    NotYet,
}

impl<T> Observed<T> {
    pub fn at(self) -> Option<T> {
        match self {
            Observed::At(t) => Some(t),
            Observed::NotYet => None,
        }
    }

    pub fn is_seen(&self) -> bool {
        matches!(self, Observed::At(_))
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("step cap of {cap} reached")]
pub struct StepCapReached {
    pub cap: u64,
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("steps {index} -> {next} are not nearest neighbours")]
    NotAdjacent { index: usize, next: usize },
    #[error("empty path")]
    EmptyPath,
}

/// Initial law of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// Start at the origin.
    #[default]
    Origin,
    /// Uniform over the sites of the block `B_0 = (Z/NZ)^d × [-N, N]`.
    UniformB0,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub d: usize,
    pub side: u32,
    pub seed: u64,
    #[serde(default)]
    pub start: Start,
    #[serde(default)]
    pub step_cap: Option<u64>,
}

impl WalkConfig {
    pub fn new(d: usize, side: u32, seed: u64) -> Self {
        Self {
            d,
            side,
            seed,
            start: Start::Origin,
            step_cap: None,
        }
    }

    pub fn cylinder(&self) -> Result<Cylinder, GeometryError> {
        if self.side < 2 {
            return Err(GeometryError::Side {
                min: 2,
                got: self.side,
            });
        }
        Cylinder::new(self.d, self.side)
    }

    /// Opens the trajectory of replica `replica`, drawing the start point from
    /// the replica's stream.
    pub fn open(&self, replica: u64, opts: StoreOptions) -> Result<(TrajectoryStore, StepRng), GeometryError> {
        let cyl = self.cylinder()?;
        let mut rng = StepRng::new(self.seed, replica, cyl.directions());
        let start = self.draw_start(&cyl, &mut rng);
        let store = TrajectoryStore::new(cyl, start, StoreOptions { step_cap: self.step_cap.or(opts.step_cap), ..opts });
        Ok((store, rng))
    }

    /// Only the height of replica `replica`, with the same start law and
    /// random stream as [`WalkConfig::open`].
    pub fn open_height(&self, replica: u64) -> Result<HeightWalk, GeometryError> {
        let cyl = self.cylinder()?;
        let mut rng = StepRng::new(self.seed, replica, cyl.directions());
        let start = self.draw_start(&cyl, &mut rng);
        Ok(HeightWalk {
            rng,
            z: i64::from(start.z),
            time: 0,
            up: 2 * self.d,
        })
    }

    fn draw_start(&self, cyl: &Cylinder, rng: &mut StepRng) -> Site {
        match self.start {
            Start::Origin => Site { cell: 0, z: 0 },
            Start::UniformB0 => {
                let b0 = block_sites(BlockSpec::new(0, self.side, BlockKind::B));
                let cell = rng.below(u64::from(cyl.cells())) as u32;
                let z = b0.lo + rng.below(b0.len()) as i64;
                Site { cell, z: z as i32 }
            }
        }
    }
}

/// The height `X^{d+1}_n` of a cylinder walk. Every step still draws one of
/// the `2(d+1)` directions, so time is the cylinder walk's time.
#[derive(Debug, Clone)]
pub struct HeightWalk {
    rng: StepRng,
    z: i64,
    time: u64,
    up: usize,
}

impl HeightWalk {
    pub fn z(&self) -> i64 {
        self.z
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Advances one step and returns the new height.
    #[inline]
    pub fn step(&mut self) -> i64 {
        let dir = self.rng.direction();
        self.time += 1;
        if dir == self.up {
            self.z += 1;
        } else if dir == self.up + 1 {
            self.z -= 1;
        }
        self.z
    }
}

const UNVISITED: u64 = u64::MAX;

/// First-hit times of the sites visited so far, stored as dense height
/// layers of `N^d` cells. An optional height window restricts what is kept;
/// visits outside the window advance time but are not recorded.
#[derive(Debug, Clone)]
pub struct VisitedLayers {
    cells: usize,
    window: Option<(i32, i32)>,
    base: i32,
    layers: VecDeque<Box<[u64]>>,
    distinct: u64,
    span: Option<(i32, i32)>,
}

impl VisitedLayers {
    pub fn new(cells: usize, window: Option<(i32, i32)>) -> Self {
        Self {
            cells,
            window,
            base: 0,
            layers: VecDeque::new(),
            distinct: 0,
            span: None,
        }
    }

    pub fn window(&self) -> Option<(i32, i32)> {
        self.window
    }

    /// Whether the occupancy of height `z` is known to this store.
    pub fn covers(&self, z: i32) -> bool {
        match self.window {
            None => true,
            Some((lo, hi)) => lo <= z && z <= hi,
        }
    }

    /// Number of distinct recorded sites.
    pub fn len(&self) -> u64 {
        self.distinct
    }

    pub fn is_empty(&self) -> bool {
        self.distinct == 0
    }

    /// Lowest and highest recorded heights.
    pub fn span(&self) -> Option<(i32, i32)> {
        self.span
    }

    fn fresh_layer(&self) -> Box<[u64]> {
        vec![UNVISITED; self.cells].into_boxed_slice()
    }

    /// Records a visit at time `n`; returns true when the site is new.
    #[inline]
    pub fn record(&mut self, s: Site, n: u64) -> bool {
        if !self.covers(s.z) {
            return false;
        }
        if self.layers.is_empty() {
            self.base = s.z;
            let layer = self.fresh_layer();
            self.layers.push_back(layer);
        }
        while s.z < self.base {
            let layer = self.fresh_layer();
            self.layers.push_front(layer);
            self.base -= 1;
        }
        while s.z >= self.base + self.layers.len() as i32 {
            let layer = self.fresh_layer();
            self.layers.push_back(layer);
        }
        let slot = &mut self.layers[(s.z - self.base) as usize][s.cell as usize];
        if *slot == UNVISITED {
            *slot = n;
            self.distinct += 1;
            self.span = Some(match self.span {
                None => (s.z, s.z),
                Some((lo, hi)) => (lo.min(s.z), hi.max(s.z)),
            });
            true
        } else {
            false
        }
    }

    #[inline]
    pub fn first_hit(&self, s: Site) -> Option<u64> {
        if s.z < self.base {
            return None;
        }
        let idx = (s.z - self.base) as usize;
        match self.layers.get(idx) {
            Some(layer) => {
                let v = layer[s.cell as usize];
                (v != UNVISITED).then_some(v)
            }
            None => None,
        }
    }

    /// Whether `s` was visited at some time `≤ until`.
    #[inline]
    pub fn visited_by(&self, s: Site, until: u64) -> bool {
        if s.z < self.base {
            return false;
        }
        match self.layers.get((s.z - self.base) as usize) {
            Some(layer) => layer[s.cell as usize] <= until,
            None => false,
        }
    }

    /// All recorded `(site, first hit)` pairs, ordered by height then cell.
    pub fn iter(&self) -> impl Iterator<Item = (Site, u64)> + '_ {
        self.layers.iter().enumerate().flat_map(move |(i, layer)| {
            let z = self.base + i as i32;
            layer
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != UNVISITED)
                .map(move |(cell, &v)| (Site { cell: cell as u32, z }, v))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StoreOptions {
    /// Keep the full ordered path (memory grows with the number of steps).
    pub keep_path: bool,
    /// Restrict the visited-site record to this height window.
    pub window: Option<(i32, i32)>,
    pub step_cap: Option<u64>,
}

impl StoreOptions {
    pub fn with_path() -> Self {
        Self {
            keep_path: true,
            ..Self::default()
        }
    }
}

/// The walk's current state together with its trace.
#[derive(Debug, Clone)]
pub struct TrajectoryStore {
    cyl: Cylinder,
    position: Site,
    time: u64,
    step_cap: Option<u64>,
    /// Steps drawn one at a time; differs from `time` after a jump.
    drawn: u64,
    path: Option<Vec<Site>>,
    visited: VisitedLayers,
}

impl TrajectoryStore {
    pub fn new(cyl: Cylinder, start: Site, opts: StoreOptions) -> Self {
        let mut visited = VisitedLayers::new(cyl.cells() as usize, opts.window);
        visited.record(start, 0);
        Self {
            position: start,
            time: 0,
            step_cap: opts.step_cap,
            drawn: 0,
            path: opts.keep_path.then(|| vec![start]),
            visited,
            cyl,
        }
    }

    /// Replays a given nearest-neighbour path.
    pub fn from_path(cyl: Cylinder, path: &[Site]) -> Result<Self, WalkError> {
        let (&first, rest) = path.split_first().ok_or(WalkError::EmptyPath)?;
        let mut store = Self::new(cyl, first, StoreOptions::with_path());
        for (i, &next) in rest.iter().enumerate() {
            let dir = (0..store.cyl.directions())
                .find(|&dir| store.cyl.step(store.position, dir) == next)
                .ok_or(WalkError::NotAdjacent { index: i, next: i + 1 })?;
            store.push_step(dir);
        }
        Ok(store)
    }

    pub fn cylinder(&self) -> &Cylinder {
        &self.cyl
    }

    pub fn position(&self) -> Site {
        self.position
    }

    /// Steps drawn one at a time so far, the quantity the step cap bounds.
    pub fn drawn(&self) -> u64 {
        self.drawn
    }

    /// Index of the current step `n` (the walk sits at `X_n`).
    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn path(&self) -> Option<&[Site]> {
        self.path.as_deref()
    }

    pub fn visited(&self) -> &VisitedLayers {
        &self.visited
    }

    /// One uniform step among the `2(d+1)` signed unit directions.
    #[inline]
    pub fn advance(&mut self, rng: &mut StepRng) -> Result<Site, StepCapReached> {
        if let Some(cap) = self.step_cap {
            if self.drawn >= cap {
                return Err(StepCapReached { cap });
            }
        }
        let dir = rng.direction();
        self.drawn += 1;
        Ok(self.push_step(dir))
    }

    /// Moves to the first site at height `target` by sampling the passage
    /// there directly (see [`crate::passage`]); the sites in between are not
    /// recorded, so every height strictly beyond `target` on the walk's side
    /// must lie outside the store's window.
    ///
    /// The jump counts as a single draw against the step cap.
    ///
    /// # Panics
    /// If the store keeps its path or has no window, or the window reaches
    /// beyond `target`.
    pub fn jump_to_height(&mut self, rng: &mut StepRng, target: i32) -> Result<Site, StepCapReached> {
        assert!(self.path.is_none(), "cannot jump while keeping the path");
        let (lo, hi) = self.visited.window().expect("jumps need a height window");
        let z = self.position.z;
        assert!(
            (z > target && hi <= target) || (z < target && lo >= target) || z == target,
            "window [{lo}, {hi}] meets the passage from {z} to {target}"
        );
        // a passage costs one draw, however long it takes; only the clock
        // itself must not overflow
        let limit = (u64::MAX / 2).saturating_sub(self.time);
        let Some((site, elapsed)) = crate::passage::vertical_passage(&self.cyl, rng, self.position, target, limit) else {
            return Err(StepCapReached { cap: u64::MAX / 2 });
        };
        self.position = site;
        self.time += elapsed;
        self.drawn += 1;
        self.visited.record(site, self.time);
        Ok(site)
    }

    #[inline]
    fn push_step(&mut self, dir: usize) -> Site {
        self.position = self.cyl.step(self.position, dir);
        self.time += 1;
        self.visited.record(self.position, self.time);
        if let Some(path) = self.path.as_mut() {
            path.push(self.position);
        }
        self.position
    }

    pub fn point(&self, s: Site) -> CylinderPoint {
        self.cyl.unpack(s)
    }
}

/// Entrance, exit and hitting times of a set along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingTimes {
    /// First `n ≥ 0` with `X_n ∈ U`.
    pub entrance: Observed<u64>,
    /// First `n ≥ 0` with `X_n ∉ U`.
    pub exit: Observed<u64>,
    /// First `n ≥ 1` with `X_n ∈ U`.
    pub hitting: Observed<u64>,
}

pub fn entrance_exit_times<F>(path: &[Site], mut inside: F) -> StoppingTimes
where
    F: FnMut(Site) -> bool,
{
    let mut entrance = Observed::NotYet;
    let mut exit = Observed::NotYet;
    let mut hitting = Observed::NotYet;
    for (n, &s) in path.iter().enumerate() {
        let n = n as u64;
        let inn = inside(s);
        if inn && !entrance.is_seen() {
            entrance = Observed::At(n);
        }
        if inn && n >= 1 && !hitting.is_seen() {
            hitting = Observed::At(n);
        }
        if !inn && !exit.is_seen() {
            exit = Observed::At(n);
        }
        if entrance.is_seen() && exit.is_seen() && hitting.is_seen() {
            break;
        }
    }
    StoppingTimes {
        entrance,
        exit,
        hitting,
    }
}
