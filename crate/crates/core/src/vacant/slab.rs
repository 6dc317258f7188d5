//! Disconnection of the cylinder by a finite set.
//!
//! A finite set only occupies finitely many heights, so the cylinder can be
//! replaced by the slab between one layer below and one layer above the
//! occupied range. Both padding layers are fully vacant and stand for the two
//! infinite ends; the set disconnects the cylinder iff no vacant path joins
//! them inside the slab.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::geometry::{Cylinder, CylinderPoint, Site};
use crate::walk::{Observed, StoreOptions, TrajectoryStore, VisitedLayers, WalkConfig};

use super::AnalysisError;

/// Read access to an occupied ("visited") set.
pub trait Occupancy {
    fn occupied(&self, s: Site) -> bool;

    /// Lowest and highest heights that may contain occupied sites.
    fn span(&self) -> Option<(i32, i32)>;

    /// Whether this view knows the occupancy at height `z`.
    fn covers(&self, _z: i32) -> bool {
        true
    }
}

/// The trace `X_{[0, until]}` of a stored trajectory.
#[derive(Debug, Clone, Copy)]
pub struct PrefixView<'a> {
    visited: &'a VisitedLayers,
    until: u64,
}

impl<'a> PrefixView<'a> {
    pub fn new(visited: &'a VisitedLayers, until: u64) -> Self {
        Self { visited, until }
    }

    pub fn of(store: &'a TrajectoryStore) -> Self {
        Self::new(store.visited(), store.time())
    }

    pub fn until(&self) -> u64 {
        self.until
    }
}

impl Occupancy for PrefixView<'_> {
    #[inline]
    fn occupied(&self, s: Site) -> bool {
        self.visited.visited_by(s, self.until)
    }

    fn span(&self) -> Option<(i32, i32)> {
        self.visited.span()
    }

    fn covers(&self, z: i32) -> bool {
        self.visited.covers(z)
    }
}

/// An explicit finite set of sites.
#[derive(Debug, Clone, Default)]
pub struct SiteSet {
    sites: HashSet<Site>,
    span: Option<(i32, i32)>,
}

impl SiteSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points<'p>(cyl: &Cylinder, points: impl IntoIterator<Item = &'p CylinderPoint>) -> Self {
        points.into_iter().map(|p| cyl.pack(p)).collect()
    }

    pub fn insert(&mut self, s: Site) -> bool {
        self.span = Some(match self.span {
            None => (s.z, s.z),
            Some((lo, hi)) => (lo.min(s.z), hi.max(s.z)),
        });
        self.sites.insert(s)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Site> {
        self.sites.iter()
    }
}

impl FromIterator<Site> for SiteSet {
    fn from_iter<I: IntoIterator<Item = Site>>(iter: I) -> Self {
        let mut set = SiteSet::new();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl Occupancy for SiteSet {
    fn occupied(&self, s: Site) -> bool {
        self.sites.contains(&s)
    }

    fn span(&self) -> Option<(i32, i32)> {
        self.span
    }
}

/// Reusable scratch space for slab connectivity searches.
#[derive(Debug, Clone)]
pub struct DisconnectionProbe {
    cyl: Cylinder,
    marks: Vec<u32>,
    epoch: u32,
    stack: Vec<Site>,
    checks: u64,
}

impl DisconnectionProbe {
    pub fn new(cyl: Cylinder) -> Self {
        Self {
            cyl,
            marks: Vec::new(),
            epoch: 0,
            stack: Vec::new(),
            checks: 0,
        }
    }

    /// Number of connectivity searches run so far.
    pub fn checks(&self) -> u64 {
        self.checks
    }

    /// Whether the occupied set separates the two ends of the cylinder.
    ///
    /// Depth-first search from the top padding layer, trying downward moves
    /// first; it stops as soon as the bottom padding layer is reached.
    pub fn disconnects<O: Occupancy>(&mut self, occ: &O) -> bool {
        self.checks += 1;
        let Some((lo, hi)) = occ.span() else {
            return false;
        };
        let bottom = lo - 1;
        let top = hi + 1;
        let cells = self.cyl.cells() as usize;
        let layers = (top - bottom + 1) as usize;
        let needed = cells * layers;
        if self.marks.len() < needed {
            self.marks.resize(needed, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        let idx = |s: Site| (s.z - bottom) as usize * cells + s.cell as usize;

        let start = Site { cell: 0, z: top };
        self.marks[idx(start)] = epoch;
        self.stack.clear();
        self.stack.push(start);
        let dirs = self.cyl.directions();
        let up = dirs - 2;
        let down = dirs - 1;
        while let Some(s) = self.stack.pop() {
            if s.z == bottom {
                return false;
            }
            // LIFO: push upward first and downward last so descent is tried first.
            for dir in std::iter::once(up).chain(0..up).chain(std::iter::once(down)) {
                let t = self.cyl.step(s, dir);
                if t.z > top || t.z < bottom {
                    continue;
                }
                let i = idx(t);
                if self.marks[i] == epoch || occ.occupied(t) {
                    continue;
                }
                self.marks[i] = epoch;
                self.stack.push(t);
            }
        }
        true
    }
}

/// Whether the finite set `points` disconnects the cylinder.
pub fn is_disconnecting(cyl: &Cylinder, points: &HashSet<CylinderPoint>) -> bool {
    let set = SiteSet::from_points(cyl, points);
    DisconnectionProbe::new(cyl.clone()).disconnects(&set)
}

/// First `n` in `(lo, hi]` at which `X_{[0,n]}` disconnects, given that it
/// does not at `lo` and does at `hi`. The trace only grows with `n`, so the
/// predicate is monotone and bisection is exact.
pub fn first_disconnecting_prefix(probe: &mut DisconnectionProbe, visited: &VisitedLayers, mut lo: u64, mut hi: u64) -> u64 {
    debug_assert!(lo < hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe.disconnects(&PrefixView::new(visited, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisconnectionRun {
    /// `T_N`, or `NotYet` when the step cap was reached first.
    pub time: Observed<u64>,
    /// Steps actually simulated.
    pub steps: u64,
    /// Distinct sites visited when the run stopped.
    pub visited: u64,
    /// Connectivity searches performed (checkpoints plus bisection).
    pub checks: u64,
}

/// Simulates replica `replica` of `config` until its trace disconnects the
/// cylinder. Connectivity is checked every `cadence` steps; the exact time is
/// then recovered by bisection between the last negative and the first
/// positive checkpoint.
pub fn disconnection_time(config: &WalkConfig, replica: u64, cadence: u64) -> Result<DisconnectionRun, AnalysisError> {
    if cadence == 0 {
        return Err(AnalysisError::Cadence);
    }
    let (mut store, mut rng) = config.open(replica, StoreOptions::default())?;
    let cells = u64::from(store.cylinder().cells());
    let mut probe = DisconnectionProbe::new(store.cylinder().clone());
    let mut last_negative = 0u64;
    loop {
        let capped = store.advance(&mut rng).is_err();
        let now = store.time();
        if capped || now % cadence == 0 {
            // a disconnecting set meets each of the N^d vertical lines
            let positive = store.visited().len() >= cells && probe.disconnects(&PrefixView::of(&store));
            if positive {
                let t = first_disconnecting_prefix(&mut probe, store.visited(), last_negative, now);
                return Ok(DisconnectionRun {
                    time: Observed::At(t),
                    steps: now,
                    visited: store.visited().len(),
                    checks: probe.checks(),
                });
            }
            last_negative = now;
            if capped {
                return Ok(DisconnectionRun {
                    time: Observed::NotYet,
                    steps: now,
                    visited: store.visited().len(),
                    checks: probe.checks(),
                });
            }
        }
    }
}
