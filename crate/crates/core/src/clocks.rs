//! Excursion clocks between the blocks `B_j ⊂ B̃_j`, the level-crossing times
//! `τ_k` and the local time of the level skeleton.
//!
//! All trackers are streaming: feed them `(n, z)` pairs in increasing `n` and
//! read the accumulated clocks at any point. Post-hoc helpers replay a stored
//! path through the same trackers.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{block_sites, BlockKind, BlockSpec, HeightRange, Site};
use crate::walk::Observed;

/// Returns `R^j_k` to `B_j` and departures `D^j_k` from `B̃_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcursionLedger {
    pub level: i64,
    pub returns: Vec<u64>,
    pub departures: Vec<u64>,
}

impl ExcursionLedger {
    /// `R^j_k` with `R^j_0 = 0`.
    pub fn return_time(&self, k: usize) -> Observed<u64> {
        if k == 0 {
            return Observed::At(0);
        }
        self.returns.get(k - 1).copied().map_or(Observed::NotYet, Observed::At)
    }

    /// `D^j_k` with `D^j_0 = 0`.
    pub fn departure(&self, k: usize) -> Observed<u64> {
        if k == 0 {
            return Observed::At(0);
        }
        self.departures.get(k - 1).copied().map_or(Observed::NotYet, Observed::At)
    }

    /// `D^j_t = D^j_{[t]}` for real `t ≥ 0`.
    pub fn departure_at(&self, t: f64) -> Observed<u64> {
        assert!(t >= 0.0, "excursion index must be nonnegative");
        self.departure(t.floor() as usize)
    }

    pub fn completed(&self) -> usize {
        self.departures.len()
    }

    /// `0 ≤ R_1 ≤ D_1 < R_2 < D_2 < …`, strict after the first pair.
    pub fn is_interleaved(&self) -> bool {
        if self.departures.len() > self.returns.len() || self.returns.len() > self.departures.len() + 1 {
            return false;
        }
        let mut seq = Vec::with_capacity(self.returns.len() + self.departures.len());
        for (i, &r) in self.returns.iter().enumerate() {
            seq.push(r);
            if let Some(&d) = self.departures.get(i) {
                seq.push(d);
            }
        }
        seq.windows(2)
            .enumerate()
            .all(|(i, w)| if i == 0 { w[0] <= w[1] } else { w[0] < w[1] })
    }
}

/// Streaming computation of the excursion ledger at one level.
#[derive(Debug, Clone)]
pub struct ExcursionTracker {
    inner: HeightRange,
    outer: HeightRange,
    inside: bool,
    k_max: Option<usize>,
    ledger: ExcursionLedger,
}

impl ExcursionTracker {
    pub fn new(level: i64, side: u32, k_max: Option<usize>) -> Self {
        Self {
            inner: block_sites(BlockSpec::new(level, side, BlockKind::B)),
            outer: block_sites(BlockSpec::new(level, side, BlockKind::BTilde)),
            inside: false,
            k_max,
            ledger: ExcursionLedger {
                level,
                returns: Vec::new(),
                departures: Vec::new(),
            },
        }
    }

    /// True once `k_max` departures are recorded.
    pub fn is_full(&self) -> bool {
        self.k_max.is_some_and(|k| self.ledger.departures.len() >= k)
    }

    #[inline]
    pub fn observe(&mut self, n: u64, z: i64) {
        if self.is_full() {
            return;
        }
        if self.inside {
            if !self.outer.contains(z) {
                self.ledger.departures.push(n);
                self.inside = false;
            }
        } else if self.inner.contains(z) {
            self.ledger.returns.push(n);
            self.inside = true;
        }
    }

    /// Whether the walk is between a return and the next departure.
    pub fn in_excursion(&self) -> bool {
        self.inside
    }

    pub fn ledger(&self) -> &ExcursionLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> ExcursionLedger {
        self.ledger
    }
}

/// Ledger of the first `k_max` excursions found along a stored path.
pub fn excursions(path: &[Site], side: u32, level: i64, k_max: usize) -> ExcursionLedger {
    let mut tracker = ExcursionTracker::new(level, side, Some(k_max));
    for (n, s) in path.iter().enumerate() {
        tracker.observe(n as u64, i64::from(s.z));
        if tracker.is_full() {
            break;
        }
    }
    let mut ledger = tracker.into_ledger();
    ledger.returns.truncate(k_max);
    ledger
}

/// Departure counts of every level at once. Only levels whose blocks the
/// walk has touched carry state.
#[derive(Debug, Clone, Default)]
pub struct LevelExcursionCounter {
    side: i64,
    levels: HashMap<i64, LevelState>,
    max_departures: u64,
    last_z: Option<i64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct LevelState {
    inside: bool,
    departures: u64,
}

impl LevelExcursionCounter {
    pub fn new(side: u32) -> Self {
        Self {
            side: i64::from(side),
            ..Self::default()
        }
    }

    /// Feed the height at time `n`. Only levels whose blocks have a boundary
    /// near `z` can change state, so the update is O(1).
    #[inline]
    pub fn observe(&mut self, z: i64) {
        if self.last_z == Some(z) {
            return;
        }
        self.last_z = Some(z);
        let n = self.side;
        let centre = z.div_euclid(n);
        for j in centre - 2..=centre + 3 {
            let inner_lo = (j - 1) * n;
            let inner_hi = (j + 1) * n;
            let outer_lo = (j - 2) * n + 1;
            let outer_hi = (j + 2) * n - 1;
            let entry = self.levels.entry(j);
            let state = entry.or_default();
            if state.inside {
                if z < outer_lo || z > outer_hi {
                    state.inside = false;
                    state.departures += 1;
                    self.max_departures = self.max_departures.max(state.departures);
                }
            } else if inner_lo <= z && z <= inner_hi {
                state.inside = true;
            }
        }
    }

    /// Completed departures at level `j`.
    pub fn departures(&self, level: i64) -> u64 {
        self.levels.get(&level).map_or(0, |s| s.departures)
    }

    /// `max_j` of completed departures.
    pub fn max_departures(&self) -> u64 {
        self.max_departures
    }

    pub fn touched_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Streaming level-crossing times `τ_0 < τ_1 < …`: `τ_0` is the first visit
/// to a height in `NZ`, `τ_{k+1}` the first later time the height differs by
/// exactly `N` from its value at `τ_k`.
#[derive(Debug, Clone)]
pub struct TauTracker {
    side: i64,
    anchor: Option<i64>,
    times: Vec<u64>,
    levels: Vec<i64>,
    keep_times: bool,
}

impl TauTracker {
    pub fn new(side: u32) -> Self {
        Self {
            side: i64::from(side),
            anchor: None,
            times: Vec::new(),
            levels: Vec::new(),
            keep_times: true,
        }
    }

    /// Tracker that only keeps the skeleton levels, not the times.
    pub fn levels_only(side: u32) -> Self {
        Self {
            keep_times: false,
            ..Self::new(side)
        }
    }

    #[inline]
    pub fn observe(&mut self, n: u64, z: i64) {
        let hit = match self.anchor {
            None => z.rem_euclid(self.side) == 0,
            Some(a) => (z - a).abs() == self.side,
        };
        if hit {
            self.anchor = Some(z);
            if self.keep_times {
                self.times.push(n);
            }
            self.levels.push(z.div_euclid(self.side));
        }
    }

    /// Number of observed `τ`'s.
    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    /// `X^{d+1}_{τ_k} / N` for the observed `k`.
    pub fn skeleton(&self) -> &[i64] {
        &self.levels
    }

    pub fn tau(&self, k: usize) -> Observed<u64> {
        self.times.get(k).copied().map_or(Observed::NotYet, Observed::At)
    }

    pub fn local_time(&self, t: f64) -> Observed<LevelLocalTime> {
        level_local_time_from_skeleton(&self.levels, t)
    }
}

/// All `τ_k` along a stored path.
pub fn tau_times(path: &[Site], side: u32) -> Vec<u64> {
    let mut tracker = TauTracker::new(side);
    for (n, s) in path.iter().enumerate() {
        tracker.observe(n as u64, i64::from(s.z));
    }
    tracker.times
}

/// `L_N(ℓ, t) = #{0 ≤ n ≤ t : X^{d+1}_{τ_n} = ℓN}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLocalTime {
    pub t: u64,
    pub counts: BTreeMap<i64, u64>,
}

impl LevelLocalTime {
    pub fn at(&self, level: i64) -> u64 {
        self.counts.get(&level).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }
}

/// Level local time at `t` from a stored path.
pub fn level_local_time(path: &[Site], side: u32, t: f64) -> Observed<LevelLocalTime> {
    let mut tracker = TauTracker::levels_only(side);
    let need = t.floor() as usize + 1;
    for (n, s) in path.iter().enumerate() {
        tracker.observe(n as u64, i64::from(s.z));
        if tracker.count() >= need {
            break;
        }
    }
    tracker.local_time(t)
}

/// Level local time from skeleton levels `X_{τ_k}/N`.
pub fn level_local_time_from_skeleton(levels: &[i64], t: f64) -> Observed<LevelLocalTime> {
    assert!(t >= 0.0, "time index must be nonnegative");
    let k = t.floor() as usize;
    if levels.len() <= k {
        return Observed::NotYet;
    }
    let mut counts = BTreeMap::new();
    for &l in &levels[..=k] {
        *counts.entry(l).or_insert(0) += 1;
    }
    Observed::At(LevelLocalTime { t: k as u64, counts })
}

/// `L(x, k) = Σ_{n ≤ k} 1{Z_n = x}` for a path `Z` on `Z`.
pub fn srw_local_time(path: &[i64], k: usize) -> BTreeMap<i64, u64> {
    let mut counts = BTreeMap::new();
    for &x in &path[..=k.min(path.len() - 1)] {
        *counts.entry(x).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical(zs: &[i32]) -> Vec<Site> {
        zs.iter().map(|&z| Site { cell: 0, z }).collect()
    }

    #[test]
    fn scripted_excursion_matches_hand_computation() {
        // d = 1, N = 4: B_0 = [-4, 4], B̃_0 = [-7, 7]. Climb to 8 (leaves B̃_0
        // at step 8), come back down to 4 (re-enters B_0 at step 12), then
        // climb out again to 8 (step 16).
        let mut zs: Vec<i32> = (0..=8).collect();
        zs.extend((4..8).rev());
        zs.extend(5..=8);
        let path = vertical(&zs);
        let ledger = excursions(&path, 4, 0, 10);
        assert_eq!(ledger.returns, vec![0, 12]);
        assert_eq!(ledger.departures, vec![8, 16]);
        assert!(ledger.is_interleaved());
        assert_eq!(ledger.departure_at(1.7), Observed::At(8));
        assert_eq!(ledger.departure_at(0.3), Observed::At(0));
        assert_eq!(ledger.departure(3), Observed::NotYet);
        assert_eq!(ledger.return_time(2), Observed::At(12));

        let ledger = excursions(&path, 4, 0, 1);
        assert_eq!(ledger.returns, vec![0]);
        assert_eq!(ledger.departures, vec![8]);
    }

    #[test]
    fn excursion_at_shifted_level() {
        // level 2 with N = 4: B_2 = [4, 12], B̃_2 = [1, 15]
        let zs: Vec<i32> = (0..=16).collect();
        let ledger = excursions(&vertical(&zs), 4, 2, 10);
        assert_eq!(ledger.returns, vec![4]);
        assert_eq!(ledger.departures, vec![16]);
        // descending walk re-enters B_2 at height 12 (step 20) and leaves B̃_2 at 0 (step 32)
        let mut zs2 = zs.clone();
        zs2.extend((0..16).rev());
        let ledger = excursions(&vertical(&zs2), 4, 2, 10);
        assert_eq!(ledger.returns, vec![4, 20]);
        assert_eq!(ledger.departures, vec![16, 32]);
    }

    #[test]
    fn tau_times_follow_level_moves() {
        let zs = [1, 2, 3, 4, 3, 2, 1, 0, 1, 2, 3, 4, 5, 6, 7, 8];
        let path = vertical(&zs);
        let taus = tau_times(&path, 4);
        // τ_0 at height 4 (step 3), then 0 (step 7), 4 (11), 8 (15)
        assert_eq!(taus, vec![3, 7, 11, 15]);
        let lt = level_local_time(&path, 4, 3.0).at().unwrap();
        assert_eq!(lt.at(1), 2);
        assert_eq!(lt.at(0), 1);
        assert_eq!(lt.at(2), 1);
        assert_eq!(lt.total(), 4);
        assert_eq!(level_local_time(&path, 4, 4.0), Observed::NotYet);
    }

    #[test]
    fn tau_zero_at_origin() {
        let path = vertical(&[0, 1, 0]);
        assert_eq!(tau_times(&path, 3)[0], 0);
        let lt = level_local_time(&path, 3, 0.0).at().unwrap();
        assert_eq!(lt.at(0), 1);
    }

    #[test]
    fn level_counter_agrees_with_single_level_trackers() {
        use crate::rng::StepRng;
        let mut rng = StepRng::new(5, 0, 2);
        let side = 3u32;
        let mut z = 0i64;
        let mut counter = LevelExcursionCounter::new(side);
        let mut trackers: Vec<ExcursionTracker> =
            (-12..=12).map(|j| ExcursionTracker::new(j, side, None)).collect();
        counter.observe(z);
        for t in &mut trackers {
            t.observe(0, z);
        }
        for n in 1..20_000u64 {
            z += if rng.direction() == 0 { 1 } else { -1 };
            counter.observe(z);
            for t in &mut trackers {
                t.observe(n, z);
            }
        }
        for t in &trackers {
            let j = t.ledger().level;
            assert_eq!(counter.departures(j), t.ledger().completed() as u64, "level {j}");
        }
    }

    #[test]
    fn srw_local_time_counts() {
        let path = [0, 1, 0, -1, 0];
        let lt = srw_local_time(&path, 4);
        assert_eq!(lt[&0], 3);
        assert_eq!(lt[&1], 1);
        assert_eq!(lt.values().sum::<u64>(), 5);
    }
}
