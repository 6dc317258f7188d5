//! Vacant-segment and planar-connectivity events inside a block `C_j`.
//!
//! Segment lengths use `[K log N] = floor(K ln N)` and offsets run over the
//! integers `0 ≤ i < √N`.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::geometry::{block_sites, enumerate_planes, BlockKind, BlockSpec, Cylinder, HeightRange, LatticePlane, Site};
use crate::rng::replica_rng;
use crate::unionfind::UnionFind;

use super::slab::Occupancy;
use super::AnalysisError;

/// `[K log N]` with the natural logarithm.
pub fn segment_length(k: f64, side: u32) -> u32 {
    assert!(k >= 0.0, "K must be nonnegative");
    (k * f64::from(side).ln()).floor().max(0.0) as u32
}

/// Number of integers `i ≥ 0` with `i < √N`.
pub fn offset_count(side: u32) -> u32 {
    let mut m = (f64::from(side).sqrt()) as u32;
    while m * m < side {
        m += 1;
    }
    while m > 0 && (m - 1) * (m - 1) >= side {
        m -= 1;
    }
    m
}

/// Which unit vectors `e` the segment event quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSet {
    /// All `2(d+1)` signed unit vectors.
    #[default]
    Signed,
    /// Only the `d+1` positive coordinate vectors.
    Positive,
}

impl DirectionSet {
    fn directions(self, cyl: &Cylinder) -> Vec<usize> {
        match self {
            DirectionSet::Signed => (0..cyl.directions()).collect(),
            DirectionSet::Positive => (0..cyl.directions()).step_by(2).collect(),
        }
    }
}

const NO_OFFSET: u8 = u8::MAX;

/// For each anchor `x ∈ C_j` and direction `e`, the smallest offset `i`
/// whose segment `x + (i + [0, L]) e` avoids the trace.
#[derive(Debug, Clone)]
pub struct SegmentCensus {
    heights: HeightRange,
    cells: usize,
    directions: Vec<usize>,
    segment_length: u32,
    offsets: u32,
    entries: Vec<u8>,
}

impl SegmentCensus {
    pub fn segment_length(&self) -> u32 {
        self.segment_length
    }

    pub fn offsets(&self) -> u32 {
        self.offsets
    }

    pub fn directions(&self) -> &[usize] {
        &self.directions
    }

    /// Smallest vacant offset for `(anchor, direction)`, `None` when every
    /// offset is blocked.
    pub fn get(&self, anchor: Site, direction: usize) -> Option<u32> {
        let di = self.directions.iter().position(|&d| d == direction)?;
        let z = i64::from(anchor.z);
        if !self.heights.contains(z) {
            return None;
        }
        let idx = (di * self.heights.len() as usize + (z - self.heights.lo) as usize) * self.cells + anchor.cell as usize;
        let v = self.entries[idx];
        (v != NO_OFFSET).then_some(u32::from(v))
    }

    /// Number of `(anchor, direction)` pairs without a vacant segment.
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|&&v| v == NO_OFFSET).count()
    }
}

#[derive(Debug, Clone)]
pub struct VOutcome {
    pub holds: bool,
    pub census: SegmentCensus,
}

fn check_covered<O: Occupancy>(occ: &O, range: HeightRange) -> Result<(), AnalysisError> {
    if occ.covers(range.lo as i32) && occ.covers(range.hi as i32) {
        Ok(())
    } else {
        Err(AnalysisError::Window {
            lo: range.lo,
            hi: range.hi,
        })
    }
}

/// Run lengths of vacant sites along a cycle, read in the positive direction:
/// `run[k]` counts consecutive vacant sites `k, k+1, …`, capped at the cycle
/// length (a fully vacant cycle gives the cap everywhere).
fn cyclic_runs(vacant: &[bool], runs: &mut Vec<u32>) {
    let n = vacant.len();
    runs.clear();
    runs.resize(n, 0);
    let Some(blocked) = vacant.iter().position(|&v| !v) else {
        runs.iter_mut().for_each(|r| *r = n as u32);
        return;
    };
    let mut next = 0u32;
    for step in 1..=n {
        let k = (blocked + n - step) % n;
        next = if vacant[k] { next + 1 } else { 0 };
        runs[k] = next;
    }
}

/// Vacant runs along a finite column, read upward.
fn linear_runs(vacant: &[bool], runs: &mut Vec<u32>) {
    runs.clear();
    runs.resize(vacant.len(), 0);
    let mut next = 0u32;
    for k in (0..vacant.len()).rev() {
        next = if vacant[k] { next + 1 } else { 0 };
        runs[k] = next;
    }
}

/// The segment event at level `level`: for every anchor in `C_j` and every
/// direction, some offset `0 ≤ i < √N` gives a segment of `L + 1` vacant
/// sites, `L = [K log N]`.
pub fn check_v<O: Occupancy>(cyl: &Cylinder, occ: &O, k: f64, level: i64, dirs: DirectionSet) -> Result<VOutcome, AnalysisError> {
    let side = cyl.side();
    let n = side as usize;
    let cells = cyl.cells() as usize;
    let d = cyl.dim();
    let heights = block_sites(BlockSpec::new(level, side, BlockKind::C));
    let len = segment_length(k, side);
    let m = offset_count(side);
    let reach = i64::from(m) - 1 + i64::from(len);
    let column = heights.widened(reach);
    check_covered(occ, column)?;

    let directions = dirs.directions(cyl);
    let h = heights.len() as usize;
    let mut entries = vec![NO_OFFSET; directions.len() * h * cells];
    let mut vacant = Vec::new();
    let mut runs = Vec::new();
    let mut holds = true;

    for (di, &dir) in directions.iter().enumerate() {
        let axis = dir >> 1;
        let positive = dir & 1 == 0;
        if axis < d {
            // a segment longer than the cycle covers the whole cycle
            let need = (len + 1).min(side);
            for z in heights.lo..=heights.hi {
                let zi = (z - heights.lo) as usize;
                for base in (0..cyl.cells()).filter(|&c| cyl.coord(c, axis) == 0) {
                    vacant.clear();
                    vacant.extend((0..side).map(|v| {
                        !occ.occupied(Site {
                            cell: cyl.with_coord(base, axis, v),
                            z: z as i32,
                        })
                    }));
                    if !positive {
                        vacant.reverse();
                    }
                    cyclic_runs(&vacant, &mut runs);
                    for pos in 0..n {
                        let found = (0..m as usize).find(|&i| runs[(pos + i) % n] >= need);
                        let coord = if positive { pos } else { (n - 1 - pos) % n };
                        let cell = cyl.with_coord(base, axis, coord as u32) as usize;
                        let idx = (di * h + zi) * cells + cell;
                        match found {
                            Some(i) => entries[idx] = i as u8,
                            None => holds = false,
                        }
                    }
                }
            }
        } else {
            let need = len + 1;
            for cell in 0..cyl.cells() {
                vacant.clear();
                vacant.extend((column.lo..=column.hi).map(|z| !occ.occupied(Site { cell, z: z as i32 })));
                if !positive {
                    vacant.reverse();
                }
                linear_runs(&vacant, &mut runs);
                for z in heights.lo..=heights.hi {
                    let pos = if positive {
                        (z - column.lo) as usize
                    } else {
                        (column.hi - z) as usize
                    };
                    let found = (0..m as usize).find(|&i| runs[pos + i] >= need);
                    let idx = (di * h + (z - heights.lo) as usize) * cells + cell as usize;
                    match found {
                        Some(i) => entries[idx] = i as u8,
                        None => holds = false,
                    }
                }
            }
        }
    }
    Ok(VOutcome {
        holds,
        census: SegmentCensus {
            heights,
            cells,
            directions,
            segment_length: len,
            offsets: m,
            entries,
        },
    })
}

/// Which planes of `ℒ_2` the planar event inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneScope {
    All,
    /// A seeded uniform sample of `count` planes. A pass is then only a
    /// necessary condition for the full event.
    Sampled { count: usize, seed: u64 },
}

impl PlaneScope {
    /// Every plane when `N ≤ 16`, otherwise a sample of `count`.
    pub fn for_side(side: u32, count: usize, seed: u64) -> Self {
        if side <= 16 {
            PlaneScope::All
        } else {
            PlaneScope::Sampled { count, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UOutcome {
    pub holds: bool,
    pub planes_checked: usize,
    /// A plane containing two distinct large vacant components.
    pub violation: Option<LatticePlane>,
}

/// Large vacant components of `F ∩ C_j` for one plane. Returns how many
/// components have ℓ∞-diameter at least `len`.
fn large_components<O: Occupancy>(
    cyl: &Cylinder,
    occ: &O,
    plane: &LatticePlane,
    heights: HeightRange,
    len: u32,
    scratch: &mut PlaneScratch,
) -> usize {
    let d = cyl.dim();
    let side = cyl.side();
    let axes = plane.axes();
    let (a, b) = (axes[0], axes[1]);
    let base_cell = cyl.pack(&crate::geometry::CylinderPoint::new(plane.base().torus.clone(), 0)).cell;
    // first plane coordinate is always a torus axis; the second is vertical
    // when the plane contains e_{d+1}
    let vertical = b == d;
    let rows = if vertical { heights.len() as usize } else { side as usize };
    let cols = side as usize;
    // cells along the plane by stride arithmetic
    let origin = if vertical { cyl.with_coord(base_cell, a, 0) } else { cyl.with_coord(cyl.with_coord(base_cell, a, 0), b, 0) };
    let stride_a = (cyl.with_coord(origin, a, 1) - origin) as usize;
    let stride_b = if vertical { 0 } else { (cyl.with_coord(origin, b, 1) - origin) as usize };
    let site = |u: usize, v: usize| -> Site {
        if vertical {
            Site {
                cell: (origin as usize + u * stride_a) as u32,
                z: (heights.lo + v as i64) as i32,
            }
        } else {
            Site {
                cell: (origin as usize + u * stride_a + v * stride_b) as u32,
                z: plane.base().z as i32,
            }
        }
    };
    let total = rows * cols;
    scratch.vacant.clear();
    for v in 0..rows {
        for u in 0..cols {
            scratch.vacant.push(!occ.occupied(site(u, v)));
        }
    }
    let uf = &mut scratch.uf;
    uf.reset(total);
    for v in 0..rows {
        for u in 0..cols {
            let i = v * cols + u;
            if !scratch.vacant[i] {
                continue;
            }
            let right = v * cols + (u + 1) % cols;
            if cols > 1 && scratch.vacant[right] {
                uf.union(i, right);
            }
            if v + 1 < rows || (!vertical && rows > 1) {
                let up = ((v + 1) % rows) * cols + u;
                if scratch.vacant[up] {
                    uf.union(i, up);
                }
            }
        }
    }
    // per component: residues along the torus axis a, and either residues
    // along b or the vertical extent
    scratch.spread.clear();
    scratch.slot.clear();
    scratch.slot.resize(total, u32::MAX);
    let mut count = 0;
    for v in 0..rows {
        for u in 0..cols {
            let i = v * cols + u;
            if !scratch.vacant[i] {
                continue;
            }
            let r = uf.find(i);
            if scratch.slot[r] == u32::MAX {
                scratch.slot[r] = scratch.spread.len() as u32;
                scratch.spread.push(Spread::new(cols, rows));
            }
            let entry = &mut scratch.spread[scratch.slot[r] as usize];
            entry.u[u] = true;
            entry.v_lo = entry.v_lo.min(v);
            entry.v_hi = entry.v_hi.max(v);
            if !vertical {
                entry.v[v] = true;
            }
        }
    }
    for s in &scratch.spread {
        let du = max_cyclic_distance(&s.u);
        let dv = if vertical {
            (s.v_hi - s.v_lo) as u32
        } else {
            max_cyclic_distance(&s.v)
        };
        if du.max(dv) >= len {
            count += 1;
        }
    }
    count
}

struct Spread {
    u: Vec<bool>,
    v: Vec<bool>,
    v_lo: usize,
    v_hi: usize,
}

impl Spread {
    fn new(cols: usize, rows: usize) -> Self {
        Self {
            u: vec![false; cols],
            v: vec![false; rows],
            v_lo: usize::MAX,
            v_hi: 0,
        }
    }
}

#[derive(Default)]
struct PlaneScratch {
    vacant: Vec<bool>,
    uf: UnionFind,
    spread: Vec<Spread>,
    /// Index into `spread` for each union-find root.
    slot: Vec<u32>,
}

/// Largest torus distance between two marked residues of a cycle.
fn max_cyclic_distance(present: &[bool]) -> u32 {
    let n = present.len();
    let marked: Vec<usize> = (0..n).filter(|&i| present[i]).collect();
    let mut best = 0;
    for (x, &i) in marked.iter().enumerate() {
        for &j in &marked[x + 1..] {
            let diff = j - i;
            best = best.max(diff.min(n - diff));
        }
    }
    best as u32
}

/// The planar event at level `level`: in every in-scope `F ∈ ℒ_2`, all
/// connected vacant subsets of `F ∩ C_j` with ℓ∞-diameter `≥ [K log N]` lie
/// in one component. Equivalently, at most one maximal component of
/// `F ∩ C_j` minus the trace has diameter `≥ [K log N]`.
pub fn check_u<O: Occupancy>(cyl: &Cylinder, occ: &O, k: f64, level: i64, scope: PlaneScope) -> Result<UOutcome, AnalysisError> {
    let heights = block_sites(BlockSpec::new(level, cyl.side(), BlockKind::C));
    check_covered(occ, heights)?;
    let len = segment_length(k, cyl.side());
    let mut planes: Vec<LatticePlane> = enumerate_planes(cyl, level, 2)?.collect();
    if let PlaneScope::Sampled { count, seed } = scope {
        if count < planes.len() {
            let mut rng = replica_rng(seed, 0);
            let mut picked: Vec<usize> = sample(&mut rng, planes.len(), count).into_vec();
            picked.sort_unstable();
            planes = picked.into_iter().map(|i| planes[i].clone()).collect();
        }
    }
    let mut scratch = PlaneScratch::default();
    for (i, plane) in planes.iter().enumerate() {
        if large_components(cyl, occ, plane, heights, len, &mut scratch) >= 2 {
            return Ok(UOutcome {
                holds: false,
                planes_checked: i + 1,
                violation: Some(plane.clone()),
            });
        }
    }
    Ok(UOutcome {
        holds: true,
        planes_checked: planes.len(),
        violation: None,
    })
}

#[derive(Debug, Clone)]
pub struct GOutcome {
    pub holds: bool,
    pub v: VOutcome,
    pub u: UOutcome,
}

/// Conjunction of the segment and planar events with the same `K`.
pub fn check_g<O: Occupancy>(cyl: &Cylinder, occ: &O, k: f64, level: i64, scope: PlaneScope) -> Result<GOutcome, AnalysisError> {
    let v = check_v(cyl, occ, k, level, DirectionSet::Signed)?;
    let u = check_u(cyl, occ, k, level, scope)?;
    Ok(GOutcome {
        holds: v.holds && u.holds,
        v,
        u,
    })
}

/// The two conclusions drawn from the joint event at time `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Linkage {
    /// Every line `F ∈ ℒ_1` meeting `C_j` contains a vacant segment of
    /// length `L_0` inside `C_j`.
    pub lines_have_segments: bool,
    /// All vacant segments of length `L_0` in `C_j` lie in one component of
    /// `C_j` minus the trace.
    pub segments_linked: bool,
}

impl Linkage {
    pub fn holds(&self) -> bool {
        self.lines_have_segments && self.segments_linked
    }
}

pub fn segment_linkage<O: Occupancy>(cyl: &Cylinder, occ: &O, level: i64, l0: u32) -> Result<Linkage, AnalysisError> {
    let side = cyl.side();
    let d = cyl.dim();
    let cells = cyl.cells() as usize;
    let heights = block_sites(BlockSpec::new(level, side, BlockKind::C));
    check_covered(occ, heights)?;
    let h = heights.len() as usize;
    let index = |s: Site| (i64::from(s.z) - heights.lo) as usize * cells + s.cell as usize;
    let mut vacant = vec![false; h * cells];
    for z in heights.lo..=heights.hi {
        for cell in 0..cyl.cells() {
            let s = Site { cell, z: z as i32 };
            vacant[index(s)] = !occ.occupied(s);
        }
    }
    let mut uf = UnionFind::new(h * cells);
    for z in heights.lo..=heights.hi {
        for cell in 0..cyl.cells() {
            let s = Site { cell, z: z as i32 };
            let i = index(s);
            if !vacant[i] {
                continue;
            }
            for axis in 0..d {
                let t = cyl.step(s, 2 * axis);
                if vacant[index(t)] {
                    uf.union(i, index(t));
                }
            }
            if z < heights.hi {
                let t = Site { cell, z: s.z + 1 };
                if vacant[index(t)] {
                    uf.union(i, index(t));
                }
            }
        }
    }

    let need = l0 + 1;
    let mut lines_ok = true;
    let mut root: Option<usize> = None;
    let mut linked = true;
    let mut line = Vec::new();
    let mut runs = Vec::new();
    let mut note_run = |start: usize, uf: &mut UnionFind| {
        let r = uf.find(start);
        match root {
            None => root = Some(r),
            Some(r0) if r0 != r => linked = false,
            _ => {}
        }
    };
    for axis in 0..d {
        let cyc_need = need.min(side);
        for z in heights.lo..=heights.hi {
            for base in (0..cyl.cells()).filter(|&c| cyl.coord(c, axis) == 0) {
                line.clear();
                line.extend((0..side).map(|v| vacant[index(Site { cell: cyl.with_coord(base, axis, v), z: z as i32 })]));
                cyclic_runs(&line, &mut runs);
                let mut has = false;
                for (v, &r) in runs.iter().enumerate() {
                    if r >= cyc_need {
                        has = true;
                        note_run(index(Site { cell: cyl.with_coord(base, axis, v as u32), z: z as i32 }), &mut uf);
                    }
                }
                lines_ok &= has;
            }
        }
    }
    for cell in 0..cyl.cells() {
        line.clear();
        line.extend((heights.lo..=heights.hi).map(|z| vacant[index(Site { cell, z: z as i32 })]));
        linear_runs(&line, &mut runs);
        let mut has = false;
        for (k, &r) in runs.iter().enumerate() {
            if r >= need {
                has = true;
                note_run(index(Site { cell, z: (heights.lo + k as i64) as i32 }), &mut uf);
            }
        }
        lines_ok &= has;
    }
    Ok(Linkage {
        lines_have_segments: lines_ok,
        segments_linked: linked,
    })
}
