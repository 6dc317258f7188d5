//! Geometry of the discrete cylinder `(Z/NZ)^d × Z`.
//!
//! Axes are indexed from zero: axes `0..d` are the torus directions and axis
//! `d` is the vertical (height) direction. A step direction is an index in
//! `0..2(d+1)`: direction `2a` moves `+1` along axis `a`, direction `2a + 1`
//! moves `-1`.

use std::collections::HashSet;

use itertools::Itertools;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("torus dimension must be at least 1, got {0}")]
    Dimension(usize),
    #[error("side length must be at least {min}, got {got}")]
    Side { min: u32, got: u32 },
    #[error("torus with side {side} in dimension {d} has too many cells")]
    TooLarge { d: usize, side: u32 },
    #[error("plane dimension {m} outside 1..={max}")]
    PlaneDimension { m: usize, max: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    Arity { expected: usize, got: usize },
}

/// A site of the cylinder: `d` torus residues in `[0, N)` and a height.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderPoint {
    pub torus: Vec<u32>,
    pub z: i64,
}

impl CylinderPoint {
    pub fn new(torus: Vec<u32>, z: i64) -> Self {
        Self { torus, z }
    }

    pub fn origin(d: usize) -> Self {
        Self {
            torus: vec![0; d],
            z: 0,
        }
    }
}

/// Packed site used by the simulation hot paths: mixed-radix torus cell index
/// plus a 32-bit height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub cell: u32,
    pub z: i32,
}

/// Reduces an integer `(d+1)`-vector into the cylinder with side `n`.
pub fn project(x: &[i64], n: u32) -> CylinderPoint {
    assert!(n >= 1, "side length must be positive");
    assert!(!x.is_empty(), "a point needs at least the height coordinate");
    let (torus, z) = x.split_at(x.len() - 1);
    CylinderPoint {
        torus: torus
            .iter()
            .map(|&c| c.rem_euclid(i64::from(n)) as u32)
            .collect(),
        z: z[0],
    }
}

/// The cylinder `(Z/NZ)^d × Z` for fixed `d` and `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    d: usize,
    side: u32,
    cells: u32,
    strides: Vec<u32>,
}

impl Cylinder {
    pub fn new(d: usize, side: u32) -> Result<Self, GeometryError> {
        if d == 0 {
            return Err(GeometryError::Dimension(d));
        }
        if side == 0 {
            return Err(GeometryError::Side { min: 1, got: side });
        }
        let mut strides = Vec::with_capacity(d);
        let mut acc: u64 = 1;
        for _ in 0..d {
            strides.push(acc as u32);
            acc *= u64::from(side);
            if acc > u64::from(u32::MAX) {
                return Err(GeometryError::TooLarge { d, side });
            }
        }
        Ok(Self {
            d,
            side,
            cells: acc as u32,
            strides,
        })
    }

    /// Torus dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    /// Number of torus cells, `N^d`.
    pub fn cells(&self) -> u32 {
        self.cells
    }

    /// Number of signed unit step directions, `2(d+1)`.
    pub fn directions(&self) -> usize {
        2 * (self.d + 1)
    }

    pub fn vertical_axis(&self) -> usize {
        self.d
    }

    pub fn project(&self, x: &[i64]) -> Result<CylinderPoint, GeometryError> {
        if x.len() != self.d + 1 {
            return Err(GeometryError::Arity {
                expected: self.d + 1,
                got: x.len(),
            });
        }
        Ok(project(x, self.side))
    }

    pub fn pack(&self, p: &CylinderPoint) -> Site {
        debug_assert_eq!(p.torus.len(), self.d);
        let cell = p
            .torus
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| (c % self.side) * s)
            .sum();
        Site {
            cell,
            z: i32::try_from(p.z).expect("height exceeds 32-bit storage"),
        }
    }

    pub fn unpack(&self, s: Site) -> CylinderPoint {
        CylinderPoint {
            torus: (0..self.d).map(|a| self.coord(s.cell, a)).collect(),
            z: i64::from(s.z),
        }
    }

    /// Torus coordinate of `cell` along torus axis `axis`.
    #[inline]
    pub fn coord(&self, cell: u32, axis: usize) -> u32 {
        (cell / self.strides[axis]) % self.side
    }

    #[inline]
    pub fn with_coord(&self, cell: u32, axis: usize, value: u32) -> u32 {
        let old = self.coord(cell, axis);
        cell - old * self.strides[axis] + (value % self.side) * self.strides[axis]
    }

    /// Cell reached by moving `delta` along torus axis `axis`, with wrap-around.
    #[inline]
    pub fn shift_cell(&self, cell: u32, axis: usize, delta: i64) -> u32 {
        let old = i64::from(self.coord(cell, axis));
        let new = (old + delta).rem_euclid(i64::from(self.side)) as u32;
        cell - (old as u32) * self.strides[axis] + new * self.strides[axis]
    }

    /// One unit step in direction `dir ∈ 0..2(d+1)`.
    #[inline]
    pub fn step(&self, s: Site, dir: usize) -> Site {
        let axis = dir >> 1;
        let up = dir & 1 == 0;
        if axis == self.d {
            let z = if up { s.z.checked_add(1) } else { s.z.checked_sub(1) };
            Site {
                cell: s.cell,
                z: z.expect("height overflow"),
            }
        } else {
            let stride = self.strides[axis];
            let c = (s.cell / stride) % self.side;
            let cell = if up {
                if c + 1 == self.side {
                    s.cell - c * stride
                } else {
                    s.cell + stride
                }
            } else if c == 0 {
                s.cell + (self.side - 1) * stride
            } else {
                s.cell - stride
            };
            Site { cell, z: s.z }
        }
    }

    /// Nearest neighbours; duplicates (which occur when `N ≤ 2`) are removed.
    pub fn neighbors(&self, p: &CylinderPoint) -> Vec<CylinderPoint> {
        let s = self.pack(p);
        let mut out = Vec::with_capacity(self.directions());
        let mut seen = HashSet::with_capacity(self.directions());
        for dir in 0..self.directions() {
            let t = self.step(s, dir);
            if t != s && seen.insert(t) {
                out.push(self.unpack(t));
            }
        }
        out
    }

    /// The `3^{d+1} - 1` sites at ℓ∞-distance one. Requires `N ≥ 3`.
    pub fn star_neighbors(&self, p: &CylinderPoint) -> Result<Vec<CylinderPoint>, GeometryError> {
        if self.side < 3 {
            return Err(GeometryError::Side {
                min: 3,
                got: self.side,
            });
        }
        let s = self.pack(p);
        let out = (0..=self.d)
            .map(|_| -1i64..=1)
            .multi_cartesian_product()
            .filter(|offset| offset.iter().any(|&o| o != 0))
            .map(|offset| {
                let mut cell = s.cell;
                for (axis, &o) in offset[..self.d].iter().enumerate() {
                    cell = self.shift_cell(cell, axis, o);
                }
                self.unpack(Site {
                    cell,
                    z: s.z + offset[self.d] as i32,
                })
            })
            .collect();
        Ok(out)
    }

    /// Sites outside `u` having a nearest neighbour in `u`.
    pub fn boundary(&self, u: &HashSet<CylinderPoint>) -> HashSet<CylinderPoint> {
        let packed: HashSet<Site> = u.iter().map(|p| self.pack(p)).collect();
        let mut out = HashSet::new();
        for &s in &packed {
            for dir in 0..self.directions() {
                let t = self.step(s, dir);
                if !packed.contains(&t) {
                    out.insert(t);
                }
            }
        }
        out.into_iter().map(|s| self.unpack(s)).collect()
    }

    /// Distance along torus axis, accounting for wrap-around.
    pub fn torus_distance(&self, a: u32, b: u32) -> u32 {
        let diff = a.abs_diff(b);
        diff.min(self.side - diff)
    }

    /// ℓ∞ distance induced on the cylinder.
    pub fn linf_distance(&self, p: &CylinderPoint, q: &CylinderPoint) -> u64 {
        let torus = p
            .torus
            .iter()
            .zip(&q.torus)
            .map(|(&a, &b)| u64::from(self.torus_distance(a, b)))
            .max()
            .unwrap_or(0);
        torus.max(p.z.abs_diff(q.z))
    }
}

/// Closed integer interval of heights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeightRange {
    pub lo: i64,
    pub hi: i64,
}

impl HeightRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn contains(&self, z: i64) -> bool {
        self.lo <= z && z <= self.hi
    }

    pub fn len(&self) -> u64 {
        if self.hi < self.lo {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    pub fn widened(&self, by: i64) -> Self {
        Self {
            lo: self.lo - by,
            hi: self.hi + by,
        }
    }

    pub fn is_subset_of(&self, other: &HeightRange) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BlockKind {
    /// The core block of height about `3N/2` around level `jN`.
    C,
    /// The return block `[(j-1)N, (j+1)N]`.
    B,
    /// The departure block `[(j-2)N+1, (j+2)N-1]`.
    BTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    pub level: i64,
    pub side: u32,
    pub kind: BlockKind,
}

impl BlockSpec {
    pub fn new(level: i64, side: u32, kind: BlockKind) -> Self {
        Self { level, side, kind }
    }

    pub fn heights(&self) -> HeightRange {
        block_sites(*self)
    }
}

/// Height interval of a block. Every site whose height falls in the interval
/// belongs to the block.
pub fn block_sites(spec: BlockSpec) -> HeightRange {
    assert!(spec.side >= 2, "blocks need N >= 2");
    let n = i64::from(spec.side);
    let j = spec.level;
    match spec.kind {
        // [(j - 3/4) N, (j + 3/4) N] ∩ Z
        BlockKind::C => HeightRange {
            lo: ((4 * j - 3) * n).div_euclid(4) + i64::from(((4 * j - 3) * n).rem_euclid(4) != 0),
            hi: ((4 * j + 3) * n).div_euclid(4),
        },
        BlockKind::B => HeightRange {
            lo: (j - 1) * n,
            hi: (j + 1) * n,
        },
        BlockKind::BTilde => HeightRange {
            lo: (j - 2) * n + 1,
            hi: (j + 2) * n - 1,
        },
    }
}

/// `π_E(base + Σ_{i∈axes} Z e_i)`, stored in canonical form: the base has
/// zero coordinates along every axis of the plane.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePlane {
    axes: Vec<usize>,
    base: CylinderPoint,
}

impl LatticePlane {
    pub fn new(cyl: &Cylinder, mut axes: Vec<usize>, base: CylinderPoint) -> Result<Self, GeometryError> {
        axes.sort_unstable();
        axes.dedup();
        let m = axes.len();
        if m == 0 || m > cyl.dim() + 1 || axes.iter().any(|&a| a > cyl.dim()) {
            return Err(GeometryError::PlaneDimension {
                m,
                max: cyl.dim() + 1,
            });
        }
        if base.torus.len() != cyl.dim() {
            return Err(GeometryError::Arity {
                expected: cyl.dim(),
                got: base.torus.len(),
            });
        }
        let mut base = base;
        for &a in &axes {
            if a == cyl.dim() {
                base.z = 0;
            } else {
                base.torus[a] = 0;
            }
        }
        for c in base.torus.iter_mut() {
            *c %= cyl.side();
        }
        Ok(Self { axes, base })
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn base(&self) -> &CylinderPoint {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn is_vertical(&self, cyl: &Cylinder) -> bool {
        self.axes.contains(&cyl.dim())
    }

    pub fn contains(&self, cyl: &Cylinder, p: &CylinderPoint) -> bool {
        (0..cyl.dim())
            .filter(|a| !self.axes.contains(a))
            .all(|a| p.torus[a] == self.base.torus[a])
            && (self.is_vertical(cyl) || p.z == self.base.z)
    }

    /// Sites of the plane whose height lies in `heights`.
    pub fn sites_within(&self, cyl: &Cylinder, heights: HeightRange) -> Vec<CylinderPoint> {
        let torus_axes: Vec<usize> = self.axes.iter().copied().filter(|&a| a < cyl.dim()).collect();
        let zs: Vec<i64> = if self.is_vertical(cyl) {
            (heights.lo..=heights.hi).collect()
        } else if heights.contains(self.base.z) {
            vec![self.base.z]
        } else {
            Vec::new()
        };
        let mut out = Vec::new();
        for &z in &zs {
            for values in odometer(torus_axes.len(), cyl.side()) {
                let mut p = self.base.clone();
                p.z = z;
                for (&a, &v) in torus_axes.iter().zip(&values) {
                    p.torus[a] = v;
                }
                out.push(p);
            }
        }
        out
    }
}

/// Every plane of dimension `m` spanned by coordinate axes that meets the
/// block `C_level`, each exactly once in canonical form.
pub fn enumerate_planes(
    cyl: &Cylinder,
    level: i64,
    m: usize,
) -> Result<impl Iterator<Item = LatticePlane> + '_, GeometryError> {
    let d = cyl.dim();
    if m == 0 || m > d + 1 {
        return Err(GeometryError::PlaneDimension { m, max: d + 1 });
    }
    let heights = block_sites(BlockSpec::new(level, cyl.side(), BlockKind::C));
    Ok((0..=d).combinations(m).flat_map(move |axes| {
        let vertical = axes.contains(&d);
        let free: Vec<usize> = (0..d).filter(|a| !axes.contains(a)).collect();
        let zs: Vec<i64> = if vertical {
            vec![0]
        } else {
            (heights.lo..=heights.hi).collect()
        };
        let side = cyl.side();
        let free_len = free.len();
        zs.into_iter().flat_map(move |z| {
            let axes = axes.clone();
            let free = free.clone();
            odometer(free_len, side).map(move |values| {
                    let mut base = CylinderPoint::origin(d);
                    base.z = z;
                    for (&a, &v) in free.iter().zip(&values) {
                        base.torus[a] = v;
                    }
                    LatticePlane {
                        axes: axes.clone(),
                        base,
                    }
                })
        })
    }))
}

/// All vectors in `[0, side)^len`, in lexicographic order. Yields a single
/// empty vector when `len == 0`.
pub(crate) fn odometer(len: usize, side: u32) -> impl Iterator<Item = Vec<u32>> {
    let mut next = if side == 0 && len > 0 {
        None
    } else {
        Some(vec![0u32; len])
    };
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        let mut i = len;
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < side {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    })
}

/// `length + 1` sites `base + k·dir`, `0 ≤ k ≤ length`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSpec {
    pub base: CylinderPoint,
    pub axis: usize,
    pub positive: bool,
    pub length: u32,
}

impl SegmentSpec {
    pub fn sites(&self, cyl: &Cylinder) -> Vec<CylinderPoint> {
        let dir = 2 * self.axis + usize::from(!self.positive);
        let mut s = cyl.pack(&self.base);
        let mut out = Vec::with_capacity(self.length as usize + 1);
        out.push(cyl.unpack(s));
        for _ in 0..self.length {
            s = cyl.step(s, dir);
            out.push(cyl.unpack(s));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(t: &[u32], z: i64) -> CylinderPoint {
        CylinderPoint::new(t.to_vec(), z)
    }

    #[test]
    fn project_reduces_torus_only() {
        assert_eq!(project(&[0, 0, 0], 5), pt(&[0, 0], 0));
        assert_eq!(project(&[7, -1, 3], 5), pt(&[2, 4], 3));
        assert_eq!(project(&[7 + 5, -1, 3], 5), project(&[7, -1, 3], 5));
    }

    #[test]
    fn neighbors_d1() {
        let cyl = Cylinder::new(1, 5).unwrap();
        let mut got = cyl.neighbors(&pt(&[0], 0));
        got.sort();
        let mut want = vec![pt(&[1], 0), pt(&[4], 0), pt(&[0], 1), pt(&[0], -1)];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbors_collapse_on_tiny_torus() {
        let cyl = Cylinder::new(2, 2).unwrap();
        // ±e_1 and ±e_2 coincide pairwise
        assert_eq!(cyl.neighbors(&pt(&[0, 0], 0)).len(), 4);
        let cyl = Cylinder::new(1, 1).unwrap();
        assert_eq!(cyl.neighbors(&pt(&[0], 0)).len(), 2);
    }

    #[test]
    fn star_neighbor_counts() {
        let cyl = Cylinder::new(1, 5).unwrap();
        assert_eq!(cyl.star_neighbors(&pt(&[0], 0)).unwrap().len(), 8);
        let cyl = Cylinder::new(2, 5).unwrap();
        let s = cyl.star_neighbors(&pt(&[4, 0], -2)).unwrap();
        assert_eq!(s.len(), 26);
        let distinct: HashSet<_> = s.iter().cloned().collect();
        assert_eq!(distinct.len(), 26);
        assert!(Cylinder::new(2, 2).unwrap().star_neighbors(&pt(&[0, 0], 0)).is_err());
    }

    #[test]
    fn boundary_examples() {
        let cyl = Cylinder::new(1, 5).unwrap();
        assert!(cyl.boundary(&HashSet::new()).is_empty());
        let u: HashSet<_> = [pt(&[0], 0)].into_iter().collect();
        assert_eq!(cyl.boundary(&u).len(), 4);
        let cyl = Cylinder::new(2, 4).unwrap();
        let slab: HashSet<_> = (0..4)
            .flat_map(|a| (0..4).map(move |b| pt(&[a, b], 0)))
            .collect();
        let b = cyl.boundary(&slab);
        assert_eq!(b.len(), 2 * 16);
        assert!(b.iter().all(|p| p.z.abs() == 1));
    }

    #[test]
    fn block_heights_at_n4() {
        assert_eq!(block_sites(BlockSpec::new(0, 4, BlockKind::C)), HeightRange::new(-3, 3));
        assert_eq!(block_sites(BlockSpec::new(0, 4, BlockKind::B)), HeightRange::new(-4, 4));
        assert_eq!(block_sites(BlockSpec::new(0, 4, BlockKind::BTilde)), HeightRange::new(-7, 7));
        // (j - 3/4) N with N = 5, j = 1: [1.25, 8.75] ∩ Z = [2, 8]
        assert_eq!(block_sites(BlockSpec::new(1, 5, BlockKind::C)), HeightRange::new(2, 8));
        assert_eq!(block_sites(BlockSpec::new(-1, 5, BlockKind::C)), HeightRange::new(-8, -2));
    }

    #[test]
    fn single_plane_at_full_dimension() {
        let cyl = Cylinder::new(2, 4).unwrap();
        let planes: Vec<_> = enumerate_planes(&cyl, 3, 3).unwrap().collect();
        assert_eq!(planes.len(), 1);
        assert!(enumerate_planes(&cyl, 0, 0).is_err());
        assert!(enumerate_planes(&cyl, 0, 4).is_err());
    }

    #[test]
    fn segment_wraps_on_torus() {
        let cyl = Cylinder::new(1, 4).unwrap();
        let seg = SegmentSpec {
            base: pt(&[3], 0),
            axis: 0,
            positive: true,
            length: 2,
        };
        assert_eq!(seg.sites(&cyl), vec![pt(&[3], 0), pt(&[0], 0), pt(&[1], 0)]);
    }

    #[test]
    fn plane_canonical_form() {
        let cyl = Cylinder::new(3, 5).unwrap();
        let a = LatticePlane::new(&cyl, vec![2, 0], pt(&[3, 1, 4], 7)).unwrap();
        let b = LatticePlane::new(&cyl, vec![0, 2], pt(&[0, 1, 2], 7)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(&cyl, &pt(&[4, 1, 3], 7)));
        assert!(!a.contains(&cyl, &pt(&[4, 1, 3], 6)));
        let v = LatticePlane::new(&cyl, vec![3, 1], pt(&[2, 3, 4], 9)).unwrap();
        assert_eq!(v.base(), &pt(&[2, 0, 4], 0));
        assert!(v.contains(&cyl, &pt(&[2, 1, 4], -100)));
    }
}
