//! Property tests for the invariants of the geometry, walk, clocks and
//! disconnection layers.

use std::collections::HashSet;

use proptest::prelude::*;

use cylwalk::clocks::{excursions, level_local_time};
use cylwalk::geometry::{block_sites, project, BlockKind, BlockSpec, Cylinder, CylinderPoint};
use cylwalk::vacant::{disconnection_time, is_disconnecting};
use cylwalk::walk::{StoreOptions, WalkConfig};

fn cylinder() -> impl Strategy<Value = Cylinder> {
    (1usize..=3, 2u32..=7).prop_map(|(d, n)| Cylinder::new(d, n).unwrap())
}

fn point_in(cyl: &Cylinder) -> impl Strategy<Value = CylinderPoint> {
    let (d, n) = (cyl.dim(), cyl.side());
    (proptest::collection::vec(0..n, d), -50i64..50).prop_map(|(t, z)| CylinderPoint::new(t, z))
}

fn cylinder_and_point() -> impl Strategy<Value = (Cylinder, CylinderPoint)> {
    cylinder().prop_flat_map(|c| {
        let p = point_in(&c);
        (Just(c), p)
    })
}

/// All sites of the slab `(Z/NZ)^d × [0, h)`.
fn slab(cyl: &Cylinder, h: i64) -> Vec<CylinderPoint> {
    let n = cyl.side();
    let mut out = Vec::new();
    for cell in 0..cyl.cells() {
        let torus: Vec<u32> = (0..cyl.dim()).map(|a| cyl.coord(cell, a)).collect();
        debug_assert!(torus.iter().all(|&x| x < n));
        for z in 0..h {
            out.push(CylinderPoint::new(torus.clone(), z));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neighbours_are_symmetric((cyl, p) in cylinder_and_point()) {
        let nb = cyl.neighbors(&p);
        prop_assert!(nb.len() <= cyl.directions());
        if cyl.side() >= 3 {
            prop_assert_eq!(nb.len(), cyl.directions());
        }
        for q in &nb {
            prop_assert!(cyl.neighbors(q).contains(&p));
        }
    }

    #[test]
    fn projection_is_periodic(x in proptest::collection::vec(-1000i64..1000, 3), k in -5i64..5, axis in 0usize..2, n in 1u32..9) {
        let mut y = x.clone();
        y[axis] += k * i64::from(n);
        prop_assert_eq!(project(&x, n), project(&y, n));
        // the height is never reduced
        prop_assert_eq!(project(&x, n).z, x[2]);
    }

    #[test]
    fn blocks_are_nested(level in -20i64..20, n in 2u32..200) {
        let c = block_sites(BlockSpec::new(level, n, BlockKind::C));
        let b = block_sites(BlockSpec::new(level, n, BlockKind::B));
        let bt = block_sites(BlockSpec::new(level, n, BlockKind::BTilde));
        prop_assert!(c.is_subset_of(&b));
        prop_assert!(b.is_subset_of(&bt));
        prop_assert_eq!(b.len(), 2 * u64::from(n) + 1);
        prop_assert!(c.contains(level * i64::from(n)));
    }

    #[test]
    fn disconnection_is_monotone(seed in 0u64..1000, extra in proptest::collection::vec((0u32..9, 0i64..3), 0..6)) {
        // grow a random subset of a slab: once disconnecting, always
        let cyl = Cylinder::new(2, 3).unwrap();
        let all = slab(&cyl, 3);
        let mut order = all.clone();
        let mut rng = seed;
        for i in (1..order.len()).rev() {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (rng >> 33) as usize % (i + 1));
        }
        let mut set: HashSet<CylinderPoint> = extra
            .iter()
            .map(|&(c, z)| CylinderPoint::new(vec![c % 3, c / 3], z))
            .collect();
        let mut was = is_disconnecting(&cyl, &set);
        for p in order {
            set.insert(p);
            let now = is_disconnecting(&cyl, &set);
            prop_assert!(now || !was);
            was = now;
        }
        prop_assert!(was);
    }

    #[test]
    fn cadence_does_not_change_disconnection_time(replica in 0u64..10_000, cadence in 1u64..400) {
        let cfg = WalkConfig::new(1, 4, 7);
        let a = disconnection_time(&cfg, replica, 1).unwrap();
        let b = disconnection_time(&cfg, replica, cadence).unwrap();
        prop_assert_eq!(a.time, b.time);
        prop_assert!(a.time.at().unwrap() >= 3);
    }

    #[test]
    fn excursions_interleave(replica in 0u64..10_000, level in -1i64..=1) {
        let cfg = WalkConfig::new(1, 3, 5);
        let (mut store, mut rng) = cfg.open(replica, StoreOptions::with_path()).unwrap();
        for _ in 0..3000 {
            store.advance(&mut rng).unwrap();
        }
        let ledger = excursions(store.path().unwrap(), 3, level, 50);
        prop_assert!(ledger.is_interleaved());
        for (k, r) in ledger.returns.iter().enumerate() {
            let z = i64::from(store.path().unwrap()[*r as usize].z);
            prop_assert!(block_sites(BlockSpec::new(level, 3, BlockKind::B)).contains(z), "return {k} at {z}");
        }
    }

    #[test]
    fn local_time_has_mass_t_plus_one(replica in 0u64..10_000, t in 0u64..60) {
        let cfg = WalkConfig::new(1, 2, 9);
        let (mut store, mut rng) = cfg.open(replica, StoreOptions::with_path()).unwrap();
        for _ in 0..20_000 {
            store.advance(&mut rng).unwrap();
        }
        if let Some(lt) = level_local_time(store.path().unwrap(), 2, t as f64).at() {
            prop_assert_eq!(lt.total(), t + 1);
            prop_assert!(lt.max() <= t + 1);
        }
    }
}

/// Every subset of the 3-layer slab of size below `N^d` fails to disconnect;
/// checked exhaustively for the smallest cylinders.
#[test]
fn min_cut_bound_by_brute_force() {
    for (d, n, h) in [(1, 2, 3), (1, 3, 3), (2, 2, 2), (2, 3, 1)] {
        let cyl = Cylinder::new(d, n).unwrap();
        let sites = slab(&cyl, h);
        let cut = u32::pow(n, d as u32) as usize;
        assert!(sites.len() <= 16, "enumeration size");
        let mut smallest = usize::MAX;
        for mask in 0u32..(1 << sites.len()) {
            let size = mask.count_ones() as usize;
            if size >= smallest {
                continue;
            }
            let set: HashSet<CylinderPoint> = (0..sites.len()).filter(|i| mask >> i & 1 == 1).map(|i| sites[i].clone()).collect();
            if is_disconnecting(&cyl, &set) {
                smallest = size;
            }
        }
        assert_eq!(smallest, cut, "d={d} N={n}");
    }
}
