use proptest::prelude::*;
use shiftcert_core::affine::AffineHorseshoe;
use shiftcert_core::algebra::{conjugate, invariant_factors, leray_reduction, qi, QMatrix};
use shiftcert_core::conley::*;
use shiftcert_core::cubical::{chain_boundary, RelativeHomology};
use shiftcert_core::grid::{CubeId, Grid, Rect, RepresentableSet};
use shiftcert_core::isolation::{check_isolating_block, image, invariant_part};
use shiftcert_core::mvmap::{build_enclosure, RepresentableMvMap, Value};
use shiftcert_oracle::homology::relative_betti;
use shiftcert_oracle::linalg::{self, Mat};
use shiftcert_oracle::rng::SplitMix;
use std::collections::BTreeSet;

fn to_mat(m: &QMatrix) -> Mat {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn from_mat(m: &Mat) -> QMatrix {
    QMatrix::from_rows(m.clone())
}

fn random_matrix(rng: &mut SplitMix, n: usize, lo: i64, hi: i64) -> QMatrix {
    let v: Vec<i64> = (0..n * n).map(|_| rng.int(lo, hi)).collect();
    QMatrix::from_i64(n, n, &v)
}

fn lower_left(g: &Grid, s: &RepresentableSet) -> BTreeSet<(i64, i64)> {
    s.iter().map(|c| g.decode(c).unwrap()).map(|p| (p[0] as i64, p[1] as i64)).collect()
}

#[test]
fn relative_ranks_match_brute_force_on_50_pairs() {
    let mut rng = SplitMix::new(51);
    for round in 0..50 {
        let shape = [2 + rng.below(5) as u32, 2 + rng.below(5) as u32];
        let g = Grid::new([0.0, 0.0], 0.5, shape).unwrap();
        let x: Vec<CubeId> = (0..g.len()).filter(|_| rng.chance(0.7)).collect();
        let a: Vec<CubeId> = x.iter().copied().filter(|_| rng.chance(0.3)).collect();
        let xs = RepresentableSet::from_ids(g, x).unwrap();
        let as_ = RepresentableSet::from_ids(g, a).unwrap();
        let h = RelativeHomology::new(&xs, &as_);
        let want = relative_betti(&lower_left(&g, &xs), &lower_left(&g, &as_));
        assert_eq!(h.ranks(), want, "round {round}");
    }
}

#[test]
fn homology_examples() {
    let g = Grid::new([0.0, 0.0], 0.5, [6, 4]).unwrap();
    let empty = RepresentableSet::empty(g);
    let one = RepresentableSet::from_ids(g, vec![g.encode([2, 2]).unwrap()]).unwrap();
    assert_eq!(RelativeHomology::new(&one, &empty).ranks(), [1, 0, 0]);
    // a strip relative to both ends is an interval relative to its endpoints
    let strip = RepresentableSet::from_rect(g, &Rect { lo: [0, 1], hi: [5, 2] });
    let ends = RepresentableSet::from_rect(g, &Rect { lo: [0, 1], hi: [0, 2] })
        .union(&RepresentableSet::from_rect(g, &Rect { lo: [5, 1], hi: [5, 2] }))
        .unwrap();
    assert_eq!(RelativeHomology::new(&strip, &ends).ranks(), [0, 1, 0]);
    let two = RepresentableSet::from_ids(g, vec![g.encode([0, 0]).unwrap(), g.encode([4, 3]).unwrap()]).unwrap();
    assert_eq!(RelativeHomology::new(&two, &empty).ranks(), [2, 0, 0]);
    // an annulus has a loop; a square relative to its whole boundary ring has a 2-class
    let big = RepresentableSet::from_rect(g, &Rect { lo: [0, 0], hi: [4, 3] });
    let hole = RepresentableSet::from_ids(g, vec![g.encode([2, 1]).unwrap()]).unwrap();
    assert_eq!(RelativeHomology::new(&big.difference(&hole).unwrap(), &empty).ranks(), [1, 1, 0]);
    let inner = RepresentableSet::from_rect(g, &Rect { lo: [1, 1], hi: [3, 2] });
    assert_eq!(RelativeHomology::new(&big, &big.difference(&inner).unwrap()).ranks(), [0, 0, 1]);
}

#[test]
fn lifted_cycles_have_unit_coordinates() {
    let mut rng = SplitMix::new(52);
    for _ in 0..40 {
        let g = Grid::new([0.0, 0.0], 0.5, [5, 5]).unwrap();
        let x: Vec<CubeId> = (0..g.len()).filter(|_| rng.chance(0.75)).collect();
        let a: Vec<CubeId> = x.iter().copied().filter(|_| rng.chance(0.25)).collect();
        let xs = RepresentableSet::from_ids(g, x).unwrap();
        let as_ = RepresentableSet::from_ids(g, a).unwrap();
        let h = RelativeHomology::new(&xs, &as_);
        for k in 0..3 {
            for i in 0..h.rank(k) {
                let z = h.cycle(k, i);
                assert!(h.supports(&z, &xs));
                // boundary lies in A
                if k > 0 {
                    assert!(h.supports(&chain_boundary(&z), &as_) || chain_boundary(&z).is_empty());
                }
                let coords = h.coordinates(k, &z);
                for (j, c) in coords.iter().enumerate() {
                    assert_eq!(*c, qi(i64::from(i == j)));
                }
            }
        }
    }
}

#[test]
fn leray_reduction_matches_eventual_image_on_100_matrices() {
    let mut rng = SplitMix::new(53);
    for round in 0..100 {
        let n = 1 + rng.below(6) as usize;
        let mut m = random_matrix(&mut rng, n, -3, 3);
        // force some nilpotent part in about half the cases
        if rng.chance(0.5) {
            let k = rng.below(n as u64) as usize;
            for i in 0..n {
                m.set(i, k, qi(0));
            }
        }
        let got = leray_reduction(&m);
        let (r, chi) = linalg::eventual_image(&to_mat(&m));
        assert_eq!(got.rank(), r, "round {round}");
        assert!(linalg::similar_by_search(&to_mat(&got.chi), &chi), "round {round}");
        assert!(got.chi.rows() == 0 || !got.chi.det().eq(&qi(0)));
    }
}

#[test]
fn leray_examples() {
    let nil = QMatrix::from_i64(2, 2, &[0, 1, 0, 0]);
    assert_eq!(leray_reduction(&nil).rank(), 0);
    let id = QMatrix::identity(3);
    assert_eq!(leray_reduction(&id).chi, id);
    let proj = QMatrix::from_i64(2, 2, &[1, 1, 0, 0]);
    assert_eq!(leray_reduction(&proj).chi, QMatrix::identity(1));
    assert_eq!(leray_reduction(&QMatrix::zeros(0, 0)).rank(), 0);
}

#[test]
fn conjugacy_matches_basis_change_search_on_3x3() {
    let mut rng = SplitMix::new(54);
    let mut agree_true = 0;
    for round in 0..150 {
        let a = random_matrix(&mut rng, 3, -2, 2);
        let b = if rng.chance(0.5) {
            // conjugate by a random unimodular change of basis
            let mut p = QMatrix::identity(3);
            for _ in 0..3 {
                let (i, j) = (rng.below(3) as usize, rng.below(3) as usize);
                if i != j {
                    let mut e = QMatrix::identity(3);
                    e.set(i, j, qi(rng.int(-1, 1)));
                    p = p.mul(&e);
                }
            }
            let b = p.mul(&a).mul(&p.inverse().unwrap());
            if (0..3).all(|i| (0..3).all(|j| (qi(-2)..=qi(2)).contains(b.get(i, j)))) {
                b
            } else {
                random_matrix(&mut rng, 3, -2, 2)
            }
        } else {
            random_matrix(&mut rng, 3, -2, 2)
        };
        let want = linalg::similar_by_search(&to_mat(&a), &to_mat(&b));
        assert_eq!(conjugate(&a, &b), want, "round {round}: {a:?} {b:?}");
        agree_true += usize::from(want);
    }
    assert!(agree_true > 20);
}

#[test]
fn non_conjugacy_examples() {
    let sum = QMatrix::identity(2);
    let data = |m: QMatrix| ConleyIndexData {
        degrees: vec![leray_reduction(&QMatrix::zeros(0, 0)), leray_reduction(&m), leray_reduction(&QMatrix::zeros(0, 0))],
    };
    let circle = data(QMatrix::identity(1));
    for (m, want) in [([0, 1, 1, 0], true), ([1, 0, 0, 1], false), ([1, 1, 0, 1], true)] {
        let v = verify_theorem2(&circle, &circle, &data(QMatrix::from_i64(2, 2, &m))).unwrap();
        assert_eq!(v.conclusion, want, "{m:?}");
        assert_eq!(v.sum_factors, invariant_factors(&sum));
    }
    let short = ConleyIndexData { degrees: vec![leray_reduction(&QMatrix::identity(1))] };
    assert_eq!(verify_theorem2(&short, &circle, &circle), Err(ConleyError::IncompleteIndices));
    let flipped = data(QMatrix::from_i64(1, 1, &[-1]));
    let v = verify_theorem2(&flipped, &circle, &data(QMatrix::from_i64(2, 2, &[1, 1, 0, 1]))).unwrap();
    assert_eq!(v.components_ok, [false, true]);
    assert!(!v.conclusion);
}

fn map_from(g: Grid, values: impl IntoIterator<Item = (CubeId, Vec<CubeId>)>) -> RepresentableMvMap {
    let values = values
        .into_iter()
        .map(|(c, mut ids)| {
            ids.sort_unstable();
            ids.dedup();
            (c, Value::from_sorted(&g, ids).unwrap())
        })
        .collect();
    RepresentableMvMap::from_values(g, g, values).unwrap()
}

#[test]
fn constant_into_the_interior_has_the_index_of_a_point() {
    let g = Grid::new([0.0, 0.0], 0.5, [12, 12]).unwrap();
    let n = RepresentableSet::from_rect(g, &Rect { lo: [1, 1], hi: [10, 10] });
    let centre = g.encode([5, 5]).unwrap();
    let f = map_from(g, (0..g.len()).map(|c| (c, vec![centre])));
    let pair = build_index_pair(&f, &n).unwrap();
    assert!(pair.l.is_empty());
    let ic = conley_index(&f, &n).unwrap();
    assert_eq!(ic.module.ranks(), [1, 0, 0]);
    assert_eq!(ic.maps[0], QMatrix::identity(1));
    assert_eq!(ic.index.ranks(), vec![1, 0, 0]);
}

#[test]
fn translation_off_the_block_exits_everywhere() {
    let g = Grid::new([0.0, 0.0], 0.5, [12, 4]).unwrap();
    let n = RepresentableSet::from_rect(g, &Rect { lo: [1, 1], hi: [4, 2] });
    let f = map_from(g, (0..g.len()).map(|c| {
        let p = g.decode(c).unwrap();
        (c, vec![g.encode([(p[0] + 6).min(11), p[1]]).unwrap()])
    }));
    assert_eq!(exit_set(&f, &n).unwrap(), n);
    let ic = conley_index(&f, &n).unwrap();
    assert_eq!(ic.index.ranks(), vec![0, 0, 0]);
}

#[test]
fn block_failure_is_reported() {
    let g = Grid::new([0.0, 0.0], 0.5, [8, 8]).unwrap();
    let n = RepresentableSet::from_rect(g, &Rect { lo: [0, 0], hi: [7, 7] });
    let edge = g.encode([0, 4]).unwrap();
    let f = map_from(g, (0..g.len()).map(|c| (c, vec![edge])));
    assert!(matches!(build_index_pair(&f, &n), Err(ConleyError::NotIsolated(_))));
}

/// Random maps shifting each cube by at most one step toward a target.
fn random_drift(rng: &mut SplitMix, g: Grid) -> RepresentableMvMap {
    let t = [rng.below(g.shape()[0] as u64) as i64, rng.below(g.shape()[1] as u64) as i64];
    map_from(g, (0..g.len()).map(|c| {
        let p = g.decode(c).unwrap();
        let mut step = |k: usize| (p[k] as i64 + (t[k] - p[k] as i64).signum() * rng.below(2) as i64).clamp(0, g.shape()[k] as i64 - 1) as u32;
        let q = [step(0), step(1)];
        let mut v = vec![g.encode(q).unwrap()];
        if rng.chance(0.3) {
            v.push(g.encode([(q[0] + 1).min(g.shape()[0] - 1), q[1]]).unwrap());
        }
        (c, v)
    }))
}

#[test]
fn exit_sets_are_positively_invariant_and_contain_the_exits() {
    let mut rng = SplitMix::new(55);
    for _ in 0..100 {
        let g = Grid::new([0.0, 0.0], 0.5, [10, 10]).unwrap();
        let f = random_drift(&mut rng, g);
        let n = RepresentableSet::from_rect(g, &Rect { lo: [1, 1], hi: [8, 8] });
        let l = exit_set(&f, &n).unwrap();
        assert!(l.is_subset(&n));
        let nl = n.difference(&l).unwrap();
        assert!(image(&f, &nl).unwrap().is_subset(&n));
        assert!(image(&f, &l).unwrap().intersection(&n).unwrap().is_subset(&l));
        // cubes leaving N are in L
        for c in n.iter() {
            if !f.get(c).unwrap().ids(&g).iter().all(|&x| n.contains(x)) {
                assert!(l.contains(c));
            }
        }
        if let Ok(pair) = build_index_pair(&f, &n) {
            let inv = invariant_part(&f, &n).unwrap();
            assert!(inv.intersection(&pair.l).unwrap().is_empty());
        }
    }
}

fn horseshoe(h: &AffineHorseshoe, eta: f64) -> (RepresentableMvMap, [RepresentableSet; 2], RepresentableSet) {
    let g = h.grid(eta).unwrap();
    let parts = h.components(&g).unwrap();
    let n = parts[0].union(&parts[1]).unwrap();
    let enc = build_enclosure(h, &n, g);
    assert!(enc.failures.is_empty());
    (enc.map, parts, n)
}

#[test]
fn affine_horseshoe_components_are_circles_with_identity() {
    let (f, parts, n) = horseshoe(&AffineHorseshoe::standard(), 1.0 / 64.0);
    let cert = check_isolating_block(&f, &n).unwrap();
    assert!(cert.verdict, "margin {} diam {}", cert.margin, cert.diam);
    let split = split_neighborhood(&parts[0], &parts[1], &f).unwrap();
    for k in 0..2 {
        for l in 0..2 {
            assert!(!split.get(k, l).is_empty());
        }
        let ic = conley_index(&f, split.get(k, k)).unwrap();
        assert_eq!(ic.index.ranks(), vec![0, 1, 0]);
        assert_eq!(ic.index.degrees[1].chi, QMatrix::identity(1));
    }
}

#[test]
fn affine_horseshoe_unions_have_a_jordan_block() {
    let (f, parts, n) = horseshoe(&AffineHorseshoe::standard(), 1.0 / 64.0);
    let split = split_neighborhood(&parts[0], &parts[1], &f).unwrap();
    let s: Vec<ConleyIndexData> = (0..2).map(|k| conley_index(&f, split.get(k, k)).unwrap().index).collect();
    let jordan = linalg::from_i64(&[vec![1, 1], vec![0, 1]]);
    for (l, k) in [(0, 1), (1, 0)] {
        let block = union_block(&n, &f, &split, l, k).unwrap();
        let u = conley_index(&f, &block).unwrap().index;
        assert_eq!(u.ranks(), vec![0, 2, 0]);
        assert!(linalg::similar_by_search(&to_mat(&u.degrees[1].chi), &jordan));
        assert!(!linalg::similar_by_search(&to_mat(&u.degrees[1].chi), &linalg::identity(2)));
        let v = verify_theorem2(&s[0], &s[1], &u).unwrap();
        assert!(v.conclusion);
        assert_eq!(v.union_factors.len(), 1);
        assert_eq!(from_mat(&jordan), QMatrix::from_i64(2, 2, &[1, 1, 0, 1]));
    }
}

#[test]
fn overlapping_components_are_ambiguous() {
    let h = AffineHorseshoe::standard();
    let (f, parts, _) = horseshoe(&h, 1.0 / 16.0);
    assert_eq!(split_neighborhood(&parts[0], &parts[0], &f), Err(ConleyError::AmbiguousCrossing { cube: None }));
    let g = *parts[0].grid();
    // a sliver one cube to the right of N_0 is closer than the value diameter
    let x = parts[0].bounding_rect().unwrap().hi[0] + 2;
    let near = RepresentableSet::from_rect(g, &Rect { lo: [x, 20], hi: [x, 21] });
    let f = build_enclosure(&h, &parts[0].union(&near).unwrap(), g).map;
    assert_eq!(split_neighborhood(&parts[0], &near, &f), Err(ConleyError::AmbiguousCrossing { cube: None }));
}

#[test]
fn tight_horseshoe_improves_under_refinement() {
    let h = AffineHorseshoe::tight();
    let mut slack = Vec::new();
    for eta in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let (f, _, n) = horseshoe(&h, eta);
        let c = check_isolating_block(&f, &n).unwrap();
        slack.push((c.margin - c.diam, c.diam, c.verdict));
    }
    assert!(slack.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1));
    assert_eq!(slack.iter().map(|s| s.2).collect::<Vec<_>>(), vec![false, false, true]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leray_reduction_is_idempotent(v in prop::collection::vec(-3i64..=3, 16)) {
        let m = QMatrix::from_i64(4, 4, &v);
        let once = leray_reduction(&m);
        let twice = leray_reduction(&once.chi);
        prop_assert_eq!(once.chi.rows(), twice.chi.rows());
        prop_assert!(conjugate(&once.chi, &twice.chi));
    }

    #[test]
    fn conjugacy_survives_a_change_of_basis(v in prop::collection::vec(-3i64..=3, 9), p in prop::collection::vec(-2i64..=2, 9)) {
        let a = QMatrix::from_i64(3, 3, &v);
        let p = QMatrix::from_i64(3, 3, &p);
        if let Some(pinv) = p.inverse() {
            let b = p.mul(&a).mul(&pinv);
            prop_assert!(conjugate(&a, &b));
            prop_assert_eq!(invariant_factors(&a), invariant_factors(&b));
            let chars = linalg::char_poly(&to_mat(&a));
            prop_assert_eq!(chars, linalg::char_poly(&to_mat(&b)));
        }
    }
}

#[test]
fn component_blocks_need_the_finer_grid() {
    let h = AffineHorseshoe::standard();
    let (f, parts, _) = horseshoe(&h, 1.0 / 32.0);
    let split = split_neighborhood(&parts[0], &parts[1], &f).unwrap();
    match conley_index(&f, split.get(1, 1)) {
        Err(ConleyError::NotIsolated(c)) => assert!(c.margin <= c.diam && !c.witnesses.is_empty()),
        other => panic!("expected a failed block, got {:?}", other.map(|ic| ic.index)),
    }
    let (f, parts, _) = horseshoe(&h, 1.0 / 64.0);
    let split = split_neighborhood(&parts[0], &parts[1], &f).unwrap();
    let ic = conley_index(&f, split.get(1, 1)).unwrap();
    assert!(ic.block.margin > ic.block.diam);
}
