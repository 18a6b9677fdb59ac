//! Isolation checks for representable multivalued maps on one grid.

use crate::grid::{CubeBitmap, CubeId, GridError, RepresentableSet};
use crate::mvmap::{MapError, RepresentableMvMap};
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Failure witnesses kept in a certificate.
pub const MAX_WITNESSES: usize = 100;

/// `F(A)`.
pub fn image(f: &RepresentableMvMap, a: &RepresentableSet) -> Result<RepresentableSet, MapError> {
    f.image(a)
}

/// `F*^-1(B)`: domain cubes whose value meets `b`.
pub fn weak_preimage(f: &RepresentableMvMap, b: &RepresentableSet) -> RepresentableSet {
    let bm = b.bitmap();
    let mut out = Vec::new();
    for (c, v) in f.iter() {
        let mut hit = false;
        v.for_each(f.dst(), |x| hit |= bm.contains(x));
        if hit {
            out.push(c);
        }
    }
    RepresentableSet::from_ids(*f.src(), out).expect("domain ids")
}

/// `F^-1(B)`: domain cubes whose whole value lies in `b`.
pub fn strong_preimage(f: &RepresentableMvMap, b: &RepresentableSet) -> RepresentableSet {
    let bm = b.bitmap();
    let mut out = Vec::new();
    for (c, v) in f.iter() {
        let mut inside = true;
        v.for_each(f.dst(), |x| inside &= bm.contains(x));
        if inside {
            out.push(c);
        }
    }
    RepresentableSet::from_ids(*f.src(), out).expect("domain ids")
}

/// Edges `c -> c'` with `c' in F(c) ∩ N`, as adjacency lists indexed by
/// position in `n`.
pub fn transition_graph(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<Vec<Vec<u32>>, MapError> {
    if f.src() != f.dst() || f.src() != n.grid() {
        return Err(MapError::Grid(GridError::GridMismatch));
    }
    let ids = n.ids();
    let index = |x: CubeId| ids.binary_search(&x).ok();
    let mut adj = Vec::with_capacity(ids.len());
    for &c in ids {
        let mut out = Vec::new();
        f.value(c)?.for_each(f.dst(), |x| {
            if let Some(j) = index(x) {
                out.push(j as u32);
            }
        });
        adj.push(out);
    }
    Ok(adj)
}

/// Cube support of all bi-infinite orbits in `n`: repeatedly delete cubes
/// with no in-edge or no out-edge.
pub fn invariant_part(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<RepresentableSet, MapError> {
    let adj = transition_graph(f, n)?;
    Ok(prune(n, &adj, |q| q))
}

/// As [`invariant_part`] with the worklist seeded in the order given by the
/// permutation `order` of positions in `n`; the result does not depend on it.
pub fn invariant_part_with_order(
    f: &RepresentableMvMap,
    n: &RepresentableSet,
    order: &[usize],
) -> Result<RepresentableSet, MapError> {
    let adj = transition_graph(f, n)?;
    let mut rank = vec![usize::MAX; adj.len()];
    for (r, &i) in order.iter().enumerate() {
        if i < rank.len() {
            rank[i] = r;
        }
    }
    Ok(prune(n, &adj, |q: VecDeque<usize>| {
        let mut v: Vec<usize> = q.into();
        v.sort_by_key(|&i| (rank[i], i));
        v.into()
    }))
}

fn prune(n: &RepresentableSet, adj: &[Vec<u32>], arrange: impl FnOnce(VecDeque<usize>) -> VecDeque<usize>) -> RepresentableSet {
    let m = adj.len();
    let mut indeg = vec![0u32; m];
    let mut radj: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            indeg[j as usize] += 1;
            radj[j as usize].push(i as u32);
        }
    }
    let mut outdeg: Vec<u32> = adj.iter().map(|o| o.len() as u32).collect();
    let mut alive = vec![true; m];
    let start: VecDeque<usize> = (0..m).filter(|&i| indeg[i] == 0 || outdeg[i] == 0).collect();
    let mut queue = arrange(start);
    while let Some(i) = queue.pop_front() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &j in &adj[i] {
            let j = j as usize;
            indeg[j] -= 1;
            if alive[j] && indeg[j] == 0 {
                queue.push_back(j);
            }
        }
        for &j in &radj[i] {
            let j = j as usize;
            outdeg[j] -= 1;
            if alive[j] && outdeg[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    let ids = n.ids().iter().zip(&alive).filter(|(_, &a)| a).map(|(&c, _)| c).collect();
    RepresentableSet::from_ids(*n.grid(), ids).expect("subset")
}

/// Outcome of an isolation check. The verdict is positive exactly when
/// `margin > diam`; ties fail.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockCertificate {
    pub n_cubes: usize,
    /// The tested core: `F*^-1(N) ∩ N ∩ F(N)` for blocks, `Inv(N, F)` for neighbourhoods.
    pub core: RepresentableSet,
    pub diam: f64,
    /// Sup-norm distance from the core to the complement of `int N`
    /// (`+inf` for an empty core).
    pub margin: f64,
    pub verdict: bool,
    /// Up to [`MAX_WITNESSES`] core cubes with distance `<= diam`, nearest first.
    pub witnesses: Vec<(CubeId, f64)>,
}

impl BlockCertificate {
    pub fn ratio(&self) -> f64 {
        if self.diam > 0.0 {
            self.margin / self.diam
        } else {
            f64::INFINITY
        }
    }
}

/// The core `F*^-1(N) ∩ N ∩ F(N)`.
pub fn block_core(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<RepresentableSet, MapError> {
    let fwd = image(f, n)?;
    let back = weak_preimage(&f.restrict(n), n);
    Ok(back.intersection(&fwd)?.intersection(n)?)
}

pub fn check_isolating_block(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<BlockCertificate, MapError> {
    let core = block_core(f, n)?;
    margin_check(f, n, core)
}

pub fn check_isolating_neighborhood(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<BlockCertificate, MapError> {
    let core = invariant_part(f, n)?;
    margin_check(f, n, core)
}

fn margin_check(f: &RepresentableMvMap, n: &RepresentableSet, core: RepresentableSet) -> Result<BlockCertificate, MapError> {
    let diam = f.diam_over(n)?;
    let bm: CubeBitmap = n.bitmap();
    let dist = bm.distance_to_complement();
    let grid = n.grid();
    // a cube at chessboard distance k from the complement is 2 eta (k - 1) away
    let gap = |c: CubeId| grid.length(dist[c as usize].saturating_sub(1) as u64);
    let mut margin = f64::INFINITY;
    let mut witnesses: Vec<(CubeId, f64)> = Vec::new();
    for c in core.iter() {
        let g = gap(c);
        margin = margin.min(g);
        if g <= diam {
            witnesses.push((c, g));
        }
    }
    witnesses.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    witnesses.truncate(MAX_WITNESSES);
    Ok(BlockCertificate { n_cubes: n.len(), core, diam, margin, verdict: margin > diam, witnesses })
}
