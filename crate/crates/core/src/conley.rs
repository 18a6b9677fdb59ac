//! Index pairs, the index map on relative cohomology, Leray reduction and
//! the two-component horseshoe test.

use crate::algebra::{conjugate, invariant_factors, leray_reduction, LerayData, Poly, QMatrix, Q};
use crate::cubical::{add_term, boundary, cell_dim, chain_boundary, rect_cells, Cell, Chain, RelativeHomology};
use crate::grid::{CubeBitmap, CubeId, GridError, RepresentableSet};
use crate::isolation::{check_isolating_block, invariant_part, BlockCertificate};
use crate::mvmap::{MapError, RepresentableMvMap, Value};
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum ConleyError {
    /// The block check behind an index pair was negative.
    NotIsolated(BlockCertificate),
    /// A value in the carrier is not a block of cubes, or the carrier of a cell is empty.
    NonAcyclicValue { cube: CubeId },
    /// Inclusion into the enlarged pair is not an isomorphism in this degree.
    ExcisionFailure { degree: usize },
    /// A value meets both components, or the components are closer than `diam`.
    AmbiguousCrossing { cube: Option<CubeId> },
    IncompleteIndices,
    /// The exit set reaches a cube next to the invariant part.
    ExitMeetsInvariant { cube: CubeId },
    Map(MapError),
}

impl fmt::Display for ConleyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConleyError::NotIsolated(c) => write!(f, "not an isolating block (margin {} <= diam {})", c.margin, c.diam),
            ConleyError::NonAcyclicValue { cube } => write!(f, "non-acyclic value at cube {cube}"),
            ConleyError::ExcisionFailure { degree } => write!(f, "inclusion of index pairs not invertible in degree {degree}"),
            ConleyError::AmbiguousCrossing { cube: Some(c) } => write!(f, "value of cube {c} meets both components"),
            ConleyError::AmbiguousCrossing { cube: None } => write!(f, "components closer than the value diameter"),
            ConleyError::IncompleteIndices => write!(f, "index data missing a degree"),
            ConleyError::ExitMeetsInvariant { cube } => write!(f, "exit set touches the invariant part at cube {cube}"),
            ConleyError::Map(e) => write!(f, "{e}"),
        }
    }
}

impl From<MapError> for ConleyError {
    fn from(e: MapError) -> Self {
        ConleyError::Map(e)
    }
}

impl From<GridError> for ConleyError {
    fn from(e: GridError) -> Self {
        ConleyError::Map(MapError::Grid(e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexPair {
    pub n: RepresentableSet,
    /// Exit set, `L ⊆ N`.
    pub l: RepresentableSet,
}

/// Exit cubes of `n` (value not inside `n`), closed forward within `n` and
/// under touching `F(L) \ N`.
///
/// The first closure gives `F(N \ L) ⊆ N` and `F(L) ∩ N ⊆ L` at cube level.
/// The second keeps the cells of `F(L)` off the closure of `N \ L`, so that
/// `(N, L)` and `(N ∪ F(N), L ∪ F(L))` have the same relative chain complex.
pub fn exit_set(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<RepresentableSet, MapError> {
    let grid = *n.grid();
    let bm = n.bitmap();
    let mut in_l = alloc::vec![false; n.len()];
    let mut stack = Vec::new();
    for (i, c) in n.iter().enumerate() {
        let mut out = false;
        f.value(c)?.for_each(f.dst(), |x| out |= !bm.contains(x));
        if out {
            in_l[i] = true;
            stack.push(c);
        }
    }
    let mut outside = CubeBitmap::new(grid);
    loop {
        while let Some(c) = stack.pop() {
            f.value(c)?.for_each(f.dst(), |x| match n.ids().binary_search(&x) {
                Ok(j) if !in_l[j] => {
                    in_l[j] = true;
                    stack.push(x);
                }
                Ok(_) => {}
                Err(_) => outside.insert(x),
            });
        }
        let near = outside.dilated(1);
        for (i, c) in n.iter().enumerate() {
            if !in_l[i] && near.contains(c) {
                in_l[i] = true;
                stack.push(c);
            }
        }
        if stack.is_empty() {
            break;
        }
    }
    let ids = n.iter().zip(&in_l).filter(|(_, &b)| b).map(|(c, _)| c).collect();
    Ok(RepresentableSet::from_ids(grid, ids)?)
}

/// Index pair on a positive block: `L` from [`exit_set`], checked to stay off
/// a one-cube neighbourhood of the invariant part.
pub fn build_index_pair(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<IndexPair, ConleyError> {
    let cert = check_isolating_block(f, n)?;
    if !cert.verdict {
        return Err(ConleyError::NotIsolated(cert));
    }
    pair_on_block(f, n)
}

fn pair_on_block(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<IndexPair, ConleyError> {
    let l = exit_set(f, n)?;
    let inv = invariant_part(f, n)?;
    let near = l.bitmap().dilated(1);
    if let Some(c) = inv.iter().find(|&c| near.contains(c)) {
        return Err(ConleyError::ExitMeetsInvariant { cube: c });
    }
    Ok(IndexPair { n: n.clone(), l })
}

/// `H*(N, L)` over `Q`. Cohomology is dual to homology over a field, so the
/// ranks agree and the basis is the dual one of [`RelativeHomology`].
#[derive(Clone, Debug)]
pub struct GradedModule {
    homology: RelativeHomology,
}

impl GradedModule {
    pub fn ranks(&self) -> [usize; 3] {
        self.homology.ranks()
    }

    /// Basis cocycles of degree `k`, supported on cells left by the reduction.
    pub fn basis(&self, k: usize) -> Vec<Chain> {
        self.homology.cocycles(k)
    }

    pub fn homology(&self) -> &RelativeHomology {
        &self.homology
    }
}

pub fn relative_cohomology(pair: &IndexPair) -> GradedModule {
    GradedModule { homology: RelativeHomology::new(&pair.n, &pair.l) }
}

/// Cubical chain selector for a map with block values.
///
/// The carrier of a cell is the intersection of the values of the cubes of
/// the domain containing it. Faces get smaller carriers, every carrier is a
/// block (hence acyclic), and it sits inside the value of any cube in the
/// exit set containing the cell, so relative cycles go to relative cycles.
struct ChainSelector<'a> {
    f: &'a RepresentableMvMap,
    domain: &'a RepresentableSet,
    memo: BTreeMap<Cell, Chain>,
}

impl<'a> ChainSelector<'a> {
    fn carrier(&self, c: Cell) -> Result<[[i64; 2]; 2], ConleyError> {
        let grid = self.domain.grid();
        let mut acc: Option<[[i64; 2]; 2]> = None;
        let mut witness = None;
        let (x, y) = c;
        for sy in [y - 1, y, y + 1] {
            for sx in [x - 1, x, x + 1] {
                if sx & 1 == 0 || sy & 1 == 0 {
                    continue;
                }
                let (ix, iy) = ((sx - 1) / 2, (sy - 1) / 2);
                if ix < 0 || iy < 0 {
                    continue;
                }
                let Some(id) = grid.encode([ix as u32, iy as u32]) else { continue };
                if !self.domain.contains(id) {
                    continue;
                }
                witness = Some(id);
                let r = match self.f.value(id)? {
                    Value::Rect(r) => rect_cells(r),
                    Value::Set { .. } => return Err(ConleyError::NonAcyclicValue { cube: id }),
                };
                acc = Some(match acc {
                    None => r,
                    Some(a) => {
                        let lo = [a[0][0].max(r[0][0]), a[1][0].max(r[1][0])];
                        let hi = [a[0][1].min(r[0][1]), a[1][1].min(r[1][1])];
                        if lo[0] > hi[0] || lo[1] > hi[1] {
                            return Err(ConleyError::NonAcyclicValue { cube: id });
                        }
                        [[lo[0], hi[0]], [lo[1], hi[1]]]
                    }
                });
            }
        }
        acc.ok_or(ConleyError::NonAcyclicValue { cube: witness.unwrap_or(CubeId::MAX) })
    }

    fn cell(&mut self, c: Cell) -> Result<Chain, ConleyError> {
        if let Some(v) = self.memo.get(&c) {
            return Ok(v.clone());
        }
        let out = match cell_dim(c) {
            0 => {
                let r = self.carrier(c)?;
                let mut ch = Chain::new();
                ch.insert((r[0][0], r[1][0]), Q::one());
                ch
            }
            1 => {
                let mut ends = boundary(c);
                let (end, _) = ends.next().expect("edge end");
                let (start, _) = ends.next().expect("edge start");
                let p = vertex_of(&self.cell(start)?);
                let q = vertex_of(&self.cell(end)?);
                l_path(p, q)
            }
            _ => {
                let mut z = Chain::new();
                for (e, s) in boundary(c) {
                    for (cell, q) in self.cell(e)? {
                        add_term(&mut z, cell, &(q * Q::from_integer(s.into())));
                    }
                }
                let fill = fill_cycle(&z);
                debug_assert!(chain_boundary(&fill) == z);
                fill
            }
        };
        self.memo.insert(c, out.clone());
        Ok(out)
    }

    fn chain(&mut self, z: &Chain) -> Result<Chain, ConleyError> {
        let mut out = Chain::new();
        for (&c, q) in z {
            for (cell, v) in self.cell(c)? {
                add_term(&mut out, cell, &(v * q));
            }
        }
        Ok(out)
    }
}

fn vertex_of(c: &Chain) -> Cell {
    *c.keys().next().expect("vertex image")
}

/// Horizontal then vertical lattice path from `p` to `q`.
fn l_path(p: Cell, q: Cell) -> Chain {
    let mut ch = Chain::new();
    let sx = if q.0 >= p.0 { 2 } else { -2 };
    let mut x = p.0;
    while x != q.0 {
        ch.insert((x + sx / 2, p.1), Q::from_integer((sx / 2).into()));
        x += sx;
    }
    let sy = if q.1 >= p.1 { 2 } else { -2 };
    let mut y = p.1;
    while y != q.1 {
        ch.insert((q.0, y + sy / 2), Q::from_integer((sy / 2).into()));
        y += sy;
    }
    ch
}

/// A 2-chain with boundary `z` for a 1-cycle `z`: in each column the square
/// above a horizontal edge carries the running sum of edge coefficients below.
fn fill_cycle(z: &Chain) -> Chain {
    let mut cols: BTreeMap<i64, Vec<(i64, Q)>> = BTreeMap::new();
    for (&(x, y), q) in z {
        if x & 1 == 1 && y & 1 == 0 {
            cols.entry(x).or_default().push((y, q.clone()));
        }
    }
    let mut out = Chain::new();
    for (x, mut edges) in cols {
        edges.sort_by_key(|e| e.0);
        let mut run = Q::zero();
        for w in 0..edges.len() {
            run += &edges[w].1;
            let top = edges.get(w + 1).map_or(edges[w].0, |e| e.0);
            let mut y = edges[w].0;
            while y < top {
                add_term(&mut out, (x, y + 1), &run);
                y += 2;
            }
        }
    }
    out
}

/// Matrices of the index map `I*` on `H^k(N, L)`, `k = 0, 1, 2`, in the basis of `coh`.
///
/// `I_* = i_*^-1 F_*` with `F_* : H(N, L) -> H(N ∪ F(N), L ∪ F(L))` from a chain
/// selector and `i` the inclusion; the cohomology matrix is the transpose.
pub fn index_map(f: &RepresentableMvMap, pair: &IndexPair, coh: &GradedModule) -> Result<Vec<QMatrix>, ConleyError> {
    if f.src() != pair.n.grid() || f.dst() != pair.n.grid() {
        return Err(GridError::GridMismatch.into());
    }
    let fr = f.restrict(&pair.n);
    let big = pair.n.union(&fr.image(&pair.n)?)?;
    let small = pair.l.union(&fr.image(&pair.l)?)?;
    let hbar = RelativeHomology::new(&big, &small);
    let h = coh.homology();
    let mut sel = ChainSelector { f: &fr, domain: &pair.n, memo: BTreeMap::new() };
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let r = h.rank(k);
        if r == 0 {
            out.push(QMatrix::zeros(0, 0));
            continue;
        }
        if hbar.rank(k) != r {
            return Err(ConleyError::ExcisionFailure { degree: k });
        }
        let mut a = Vec::with_capacity(r);
        let mut b = Vec::with_capacity(r);
        for i in 0..r {
            let z = h.cycle(k, i);
            a.push(hbar.coordinates(k, &z));
            b.push(hbar.coordinates(k, &sel.chain(&z)?));
        }
        let a = QMatrix::from_columns(r, &a);
        let b = QMatrix::from_columns(r, &b);
        let ainv = a.inverse().ok_or(ConleyError::ExcisionFailure { degree: k })?;
        out.push(ainv.mul(&b).transpose());
    }
    Ok(out)
}

/// Per-degree Leray reduction of index-map matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConleyIndexData {
    pub degrees: Vec<LerayData>,
}

impl ConleyIndexData {
    pub fn ranks(&self) -> Vec<usize> {
        self.degrees.iter().map(LerayData::rank).collect()
    }
}

pub fn reduce_index(maps: &[QMatrix]) -> ConleyIndexData {
    ConleyIndexData { degrees: maps.iter().map(leray_reduction).collect() }
}

/// Everything computed for one isolating block.
#[derive(Clone, Debug)]
pub struct IndexComputation {
    pub block: BlockCertificate,
    pub pair: IndexPair,
    pub module: GradedModule,
    pub maps: Vec<QMatrix>,
    pub index: ConleyIndexData,
}

/// Block check, index pair, cohomology, index map and reduction for `n`.
pub fn conley_index(f: &RepresentableMvMap, n: &RepresentableSet) -> Result<IndexComputation, ConleyError> {
    let block = check_isolating_block(f, n)?;
    if !block.verdict {
        return Err(ConleyError::NotIsolated(block));
    }
    let pair = pair_on_block(f, n)?;
    let module = relative_cohomology(&pair);
    let maps = index_map(f, &pair, &module)?;
    let index = reduce_index(&maps);
    Ok(IndexComputation { block, pair, module, maps, index })
}

/// `N_kl = N_k ∩ F(N_l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub n: [[RepresentableSet; 2]; 2],
}

impl Split {
    pub fn get(&self, k: usize, l: usize) -> &RepresentableSet {
        &self.n[k][l]
    }
}

pub fn split_neighborhood(n0: &RepresentableSet, n1: &RepresentableSet, f: &RepresentableMvMap) -> Result<Split, ConleyError> {
    if !n0.intersection(n1)?.is_empty() {
        return Err(ConleyError::AmbiguousCrossing { cube: None });
    }
    let both = n0.union(n1)?;
    let diam = f.diam_over(&both)?;
    let grid = n0.grid();
    // cubes with lattice gap g are 2 eta (g - 1) apart; gaps up to m are too close
    let m = libm::floor(diam / (2.0 * grid.eta())) as u64 + 1;
    if m <= u32::MAX as u64 {
        let near = n0.bitmap().dilated(m as u32);
        if n1.iter().any(|c| near.contains(c)) {
            return Err(ConleyError::AmbiguousCrossing { cube: None });
        }
    }
    let (b0, b1) = (n0.bitmap(), n1.bitmap());
    for c in both.iter() {
        let (mut h0, mut h1) = (false, false);
        f.value(c)?.for_each(f.dst(), |x| {
            h0 |= b0.contains(x);
            h1 |= b1.contains(x);
        });
        if h0 && h1 {
            return Err(ConleyError::AmbiguousCrossing { cube: Some(c) });
        }
    }
    let parts = [n0, n1];
    let img = [f.restrict(n0).image(n0)?, f.restrict(n1).image(n1)?];
    let cell = |k: usize, l: usize| parts[k].intersection(&img[l]);
    Ok(Split { n: [[cell(0, 0)?, cell(0, 1)?], [cell(1, 0)?, cell(1, 1)?]] })
}

/// Result of the two-component test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorseshoeVerdict {
    /// Whether `S_0` and `S_1` each have index `(Q, id)` in degree 1 and zero elsewhere.
    pub components_ok: [bool; 2],
    /// Invariant factors of `chi^1` of the union.
    pub union_factors: Vec<Poly>,
    /// Invariant factors of `chi^1(S_0) ⊕ chi^1(S_1)`.
    pub sum_factors: Vec<Poly>,
    pub not_conjugate: bool,
    pub conclusion: bool,
}

fn is_circle_identity(d: &ConleyIndexData) -> bool {
    d.ranks() == [0, 1, 0] && d.degrees[1].chi == QMatrix::identity(1)
}

pub fn verify_theorem2(s0: &ConleyIndexData, s1: &ConleyIndexData, union: &ConleyIndexData) -> Result<HorseshoeVerdict, ConleyError> {
    if [s0, s1, union].iter().any(|d| d.degrees.len() != 3) {
        return Err(ConleyError::IncompleteIndices);
    }
    let components_ok = [is_circle_identity(s0), is_circle_identity(s1)];
    let sum = s0.degrees[1].chi.direct_sum(&s1.degrees[1].chi);
    let chi = &union.degrees[1].chi;
    let not_conjugate = !conjugate(chi, &sum);
    Ok(HorseshoeVerdict {
        components_ok,
        union_factors: invariant_factors(chi),
        sum_factors: invariant_factors(&sum),
        not_conjugate,
        conclusion: components_ok[0] && components_ok[1] && not_conjugate,
    })
}

/// Block for `S_lk`: `N` without `N_lk` and one ring of cubes around it.
///
/// The ring keeps the entrance face left by the cut away from `F(N_k)`. It
/// must miss `F(N) \ N_lk`, and `N_lk` must miss `N_ll`, so that no
/// invariant cube of `N_kk ∪ N_kl ∪ N_ll` is removed.
pub fn union_block(n: &RepresentableSet, f: &RepresentableMvMap, split: &Split, l: usize, k: usize) -> Result<RepresentableSet, ConleyError> {
    let cut = split.get(l, k);
    if let Some(c) = cut.iter().find(|&c| split.get(l, l).contains(c)) {
        return Err(ConleyError::AmbiguousCrossing { cube: Some(c) });
    }
    let ring = cut.bitmap().dilated(1).to_set();
    let fnn = f.restrict(n).image(n)?;
    if let Some(c) = ring.iter().find(|&c| n.contains(c) && fnn.contains(c) && !cut.contains(c)) {
        return Err(ConleyError::AmbiguousCrossing { cube: Some(c) });
    }
    Ok(n.difference(&ring)?)
}
