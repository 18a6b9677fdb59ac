//! Finite representable multivalued maps between cube grids.

use crate::flow::{CubeImage, FlowError};
use crate::grid::{CubeBitmap, CubeId, Grid, GridError, Rect, RepresentableSet};
use crate::interval::{ActiveRounding, Interval, Rounding};
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

/// A validated point map on cube centers: `||f(x) - center|| <= delta + L eta`
/// for every `x` in the cube of radius `eta` around the queried center.
pub trait CubeEvaluator: Sync {
    fn eval(&self, center: [f64; 2], eta: f64) -> Result<CubeImage, FlowError>;
}

impl<F: crate::flow::VectorField> CubeEvaluator for crate::flow::PoincareEvaluator<F> {
    fn eval(&self, center: [f64; 2], eta: f64) -> Result<CubeImage, FlowError> {
        crate::flow::PoincareEvaluator::eval(self, center, eta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapError {
    /// A chain of values leaves the computed domain of `stage`.
    DomainGap { stage: usize, cube: CubeId },
    /// Neighbouring values with empty common part.
    EmptyIntersection { cube: CubeId },
    Grid(GridError),
}

impl From<GridError> for MapError {
    fn from(e: GridError) -> Self {
        MapError::Grid(e)
    }
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::DomainGap { stage, cube } => write!(f, "cube {cube} leaves the domain of stage {stage}"),
            MapError::EmptyIntersection { cube } => write!(f, "neighbour values of cube {cube} do not meet"),
            MapError::Grid(e) => write!(f, "{e}"),
        }
    }
}

/// Why a source cube has no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeFailure {
    Flow(FlowError),
    /// The enclosure leaves the target grid.
    OutOfGrid,
}

impl fmt::Display for CubeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CubeFailure::Flow(e) => write!(f, "{e}"),
            CubeFailure::OutOfGrid => write!(f, "image leaves the target grid"),
        }
    }
}

/// A value: a block of cubes, or an arbitrary set with its bounding block.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Rect(Rect),
    Set { ids: Vec<CubeId>, bbox: Rect },
}

impl Value {
    pub fn bbox(&self) -> Rect {
        match self {
            Value::Rect(r) => *r,
            Value::Set { bbox, .. } => *bbox,
        }
    }

    pub fn is_rect(&self) -> bool {
        matches!(self, Value::Rect(_))
    }

    pub fn count(&self) -> u64 {
        match self {
            Value::Rect(r) => r.count(),
            Value::Set { ids, .. } => ids.len() as u64,
        }
    }

    pub fn for_each(&self, grid: &Grid, mut f: impl FnMut(CubeId)) {
        match self {
            Value::Rect(r) => r.ids(grid).for_each(f),
            Value::Set { ids, .. } => ids.iter().for_each(|&c| f(c)),
        }
    }

    pub fn ids(&self, grid: &Grid) -> Vec<CubeId> {
        match self {
            Value::Rect(r) => r.ids(grid).collect(),
            Value::Set { ids, .. } => ids.clone(),
        }
    }

    pub fn contains(&self, grid: &Grid, id: CubeId) -> bool {
        match self {
            Value::Rect(r) => grid.decode(id).is_some_and(|c| r.contains(c)),
            Value::Set { ids, .. } => ids.binary_search(&id).is_ok(),
        }
    }

    /// From sorted unique ids; collapses to `Rect` when the ids fill their box.
    pub fn from_sorted(grid: &Grid, ids: Vec<CubeId>) -> Result<Value, GridError> {
        let set = RepresentableSet::from_ids(*grid, ids)?;
        let bbox = set.bounding_rect()?;
        if bbox.count() == set.len() as u64 {
            Ok(Value::Rect(bbox))
        } else {
            Ok(Value::Set { ids: set.ids().to_vec(), bbox })
        }
    }
}

/// The value for one evaluated cube: the block covering
/// `B(center, delta + L eta)` (per-component `delta`).
pub fn enclosure_value(img: &CubeImage, src_eta: f64, dst: &Grid) -> Result<Rect, GridError> {
    let le = ActiveRounding::mul_up(img.lipschitz, src_eta);
    let mut b = [Interval::ZERO; 2];
    for k in 0..2 {
        let r = ActiveRounding::add_up(img.delta[k], le);
        let lo = ActiveRounding::add_down(img.center[k], -r);
        let hi = ActiveRounding::add_up(img.center[k], r);
        b[k] = Interval::new(lo, hi).map_err(|_| GridError::OutOfGrid)?;
    }
    dst.cover_rect(&b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepresentableMvMap {
    src: Grid,
    dst: Grid,
    values: BTreeMap<CubeId, Value>,
}

/// Result of [`build_enclosure`]: the map on every cube that evaluated,
/// plus the cubes that did not.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub map: RepresentableMvMap,
    pub failures: Vec<(CubeId, CubeFailure)>,
    pub images: BTreeMap<CubeId, CubeImage>,
}

/// Evaluates every cube of `src` and covers its enclosure in `dst`.
pub fn build_enclosure<E: CubeEvaluator + ?Sized>(eval: &E, src: &RepresentableSet, dst: Grid) -> Enclosure {
    let g = *src.grid();
    let results = src.iter().map(|c| (c, evaluate_cube(eval, &g, c, &dst)));
    assemble_enclosure(g, dst, results)
}

/// One cube of [`build_enclosure`]; parallel drivers call this directly.
pub fn evaluate_cube<E: CubeEvaluator + ?Sized>(
    eval: &E,
    src: &Grid,
    id: CubeId,
    dst: &Grid,
) -> Result<(CubeImage, Rect), CubeFailure> {
    let img = eval.eval(src.center(id), src.eta()).map_err(CubeFailure::Flow)?;
    let r = enclosure_value(&img, src.eta(), dst).map_err(|_| CubeFailure::OutOfGrid)?;
    Ok((img, r))
}

/// Collects per-cube results in id order.
pub fn assemble_enclosure(
    src: Grid,
    dst: Grid,
    results: impl IntoIterator<Item = (CubeId, Result<(CubeImage, Rect), CubeFailure>)>,
) -> Enclosure {
    let mut values = BTreeMap::new();
    let mut images = BTreeMap::new();
    let mut failures = Vec::new();
    for (c, r) in results {
        match r {
            Ok((img, rect)) => {
                values.insert(c, Value::Rect(rect));
                images.insert(c, img);
            }
            Err(e) => failures.push((c, e)),
        }
    }
    failures.sort_by_key(|f| f.0);
    Enclosure { map: RepresentableMvMap { src, dst, values }, failures, images }
}

impl RepresentableMvMap {
    pub fn new(src: Grid, dst: Grid) -> RepresentableMvMap {
        RepresentableMvMap { src, dst, values: BTreeMap::new() }
    }

    pub fn from_values(src: Grid, dst: Grid, values: BTreeMap<CubeId, Value>) -> Result<RepresentableMvMap, GridError> {
        for (&c, v) in &values {
            if c >= src.len() {
                return Err(GridError::InvalidId(c));
            }
            let b = v.bbox();
            if b.hi[0] >= dst.shape()[0] || b.hi[1] >= dst.shape()[1] || v.count() == 0 {
                return Err(GridError::OutOfGrid);
            }
        }
        Ok(RepresentableMvMap { src, dst, values })
    }

    pub fn insert(&mut self, c: CubeId, v: Value) {
        self.values.insert(c, v);
    }

    pub fn src(&self) -> &Grid {
        &self.src
    }

    pub fn dst(&self) -> &Grid {
        &self.dst
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, c: CubeId) -> Option<&Value> {
        self.values.get(&c)
    }

    pub fn value(&self, c: CubeId) -> Result<&Value, MapError> {
        self.values.get(&c).ok_or(MapError::DomainGap { stage: 0, cube: c })
    }

    pub fn iter(&self) -> impl Iterator<Item = (CubeId, &Value)> + '_ {
        self.values.iter().map(|(&c, v)| (c, v))
    }

    pub fn domain(&self) -> RepresentableSet {
        RepresentableSet::from_ids(self.src, self.values.keys().copied().collect()).expect("valid ids")
    }

    pub fn all_rect(&self) -> bool {
        self.values.values().all(Value::is_rect)
    }

    /// Sup-norm diameter of the value of `c`.
    pub fn value_diam(&self, c: CubeId) -> Result<f64, MapError> {
        Ok(self.value(c)?.bbox().diam(&self.dst))
    }

    /// `diam_N F`: largest value diameter over `n`.
    pub fn diam_over(&self, n: &RepresentableSet) -> Result<f64, MapError> {
        let mut d: f64 = 0.0;
        let mut widest = 0u32;
        for c in n.iter() {
            let e = self.value(c)?.bbox().extent();
            widest = widest.max(e[0].max(e[1]));
        }
        if widest > 0 {
            d = self.dst.length(widest as u64);
        }
        Ok(d)
    }

    /// Restriction to the cubes of `n` that have values.
    pub fn restrict(&self, n: &RepresentableSet) -> RepresentableMvMap {
        let values = n.iter().filter_map(|c| self.values.get(&c).map(|v| (c, v.clone()))).collect();
        RepresentableMvMap { src: self.src, dst: self.dst, values }
    }

    /// Per-cube convex hull.
    pub fn convexified(&self) -> RepresentableMvMap {
        let values = self.values.iter().map(|(&c, v)| (c, Value::Rect(v.bbox()))).collect();
        RepresentableMvMap { src: self.src, dst: self.dst, values }
    }

    fn neighbours(&self, c: CubeId) -> impl Iterator<Item = CubeId> + '_ {
        let p = self.src.decode(c).expect("valid id");
        let g = self.src;
        (-1i64..=1).flat_map(move |dy| {
            (-1i64..=1).filter_map(move |dx| {
                let x = p[0] as i64 + dx;
                let y = p[1] as i64 + dy;
                (x >= 0 && y >= 0).then(|| g.encode([x as u32, y as u32])).flatten()
            })
        })
    }

    fn full_neighbourhood(&self, c: CubeId) -> bool {
        self.neighbours(c).all(|d| self.values.contains_key(&d))
    }

    /// `F^u`: union over the cube and its lattice neighbours. Defined on the
    /// cubes whose in-grid neighbours all have values.
    pub fn upper_map(&self) -> RepresentableMvMap {
        let mut values = BTreeMap::new();
        for &c in self.values.keys() {
            if !self.full_neighbourhood(c) {
                continue;
            }
            let mut ids = Vec::new();
            for d in self.neighbours(c) {
                self.values[&d].for_each(&self.dst, |x| ids.push(x));
            }
            ids.sort_unstable();
            ids.dedup();
            values.insert(c, Value::from_sorted(&self.dst, ids).expect("nonempty"));
        }
        RepresentableMvMap { src: self.src, dst: self.dst, values }
    }

    /// `F^l`: intersection over the cube and its lattice neighbours, on the
    /// same cubes as [`Self::upper_map`].
    pub fn lower_map(&self) -> Result<RepresentableMvMap, MapError> {
        let mut values = BTreeMap::new();
        for &c in self.values.keys() {
            if !self.full_neighbourhood(c) {
                continue;
            }
            let mut acc: Option<Vec<CubeId>> = None;
            for d in self.neighbours(c) {
                let v = &self.values[&d];
                acc = Some(match acc {
                    None => v.ids(&self.dst),
                    Some(a) => a.into_iter().filter(|&x| v.contains(&self.dst, x)).collect(),
                });
            }
            let ids = acc.unwrap_or_default();
            if ids.is_empty() {
                return Err(MapError::EmptyIntersection { cube: c });
            }
            values.insert(c, Value::from_sorted(&self.dst, ids)?);
        }
        Ok(RepresentableMvMap { src: self.src, dst: self.dst, values })
    }

    /// `F(A)`.
    pub fn image(&self, a: &RepresentableSet) -> Result<RepresentableSet, MapError> {
        let mut bm = CubeBitmap::new(self.dst);
        for c in a.iter() {
            self.value(c)?.for_each(&self.dst, |x| bm.insert(x));
        }
        Ok(bm.to_set())
    }

    /// Conjugate by the mirror involution on both grids.
    pub fn mirrored(&self) -> Result<RepresentableMvMap, GridError> {
        let mut values = BTreeMap::new();
        for (&c, v) in &self.values {
            let m = self.src.mirror(c)?;
            let nv = match v {
                Value::Rect(r) => {
                    let [nx, ny] = self.dst.shape();
                    if !self.dst.is_symmetric() {
                        return Err(GridError::AsymmetricGrid);
                    }
                    Value::Rect(Rect { lo: [nx - 1 - r.hi[0], ny - 1 - r.hi[1]], hi: [nx - 1 - r.lo[0], ny - 1 - r.lo[1]] })
                }
                Value::Set { ids, .. } => {
                    let mut out = ids.iter().map(|&x| self.dst.mirror(x)).collect::<Result<Vec<_>, _>>()?;
                    out.sort_unstable();
                    Value::from_sorted(&self.dst, out)?
                }
            };
            values.insert(m, nv);
        }
        Ok(RepresentableMvMap { src: self.src, dst: self.dst, values })
    }

    /// Union of two maps on the same grids; `self` wins on shared cubes.
    pub fn merged(&self, o: &RepresentableMvMap) -> Result<RepresentableMvMap, GridError> {
        if self.src != o.src || self.dst != o.dst {
            return Err(GridError::GridMismatch);
        }
        let mut values = o.values.clone();
        values.extend(self.values.iter().map(|(&c, v)| (c, v.clone())));
        Ok(RepresentableMvMap { src: self.src, dst: self.dst, values })
    }
}

/// `G_{m-1} o ... o G_0` as exact cube sets on the domain of `maps[0]`.
pub fn compose(maps: &[RepresentableMvMap]) -> Result<RepresentableMvMap, MapError> {
    let first = maps.first().ok_or(MapError::Grid(GridError::EmptySet))?;
    check_chain(maps)?;
    reachable(maps)?;
    let mut cur: BTreeMap<CubeId, Vec<CubeId>> = first.values.iter().map(|(&c, v)| (c, v.ids(&first.dst))).collect();
    for g in &maps[1..] {
        for ids in cur.values_mut() {
            let mut out = Vec::new();
            for &x in ids.iter() {
                g.values[&x].for_each(&g.dst, |y| out.push(y));
            }
            out.sort_unstable();
            out.dedup();
            *ids = out;
        }
    }
    let dst = maps.last().expect("nonempty").dst;
    let values = cur
        .into_iter()
        .map(|(c, ids)| Value::from_sorted(&dst, ids).map(|v| (c, v)))
        .collect::<Result<_, _>>()?;
    Ok(RepresentableMvMap { src: first.src, dst, values })
}

/// Per-cube convex hull of [`compose`], by one backward pass over bounding
/// blocks: the bounding block of a union is the hull of the parts' blocks.
pub fn compose_hull(maps: &[RepresentableMvMap]) -> Result<RepresentableMvMap, MapError> {
    let last = maps.last().ok_or(MapError::Grid(GridError::EmptySet))?;
    check_chain(maps)?;
    let reach = reachable(maps)?;
    let mut tail: BTreeMap<CubeId, Rect> = reach[maps.len() - 1].iter().map(|c| (c, last.values[&c].bbox())).collect();
    for i in (0..maps.len() - 1).rev() {
        let g = &maps[i];
        let mut next = BTreeMap::new();
        for c in reach[i].iter() {
            let mut acc: Option<Rect> = None;
            g.values[&c].for_each(&g.dst, |x| {
                let r = &tail[&x];
                acc = Some(acc.map_or(*r, |a| a.hull(r)));
            });
            next.insert(c, acc.expect("nonempty value"));
        }
        tail = next;
    }
    let values = tail.into_iter().map(|(c, r)| (c, Value::Rect(r))).collect();
    Ok(RepresentableMvMap { src: maps[0].src, dst: last.dst, values })
}

/// Cubes reached at each stage from the domain of `maps[0]`.
fn reachable(maps: &[RepresentableMvMap]) -> Result<Vec<RepresentableSet>, MapError> {
    let mut out = Vec::with_capacity(maps.len());
    let mut cur = maps[0].domain();
    for (i, g) in maps.iter().enumerate() {
        if let Some(c) = cur.iter().find(|c| !g.values.contains_key(c)) {
            return Err(MapError::DomainGap { stage: i, cube: c });
        }
        let next = g.image(&cur)?;
        out.push(cur);
        cur = next;
    }
    Ok(out)
}

fn check_chain(maps: &[RepresentableMvMap]) -> Result<(), MapError> {
    for w in maps.windows(2) {
        if w[0].dst != w[1].src {
            return Err(MapError::Grid(GridError::GridMismatch));
        }
    }
    Ok(())
}
