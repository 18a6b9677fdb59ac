//! Uniform cube grids on a section plane and sets of their cubes.
//!
//! A grid is anchored at `origin`, a multiple of `2 eta`, with `eta` a power
//! of two. Cube `(ix, iy)` is `[origin + 2 eta ix, origin + 2 eta (ix + 1)]`
//! on each axis, so every cube bound and center is an exact double and all
//! lattice arithmetic below is exact. Identifiers are row-major:
//! `id = iy * nx + ix`.

use crate::interval::{ActiveRounding, Interval, Rounding};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub type CubeId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridError {
    /// `eta` is not a positive power of two.
    InvalidEta,
    /// Origin not on the `2 eta` lattice, or lattice indices too large to be exact.
    Misaligned,
    OutOfGrid,
    /// Mirror images of cubes are not cubes of the grid.
    AsymmetricGrid,
    InvalidId(CubeId),
    /// Two objects that must share a grid do not.
    GridMismatch,
    EmptySet,
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::InvalidEta => write!(f, "eta must be a positive power of two"),
            GridError::Misaligned => write!(f, "grid origin is not a multiple of 2 eta"),
            GridError::OutOfGrid => write!(f, "region leaves the grid"),
            GridError::AsymmetricGrid => write!(f, "grid is not mirror symmetric"),
            GridError::InvalidId(id) => write!(f, "cube id {id} is not in the grid"),
            GridError::GridMismatch => write!(f, "grids differ"),
            GridError::EmptySet => write!(f, "empty cube set"),
        }
    }
}

/// 2^52: beyond this lattice index, `origin + 2 eta i` may round.
const MAX_INDEX: f64 = 4_503_599_627_370_496.0;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    origin: [f64; 2],
    eta: f64,
    shape: [u32; 2],
}

fn is_power_of_two(x: f64) -> bool {
    x > 0.0 && x.is_finite() && {
        let bits = x.to_bits();
        // normal with zero mantissa
        bits & ((1u64 << 52) - 1) == 0 && (bits >> 52) != 0
    }
}

/// Exact `floor(s + e)` for a TwoSum pair.
fn floor_pair(s: f64, e: f64) -> f64 {
    let f = libm::floor(s);
    if f == s && e < 0.0 {
        f - 1.0
    } else {
        f
    }
}

fn ceil_pair(s: f64, e: f64) -> f64 {
    let c = libm::ceil(s);
    if c == s && e > 0.0 {
        c + 1.0
    } else {
        c
    }
}

fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let s = a - b;
    let bb = s - a;
    let e = (a - (s - bb)) - (b + bb);
    (s, e)
}

impl Grid {
    pub fn new(origin: [f64; 2], eta: f64, shape: [u32; 2]) -> Result<Grid, GridError> {
        if !is_power_of_two(eta) {
            return Err(GridError::InvalidEta);
        }
        for k in 0..2 {
            let t = origin[k] / (2.0 * eta);
            if !t.is_finite() || libm::floor(t) != t || libm::fabs(t) + shape[k] as f64 >= MAX_INDEX {
                return Err(GridError::Misaligned);
            }
        }
        Ok(Grid { origin, eta, shape })
    }

    /// Smallest aligned grid whose region contains `[lo, hi]`.
    pub fn enclosing(lo: [f64; 2], hi: [f64; 2], eta: f64) -> Result<Grid, GridError> {
        if !is_power_of_two(eta) {
            return Err(GridError::InvalidEta);
        }
        let mut origin = [0.0; 2];
        let mut shape = [0u32; 2];
        for k in 0..2 {
            if !(lo[k] <= hi[k]) {
                return Err(GridError::OutOfGrid);
            }
            let w = 2.0 * eta;
            let a = libm::floor(lo[k] / w);
            let b = libm::ceil(hi[k] / w);
            // division by a power of two is exact, floor/ceil of it too
            origin[k] = a * w;
            let n = (b - a).max(1.0);
            if n > u32::MAX as f64 {
                return Err(GridError::OutOfGrid);
            }
            shape[k] = n as u32;
        }
        Grid::new(origin, eta, shape)
    }

    /// Mirror-symmetric grid `[-hx, hx] x [-hy, hy]` covering `[-half, half]`.
    pub fn symmetric(half: [f64; 2], eta: f64) -> Result<Grid, GridError> {
        let w = 2.0 * eta;
        let nx = libm::ceil(half[0] / w);
        let ny = libm::ceil(half[1] / w);
        Grid::new([-nx * w, -ny * w], eta, [(2.0 * nx) as u32, (2.0 * ny) as u32])
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn shape(&self) -> [u32; 2] {
        self.shape
    }

    pub fn len(&self) -> u64 {
        self.shape[0] as u64 * self.shape[1] as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The covered region `M`.
    pub fn region(&self) -> [Interval; 2] {
        let w = 2.0 * self.eta;
        [0, 1].map(|k| {
            Interval::new(self.origin[k], self.origin[k] + w * self.shape[k] as f64).expect("ordered")
        })
    }

    pub fn encode(&self, c: [u32; 2]) -> Option<CubeId> {
        (c[0] < self.shape[0] && c[1] < self.shape[1])
            .then(|| c[1] as u64 * self.shape[0] as u64 + c[0] as u64)
    }

    pub fn decode(&self, id: CubeId) -> Option<[u32; 2]> {
        (id < self.len()).then(|| [(id % self.shape[0] as u64) as u32, (id / self.shape[0] as u64) as u32])
    }

    fn decode_ok(&self, id: CubeId) -> [u32; 2] {
        self.decode(id).expect("cube id in grid")
    }

    /// Lower bound of lattice cell `i` on axis `k` (exact).
    pub fn coord(&self, k: usize, i: i64) -> f64 {
        self.origin[k] + 2.0 * self.eta * i as f64
    }

    pub fn cube_box(&self, id: CubeId) -> [Interval; 2] {
        let c = self.decode_ok(id);
        [0, 1].map(|k| {
            Interval::new(self.coord(k, c[k] as i64), self.coord(k, c[k] as i64 + 1)).expect("ordered")
        })
    }

    pub fn center(&self, id: CubeId) -> [f64; 2] {
        let c = self.decode_ok(id);
        [0, 1].map(|k| self.coord(k, c[k] as i64) + self.eta)
    }

    /// Exact `floor((x - origin) / 2 eta)`.
    pub fn lattice_floor(&self, k: usize, x: f64) -> f64 {
        let (s, e) = two_diff(x, self.origin[k]);
        let w = 2.0 * self.eta;
        floor_pair(s / w, e / w)
    }

    pub fn lattice_ceil(&self, k: usize, x: f64) -> f64 {
        let (s, e) = two_diff(x, self.origin[k]);
        let w = 2.0 * self.eta;
        ceil_pair(s / w, e / w)
    }

    /// Minimal block of cubes whose union contains the box.
    pub fn cover_rect(&self, b: &[Interval; 2]) -> Result<Rect, GridError> {
        let mut lo = [0u32; 2];
        let mut hi = [0u32; 2];
        for k in 0..2 {
            let n = self.shape[k] as f64;
            let mut a = self.lattice_floor(k, b[k].lo());
            let mut z = self.lattice_ceil(k, b[k].hi()) - 1.0;
            if z < a {
                // degenerate box on a lattice line: one neighbour suffices
                if a >= n {
                    a -= 1.0;
                }
                z = a;
            }
            if !(a >= 0.0 && z < n) {
                return Err(GridError::OutOfGrid);
            }
            lo[k] = a as u32;
            hi[k] = z as u32;
        }
        Ok(Rect { lo, hi })
    }

    pub fn cover(&self, b: &[Interval; 2]) -> Result<RepresentableSet, GridError> {
        Ok(RepresentableSet::from_rect(*self, &self.cover_rect(b)?))
    }

    pub fn is_symmetric(&self) -> bool {
        let w = 2.0 * self.eta;
        (0..2).all(|k| self.origin[k] + w * self.shape[k] as f64 == -self.origin[k])
    }

    /// Cube under `(u, v) -> (-u, -v)`.
    pub fn mirror(&self, id: CubeId) -> Result<CubeId, GridError> {
        if !self.is_symmetric() {
            return Err(GridError::AsymmetricGrid);
        }
        let c = self.decode(id).ok_or(GridError::InvalidId(id))?;
        Ok(self.encode([self.shape[0] - 1 - c[0], self.shape[1] - 1 - c[1]]).expect("in grid"))
    }

    /// Sup-norm distance between two cubes in units of `2 eta`.
    pub fn lattice_gap(&self, a: CubeId, b: CubeId) -> u32 {
        let p = self.decode_ok(a);
        let q = self.decode_ok(b);
        let dx = p[0].abs_diff(q[0]);
        let dy = p[1].abs_diff(q[1]);
        dx.max(dy).saturating_sub(1)
    }

    /// `2 eta k`, rounded up.
    pub fn length(&self, k: u64) -> f64 {
        ActiveRounding::mul_up(2.0 * self.eta, k as f64)
    }

    pub fn rect_box(&self, r: &Rect) -> [Interval; 2] {
        [0, 1].map(|k| Interval::new(self.coord(k, r.lo[k] as i64), self.coord(k, r.hi[k] as i64 + 1)).expect("ordered"))
    }
}

/// Inclusive block of lattice cubes `lo ..= hi` on each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub lo: [u32; 2],
    pub hi: [u32; 2],
}

impl Rect {
    pub fn cube(c: [u32; 2]) -> Rect {
        Rect { lo: c, hi: c }
    }

    pub fn contains(&self, c: [u32; 2]) -> bool {
        (0..2).all(|k| self.lo[k] <= c[k] && c[k] <= self.hi[k])
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        self.contains(o.lo) && self.contains(o.hi)
    }

    pub fn hull(&self, o: &Rect) -> Rect {
        Rect {
            lo: [self.lo[0].min(o.lo[0]), self.lo[1].min(o.lo[1])],
            hi: [self.hi[0].max(o.hi[0]), self.hi[1].max(o.hi[1])],
        }
    }

    /// Common cubes, if any.
    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let lo = [self.lo[0].max(o.lo[0]), self.lo[1].max(o.lo[1])];
        let hi = [self.hi[0].min(o.hi[0]), self.hi[1].min(o.hi[1])];
        (lo[0] <= hi[0] && lo[1] <= hi[1]).then_some(Rect { lo, hi })
    }

    /// Number of cubes along each axis.
    pub fn extent(&self) -> [u32; 2] {
        [self.hi[0] - self.lo[0] + 1, self.hi[1] - self.lo[1] + 1]
    }

    pub fn count(&self) -> u64 {
        let e = self.extent();
        e[0] as u64 * e[1] as u64
    }

    /// Grow by `k` cubes on every side; `None` if that leaves `grid`.
    pub fn grow(&self, k: u32, grid: &Grid) -> Option<Rect> {
        let s = grid.shape();
        let mut out = *self;
        for a in 0..2 {
            out.lo[a] = self.lo[a].checked_sub(k)?;
            out.hi[a] = self.hi[a].checked_add(k).filter(|&h| h < s[a])?;
        }
        Some(out)
    }

    /// Ids in row-major (increasing) order.
    pub fn ids<'a>(&'a self, grid: &'a Grid) -> impl Iterator<Item = CubeId> + 'a {
        (self.lo[1]..=self.hi[1])
            .flat_map(move |y| (self.lo[0]..=self.hi[0]).map(move |x| grid.encode([x, y]).expect("rect in grid")))
    }

    /// Sup-norm diameter of the union of the cubes.
    pub fn diam(&self, grid: &Grid) -> f64 {
        let e = self.extent();
        grid.length(e[0].max(e[1]) as u64)
    }
}

/// A finite union of closed grid cubes, kept as sorted unique ids.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentableSet {
    grid: Grid,
    ids: Vec<CubeId>,
}

impl RepresentableSet {
    pub fn empty(grid: Grid) -> RepresentableSet {
        RepresentableSet { grid, ids: Vec::new() }
    }

    pub fn from_ids(grid: Grid, mut ids: Vec<CubeId>) -> Result<RepresentableSet, GridError> {
        ids.sort_unstable();
        ids.dedup();
        if let Some(&last) = ids.last() {
            if last >= grid.len() {
                return Err(GridError::InvalidId(last));
            }
        }
        Ok(RepresentableSet { grid, ids })
    }

    /// Caller guarantees `ids` sorted, unique and in range.
    pub(crate) fn from_sorted(grid: Grid, ids: Vec<CubeId>) -> RepresentableSet {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        RepresentableSet { grid, ids }
    }

    pub fn from_rect(grid: Grid, r: &Rect) -> RepresentableSet {
        RepresentableSet { grid, ids: r.ids(&grid).collect() }
    }

    pub fn whole(grid: Grid) -> RepresentableSet {
        RepresentableSet { grid, ids: (0..grid.len()).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ids(&self) -> &[CubeId] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = CubeId> + '_ {
        self.ids.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: CubeId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    fn check(&self, o: &RepresentableSet) -> Result<(), GridError> {
        if self.grid == o.grid {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }

    pub fn union(&self, o: &RepresentableSet) -> Result<RepresentableSet, GridError> {
        self.check(o)?;
        let mut out = Vec::with_capacity(self.len() + o.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() || j < o.ids.len() {
            let a = self.ids.get(i).copied().unwrap_or(u64::MAX);
            let b = o.ids.get(j).copied().unwrap_or(u64::MAX);
            out.push(a.min(b));
            i += (a <= b) as usize;
            j += (b <= a) as usize;
        }
        Ok(RepresentableSet::from_sorted(self.grid, out))
    }

    pub fn intersection(&self, o: &RepresentableSet) -> Result<RepresentableSet, GridError> {
        self.check(o)?;
        let (small, big) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        Ok(RepresentableSet::from_sorted(self.grid, small.iter().filter(|&c| big.contains(c)).collect()))
    }

    pub fn difference(&self, o: &RepresentableSet) -> Result<RepresentableSet, GridError> {
        self.check(o)?;
        Ok(RepresentableSet::from_sorted(self.grid, self.iter().filter(|&c| !o.contains(c)).collect()))
    }

    pub fn is_subset(&self, o: &RepresentableSet) -> bool {
        self.grid == o.grid && self.iter().all(|c| o.contains(c))
    }

    pub fn bounding_rect(&self) -> Result<Rect, GridError> {
        let mut it = self.iter().map(|id| self.grid.decode_ok(id));
        let first = it.next().ok_or(GridError::EmptySet)?;
        Ok(it.fold(Rect::cube(first), |r, c| r.hull(&Rect::cube(c))))
    }

    /// Smallest block of cubes containing the set.
    pub fn convex_hull(&self) -> Result<RepresentableSet, GridError> {
        Ok(RepresentableSet::from_rect(self.grid, &self.bounding_rect()?))
    }

    pub fn bitmap(&self) -> CubeBitmap {
        let mut b = CubeBitmap::new(self.grid);
        for id in self.iter() {
            b.insert(id);
        }
        b
    }

    /// Minimal representable superset of the closed sup-norm `r`-neighbourhood.
    ///
    /// Each cube grows by `ceil(r / 2 eta)` rings; that is exact because cube
    /// faces sit on the lattice.
    pub fn dilate(&self, r: f64) -> Result<RepresentableSet, GridError> {
        if !(r >= 0.0) {
            return Err(GridError::OutOfGrid);
        }
        let t = libm::ceil(r / (2.0 * self.grid.eta));
        if t > u32::MAX as f64 {
            return Err(GridError::OutOfGrid);
        }
        self.dilate_rings(t as u32)
    }

    pub fn dilate_rings(&self, k: u32) -> Result<RepresentableSet, GridError> {
        if k == 0 || self.is_empty() {
            return Ok(self.clone());
        }
        let b = self.bounding_rect()?;
        b.grow(k, &self.grid).ok_or(GridError::OutOfGrid)?;
        let bm = self.bitmap();
        Ok(bm.dilated(k).to_set())
    }

    /// Image under the grid's mirror involution.
    pub fn mirrored(&self) -> Result<RepresentableSet, GridError> {
        let ids = self.iter().map(|c| self.grid.mirror(c)).collect::<Result<Vec<_>, _>>()?;
        RepresentableSet::from_ids(self.grid, ids)
    }

    /// Rows of maximal horizontal runs, as blocks; union is the set.
    pub fn runs(&self) -> Vec<Rect> {
        let mut out: Vec<Rect> = Vec::new();
        for id in self.iter() {
            let c = self.grid.decode_ok(id);
            if let Some(last) = out.last_mut() {
                if last.lo[1] == c[1] && last.hi[0] + 1 == c[0] {
                    last.hi[0] = c[0];
                    continue;
                }
            }
            out.push(Rect::cube(c));
        }
        out
    }
}

/// Dense membership bitmap over a whole grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeBitmap {
    grid: Grid,
    words: Vec<u64>,
}

impl CubeBitmap {
    pub fn new(grid: Grid) -> CubeBitmap {
        CubeBitmap { grid, words: vec![0; grid.len().div_ceil(64) as usize] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn insert(&mut self, id: CubeId) {
        self.words[(id / 64) as usize] |= 1 << (id % 64);
    }

    #[inline]
    pub fn contains(&self, id: CubeId) -> bool {
        id < self.grid.len() && self.words[(id / 64) as usize] >> (id % 64) & 1 == 1
    }

    #[inline]
    pub fn contains_cell(&self, c: [i64; 2]) -> bool {
        let s = self.grid.shape();
        c[0] >= 0
            && c[1] >= 0
            && (c[0] as u64) < s[0] as u64
            && (c[1] as u64) < s[1] as u64
            && self.contains(c[1] as u64 * s[0] as u64 + c[0] as u64)
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn to_set(&self) -> RepresentableSet {
        let mut ids = Vec::new();
        for (i, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                ids.push(i as u64 * 64 + b);
                w &= w - 1;
            }
        }
        RepresentableSet::from_sorted(self.grid, ids)
    }

    /// Minkowski sum with a `(2k + 1)^2` block, clipped to the grid.
    pub fn dilated(&self, k: u32) -> CubeBitmap {
        let [nx, ny] = self.grid.shape();
        let (nx, ny) = (nx as usize, ny as usize);
        let k = k as usize;
        // horizontal pass, then vertical, each with a sliding count
        let mut rows = vec![false; nx * ny];
        for y in 0..ny {
            let mut count = 0usize;
            let at = |x: usize| self.contains((y * nx + x) as u64) as usize;
            for x in 0..(k.min(nx)) {
                count += at(x);
            }
            for x in 0..nx {
                if x + k < nx {
                    count += at(x + k);
                }
                if x > k {
                    count -= at(x - k - 1);
                }
                rows[y * nx + x] = count > 0;
            }
        }
        let mut out = CubeBitmap::new(self.grid);
        for x in 0..nx {
            let mut count = 0usize;
            let at = |y: usize| rows[y * nx + x] as usize;
            for y in 0..(k.min(ny)) {
                count += at(y);
            }
            for y in 0..ny {
                if y + k < ny {
                    count += at(y + k);
                }
                if y > k {
                    count -= at(y - k - 1);
                }
                if count > 0 {
                    out.insert((y * nx + x) as u64);
                }
            }
        }
        out
    }

    /// Chessboard distance, in cubes, from each cube to the nearest cube
    /// outside the set (cubes beyond the grid count as outside). Zero off the set.
    pub fn distance_to_complement(&self) -> Vec<u32> {
        let [nx, ny] = self.grid.shape();
        let (nx, ny) = (nx as usize, ny as usize);
        let inf = u32::MAX / 2;
        let mut d = vec![0u32; nx * ny];
        for (i, v) in d.iter_mut().enumerate() {
            if self.contains(i as u64) {
                *v = inf;
            }
        }
        // two-pass chamfer with the 8-neighbourhood gives the exact chessboard metric
        let get = |d: &Vec<u32>, x: isize, y: isize| -> u32 {
            if x < 0 || y < 0 || x as usize >= nx || y as usize >= ny {
                0
            } else {
                d[y as usize * nx + x as usize]
            }
        };
        for y in 0..ny as isize {
            for x in 0..nx as isize {
                let i = y as usize * nx + x as usize;
                if d[i] == 0 {
                    continue;
                }
                let m = get(&d, x - 1, y).min(get(&d, x - 1, y - 1)).min(get(&d, x, y - 1)).min(get(&d, x + 1, y - 1));
                d[i] = d[i].min(m + 1);
            }
        }
        for y in (0..ny as isize).rev() {
            for x in (0..nx as isize).rev() {
                let i = y as usize * nx + x as usize;
                if d[i] == 0 {
                    continue;
                }
                let m = get(&d, x + 1, y).min(get(&d, x + 1, y + 1)).min(get(&d, x, y + 1)).min(get(&d, x - 1, y + 1));
                d[i] = d[i].min(m + 1);
            }
        }
        d
    }
}
