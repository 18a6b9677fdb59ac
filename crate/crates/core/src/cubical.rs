//! Rational homology of pairs of cube sets.
//!
//! Cells live in doubled coordinates: the square of cube `(i, j)` is
//! `(2i + 1, 2j + 1)`, edges have one odd coordinate, vertices none. The
//! relative complex of `(X, A)` is the closure of `X` minus the closure of
//! `A`. It is shrunk by collapses and coreductions, which never create new
//! incidences, so the leftover boundary is the original one restricted to
//! the surviving cells. Cycles are moved between the full and the reduced
//! complex with the standard projection and lift of each elimination step.

use crate::algebra::{QMatrix, Q};
use crate::grid::{Rect, RepresentableSet};
use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use num_traits::{One, Zero};

/// A cell in global doubled coordinates.
pub type Cell = (i64, i64);

/// Sparse chain with rational coefficients.
pub type Chain = BTreeMap<Cell, Q>;

pub fn cell_dim(c: Cell) -> usize {
    (c.0 & 1) as usize + (c.1 & 1) as usize
}

/// Boundary with the orientation used throughout: edges go from the
/// left/bottom vertex to the right/top one, squares are `right - left - top + bottom`.
pub fn boundary(c: Cell) -> impl Iterator<Item = (Cell, i8)> {
    let (x, y) = c;
    let list: [(Cell, i8); 4] = match (x & 1, y & 1) {
        (1, 0) => [((x + 1, y), 1), ((x - 1, y), -1), ((0, 0), 0), ((0, 0), 0)],
        (0, 1) => [((x, y + 1), 1), ((x, y - 1), -1), ((0, 0), 0), ((0, 0), 0)],
        (1, 1) => [((x + 1, y), 1), ((x - 1, y), -1), ((x, y + 1), -1), ((x, y - 1), 1)],
        _ => [((0, 0), 0); 4],
    };
    list.into_iter().filter(|e| e.1 != 0)
}

/// Cells having `c` as a face, with the incidence `[d rho : c]`.
pub fn cofaces(c: Cell) -> impl Iterator<Item = (Cell, i8)> {
    let (x, y) = c;
    let list: [(Cell, i8); 4] = match (x & 1, y & 1) {
        (0, 0) => [((x + 1, y), -1), ((x - 1, y), 1), ((x, y + 1), -1), ((x, y - 1), 1)],
        (1, 0) => [((x, y + 1), 1), ((x, y - 1), -1), ((0, 0), 0), ((0, 0), 0)],
        (0, 1) => [((x + 1, y), -1), ((x - 1, y), 1), ((0, 0), 0), ((0, 0), 0)],
        _ => [((0, 0), 0); 4],
    };
    list.into_iter().filter(|e| e.1 != 0)
}

pub fn chain_boundary(c: &Chain) -> Chain {
    let mut out = Chain::new();
    for (&cell, q) in c {
        for (f, s) in boundary(cell) {
            add_term(&mut out, f, &(q * Q::from_integer(s.into())));
        }
    }
    out
}

pub fn add_term(c: &mut Chain, cell: Cell, q: &Q) {
    if q.is_zero() {
        return;
    }
    let e = c.entry(cell).or_insert_with(Q::zero);
    *e += q;
    if e.is_zero() {
        c.remove(&cell);
    }
}

/// The square of a cube.
pub fn square_of(set: &RepresentableSet, id: u64) -> Cell {
    let c = set.grid().decode(id).expect("id in grid");
    (2 * c[0] as i64 + 1, 2 * c[1] as i64 + 1)
}

/// Closed doubled-coordinate range covered by a block of cubes.
pub fn rect_cells(r: &Rect) -> [[i64; 2]; 2] {
    [[2 * r.lo[0] as i64, 2 * r.hi[0] as i64 + 2], [2 * r.lo[1] as i64, 2 * r.hi[1] as i64 + 2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Step {
    a: u32,
    b: u32,
    kappa: i8,
}

const ALIVE: u32 = u32::MAX;

/// Dense window of doubled coordinates around a cube set.
#[derive(Clone, Debug)]
struct Window {
    x0: i64,
    y0: i64,
    w: usize,
    h: usize,
}

impl Window {
    fn index(&self, c: Cell) -> Option<usize> {
        let x = c.0 - self.x0;
        let y = c.1 - self.y0;
        (x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h).then(|| y as usize * self.w + x as usize)
    }

    fn cell(&self, i: usize) -> Cell {
        ((i % self.w) as i64 + self.x0, (i / self.w) as i64 + self.y0)
    }
}

/// Homology of a pair `(X, A)` of cube sets over `Q`, with dual bases.
#[derive(Clone, Debug)]
pub struct RelativeHomology {
    win: Window,
    relative: Vec<bool>,
    death: Vec<u32>,
    steps: Vec<Step>,
    /// Surviving cells per dimension.
    critical: [Vec<Cell>; 3],
    /// Homology basis cycles on the critical cells, per degree.
    basis: [Vec<Vec<Q>>; 3],
    /// Dual cocycles on the critical cells: `<dual_i, basis_j> = delta_ij`.
    dual: [Vec<Vec<Q>>; 3],
}

fn closure_flags(win: &Window, set: &RepresentableSet) -> Vec<bool> {
    let mut f = vec![false; win.w * win.h];
    for id in set.iter() {
        let (sx, sy) = square_of(set, id);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(i) = win.index((sx + dx, sy + dy)) {
                    f[i] = true;
                }
            }
        }
    }
    f
}

impl RelativeHomology {
    pub fn new(x: &RepresentableSet, a: &RepresentableSet) -> RelativeHomology {
        let win = match x.bounding_rect() {
            Ok(r) => {
                let c = rect_cells(&r);
                Window { x0: c[0][0], y0: c[1][0], w: (c[0][1] - c[0][0] + 1) as usize, h: (c[1][1] - c[1][0] + 1) as usize }
            }
            Err(_) => Window { x0: 0, y0: 0, w: 0, h: 0 },
        };
        let cx = closure_flags(&win, x);
        let ca = closure_flags(&win, a);
        let relative: Vec<bool> = cx.iter().zip(&ca).map(|(&p, &q)| p && !q).collect();
        let mut h = RelativeHomology {
            win,
            relative,
            death: Vec::new(),
            steps: Vec::new(),
            critical: [Vec::new(), Vec::new(), Vec::new()],
            basis: [Vec::new(), Vec::new(), Vec::new()],
            dual: [Vec::new(), Vec::new(), Vec::new()],
        };
        h.reduce();
        h.homology();
        h
    }

    fn is_rel(&self, c: Cell) -> Option<usize> {
        self.win.index(c).filter(|&i| self.relative[i])
    }

    fn reduce(&mut self) {
        let n = self.relative.len();
        let mut alive = self.relative.clone();
        let mut nf = vec![0u8; n];
        let mut nc = vec![0u8; n];
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let c = self.win.cell(i);
            nf[i] = boundary(c).filter(|&(f, _)| self.is_rel(f).is_some()).count() as u8;
            nc[i] = cofaces(c).filter(|&(f, _)| self.is_rel(f).is_some()).count() as u8;
        }
        let mut death = vec![ALIVE; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| alive[i] && (nf[i] == 1 || nc[i] == 1)).collect();
        while let Some(i) = queue.pop_front() {
            if !alive[i] {
                continue;
            }
            let c = self.win.cell(i);
            let alive_at = |cell: Cell, alive: &Vec<bool>| self.win.index(cell).filter(|&j| alive[j]);
            let pair = if nc[i] == 1 {
                cofaces(c).find_map(|(g, s)| alive_at(g, &alive).map(|j| (j, i, s)))
            } else if nf[i] == 1 {
                boundary(c).find_map(|(f, s)| alive_at(f, &alive).map(|j| (i, j, s)))
            } else {
                None
            };
            let Some((a, b, kappa)) = pair else { continue };
            let step = self.steps.len() as u32;
            self.steps.push(Step { a: a as u32, b: b as u32, kappa });
            for r in [a, b] {
                alive[r] = false;
                death[r] = step;
            }
            for r in [a, b] {
                let rc = self.win.cell(r);
                for (f, _) in boundary(rc) {
                    if let Some(j) = alive_at(f, &alive) {
                        nc[j] -= 1;
                        if nc[j] == 1 || nf[j] == 1 {
                            queue.push_back(j);
                        }
                    }
                }
                for (g, _) in cofaces(rc) {
                    if let Some(j) = alive_at(g, &alive) {
                        nf[j] -= 1;
                        if nf[j] == 1 || nc[j] == 1 {
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        for i in 0..n {
            if alive[i] {
                let c = self.win.cell(i);
                self.critical[cell_dim(c)].push(c);
            }
        }
        self.death = death;
    }

    /// Boundary matrix from critical `k`-cells to critical `(k-1)`-cells.
    fn critical_boundary(&self, k: usize) -> QMatrix {
        if k == 0 || k > 2 {
            let cols = if k <= 2 { self.critical[k].len() } else { 0 };
            return QMatrix::zeros(0, cols);
        }
        let rows = &self.critical[k - 1];
        let mut m = QMatrix::zeros(rows.len(), self.critical[k].len());
        for (j, &c) in self.critical[k].iter().enumerate() {
            for (f, s) in boundary(c) {
                if let Ok(i) = rows.binary_search_by(|p| (p.1, p.0).cmp(&(f.1, f.0))) {
                    m.set(i, j, Q::from_integer(s.into()));
                }
            }
        }
        m
    }

    fn homology(&mut self) {
        for k in 0..3 {
            let n = self.critical[k].len();
            if n == 0 {
                continue;
            }
            let dk = self.critical_boundary(k);
            let z = dk.nullspace();
            let dnext = if k < 2 { self.critical_boundary(k + 1) } else { QMatrix::zeros(n, 0) };
            let b = dnext.column_basis();
            // extend a basis of the boundaries to one of the cycles
            let mut cols: Vec<Vec<Q>> = (0..b.cols()).map(|j| b.column(j)).collect();
            let nb = cols.len();
            cols.extend(z.iter().cloned());
            let all = QMatrix::from_columns(n, &cols);
            let (_, piv) = all.rref();
            let basis: Vec<Vec<Q>> = piv.iter().filter(|&&p| p >= nb).map(|&p| cols[p].clone()).collect();
            if basis.is_empty() {
                continue;
            }
            // dual cocycles: zero on boundaries, delta on the basis
            let r = basis.len();
            let mut a = QMatrix::zeros(dnext.cols() + r, n);
            let mut rhs = QMatrix::zeros(dnext.cols() + r, r);
            for j in 0..dnext.cols() {
                for i in 0..n {
                    a.set(j, i, dnext.get(i, j).clone());
                }
            }
            for (t, h) in basis.iter().enumerate() {
                for i in 0..n {
                    a.set(dnext.cols() + t, i, h[i].clone());
                }
                rhs.set(dnext.cols() + t, t, Q::one());
            }
            let x = a.solve(&rhs).expect("homology and cohomology pair perfectly over a field");
            self.dual[k] = (0..r).map(|t| x.column(t)).collect();
            self.basis[k] = basis;
        }
    }

    pub fn ranks(&self) -> [usize; 3] {
        [self.basis[0].len(), self.basis[1].len(), self.basis[2].len()]
    }

    pub fn rank(&self, k: usize) -> usize {
        self.basis.get(k).map_or(0, Vec::len)
    }

    /// Number of cells left after reduction, per dimension.
    pub fn critical_counts(&self) -> [usize; 3] {
        [self.critical[0].len(), self.critical[1].len(), self.critical[2].len()]
    }

    pub fn relative_cells(&self) -> usize {
        self.relative.iter().filter(|&&b| b).count()
    }

    /// Dual cocycles of degree `k` on the critical cells, as sparse cochains.
    pub fn cocycles(&self, k: usize) -> Vec<Chain> {
        self.dual[k]
            .iter()
            .map(|v| {
                let mut c = Chain::new();
                for (cell, q) in self.critical[k].iter().zip(v) {
                    add_term(&mut c, *cell, q);
                }
                c
            })
            .collect()
    }

    /// A relative cycle in the full complex representing basis class `i`.
    pub fn cycle(&self, k: usize, i: usize) -> Chain {
        let mut x = Chain::new();
        for (cell, q) in self.critical[k].iter().zip(&self.basis[k][i]) {
            add_term(&mut x, *cell, q);
        }
        // undo the eliminations, last first
        for step in self.steps.iter().rev() {
            let a = self.win.cell(step.a as usize);
            if cell_dim(a) != k {
                continue;
            }
            let b = self.win.cell(step.b as usize);
            let mut s = Q::zero();
            for (rho, inc) in cofaces(b) {
                if rho == a {
                    continue;
                }
                if let Some(q) = x.get(&rho) {
                    s += q * Q::from_integer(inc.into());
                }
            }
            if !s.is_zero() {
                let v = -s / Q::from_integer(step.kappa.into());
                add_term(&mut x, a, &v);
            }
        }
        x
    }

    /// Drops cells in the closure of `A` or outside the closure of `X`.
    fn relative_part(&self, c: &Chain) -> Chain {
        c.iter().filter(|(&cell, _)| self.is_rel(cell).is_some()).map(|(&k, v)| (k, v.clone())).collect()
    }

    /// Coordinates of the class of a relative `k`-cycle in the basis.
    pub fn coordinates(&self, k: usize, c: &Chain) -> Vec<Q> {
        let mut y = self.relative_part(c);
        for (t, step) in self.steps.iter().enumerate() {
            let a = self.win.cell(step.a as usize);
            let b = self.win.cell(step.b as usize);
            if cell_dim(a) == k {
                y.remove(&a);
            } else if cell_dim(b) == k {
                let Some(yb) = y.get(&b).cloned() else { continue };
                let f = yb / Q::from_integer(step.kappa.into());
                for (face, s) in boundary(a) {
                    let alive = self.win.index(face).is_some_and(|i| self.relative[i] && self.death[i] >= t as u32);
                    if alive {
                        add_term(&mut y, face, &(-(&f) * Q::from_integer(s.into())));
                    }
                }
            }
        }
        self.dual[k]
            .iter()
            .map(|z| self.critical[k].iter().zip(z).fold(Q::zero(), |acc, (cell, q)| acc + y.get(cell).map_or(Q::zero(), |v| v * q)))
            .collect()
    }

    /// Whether every cell of `c` lies in the closure of `X`.
    pub fn supports(&self, c: &Chain, x: &RepresentableSet) -> bool {
        let flags = closure_flags(&self.win, x);
        c.keys().all(|&cell| self.win.index(cell).is_some_and(|i| flags[i]))
    }
}
