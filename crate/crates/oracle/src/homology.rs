//! Rational relative homology of planar cubical pairs by dense rank computation.
//!
//! Cells are elementary cubes in doubled coordinates: an even coordinate `2i`
//! is the degenerate interval `[i, i]`, an odd one `2i + 1` is `[i, i + 1]`.
//! The unit square with lower-left vertex `(i, j)` is `(2i + 1, 2j + 1)`.

use crate::linalg::{qi, rank, zeros, Mat};
use std::collections::{BTreeMap, BTreeSet};

pub type Cell = (i64, i64);

fn dim(c: Cell) -> usize {
    (c.0.rem_euclid(2) + c.1.rem_euclid(2)) as usize
}

/// Closure of a set of unit squares given by lower-left vertex.
pub fn closure(squares: &BTreeSet<(i64, i64)>) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for &(i, j) in squares {
        let (x, y) = (2 * i + 1, 2 * j + 1);
        for dx in -1..=1 {
            for dy in -1..=1 {
                out.insert((x + dx, y + dy));
            }
        }
    }
    out
}

/// Boundary with the product orientation.
pub fn boundary(c: Cell) -> Vec<(Cell, i64)> {
    let (x, y) = c;
    let ox = x.rem_euclid(2) == 1;
    let oy = y.rem_euclid(2) == 1;
    let mut out = vec![];
    if ox {
        out.push(((x + 1, y), 1));
        out.push(((x - 1, y), -1));
    }
    if oy {
        let s = if ox { -1 } else { 1 };
        out.push(((x, y + 1), s));
        out.push(((x, y - 1), -s));
    }
    out
}

fn cells_by_dim(p1: &BTreeSet<(i64, i64)>, p2: &BTreeSet<(i64, i64)>) -> [Vec<Cell>; 3] {
    let a = closure(p1);
    let b = closure(p2);
    let mut by_dim: [Vec<Cell>; 3] = [vec![], vec![], vec![]];
    for c in a.difference(&b).copied() {
        by_dim[dim(c)].push(c);
    }
    by_dim
}

fn betti_from_ranks(by_dim: &[Vec<Cell>; 3], ranks: [usize; 4]) -> [usize; 3] {
    let mut out = [0; 3];
    for k in 0..3 {
        out[k] = by_dim[k].len() - ranks[k] - ranks[k + 1];
    }
    out
}

/// Betti numbers (degrees 0..=2) of the pair `(cl P1, cl P2)`.
pub fn relative_betti(p1: &BTreeSet<(i64, i64)>, p2: &BTreeSet<(i64, i64)>) -> [usize; 3] {
    let by_dim = cells_by_dim(p1, p2);
    let index: [BTreeMap<Cell, usize>; 3] = [0, 1, 2].map(|d| {
        by_dim[d].iter().enumerate().map(|(i, &c)| (c, i)).collect::<BTreeMap<_, _>>()
    });
    // ranks of boundary maps d_k: C_k -> C_{k-1}
    let mut ranks = [0usize; 4];
    for k in 1..=2 {
        let mut m: Mat = zeros(by_dim[k - 1].len(), by_dim[k].len());
        for (j, &c) in by_dim[k].iter().enumerate() {
            for (f, s) in boundary(c) {
                if let Some(&i) = index[k - 1].get(&f) {
                    m[i][j] += qi(s);
                }
            }
        }
        ranks[k] = if m.is_empty() || by_dim[k].is_empty() { 0 } else { rank(&m) };
    }
    betti_from_ranks(&by_dim, ranks)
}

const PRIME: u64 = (1 << 31) - 1;

fn inv_mod(a: u64) -> u64 {
    let (mut r, mut b, mut e) = (1u64, a % PRIME, PRIME - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    r
}

/// `a - s * b` on sorted sparse columns.
fn axpy(a: &[(usize, u64)], s: u64, b: &[(usize, u64)]) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, (PRIME - s * b[j].1 % PRIME) % PRIME));
            j += 1;
        } else {
            let v = (a[i].1 + PRIME - s * b[j].1 % PRIME) % PRIME;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of a sparse matrix mod `2^31 - 1` by column reduction on the lowest row.
fn sparse_rank(cols: Vec<Vec<(usize, u64)>>) -> usize {
    let mut pivots: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for mut c in cols {
        while let Some(&(low, v)) = c.last() {
            match pivots.get(&low) {
                Some(p) => {
                    let s = v * inv_mod(p[p.len() - 1].1) % PRIME;
                    c = axpy(&c, s, p);
                }
                None => break,
            }
        }
        if let Some(&(low, _)) = c.last() {
            pivots.insert(low, c);
        }
    }
    pivots.len()
}

/// Same as [`relative_betti`], with ranks taken mod a large prime on sparse
/// columns. Planar cubical pairs have torsion-free homology, so the result
/// agrees; this variant handles pairs of tens of thousands of squares.
pub fn relative_betti_mod_p(p1: &BTreeSet<(i64, i64)>, p2: &BTreeSet<(i64, i64)>) -> [usize; 3] {
    let by_dim = cells_by_dim(p1, p2);
    let index: [BTreeMap<Cell, usize>; 3] = [0, 1, 2].map(|d| {
        by_dim[d].iter().enumerate().map(|(i, &c)| (c, i)).collect::<BTreeMap<_, _>>()
    });
    let mut ranks = [0usize; 4];
    for k in 1..=2 {
        let cols = by_dim[k]
            .iter()
            .map(|&c| {
                let mut col: Vec<(usize, u64)> = boundary(c)
                    .into_iter()
                    .filter_map(|(f, s)| index[k - 1].get(&f).map(|&i| (i, s.rem_euclid(PRIME as i64) as u64)))
                    .collect();
                col.sort_unstable();
                col
            })
            .collect();
        ranks[k] = sparse_rank(cols);
    }
    betti_from_ranks(&by_dim, ranks)
}
