//! Dense exact linear algebra over Q.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;
pub type Mat = Vec<Vec<Q>>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn from_i64(rows: &[Vec<i64>]) -> Mat {
    rows.iter().map(|r| r.iter().map(|&v| qi(v)).collect()).collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Q::zero(); c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for i in 0..n {
        m[i][i] = Q::one();
    }
    m
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let r = a.len();
    let k = b.len();
    let c = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(r, c);
    for i in 0..r {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..c {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for j in 0..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Mat) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of the null space (column vectors).
pub fn nullspace(m: &Mat, cols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let piv = rref(&mut a);
    let mut basis = vec![];
    for free in 0..cols {
        if piv.contains(&free) {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (row, &pc) in piv.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn det(m: &Mat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

pub fn pow(m: &Mat, k: usize) -> Mat {
    let mut out = identity(m.len());
    for _ in 0..k {
        out = mul(&out, m);
    }
    out
}

/// Eventual image of `m` (dimension and the restricted map in a column basis).
/// Iterates images until the dimension stabilises.
pub fn eventual_image(m: &Mat) -> (usize, Mat) {
    let n = m.len();
    // basis of current image as columns
    let mut basis: Vec<Vec<Q>> = (0..n)
        .map(|j| {
            let mut e = vec![Q::zero(); n];
            e[j] = Q::one();
            e
        })
        .collect();
    loop {
        let imgs: Vec<Vec<Q>> = basis.iter().map(|v| apply(m, v)).collect();
        let nb = column_basis(&imgs, n);
        if nb.len() == basis.len() {
            basis = nb;
            break;
        }
        basis = nb;
    }
    let k = basis.len();
    // express m * b_j in basis: solve B x = m b_j
    let mut chi = zeros(k, k);
    for j in 0..k {
        let target = apply(m, &basis[j]);
        let x = solve_in_basis(&basis, &target, n);
        for i in 0..k {
            chi[i][j] = x[i].clone();
        }
    }
    (k, chi)
}

pub fn apply(m: &Mat, v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn column_basis(vs: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = vec![];
    for v in vs {
        let mut cand = out.clone();
        cand.push(v.clone());
        let m: Mat = (0..n).map(|i| cand.iter().map(|c| c[i].clone()).collect()).collect();
        if rank(&m) == cand.len() {
            out.push(v.clone());
        }
    }
    out
}

fn solve_in_basis(basis: &[Vec<Q>], target: &[Q], n: usize) -> Vec<Q> {
    let k = basis.len();
    let mut aug: Mat = (0..n)
        .map(|i| {
            let mut row: Vec<Q> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let piv = rref(&mut aug);
    let mut x = vec![Q::zero(); k];
    for (row, &pc) in piv.iter().enumerate() {
        assert!(pc < k, "target outside span");
        x[pc] = aug[row][k].clone();
    }
    x
}

/// Decide whether `a` and `b` are similar over Q by searching the solution
/// space of `P a = b P` for an invertible element. `det(sum c_t P_t)` has
/// degree at most `n` in each coordinate, so it vanishes identically iff it
/// vanishes on the grid `{0..=n}^d`; the search is therefore a decision.
pub fn similar_by_search(a: &Mat, b: &Mat) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    if n == 0 {
        return true;
    }
    // unknowns p_{ij}, index i*n + j; equation (P a - b P)_{rc} = 0
    let mut eqs = zeros(n * n, n * n);
    for r in 0..n {
        for c in 0..n {
            let row = r * n + c;
            for k in 0..n {
                eqs[row][r * n + k] += &a[k][c];
                eqs[row][k * n + c] -= &b[r][k];
            }
        }
    }
    let ns = nullspace(&eqs, n * n);
    let d = ns.len();
    if d == 0 {
        return false;
    }
    let top = n as i64;
    let mut coeffs = vec![0i64; d];
    loop {
        let mut p = zeros(n, n);
        for (t, v) in ns.iter().enumerate() {
            if coeffs[t] == 0 {
                continue;
            }
            let c = qi(coeffs[t]);
            for i in 0..n {
                for j in 0..n {
                    p[i][j] += &c * &v[i * n + j];
                }
            }
        }
        if !det(&p).is_zero() {
            return true;
        }
        let mut t = 0;
        loop {
            if t == d {
                return false;
            }
            coeffs[t] += 1;
            if coeffs[t] > top {
                coeffs[t] = 0;
                t += 1;
            } else {
                break;
            }
        }
    }
}

/// Characteristic polynomial coefficients of det(tI - m), low degree first.
pub fn char_poly(m: &Mat) -> Vec<Q> {
    // Faddeev-LeVerrier
    let n = m.len();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut mk = zeros(n, n);
    for k in 1..=n {
        let mut t = mul(m, &mk);
        for i in 0..n {
            t[i][i] += &coeffs[n - k + 1];
        }
        mk = t;
        let am = mul(m, &mk);
        let tr = (0..n).fold(Q::zero(), |acc, i| acc + &am[i][i]);
        coeffs[n - k] = -tr / qi(k as i64);
    }
    coeffs
}

pub fn max_abs(m: &Mat) -> Q {
    m.iter().flatten().fold(Q::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc })
}
