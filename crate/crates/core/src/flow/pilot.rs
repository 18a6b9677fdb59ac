//! Plain floating-point integration for exploration and plotting.
//! Nothing here is validated.

use super::crossing::SectionSpec;
use super::VectorField;
use alloc::vec::Vec;

pub fn pilot_rk4<F: VectorField>(field: &F, x: &[f64; 3], h: f64) -> [f64; 3] {
    let f = |y: &[f64; 3]| field.eval(y);
    let add = |a: &[f64; 3], s: f64, b: &[f64; 3]| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = f(x);
    let k2 = f(&add(x, 0.5 * h, &k1));
    let k3 = f(&add(x, 0.5 * h, &k2));
    let k4 = f(&add(x, h, &k3));
    let mut out = *x;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

pub fn pilot_trajectory<F: VectorField>(field: &F, x0: [f64; 3], h: f64, n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..n {
        x = pilot_rk4(field, &x, h);
        out.push(x);
    }
    out
}

/// First hit of `section` after time zero; `(point, time)`.
pub fn pilot_first_hit<F: VectorField>(
    field: &F,
    x0: [f64; 3],
    section: &SectionSpec,
    h: f64,
    max_time: f64,
) -> Option<([f64; 3], f64)> {
    use super::crossing::Orientation;
    let a = section.axis.index();
    let side = |y: &[f64; 3]| y[a] - section.level;
    let mut x = x0;
    let mut t = 0.0;
    while t < max_time {
        let y = pilot_rk4(field, &x, h);
        let (s0, s1) = (side(&x), side(&y));
        let down = s0 > 0.0 && s1 <= 0.0;
        let up = s0 < 0.0 && s1 >= 0.0;
        let hit = match section.orientation {
            Orientation::Downward => down,
            Orientation::Upward => up,
            Orientation::Either => down || up,
        };
        if hit {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let z = pilot_rk4(field, &x, mid);
                if side(&z).signum() == s0.signum() && side(&z) != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut z = pilot_rk4(field, &x, hi);
            z[a] = section.level;
            return Some((z, t + hi));
        }
        x = y;
        t += h;
    }
    None
}
