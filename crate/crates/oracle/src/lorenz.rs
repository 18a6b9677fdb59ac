//! Reference Lorenz trajectories in double-double arithmetic.

use crate::dd::DD;

#[derive(Clone, Copy, Debug)]
pub struct Params {
    pub s: f64,
    pub r: f64,
    pub q: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { s: 45.0, r: 54.0, q: 10.0 }
    }
}

pub type P3 = [DD; 3];

pub fn field(p: &Params, x: &P3) -> P3 {
    let s = DD::new(p.s);
    let r = DD::new(p.r);
    let q = DD::new(p.q);
    [
        s * (x[1] - x[0]),
        r * x[0] - x[1] - x[0] * x[2],
        x[0] * x[1] - q * x[2],
    ]
}

fn axpy(x: &P3, a: DD, k: &P3) -> P3 {
    [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]]
}

pub fn rk4(p: &Params, x: &P3, h: DD) -> P3 {
    let half = h * DD::new(0.5);
    let k1 = field(p, x);
    let k2 = field(p, &axpy(x, half, &k1));
    let k3 = field(p, &axpy(x, half, &k2));
    let k4 = field(p, &axpy(x, h, &k3));
    let sixth = h / DD::new(6.0);
    let mut out = *x;
    for i in 0..3 {
        out[i] = x[i] + sixth * (k1[i] + DD::new(2.0) * k2[i] + DD::new(2.0) * k3[i] + k4[i]);
    }
    out
}

pub fn to_dd(x: [f64; 3]) -> P3 {
    [DD::new(x[0]), DD::new(x[1]), DD::new(x[2])]
}

pub fn to_f64(x: &P3) -> [f64; 3] {
    [x[0].to_f64(), x[1].to_f64(), x[2].to_f64()]
}

/// Flow for time `t` with `n` RK4 substeps.
pub fn flow(p: &Params, x: [f64; 3], t: f64, n: usize) -> P3 {
    let h = DD::new(t) / DD::new(n as f64);
    let mut y = to_dd(x);
    for _ in 0..n {
        y = rk4(p, &y, h);
    }
    y
}

/// First crossing of `x[axis] = level` with the given sign of the velocity
/// component (`-1`, `+1`, or `0` for either), strictly after time zero.
/// Returns the crossing point and time, or `None` if `t_max` elapses.
pub fn first_crossing(
    p: &Params,
    x0: [f64; 3],
    axis: usize,
    level: f64,
    sign: i32,
    h: f64,
    t_max: f64,
) -> Option<([f64; 3], f64)> {
    let lv = DD::new(level);
    let hd = DD::new(h);
    let mut x = to_dd(x0);
    let mut t = 0.0;
    let side = |y: &P3| (y[axis] - lv).hi;
    while t < t_max {
        let y = rk4(p, &x, hd);
        let a = side(&x);
        let b = side(&y);
        let hit = (a > 0.0 && b <= 0.0 && sign <= 0) || (a < 0.0 && b >= 0.0 && sign >= 0);
        if hit {
            // bisection on the substep length
            let mut lo = DD::ZERO;
            let mut hi = hd;
            for _ in 0..110 {
                let mid = (lo + hi) * DD::new(0.5);
                let z = rk4(p, &x, mid);
                if side(&z).signum() == a.signum() && side(&z) != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = rk4(p, &x, hi);
            return Some((to_f64(&z), t + hi.to_f64()));
        }
        x = y;
        t += h;
    }
    None
}
