//! Validated integration of three-dimensional vector fields.
//!
//! A step of length `h` from a box `X` produces an a-priori box `B` holding
//! every trajectory from `X` on `[0, h]`, a log-norm bound `mu` of the field
//! over `B`, and for a point start the RK4 image plus a truncation bound.
//! Bundles of trajectories are tracked as sup-norm balls around a numerical
//! center whose radius is propagated with `e^{mu h}`.

mod crossing;
mod pilot;
mod poincare;
mod series;

pub use crossing::{section_crossing, Axis, CrossingBox, CrossingDetector, Orientation, SectionSpec};
pub use pilot::{pilot_first_hit, pilot_rk4, pilot_trajectory};
pub use poincare::{CubeImage, PoincareEvaluator, StageStats};
pub use series::{FieldScalar, Series, ORDER};

use crate::interval::{ActiveRounding, Interval, Rounding};
use core::fmt;

pub type V3 = [Interval; 3];
pub type M3 = [[Interval; 3]; 3];

/// Default step, `100 / 2^20`.
pub const DEFAULT_STEP: f64 = 100.0 / 1_048_576.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowError {
    /// A-priori enclosure not found after the allowed re-inflations.
    EnclosureFailure,
    /// Transversality could not be established where a crossing may occur.
    TangencySuspected,
    /// The bundle straddles the section where no crossing can be localized.
    CrossingUnresolved,
    /// Some enclosure left the bailout ball.
    OverflowEscape,
    /// Flight-time budget exhausted before reaching the section.
    Escaped,
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FlowError::EnclosureFailure => "a-priori enclosure failed",
            FlowError::TangencySuspected => "tangency suspected at section",
            FlowError::CrossingUnresolved => "crossing could not be resolved",
            FlowError::OverflowEscape => "enclosure exceeded bailout bound",
            FlowError::Escaped => "flight-time budget exhausted",
        };
        f.write_str(s)
    }
}

/// An autonomous vector field on R^3.
pub trait VectorField: Sync {
    fn eval<T: FieldScalar>(&self, x: &[T; 3]) -> [T; 3];

    fn jacobian(&self, b: &V3) -> M3;

    /// `(1/2) DF(x) F(x)`, the second Taylor coefficient of solutions, over `b`.
    fn second_coefficient(&self, b: &V3) -> V3 {
        taylor_coefficients(self, b, 2)[2]
    }
}

/// The Lorenz system `x' = s(y - x), y' = R x - y - x z, z' = x y - q z`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowParams {
    pub s: f64,
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub r: f64,
    pub q: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams { s: 45.0, r: 54.0, q: 10.0 }
    }
}

impl VectorField for FlowParams {
    #[inline]
    fn eval<T: FieldScalar>(&self, x: &[T; 3]) -> [T; 3] {
        [
            (x[1] - x[0]).scale(self.s),
            x[0].scale(self.r) - x[1] - x[0] * x[2],
            x[0] * x[1] - x[2].scale(self.q),
        ]
    }

    fn jacobian(&self, b: &V3) -> M3 {
        let s = Interval::point(self.s);
        let one = Interval::ONE;
        [
            [-s, s, Interval::ZERO],
            [Interval::point(self.r) - b[2], -one, -b[0]],
            [b[1], b[0], -Interval::point(self.q)],
        ]
    }

    fn second_coefficient(&self, b: &V3) -> V3 {
        let f = self.eval(b);
        let s = Interval::point(self.s);
        let half = Interval::point(0.5);
        let r = Interval::point(self.r);
        let q = Interval::point(self.q);
        [
            half * (s * (f[1] - f[0])),
            half * ((r - b[2]) * f[0] - f[1] - b[0] * f[2]),
            half * (b[1] * f[0] + b[0] * f[1] - q * f[2]),
        ]
    }
}

/// `x' = A x + c`; used for testing against closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineField {
    pub a: [[f64; 3]; 3],
    pub c: [f64; 3],
}

impl VectorField for AffineField {
    fn eval<T: FieldScalar>(&self, x: &[T; 3]) -> [T; 3] {
        let mut out = [T::constant(0.0); 3];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = T::constant(self.c[i]);
            for j in 0..3 {
                if self.a[i][j] != 0.0 {
                    acc = acc + x[j].scale(self.a[i][j]);
                }
            }
            *o = acc;
        }
        out
    }

    fn jacobian(&self, _b: &V3) -> M3 {
        let mut m = [[Interval::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = Interval::point(self.a[i][j]);
            }
        }
        m
    }
}

/// Enclosure of the field over a box.
pub fn vector_field<F: VectorField>(field: &F, b: &V3) -> V3 {
    field.eval(b)
}

pub fn jacobian_bounds<F: VectorField>(field: &F, b: &V3) -> M3 {
    field.jacobian(b)
}

/// Upper bound on the sup-norm logarithmic norm of every matrix in `m`:
/// `max_i ( sup m_ii + sum_{j != i} max |m_ij| )`.
pub fn logarithmic_norm(m: &M3) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (i, row) in m.iter().enumerate() {
        let mut acc = row[i].hi();
        for (j, e) in row.iter().enumerate() {
            if j != i {
                acc = ActiveRounding::add_up(acc, e.mag());
            }
        }
        if acc > best {
            best = acc;
        }
    }
    best
}

/// Upper bound on `e0 * e^{L t}`.
pub fn propagate_error(e0: f64, t: f64, l: f64) -> f64 {
    let lt = Interval::point(l) * Interval::point(t);
    (Interval::point(e0) * lt.exp_pos()).hi()
}

pub fn ball3(center: &[f64; 3], r: f64) -> V3 {
    [Interval::ball(center[0], r), Interval::ball(center[1], r), Interval::ball(center[2], r)]
}

pub fn points3(p: &[f64; 3]) -> V3 {
    [Interval::point(p[0]), Interval::point(p[1]), Interval::point(p[2])]
}

fn axpy(x: &V3, a: Interval, k: &V3) -> V3 {
    [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]]
}

pub fn sup_norm3(b: &V3) -> f64 {
    b[0].mag().max(b[1].mag()).max(b[2].mag())
}

/// Maximum number of re-inflations in [`apriori_enclosure`].
pub const MAX_INFLATIONS: usize = 5;

/// A box `B` with `phi_t(X) ⊆ B` for all `t` in `[0, h]`.
///
/// Candidate `Y = X + [0, h] F(X)`; accepted once `X + [0, h] F(Y) ⊆ Y`,
/// otherwise inflated by a factor 2 about its midpoint.
pub fn apriori_enclosure<F: VectorField>(field: &F, x: &V3, h: f64) -> Result<V3, FlowError> {
    let th = Interval::new(0.0, h).expect("h >= 0");
    let mut y = axpy(x, th, &field.eval(x));
    // Y = X + [0,h] F(X) is almost never self-mapping; start slightly larger
    y = inflate_box(&y, 1.1, h);
    for _ in 0..=MAX_INFLATIONS {
        let z = axpy(x, th, &field.eval(&y));
        let mut ok = true;
        for i in 0..3 {
            // only the failing components grow; growing all of them keeps
            // coupled components at a fixed ratio that never closes
            if !y[i].contains_interval(&z[i]) {
                ok = false;
                y[i] = inflate(y[i].hull(&z[i]), 2.0, h);
            }
        }
        if ok {
            return Ok(z);
        }
    }
    Err(FlowError::EnclosureFailure)
}

fn inflate_box(y: &V3, factor: f64, h: f64) -> V3 {
    [inflate(y[0], factor, h), inflate(y[1], factor, h), inflate(y[2], factor, h)]
}

fn inflate(y: Interval, factor: f64, h: f64) -> Interval {
    let extra = ActiveRounding::mul_up(y.rad(), factor - 1.0)
        .max(ActiveRounding::mul_up(h, 1e-9))
        .max(ActiveRounding::mul_up(y.mag(), 1e-14))
        .max(f64::MIN_POSITIVE);
    y.inflate(extra)
}

/// Taylor coefficients `x_0 .. x_order` of solutions passing through `b`.
pub fn taylor_coefficients<F: VectorField + ?Sized>(field: &F, b: &V3, order: usize) -> [V3; ORDER] {
    assert!(order < ORDER);
    let mut x = [Series::ZERO; 3];
    for i in 0..3 {
        x[i].c[0] = b[i];
    }
    for k in 0..order {
        let f = field.eval(&x);
        let inv = Interval::ONE.checked_div(Interval::point((k + 1) as f64)).expect("nonzero");
        for i in 0..3 {
            x[i].c[k + 1] = f[i].c[k] * inv;
        }
    }
    let mut out = [[Interval::ZERO; 3]; ORDER];
    for k in 0..=order {
        for i in 0..3 {
            out[k][i] = x[i].c[k];
        }
    }
    out
}

/// The RK4 map `Psi_h` evaluated in interval arithmetic; no truncation term.
pub fn rk4_interval<F: VectorField>(field: &F, x: &V3, h: f64) -> V3 {
    let hh = Interval::point(h);
    let half = Interval::point(0.5) * hh;
    let k1 = field.eval(x);
    let k2 = field.eval(&axpy(x, half, &k1));
    let k3 = field.eval(&axpy(x, half, &k2));
    let k4 = field.eval(&axpy(x, hh, &k3));
    let sixth = hh.checked_div(Interval::point(6.0)).expect("nonzero");
    let two = Interval::point(2.0);
    let mut out = *x;
    for i in 0..3 {
        out[i] = x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    out
}

/// Fifth Taylor coefficient of `tau -> Psi_tau(y)` for `y` in `x`, `tau` in `[0, h]`.
fn rk4_fifth_coefficient<F: VectorField>(field: &F, x: &V3, h: f64) -> V3 {
    let tau = Series::variable(Interval::new(0.0, h).expect("h >= 0"));
    let half_tau = tau.scale(0.5);
    let y = [
        Series::constant_interval(x[0]),
        Series::constant_interval(x[1]),
        Series::constant_interval(x[2]),
    ];
    let k1 = field.eval(&y);
    let u2 = [y[0] + half_tau * k1[0], y[1] + half_tau * k1[1], y[2] + half_tau * k1[2]];
    let k2 = field.eval(&u2);
    let u3 = [y[0] + half_tau * k2[0], y[1] + half_tau * k2[1], y[2] + half_tau * k2[2]];
    let k3 = field.eval(&u3);
    let u4 = [y[0] + tau * k3[0], y[1] + tau * k3[1], y[2] + tau * k3[2]];
    let k4 = field.eval(&u4);
    // tau / 6 with an enclosure of 1/6, which is not a double
    let sixth = Interval::ONE.checked_div(Interval::point(6.0)).expect("nonzero");
    let mut tau6 = tau;
    for c in tau6.c.iter_mut() {
        *c = *c * sixth;
    }
    let mut out = [Interval::ZERO; 3];
    for i in 0..3 {
        let sum = k1[i] + k2[i].scale(2.0) + k3[i].scale(2.0) + k4[i];
        out[i] = (tau6 * sum).c[5];
    }
    out
}

/// Per-component bound on `|phi_h(y) - Psi_h(y)|` for every `y` in `x`.
///
/// The error `E(tau) = phi_tau(y) - Psi_tau(y)` vanishes to fourth order at
/// zero, so `E(h) = h^5 (a_5(xi) - b_5(xi))` with `a_5` the fifth solution
/// coefficient over the a-priori box and `b_5` the fifth coefficient of the
/// RK4 map in `tau`.
pub fn local_error_bound<F: VectorField>(field: &F, x: &V3, h: f64) -> Result<[f64; 3], FlowError> {
    let b = apriori_enclosure(field, x, h)?;
    Ok(local_error_bound_with(field, x, &b, h))
}

/// As [`local_error_bound`] with a known a-priori box `b` for `x`.
pub fn local_error_bound_with<F: VectorField>(field: &F, x: &V3, b: &V3, h: f64) -> [f64; 3] {
    let a5 = taylor_coefficients(field, b, 5)[5];
    let b5 = rk4_fifth_coefficient(field, x, h);
    let mut h5 = 1.0f64;
    for _ in 0..5 {
        h5 = ActiveRounding::mul_up(h5, h);
    }
    let mut out = [0.0; 3];
    for i in 0..3 {
        let c = ActiveRounding::add_up(a5[i].mag(), b5[i].mag());
        out[i] = ActiveRounding::mul_up(c, h5);
    }
    out
}

/// Validated step of a box: encloses `phi_h(y)` for every `y` in `x`.
pub fn rk4_step<F: VectorField>(field: &F, x: &V3, h: f64, bailout: f64) -> Result<V3, FlowError> {
    let b = apriori_enclosure(field, x, h)?;
    if sup_norm3(&b) > bailout {
        return Err(FlowError::OverflowEscape);
    }
    let e = local_error_bound_with(field, x, &b, h);
    let p = rk4_interval(field, x, h);
    let out = [p[0].inflate(e[0]), p[1].inflate(e[1]), p[2].inflate(e[2])];
    if sup_norm3(&out) > bailout {
        return Err(FlowError::OverflowEscape);
    }
    Ok(out)
}

/// One step of a validated bundle: trajectories starting in the sup-norm ball
/// `B(center, delta + lipschitz * eta)` at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepEnclosure {
    pub t: f64,
    pub center: [f64; 3],
    /// Accumulated numerical error radius (non-decreasing along a segment).
    pub delta: f64,
    /// Accumulated Lipschitz factor of the flow for the initial spread.
    pub lipschitz: f64,
    /// Bundle radius `delta + lipschitz * eta`.
    pub radius: f64,
    /// Enclosure of all bundle trajectories on `[t, t + h]`.
    pub apriori: V3,
}

impl StepEnclosure {
    pub fn start_box(&self) -> V3 {
        ball3(&self.center, self.radius)
    }
}

/// A validated trajectory segment with fixed step `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedTrajectorySegment {
    pub h: f64,
    pub eta: f64,
    pub steps: alloc::vec::Vec<StepEnclosure>,
}

/// Propagates a bundle one step; returns the enclosure record for the step
/// just taken and the state at its end.
pub struct BundleIntegrator<'a, F: VectorField> {
    pub field: &'a F,
    pub h: f64,
    pub eta: f64,
    pub bailout: f64,
    pub t: f64,
    pub center: [f64; 3],
    pub delta: f64,
    pub lipschitz: f64,
}

impl<'a, F: VectorField> BundleIntegrator<'a, F> {
    pub fn new(field: &'a F, center: [f64; 3], eta: f64, h: f64, bailout: f64) -> Self {
        BundleIntegrator { field, h, eta, bailout, t: 0.0, center, delta: 0.0, lipschitz: 1.0 }
    }

    pub fn radius(&self) -> f64 {
        ActiveRounding::add_up(self.delta, ActiveRounding::mul_up(self.lipschitz, self.eta))
    }

    pub fn step(&mut self) -> Result<StepEnclosure, FlowError> {
        let r = self.radius();
        let x = ball3(&self.center, r);
        let b = apriori_enclosure(self.field, &x, self.h)?;
        if sup_norm3(&b) > self.bailout {
            return Err(FlowError::OverflowEscape);
        }
        let rec = StepEnclosure {
            t: self.t,
            center: self.center,
            delta: self.delta,
            lipschitz: self.lipschitz,
            radius: r,
            apriori: b,
        };
        let mu = logarithmic_norm(&self.field.jacobian(&b));
        let p = points3(&self.center);
        let img = rk4_interval(self.field, &p, self.h);
        let e = local_error_bound_with(self.field, &p, &b, self.h);
        let mut next = [0.0; 3];
        let mut round: f64 = 0.0;
        for i in 0..3 {
            next[i] = img[i].mid();
            round = round.max(img[i].rad());
        }
        let trunc = e[0].max(e[1]).max(e[2]);
        let grow = (Interval::point(mu) * Interval::point(self.h)).exp_pos().hi();
        let grow_err = grow.max(1.0);
        self.delta = ActiveRounding::add_up(
            ActiveRounding::add_up(ActiveRounding::mul_up(self.delta, grow_err), trunc),
            round,
        );
        self.lipschitz = ActiveRounding::mul_up(self.lipschitz, grow);
        self.center = next;
        self.t += self.h;
        if !self.delta.is_finite() || !self.lipschitz.is_finite() {
            return Err(FlowError::OverflowEscape);
        }
        Ok(rec)
    }

    /// State at the current time as a record without a-priori box.
    pub fn current_box(&self) -> V3 {
        ball3(&self.center, self.radius())
    }
}

/// Integrates `n` steps of the bundle around `center` with spread `eta`.
pub fn integrate_segment<F: VectorField>(
    field: &F,
    center: [f64; 3],
    eta: f64,
    h: f64,
    n: usize,
    bailout: f64,
) -> Result<ValidatedTrajectorySegment, FlowError> {
    let mut it = BundleIntegrator::new(field, center, eta, h, bailout);
    let mut steps = alloc::vec::Vec::with_capacity(n);
    for _ in 0..n {
        steps.push(it.step()?);
    }
    Ok(ValidatedTrajectorySegment { h, eta, steps })
}
