use super::{FlowError, StepEnclosure, ValidatedTrajectorySegment, VectorField, V3};
use crate::interval::Interval;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two in-plane coordinates, in increasing order.
    pub fn others(self) -> [usize; 2] {
        match self {
            Axis::X => [1, 2],
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }
}

/// Which crossings of a section plane count as hits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Orientation {
    /// The normal coordinate decreases through the plane.
    #[default]
    Downward,
    Upward,
    Either,
}

impl Orientation {
    fn accepts(self, sign: i8) -> bool {
        match self {
            Orientation::Downward => sign < 0,
            Orientation::Upward => sign > 0,
            Orientation::Either => true,
        }
    }
}

/// The plane `x[axis] = level`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectionSpec {
    pub axis: Axis,
    pub level: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub orientation: Orientation,
}

impl SectionSpec {
    pub fn new(axis: Axis, level: f64, orientation: Orientation) -> SectionSpec {
        SectionSpec { axis, level, orientation }
    }

    /// Section coordinates to R^3.
    pub fn embed(&self, uv: [f64; 2]) -> [f64; 3] {
        let mut p = [0.0; 3];
        let [i, j] = self.axis.others();
        p[i] = uv[0];
        p[j] = uv[1];
        p[self.axis.index()] = self.level;
        p
    }

    pub fn project(&self, p: &[f64; 3]) -> [f64; 2] {
        let [i, j] = self.axis.others();
        [p[i], p[j]]
    }

    pub fn same_plane(&self, o: &SectionSpec) -> bool {
        self.axis == o.axis && self.level == o.level
    }

    /// Image under `(x, y, z) -> (-x, -y, z)`.
    pub fn mirrored(&self) -> SectionSpec {
        match self.axis {
            Axis::Z => *self,
            _ => SectionSpec {
                axis: self.axis,
                level: -self.level,
                orientation: match self.orientation {
                    Orientation::Downward => Orientation::Upward,
                    Orientation::Upward => Orientation::Downward,
                    Orientation::Either => Orientation::Either,
                },
            },
        }
    }
}

/// Where and when every trajectory of a bundle first hits a section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingBox {
    /// In-plane coordinates.
    pub point: [Interval; 2],
    pub time: Interval,
    /// Flow Lipschitz factor accumulated up to the crossing window.
    pub lipschitz: f64,
}

/// Consumes validated steps one at a time and reports the first hit.
#[derive(Clone, Debug)]
pub struct CrossingDetector {
    section: SectionSpec,
    departing: bool,
    departing_sign: i8,
    run: Vec<StepEnclosure>,
    run_sign: i8,
    /// Side of the plane held by the whole previous step, 0 if it touched.
    clear_side: i8,
}

/// Stop refining the crossing time once this many pieces survive.
const MAX_PIECES: usize = 32;
const MAX_DEPTH: usize = 48;

impl CrossingDetector {
    /// `start_on_plane`: the bundle starts on the section itself, so the
    /// initial departure is not a hit.
    pub fn new(section: SectionSpec, start_on_plane: bool) -> CrossingDetector {
        CrossingDetector { section, departing: start_on_plane, departing_sign: 0, run: Vec::new(), run_sign: 0, clear_side: 0 }
    }

    fn normal(&self, b: &V3) -> Interval {
        b[self.section.axis.index()] - Interval::point(self.section.level)
    }

    pub fn push<F: VectorField>(&mut self, field: &F, step: &StepEnclosure, h: f64) -> Result<Option<CrossingBox>, FlowError> {
        let nb = self.normal(&step.apriori);
        let clear_before = self.clear_side;
        self.clear_side = 0;
        if !nb.contains_zero() {
            self.departing = false;
            let side: i8 = if nb.lo() > 0.0 { 1 } else { -1 };
            if self.run.is_empty() {
                self.clear_side = side;
                return Ok(None);
            }
            // every trajectory is on one side for the whole step
            let post = self.run_sign;
            let run = core::mem::take(&mut self.run);
            if side == post {
                return finalize(field, &self.section, &run, h).map(Some);
            }
            return Ok(None);
        }
        let v = field.eval(&step.apriori)[self.section.axis.index()];
        let sign: i8 = if v.lo() > 0.0 {
            1
        } else if v.hi() < 0.0 {
            -1
        } else {
            return Err(FlowError::TangencySuspected);
        };
        if !self.run.is_empty() {
            if sign != self.run_sign {
                return Err(FlowError::TangencySuspected);
            }
            self.run.push(*step);
            return Ok(None);
        }
        if self.departing {
            if self.departing_sign != 0 && self.departing_sign != sign {
                return Err(FlowError::TangencySuspected);
            }
            self.departing_sign = sign;
            return Ok(None);
        }
        if !self.section.orientation.accepts(sign) {
            return Ok(None);
        }
        let nx = self.normal(&step.start_box());
        // the start box may straddle the plane although the previous step's
        // a-priori box, which also holds these points, did not
        let pre_side = clear_before == -sign || if sign < 0 { nx.lo() > 0.0 } else { nx.hi() < 0.0 };
        let post_side = if sign < 0 { nx.hi() < 0.0 } else { nx.lo() > 0.0 };
        if pre_side {
            self.run.push(*step);
            self.run_sign = sign;
            Ok(None)
        } else if post_side {
            // already past the plane and moving away from it
            Ok(None)
        } else {
            Err(FlowError::CrossingUnresolved)
        }
    }
}

/// Horner evaluation of `x + T (c1 + T (c2 + T c3))`.
#[inline]
fn model(x: Interval, c1: Interval, c2: Interval, c3: Interval, t: Interval) -> Interval {
    x + t * (c1 + t * (c2 + t * c3))
}

fn finalize<F: VectorField>(field: &F, section: &SectionSpec, run: &[StepEnclosure], h: f64) -> Result<CrossingBox, FlowError> {
    let a = section.axis.index();
    let [u, w] = section.axis.others();
    let mut point: Option<[Interval; 2]> = None;
    let mut time: Option<Interval> = None;
    for step in run {
        let x = step.start_box();
        let c1 = field.eval(&x);
        let c2 = field.second_coefficient(&x);
        let c3 = super::taylor_coefficients(field, &step.apriori, 3)[3];
        let hits = |t: Interval| model(x[a], c1[a], c2[a], c3[a], t).contains(section.level);
        let mut pieces: Vec<Interval> = Vec::new();
        let whole = Interval::new(0.0, h).expect("h > 0");
        if hits(whole) {
            pieces.push(whole);
        }
        for _ in 0..MAX_DEPTH {
            if pieces.is_empty() {
                break;
            }
            let mut next = Vec::with_capacity(pieces.len() * 2);
            for p in &pieces {
                let m = p.mid();
                if m <= p.lo() || m >= p.hi() {
                    next.push(*p);
                    continue;
                }
                for half in [Interval::new(p.lo(), m).expect("ordered"), Interval::new(m, p.hi()).expect("ordered")] {
                    if hits(half) {
                        next.push(half);
                    }
                }
            }
            let done = next.len() > MAX_PIECES;
            pieces = next;
            if done {
                break;
            }
        }
        for t in pieces {
            let pu = model(x[u], c1[u], c2[u], c3[u], t);
            let pw = model(x[w], c1[w], c2[w], c3[w], t);
            let tt = Interval::point(step.t) + t;
            point = Some(match point {
                None => [pu, pw],
                Some([a0, a1]) => [a0.hull(&pu), a1.hull(&pw)],
            });
            time = Some(match time {
                None => tt,
                Some(t0) => t0.hull(&tt),
            });
        }
    }
    match (point, time) {
        (Some(point), Some(time)) => Ok(CrossingBox { point, time, lipschitz: run[0].lipschitz }),
        _ => Err(FlowError::CrossingUnresolved),
    }
}

/// First hit of `section` by the bundle recorded in `seg`, or `None` if the
/// segment ends before a complete crossing.
pub fn section_crossing<F: VectorField>(
    field: &F,
    seg: &ValidatedTrajectorySegment,
    section: &SectionSpec,
    start_on_plane: bool,
) -> Result<Option<CrossingBox>, FlowError> {
    let mut det = CrossingDetector::new(*section, start_on_plane);
    for step in &seg.steps {
        if let Some(c) = det.push(field, step, seg.h)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
