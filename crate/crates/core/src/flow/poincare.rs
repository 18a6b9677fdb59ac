use super::crossing::{CrossingDetector, SectionSpec};
use super::{BundleIntegrator, FlowError, VectorField};
use crate::interval::{ActiveRounding, Interval, Rounding};

/// Image of one grid cube under a section-to-section map.
///
/// The value attached to the cube is the box `center ± (delta_i + lipschitz * eta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeImage {
    pub center: [f64; 2],
    pub delta: [f64; 2],
    pub lipschitz: f64,
    /// Upper bound on the flight time; zero for maps that are not flows.
    pub flight_time: f64,
    /// Flow Lipschitz factor at the crossing, for reporting.
    pub flow_lipschitz: f64,
}

impl CubeImage {
    pub fn radius(&self, eta: f64) -> [f64; 2] {
        let spread = ActiveRounding::mul_up(self.lipschitz, eta);
        [ActiveRounding::add_up(self.delta[0], spread), ActiveRounding::add_up(self.delta[1], spread)]
    }

    pub fn enclosure(&self, eta: f64) -> [Interval; 2] {
        let r = self.radius(eta);
        [Interval::ball(self.center[0], r[0]), Interval::ball(self.center[1], r[1])]
    }
}

/// Summary over the cubes of one stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageStats {
    pub cubes: u64,
    pub failures: u64,
    pub max_flight_time: f64,
    pub max_flow_lipschitz: f64,
    /// Largest `radius / eta` over the stage.
    pub max_growth: f64,
}

impl StageStats {
    pub fn record(&mut self, img: &CubeImage, eta: f64) {
        self.cubes += 1;
        self.max_flight_time = self.max_flight_time.max(img.flight_time);
        self.max_flow_lipschitz = self.max_flow_lipschitz.max(img.flow_lipschitz);
        let r = img.radius(eta);
        self.max_growth = self.max_growth.max(r[0].max(r[1]) / eta);
    }

    pub fn merge(&mut self, o: &StageStats) {
        self.cubes += o.cubes;
        self.failures += o.failures;
        self.max_flight_time = self.max_flight_time.max(o.max_flight_time);
        self.max_flow_lipschitz = self.max_flow_lipschitz.max(o.max_flow_lipschitz);
        self.max_growth = self.max_growth.max(o.max_growth);
    }
}

/// Validated first-hit map between two sections.
#[derive(Clone, Copy, Debug)]
pub struct PoincareEvaluator<F: VectorField> {
    pub field: F,
    pub from: SectionSpec,
    pub to: SectionSpec,
    pub h: f64,
    /// Flight-time budget.
    pub max_time: f64,
    pub bailout: f64,
}

impl<F: VectorField> PoincareEvaluator<F> {
    pub fn new(field: F, from: SectionSpec, to: SectionSpec) -> Self {
        PoincareEvaluator { field, from, to, h: super::DEFAULT_STEP, max_time: 10.0, bailout: 1.0e3 }
    }

    /// Encloses the first hits of `to` by all trajectories starting in the
    /// cube of radius `eta` about `center` on `from`.
    pub fn eval(&self, center: [f64; 2], eta: f64) -> Result<CubeImage, FlowError> {
        let p0 = self.from.embed(center);
        let mut it = BundleIntegrator::new(&self.field, p0, eta, self.h, self.bailout);
        let mut det = CrossingDetector::new(self.to, self.from.same_plane(&self.to));
        loop {
            if it.t > self.max_time {
                return Err(FlowError::Escaped);
            }
            let rec = it.step()?;
            if let Some(c) = det.push(&self.field, &rec, self.h)? {
                return Ok(CubeImage {
                    center: [c.point[0].mid(), c.point[1].mid()],
                    delta: [c.point[0].rad(), c.point[1].rad()],
                    lipschitz: 0.0,
                    flight_time: c.time.hi(),
                    flow_lipschitz: c.lipschitz,
                });
            }
        }
    }
}
