//! The JSON certificate written at the end of a run.

use serde::{Deserialize, Serialize};
use shiftcert_core::algebra::QMatrix;
use shiftcert_core::conley::{HorseshoeVerdict, IndexComputation};
use shiftcert_core::flow::SectionSpec;
use shiftcert_core::grid::{CubeId, Grid};
use shiftcert_core::isolation::BlockCertificate;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::PipelineError;

pub const FORMAT: &str = "shiftcert-certificate/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Both ordered pairs certify a horseshoe.
    Verified,
    /// Every check ran; at least one came out negative.
    Negative,
    /// Refinement or the time budget ran out before a verdict.
    Undecided,
    /// Some cube failed to evaluate or left its grid.
    StructuralFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// A finer grid might turn the verdict around.
    #[serde(default)]
    pub refinable: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        use crate::error::exit;
        match self.status {
            Status::Verified => exit::VERIFIED,
            Status::Negative | Status::Undecided => exit::NEGATIVE,
            Status::StructuralFailure => exit::STAGE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub cube: CubeId,
    pub center: [f64; 2],
    pub reason: String,
}

/// One map of the section chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// `N0` or `N1`.
    pub side: String,
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<SectionSpec>,
    pub src_grid: Grid,
    pub dst_grid: Grid,
    pub cubes: u64,
    pub failures: u64,
    /// First few failures, in cube order.
    pub failure_samples: Vec<StageFailure>,
    /// Cubes in the union of all values.
    pub reached: u64,
    /// Largest value radius over the source `eta`.
    pub max_growth: f64,
    pub max_flight_time: f64,
    pub max_flow_lipschitz: f64,
    /// Largest value extent in cubes.
    pub max_value_cubes: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeReport {
    pub grid: Grid,
    pub cubes: u64,
    pub diam: f64,
    pub max_value_cubes: u32,
}

/// Sizes of the cube sets written by the plot export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCounts {
    pub n: usize,
    /// `F*^-1(N) ∩ N ∩ F(N)`.
    pub core: usize,
    pub exit: usize,
    pub inv: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub n_cubes: usize,
    pub core_cubes: usize,
    pub diam: f64,
    /// `None` when the core is empty (infinite margin).
    pub margin: Option<f64>,
    pub verdict: bool,
    pub witnesses: Vec<(CubeId, f64)>,
}

impl From<&BlockCertificate> for BlockReport {
    fn from(b: &BlockCertificate) -> Self {
        BlockReport {
            n_cubes: b.n_cubes,
            core_cubes: b.core.len(),
            diam: b.diam,
            margin: Some(b.margin).filter(|m| m.is_finite()),
            verdict: b.verdict,
            witnesses: b.witnesses.iter().take(20).copied().collect(),
        }
    }
}

/// Index of one invariant set. Matrices and factors are exact rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    /// `S0`, `S1`, `S01` or `S10`.
    pub label: String,
    pub block: BlockReport,
    pub exit_cubes: usize,
    pub cohomology_ranks: [usize; 3],
    /// Index map per degree, rows of rational strings.
    pub index_maps: Vec<Vec<Vec<String>>>,
    /// Leray-reduced map per degree.
    pub chi: Vec<Vec<Vec<String>>>,
    pub index_ranks: Vec<usize>,
    /// Invariant factors of `chi` per degree, as polynomials in `t`.
    pub factors: Vec<Vec<String>>,
}

impl IndexReport {
    pub fn new(label: &str, c: &IndexComputation) -> IndexReport {
        IndexReport {
            label: label.into(),
            block: BlockReport::from(&c.block),
            exit_cubes: c.pair.l.len(),
            cohomology_ranks: c.module.ranks(),
            index_maps: c.maps.iter().map(QMatrix::to_strings).collect(),
            chi: c.index.degrees.iter().map(|d| d.chi.to_strings()).collect(),
            index_ranks: c.index.ranks(),
            factors: c.index.degrees.iter().map(|d| d.factors.iter().map(|p| p.to_string()).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    /// `S01` or `S10`.
    pub label: String,
    pub components_ok: [bool; 2],
    pub union_factors: Vec<String>,
    pub sum_factors: Vec<String>,
    pub not_conjugate: bool,
    pub conclusion: bool,
}

impl VerdictReport {
    pub fn new(label: &str, v: &HorseshoeVerdict) -> VerdictReport {
        VerdictReport {
            label: label.into(),
            components_ok: v.components_ok,
            union_factors: v.union_factors.iter().map(|p| p.to_string()).collect(),
            sum_factors: v.sum_factors.iter().map(|p| p.to_string()).collect(),
            not_conjugate: v.not_conjugate,
            conclusion: v.conclusion,
        }
    }
}

/// Summary of an earlier, coarser attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub refinement_level: u32,
    pub eta: f64,
    pub step: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diam: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

/// Run metadata that differs between otherwise identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: u64,
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosCertificate {
    pub format: String,
    pub tool: ToolInfo,
    pub config: RunConfig,
    /// Coarser runs that led to this one.
    pub attempts: Vec<AttemptRecord>,
    pub stages: Vec<StageReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<CompositeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covers: Option<CoverCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockReport>,
    /// Cube counts of `N_kl = N_k ∩ F(N_l)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<[[usize; 2]; 2]>,
    pub indices: Vec<IndexReport>,
    pub verdicts: Vec<VerdictReport>,
    pub outcome: Outcome,
    pub timing: Timing,
}

impl ChaosCertificate {
    pub fn new(config: RunConfig) -> ChaosCertificate {
        ChaosCertificate {
            format: FORMAT.into(),
            tool: ToolInfo::default(),
            config,
            attempts: Vec::new(),
            stages: Vec::new(),
            composite: None,
            covers: None,
            block: None,
            split: None,
            indices: Vec::new(),
            verdicts: Vec::new(),
            outcome: Outcome { status: Status::Undecided, verdict: false, reason: None, refinable: false },
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<ChaosCertificate, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// JSON without the timing block, for comparing runs.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.timing = Timing::default();
        c.to_json()
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        std::fs::write(path, self.to_json()).map_err(|e| PipelineError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<ChaosCertificate, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        ChaosCertificate::from_json(&text).map_err(|e| PipelineError::format(path, e.to_string()))
    }

    pub fn attempt_record(&self) -> AttemptRecord {
        AttemptRecord {
            refinement_level: self.config.refinement_level,
            eta: self.config.eta(0),
            step: self.config.step,
            status: self.outcome.status,
            reason: self.outcome.reason.clone(),
            margin: self.block.as_ref().and_then(|b| b.margin),
            diam: self.block.as_ref().map(|b| b.diam),
        }
    }
}
