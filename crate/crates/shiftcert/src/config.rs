//! Run configuration, read from JSON.

use serde::{Deserialize, Serialize};
use shiftcert_core::affine::AffineHorseshoe;
use shiftcert_core::flow::{FlowParams, SectionSpec, DEFAULT_STEP};
use shiftcert_core::grid::{Grid, GridError, RepresentableSet};
use shiftcert_core::Interval;
use std::path::Path;

use crate::error::PipelineError;

/// `[lo, hi]`.
pub type Range = [f64; 2];
/// `[[x_lo, x_hi], [y_lo, y_hi]]` in section coordinates.
pub type RectSpec = [Range; 2];

/// A component given as one rectangle or a union of rectangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Component {
    One(RectSpec),
    Many(Vec<RectSpec>),
}

impl Component {
    pub fn rects(&self) -> Vec<RectSpec> {
        match self {
            Component::One(r) => vec![*r],
            Component::Many(v) => v.clone(),
        }
    }

    /// Union of the minimal covers of the rectangles.
    pub fn cover(&self, grid: &Grid) -> Result<RepresentableSet, GridError> {
        let mut out = RepresentableSet::empty(*grid);
        for r in self.rects() {
            let b = [interval(r[0])?, interval(r[1])?];
            out = out.union(&grid.cover(&b)?)?;
        }
        Ok(out)
    }

    /// Image under `(u, v) -> (-u, -v)`.
    pub fn mirrored(&self) -> Component {
        let m = |r: RectSpec| [[-r[0][1], -r[0][0]], [-r[1][1], -r[1][0]]];
        match self {
            Component::One(r) => Component::One(m(*r)),
            Component::Many(v) => Component::Many(v.iter().map(|r| m(*r)).collect()),
        }
    }
}

fn interval(r: Range) -> Result<Interval, GridError> {
    Interval::new(r[0], r[1]).map_err(|_| GridError::OutOfGrid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rectangles {
    #[serde(rename = "N0")]
    pub n0: Component,
    #[serde(rename = "N1")]
    pub n1: Component,
}

/// Cube radius: one for every section, or one per section in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform { eta: f64 },
    PerSection { etas: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemSpec {
    /// Lorenz flow through the configured sections.
    #[default]
    Lorenz,
    /// Piecewise affine test map; `sections` is ignored.
    Affine { left: [f64; 2], lift: [[i32; 2]; 2] },
}

impl SystemSpec {
    pub fn affine(&self) -> Option<AffineHorseshoe> {
        match self {
            SystemSpec::Affine { left, lift } => {
                Some(AffineHorseshoe { left: *left, lift: [(lift[0][0], lift[0][1]), (lift[1][0], lift[1][1])] })
            }
            SystemSpec::Lorenz => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPolicy {
    /// Each cube keeps its own `delta` and `L`.
    #[default]
    PerCube,
    /// Every cube of a stage gets the stage maximum of both.
    Global,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinePolicy {
    #[serde(default)]
    pub max_halvings: u32,
    /// Halve the integration step together with `eta`.
    #[serde(default)]
    pub halve_step: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Run directory; `--out` wins over this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Also write a JSON mirror of every map file.
    #[serde(default)]
    pub json_maps: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub system: SystemSpec,
    #[serde(default)]
    pub params: FlowParams,
    /// First and last entries are the return section `P`.
    #[serde(default)]
    pub sections: Vec<SectionSpec>,
    pub grid: GridSpec,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Per-stage flight-time budget.
    #[serde(default = "default_flight_budget")]
    pub flight_budget: f64,
    #[serde(default)]
    pub delta_policy: DeltaPolicy,
    /// Extent of the grid on `P`; every value of the return map must land in it.
    pub region: RectSpec,
    pub rectangles: Rectangles,
    /// Compute the `N1` chain only and get `N0` by the mirror `(u, v) -> (-u, -v)`.
    #[serde(default)]
    pub symmetry: bool,
    /// Wall-clock budget in seconds; 0 means none.
    #[serde(default)]
    pub budget: f64,
    #[serde(default)]
    pub refine: RefinePolicy,
    #[serde(default)]
    pub output: OutputSpec,
    /// Number of halvings already applied; set by the refinement loop.
    #[serde(default)]
    pub refinement_level: u32,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_flight_budget() -> f64 {
    10.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, PipelineError> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        RunConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Number of maps in the chain from `P` back to `P`.
    pub fn stage_count(&self) -> usize {
        match self.system {
            SystemSpec::Lorenz => self.sections.len() - 1,
            SystemSpec::Affine { .. } => 1,
        }
    }

    /// Cube radius on section `i` (`0 ..= stage_count`).
    pub fn eta(&self, i: usize) -> f64 {
        match &self.grid {
            GridSpec::Uniform { eta } => *eta,
            GridSpec::PerSection { etas } => etas[i],
        }
    }

    /// Grid on `P`. Symmetric about the origin when symmetry is on.
    pub fn p_grid(&self) -> Result<Grid, GridError> {
        let (lo, hi) = ([self.region[0][0], self.region[1][0]], [self.region[0][1], self.region[1][1]]);
        if self.symmetry {
            let half = [lo[0].abs().max(hi[0].abs()), lo[1].abs().max(hi[1].abs())];
            Grid::symmetric(half, self.eta(0))
        } else {
            Grid::enclosing(lo, hi, self.eta(0))
        }
    }

    /// The section chain for component `k`; `N0` runs through the mirrored planes.
    pub fn chain(&self, k: usize) -> Vec<SectionSpec> {
        if k == 0 {
            self.sections.iter().map(SectionSpec::mirrored).collect()
        } else {
            self.sections.clone()
        }
    }

    pub fn component(&self, k: usize) -> &Component {
        if k == 0 {
            &self.rectangles.n0
        } else {
            &self.rectangles.n1
        }
    }

    /// The same run with every `eta` halved (and the step, if configured).
    pub fn halved(&self) -> RunConfig {
        let mut c = self.clone();
        c.grid = match &self.grid {
            GridSpec::Uniform { eta } => GridSpec::Uniform { eta: eta / 2.0 },
            GridSpec::PerSection { etas } => GridSpec::PerSection { etas: etas.iter().map(|e| e / 2.0).collect() },
        };
        if self.refine.halve_step {
            c.step /= 2.0;
        }
        c.refinement_level += 1;
        c
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if let SystemSpec::Lorenz = self.system {
            if self.sections.len() < 2 {
                return bad("need at least two sections".into());
            }
            let (p, last) = (self.sections[0], self.sections[self.sections.len() - 1]);
            if !p.same_plane(&last) || p.orientation != last.orientation {
                return bad("the last section must repeat the first".into());
            }
            if self.symmetry && p.mirrored() != p {
                return bad("symmetry needs a return section fixed by the mirror".into());
            }
        }
        if self.system != SystemSpec::Lorenz && self.symmetry {
            return bad("symmetry applies to the flow only".into());
        }
        let n = self.stage_count() + 1;
        if let GridSpec::PerSection { etas } = &self.grid {
            if etas.len() != n {
                return bad(format!("{} etas for {n} sections", etas.len()));
            }
        }
        let etas: Vec<f64> = (0..n).map(|i| self.eta(i)).collect();
        if etas[0] != etas[n - 1] {
            return bad("first and last eta differ".into());
        }
        for e in &etas {
            if Grid::new([0.0, 0.0], *e, [1, 1]).is_err() {
                return bad(format!("eta {e} is not a power of two"));
            }
        }
        if !(self.step > 0.0 && self.step.is_finite()) || !(self.flight_budget > 0.0) || !(self.budget >= 0.0) {
            return bad("step, flight budget and budget must be positive".into());
        }
        let grid = self.p_grid().map_err(|e| PipelineError::Config(format!("region: {e}")))?;
        let mut parts = Vec::new();
        for k in 0..2 {
            let c = self.component(k);
            if c.rects().is_empty() {
                return bad(format!("N{k} is empty"));
            }
            let s = c.cover(&grid).map_err(|e| PipelineError::Config(format!("N{k} does not fit the region: {e}")))?;
            parts.push(s);
        }
        if !parts[0].intersection(&parts[1]).expect("same grid").is_empty() {
            return bad("N0 and N1 overlap".into());
        }
        if self.symmetry && self.rectangles.n1.mirrored().cover(&grid).ok().as_ref() != Some(&parts[0]) {
            return bad("with symmetry on, N0 must be the mirror image of N1".into());
        }
        Ok(())
    }
}
