//! Stage maps, composition, verification and the refinement loop.

use rayon::prelude::*;
use shiftcert_core::conley::{conley_index, split_neighborhood, union_block, verify_theorem2, ConleyError, IndexComputation};
use shiftcert_core::flow::{CubeImage, FlowError, PoincareEvaluator, StageStats};
use shiftcert_core::grid::{CubeId, Grid, GridError, RepresentableSet};
use shiftcert_core::isolation::check_isolating_block;
use shiftcert_core::mvmap::{assemble_enclosure, compose_hull, enclosure_value, CubeEvaluator, CubeFailure, RepresentableMvMap};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::certificate::{BlockReport, ChaosCertificate, CompositeReport, CoverCounts, IndexReport, Outcome, StageFailure, StageReport, Status, VerdictReport};
use crate::config::{DeltaPolicy, RunConfig};
use crate::error::PipelineError;
use crate::mapfile;

const FAILURE_SAMPLES: usize = 20;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    /// Where stage maps and the composite are written.
    pub map_dir: Option<PathBuf>,
    /// Directory of stage maps from an earlier run to reuse.
    pub resume: Option<PathBuf>,
}

/// A finished run: the certificate plus the maps it was derived from.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub certificate: ChaosCertificate,
    /// Stage maps per component; empty for a component obtained by symmetry.
    pub stages: [Vec<RepresentableMvMap>; 2],
    /// The return map on `N0 ∪ N1`, once every stage succeeded.
    pub composite: Option<RepresentableMvMap>,
    pub components: [RepresentableSet; 2],
}

/// Image under the mirror `(u, v) -> (-u, -v)` of a map on a symmetric grid.
pub fn apply_symmetry(map: &RepresentableMvMap) -> Result<RepresentableMvMap, GridError> {
    map.mirrored()
}

struct StageOutcome {
    map: RepresentableMvMap,
    report: StageReport,
}

/// Maps the section stage `index` of component `side`.
struct StageJob<'a> {
    eval: &'a dyn CubeEvaluator,
    side: usize,
    index: usize,
    from: Option<shiftcert_core::flow::SectionSpec>,
    to: Option<shiftcert_core::flow::SectionSpec>,
    /// Fixed target grid; otherwise the grid is fitted to the images.
    dst: Option<Grid>,
    dst_eta: f64,
    policy: DeltaPolicy,
}

fn run_stage(job: &StageJob, src: &RepresentableSet) -> Result<StageOutcome, GridError> {
    let g = *src.grid();
    let eval = job.eval;
    let mut imgs: Vec<(CubeId, Result<CubeImage, FlowError>)> =
        src.ids().par_iter().map(|&c| (c, eval.eval(g.center(c), g.eta()))).collect();
    if job.policy == DeltaPolicy::Global {
        let ok = || imgs.iter().filter_map(|(_, r)| r.as_ref().ok());
        let d = [0, 1].map(|k| ok().map(|i| i.delta[k]).fold(0.0, f64::max));
        let l = ok().map(|i| i.lipschitz).fold(0.0, f64::max);
        for (_, r) in imgs.iter_mut() {
            if let Ok(i) = r {
                i.delta = d;
                i.lipschitz = l;
            }
        }
    }
    let dst = match job.dst {
        Some(d) => d,
        None => fitted_grid(&imgs, g.eta(), job.dst_eta)?,
    };
    let mut stats = StageStats::default();
    for (_, r) in &imgs {
        match r {
            Ok(i) => stats.record(i, g.eta()),
            Err(_) => stats.failures += 1,
        }
    }
    let results: Vec<_> = imgs
        .into_iter()
        .map(|(c, r)| {
            let r = r.map_err(CubeFailure::Flow).and_then(|img| {
                let rect = enclosure_value(&img, g.eta(), &dst).map_err(|_| CubeFailure::OutOfGrid)?;
                Ok((img, rect))
            });
            (c, r)
        })
        .collect();
    let enc = assemble_enclosure(g, dst, results);
    let reached = enc.map.image(&enc.map.domain()).map(|s| s.len() as u64).unwrap_or(0);
    let max_value_cubes = enc.map.iter().map(|(_, v)| v.bbox().extent()[0].max(v.bbox().extent()[1])).max().unwrap_or(0);
    let report = StageReport {
        side: format!("N{}", job.side),
        index: job.index,
        from: job.from,
        to: job.to,
        src_grid: g,
        dst_grid: dst,
        cubes: src.len() as u64,
        failures: enc.failures.len() as u64,
        failure_samples: enc
            .failures
            .iter()
            .take(FAILURE_SAMPLES)
            .map(|(c, e)| StageFailure { cube: *c, center: g.center(*c), reason: e.to_string() })
            .collect(),
        reached,
        max_growth: stats.max_growth,
        max_flight_time: stats.max_flight_time,
        max_flow_lipschitz: stats.max_flow_lipschitz,
        max_value_cubes,
    };
    Ok(StageOutcome { map: enc.map, report })
}

/// Smallest aligned grid of radius `eta` holding every enclosure, plus one cube of slack.
fn fitted_grid(imgs: &[(CubeId, Result<CubeImage, FlowError>)], src_eta: f64, eta: f64) -> Result<Grid, GridError> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for img in imgs.iter().filter_map(|(_, r)| r.as_ref().ok()) {
        let b = img.enclosure(src_eta);
        for k in 0..2 {
            lo[k] = lo[k].min(b[k].lo());
            hi[k] = hi[k].max(b[k].hi());
        }
    }
    if lo[0] > hi[0] {
        // nothing evaluated; any grid will do
        return Grid::new([0.0, 0.0], eta, [1, 1]);
    }
    let pad = 2.0 * eta;
    Grid::enclosing([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad], eta)
}

fn stage_file(dir: &Path, level: u32, side: usize, index: usize) -> PathBuf {
    dir.join(format!("L{level}_N{side}_stage{index:02}.bin"))
}

fn composite_file(dir: &Path, level: u32) -> PathBuf {
    dir.join(format!("L{level}_composite.bin"))
}

/// A stored stage is reused only if it was built on exactly this source set.
fn resumed_stage(dir: &Path, level: u32, side: usize, index: usize, src: &RepresentableSet) -> Option<StageOutcome> {
    let bin = stage_file(dir, level, side, index);
    let map = mapfile::read_map(&bin).ok()?;
    if map.src() != src.grid() || map.domain() != *src {
        return None;
    }
    let text = std::fs::read_to_string(bin.with_extension("json")).ok()?;
    let report: StageReport = serde_json::from_str(&text).ok()?;
    (report.failures == 0 && report.dst_grid == *map.dst()).then_some(StageOutcome { map, report })
}

fn save_stage(dir: &Path, level: u32, side: usize, st: &StageOutcome, json_maps: bool) -> Result<(), PipelineError> {
    let bin = stage_file(dir, level, side, st.report.index);
    mapfile::write_map(&bin, &st.map)?;
    let rep = bin.with_extension("json");
    std::fs::write(&rep, serde_json::to_string_pretty(&st.report).expect("report serializes")).map_err(|e| PipelineError::io(&rep, e))?;
    if json_maps {
        mapfile::write_map_json(&bin.with_extension("map.json"), &st.map)?;
    }
    Ok(())
}

enum Stop {
    Structural(String),
    Budget,
}

struct Runner<'a> {
    config: &'a RunConfig,
    opts: &'a RunOptions,
    start: Instant,
}

impl Runner<'_> {
    fn over_budget(&self) -> bool {
        self.config.budget > 0.0 && self.start.elapsed().as_secs_f64() > self.config.budget
    }

    /// Runs the section chain of one component and returns its stage maps.
    fn chain(&self, side: usize, n: &RepresentableSet, p: Grid, reports: &mut Vec<StageReport>) -> Result<Result<Vec<RepresentableMvMap>, Stop>, PipelineError> {
        let c = self.config;
        let stages = c.stage_count();
        let affine = c.system.affine();
        let sections = c.chain(side);
        let mut cur = n.clone();
        let mut maps = Vec::with_capacity(stages);
        for i in 0..stages {
            if self.over_budget() {
                return Ok(Err(Stop::Budget));
            }
            let resumed = self.opts.resume.as_deref().and_then(|d| resumed_stage(d, c.refinement_level, side, i, &cur));
            let st = match resumed {
                Some(st) => st,
                None => {
                    let flow;
                    let (eval, from, to): (&dyn CubeEvaluator, _, _) = match &affine {
                        Some(a) => (a, None, None),
                        None => {
                            let mut e = PoincareEvaluator::new(c.params, sections[i], sections[i + 1]);
                            e.h = c.step;
                            e.max_time = c.flight_budget;
                            flow = e;
                            (&flow, Some(sections[i]), Some(sections[i + 1]))
                        }
                    };
                    let job = StageJob {
                        eval,
                        side,
                        index: i,
                        from,
                        to,
                        dst: (i + 1 == stages).then_some(p),
                        dst_eta: c.eta(i + 1),
                        policy: c.delta_policy,
                    };
                    let st = run_stage(&job, &cur).map_err(|e| PipelineError::Config(format!("stage {i} of N{side}: {e}")))?;
                    if let Some(dir) = &self.opts.map_dir {
                        if st.report.failures == 0 {
                            save_stage(dir, c.refinement_level, side, &st, c.output.json_maps)?;
                        }
                    }
                    st
                }
            };
            let failed = st.report.failures;
            let first = st.report.failure_samples.first().map(|f| f.reason.clone());
            reports.push(st.report);
            if failed > 0 {
                let why = format!("{failed} cube(s) failed in stage {i} of N{side}: {}", first.unwrap_or_default());
                return Ok(Err(Stop::Structural(why)));
            }
            cur = st.map.image(&cur).expect("stage covers its source");
            maps.push(st.map);
        }
        Ok(Ok(maps))
    }
}

/// One run at the configured resolution.
pub fn run_pipeline(config: &RunConfig, opts: &RunOptions) -> Result<RunResult, PipelineError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let mut result = pool.install(|| run_inner(config, opts))?;
    result.certificate.timing.threads = threads;
    Ok(result)
}

fn run_inner(config: &RunConfig, opts: &RunOptions) -> Result<RunResult, PipelineError> {
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let runner = Runner { config, opts, start: Instant::now() };
    if let Some(dir) = &opts.map_dir {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    let p = config.p_grid().map_err(|e| PipelineError::Config(format!("region: {e}")))?;
    let cfg_err = |e: GridError| PipelineError::Config(e.to_string());
    let components = [config.component(0).cover(&p).map_err(cfg_err)?, config.component(1).cover(&p).map_err(cfg_err)?];
    let mut cert = ChaosCertificate::new(config.clone());
    let mut stages: [Vec<RepresentableMvMap>; 2] = [Vec::new(), Vec::new()];
    let sides: &[usize] = if config.symmetry { &[1] } else { &[0, 1] };
    let mut halted = None;
    for &side in sides {
        match runner.chain(side, &components[side], p, &mut cert.stages)? {
            Ok(maps) => stages[side] = maps,
            Err(stop) => {
                halted = Some(stop);
                break;
            }
        }
    }
    let mut composite = None;
    match halted {
        Some(Stop::Structural(why)) => cert.outcome = outcome(Status::StructuralFailure, why, false),
        Some(Stop::Budget) => cert.outcome = outcome(Status::Undecided, "time budget exhausted".into(), false),
        None => {
            let g = compose_sides(config, &stages)?;
            cert.composite = Some(composite_report(&g, &components));
            let all = components[0].union(&components[1]).expect("same grid");
            if let Ok([core, exit, inv]) = crate::export::cover_sets(&g, &all) {
                cert.covers = Some(CoverCounts { n: all.len(), core: core.len(), exit: exit.len(), inv: inv.len() });
            }
            if let Some(dir) = &opts.map_dir {
                mapfile::write_map(&composite_file(dir, config.refinement_level), &g)?;
                if config.output.json_maps {
                    mapfile::write_map_json(&composite_file(dir, config.refinement_level).with_extension("map.json"), &g)?;
                }
            }
            verify(&mut cert, &g, &components);
            composite = Some(g);
        }
    }
    cert.timing.started_unix = started_unix;
    cert.timing.wall_seconds = runner.start.elapsed().as_secs_f64();
    Ok(RunResult { certificate: cert, stages, composite, components })
}

fn compose_sides(config: &RunConfig, stages: &[Vec<RepresentableMvMap>; 2]) -> Result<RepresentableMvMap, PipelineError> {
    let internal = |e: String| PipelineError::Config(format!("composition: {e}"));
    let g1 = compose_hull(&stages[1]).map_err(|e| internal(e.to_string()))?;
    let g0 = if config.symmetry { apply_symmetry(&g1).map_err(|e| internal(e.to_string()))? } else { compose_hull(&stages[0]).map_err(|e| internal(e.to_string()))? };
    g0.merged(&g1).map_err(|e| internal(e.to_string()))
}

fn composite_report(g: &RepresentableMvMap, n: &[RepresentableSet; 2]) -> CompositeReport {
    let all = n[0].union(&n[1]).expect("same grid");
    CompositeReport {
        grid: *g.src(),
        cubes: g.len() as u64,
        diam: g.diam_over(&all).unwrap_or(f64::NAN),
        max_value_cubes: g.iter().map(|(_, v)| v.bbox().extent()[0].max(v.bbox().extent()[1])).max().unwrap_or(0),
    }
}

fn outcome(status: Status, reason: String, refinable: bool) -> Outcome {
    Outcome { status, verdict: status == Status::Verified, reason: Some(reason), refinable }
}

/// Geometric failures that a finer grid can cure.
fn refinable(e: &ConleyError) -> bool {
    matches!(e, ConleyError::NotIsolated(_) | ConleyError::AmbiguousCrossing { .. } | ConleyError::ExitMeetsInvariant { .. })
}

fn index_step(cert: &mut ChaosCertificate, label: &str, r: Result<IndexComputation, ConleyError>) -> Option<IndexComputation> {
    match r {
        Ok(c) => {
            cert.indices.push(IndexReport::new(label, &c));
            Some(c)
        }
        Err(e) => {
            let refine = refinable(&e);
            cert.outcome = outcome(Status::Negative, format!("{label}: {e}"), refine);
            None
        }
    }
}

/// Block check on `N`, split, the four indices and both non-conjugacy tests.
fn verify(cert: &mut ChaosCertificate, g: &RepresentableMvMap, n: &[RepresentableSet; 2]) {
    let all = n[0].union(&n[1]).expect("same grid");
    let block = match check_isolating_block(g, &all) {
        Ok(b) => b,
        Err(e) => {
            cert.outcome = outcome(Status::StructuralFailure, format!("block check: {e}"), false);
            return;
        }
    };
    cert.block = Some(BlockReport::from(&block));
    if block.core.is_empty() {
        cert.outcome = outcome(Status::Negative, "no cube of N returns to N".into(), false);
        return;
    }
    if !block.verdict {
        let why = format!("N is not an isolating block (margin {} <= diam {})", block.margin, block.diam);
        cert.outcome = outcome(Status::Negative, why, true);
        return;
    }
    let split = match split_neighborhood(&n[0], &n[1], g) {
        Ok(s) => s,
        Err(e) => {
            let refine = refinable(&e);
            cert.outcome = outcome(Status::Negative, format!("split: {e}"), refine);
            return;
        }
    };
    cert.split = Some([[split.get(0, 0).len(), split.get(0, 1).len()], [split.get(1, 0).len(), split.get(1, 1).len()]]);
    let Some(s0) = index_step(cert, "S0", conley_index(g, &n[0])) else { return };
    let Some(s1) = index_step(cert, "S1", conley_index(g, &n[1])) else { return };
    let mut all_ok = true;
    let mut first_bad = None;
    for (l, k) in [(0, 1), (1, 0)] {
        let label = format!("S{l}{k}");
        let u = union_block(&all, g, &split, l, k).and_then(|b| conley_index(g, &b));
        let Some(u) = index_step(cert, &label, u) else { return };
        match verify_theorem2(&s0.index, &s1.index, &u.index) {
            Ok(v) => {
                if !v.conclusion && first_bad.is_none() {
                    first_bad = Some(if !(v.components_ok[0] && v.components_ok[1]) {
                        "a component index is not (Q, id) in degree one".to_string()
                    } else {
                        format!("the index map of {label} is conjugate to the direct sum")
                    });
                }
                all_ok &= v.conclusion;
                cert.verdicts.push(VerdictReport::new(&label, &v));
            }
            Err(e) => {
                cert.outcome = outcome(Status::Negative, format!("{label}: {e}"), false);
                return;
            }
        }
    }
    cert.outcome = if all_ok {
        Outcome { status: Status::Verified, verdict: true, reason: None, refinable: false }
    } else {
        outcome(Status::Negative, first_bad.unwrap_or_default(), false)
    };
}

/// The next configuration after a geometric failure.
pub fn refine_and_retry(config: &RunConfig, failed: &ChaosCertificate) -> Result<RunConfig, PipelineError> {
    let o = &failed.outcome;
    if o.status == Status::Verified {
        return Err(PipelineError::NotRefinable("the run already verified".into()));
    }
    if !o.refinable {
        return Err(PipelineError::NotRefinable(o.reason.clone().unwrap_or_else(|| format!("{:?}", o.status))));
    }
    if config.refinement_level >= config.refine.max_halvings {
        return Err(PipelineError::RefinementExhausted(config.refinement_level));
    }
    let next = config.halved();
    next.validate()?;
    Ok(next)
}

/// Runs, and on geometric failures halves `eta` until the run verifies, the
/// limit is reached or the budget runs out. Earlier attempts go into the
/// certificate chain.
pub fn certify(config: &RunConfig, opts: &RunOptions) -> Result<RunResult, PipelineError> {
    let start = Instant::now();
    let mut attempts = Vec::new();
    let mut cfg = config.clone();
    loop {
        let mut budgeted = cfg.clone();
        if cfg.budget > 0.0 {
            let left = cfg.budget - start.elapsed().as_secs_f64();
            if left <= 0.0 {
                // the previous attempt stands, but nothing was decided
                let mut r = undecided_result(&cfg);
                r.certificate.attempts = attempts;
                return Ok(r);
            }
            budgeted.budget = left;
        }
        let mut r = run_pipeline(&budgeted, opts)?;
        r.certificate.config = cfg.clone();
        r.certificate.attempts = attempts.clone();
        match refine_and_retry(&cfg, &r.certificate) {
            Ok(next) => {
                attempts.push(r.certificate.attempt_record());
                cfg = next;
            }
            Err(PipelineError::RefinementExhausted(_)) => {
                let why = r.certificate.outcome.reason.clone().unwrap_or_default();
                r.certificate.outcome = outcome(Status::Undecided, format!("refinement limit reached; last attempt: {why}"), false);
                return Ok(r);
            }
            Err(_) => return Ok(r),
        }
    }
}

fn undecided_result(config: &RunConfig) -> RunResult {
    let p = config.p_grid().expect("validated");
    let components = [RepresentableSet::empty(p), RepresentableSet::empty(p)];
    let mut cert = ChaosCertificate::new(config.clone());
    cert.outcome = outcome(Status::Undecided, "time budget exhausted".into(), false);
    RunResult { certificate: cert, stages: [Vec::new(), Vec::new()], composite: None, components }
}
