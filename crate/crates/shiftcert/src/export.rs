//! Plot data: cube covers as rectangle lists and a sampled return map.

use shiftcert_core::conley::exit_set;
use shiftcert_core::flow::{pilot_first_hit, SectionSpec};
use shiftcert_core::grid::{Grid, RepresentableSet};
use shiftcert_core::isolation::{block_core, invariant_part};
use shiftcert_core::mvmap::{CubeEvaluator, MapError, RepresentableMvMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::certificate::ChaosCertificate;
use crate::config::RunConfig;
use crate::error::PipelineError;

pub const COVER_HEADER: &str = "cube,x_lo,x_hi,y_lo,y_hi";
pub const SCATTER_HEADER: &str = "side,u,v,gu,gv";

/// Return-map samples per component.
const SCATTER_SAMPLES: usize = 400;

/// Row counts of the files written by [`export_artifacts`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExportSummary {
    pub files: Vec<PathBuf>,
    pub n: usize,
    pub core: usize,
    pub exit: usize,
    pub inv: usize,
    pub scatter: usize,
}

/// One row per cube: its id and its box.
pub fn cover_csv(set: &RepresentableSet) -> String {
    let g = set.grid();
    let mut out = String::from(COVER_HEADER);
    out.push('\n');
    for c in set.iter() {
        let b = g.cube_box(c);
        writeln!(out, "{c},{},{},{},{}", b[0].lo(), b[0].hi(), b[1].lo(), b[1].hi()).expect("string write");
    }
    out
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
    files.push(path);
    Ok(())
}

/// Writes the certificate, the composite map and the plot CSVs into `dir`.
///
/// Without a composite map (a run that stopped in a stage) only `N` and the
/// return-map samples are written.
pub fn export_artifacts(cert: &ChaosCertificate, composite: Option<&RepresentableMvMap>, dir: &Path) -> Result<ExportSummary, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut s = ExportSummary::default();
    let cert_path = dir.join("certificate.json");
    cert.write(&cert_path)?;
    s.files.push(cert_path);
    let config = &cert.config;
    let p = config.p_grid().map_err(|e| PipelineError::Config(e.to_string()))?;
    let part = |k: usize| config.component(k).cover(&p).map_err(|e| PipelineError::Config(e.to_string()));
    let n = part(0)?.union(&part(1)?).expect("same grid");
    s.n = n.len();
    write(dir, "n.csv", &cover_csv(&n), &mut s.files)?;
    if let Some(g) = composite {
        let map_path = dir.join("composite.bin");
        crate::mapfile::write_map(&map_path, g)?;
        s.files.push(map_path);
        let [core, exit, inv] = cover_sets(g, &n).map_err(|e| PipelineError::format(dir, e.to_string()))?;
        (s.core, s.exit, s.inv) = (core.len(), exit.len(), inv.len());
        write(dir, "core.csv", &cover_csv(&core), &mut s.files)?;
        write(dir, "exit.csv", &cover_csv(&exit), &mut s.files)?;
        write(dir, "inv.csv", &cover_csv(&inv), &mut s.files)?;
    }
    let samples = return_map_samples(config, &p);
    s.scatter = samples.len();
    let mut text = String::from(SCATTER_HEADER);
    text.push('\n');
    for (k, a, b) in &samples {
        writeln!(text, "{k},{},{},{},{}", a[0], a[1], b[0], b[1]).expect("string write");
    }
    write(dir, "return_map.csv", &text, &mut s.files)?;
    Ok(s)
}

/// The block core, the exit set and the invariant part of `n`.
pub fn cover_sets(g: &RepresentableMvMap, n: &RepresentableSet) -> Result<[RepresentableSet; 3], MapError> {
    Ok([block_core(g, n)?, exit_set(g, n)?, invariant_part(g, n)?])
}

/// Non-rigorous samples `(side, x, g(x))` on a lattice of points of `N0` and `N1`.
pub fn return_map_samples(config: &RunConfig, p: &Grid) -> Vec<(usize, [f64; 2], [f64; 2])> {
    let mut out = Vec::new();
    for k in 0..2 {
        let Ok(nk) = config.component(k).cover(p) else { continue };
        let stride = (nk.len() / SCATTER_SAMPLES).max(1);
        let chain = config.chain(k);
        for c in nk.iter().step_by(stride) {
            let x = p.center(c);
            let y = match config.system.affine() {
                Some(a) => a.eval(x, 0.0).ok().map(|i| i.center),
                None => pilot_return(config, &chain, x),
            };
            if let Some(y) = y {
                out.push((k, x, y));
            }
        }
    }
    out
}

fn pilot_return(config: &RunConfig, chain: &[SectionSpec], x: [f64; 2]) -> Option<[f64; 2]> {
    let mut pt = chain[0].embed(x);
    for s in &chain[1..] {
        pt = pilot_first_hit(&config.params, pt, s, config.step, config.flight_budget)?.0;
    }
    Some(chain[chain.len() - 1].project(&pt))
}
