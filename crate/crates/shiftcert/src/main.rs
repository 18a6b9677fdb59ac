use clap::{Parser, Subcommand};
use shiftcert::error::exit;
use shiftcert::{certify, export, mapfile, ChaosCertificate, PipelineError, RunConfig, RunOptions};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "shiftcert", version, about = "Certify two-symbol horseshoes of Poincare return maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the return map, check it and write a certificate.
    Certify {
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Run directory (default: the config's output.dir, else ./shiftcert-run).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Reuse stage maps from this directory where they match.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Print a summary of a binary map file.
    Inspect {
        map: PathBuf,
        /// Print the JSON mirror instead.
        #[arg(long)]
        json: bool,
    },
    /// Write plot CSVs for a finished run.
    Export {
        /// Directory for the CSV files.
        #[arg(long)]
        plots: PathBuf,
        /// Run directory written by `certify`.
        #[arg(long, default_value = "shiftcert-run")]
        from: PathBuf,
    },
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> Result<i32, PipelineError> {
    match cli.cmd {
        Cmd::Certify { config, out, threads, resume } => {
            let cfg = RunConfig::load(&config)?;
            let out = out.or_else(|| cfg.output.dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("shiftcert-run"));
            let maps = out.join("maps");
            let opts = RunOptions { threads, map_dir: Some(maps.clone()), resume };
            let r = certify(&cfg, &opts)?;
            let cert = &r.certificate;
            let path = out.join("certificate.json");
            cert.write(&path)?;
            if let Some(g) = &r.composite {
                mapfile::write_map(&maps.join("composite.bin"), g)?;
            }
            print_summary(cert, &path);
            Ok(cert.outcome.exit_code())
        }
        Cmd::Inspect { map, json } => {
            let m = mapfile::read_map(&map)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&mapfile::MapJson::from_map(&m)).expect("map serializes"));
            } else {
                println!("{}", mapfile::summary(&m));
            }
            Ok(exit::VERIFIED)
        }
        Cmd::Export { plots, from } => {
            let cert = ChaosCertificate::read(&from.join("certificate.json"))?;
            let composite = from.join("maps").join("composite.bin");
            let g = if composite.exists() { Some(mapfile::read_map(&composite)?) } else { None };
            let s = export::export_artifacts(&cert, g.as_ref(), &plots)?;
            for f in &s.files {
                println!("{}", f.display());
            }
            Ok(exit::VERIFIED)
        }
    }
}

fn print_summary(cert: &ChaosCertificate, path: &Path) {
    let o = &cert.outcome;
    println!("status: {:?}", o.status);
    if let Some(r) = &o.reason {
        println!("reason: {r}");
    }
    if let Some(b) = &cert.block {
        let margin = b.margin.map_or("inf".to_string(), |m| m.to_string());
        println!("block: {} cubes, core {}, margin {margin}, diam {}", b.n_cubes, b.core_cubes, b.diam);
    }
    for s in &cert.stages {
        println!("stage {} {:>2}: {} cubes, growth {:.2}, flight {:.4}", s.side, s.index, s.cubes, s.max_growth, s.max_flight_time);
    }
    println!("certificate: {}", path.display());
}
