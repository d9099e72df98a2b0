//! `cqec`: seeded experiment runner with JSON/CSV outputs and a result verifier.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cqec_core::bench_states::Algorithm;
use cqec_core::experiment::{self, ExperimentConfig, ExperimentKind, OutputFormat, SweepNoise};
use cqec_core::noise::NoiseSpec;
use cqec_core::recovery::CatalystSource;
use cqec_core::CqecError;

/// Worker-count override for the row and restart pools.
const WORKERS_ENV: &str = "CQEC_WORKERS";

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "cqec", version, about = "Catalytic QEC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// qkan, qdrift, cfqpe, regev or ttn.
    #[arg(long)]
    algo: Option<String>,
    /// Output path without extension; defaults to results/<experiment>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "both", value_parser = ["structured", "table", "both"])]
    format: String,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    ansatz_depth: Option<u8>,
    /// Quasi-Newton polish iterations for the recovery optimizer (0 disables).
    #[arg(long)]
    polish: Option<usize>,
    /// Record wall time in the provenance block (makes outputs differ between runs).
    #[arg(long)]
    wall_time: bool,
}

#[derive(Subcommand)]
enum Command {
    /// ε-family sweep on the maximally coherent d=4 state.
    Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Recovery across a dephasing or depolarizing grid.
    NoiseSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = ["dephasing", "depolarizing"])]
        noise: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_parser = ["variational", "asymptotic", "pipeline"])]
        catalyst: Option<String>,
    },
    /// Unprotected, Steane, surface-code and recovered fidelities.
    QecCompare {
        #[command(flatten)]
        common: Common,
    },
    /// CPMG pulse counts through the twirl and swap pipeline.
    DdSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Standard, covariant and DD+twirl purification per round.
    PipelineCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_rounds: Option<u32>,
    },
    /// Copy counts and the bound-constant power law.
    Scaling {
        #[command(flatten)]
        common: Common,
    },
    /// Repeated recovery with a carried-over catalyst.
    Durability {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long, value_parser = ["variational", "asymptotic", "pipeline"])]
        catalyst: Option<String>,
    },
    /// Variational catalysts for several dimensions.
    CatalystPrep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
    /// One full protocol run.
    Protocol {
        #[command(flatten)]
        common: Common,
        /// Noise as JSON, e.g. '{"kind":"depolarizing","p":0.3}'.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, value_parser = ["variational", "asymptotic", "pipeline"])]
        catalyst: Option<String>,
    },
    /// Runs a JSON experiment config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "both", value_parser = ["structured", "table", "both"])]
        format: String,
    },
    /// Re-hashes a result file; with --rerun also re-executes its config.
    Verify {
        file: PathBuf,
        #[arg(long)]
        rerun: bool,
    },
}

enum Failure {
    Config(String),
    Other(String),
}

impl From<CqecError> for Failure {
    fn from(e: CqecError) -> Self {
        match e {
            CqecError::Config(_) | CqecError::InvalidArgument(_) | CqecError::Serde(_) => Failure::Config(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn parse<T: std::str::FromStr<Err = CqecError>>(s: Option<&String>) -> Result<Option<T>, Failure> {
    s.map(|v| v.parse::<T>()).transpose().map_err(Failure::from)
}

fn base_config(kind: ExperimentKind, c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::new(kind, c.seed);
    cfg.algorithm = parse::<Algorithm>(c.algo.as_ref())?;
    cfg.ansatz_depth = c.ansatz_depth.map(usize::from);
    cfg.polish_iter = c.polish;
    Ok(cfg)
}

fn configure(cmd: &Command) -> Result<(ExperimentConfig, Common), Failure> {
    let (cfg, common) = match cmd {
        Command::Threshold { common, points } => {
            let mut cfg = base_config(ExperimentKind::Threshold, common)?;
            cfg.points = *points;
            (cfg, common)
        }
        Command::NoiseSweep { common, noise, points, catalyst } => {
            let mut cfg = base_config(ExperimentKind::NoiseSweep, common)?;
            cfg.sweep_noise = parse::<SweepNoise>(noise.as_ref())?;
            cfg.points = *points;
            cfg.catalyst = parse::<CatalystSource>(catalyst.as_ref())?;
            (cfg, common)
        }
        Command::QecCompare { common } => (base_config(ExperimentKind::QecCompare, common)?, common),
        Command::DdSweep { common } => (base_config(ExperimentKind::DdSweep, common)?, common),
        Command::PipelineCompare { common, max_rounds } => {
            let mut cfg = base_config(ExperimentKind::PipelineCompare, common)?;
            cfg.max_rounds = *max_rounds;
            (cfg, common)
        }
        Command::Scaling { common } => (base_config(ExperimentKind::Scaling, common)?, common),
        Command::Durability { common, cycles, catalyst } => {
            let mut cfg = base_config(ExperimentKind::Durability, common)?;
            cfg.cycles = *cycles;
            cfg.catalyst = parse::<CatalystSource>(catalyst.as_ref())?;
            (cfg, common)
        }
        Command::CatalystPrep { common, dims } => {
            let mut cfg = base_config(ExperimentKind::CatalystPrep, common)?;
            cfg.dims = dims.clone();
            (cfg, common)
        }
        Command::Protocol { common, noise, catalyst } => {
            let mut cfg = base_config(ExperimentKind::Protocol, common)?;
            cfg.noise = noise
                .as_ref()
                .map(|s| serde_json::from_str::<NoiseSpec>(s))
                .transpose()
                .map_err(|e| Failure::Config(format!("bad --noise: {e}")))?;
            cfg.catalyst = parse::<CatalystSource>(catalyst.as_ref())?;
            (cfg, common)
        }
        Command::Run { .. } | Command::Verify { .. } => unreachable!("handled separately"),
    };
    Ok((cfg, common.clone()))
}

fn execute(cfg: &ExperimentConfig, out: Option<PathBuf>, format: &str, wall_time: bool) -> Result<ExitCode, Failure> {
    let format: OutputFormat = format.parse()?;
    let start = Instant::now();
    let mut result = experiment::run(cfg)?;
    if wall_time {
        result.provenance.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let out = out.unwrap_or_else(|| PathBuf::from("results").join(cfg.experiment.name()));
    let written = experiment::write_outputs(&mut result, &out, format)?;
    let paths: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    println!(
        "{}: {} rows, {} failed, {}",
        cfg.experiment,
        result.rows.len(),
        result.failures.len(),
        result.content_hash.as_deref().unwrap_or("")
    );
    println!("wrote {}", paths.join(", "));
    for f in &result.failures {
        eprintln!("row {}: {}", f.index, f.message);
    }
    Ok(if result.is_partial() { ExitCode::from(EXIT_PARTIAL) } else { ExitCode::SUCCESS })
}

fn verify(file: &Path, rerun: bool) -> Result<ExitCode, Failure> {
    let report = experiment::verify_file(file)?;
    let mut ok = report.ok();
    println!("stored   {}", report.stored_hash);
    println!("computed {}", report.computed_hash);
    match report.csv_matches {
        Some(m) => println!("csv      {}", if m { "matches" } else { "differs" }),
        None => println!("csv      absent"),
    }
    if rerun {
        let mut again = experiment::run(&report.result.config)?;
        again.provenance = report.result.provenance.clone();
        again.seal()?;
        let same = again.content_hash.as_deref() == Some(report.stored_hash.as_str());
        println!("rerun    {}", if same { "identical" } else { "differs" });
        ok &= same;
    }
    println!("{}", if ok { "ok" } else { "MISMATCH" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAILURE) })
}

fn init_workers() -> Result<(), Failure> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|()| match &cli.command {
        Command::Verify { file, rerun } => verify(file, *rerun),
        Command::Run { config, out, format } => std::fs::read_to_string(config)
            .map_err(|e| Failure::Config(format!("{}: {e}", config.display())))
            .and_then(|text| serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| Failure::Config(e.to_string())))
            .and_then(|cfg| execute(&cfg, out.clone(), format, false)),
        cmd => configure(cmd).and_then(|(cfg, common)| execute(&cfg, common.out, &common.format, common.wall_time)),
    });
    match outcome {
        Ok(code) => code,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
