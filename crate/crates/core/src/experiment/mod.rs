//! Seeded experiment runners and their schema-versioned result files.

mod output;
mod runners;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bench_states::Algorithm;
use crate::error::{CqecError, Result};
use crate::noise::NoiseSpec;
use crate::recovery::CatalystSource;

pub use output::{
    canonical_json, content_hash, fmt_number, to_csv, verify_file, write_outputs, ExperimentResult, OutputFormat,
    Provenance, RowFailure, VerifyReport, SCHEMA_VERSION,
};

/// Largest system dimension the recovery optimizer is run on.
pub const MAX_RECOVERY_DIM: usize = 16;
/// Polish iterations used by default up to [`POLISH_MAX_DIM`]; larger systems skip the polish.
pub const DEFAULT_POLISH: usize = 200;
pub const POLISH_MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Threshold,
    NoiseSweep,
    QecCompare,
    DdSweep,
    PipelineCompare,
    Scaling,
    Durability,
    CatalystPrep,
    Protocol,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Threshold,
        ExperimentKind::NoiseSweep,
        ExperimentKind::QecCompare,
        ExperimentKind::DdSweep,
        ExperimentKind::PipelineCompare,
        ExperimentKind::Scaling,
        ExperimentKind::Durability,
        ExperimentKind::CatalystPrep,
        ExperimentKind::Protocol,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::QecCompare => "qec-compare",
            ExperimentKind::DdSweep => "dd-sweep",
            ExperimentKind::PipelineCompare => "pipeline-compare",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Durability => "durability",
            ExperimentKind::CatalystPrep => "catalyst-prep",
            ExperimentKind::Protocol => "protocol",
        }
    }

    fn default_algorithm(self) -> Algorithm {
        match self {
            ExperimentKind::Durability | ExperimentKind::PipelineCompare => Algorithm::QDrift,
            ExperimentKind::QecCompare => Algorithm::CfQpe,
            _ => Algorithm::Qkan,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CqecError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CqecError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Noise family scanned by the noise sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepNoise {
    Dephasing,
    Depolarizing,
}

impl FromStr for SweepNoise {
    type Err = CqecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(SweepNoise::Dephasing),
            "depolarizing" => Ok(SweepNoise::Depolarizing),
            _ => Err(CqecError::Config(format!("unknown sweep noise '{s}'"))),
        }
    }
}

/// One experiment run. Unset options take per-experiment defaults in [`ExperimentConfig::resolve`];
/// result files always carry the resolved form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_noise: Option<SweepNoise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalyst: Option<CatalystSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Quasi-Newton iterations after each simplex run of the recovery optimizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polish_iter: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            algorithm: None,
            ansatz_depth: None,
            points: None,
            sweep_noise: None,
            noise: None,
            catalyst: None,
            cycles: None,
            max_rounds: None,
            dims: None,
            polish_iter: None,
        }
    }

    /// Fills defaults, drops options the experiment ignores and validates ranges.
    pub fn resolve(&self) -> Result<Self> {
        use ExperimentKind as K;
        let k = self.experiment;
        let cfg_err = |m: String| Err(CqecError::Config(m));
        let mut r = ExperimentConfig::new(k, self.seed);
        let uses_algorithm = matches!(k, K::NoiseSweep | K::QecCompare | K::PipelineCompare | K::Durability | K::Protocol);
        let uses_depth = matches!(k, K::Threshold | K::NoiseSweep | K::QecCompare | K::Durability | K::Protocol);
        let uses_catalyst = matches!(k, K::NoiseSweep | K::Durability | K::Protocol);
        if uses_algorithm {
            r.algorithm = Some(self.algorithm.unwrap_or(k.default_algorithm()));
        }
        if uses_depth {
            let depth = self.ansatz_depth.unwrap_or(2);
            if !(1..=3).contains(&depth) {
                return cfg_err(format!("ansatz depth {depth} outside 1..=3"));
            }
            r.ansatz_depth = Some(depth);
            let d = match k {
                K::Threshold => 4,
                _ => r.algorithm.map_or(4, Algorithm::dim),
            };
            r.polish_iter = Some(self.polish_iter.unwrap_or(if d <= POLISH_MAX_DIM { DEFAULT_POLISH } else { 0 }));
        }
        if uses_catalyst {
            r.catalyst = Some(self.catalyst.unwrap_or(CatalystSource::Variational));
        }
        match k {
            K::Threshold => r.points = Some(self.points.unwrap_or(30)),
            K::NoiseSweep => {
                r.points = Some(self.points.unwrap_or(20));
                r.sweep_noise = Some(self.sweep_noise.unwrap_or(SweepNoise::Dephasing));
            }
            K::PipelineCompare => {
                let rounds = self.max_rounds.unwrap_or(6);
                if !(1..=20).contains(&rounds) {
                    return cfg_err(format!("max_rounds {rounds} outside 1..=20"));
                }
                r.max_rounds = Some(rounds);
            }
            K::Durability => {
                r.cycles = Some(self.cycles.unwrap_or(100));
                r.noise = Some(self.noise.unwrap_or(NoiseSpec::DephasingDepolarizing { gamma: 1.5, p: 0.2 }));
            }
            K::CatalystPrep => {
                let dims = self.dims.clone().unwrap_or_else(|| vec![4, 8, 16]);
                if dims.is_empty() || dims.iter().any(|&d| d < 2 || !d.is_power_of_two() || d > MAX_RECOVERY_DIM) {
                    return cfg_err(format!("catalyst dims {dims:?} must be powers of two in 2..=16"));
                }
                r.dims = Some(dims);
            }
            K::Protocol => r.noise = Some(self.noise.unwrap_or(NoiseSpec::Dephasing { gamma: 2.0 })),
            K::QecCompare | K::DdSweep | K::Scaling => {}
        }
        if let Some(n) = r.points {
            if n == 0 || n > 1000 {
                return cfg_err(format!("grid points {n} outside 1..=1000"));
            }
        }
        if r.cycles == Some(0) {
            return cfg_err("cycles must be positive".into());
        }
        if let Some(noise) = &r.noise {
            noise.validate().map_err(|e| CqecError::Config(e.to_string()))?;
        }
        Ok(r)
    }
}

/// A row's cells in column order, or the reason it failed.
pub(crate) type RowOutcome = std::result::Result<Vec<Value>, String>;

pub(crate) struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<RowOutcome>,
    /// Cells of a failed row; `None` leaves every cell null.
    pub key_of_failed: Vec<Vec<Value>>,
    pub metadata: Map<String, Value>,
}

/// Runs an experiment. Row failures are recorded in the result, not returned as errors.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let cfg = config.resolve()?;
    let table = runners::dispatch(&cfg)?;
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut failures = Vec::new();
    for (i, row) in table.rows.into_iter().enumerate() {
        let cells = match row {
            Ok(cells) => cells,
            Err(message) => {
                failures.push(RowFailure { index: i, message });
                let mut cells = table.key_of_failed.get(i).cloned().unwrap_or_default();
                cells.resize(table.columns.len(), Value::Null);
                cells
            }
        };
        debug_assert_eq!(cells.len(), table.columns.len());
        let mut obj = Map::new();
        for (c, v) in table.columns.iter().zip(cells) {
            obj.insert((*c).to_string(), v);
        }
        rows.push(obj);
    }
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION.to_string(),
        config: cfg,
        columns: table.columns.iter().map(|c| c.to_string()).collect(),
        rows,
        failures,
        metadata: table.metadata,
        provenance: Provenance::current(),
        content_hash: None,
    })
}
