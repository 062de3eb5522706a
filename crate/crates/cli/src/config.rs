//! Per-subcommand configuration files. Every block rejects unknown fields
//! and is fully parsed before any computation starts.

use std::path::Path;

use hclab::constructor::{ScheduleSource, SynthesisOptions};
use hclab::criteria::BasicOptions;
use hclab::paramsets::ParamSet;
use hclab::probes::{CellOrdering, GaugeFn, ParamGrid, PowerScale};
use hclab::schedule::{AdaptiveParams, CoveringParams, LipschitzParams, RecursionParams, Schedule};
use hclab::seqspace::{Norm, TruncatedVector, WeightFamily};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::output::{io_failure, Failure, RunContext};

/// Reads and validates a configuration file; returns the typed config and
/// its raw JSON for the report.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, serde_json::Value), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let typed = serde_json::from_value(raw.clone())
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok((typed, raw))
}

/// Replaces a curve's `sample_file` reference by the vertices it lists
/// (one point per CSV row, no header), then validates the set.
pub fn resolve_set(set: &ParamSet, ctx: &RunContext) -> Result<ParamSet, Failure> {
    let Some(file) = &set.sample_file else {
        set.validate()?;
        return Ok(set.clone());
    };
    let path = ctx.resolve(file);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| io_failure(&path, e))?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_failure(&path, e))?;
        let point = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| Failure::Config(format!("{} row {}: {e}", path.display(), i + 1)))?;
        points.push(point);
    }
    let set = set.clone().with_curve_points(points)?;
    set.validate()?;
    Ok(set)
}

/// A d-tuple of coefficient arrays under a common norm.
pub fn tuple(coords: &[Vec<f64>], norm: Norm) -> Result<Vec<TruncatedVector>, Failure> {
    coords
        .iter()
        .map(|c| TruncatedVector::new(c.clone(), norm).map_err(Failure::from))
        .collect()
}

fn sup() -> Norm {
    Norm::Sup
}

#[derive(Debug, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    /// The lexicographic recursion alone.
    Sequence { params: RecursionParams },
    /// Covering lemma solver over a parameter set.
    Covering {
        set: ParamSet,
        params: CoveringParams,
    },
    /// Arithmetic-time schedule along a curve.
    Lipschitz {
        set: ParamSet,
        params: LipschitzParams,
    },
    /// Adaptive curve schedule for an affine weight family.
    Adaptive {
        set: ParamSet,
        weights: WeightFamily,
        params: AdaptiveParams,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub set: ParamSet,
    /// Depth `m` of the covering `{Λ_k : k ∈ I_r^m}`.
    pub depth: usize,
    /// Depths for an optional box-dimension fit.
    #[serde(default)]
    pub box_depths: Vec<usize>,
}

/// Either a single schedule or a list (as written by `schedule`).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScheduleInput {
    One(Box<Schedule>),
    Many(Vec<Schedule>),
}

impl ScheduleInput {
    pub fn into_vec(self) -> Vec<Schedule> {
        match self {
            ScheduleInput::One(s) => vec![*s],
            ScheduleInput::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    /// Coverage by `[λ_k − τ/n_k, λ_k]` boxes and consecutive gaps.
    Caracstandard {
        tau: f64,
        spacing: u64,
        /// Set to cover; defaults to the schedule's own set.
        #[serde(default)]
        set: Option<ParamSet>,
    },
    /// Pairwise gap condition with exponent `alpha`.
    Walpha { alpha: f64, spacing: u64 },
    /// General weighted criterion with scale `F(n) = n^scale_exponent`.
    General {
        weights: WeightFamily,
        tau: f64,
        spacing: u64,
        eps: f64,
        #[serde(default = "one")]
        scale_exponent: f64,
        #[serde(default = "sup")]
        norm: Norm,
    },
    /// The five-clause basic criterion for the vectors `u`, `v`.
    Basic {
        weights: WeightFamily,
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        eps: f64,
        #[serde(default = "sup")]
        norm: Norm,
        #[serde(default)]
        options: BasicOptions,
    },
}

fn one() -> f64 {
    1.0
}

/// Seeded sweep comparing the pairwise and consecutive gap conditions at
/// exponent 1 on random schedules.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub count: usize,
    #[serde(default = "default_max_entries")]
    pub max_entries: usize,
    #[serde(default = "default_sweep_spacing")]
    pub spacing: u64,
}

fn default_max_entries() -> usize {
    50
}

fn default_sweep_spacing() -> u64 {
    10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Path (relative to the config) of a schedule JSON file.
    #[serde(default)]
    pub schedule_file: Option<String>,
    /// Inline schedule, used when no file is given.
    #[serde(default)]
    pub schedule: Option<ScheduleInput>,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    pub weights: WeightFamily,
    pub set: ParamSet,
    pub eps: f64,
    #[serde(default = "sup")]
    pub norm: Norm,
    /// Initial vector `u`, one coefficient array per coordinate.
    pub initial: Vec<Vec<f64>>,
    /// One d-tuple of coefficient arrays per round.
    pub targets: Vec<Vec<Vec<f64>>>,
    pub source: ScheduleSource,
    #[serde(default)]
    pub options: SynthesisOptions,
    #[serde(default = "default_verify_samples")]
    pub verify_samples: usize,
}

fn default_verify_samples() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationPair {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeCase {
    pub phi: GaugeFn,
    pub psi: PowerScale,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeConfig {
    /// Lower bound on the orbit separation of two parameters.
    Separation {
        weights: WeightFamily,
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        delta: f64,
        pairs: Vec<SeparationPair>,
        #[serde(default = "sup")]
        norm: Norm,
    },
    /// Diameter of the parameters whose orbit point is `delta`-close to `v`.
    Diameter {
        weights: WeightFamily,
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        delta: f64,
        times: Vec<usize>,
        grid: ParamGrid,
        #[serde(default = "sup")]
        norm: Norm,
    },
    /// Convergence class of gauge series.
    Gauge {
        cases: Vec<GaugeCase>,
        delta: f64,
        n_max: u64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingsConfig {
    pub m: usize,
    pub alpha: f64,
    pub spacing: u64,
    #[serde(default)]
    pub n1: Option<u64>,
    #[serde(default)]
    pub d_const: Option<f64>,
    #[serde(default)]
    pub slack: Option<f64>,
    #[serde(default = "all_orderings")]
    pub orderings: Vec<CellOrdering>,
}

fn all_orderings() -> Vec<CellOrdering> {
    vec![
        CellOrdering::First,
        CellOrdering::Second,
        CellOrdering::Third,
    ]
}
