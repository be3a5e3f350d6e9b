//! Declarative study configuration, read from JSON or TOML.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dgm::{expand_grid, FactorGrid, GridPoint, Mechanism};
use crate::error::{Error, Result};
use crate::estimators::FitSettings;
use crate::perf::Measure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    pub seed: u64,
    pub n_sim: u64,
    pub dgm: DgmConfig,
    pub methods: Vec<MethodConfig>,
    pub estimands: Vec<EstimandConfig>,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    /// Method against which relative precision is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparator: Option<String>,
    #[serde(default)]
    pub streams: StreamPolicy,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_measures() -> Vec<Measure> {
    vec![
        Measure::ConvergencePct,
        Measure::Bias,
        Measure::Empse,
        Measure::Mse,
        Measure::AvgModse,
        Measure::RelErrModse,
        Measure::Coverage,
        Measure::BeCoverage,
        Measure::RejectionPct,
    ]
}

/// A base mechanism plus an optional grid of factors varied over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgmConfig {
    pub base: Mechanism,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<FactorGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    ExponentialPh,
    WeibullPh,
    CoxPh,
    NormalMeanT,
}

impl MethodKind {
    pub fn needs_survival_data(self) -> bool {
        !matches!(self, MethodKind::NormalMeanT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub id: String,
    pub kind: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

impl MethodConfig {
    pub fn settings(&self, targets: &Targets) -> FitSettings {
        let d = FitSettings::default();
        FitSettings {
            alpha: targets.alpha,
            null_value: targets.null_value,
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueValueRule {
    /// The parameter the mechanism is built from.
    FromDgm,
    /// Fit a method to one very large simulated dataset.
    EstimateBySimulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrueValue {
    Fixed(f64),
    Rule(TrueValueRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimandConfig {
    pub id: String,
    pub true_value: TrueValue,
    /// Dataset size for `estimate_by_simulation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    /// Method fitted to the large dataset; defaults to the first method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_method: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Null hypothesis value for p-values and rejection rates.
    #[serde(default)]
    pub null_value: f64,
}

fn default_alpha() -> f64 {
    0.05
}

impl Default for Targets {
    fn default() -> Self {
        Targets {
            alpha: 0.05,
            null_value: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamPolicy {
    #[default]
    PerDgm,
    /// Repetitions split into contiguous chunks, each on its own stream.
    PerChunk { chunks: u64 },
}

impl fmt::Display for StreamPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamPolicy::PerDgm => f.write_str("per_dgm"),
            StreamPolicy::PerChunk { chunks } => write!(f, "per_chunk:{chunks}"),
        }
    }
}

impl FromStr for StreamPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "per_dgm" {
            return Ok(StreamPolicy::PerDgm);
        }
        if let Some(n) = s.strip_prefix("per_chunk:") {
            let chunks = n
                .parse()
                .map_err(|_| Error::config(format!("bad chunk count in `{s}`")))?;
            return Ok(StreamPolicy::PerChunk { chunks });
        }
        Err(Error::config(format!(
            "unknown stream policy `{s}` (expected per_dgm or per_chunk:K)"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Compute performance measures right after the run.
    #[serde(default = "yes")]
    pub analyze: bool,
    /// Write every simulated dataset as CSV.
    #[serde(default)]
    pub export_datasets: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            analyze: true,
            export_datasets: false,
        }
    }
}

/// One expanded data-generating mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct DgmInstance {
    pub id: String,
    pub point: GridPoint,
    pub mechanism: Mechanism,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains([',', '"', '\n', '\r'])
}

impl StudyConfig {
    /// Reads a config file; `.toml` files are TOML, anything else JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let cfg = if is_toml {
            Self::from_toml(&text)?
        } else {
            Self::from_json(&text)?
        };
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: StudyConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text).map_err(|e| Error::config(format!("TOML: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("sha256:{}", hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sim == 0 {
            return Err(Error::config("n_sim must be at least 1"));
        }
        if !valid_id(&self.name) {
            return Err(Error::config("name must be non-empty without commas or quotes"));
        }
        if !(self.targets.alpha > 0.0 && self.targets.alpha < 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1), got {}", self.targets.alpha)));
        }
        if !self.targets.null_value.is_finite() {
            return Err(Error::config("null_value must be finite"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("at least one method is required"));
        }
        let mut ids = HashSet::new();
        for m in &self.methods {
            if !valid_id(&m.id) {
                return Err(Error::config(format!("invalid method id `{}`", m.id)));
            }
            if !ids.insert(m.id.as_str()) {
                return Err(Error::config(format!("duplicate method id `{}`", m.id)));
            }
            if let Some(t) = m.tolerance {
                if !(t > 0.0) {
                    return Err(Error::config(format!("method `{}`: tolerance must be > 0", m.id)));
                }
            }
            if m.max_iter == Some(0) {
                return Err(Error::config(format!("method `{}`: max_iter must be >= 1", m.id)));
            }
            if m.kind.needs_survival_data() != self.dgm.base.is_survival() {
                return Err(Error::config(format!(
                    "method `{}` ({:?}) does not fit the {} mechanism",
                    m.id,
                    m.kind,
                    if self.dgm.base.is_survival() { "survival" } else { "numeric" }
                )));
            }
        }
        if self.estimands.is_empty() {
            return Err(Error::config("at least one estimand is required"));
        }
        let mut eids = HashSet::new();
        for e in &self.estimands {
            if !valid_id(&e.id) {
                return Err(Error::config(format!("invalid estimand id `{}`", e.id)));
            }
            if !eids.insert(e.id.as_str()) {
                return Err(Error::config(format!("duplicate estimand id `{}`", e.id)));
            }
            match e.true_value {
                TrueValue::Fixed(v) if !v.is_finite() => {
                    return Err(Error::config(format!("estimand `{}`: true value must be finite", e.id)))
                }
                TrueValue::Rule(TrueValueRule::EstimateBySimulation) => {
                    if e.big_n.unwrap_or(0) == 0 {
                        return Err(Error::config(format!(
                            "estimand `{}`: estimate_by_simulation needs big_n >= 1",
                            e.id
                        )));
                    }
                }
                _ => {}
            }
            if let Some(m) = &e.truth_method {
                if !ids.contains(m.as_str()) {
                    return Err(Error::config(format!("estimand `{}`: unknown truth_method `{m}`", e.id)));
                }
            }
        }
        if self.measures.is_empty() {
            return Err(Error::config("at least one performance measure is required"));
        }
        if self.measures.contains(&Measure::RelPrecision) {
            match &self.comparator {
                None => return Err(Error::config("rel_precision requires a comparator method")),
                Some(c) if !ids.contains(c.as_str()) => {
                    return Err(Error::config(format!("unknown comparator `{c}`")))
                }
                _ => {}
            }
        }
        if let StreamPolicy::PerChunk { chunks } = self.streams {
            if chunks == 0 || chunks > self.n_sim {
                return Err(Error::config(format!(
                    "per_chunk needs 1 <= chunks <= n_sim, got {chunks}"
                )));
            }
        }
        self.dgm.base.validate().map_err(|e| Error::config(format!("base mechanism: {e}")))?;
        self.dgms()?;
        Ok(())
    }

    /// Expands the grid into concrete mechanisms in run order.
    pub fn dgms(&self) -> Result<Vec<DgmInstance>> {
        let points = match &self.dgm.grid {
            Some(grid) => expand_grid(grid)?,
            None => vec![GridPoint { levels: Vec::new() }],
        };
        let mut seen = HashSet::new();
        points
            .into_iter()
            .map(|point| {
                let mut mechanism = self.dgm.base.clone();
                for (name, value) in &point.levels {
                    mechanism.set_factor(name, *value)?;
                }
                let id = point.id();
                mechanism
                    .validate()
                    .map_err(|e| Error::config(format!("dgm `{id}`: {e}")))?;
                if !seen.insert(id.clone()) {
                    return Err(Error::config(format!("dgm `{id}` appears twice in the grid")));
                }
                Ok(DgmInstance { id, point, mechanism })
            })
            .collect()
    }

    pub fn method(&self, id: &str) -> Option<&MethodConfig> {
        self.methods.iter().find(|m| m.id == id)
    }

    /// Stream ids used by the main run, one list per DGM.
    pub fn stream_ids(&self, dgm_index: usize) -> Vec<u64> {
        match self.streams {
            StreamPolicy::PerDgm => vec![dgm_index as u64],
            StreamPolicy::PerChunk { chunks } => {
                (0..chunks).map(|c| dgm_index as u64 * chunks + c).collect()
            }
        }
    }

    /// Number of streams reserved by the main run across all DGMs.
    pub fn main_stream_count(&self, n_dgms: usize) -> u64 {
        let per = match self.streams {
            StreamPolicy::PerDgm => 1,
            StreamPolicy::PerChunk { chunks } => chunks,
        };
        n_dgms as u64 * per
    }
}
