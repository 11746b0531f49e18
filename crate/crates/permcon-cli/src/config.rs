//! Run configuration: a single JSON document, with command-line flags
//! overriding file fields.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use permcon::family::{MatrixFamily, VectorFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Log { min: f64, max: f64, points: usize },
    Explicit { values: Vec<f64> },
}

impl GridSpec {
    pub fn materialize(&self) -> Result<Vec<f64>, permcon::Error> {
        match self {
            GridSpec::Explicit { values } => Ok(values.clone()),
            GridSpec::Log { min, max, points } => {
                permcon::montecarlo::log_grid(*min, *max, *points)
            }
        }
    }
}

/// Instance parameters for the `scenario` command and for scenario-backed
/// statistics: either a recipe (`n`, `epsilon`) or explicit `n, m, k, l`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    /// Randomize set placement under this stream of the master seed.
    pub placement_stream: Option<u64>,
}

/// The resolved run configuration. Everything the run needs is in here;
/// reports embed it verbatim.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,

    /// Inline vector family, or a path to one.
    pub family: Option<VectorFamily>,
    pub family_path: Option<PathBuf>,
    /// Inline matrix family, or a path to one.
    pub matrix: Option<MatrixFamily>,
    pub matrix_path: Option<PathBuf>,

    /// Without-replacement draw count for vector-family statistics.
    pub m: Option<usize>,
    /// One of z | zprime | sigma2 | sigma2_tilde | s | w.
    pub statistic: Option<String>,
    pub grid: Option<GridSpec>,
    /// Deviation center for `tail`; estimated when absent.
    pub center: Option<f64>,
    pub bounds: Option<Vec<String>>,
    /// Named scalar parameters for the `bounds` command.
    pub params: BTreeMap<String, f64>,
    /// Caller's assertion of the zero-sum hypothesis for bennett_hoeffding.
    pub zero_sum: Option<bool>,
    /// λ for the oracle entropy check.
    pub lambda: Option<f64>,
    pub scenario: Option<ScenarioSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn reps(&self) -> usize {
        self.reps.unwrap_or(100_000)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.001)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Json)
    }

    /// The vector family, inline or from `family_path`.
    pub fn vector_family(&self) -> Result<Option<VectorFamily>, String> {
        if let Some(f) = &self.family {
            return Ok(Some(f.clone()));
        }
        if let Some(p) = &self.family_path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read family {}: {e}", p.display()))?;
            let fam: VectorFamily = serde_json::from_str(&text)
                .map_err(|e| format!("invalid family {}: {e}", p.display()))?;
            return Ok(Some(fam));
        }
        Ok(None)
    }

    /// The matrix family, inline or from `matrix_path`.
    pub fn matrix_family(&self) -> Result<Option<MatrixFamily>, String> {
        if let Some(m) = &self.matrix {
            return Ok(Some(m.clone()));
        }
        if let Some(p) = &self.matrix_path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read matrix {}: {e}", p.display()))?;
            let fam: MatrixFamily = serde_json::from_str(&text)
                .map_err(|e| format!("invalid matrix {}: {e}", p.display()))?;
            return Ok(Some(fam));
        }
        Ok(None)
    }
}
