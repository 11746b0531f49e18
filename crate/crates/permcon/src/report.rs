//! Plot-ready CSV and structured JSON report emission.
//!
//! Floats in CSV are rendered with 17 significant digits so values
//! round-trip bit-exactly. File writes are atomic (temp file in the target
//! directory, then rename). Reports embed the resolved configuration, the
//! master seed and a content digest so a run can be reproduced from its
//! output alone.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::TailBound;
use crate::error::{Error, Result};
use crate::montecarlo::TailCurve;
use crate::oracle::ExactDistribution;

/// Render a float with 17 significant digits (round-trip exact for f64).
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Write bytes atomically: temp file alongside the target, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|f| f.to_str()).unwrap_or("out")
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().and_then(|f| f.to_str()).unwrap_or("out")
        ))
        .to_path_buf(),
    };
    let io = |e: std::io::Error| Error::invalid(format!("write {}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

/// Provenance block embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    /// SHA-256 of the canonical resolved-configuration JSON.
    pub config_digest: String,
}

impl Provenance {
    pub fn new(config_json: &serde_json::Value, master_seed: u64) -> Self {
        let canonical = serde_json::to_string(config_json).unwrap_or_default();
        let digest = Sha256::digest(canonical.as_bytes());
        Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            config_digest: format!("sha256:{digest:x}"),
        }
    }
}

/// A structured JSON report: provenance + resolved config + results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub provenance: Provenance,
    pub config: serde_json::Value,
    pub results: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(config: serde_json::Value, master_seed: u64, results: T) -> Self {
        Report {
            provenance: Provenance::new(&config, master_seed),
            config,
            results,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("serialize report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_json_string()?.as_bytes())
    }
}

/// CSV rows `t, survival, upper_ci` for a tail curve.
pub fn tail_curve_csv(curve: &TailCurve) -> String {
    let mut out = String::from("t,survival,upper_ci\n");
    for ((t, s), u) in curve.grid.iter().zip(&curve.survival).zip(&curve.upper_ci) {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_float(*t),
            fmt_float(*s),
            fmt_float(*u)
        ));
    }
    out
}

/// CSV rows `bound_name, t, value, params_json` for bound evaluations on a
/// grid.
pub fn bounds_csv(bounds: &[TailBound], grid: &[f64]) -> String {
    let mut out = String::from("bound_name,t,value,params_json\n");
    for bound in bounds {
        let params = serde_json::to_string(&bound.params()).unwrap_or_default();
        for &t in grid {
            out.push_str(&format!(
                "{},{},{},\"{}\"\n",
                bound.name(),
                fmt_float(t),
                fmt_float(bound.eval(t)),
                params.replace('"', "\"\"")
            ));
        }
    }
    out
}

/// CSV rows `value, prob` for an exact distribution.
pub fn distribution_csv(dist: &ExactDistribution) -> String {
    let mut out = String::from("value,prob\n");
    for (v, p) in dist.support.iter().zip(&dist.probs) {
        out.push_str(&format!("{},{}\n", fmt_float(*v), fmt_float(*p)));
    }
    out
}
