//! Seeded replication engine: expectation estimates with standard errors,
//! empirical tail curves with exact-binomial confidence bands,
//! bound-domination verdicts and convex-order checks.
//!
//! Replicates are independent tasks keyed by stream id; per-replicate values
//! are collected in replicate order and reduced sequentially, so whole-run
//! output is bit-identical for equal `(config, seed)` regardless of worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::family::{ConvexTestFunction, VectorFamily};
use crate::oracle::ExactDistribution;
use crate::sampling::{draw_permutation, draw_with_replacement, SeedSpec};
use crate::stats::{apply_test_function, eval_z, eval_zprime};
use crate::bounds::TailBound;

/// A Monte Carlo scalar estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    /// Sample standard deviation divided by √n_reps.
    pub std_error: f64,
    pub n_reps: usize,
}

/// An empirical survival curve `t ↦ P(X ≥ center - center_se + t)` with
/// one-sided exact-binomial upper confidence limits (Bonferroni across the
/// grid at total level `1 - delta`).
///
/// When the center is itself estimated, its standard error is folded in by
/// shifting the exceedance threshold down by one SE, which can only enlarge
/// the reported survival — the conservative direction for bound checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub grid: Vec<f64>,
    pub survival: Vec<f64>,
    pub upper_ci: Vec<f64>,
    pub center: f64,
    pub center_se: f64,
    pub delta: f64,
    pub n_reps: usize,
}

impl TailCurve {
    /// A zero-width curve from an exact distribution (oracle tails).
    pub fn from_exact(dist: &ExactDistribution, center: f64, grid: &[f64]) -> Result<Self> {
        validate_grid(grid)?;
        let survival: Vec<f64> = grid.iter().map(|&t| dist.survival(center + t)).collect();
        Ok(TailCurve {
            grid: grid.to_vec(),
            upper_ci: survival.clone(),
            survival,
            center,
            center_se: 0.0,
            delta: 0.0,
            n_reps: 0,
        })
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid must be nonempty"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi <= lo {
        return Err(Error::invalid(format!(
            "log grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if count < 2 {
        return Err(Error::invalid("log grid needs at least 2 points"));
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// The default deviation grid: 32 log-spaced points from
/// `0.1 √(E Σ² + 1)` to the statistic's maximal range.
pub fn default_grid(esigma2: f64, max_range: f64) -> Result<Vec<f64>> {
    let lo = 0.1 * (esigma2.max(0.0) + 1.0).sqrt();
    let hi = max_range.max(lo * 2.0);
    log_grid(lo, hi, 32)
}

/// Evaluate one replicate per stream id and collect values in replicate
/// order. The only entry point that runs statistics in parallel.
fn run_replicates<F>(statistic: F, n_reps: usize, seed: SeedSpec) -> Result<Vec<f64>>
where
    F: Fn(SeedSpec) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| statistic(seed.replicate(rep)))
        .collect();
    results.into_iter().collect()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = values.len() as f64;
    let var = (m2 / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Empirical mean and standard error of a seeded statistic over `n_reps`
/// replicates (stream ids `seed.stream_id .. + n_reps`).
pub fn estimate_expectation<F>(
    statistic: F,
    n_reps: usize,
    seed: SeedSpec,
) -> Result<EstimateWithError>
where
    F: Fn(SeedSpec) -> Result<f64> + Sync,
{
    if n_reps < 2 {
        return Err(Error::invalid("n_reps must be at least 2"));
    }
    let values = run_replicates(statistic, n_reps, seed)?;
    let (mean, std_error) = mean_and_se(&values);
    Ok(EstimateWithError {
        mean,
        std_error,
        n_reps,
    })
}

/// One-sided Clopper–Pearson upper confidence limit for a binomial
/// proportion at error budget `delta`: the exact-binomial value
/// `BetaInv(1 - delta; k + 1, n - k)` (1 when `k = n`;
/// `1 - delta^{1/n}` when `k = 0`).
pub fn clopper_pearson_upper(successes: usize, trials: usize, delta: f64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if successes > trials {
        return Err(Error::invalid("successes exceed trials"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    if successes == trials {
        return Ok(1.0);
    }
    let beta = Beta::new((successes + 1) as f64, (trials - successes) as f64)
        .map_err(|e| Error::invalid(format!("beta quantile: {e}")))?;
    Ok(beta.inverse_cdf(1.0 - delta))
}

/// Empirical tail curve of a seeded statistic: exceedance frequencies of
/// `center - center_se + t` per grid `t`, with Clopper–Pearson upper limits
/// at per-point budget `delta / grid.len()`.
pub fn estimate_tail<F>(
    statistic: F,
    center: f64,
    center_se: f64,
    grid: &[f64],
    n_reps: usize,
    delta: f64,
    seed: SeedSpec,
) -> Result<TailCurve>
where
    F: Fn(SeedSpec) -> Result<f64> + Sync,
{
    validate_grid(grid)?;
    if n_reps == 0 {
        return Err(Error::invalid("n_reps must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    if !center.is_finite() || !center_se.is_finite() || center_se < 0.0 {
        return Err(Error::invalid("center must be finite, center_se >= 0"));
    }
    let mut values = run_replicates(statistic, n_reps, seed)?;
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic values"));
    let per_point_delta = delta / grid.len() as f64;
    let mut survival = Vec::with_capacity(grid.len());
    let mut upper_ci = Vec::with_capacity(grid.len());
    for &t in grid {
        let threshold = center - center_se + t;
        let below = values.partition_point(|&v| v < threshold);
        let exceed = n_reps - below;
        survival.push(exceed as f64 / n_reps as f64);
        upper_ci.push(clopper_pearson_upper(exceed, n_reps, per_point_delta)?);
    }
    // isotonic pass; exceedance counts over one sample are already
    // nonincreasing, so this only irons out representation noise
    for i in 1..survival.len() {
        survival[i] = survival[i].min(survival[i - 1]);
        upper_ci[i] = upper_ci[i].min(upper_ci[i - 1]);
    }
    Ok(TailCurve {
        grid: grid.to_vec(),
        survival,
        upper_ci,
        center,
        center_se,
        delta,
        n_reps,
    })
}

/// Outcome of comparing an empirical tail curve against a closed-form bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationVerdict {
    pub bound_name: String,
    /// True iff `upper_ci(t) ≤ bound(t)` at every grid point where the
    /// bound is informative (`< 1`). Vacuously true when there is none.
    pub pass: bool,
    pub worst_t: Option<f64>,
    pub worst_margin: Option<f64>,
    pub checked_points: usize,
}

/// Check `upper_ci(t) ≤ bound(t)` over the curve's grid wherever the bound
/// is below 1.
pub fn check_domination(curve: &TailCurve, bound: &TailBound) -> DominationVerdict {
    let mut pass = true;
    let mut worst: Option<(f64, f64)> = None;
    let mut checked = 0;
    for (&t, &ci) in curve.grid.iter().zip(&curve.upper_ci) {
        let b = bound.eval(t);
        if b >= 1.0 {
            continue;
        }
        checked += 1;
        let margin = ci - b;
        if margin > 0.0 {
            pass = false;
        }
        if worst.map_or(true, |(_, m)| margin > m) {
            worst = Some((t, margin));
        }
    }
    DominationVerdict {
        bound_name: bound.name().to_string(),
        pass,
        worst_t: worst.map(|(t, _)| t),
        worst_margin: worst.map(|(_, m)| m),
        checked_points: checked,
    }
}

/// Per-test-function outcome of the convex-order check
/// `E φ(Z) ≤ E φ(Z')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexOrderVerdict {
    pub phi: ConvexTestFunction,
    pub e_phi_z: EstimateWithError,
    pub e_phi_zprime: EstimateWithError,
    /// True iff `Ê φ(Z) ≤ Ê φ(Z') + 4·√(SE_Z² + SE_Z'²)`.
    pub pass: bool,
    /// `Ê φ(Z') + 4·SE - Ê φ(Z)`; nonnegative when passing.
    pub slack: f64,
}

/// Monte Carlo check of the convex ordering between the two sampling
/// schemes: draws `Z` and `Z'` from paired replicates and compares
/// `E φ(Z)` against `E φ(Z')` for each test function.
pub fn check_convex_order(
    family: &VectorFamily,
    m: usize,
    phis: &[ConvexTestFunction],
    n_reps: usize,
    seed: SeedSpec,
) -> Result<Vec<ConvexOrderVerdict>> {
    if n_reps < 2 {
        return Err(Error::invalid("n_reps must be at least 2"));
    }
    let n = family.n();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m = {m}")));
    }
    let pairs: Vec<Result<(f64, f64)>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let s = seed.replicate(rep);
            let perm = draw_permutation(n, s)?;
            let repl = draw_with_replacement(n, m, s)?;
            Ok((
                eval_z(family, m, &perm)?.value,
                eval_zprime(family, &repl)?.value,
            ))
        })
        .collect();
    let pairs: Vec<(f64, f64)> = pairs.into_iter().collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(phis.len());
    for &phi in phis {
        let z_vals: Vec<f64> = pairs.iter().map(|&(z, _)| apply_test_function(phi, z)).collect();
        let zp_vals: Vec<f64> = pairs.iter().map(|&(_, zp)| apply_test_function(phi, zp)).collect();
        let (mz, sz) = mean_and_se(&z_vals);
        let (mzp, szp) = mean_and_se(&zp_vals);
        let slack = mzp + 4.0 * (sz * sz + szp * szp).sqrt() - mz;
        out.push(ConvexOrderVerdict {
            phi,
            e_phi_z: EstimateWithError {
                mean: mz,
                std_error: sz,
                n_reps,
            },
            e_phi_zprime: EstimateWithError {
                mean: mzp,
                std_error: szp,
                n_reps,
            },
            pass: slack >= 0.0,
            slack,
        });
    }
    Ok(out)
}

/// Exact population variance of `x_{J_1}` for a single vector:
/// `(1/n) Σ x_i² - ((1/n) Σ x_i)²`. The caller assembles the TBK parameter
/// `v = m · sup_x Var(x_{J_1}) + 2 E Z'`.
pub fn estimate_variance_of_index(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    (mean_sq - mean * mean).max(0.0)
}
