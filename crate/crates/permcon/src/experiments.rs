//! The comparison experiment: estimate the four expectation parameters of a
//! family (`E Z`, `E Z'`, `E Σ²`, `E Σ̃²`), the TBK variance proxy `v` and
//! the scheme gap, measure the empirical tail of `Z` about its estimated
//! mean, evaluate selected closed-form bounds on the same deviation grid,
//! and report domination verdicts plus triviality flags.

use serde::{Deserialize, Serialize};

use crate::bounds::TailBound;
use crate::error::{Error, Result};
use crate::family::{VectorFamily, VectorKind};
use crate::montecarlo::{
    check_domination, default_grid, estimate_expectation, estimate_tail,
    estimate_variance_of_index, DominationVerdict, EstimateWithError, TailCurve,
};
use crate::sampling::{draw_permutation, draw_with_replacement, SeedSpec};
use crate::stats::{eval_sigma2, eval_sigma2_tilde, eval_z, eval_zprime};

/// Stream spacing between experiment phases run under one master seed.
/// Replicate counts must stay below this stride.
pub const PHASE_STRIDE: u64 = 1 << 32;

/// Options for [`compare_family`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Without-replacement draw count (`m ≤ n`).
    pub m: usize,
    pub n_reps: usize,
    /// Total one-sided error budget across the grid.
    pub delta: f64,
    /// Deviation grid; when absent, 32 log-spaced points from
    /// `0.1 √(Ê Σ² + 1)` to the family's maximal `Z`-range.
    pub grid: Option<Vec<f64>>,
    /// Bound names: `bennett_suprema`, `bernstein_suprema`, `tbk_recentered`.
    pub bounds: Vec<String>,
    pub seed: SeedSpec,
}

impl CompareOptions {
    pub fn new(m: usize, n_reps: usize, seed: SeedSpec) -> Self {
        CompareOptions {
            m,
            n_reps,
            delta: 0.001,
            grid: None,
            bounds: vec![
                "bennett_suprema".into(),
                "bernstein_suprema".into(),
                "tbk_recentered".into(),
            ],
            seed,
        }
    }
}

/// The estimated expectation parameters of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareEstimates {
    pub e_z: EstimateWithError,
    pub e_zprime: EstimateWithError,
    pub e_sigma2: EstimateWithError,
    pub e_sigma2_tilde: EstimateWithError,
    /// Exact `sup_x Var(x_{J_1})` over the family.
    pub sup_index_variance: f64,
    /// TBK proxy `v = m·sup_x Var(x_{J_1}) + 2 Ê Z'`.
    pub v: f64,
    /// `Ê Z' - Ê Z`, the centering gap between the schemes.
    pub gap: f64,
}

/// One bound evaluated over the deviation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub name: String,
    pub params: std::collections::BTreeMap<String, f64>,
    pub domain_note: String,
    pub values: Vec<f64>,
}

/// Grid points where some bounds are trivial (= 1) and others are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialityFlag {
    pub t: f64,
    pub trivial: Vec<String>,
    pub nontrivial: Vec<String>,
}

/// Full results of the comparison experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResults {
    pub estimates: CompareEstimates,
    pub tail: TailCurve,
    pub bounds: Vec<BoundCurve>,
    pub domination: Vec<DominationVerdict>,
    pub triviality_flags: Vec<TrivialityFlag>,
}

/// Exact `sup_x Var(x_{J_1})` over a family. For the capped contrast the
/// supremum is attained at `|S| = cap` since the variance
/// `(s + |B|)/n - ((s - |B|)/n)²` is increasing in `s` up to `n/2`.
pub fn sup_index_variance(family: &VectorFamily) -> f64 {
    match family.kind() {
        VectorKind::Explicit(vs) => vs
            .iter()
            .map(|v| estimate_variance_of_index(v))
            .fold(0.0, f64::max),
        VectorKind::CappedIndicatorContrast { a: _, b, cap } => {
            let n = family.n() as f64;
            let s = *cap as f64;
            let bl = b.len() as f64;
            (s + bl) / n - ((s - bl) / n).powi(2)
        }
    }
}

/// Bounds on the reachable range of `Z` over permutations:
/// a lower bound on the minimum and the exact maximum-attainable value.
pub fn family_z_range(family: &VectorFamily, m: usize) -> (f64, f64) {
    match family.kind() {
        VectorKind::Explicit(vs) => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in vs {
                let mut sorted = v.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
                let small: f64 = sorted[..m].iter().sum();
                let large: f64 = sorted[sorted.len() - m..].iter().sum();
                lo = lo.max(small);
                hi = hi.max(large);
            }
            (lo, hi)
        }
        VectorKind::CappedIndicatorContrast { a, b, cap } => {
            let n = family.n();
            let max_z = (*cap).min(m).min(a.len()) as f64;
            let outside_a = n - a.len();
            let forced_a = m.saturating_sub(outside_a).min(*cap);
            let min_z = forced_a as f64 - m.min(b.len()) as f64;
            (min_z, max_z)
        }
    }
}

fn build_bound(
    name: &str,
    estimates: &CompareEstimates,
) -> Result<TailBound> {
    match name {
        "bennett_suprema" => TailBound::bennett_suprema(estimates.e_sigma2_tilde.mean),
        "bernstein_suprema" => TailBound::bernstein_suprema(estimates.e_sigma2.mean),
        "tbk_recentered" => TailBound::tbk_recentered(estimates.v, estimates.gap.max(0.0)),
        other => Err(Error::invalid(format!(
            "unknown bound '{other}' for the comparison (expected bennett_suprema, \
             bernstein_suprema or tbk_recentered)"
        ))),
    }
}

/// Run the comparison experiment on a vector family.
///
/// Phase 0 (streams `seed.stream_id ..`) estimates the four expectations
/// from shared per-replicate draws; phase 1 (streams offset by
/// [`PHASE_STRIDE`]) measures the tail of `Z` about `Ê Z` with the mean's
/// standard error folded into the exceedance threshold.
pub fn compare_family(family: &VectorFamily, opts: &CompareOptions) -> Result<CompareResults> {
    let n = family.n();
    let m = opts.m;
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if opts.n_reps as u64 >= PHASE_STRIDE {
        return Err(Error::invalid("n_reps must be below the phase stride 2^32"));
    }
    let est_seed = opts.seed;
    let tail_seed = SeedSpec::new(
        opts.seed.master_seed,
        opts.seed.stream_id.wrapping_add(PHASE_STRIDE),
    );

    let e_z = estimate_expectation(
        |s| Ok(eval_z(family, m, &draw_permutation(n, s)?)?.value),
        opts.n_reps,
        est_seed,
    )?;
    let e_sigma2 = estimate_expectation(
        |s| Ok(eval_sigma2(family, m, &draw_permutation(n, s)?)?.value),
        opts.n_reps,
        est_seed,
    )?;
    let e_zprime = estimate_expectation(
        |s| Ok(eval_zprime(family, &draw_with_replacement(n, m, s)?)?.value),
        opts.n_reps,
        est_seed,
    )?;
    let e_sigma2_tilde = estimate_expectation(
        |s| Ok(eval_sigma2_tilde(family, &draw_with_replacement(n, m, s)?)?.value),
        opts.n_reps,
        est_seed,
    )?;

    let sup_var = sup_index_variance(family);
    let estimates = CompareEstimates {
        v: m as f64 * sup_var + 2.0 * e_zprime.mean,
        gap: e_zprime.mean - e_z.mean,
        sup_index_variance: sup_var,
        e_z,
        e_zprime,
        e_sigma2,
        e_sigma2_tilde,
    };

    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => {
            let (min_z, max_z) = family_z_range(family, m);
            default_grid(estimates.e_sigma2.mean, max_z - min_z)?
        }
    };

    let tail = estimate_tail(
        |s| Ok(eval_z(family, m, &draw_permutation(n, s)?)?.value),
        estimates.e_z.mean,
        estimates.e_z.std_error,
        &grid,
        opts.n_reps,
        opts.delta,
        tail_seed,
    )?;

    let mut bounds = Vec::new();
    let mut domination = Vec::new();
    for name in &opts.bounds {
        let bound = build_bound(name, &estimates)?;
        bounds.push(BoundCurve {
            name: bound.name().to_string(),
            params: bound.params(),
            domain_note: bound.domain_note().to_string(),
            values: grid.iter().map(|&t| bound.eval(t)).collect(),
        });
        domination.push(check_domination(&tail, &bound));
    }

    let mut triviality_flags = Vec::new();
    for (i, &t) in grid.iter().enumerate() {
        let (mut trivial, mut nontrivial) = (Vec::new(), Vec::new());
        for curve in &bounds {
            if curve.values[i] >= 1.0 {
                trivial.push(curve.name.clone());
            } else {
                nontrivial.push(curve.name.clone());
            }
        }
        if !trivial.is_empty() && !nontrivial.is_empty() {
            triviality_flags.push(TrivialityFlag {
                t,
                trivial,
                nontrivial,
            });
        }
    }

    Ok(CompareResults {
        estimates,
        tail,
        bounds,
        domination,
        triviality_flags,
    })
}
