//! Brute-force ground truth for small instances: full `S_n` enumeration of
//! statistic laws, the exact fixed-point distribution, and an exact check of
//! the entropy inequality driving the concentration proofs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::sampling::PermutationSample;
use crate::stats::{eval_s, swap_statistic};

/// Hard cap for full distribution enumeration (8! = 40320 permutations).
pub const ENUMERATION_CAP: usize = 8;
/// Hard cap for the entropy check, which is O(n! · n²).
pub const ENTROPY_CAP: usize = 7;

/// Values equal up to this slack are merged into one support point.
const SUPPORT_MERGE_TOL: f64 = 1e-10;

/// An exact finite distribution with sorted distinct support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| (v - mean).powi(2) * p)
            .sum()
    }

    /// `P(X ≥ x)`.
    pub fn survival(&self, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(v, _)| **v >= x)
            .map(|(_, p)| p)
            .sum()
    }

    /// `(v, P(X ≥ v))` for every support point, from the top down.
    pub fn upper_tails(&self) -> Vec<(f64, f64)> {
        let mut acc = 0.0;
        let mut out: Vec<(f64, f64)> = self
            .support
            .iter()
            .zip(&self.probs)
            .rev()
            .map(|(&v, &p)| {
                acc += p;
                (v, acc)
            })
            .collect();
        out.reverse();
        out
    }
}

/// Visit every permutation of `0..n` exactly once (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut items: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(&items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The exact law of `S = sup_{r∈R} Σ_k r_{k σ(k)}` under uniform σ,
/// by full enumeration of `S_n` (`n ≤ 8`).
pub fn enumerate_distribution(family: &MatrixFamily) -> Result<ExactDistribution> {
    let n = family.n();
    if n > ENUMERATION_CAP {
        return Err(Error::SizeLimit(format!(
            "enumeration supports n <= {ENUMERATION_CAP}, got {n}"
        )));
    }
    let mut values = Vec::with_capacity(factorial(n) as usize);
    let mut err = None;
    for_each_permutation(n, |sigma| {
        if err.is_some() {
            return;
        }
        let perm = PermutationSample::from_zero_based(sigma.to_vec()).expect("valid permutation");
        match eval_s(family, &perm) {
            Ok(s) => values.push(s.value),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let total = values.len() as f64;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        let mut count = 0usize;
        while i < values.len() && values[i] - v <= SUPPORT_MERGE_TOL {
            count += 1;
            i += 1;
        }
        support.push(v);
        probs.push(count as f64 / total);
    }
    Ok(ExactDistribution { support, probs })
}

/// Number of derangements of `k` items: `D(i) = i·D(i-1) + (-1)^i`.
fn derangements(k: usize) -> u64 {
    let mut d: u64 = 1; // D(0)
    for i in 1..=k as u64 {
        d = i * d;
        if i % 2 == 0 {
            d += 1;
        } else {
            d -= 1;
        }
    }
    d
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u64 = 1;
    for i in 0..k {
        result = result * (n - i) as u64 / (i + 1) as u64;
    }
    result
}

/// Exact `P(f ≥ j)` for the fixed-point count of a uniform permutation of
/// `[n]`, via the inclusion–exclusion counts `#{exactly i fixed points} =
/// C(n, i) · D(n - i)` computed in integer arithmetic.
pub fn fixed_point_tail(n: usize, j: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if j > n {
        return Err(Error::invalid(format!("j = {j} exceeds n = {n}")));
    }
    let favorable: u64 = (j..=n).map(|i| binomial(n, i) * derangements(n - i)).sum();
    Ok(favorable as f64 / factorial(n) as f64)
}

/// The exact law of the fixed-point count (support 0..n, skipping n-1).
pub fn fixed_point_distribution(n: usize) -> Result<ExactDistribution> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let total = factorial(n) as f64;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for i in 0..=n {
        let count = binomial(n, i) * derangements(n - i);
        if count > 0 {
            support.push(i as f64);
            probs.push(count as f64 / total);
        }
    }
    Ok(ExactDistribution { support, probs })
}

/// Both sides of the modified log-Sobolev inequality applied to the Laplace
/// transform of `S`, computed exactly by enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyCheck {
    /// `Ent(e^{λS})`.
    pub lhs: f64,
    /// `(λ/n) E[e^{λS} Σ_ij (1 - e^{-λ(S - S_ij)})_+ (S - S_ij)_+]`.
    pub rhs: f64,
    pub pass: bool,
}

const ENTROPY_SLACK: f64 = 1e-10;

/// Exact check of the entropy inequality for `n ≤ 7` and `λ ≥ 0`.
pub fn check_entropy_inequality(
    family: &MatrixFamily,
    lambda: f64,
) -> Result<EntropyCheck> {
    let n = family.n();
    if n > ENTROPY_CAP {
        return Err(Error::SizeLimit(format!(
            "entropy check supports n <= {ENTROPY_CAP}, got {n}"
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid("lambda must be finite and >= 0"));
    }
    let mut sum_exp = 0.0; // Σ e^{λS}
    let mut sum_s_exp = 0.0; // Σ λS e^{λS}
    let mut sum_dirichlet = 0.0; // Σ e^{λS} Σ_ij (...)
    let mut err = None;
    for_each_permutation(n, |sigma| {
        if err.is_some() {
            return;
        }
        let perm = PermutationSample::from_zero_based(sigma.to_vec()).expect("valid permutation");
        let s = match eval_s(family, &perm) {
            Ok(v) => v.value,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let w = (lambda * s).exp();
        sum_exp += w;
        sum_s_exp += lambda * s * w;
        let mut pair_sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let s_ij = match swap_statistic(family, &perm, i, j) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
                let deficit = (s - s_ij).max(0.0);
                let factor = (1.0 - (-lambda * deficit).exp()).max(0.0);
                // ordered pairs (i,j) and (j,i) contribute identically
                pair_sum += 2.0 * factor * deficit;
            }
        }
        sum_dirichlet += w * pair_sum;
    });
    if let Some(e) = err {
        return Err(e);
    }
    let total = factorial(n) as f64;
    let e_exp = sum_exp / total;
    let e_s_exp = sum_s_exp / total;
    let lhs = e_s_exp - e_exp * e_exp.ln();
    let rhs = lambda / n as f64 * (sum_dirichlet / total);
    Ok(EntropyCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + ENTROPY_SLACK,
    })
}
