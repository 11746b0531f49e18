//! Constructors for the named test instances: the adversarial
//! capped-contrast family with its analytic quantities, the fixed-point
//! matrix, and randomized families for stress tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Matrix, MatrixFamily, VectorFamily};
use crate::sampling::{derive_rng, draw_permutation, ReplacementSample, SeedSpec};

/// Stream tags for scenario-level randomness, disjoint from the sampling
/// module's per-draw tags.
const TAG_PLACEMENT: u64 = 101;
const TAG_RANDOM_FAMILY: u64 = 102;
const TAG_RANDOM_MATRIX: u64 = 103;

/// Closed-form quantities attached to an adversarial instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarialAnalytics {
    /// `E W = k - k (1 - 1/n)^m`: expected distinct A-elements hit with
    /// replacement.
    pub e_w: f64,
    /// `m k / n`, the lower end of the `E Σ²` bracket in the recommended
    /// parameter regime.
    pub e_sigma2_lo: f64,
    /// `3 m k / (2n)`, the upper end (`E R_A + E R_B`).
    pub e_sigma2_hi: f64,
}

/// The adversarial instance: disjoint sets `A` (size k) and `B` (size k/2)
/// with family `{ 1_S - 1_B : S ⊆ A, |S| ≤ l }`, for which `E Z'` exceeds
/// `E Z` by order `k` while both sampling schemes share their variance
/// proxies.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialInstance {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub l: usize,
    /// 0-based, sorted.
    pub a: Vec<usize>,
    /// 0-based, sorted; |B| = k/2.
    pub b: Vec<usize>,
    pub family: VectorFamily,
    pub analytics: AdversarialAnalytics,
}

impl AdversarialInstance {
    /// `E R_S = E R̃_S = m|S|/n` for any set of the given size.
    pub fn expected_hits(&self, set_size: usize) -> f64 {
        self.m as f64 * set_size as f64 / self.n as f64
    }

    /// `sup_x Var(x_{J_1})` over the family, attained at `|S| = l`:
    /// `(l + k/2)/n - ((l - k/2)/n)²`.
    pub fn sup_index_variance(&self) -> f64 {
        let n = self.n as f64;
        let l = self.l as f64;
        let half_k = self.b.len() as f64;
        (l + half_k) / n - ((l - half_k) / n).powi(2)
    }

    /// Largest possible value of `Z` (all capped hits land in A, none in B).
    pub fn max_z(&self) -> f64 {
        self.l.min(self.m).min(self.k) as f64
    }

    /// Smallest possible value of `Z` over permutations.
    pub fn min_z(&self) -> f64 {
        let outside_a = self.n - self.k;
        let forced_a_hits = self.m.saturating_sub(outside_a);
        forced_a_hits.min(self.l) as f64 - self.m.min(self.b.len()) as f64
    }
}

/// Build the adversarial instance. Requires `0 < l ≤ k ≤ n/2`, `k` even and
/// `1 ≤ m ≤ n`. With a placement seed the sets are positioned randomly;
/// by default `A = {1..k}`, `B = {k+1..3k/2}` (placement is irrelevant by
/// permutation invariance).
pub fn build_adversarial_instance(
    n: usize,
    m: usize,
    k: usize,
    l: usize,
    placement_seed: Option<SeedSpec>,
) -> Result<AdversarialInstance> {
    if k == 0 || k % 2 != 0 {
        return Err(Error::invalid(format!("k must be positive and even, got {k}")));
    }
    if !(l >= 1 && l <= k) {
        return Err(Error::invalid(format!("need 0 < l <= k, got l = {l}, k = {k}")));
    }
    if 2 * k > n {
        return Err(Error::invalid(format!("need k <= n/2, got k = {k}, n = {n}")));
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m = {m}")));
    }
    let half_k = k / 2;
    let (mut a, mut b): (Vec<usize>, Vec<usize>) = match placement_seed {
        None => ((0..k).collect(), (k..k + half_k).collect()),
        Some(seed) => {
            let mut rng = derive_rng(seed, TAG_PLACEMENT);
            // unbiased shuffle of 0..n, then split off the two sets
            let mut pool: Vec<usize> = (0..n).collect();
            for i in 0..n - 1 {
                let j = rng.random_range(i..n);
                pool.swap(i, j);
            }
            (pool[..k].to_vec(), pool[k..k + half_k].to_vec())
        }
    };
    a.sort_unstable();
    b.sort_unstable();
    let family = VectorFamily::capped_indicator_contrast(n, a.clone(), b.clone(), l)?;
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    let analytics = AdversarialAnalytics {
        e_w: kf - kf * (1.0 - 1.0 / nf).powf(mf),
        e_sigma2_lo: mf * kf / nf,
        e_sigma2_hi: 1.5 * mf * kf / nf,
    };
    Ok(AdversarialInstance {
        n,
        m,
        k,
        l,
        a,
        b,
        family,
        analytics,
    })
}

/// The number of distinct A-elements hit by a with-replacement sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WStatistic {
    pub value: usize,
}

/// Count distinct elements of `A` appearing in the sample.
pub fn eval_w(instance: &AdversarialInstance, sample: &ReplacementSample) -> Result<WStatistic> {
    if sample.n() != instance.n {
        return Err(Error::dimension(format!(
            "sample population {} != instance population {}",
            sample.n(),
            instance.n
        )));
    }
    let mut seen = vec![false; instance.n];
    let mut count = 0usize;
    for &ix in sample.indices() {
        if !seen[ix] && instance.a.binary_search(&ix).is_ok() {
            seen[ix] = true;
            count += 1;
        }
    }
    Ok(WStatistic { value: count })
}

/// The asymptotic parameter recipe instantiated at finite `n`:
/// `m = ⌊n/2⌋`, `k ≈ n^{1/2+ε}` (rounded to the nearest even integer),
/// `l = round((k/2)(1 - e^{-1/2} + 1/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommendedParameters {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub l: usize,
    /// The regime's target `E Z' ≈ k/4`.
    pub target_ezprime: f64,
    /// The regime's target separation `E Z' - E Z ⪆ 0.05 k`.
    pub target_gap: f64,
}

/// Instantiate the recipe for a given `n` and `ε ∈ (0, 0.5]`.
/// Fails when the resulting `k` exceeds `n/2`.
pub fn recommended_parameters(n: usize, epsilon: f64) -> Result<RecommendedParameters> {
    if n < 4 {
        return Err(Error::invalid("n too small for the recipe"));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 0.5], got {epsilon}")));
    }
    let mut k = (n as f64).powf(0.5 + epsilon).round() as usize;
    if k % 2 == 1 {
        k += 1; // |B| = k/2 requires even k
    }
    if 2 * k > n {
        return Err(Error::invalid(format!(
            "recipe gives k = {k} > n/2 = {}; reduce epsilon",
            n / 2
        )));
    }
    Ok(RecommendedParameters {
        n,
        m: n / 2,
        k,
        l: recommended_cap(k),
        target_ezprime: k as f64 / 4.0,
        target_gap: 0.05 * k as f64,
    })
}

/// The recipe's cap for a given `k`: `round((k/2)(1 - e^{-1/2} + 1/2))`,
/// placed strictly between `E W ≈ k(1 - e^{-1/2})` and `E R_A ≈ k/2`.
pub fn recommended_cap(k: usize) -> usize {
    let l = (k as f64 / 2.0 * (1.0 - (-0.5f64).exp() + 0.5)).round() as usize;
    l.clamp(1, k.max(1))
}

/// The singleton family of the fixed-point indicator matrix.
pub fn fixed_point_matrix(n: usize) -> Result<MatrixFamily> {
    Ok(MatrixFamily::singleton(Matrix::identity(n)?))
}

/// A family of `size` random vectors with i.i.d. uniform entries in `box_`.
pub fn random_vector_family(
    n: usize,
    size: usize,
    seed: SeedSpec,
    box_: (f64, f64),
) -> Result<VectorFamily> {
    validate_box(box_)?;
    if size == 0 {
        return Err(Error::invalid("family size must be positive"));
    }
    let mut rng = derive_rng(seed, TAG_RANDOM_FAMILY);
    let vectors: Vec<Vec<f64>> = (0..size)
        .map(|_| (0..n).map(|_| rng.random_range(box_.0..=box_.1)).collect())
        .collect();
    VectorFamily::explicit(n, vectors)
}

/// A random matrix with i.i.d. uniform entries in `box_`.
pub fn random_matrix(n: usize, seed: SeedSpec, box_: (f64, f64)) -> Result<Matrix> {
    validate_box(box_)?;
    let mut rng = derive_rng(seed, TAG_RANDOM_MATRIX);
    let entries: Vec<f64> = (0..n * n)
        .map(|_| rng.random_range(box_.0..=box_.1))
        .collect();
    Matrix::new(n, entries)
}

/// A random permutation drawn uniformly, re-exported here for symmetric
/// test ergonomics.
pub fn random_permutation(n: usize, seed: SeedSpec) -> Result<crate::sampling::PermutationSample> {
    draw_permutation(n, seed)
}

fn validate_box(box_: (f64, f64)) -> Result<()> {
    let (lo, hi) = box_;
    if !(lo.is_finite() && hi.is_finite()) || lo < -1.0 || hi > 1.0 || lo >= hi {
        return Err(Error::invalid(format!(
            "entry box must satisfy -1 <= lo < hi <= 1, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}
