//! Exact evaluation of the per-realization statistics: suprema of partial
//! sums along without/with-replacement samples (`Z`, `Z'`), their
//! squared-entry companions (`Σ²`, `Σ̃²`), single Hoeffding statistics,
//! matrix-family suprema (`S`), swap-perturbed values, truncations, and
//! doubly centered matrices.

use crate::error::{Error, Result};
use crate::family::{
    CenteredMatrix, ConvexTestFunction, Matrix, MatrixFamily, MatrixKind, MemberId,
    StatisticValue, VectorFamily, VectorKind,
};
use crate::sampling::{PermutationSample, ReplacementSample};

/// Supremum over a capped contrast family of hits minus B-hits, evaluated
/// from raw draw indices (works for both sampling schemes; with replacement
/// the per-element multiplicities matter).
struct ContrastTally {
    /// Sum of the `cap` largest per-element hit counts among A.
    top_sum: u64,
    /// Total hits of B, with multiplicity.
    b_hits: u64,
    /// Canonical argmax subset: elements with the largest counts, ties
    /// broken by lowest index, zero-count elements omitted. Sorted.
    subset: Vec<usize>,
}

fn tally_contrast(n: usize, marks: &[u8], cap: usize, indices: &[usize]) -> ContrastTally {
    let mut counts = vec![0u32; n];
    let mut hit: Vec<usize> = Vec::new();
    let mut b_hits = 0u64;
    for &ix in indices {
        match marks[ix] {
            1 => {
                if counts[ix] == 0 {
                    hit.push(ix);
                }
                counts[ix] += 1;
            }
            2 => b_hits += 1,
            _ => {}
        }
    }
    hit.sort_unstable_by(|&x, &y| counts[y].cmp(&counts[x]).then(x.cmp(&y)));
    hit.truncate(cap);
    let top_sum = hit.iter().map(|&ix| counts[ix] as u64).sum();
    hit.sort_unstable();
    ContrastTally {
        top_sum,
        b_hits,
        subset: hit,
    }
}

fn check_vector_dims(family: &VectorFamily, n: usize, m: usize) -> Result<()> {
    if family.n() != n {
        return Err(Error::dimension(format!(
            "family dimension {} != sample dimension {n}",
            family.n()
        )));
    }
    if m > n {
        return Err(Error::invalid(format!("m = {m} exceeds n = {n}")));
    }
    Ok(())
}

/// Max over explicit members of a per-member accumulated score;
/// ties go to the lowest member index.
fn explicit_max(vectors: &[Vec<f64>], score: impl Fn(&[f64]) -> f64) -> StatisticValue {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (idx, v) in vectors.iter().enumerate() {
        let s = score(v);
        if s > best {
            best = s;
            best_idx = idx;
        }
    }
    StatisticValue {
        value: best,
        argmax: MemberId::Index(best_idx),
    }
}

/// `Z = sup_{x∈X} Σ_{k=1..m} x_{I_k}` where `I` are the first `m` entries of
/// a uniform permutation. For the capped contrast family this is the closed
/// form `min(R_A, cap) - R_B`.
pub fn eval_z(family: &VectorFamily, m: usize, perm: &PermutationSample) -> Result<StatisticValue> {
    check_vector_dims(family, perm.n(), m)?;
    Ok(eval_vector_sup(family, &perm.sigma()[..m], false))
}

/// `Z' = sup_{x∈X} Σ_{k=1..m} x_{J_k}` over a with-replacement sample.
///
/// For the capped contrast family the supremum counts multiplicities: it is
/// the sum of the `cap` largest per-element hit counts among A, minus the
/// B hits. On the event that at most `cap` distinct elements of A are hit
/// this reduces to `R̃_A - R̃_B`; it is *not* `min(R̃_A, cap) - R̃_B` when an
/// element inside the cap is drawn more than once.
pub fn eval_zprime(family: &VectorFamily, sample: &ReplacementSample) -> Result<StatisticValue> {
    if family.n() != sample.n() {
        return Err(Error::dimension(format!(
            "family dimension {} != sample dimension {}",
            family.n(),
            sample.n()
        )));
    }
    Ok(eval_vector_sup(family, sample.indices(), false))
}

/// `Σ² = sup_{x∈X} Σ_{k=1..m} x_{I_k}²`; closed form `min(R_A, cap) + R_B`
/// for the contrast family.
pub fn eval_sigma2(
    family: &VectorFamily,
    m: usize,
    perm: &PermutationSample,
) -> Result<StatisticValue> {
    check_vector_dims(family, perm.n(), m)?;
    Ok(eval_vector_sup(family, &perm.sigma()[..m], true))
}

/// `Σ̃² = sup_{x∈X} Σ_{k=1..m} x_{J_k}²` over a with-replacement sample.
pub fn eval_sigma2_tilde(
    family: &VectorFamily,
    sample: &ReplacementSample,
) -> Result<StatisticValue> {
    if family.n() != sample.n() {
        return Err(Error::dimension(format!(
            "family dimension {} != sample dimension {}",
            family.n(),
            sample.n()
        )));
    }
    Ok(eval_vector_sup(family, sample.indices(), true))
}

fn eval_vector_sup(family: &VectorFamily, indices: &[usize], squared: bool) -> StatisticValue {
    match family.kind() {
        VectorKind::Explicit(vs) => explicit_max(vs, |v| {
            indices
                .iter()
                .map(|&ix| if squared { v[ix] * v[ix] } else { v[ix] })
                .sum()
        }),
        VectorKind::CappedIndicatorContrast { cap, .. } => {
            let marks = family.marks().expect("contrast family carries marks");
            let tally = tally_contrast(family.n(), marks, *cap, indices);
            // entries of 1_S - 1_B square to 1 on S ∪ B
            let value = if squared {
                tally.top_sum as f64 + tally.b_hits as f64
            } else {
                tally.top_sum as f64 - tally.b_hits as f64
            };
            StatisticValue {
                value,
                argmax: MemberId::Subset(tally.subset),
            }
        }
    }
}

/// The Hoeffding statistic `f(σ) = Σ_k a_{k σ(k)}`.
pub fn eval_hoeffding(a: &Matrix, perm: &PermutationSample) -> Result<f64> {
    if a.n() != perm.n() {
        return Err(Error::dimension(format!(
            "matrix size {} != permutation size {}",
            a.n(),
            perm.n()
        )));
    }
    Ok(perm
        .sigma()
        .iter()
        .enumerate()
        .map(|(k, &v)| a.get(k, v))
        .sum())
}

/// `S = sup_{r∈R} Σ_k r_{k σ(k)}`. For the `FromVectors` embedding this
/// agrees exactly with [`eval_z`] on the underlying vector family.
pub fn eval_s(family: &MatrixFamily, perm: &PermutationSample) -> Result<StatisticValue> {
    if family.n() != perm.n() {
        return Err(Error::dimension(format!(
            "family size {} != permutation size {}",
            family.n(),
            perm.n()
        )));
    }
    Ok(match family.kind() {
        MatrixKind::Singleton(a) => StatisticValue {
            value: eval_hoeffding(a, perm)?,
            argmax: MemberId::Index(0),
        },
        MatrixKind::Explicit(ms) => {
            let mut best = f64::NEG_INFINITY;
            let mut best_idx = 0;
            for (idx, a) in ms.iter().enumerate() {
                let s = eval_hoeffding(a, perm)?;
                if s > best {
                    best = s;
                    best_idx = idx;
                }
            }
            StatisticValue {
                value: best,
                argmax: MemberId::Index(best_idx),
            }
        }
        MatrixKind::FromVectors { family, m } => eval_z(family, *m, perm)?,
    })
}

/// `Σ_R² = sup_{r∈R} Σ_k r_{k σ(k)}²`, the squared-entry companion of `S`.
pub fn eval_matrix_sigma2(family: &MatrixFamily, perm: &PermutationSample) -> Result<StatisticValue> {
    if family.n() != perm.n() {
        return Err(Error::dimension(format!(
            "family size {} != permutation size {}",
            family.n(),
            perm.n()
        )));
    }
    let sq = |a: &Matrix| -> f64 {
        perm.sigma()
            .iter()
            .enumerate()
            .map(|(k, &v)| a.get(k, v).powi(2))
            .sum()
    };
    Ok(match family.kind() {
        MatrixKind::Singleton(a) => StatisticValue {
            value: sq(a),
            argmax: MemberId::Index(0),
        },
        MatrixKind::Explicit(ms) => {
            let mut best = f64::NEG_INFINITY;
            let mut best_idx = 0;
            for (idx, a) in ms.iter().enumerate() {
                let s = sq(a);
                if s > best {
                    best = s;
                    best_idx = idx;
                }
            }
            StatisticValue {
                value: best,
                argmax: MemberId::Index(best_idx),
            }
        }
        MatrixKind::FromVectors { family, m } => eval_sigma2(family, *m, perm)?,
    })
}

/// `S_ij`: the statistic after composing σ with the transposition of
/// positions `i` and `j` (0-based). `swap_statistic(R, σ, i, i) = S`.
pub fn swap_statistic(
    family: &MatrixFamily,
    perm: &PermutationSample,
    i: usize,
    j: usize,
) -> Result<f64> {
    let swapped = perm.with_swap(i, j)?;
    Ok(eval_s(family, &swapped)?.value)
}

/// Sums over all ordered pairs `(i, j) ∈ [n]²` of swap increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapSums {
    /// `Σ_ij (S - S_ij)_+` (deficit direction).
    pub sum_pos: f64,
    /// `Σ_ij (S - S_ij)_+²`.
    pub sum_pos_sq: f64,
    /// `Σ_ij (S_ij - S)_+` (gain direction; the quantity bounded by
    /// `2 Σ_ij a_ij` for nonnegative singletons).
    pub sum_gain: f64,
}

/// A member of a matrix family viewed as an entry oracle, so swap deltas
/// can be computed in O(1) per pair.
enum MemberView<'a> {
    Matrix(&'a Matrix),
    EmbeddedVector { x: &'a [f64], m: usize },
}

impl MemberView<'_> {
    #[inline]
    fn entry(&self, r: usize, c: usize) -> f64 {
        match self {
            MemberView::Matrix(a) => a.get(r, c),
            MemberView::EmbeddedVector { x, m } => {
                if r < *m {
                    x[c]
                } else {
                    0.0
                }
            }
        }
    }
}

/// Exact swap-increment sums over all ordered pairs.
///
/// Explicit members are handled with O(1) per-pair deltas; the structured
/// contrast embedding falls back to re-evaluating the composed permutation,
/// which costs O(n² m).
pub fn swap_deficit_sums(family: &MatrixFamily, perm: &PermutationSample) -> Result<SwapSums> {
    if family.n() != perm.n() {
        return Err(Error::dimension(format!(
            "family size {} != permutation size {}",
            family.n(),
            perm.n()
        )));
    }
    let n = family.n();
    let sigma = perm.sigma();

    let views: Option<Vec<MemberView>> = match family.kind() {
        MatrixKind::Singleton(a) => Some(vec![MemberView::Matrix(a)]),
        MatrixKind::Explicit(ms) => Some(ms.iter().map(MemberView::Matrix).collect()),
        MatrixKind::FromVectors { family: vf, m } => match vf.kind() {
            VectorKind::Explicit(vs) => Some(
                vs.iter()
                    .map(|x| MemberView::EmbeddedVector { x, m: *m })
                    .collect(),
            ),
            VectorKind::CappedIndicatorContrast { .. } => None,
        },
    };

    let mut sums = SwapSums {
        sum_pos: 0.0,
        sum_pos_sq: 0.0,
        sum_gain: 0.0,
    };

    if let Some(views) = views {
        let bases: Vec<f64> = views
            .iter()
            .map(|v| sigma.iter().enumerate().map(|(k, &c)| v.entry(k, c)).sum())
            .collect();
        let s = bases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut s_ij = f64::NEG_INFINITY;
                for (view, base) in views.iter().zip(&bases) {
                    let delta = view.entry(i, sigma[j]) + view.entry(j, sigma[i])
                        - view.entry(i, sigma[i])
                        - view.entry(j, sigma[j]);
                    s_ij = s_ij.max(base + delta);
                }
                accumulate(&mut sums, s, s_ij);
            }
        }
    } else {
        let s = eval_s(family, perm)?.value;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let s_ij = swap_statistic(family, perm, i, j)?;
                accumulate(&mut sums, s, s_ij);
            }
        }
    }
    Ok(sums)
}

#[inline]
fn accumulate(sums: &mut SwapSums, s: f64, s_ij: f64) {
    let deficit = (s - s_ij).max(0.0);
    sums.sum_pos += deficit;
    sums.sum_pos_sq += deficit * deficit;
    sums.sum_gain += (s_ij - s).max(0.0);
}

/// The truncation split of a family at threshold ρ.
#[derive(Debug, Clone)]
pub struct TruncatedFamily {
    /// Entries `x_i · 1{|x_i| ≤ ρ}` (drives `Z↓`).
    pub low: VectorFamily,
    /// Entries `|x_i| · 1{|x_i| > ρ}` (drives `Z↑`).
    pub high: VectorFamily,
}

/// Split a family at ρ so that `Z ≤ Z↓ + Z↑` pointwise and
/// `Z↑ ≤ Σ²/ρ` pointwise.
///
/// The structured contrast kind is supported only for ρ ≥ 1 (where the
/// split is trivial); its sub-threshold truncations are not themselves
/// contrast families and would require explicit materialization.
pub fn truncate_family(family: &VectorFamily, rho: f64) -> Result<TruncatedFamily> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::invalid("truncation threshold rho must be positive"));
    }
    let n = family.n();
    let (lo, hi) = family.bound_box();
    if rho >= lo.abs().max(hi.abs()) {
        let zero = VectorFamily::explicit(n, vec![vec![0.0; n]])?;
        return Ok(TruncatedFamily {
            low: family.clone(),
            high: zero,
        });
    }
    match family.kind() {
        VectorKind::Explicit(vs) => {
            let low: Vec<Vec<f64>> = vs
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|&x| if x.abs() <= rho { x } else { 0.0 })
                        .collect()
                })
                .collect();
            let high: Vec<Vec<f64>> = vs
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|&x| if x.abs() > rho { x.abs() } else { 0.0 })
                        .collect()
                })
                .collect();
            Ok(TruncatedFamily {
                low: VectorFamily::explicit(n, low)?,
                high: VectorFamily::explicit(n, high)?,
            })
        }
        VectorKind::CappedIndicatorContrast { .. } => Err(Error::invalid(
            "truncation below the entry range of a structured contrast family \
             is not representable; materialize the family explicitly",
        )),
    }
}

/// Doubly center a matrix:
/// `d_ij = a_ij - (1/n) Σ_k (a_ik + a_kj) + (1/n²) Σ_kl a_kl`,
/// so that `f - E f = Σ_k d_{k σ(k)}` for every σ and
/// `Var(f) = (1/(n-1)) Σ_ij d_ij²`.
pub fn center_matrix(a: &Matrix) -> Result<CenteredMatrix> {
    let n = a.n();
    if n < 2 {
        return Err(Error::invalid("centering requires n >= 2"));
    }
    let nf = n as f64;
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            row[i] += v;
            col[j] += v;
            total += v;
        }
    }
    let mut d = vec![0.0; n * n];
    let mut sum_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j) - (row[i] + col[j]) / nf + total / (nf * nf);
            d[i * n + j] = v;
            sum_sq += v * v;
        }
    }
    Ok(CenteredMatrix {
        n,
        d,
        variance: sum_sq / (nf - 1.0),
    })
}

/// Evaluate a convex nondecreasing test function.
pub fn apply_test_function(phi: ConvexTestFunction, x: f64) -> f64 {
    match phi {
        ConvexTestFunction::Identity => x,
        ConvexTestFunction::PositivePart { shift } => (x - shift).max(0.0),
        ConvexTestFunction::Exp { rate } => (rate * x).exp(),
    }
}

/// Re-derive a vector-family statistic value from its argmax member, for
/// checking the argmax invariant.
pub fn reevaluate_member(
    family: &VectorFamily,
    id: &MemberId,
    indices: &[usize],
    squared: bool,
) -> Result<f64> {
    let mut total = 0.0;
    for &ix in indices {
        let x = family.member_entry(id, ix)?;
        total += if squared { x * x } else { x };
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{draw_permutation, draw_with_replacement, SeedSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perm(sigma: Vec<usize>) -> PermutationSample {
        PermutationSample::from_zero_based(sigma).unwrap()
    }

    /// Brute-force sup over all S ⊆ A with |S| ≤ cap (bitmask enumeration).
    fn brute_force_contrast(
        family: &VectorFamily,
        indices: &[usize],
        squared: bool,
    ) -> f64 {
        let (a, b, cap) = match family.kind() {
            VectorKind::CappedIndicatorContrast { a, b, cap } => (a, b, *cap),
            _ => panic!("not a contrast family"),
        };
        assert!(a.len() <= 12);
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << a.len()) {
            if mask.count_ones() as usize > cap {
                continue;
            }
            let mut total = 0.0;
            for &ix in indices {
                let mut x = 0.0;
                if let Some(pos) = a.iter().position(|&v| v == ix) {
                    if mask >> pos & 1 == 1 {
                        x += 1.0;
                    }
                }
                if b.contains(&ix) {
                    x -= 1.0;
                }
                total += if squared { x * x } else { x };
            }
            best = best.max(total);
        }
        best
    }

    #[test]
    fn z_contrast_closed_form() {
        // R_A = 3, R_B = 1, cap = 2 -> Z = min(3, 2) - 1 = 1
        let family =
            VectorFamily::capped_indicator_contrast(8, vec![0, 1, 2, 3], vec![4, 5], 2).unwrap();
        let p = perm(vec![0, 1, 2, 4, 6, 3, 5, 7]);
        let z = eval_z(&family, 5, &p).unwrap();
        assert_eq!(z.value, 1.0);
        // Σ² = min(3, 2) + 1 = 3
        let s2 = eval_sigma2(&family, 5, &p).unwrap();
        assert_eq!(s2.value, 3.0);
        // argmax re-evaluation is exact
        let re = reevaluate_member(&family, &z.argmax, &p.sigma()[..5], false).unwrap();
        assert_eq!(re, z.value);
    }

    #[test]
    fn z_zero_family_and_explicit_oracle() {
        let zero = VectorFamily::explicit(4, vec![vec![0.0; 4]]).unwrap();
        let p = perm(vec![2, 0, 3, 1]);
        assert_eq!(eval_z(&zero, 3, &p).unwrap().value, 0.0);
        assert_eq!(eval_sigma2(&zero, 3, &p).unwrap().value, 0.0);

        // three explicit vectors, n = 5, m = 3: direct max over members
        let vs = vec![
            vec![0.3, -0.1, 0.9, 0.2, -0.8],
            vec![-0.5, 0.6, 0.1, 0.0, 0.7],
            vec![0.9, 0.9, -0.9, 0.4, 0.1],
        ];
        let family = VectorFamily::explicit(5, vs.clone()).unwrap();
        let p = perm(vec![4, 2, 0, 1, 3]);
        let expected = vs
            .iter()
            .map(|v| v[4] + v[2] + v[0])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(eval_z(&family, 3, &p).unwrap().value, expected);
        let expected_sq = vs
            .iter()
            .map(|v| v[4] * v[4] + v[2] * v[2] + v[0] * v[0])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(eval_sigma2(&family, 3, &p).unwrap().value, expected_sq);
    }

    #[test]
    fn z_dimension_mismatch_rejected() {
        let family = VectorFamily::explicit(3, vec![vec![0.0; 3]]).unwrap();
        let p = perm(vec![0, 1, 2, 3]);
        assert!(eval_z(&family, 2, &p).is_err());
        let p3 = perm(vec![0, 1, 2]);
        assert!(eval_z(&family, 4, &p3).is_err());
    }

    #[test]
    fn zprime_single_population() {
        let family = VectorFamily::explicit(1, vec![vec![0.5]]).unwrap();
        let s = draw_with_replacement(1, 6, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(eval_zprime(&family, &s).unwrap().value, 3.0);
    }

    #[test]
    fn zprime_counts_multiplicity_inside_cap() {
        // A = {0, 1}, cap 1, draws hit element 0 three times:
        // sup over |S| <= 1 is 3 (S = {0}), not min(R̃_A, cap) = 1.
        let family = VectorFamily::capped_indicator_contrast(4, vec![0, 1], vec![2], 1).unwrap();
        let s = ReplacementSample::from_zero_based(4, vec![0, 0, 0, 2]).unwrap();
        let z = eval_zprime(&family, &s).unwrap();
        assert_eq!(z.value, 2.0, "3 hits of element 0 minus one B hit");
        assert_eq!(z.argmax, MemberId::Subset(vec![0]));
        assert_eq!(eval_sigma2_tilde(&family, &s).unwrap().value, 4.0);
    }

    #[test]
    fn contrast_matches_brute_force_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = rng.random_range(4..12);
            let k = rng.random_range(1..=(n / 2).max(1));
            let a: Vec<usize> = (0..k).collect();
            let b_len = rng.random_range(0..=(n - k).min(3));
            let b: Vec<usize> = (k..k + b_len).collect();
            let cap = rng.random_range(1..=k);
            let family = VectorFamily::capped_indicator_contrast(n, a, b, cap).unwrap();

            let m = rng.random_range(1..=n);
            let p = draw_permutation(n, SeedSpec::new(100, trial)).unwrap();
            let z = eval_z(&family, m, &p).unwrap().value;
            assert_eq!(z, brute_force_contrast(&family, &p.sigma()[..m], false));
            let s2 = eval_sigma2(&family, m, &p).unwrap().value;
            assert_eq!(s2, brute_force_contrast(&family, &p.sigma()[..m], true));

            let mm = rng.random_range(1..=2 * n);
            let s = draw_with_replacement(n, mm, SeedSpec::new(101, trial)).unwrap();
            let zp = eval_zprime(&family, &s).unwrap().value;
            assert_eq!(zp, brute_force_contrast(&family, s.indices(), false));
            let s2t = eval_sigma2_tilde(&family, &s).unwrap().value;
            assert_eq!(s2t, brute_force_contrast(&family, s.indices(), true));
        }
    }

    #[test]
    fn hoeffding_identity_and_lookup() {
        let id4 = Matrix::identity(4).unwrap();
        assert_eq!(eval_hoeffding(&id4, &perm(vec![0, 1, 2, 3])).unwrap(), 4.0);
        // a derangement has no fixed points
        assert_eq!(eval_hoeffding(&id4, &perm(vec![1, 2, 3, 0])).unwrap(), 0.0);

        let a = Matrix::new(3, vec![0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.7, 0.8, 0.9]).unwrap();
        let p = perm(vec![2, 0, 1]);
        let expected = a.get(0, 2) + a.get(1, 0) + a.get(2, 1);
        assert_eq!(eval_hoeffding(&a, &p).unwrap(), expected);
    }

    #[test]
    fn s_singleton_and_explicit() {
        let a = Matrix::identity(3).unwrap();
        let fam = MatrixFamily::singleton(a.clone());
        let p = perm(vec![1, 0, 2]);
        assert_eq!(
            eval_s(&fam, &p).unwrap().value,
            eval_hoeffding(&a, &p).unwrap()
        );

        let b = Matrix::new(3, vec![0.5; 9]).unwrap();
        let fam2 = MatrixFamily::explicit(vec![a.clone(), b.clone()]).unwrap();
        let s = eval_s(&fam2, &p).unwrap();
        let fa = eval_hoeffding(&a, &p).unwrap();
        let fb = eval_hoeffding(&b, &p).unwrap();
        assert_eq!(s.value, fa.max(fb));
        assert_eq!(s.argmax, MemberId::Index(1));
    }

    #[test]
    fn embedding_agrees_with_z_exactly() {
        let vs = vec![
            vec![0.2, -0.7, 0.5, 0.1, 0.9, -0.3],
            vec![-0.1, 0.8, 0.0, 0.6, -0.5, 0.4],
        ];
        let family = VectorFamily::explicit(6, vs).unwrap();
        let m = 3;
        let embedded = MatrixFamily::from_vectors(family.clone(), m).unwrap();
        for rep in 0..100 {
            let p = draw_permutation(6, SeedSpec::new(55, rep)).unwrap();
            let s = eval_s(&embedded, &p).unwrap();
            let z = eval_z(&family, m, &p).unwrap();
            assert_eq!(s.value, z.value);
            assert_eq!(s.argmax, z.argmax);
            assert_eq!(
                eval_matrix_sigma2(&embedded, &p).unwrap().value,
                eval_sigma2(&family, m, &p).unwrap().value
            );
        }
    }

    #[test]
    fn swap_statistic_basics() {
        let fam = MatrixFamily::singleton(Matrix::identity(2).unwrap());
        let p = perm(vec![0, 1]);
        // identity transposition leaves the value unchanged
        assert_eq!(swap_statistic(&fam, &p, 1, 1).unwrap(), 2.0);
        // swapping both positions kills both fixed points
        assert_eq!(swap_statistic(&fam, &p, 0, 1).unwrap(), 0.0);
        // double swap restores the original statistic
        let swapped = p.with_swap(0, 1).unwrap();
        let restored = swapped.with_swap(0, 1).unwrap();
        assert_eq!(
            eval_s(&fam, &restored).unwrap().value,
            eval_s(&fam, &p).unwrap().value
        );
        assert!(swap_statistic(&fam, &p, 0, 5).is_err());
    }

    #[test]
    fn swap_sums_identity_n2() {
        let fam = MatrixFamily::singleton(Matrix::identity(2).unwrap());
        let sums = swap_deficit_sums(&fam, &perm(vec![0, 1])).unwrap();
        assert_eq!(sums.sum_pos, 4.0, "both ordered pairs lose 2");
        assert_eq!(sums.sum_pos_sq, 8.0);
        assert_eq!(sums.sum_gain, 0.0);
    }

    #[test]
    fn swap_sums_zero_matrix() {
        let fam = MatrixFamily::singleton(Matrix::new(3, vec![0.0; 9]).unwrap());
        let sums = swap_deficit_sums(&fam, &perm(vec![2, 1, 0])).unwrap();
        assert_eq!(sums.sum_pos, 0.0);
        assert_eq!(sums.sum_pos_sq, 0.0);
        assert_eq!(sums.sum_gain, 0.0);
    }

    #[test]
    fn swap_sums_delta_path_matches_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..20 {
            let n = rng.random_range(2..10);
            let entries: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fam = MatrixFamily::singleton(Matrix::new(n, entries).unwrap());
            let p = draw_permutation(n, SeedSpec::new(66, trial)).unwrap();
            let fast = swap_deficit_sums(&fam, &p).unwrap();
            let s = eval_s(&fam, &p).unwrap().value;
            let mut slow = SwapSums {
                sum_pos: 0.0,
                sum_pos_sq: 0.0,
                sum_gain: 0.0,
            };
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        accumulate(&mut slow, s, swap_statistic(&fam, &p, i, j).unwrap());
                    }
                }
            }
            assert!((fast.sum_pos - slow.sum_pos).abs() < 1e-9);
            assert!((fast.sum_pos_sq - slow.sum_pos_sq).abs() < 1e-9);
            assert!((fast.sum_gain - slow.sum_gain).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_inequalities_on_random_pairs() {
        // gain sum <= 2 Σ a_ij for a ∈ [0,1]^{n×n} and
        // deficit-square sums per the two quadratic estimates
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..100 {
            let n = rng.random_range(2..20);
            let pos: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..1.0)).collect();
            let a = Matrix::new(n, pos).unwrap();
            let p = draw_permutation(n, SeedSpec::new(77, trial)).unwrap();
            let fam = MatrixFamily::singleton(a.clone());
            let sums = swap_deficit_sums(&fam, &p).unwrap();
            assert!(sums.sum_gain <= 2.0 * a.sum());
            let s = eval_s(&fam, &p).unwrap().value;
            assert!(sums.sum_pos_sq <= 2.0 * n as f64 * s);

            let signed: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = Matrix::new(n, signed).unwrap();
            let famb = MatrixFamily::singleton(b.clone());
            let sums = swap_deficit_sums(&famb, &p).unwrap();
            let sigma_r2 = eval_matrix_sigma2(&famb, &p).unwrap().value;
            let mean_sigma_r2 = b.sum_sq() / n as f64;
            assert!(sums.sum_pos_sq <= 8.0 * n as f64 * (sigma_r2 + mean_sigma_r2));
        }
    }

    #[test]
    fn truncation_examples_and_sandwich() {
        // rho >= 1: high part vanishes
        let family = VectorFamily::explicit(2, vec![vec![0.9, -0.2]]).unwrap();
        let t = truncate_family(&family, 1.0).unwrap();
        assert_eq!(t.low, family);
        let p = perm(vec![0, 1]);
        assert_eq!(eval_z(&t.high, 2, &p).unwrap().value, 0.0);

        // direct definition at rho = 0.5
        let t = truncate_family(&family, 0.5).unwrap();
        match t.low.kind() {
            VectorKind::Explicit(vs) => assert_eq!(vs[0], vec![0.0, -0.2]),
            _ => unreachable!(),
        }
        match t.high.kind() {
            VectorKind::Explicit(vs) => assert_eq!(vs[0], vec![0.9, 0.0]),
            _ => unreachable!(),
        }

        assert!(truncate_family(&family, 0.0).is_err());
        assert!(truncate_family(&family, -1.0).is_err());

        // sandwich on random draws: Z <= Z↓ + Z↑ and Z↑ <= Σ²/ρ
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 8;
        let vs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let family = VectorFamily::explicit(n, vs).unwrap();
        let rho = 0.4;
        let t = truncate_family(&family, rho).unwrap();
        for rep in 0..1000 {
            let p = draw_permutation(n, SeedSpec::new(88, rep)).unwrap();
            let m = 5;
            let z = eval_z(&family, m, &p).unwrap().value;
            let zlo = eval_z(&t.low, m, &p).unwrap().value;
            let zhi = eval_z(&t.high, m, &p).unwrap().value;
            assert!(z <= zlo + zhi + 1e-12);
            let s2 = eval_sigma2(&family, m, &p).unwrap().value;
            assert!(zhi <= s2 / rho + 1e-12);
        }
    }

    #[test]
    fn centering_identity_and_enumeration() {
        let id2 = Matrix::identity(2).unwrap();
        let c = center_matrix(&id2).unwrap();
        assert_eq!(c.d, vec![0.5, -0.5, -0.5, 0.5]);
        assert!((c.variance - 1.0).abs() < 1e-15);

        let constant = Matrix::new(3, vec![0.7; 9]).unwrap();
        let c = center_matrix(&constant).unwrap();
        assert!(c.d.iter().all(|&v| v.abs() < 1e-12));
        assert!(c.variance.abs() < 1e-12);

        assert!(center_matrix(&Matrix::new(1, vec![0.3]).unwrap()).is_err());

        // random 4x4: variance equals the population variance over all 24
        // permutations, and f - E f = Σ_k d_{k σ(k)} for every σ
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let entries: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = Matrix::new(4, entries).unwrap();
        let c = center_matrix(&a).unwrap();
        let perms = all_permutations(4);
        let fs: Vec<f64> = perms
            .iter()
            .map(|s| eval_hoeffding(&a, &perm(s.clone())).unwrap())
            .collect();
        let mean = fs.iter().sum::<f64>() / fs.len() as f64;
        let var = fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / fs.len() as f64;
        assert!((c.variance - var).abs() < 1e-12, "{} vs {var}", c.variance);
        for (s, f) in perms.iter().zip(&fs) {
            let centered: f64 = s.iter().enumerate().map(|(k, &v)| c.get(k, v)).sum();
            assert!((centered - (f - mean)).abs() < 1e-12);
        }
    }

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        heap_recurse(n, &mut current, &mut out);
        out
    }

    fn heap_recurse(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            heap_recurse(k - 1, current, out);
            if k % 2 == 0 {
                current.swap(i, k - 1);
            } else {
                current.swap(0, k - 1);
            }
        }
    }

    #[test]
    fn test_functions() {
        assert_eq!(
            apply_test_function(ConvexTestFunction::Identity, 3.5),
            3.5
        );
        assert_eq!(
            apply_test_function(ConvexTestFunction::PositivePart { shift: 1.0 }, 0.5),
            0.0
        );
        assert_eq!(
            apply_test_function(ConvexTestFunction::Exp { rate: 0.0 }, 123.0),
            1.0
        );
        assert!(ConvexTestFunction::exp(-0.1).is_err());
    }
}
