//! Closed-form tail and MGF bounds, Herbst-argument converters from
//! entropy-inequality parameters to tail bounds, and a numerical Chernoff
//! optimizer.
//!
//! All tail bounds are clamped to `[0, 1]`. Where a variance-type parameter
//! is zero the limit convention applies: the bound is 1 at `t = 0` and 0 for
//! `t > 0` (Bennett shapes), or degenerates to its linear branch (Bernstein
//! shapes).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the Bennett bound for suprema under sampling without
/// replacement (`P(Z ≥ E Z + t) ≤ 2 exp(-(t/C1) log(1 + t/(C2 E Σ̃²)))`).
pub const SUPREMA_C1: f64 = 36.0;
pub const SUPREMA_C2: f64 = 46.0;

/// Constants of the Bennett bound for a single zero-sum Hoeffding statistic.
pub const HOEFFDING_C1: f64 = 36.0;
pub const HOEFFDING_C2: f64 = 36.0;

fn require_nonneg(value: f64, name: &str) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::invalid(format!("{name} must be finite and >= 0, got {value}")));
    }
    Ok(())
}

fn require_pos(value: f64, name: &str) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::invalid(format!("{name} must be finite and > 0, got {value}")));
    }
    Ok(())
}

/// A named closed-form tail bound `t ↦ p` with validated parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TailBound {
    /// Bennett bound for `Z`: `min(1, 2 exp(-(t/c1) log(1 + t/(c2 v))))`
    /// with `v = E Σ̃²`. Hypothesis: `X ⊂ [-1,1]^n`.
    BennettSuprema { esigma2_tilde: f64, c1: f64, c2: f64 },
    /// Bernstein bound for `Z`: `exp(-min(t/32, t²/(128 E Σ²)))`.
    BernsteinSuprema { esigma2: f64 },
    /// Bennett bound for a zero-sum Hoeffding statistic, `P(f ≥ t)`.
    BennettHoeffding { esigma2: f64, c1: f64, c2: f64 },
    /// Centered variant: `min(1, 2 exp(-(t/(2 c1)) log(1 + t/(2 c2 Var f))))`,
    /// valid for arbitrary `a ∈ [-1,1]^{n×n}` about `E f`.
    BennettHoeffdingCentered { variance: f64 },
    /// `exp(-(t/4) log(1 + t/(4 E f)))` for `a ∈ [0,1]^{n×n}`.
    BennettPositiveHoeffding { ef: f64 },
    /// Chatterjee's Bernstein bound `exp(-t²/(4 E f + 2 t))`, same hypothesis.
    ChatterjeeBernstein { ef: f64 },
    /// Tolstikhin–Blanchard–Kloft: `exp(-t log(1+t/v) + t - v log(1+t/v))`,
    /// bounding `P(Z ≥ E Z' + t)` — deviations above `E Z'`, not `E Z`.
    Tbk { v: f64 },
    /// TBK re-expressed as deviations above `E Z` via the estimated gap
    /// `E Z' - E Z`: trivial (= 1) for `t < gap`.
    TbkRecentered { v: f64, gap: f64 },
    /// Herbst Poisson tail `exp(-(t/(2b)) log(1 + (b/(2a)) t))`.
    HerbstPoisson { a: f64, b: f64 },
    /// Herbst Bernstein tail `exp(-min(t/(4a), t²/(8(a·mean + b))))`.
    HerbstBernstein { a: f64, b: f64, mean: f64 },
    /// Bounded-range Herbst Bernstein tail `exp(-min(εt/2, t²/(4b)))`.
    HerbstBernstein2 { epsilon: f64, b: f64 },
    /// The trivial bound, identically 1.
    One,
}

impl TailBound {
    pub fn bennett_suprema(esigma2_tilde: f64) -> Result<Self> {
        Self::bennett_suprema_with(esigma2_tilde, SUPREMA_C1, SUPREMA_C2)
    }

    pub fn bennett_suprema_with(esigma2_tilde: f64, c1: f64, c2: f64) -> Result<Self> {
        require_nonneg(esigma2_tilde, "esigma2_tilde")?;
        require_pos(c1, "C1")?;
        require_pos(c2, "C2")?;
        Ok(TailBound::BennettSuprema { esigma2_tilde, c1, c2 })
    }

    pub fn bernstein_suprema(esigma2: f64) -> Result<Self> {
        require_nonneg(esigma2, "esigma2")?;
        Ok(TailBound::BernsteinSuprema { esigma2 })
    }

    /// `zero_sum_asserted` is the caller's statement that `Σ_ij a_ij = 0`
    /// holds; the bound is refused without it.
    pub fn bennett_hoeffding(esigma2: f64, zero_sum_asserted: bool) -> Result<Self> {
        if !zero_sum_asserted {
            return Err(Error::HypothesisViolation(
                "bennett_hoeffding requires the zero-sum hypothesis Σ a_ij = 0".into(),
            ));
        }
        require_nonneg(esigma2, "esigma2")?;
        Ok(TailBound::BennettHoeffding {
            esigma2,
            c1: HOEFFDING_C1,
            c2: HOEFFDING_C2,
        })
    }

    pub fn bennett_hoeffding_centered(variance: f64) -> Result<Self> {
        require_nonneg(variance, "variance")?;
        Ok(TailBound::BennettHoeffdingCentered { variance })
    }

    pub fn bennett_positive_hoeffding(ef: f64) -> Result<Self> {
        require_nonneg(ef, "ef")?;
        Ok(TailBound::BennettPositiveHoeffding { ef })
    }

    pub fn chatterjee_bernstein(ef: f64) -> Result<Self> {
        require_nonneg(ef, "ef")?;
        Ok(TailBound::ChatterjeeBernstein { ef })
    }

    pub fn tbk(v: f64) -> Result<Self> {
        require_pos(v, "v")?;
        Ok(TailBound::Tbk { v })
    }

    pub fn tbk_recentered(v: f64, gap: f64) -> Result<Self> {
        require_pos(v, "v")?;
        require_nonneg(gap, "gap")?;
        Ok(TailBound::TbkRecentered { v, gap })
    }

    pub fn name(&self) -> &'static str {
        match self {
            TailBound::BennettSuprema { .. } => "bennett_suprema",
            TailBound::BernsteinSuprema { .. } => "bernstein_suprema",
            TailBound::BennettHoeffding { .. } => "bennett_hoeffding",
            TailBound::BennettHoeffdingCentered { .. } => "bennett_hoeffding_centered",
            TailBound::BennettPositiveHoeffding { .. } => "bennett_positive_hoeffding",
            TailBound::ChatterjeeBernstein { .. } => "chatterjee_bernstein",
            TailBound::Tbk { .. } => "tbk",
            TailBound::TbkRecentered { .. } => "tbk_recentered",
            TailBound::HerbstPoisson { .. } => "herbst_poisson",
            TailBound::HerbstBernstein { .. } => "herbst_bernstein",
            TailBound::HerbstBernstein2 { .. } => "herbst_bernstein2",
            TailBound::One => "one",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        match *self {
            TailBound::BennettSuprema { esigma2_tilde, c1, c2 } => {
                map.insert("esigma2_tilde".into(), esigma2_tilde);
                map.insert("c1".into(), c1);
                map.insert("c2".into(), c2);
            }
            TailBound::BernsteinSuprema { esigma2 } => {
                map.insert("esigma2".into(), esigma2);
            }
            TailBound::BennettHoeffding { esigma2, c1, c2 } => {
                map.insert("esigma2".into(), esigma2);
                map.insert("c1".into(), c1);
                map.insert("c2".into(), c2);
            }
            TailBound::BennettHoeffdingCentered { variance } => {
                map.insert("variance".into(), variance);
            }
            TailBound::BennettPositiveHoeffding { ef } => {
                map.insert("ef".into(), ef);
            }
            TailBound::ChatterjeeBernstein { ef } => {
                map.insert("ef".into(), ef);
            }
            TailBound::Tbk { v } => {
                map.insert("v".into(), v);
            }
            TailBound::TbkRecentered { v, gap } => {
                map.insert("v".into(), v);
                map.insert("gap".into(), gap);
            }
            TailBound::HerbstPoisson { a, b } => {
                map.insert("a".into(), a);
                map.insert("b".into(), b);
            }
            TailBound::HerbstBernstein { a, b, mean } => {
                map.insert("a".into(), a);
                map.insert("b".into(), b);
                map.insert("mean".into(), mean);
            }
            TailBound::HerbstBernstein2 { epsilon, b } => {
                map.insert("epsilon".into(), epsilon);
                map.insert("b".into(), b);
            }
            TailBound::One => {}
        }
        map
    }

    /// Textual statement of the hypothesis and centering convention.
    pub fn domain_note(&self) -> &'static str {
        match self {
            TailBound::BennettSuprema { .. } => {
                "X ⊂ [-1,1]^n; bounds P(Z ≥ E Z + t) for t ≥ 0"
            }
            TailBound::BernsteinSuprema { .. } => {
                "X ⊂ [-1,1]^n; bounds P(Z ≥ E Z + t) for t ≥ 0"
            }
            TailBound::BennettHoeffding { .. } => {
                "a ∈ [-1,1]^{n×n} with Σ a_ij = 0; bounds P(f ≥ t) for t ≥ 0"
            }
            TailBound::BennettHoeffdingCentered { .. } => {
                "a ∈ [-1,1]^{n×n}; bounds P(f ≥ E f + t) for t ≥ 0"
            }
            TailBound::BennettPositiveHoeffding { .. } => {
                "a ∈ [0,1]^{n×n}; bounds P(f > E f + t) for t ≥ 0"
            }
            TailBound::ChatterjeeBernstein { .. } => {
                "a ∈ [0,1]^{n×n}; bounds P(f > E f + t) for t ≥ 0"
            }
            TailBound::Tbk { .. } => {
                "X ⊂ {x ∈ [-1,1]^n : Σ x_i = 0}; bounds P(Z ≥ E Z' + t) — centered at E Z'"
            }
            TailBound::TbkRecentered { .. } => {
                "TBK re-expressed about E Z via the gap estimate; trivial below the gap"
            }
            TailBound::HerbstPoisson { .. } => "entropy hypothesis of the Poisson Herbst variant",
            TailBound::HerbstBernstein { .. } => {
                "entropy hypothesis of the Bernstein Herbst variant; a > 0, a·E X + b > 0"
            }
            TailBound::HerbstBernstein2 { .. } => {
                "entropy hypothesis on [0, ε] of the bounded-range Herbst variant"
            }
            TailBound::One => "no hypothesis; trivially valid",
        }
    }

    /// Natural log of the bound, clamped at 0 (= log 1). Exact in the far
    /// tail where `eval` underflows.
    pub fn log_eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let raw = match *self {
            TailBound::BennettSuprema { esigma2_tilde, c1, c2 } => {
                bennett_log(t, esigma2_tilde, c1, c2, 2.0)
            }
            TailBound::BernsteinSuprema { esigma2 } => bernstein_log(t, esigma2),
            TailBound::BennettHoeffding { esigma2, c1, c2 } => bennett_log(t, esigma2, c1, c2, 2.0),
            TailBound::BennettHoeffdingCentered { variance } => {
                bennett_log(t / 2.0, variance, HOEFFDING_C1, HOEFFDING_C2, 2.0)
            }
            TailBound::BennettPositiveHoeffding { ef } => bennett_log(t, ef, 4.0, 4.0, 1.0),
            TailBound::ChatterjeeBernstein { ef } => {
                if t == 0.0 {
                    0.0
                } else {
                    -(t * t) / (4.0 * ef + 2.0 * t)
                }
            }
            TailBound::Tbk { v } => tbk_log(t, v),
            TailBound::TbkRecentered { v, gap } => {
                if t < gap {
                    0.0
                } else {
                    tbk_log(t - gap, v)
                }
            }
            TailBound::HerbstPoisson { a, b } => -(t / (2.0 * b)) * (b / (2.0 * a) * t).ln_1p(),
            TailBound::HerbstBernstein { a, b, mean } => {
                -(t / (4.0 * a)).min(t * t / (8.0 * (a * mean + b)))
            }
            TailBound::HerbstBernstein2 { epsilon, b } => {
                -(epsilon * t / 2.0).min(t * t / (4.0 * b))
            }
            TailBound::One => 0.0,
        };
        raw.min(0.0)
    }

    /// The bound as a probability in `[0, 1]`. Negative `t` is clamped to 0.
    pub fn eval(&self, t: f64) -> f64 {
        self.log_eval(t).exp()
    }

    /// Like [`eval`](Self::eval) but rejecting invalid deviations.
    pub fn eval_checked(&self, t: f64) -> Result<f64> {
        require_nonneg(t, "t")?;
        Ok(self.eval(t))
    }
}

/// Shared Bennett shape on the log scale with the zero-variance limit
/// convention. The centered variant halves `t` before calling (its variance
/// factor carries the other 2).
fn bennett_log(t: f64, v: f64, c1: f64, c2: f64, prefactor: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if v == 0.0 {
        return f64::NEG_INFINITY;
    }
    prefactor.ln() - (t / c1) * (t / (c2 * v)).ln_1p()
}

fn bernstein_log(t: f64, esigma2: f64) -> f64 {
    if esigma2 == 0.0 {
        return -t / 32.0;
    }
    -(t / 32.0).min(t * t / (128.0 * esigma2))
}

fn tbk_log(t: f64, v: f64) -> f64 {
    // -t log(1 + t/v) + t - v log(1 + t/v) = t - (t + v) log(1 + t/v)
    t - (t + v) * (t / v).ln_1p()
}

// ----- free-function forms of the bounds -----

/// Bennett bound for suprema, `min(1, 2 exp(-(t/36) log(1 + t/(46 E Σ̃²))))`.
pub fn bennett_suprema(t: f64, esigma2_tilde: f64) -> Result<f64> {
    TailBound::bennett_suprema(esigma2_tilde)?.eval_checked(t)
}

/// Bennett bound for suprema with explicit constants.
pub fn bennett_suprema_with(t: f64, esigma2_tilde: f64, c1: f64, c2: f64) -> Result<f64> {
    TailBound::bennett_suprema_with(esigma2_tilde, c1, c2)?.eval_checked(t)
}

/// Bernstein bound for suprema, `exp(-min(t/32, t²/(128 E Σ²)))`.
pub fn bernstein_suprema(t: f64, esigma2: f64) -> Result<f64> {
    TailBound::bernstein_suprema(esigma2)?.eval_checked(t)
}

/// Bennett bound for a zero-sum Hoeffding statistic (`C1 = C2 = 36`).
/// The caller asserts the hypothesis `Σ a_ij = 0` via the flag.
pub fn bennett_hoeffding(t: f64, esigma2: f64, zero_sum_asserted: bool) -> Result<f64> {
    TailBound::bennett_hoeffding(esigma2, zero_sum_asserted)?.eval_checked(t)
}

/// Centered Bennett bound for an arbitrary `[-1,1]` Hoeffding statistic:
/// `min(1, 2 exp(-(t/72) log(1 + t/(72 Var f))))`.
pub fn bennett_hoeffding_centered(t: f64, variance: f64) -> Result<f64> {
    TailBound::bennett_hoeffding_centered(variance)?.eval_checked(t)
}

/// Bennett bound for a nonnegative Hoeffding statistic:
/// `exp(-(t/4) log(1 + t/(4 E f)))`.
pub fn bennett_positive_hoeffding(t: f64, ef: f64) -> Result<f64> {
    TailBound::bennett_positive_hoeffding(ef)?.eval_checked(t)
}

/// Chatterjee's Bernstein-type bound `exp(-t²/(4 E f + 2t))` for
/// nonnegative Hoeffding statistics.
pub fn chatterjee_bernstein(t: f64, ef: f64) -> Result<f64> {
    TailBound::chatterjee_bernstein(ef)?.eval_checked(t)
}

/// Bernstein bound for suprema of Hoeffding statistics over matrix families
/// (and for a single statistic as the singleton case). Same formula as
/// [`bernstein_suprema`]; the hypotheses differ (`R ⊂ [-1,1]^{n×n}`,
/// `E Σ_R²` in place of `E Σ²`).
pub fn bernstein_hoeffding_suprema(t: f64, esigma2: f64) -> Result<f64> {
    bernstein_suprema(t, esigma2)
}

/// Ledoux's MGF estimate: `log E e^{λZ'} ≤ (1/16) e^{8λ} E Z'` for
/// `λ ≥ 1/4` and families in `[0,1]^n`.
pub fn ledoux_mgf(lambda: f64, ezprime: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < 0.25 {
        return Err(Error::invalid(format!(
            "ledoux_mgf requires lambda >= 1/4, got {lambda}"
        )));
    }
    require_nonneg(ezprime, "ezprime")?;
    Ok((8.0 * lambda).exp() / 16.0 * ezprime)
}

/// Tolstikhin–Blanchard–Kloft bound on `P(Z ≥ E Z' + t)`.
pub fn tbk_bound(t: f64, v: f64) -> Result<f64> {
    TailBound::tbk(v)?.eval_checked(t)
}

/// `E Z' ≤ E Z + 2 m³/n`: the center shift between the two sampling schemes.
pub fn tbk_center_shift(m: usize, n: usize) -> Result<f64> {
    if n == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    Ok(2.0 * (m as f64).powi(3) / n as f64)
}

/// Symmetrization estimate `E Σ̃² ≤ m·sup_x Var(x_{J_1}) + 16 E Z'`, valid
/// when the family is symmetric about the origin.
pub fn sigma_tilde_symmetric_upper(m: usize, sup_var: f64, ezprime: f64) -> Result<f64> {
    require_nonneg(sup_var, "sup_var")?;
    require_nonneg(ezprime, "ezprime")?;
    Ok(m as f64 * sup_var + 16.0 * ezprime)
}

// ----- entropy-parameter converters (Herbst variants) -----

/// Parameters of the entropy differential inequalities feeding the Herbst
/// converters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyBoundParams {
    pub a: f64,
    pub b: f64,
    /// Only the bounded-range variant uses ε.
    pub epsilon: f64,
    /// `E X`, needed by the Bernstein variant.
    pub mean: f64,
}

/// An upper bound on a log-moment-generating function over an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfBound {
    kind: MgfKind,
    lambda_min: f64,
    /// `f64::INFINITY` for an unbounded domain.
    lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MgfKind {
    /// `ψ(λ) = (a/b) λ (e^{bλ} - 1)`, centered.
    Poisson { a: f64, b: f64 },
    /// `ψ(λ) = c λ²`, centered.
    Quadratic { c: f64 },
    /// `ψ(λ) = (1/16) e^{8λ} E Z'`, uncentered bound for `Z'`.
    Ledoux { ezprime: f64 },
}

impl MgfBound {
    pub fn poisson(a: f64, b: f64) -> Result<Self> {
        require_pos(a, "a")?;
        require_pos(b, "b")?;
        Ok(MgfBound {
            kind: MgfKind::Poisson { a, b },
            lambda_min: 0.0,
            lambda_max: f64::INFINITY,
        })
    }

    pub fn quadratic(c: f64) -> Result<Self> {
        require_nonneg(c, "c")?;
        Ok(MgfBound {
            kind: MgfKind::Quadratic { c },
            lambda_min: 0.0,
            lambda_max: f64::INFINITY,
        })
    }

    pub fn quadratic_on(c: f64, lambda_max: f64) -> Result<Self> {
        require_nonneg(c, "c")?;
        require_pos(lambda_max, "lambda_max")?;
        Ok(MgfBound {
            kind: MgfKind::Quadratic { c },
            lambda_min: 0.0,
            lambda_max,
        })
    }

    pub fn ledoux(ezprime: f64) -> Result<Self> {
        require_nonneg(ezprime, "ezprime")?;
        Ok(MgfBound {
            kind: MgfKind::Ledoux { ezprime },
            lambda_min: 0.25,
            lambda_max: f64::INFINITY,
        })
    }

    pub fn lambda_domain(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self.kind {
            MgfKind::Poisson { a, b } => a / b * lambda * ((b * lambda).exp() - 1.0),
            MgfKind::Quadratic { c } => c * lambda * lambda,
            MgfKind::Ledoux { ezprime } => (8.0 * lambda).exp() / 16.0 * ezprime,
        }
    }
}

/// Result of the Poisson Herbst converter: the MGF bound and its tail bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerbstPoissonBound {
    pub mgf: MgfBound,
    pub tail: TailBound,
}

/// Poisson Herbst variant: from `Ent(e^{λX}) ≤ a λ² e^{bλ} F(λ)` (a, b > 0)
/// to `log E e^{λ(X-EX)} ≤ (a/b) λ (e^{bλ} - 1)` and the tail
/// `exp(-(t/(2b)) log(1 + (b/(2a)) t))`.
pub fn herbst_poisson(params: EntropyBoundParams) -> Result<HerbstPoissonBound> {
    require_pos(params.a, "a")?;
    require_pos(params.b, "b")?;
    Ok(HerbstPoissonBound {
        mgf: MgfBound::poisson(params.a, params.b)?,
        tail: TailBound::HerbstPoisson {
            a: params.a,
            b: params.b,
        },
    })
}

/// Bernstein Herbst variant: tail `exp(-min(t/(4a), t²/(8(a·EX + b))))`,
/// requiring `a > 0` and `a·EX + b > 0`.
pub fn herbst_bernstein(params: EntropyBoundParams) -> Result<TailBound> {
    require_pos(params.a, "a")?;
    let denom = params.a * params.mean + params.b;
    if !denom.is_finite() || denom <= 0.0 {
        return Err(Error::invalid(format!(
            "herbst_bernstein requires a·mean + b > 0, got {denom}"
        )));
    }
    Ok(TailBound::HerbstBernstein {
        a: params.a,
        b: params.b,
        mean: params.mean,
    })
}

/// Bounded-range Herbst variant: tail `exp(-min(εt/2, t²/(4b)))` for
/// `ε, b > 0`.
pub fn herbst_bernstein2(params: EntropyBoundParams) -> Result<TailBound> {
    require_pos(params.epsilon, "epsilon")?;
    require_pos(params.b, "b")?;
    Ok(TailBound::HerbstBernstein2 {
        epsilon: params.epsilon,
        b: params.b,
    })
}

/// Result of the numerical Chernoff optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffOptimum {
    pub lambda_star: f64,
    pub bound: f64,
}

/// Numerically minimize `exp(-λ (t + centered_mean) + ψ(λ))` over the MGF
/// bound's λ-domain. With a centered ψ pass `centered_mean = 0`, giving a
/// bound on `P(X ≥ E X + t)`; with an uncentered ψ pass the center.
///
/// The objective is convex, so a bracketed golden-section search with
/// endpoint fallback finds the global minimum; the result never exceeds
/// the value at any fixed λ choice in the domain.
pub fn chernoff_optimize(mgf: &MgfBound, t: f64, centered_mean: f64) -> Result<ChernoffOptimum> {
    require_nonneg(t, "t")?;
    if !centered_mean.is_finite() {
        return Err(Error::invalid("centered_mean must be finite"));
    }
    let (lo, hi) = mgf.lambda_domain();
    if !(lo.is_finite() && lo <= hi) {
        return Err(Error::invalid("empty or unbounded-below lambda domain"));
    }
    let shift = t + centered_mean;
    let g = |lambda: f64| -> f64 {
        let v = -lambda * shift + mgf.eval(lambda);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // bracket the minimum; expand geometrically on unbounded domains
    let hi = if hi.is_finite() {
        hi
    } else {
        let mut step = 1.0_f64.max(lo.abs());
        let mut upper = lo + step;
        let mut best = g(lo);
        for _ in 0..200 {
            let v = g(upper);
            if !v.is_finite() || v > best {
                break;
            }
            best = v;
            step *= 2.0;
            upper = lo + step;
        }
        upper
    };

    let (mut a, mut b) = (lo, hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..300 {
        if (b - a).abs() <= 1e-9 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = g(x2);
        }
    }

    // endpoint fallback: the minimum may sit on the domain boundary
    let mut lambda_star = if f1 < f2 { x1 } else { x2 };
    let mut best = f1.min(f2);
    for cand in [lo, hi] {
        let v = g(cand);
        if v < best {
            best = v;
            lambda_star = cand;
        }
    }
    Ok(ChernoffOptimum {
        lambda_star,
        bound: best.exp().min(1.0),
    })
}
