//! Command implementations: thin orchestration over the library modules.
//! All randomness derives from the config seed; outputs are deterministic.

use std::collections::BTreeMap;

use permcon::bounds::TailBound;
use permcon::error::Error;
use permcon::experiments::{compare_family, CompareOptions, PHASE_STRIDE};
use permcon::family::{MatrixFamily, VectorFamily};
use permcon::montecarlo::{default_grid, estimate_expectation, estimate_tail};
use permcon::oracle::{check_entropy_inequality, enumerate_distribution};
use permcon::report::{bounds_csv, distribution_csv, fmt_float, tail_curve_csv, Report};
use permcon::sampling::{draw_permutation, draw_with_replacement, SeedSpec};
use permcon::scenarios::{build_adversarial_instance, eval_w, recommended_parameters};
use permcon::stats::{eval_s, eval_sigma2, eval_sigma2_tilde, eval_z, eval_zprime};
use serde::Serialize;
use serde_json::json;

use crate::config::{OutputFormat, RunConfig, ScenarioSpec};

/// Errors carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: bad usage or configuration.
    Usage(String),
    /// Exit 3: a bound was requested without its hypothesis.
    Hypothesis(String),
    /// Exit 4: internal failure (I/O, broken invariant).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Hypothesis(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::HypothesisViolation(m) => CliError::Hypothesis(m),
            Error::InvalidParameter(m)
            | Error::DimensionMismatch(m)
            | Error::SizeLimit(m)
            | Error::Parse(m) => CliError::Usage(m),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CmdResult = Result<String, CliError>;

fn json_report<T: Serialize>(cfg: &RunConfig, results: T) -> CmdResult {
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    Report::new(config, cfg.seed(), results)
        .to_json_string()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Build a named tail bound from the config's scalar parameters.
fn build_bound(name: &str, cfg: &RunConfig) -> Result<TailBound, CliError> {
    let params = &cfg.params;
    let get = |key: &str| -> Result<f64, CliError> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| usage(format!("bound '{name}' needs params.{key}")))
    };
    let bound = match name {
        "bennett_suprema" => {
            let c1 = params.get("c1").copied().unwrap_or(permcon::bounds::SUPREMA_C1);
            let c2 = params.get("c2").copied().unwrap_or(permcon::bounds::SUPREMA_C2);
            TailBound::bennett_suprema_with(get("esigma2_tilde")?, c1, c2)?
        }
        "bernstein_suprema" => TailBound::bernstein_suprema(get("esigma2")?)?,
        "bennett_hoeffding" => {
            TailBound::bennett_hoeffding(get("esigma2")?, cfg.zero_sum.unwrap_or(false))?
        }
        "bennett_hoeffding_centered" => TailBound::bennett_hoeffding_centered(get("variance")?)?,
        "bennett_positive_hoeffding" => TailBound::bennett_positive_hoeffding(get("ef")?)?,
        "chatterjee_bernstein" => TailBound::chatterjee_bernstein(get("ef")?)?,
        "tbk" => TailBound::tbk(get("v")?)?,
        "tbk_recentered" => TailBound::tbk_recentered(get("v")?, get("gap")?)?,
        "herbst_poisson" => {
            permcon::bounds::herbst_poisson(permcon::bounds::EntropyBoundParams {
                a: get("a")?,
                b: get("b")?,
                ..Default::default()
            })?
            .tail
        }
        "herbst_bernstein" => {
            permcon::bounds::herbst_bernstein(permcon::bounds::EntropyBoundParams {
                a: get("a")?,
                b: get("b")?,
                mean: get("mean")?,
                ..Default::default()
            })?
        }
        "herbst_bernstein2" => {
            permcon::bounds::herbst_bernstein2(permcon::bounds::EntropyBoundParams {
                epsilon: get("epsilon")?,
                b: get("b")?,
                ..Default::default()
            })?
        }
        other => return Err(usage(format!("unknown bound name '{other}'"))),
    };
    Ok(bound)
}

/// `bounds`: evaluate the selected closed-form bounds over a grid.
pub fn run_bounds(cfg: &RunConfig) -> CmdResult {
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| usage("bounds requires a grid"))?
        .materialize()?;
    let names = cfg
        .bounds
        .as_ref()
        .filter(|b| !b.is_empty())
        .ok_or_else(|| usage("bounds requires a nonempty bound list"))?;
    let bounds: Vec<TailBound> = names
        .iter()
        .map(|n| build_bound(n, cfg))
        .collect::<Result<_, _>>()?;
    match cfg.format() {
        OutputFormat::Csv => Ok(bounds_csv(&bounds, &grid)),
        OutputFormat::Json => {
            let curves: Vec<_> = bounds
                .iter()
                .map(|b| {
                    json!({
                        "name": b.name(),
                        "params": b.params(),
                        "domain_note": b.domain_note(),
                        "values": grid.iter().map(|&t| b.eval(t)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_report(cfg, json!({"grid": grid, "bounds": curves}))
        }
    }
}

fn resolve_oracle_family(cfg: &RunConfig) -> Result<MatrixFamily, CliError> {
    if let Some(m) = cfg.matrix_family().map_err(usage)? {
        return Ok(m);
    }
    if let Some(f) = cfg.vector_family().map_err(usage)? {
        let m = cfg
            .m
            .ok_or_else(|| usage("embedding a vector family requires m"))?;
        return Ok(MatrixFamily::from_vectors(f, m)?);
    }
    Err(usage("oracle requires a matrix (or a family plus m)"))
}

/// `oracle`: exact distribution by full enumeration; optional exact
/// entropy-inequality check at `lambda`.
pub fn run_oracle(cfg: &RunConfig) -> CmdResult {
    let family = resolve_oracle_family(cfg)?;
    let dist = enumerate_distribution(&family)?;
    let entropy = cfg
        .lambda
        .map(|l| check_entropy_inequality(&family, l))
        .transpose()?;
    match cfg.format() {
        OutputFormat::Csv => Ok(distribution_csv(&dist)),
        OutputFormat::Json => json_report(
            cfg,
            json!({
                "distribution": dist,
                "mean": dist.mean(),
                "variance": dist.variance(),
                "entropy_check": entropy,
            }),
        ),
    }
}

fn build_scenario(
    spec: &ScenarioSpec,
    master_seed: u64,
) -> Result<permcon::scenarios::AdversarialInstance, CliError> {
    let n = spec.n.ok_or_else(|| usage("scenario requires n"))?;
    let (m, k, l) = match spec.epsilon {
        Some(eps) => {
            let p = recommended_parameters(n, eps)?;
            (
                spec.m.unwrap_or(p.m),
                spec.k.unwrap_or(p.k),
                spec.l.unwrap_or(p.l),
            )
        }
        None => (
            spec.m.ok_or_else(|| usage("scenario requires m (or epsilon)"))?,
            spec.k.ok_or_else(|| usage("scenario requires k (or epsilon)"))?,
            spec.l.ok_or_else(|| usage("scenario requires l (or epsilon)"))?,
        ),
    };
    let placement = spec
        .placement_stream
        .map(|stream| SeedSpec::new(master_seed, stream));
    Ok(build_adversarial_instance(n, m, k, l, placement)?)
}

/// A named per-replicate statistic over the configured instance.
struct Statistic {
    label: String,
    m: usize,
    eval: Box<dyn Fn(SeedSpec) -> permcon::Result<f64> + Sync>,
    /// For default grids: (E Σ² proxy statistic, max deviation range).
    vector_family: Option<VectorFamily>,
}

fn resolve_statistic(cfg: &RunConfig) -> Result<Statistic, CliError> {
    let name = cfg
        .statistic
        .as_deref()
        .ok_or_else(|| usage("this command requires a statistic (z, zprime, sigma2, sigma2_tilde, s, w)"))?;
    match name {
        "z" | "zprime" | "sigma2" | "sigma2_tilde" => {
            let family = match cfg.vector_family().map_err(usage)? {
                Some(f) => f,
                None => match &cfg.scenario {
                    Some(spec) => build_scenario(spec, cfg.seed())?.family,
                    None => return Err(usage(format!("statistic '{name}' requires a family"))),
                },
            };
            let m = cfg
                .m
                .or_else(|| cfg.scenario.as_ref().and_then(|s| s.m))
                .or_else(|| {
                    cfg.scenario
                        .as_ref()
                        .and_then(|s| s.epsilon.zip(s.n))
                        .and_then(|(e, n)| recommended_parameters(n, e).ok())
                        .map(|p| p.m)
                })
                .ok_or_else(|| usage(format!("statistic '{name}' requires m")))?;
            let n = family.n();
            let fam = family.clone();
            let label = name.to_string();
            let eval: Box<dyn Fn(SeedSpec) -> permcon::Result<f64> + Sync> = match name {
                "z" => Box::new(move |s| Ok(eval_z(&fam, m, &draw_permutation(n, s)?)?.value)),
                "sigma2" => {
                    Box::new(move |s| Ok(eval_sigma2(&fam, m, &draw_permutation(n, s)?)?.value))
                }
                "zprime" => Box::new(move |s| {
                    Ok(eval_zprime(&fam, &draw_with_replacement(n, m, s)?)?.value)
                }),
                _ => Box::new(move |s| {
                    Ok(eval_sigma2_tilde(&fam, &draw_with_replacement(n, m, s)?)?.value)
                }),
            };
            Ok(Statistic {
                label,
                m,
                eval,
                vector_family: Some(family),
            })
        }
        "s" => {
            let family = cfg
                .matrix_family()
                .map_err(usage)?
                .ok_or_else(|| usage("statistic 's' requires a matrix family"))?;
            let n = family.n();
            Ok(Statistic {
                label: "s".into(),
                m: n,
                eval: Box::new(move |s| Ok(eval_s(&family, &draw_permutation(n, s)?)?.value)),
                vector_family: None,
            })
        }
        "w" => {
            let spec = cfg
                .scenario
                .as_ref()
                .ok_or_else(|| usage("statistic 'w' requires a scenario"))?;
            let inst = build_scenario(spec, cfg.seed())?;
            let (n, m) = (inst.n, inst.m);
            Ok(Statistic {
                label: "w".into(),
                m,
                eval: Box::new(move |s| {
                    Ok(eval_w(&inst, &draw_with_replacement(n, m, s)?)?.value as f64)
                }),
                vector_family: None,
            })
        }
        other => Err(usage(format!("unknown statistic '{other}'"))),
    }
}

/// `estimate`: Monte Carlo mean with standard error.
pub fn run_estimate(cfg: &RunConfig) -> CmdResult {
    let stat = resolve_statistic(cfg)?;
    let est = estimate_expectation(&stat.eval, cfg.reps(), SeedSpec::new(cfg.seed(), 0))?;
    match cfg.format() {
        OutputFormat::Csv => Ok(format!(
            "statistic,mean,std_error,n_reps\n{},{},{},{}\n",
            stat.label,
            fmt_float(est.mean),
            fmt_float(est.std_error),
            est.n_reps
        )),
        OutputFormat::Json => json_report(cfg, json!({"statistic": stat.label, "estimate": est})),
    }
}

/// `tail`: empirical survival curve with exact-binomial upper band.
pub fn run_tail(cfg: &RunConfig) -> CmdResult {
    let stat = resolve_statistic(cfg)?;
    let seed = SeedSpec::new(cfg.seed(), 0);
    let tail_seed = SeedSpec::new(cfg.seed(), PHASE_STRIDE);
    let (center, center_se) = match cfg.center {
        Some(c) => (c, 0.0),
        None => {
            let est = estimate_expectation(&stat.eval, cfg.reps(), seed)?;
            (est.mean, est.std_error)
        }
    };
    let grid = match &cfg.grid {
        Some(g) => g.materialize()?,
        None => {
            let family = stat.vector_family.as_ref().ok_or_else(|| {
                usage("tail requires an explicit grid for matrix/scenario statistics")
            })?;
            let es = estimate_expectation(
                |s| Ok(eval_sigma2(family, stat.m, &draw_permutation(family.n(), s)?)?.value),
                cfg.reps().min(10_000),
                seed,
            )?;
            let (lo, hi) = permcon::experiments::family_z_range(family, stat.m);
            default_grid(es.mean, hi - lo)?
        }
    };
    let curve = estimate_tail(
        &stat.eval,
        center,
        center_se,
        &grid,
        cfg.reps(),
        cfg.delta(),
        tail_seed,
    )?;
    match cfg.format() {
        OutputFormat::Csv => Ok(tail_curve_csv(&curve)),
        OutputFormat::Json => json_report(cfg, json!({"statistic": stat.label, "tail": curve})),
    }
}

/// `compare`: estimates, tail curve, bound curves, domination verdicts and
/// triviality flags for one instance.
pub fn run_compare(cfg: &RunConfig) -> CmdResult {
    let (family, default_m) = match cfg.vector_family().map_err(usage)? {
        Some(f) => (f, None),
        None => match &cfg.scenario {
            Some(spec) => {
                let inst = build_scenario(spec, cfg.seed())?;
                (inst.family.clone(), Some(inst.m))
            }
            None => return Err(usage("compare requires a family or a scenario")),
        },
    };
    let m = cfg
        .m
        .or(default_m)
        .ok_or_else(|| usage("compare requires m"))?;
    let mut opts = CompareOptions::new(m, cfg.reps(), SeedSpec::new(cfg.seed(), 0));
    opts.delta = cfg.delta();
    if let Some(g) = &cfg.grid {
        opts.grid = Some(g.materialize()?);
    }
    if let Some(bounds) = &cfg.bounds {
        opts.bounds = bounds.clone();
    }
    let results = compare_family(&family, &opts)?;
    match cfg.format() {
        OutputFormat::Csv => {
            let mut header = String::from("t,survival,upper_ci");
            for b in &results.bounds {
                header.push(',');
                header.push_str(&b.name);
            }
            let mut out = header + "\n";
            for (i, &t) in results.tail.grid.iter().enumerate() {
                out.push_str(&fmt_float(t));
                out.push(',');
                out.push_str(&fmt_float(results.tail.survival[i]));
                out.push(',');
                out.push_str(&fmt_float(results.tail.upper_ci[i]));
                for b in &results.bounds {
                    out.push(',');
                    out.push_str(&fmt_float(b.values[i]));
                }
                out.push('\n');
            }
            Ok(out)
        }
        OutputFormat::Json => json_report(cfg, results),
    }
}

/// `scenario`: build the adversarial instance and report its parameters
/// and analytics.
pub fn run_scenario(cfg: &RunConfig) -> CmdResult {
    let spec = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| usage("scenario requires a scenario block"))?;
    let recipe = spec
        .epsilon
        .zip(spec.n)
        .map(|(e, n)| recommended_parameters(n, e))
        .transpose()?;
    let inst = build_scenario(spec, cfg.seed())?;
    let sup_var = inst.sup_index_variance();
    match cfg.format() {
        OutputFormat::Csv => {
            let mut out = String::from("key,value\n");
            for (k, v) in [
                ("n", inst.n as f64),
                ("m", inst.m as f64),
                ("k", inst.k as f64),
                ("l", inst.l as f64),
                ("e_w", inst.analytics.e_w),
                ("e_sigma2_lo", inst.analytics.e_sigma2_lo),
                ("e_sigma2_hi", inst.analytics.e_sigma2_hi),
                ("sup_index_variance", sup_var),
                ("max_z", inst.max_z()),
                ("min_z", inst.min_z()),
            ] {
                out.push_str(&format!("{k},{}\n", fmt_float(v)));
            }
            Ok(out)
        }
        OutputFormat::Json => json_report(
            cfg,
            json!({
                "n": inst.n, "m": inst.m, "k": inst.k, "l": inst.l,
                "a": inst.a.iter().map(|&i| i + 1).collect::<Vec<_>>(),
                "b": inst.b.iter().map(|&i| i + 1).collect::<Vec<_>>(),
                "family": inst.family,
                "analytics": inst.analytics,
                "recipe": recipe,
                "sup_index_variance": sup_var,
                "z_range": [inst.min_z(), inst.max_z()],
            }),
        ),
    }
}
