//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).

use permcon::bounds::{
    bennett_positive_hoeffding, bennett_suprema, bernstein_suprema, chernoff_optimize,
    herbst_bernstein, herbst_bernstein2, herbst_poisson, EntropyBoundParams, MgfBound, TailBound,
};
use permcon::experiments::{compare_family, CompareOptions, CompareResults};
use permcon::family::{ConvexTestFunction, Matrix, MatrixFamily, VectorFamily};
use permcon::montecarlo::{check_convex_order, estimate_expectation, ConvexOrderVerdict};
use permcon::oracle::{check_entropy_inequality, enumerate_distribution};
use permcon::report::Report;
use permcon::sampling::{draw_permutation, draw_with_replacement, SeedSpec};
use permcon::scenarios::{
    build_adversarial_instance, eval_w, random_matrix, random_vector_family, recommended_cap,
    recommended_parameters,
};
use permcon::stats::{center_matrix, eval_s, eval_zprime, swap_deficit_sums};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(n: u32, description: &str, failures: &[String]) {
    let pass = failures.is_empty();
    println!(
        "criterion {n} [{description}]: {}{}",
        if pass { "PASS" } else { "FAIL" },
        if pass {
            String::new()
        } else {
            format!(" — {}", failures.join("; "))
        }
    );
    assert!(pass, "criterion {n} failed: {}", failures.join("; "));
}

#[test]
fn criterion_1_bound_formula_spot_checks() {
    let mut failures = Vec::new();
    let mut check = |name: &str, got: f64, expected: f64| {
        if (got - expected).abs() > 1e-12 {
            failures.push(format!("{name}: got {got}, expected {expected}"));
        }
    };
    check(
        "bennett_suprema(46, 1)",
        bennett_suprema(46.0, 1.0).unwrap(),
        2.0 * (-(46.0 / 36.0) * 2.0f64.ln()).exp(),
    );
    check(
        "bernstein_suprema(32, 8)",
        bernstein_suprema(32.0, 8.0).unwrap(),
        (-1.0f64).exp(),
    );
    check(
        "bennett_positive_hoeffding(4, 1)",
        bennett_positive_hoeffding(4.0, 1.0).unwrap(),
        0.5,
    );
    let hp = herbst_poisson(EntropyBoundParams {
        a: 1.0,
        b: 1.0,
        ..Default::default()
    })
    .unwrap();
    check("herbst_poisson(1,1).tail(2)", hp.tail.eval(2.0), 0.5);
    let hb2 = herbst_bernstein2(EntropyBoundParams {
        epsilon: 1.0 / 16.0,
        b: 32.0,
        ..Default::default()
    })
    .unwrap();
    check("herbst_bernstein2(1/16, 32).tail(16)", hb2.eval(16.0), (-0.5f64).exp());
    criterion(1, "bound formula spot-checks", &failures);
}

#[test]
fn criterion_2_exact_oracle_domination() {
    let mut failures = Vec::new();
    for n in 4..=8usize {
        let a = Matrix::identity(n).unwrap();
        let centered = center_matrix(&a).unwrap();
        if (centered.variance - 1.0).abs() > 1e-12 {
            failures.push(format!("n={n}: Var(f) = {} != 1", centered.variance));
        }
        let dist = enumerate_distribution(&MatrixFamily::singleton(a)).unwrap();
        if (dist.variance() - centered.variance).abs() > 1e-12 {
            failures.push(format!(
                "n={n}: enumerated variance {} != centered {}",
                dist.variance(),
                centered.variance
            ));
        }
        let mean = dist.mean();
        let bound = TailBound::bennett_hoeffding_centered(centered.variance).unwrap();
        for (v, tail) in dist.upper_tails() {
            if v < mean {
                continue;
            }
            let t = v - mean;
            let b = bound.eval(t);
            if tail > b {
                failures.push(format!(
                    "n={n}: exact tail {tail} at deviation {t} exceeds bound {b}"
                ));
            }
        }
    }
    criterion(2, "exact-oracle domination (fixed points, n=4..8)", &failures);
}

#[test]
fn criterion_3_deterministic_swap_inequalities() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for trial in 0..1000u64 {
        let n = rng.random_range(2..=50);
        let perm = draw_permutation(n, SeedSpec::new(0xC3, trial)).unwrap();

        // gains against 2 Σ a_ij for a ∈ [0,1]^{n×n}
        let a = random_matrix(n, SeedSpec::new(0xC3A, trial), (0.0, 1.0)).unwrap();
        let fam = MatrixFamily::singleton(a.clone());
        let sums = swap_deficit_sums(&fam, &perm).unwrap();
        if sums.sum_gain > 2.0 * a.sum() {
            failures.push(format!(
                "trial {trial}: Σ(f_ij-f)+ = {} > 2Σa = {}",
                sums.sum_gain,
                2.0 * a.sum()
            ));
        }
        // deficit squares against 2nS for R ⊂ [0,1]
        let s = eval_s(&fam, &perm).unwrap().value;
        if sums.sum_pos_sq > 2.0 * n as f64 * s {
            failures.push(format!(
                "trial {trial}: Σ(S-S_ij)+² = {} > 2nS = {}",
                sums.sum_pos_sq,
                2.0 * n as f64 * s
            ));
        }

        // deficit squares against 8n(Σ_R² + (1/n)Σa²) for [-1,1] singletons
        let b = random_matrix(n, SeedSpec::new(0xC3B, trial), (-1.0, 1.0)).unwrap();
        let famb = MatrixFamily::singleton(b.clone());
        let sums = swap_deficit_sums(&famb, &perm).unwrap();
        let sigma_r2 = permcon::stats::eval_matrix_sigma2(&famb, &perm).unwrap().value;
        let rhs = 8.0 * n as f64 * (sigma_r2 + b.sum_sq() / n as f64);
        if sums.sum_pos_sq > rhs {
            failures.push(format!(
                "trial {trial}: Σ(S-S_ij)+² = {} > 8n(Σ_R²+EΣ_R²) = {rhs}",
                sums.sum_pos_sq
            ));
        }
        if failures.len() > 5 {
            break;
        }
    }
    criterion(3, "deterministic swap inequalities, 1000 random pairs", &failures);
}

// ----- shared instances for criteria 4-6 and the determinism re-run -----

const REPS_C4: usize = 100_000;
const REPS_C6: usize = 20_000;

fn adversarial_c4() -> permcon::scenarios::AdversarialInstance {
    build_adversarial_instance(2000, 1000, 200, recommended_cap(200), None).unwrap()
}

fn random_families_c4() -> Vec<VectorFamily> {
    (0..5)
        .map(|i| random_vector_family(200, 20, SeedSpec::new(0xC4F, i), (-1.0, 1.0)).unwrap())
        .collect()
}

fn run_c4(master_seed: u64) -> Vec<(String, CompareResults)> {
    let mut runs = Vec::new();
    let inst = adversarial_c4();
    let opts = CompareOptions::new(inst.m, REPS_C4, SeedSpec::new(master_seed, 0));
    runs.push((
        format!("adversarial n={} m={} k={} l={}", inst.n, inst.m, inst.k, inst.l),
        compare_family(&inst.family, &opts).unwrap(),
    ));
    for (i, family) in random_families_c4().iter().enumerate() {
        let opts = CompareOptions::new(100, REPS_C4, SeedSpec::new(master_seed, (i as u64 + 1) * 2_u64.pow(40)));
        runs.push((
            format!("random explicit family #{i} n=200 m=100"),
            compare_family(family, &opts).unwrap(),
        ));
    }
    runs
}

#[test]
fn criterion_4_monte_carlo_domination() {
    let mut failures = Vec::new();
    for (label, results) in run_c4(0xC4) {
        let verdict = results
            .domination
            .iter()
            .find(|d| d.bound_name == "bennett_suprema")
            .expect("bennett verdict present");
        if !verdict.pass {
            failures.push(format!(
                "{label}: upper CI exceeds the bound by {:?} at t = {:?}",
                verdict.worst_margin, verdict.worst_t
            ));
        }
    }
    criterion(4, "Monte Carlo domination of the suprema Bennett bound", &failures);
}

fn run_c5(master_seed: u64) -> Vec<(String, Vec<ConvexOrderVerdict>)> {
    let mut runs = Vec::new();
    let mut instances: Vec<(String, VectorFamily, usize)> = Vec::new();
    let inst = adversarial_c4();
    instances.push(("adversarial".into(), inst.family.clone(), inst.m));
    for (i, family) in random_families_c4().into_iter().enumerate() {
        instances.push((format!("random #{i}"), family, 100));
    }
    for (i, (label, family, m)) in instances.into_iter().enumerate() {
        let base = SeedSpec::new(master_seed, i as u64 * 2_u64.pow(40));
        let n = family.n();
        let ezprime = estimate_expectation(
            |s| Ok(eval_zprime(&family, &draw_with_replacement(n, m, s)?)?.value),
            REPS_C4,
            base,
        )
        .unwrap();
        let phis = [
            ConvexTestFunction::Identity,
            ConvexTestFunction::PositivePart {
                shift: ezprime.mean,
            },
            ConvexTestFunction::Exp { rate: 0.05 },
            ConvexTestFunction::Exp { rate: 0.2 },
        ];
        let verdicts = check_convex_order(
            &family,
            m,
            &phis,
            REPS_C4,
            SeedSpec::new(master_seed, i as u64 * 2_u64.pow(40) + 2_u64.pow(36)),
        )
        .unwrap();
        runs.push((label, verdicts));
    }
    runs
}

#[test]
fn criterion_5_convex_order() {
    let mut failures = Vec::new();
    for (label, verdicts) in run_c5(0xC5) {
        for v in verdicts {
            if !v.pass {
                failures.push(format!(
                    "{label}, φ = {}: Êφ(Z) = {} > Êφ(Z') + 4SE = {}",
                    v.phi.label(),
                    v.e_phi_z.mean,
                    v.e_phi_zprime.mean + (v.slack + v.e_phi_z.mean - v.e_phi_zprime.mean)
                ));
            }
        }
    }
    criterion(5, "convex order Êφ(Z) ≤ Êφ(Z') + 4·SE", &failures);
}

struct C6Run {
    e_w: permcon::montecarlo::EstimateWithError,
    e_w_analytic: f64,
    k: f64,
    results: CompareResults,
}

fn run_c6(master_seed: u64) -> C6Run {
    let params = recommended_parameters(10_000, 0.25).unwrap();
    let inst =
        build_adversarial_instance(params.n, params.m, params.k, params.l, None).unwrap();
    let e_w = estimate_expectation(
        |s| {
            let draw = draw_with_replacement(inst.n, inst.m, s)?;
            Ok(eval_w(&inst, &draw)?.value as f64)
        },
        REPS_C6,
        SeedSpec::new(master_seed, 2_u64.pow(40)),
    )
    .unwrap();
    let opts = CompareOptions::new(inst.m, REPS_C6, SeedSpec::new(master_seed, 0));
    let results = compare_family(&inst.family, &opts).unwrap();
    C6Run {
        e_w,
        e_w_analytic: inst.analytics.e_w,
        k: inst.k as f64,
        results,
    }
}

#[test]
fn criterion_6_adversarial_instance_analytics() {
    let run = run_c6(0xC6);
    let mut failures = Vec::new();

    if (run.e_w.mean - run.e_w_analytic).abs() > 4.0 * run.e_w.std_error {
        failures.push(format!(
            "Ê W = {} vs analytic {} (4SE = {})",
            run.e_w.mean,
            run.e_w_analytic,
            4.0 * run.e_w.std_error
        ));
    }
    let est = &run.results.estimates;
    let target = run.k / 4.0;
    if (est.e_zprime.mean - target).abs() > 0.05 * target {
        failures.push(format!("Ê Z' = {} not within 5% of k/4 = {target}", est.e_zprime.mean));
    }
    if est.gap < 0.04 * run.k {
        failures.push(format!("gap {} < 0.04k = {}", est.gap, 0.04 * run.k));
    }

    let tbk = run
        .results
        .bounds
        .iter()
        .find(|b| b.name == "tbk_recentered")
        .expect("tbk curve");
    let bennett = run
        .results
        .bounds
        .iter()
        .find(|b| b.name == "bennett_suprema")
        .expect("bennett curve");
    let cutoff = 0.8 * est.gap;
    for (i, &t) in run.results.tail.grid.iter().enumerate() {
        if t <= cutoff && tbk.values[i] < 1.0 {
            failures.push(format!("re-centered TBK = {} < 1 at t = {t} <= {cutoff}", tbk.values[i]));
        }
    }
    if !bennett.values.iter().any(|&v| v < 1.0) {
        failures.push("bennett_suprema never drops below 1 on the deviation grid".into());
    }
    criterion(6, "adversarial instance analytics at n = 10^4", &failures);
}

#[test]
fn criterion_7_chernoff_never_beaten_by_closed_forms() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    for trial in 0..100 {
        let a = rng.random_range(0.05..5.0);
        let b = rng.random_range(0.05..5.0);
        let mean = rng.random_range(0.0..3.0);
        let eps = rng.random_range(0.01..1.0);
        let t = rng.random_range(0.0..60.0);

        let cases: Vec<(&str, f64, MgfBound)> = vec![
            (
                "poisson",
                herbst_poisson(EntropyBoundParams {
                    a,
                    b,
                    ..Default::default()
                })
                .unwrap()
                .tail
                .eval(t),
                MgfBound::poisson(a, b).unwrap(),
            ),
            (
                "bernstein",
                herbst_bernstein(EntropyBoundParams {
                    a,
                    b,
                    mean,
                    ..Default::default()
                })
                .unwrap()
                .eval(t),
                MgfBound::quadratic_on(2.0 * (a * mean + b), 1.0 / (2.0 * a)).unwrap(),
            ),
            (
                "bernstein2",
                herbst_bernstein2(EntropyBoundParams {
                    epsilon: eps,
                    b,
                    ..Default::default()
                })
                .unwrap()
                .eval(t),
                MgfBound::quadratic_on(b, eps).unwrap(),
            ),
        ];
        for (name, closed, mgf) in cases {
            let opt = chernoff_optimize(&mgf, t, 0.0).unwrap();
            if opt.bound > closed * (1.0 + 1e-9) {
                failures.push(format!(
                    "trial {trial} {name}: optimized {} > closed form {closed}",
                    opt.bound
                ));
            }
        }
    }
    criterion(7, "Chernoff optimizer never exceeds the closed-form choices", &failures);
}

#[test]
fn criterion_8_entropy_inequality_exact() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    for trial in 0..50 {
        let n = rng.random_range(3..=6);
        let a = random_matrix(n, SeedSpec::new(0xC8, trial), (-1.0, 1.0)).unwrap();
        let fam = MatrixFamily::singleton(a);
        for lambda in [0.1, 0.5, 1.0] {
            let check = check_entropy_inequality(&fam, lambda).unwrap();
            if !check.pass {
                failures.push(format!(
                    "trial {trial} n={n} λ={lambda}: Ent = {} > rhs = {}",
                    check.lhs, check.rhs
                ));
            }
        }
    }
    criterion(8, "entropy inequality, 50 random singletons × 3 λ", &failures);
}

#[test]
fn criterion_9_determinism_of_report_files() {
    let render = |seed: u64| -> Vec<u8> {
        let c4 = run_c4(seed);
        let c5 = run_c5(seed);
        let c6 = run_c6(seed);
        let config = serde_json::json!({
            "suite": "acceptance-determinism",
            "seed": seed,
            "reps": {"compare": REPS_C4, "analytics": REPS_C6},
        });
        let results = serde_json::json!({
            "compare_runs": c4.iter().map(|(label, r)| serde_json::json!({
                "label": label, "results": r,
            })).collect::<Vec<_>>(),
            "convex_order_runs": c5.iter().map(|(label, v)| serde_json::json!({
                "label": label, "verdicts": v,
            })).collect::<Vec<_>>(),
            "analytics": serde_json::json!({
                "e_w": c6.e_w, "e_w_analytic": c6.e_w_analytic, "results": c6.results,
            }),
        });
        Report::new(config, seed, results)
            .to_json_string()
            .unwrap()
            .into_bytes()
    };
    let first = render(0xC9);
    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("run_a.json");
    let path_b = dir.path().join("run_b.json");
    permcon::report::atomic_write(&path_a, &first).unwrap();
    let second = render(0xC9);
    permcon::report::atomic_write(&path_b, &second).unwrap();
    let bytes_a = std::fs::read(&path_a).unwrap();
    let bytes_b = std::fs::read(&path_b).unwrap();
    let mut failures = Vec::new();
    if bytes_a != bytes_b {
        failures.push("two identically seeded runs produced different report bytes".into());
    }
    criterion(9, "bit-identical reports across identically seeded runs", &failures);
}
