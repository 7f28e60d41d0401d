//! Acceptance suite: one test per shipped claim, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Tolerances are
//! pinned here, not configurable.

use rayon::prelude::*;

use mre_core::eigmodels::{bernstein_fit, piecewise_linear_interpolant};
use mre_core::opmat::{diag_real, herm_eig, hermitian_part, operator_norm, CMatrix, C64};
use mre_core::oracle::{
    brute_force_measured, classical_kl, classical_renyi, measured_rel_entropy, measured_renyi,
    RenyiOrder, SolveOptions,
};
use mre_core::states::{sample_pair_in_class_seeded, ClassicalDist, DensityMatrix, StatePair};
use mre_core::stream::{mix_all, rng_from};

use mre_lab::config::FlatConfig;
use mre_lab::experiments;

const MASTER_SEED: u64 = 42;

fn verdict(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn commuting_pair(d: usize, seed: u64) -> (StatePair, Vec<f64>, Vec<f64>) {
    use rand::Rng;
    let mut rng = rng_from(seed, &[0xacc0]);
    let u = mre_core::states::random_unitary(d, &mut rng);
    let mut draw = || -> Vec<f64> {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 0.05).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    };
    let p = draw();
    let q = draw();
    let rho = DensityMatrix::new(&u * diag_real(&p) * u.adjoint()).unwrap();
    let sigma = DensityMatrix::new(&u * diag_real(&q) * u.adjoint()).unwrap();
    (StatePair::new(rho, sigma, None).unwrap(), p, q)
}

/// Criterion 1: on commuting pairs the exact solvers match the
/// classical divergences of the paired spectra within 1e-6.
#[test]
fn criterion_1_oracle_commuting_reduction() {
    let start = std::time::Instant::now();
    let opts = SolveOptions::default();
    let alphas = [0.25, 0.5, 2.0, 3.0];
    let mut worst = 0.0f64;
    for d in [2usize, 4, 8] {
        let local: Vec<f64> = (0..200usize)
            .into_par_iter()
            .map(|i| {
                let (pair, p, q) = commuting_pair(d, mix_all(MASTER_SEED, &[1, d as u64, i as u64]));
                let p = ClassicalDist::new(p).unwrap();
                let q = ClassicalDist::new(q).unwrap();
                let mut w: f64 = 0.0;
                let kl = measured_rel_entropy(&pair.rho, &pair.sigma, &opts).unwrap();
                w = w.max((kl.value - classical_kl(&p, &q).unwrap()).abs());
                for &alpha in &alphas {
                    let sol = measured_renyi(
                        RenyiOrder::new(alpha).unwrap(),
                        &pair.rho,
                        &pair.sigma,
                        &opts,
                    )
                    .unwrap();
                    w = w.max((sol.value - classical_renyi(alpha, &p, &q).unwrap()).abs());
                }
                w
            })
            .collect();
        worst = worst.max(local.into_iter().fold(0.0, f64::max));
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "1 (oracle commuting reduction)",
        worst <= 1e-6 && elapsed <= 120.0,
        &format!(
            "worst |solver - classical| = {worst:.3e} over 600 pairs x 5 orders (tol 1e-6), {elapsed:.1}s of 120s"
        ),
    );
}

/// Criterion 2: on random qubit pairs the variational value agrees with
/// the independent measurement search within 1e-4, and the fixed-point
/// residual meets its tolerance.
#[test]
fn criterion_2_oracle_vs_measurement_search() {
    let start = std::time::Instant::now();
    let opts = SolveOptions::default();
    let results: Vec<(f64, f64, f64)> = (0..50usize)
        .into_par_iter()
        .map(|i| {
            let pair = sample_pair_in_class_seeded(2, 4.0, mix_all(MASTER_SEED, &[2, i as u64]));
            let sol = measured_rel_entropy(&pair.rho, &pair.sigma, &opts).unwrap();
            let found = brute_force_measured(&pair.rho, &pair.sigma, None, 200, i as u64);
            (found - sol.value, (found - sol.value).abs(), sol.residual)
        })
        .collect();
    let over = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let gap = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let resid = results.iter().map(|r| r.2).fold(0.0f64, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let passed = gap <= 1e-4 && over <= 1e-6 && resid <= 1e-8 * 2.0 && elapsed <= 300.0;
    verdict(
        "2 (oracle vs measurement search)",
        passed,
        &format!(
            "worst gap {gap:.3e} (tol 1e-4), overshoot {over:.3e}, residual {resid:.3e} (tol 2e-8), 50 pairs, {elapsed:.1}s of 300s"
        ),
    );
}

/// Criterion 3: optimizer eigenvalues stay within log b over the
/// sampled class.
#[test]
fn criterion_3_optimizer_eigenvalue_bound() {
    let opts = SolveOptions::default();
    let b = 4.0f64;
    let mut worst = 0.0f64;
    for d in [2usize, 4, 8] {
        let local: Vec<f64> = (0..500usize)
            .into_par_iter()
            .map(|i| {
                let pair =
                    sample_pair_in_class_seeded(d, b, mix_all(MASTER_SEED, &[3, d as u64, i as u64]));
                let sol = measured_rel_entropy(&pair.rho, &pair.sigma, &opts).unwrap();
                sol.lambda_star.iter().fold(0.0f64, |a, &l| a.max(l.abs()))
            })
            .collect();
        worst = worst.max(local.into_iter().fold(0.0, f64::max));
    }
    verdict(
        "3 (optimizer eigenvalue bound)",
        worst <= b.ln() + 1e-6,
        &format!(
            "max |lambda| = {worst:.9} vs log b + 1e-6 = {:.9}, 1500 class samples",
            b.ln() + 1e-6
        ),
    );
}

/// Criterion 4: the spectral-decomposition perturbation inequality
/// holds with zero violations.
#[test]
fn criterion_4_operator_norm_inequality() {
    use rand::Rng;
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for d in 2..=8usize {
        for i in 0..1000usize {
            let mut rng = rng_from(MASTER_SEED, &[4, d as u64, i as u64]);
            let mut rand_herm = || {
                let g = CMatrix::from_fn(d, d, |_, _| {
                    C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                hermitian_part(&g)
            };
            let h1 = rand_herm();
            let h2 = rand_herm();
            let e1 = herm_eig(&h1).unwrap();
            let e2 = herm_eig(&h2).unwrap();
            let l1 = diag_real(&e1.values);
            let l2 = diag_real(&e2.values);
            let lhs = operator_norm(&(&h1 - &h2));
            let rhs = operator_norm(&(&l1 - &l2))
                + (operator_norm(&l1) + operator_norm(&l2))
                    * operator_norm(&(&e1.vectors - &e2.vectors));
            worst = worst.max(lhs - rhs);
            if lhs > rhs + 1e-12 {
                violations += 1;
            }
        }
    }
    verdict(
        "4 (operator norm inequality)",
        violations == 0,
        &format!("{violations} violations over 7000 pairs, worst margin {worst:.3e}"),
    );
}

/// Criterion 5: error rate of the estimator with the oracle basis in
/// the grid decays at the parametric rate and stays under the explicit
/// bound.
#[test]
fn criterion_5_rate_for_relative_entropy() {
    let start = std::time::Instant::now();
    let cfg = FlatConfig::empty();
    let report = experiments::run_sweep(&cfg, MASTER_SEED).unwrap();
    let slope = report.summary["slope"].as_f64().unwrap_or(f64::NAN);
    let bound_ok = report.summary["bound_ok"].as_bool().unwrap_or(false);
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "5 (relative entropy rate)",
        report.passed && elapsed <= 600.0,
        &format!(
            "slope {slope:.4} in [-0.65, -0.35], bound_ok {bound_ok}, 7 sample sizes x 50 trials, {elapsed:.1}s of 600s"
        ),
    );
}

/// Criterion 6: the same protocol at order 2 with its own constants.
#[test]
fn criterion_6_rate_for_renyi_order_two() {
    let cfg = FlatConfig::parse("sweep.alpha = 2\n").unwrap();
    let report = experiments::run_sweep(&cfg, MASTER_SEED).unwrap();
    let slope = report.summary["slope"].as_f64().unwrap_or(f64::NAN);
    let bound_ok = report.summary["bound_ok"].as_bool().unwrap_or(false);
    verdict(
        "6 (Renyi order-2 rate)",
        report.passed,
        &format!("slope {slope:.4} in [-0.65, -0.35], bound_ok {bound_ok}"),
    );
}

/// Criterion 7: the deviation tail is sub-Gaussian in shape.
#[test]
fn criterion_7_tail_shape() {
    let cfg = FlatConfig::empty();
    let report = experiments::run_tail(&cfg, MASTER_SEED).unwrap();
    let r2 = report.summary["r_squared"].as_f64().unwrap_or(f64::NAN);
    let monotone = report.summary["monotone"].as_bool().unwrap_or(false);
    verdict(
        "7 (tail shape)",
        report.passed,
        &format!("R^2 {r2:.3} >= 0.8, exceedance monotone {monotone}, 1000 trials at n=1000"),
    );
}

/// Criterion 8: with exact distributions the error is pure
/// approximation error, within the bound at every controlled covering
/// distance.
#[test]
fn criterion_8_approximation_error_isolation() {
    let b = 4.0;
    let mut violations = 0usize;
    let mut detail = String::new();
    for d in [2usize, 4] {
        let rows = experiments::approximation_error_rows(
            d,
            b,
            &[0.0, 0.05, 0.1],
            mix_all(MASTER_SEED, &[8, d as u64]),
        )
        .unwrap();
        for (target, measured, err, bound, ok) in rows {
            if !ok {
                violations += 1;
            }
            detail.push_str(&format!(
                "[d={d} target {target}: delta {measured:.2e}, err {err:.2e} <= {bound:.2e}] "
            ));
        }
    }
    verdict(
        "8 (approximation error isolation)",
        violations == 0,
        &format!("{violations} violations; {detail}"),
    );
}

/// Criterion 9: Bernstein approximation error and coefficient bounds.
#[test]
fn criterion_9_bernstein_suite() {
    let opts = SolveOptions::default();
    let logb = 4.0f64.ln();
    let mut worst = f64::NEG_INFINITY;

    // The kink function and eigenvalue-table interpolants at d = 8.
    let mut targets: Vec<(Box<dyn Fn(f64) -> f64>, f64, f64)> =
        vec![(Box::new(|x: f64| (x - 0.4).abs()), 1.0, 0.6)];
    for i in 0..3u64 {
        let pair = sample_pair_in_class_seeded(8, 4.0, mix_all(MASTER_SEED, &[9, i]));
        let sol = measured_rel_entropy(&pair.rho, &pair.sigma, &opts).unwrap();
        assert!(sol.lambda_star.iter().all(|l| l.abs() <= logb + 1e-6));
        let pl = piecewise_linear_interpolant(&sol.lambda_star);
        let (lip, sup) = (pl.lipschitz(), pl.sup_norm());
        targets.push((Box::new(move |x: f64| pl.at(x)), lip, sup));
    }

    for (f, lip, sup) in &targets {
        for k in 2..=64usize {
            let p = bernstein_fit(f, k);
            let bound = (lip + 0.5 * sup) * (k as f64).powf(-1.0 / 3.0);
            let mut err = 0.0f64;
            for g in 0..=10_000 {
                let x = g as f64 / 10_000.0;
                err = err.max((p.at(x) - f(x)).abs());
            }
            worst = worst.max(err - bound);
        }
        for k in 1..=12usize {
            let p = bernstein_fit(f, k);
            let cap = (2.0f64).powi(k as i32)
                * (1..=k).map(|i| i as f64).product::<f64>()
                * sup.max(1e-12);
            for &a in p.monomial_coeffs().unwrap() {
                worst = worst.max(a.abs() - cap);
            }
        }
    }
    verdict(
        "9 (Bernstein suite)",
        worst <= 0.0,
        &format!("worst bound margin {worst:.3e} over 4 targets, degrees 2..=64 (coefficients to 12)"),
    );
}

/// Criterion 10: compression preserves the divergence, the sector
/// dimensions match the recursion, and the compressed estimator reaches
/// the target error with fewer copies in at least 80% of paired trials.
#[test]
fn criterion_10_compression() {
    let cfg = FlatConfig::empty();
    let report = experiments::run_perminv(&cfg, MASTER_SEED).unwrap();
    let frac = report.summary["compressed_fewer_fraction"]
        .as_f64()
        .unwrap_or(0.0);
    let pres = report.summary["preservation_ok"].as_bool().unwrap_or(false);
    let dims = report.summary["dims_ok"].as_bool().unwrap_or(false);
    verdict(
        "10 (permutation-invariant compression)",
        report.passed,
        &format!(
            "preservation {pres} (tol 1e-5, 20 pairs x N in 2..4), dims {dims}, compressed fewer in {:.0}% of 20 paired trials (need >= 80%)",
            frac * 100.0
        ),
    );
}

/// Criterion 11: identical configurations reproduce byte-identical
/// result files.
#[test]
fn criterion_11_determinism() {
    let base = std::env::temp_dir().join(format!("mre-lab-det-{}", std::process::id()));
    let run = |tag: &str| {
        let out = base.join(tag);
        let cfg = FlatConfig::parse("sweep.n_list = 100,1000\nsweep.trials = 30\n").unwrap();
        let report = experiments::run_sweep(&cfg, MASTER_SEED).unwrap();
        report
            .write(&out, "sweep-n", MASTER_SEED, 2, cfg.resolved_map())
            .unwrap();
        let exact_cfg = FlatConfig::parse("pair.kind = demo\n").unwrap();
        let exact = experiments::run_exact(&exact_cfg, MASTER_SEED).unwrap();
        exact
            .write(&out.join("exact"), "exact", MASTER_SEED, 2, exact_cfg.resolved_map())
            .unwrap();
        out
    };
    let a = run("a");
    let b = run("b");
    let mut compared = 0usize;
    let mut identical = true;
    for rel in [
        "sweep_risk.csv",
        "sweep_aggregate.csv",
        "summary.json",
        "exact/exact_values.csv",
        "exact/exact_eigenvalues.csv",
        "exact/summary.json",
    ] {
        let ba = std::fs::read(a.join(rel)).unwrap();
        let bb = std::fs::read(b.join(rel)).unwrap();
        identical &= ba == bb;
        compared += 1;
    }
    let _ = std::fs::remove_dir_all(&base);
    verdict(
        "11 (bit-exact reproducibility)",
        identical,
        &format!("{compared} result files byte-compared across two runs"),
    );
}
