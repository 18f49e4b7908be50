//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`). Tolerances are pinned here
//! and nowhere else.
//!
//! Criteria that compare resolutions treat results at the rounding floor
//! (≤ 1e-12) as converged: the product rule is exact for integrands linear
//! in ψ, so those cases carry no discretization error to measure a ratio on.

use std::time::Instant;

use psifrac::expr::{parse, parse_str, tokenize};
use psifrac::fracops::{
    caputo_derivative, psi_bracket_derivative, Grid, SampledFunction, WeightMatrix,
};
use psifrac::reference::{
    mittag_leffler_case, power_law_case, run_case, validation_kernels, ReferenceCase,
};
use psifrac::solver::{banach_check, banach_find_h, ls_check, Problem, SolverConfig};
use psifrac::special::{gamma, mittag_leffler_default};

/// Errors at or below this are rounding noise, not discretization error.
const EXACTNESS_FLOOR: f64 = 1e-12;

fn report(criterion: u32, desc: &str, outcome: Result<(), String>) {
    match outcome {
        Ok(()) => println!("acceptance criterion {criterion}: PASS - {desc}"),
        Err(ref why) => println!("acceptance criterion {criterion}: FAIL - {desc}: {why}"),
    }
    if let Err(why) = outcome {
        panic!("criterion {criterion} failed: {why}");
    }
}

fn check(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn solve_error(case: &ReferenceCase<f64>, n: usize) -> (f64, usize, f64) {
    let config = SolverConfig {
        n,
        tol: 1e-10,
        ..SolverConfig::default()
    };
    let (report, sol) = run_case(case, &config).expect("reference solve");
    assert!(
        report.converged,
        "{} ({}) must converge",
        report.name, report.kernel_label
    );
    (
        report.max_error,
        report.iterations,
        sol.bc_residuals.nonlocal,
    )
}

#[test]
fn criterion_01_power_law_reproduction() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            let case = power_law_case(&kernel).map_err(|e| e.to_string())?;
            let t0 = Instant::now();
            let (err, _, _) = solve_error(&case, 512);
            let elapsed = t0.elapsed();
            check(err <= 1e-3, || {
                format!("max node error {err} > 1e-3 on {}", kernel.label())
            })?;
            check(elapsed.as_secs_f64() <= 5.0, || {
                format!("runtime {elapsed:?} > 5 s on {}", kernel.label())
            })?;
        }
        Ok(())
    })();
    report(
        1,
        "power-law solution reproduced at n=512 within 1e-3 in <=5s",
        outcome,
    );
}

#[test]
fn criterion_02_mittag_leffler_reproduction() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            let case = mittag_leffler_case(&kernel).map_err(|e| e.to_string())?;
            let (err, iterations, _) = solve_error(&case, 512);
            check(err <= 1e-3, || {
                format!("max node error {err} > 1e-3 on {}", kernel.label())
            })?;
            check(iterations <= 60, || {
                format!("{iterations} iterations > 60 on {}", kernel.label())
            })?;
        }
        Ok(())
    })();
    report(
        2,
        "Mittag-Leffler solution reproduced at n=512 within 1e-3 in <=60 iterations",
        outcome,
    );
}

#[test]
fn criterion_03_convergence_order() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            for case in [
                power_law_case(&kernel).map_err(|e| e.to_string())?,
                mittag_leffler_case(&kernel).map_err(|e| e.to_string())?,
            ] {
                let (err_256, _, _) = solve_error(&case, 256);
                let (err_512, _, _) = solve_error(&case, 512);
                if err_256 <= EXACTNESS_FLOOR && err_512 <= EXACTNESS_FLOOR {
                    // Solved exactly by the product rule; nothing to measure.
                    continue;
                }
                let ratio = err_256 / err_512;
                check(ratio >= 3.0, || {
                    format!(
                        "error ratio {ratio} < 3.0 for {} on {} ({err_256} -> {err_512})",
                        case.name,
                        kernel.label()
                    )
                })?;
            }
        }
        Ok(())
    })();
    report(
        3,
        "error ratio n=256 -> n=512 at least 3.0 (or exact at rounding floor)",
        outcome,
    );
}

#[test]
fn criterion_04_power_formula() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            for &beta in &[1.0f64, 2.0, 3.5] {
                for &alpha in &[0.5f64, 2.5, 5.0] {
                    let mut errs = Vec::new();
                    for &n in &[256usize, 512] {
                        let grid =
                            Grid::new(&kernel, 0.0, 1.0, n, None).map_err(|e| e.to_string())?;
                        let w = WeightMatrix::build(alpha, &grid).map_err(|e| e.to_string())?;
                        let x = SampledFunction::new(
                            (0..grid.len())
                                .map(|i| grid.s_shifted(i).powf(beta - 1.0))
                                .collect(),
                        )
                        .map_err(|e| e.to_string())?;
                        let out = w.apply(&x).map_err(|e| e.to_string())?;
                        let c = gamma(beta).unwrap() / gamma(beta + alpha).unwrap();
                        let mut err: f64 = 0.0;
                        let mut sup: f64 = 0.0;
                        for i in 0..grid.len() {
                            let exact = c * grid.s_shifted(i).powf(beta + alpha - 1.0);
                            err = err.max((out.values()[i] - exact).abs());
                            sup = sup.max(exact.abs());
                        }
                        errs.push(err / sup);
                    }
                    check(errs[1] <= 5e-3, || {
                        format!(
                            "relative error {} > 5e-3 (alpha={alpha}, beta={beta}, {})",
                            errs[1],
                            kernel.label()
                        )
                    })?;
                    if errs[1] > EXACTNESS_FLOOR {
                        check(errs[1] < errs[0], || {
                            format!(
                                "error not decreasing with n: {errs:?} (alpha={alpha}, beta={beta}, {})",
                                kernel.label()
                            )
                        })?;
                    }
                }
            }
        }
        Ok(())
    })();
    report(
        4,
        "power-function integral formula within 5e-3, decreasing with n",
        outcome,
    );
}

#[test]
fn criterion_05_mittag_leffler_integral_formula() {
    let outcome = (|| {
        let alpha = 2.5f64;
        for kernel in validation_kernels::<f64>() {
            let grid = Grid::new(&kernel, 0.0, 1.0, 512, None).map_err(|e| e.to_string())?;
            let w = WeightMatrix::build(alpha, &grid).map_err(|e| e.to_string())?;
            let x = SampledFunction::new(
                (0..grid.len())
                    .map(|i| mittag_leffler_default(alpha, grid.s_shifted(i).powf(alpha)).unwrap())
                    .collect(),
            )
            .map_err(|e| e.to_string())?;
            let out = w.apply(&x).map_err(|e| e.to_string())?;
            let mut err: f64 = 0.0;
            for i in 0..grid.len() {
                let exact =
                    mittag_leffler_default(alpha, grid.s_shifted(i).powf(alpha)).unwrap() - 1.0;
                err = err.max((out.values()[i] - exact).abs());
            }
            check(err <= 1e-3, || {
                format!("absolute error {err} > 1e-3 on {}", kernel.label())
            })?;
        }
        Ok(())
    })();
    report(
        5,
        "Mittag-Leffler integral formula within 1e-3 absolute at n=512",
        outcome,
    );
}

#[test]
fn criterion_06_caputo_inverts_integral() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            let mut errors = Vec::new();
            for &n in &[128usize, 256, 512] {
                let grid = Grid::new(&kernel, 0.0, 1.0, n, None).map_err(|e| e.to_string())?;
                let alpha = 2.5;
                let w = WeightMatrix::build(alpha, &grid).map_err(|e| e.to_string())?;
                let x = SampledFunction::new(
                    (0..grid.len()).map(|i| grid.s_values()[i].sin()).collect(),
                )
                .map_err(|e| e.to_string())?;
                let ix = w.apply(&x).map_err(|e| e.to_string())?;
                let g =
                    psi_bracket_derivative(&kernel, &grid, &ix, 3).map_err(|e| e.to_string())?;
                let back = caputo_derivative(alpha, &grid, &g).map_err(|e| e.to_string())?;
                let err = back
                    .values()
                    .iter()
                    .zip(x.values().iter())
                    .fold(0.0f64, |m, (b, v)| m.max((b - v).abs()));
                errors.push(err);
            }
            check(errors[2] <= 5e-2, || {
                format!("error {} > 5e-2 at n=512 on {}", errors[2], kernel.label())
            })?;
            check(errors[0] > errors[1] && errors[1] > errors[2], || {
                format!(
                    "error not monotone over n: {errors:?} on {}",
                    kernel.label()
                )
            })?;
        }
        Ok(())
    })();
    report(
        6,
        "Caputo of integral reproduces sin(psi) within 5e-2, shrinking monotonically",
        outcome,
    );
}

#[test]
fn criterion_07_semigroup_law() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            for &(alpha, beta) in &[(0.5f64, 0.7f64), (2.5, 2.5)] {
                let grid = Grid::new(&kernel, 0.0, 1.0, 512, None).map_err(|e| e.to_string())?;
                let w = WeightMatrix::build(alpha, &grid).map_err(|e| e.to_string())?;
                let c_mid = 1.0 / gamma(2.0 + beta).unwrap();
                let mid = SampledFunction::new(
                    (0..grid.len())
                        .map(|i| c_mid * grid.s_shifted(i).powf(1.0 + beta))
                        .collect(),
                )
                .map_err(|e| e.to_string())?;
                let out = w.apply(&mid).map_err(|e| e.to_string())?;
                let c_full = 1.0 / gamma(2.0 + alpha + beta).unwrap();
                let mut err: f64 = 0.0;
                let mut sup: f64 = 0.0;
                for i in 0..grid.len() {
                    let exact = c_full * grid.s_shifted(i).powf(1.0 + alpha + beta);
                    err = err.max((out.values()[i] - exact).abs());
                    sup = sup.max(exact.abs());
                }
                check(err / sup <= 5e-3, || {
                    format!(
                        "discrepancy {} > 5e-3 for ({alpha},{beta}) on {}",
                        err / sup,
                        kernel.label()
                    )
                })?;
            }
        }
        Ok(())
    })();
    report(7, "semigroup law discrepancy within 5e-3 at n=512", outcome);
}

#[test]
fn criterion_08_boundary_condition_enforcement() {
    let outcome = (|| {
        for kernel in validation_kernels::<f64>() {
            for case in [
                power_law_case(&kernel).map_err(|e| e.to_string())?,
                mittag_leffler_case(&kernel).map_err(|e| e.to_string())?,
            ] {
                let (_, _, nonlocal) = solve_error(&case, 512);
                check(nonlocal.abs() <= 1e-6, || {
                    format!(
                        "|x(b) - K I x(v)| = {} > 1e-6 for {} on {}",
                        nonlocal.abs(),
                        case.name,
                        kernel.label()
                    )
                })?;
            }
        }
        Ok(())
    })();
    report(
        8,
        "nonlocal boundary condition enforced within 1e-6 at n=512",
        outcome,
    );
}

#[test]
fn criterion_09_checker_sanity() {
    let outcome = (|| {
        let kernel = validation_kernels::<f64>().remove(0);
        let case = power_law_case(&kernel).map_err(|e| e.to_string())?;
        let zero = |_t: f64| Ok(0.0);
        let rep = banach_check(&case.problem, &zero, 1.0, 256).map_err(|e| e.to_string())?;
        check(rep.bound == 0.0 && rep.contractive, || {
            format!("L=0 bound should be 0, got {}", rep.bound)
        })?;
        let h = banach_find_h(&case.problem, &zero, 16, 256).map_err(|e| e.to_string())?;
        check(h == Some(1.0), || {
            format!("L=0 h should be b-a = 1, got {h:?}")
        })?;

        // Zero growth bounds with zero boundary data accept the smallest
        // scanned radius.
        let p = Problem::new(
            2.5,
            0.0,
            1.0,
            0.0,
            0.0,
            case.problem.coupling(),
            0.5,
            Box::new(|_, _| Ok(0.0)),
            kernel,
        )
        .map_err(|e| e.to_string())?;
        let lam = |u: f64| Ok(u);
        let ls = ls_check(&p, &zero, &zero, &lam, 10.0, 100, 256).map_err(|e| e.to_string())?;
        check(ls.r_found == Some(0.1), || {
            format!("smallest scanned R = 0.1 expected, got {:?}", ls.r_found)
        })?;
        Ok(())
    })();
    report(9, "checkers accept the trivial hypotheses exactly", outcome);
}

#[test]
fn criterion_10_special_function_accuracy() {
    let outcome = (|| {
        // Gamma recurrence on 100 seeded random points.
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(0.1..20.0);
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            let rel = (lhs - rhs).abs() / rhs.abs();
            check(rel <= 1e-12, || {
                format!("gamma recurrence off by {rel} at x = {x}")
            })?;
        }
        // E_1 against exp on [-5, 5].
        for i in 0..=40 {
            let z = -5.0 + 0.25 * i as f64;
            let e = mittag_leffler_default(1.0, z).unwrap();
            let rel = (e - z.exp()).abs() / z.exp();
            check(rel <= 1e-12, || format!("E_1({z}) off exp by {rel}"))?;
        }
        // E_2(1) against cosh(1).
        let e2 = mittag_leffler_default(2.0, 1.0).unwrap();
        let rel = (e2 - 1.0f64.cosh()).abs() / 1.0f64.cosh();
        check(rel <= 1e-12, || format!("E_2(1) off cosh(1) by {rel}"))?;
        Ok(())
    })();
    report(
        10,
        "gamma recurrence, E_1 vs exp, E_2(1) vs cosh(1) within 1e-12",
        outcome,
    );
}

#[test]
fn criterion_11_expression_corpus() {
    let outcome = (|| {
        let raw = include_str!("data/expr_corpus.txt");
        let mut entries = 0usize;
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(';').map(str::trim).collect();
            check(parts.len() == 4, || {
                format!("line {}: expected 4 fields", lineno + 1)
            })?;
            let (src, bindings_src, expected_src, tol_src) =
                (parts[0], parts[1], parts[2], parts[3]);

            let mut bindings: Vec<(String, f64)> = Vec::new();
            if bindings_src != "-" {
                for pair in bindings_src.split_whitespace() {
                    let (name, value) = pair
                        .split_once('=')
                        .ok_or_else(|| format!("line {}: bad binding '{pair}'", lineno + 1))?;
                    bindings.push((name.to_string(), value.parse().unwrap()));
                }
            }
            let bindings_ref: Vec<(&str, f64)> =
                bindings.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            let expected: f64 = expected_src.parse().unwrap();

            // Round trip: print, re-lex, re-parse, compare structurally.
            let tokens = tokenize(src).map_err(|e| format!("{src}: {e}"))?;
            let node = parse::<f64>(&tokens).map_err(|e| format!("{src}: {e}"))?;
            let printed = node.to_string();
            let reparsed =
                parse_str::<f64>(&printed).map_err(|e| format!("{src} -> '{printed}': {e}"))?;
            check(node == reparsed, || {
                format!("{src}: round trip changed the tree ('{printed}')")
            })?;

            let got = node
                .evaluate(&bindings_ref)
                .map_err(|e| format!("{src}: {e}"))?;
            if tol_src == "exact" {
                check(got == expected, || format!("{src}: {got} != {expected}"))?;
            } else {
                let tol: f64 = tol_src.parse().unwrap();
                let denom = expected.abs().max(1.0);
                check((got - expected).abs() / denom <= tol, || {
                    format!("{src}: {got} vs {expected} (tol {tol})")
                })?;
            }
            entries += 1;
        }
        check(entries >= 50, || {
            format!("corpus has only {entries} entries")
        })?;
        Ok(())
    })();
    report(
        11,
        "expression corpus round-trips and evaluates with zero failures",
        outcome,
    );
}
