//! The solve / check / validate subcommands and their exit codes.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use psifrac::reference::{mittag_leffler_case, power_law_case, run_case, validation_kernels};
use psifrac::solver::{banach_check, banach_find_h, ls_check, Solution, SolveStatus, SolverConfig};

use crate::config::{load_config, LoadError, ProblemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS_UNSATISFIED: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_CONFIG: i32 = 5;

/// Solution table format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Which hypothesis checker to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    Banach,
    LeraySchauder,
}

fn load_or_report(path: &Path) -> Result<ProblemConfig, i32> {
    match load_config(path) {
        Ok(cfg) => Ok(cfg),
        Err(LoadError::Io(e)) => {
            eprintln!("cannot read config {}: {e}", path.display());
            Err(EXIT_IO)
        }
        Err(err @ LoadError::Invalid(_)) => {
            eprintln!("{err}");
            Err(EXIT_CONFIG)
        }
    }
}

fn diagnostics_json(solution: &Solution<f64>) -> serde_json::Value {
    json!({
        "status": match solution.status {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterExceeded => "non-convergence",
            SolveStatus::Diverged => "diverged",
        },
        "converged": solution.converged(),
        "iterations": solution.iterations,
        "gamma_x": solution.gamma_x,
        "final_update_norm": solution.final_update_norm,
        "volterra_residual": solution.volterra_residual,
        "bc_residuals": {
            "x_at_a": solution.bc_residuals.at_a,
            "slope_at_a": solution.bc_residuals.slope_at_a,
            "nonlocal": solution.bc_residuals.nonlocal,
        },
    })
}

fn write_table(
    path: &Path,
    format: OutputFormat,
    solution: &Solution<f64>,
    diagnostics: &serde_json::Value,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        OutputFormat::Csv => {
            writeln!(out, "t,psi_t,x")?;
            for (i, &t) in solution.grid.nodes().iter().enumerate() {
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e}",
                    t,
                    solution.grid.s_values()[i],
                    solution.x.values()[i]
                )?;
            }
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = solution
                .grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    json!({
                        "t": t,
                        "psi_t": solution.grid.s_values()[i],
                        "x": solution.x.values()[i],
                    })
                })
                .collect();
            let doc = json!({"table": rows, "diagnostics": diagnostics});
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()
}

/// `solve`: run the Picard solver and write the solution table.
pub fn cmd_solve(config_path: &Path, out_path: &Path, format: OutputFormat) -> i32 {
    let cfg = match load_or_report(config_path) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let (problem, solver_config) = match cfg.compile() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("config does not define a solvable problem: {e}");
            return EXIT_CONFIG;
        }
    };
    let solution = match psifrac::solver::picard_solve(&problem, &solver_config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("solve failed: {e}");
            return EXIT_CONFIG;
        }
    };
    let diagnostics = diagnostics_json(&solution);
    if let Err(e) = write_table(out_path, format, &solution, &diagnostics) {
        eprintln!("cannot write output {}: {e}", out_path.display());
        return EXIT_IO;
    }
    println!("{diagnostics}");
    match solution.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIterExceeded => EXIT_NONCONVERGENCE,
        SolveStatus::Diverged => EXIT_DIVERGED,
    }
}

/// `check`: evaluate one of the solvability hypotheses.
pub fn cmd_check(config_path: &Path, which: CheckKind) -> i32 {
    let cfg = match load_or_report(config_path) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let (problem, solver_config) = match cfg.compile() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("config does not define a solvable problem: {e}");
            return EXIT_CONFIG;
        }
    };

    match which {
        CheckKind::Banach => {
            let Some(block) = &cfg.banach else {
                eprintln!("config field 'banach': required for this check");
                return EXIT_CONFIG;
            };
            let node = match psifrac::expr::parse_str::<f64>(&block.lipschitz) {
                Ok(n) => n,
                Err(e) => {
                    eprintln!("banach.L: {e}");
                    return EXIT_CONFIG;
                }
            };
            let lipschitz = |t: f64| node.evaluate(&[("t", t)]).map_err(|e| e.to_string());
            let (a, b) = problem.interval();
            let found = match banach_find_h(&problem, &lipschitz, block.steps, solver_config.n) {
                Ok(h) => h,
                Err(e) => {
                    eprintln!("banach check failed: {e}");
                    return EXIT_CONFIG;
                }
            };
            let h = found.unwrap_or(b - a);
            let report = match banach_check(&problem, &lipschitz, h, solver_config.n) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("banach check failed: {e}");
                    return EXIT_CONFIG;
                }
            };
            println!(
                "{}",
                json!({
                    "check": "banach",
                    "h": report.h,
                    "bound": report.bound,
                    "contractive": report.contractive,
                })
            );
            if report.contractive {
                EXIT_OK
            } else {
                EXIT_HYPOTHESIS_UNSATISFIED
            }
        }
        CheckKind::LeraySchauder => {
            let Some(block) = &cfg.leray_schauder else {
                eprintln!("config field 'leray_schauder': required for this check");
                return EXIT_CONFIG;
            };
            let parse = |field: &str, src: &str| match psifrac::expr::parse_str::<f64>(src) {
                Ok(n) => Ok(n),
                Err(e) => {
                    eprintln!("leray_schauder.{field}: {e}");
                    Err(EXIT_CONFIG)
                }
            };
            let f1 = match parse("F1", &block.f1) {
                Ok(n) => n,
                Err(c) => return c,
            };
            let f2 = match parse("F2", &block.f2) {
                Ok(n) => n,
                Err(c) => return c,
            };
            let lam = match parse("Lambda", &block.lambda) {
                Ok(n) => n,
                Err(c) => return c,
            };
            let f1 = |t: f64| f1.evaluate(&[("t", t)]).map_err(|e| e.to_string());
            let f2 = |t: f64| f2.evaluate(&[("t", t)]).map_err(|e| e.to_string());
            let lam = |u: f64| lam.evaluate(&[("u", u)]).map_err(|e| e.to_string());
            let report = match ls_check(
                &problem,
                &f1,
                &f2,
                &lam,
                block.r_max,
                block.steps,
                solver_config.n,
            ) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("leray-schauder check failed: {e}");
                    return EXIT_CONFIG;
                }
            };
            println!(
                "{}",
                json!({
                    "check": "leray-schauder",
                    "omega1": report.omega1,
                    "omega2": report.omega2,
                    "R_found": report.r_found,
                    "inequality_value_at_R": report.inequality_value_at_r,
                })
            );
            if report.r_found.is_some() {
                EXIT_OK
            } else {
                EXIT_HYPOTHESIS_UNSATISFIED
            }
        }
    }
}

/// Error budget at resolution n: the n=512 budget scaled by the order-2
/// convergence of the product rule.
fn error_threshold(n: usize) -> f64 {
    let scale = 512.0 / n as f64;
    1e-3 * scale * scale
}

/// `validate`: solve both built-in reference problems on both built-in
/// kernels at each requested resolution and report errors and observed
/// convergence orders.
pub fn cmd_validate(n_list: &[usize]) -> i32 {
    let mut all_ok = true;
    println!(
        "{:<16} {:<14} {:>6} {:>12} {:>7} {:>6}  status",
        "case", "kernel", "n", "max_error", "order", "iters"
    );
    for kernel in validation_kernels::<f64>() {
        let cases = [power_law_case(&kernel), mittag_leffler_case(&kernel)];
        for case in cases {
            let case = match case {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("cannot build reference case: {e}");
                    return EXIT_CONFIG;
                }
            };
            let mut prev: Option<(usize, f64)> = None;
            for &n in n_list {
                let config = SolverConfig {
                    n,
                    tol: 1e-10,
                    ..SolverConfig::default()
                };
                let (report, _) = match run_case(&case, &config) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("reference solve failed: {e}");
                        return EXIT_CONFIG;
                    }
                };
                let ok = report.converged && report.max_error <= error_threshold(n);
                all_ok &= ok;
                // Order is meaningless once the error sits at the rounding
                // floor (the power-law case is integrated exactly).
                let order = match prev {
                    Some((pn, pe)) if report.max_error > 1e-12 && pe > 1e-12 => {
                        let rate = (pe / report.max_error).ln() / (n as f64 / pn as f64).ln();
                        format!("{rate:.2}")
                    }
                    Some(_) => "exact".to_string(),
                    None => "-".to_string(),
                };
                println!(
                    "{:<16} {:<14} {:>6} {:>12.3e} {:>7} {:>6}  {}",
                    report.name,
                    report.kernel_label,
                    n,
                    report.max_error,
                    order,
                    report.iterations,
                    if ok { "ok" } else { "FAIL" }
                );
                prev = Some((n, report.max_error));
            }
        }
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_HYPOTHESIS_UNSATISFIED
    }
}
