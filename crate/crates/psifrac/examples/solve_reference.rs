//! Solves the built-in Mittag-Leffler reference problem on the Hadamard-type
//! kernel and prints a few nodes together with the exact solution.
//!
//! Run with: cargo run --example solve_reference

use psifrac::kernel::{BuiltinKernel, PsiKernel};
use psifrac::reference::{mittag_leffler_case, run_case};
use psifrac::solver::SolverConfig;

fn main() {
    let kernel = PsiKernel::<f64>::builtin(BuiltinKernel::LogShift { c: 1.0 }).unwrap();
    let case = mittag_leffler_case(&kernel).unwrap();
    let config = SolverConfig {
        n: 256,
        ..SolverConfig::default()
    };
    let (report, solution) = run_case(&case, &config).unwrap();

    println!(
        "{} on {}: {} iterations, max error {:.3e}, volterra residual {:.3e}",
        report.name,
        report.kernel_label,
        report.iterations,
        report.max_error,
        solution.volterra_residual
    );
    println!("{:>8} {:>20} {:>20}", "t", "x(t)", "exact");
    for i in (0..solution.grid.len()).step_by(solution.grid.len() / 8) {
        let t = solution.grid.nodes()[i];
        println!(
            "{:>8.4} {:>20.12} {:>20.12}",
            t,
            solution.x.values()[i],
            case.exact(t).unwrap()
        );
    }
}
