//! Built-in reference problems with closed-form solutions, used by the
//! validation command and the acceptance tests.
//!
//! Both run at α = 2.5 on [0, 1] with v = 0.5 and work for any admissible
//! kernel ψ:
//!
//! - power-law case: right side `Γ(4.5)(ψ(t)−ψ(a))` with coupling chosen so
//!   the solution is `(ψ(t)−ψ(a))^{3.5}`;
//! - Mittag-Leffler case: right side `x` (the eigenfunction equation) with
//!   coupling chosen so the solution is `E_{2.5}((ψ(t)−ψ(a))^{2.5})`.

use crate::kernel::{BuiltinKernel, PsiKernel};
use crate::scalar::{cast, Real};
use crate::solver::{picard_solve, Problem, Solution, SolverConfig, SolverError};
use crate::special::{gamma, mittag_leffler_default};

/// A problem together with its exact solution.
pub struct ReferenceCase<T: Real> {
    pub name: &'static str,
    pub kernel_label: String,
    pub problem: Problem<T>,
    exact: Box<dyn Fn(T) -> Result<T, String> + Send + Sync>,
}

impl<T: Real> ReferenceCase<T> {
    pub fn exact(&self, t: T) -> Result<T, SolverError> {
        (self.exact)(t).map_err(SolverError::Rhs)
    }
}

/// Measurements from solving a reference case at one resolution.
#[derive(Debug, Clone)]
pub struct CaseReport<T> {
    pub name: &'static str,
    pub kernel_label: String,
    pub n: usize,
    pub max_error: T,
    pub iterations: usize,
    pub converged: bool,
}

/// The case whose solution is `(ψ(t)−ψ(a))^{3.5}`. The right side does not
/// depend on x, so the fixed-point map is constant and Picard converges in
/// two iterations.
pub fn power_law_case<T: Real>(kernel: &PsiKernel<T>) -> Result<ReferenceCase<T>, SolverError> {
    let a = T::zero();
    let b = T::one();
    let v = cast::<T>(0.5);
    let alpha = cast::<T>(2.5);

    let s_a = kernel.psi(a)?;
    let s_b = kernel.psi(b)? - s_a;
    let s_v = kernel.psi(v)? - s_a;
    let g45 = gamma(cast::<T>(4.5))?;
    // 6! (ψ(b)−ψ(a))^{3.5} / (Γ(4.5) (ψ(v)−ψ(a))^6)
    let coupling = cast::<T>(720.0) * s_b.powf(cast::<T>(3.5)) / (g45 * s_v.powi(6));

    let rhs_kernel = kernel.clone();
    let rhs = move |t: T, _x: T| -> Result<T, String> {
        let s = rhs_kernel.psi(t).map_err(|e| e.to_string())? - s_a;
        Ok(g45 * s)
    };
    let exact_kernel = kernel.clone();
    let exact = move |t: T| -> Result<T, String> {
        let s = exact_kernel.psi(t).map_err(|e| e.to_string())? - s_a;
        Ok(s.powf(cast::<T>(3.5)))
    };

    let problem = Problem::new(
        alpha,
        a,
        b,
        T::zero(),
        T::zero(),
        coupling,
        v,
        Box::new(rhs),
        kernel.clone(),
    )?;
    Ok(ReferenceCase {
        name: "power-law",
        kernel_label: kernel.label().to_string(),
        problem,
        exact: Box::new(exact),
    })
}

/// The case whose solution is the Mittag-Leffler eigenfunction
/// `E_{2.5}((ψ(t)−ψ(a))^{2.5})` of the Caputo derivative.
pub fn mittag_leffler_case<T: Real>(
    kernel: &PsiKernel<T>,
) -> Result<ReferenceCase<T>, SolverError> {
    let a = T::zero();
    let b = T::one();
    let v = cast::<T>(0.5);
    let alpha = cast::<T>(2.5);

    let s_a = kernel.psi(a)?;
    let s_b = kernel.psi(b)? - s_a;
    let s_v = kernel.psi(v)? - s_a;
    let e_b = mittag_leffler_default(alpha, s_b.powf(alpha))?;
    let e_v = mittag_leffler_default(alpha, s_v.powf(alpha))?;
    let coupling = e_b / (e_v - T::one());

    let rhs = move |_t: T, x: T| -> Result<T, String> { Ok(x) };
    let exact_kernel = kernel.clone();
    let exact = move |t: T| -> Result<T, String> {
        let s = exact_kernel.psi(t).map_err(|e| e.to_string())? - s_a;
        mittag_leffler_default(alpha, s.powf(alpha)).map_err(|e| e.to_string())
    };

    let problem = Problem::new(
        alpha,
        a,
        b,
        T::one(),
        T::zero(),
        coupling,
        v,
        Box::new(rhs),
        kernel.clone(),
    )?;
    Ok(ReferenceCase {
        name: "mittag-leffler",
        kernel_label: kernel.label().to_string(),
        problem,
        exact: Box::new(exact),
    })
}

/// The two kernels the validation command exercises.
pub fn validation_kernels<T: Real>() -> Vec<PsiKernel<T>> {
    vec![
        PsiKernel::builtin(BuiltinKernel::Identity).expect("identity kernel"),
        PsiKernel::builtin(BuiltinKernel::LogShift { c: T::one() }).expect("log kernel"),
    ]
}

/// Both reference cases over the validation kernels.
pub fn standard_cases<T: Real>() -> Result<Vec<ReferenceCase<T>>, SolverError> {
    let mut cases = Vec::new();
    for kernel in validation_kernels::<T>() {
        cases.push(power_law_case(&kernel)?);
        cases.push(mittag_leffler_case(&kernel)?);
    }
    Ok(cases)
}

/// Solves a case and measures the max node error against the exact solution.
pub fn run_case<T: Real>(
    case: &ReferenceCase<T>,
    config: &SolverConfig<T>,
) -> Result<(CaseReport<T>, Solution<T>), SolverError> {
    let solution = picard_solve(&case.problem, config)?;
    let mut max_error = T::zero();
    for (i, &t) in solution.grid.nodes().iter().enumerate() {
        let exact = case.exact(t)?;
        max_error = max_error.max((solution.x.values()[i] - exact).abs());
    }
    Ok((
        CaseReport {
            name: case.name,
            kernel_label: case.kernel_label.clone(),
            n: config.n,
            max_error,
            iterations: solution.iterations,
            converged: solution.converged(),
        },
        solution,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_cases_build_on_both_kernels() {
        let cases = standard_cases::<f64>().unwrap();
        assert_eq!(cases.len(), 4);
    }

    #[test]
    fn solves_in_single_precision() {
        // The whole stack is generic over the scalar; f32 works end to end
        // at correspondingly loose tolerances.
        let kernel = PsiKernel::<f32>::builtin(BuiltinKernel::Identity).unwrap();
        let case = power_law_case(&kernel).unwrap();
        let config = SolverConfig {
            n: 64,
            tol: 1e-4f32,
            max_iter: 50,
            damping: 1.0,
        };
        let (report, _) = run_case(&case, &config).unwrap();
        assert!(report.converged);
        assert!(report.max_error <= 1e-3, "max_error = {}", report.max_error);
    }

    #[test]
    fn independent_solves_run_concurrently() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<crate::solver::Problem<f64>>();
        assert_send_sync::<crate::solver::Solution<f64>>();
        assert_send_sync::<PsiKernel<f64>>();

        let handles: Vec<_> = validation_kernels::<f64>()
            .into_iter()
            .map(|kernel| {
                std::thread::spawn(move || {
                    let case = mittag_leffler_case(&kernel).unwrap();
                    let config = SolverConfig {
                        n: 64,
                        ..SolverConfig::default()
                    };
                    run_case(&case, &config).unwrap().0.converged
                })
            })
            .collect();
        for h in handles {
            assert!(h.join().unwrap());
        }
    }
}
