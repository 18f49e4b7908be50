//! Volterra fixed-point solver and solvability checkers.
//!
//! The boundary-value problem is equivalent to the Volterra equation
//!
//! ```text
//! x(t) = I^{α,ψ} f(t,x(t)) + x_a + x¹_a/ψ′(a) (ψ(t)−ψ(a)) + γ_x (ψ(t)−ψ(a))²
//! ```
//!
//! where the quadratic coefficient γ_x is determined by the nonlocal
//! condition `x(b) = K I^{α,ψ} x(v)` and involves the scalar
//!
//! ```text
//! N = 2K/Γ(3+α) (ψ(v)−ψ(a))^{2+α} − (ψ(b)−ψ(a))²  (must be nonzero)
//! ```
//!
//! Solving runs damped Picard iteration on the map F defined by the right
//! side. `banach_check` evaluates the contraction bound of the uniqueness
//! hypothesis, `ls_check` the growth-bound existence hypothesis.

use thiserror::Error;

use crate::fracops::{self, FracopsError, Grid, SampledFunction, WeightMatrix};
use crate::kernel::{KernelError, PsiKernel};
use crate::scalar::{cast, Real};
use crate::special::{gamma, SpecialError};

/// Update-norm threshold past which the iteration is declared divergent.
const DIVERGENCE_THRESHOLD: f64 = 1e8;

/// Relative tolerance on the nonzero test for N.
const N_SINGULAR_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("boundary scalar N = {n_value} is zero within tolerance; the nonlocal condition cannot determine the quadratic coefficient")]
    NSingular { n_value: f64 },
    #[error("grid has no marked node for v")]
    MissingVNode,
    #[error("right-hand side evaluation failed: {0}")]
    Rhs(String),
    #[error(transparent)]
    Fracops(#[from] FracopsError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Fallible scalar-to-scalar evaluator (config expressions or closures).
pub type EvalFn<'a, T> = dyn Fn(T) -> Result<T, String> + 'a;

/// Right-hand side f(t, x).
pub type RhsFn<T> = Box<dyn Fn(T, T) -> Result<T, String> + Send + Sync>;

// ------------------------------------------------------------------
// Problem
// ------------------------------------------------------------------

/// The scalar N of the nonlocal boundary condition.
pub fn compute_n<T: Real>(
    alpha: T,
    coupling: T,
    kernel: &PsiKernel<T>,
    a: T,
    b: T,
    v: T,
) -> Result<T, SolverError> {
    let two = cast::<T>(2.0);
    let three = cast::<T>(3.0);
    let sv = kernel.psi(v)? - kernel.psi(a)?;
    let sb = kernel.psi(b)? - kernel.psi(a)?;
    let g3a = gamma(three + alpha)?;
    Ok(two * coupling / g3a * sv.powf(two + alpha) - sb.powi(2))
}

/// Full problem data: order, interval, initial data, nonlocal coupling,
/// right-hand side, and the kernel ψ.
pub struct Problem<T: Real> {
    alpha: T,
    a: T,
    b: T,
    x_a: T,
    x1_a: T,
    coupling: T,
    v: T,
    rhs: RhsFn<T>,
    kernel: PsiKernel<T>,
    psi_prime_a: T,
    n_value: T,
}

impl<T: Real> Problem<T> {
    /// Validates and builds a problem. Checks: α ∈ (2,3), a < b, v ∈ (a,b],
    /// ψ increasing with ψ′ > 0 on sampled nodes (including ψ′(a), which the
    /// Volterra form divides by), and |N| above its relative tolerance.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: T,
        a: T,
        b: T,
        x_a: T,
        x1_a: T,
        coupling: T,
        v: T,
        rhs: RhsFn<T>,
        kernel: PsiKernel<T>,
    ) -> Result<Self, SolverError> {
        let two = cast::<T>(2.0);
        let three = cast::<T>(3.0);
        if !(alpha > two && alpha < three) {
            return Err(SolverError::InvalidProblem(format!(
                "alpha must lie in (2,3), got {alpha}"
            )));
        }
        if !(a < b) {
            return Err(SolverError::InvalidProblem(format!(
                "interval needs a < b, got [{a}, {b}]"
            )));
        }
        if !(v > a && v <= b) {
            return Err(SolverError::InvalidProblem(format!(
                "v = {v} must lie in ({a}, {b}]"
            )));
        }
        match kernel.validate_default(a, b)? {
            crate::kernel::KernelValidation::Ok => {}
            crate::kernel::KernelValidation::Violation { t, reason, .. } => {
                return Err(SolverError::InvalidProblem(format!(
                    "kernel '{}' fails at t = {t}: {reason}",
                    kernel.label()
                )));
            }
        }
        let psi_prime_a = kernel.psi_prime(a)?;
        if !(psi_prime_a > T::zero() && psi_prime_a.is_finite()) {
            return Err(SolverError::InvalidProblem(format!(
                "psi'(a) = {psi_prime_a} must be positive (the Volterra form divides by it)"
            )));
        }
        let n_value = compute_n(alpha, coupling, &kernel, a, b, v)?;
        let sb = kernel.psi(b)? - kernel.psi(a)?;
        if n_value.abs() <= cast::<T>(N_SINGULAR_REL_TOL) * sb.powi(2) {
            return Err(SolverError::NSingular {
                n_value: n_value.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Problem {
            alpha,
            a,
            b,
            x_a,
            x1_a,
            coupling,
            v,
            rhs,
            kernel,
            psi_prime_a,
            n_value,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn x_a(&self) -> T {
        self.x_a
    }

    pub fn x1_a(&self) -> T {
        self.x1_a
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn v(&self) -> T {
        self.v
    }

    pub fn kernel(&self) -> &PsiKernel<T> {
        &self.kernel
    }

    /// Cached N (nonzero by construction).
    pub fn n_value(&self) -> T {
        self.n_value
    }

    /// Cached ψ′(a).
    pub fn psi_prime_a(&self) -> T {
        self.psi_prime_a
    }

    pub fn rhs(&self, t: T, x: T) -> Result<T, SolverError> {
        (self.rhs)(t, x).map_err(SolverError::Rhs)
    }

    /// Grid over [a, b] with v marked.
    pub fn grid(&self, n: usize) -> Result<Grid<T>, SolverError> {
        Ok(Grid::new(&self.kernel, self.a, self.b, n, Some(self.v))?)
    }
}

impl<T: Real> std::fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("alpha", &self.alpha)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("x_a", &self.x_a)
            .field("x1_a", &self.x1_a)
            .field("coupling", &self.coupling)
            .field("v", &self.v)
            .field("kernel", &self.kernel.label())
            .field("n_value", &self.n_value)
            .finish()
    }
}

// ------------------------------------------------------------------
// Solver configuration and solution
// ------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Grid intervals.
    pub n: usize,
    /// Fixed-point tolerance on the sup-norm between iterates.
    pub tol: T,
    /// Iteration cap.
    pub max_iter: usize,
    /// Relaxation factor in (0, 1]; 1 is plain Picard.
    pub damping: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            n: 512,
            tol: cast::<T>(1e-10),
            max_iter: 100,
            damping: T::one(),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n < 8 {
            return Err(SolverError::InvalidProblem(format!(
                "solver needs n >= 8 grid intervals, got {}",
                self.n
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(SolverError::InvalidProblem(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(SolverError::InvalidProblem("max_iter must be >= 1".into()));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(SolverError::InvalidProblem(format!(
                "damping must lie in (0,1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Terminal state of the Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached with the update still above tolerance.
    MaxIterExceeded,
    /// Update norm exceeded the divergence threshold; the reported iterate
    /// is the last finite one.
    Diverged,
}

/// Residuals of the three boundary conditions at the discrete level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcResiduals<T> {
    /// x(a) − x_a.
    pub at_a: T,
    /// x′(a) − x¹_a, slope from a one-sided difference.
    pub slope_at_a: T,
    /// x(b) − K·I^{α,ψ}x(v), with the fractional integral of x at v expanded
    /// through the same discrete algebra that determines γ_x.
    pub nonlocal: T,
}

/// Converged (or terminal) state of a solve, with diagnostics.
#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub grid: Grid<T>,
    pub x: SampledFunction<T>,
    pub gamma_x: T,
    pub iterations: usize,
    pub final_update_norm: T,
    /// Sup-norm update per iteration, for contraction diagnostics.
    pub update_norms: Vec<T>,
    pub volterra_residual: T,
    pub bc_residuals: BcResiduals<T>,
    pub status: SolveStatus,
}

impl<T: Real> Solution<T> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

// ------------------------------------------------------------------
// The fixed-point map
// ------------------------------------------------------------------

/// Image of one application of the Volterra map, with the intermediate
/// quantities diagnostics need.
pub struct MapImage<T> {
    pub values: Vec<T>,
    pub gamma: T,
    pub ia_f: Vec<T>,
    pub i2a_f: Vec<T>,
}

/// γ_x from the α- and 2α-integrals of s ↦ f(s, x(s)).
///
/// `ia_f` must be `I^{α,ψ}` of the f-samples and `i2a_f` the `I^{2α,ψ}`
/// integral of the same samples, both on `grid`.
pub fn compute_gamma<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    ia_f: &SampledFunction<T>,
    i2a_f: &SampledFunction<T>,
) -> Result<T, SolverError> {
    compute_gamma_raw(problem, grid, ia_f.values(), i2a_f.values())
}

fn compute_gamma_raw<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    ia_f: &[T],
    i2a_f: &[T],
) -> Result<T, SolverError> {
    let v_idx = grid.index_of_v().ok_or(SolverError::MissingVNode)?;
    if ia_f.len() != grid.len() || i2a_f.len() != grid.len() {
        return Err(SolverError::Fracops(FracopsError::GridMismatch {
            expected: grid.len(),
            found: ia_f.len().min(i2a_f.len()),
        }));
    }
    let one = T::one();
    let two = cast::<T>(2.0);
    let k = problem.coupling;
    let alpha = problem.alpha;
    let sv = grid.s_shifted(v_idx);
    let sb = grid.s_shifted(grid.len() - 1);
    let g1a = gamma(one + alpha)?;
    let g2a = gamma(two + alpha)?;

    let numerator = ia_f[grid.len() - 1] - k * i2a_f[v_idx]
        + problem.x_a * (one - k / g1a * sv.powf(alpha))
        + problem.x1_a / problem.psi_prime_a * (sb - k / g2a * sv.powf(one + alpha));
    Ok(numerator / problem.n_value)
}

/// One application of the map
/// `F(x)(t) = I^{α,ψ} f(t,x(t)) + x_a + x¹_a/ψ′(a)(ψ(t)−ψ(a)) + γ_x(ψ(t)−ψ(a))²`.
///
/// Both weight matrices must be built on `grid`, for orders α and 2α.
pub fn apply_fixed_point_map<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    w_alpha: &WeightMatrix<T>,
    w_2alpha: &WeightMatrix<T>,
    x: &SampledFunction<T>,
) -> Result<MapImage<T>, SolverError> {
    apply_map_raw(problem, grid, w_alpha, w_2alpha, x.values())
}

fn apply_map_raw<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    w_alpha: &WeightMatrix<T>,
    w_2alpha: &WeightMatrix<T>,
    x: &[T],
) -> Result<MapImage<T>, SolverError> {
    if x.len() != grid.len() {
        return Err(SolverError::Fracops(FracopsError::GridMismatch {
            expected: grid.len(),
            found: x.len(),
        }));
    }
    let mut f_vals = Vec::with_capacity(grid.len());
    for (i, &t) in grid.nodes().iter().enumerate() {
        f_vals.push(problem.rhs(t, x[i])?);
    }
    let ia_f = w_alpha.apply_raw(&f_vals)?;
    let i2a_f = w_2alpha.apply_raw(&f_vals)?;
    let gamma_x = compute_gamma_raw(problem, grid, &ia_f, &i2a_f)?;

    let c1 = problem.x1_a / problem.psi_prime_a;
    let values: Vec<T> = (0..grid.len())
        .map(|i| {
            let s = grid.s_shifted(i);
            ia_f[i] + problem.x_a + c1 * s + gamma_x * s * s
        })
        .collect();
    Ok(MapImage {
        values,
        gamma: gamma_x,
        ia_f,
        i2a_f,
    })
}

fn sup_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

// ------------------------------------------------------------------
// Picard iteration
// ------------------------------------------------------------------

/// Damped Picard iteration `x_{k+1} = (1−d)x_k + d·F(x_k)` starting from the
/// affine part `x₀(t) = x_a + x¹_a/ψ′(a)(ψ(t)−ψ(a))`, which matches both
/// initial conditions from iteration zero.
pub fn picard_solve<T: Real>(
    problem: &Problem<T>,
    config: &SolverConfig<T>,
) -> Result<Solution<T>, SolverError> {
    config.validate()?;
    let grid = problem.grid(config.n)?;
    let w_alpha = WeightMatrix::build(problem.alpha, &grid)?;
    let w_2alpha = WeightMatrix::build(problem.alpha + problem.alpha, &grid)?;

    let c1 = problem.x1_a / problem.psi_prime_a;
    let mut x: Vec<T> = (0..grid.len())
        .map(|i| problem.x_a + c1 * grid.s_shifted(i))
        .collect();

    let mut status = SolveStatus::MaxIterExceeded;
    let mut iterations = 0usize;
    let mut update_norms = Vec::new();
    let mut final_update_norm = T::infinity();
    let threshold = cast::<T>(DIVERGENCE_THRESHOLD);

    for iter in 1..=config.max_iter {
        iterations = iter;
        let image = match apply_map_raw(problem, &grid, &w_alpha, &w_2alpha, &x) {
            Ok(img) => img,
            // Overflow inside the map on a still-finite iterate is a
            // divergence symptom, not a caller error.
            Err(SolverError::Fracops(FracopsError::NonFinite { .. })) => {
                status = SolveStatus::Diverged;
                iterations = iter.saturating_sub(1);
                break;
            }
            Err(e) => return Err(e),
        };
        let next: Vec<T> = if config.damping == T::one() {
            image.values
        } else {
            let d = config.damping;
            x.iter()
                .zip(image.values.iter())
                .map(|(&old, &new)| (T::one() - d) * old + d * new)
                .collect()
        };
        let upd = sup_abs_diff(&next, &x);
        if !upd.is_finite() || upd > threshold {
            // Keep the previous (finite) iterate for diagnostics.
            status = SolveStatus::Diverged;
            final_update_norm = upd;
            update_norms.push(upd);
            break;
        }
        x = next;
        final_update_norm = upd;
        update_norms.push(upd);
        if upd <= config.tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    // Diagnostics from the final (still finite) iterate. A blow-up inside
    // this last map application can only happen on a diverged solve; the
    // residual fields then carry infinities rather than masking the state.
    let (gamma_x, volterra_residual, bc_residuals) =
        match apply_map_raw(problem, &grid, &w_alpha, &w_2alpha, &x) {
            Ok(image) => {
                let vr = sup_abs_diff(&x, &image.values);
                let bc = boundary_residuals(problem, &grid, &x, image.gamma, &image.i2a_f)?;
                (image.gamma, vr, bc)
            }
            Err(SolverError::Fracops(FracopsError::NonFinite { .. }))
                if status == SolveStatus::Diverged =>
            {
                let inf = T::infinity();
                (
                    T::nan(),
                    inf,
                    BcResiduals {
                        at_a: inf,
                        slope_at_a: inf,
                        nonlocal: inf,
                    },
                )
            }
            Err(e) => return Err(e),
        };

    Ok(Solution {
        x: SampledFunction::new(x)?,
        grid,
        gamma_x,
        iterations,
        final_update_norm,
        update_norms,
        volterra_residual,
        bc_residuals,
        status,
    })
}

fn boundary_residuals<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    x: &[T],
    gamma_x: T,
    i2a_f: &[T],
) -> Result<BcResiduals<T>, SolverError> {
    let one = T::one();
    let two = cast::<T>(2.0);
    let three = cast::<T>(3.0);
    let alpha = problem.alpha;
    let v_idx = grid.index_of_v().ok_or(SolverError::MissingVNode)?;
    let sv = grid.s_shifted(v_idx);

    let at_a = x[0] - problem.x_a;

    let m = 3.min(grid.len());
    let w = fracops::fd_weights(grid.nodes()[0], &grid.nodes()[..m], 1);
    let slope: T = w
        .iter()
        .zip(x.iter())
        .fold(T::zero(), |acc, (wi, xi)| (*wi).mul_add(*xi, acc));
    let slope_at_a = slope - problem.x1_a;

    // I^{α,ψ}x(v) expanded through the Volterra form of x: the f-part via the
    // semigroup law (an order-2α integral) and the polynomial part via the
    // exact power-function formulas. This is the algebra that determined γ_x,
    // so the residual vanishes up to rounding and fixed-point tolerance.
    let iv = i2a_f[v_idx]
        + problem.x_a / gamma(one + alpha)? * sv.powf(alpha)
        + problem.x1_a / problem.psi_prime_a / gamma(two + alpha)? * sv.powf(one + alpha)
        + two * gamma_x / gamma(three + alpha)? * sv.powf(two + alpha);
    let nonlocal = x[grid.len() - 1] - problem.coupling * iv;

    Ok(BcResiduals {
        at_a,
        slope_at_a,
        nonlocal,
    })
}

/// Recomputes `sup_i |x_i − F(x)_i|` from scratch for a solution.
pub fn volterra_residual<T: Real>(
    problem: &Problem<T>,
    solution: &Solution<T>,
) -> Result<T, SolverError> {
    let grid = &solution.grid;
    let w_alpha = WeightMatrix::build(problem.alpha, grid)?;
    let w_2alpha = WeightMatrix::build(problem.alpha + problem.alpha, grid)?;
    let image = apply_map_raw(problem, grid, &w_alpha, &w_2alpha, solution.x.values())?;
    Ok(sup_abs_diff(solution.x.values(), &image.values))
}

// ------------------------------------------------------------------
// Hypothesis checkers
// ------------------------------------------------------------------

/// Result of evaluating the contraction bound
/// `sup_{t ∈ [a,a+h]} { I^{α,ψ}L(t) + [I^{α,ψ}L(b) + |K| I^{2α,ψ}L(v)] (ψ(t)−ψ(a))²/|N| }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanachReport<T> {
    pub h: T,
    pub bound: T,
    pub contractive: bool,
}

/// Growth-bound check data: ω₁, ω₂ and the radius search outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsReport<T> {
    pub omega1: T,
    pub omega2: T,
    pub r_found: Option<T>,
    /// Left side of the inequality at `r_found`, or at `r_max` when no
    /// radius qualified.
    pub inequality_value_at_r: T,
}

fn sample_nonnegative<T: Real>(
    grid: &Grid<T>,
    label: &str,
    f: &EvalFn<'_, T>,
) -> Result<Vec<T>, SolverError> {
    let mut vals = Vec::with_capacity(grid.len());
    for &t in grid.nodes() {
        let v = f(t).map_err(SolverError::Rhs)?;
        if !v.is_finite() || v < T::zero() {
            return Err(SolverError::InvalidProblem(format!(
                "{label}({t}) = {v} must be nonnegative and finite"
            )));
        }
        vals.push(v);
    }
    Ok(vals)
}

/// Per-node contraction quantity; the bound over `[a, a+h]` is its prefix sup.
fn banach_node_bounds<T: Real>(
    problem: &Problem<T>,
    grid: &Grid<T>,
    lipschitz: &EvalFn<'_, T>,
) -> Result<Vec<T>, SolverError> {
    let l_vals = sample_nonnegative(grid, "L", lipschitz)?;
    let w_alpha = WeightMatrix::build(problem.alpha, grid)?;
    let w_2alpha = WeightMatrix::build(problem.alpha + problem.alpha, grid)?;
    let ia_l = w_alpha.apply_raw(&l_vals)?;
    let i2a_l = w_2alpha.apply_raw(&l_vals)?;
    let v_idx = grid.index_of_v().ok_or(SolverError::MissingVNode)?;

    // Division by N in the paper's bound is taken in absolute value (as is
    // K): a norm estimate must be nonnegative.
    let n_abs = problem.n_value.abs();
    let k_abs = problem.coupling.abs();
    let tail = ia_l[grid.len() - 1] + k_abs * i2a_l[v_idx];
    Ok((0..grid.len())
        .map(|i| {
            let s = grid.s_shifted(i);
            ia_l[i] + tail * s * s / n_abs
        })
        .collect())
}

/// Evaluates the contraction bound on `[a, a+h]` over an `n`-interval grid.
pub fn banach_check<T: Real>(
    problem: &Problem<T>,
    lipschitz: &EvalFn<'_, T>,
    h: T,
    n: usize,
) -> Result<BanachReport<T>, SolverError> {
    let (a, b) = problem.interval();
    if !(h > T::zero() && h <= b - a) {
        return Err(SolverError::InvalidProblem(format!(
            "h = {h} must lie in (0, b-a]"
        )));
    }
    let grid = problem.grid(n)?;
    let node_bounds = banach_node_bounds(problem, &grid, lipschitz)?;
    let snap = (b - a) * cast::<T>(1e-12);
    let cutoff = a + h + snap;
    let bound = grid
        .nodes()
        .iter()
        .zip(node_bounds.iter())
        .take_while(|(t, _)| **t <= cutoff)
        .fold(T::zero(), |m, (_, q)| m.max(*q));
    Ok(BanachReport {
        h,
        bound,
        contractive: bound < T::one(),
    })
}

/// Scans `h ∈ {(b−a)k/steps}` and returns the largest h whose contraction
/// bound stays below 1, if any. The bound is a sup over a growing node set,
/// so it is nondecreasing across the scan.
pub fn banach_find_h<T: Real>(
    problem: &Problem<T>,
    lipschitz: &EvalFn<'_, T>,
    steps: usize,
    n: usize,
) -> Result<Option<T>, SolverError> {
    if steps < 2 {
        return Err(SolverError::InvalidProblem(format!(
            "h scan needs at least 2 steps, got {steps}"
        )));
    }
    let (a, b) = problem.interval();
    let grid = problem.grid(n)?;
    let node_bounds = banach_node_bounds(problem, &grid, lipschitz)?;
    let snap = (b - a) * cast::<T>(1e-12);

    let mut best = None;
    let mut prev_bound = T::zero();
    let mut node_idx = 0usize;
    let mut prefix_max = T::zero();
    for k in 1..=steps {
        let h = (b - a) * cast::<T>(k as f64) / cast::<T>(steps as f64);
        let cutoff = a + h + snap;
        while node_idx < grid.len() && grid.nodes()[node_idx] <= cutoff {
            prefix_max = prefix_max.max(node_bounds[node_idx]);
            node_idx += 1;
        }
        debug_assert!(prefix_max >= prev_bound, "bound must be monotone in h");
        prev_bound = prefix_max;
        if prefix_max < T::one() {
            best = Some(h);
        }
    }
    Ok(best)
}

/// Evaluates the growth-bound hypothesis: computes
/// `ω_i = sup_t I^{α,ψ}|F_i|(t) + (I^{α,ψ}|F_i|(b) + |K| I^{2α,ψ}|F_i|(v)) (ψ(b)−ψ(a))²/|N|`
/// and scans `R ∈ {r_max·k/steps}` for the smallest radius with
/// `ω₁Λ(R) + ω₂ + C ≤ R`, where C collects the boundary-data terms.
#[allow(clippy::too_many_arguments)]
pub fn ls_check<T: Real>(
    problem: &Problem<T>,
    f1: &EvalFn<'_, T>,
    f2: &EvalFn<'_, T>,
    lambda: &EvalFn<'_, T>,
    r_max: T,
    steps: usize,
    n: usize,
) -> Result<LsReport<T>, SolverError> {
    if !(r_max > T::zero()) {
        return Err(SolverError::InvalidProblem(format!(
            "R_max must be positive, got {r_max}"
        )));
    }
    if steps < 1 {
        return Err(SolverError::InvalidProblem(
            "R scan needs steps >= 1".into(),
        ));
    }
    let one = T::one();
    let two = cast::<T>(2.0);
    let grid = problem.grid(n)?;
    let v_idx = grid.index_of_v().ok_or(SolverError::MissingVNode)?;
    let w_alpha = WeightMatrix::build(problem.alpha, &grid)?;
    let w_2alpha = WeightMatrix::build(problem.alpha + problem.alpha, &grid)?;

    let n_abs = problem.n_value.abs();
    let k_abs = problem.coupling.abs();
    let sb = grid.s_shifted(grid.len() - 1);
    let ratio = sb * sb / n_abs;

    let mut omega = [T::zero(); 2];
    for (slot, f) in omega.iter_mut().zip([f1, f2]) {
        let mut vals = Vec::with_capacity(grid.len());
        for &t in grid.nodes() {
            let v = f(t).map_err(SolverError::Rhs)?;
            if !v.is_finite() {
                return Err(SolverError::InvalidProblem(format!(
                    "growth bound function is not finite at t = {t}"
                )));
            }
            vals.push(v.abs());
        }
        let ia = w_alpha.apply_raw(&vals)?;
        let i2a = w_2alpha.apply_raw(&vals)?;
        let sup_ia = ia.iter().fold(T::zero(), |m, &q| m.max(q));
        *slot = sup_ia + (ia[grid.len() - 1] + k_abs * i2a[v_idx]) * ratio;
    }

    // Boundary-data constant of the inequality's left side.
    let alpha = problem.alpha;
    let sv = grid.s_shifted(v_idx);
    let k = problem.coupling;
    let bracket = problem.x_a * (one - k / gamma(one + alpha)? * sv.powf(alpha))
        + problem.x1_a / problem.psi_prime_a
            * (sb - k / gamma(two + alpha)? * sv.powf(one + alpha));
    let constant =
        problem.x_a.abs() + problem.x1_a.abs() / problem.psi_prime_a * sb + bracket.abs() * ratio;

    let mut r_found = None;
    let mut lhs_at_r = T::zero();
    let mut prev_lambda = None;
    for k_step in 1..=steps {
        let r = r_max * cast::<T>(k_step as f64) / cast::<T>(steps as f64);
        let lam = lambda(r).map_err(SolverError::Rhs)?;
        if !lam.is_finite() || lam < T::zero() {
            return Err(SolverError::InvalidProblem(format!(
                "Lambda({r}) = {lam} must be nonnegative and finite"
            )));
        }
        if let Some(prev) = prev_lambda {
            if lam < prev {
                return Err(SolverError::InvalidProblem(format!(
                    "Lambda must be nondecreasing; Lambda({r}) = {lam} dropped below {prev}"
                )));
            }
        }
        prev_lambda = Some(lam);
        let lhs = omega[0] * lam + omega[1] + constant;
        if r_found.is_none() && lhs <= r {
            r_found = Some(r);
            lhs_at_r = lhs;
        }
        if k_step == steps && r_found.is_none() {
            lhs_at_r = lhs;
        }
    }

    Ok(LsReport {
        omega1: omega[0],
        omega2: omega[1],
        r_found,
        inequality_value_at_r: lhs_at_r,
    })
}
