//! The kernel function ψ with its derivative ψ′.
//!
//! ψ selects the fractional-calculus flavor: the identity kernel gives the
//! Riemann-Liouville operators, a logarithmic kernel the Hadamard-type ones.
//! ψ must be increasing and differentiable with ψ′(t) ≠ 0 on the working
//! interval; [`PsiKernel::validate`] checks this on sampled nodes since a
//! user-supplied expression cannot be checked symbolically.

use thiserror::Error;

use crate::expr::{ExprError, ExprNode};
use crate::scalar::{cast, Real};

/// Number of equispaced validation nodes used by [`PsiKernel::validate_default`].
pub const DEFAULT_VALIDATION_NODES: usize = 1001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Eval(#[from] ExprError),
}

/// Built-in kernel families with exact analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinKernel<T> {
    /// ψ(t) = t (Riemann-Liouville flavor).
    Identity,
    /// ψ(t) = ln(c + t) (Hadamard flavor shifted by c).
    LogShift { c: T },
    /// ψ(t) = t^p, p > 0.
    Power { p: T },
    /// ψ(t) = e^{rt}, r ≠ 0.
    Exponential { r: T },
}

#[derive(Debug, Clone)]
enum KernelImpl<T> {
    Builtin(BuiltinKernel<T>),
    Expressions {
        psi: ExprNode<T>,
        psi_prime: Option<ExprNode<T>>,
    },
}

/// The kernel ψ together with ψ′, immutable after construction.
#[derive(Debug, Clone)]
pub struct PsiKernel<T> {
    label: String,
    inner: KernelImpl<T>,
}

/// Outcome of sampled validation: either fine, or the first offending node.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelValidation<T> {
    Ok,
    Violation {
        node_index: usize,
        t: T,
        reason: String,
    },
}

impl<T> KernelValidation<T> {
    pub fn is_ok(&self) -> bool {
        matches!(self, KernelValidation::Ok)
    }
}

impl<T: Real> PsiKernel<T> {
    /// Builds one of the named kernels. Parameter checks that do not depend
    /// on the working interval happen here; interval-dependent conditions
    /// (e.g. `c + a > 0`) surface in evaluation and validation.
    pub fn builtin(spec: BuiltinKernel<T>) -> Result<Self, KernelError> {
        let label = match spec {
            BuiltinKernel::Identity => "identity".to_string(),
            BuiltinKernel::LogShift { c } => format!("log_shift({c})"),
            BuiltinKernel::Power { p } => {
                if p <= T::zero() {
                    return Err(KernelError::Domain(format!(
                        "power kernel needs p > 0, got {p}"
                    )));
                }
                format!("power({p})")
            }
            BuiltinKernel::Exponential { r } => {
                if r == T::zero() {
                    return Err(KernelError::Domain(
                        "exponential kernel needs r != 0".to_string(),
                    ));
                }
                format!("exponential({r})")
            }
        };
        Ok(PsiKernel {
            label,
            inner: KernelImpl::Builtin(spec),
        })
    }

    /// Builds a kernel from expressions in the single variable `t`. When no
    /// derivative expression is given, ψ′ falls back to a central difference
    /// with step `max(1e-6, 1e-6 |t|)`.
    pub fn from_expressions(
        psi: ExprNode<T>,
        psi_prime: Option<ExprNode<T>>,
    ) -> Result<Self, KernelError> {
        for (field, node) in [("psi", Some(&psi)), ("psi_prime", psi_prime.as_ref())] {
            if let Some(node) = node {
                let mut vars = Vec::new();
                node.free_variables(&mut vars);
                if vars.iter().any(|v| v != "t") {
                    return Err(KernelError::Domain(format!(
                        "{field} may only reference 't', found {vars:?}"
                    )));
                }
            }
        }
        Ok(PsiKernel {
            label: format!("expr({psi})"),
            inner: KernelImpl::Expressions { psi, psi_prime },
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// ψ(t).
    pub fn psi(&self, t: T) -> Result<T, KernelError> {
        match &self.inner {
            KernelImpl::Builtin(BuiltinKernel::Identity) => Ok(t),
            KernelImpl::Builtin(BuiltinKernel::LogShift { c }) => {
                let arg = *c + t;
                if arg <= T::zero() {
                    Err(KernelError::Domain(format!(
                        "log_shift kernel undefined at t = {t} (c + t = {arg})"
                    )))
                } else {
                    Ok(arg.ln())
                }
            }
            KernelImpl::Builtin(BuiltinKernel::Power { p }) => {
                if t < T::zero() {
                    Err(KernelError::Domain(format!(
                        "power kernel undefined for t < 0 (t = {t})"
                    )))
                } else {
                    Ok(t.powf(*p))
                }
            }
            KernelImpl::Builtin(BuiltinKernel::Exponential { r }) => Ok((*r * t).exp()),
            KernelImpl::Expressions { psi, .. } => Ok(psi.evaluate(&[("t", t)])?),
        }
    }

    /// ψ′(t).
    pub fn psi_prime(&self, t: T) -> Result<T, KernelError> {
        match &self.inner {
            KernelImpl::Builtin(BuiltinKernel::Identity) => Ok(T::one()),
            KernelImpl::Builtin(BuiltinKernel::LogShift { c }) => {
                let arg = *c + t;
                if arg <= T::zero() {
                    Err(KernelError::Domain(format!(
                        "log_shift kernel undefined at t = {t} (c + t = {arg})"
                    )))
                } else {
                    Ok(T::one() / arg)
                }
            }
            KernelImpl::Builtin(BuiltinKernel::Power { p }) => {
                if t < T::zero() {
                    Err(KernelError::Domain(format!(
                        "power kernel undefined for t < 0 (t = {t})"
                    )))
                } else {
                    Ok(*p * t.powf(*p - T::one()))
                }
            }
            KernelImpl::Builtin(BuiltinKernel::Exponential { r }) => Ok(*r * (*r * t).exp()),
            KernelImpl::Expressions { psi, psi_prime } => match psi_prime {
                Some(node) => Ok(node.evaluate(&[("t", t)])?),
                None => {
                    let h = cast::<T>(1e-6).max(cast::<T>(1e-6) * t.abs());
                    let two = cast::<T>(2.0);
                    let fp = psi.evaluate(&[("t", t + h)])?;
                    let fm = psi.evaluate(&[("t", t - h)])?;
                    Ok((fp - fm) / (two * h))
                }
            },
        }
    }

    /// Checks monotonicity of ψ and positivity of ψ′ on `m` equispaced nodes
    /// over `[a, b]`. Violations are data, not errors: the report names the
    /// first offending node. Monotonicity is checked across the whole grid
    /// first, then ψ′ positivity.
    pub fn validate(&self, a: T, b: T, m: usize) -> Result<KernelValidation<T>, KernelError> {
        if !(a < b) {
            return Err(KernelError::Domain(format!(
                "validation interval needs a < b, got [{a}, {b}]"
            )));
        }
        if m < 3 {
            return Err(KernelError::Domain(format!(
                "validation needs at least 3 nodes, got {m}"
            )));
        }
        let step = (b - a) / cast::<T>((m - 1) as f64);
        let node = |i: usize| {
            if i == m - 1 {
                b
            } else {
                a + step * cast::<T>(i as f64)
            }
        };

        let mut prev = None;
        for i in 0..m {
            let t = node(i);
            let v = match self.psi(t) {
                Ok(v) => v,
                Err(e) => {
                    return Ok(KernelValidation::Violation {
                        node_index: i,
                        t,
                        reason: format!("psi evaluation failed: {e}"),
                    })
                }
            };
            if !v.is_finite() {
                return Ok(KernelValidation::Violation {
                    node_index: i,
                    t,
                    reason: format!("psi({t}) is not finite"),
                });
            }
            if let Some(p) = prev {
                if v <= p {
                    return Ok(KernelValidation::Violation {
                        node_index: i,
                        t,
                        reason: format!("psi is not strictly increasing ({v} <= {p})"),
                    });
                }
            }
            prev = Some(v);
        }

        for i in 0..m {
            let t = node(i);
            let d = match self.psi_prime(t) {
                Ok(d) => d,
                Err(e) => {
                    return Ok(KernelValidation::Violation {
                        node_index: i,
                        t,
                        reason: format!("psi_prime evaluation failed: {e}"),
                    })
                }
            };
            if !d.is_finite() || d <= T::zero() {
                return Ok(KernelValidation::Violation {
                    node_index: i,
                    t,
                    reason: format!("psi_prime({t}) = {d} is not positive and finite"),
                });
            }
        }

        Ok(KernelValidation::Ok)
    }

    /// [`validate`](Self::validate) with the default node count.
    pub fn validate_default(&self, a: T, b: T) -> Result<KernelValidation<T>, KernelError> {
        self.validate(a, b, DEFAULT_VALIDATION_NODES)
    }
}
