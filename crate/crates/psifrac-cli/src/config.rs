//! Problem definition files: a single JSON document mirroring the problem
//! and solver parameters, with expressions as strings in the expression
//! grammar. Validation reports every field-level problem at once rather
//! than stopping at the first.

use std::fmt;
use std::path::Path;

use serde_json::{json, Map, Value};

use psifrac::expr::{parse_str, ExprError, ExprNode};
use psifrac::kernel::{BuiltinKernel, PsiKernel};
use psifrac::solver::{Problem, SolverConfig, SolverError};

/// One field-level problem in a config file.
#[derive(Debug)]
pub enum ConfigError {
    Schema {
        field: String,
        reason: String,
    },
    Expr {
        field: String,
        position: usize,
        message: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Schema { field, reason } => write!(f, "config field '{field}': {reason}"),
            ConfigError::Expr {
                field,
                position,
                message,
            } => {
                write!(f, "config field '{field}' (offset {position}): {message}")
            }
        }
    }
}

/// Loading outcome: I/O failure, or the full list of field errors.
#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Invalid(Vec<ConfigError>),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "cannot read config: {e}"),
            LoadError::Invalid(errors) => {
                writeln!(f, "invalid config ({} error(s)):", errors.len())?;
                for e in errors {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

/// Kernel selection: a named builtin with parameters, or ψ/ψ′ expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelConfig {
    Identity,
    LogShift {
        c: f64,
    },
    Power {
        p: f64,
    },
    Exponential {
        r: f64,
    },
    Expressions {
        psi: String,
        psi_prime: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanachConfig {
    pub lipschitz: String,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LerayConfig {
    pub f1: String,
    pub f2: String,
    pub lambda: String,
    pub r_max: f64,
    pub steps: usize,
}

/// Fully validated textual mirror of a problem plus solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub x_a: f64,
    pub x1_a: f64,
    pub coupling: f64,
    pub v: f64,
    pub f: String,
    pub kernel: KernelConfig,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub banach: Option<BanachConfig>,
    pub leray_schauder: Option<LerayConfig>,
}

const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "a",
    "b",
    "x_a",
    "x1_a",
    "K",
    "v",
    "f",
    "kernel",
    "n",
    "tol",
    "max_iter",
    "damping",
    "banach",
    "leray_schauder",
];

struct Validator {
    errors: Vec<ConfigError>,
}

impl Validator {
    fn schema(&mut self, field: &str, reason: impl Into<String>) {
        self.errors.push(ConfigError::Schema {
            field: field.to_string(),
            reason: reason.into(),
        });
    }

    fn number(&mut self, map: &Map<String, Value>, field: &str) -> Option<f64> {
        match map.get(field) {
            None => {
                self.schema(field, "required");
                None
            }
            Some(Value::Number(n)) => n.as_f64().filter(|v| v.is_finite()).or_else(|| {
                self.schema(field, "must be a finite number");
                None
            }),
            Some(_) => {
                self.schema(field, "must be a number");
                None
            }
        }
    }

    fn number_or(&mut self, map: &Map<String, Value>, field: &str, default: f64) -> Option<f64> {
        if map.contains_key(field) {
            self.number(map, field)
        } else {
            Some(default)
        }
    }

    fn count_or(&mut self, map: &Map<String, Value>, field: &str, default: usize) -> Option<usize> {
        match map.get(field) {
            None => Some(default),
            Some(Value::Number(n)) => match n.as_u64() {
                Some(v) => Some(v as usize),
                None => {
                    self.schema(field, "must be a nonnegative integer");
                    None
                }
            },
            Some(_) => {
                self.schema(field, "must be a nonnegative integer");
                None
            }
        }
    }

    fn string(&mut self, map: &Map<String, Value>, field: &str) -> Option<String> {
        match map.get(field) {
            None => {
                self.schema(field, "required");
                None
            }
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.schema(field, "must be a string");
                None
            }
        }
    }

    /// Parses an expression field and checks its free variables.
    fn expression(&mut self, field: &str, source: &str, allowed: &[&str]) -> Option<ExprNode<f64>> {
        match parse_str::<f64>(source) {
            Ok(node) => {
                let mut vars = Vec::new();
                node.free_variables(&mut vars);
                let foreign: Vec<String> = vars
                    .into_iter()
                    .filter(|v| !allowed.contains(&v.as_str()))
                    .collect();
                if foreign.is_empty() {
                    Some(node)
                } else {
                    self.schema(
                        field,
                        format!("may only use variables {allowed:?}, found {foreign:?}"),
                    );
                    None
                }
            }
            Err(err) => {
                let position = match &err {
                    ExprError::Lex { position, .. }
                    | ExprError::Parse { position, .. }
                    | ExprError::Arity { position, .. } => *position,
                    _ => 0,
                };
                self.errors.push(ConfigError::Expr {
                    field: field.to_string(),
                    position,
                    message: err.to_string(),
                });
                None
            }
        }
    }
}

/// Reads, parses, and fully validates a config file.
pub fn load_config(path: &Path) -> Result<ProblemConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    parse_config(&text)
}

/// Validates config text; all field errors are collected, not just the first.
pub fn parse_config(text: &str) -> Result<ProblemConfig, LoadError> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        LoadError::Invalid(vec![ConfigError::Schema {
            field: "<document>".to_string(),
            reason: format!("not valid JSON: {e}"),
        }])
    })?;
    let Value::Object(map) = root else {
        return Err(LoadError::Invalid(vec![ConfigError::Schema {
            field: "<document>".to_string(),
            reason: "top level must be a JSON object".to_string(),
        }]));
    };

    let mut v = Validator { errors: Vec::new() };
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            v.schema(key, "unknown field");
        }
    }

    let alpha = v.number(&map, "alpha");
    let a = v.number(&map, "a");
    let b = v.number(&map, "b");
    let x_a = v.number(&map, "x_a");
    let x1_a = v.number(&map, "x1_a");
    let coupling = v.number(&map, "K");
    let vv = v.number(&map, "v");
    let f = v.string(&map, "f");
    let n = v.count_or(&map, "n", 512);
    let tol = v.number_or(&map, "tol", 1e-10);
    let max_iter = v.count_or(&map, "max_iter", 100);
    let damping = v.number_or(&map, "damping", 1.0);

    if let Some(alpha) = alpha {
        if !(alpha > 2.0 && alpha < 3.0) {
            v.schema("alpha", "must be in (2,3)");
        }
    }
    if let (Some(a), Some(b)) = (a, b) {
        if !(a < b) {
            v.schema("b", "must satisfy a < b");
        }
        if let Some(vv) = vv {
            if !(vv > a && vv <= b) {
                v.schema("v", "must lie in (a,b]");
            }
        }
    }
    if let Some(n) = n {
        if n < 8 {
            v.schema("n", "must be at least 8");
        }
    }
    if let Some(tol) = tol {
        if !(tol > 0.0) {
            v.schema("tol", "must be positive");
        }
    }
    if let Some(max_iter) = max_iter {
        if max_iter < 1 {
            v.schema("max_iter", "must be at least 1");
        }
    }
    if let Some(damping) = damping {
        if !(damping > 0.0 && damping <= 1.0) {
            v.schema("damping", "must lie in (0,1]");
        }
    }
    if let Some(src) = &f {
        v.expression("f", src, &["t", "x"]);
    }

    let kernel = parse_kernel(&mut v, &map);
    let banach = parse_banach(&mut v, &map);
    let leray_schauder = parse_leray(&mut v, &map);

    if !v.errors.is_empty() {
        return Err(LoadError::Invalid(v.errors));
    }
    Ok(ProblemConfig {
        alpha: alpha.unwrap(),
        a: a.unwrap(),
        b: b.unwrap(),
        x_a: x_a.unwrap(),
        x1_a: x1_a.unwrap(),
        coupling: coupling.unwrap(),
        v: vv.unwrap(),
        f: f.unwrap(),
        kernel: kernel.unwrap(),
        n: n.unwrap(),
        tol: tol.unwrap(),
        max_iter: max_iter.unwrap(),
        damping: damping.unwrap(),
        banach,
        leray_schauder,
    })
}

fn parse_kernel(v: &mut Validator, map: &Map<String, Value>) -> Option<KernelConfig> {
    let Some(value) = map.get("kernel") else {
        v.schema("kernel", "required");
        return None;
    };
    let Value::Object(kmap) = value else {
        v.schema("kernel", "must be an object");
        return None;
    };
    if let Some(Value::String(name)) = kmap.get("builtin") {
        let param = |v: &mut Validator, key: &str| -> Option<f64> {
            match kmap.get(key) {
                Some(Value::Number(n)) => n.as_f64(),
                Some(_) => {
                    v.schema(&format!("kernel.{key}"), "must be a number");
                    None
                }
                None => {
                    v.schema(&format!("kernel.{key}"), "required for this builtin");
                    None
                }
            }
        };
        match name.as_str() {
            "identity" => Some(KernelConfig::Identity),
            "log_shift" => param(v, "c").map(|c| KernelConfig::LogShift { c }),
            "power" => param(v, "p").map(|p| KernelConfig::Power { p }),
            "exponential" => param(v, "r").map(|r| KernelConfig::Exponential { r }),
            other => {
                v.schema("kernel.builtin", format!("unknown builtin '{other}'"));
                None
            }
        }
    } else if kmap.contains_key("psi") {
        let psi = match kmap.get("psi") {
            Some(Value::String(s)) => {
                v.expression("kernel.psi", s, &["t"]);
                Some(s.clone())
            }
            _ => {
                v.schema("kernel.psi", "must be a string");
                None
            }
        };
        let psi_prime = match kmap.get("psi_prime") {
            None => None,
            Some(Value::String(s)) => {
                v.expression("kernel.psi_prime", s, &["t"]);
                Some(s.clone())
            }
            Some(_) => {
                v.schema("kernel.psi_prime", "must be a string");
                None
            }
        };
        psi.map(|psi| KernelConfig::Expressions { psi, psi_prime })
    } else {
        v.schema("kernel", "needs either 'builtin' or 'psi'");
        None
    }
}

fn parse_banach(v: &mut Validator, map: &Map<String, Value>) -> Option<BanachConfig> {
    let value = map.get("banach")?;
    let Value::Object(bmap) = value else {
        v.schema("banach", "must be an object");
        return None;
    };
    let lipschitz = match bmap.get("L") {
        Some(Value::String(s)) => {
            v.expression("banach.L", s, &["t"]);
            Some(s.clone())
        }
        Some(_) => {
            v.schema("banach.L", "must be a string");
            None
        }
        None => {
            v.schema("banach.L", "required");
            None
        }
    };
    let steps = match bmap.get("steps") {
        None => Some(16),
        Some(Value::Number(n)) => n.as_u64().map(|x| x as usize).or_else(|| {
            v.schema("banach.steps", "must be a nonnegative integer");
            None
        }),
        Some(_) => {
            v.schema("banach.steps", "must be a nonnegative integer");
            None
        }
    };
    if let Some(steps) = steps {
        if steps < 2 {
            v.schema("banach.steps", "must be at least 2");
        }
    }
    Some(BanachConfig {
        lipschitz: lipschitz?,
        steps: steps?,
    })
}

fn parse_leray(v: &mut Validator, map: &Map<String, Value>) -> Option<LerayConfig> {
    let value = map.get("leray_schauder")?;
    let Value::Object(lmap) = value else {
        v.schema("leray_schauder", "must be an object");
        return None;
    };
    let expr_field = |v: &mut Validator, key: &str, var: &str| -> Option<String> {
        match lmap.get(key) {
            Some(Value::String(s)) => {
                v.expression(&format!("leray_schauder.{key}"), s, &[var]);
                Some(s.clone())
            }
            Some(_) => {
                v.schema(&format!("leray_schauder.{key}"), "must be a string");
                None
            }
            None => {
                v.schema(&format!("leray_schauder.{key}"), "required");
                None
            }
        }
    };
    let f1 = expr_field(v, "F1", "t");
    let f2 = expr_field(v, "F2", "t");
    let lambda = expr_field(v, "Lambda", "u");
    let r_max = match lmap.get("R_max") {
        Some(Value::Number(n)) => n.as_f64(),
        Some(_) => {
            v.schema("leray_schauder.R_max", "must be a number");
            None
        }
        None => {
            v.schema("leray_schauder.R_max", "required");
            None
        }
    };
    if let Some(r) = r_max {
        if !(r > 0.0) {
            v.schema("leray_schauder.R_max", "must be positive");
        }
    }
    let steps = match lmap.get("steps") {
        None => Some(100),
        Some(Value::Number(n)) => n.as_u64().map(|x| x as usize),
        Some(_) => {
            v.schema("leray_schauder.steps", "must be a positive integer");
            None
        }
    };
    if let Some(steps) = steps {
        if steps < 1 {
            v.schema("leray_schauder.steps", "must be at least 1");
        }
    }
    Some(LerayConfig {
        f1: f1?,
        f2: f2?,
        lambda: lambda?,
        r_max: r_max?,
        steps: steps?,
    })
}

impl ProblemConfig {
    /// Serializes back to the documented JSON schema (round-trip surface,
    /// exercised by the config tests).
    #[allow(dead_code)]
    pub fn to_json(&self) -> Value {
        let kernel = match &self.kernel {
            KernelConfig::Identity => json!({"builtin": "identity"}),
            KernelConfig::LogShift { c } => json!({"builtin": "log_shift", "c": c}),
            KernelConfig::Power { p } => json!({"builtin": "power", "p": p}),
            KernelConfig::Exponential { r } => json!({"builtin": "exponential", "r": r}),
            KernelConfig::Expressions { psi, psi_prime } => match psi_prime {
                Some(d) => json!({"psi": psi, "psi_prime": d}),
                None => json!({"psi": psi}),
            },
        };
        let mut doc = json!({
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "x_a": self.x_a,
            "x1_a": self.x1_a,
            "K": self.coupling,
            "v": self.v,
            "f": self.f,
            "kernel": kernel,
            "n": self.n,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "damping": self.damping,
        });
        if let Some(b) = &self.banach {
            doc["banach"] = json!({"L": b.lipschitz, "steps": b.steps});
        }
        if let Some(l) = &self.leray_schauder {
            doc["leray_schauder"] = json!({
                "F1": l.f1,
                "F2": l.f2,
                "Lambda": l.lambda,
                "R_max": l.r_max,
                "steps": l.steps,
            });
        }
        doc
    }

    /// Builds the runtime kernel.
    pub fn build_kernel(&self) -> Result<PsiKernel<f64>, SolverError> {
        let kernel = match &self.kernel {
            KernelConfig::Identity => PsiKernel::builtin(BuiltinKernel::Identity)?,
            KernelConfig::LogShift { c } => PsiKernel::builtin(BuiltinKernel::LogShift { c: *c })?,
            KernelConfig::Power { p } => PsiKernel::builtin(BuiltinKernel::Power { p: *p })?,
            KernelConfig::Exponential { r } => {
                PsiKernel::builtin(BuiltinKernel::Exponential { r: *r })?
            }
            KernelConfig::Expressions { psi, psi_prime } => {
                let psi = parse_str::<f64>(psi)
                    .map_err(|e| SolverError::Rhs(format!("kernel.psi: {e}")))?;
                let psi_prime = psi_prime
                    .as_ref()
                    .map(|s| parse_str::<f64>(s))
                    .transpose()
                    .map_err(|e| SolverError::Rhs(format!("kernel.psi_prime: {e}")))?;
                PsiKernel::from_expressions(psi, psi_prime)?
            }
        };
        Ok(kernel)
    }

    /// Builds the validated problem and solver settings.
    pub fn compile(&self) -> Result<(Problem<f64>, SolverConfig<f64>), SolverError> {
        let kernel = self.build_kernel()?;
        let f_node = parse_str::<f64>(&self.f).map_err(|e| SolverError::Rhs(format!("f: {e}")))?;
        let rhs = move |t: f64, x: f64| -> Result<f64, String> {
            f_node
                .evaluate(&[("t", t), ("x", x)])
                .map_err(|e| e.to_string())
        };
        let problem = Problem::new(
            self.alpha,
            self.a,
            self.b,
            self.x_a,
            self.x1_a,
            self.coupling,
            self.v,
            Box::new(rhs),
            kernel,
        )?;
        let solver = SolverConfig {
            n: self.n,
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
        };
        solver.validate()?;
        Ok((problem, solver))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "alpha": 2.5, "a": 0.0, "b": 1.0, "x_a": 0.0, "x1_a": 0.0,
        "K": 0.0, "v": 0.5, "f": "0",
        "kernel": {"builtin": "identity"}
    }"#;

    #[test]
    fn minimal_config_loads_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.n, 512);
        assert_eq!(cfg.tol, 1e-10);
        assert_eq!(cfg.max_iter, 100);
        assert_eq!(cfg.damping, 1.0);
        assert!(cfg.banach.is_none());
    }

    #[test]
    fn missing_alpha_is_reported_as_required() {
        let text = r#"{"a": 0.0, "b": 1.0, "x_a": 0.0, "x1_a": 0.0,
            "K": 0.0, "v": 0.5, "f": "0", "kernel": {"builtin": "identity"}}"#;
        match parse_config(text) {
            Err(LoadError::Invalid(errors)) => {
                assert!(errors.iter().any(|e| matches!(
                    e,
                    ConfigError::Schema { field, reason } if field == "alpha" && reason == "required"
                )));
            }
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_alpha_is_reported() {
        let text = MINIMAL.replace("2.5", "3.5");
        match parse_config(&text) {
            Err(LoadError::Invalid(errors)) => {
                assert!(errors.iter().any(|e| matches!(
                    e,
                    ConfigError::Schema { field, reason } if field == "alpha" && reason.contains("(2,3)")
                )));
            }
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn all_errors_are_reported_at_once() {
        let text = r#"{"alpha": 3.5, "b": 1.0, "x_a": 0.0, "x1_a": 0.0,
            "K": 0.0, "v": 0.5, "f": "2..5", "kernel": {"builtin": "nope"},
            "surprise": 1}"#;
        match parse_config(text) {
            Err(LoadError::Invalid(errors)) => {
                assert!(errors.len() >= 4, "got {errors:?}");
            }
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn expression_errors_carry_field_and_position() {
        let text = MINIMAL.replace("\"0\"", "\"1 + %\"");
        match parse_config(&text) {
            Err(LoadError::Invalid(errors)) => {
                assert!(errors.iter().any(|e| matches!(
                    e,
                    ConfigError::Expr { field, position: 4, .. } if field == "f"
                )));
            }
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn f_may_not_reference_u() {
        let text = MINIMAL.replace("\"0\"", "\"t + u\"");
        assert!(matches!(parse_config(&text), Err(LoadError::Invalid(_))));
    }

    #[test]
    fn round_trip_preserves_the_validated_structure() {
        let text = r#"{
            "alpha": 2.5, "a": 0.0, "b": 1.0, "x_a": 1.0, "x1_a": 0.0,
            "K": 24.494474899260739, "v": 0.5, "f": "x",
            "kernel": {"builtin": "log_shift", "c": 1.0},
            "n": 256, "tol": 1e-9, "max_iter": 50, "damping": 0.8,
            "banach": {"L": "1", "steps": 16},
            "leray_schauder": {"F1": "1", "F2": "0", "Lambda": "u", "R_max": 10.0, "steps": 100}
        }"#;
        let cfg = parse_config(text).unwrap();
        let serialized = serde_json::to_string(&cfg.to_json()).unwrap();
        let reloaded = parse_config(&serialized).unwrap();
        assert_eq!(cfg, reloaded);
    }

    #[test]
    fn expression_kernel_config_compiles() {
        let text = r#"{
            "alpha": 2.5, "a": 0.0, "b": 1.0, "x_a": 0.0, "x1_a": 0.0,
            "K": 0.0, "v": 0.5, "f": "0",
            "kernel": {"psi": "ln(1+t)", "psi_prime": "1/(1+t)"}
        }"#;
        let cfg = parse_config(text).unwrap();
        let (problem, _) = cfg.compile().unwrap();
        assert!((problem.n_value() + 2.0f64.ln().powi(2)).abs() < 1e-12);
    }
}
