//! Arithmetic expression language used in problem definition files.
//!
//! The grammar is fixed: `+ - * / ^`, parenthesised grouping, unary minus,
//! and the built-in calls `gamma`, `mlf`, `exp`, `ln`, `sin`, `cos`, `sqrt`,
//! `abs`, `pow`. `mlf` and `gamma` delegate to [`crate::special`]. Parsed
//! trees are immutable and evaluation is pure, so sharing across threads is
//! safe.

mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;
use crate::special::{self, SpecialError};

pub use lexer::tokenize;
pub use parser::parse;

/// Lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LeftParen,
    RightParen,
    Comma,
}

/// One lexeme with its character offset in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

impl Token {
    fn new(kind: TokenKind, lexeme: &str, position: usize) -> Self {
        Token {
            kind,
            lexeme: lexeme.to_string(),
            position,
        }
    }
}

/// Errors from tokenizing, parsing, or evaluating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected character '{found}' at offset {position}")]
    Lex { position: usize, found: char },
    #[error("parse error at offset {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    #[error("{name} takes {expected} argument(s), found {found} (offset {position})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        position: usize,
    },
    #[error("unbound variable '{name}'")]
    UnboundVariable { name: String },
    #[error("evaluation error: {reason}")]
    Eval { reason: String },
}

impl From<SpecialError> for ExprError {
    fn from(e: SpecialError) -> Self {
        ExprError::Eval {
            reason: e.to_string(),
        }
    }
}

/// Built-in functions. Arity is fixed per function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Gamma,
    Mlf,
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Pow,
}

impl Function {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "gamma" => Some(Function::Gamma),
            "mlf" => Some(Function::Mlf),
            "exp" => Some(Function::Exp),
            "ln" => Some(Function::Ln),
            "sin" => Some(Function::Sin),
            "cos" => Some(Function::Cos),
            "sqrt" => Some(Function::Sqrt),
            "abs" => Some(Function::Abs),
            "pow" => Some(Function::Pow),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Function::Gamma => "gamma",
            Function::Mlf => "mlf",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
            Function::Pow => "pow",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Function::Mlf | Function::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode<T> {
    Constant(T),
    Variable(String),
    Unary {
        op: UnaryOp,
        operand: Box<ExprNode<T>>,
    },
    Binary {
        op: BinaryOp,
        left: Box<ExprNode<T>>,
        right: Box<ExprNode<T>>,
    },
    Call {
        function: Function,
        args: Vec<ExprNode<T>>,
    },
}

/// Tokenize + parse in one step.
pub fn parse_str<T: Real>(source: &str) -> Result<ExprNode<T>, ExprError> {
    let tokens = tokenize(source)?;
    parse(&tokens)
}

fn real_pow<T: Real>(base: T, exponent: T) -> Result<T, ExprError> {
    if base < T::zero() && exponent.floor() != exponent {
        return Err(ExprError::Eval {
            reason: format!(
                "negative base {base} with non-integer exponent {exponent} has no principal real value"
            ),
        });
    }
    if base == T::zero() && exponent < T::zero() {
        return Err(ExprError::Eval {
            reason: "zero base with negative exponent".to_string(),
        });
    }
    Ok(base.powf(exponent))
}

impl<T: Real> ExprNode<T> {
    /// Evaluates the tree with the given variable bindings. Pure: identical
    /// node and bindings give bit-identical results.
    pub fn evaluate(&self, bindings: &[(&str, T)]) -> Result<T, ExprError> {
        match self {
            ExprNode::Constant(v) => Ok(*v),
            ExprNode::Variable(name) => bindings
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| ExprError::UnboundVariable { name: name.clone() }),
            ExprNode::Unary {
                op: UnaryOp::Neg,
                operand,
            } => Ok(-operand.evaluate(bindings)?),
            ExprNode::Binary { op, left, right } => {
                let a = left.evaluate(bindings)?;
                let b = right.evaluate(bindings)?;
                match op {
                    BinaryOp::Add => Ok(a + b),
                    BinaryOp::Sub => Ok(a - b),
                    BinaryOp::Mul => Ok(a * b),
                    BinaryOp::Div => {
                        if b == T::zero() {
                            Err(ExprError::Eval {
                                reason: "division by zero".to_string(),
                            })
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinaryOp::Pow => real_pow(a, b),
                }
            }
            ExprNode::Call { function, args } => {
                // The parser enforces arity; hand-built trees must not
                // bypass it.
                if args.len() != function.arity() {
                    return Err(ExprError::Arity {
                        name: function.name().to_string(),
                        expected: function.arity(),
                        found: args.len(),
                        position: 0,
                    });
                }
                let mut vals = [T::zero(); 2];
                for (i, arg) in args.iter().enumerate() {
                    vals[i] = arg.evaluate(bindings)?;
                }
                match function {
                    Function::Gamma => Ok(special::gamma(vals[0])?),
                    Function::Mlf => Ok(special::mittag_leffler_default(vals[0], vals[1])?),
                    Function::Exp => Ok(vals[0].exp()),
                    Function::Ln => {
                        if vals[0] <= T::zero() {
                            Err(ExprError::Eval {
                                reason: format!("ln of non-positive value {}", vals[0]),
                            })
                        } else {
                            Ok(vals[0].ln())
                        }
                    }
                    Function::Sin => Ok(vals[0].sin()),
                    Function::Cos => Ok(vals[0].cos()),
                    Function::Sqrt => {
                        if vals[0] < T::zero() {
                            Err(ExprError::Eval {
                                reason: format!("sqrt of negative value {}", vals[0]),
                            })
                        } else {
                            Ok(vals[0].sqrt())
                        }
                    }
                    Function::Abs => Ok(vals[0].abs()),
                    Function::Pow => real_pow(vals[0], vals[1]),
                }
            }
        }
    }

    /// Collects the free variables of the tree into `out`, in first-seen order.
    pub fn free_variables(&self, out: &mut Vec<String>) {
        match self {
            ExprNode::Constant(_) => {}
            ExprNode::Variable(name) => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            ExprNode::Unary { operand, .. } => operand.free_variables(out),
            ExprNode::Binary { left, right, .. } => {
                left.free_variables(out);
                right.free_variables(out);
            }
            ExprNode::Call { args, .. } => {
                for a in args {
                    a.free_variables(out);
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprNode::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                ..
            } => 1,
            ExprNode::Binary {
                op: BinaryOp::Mul | BinaryOp::Div,
                ..
            } => 2,
            ExprNode::Unary { .. } => 3,
            ExprNode::Binary {
                op: BinaryOp::Pow, ..
            } => 4,
            _ => 5,
        }
    }
}

/// Pretty-printing uses the fewest parentheses that keep the tree's shape
/// under re-parsing (see the round-trip property test).
impl<T: Real> fmt::Display for ExprNode<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child<T: Real>(
            f: &mut fmt::Formatter<'_>,
            node: &ExprNode<T>,
            needs_parens: bool,
        ) -> fmt::Result {
            if needs_parens {
                write!(f, "({node})")
            } else {
                write!(f, "{node}")
            }
        }
        match self {
            ExprNode::Constant(v) => write!(f, "{v}"),
            ExprNode::Variable(name) => write!(f, "{name}"),
            ExprNode::Unary {
                op: UnaryOp::Neg,
                operand,
            } => {
                write!(f, "-")?;
                child(f, operand, operand.precedence() < self.precedence())
            }
            ExprNode::Binary { op, left, right } => {
                let p = self.precedence();
                let (lh, rh) = match op {
                    // Left-associative: parenthesise an equal-precedence right child.
                    BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => {
                        (left.precedence() < p, right.precedence() <= p)
                    }
                    // Right-associative.
                    BinaryOp::Pow => (left.precedence() <= p, right.precedence() < p),
                };
                child(f, left, lh)?;
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Pow => "^",
                };
                write!(f, " {sym} ")?;
                child(f, right, rh)
            }
            ExprNode::Call { function, args } => {
                write!(f, "{}(", function.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
