//! Pratt parser for the fixed expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary minus, `^`.
//! `^` is right-associative; everything else is left-associative.

use crate::scalar::{cast, Real};

use super::{BinaryOp, ExprError, ExprNode, Function, Token, TokenKind, UnaryOp};

struct Parser<'a, T> {
    tokens: &'a [Token],
    cursor: usize,
    _marker: std::marker::PhantomData<T>,
}

/// Binding powers. A left and right pair per binary operator; the gap
/// encodes associativity.
fn binary_binding_power(op: char) -> Option<(u8, u8)> {
    match op {
        '+' | '-' => Some((1, 2)),
        '*' | '/' => Some((3, 4)),
        '^' => Some((8, 7)), // right-associative
        _ => None,
    }
}

const UNARY_MINUS_RIGHT_BP: u8 = 5;

impl<'a, T: Real> Parser<'a, T> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.cursor);
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn end_position(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.position + t.lexeme.chars().count())
            .unwrap_or(0)
    }

    fn expect_kind(&mut self, kind: TokenKind, expected: &str) -> Result<&Token, ExprError> {
        match self.tokens.get(self.cursor) {
            Some(t) if t.kind == kind => {
                self.cursor += 1;
                Ok(t)
            }
            Some(t) => Err(ExprError::Parse {
                position: t.position,
                expected: expected.to_string(),
            }),
            None => Err(ExprError::Parse {
                position: self.end_position(),
                expected: expected.to_string(),
            }),
        }
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<ExprNode<T>, ExprError> {
        let mut lhs = self.parse_prefix()?;

        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Operator => tok.lexeme.chars().next().unwrap(),
                _ => break,
            };
            let Some((l_bp, r_bp)) = binary_binding_power(op) else {
                break;
            };
            if l_bp < min_bp {
                break;
            }
            self.cursor += 1;
            let rhs = self.parse_expr(r_bp)?;
            let bin = match op {
                '+' => BinaryOp::Add,
                '-' => BinaryOp::Sub,
                '*' => BinaryOp::Mul,
                '/' => BinaryOp::Div,
                '^' => BinaryOp::Pow,
                _ => unreachable!(),
            };
            lhs = ExprNode::Binary {
                op: bin,
                left: Box::new(lhs),
                right: Box::new(rhs),
            };
        }

        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<ExprNode<T>, ExprError> {
        let end = self.end_position();
        let Some(tok) = self.next() else {
            return Err(ExprError::Parse {
                position: end,
                expected: "number, identifier, '(', or unary '-'".to_string(),
            });
        };
        match tok.kind {
            TokenKind::Number => {
                let v = tok
                    .lexeme
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ExprError::Parse {
                        position: tok.position,
                        expected: "finite number".to_string(),
                    })?;
                Ok(ExprNode::Constant(cast::<T>(v)))
            }
            TokenKind::Identifier => {
                let name = tok.lexeme.clone();
                let position = tok.position;
                if matches!(self.peek(), Some(t) if t.kind == TokenKind::LeftParen) {
                    self.cursor += 1; // consume '('
                    let args = self.parse_call_args()?;
                    let Some(function) = Function::by_name(&name) else {
                        return Err(ExprError::Parse {
                            position,
                            expected: format!("known function name, found '{name}'"),
                        });
                    };
                    if args.len() != function.arity() {
                        return Err(ExprError::Arity {
                            name: function.name().to_string(),
                            expected: function.arity(),
                            found: args.len(),
                            position,
                        });
                    }
                    Ok(ExprNode::Call { function, args })
                } else {
                    Ok(ExprNode::Variable(name))
                }
            }
            TokenKind::LeftParen => {
                let inner = self.parse_expr(0)?;
                self.expect_kind(TokenKind::RightParen, "')'")?;
                Ok(inner)
            }
            TokenKind::Operator if tok.lexeme == "-" => {
                let operand = self.parse_expr(UNARY_MINUS_RIGHT_BP)?;
                Ok(ExprNode::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                })
            }
            _ => Err(ExprError::Parse {
                position: tok.position,
                expected: "number, identifier, '(', or unary '-'".to_string(),
            }),
        }
    }

    fn parse_call_args(&mut self) -> Result<Vec<ExprNode<T>>, ExprError> {
        let mut args = Vec::new();
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::RightParen) {
            self.cursor += 1;
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr(0)?);
            match self.next() {
                Some(t) if t.kind == TokenKind::Comma => continue,
                Some(t) if t.kind == TokenKind::RightParen => break,
                Some(t) => {
                    return Err(ExprError::Parse {
                        position: t.position,
                        expected: "',' or ')'".to_string(),
                    })
                }
                None => {
                    return Err(ExprError::Parse {
                        position: self.end_position(),
                        expected: "',' or ')'".to_string(),
                    })
                }
            }
        }
        Ok(args)
    }
}

/// Parses a token stream into an expression tree.
pub fn parse<T: Real>(tokens: &[Token]) -> Result<ExprNode<T>, ExprError> {
    let mut p = Parser::<T> {
        tokens,
        cursor: 0,
        _marker: std::marker::PhantomData,
    };
    let node = p.parse_expr(0)?;
    if let Some(extra) = p.peek() {
        return Err(ExprError::Parse {
            position: extra.position,
            expected: "end of input".to_string(),
        });
    }
    Ok(node)
}
