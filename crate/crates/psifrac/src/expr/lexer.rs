//! Tokenizer for the expression grammar.

use super::{ExprError, Token, TokenKind};

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `source` into tokens. Whitespace separates tokens and is dropped;
/// any other character outside the grammar is a lex error at its offset.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                tokens.push(Token::new(TokenKind::LeftParen, "(", start));
                i += 1;
            }
            ')' => {
                tokens.push(Token::new(TokenKind::RightParen, ")", start));
                i += 1;
            }
            ',' => {
                tokens.push(Token::new(TokenKind::Comma, ",", start));
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' => {
                tokens.push(Token::new(TokenKind::Operator, &c.to_string(), start));
                i += 1;
            }
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    if j >= chars.len() || !chars[j].is_ascii_digit() {
                        return Err(ExprError::Lex {
                            position: j.min(chars.len().saturating_sub(1)).max(start),
                            found: if j < chars.len() { chars[j] } else { '.' },
                        });
                    }
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                    // Otherwise the 'e' belongs to a following identifier.
                }
                let lexeme: String = chars[i..j].iter().collect();
                // Overflowing literals parse to infinity rather than failing.
                if !lexeme.parse::<f64>().map(f64::is_finite).unwrap_or(false) {
                    return Err(ExprError::Lex { position: start, found: c });
                }
                tokens.push(Token::new(TokenKind::Number, &lexeme, start));
                i = j;
            }
            _ if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_continue(chars[j]) {
                    j += 1;
                }
                let lexeme: String = chars[i..j].iter().collect();
                tokens.push(Token::new(TokenKind::Identifier, &lexeme, start));
                i = j;
            }
            _ => {
                return Err(ExprError::Lex {
                    position: start,
                    found: c,
                });
            }
        }
    }

    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_identifier() {
        let toks = tokenize("t").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Identifier);
        assert_eq!(toks[0].lexeme, "t");
    }

    #[test]
    fn call_and_operators() {
        let toks = tokenize("gamma(4.5)*(t - 0)").unwrap();
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Identifier,
                TokenKind::LeftParen,
                TokenKind::Number,
                TokenKind::RightParen,
                TokenKind::Operator,
                TokenKind::LeftParen,
                TokenKind::Identifier,
                TokenKind::Operator,
                TokenKind::Number,
                TokenKind::RightParen,
            ]
        );
    }

    #[test]
    fn malformed_number_is_rejected() {
        assert!(matches!(tokenize("2..5"), Err(ExprError::Lex { .. })));
    }

    #[test]
    fn unknown_character_is_rejected() {
        let err = tokenize("1 + %").unwrap_err();
        assert!(matches!(
            err,
            ExprError::Lex {
                position: 4,
                found: '%'
            }
        ));
    }

    #[test]
    fn positions_strictly_increase_and_lexemes_cover_input() {
        let src = "mlf(2.5, t^2) - 1e-3*x";
        let toks = tokenize(src).unwrap();
        for pair in toks.windows(2) {
            assert!(pair[0].position < pair[1].position);
        }
        let rebuilt: String = toks.iter().map(|t| t.lexeme.as_str()).collect();
        let stripped: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(rebuilt, stripped);
    }

    #[test]
    fn overflowing_literal_is_rejected() {
        assert!(matches!(tokenize("1e400"), Err(ExprError::Lex { position: 0, .. })));
        assert!(tokenize("1e300").is_ok());
    }

    #[test]
    fn exponent_forms() {
        for src in ["1e3", "1E-3", "2.5e+10", "3.0e2"] {
            let toks = tokenize(src).unwrap();
            assert_eq!(toks.len(), 1, "{src}");
            assert_eq!(toks[0].kind, TokenKind::Number);
        }
        // 'e' not followed by digits stays with the identifier that follows.
        let toks = tokenize("2exp").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].lexeme, "2");
        assert_eq!(toks[1].lexeme, "exp");
    }
}
