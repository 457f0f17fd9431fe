use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Byte offset of the first character of the lexeme.
    pub position: usize,
}

/// Splits `source` into tokens, stopping at the first illegal character or
/// malformed number.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let c = bytes[pos];
        let start = pos;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                pos = scan_number(bytes, pos)?;
                TokenKind::Number
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                    pos += 1;
                }
                TokenKind::Identifier
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                pos += 1;
                TokenKind::Operator
            }
            b'(' => {
                pos += 1;
                TokenKind::LParen
            }
            b')' => {
                pos += 1;
                TokenKind::RParen
            }
            b',' => {
                pos += 1;
                TokenKind::Comma
            }
            _ => {
                let ch = source[pos..].chars().next().unwrap_or('?');
                return Err(ExprError::Lex {
                    position: pos,
                    message: format!("illegal character {ch:?}"),
                });
            }
        };
        tokens.push(Token {
            kind,
            lexeme: source[start..pos].to_string(),
            position: start,
        });
    }
    Ok(tokens)
}

// digits [ '.' digits ] [ (e|E) [+-] digits ], or '.' digits [...]
fn scan_number(bytes: &[u8], start: usize) -> Result<usize, ExprError> {
    let digits = |mut p: usize| {
        while p < bytes.len() && bytes[p].is_ascii_digit() {
            p += 1;
        }
        p
    };
    let mut pos = digits(start);
    if pos < bytes.len() && bytes[pos] == b'.' {
        let dot = pos;
        pos = digits(pos + 1);
        let frac_len = pos - dot - 1;
        let followed_by_dot = pos < bytes.len() && bytes[pos] == b'.';
        if frac_len == 0 || followed_by_dot {
            return Err(ExprError::Lex {
                position: dot,
                message: "malformed number".into(),
            });
        }
    }
    if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
        let mut p = pos + 1;
        if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
            p += 1;
        }
        if p < bytes.len() && bytes[p].is_ascii_digit() {
            pos = digits(p);
        }
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    }

    #[test]
    fn signed_exponent_tokens() {
        use TokenKind::*;
        let expected = vec![
            (Identifier, "t".to_string()),
            (Operator, "^".into()),
            (LParen, "(".into()),
            (Operator, "-".into()),
            (Number, "1".into()),
            (Operator, "/".into()),
            (Number, "2".into()),
            (RParen, ")".into()),
        ];
        assert_eq!(kinds("t^(-1/2)"), expected);
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("   ").unwrap().is_empty());
    }

    #[test]
    fn malformed_number_position() {
        match tokenize("2..5") {
            Err(ExprError::Lex { position, .. }) => assert_eq!(position, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(tokenize("3.").is_err());
    }

    #[test]
    fn illegal_character() {
        match tokenize("x + $") {
            Err(ExprError::Lex { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scientific_numbers() {
        let toks = tokenize("1.5e-3*x").unwrap();
        assert_eq!(toks[0].lexeme, "1.5e-3");
        assert_eq!(toks[1].position, 6);
        // a bare trailing `e` is not part of the number
        let toks = tokenize("2e").unwrap();
        assert_eq!(toks.len(), 2);
    }

    #[test]
    fn positions_nondecreasing() {
        let toks = tokenize("sqrt( x + 1 ) / (x+2)").unwrap();
        assert!(toks.windows(2).all(|w| w[0].position < w[1].position));
    }
}
