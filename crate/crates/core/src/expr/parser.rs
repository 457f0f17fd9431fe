//! Precedence-climbing parser.
//!
//! Binding strength, loosest first: `+ -`, `* /`, unary `-`, `^`. The power
//! operator is right-associative and binds tighter than a leading minus, so
//! `-t^2` is `-(t^2)`. A signed exponent must be parenthesised: `t^(-1/2)`.

use std::f64::consts::PI;

use super::ast::{BinOp, Expr, Func};
use super::lexer::{tokenize, Token, TokenKind};
use super::ExprError;

pub fn parse(source: &str, variables: &[&str]) -> Result<Expr, ExprError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        variables,
        end: source.len(),
    };
    let expr = parser.expression()?;
    if let Some(tok) = parser.peek() {
        return Err(ExprError::Syntax {
            position: tok.position,
            message: format!("unexpected token {:?}", tok.lexeme),
        });
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    variables: &'a [&'a str],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn position(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.end)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Operator => t.lexeme.chars().next(),
            _ => None,
        }
    }

    fn syntax(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn expression(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            if matches!(self.peek_op(), Some('-' | '+')) {
                return Err(self.syntax("a signed exponent must be parenthesised, e.g. t^(-1/2)"));
            }
            let exponent = self.power()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.next() else {
            return Err(ExprError::Syntax {
                position: self.end,
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Number => tok.lexeme.parse::<f64>().map(Expr::Const).map_err(|_| ExprError::Syntax {
                position: tok.position,
                message: format!("invalid number {:?}", tok.lexeme),
            }),
            TokenKind::LParen => {
                let inner = self.expression()?;
                match self.next() {
                    Some(t) if t.kind == TokenKind::RParen => Ok(inner),
                    Some(t) => Err(ExprError::Syntax {
                        position: t.position,
                        message: format!("expected ')' but found {:?}", t.lexeme),
                    }),
                    None => Err(ExprError::Syntax {
                        position: self.end,
                        message: format!("unbalanced '(' opened at offset {}", tok.position),
                    }),
                }
            }
            TokenKind::Identifier => self.identifier(tok),
            _ => Err(ExprError::Syntax {
                position: tok.position,
                message: format!("unexpected token {:?}", tok.lexeme),
            }),
        }
    }

    fn identifier(&mut self, tok: Token) -> Result<Expr, ExprError> {
        let name = tok.lexeme.as_str();
        let is_call = matches!(self.peek(), Some(t) if t.kind == TokenKind::LParen);
        if is_call {
            let func = Func::from_name(name).ok_or_else(|| ExprError::UnknownIdentifier(name.to_string()))?;
            self.pos += 1;
            let mut args = vec![self.expression()?];
            loop {
                match self.next() {
                    Some(t) if t.kind == TokenKind::Comma => args.push(self.expression()?),
                    Some(t) if t.kind == TokenKind::RParen => break,
                    Some(t) => {
                        return Err(ExprError::Syntax {
                            position: t.position,
                            message: format!("expected ',' or ')' but found {:?}", t.lexeme),
                        })
                    }
                    None => {
                        return Err(ExprError::Syntax {
                            position: self.end,
                            message: format!("unbalanced '(' in call to {name}"),
                        })
                    }
                }
            }
            if args.len() != func.arity() {
                return Err(ExprError::Syntax {
                    position: tok.position,
                    message: format!("{name} takes {} argument(s), got {}", func.arity(), args.len()),
                });
            }
            return Ok(Expr::Call(func, args));
        }
        if name == "pi" {
            return Ok(Expr::Const(PI));
        }
        if let Some(slot) = self.variables.iter().position(|v| *v == name) {
            return Ok(Expr::Var {
                name: name.to_string(),
                slot,
            });
        }
        if Func::from_name(name).is_some() {
            return Err(ExprError::Syntax {
                position: tok.position,
                message: format!("function {name} must be called with parentheses"),
            });
        }
        Err(ExprError::UnknownIdentifier(name.to_string()))
    }
}
