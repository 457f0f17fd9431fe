//! Arithmetic expressions for right-hand sides: `l(t)`, `φ(x)`, `k(t)` and
//! `f(t, x)` are written as strings such as `(t^(-3/4)+t^(-1/2))` and parsed
//! into an [`Expr`] tree.
//!
//! Supported: numbers, the constant `pi`, declared variables, `+ - * / ^`,
//! unary minus, and the functions `sqrt cbrt ln exp abs pow sin cos`.
//! `cbrt` is the real cube root, so `cbrt(-8) = -2`.

mod ast;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::{BinOp, Expr, Func};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("lexical error at offset {position}: {message}")]
    Lex { position: usize, message: String },
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in `{subexpression}`: {reason}")]
    Domain { subexpression: String, reason: String },
}

impl ExprError {
    /// Byte offset for lexical and syntax errors.
    pub fn position(&self) -> Option<usize> {
        match self {
            ExprError::Lex { position, .. } | ExprError::Syntax { position, .. } => Some(*position),
            _ => None,
        }
    }
}

/// A parsed expression together with its source text and declared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    source: String,
    variables: Vec<String>,
    ast: Expr,
}

impl Formula {
    pub fn parse(source: &str, variables: &[&str]) -> Result<Self, ExprError> {
        let ast = parse(source, variables)?;
        Ok(Formula {
            source: source.to_string(),
            variables: variables.iter().map(|v| v.to_string()).collect(),
            ast,
        })
    }

    pub fn constant(value: f64, variables: &[&str]) -> Self {
        Formula {
            source: format!("{value:?}"),
            variables: variables.iter().map(|v| v.to_string()).collect(),
            ast: Expr::Const(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Evaluates with values given in declaration order.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        self.ast.eval_slots(values)
    }

    pub fn eval1(&self, v: f64) -> Result<f64, ExprError> {
        self.ast.eval_slots(&[v])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.ast, Expr::Const(c) if c == 0.0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use proptest::prelude::*;

    use super::*;

    fn var(name: &str, slot: usize) -> Expr {
        Expr::Var {
            name: name.into(),
            slot,
        }
    }

    fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    #[test]
    fn rational_function_tree() {
        let ast = parse("(x+1)/(x+2)", &["x"]).unwrap();
        let expected = bin(
            BinOp::Div,
            bin(BinOp::Add, var("x", 0), Expr::Const(1.0)),
            bin(BinOp::Add, var("x", 0), Expr::Const(2.0)),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn pi_and_calls() {
        let ast = parse("sqrt(pi)*x", &["x"]).unwrap();
        let expected = bin(
            BinOp::Mul,
            Expr::Call(Func::Sqrt, vec![Expr::Const(std::f64::consts::PI)]),
            var("x", 0),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn signed_exponent_needs_parens() {
        let err = parse("t^-1/2", &["t"]).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { position: 2, .. }), "{err:?}");
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = parse("-2^2", &[]).unwrap();
        assert_eq!(e.eval_slots(&[]).unwrap(), -4.0);
        let e = parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval_slots(&[]).unwrap(), 512.0);
    }

    #[test]
    fn unknown_identifiers() {
        assert_eq!(parse("y+1", &["x"]).unwrap_err(), ExprError::UnknownIdentifier("y".into()));
        assert_eq!(parse("foo(x)", &["x"]).unwrap_err(), ExprError::UnknownIdentifier("foo".into()));
        assert!(matches!(parse("sqrt", &["x"]), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse("(x+1", &["x"]), Err(ExprError::Syntax { position: 4, .. })));
        assert!(matches!(parse("x+1)", &["x"]), Err(ExprError::Syntax { position: 3, .. })));
        assert!(matches!(parse("", &["x"]), Err(ExprError::Syntax { position: 0, .. })));
        assert!(matches!(parse("pow(x)", &["x"]), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x*", &["x"]), Err(ExprError::Syntax { position: 2, .. })));
    }

    #[test]
    fn evaluation_examples() {
        let f = Formula::parse("t^(-1/2)", &["t"]).unwrap();
        assert_eq!(f.eval1(4.0).unwrap(), 0.5);
        let f = Formula::parse("cbrt(x)", &["x"]).unwrap();
        assert_eq!(f.eval1(-8.0).unwrap(), -2.0);
        let f = Formula::parse("(t^(-3/4)+t^(-1/2))*(x+1)/(x+2)", &["t", "x"]).unwrap();
        assert_eq!(f.eval(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn named_bindings() {
        let e = parse("t*x - 1", &["t", "x"]).unwrap();
        let mut b = HashMap::new();
        b.insert("t".to_string(), 3.0);
        b.insert("x".to_string(), 2.0);
        assert_eq!(e.eval(&b).unwrap(), 5.0);
        b.remove("x");
        assert_eq!(e.eval(&b).unwrap_err(), ExprError::Unbound("x".into()));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let f = Formula::parse("1 + sqrt(x - 2)", &["x"]).unwrap();
        match f.eval1(1.0).unwrap_err() {
            ExprError::Domain { subexpression, .. } => assert_eq!(subexpression, "sqrt((x - 2.0))"),
            other => panic!("{other:?}"),
        }
        let f = Formula::parse("ln(x)", &["x"]).unwrap();
        assert!(f.eval1(0.0).is_err());
        let f = Formula::parse("1/(x-1)", &["x"]).unwrap();
        assert!(f.eval1(1.0).is_err());
        let f = Formula::parse("x^0.5", &["x"]).unwrap();
        assert!(f.eval1(-1.0).is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-50.0f64..50.0).prop_map(Expr::Const),
            (0u32..40).prop_map(|k| Expr::Const(k as f64 * 0.25)),
            Just(Expr::Const(std::f64::consts::PI)),
            Just(var("t", 0)),
            Just(var("x", 1)),
        ];
        leaf.prop_recursive(5, 48, 3, |inner| {
            let op = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let func = prop_oneof![
                Just(Func::Sqrt),
                Just(Func::Cbrt),
                Just(Func::Ln),
                Just(Func::Exp),
                Just(Func::Abs),
                Just(Func::Sin),
                Just(Func::Cos),
            ];
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (op, inner.clone(), inner.clone()).prop_map(|(op, l, r)| bin(op, l, r)),
                (func, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Pow, vec![a, b])),
            ]
        })
    }

    fn same(a: &Result<f64, ExprError>, b: &Result<f64, ExprError>) -> bool {
        match (a, b) {
            (Ok(x), Ok(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
            (Err(_), Err(_)) => true,
            _ => false,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn print_parse_round_trip(ast in arb_expr(), points in prop::collection::vec((0.01f64..20.0, -5.0f64..5.0), 10)) {
            let printed = ast.to_string();
            let reparsed = parse(&printed, &["t", "x"]).unwrap();
            for (t, x) in points {
                let a = ast.eval_slots(&[t, x]);
                let b = reparsed.eval_slots(&[t, x]);
                prop_assert!(same(&a, &b), "{printed}: {a:?} vs {b:?}");
            }
        }

        #[test]
        fn precedence_matches_arithmetic(t in -100.0f64..100.0) {
            let a = Formula::parse("2*t+1", &["t"]).unwrap().eval1(t).unwrap();
            let b = Formula::parse("2*(t+1)", &["t"]).unwrap().eval1(t).unwrap();
            prop_assert_eq!(a, 2.0 * t + 1.0);
            prop_assert_eq!(b, 2.0 * (t + 1.0));
        }

        #[test]
        fn parse_error_positions_in_range(src in "[tx0-9+*/^()., -]{0,24}") {
            if let Err(e) = parse(&src, &["t", "x"]) {
                if let Some(p) = e.position() {
                    prop_assert!(p <= src.len());
                }
            }
        }
    }
}
