use std::collections::HashMap;
use std::fmt;

use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Cbrt,
    Ln,
    Exp,
    Abs,
    Pow,
    Sin,
    Cos,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sqrt,
        Func::Cbrt,
        Func::Ln,
        Func::Exp,
        Func::Abs,
        Func::Pow,
        Func::Sin,
        Func::Cos,
    ];

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Cbrt => "cbrt",
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Expression tree. Variables carry the slot index they were resolved to at
/// parse time, so evaluation against a positional slice is a plain index.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var { name: String, slot: usize },
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

fn power(base: f64, exponent: f64) -> f64 {
    base.powf(exponent)
}

impl Expr {
    /// Evaluates with variable values supplied by slot.
    pub fn eval_slots(&self, values: &[f64]) -> Result<f64, ExprError> {
        self.eval_with(&|_, slot| values.get(slot).copied())
    }

    /// Evaluates against named bindings.
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, ExprError> {
        self.eval_with(&|name, _| bindings.get(name).copied())
    }

    fn eval_with(&self, lookup: &dyn Fn(&str, usize) -> Option<f64>) -> Result<f64, ExprError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var { name, slot } => lookup(name, *slot).ok_or_else(|| ExprError::Unbound(name.clone())),
            Expr::Neg(inner) => Ok(-inner.eval_with(lookup)?),
            Expr::Binary(op, lhs, rhs) => {
                let l = lhs.eval_with(lookup)?;
                let r = rhs.eval_with(lookup)?;
                let v = match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        l / r
                    }
                    BinOp::Pow => power(l, r),
                };
                self.finite(v, l.is_finite() && r.is_finite())
            }
            Expr::Call(func, args) => {
                let a = args[0].eval_with(lookup)?;
                let v = match func {
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(self.domain("square root of a negative number"));
                        }
                        a.sqrt()
                    }
                    Func::Cbrt => a.cbrt(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(self.domain("logarithm of a non-positive number"));
                        }
                        a.ln()
                    }
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Pow => {
                        let b = args[1].eval_with(lookup)?;
                        return self.finite(power(a, b), a.is_finite() && b.is_finite());
                    }
                };
                self.finite(v, a.is_finite())
            }
        }
    }

    fn collect_vars(&self, out: &mut Vec<(String, usize)>) {
        match self {
            Expr::Var { name, slot } => {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), *slot));
                }
            }
            Expr::Const(_) => {}
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Names of the variables referenced, in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.into_iter().map(|(n, _)| n).collect()
    }

    fn domain(&self, reason: &str) -> ExprError {
        ExprError::Domain {
            subexpression: self.to_string(),
            reason: reason.to_string(),
        }
    }

    fn finite(&self, v: f64, inputs_finite: bool) -> Result<f64, ExprError> {
        if v.is_finite() || !inputs_finite {
            Ok(v)
        } else {
            Err(self.domain("result is not a finite real"))
        }
    }
}

/// Fully parenthesised rendering; parsing it back yields an expression that
/// evaluates bit-for-bit identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c == std::f64::consts::PI => write!(f, "pi"),
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var { name, .. } => write!(f, "{name}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
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
