//! Weighted Riemann–Liouville fractional differential equations
//! `D^β x = f(t, x)`, `t^{1-β} x(t) → x₀`: fractional-integral checks,
//! a product-integration Volterra solver, and prediction of `lim x(t)`.

pub mod asymptote;
pub mod audit;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod extrapolate;
pub mod fracint;
pub mod num;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod suite;
pub mod specfile;
pub mod verdict;

pub use error::{Error, Result};
