//! Fractional integrals `y(t) = ∫₀ᵗ (t-s)^{β-1} ρ(s) ds` and grid checks of
//! their structural properties (monotonicity, tail limits, the weakly
//! singular Lᵖ bound, weighted continuity at 0).
//!
//! With `s = t v` and `ρ(s) = s^{-α} σ(s)`,
//! `y(t) = t^{β-α} ∫₀¹ (1-v)^{β-1} v^{-α} σ(t v) dv`, so both endpoint
//! singularities sit in a Gauss–Jacobi weight.

use crate::error::{Error, Result};
use crate::expr::{ExprError, Formula};
use crate::extrapolate::aitken_tail;
use crate::quadrature::{integrate_graded, Ladder, Quadrature};
use crate::special::resolvent_constant;
use crate::verdict::{PropertyVerdict, Witness};

/// Relative slack on adjacent differences in monotonicity checks.
pub const MONOTONE_TOL: f64 = 1e-9;
/// Agreement required between an extrapolated tail and its predicted limit.
pub const TAIL_TOL: f64 = 1e-3;

/// `ρ(s) = s^{-α} σ(s)` with σ continuous at 0. Stored as the expression for
/// ρ itself; σ is recovered as `s^α ρ(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularFunction {
    rho: Formula,
    alpha: f64,
}

impl SingularFunction {
    pub fn new(rho: Formula, alpha: f64) -> Result<Self> {
        if rho.variables().len() != 1 {
            return Err(Error::InvalidSpec(format!(
                "a singular function takes exactly one variable, `{}` declares {}",
                rho.source(),
                rho.variables().len()
            )));
        }
        if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
            return Err(Error::Domain(format!(
                "singularity exponent must lie in [0, 1) for integrability, got {alpha}"
            )));
        }
        Ok(SingularFunction { rho, alpha })
    }

    /// Parses `source` as a function of `s`.
    pub fn parse(source: &str, alpha: f64) -> Result<Self> {
        Self::parse_in(source, "s", alpha)
    }

    pub fn parse_in(source: &str, variable: &str, alpha: f64) -> Result<Self> {
        Self::new(Formula::parse(source, &[variable])?, alpha)
    }

    pub fn zero(variable: &str) -> Self {
        SingularFunction {
            rho: Formula::constant(0.0, &[variable]),
            alpha: 0.0,
        }
    }

    pub fn formula(&self) -> &Formula {
        &self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.rho.is_zero()
    }

    pub fn rho(&self, s: f64) -> Result<f64, ExprError> {
        self.rho.eval1(s)
    }

    /// `s^α ρ(s)`.
    pub fn sigma(&self, s: f64) -> Result<f64, ExprError> {
        let r = self.rho.eval1(s)?;
        Ok(if self.alpha == 0.0 { r } else { s.powf(self.alpha) * r })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("order β must lie in (0, 1), got {beta}")))
    }
}

/// Dyadic levels for the composite rule at time `t`: the bottom piece ends
/// below `s = 10⁻⁶ min(1, t)`, where σ is effectively frozen.
fn graded_levels(t: f64) -> u32 {
    let s_min = 1e-6 * t.min(1.0);
    ((t / s_min).log2().ceil() as u32).clamp(1, 1100)
}

/// `y(t) = ∫₀ᵗ (t-s)^{β-1} ρ(s) ds`, with the quadrature error estimate.
/// A `converged == false` result is still the best available value.
pub fn frac_integral(rho: &SingularFunction, beta: f64, t: f64) -> Result<Quadrature> {
    check_beta(beta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("fractional integral needs t > 0, got {t}")));
    }
    if rho.is_zero() {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            nodes_used: 0,
            converged: true,
        });
    }
    let q = integrate_graded(|v| rho.sigma(t * v), beta - 1.0, -rho.alpha, graded_levels(t), &Ladder::default())?
        .map_err(|source| Error::AtNode { node: 0, t, source })?;
    Ok(q.scaled(t.powf(beta - rho.alpha)))
}

pub fn frac_integral_value(rho: &SingularFunction, beta: f64, t: f64) -> Result<f64> {
    frac_integral(rho, beta, t).map(|q| q.value)
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Nonincreasing => "nonincreasing",
            Direction::Nondecreasing => "nondecreasing",
        }
    }
}

/// First index `j` where `values[j+1]` steps against `direction` by more than
/// `tol · max(1, |values[j]|)`.
pub fn monotone_violation(values: &[f64], direction: Direction, tol: f64) -> Option<usize> {
    values.windows(2).position(|w| {
        let slack = tol * w[0].abs().max(1.0);
        match direction {
            Direction::Nonincreasing => w[1] - w[0] > slack,
            Direction::Nondecreasing => w[0] - w[1] > slack,
        }
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] <= 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("grid must be positive and strictly increasing with at least two points".into()));
    }
    Ok(())
}

/// Checks "t^β ρ monotone ⇒ y monotone in the same direction" on `grid`.
/// A grid on which the hypothesis fails passes vacuously, with a note.
pub fn check_monotone(rho: &SingularFunction, beta: f64, grid: &[f64], direction: Direction) -> Result<PropertyVerdict> {
    check_beta(beta)?;
    validate_grid(grid)?;
    let name = format!("fractional integral {} when t^β ρ is", direction.as_str());
    let mut weighted = Vec::with_capacity(grid.len());
    for &t in grid {
        match rho.rho(t) {
            Ok(r) => weighted.push(t.powf(beta) * r),
            Err(e) => return Ok(PropertyVerdict::fail(name, MONOTONE_TOL, Witness::new(vec![t], vec![]).with_note(e.to_string()))),
        }
    }
    if let Some(j) = monotone_violation(&weighted, direction, MONOTONE_TOL) {
        let w = Witness::new(vec![grid[j], grid[j + 1]], vec![weighted[j], weighted[j + 1]])
            .with_note("hypothesis does not hold on the grid; nothing to check");
        return Ok(PropertyVerdict::pass_with(name, MONOTONE_TOL, w));
    }
    let mut ys = Vec::with_capacity(grid.len());
    for &t in grid {
        match frac_integral(rho, beta, t) {
            Ok(q) => ys.push(q.value),
            Err(e) => return Ok(PropertyVerdict::fail(name, MONOTONE_TOL, Witness::new(vec![t], vec![]).with_note(e.to_string()))),
        }
    }
    Ok(match monotone_violation(&ys, direction, MONOTONE_TOL) {
        None => PropertyVerdict::pass(name, MONOTONE_TOL),
        Some(j) => PropertyVerdict::fail(
            name,
            MONOTONE_TOL,
            Witness::new(vec![grid[j], grid[j + 1]], vec![ys[j], ys[j + 1]]),
        ),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailLimit {
    /// Estimate of `lim t^β ρ(t)`.
    pub a: f64,
    /// `a π / sin(βπ)`.
    pub predicted: f64,
    pub extrapolated: f64,
    /// `|extrapolated - predicted| / max(|predicted|, 1)`.
    pub agreement: f64,
    pub samples: Vec<f64>,
    pub verdict: PropertyVerdict,
}

/// `2^{k}` for `k` in `from..=to` stepping by `step`.
pub fn dyadic_ladder(from: i32, to: i32, step: usize) -> Vec<f64> {
    (from..=to).step_by(step).map(|k| 2f64.powi(k)).collect()
}

/// Predicts `lim y(t) = a π / sin(βπ)` from the sampled tail of `t^β ρ` and
/// compares it with the Aitken-extrapolated values of `y` on `t_ladder`.
pub fn tail_limit(rho: &SingularFunction, beta: f64, t_ladder: &[f64]) -> Result<TailLimit> {
    check_beta(beta)?;
    validate_grid(t_ladder)?;
    if t_ladder.len() < 6 || t_ladder.windows(2).any(|w| w[1] / w[0] < 2.0 - 1e-12) {
        return Err(Error::Domain("tail ladder needs at least 6 points with ratio ≥ 2".into()));
    }
    let weighted: Vec<f64> = t_ladder
        .iter()
        .map(|&t| rho.rho(t).map(|r| t.powf(beta) * r))
        .collect::<Result<_, _>>()?;
    let a = aitken_tail(&weighted).expect("ladder has at least 3 points").limit;
    let predicted = a * resolvent_constant(beta)?;

    let samples: Vec<f64> = t_ladder
        .iter()
        .map(|&t| frac_integral_value(rho, beta, t))
        .collect::<Result<_>>()?;
    let ext = aitken_tail(&samples).expect("ladder has at least 3 points");
    let agreement = (ext.limit - predicted).abs() / predicted.abs().max(1.0);

    let residuals: Vec<f64> = samples.iter().map(|y| (y - predicted).abs()).collect();
    let diverging = residuals.windows(2).all(|w| w[1] > w[0]);
    let name = "tail of fractional integral matches a π / sin(βπ)";
    let n = t_ladder.len();
    let witness = Witness::new(t_ladder[n - 3..].to_vec(), samples[n - 3..].to_vec());
    let verdict = if diverging {
        PropertyVerdict::fail(name, TAIL_TOL, witness.with_note("distance to the predicted limit grows along the ladder"))
    } else if agreement > TAIL_TOL {
        PropertyVerdict::fail(
            name,
            TAIL_TOL,
            witness.with_note(format!("extrapolated {} vs predicted {predicted}", ext.limit)),
        )
    } else {
        PropertyVerdict::pass(name, TAIL_TOL)
    };
    Ok(TailLimit {
        a,
        predicted,
        extrapolated: ext.limit,
        agreement,
        samples,
        verdict,
    })
}

/// `∫₀ᵗ (t-s)^{-1/2} / (1+s) ds = 2/√(1+t) · ln(√(1+t) + √t)`.
pub fn reciprocal_half_integral(t: f64) -> f64 {
    2.0 / (1.0 + t).sqrt() * ((1.0 + t).sqrt() + t.sqrt()).ln()
}

/// `g(t) = √(t/(1+t)) ln(√(1+t) + √t)`; the closed form above increases
/// exactly where `g < 1`.
pub fn turning_indicator(t: f64) -> f64 {
    (t / (1.0 + t)).sqrt() * ((1.0 + t).sqrt() + t.sqrt()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    pub t0: f64,
    pub g_at_1: f64,
}

/// Root of `g(t) = 1` on `[1, 10]` by bisection, run to machine precision.
pub fn find_turning_point() -> Result<TurningPoint> {
    let g_at_1 = turning_indicator(1.0);
    if g_at_1 >= 1.0 || turning_indicator(10.0) <= 1.0 {
        return Err(Error::Numerical("g(t) - 1 does not change sign on [1, 10]".into()));
    }
    let (mut lo, mut hi) = (1.0_f64, 10.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if turning_indicator(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t0 = if (turning_indicator(lo) - 1.0).abs() <= (turning_indicator(hi) - 1.0).abs() {
        lo
    } else {
        hi
    };
    Ok(TurningPoint { t0, g_at_1 })
}

/// Checks `t^{1-β} |y(t)| ≤ 2^{1/q} t^{β-1/p} (qβ-q+1)^{-1/q} (∫₀ᵗ s^{p(1-β)} |ρ|^p ds)^{1/p}`
/// for `p > 1/β`, `q = p/(p-1)`, `t ∈ (0, 1]`. The witness holds `[lhs, rhs]`.
pub fn check_weak_singular_bound(rho: &SingularFunction, beta: f64, p: f64, t: f64) -> Result<PropertyVerdict> {
    check_beta(beta)?;
    if !(p > 1.0 / beta && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p must exceed 1/β = {}, got {p}", 1.0 / beta)));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("the bound is stated for t in (0, 1], got {t}")));
    }
    let name = "weakly singular Lᵖ bound";
    let tol = 1e-9;
    let q = p / (p - 1.0);
    let lhs = t.powf(1.0 - beta) * frac_integral_value(rho, beta, t)?.abs();

    // ∫₀ᵗ s^{p(1-β)} |ρ|^p ds = t^{1+e} ∫₀¹ v^{e} |σ(tv)|^p dv, e = p(1-β-α).
    let e = p * (1.0 - beta - rho.alpha);
    if e <= -1.0 {
        return Ok(PropertyVerdict::fail(
            name,
            tol,
            Witness::new(vec![t], vec![lhs]).with_note(format!("s^(1-β) ρ is not in Lᵖ: exponent {e} ≤ -1")),
        ));
    }
    let lp = if rho.is_zero() {
        Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            nodes_used: 0,
            converged: true,
        }
    } else {
        integrate_graded(|v| rho.sigma(t * v).map(|s| s.abs().powf(p)), 0.0, e, graded_levels(t), &Ladder::default())?
            .map_err(|source| Error::AtNode { node: 0, t, source })?
            .scaled(t.powf(1.0 + e))
    };
    // A kink of |σ|^p where σ changes sign slows the ladder without harm;
    // only a large unresolved error reads as divergence.
    let blown_up = !lp.value.is_finite() || (!lp.converged && lp.error_estimate > 1e-6 * lp.value.abs());
    if blown_up {
        return Ok(PropertyVerdict::fail(
            name,
            tol,
            Witness::new(vec![t], vec![lhs, lp.value]).with_note("Lᵖ integral did not settle on the quadrature ladder"),
        ));
    }
    let rhs = 2f64.powf(1.0 / q) * t.powf(beta - 1.0 / p) / (q * beta - q + 1.0).powf(1.0 / q) * lp.value.powf(1.0 / p);
    let witness = Witness::new(vec![t], vec![lhs, rhs]);
    Ok(if lhs <= rhs * (1.0 + tol) {
        PropertyVerdict::pass_with(name, tol, witness)
    } else {
        PropertyVerdict::fail(name, tol, witness)
    })
}

/// Samples `u(t) = t^{1-β} y(t)` at `t = 2^{-k}`, `k = 0..=160`, and checks
/// that the values stay bounded and settle: the gaps between successive
/// samples end up nonincreasing and the last gap is below a tenth of the
/// largest.
pub fn check_weighted_continuity(rho: &SingularFunction, beta: f64) -> Result<PropertyVerdict> {
    check_beta(beta)?;
    let name = "t^(1-β) y(t) settles as t → 0";
    let tol = 0.1;
    let ts: Vec<f64> = (0..=160).map(|k| 0.5f64.powi(k)).collect();
    let mut us = Vec::with_capacity(ts.len());
    for &t in &ts {
        let y = frac_integral_value(rho, beta, t)?;
        us.push(t.powf(1.0 - beta) * y);
    }
    if let Some(j) = us.iter().position(|u| !u.is_finite()) {
        return Ok(PropertyVerdict::fail(name, tol, Witness::new(vec![ts[j]], vec![us[j]]).with_note("unbounded")));
    }
    let scale = us.iter().fold(1.0_f64, |m, u| m.max(u.abs()));
    let gaps: Vec<f64> = us.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let last = *gaps.last().expect("160 gaps");
    let tail = &gaps[gaps.len() * 3 / 4..];
    let settling = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale);
    let ok = max_gap == 0.0 || (last <= tol * max_gap && settling);
    let n = ts.len();
    Ok(PropertyVerdict::from_check(
        name,
        tol,
        ok,
        Witness::new(ts[n - 3..].to_vec(), us[n - 3..].to_vec()).with_note(format!("last gap {last:e}, largest gap {max_gap:e}")),
    ))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::special::{beta_checked, gamma_checked};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn power_law_closed_form() {
        let rho = SingularFunction::parse("s^(-1/3)", 1.0 / 3.0).unwrap();
        let y = frac_integral_value(&rho, 0.5, 1.0).unwrap();
        let exact = gamma_checked(0.5).unwrap() * gamma_checked(2.0 / 3.0).unwrap() / gamma_checked(7.0 / 6.0).unwrap();
        assert!(rel(y, exact) < 1e-12, "{y} vs {exact}");
    }

    #[test]
    fn reciprocal_closed_form() {
        let rho = SingularFunction::parse("1/(1+s)", 0.0).unwrap();
        for t in [0.1, 1.0, 10.0, 100.0, 1e6] {
            let y = frac_integral_value(&rho, 0.5, t).unwrap();
            assert!(rel(y, reciprocal_half_integral(t)) < 1e-11, "t = {t}");
        }
    }

    #[test]
    fn resolvent_is_constant_in_t() {
        for beta in [0.2, 0.5, 0.8] {
            let rho = SingularFunction::parse(&format!("s^(-{beta})"), beta).unwrap();
            for t in [1e-3, 0.5, 5.0, 500.0, 1e9] {
                let y = frac_integral_value(&rho, beta, t).unwrap();
                assert!(rel(y, PI / (beta * PI).sin()) < 1e-12);
            }
        }
    }

    #[test]
    fn homogeneity_power_family() {
        for &(alpha, beta) in &[(0.0, 0.3), (0.5, 0.5), (0.9, 0.2), (0.25, 0.75)] {
            let rho = SingularFunction::parse(&format!("s^(-{alpha})"), alpha).unwrap();
            for t in [0.01, 1.0, 37.0] {
                let y = frac_integral_value(&rho, beta, t).unwrap();
                let exact = beta_checked(beta, 1.0 - alpha).unwrap() * t.powf(beta - alpha);
                assert!(rel(y, exact) < 1e-9);
            }
        }
    }

    #[test]
    fn zero_density() {
        let rho = SingularFunction::parse("0", 0.0).unwrap();
        assert_eq!(frac_integral_value(&rho, 0.5, 3.0).unwrap(), 0.0);
        let v = check_weak_singular_bound(&rho, 0.5, 3.0, 1.0).unwrap();
        assert!(v.pass);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(SingularFunction::parse("s", 1.0).is_err());
        let rho = SingularFunction::parse("1", 0.0).unwrap();
        assert!(frac_integral(&rho, 1.0, 1.0).is_err());
        assert!(frac_integral(&rho, 0.5, 0.0).is_err());
        assert!(check_weak_singular_bound(&rho, 0.5, 2.0, 1.0).is_err());
        assert!(tail_limit(&rho, 0.5, &[1.0, 2.0, 4.0]).is_err());
    }

    #[test]
    fn domain_errors_surface() {
        let rho = SingularFunction::parse("ln(s - 1)", 0.0).unwrap();
        assert!(matches!(frac_integral(&rho, 0.5, 0.5), Err(Error::AtNode { .. })));
    }

    #[test]
    fn monotone_examples() {
        let grid = log_grid(1e-3, 1e3, 60);
        let rho = SingularFunction::parse("s^(-1/3)", 1.0 / 3.0).unwrap();
        let v = check_monotone(&rho, 0.5, &grid, Direction::Nondecreasing).unwrap();
        assert!(v.pass && v.witness.is_none(), "{v}");

        let rho = SingularFunction::parse("s^(-0.5)", 0.5).unwrap();
        for d in [Direction::Nonincreasing, Direction::Nondecreasing] {
            let v = check_monotone(&rho, 0.5, &grid, d).unwrap();
            assert!(v.pass && v.witness.is_none());
        }

        let rho = SingularFunction::parse("1/(1+s)", 0.0).unwrap();
        let unit = log_grid(1e-3, 1.0, 40);
        let v = check_monotone(&rho, 0.5, &unit, Direction::Nondecreasing).unwrap();
        assert!(v.pass && v.witness.is_none());
        // Past t = 1 the hypothesis fails, so the check is vacuous.
        let v = check_monotone(&rho, 0.5, &grid, Direction::Nondecreasing).unwrap();
        assert!(v.pass && v.witness.is_some());
    }

    #[test]
    fn turning_point_bracket() {
        let tp = find_turning_point().unwrap();
        assert!(tp.t0 > 2.0 && tp.t0 < 3.0);
        assert!((turning_indicator(tp.t0) - 1.0).abs() <= 1e-10);
        assert!((tp.g_at_1 - 0.5 * 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
    }

    #[test]
    fn continuity_examples() {
        for (src, alpha) in [("s^(-1/3)", 1.0 / 3.0), ("1", 0.0), ("s^(-0.5)", 0.5), ("s^(-0.95)", 0.95)] {
            let rho = SingularFunction::parse(src, alpha).unwrap();
            let v = check_weighted_continuity(&rho, 0.5).unwrap();
            assert!(v.pass, "{src}: {v}");
        }
    }

    #[test]
    fn tail_of_resolvent_is_exact() {
        let rho = SingularFunction::parse("s^(-0.3)", 0.3).unwrap();
        let tl = tail_limit(&rho, 0.3, &dyadic_ladder(0, 30, 3)).unwrap();
        assert!(tl.verdict.pass);
        assert!(tl.agreement < 1e-10);
    }
}
