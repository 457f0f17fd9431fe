//! Sampled audits of the hypotheses behind the monotonicity and long-time
//! results: shape and growth of φ, monotonicity and decay of the time
//! coefficients, local integrability exponents, and envelopes of `f`.
//!
//! Nothing here is proved; every check runs on a finite grid and reports a
//! witness when it fails.

use crate::expr::{ExprError, Formula};
use crate::fracint::{log_grid, monotone_violation, Direction, SingularFunction};
use crate::verdict::{PropertyVerdict, Witness};

/// Slack on sign and monotonicity checks.
pub const AUDIT_TOL: f64 = 1e-9;
/// Largest log-growth over the last sampled decade that still reads as bounded.
pub const SLOPE_TOL: f64 = 1e-3;

const PER_DECADE: usize = 20;

/// `t ∈ [10⁻⁶, 10⁶]`, 20 points per decade.
pub fn time_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 12 * PER_DECADE + 1)
}

/// `{0} ∪ [10⁻⁶, 10⁶]`, 20 points per decade.
pub fn state_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(time_grid());
    g
}

fn eval_all(xs: &[f64], mut g: impl FnMut(f64) -> Result<f64, ExprError>) -> Result<Vec<f64>, (f64, ExprError)> {
    xs.iter().map(|&x| g(x).map_err(|e| (x, e))).collect()
}

fn eval_failure(name: &str, tol: f64, (x, e): (f64, ExprError)) -> PropertyVerdict {
    PropertyVerdict::fail(name, tol, Witness::new(vec![x], vec![]).with_note(e.to_string()))
}

fn first_negative(values: &[f64]) -> Option<usize> {
    values.iter().position(|&v| v < -AUDIT_TOL * v.abs().max(1.0) || v.is_nan())
}

/// Growth constant `M` fitted on the sample, with the verdict it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub m: f64,
    pub verdict: PropertyVerdict,
}

/// Audits `φ ≥ 0` (and nondecreasing when `monotone`) with
/// `φ(x) ≤ M x^μ` on [`state_grid`]. `M` is the sampled supremum of
/// `φ/x^μ`; the fit is rejected when that ratio still grows over the last
/// decade, since the sample then says nothing about a global bound.
pub fn phi_growth(phi: &Formula, mu: f64, monotone: bool) -> Growth {
    let name = if monotone {
        "phi nonnegative, nondecreasing, phi(x) <= M x^mu"
    } else {
        "phi nonnegative, phi(x) <= M x^mu"
    };
    let fail = |w: Witness| Growth {
        m: f64::INFINITY,
        verdict: PropertyVerdict::fail(name, AUDIT_TOL, w),
    };
    let mu_ok = mu >= 0.0 && if monotone { mu < 1.0 } else { mu <= 1.0 };
    if !mu_ok {
        return fail(Witness::new(vec![], vec![mu]).with_note("growth exponent mu out of range"));
    }
    let xs = state_grid();
    let vals = match eval_all(&xs, |x| phi.eval1(x)) {
        Ok(v) => v,
        Err(e) => {
            return Growth {
                m: f64::INFINITY,
                verdict: eval_failure(name, AUDIT_TOL, e),
            }
        }
    };
    if let Some(j) = vals.iter().position(|v| !v.is_finite()).or_else(|| first_negative(&vals)) {
        return fail(Witness::new(vec![xs[j]], vec![vals[j]]).with_note("phi negative or not finite"));
    }
    if monotone {
        if let Some(j) = monotone_violation(&vals, Direction::Nondecreasing, AUDIT_TOL) {
            return fail(Witness::new(vec![xs[j], xs[j + 1]], vec![vals[j], vals[j + 1]]).with_note("phi decreases"));
        }
    }
    if mu > 0.0 && vals[0].abs() > AUDIT_TOL {
        return fail(Witness::new(vec![0.0], vec![vals[0]]).with_note("phi(0) > 0 cannot be bounded by M x^mu"));
    }
    let ratios: Vec<f64> = xs
        .iter()
        .zip(&vals)
        .filter(|(&x, _)| x > 0.0 || mu == 0.0)
        .map(|(&x, &v)| if mu == 0.0 { v } else { v / x.powf(mu) })
        .collect();
    let m = ratios.iter().cloned().fold(0.0, f64::max);
    let n = ratios.len();
    let (end, prev) = (ratios[n - 1], ratios[n - 1 - PER_DECADE]);
    if end > 0.0 && prev > 0.0 && (end / prev).ln() > SLOPE_TOL {
        let x_end = *xs.last().expect("grid is nonempty");
        return fail(
            Witness::new(vec![x_end / 10.0, x_end], vec![prev, end]).with_note("phi / x^mu still grows over the last decade"),
        );
    }
    Growth {
        m,
        verdict: PropertyVerdict::pass_with(name, AUDIT_TOL, Witness::note(format!("M = {m}"))),
    }
}

/// `t^β g(t)` nonnegative and nonincreasing on [`time_grid`].
pub fn weighted_nonincreasing(label: &str, g: &SingularFunction, beta: f64) -> PropertyVerdict {
    let name = format!("t^beta {label} nonnegative and nonincreasing");
    let ts = time_grid();
    let vals = match eval_all(&ts, |t| g.rho(t).map(|r| t.powf(beta) * r)) {
        Ok(v) => v,
        Err(e) => return eval_failure(&name, AUDIT_TOL, e),
    };
    if let Some(j) = first_negative(&vals) {
        return PropertyVerdict::fail(name, AUDIT_TOL, Witness::new(vec![ts[j]], vec![vals[j]]).with_note("negative"));
    }
    match monotone_violation(&vals, Direction::Nonincreasing, AUDIT_TOL) {
        None => PropertyVerdict::pass(name, AUDIT_TOL),
        Some(j) => PropertyVerdict::fail(
            name,
            AUDIT_TOL,
            Witness::new(vec![ts[j], ts[j + 1]], vec![vals[j], vals[j + 1]]).with_note("increases"),
        ),
    }
}

/// `g ≥ 0` on [`time_grid`].
pub fn nonnegative(label: &str, g: impl FnMut(f64) -> Result<f64, ExprError>) -> PropertyVerdict {
    let name = format!("{label} nonnegative");
    let ts = time_grid();
    let vals = match eval_all(&ts, g) {
        Ok(v) => v,
        Err(e) => return eval_failure(&name, AUDIT_TOL, e),
    };
    match first_negative(&vals) {
        None => PropertyVerdict::pass(name, AUDIT_TOL),
        Some(j) => PropertyVerdict::fail(name, AUDIT_TOL, Witness::new(vec![ts[j]], vec![vals[j]])),
    }
}

/// `t^{(1-μ)(1-β)} l ∈ Lᵖ[0,1]` for some `p > 1/β` when `l ~ t^{-α}` at 0,
/// which holds iff `α - (1-μ)(1-β) < β`.
pub fn integrable_l(alpha: f64, mu: f64, beta: f64) -> PropertyVerdict {
    let name = "t^((1-mu)(1-beta)) l in L^p[0,1] for some p > 1/beta";
    let e = alpha - (1.0 - mu) * (1.0 - beta);
    let w = Witness::new(vec![], vec![e, beta]).with_note(format!("alpha_l - (1-mu)(1-beta) = {e}, needs < beta = {beta}"));
    PropertyVerdict::from_check(name, 0.0, e < beta, w)
}

/// `t^{1-β} k ∈ Lᵖ[0,1]` for some `p > 1/β`; with `k ~ t^{-α}` this is `α < 1`.
pub fn integrable_k(alpha: f64) -> PropertyVerdict {
    let name = "t^(1-beta) k in L^p[0,1] for some p > 1/beta";
    let w = Witness::new(vec![], vec![alpha]).with_note(format!("alpha_k = {alpha}, needs < 1"));
    PropertyVerdict::from_check(name, 0.0, alpha < 1.0, w)
}

pub fn positive_start(x0: f64) -> PropertyVerdict {
    PropertyVerdict::from_check("x0 > 0", 0.0, x0 > 0.0, Witness::new(vec![], vec![x0]))
}

/// `t^γ |g(t)|` bounded on `[1, 10⁶]`: finite everywhere and not growing
/// over the last decade by more than [`SLOPE_TOL`] in log scale.
pub fn decay_bound(label: &str, mut g: impl FnMut(f64) -> Result<f64, ExprError>, gamma: f64) -> PropertyVerdict {
    let name = format!("t^gamma |{label}| <= K on [1, inf) (gamma = {gamma})");
    let ts = log_grid(1.0, 1e6, 6 * PER_DECADE + 1);
    let vals = match eval_all(&ts, |t| g(t).map(|v| t.powf(gamma) * v.abs())) {
        Ok(v) => v,
        Err(e) => return eval_failure(&name, SLOPE_TOL, e),
    };
    if let Some(j) = vals.iter().position(|v| !v.is_finite()) {
        return PropertyVerdict::fail(name, SLOPE_TOL, Witness::new(vec![ts[j]], vec![vals[j]]).with_note("not finite"));
    }
    let n = vals.len();
    let (end, prev) = (vals[n - 1], vals[n - 1 - PER_DECADE]);
    let k = vals.iter().cloned().fold(0.0, f64::max);
    if end > 0.0 && (prev <= 0.0 || (end / prev).ln() > SLOPE_TOL) {
        return PropertyVerdict::fail(
            name,
            SLOPE_TOL,
            Witness::new(vec![ts[n - 1 - PER_DECADE], ts[n - 1]], vec![prev, end]).with_note("still growing"),
        );
    }
    PropertyVerdict::pass_with(name, SLOPE_TOL, Witness::note(format!("K = {k}")))
}

/// Fractions of `1-β` tried above `β` when no decay exponent is declared.
pub const GAMMA_CANDIDATES: [f64; 4] = [0.9, 0.5, 0.25, 0.1];

pub type TimeFn<'a> = Box<dyn Fn(f64) -> Result<f64, ExprError> + 'a>;

/// Audits `t^γ |g| ≤ K` for every `(label, g)`. With no declared `γ` the
/// candidates `β + (1-β)·c` are tried in order and the first that bounds all
/// functions is kept.
pub fn decay_exponent(declared: Option<f64>, beta: f64, fns: &[(&str, TimeFn<'_>)]) -> (Option<f64>, Vec<PropertyVerdict>) {
    let run = |gamma: f64| -> Vec<PropertyVerdict> { fns.iter().map(|(label, g)| decay_bound(label, g, gamma)).collect() };
    if let Some(gamma) = declared {
        let mut verdicts = run(gamma);
        if !(gamma > beta && gamma < 1.0) {
            verdicts.push(PropertyVerdict::fail(
                "beta < gamma < 1",
                0.0,
                Witness::new(vec![], vec![gamma, beta]),
            ));
        }
        let ok = verdicts.iter().all(|v| v.pass);
        return (ok.then_some(gamma), verdicts);
    }
    let mut last = Vec::new();
    for c in GAMMA_CANDIDATES {
        let gamma = beta + (1.0 - beta) * c;
        let verdicts = run(gamma);
        if verdicts.iter().all(|v| v.pass) {
            return (Some(gamma), verdicts);
        }
        last = verdicts;
    }
    (None, last)
}

/// `sign(x) |x|^μ`, with `x^0 = 1`.
pub fn odd_power(x: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        1.0
    } else {
        x.signum() * x.abs().powf(mu)
    }
}

/// Sample rectangle for two-dimensional envelope checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRange {
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for StateRange {
    fn default() -> Self {
        StateRange { x_min: -10.0, x_max: 10.0 }
    }
}

fn rectangle(range: StateRange) -> (Vec<f64>, Vec<f64>) {
    let ts = log_grid(1e-6, 1e6, 4 * 12 + 1);
    let n = 40;
    let mut xs: Vec<f64> = (0..=n)
        .map(|i| range.x_min + (range.x_max - range.x_min) * i as f64 / n as f64)
        .collect();
    if range.x_min < 0.0 && range.x_max > 0.0 {
        xs.push(0.0);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    (ts, xs)
}

/// Checks `lo(t, x) ≤ f(t, x) ≤ hi(t, x)` on a `(t, x)` grid, with slack
/// `AUDIT_TOL · max(1, |f|)`. `bounds` returns `(lo, f, hi)`.
pub fn envelope_check(
    name: &str,
    range: StateRange,
    mut bounds: impl FnMut(f64, f64) -> Result<(f64, f64, f64), ExprError>,
) -> PropertyVerdict {
    let (ts, xs) = rectangle(range);
    for &t in &ts {
        for &x in &xs {
            let (lo, f, hi) = match bounds(t, x) {
                Ok(v) => v,
                Err(e) => {
                    return PropertyVerdict::fail(name, AUDIT_TOL, Witness::new(vec![t, x], vec![]).with_note(e.to_string()))
                }
            };
            let slack = AUDIT_TOL * f.abs().max(1.0);
            if !(f >= lo - slack && f <= hi + slack) {
                return PropertyVerdict::fail(name, AUDIT_TOL, Witness::new(vec![t, x], vec![lo, f, hi]));
            }
        }
    }
    PropertyVerdict::pass(name, AUDIT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(src: &str) -> Formula {
        Formula::parse(src, &["x"]).unwrap()
    }

    #[test]
    fn growth_fits() {
        let g = phi_growth(&phi("(x+1)/(x+2)"), 0.0, true);
        assert!(g.verdict.pass && (g.m - 1.0).abs() < 1e-5);
        let g = phi_growth(&phi("cbrt(x)"), 1.0 / 3.0, true);
        assert!(g.verdict.pass && (g.m - 1.0).abs() < 1e-12);
        let g = phi_growth(&phi("ln(1 + x^0.5)"), 0.5, true);
        assert!(g.verdict.pass && g.m <= 1.0);
        assert!(!phi_growth(&phi("x"), 0.5, true).verdict.pass);
        assert!(!phi_growth(&phi("1/(1+x)"), 0.0, true).verdict.pass);
        assert!(phi_growth(&phi("1/(1+x)"), 0.0, false).verdict.pass);
        assert!(!phi_growth(&phi("x"), 1.0, true).verdict.pass);
        assert!(phi_growth(&phi("x"), 1.0, false).verdict.pass);
    }

    #[test]
    fn weighted_monotonicity() {
        let l = SingularFunction::parse_in("t^(-3/4) + t^(-1/2)", "t", 0.75).unwrap();
        assert!(weighted_nonincreasing("l", &l, 0.5).pass);
        let l = SingularFunction::parse_in("1/(1+t)", "t", 0.0).unwrap();
        assert!(!weighted_nonincreasing("l", &l, 0.5).pass);
        let k = SingularFunction::parse_in("-t^(-1/2)", "t", 0.5).unwrap();
        assert!(!weighted_nonincreasing("k", &k, 0.5).pass);
    }

    #[test]
    fn decay_exponent_selection() {
        let l: TimeFn = Box::new(|t: f64| Ok(t.powf(-2.0 / 3.0)));
        let (g, v) = decay_exponent(None, 0.5, &[("l", l)]);
        assert_eq!(g, Some(0.625));
        assert!(v.iter().all(|v| v.pass));
        let l: TimeFn = Box::new(|t: f64| Ok(t.powf(-0.5)));
        let (g, _) = decay_exponent(None, 0.5, &[("l", l)]);
        assert_eq!(g, None);
    }

    #[test]
    fn envelopes() {
        let ok = envelope_check("sandwich", StateRange { x_min: 0.0, x_max: 10.0 }, |t, x| {
            Ok((t.sqrt() / (1.0 + t), (x + t).sqrt() / (1.0 + t), (x.sqrt() + t.sqrt()) / (1.0 + t)))
        });
        assert!(ok.pass);
        let bad = envelope_check("sandwich", StateRange::default(), |_, x| Ok((0.0, x, 1.0)));
        assert!(!bad.pass);
        assert_eq!(odd_power(-8.0, 1.0 / 3.0), -2.0);
    }
}
