//! Long-time limits: tail coefficients `a = lim t^β l`, `b = lim t^β k`,
//! roots of the scalar limit equation `x = C (a φ(x) + b)` with
//! `C = π / (Γ(β) sin βπ)`, audit-driven classification of which limit
//! result applies, and extrapolation of solver tails for comparison.

use serde::{Serialize, Serializer};

use crate::audit::{
    decay_exponent, envelope_check, integrable_k, integrable_l, nonnegative, odd_power, phi_growth, positive_start,
    weighted_nonincreasing, StateRange, TimeFn,
};
use crate::error::{Error, Result};
use crate::expr::Formula;
use crate::extrapolate::{aitken_tail, power_series_fit};
use crate::fracint::SingularFunction;
use crate::num;
use crate::solver::{Envelopes, General, ProblemSpec, Rhs, Structured, WeightedTrajectory};
use crate::special::limit_factor;
use crate::verdict::{PropertyVerdict, Witness};

/// Tail coefficients below this magnitude are reported as exactly zero.
pub const ZERO_SNAP: f64 = 1e-9;
/// Points in the root scan of the limit equation.
pub const SCAN_POINTS: usize = 10_000;
/// Allowed gap between extrapolated and predicted limits, relative to
/// `max(1, |predicted|)`.
pub const AGREEMENT_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCoefficient {
    pub value: f64,
    pub converged: bool,
}

/// `lim t^β g(t)` from `t = 2^k`, `k = 6..=40`, by Aitken Δ² on the last
/// three samples. Errors when the samples keep moving away.
pub fn tail_coefficient(g: &SingularFunction, beta: f64) -> Result<TailCoefficient> {
    if g.is_zero() {
        return Ok(TailCoefficient {
            value: 0.0,
            converged: true,
        });
    }
    let ts: Vec<f64> = (6..=40).map(|k| 2f64.powi(k)).collect();
    let mut samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        let v = t.powf(beta) * g.rho(t)?;
        if !v.is_finite() {
            return Err(Error::Numerical(format!("t^beta g(t) is not finite at t = {t:e}")));
        }
        samples.push(v);
    }
    let n = samples.len();
    let gaps: Vec<f64> = samples[n - 4..].windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = samples[n - 1].abs().max(1.0);
    if gaps.windows(2).all(|w| w[1] >= w[0]) && gaps[gaps.len() - 1] > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "t^beta g(t) does not settle on the ladder up to 2^40 (last samples {:e}, {:e})",
            samples[n - 2],
            samples[n - 1]
        )));
    }
    let ext = aitken_tail(&samples).expect("35 samples");
    let value = if ext.limit.abs() <= ZERO_SNAP { 0.0 } else { ext.limit };
    // A constant t^β g shows only round-off jitter, which Aitken reads as
    // not converging.
    let flat = gaps.iter().all(|&d| d <= 1e-12 * scale);
    Ok(TailCoefficient {
        value,
        converged: ext.converging || flat,
    })
}

/// Upper bound on the nonnegative roots of `x = C (a φ(x) + b)` when
/// `φ(x) ≤ M x^μ`: past it, `x - C(a M x^μ + b) > 0`.
pub fn root_bound(c: f64, a: f64, b: f64, m: f64, mu: f64) -> Result<f64> {
    let cam = c * a * m;
    let base = if mu < 1.0 {
        (2.0 * cam).powf(1.0 / (1.0 - mu)).max(2.0 * c * b)
    } else if cam < 1.0 {
        2.0 * c * b / (1.0 - cam)
    } else {
        return Err(Error::Numerical(format!(
            "linear growth with C a M = {cam} >= 1 gives no bound on the roots"
        )));
    };
    if !base.is_finite() {
        return Err(Error::Numerical("root bound is not finite".into()));
    }
    Ok(base * 1.1 + 1.0)
}

/// Bisection of a sign change of `g` on `[lo, hi]` down to adjacent floats.
fn bisect(g: &mut impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut g_lo: f64) -> Result<f64> {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zeros of `g` on `[0, x_max]`: exact zeros at scan points plus one
/// bisected root per sign change. Tangential roots are not seen.
pub fn scan_roots(mut g: impl FnMut(f64) -> Result<f64>, x_max: f64, points: usize) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=points {
        let x = x_max * i as f64 / points as f64;
        let gx = g(x)?;
        if !gx.is_finite() {
            return Err(Error::Numerical(format!("limit equation is not finite at x = {x}")));
        }
        if gx == 0.0 {
            roots.push(x);
        } else if let Some((xp, gp)) = prev {
            if gp != 0.0 && (gp > 0.0) != (gx > 0.0) {
                roots.push(bisect(&mut g, xp, x, gp)?);
            }
        }
        prev = Some((x, gx));
    }
    Ok(roots)
}

/// Sorted nonnegative roots of `x = C (a φ(x) + b)`. The scan range comes
/// from the growth bound `φ(x) ≤ M x^μ`, with `M` fitted on a sample.
pub fn solve_limit_equation(phi: &Formula, a: f64, b: f64, beta: f64, mu: f64) -> Result<Vec<f64>> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Domain(format!("limit equation needs a, b >= 0, got a = {a}, b = {b}")));
    }
    let c = limit_factor(beta)?;
    if a == 0.0 {
        return Ok(vec![c * b]);
    }
    let growth = phi_growth(phi, mu, false);
    if !growth.verdict.pass {
        return Err(Error::Numerical(format!("no usable growth bound for phi: {}", growth.verdict)));
    }
    let x_max = root_bound(c, a, b, growth.m, mu)?;
    let roots = scan_roots(|x| Ok(x - c * (a * phi.eval1(x)? + b)), x_max, SCAN_POINTS)?;
    if roots.is_empty() && mu < 1.0 {
        return Err(Error::Numerical(format!(
            "no nonnegative root on [0, {x_max}] although the equation grows past its bound"
        )));
    }
    Ok(roots)
}

/// Largest root.
pub fn select_limit(roots: &[f64]) -> Result<f64> {
    roots
        .iter()
        .cloned()
        .reduce(f64::max)
        .ok_or_else(|| Error::Domain("no roots to select from".into()))
}

/// Checks that `x = C (a φ(x + x*) + b) - x*` has no positive root, i.e.
/// that `x*` really is the largest root of the limit equation.
pub fn check_shifted_equation(phi: &Formula, a: f64, b: f64, beta: f64, mu: f64, x_star: f64) -> PropertyVerdict {
    let name = "shifted limit equation has only the root 0";
    let tol = 1e-9;
    let run = || -> Result<Vec<f64>> {
        let c = limit_factor(beta)?;
        let m = phi_growth(phi, mu, false).m;
        let x_max = root_bound(c, a, b, m, mu)?;
        let floor = tol * x_star.abs().max(1.0);
        let roots = scan_roots(|x| Ok(x - (c * (a * phi.eval1(x + x_star)? + b) - x_star)), x_max, SCAN_POINTS)?;
        Ok(roots.into_iter().filter(|&r| r > floor).collect())
    };
    match run() {
        Ok(extra) if extra.is_empty() => PropertyVerdict::pass(name, tol),
        Ok(extra) => PropertyVerdict::fail(name, tol, Witness::new(extra, vec![]).with_note("positive roots of the shifted equation")),
        Err(e) => PropertyVerdict::fail(name, tol, Witness::note(e.to_string())),
    }
}

/// Which limit result the audits support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Governing {
    /// Monotone case, unique root of the limit equation.
    UniqueRoot,
    /// Monotone case with `a = 0`: limit `C b`.
    ForcingOnly,
    /// Monotone case with `a = b = 0`: limit 0.
    Vanishing,
    /// Monotone case, largest of several roots.
    LargestRoot,
    /// Nonnegative `l` with `t^γ l` bounded: limit `C b`.
    DecayingCoefficient,
    /// Two-sided envelopes sharing `b`: limit `C b`.
    Sandwich,
    /// `|f| ≤ l |x|^μ + k` with both decaying: limit 0.
    AbsoluteBound,
    None,
}

impl Governing {
    pub fn label(self) -> &'static str {
        match self {
            Governing::UniqueRoot => "3.2",
            Governing::ForcingOnly => "3.3",
            Governing::Vanishing => "3.4",
            Governing::LargestRoot => "3.5",
            Governing::DecayingCoefficient => "3.6",
            Governing::Sandwich => "3.7",
            Governing::AbsoluteBound => "3.8",
            Governing::None => "none",
        }
    }
}

impl Serialize for Governing {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteReport {
    #[serde(serialize_with = "num::ser")]
    pub a: f64,
    #[serde(serialize_with = "num::ser")]
    pub b: f64,
    #[serde(serialize_with = "num::ser_vec")]
    pub roots: Vec<f64>,
    /// NaN (JSON `null`) when nothing governs.
    #[serde(serialize_with = "num::ser")]
    pub predicted_limit: f64,
    pub governing_theorem: Governing,
    pub hypothesis_audit: Vec<PropertyVerdict>,
    #[serde(serialize_with = "num::ser_opt")]
    pub extrapolated_solver_limit: Option<f64>,
    #[serde(serialize_with = "num::ser_opt")]
    pub extrapolation_uncertainty: Option<f64>,
    #[serde(serialize_with = "num::ser_opt")]
    pub agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement_verdict: Option<PropertyVerdict>,
    pub notes: Vec<String>,
}

impl AsymptoteReport {
    fn new(a: f64, b: f64) -> Self {
        AsymptoteReport {
            a,
            b,
            roots: Vec::new(),
            predicted_limit: f64::NAN,
            governing_theorem: Governing::None,
            hypothesis_audit: Vec::new(),
            extrapolated_solver_limit: None,
            extrapolation_uncertainty: None,
            agreement: None,
            agreement_verdict: None,
            notes: Vec::new(),
        }
    }

    fn conclude(&mut self, governing: Governing, limit: f64) {
        self.governing_theorem = governing;
        self.predicted_limit = limit;
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Extrapolates `traj` and records the gap to the prediction.
    pub fn attach_trajectory(&mut self, traj: &WeightedTrajectory) -> Result<()> {
        let est = extrapolate_limit(traj)?;
        self.extrapolated_solver_limit = Some(est.limit);
        self.extrapolation_uncertainty = Some(est.uncertainty);
        if !est.tail_monotone {
            self.notes.push("solver tail is not monotone over its last decade; extrapolation is unreliable".into());
        }
        let gap = (est.limit - self.predicted_limit).abs() / self.predicted_limit.abs().max(1.0);
        let gap = if gap.is_finite() { gap } else { f64::INFINITY };
        self.agreement = Some(gap);
        let name = "extrapolated solver limit matches prediction";
        self.agreement_verdict = Some(PropertyVerdict::from_check(
            name,
            AGREEMENT_TOL,
            gap <= AGREEMENT_TOL,
            Witness::new(vec![traj.final_time()], vec![est.limit, self.predicted_limit]),
        ));
        Ok(())
    }

    /// False only when a trajectory was attached and its limit disagrees.
    pub fn agrees(&self) -> bool {
        self.agreement_verdict.as_ref().is_none_or(|v| v.pass)
    }
}

fn tagged(stage: &str, v: PropertyVerdict) -> PropertyVerdict {
    PropertyVerdict {
        name: format!("[{stage}] {}", v.name),
        ..v
    }
}

fn tail_verdict(label: &str, tail: &Result<TailCoefficient>) -> PropertyVerdict {
    let name = format!("lim t^beta {label} exists");
    match tail {
        Ok(t) if t.converged => PropertyVerdict::pass_with(name, 0.0, Witness::new(vec![], vec![t.value])),
        Ok(t) => PropertyVerdict::fail(name, 0.0, Witness::new(vec![], vec![t.value]).with_note("samples not settling")),
        Err(e) => PropertyVerdict::fail(name, 0.0, Witness::note(e.to_string())),
    }
}

fn tail_value(tail: &Result<TailCoefficient>) -> f64 {
    tail.as_ref().map_or(f64::NAN, |t| t.value)
}

fn all_pass(vs: &[PropertyVerdict]) -> bool {
    vs.iter().all(|v| v.pass)
}

/// Runs the audits in order and reports the first limit result whose
/// hypotheses all hold on the sample grids: the monotone case, then
/// decaying `l`, then envelopes sharing `b`, then the absolute bound.
pub fn classify(spec: &ProblemSpec) -> AsymptoteReport {
    if let Err(e) = spec.validate() {
        let mut r = AsymptoteReport::new(f64::NAN, f64::NAN);
        r.notes.push(e.to_string());
        return r;
    }
    match &spec.rhs {
        Rhs::Structured(s) => classify_structured(spec, s),
        Rhs::General(g) => classify_general(spec, g),
    }
}

fn classify_structured(spec: &ProblemSpec, s: &Structured) -> AsymptoteReport {
    let beta = spec.beta;
    let c = limit_factor(beta).expect("beta validated");
    let a_tail = tail_coefficient(&s.l, beta);
    let b_tail = tail_coefficient(&s.k, beta);
    let (a, b) = (tail_value(&a_tail), tail_value(&b_tail));
    let mut report = AsymptoteReport::new(a, b);

    // Monotone case.
    let stage = "monotone";
    let mut checks = vec![
        phi_growth(&s.phi, s.mu, true).verdict,
        weighted_nonincreasing("l", &s.l, beta),
        weighted_nonincreasing("k", &s.k, beta),
        integrable_l(s.l.alpha(), s.mu, beta),
        integrable_k(s.k.alpha()),
        positive_start(spec.x0),
        tail_verdict("l", &a_tail),
        tail_verdict("k", &b_tail),
    ];
    if all_pass(&checks) {
        match solve_limit_equation(&s.phi, a, b, beta, s.mu) {
            Ok(roots) => {
                let x_star = select_limit(&roots).expect("nonempty when mu < 1");
                let governing = if a == 0.0 && b == 0.0 {
                    Governing::Vanishing
                } else if a == 0.0 {
                    Governing::ForcingOnly
                } else if roots.len() == 1 {
                    Governing::UniqueRoot
                } else {
                    report.notes.push(format!(
                        "limit equation has {} nonnegative roots; taking the largest",
                        roots.len()
                    ));
                    Governing::LargestRoot
                };
                if governing == Governing::LargestRoot || governing == Governing::UniqueRoot {
                    checks.push(check_shifted_equation(&s.phi, a, b, beta, s.mu, x_star));
                }
                let ok = all_pass(&checks);
                report.roots = roots;
                report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
                if ok {
                    report.conclude(governing, x_star);
                    return report;
                }
            }
            Err(e) => {
                checks.push(PropertyVerdict::fail("limit equation solvable", 0.0, Witness::note(e.to_string())));
                report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
            }
        }
    } else {
        report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
    }

    // Nonnegative, possibly non-monotone l with t^γ decay.
    let stage = "decaying l";
    let l_fn: TimeFn = Box::new(|t| s.l.rho(t));
    let (gamma, bounds) = decay_exponent(s.gamma, beta, &[("l", l_fn)]);
    let mut checks = vec![
        phi_growth(&s.phi, s.mu, false).verdict,
        nonnegative("l", |t| s.l.rho(t)),
        nonnegative("k", |t| s.k.rho(t)),
        integrable_l(s.l.alpha(), s.mu, beta),
        integrable_k(s.k.alpha()),
        tail_verdict("k", &b_tail),
        PropertyVerdict::from_check("b >= 0", 0.0, b >= 0.0, Witness::new(vec![], vec![b])),
    ];
    checks.extend(bounds);
    let ok = all_pass(&checks);
    report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
    if ok {
        report.notes.push(format!("decay exponent gamma = {}", gamma.expect("bounds passed")));
        report.conclude(Governing::DecayingCoefficient, c * b);
        return report;
    }

    // l x^μ + k bounds f from both sides.
    let stage = "sandwich";
    let l_fn: TimeFn = Box::new(|t| s.l.rho(t));
    let (gamma, bounds) = decay_exponent(s.gamma, beta, &[("l", l_fn)]);
    let sandwich = envelope_check("l x^mu + k <= f <= l x^mu + k", StateRange::default(), |t, x| {
        let f = spec.f(t, x)?;
        let env = s.l.rho(t)? * odd_power(x, s.mu) + s.k.rho(t)?;
        Ok((env, f, env))
    });
    let mut checks = vec![
        sandwich,
        integrable_l(s.l.alpha(), s.mu, beta),
        integrable_k(s.k.alpha()),
        tail_verdict("k", &b_tail),
    ];
    checks.extend(bounds);
    let ok = all_pass(&checks);
    report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
    if ok {
        report.notes.push(format!("decay exponent gamma = {}", gamma.expect("bounds passed")));
        report.conclude(Governing::Sandwich, c * b);
        return report;
    }

    // |f| ≤ M l |x|^μ + k.
    let stage = "absolute bound";
    let m = phi_growth(&s.phi, s.mu, false).m;
    let l_fn: TimeFn = Box::new(|t| s.l.rho(t));
    let k_fn: TimeFn = Box::new(|t| s.k.rho(t));
    let (gamma, bounds) = decay_exponent(s.gamma, beta, &[("l", l_fn), ("k", k_fn)]);
    let bound = envelope_check("|f| <= M l |x|^mu + k", StateRange::default(), |t, x| {
        let f = spec.f(t, x)?;
        let env = m * s.l.rho(t)? * odd_power(x.abs(), s.mu) + s.k.rho(t)?;
        Ok((-env, f, env))
    });
    let mut checks = vec![
        nonnegative("l", |t| s.l.rho(t)),
        nonnegative("k", |t| s.k.rho(t)),
        PropertyVerdict::from_check("M finite", 0.0, m.is_finite(), Witness::new(vec![], vec![m])),
        bound,
        integrable_l(s.l.alpha(), s.mu, beta),
        integrable_k(s.k.alpha()),
    ];
    checks.extend(bounds);
    finish_absolute(&mut report, stage, checks, gamma);
    report
}

fn finish_absolute(report: &mut AsymptoteReport, stage: &str, checks: Vec<PropertyVerdict>, gamma: Option<f64>) {
    let ok = all_pass(&checks);
    report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
    if ok {
        report.notes.push(format!("decay exponent gamma = {}", gamma.expect("bounds passed")));
        report.conclude(Governing::AbsoluteBound, 0.0);
    } else {
        report.notes.push("no limit result has all of its hypotheses satisfied on the sample grids".into());
    }
}

fn classify_general(spec: &ProblemSpec, g: &General) -> AsymptoteReport {
    let beta = spec.beta;
    let Some(env) = &g.envelopes else {
        let mut r = AsymptoteReport::new(f64::NAN, f64::NAN);
        r.notes.push("general right-hand side without envelopes: nothing to audit".into());
        return r;
    };
    let c = limit_factor(beta).expect("beta validated");
    let as_fn = |f: &Formula| SingularFunction::new(f.clone(), 0.0);
    let tail = |f: &Formula| as_fn(f).and_then(|sf| tail_coefficient(&sf, beta));
    let (a_tail, b_tail, b1_tail) = (tail(&env.l), tail(&env.k), tail(&env.k1));
    let (a, b, b1) = (tail_value(&a_tail), tail_value(&b_tail), tail_value(&b1_tail));
    let mut report = AsymptoteReport::new(a, b);
    report
        .notes
        .push("local integrability of the envelopes near t = 0 is taken from alpha_f, not audited".into());
    let range = state_range(env);

    let stage = "sandwich";
    let (gamma, bounds) = decay_exponent(
        env.gamma,
        beta,
        &[("l", Box::new(|t| env.l.eval1(t))), ("l1", Box::new(|t| env.l1.eval1(t)))],
    );
    let sandwich = envelope_check("l1 x^mu + k1 <= f <= l x^mu + k", range, |t, x| {
        let p = odd_power(x, env.mu);
        Ok((env.l1.eval1(t)? * p + env.k1.eval1(t)?, g.f.eval(&[t, x])?, env.l.eval1(t)? * p + env.k.eval1(t)?))
    });
    let same_b = b.is_finite() && b1.is_finite() && (b - b1).abs() <= 1e-6 * b.abs().max(1.0);
    let mut checks = vec![
        sandwich,
        tail_verdict("k", &b_tail),
        tail_verdict("k1", &b1_tail),
        PropertyVerdict::from_check("lim t^beta k = lim t^beta k1", 1e-6, same_b, Witness::new(vec![], vec![b, b1])),
    ];
    checks.extend(bounds);
    let ok = all_pass(&checks);
    report.hypothesis_audit.extend(checks.into_iter().map(|v| tagged(stage, v)));
    if ok {
        report.notes.push(format!("decay exponent gamma = {}", gamma.expect("bounds passed")));
        report.conclude(Governing::Sandwich, c * b);
        return report;
    }

    let stage = "absolute bound";
    let (gamma, bounds) = decay_exponent(
        env.gamma,
        beta,
        &[("l", Box::new(|t| env.l.eval1(t))), ("k", Box::new(|t| env.k.eval1(t)))],
    );
    let bound = envelope_check("|f| <= l |x|^mu + k", range, |t, x| {
        let e = env.l.eval1(t)? * odd_power(x.abs(), env.mu) + env.k.eval1(t)?;
        Ok((-e, g.f.eval(&[t, x])?, e))
    });
    let mut checks = vec![nonnegative("l", |t| env.l.eval1(t)), nonnegative("k", |t| env.k.eval1(t)), bound];
    checks.extend(bounds);
    finish_absolute(&mut report, stage, checks, gamma);
    report
}

fn state_range(env: &Envelopes) -> StateRange {
    let d = StateRange::default();
    StateRange {
        x_min: env.x_min.unwrap_or(d.x_min),
        x_max: env.x_max.unwrap_or(d.x_max),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub limit: f64,
    /// Spread of the limit across fit orders 2, 3 and 4.
    pub uncertainty: f64,
    /// Aitken Δ² on checkpoints `T 4^{-j}`, kept for comparison.
    pub aitken: f64,
    /// Fitted decay exponent of the tail.
    pub exponent: f64,
    /// `x` is monotone over the last decade.
    pub tail_monotone: bool,
}

/// Fit order used for the reported limit.
pub const FIT_ORDER: usize = 3;

/// Extrapolates `lim x(t)` from the last two decades of `traj` with a
/// power series in `t^{-ν}`; see [`power_series_fit`].
pub fn extrapolate_limit(traj: &WeightedTrajectory) -> Result<LimitEstimate> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::Domain("trajectory too short to extrapolate".into()));
    }
    let t_end = traj.final_time();
    let t_first = traj.nodes[1];
    if !(t_end / t_first >= 1e3) {
        return Err(Error::Domain(format!(
            "extrapolation needs at least 3 decades of t, trajectory spans [{t_first:e}, {t_end:e}]"
        )));
    }
    let xs = traj.xs();
    let start = traj.nodes.partition_point(|&t| t < t_end / 100.0).max(1);
    let (wt, wx) = (&traj.nodes[start..], &xs[start..]);
    if wt.len() < 4 + 3 {
        return Err(Error::Domain(format!(
            "only {} nodes in the last two decades; refine the tail mesh",
            wt.len()
        )));
    }
    let fit = |order| power_series_fit(wt, wx, order);
    let main = fit(FIT_ORDER).ok_or_else(|| Error::Numerical("tail fit failed".into()))?;
    let uncertainty = [2, 4]
        .into_iter()
        .filter_map(fit)
        .map(|f| (f.limit - main.limit).abs())
        .fold(0.0, f64::max);

    let checkpoints: Vec<f64> = (0..5)
        .rev()
        .map(|j| {
            let target = t_end / 4f64.powi(j);
            let i = traj.nodes.partition_point(|&t| t < target).min(n - 1);
            xs[i]
        })
        .collect();
    let aitken = aitken_tail(&checkpoints).expect("five checkpoints").limit;

    let decade = traj.nodes.partition_point(|&t| t < t_end / 10.0).max(1);
    let tail = &xs[decade..];
    let slack = |x: f64| 1e-12 * x.abs().max(1.0);
    let tail_monotone = tail.windows(2).all(|w| w[1] <= w[0] + slack(w[0])) || tail.windows(2).all(|w| w[1] >= w[0] - slack(w[0]));
    Ok(LimitEstimate {
        limit: main.limit,
        uncertainty,
        aitken,
        exponent: main.exponent,
        tail_monotone,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn phi(src: &str) -> Formula {
        Formula::parse(src, &["x"]).unwrap()
    }

    #[test]
    fn tail_coefficients() {
        let l = SingularFunction::parse_in("t^(-3/4) + t^(-1/2)", "t", 0.75).unwrap();
        let a = tail_coefficient(&l, 0.5).unwrap();
        assert!((a.value - 1.0).abs() < 1e-9 && a.converged);
        let l = SingularFunction::parse_in("t^(-0.7)", "t", 0.7).unwrap();
        assert_eq!(tail_coefficient(&l, 0.5).unwrap().value, 0.0);
        assert_eq!(tail_coefficient(&SingularFunction::zero("t"), 0.5).unwrap().value, 0.0);
        let l = SingularFunction::parse_in("t^(-0.2)", "t", 0.2).unwrap();
        assert!(tail_coefficient(&l, 0.5).is_err());
    }

    #[test]
    fn limit_equation_roots() {
        let r = solve_limit_equation(&phi("(x+1)/(x+2)"), 1.0, 0.0, 0.5, 0.0).unwrap();
        let exact = (PI.sqrt() + (4.0 + PI).sqrt() - 2.0) / 2.0;
        assert_eq!(r.len(), 1);
        assert!((r[0] - exact).abs() < 1e-12);
        let r = solve_limit_equation(&phi("cbrt(x)"), 1.0, 0.0, 0.5, 1.0 / 3.0).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], 0.0);
        assert!((r[1] - PI.powf(0.75)).abs() < 1e-12);
        let r = solve_limit_equation(&phi("x^2"), 0.0, 2.0, 0.5, 0.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn shifted_equation() {
        let x_star = PI.powf(0.75);
        assert!(check_shifted_equation(&phi("cbrt(x)"), 1.0, 0.0, 0.5, 1.0 / 3.0, x_star).pass);
        // 0 is not the largest root, so the shift by 0 leaves a positive root.
        assert!(!check_shifted_equation(&phi("cbrt(x)"), 1.0, 0.0, 0.5, 1.0 / 3.0, 0.0).pass);
    }

    #[test]
    fn selects_largest() {
        assert_eq!(select_limit(&[3.0, 0.0, 1.0]).unwrap(), 3.0);
        assert!(select_limit(&[]).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(serde_json::to_string(&Governing::Sandwich).unwrap(), "\"3.7\"");
        assert_eq!(Governing::None.label(), "none");
    }
}
