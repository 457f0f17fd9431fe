//! Weighted Cauchy problems `D^β x = f(t, x)`, `t^{1-β} x(t) → x₀` as
//! `t → 0⁺`, solved through the equivalent Volterra equation
//! `x(t) = x₀ t^{β-1} + (1/Γ(β)) ∫₀ᵗ (t-s)^{β-1} f(s, x(s)) ds`.
//!
//! The unknown is `w(t) = t^{1-β} x(t)`, which is continuous at 0 with
//! `w(0) = x₀`. Picard iteration runs on a graded mesh over `[0, T₀]`;
//! geometric nodes beyond `T₀` are then filled in one at a time.

mod operator;

use std::io::Write;

pub use operator::VolterraOperator;

use crate::audit::{phi_growth, positive_start, weighted_nonincreasing};
use crate::error::{Error, Result};
use crate::expr::{ExprError, Formula};
use crate::fracint::{monotone_violation, Direction, SingularFunction};
use crate::num::fmt17;
use crate::quadrature::{geometric_nodes, GradedMesh};
use crate::verdict::{PropertyVerdict, Witness};

/// `f(t, x) = l(t) φ(x) + k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Structured {
    pub l: SingularFunction,
    pub phi: Formula,
    pub k: SingularFunction,
    /// Growth exponent in `φ(x) ≤ M x^μ`.
    pub mu: f64,
    /// Decay exponent for the bound `t^γ l(t) ≤ K` on `[1, ∞)`; picked
    /// automatically when absent.
    pub gamma: Option<f64>,
}

/// Bounds `l₁ x^μ + k₁ ≤ f(t, x) ≤ l x^μ + k` declared for a general
/// right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub l: Formula,
    pub k: Formula,
    pub l1: Formula,
    pub k1: Formula,
    pub mu: f64,
    pub gamma: Option<f64>,
    /// Range of `x` on which the sandwich is sampled.
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct General {
    pub f: Formula,
    /// Singularity exponent of `f(s, x(s))` at `s = 0`.
    pub alpha_f: f64,
    pub envelopes: Option<Envelopes>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Structured(Structured),
    General(General),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub beta: f64,
    pub x0: f64,
    pub rhs: Rhs,
}

fn expect_variables(formula: &Formula, vars: &[&str], role: &str) -> Result<()> {
    if formula.variables().iter().map(String::as_str).eq(vars.iter().copied()) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "{role} must be an expression in ({}), got variables ({})",
            vars.join(", "),
            formula.variables().join(", ")
        )))
    }
}

impl ProblemSpec {
    pub fn new(beta: f64, x0: f64, rhs: Rhs) -> Result<Self> {
        let spec = ProblemSpec { beta, x0, rhs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidSpec(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidSpec(format!("x0 must be finite, got {}", self.x0)));
        }
        match &self.rhs {
            Rhs::Structured(s) => {
                expect_variables(s.l.formula(), &["t"], "l")?;
                expect_variables(s.k.formula(), &["t"], "k")?;
                expect_variables(&s.phi, &["x"], "phi")?;
                if !(0.0..=1.0).contains(&s.mu) {
                    return Err(Error::InvalidSpec(format!("mu must lie in [0, 1], got {}", s.mu)));
                }
                let delta = self.phi_term_exponent();
                if delta >= 1.0 {
                    return Err(Error::InvalidSpec(format!(
                        "l(t) φ(x(t)) behaves like t^(-{delta}) at 0 and is not integrable"
                    )));
                }
                if let Some(g) = s.gamma {
                    check_gamma(g, self.beta)?;
                }
            }
            Rhs::General(g) => {
                expect_variables(&g.f, &["t", "x"], "f")?;
                if !(0.0..1.0).contains(&g.alpha_f) {
                    return Err(Error::InvalidSpec(format!("alpha_f must lie in [0, 1), got {}", g.alpha_f)));
                }
                if let Some(env) = &g.envelopes {
                    for (formula, role) in [(&env.l, "envelope l"), (&env.k, "envelope k"), (&env.l1, "envelope l1"), (&env.k1, "envelope k1")] {
                        expect_variables(formula, &["t"], role)?;
                    }
                    if !(0.0..=1.0).contains(&env.mu) {
                        return Err(Error::InvalidSpec(format!("envelope mu must lie in [0, 1], got {}", env.mu)));
                    }
                    if let Some(gm) = env.gamma {
                        check_gamma(gm, self.beta)?;
                    }
                    if let (Some(lo), Some(hi)) = (env.x_min, env.x_max) {
                        if !(lo < hi) {
                            return Err(Error::InvalidSpec(format!("envelope x range is empty: [{lo}, {hi}]")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Singularity exponent of `l(s) φ(x(s))` at 0 when `x ~ x₀ s^{β-1}`
    /// and `φ(x) ~ x^μ`: `α_l + μ(1-β)`.
    pub fn phi_term_exponent(&self) -> f64 {
        match &self.rhs {
            Rhs::Structured(s) => s.l.alpha() + s.mu * (1.0 - self.beta),
            Rhs::General(g) => g.alpha_f,
        }
    }

    pub fn f(&self, t: f64, x: f64) -> Result<f64, ExprError> {
        match &self.rhs {
            Rhs::Structured(s) => {
                let lphi = if s.l.is_zero() { 0.0 } else { s.l.rho(t)? * s.phi.eval1(x)? };
                Ok(lphi + s.k.rho(t)?)
            }
            Rhs::General(g) => g.f.eval(&[t, x]),
        }
    }
}

fn check_gamma(gamma: f64, beta: f64) -> Result<()> {
    if gamma > beta && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("gamma must lie in (beta, 1) = ({beta}, 1), got {gamma}")))
    }
}

/// Mesh and iteration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// End of the graded mesh.
    pub t0: f64,
    pub t_max: f64,
    pub intervals: usize,
    /// Grading exponent; `max(2, 2/β)` when absent.
    pub grading: Option<f64>,
    pub ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_RATIO: f64 = 1.25;
const DAMPING: f64 = 0.5;

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            t0: 10.0,
            t_max: 1e6,
            intervals: 256,
            grading: None,
            ratio: DEFAULT_RATIO,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

pub fn default_grading(beta: f64) -> f64 {
    (2.0 / beta).max(2.0)
}

impl SolverConfig {
    pub fn graded_mesh(&self, beta: f64) -> Result<GradedMesh> {
        GradedMesh::new(self.t0, self.intervals, self.grading.unwrap_or_else(|| default_grading(beta)))
    }
}

/// Nodes `t_j` with `w_j = t_j^{1-β} x(t_j)`; `t_0 = 0`, `w_0 = x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTrajectory {
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub w: Vec<f64>,
    /// `max_j |(Fw)_j - w_j|`.
    pub residual: f64,
}

impl WeightedTrajectory {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `x_j = t_j^{β-1} w_j`; infinite (or NaN for `w_0 = 0`) at `t = 0`.
    pub fn x(&self, j: usize) -> f64 {
        self.nodes[j].powf(self.beta - 1.0) * self.w[j]
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    pub fn final_time(&self) -> f64 {
        *self.nodes.last().expect("trajectory has nodes")
    }

    pub fn final_x(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// CSV with header `t,w,x`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,w,x")?;
        for j in 0..self.len() {
            writeln!(out, "{},{},{}", fmt17(self.nodes[j]), fmt17(self.w[j]), fmt17(self.x(j)))?;
        }
        Ok(())
    }
}

/// One application of the operator to `traj`, on its own nodes.
pub fn apply_operator_f(spec: &ProblemSpec, traj: &WeightedTrajectory) -> Result<WeightedTrajectory> {
    let op = VolterraOperator::new(spec, traj.nodes.clone())?;
    let w = op.apply(&traj.w)?;
    let residual = op.residual(&w)?;
    Ok(WeightedTrajectory {
        beta: spec.beta,
        nodes: traj.nodes.clone(),
        w,
        residual,
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Picard iteration `w ← F(w)` on the first `upto` nodes of `op`, from
/// `w ≡ x₀`. Switches to `w ← θF(w) + (1-θ)w` when the change stops
/// shrinking.
fn picard(op: &VolterraOperator, x0: f64, upto: usize, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let mut w = vec![x0; op.len()];
    let mut history = Vec::new();
    let mut damped = false;
    let mut stalled = 0;
    for _ in 0..max_iter {
        let fw = op.apply_prefix(&w, upto)?;
        let diff = sup_diff(&fw[..upto], &w[..upto]);
        if !diff.is_finite() {
            history.push(diff);
            return Err(Error::NonConvergence {
                iterations: history.len(),
                residuals: history,
            });
        }
        if let Some(&prev) = history.last() {
            stalled = if diff > 0.9 * prev { stalled + 1 } else { 0 };
        }
        history.push(diff);
        if diff <= tol {
            return Ok(fw);
        }
        if !damped && history.len() > 5 && stalled >= 3 {
            damped = true;
            stalled = 0;
        }
        if damped {
            for j in 0..upto {
                w[j] = DAMPING * fw[j] + (1.0 - DAMPING) * w[j];
            }
        } else {
            w = fw;
        }
    }
    Err(Error::NonConvergence {
        iterations: history.len(),
        residuals: history,
    })
}

/// Picard iteration over every node of `mesh` (graded part and any
/// geometric extension).
pub fn solve_picard(spec: &ProblemSpec, mesh: &GradedMesh, tol: f64, max_iter: usize) -> Result<WeightedTrajectory> {
    spec.validate()?;
    let op = VolterraOperator::new(spec, mesh.nodes())?;
    let w = picard(&op, spec.x0, op.len(), tol, max_iter)?;
    let residual = op.residual(&w)?;
    Ok(WeightedTrajectory {
        beta: spec.beta,
        nodes: op.nodes().to_vec(),
        w,
        residual,
    })
}

/// Continues `traj` to `new_t` on geometric nodes (ratio at most `ratio`,
/// adjusted to land on `new_t`), solving one node at a time against the
/// frozen history. The residual is recomputed over the whole trajectory.
pub fn march_extend(spec: &ProblemSpec, traj: &WeightedTrajectory, new_t: f64, ratio: f64) -> Result<WeightedTrajectory> {
    let start = traj.final_time();
    if !(new_t > start) {
        return Err(Error::Domain(format!("extension target {new_t} must exceed the current endpoint {start}")));
    }
    let ext = GradedMesh::new(start, 1, 1.0)?.extended_to(new_t, ratio)?.extension.expect("target beyond endpoint");
    let mut nodes = traj.nodes.clone();
    nodes.extend(geometric_nodes(start, ext.ratio, ext.count, Some(new_t)));
    let op = VolterraOperator::new(spec, nodes)?;
    extend_with(&op, traj.w.clone(), traj.beta)
}

fn extend_with(op: &VolterraOperator, mut w: Vec<f64>, beta: f64) -> Result<WeightedTrajectory> {
    let known = w.len();
    w.resize(op.len(), 0.0);
    for j in known..op.len() {
        let guess = w[j - 1];
        w[j] = op.solve_node(&w, j, guess)?;
    }
    let residual = op.residual(&w)?;
    Ok(WeightedTrajectory {
        beta,
        nodes: op.nodes().to_vec(),
        w,
        residual,
    })
}

/// Picard on the graded mesh over `[0, T₀]`, then node-by-node marching on
/// geometric nodes up to `T_max`. Both stages share one operator.
pub fn solve(spec: &ProblemSpec, config: &SolverConfig) -> Result<WeightedTrajectory> {
    spec.validate()?;
    let mesh = config.graded_mesh(spec.beta)?;
    let graded = mesh.intervals + 1;
    let mesh = if config.t_max > config.t0 {
        mesh.extended_to(config.t_max, config.ratio)?
    } else {
        mesh
    };
    let op = VolterraOperator::new(spec, mesh.nodes())?;
    let w = picard(&op, spec.x0, graded, config.tol, config.max_iter)?;
    extend_with(&op, w[..graded].to_vec(), spec.beta)
}

/// Slack on the sign and monotonicity of the computed `x_j`.
pub const SOLUTION_SLACK: f64 = 1e-8;

/// Audit of a computed trajectory: the monotone-case hypotheses, the
/// conclusions they imply (positive, nonincreasing `x`), and the residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionAudit {
    pub hypotheses: Vec<PropertyVerdict>,
    /// Empty when a hypothesis failed.
    pub conclusions: Vec<PropertyVerdict>,
    pub residual: PropertyVerdict,
}

impl SolutionAudit {
    pub fn verdicts(&self) -> impl Iterator<Item = &PropertyVerdict> {
        self.hypotheses.iter().chain(&self.conclusions).chain(std::iter::once(&self.residual))
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|v| v.pass)
    }
}

/// `x_j > 0` and `x_{j+1} ≤ x_j + slack` for `j ≥ 1`.
pub fn check_positive_nonincreasing(traj: &WeightedTrajectory) -> Vec<PropertyVerdict> {
    let xs = traj.xs();
    let ts = &traj.nodes;
    let positive = match (1..xs.len()).find(|&j| !(xs[j] > 0.0)) {
        None => PropertyVerdict::pass("x positive", 0.0),
        Some(j) => PropertyVerdict::fail("x positive", 0.0, Witness::new(vec![ts[j]], vec![xs[j]])),
    };
    let tail = &xs[1.min(xs.len())..];
    let monotone = match monotone_violation(tail, Direction::Nonincreasing, SOLUTION_SLACK) {
        None => PropertyVerdict::pass("x nonincreasing", SOLUTION_SLACK),
        Some(j) => PropertyVerdict::fail(
            "x nonincreasing",
            SOLUTION_SLACK,
            Witness::new(vec![ts[j + 1], ts[j + 2]], vec![tail[j], tail[j + 1]]),
        ),
    };
    vec![positive, monotone]
}

/// Audits hypotheses on φ, `t^β l` and `t^β k`; when they hold, checks that
/// the computed `x` is positive and nonincreasing. The Volterra residual is
/// checked against `10·tol` either way.
pub fn verify_solution(spec: &ProblemSpec, traj: &WeightedTrajectory, tol: f64) -> SolutionAudit {
    let hypotheses = match &spec.rhs {
        Rhs::Structured(s) => vec![
            phi_growth(&s.phi, s.mu, true).verdict,
            weighted_nonincreasing("l", &s.l, spec.beta),
            weighted_nonincreasing("k", &s.k, spec.beta),
            positive_start(spec.x0),
        ],
        Rhs::General(_) => vec![PropertyVerdict::fail(
            "structured right-hand side",
            0.0,
            Witness::note("monotonicity hypotheses are stated for l(t) phi(x) + k(t)"),
        )],
    };
    let conclusions = if hypotheses.iter().all(|v| v.pass) {
        check_positive_nonincreasing(traj)
    } else {
        Vec::new()
    };
    let bound = 10.0 * tol;
    let residual = PropertyVerdict::from_check(
        "Volterra residual <= 10 tol",
        bound,
        traj.residual <= bound,
        Witness::new(vec![], vec![traj.residual]),
    );
    SolutionAudit {
        hypotheses,
        conclusions,
        residual,
    }
}
