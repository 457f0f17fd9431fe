//! Discrete Volterra operator
//! `(Fw)_j = x₀ + t_j^{1-β}/Γ(β) ∫₀^{t_j} (t_j-s)^{β-1} f(s, x(s)) ds`
//! on a fixed node set, by product integration.
//!
//! On each panel `[t_i, t_{i+1}]` the integrand is written as
//! `s^{-δ} g(s)` with `g` linear between `g_i = t_i^δ f(t_i, x_i)` and
//! `g_{i+1}`; the first panel holds `g` at `g_1` since `x` blows up at 0.
//! Panel moments against `(t_j-s)^{β-1} s^{-δ}` go through Gauss–Jacobi, so
//! `(Fw)_j = x₀ + Σ_{m≤j} c_{jm} g_m` with a lower-triangular `c` that is
//! built once per node set.

use crate::error::{Error, Result};
use crate::expr::ExprError;
use crate::quadrature::{try_integrate_many, Ladder};
use crate::special::gamma_checked;

use super::{ProblemSpec, Rhs};

const MOMENT_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    /// `l(t) φ(x)`
    LPhi,
    /// `k(t)`, independent of `x`
    K,
    /// general `f(t, x)`
    F,
}

#[derive(Debug, Clone)]
struct Term {
    source: Source,
    delta: f64,
    /// `rows[j][m-1] = c_{jm}` for `m = 1..=j`.
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct VolterraOperator {
    spec: ProblemSpec,
    nodes: Vec<f64>,
    terms: Vec<Term>,
    /// Contribution of `x`-independent terms to each row.
    fixed: Vec<f64>,
}

/// `(∫ K s^{-δ} (1-λ), ∫ K s^{-δ} λ)` over `[t_i, t_{i+1}]`, `K = (t_j - s)^{β-1}`,
/// `λ = (s - t_i)/h`.
fn panel_moments(ti: f64, ti1: f64, tj: f64, beta: f64, delta: f64, ladder: &Ladder) -> Result<(f64, f64)> {
    let h = ti1 - ti;
    let touching = tj == ti1;
    let at_origin = ti == 0.0;
    let a = if touching { beta - 1.0 } else { 0.0 };
    let b = if at_origin { -delta } else { 0.0 };
    let mut scale = h;
    if touching {
        scale *= h.powf(beta - 1.0);
    }
    if at_origin {
        scale *= h.powf(-delta);
    }
    let q = try_integrate_many::<2, std::convert::Infallible, _>(
        |u| {
            let s = ti + h * u;
            let kern = if touching { 1.0 } else { (tj - s).powf(beta - 1.0) };
            let sing = if at_origin || delta == 0.0 { 1.0 } else { s.powf(-delta) };
            let base = kern * sing;
            Ok([base * (1.0 - u), base * u])
        },
        a,
        b,
        ladder,
    )?;
    match q {
        Ok([lo, hi]) => Ok((lo.value * scale, hi.value * scale)),
        Err(never) => match never {},
    }
}

fn build_rows(nodes: &[f64], beta: f64, delta: f64) -> Result<Vec<Vec<f64>>> {
    let ladder = Ladder {
        rel_tol: MOMENT_REL_TOL,
        ..Ladder::default()
    };
    let inv_gamma = 1.0 / gamma_checked(beta)?;
    let mut rows = Vec::with_capacity(nodes.len());
    rows.push(Vec::new());
    for j in 1..nodes.len() {
        let tj = nodes[j];
        let mut row = vec![0.0; j];
        for i in 0..j {
            let (lo, hi) = panel_moments(nodes[i], nodes[i + 1], tj, beta, delta, &ladder)?;
            if i == 0 {
                // Constant extension of g_1 over the first panel.
                row[0] += lo + hi;
            } else {
                row[i - 1] += lo;
                row[i] += hi;
            }
        }
        let factor = tj.powf(1.0 - beta) * inv_gamma;
        row.iter_mut().for_each(|c| *c *= factor);
        rows.push(row);
    }
    Ok(rows)
}

impl VolterraOperator {
    /// `nodes` must start at 0 and increase strictly.
    pub fn new(spec: &ProblemSpec, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("solver nodes must start at 0 and increase strictly".into()));
        }
        let beta = spec.beta;
        let mut terms = Vec::new();
        match &spec.rhs {
            Rhs::Structured(s) => {
                if !s.l.is_zero() && !s.phi.is_zero() {
                    let delta = spec.phi_term_exponent();
                    terms.push(Term {
                        source: Source::LPhi,
                        delta,
                        rows: build_rows(&nodes, beta, delta)?,
                    });
                }
                if !s.k.is_zero() {
                    let delta = s.k.alpha();
                    terms.push(Term {
                        source: Source::K,
                        delta,
                        rows: build_rows(&nodes, beta, delta)?,
                    });
                }
            }
            Rhs::General(g) => {
                if !g.f.is_zero() {
                    terms.push(Term {
                        source: Source::F,
                        delta: g.alpha_f,
                        rows: build_rows(&nodes, beta, g.alpha_f)?,
                    });
                }
            }
        }
        let mut op = VolterraOperator {
            spec: spec.clone(),
            nodes,
            terms,
            fixed: Vec::new(),
        };
        op.fixed = op.fixed_contributions()?;
        Ok(op)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn eval_source(&self, source: Source, t: f64, x: f64) -> Result<f64, ExprError> {
        match (&self.spec.rhs, source) {
            (Rhs::Structured(s), Source::LPhi) => Ok(s.l.rho(t)? * s.phi.eval1(x)?),
            (Rhs::Structured(s), Source::K) => s.k.rho(t),
            (Rhs::General(g), Source::F) => g.f.eval(&[t, x]),
            _ => unreachable!("term source does not match the right-hand side"),
        }
    }

    fn g(&self, term: &Term, m: usize, w: f64) -> Result<f64> {
        let t = self.nodes[m];
        let x = t.powf(self.spec.beta - 1.0) * w;
        let v = self
            .eval_source(term.source, t, x)
            .map_err(|source| Error::AtNode { node: m, t, source })?;
        let v = if term.delta == 0.0 { v } else { t.powf(term.delta) * v };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numerical(format!("right-hand side is not finite at node {m} (t = {t:e}, w = {w:e})")))
        }
    }

    fn fixed_contributions(&self) -> Result<Vec<f64>> {
        let mut fixed = vec![0.0; self.nodes.len()];
        for term in self.terms.iter().filter(|t| t.source == Source::K) {
            let g: Vec<f64> = (1..self.nodes.len())
                .map(|m| self.g(term, m, 0.0))
                .collect::<Result<_>>()?;
            for (j, slot) in fixed.iter_mut().enumerate().skip(1) {
                *slot += dot(&term.rows[j], &g[..j]);
            }
        }
        Ok(fixed)
    }

    fn dependent_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| t.source != Source::K)
    }

    /// `g` values of the `x`-dependent terms at nodes `1..upto`.
    fn g_values(&self, w: &[f64], upto: usize) -> Result<Vec<Vec<f64>>> {
        self.dependent_terms()
            .map(|term| (1..upto).map(|m| self.g(term, m, w[m])).collect::<Result<Vec<f64>>>())
            .collect()
    }

    /// `(Fw)_j` for `j < upto`; entries past `upto` are copied from `w`.
    pub fn apply_prefix(&self, w: &[f64], upto: usize) -> Result<Vec<f64>> {
        assert_eq!(w.len(), self.nodes.len());
        let upto = upto.min(self.nodes.len());
        let gs = self.g_values(w, upto)?;
        let mut out = w.to_vec();
        out[0] = self.spec.x0;
        for j in 1..upto {
            let mut acc = self.spec.x0 + self.fixed[j];
            for (term, g) in self.dependent_terms().zip(&gs) {
                acc += dot(&term.rows[j], &g[..j]);
            }
            out[j] = acc;
        }
        Ok(out)
    }

    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.apply_prefix(w, self.nodes.len())
    }

    /// `max_j |(Fw)_j - w_j|`.
    pub fn residual(&self, w: &[f64]) -> Result<f64> {
        let fw = self.apply(w)?;
        Ok(fw.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Solves `w_j = (Fw)_j` for the single unknown `w_j`, all earlier
    /// entries of `w` frozen. `guess` seeds the iteration.
    pub fn solve_node(&self, w: &[f64], j: usize, guess: f64) -> Result<f64> {
        let mut frozen = self.spec.x0 + self.fixed[j];
        let mut selfs = Vec::new();
        for term in self.dependent_terms() {
            let row = &term.rows[j];
            for m in 1..j {
                frozen += row[m - 1] * self.g(term, m, w[m])?;
            }
            selfs.push((term, row[j - 1]));
        }
        let map = |v: f64| -> Result<f64> {
            let mut acc = frozen;
            for &(term, c) in &selfs {
                acc += c * self.g(term, j, v)?;
            }
            Ok(acc)
        };
        if selfs.is_empty() {
            return Ok(frozen);
        }

        let mut v = guess;
        for _ in 0..200 {
            let next = map(v)?;
            if (next - v).abs() <= 1e-15 * next.abs().max(1.0) {
                return Ok(next);
            }
            v = next;
        }

        // Plain iteration did not settle (steep φ near a zero of x, say):
        // bracket a root of v - map(v) around the guess and bisect.
        let resid = |v: f64| map(v).map(|m| v - m);
        let t = self.nodes[j];
        let mut width = 1e-3 * guess.abs().max(1.0);
        let (mut lo, mut hi) = (guess - width, guess + width);
        let (mut rlo, mut rhi) = (resid(lo)?, resid(hi)?);
        while rlo * rhi > 0.0 {
            width *= 2.0;
            if width > 1e12 {
                return Err(Error::MarchDivergence { node: j, t });
            }
            lo = guess - width;
            hi = guess + width;
            rlo = resid(lo)?;
            rhi = resid(hi)?;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let rm = resid(mid)?;
            if rm == 0.0 {
                return Ok(mid);
            }
            if (rm > 0.0) == (rhi > 0.0) {
                hi = mid;
                rhi = rm;
            } else {
                lo = mid;
            }
        }
        let _ = rlo;
        Ok(0.5 * (lo + hi))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta_checked;

    #[test]
    fn first_panel_moments_are_beta_values() {
        let ladder = Ladder::default();
        let (lo, hi) = panel_moments(0.0, 2.0, 2.0, 0.5, 0.25, &ladder).unwrap();
        // ∫₀² (2-s)^{-1/2} s^{-1/4} ds = 2^{1/4} B(1/2, 3/4)
        let total = 2f64.powf(0.25) * beta_checked(0.5, 0.75).unwrap();
        assert!(((lo + hi) - total).abs() < 1e-13 * total);
        // ∫ ... λ ds with λ = s/2: 2^{1/4} B(1/2, 7/4)
        let first = 2f64.powf(0.25) * beta_checked(0.5, 1.75).unwrap();
        assert!((hi - first).abs() < 1e-13 * first);
    }

    #[test]
    fn interior_panel_moment_sum() {
        // Σ over panels of the zeroth moment equals ∫₀^t (t-s)^{β-1} ds = t^β / β.
        let nodes = [0.0, 0.3, 1.0, 2.5, 4.0];
        let ladder = Ladder::default();
        let mut total = 0.0;
        for i in 0..4 {
            let (lo, hi) = panel_moments(nodes[i], nodes[i + 1], 4.0, 0.3, 0.0, &ladder).unwrap();
            total += lo + hi;
        }
        let exact = 4f64.powf(0.3) / 0.3;
        assert!((total - exact).abs() < 1e-12 * exact);
    }
}
