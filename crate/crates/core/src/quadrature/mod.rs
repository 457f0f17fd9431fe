//! Weakly singular integrals `∫₀¹ (1-v)^a v^b σ(v) dv` with σ continuous.
//!
//! The endpoint singularities live in the Gauss–Jacobi weight, so σ only
//! needs to be smooth and the rule converges spectrally. Rules are refined
//! along the ladder 8, 16, …, 512 until two successive values agree.

mod jacobi;
mod mesh;

pub use jacobi::JacobiRule;
pub use mesh::{geometric_nodes, GeometricExtension, GradedMesh};

use crate::error::Result;

pub const DEFAULT_LADDER: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Result of a refined quadrature. `converged == false` means the node cap
/// was reached first; `value` is still the finest estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

impl Quadrature {
    fn exact(value: f64, nodes_used: usize) -> Self {
        Quadrature {
            value,
            error_estimate: 0.0,
            nodes_used,
            converged: true,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Quadrature {
            value: self.value * c,
            error_estimate: self.error_estimate * c.abs(),
            ..self
        }
    }
}

/// Settings for the doubling ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub sizes: Vec<usize>,
    pub rel_tol: f64,
    /// Absolute floor under which successive values count as agreeing.
    pub abs_tol: f64,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder {
            sizes: DEFAULT_LADDER.to_vec(),
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: 1e-300,
        }
    }
}

impl Ladder {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Ladder {
            rel_tol,
            ..Ladder::default()
        }
    }
}

/// `∫₀¹ (1-v)^a v^b σ(v) dv` by Gauss–Jacobi with doubling.
pub fn integrate_singular<F>(sigma: F, a: f64, b: f64) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    integrate_singular_with(sigma, a, b, &Ladder::default())
}

pub fn integrate_singular_with<F>(mut sigma: F, a: f64, b: f64, ladder: &Ladder) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    match try_integrate_many::<1, std::convert::Infallible, _>(|v| Ok([sigma(v)]), a, b, ladder)? {
        Ok([q]) => Ok(q),
        Err(never) => match never {},
    }
}

/// Vector-valued ladder: integrates `K` functions that share the weight and
/// the evaluation points. Convergence is judged on every component.
/// Errors raised by `sigma` abort the ladder and are returned in the inner
/// `Result`.
pub fn try_integrate_many<const K: usize, E, F>(
    mut sigma: F,
    a: f64,
    b: f64,
    ladder: &Ladder,
) -> Result<Result<[Quadrature; K], E>>
where
    F: FnMut(f64) -> Result<[f64; K], E>,
{
    let mut previous: Option<[f64; K]> = None;
    let mut before_last: Option<[f64; K]> = None;
    let mut current = [0.0; K];
    let mut used = 0;
    for &n in &ladder.sizes {
        let rule = JacobiRule::cached(n, a, b)?;
        let mut acc = [0.0; K];
        for (&v, &w) in rule.nodes().iter().zip(rule.weights()) {
            let values = match sigma(v) {
                Ok(values) => values,
                Err(e) => return Ok(Err(e)),
            };
            for (slot, value) in acc.iter_mut().zip(values) {
                *slot += w * value;
            }
        }
        current = acc;
        used = n;
        if let Some(prev) = previous {
            let agreed = prev.iter().zip(&current).all(|(p, c)| {
                let gap = (c - p).abs();
                gap <= ladder.rel_tol * c.abs() || gap <= ladder.abs_tol
            });
            if agreed {
                let mut out = [Quadrature::exact(0.0, n); K];
                for k in 0..K {
                    out[k].value = current[k];
                    out[k].error_estimate = (current[k] - prev[k]).abs();
                }
                return Ok(Ok(out));
            }
        }
        before_last = previous;
        previous = Some(current);
    }
    let mut out = [Quadrature::exact(0.0, used); K];
    for k in 0..K {
        out[k].value = current[k];
        out[k].error_estimate = before_last.map_or(f64::INFINITY, |p| (current[k] - p[k]).abs());
        out[k].converged = false;
    }
    Ok(Ok(out))
}

/// `∫₀¹ (1-v)^a v^b σ(v) dv` split at `1/2, 1/4, …, 2^{-levels}`.
///
/// The last piece `[1/2, 1]` carries the `(1-v)^a` weight, the first piece
/// `[0, 2^{-levels}]` carries `v^b`, and the pieces in between are smooth.
/// Used when σ varies on a scale much smaller than the interval, as
/// `ρ(tv)` does near `v = 0` for large `t`.
pub fn integrate_graded<E, F>(mut sigma: F, a: f64, b: f64, levels: u32, ladder: &Ladder) -> Result<Result<Quadrature, E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let levels = levels.max(1);
    let mut total = Quadrature::exact(0.0, 0);
    let mut add = |q: Quadrature| {
        total.value += q.value;
        total.error_estimate += q.error_estimate;
        total.nodes_used += q.nodes_used;
        total.converged &= q.converged;
    };

    // [1/2, 1]: v = (1 + u)/2, (1-v)^a = 2^{-a} (1-u)^a.
    let top = try_integrate_many::<1, E, _>(
        |u| {
            let v = 0.5 + 0.5 * u;
            Ok([v.powf(b) * sigma(v)?])
        },
        a,
        0.0,
        ladder,
    )?;
    match top {
        Ok([q]) => add(q.scaled(0.5f64.powf(a + 1.0))),
        Err(e) => return Ok(Err(e)),
    }

    // [2^{-k-1}, 2^{-k}] for k = 1..levels-1, plain Gauss–Legendre.
    for k in 1..levels {
        let lo = 0.5f64.powi(k as i32 + 1);
        let width = lo;
        let piece = try_integrate_many::<1, E, _>(
            |u| {
                let v = lo + width * u;
                Ok([(1.0 - v).powf(a) * v.powf(b) * sigma(v)?])
            },
            0.0,
            0.0,
            ladder,
        )?;
        match piece {
            Ok([q]) => add(q.scaled(width)),
            Err(e) => return Ok(Err(e)),
        }
    }

    // [0, 2^{-levels}]: v = c u, v^b = c^b u^b.
    let c = 0.5f64.powi(levels as i32);
    let bottom = try_integrate_many::<1, E, _>(
        |u| {
            let v = c * u;
            Ok([(1.0 - v).powf(a) * sigma(v)?])
        },
        0.0,
        b,
        ladder,
    )?;
    match bottom {
        Ok([q]) => add(q.scaled(c.powf(b + 1.0))),
        Err(e) => return Ok(Err(e)),
    }
    // A piece that stalls on the ladder (a kink of σ inside the bottom piece,
    // say) is harmless when its error is small against the whole.
    if !total.converged && total.error_estimate <= ladder.rel_tol * total.value.abs() {
        total.converged = true;
    }
    Ok(Ok(total))
}
