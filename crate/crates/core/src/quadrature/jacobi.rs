//! Gauss–Jacobi rules on `[0, 1]` for the weight `(1-v)^a v^b`.
//!
//! Nodes are roots of the degree-`n` orthonormal Jacobi polynomial, found by
//! Newton's method from asymptotic (Chebyshev-like) starting points with
//! deflation against the roots already found. Weights come from the
//! Christoffel function `w_k = μ₀ / Σ_j p_j(v_k)²`, which needs no Gamma
//! ratios at large `n`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::special::beta_checked;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;
const CACHE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    n: usize,
    exponent_a: f64,
    exponent_b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Three-term recurrence of the orthonormal polynomials on `[0, 1]`:
/// `off[j+1] p_{j+1} = (v - diag[j]) p_j - off[j] p_{j-1}`.
struct Recurrence {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Recurrence {
    fn new(n: usize, a: f64, b: f64) -> Self {
        // Coefficients of the monic Jacobi recurrence on [-1, 1] for the
        // weight (1-x)^a (1+x)^b, then mapped through v = (1+x)/2.
        let ab = a + b;
        let mut diag = Vec::with_capacity(n);
        let mut off = vec![0.0; n + 1];
        for j in 0..n {
            let jf = j as f64;
            let d = if j == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
            };
            diag.push(0.5 * (1.0 + d));
        }
        for (j, slot) in off.iter_mut().enumerate().skip(1) {
            let jf = j as f64;
            let sq = if j == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                let s = 2.0 * jf + ab;
                4.0 * jf * (jf + a) * (jf + b) * (jf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            *slot = 0.5 * sq.sqrt();
        }
        Recurrence { diag, off }
    }

    /// `(p_n(v), p_n'(v))` of the orthonormal family (up to the constant
    /// normalisation of `p_0`, which cancels in Newton steps).
    fn eval(&self, n: usize, v: f64) -> (f64, f64) {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        for j in 0..n {
            let p_next = ((v - self.diag[j]) * p - self.off[j] * p_prev) / self.off[j + 1];
            let d_next = ((v - self.diag[j]) * d + p - self.off[j] * d_prev) / self.off[j + 1];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d)
    }

    /// `Σ_{j<n} p_j(v)²`.
    fn christoffel_sum(&self, n: usize, v: f64) -> f64 {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let mut sum = 1.0;
        for j in 0..n - 1 {
            let p_next = ((v - self.diag[j]) * p - self.off[j] * p_prev) / self.off[j + 1];
            p_prev = p;
            p = p_next;
            sum += p * p;
        }
        sum
    }
}

impl JacobiRule {
    /// `n`-point rule exact for polynomials of degree `≤ 2n-1` against
    /// `(1-v)^a v^b` on `[0, 1]`.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("a quadrature rule needs at least one node".into()));
        }
        if !(a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "Jacobi exponents must exceed -1 (non-integrable weight): a = {a}, b = {b}"
            )));
        }
        let rec = Recurrence::new(n, a, b);
        let mu0 = beta_checked(a + 1.0, b + 1.0)?;

        let denom = n as f64 + 0.5 * (a + b + 1.0);
        let mut roots: Vec<f64> = Vec::with_capacity(n);
        for k in 1..=n {
            // k-th largest root: asymptotic angle measured from v = 1.
            let theta = PI * (k as f64 - 0.25 + 0.5 * a) / denom;
            let mut v = 0.5 * (1.0 + theta.min(PI).cos());
            if let Some(&last) = roots.last() {
                if v >= last {
                    v = 0.5 * last;
                }
            }
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, d) = rec.eval(n, v);
                let deflation: f64 = roots.iter().map(|r| 1.0 / (v - r)).sum();
                let step = p / (d - p * deflation);
                let next = (v - step).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                let moved = (next - v).abs();
                v = next;
                if moved <= NEWTON_TOL * v || moved <= 1e-16 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Jacobi node {k} of {n} (a = {a}, b = {b}) did not converge"
                )));
            }
            roots.push(v);
        }
        roots.reverse();

        let weights: Vec<f64> = roots.iter().map(|&v| mu0 / rec.christoffel_sum(n, v)).collect();
        let rule = JacobiRule {
            n,
            exponent_a: a,
            exponent_b: b,
            nodes: roots,
            weights,
        };
        rule.check_invariants(mu0)?;
        Ok(rule)
    }

    fn check_invariants(&self, mu0: f64) -> Result<()> {
        let ordered = self.nodes.windows(2).all(|w| w[0] < w[1]);
        let inside = self.nodes.iter().all(|&v| v > 0.0 && v < 1.0);
        let positive = self.weights.iter().all(|&w| w > 0.0 && w.is_finite());
        let total: f64 = self.weights.iter().sum();
        // Nodes crowd against the endpoints as n grows and lose relative
        // accuracy there, so the weight-sum check scales with n.
        let sum_tol = (64.0 * self.n as f64 * f64::EPSILON).max(1e-13);
        if !(ordered && inside && positive) || ((total - mu0) / mu0).abs() > sum_tol {
            return Err(Error::Numerical(format!(
                "Jacobi rule n = {}, a = {}, b = {} failed its sanity checks",
                self.n, self.exponent_a, self.exponent_b
            )));
        }
        Ok(())
    }

    /// Shared, cached rule.
    pub fn cached(n: usize, a: f64, b: f64) -> Result<Arc<JacobiRule>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64, u64), Arc<JacobiRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (n, a.to_bits(), b.to_bits());
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(JacobiRule::new(n, a, b)?);
        let mut guard = cache.lock().expect("rule cache poisoned");
        if guard.len() >= CACHE_LIMIT {
            guard.clear();
        }
        guard.insert(key, Arc::clone(&rule));
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn exponent_a(&self) -> f64 {
        self.exponent_a
    }

    pub fn exponent_b(&self) -> f64 {
        self.exponent_b
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_k σ(v_k)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut sigma: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&v, &w)| w * sigma(v)).sum()
    }

    pub fn try_integrate<E, F: FnMut(f64) -> Result<f64, E>>(&self, mut sigma: F) -> Result<f64, E> {
        let mut acc = 0.0;
        for (&v, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * sigma(v)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = JacobiRule::new(1, 0.0, 0.0).unwrap();
        assert!((r.nodes()[0] - 0.5).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_integrable() {
        assert!(JacobiRule::new(4, -1.0, 0.0).is_err());
        assert!(JacobiRule::new(4, 0.0, -1.2).is_err());
        assert!(JacobiRule::new(0, 0.0, 0.0).is_err());
    }

    #[test]
    fn chebyshev_nodes_closed_form() {
        // a = b = -1/2: nodes are (1 + cos((2k-1)π/2n))/2 with equal weights π/n.
        let n = 7;
        let r = JacobiRule::new(n, -0.5, -0.5).unwrap();
        for (k, (&v, &w)) in r.nodes().iter().zip(r.weights()).enumerate() {
            let expected = 0.5 * (1.0 + ((2 * (n - k) - 1) as f64 * PI / (2 * n) as f64).cos());
            assert!((v - expected).abs() < 1e-14);
            assert!((w - PI / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn large_rules_satisfy_invariants() {
        for &(a, b) in &[(-0.5, 0.0), (-0.9, -0.9), (0.0, -0.3), (1.5, -0.75), (-0.2, 2.0)] {
            for n in [8, 64, 512] {
                let r = JacobiRule::new(n, a, b).unwrap();
                assert_eq!(r.len(), n);
            }
        }
    }
}
