//! Limits of slowly converging sequences and sampled tails.
//!
//! Aitken Δ² handles a single geometric error term. Tails that mix several
//! powers of a slowly decaying `t^{-ν}` (a `t^{-1/6}` tail with `t^{-1/3}`
//! and `t^{-1/2}` corrections, say) defeat it on a desk-scale range, so
//! [`power_series_fit`] fits `x(t) ≈ L + Σ_k c_k (t/t_ref)^{-kν}` by least
//! squares, scanning `ν`.

use nalgebra::{DMatrix, DVector};

/// One Aitken step on three consecutive terms. Falls back to the last term
/// when the second difference vanishes.
pub fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    if denom == 0.0 || !denom.is_finite() || d2 == 0.0 {
        return x2;
    }
    x2 - d2 * d2 / denom
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    pub limit: f64,
    /// `|limit - last term|`.
    pub correction: f64,
    /// Successive differences shrink and keep their sign over the tail.
    pub converging: bool,
}

/// Aitken on the last three terms of `seq` (at least three).
pub fn aitken_tail(seq: &[f64]) -> Option<Extrapolated> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let (x0, x1, x2) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let converging = d2 == 0.0 || (d1 * d2 >= 0.0 && d2.abs() < d1.abs());
    // A ratio near 1 makes the step ill-conditioned; keep the raw term then.
    let limit = if converging && d1 != 0.0 && (d2 / d1) < 0.999 {
        aitken(x0, x1, x2)
    } else {
        x2
    };
    Some(Extrapolated {
        limit,
        correction: (limit - x2).abs(),
        converging,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesFit {
    pub limit: f64,
    pub exponent: f64,
    /// Root-mean-square misfit.
    pub rms: f64,
}

/// Exponents scanned by [`power_series_fit`].
pub const EXPONENT_RANGE: (f64, f64, f64) = (0.02, 1.5, 0.002);

fn fit_at(ts: &[f64], xs: &[f64], order: usize, nu: f64) -> Option<(f64, f64)> {
    let t_ref = *ts.last()?;
    let n = ts.len();
    let a = DMatrix::from_fn(n, order + 1, |i, k| (ts[i] / t_ref).powf(-nu * k as f64));
    let b = DVector::from_column_slice(xs);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).ok()?;
    let r = &a * &c - &b;
    let rms = (r.norm_squared() / n as f64).sqrt();
    // The constant column carries the limit: (t/t_ref)^0 = 1.
    Some((c[0], rms))
}

/// Least-squares fit of `x ≈ L + Σ_{k=1}^{order} c_k (t/t_ref)^{-kν}` with
/// `ν` chosen on a grid to minimise the misfit. Needs more samples than
/// unknowns.
pub fn power_series_fit(ts: &[f64], xs: &[f64], order: usize) -> Option<SeriesFit> {
    if ts.len() != xs.len() || ts.len() < order + 3 || order == 0 {
        return None;
    }
    let (lo, hi, step) = EXPONENT_RANGE;
    let mut best: Option<SeriesFit> = None;
    let steps = ((hi - lo) / step).round() as usize;
    for i in 0..=steps {
        let nu = lo + step * i as f64;
        if let Some((limit, rms)) = fit_at(ts, xs, order, nu) {
            if limit.is_finite() && best.is_none_or(|b| rms < b.rms) {
                best = Some(SeriesFit {
                    limit,
                    exponent: nu,
                    rms,
                });
            }
        }
    }
    // Golden-section polish of ν inside the winning grid cell.
    let mut best = best?;
    let (mut a, mut b) = ((best.exponent - step).max(lo / 2.0), best.exponent + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (m1, m2) = (b - g * (b - a), a + g * (b - a));
        let r1 = fit_at(ts, xs, order, m1).map_or(f64::INFINITY, |f| f.1);
        let r2 = fit_at(ts, xs, order, m2).map_or(f64::INFINITY, |f| f.1);
        if r1 <= r2 {
            b = m2;
        } else {
            a = m1;
        }
    }
    let nu = 0.5 * (a + b);
    if let Some((limit, rms)) = fit_at(ts, xs, order, nu) {
        if limit.is_finite() && rms <= best.rms {
            best = SeriesFit { limit, exponent: nu, rms };
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_geometric_tails() {
        let seq: Vec<f64> = (0..8).map(|k| 3.0 + 0.7 * 0.5f64.powi(k)).collect();
        let e = aitken_tail(&seq).unwrap();
        assert!((e.limit - 3.0).abs() < 1e-14);
        assert!(e.converging);
    }

    #[test]
    fn constant_sequence() {
        assert_eq!(aitken(2.0, 2.0, 2.0), 2.0);
        assert_eq!(aitken_tail(&[1.0, 1.0, 1.0]).unwrap().limit, 1.0);
        assert!(aitken_tail(&[1.0, 2.0]).is_none());
    }

    #[test]
    fn flags_growth() {
        let e = aitken_tail(&[1.0, 2.0, 4.0]).unwrap();
        assert!(!e.converging);
    }

    #[test]
    fn series_fit_recovers_mixed_powers() {
        let ts: Vec<f64> = (0..=20).map(|k| 1e4 * 1.25f64.powi(k)).collect();
        let xs: Vec<f64> = ts
            .iter()
            .map(|t| -1.7 - 2.9 * t.powf(-1.0 / 6.0) - 2.7 * t.powf(-1.0 / 3.0) + 5.0 * t.powf(-0.5))
            .collect();
        let fit = power_series_fit(&ts, &xs, 3).unwrap();
        assert!((fit.limit + 1.7).abs() < 1e-4, "{fit:?}");
        assert!((fit.exponent - 1.0 / 6.0).abs() < 0.01);
    }

    #[test]
    fn series_fit_needs_samples() {
        assert!(power_series_fit(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0], 3).is_none());
    }
}
