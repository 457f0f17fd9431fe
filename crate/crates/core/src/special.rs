//! Gamma, Beta and the closed-form power-kernel integrals built on them.
//!
//! These are the exact reference values the rest of the crate checks itself
//! against: the resolvent constant `π / sin(βπ) = B(β, 1-β)` and
//! `∫₀ᵗ (t-s)^{β-1} s^{γ-1} ds = B(β, γ) t^{β+γ-1}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A strictly positive real argument.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealPositive(f64);

impl RealPositive {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(RealPositive(value))
        } else {
            Err(Error::Domain(format!("expected a positive finite real, got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RealPositive {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        RealPositive::new(value)
    }
}

// Lanczos approximation, g = 671/128, 14 terms.
const LANCZOS_G_HALF: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_89e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

fn lanczos_series(x: f64) -> f64 {
    let mut y = x;
    let mut ser = LANCZOS_C0;
    for c in LANCZOS_COEFFS {
        y += 1.0;
        ser += c / y;
    }
    ser
}

/// `Γ(x)` for `x > 0`.
///
/// Arguments below 1/2 are shifted up by one through `Γ(x) = Γ(x+1)/x` so the
/// Lanczos sum is only ever evaluated where it is well conditioned. Overflows
/// to `+∞` above roughly 171.6.
pub fn gamma(x: RealPositive) -> f64 {
    let x = x.get();
    if x < 0.5 {
        return gamma_unchecked(x + 1.0) / x;
    }
    gamma_unchecked(x)
}

fn gamma_unchecked(x: f64) -> f64 {
    let tmp = x + LANCZOS_G_HALF;
    // Split the power so that tmp^(x+1/2) does not overflow before the
    // exponential brings it back down.
    let half = tmp.powf(0.5 * (x + 0.5));
    half * ((-tmp).exp() * half) * SQRT_TWO_PI * lanczos_series(x) / x
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: RealPositive) -> f64 {
    let x = x.get();
    if x < 0.5 {
        return ln_gamma(RealPositive(x + 1.0)) - x.ln();
    }
    let tmp = x + LANCZOS_G_HALF;
    (x + 0.5) * tmp.ln() - tmp + (SQRT_TWO_PI * lanczos_series(x) / x).ln()
}

/// Convenience wrapper: `Γ(x)` with a domain error for non-positive input.
pub fn gamma_checked(x: f64) -> Result<f64> {
    Ok(gamma(RealPositive::new(x)?))
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
///
/// Symmetric in its arguments bit for bit: both orders perform the same
/// commutative operations.
pub fn beta_fn(a: RealPositive, b: RealPositive) -> f64 {
    let (a, b) = (a.get(), b.get());
    let sum = a + b;
    if sum < 150.0 {
        gamma(RealPositive(a)) * gamma(RealPositive(b)) / gamma(RealPositive(sum))
    } else {
        (ln_gamma(RealPositive(a)) + ln_gamma(RealPositive(b)) - ln_gamma(RealPositive(sum))).exp()
    }
}

pub fn beta_checked(a: f64, b: f64) -> Result<f64> {
    Ok(beta_fn(RealPositive::new(a)?, RealPositive::new(b)?))
}

fn check_order(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("order beta must lie in (0, 1), got {beta}")))
    }
}

/// `π / sin(βπ)`, the value of `∫₀ᵗ (t-s)^{β-1} s^{-β} ds` for every `t`.
pub fn resolvent_constant(beta: f64) -> Result<f64> {
    check_order(beta)?;
    // sin(βπ) and sin((1-β)π) agree mathematically; evaluate on the smaller
    // half so that β and 1-β give identical results.
    let reduced = beta.min(1.0 - beta);
    Ok(PI / (reduced * PI).sin())
}

/// `∫₀ᵗ (t-s)^{β-1} s^{γ-1} ds = B(β, γ) t^{β+γ-1}`.
pub fn power_kernel_integral(beta: f64, gamma_exp: f64, t: f64) -> Result<f64> {
    check_order(beta)?;
    if !(gamma_exp > 0.0 && gamma_exp.is_finite()) {
        return Err(Error::Domain(format!("power exponent must be positive, got {gamma_exp}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("upper limit must be positive, got {t}")));
    }
    let b = beta_fn(RealPositive(beta), RealPositive(gamma_exp));
    Ok(b * t.powf(beta + gamma_exp - 1.0))
}

/// `π / (Γ(β) sin(βπ))`: the factor multiplying `aφ(x) + b` in the limit
/// equation.
pub fn limit_factor(beta: f64) -> Result<f64> {
    Ok(resolvent_constant(beta)? / gamma_checked(beta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn g(x: f64) -> f64 {
        gamma(RealPositive::new(x).unwrap())
    }

    #[test]
    fn gamma_trivial_values() {
        assert!(rel(g(0.5), PI.sqrt()) < 1e-15);
        assert!(rel(g(1.0), 1.0) < 1e-15);
        assert!(rel(g(2.0), 1.0) < 1e-15);
        assert!(rel(g(5.0), 24.0) < 1e-14);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(RealPositive::new(0.0).is_err());
        assert!(RealPositive::new(-1.5).is_err());
        assert!(RealPositive::new(f64::NAN).is_err());
        assert!(gamma_checked(0.0).is_err());
        assert!(beta_checked(1.0, -0.5).is_err());
    }

    #[test]
    fn resolvent_domain() {
        assert!(resolvent_constant(0.0).is_err());
        assert!(resolvent_constant(1.0).is_err());
        assert!(rel(resolvent_constant(0.5).unwrap(), PI) < 1e-15);
        assert_eq!(resolvent_constant(0.3).unwrap(), resolvent_constant(0.7).unwrap());
    }

    #[test]
    fn power_kernel_trivial() {
        for t in [0.1, 1.0, 7.0, 1e4] {
            assert!(rel(power_kernel_integral(0.5, 0.5, t).unwrap(), PI) < 1e-14);
        }
        assert!(rel(power_kernel_integral(0.5, 1.0, 4.0).unwrap(), 4.0) < 1e-14);
        assert!(power_kernel_integral(0.5, 0.0, 1.0).is_err());
        assert!(power_kernel_integral(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.01, 0.3, 1.7, 12.5, 49.0] {
            let lg = ln_gamma(RealPositive::new(x).unwrap());
            assert!((lg - g(x).ln()).abs() < 1e-13 * lg.abs().max(1.0), "x={x}");
        }
    }
}
