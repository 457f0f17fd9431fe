//! Gauss–Jacobi rules against Beta-function moments.

use proptest::prelude::*;
use rlfde::quadrature::{integrate_singular, JacobiRule};
use rlfde::special::beta_checked;

/// `∫₀¹ (1-v)^a v^{b+i} dv = B(a+1, b+i+1)`.
fn moment(a: f64, b: f64, i: usize) -> f64 {
    beta_checked(a + 1.0, b + i as f64 + 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn polynomial_exactness(
        n in 1usize..40,
        a in -0.95f64..2.0,
        b in -0.95f64..2.0,
        coeffs in prop::collection::vec(0.0f64..1.0, 80),
    ) {
        let rule = JacobiRule::new(n, a, b).unwrap();
        let degree = 2 * n - 1;
        let c = &coeffs[..=degree.min(coeffs.len() - 1)];
        let approx = rule.integrate(|v| c.iter().rev().fold(0.0, |acc, &ci| acc * v + ci));
        let exact: f64 = c.iter().enumerate().map(|(i, &ci)| ci * moment(a, b, i)).sum();
        prop_assert!(((approx - exact) / exact).abs() <= 1e-11, "n={n} a={a} b={b}: {approx} vs {exact}");
    }

    #[test]
    fn rule_invariants(n in 1usize..200, a in -0.95f64..3.0, b in -0.95f64..3.0) {
        let rule = JacobiRule::new(n, a, b).unwrap();
        prop_assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(rule.nodes().iter().all(|&v| v > 0.0 && v < 1.0));
        prop_assert!(rule.weights().iter().all(|&w| w > 0.0));
        let total: f64 = rule.weights().iter().sum();
        let mu0 = moment(a, b, 0);
        prop_assert!(((total - mu0) / mu0).abs() <= 1e-12);
    }

    #[test]
    fn scaling_by_constant(c in -1e3f64..1e3, beta in 0.05f64..0.95) {
        let base = integrate_singular(|v| (1.0 + v).ln() + 1.0, beta - 1.0, 0.0).unwrap().value;
        let scaled = integrate_singular(|v| c * ((1.0 + v).ln() + 1.0), beta - 1.0, 0.0).unwrap().value;
        prop_assert!((scaled - c * base).abs() <= 1e-14 * (c * base).abs().max(1e-300));
    }
}
