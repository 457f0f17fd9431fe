//! Solver against closed forms, mesh refinement and the solution audit.

use proptest::prelude::*;
use rlfde::catalog::find;
use rlfde::expr::Formula;
use rlfde::solver::{solve, verify_solution, General, ProblemSpec, Rhs, SolverConfig};
use rlfde::special::{beta_checked, gamma_checked};

fn forcing(beta: f64, x0: f64, src: &str, alpha: f64) -> ProblemSpec {
    let f = Formula::parse(src, &["t", "x"]).unwrap();
    ProblemSpec::new(beta, x0, Rhs::General(General { f, alpha_f: alpha, envelopes: None })).unwrap()
}

fn short(t_max: f64) -> SolverConfig {
    SolverConfig {
        t_max,
        ..SolverConfig::default()
    }
}

#[test]
fn zero_forcing_keeps_weight() {
    let traj = solve(&forcing(0.6, -1.5, "0", 0.0), &short(1e3)).unwrap();
    assert!(traj.w.iter().all(|&w| w == -1.5));
    assert_eq!(traj.residual, 0.0);
}

#[test]
fn linear_decay_matches_mittag_leffler_series() {
    // D^β x = -x with t^{1-β} x → x0 gives x = x0 Γ(β) t^{β-1} E_{β,β}(-t^β).
    let beta = 0.5;
    let ml = |z: f64| {
        (0..200)
            .map(|k| z.powi(k) / gamma_checked(beta * k as f64 + beta).unwrap())
            .sum::<f64>()
    };
    let worst = |n: usize| {
        let cfg = SolverConfig {
            t0: 4.0,
            t_max: 4.0,
            intervals: n,
            ..SolverConfig::default()
        };
        let traj = solve(&forcing(beta, 1.0, "-x", 1.0 - beta), &cfg).unwrap();
        (1..traj.len())
            .map(|j| {
                let t = traj.nodes[j];
                let exact = gamma_checked(beta).unwrap() * t.powf(beta - 1.0) * ml(-t.powf(beta));
                (((traj.x(j) - exact) / exact).abs(), t)
            })
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let errors = [worst(256).0, worst(512).0, worst(1024).0];
    assert!(errors[0] <= 1e-4, "{errors:?}");
    // Second order in the mesh width.
    assert!(errors.windows(2).all(|e| e[1] <= e[0] / 3.0), "{errors:?}");
}

#[test]
fn refinement_shrinks_error() {
    // A forcing the product rule does not integrate exactly.
    let spec = forcing(0.5, 0.0, "t^(-1/2) * exp(-t)", 0.5);
    let err = |n: usize| {
        let cfg = SolverConfig {
            t_max: 10.0,
            intervals: n,
            ..SolverConfig::default()
        };
        let traj = solve(&spec, &cfg).unwrap();
        let fine = solve(&spec, &SolverConfig { intervals: 1024, ..cfg.clone() }).unwrap();
        (traj.final_x() - fine.final_x()).abs()
    };
    let (coarse, finer) = (err(64), err(128));
    assert!(finer < coarse || coarse < 1e-12, "{coarse} -> {finer}");
}

#[test]
fn monotone_example_audit_passes() {
    let file = find("4.1").unwrap().spec_file();
    let spec = file.problem().unwrap();
    let cfg = file.solver_config().unwrap();
    let traj = solve(&spec, &cfg).unwrap();
    let audit = verify_solution(&spec, &traj, cfg.tol);
    assert!(audit.hypotheses_hold());
    assert_eq!(audit.conclusions.len(), 2);
    assert!(audit.verdicts().all(|v| v.pass), "{:#?}", audit);
}

#[test]
fn negative_forcing_skips_conclusions() {
    let file = find("4.6").unwrap().spec_file();
    let spec = file.problem().unwrap();
    let cfg = file.solver_config().unwrap();
    let traj = solve(&spec, &cfg).unwrap();
    let audit = verify_solution(&spec, &traj, cfg.tol);
    assert!(!audit.hypotheses_hold());
    assert!(audit.conclusions.is_empty());
    assert!(audit.residual.pass);
    assert!(traj.final_x() < 0.0);
}

#[test]
fn general_spec_is_not_audited_as_monotone() {
    let spec = forcing(0.5, 1.0, "1/(1+t)", 0.0);
    let traj = solve(&spec, &short(100.0)).unwrap();
    let audit = verify_solution(&spec, &traj, 1e-10);
    assert!(!audit.hypotheses_hold());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// `f = c t^{γ-1}` integrates to `x0 t^{β-1} + c B(β, γ)/Γ(β) t^{β+γ-1}`;
    /// with the singularity declared the product rule is exact.
    #[test]
    fn power_forcing_is_exact(beta in 0.15f64..0.95, gamma in 0.05f64..=1.0, c in -3.0f64..3.0, x0 in -2.0f64..2.0) {
        let spec = forcing(beta, x0, &format!("{c} * t^({gamma} - 1)"), 1.0 - gamma);
        let traj = solve(&spec, &short(1e3)).unwrap();
        let k = c * beta_checked(beta, gamma).unwrap() / gamma_checked(beta).unwrap();
        for j in 1..traj.len() {
            let t = traj.nodes[j];
            let exact_w = x0 + k * t.powf(gamma);
            prop_assert!((traj.w[j] - exact_w).abs() <= 1e-8 * exact_w.abs().max(1.0), "t {}: {} vs {}", t, traj.w[j], exact_w);
        }
    }
}
