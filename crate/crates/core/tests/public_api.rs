use tw_core::basis::{Basis, ManifoldSpec, TorusSpec};
use tw_core::experiments::gn_gate;
use tw_core::minimizer::{minimize, Classification, Constraint, Equation, ProblemSpec, Scheme};
use tw_core::operators::{build_harmonic_rep, l_alpha_from_reps, KillingSpec};

#[test]
fn gate_excludes_the_critical_power() {
    for n in 1..=4u32 {
        let g = gn_gate(n, i64::from(n) + 4, i64::from(n)).unwrap();
        assert_eq!(g.gamma_p1, (2, 1));
        assert!(!g.gamma_below_two && !g.p_subcritical);
    }
}

#[test]
fn l_alpha_changes_sign_past_the_threshold() {
    let reps: Vec<_> = (0..=4).map(|k| build_harmonic_rep(2, k, [0, 1]).unwrap()).collect();
    let at = l_alpha_from_reps(&reps, 1.0).unwrap();
    assert!(at.semidefinite && at.max_error < 1e-10);
    let past = l_alpha_from_reps(&reps, 1.25).unwrap();
    assert_eq!(past.first_negative_k, Some(1));
}

#[test]
fn short_circle_minimizer_is_constant() {
    let basis = Basis::new(ManifoldSpec::Torus(TorusSpec::new(1, 1.0, 16))).unwrap();
    let pr = ProblemSpec::new(Equation::Nlkg, 3.0, Constraint::LpPlusOne { a: 1.0 }, Scheme::FMin);
    let r = minimize(&pr, &basis, &KillingSpec::torus(&[0.5]), &[]).unwrap();
    assert_eq!(r.classification, Classification::Constant);
    assert!((r.objective - 1.0).abs() < 1e-8);
    assert!(r.residual < 1e-6);
}
