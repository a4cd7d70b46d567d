use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use proptest::prelude::*;

use super::*;
use crate::basis::{Basis, ManifoldSpec, RadialSpec, RadialWeight, SpectralField};
use crate::minimizer::{verify_pde, Constraint, Equation, ProblemSpec, Scheme};
use crate::operators::KillingSpec;
use crate::{Error, C64};

fn flat(r_max: f64, intervals: usize) -> RadialSpec {
    RadialSpec::new(1, r_max, intervals, RadialWeight::Constant { value: 1.0 })
}

fn basis(spec: &RadialSpec) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Radial(spec.clone())).unwrap()
}

fn field(b: &Arc<Basis>, f: impl Fn(f64) -> f64) -> SpectralField {
    let g: Vec<C64> = b.radial().unwrap().nodes.iter().map(|&r| C64::new(f(r), 0.0)).collect();
    SpectralField::from_grid(b.clone(), &g).unwrap()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let s: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + s) * h / 3.0
}

#[test]
fn vanish_criteria_examples() {
    let exp = RadialSpec::new(2, 20.0, 400, RadialWeight::Exponential { rate: 1.0 });
    let c = check_vanish_criteria(&exp).unwrap();
    assert!(c.integral_test.holds);
    let exact = (-1.0f64).exp() - (-20.0f64).exp();
    assert!((c.integral_test.truncated - exact).abs() < 1e-12, "{}", c.integral_test.truncated);
    // dyadic extrapolation overestimates an exponential tail
    assert!(c.integral_test.tail_estimate >= (-20.0f64).exp() && c.integral_test.tail_estimate < 1e-6);
    assert!(c.growth_test.holds);

    let poly = RadialSpec::new(2, 40.0, 400, RadialWeight::Polynomial { shift: 1.0, power: 2.0 });
    let c = check_vanish_criteria(&poly).unwrap();
    assert!(c.growth_test.holds);
    assert!(c.growth_test.log_derivative_sup <= 1.0);
    assert!((c.growth_test.trend - (41.0f64 / 21.0).powi(2)).abs() < 1e-12);

    let one = RadialSpec::new(2, 40.0, 400, RadialWeight::Constant { value: 1.0 });
    let c = check_vanish_criteria(&one).unwrap();
    assert!(!c.integral_test.holds && !c.growth_test.holds);
    assert!(c.inconclusive());

    let linear = RadialSpec::new(2, 64.0, 640, RadialWeight::Polynomial { shift: 1.0, power: 1.0 });
    assert!(!check_vanish_criteria(&linear).unwrap().integral_test.holds);

    assert!(matches!(check_vanish_criteria(&flat(2.0, 10)), Err(Error::GridTooCoarse(_))));
}

#[test]
fn lower_bound_on_a_is_reported() {
    let mut spec = RadialSpec::new(2, 20.0, 200, RadialWeight::Polynomial { shift: 0.5, power: 1.0 });
    spec.a_lower_bound = Some(1.0);
    let c = check_vanish_criteria(&spec).unwrap();
    assert!(c.below_lower_bound);
    assert_eq!(c.a_min, 0.5);
    spec.a_lower_bound = Some(0.25);
    assert!(!check_vanish_criteria(&spec).unwrap().below_lower_bound);
}

fn half_line_problem(a: f64) -> ProblemSpec {
    let mut pr = ProblemSpec::new(Equation::Nlkg, 3.0, Constraint::LpPlusOne { a }, Scheme::FMin).with_mass(1.0);
    pr.n_random_starts = 1;
    pr
}

#[test]
fn half_line_minimizer_is_half_a_soliton() {
    let spec = flat(16.0, 320);
    let pr = half_line_problem(1.0);
    let rep = minimize_radial(&pr, &spec, &KillingSpec::Zero).unwrap();
    let r = &rep.result;
    // c·sech(r) with (2/3)c⁴ = A gives F = (4/3)c²
    let exact = 4.0 / 3.0 * 1.5f64.sqrt();
    assert!((r.objective - exact).abs() < 1e-6 * exact, "{} vs {exact}", r.objective);
    assert!((r.u.power_integral(4.0) - 1.0).abs() < 1e-12);
    assert!(r.residual < 1e-6);
    assert!(verify_pde(&r.u, &pr, &KillingSpec::Zero, r.multiplier).unwrap() < 1e-6);
    assert!(rep.relative_change < DOMAIN_TOLERANCE);
    assert!(rep.doubled_objective <= r.objective + 1e-10);
    assert!(rep.x_acts_trivially);
    assert!(!rep.warnings.is_empty(), "A = 1 satisfies neither criterion");
    // single bump: |u| decreasing in r
    let g: Vec<f64> = r.u.to_grid().iter().map(|z| z.norm()).collect();
    assert!(g.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // brute profile: the sampled closed form is not better than the minimizer
    let c = (1.5f64).powf(0.25);
    let b = basis(&spec);
    let sech = field(&b, |r| c / r.cosh());
    let sech = sech.scale(C64::new((1.0 / sech.power_integral(4.0)).powf(0.25), 0.0));
    let fs = crate::operators::form_f_nlkg(&sech, &KillingSpec::Zero, 0.0, 1.0).unwrap();
    assert!(r.objective <= fs + 1e-12);
    assert!((fs - exact).abs() < 1e-5 * exact);
}

#[test]
fn radial_rejects_short_domains_and_fast_fields() {
    let pr = half_line_problem(1.0).with_mass(0.3);
    let err = minimize_radial(&pr, &flat(4.0, 80), &KillingSpec::Zero).unwrap_err();
    assert!(matches!(err, Error::IncreaseDomain { .. }), "{err}");
    let err = minimize_radial(&half_line_problem(1.0), &flat(16.0, 160), &KillingSpec::RadialInduced { speed: 1.5 });
    assert!(matches!(err, Err(Error::ParameterRegime(_))));
    let ok = minimize_radial(&half_line_problem(1.0), &flat(16.0, 160), &KillingSpec::RadialInduced { speed: 0.5 });
    assert!(ok.unwrap().x_acts_trivially);
}

#[test]
fn radial_objective_does_not_increase_with_the_domain() {
    for (r_max, m) in [(6.0, 1.0), (10.0, 0.7), (16.0, 1.3)] {
        let pr = half_line_problem(1.0).with_mass(m);
        let spec = flat(r_max, (r_max * 20.0) as usize);
        let b = basis(&spec);
        let small = crate::minimizer::minimize(&pr, &b, &KillingSpec::Zero, &[]).unwrap();
        let big = basis(&spec.doubled());
        let warm = extend_by_zero(&small.u, &big).unwrap();
        let large = crate::minimizer::minimize(&pr, &big, &KillingSpec::Zero, &[warm]).unwrap();
        assert!(large.objective <= small.objective + 1e-10, "{} > {}", large.objective, small.objective);
    }
}

fn energy_problem(m: f64, lambda: f64, beta: f64) -> ProblemSpec {
    let mut pr = ProblemSpec::new(Equation::Nlkg, 2.0, Constraint::Mass { beta }, Scheme::EnergyMin)
        .with_mass(m)
        .with_lambda(lambda);
    pr.n_random_starts = 1;
    pr
}

#[test]
fn technical_assumption_examples() {
    let spec = flat(40.0, 400);
    let small = technical_assumption(&energy_problem(0.1, 0.0, 1.0), &spec, &KillingSpec::Zero).unwrap();
    assert!((small.threshold + 0.005).abs() < 1e-15);
    assert!(small.holds && small.margin > 0.0);
    let b = basis(&spec);
    let fun = crate::minimizer::Functional::new(&energy_problem(0.1, 0.0, 1.0), &b, &KillingSpec::Zero).unwrap();
    let (e, _) = radial_dilation_scan(&fun, &b, 1.0).unwrap();
    assert!(e < small.threshold, "construction alone: {e}");

    let large = technical_assumption(&energy_problem(3.0, 0.0, 1.0), &spec, &KillingSpec::Zero).unwrap();
    assert!(!large.holds);
    assert!(large.construction_energy.is_some());
    assert!(large.margin < 0.0);

    let edge = technical_assumption(&energy_problem(0.8, 0.8, 1.0), &spec, &KillingSpec::Zero).unwrap();
    assert_eq!(edge.threshold, 0.0);
    assert_eq!(edge.holds, edge.i_beta_est < 0.0);

    let wrong = ProblemSpec::new(Equation::Nlkg, 2.0, Constraint::LpPlusOne { a: 1.0 }, Scheme::FMin).with_mass(1.0);
    assert!(technical_assumption(&wrong, &spec, &KillingSpec::Zero).is_err());
}

/// Whole-line NLS ground-state energy with `u'' ... = u²` at mass `mass`:
/// `u = (3ω/2) sech²(√ω x / 2)`, `mass = 6 ω^{3/2}`.
fn line_energy_p2(mass: f64) -> f64 {
    let w = (mass / 6.0).powf(2.0 / 3.0);
    let u = |x: f64| 1.5 * w / (0.5 * w.sqrt() * x).cosh().powi(2);
    let du = |x: f64| {
        let t = 0.5 * w.sqrt() * x;
        -1.5 * w * w.sqrt() * t.tanh() / t.cosh().powi(2)
    };
    let l = 60.0 / w.sqrt();
    let grad = simpson(|x| du(x).powi(2), -l, l, 20000);
    let cube = simpson(|x| u(x).powi(3), -l, l, 20000);
    0.5 * grad - cube / 3.0
}

#[test]
fn subadditivity_on_half_line_estimates() {
    let spec = flat(40.0, 800);
    let mut pr = ProblemSpec::new(Equation::Nls, 2.0, Constraint::Mass { beta: 1.0 }, Scheme::EnergyMin);
    pr.n_random_starts = 1;
    let values = estimate_i_beta(&pr, &spec, &KillingSpec::Zero, &[0.5, 1.0]).unwrap();
    for &(beta, i) in &values {
        let oracle = 0.5 * line_energy_p2(2.0 * beta);
        assert!((i - oracle).abs() < 1e-5 * oracle.abs(), "beta {beta}: {i} vs {oracle}");
    }
    let rep = lemma_l1_check(&values, 0.0, 0.0, 2.0).unwrap();
    assert!(rep.hypothesis_failures.is_empty());
    assert!(rep.all_hold, "{:?}", rep.rows);
    assert!(rep.rows.iter().any(|r| r.kind == "scaling"));
    assert!(rep.rows.iter().any(|r| r.kind == "subadditivity" && r.parameter == 0.5 && r.beta == 1.0));
    assert!(lemma_l1_check(&values, 0.0, 0.0, 1.0).is_err());
    assert!(matches!(lemma_l1_check(&values, 0.0, 0.0, 3.0), Err(Error::MissingEntry(_))));
}

#[test]
fn lemma_check_flags_failures() {
    // linear I is the equality case of both inequalities
    let values: Vec<(f64, f64)> = [0.5, 1.0, 2.0].iter().map(|&b| (b, -b)).collect();
    let rep = lemma_l1_check(&values, 0.0, 0.0, 2.0).unwrap();
    assert!(!rep.all_hold);
    assert_eq!(rep.failures, rep.rows.len());
    let rep = lemma_l1_check(&values, 2.0, 0.0, 2.0).unwrap();
    assert_eq!(rep.hypothesis_failures.len(), 3);
}

fn cc_basis() -> Arc<Basis> {
    basis(&flat(512.0, 2048))
}

#[test]
fn archetypes_are_classified() {
    let b = cc_basis();
    let suite = archetype_suite(&b, 3.0, 1.0, 8, 10, 42).unwrap();
    assert_eq!(suite.len(), 30);
    for e in &suite {
        let (label, rep) = (&e.label, &e.report);
        assert!(e.passed(), "{label}: {:?}", rep.sup_window_mass.last());
        if let Some(alpha) = e.inner_mass {
            for w in rep.splitting.as_ref().unwrap() {
                assert!((w.alpha - alpha).abs() < 2.0 * w.epsilon, "{label}: {} vs {alpha}", w.alpha);
            }
        }
    }
}

#[test]
fn concentration_witness_is_constant() {
    let b = cc_basis();
    let s = archetype(Archetype::Concentration, &b, 3.0, 1.0, 5, 7).unwrap();
    let rep = cc_classify(&s.fields, 3.0, &CcOptions::default()).unwrap();
    for w in rep.concentration.unwrap() {
        assert!(w.radii.windows(2).all(|p| p[0] == p[1]));
        assert!(w.centers.windows(2).all(|p| p[0] == p[1]));
    }
}

#[test]
fn classifier_preconditions() {
    let b = cc_basis();
    let s = archetype(Archetype::Concentration, &b, 3.0, 1.0, 3, 1).unwrap();
    assert!(matches!(cc_classify(&s.fields, 3.0, &CcOptions::default()), Err(Error::InsufficientData(_))));
    let mut s = archetype(Archetype::Concentration, &b, 3.0, 1.0, 4, 1).unwrap();
    s.fields[2] = s.fields[2].scale(C64::new(1.1, 0.0));
    assert!(cc_classify(&s.fields, 3.0, &CcOptions::default()).is_err());
    let radii = default_radii(&flat(512.0, 2048));
    assert_eq!(radii.first(), Some(&1.0));
    assert_eq!(radii.last(), Some(&128.0));
}

#[test]
fn cutoffs_keep_a_core_supported_field() {
    let b = basis(&flat(20.0, 400));
    let u = field(&b, |r| if r < 2.0 { (1.0 - (r / 2.0).powi(2)).powi(4) } else { 0.0 });
    let s = splitting_cutoffs(&u, 3.0, 3.0, &KillingSpec::Zero, 0.0, 1.0).unwrap();
    assert_eq!(s.u_sharp.coeffs(), u.coeffs());
    assert!(s.u_flat.coeffs().iter().all(|z| *z == C64::new(0.0, 0.0)));
    assert_eq!(s.seam_mass, 0.0);
    assert_eq!(s.form_defect, 0.0);
    assert!(matches!(
        splitting_cutoffs(&u, 18.5, 3.0, &KillingSpec::Zero, 0.0, 1.0),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn cutoffs_separate_two_bumps() {
    let b = basis(&flat(40.0, 800));
    let inner = field(&b, |r| (-((r - 2.0) / 0.5).powi(2)).exp());
    let outer = field(&b, |r| 0.7 * (-((r - 20.0) / 0.5).powi(2)).exp());
    let u = inner.axpy(C64::new(1.0, 0.0), &outer);
    let s = splitting_cutoffs(&u, 8.0, 3.0, &KillingSpec::Zero, 0.2, 1.0).unwrap();
    assert!((s.u_sharp.power_integral(4.0) - inner.power_integral(4.0)).abs() < 1e-10);
    assert!((s.u_flat.power_integral(4.0) - outer.power_integral(4.0)).abs() < 1e-10);
    assert!(s.lipschitz <= 1.0 + 1e-12);
    assert!(s.bounds_hold);
}

#[test]
fn cutoffs_partition_unity_outside_the_collars() {
    let b = basis(&flat(20.0, 400));
    let u = SpectralField::random(b.clone(), 3, 0);
    let d = 5.0;
    let s = splitting_cutoffs(&u, d, 2.0, &KillingSpec::Zero, 0.0, 1.0).unwrap();
    for ((a, c), &r) in s.chi_sharp.iter().zip(&s.chi_flat).zip(&b.radial().unwrap().nodes) {
        assert!(a + c <= 1.0 + 1e-15);
        assert_eq!(a * c, 0.0);
        if r <= d || r >= d + 2.0 {
            assert_eq!(a + c, 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn seam_bound_holds_on_random_fields(seed in 0u64..1_000_000, d in 0.5f64..14.0, lambda in -1.0f64..1.0) {
        let b = basis(&flat(20.0, 200));
        let u = SpectralField::random(b, seed, 0);
        let s = splitting_cutoffs(&u, d, 2.5, &KillingSpec::Zero, lambda, 1.2).unwrap();
        prop_assert!(s.bounds_hold, "{} > {}", s.form_defect, s.form_bound);
        prop_assert!(s.lipschitz <= 1.0 + 1e-12);
    }

    #[test]
    fn archetype_verdicts_are_seed_independent(seed in 0u64..1000, kind in 0usize..3) {
        let kind = [Archetype::Vanishing, Archetype::Concentration, Archetype::Splitting][kind];
        let s = archetype(kind, &cc_basis(), 2.0, 0.7, 8, seed).unwrap();
        let rep = cc_classify(&s.fields, 2.0, &CcOptions::default()).unwrap();
        prop_assert_eq!(rep.verdict, kind.expected());
    }
}



