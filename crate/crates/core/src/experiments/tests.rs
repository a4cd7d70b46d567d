use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::*;
use crate::basis::{Basis, ManifoldSpec, Mode, SpectralField, SphereSpec, TorusSpec};
use crate::minimizer::{verify_pde, Classification, Constraint, Equation, ProblemSpec, Scheme};
use crate::operators::{form_f_nls, KillingSpec};
use crate::{Error, C64};

fn torus(n: usize, period: f64, np: usize) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Torus(TorusSpec::new(n, period, np))).unwrap()
}

fn s2(l: usize) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Sphere(SphereSpec::new(2, l))).unwrap()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn trivial_constant_examples() {
    assert!((trivial_constant(1.0, 0.0, 1.0, 3.0).unwrap() - 1.0).abs() < 1e-15);
    let oracle = bisect(|c| 4.0 * c - c.powi(3), 0.5, 5.0);
    assert!((trivial_constant(2.0, 0.0, 1.0, 3.0).unwrap() - oracle).abs() < 1e-12);
    let oracle = bisect(|c| (2.25 - 0.25) * c - 3.0 * c.powf(2.5), 0.1, 5.0);
    assert!((trivial_constant(1.5, 0.5, 3.0, 2.5).unwrap() - oracle).abs() < 1e-12);
    assert!(matches!(trivial_constant(1.0, 1.0, 1.0, 3.0), Err(Error::NoPositiveConstant(_))));
    assert!(matches!(trivial_constant(1.0, 2.0, 1.0, 3.0), Err(Error::NoPositiveConstant(_))));
}

#[test]
fn trivial_constant_solves_the_equation() {
    let cases: [(Arc<Basis>, KillingSpec); 3] = [
        (torus(1, 1.0, 16), KillingSpec::torus(&[0.5])),
        (torus(2, 2.0, 16), KillingSpec::torus(&[0.3, 0.2])),
        (s2(6), KillingSpec::rotation(0.5)),
    ];
    for (b, x) in &cases {
        for (m, l, k, p) in [(1.0, 0.0, 1.0, 3.0), (2.0, 0.5, 1.5, 2.0), (1.3, -0.4, 0.7, 2.5)] {
            let r = trivial_constant_residual(b, x, m, l, k, p).unwrap();
            assert!(r < 1e-12, "residual {r} for m={m} lambda={l}");
        }
    }
}

#[test]
fn constant_branch_closed_form_and_slope() {
    let (m, p, a) = (1.3, 3.0, 0.7);
    let base = ManifoldSpec::Torus(TorusSpec::new(1, 1.0, 16));
    let x = KillingSpec::torus(&[0.5]);
    for k in [1.0, 2.0, 3.0, 8.0] {
        let pt = sweep_point(&base, &x, m, p, a, k, 1, 0).unwrap();
        // constant c with c^{p+1} k = A, F = m² c² k
        let c = (a / k).powf(1.0 / (p + 1.0));
        assert!((pt.constant_branch - m * m * c * c * k).abs() < 1e-12 * pt.constant_branch);
        assert!((pt.constant_assembled - pt.constant_branch).abs() < 1e-10 * pt.constant_branch);
        let printed = m * m * a.powf(0.25) * k.powf(0.75);
        assert!((pt.printed_branch - printed).abs() < 1e-12 * printed);
    }
    let sphere = ManifoldSpec::Sphere(SphereSpec::new(2, 4));
    for r in [1.0, 2.0, 5.0] {
        let pt = sweep_point(&sphere, &KillingSpec::rotation(0.5), 1.0, 3.0, 1.0, r, 1, 0).unwrap();
        let b = Basis::new(scaled_manifold(&sphere, r).unwrap()).unwrap();
        let area: f64 = b.grid_weights().iter().sum();
        assert!((area - 4.0 * PI * r * r).abs() < 1e-10 * area);
        let want = area.powf(0.5);
        assert!((pt.constant_branch - want).abs() < 1e-10 * want);
        assert!((pt.constant_assembled - want).abs() < 1e-10 * want);
    }
    let xs = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
    assert!((tail_slope(&xs, &ys) - 0.5).abs() < 1e-12);
}

#[test]
fn sweep_finds_constant_then_breaking_on_the_circle() {
    let base = ManifoldSpec::Torus(TorusSpec::new(1, 1.0, 16));
    let x = KillingSpec::torus(&[0.5]);
    let res = scaling_sweep(&base, &x, 1.0, 3.0, 1.0, &[1.0, 8.0], 7, 2).unwrap();
    assert_eq!(res.classification[0], Classification::Constant);
    assert!((res.minimized[0] - res.constant_branch[0]).abs() < 1e-8);
    assert_eq!(res.classification[1], Classification::Travelling);
    assert!(res.minimized[1] < res.constant_branch[1] * (1.0 - 1e-8));
    assert_eq!(res.breaking_scale, Some(8.0));
    assert!(res.all_converged);
    assert!(res.closed_form_defect < 1e-10);
}

#[test]
fn sweep_rejects_supersonic_and_radial() {
    let base = ManifoldSpec::Torus(TorusSpec::new(1, 1.0, 16));
    assert!(matches!(
        sweep_point(&base, &KillingSpec::torus(&[1.5]), 1.0, 3.0, 1.0, 2.0, 0, 0),
        Err(Error::ParameterRegime(_))
    ));
    let radial = ManifoldSpec::Radial(crate::basis::RadialSpec::new(
        1,
        10.0,
        64,
        crate::basis::RadialWeight::Constant { value: 1.0 },
    ));
    assert!(scaled_manifold(&radial, 2.0).is_err());
}

#[test]
fn gn_gate_matches_integer_arithmetic() {
    for n in 1..=8u32 {
        for den in 1..=12i64 {
            for num in den + 1..=12 * den {
                let g = gn_gate(n, num, den).unwrap();
                let nn = n as i64;
                // γ(p+1) = n(p-1)/2 < 2  ⇔  n(num - den) < 4 den
                assert_eq!(g.gamma_below_two, nn * (num - den) < 4 * den, "n={n} p={num}/{den}");
                assert!(g.agrees());
            }
        }
    }
    let edge = gn_gate(2, 3, 1).unwrap();
    assert!(!edge.gamma_below_two && !edge.p_subcritical);
    assert_eq!(edge.gamma_p1, (2, 1));
    assert!(gn_gate(0, 3, 1).is_err());
}

#[test]
fn gn_ratio_examples() {
    let b = torus(1, 1.0, 64);
    let one = SpectralField::constant(b.clone(), C64::new(1.0, 0.0)).unwrap();
    assert!((gn_ratio(&one, 3.0) - 1.0).abs() < 1e-13);
    let gamma = 0.5 - 1.0 / 4.0;
    let mut last = f64::INFINITY;
    for m in [1i64, 2, 4, 8] {
        let u = SpectralField::mode(b.clone(), &Mode::Fourier(alloc::vec![m])).unwrap();
        let want = (1.0 + 4.0 * PI * PI * (m * m) as f64).powf(-gamma / 2.0);
        let got = gn_ratio(&u, 3.0);
        assert!((got - want).abs() < 1e-12, "M={m}: {got} vs {want}");
        assert!(got < last);
        last = got;
    }
}

#[test]
fn gn_scan_chain_identity() {
    for (b, x) in [
        (s2(6), KillingSpec::rotation(0.7)),
        (torus(2, 3.0, 16), KillingSpec::torus(&[0.4, -0.2])),
        (torus(1, 5.0, 64), KillingSpec::torus(&[0.9])),
    ] {
        let rep = gn_scan(&b, &x, 0.3, 1.2, 2.0, 20, 11).unwrap();
        assert!(rep.samples >= 20);
        assert!(rep.max_chain_defect < 1e-10, "{}", rep.max_chain_defect);
        assert!(rep.c_estimate.is_finite() && rep.c_estimate > 0.0);
        assert!(rep.table.iter().all(|s| s.ratio <= rep.c_estimate));
    }
}

fn bump_closed_forms(u: &GaussianBump, p: f64) -> Measures {
    // A e^{-x²/wx² - y²/wy²}
    let (a, wx, wy) = (u.amplitude, u.widths[0], u.widths[1]);
    let hp = PI / 2.0;
    let l2 = a * a * hp * wx * wy;
    let dy = a * a * hp * wx / wy;
    let dx = a * a * hp * wy / wx;
    // ∫ y² e^{-2y²/wy²} dy = wy³ √(π/2) / 4
    let y_dx = a * a * (4.0 / wx.powi(4)) * (wx.powi(3) * hp.sqrt() / 4.0) * (wy.powi(3) * hp.sqrt() / 4.0);
    let lp = a.powf(p) * (PI / p) * wx * wy;
    Measures { l2, lp, grad: dx + dy, dy, y_dx }
}

#[test]
fn plane_grid_matches_closed_forms() {
    let u = GaussianBump { amplitude: 1.7, widths: alloc::vec![0.8, 1.3] };
    let v = u.scaled(4.0, 1.0, &[4.0, 2.0]);
    let grid = grid_for(&[&u, &v], 0.04, None).unwrap();
    for f in [&u, &v] {
        let got = measure(&grid, f, 2.5).unwrap();
        let want = bump_closed_forms(f, 2.5);
        for (g, w) in [(got.l2, want.l2), (got.lp, want.lp), (got.dy, want.dy), (got.y_dx, want.y_dx), (got.grad, want.grad)]
        {
            assert!((g / w - 1.0).abs() < 1e-6, "{g} vs {w} {got:?}");
        }
    }
}

#[test]
fn anisotropic_examples() {
    let u = GaussianBump { amplitude: 1.0, widths: alloc::vec![1.0, 1.0] };
    let rep = anisotropic_identities(&u, 2.0, 1.0, 4.0, 2.0, 2.0, &PlaneOptions::default()).unwrap();
    let get = |name: &str| rep.laws.iter().find(|l| l.name == name).unwrap().clone();
    assert_eq!(get("dy").exponent, 0.0);
    assert_eq!(get("dy").predicted, 1.0);
    assert_eq!(get("lp").exponent, -4.0);
    assert!((get("lp").predicted - 2f64.powi(-4)).abs() < 1e-15);
    assert_eq!(get("y_dx").exponent, 0.0);
    assert!(rep.max_fine_error < 1e-6);
    assert!(rep.all_converge);
    assert!(rep.laws.iter().all(|l| l.name != "gradient"));

    let id = anisotropic_identities(&u, 1.0, 1.0, 4.0, 2.0, 3.0, &PlaneOptions::default()).unwrap();
    for l in &id.laws {
        assert_eq!(l.predicted, 1.0);
        assert!(l.fine_error < 1e-13, "{} {}", l.name, l.fine_error);
    }
    let iso = anisotropic_identities(&u, 3.0, 1.0, 1.0, 1.0, 2.0, &PlaneOptions::default()).unwrap();
    let g = iso.laws.iter().find(|l| l.name == "gradient").unwrap();
    assert_eq!(g.exponent, 2.0);
    assert!(g.fine_error < 1e-6);
}

#[test]
fn anisotropic_overflow_is_reported() {
    let u = GaussianBump { amplitude: 1.0, widths: alloc::vec![1.0, 1.0] };
    let opts = PlaneOptions { ds: 0.1, half_width: Some(4.0) };
    let err = anisotropic_identities(&u, 0.5, 1.0, 1.0, 1.0, 2.0, &opts).unwrap_err();
    assert!(matches!(err, Error::DomainOverflow(_)));
    assert!(anisotropic_identities(&u, 2.0, 1.0, 1.0, 1.0, 2.0, &PlaneOptions { ds: 0.1, half_width: Some(64.0) }).is_ok());
}

/// Closed-form energy of `s·u(s^{2/n} x)` with `u = A e^{-|x|²}`, `‖u‖² = β`.
fn dilated_energy(n: usize, p: f64, beta: f64, s: f64) -> f64 {
    let nf = n as f64;
    let hp = PI / 2.0;
    let a2 = beta / hp.powf(nf / 2.0);
    let amp = s * a2.sqrt();
    let w = s.powf(-2.0 / nf);
    let grad = amp * amp * hp.powf(nf / 2.0) * nf * w.powf(nf - 2.0);
    let pot = amp.powf(p + 1.0) * (PI / (p + 1.0)).powf(nf / 2.0) * w.powf(nf);
    0.5 * grad - pot / (p + 1.0)
}

#[test]
fn negative_energy_examples() {
    for (n, p, beta) in [(1usize, 2.0, 1.0), (2, 2.0, 1.0), (1, 3.0, 0.5), (2, 2.5, 3.0)] {
        let opts = NegativeEnergyOptions::default();
        let rep = negative_energy_construction(n, p, beta, &opts).unwrap();
        assert_eq!(rep.alpha, 2.0 / n as f64);
        let j = rep.first_negative.expect("negative energy reached");
        let oracle = (0..=opts.max_steps).find(|&j| dilated_energy(n, p, beta, opts.shrink.powi(j as i32)) < 0.0);
        assert_eq!(Some(j), oracle, "n={n} p={p}");
        assert!(rep.max_l2_defect < 1e-10 * beta, "{}", rep.max_l2_defect);
        assert!(rep.max_law_error < 1e-6, "{}", rep.max_law_error);
        for st in &rep.steps {
            let e = dilated_energy(n, p, beta, st.s);
            assert!((st.energy - e).abs() < 1e-6 * e.abs().max(1e-3), "n={n} p={p} s={} {} vs {e} grad {}", st.s, st.energy, st.grad);
        }
        assert!(rep.field.is_some());
    }
    let r = negative_energy_construction(1, 2.0, 1.0, &NegativeEnergyOptions::default()).unwrap();
    assert_eq!(r.ratio_exponent, -3.0);
    let r = negative_energy_construction(2, 2.0, 1.0, &NegativeEnergyOptions::default()).unwrap();
    assert_eq!(r.ratio_exponent, -1.0);
    assert!(matches!(
        negative_energy_construction(2, 3.5, 1.0, &NegativeEnergyOptions::default()),
        Err(Error::ParameterRegime(_))
    ));
    assert!(negative_energy_construction(3, 1.5, 1.0, &NegativeEnergyOptions::default()).is_err());
}

#[test]
fn form_perturbation_example() {
    let b = torus(1, 1.0, 16);
    let u = SpectralField::mode(b.clone(), &Mode::Fourier(alloc::vec![1])).unwrap();
    let x = KillingSpec::torus(&[0.3]);
    let xe = x.perturbed(0.01, &KillingSpec::torus(&[1.0])).unwrap();
    let df = form_f_nls(&u, &xe, 0.7).unwrap() - form_f_nls(&u, &x, 0.7).unwrap();
    assert!((df - 2.0 * PI * 0.01).abs() < 1e-13, "{df}");
    let x0 = x.perturbed(0.0, &KillingSpec::torus(&[1.0])).unwrap();
    assert_eq!(form_f_nls(&u, &x0, 0.7).unwrap(), form_f_nls(&u, &x, 0.7).unwrap());
}

#[test]
fn align_recovers_translation_and_phase() {
    for (b, period) in [(torus(1, 3.0, 32), 3.0), (torus(2, 2.0, 16), 2.0), (s2(6), 2.0 * PI)] {
        let u = SpectralField::random(b.clone(), 5, 0);
        let (shift, phase) = (0.37, 1.1);
        let coeffs = u
            .coeffs()
            .iter()
            .zip(b.modes())
            .map(|(c, m)| {
                let k = match m {
                    Mode::Fourier(q) => q.iter().map(|&q| q as f64).sum::<f64>() * 2.0 * PI / period,
                    Mode::Harmonic { m, .. } => m[0] as f64 * 2.0 * PI / period,
                    Mode::Node(_) => 0.0,
                };
                c * C64::from_polar(1.0, k * shift + phase)
            })
            .collect();
        let moved = u.with_coeffs(coeffs);
        let back = align(&moved, &u).unwrap();
        assert!(back.sub(&u).norm_l2() < 1e-9 * u.norm_l2(), "{}", back.sub(&u).norm_l2());
    }
}

#[test]
fn perturbation_study_on_the_circle() {
    let b = torus(1, 8.0, 64);
    let mut pr = ProblemSpec::new(Equation::Nls, 3.0, Constraint::LpPlusOne { a: 1.0 }, Scheme::FMin).with_lambda(1.0);
    pr.seed = 3;
    pr.n_random_starts = 2;
    let x = KillingSpec::torus(&[0.3]);
    let xpp = KillingSpec::torus(&[1.0]);
    let rep = perturbation_study(&b, &x, &xpp, &[1e-1, 1e-2, 1e-3, 0.0], &pr, 50).unwrap();
    assert_eq!(rep.sup_x_pp, 1.0);
    assert_eq!(rep.total_violations, 0);
    assert!(rep.bound.iter().all(|r| r.max_ratio <= 1.0));
    assert!(rep.monotone, "{:?}", rep.minimizers);
    let last = rep.minimizers.last().unwrap();
    assert_eq!(last.eps, 0.0);
    assert!(last.sup_diff < 1e-6, "{}", last.sup_diff);
    assert!(rep.minimizers[0].sup_diff > rep.minimizers[2].sup_diff);
    assert!(rep.minimizers.iter().all(|m| m.converged && m.residual < 1e-6));
}

#[test]
fn perturbation_kinds_must_match() {
    let b = torus(1, 1.0, 16);
    let pr = ProblemSpec::new(Equation::Nls, 3.0, Constraint::LpPlusOne { a: 1.0 }, Scheme::FMin).with_lambda(1.0);
    let err = perturbation_study(&b, &KillingSpec::torus(&[0.3]), &KillingSpec::rotation(1.0), &[0.1], &pr, 2);
    assert!(matches!(err, Err(Error::InvalidPerturbation(_))));
}

#[test]
fn theta_and_exponent_check() {
    for (p, q) in [(2.0, 3.0), (1.5, 4.0), (3.0, 7.0), (1.1, 1.2)] {
        let oracle = bisect(|t| 1.0 / (p + 1.0) - (1.0 - t) / 2.0 - t / (q + 1.0), 0.0, 1.0);
        assert!((interpolation_theta(p, q) - oracle).abs() < 1e-12);
    }
    assert!((interpolation_theta(2.0, 3.0) - 2.0 / 3.0).abs() < 1e-15);
    for i in 1..40 {
        for j in 1..40 {
            let p = 1.0 + 0.1 * i as f64;
            let q = p + 0.1 * j as f64;
            assert!(exponent_ratio(p, q) < 2.0);
        }
    }
}

#[test]
fn two_nonlinearity_constant_and_minimizer() {
    let b = torus(1, 1.0, 16);
    let one = SpectralField::constant(b.clone(), C64::new(1.0, 0.0)).unwrap();
    let pr = ProblemSpec::new(Equation::TwoNonlinearity, 2.0, Constraint::LpPlusOne { a: 1.0 }, Scheme::FMin)
        .with_lambda(2.0)
        .with_q(3.0);
    assert!(verify_pde(&one, &pr, &KillingSpec::Zero, 1.0).unwrap() < 1e-12);

    let b = torus(1, 6.0, 64);
    let rep = two_nonlinearity_minimize(&b, &KillingSpec::torus(&[0.2]), 1.0, 2.0, 3.0, 1.0, 2, 4).unwrap();
    assert_eq!(rep.warnings.len(), 1);
    assert!(rep.result.converged);
    assert!(rep.result.residual < 1e-6, "{}", rep.result.residual);
    assert!((rep.result.u.power_integral(4.0) - 1.0).abs() < 1e-12);
    assert!((rep.theta - 2.0 / 3.0).abs() < 1e-15);
    assert!(rep.exponent_below_two);
    let quiet = two_nonlinearity_minimize(&b, &KillingSpec::Zero, 1.0, 2.0, 3.0, 1.0, 1, 4).unwrap();
    assert!(quiet.warnings.is_empty());
    assert!(two_nonlinearity_minimize(&b, &KillingSpec::Zero, 1.0, 3.0, 2.0, 1.0, 1, 4).is_err());
}
