use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use proptest::prelude::*;

use super::*;
use crate::quadrature::jacobi;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn torus(n: usize, period: f64, np: usize) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Torus(TorusSpec::new(n, period, np))).unwrap()
}

fn s2(l: usize) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Sphere(SphereSpec::new(2, l))).unwrap()
}

fn s3(l: usize) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Sphere(SphereSpec::new(3, l))).unwrap()
}

fn ylm(l: usize, m: i64) -> Mode {
    Mode::Harmonic { l, m: [m, 0] }
}

#[test]
fn torus_constant_mode_is_flat_on_grid() {
    let b = torus(2, 1.0, 16);
    let u = SpectralField::constant(b, C64::new(0.5, -0.25)).unwrap();
    for z in u.to_grid() {
        assert!((z - C64::new(0.5, -0.25)).norm() < 1e-15);
    }
}

#[test]
fn torus_inner_of_plane_wave() {
    let b = torus(1, 2.0 * PI, 32);
    let u = SpectralField::mode(b, &Mode::Fourier(vec![1])).unwrap();
    // e^{ix} on the circle of length 2π: ∫ |e^{ix}|² = 2π
    let ip = u.inner(&u).unwrap();
    assert!((ip - c(2.0 * PI)).norm() < 1e-12);
    let n = u.norms(3.0);
    assert!((n.l2 - (2.0 * PI).sqrt()).abs() < 1e-12);
    assert!((n.h1 - (4.0 * PI).sqrt()).abs() < 1e-12);
    assert!((n.lp1 - (2.0 * PI).powf(0.25)).abs() < 1e-12);
}

#[test]
fn constant_on_unit_torus_has_unit_norms() {
    let b = torus(1, 1.0, 16);
    let n = SpectralField::constant(b, c(1.0)).unwrap().norms(3.0);
    assert!((n.l2 - 1.0).abs() < 1e-14 && (n.h1 - 1.0).abs() < 1e-14 && (n.lp1 - 1.0).abs() < 1e-14);
}

#[test]
fn torus_volume_matches_quadrature() {
    for (r, k, n) in [(1.0, 1.0, 1), (4.0, 2.5, 2), (0.3, 3.0, 3)] {
        let spec = TorusSpec { metric_scale: r, ..TorusSpec::new(n, k, 8) };
        let b = Basis::new(ManifoldSpec::Torus(spec)).unwrap();
        let one = SpectralField::constant(b.clone(), c(1.0)).unwrap();
        let q = one.power_integral(2.0);
        let vol = (r.sqrt() * k).powi(n as i32);
        assert!((q - vol).abs() < 1e-12 * vol);
    }
}

#[test]
fn y10_on_grid_matches_closed_form() {
    let b = s2(4);
    let u = SpectralField::mode(b.clone(), &ylm(1, 0)).unwrap();
    let g = u.to_grid();
    let sb = b.sphere().unwrap();
    for (i, z) in g.iter().enumerate() {
        let (x, _) = sb.grid_point(i);
        assert!((z - c((3.0 / (4.0 * PI)).sqrt() * x)).norm() < 1e-12);
    }
}

#[test]
fn y11_on_grid_matches_closed_form() {
    let b = s2(3);
    let u = SpectralField::mode(b.clone(), &ylm(1, 1)).unwrap();
    let sb = b.sphere().unwrap();
    for (i, z) in u.to_grid().iter().enumerate() {
        let (x, [a, _]) = sb.grid_point(i);
        let phi = 2.0 * PI * a as f64 / sb.n_phi as f64;
        let s = (1.0 - x * x).sqrt();
        let want = C64::new(phi.cos(), phi.sin()) * (-(3.0 / (8.0 * PI)).sqrt() * s);
        assert!((z - want).norm() < 1e-12);
    }
}

#[test]
fn sphere_harmonics_orthonormal_and_norms() {
    let b = s2(6);
    let y10 = SpectralField::mode(b.clone(), &ylm(1, 0)).unwrap();
    let y20 = SpectralField::mode(b.clone(), &ylm(2, 0)).unwrap();
    assert!((y10.inner(&y10).unwrap() - c(1.0)).norm() < 1e-12);
    assert!(y10.inner(&y20).unwrap().norm() < 1e-12);
    let n = y10.norms(3.0);
    assert!((n.l2 - 1.0).abs() < 1e-12);
    assert!((n.h1 - 3.0f64.sqrt()).abs() < 1e-12);
}

#[test]
fn sphere_constant_field() {
    for b in [s2(4), s3(4)] {
        let one = SpectralField::constant(b.clone(), c(1.0)).unwrap();
        for z in one.to_grid() {
            assert!((z - c(1.0)).norm() < 1e-12);
        }
        assert!((one.norm_l2().powi(2) - b.volume()).abs() < 1e-12 * b.volume());
    }
}

#[test]
fn s2_quadrature_exact_for_dealiased_products() {
    // ∫ |Y_{L,L}|⁴ has degree 4L; compare with a much finer rule
    let l = 5;
    let coarse = s2(l);
    let fine = Basis::new(ManifoldSpec::Sphere(SphereSpec::with_power(2, l, 9.0))).unwrap();
    let a = SpectralField::mode(coarse, &ylm(l, l as i64)).unwrap().power_integral(4.0);
    let b = SpectralField::mode(fine, &ylm(l, l as i64)).unwrap().power_integral(4.0);
    assert!((a - b).abs() < 1e-12 * b);
}

/// Laplace–Beltrami on S³ in Hopf coordinates applied to
/// `g(χ) e^{i(m1 φ1 + m2 φ2)}`, by central differences in χ.
fn hopf_laplacian(g: impl Fn(f64) -> f64, m1: f64, m2: f64, chi: f64) -> f64 {
    let h = 1e-4;
    let (gm, g0, gp) = (g(chi - h), g(chi), g(chi + h));
    let d1 = (gp - gm) / (2.0 * h);
    let d2 = (gp - 2.0 * g0 + gm) / (h * h);
    let (s, cc) = (chi.sin(), chi.cos());
    d2 + (cc / s - s / cc) * d1 - (m1 * m1 / (cc * cc) + m2 * m2 / (s * s)) * g0
}

#[test]
fn s3_hopf_profiles_are_eigenfunctions() {
    for &(l, m1, m2) in &[(1i64, 1i64, 0i64), (2, 0, 0), (3, 1, -2), (4, 2, 0), (5, -1, 2)] {
        let k = ((l - m1.abs() - m2.abs()) / 2) as usize;
        let (a1, a2) = (m1.abs() as f64, m2.abs() as f64);
        let g = |chi: f64| {
            let t = (2.0 * chi).cos();
            chi.cos().powf(a1) * chi.sin().powf(a2) * jacobi(k, a2, a1, t)
        };
        for &chi in &[0.3, 0.7, 1.1] {
            let lhs = hopf_laplacian(g, m1 as f64, m2 as f64, chi);
            let rhs = -((l * (l + 2)) as f64) * g(chi);
            assert!((lhs - rhs).abs() < 1e-5 * (1.0 + rhs.abs()), "l={l} m=({m1},{m2})");
        }
    }
}

#[test]
fn s3_mode_count_and_orthonormality() {
    let b = s3(4);
    assert_eq!(b.n_modes(), (0..=4).map(|l| (l + 1) * (l + 1)).sum::<usize>());
    let modes = b.modes().to_vec();
    for (i, mi) in modes.iter().enumerate().step_by(3) {
        let u = SpectralField::mode(b.clone(), mi).unwrap();
        let back = b.from_grid(&u.to_grid()).unwrap();
        for (j, z) in back.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((z - c(want)).norm() < 1e-12, "modes {i},{j}");
        }
    }
}

fn radial(weight: RadialWeight, r_max: f64, n: usize) -> Arc<Basis> {
    Basis::new(ManifoldSpec::Radial(RadialSpec::new(1, r_max, n, weight))).unwrap()
}

#[test]
fn radial_integration_of_constant() {
    let spec = RadialSpec {
        cross_section_volume: 2.0 * PI,
        ..RadialSpec::new(3, 5.0, 200, RadialWeight::Polynomial { shift: 1.0, power: 2.0 })
    };
    let q = spec.integrate(|_| 1.0);
    // 2π ∫₀⁵ (1+r)² dr = 2π (216 - 1)/3
    let exact = 2.0 * PI * 215.0 / 3.0;
    assert!((q - exact).abs() < 1e-3 * exact);
    let b = Basis::new(ManifoldSpec::Radial(spec)).unwrap();
    assert!((b.volume() - q).abs() < 1e-10 * q);
}

#[test]
fn radial_laplacian_is_self_adjoint_and_positive() {
    let b = radial(RadialWeight::Exponential { rate: 0.5 }, 8.0, 64);
    let u = SpectralField::random(b.clone(), 1, 0);
    let v = SpectralField::random(b.clone(), 1, 1);
    let a = u.neg_laplacian().inner(&v).unwrap();
    let bb = v.neg_laplacian().inner(&u).unwrap().conj();
    assert!((a - bb).norm() < 1e-10 * u.norm_l2() * v.norm_l2() * b.laplacian_max());
    assert!(u.dirichlet_energy() > 0.0);
}

#[test]
fn radial_dirichlet_energy_converges_at_fourth_order() {
    // u = cos(π r / 2L) on [0, L]: even at 0, zero at L; ∫ u'² dr = π²/(8L)
    let l = 4.0;
    let err = |n: usize| {
        let b = radial(RadialWeight::Constant { value: 1.0 }, l, n);
        let rb = b.radial().unwrap();
        let u: Vec<C64> = rb.nodes.iter().map(|r| c((PI * r / (2.0 * l)).cos())).collect();
        let f = SpectralField::new(b.clone(), u).unwrap();
        (f.dirichlet_energy() - PI * PI / (8.0 * l)).abs()
    };
    let (e1, e2) = (err(32), err(64));
    assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
}

#[test]
fn radial_sobolev_inverse_inverts() {
    let b = radial(RadialWeight::Polynomial { shift: 1.0, power: 1.0 }, 6.0, 48);
    let u = SpectralField::random(b.clone(), 3, 0);
    let pu = u.with_coeffs(b.sobolev_inverse(u.coeffs()));
    let back = pu.axpy(c(1.0), &pu.neg_laplacian());
    assert!(back.sub(&u).norm_l2() < 1e-10 * u.norm_l2());
}

#[test]
fn basis_mismatch_is_reported() {
    let u = SpectralField::zeros(torus(1, 1.0, 16));
    let v = SpectralField::zeros(torus(1, 2.0, 16));
    assert!(matches!(u.inner(&v), Err(crate::Error::BasisMismatch)));
}

#[test]
fn wrong_length_is_config_error() {
    let b = torus(1, 1.0, 16);
    assert!(matches!(b.to_grid(&[c(1.0)]), Err(crate::Error::Config(_))));
}

fn parseval_check(b: &Arc<Basis>, seed: u64) {
    let u = SpectralField::random(b.clone(), seed, 0);
    let spectral = u.norm_l2().powi(2);
    let grid = u.power_integral(2.0);
    assert!((spectral - grid).abs() < 1e-10 * spectral);
    let back = b.from_grid(&u.to_grid()).unwrap();
    let err = back.iter().zip(u.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = u.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err < 1e-12 * scale.max(1.0));
}

#[test]
fn parseval_and_round_trip_hundred_fields_per_basis() {
    let bases = [torus(1, 3.0, 32), torus(2, 1.0, 16), torus(3, 2.0, 8), s2(6), s3(3)];
    for b in &bases {
        for seed in 0..100 {
            parseval_check(b, seed);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn transforms_are_linear(seed in 0u64..1000, a in -3.0f64..3.0, bi in -3.0f64..3.0) {
        for b in [torus(2, 2.0, 16), s2(5)] {
            let u = SpectralField::random(b.clone(), seed, 0);
            let v = SpectralField::random(b.clone(), seed, 1);
            let (ca, cb) = (C64::new(a, 0.5), C64::new(bi, -1.0));
            let lhs = u.scale(ca).axpy(cb, &v).to_grid();
            let gu = u.to_grid();
            let gv = v.to_grid();
            for ((l, x), y) in lhs.iter().zip(&gu).zip(&gv) {
                prop_assert!((l - (ca * x + cb * y)).norm() < 1e-12 * (1.0 + l.norm()));
            }
        }
    }
}
