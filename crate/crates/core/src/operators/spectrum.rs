use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::killing::{apply_killing, apply_laplacian, KillingSpec};
use crate::basis::{Basis, SpectralField};
use crate::linalg::{lanczos_extremes, LanczosResult};
use crate::{Error, Result, C64};

const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_MAX_ITER: usize = 5000;
const LANCZOS_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Elliptic,
    Sonic,
    Supersonic,
}

impl Regime {
    pub fn from_speed(b: f64) -> Self {
        if (b - 1.0).abs() <= 1e-12 {
            Self::Sonic
        } else if b < 1.0 {
            Self::Elliptic
        } else {
            Self::Supersonic
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    /// `min Spec(-Δ - iX)`.
    pub alpha: f64,
    /// `min Spec(-Δ + X² + 2iλX)`.
    pub beta_lambda: f64,
    pub regime: Regime,
    pub speed_bound: f64,
    pub lambda: f64,
    pub m_mass: f64,
    /// Lowest eigenvalues of `-Δ - iX` by mode enumeration.
    pub lowest_eigs: Vec<(f64, String)>,
    /// Lowest eigenvalues of `-Δ + X² + 2iλX` by mode enumeration.
    pub lowest_eigs_nlkg: Vec<(f64, String)>,
    /// `λ > -α`.
    pub nls_coercive: bool,
    /// `m² > λ² - β(λ)`.
    pub nlkg_coercive: bool,
    /// Extremal Rayleigh quotients `F_{λ,X}(u)/‖u‖²_{H¹}`.
    pub nls_equivalence: (f64, f64),
    /// Extremal Rayleigh quotients `F_{m,λ,X}(u)/‖u‖²_{H¹}`.
    pub nlkg_equivalence: (f64, f64),
    /// Largest gap between the iterative extremes and mode enumeration.
    pub enumeration_gap: f64,
    pub lanczos_iterations: usize,
}

fn run_lanczos(basis: &Arc<Basis>, op: impl Fn(&SpectralField) -> Result<SpectralField>) -> Result<LanczosResult> {
    let n = basis.n_modes();
    let mut failure = None;
    let res = lanczos_extremes(
        n,
        basis.coeff_weights(),
        |x, y| {
            let f = SpectralField::new(basis.clone(), x.to_vec()).expect("sized");
            match op(&f) {
                Ok(g) => y.copy_from_slice(g.coeffs()),
                Err(e) => {
                    failure.get_or_insert(e);
                    y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                }
            }
        },
        LANCZOS_SEED,
        LANCZOS_TOL,
        LANCZOS_MAX_ITER,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(res),
    }
}

fn lowest(values: &[f64], basis: &Basis, count: usize) -> Vec<(f64, String)> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx.into_iter().take(count).map(|i| (values[i], basis.modes()[i].to_string())).collect()
}

/// Spectral lower bounds and coercivity of the quadratic forms on a compact
/// truncated space.
pub fn coercivity_check(basis: &Arc<Basis>, x: &KillingSpec, lambda: f64, m_mass: f64) -> Result<SpectrumReport> {
    let lap = basis
        .laplacian_symbol()
        .ok_or_else(|| Error::Config("coercivity check needs a compact manifold".into()))?
        .to_vec();
    let sigma = x.symbol(basis)?;
    let nls_op = |u: &SpectralField| -> Result<SpectralField> {
        Ok(apply_laplacian(u).axpy(C64::new(0.0, -1.0), &apply_killing(u, x)?))
    };
    let nlkg_op = |u: &SpectralField| -> Result<SpectralField> {
        let xu = apply_killing(u, x)?;
        Ok(apply_laplacian(u).axpy(C64::new(1.0, 0.0), &apply_killing(&xu, x)?).axpy(C64::new(0.0, 2.0 * lambda), &xu))
    };
    let a_res = run_lanczos(basis, nls_op)?;
    let b_res = run_lanczos(basis, nlkg_op)?;
    let sob = |u: &SpectralField| -> SpectralField {
        u.with_coeffs(u.coeffs().iter().zip(&lap).map(|(c, l)| c / (1.0 + l).sqrt()).collect())
    };
    let nls_eq = run_lanczos(basis, |u| {
        let v = sob(u);
        Ok(sob(&nls_op(&v)?.axpy(C64::new(lambda, 0.0), &v)))
    })?;
    let shift = m_mass * m_mass - lambda * lambda;
    let nlkg_eq = run_lanczos(basis, |u| {
        let v = sob(u);
        Ok(sob(&nlkg_op(&v)?.axpy(C64::new(shift, 0.0), &v)))
    })?;

    let nls_sym: Vec<f64> = lap.iter().zip(&sigma).map(|(l, s)| l + s).collect();
    let nlkg_sym: Vec<f64> = lap.iter().zip(&sigma).map(|(l, s)| l - s * s - 2.0 * lambda * s).collect();
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let gap = (a_res.min - min_of(&nls_sym)).abs().max((b_res.min - min_of(&nlkg_sym)).abs());
    let speed = x.speed_bound(basis.spec());
    Ok(SpectrumReport {
        alpha: a_res.min,
        beta_lambda: b_res.min,
        regime: Regime::from_speed(speed),
        speed_bound: speed,
        lambda,
        m_mass,
        lowest_eigs: lowest(&nls_sym, basis, 8),
        lowest_eigs_nlkg: lowest(&nlkg_sym, basis, 8),
        nls_coercive: lambda > -a_res.min,
        nlkg_coercive: m_mass * m_mass > lambda * lambda - b_res.min,
        nls_equivalence: (nls_eq.min, nls_eq.max),
        nlkg_equivalence: (nlkg_eq.min, nlkg_eq.max),
        enumeration_gap: gap,
        lanczos_iterations: a_res.iterations + b_res.iterations + nls_eq.iterations + nlkg_eq.iterations,
    })
}
