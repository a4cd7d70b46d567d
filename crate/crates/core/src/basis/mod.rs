//! Discrete function spaces.
//!
//! A [`Basis`] owns everything precomputed for one [`ManifoldSpec`]: mode
//! tables, quadrature grids, transform data. A [`SpectralField`] is a
//! coefficient vector tied to a shared basis.
//!
//! Coefficient conventions:
//! - torus: `u(x) = Σ_q c_q e^{2πi q·x / k}` over the dealiased index box;
//! - sphere: `u = Σ c_{lm} Y_{lm}` with `Y_{lm}` orthonormal on the unit sphere;
//! - radial: node values `u(r_i)`, `i = 0..N-1`, with `u(r_max) = 0`.

mod radial;
mod sphere;
mod torus;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Rand};
use crate::{Error, Result, C64};

pub use radial::{RadialBasis, RadialSpec, RadialWeight};
pub use sphere::{SphereBasis, SphereSpec};
pub use torus::{TorusBasis, TorusSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    Torus(TorusSpec),
    Sphere(SphereSpec),
    Radial(RadialSpec),
}

impl ManifoldSpec {
    /// Dimension of the manifold.
    pub fn dim(&self) -> usize {
        match self {
            Self::Torus(t) => t.n,
            Self::Sphere(s) => s.n,
            Self::Radial(r) => r.dim,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Self::Radial(_))
    }
}

/// Label of one basis mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Fourier multi-index.
    Fourier(Vec<i64>),
    /// Spherical harmonic of degree `l`. On `S²` only `m[0]` is used; on `S³`
    /// `m = (m1, m2)` are the Hopf azimuthal frequencies.
    Harmonic { l: usize, m: [i64; 2] },
    /// Radial collocation node.
    Node(usize),
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Mode::Fourier(q) => write!(f, "q={q:?}"),
            Mode::Harmonic { l, m } => write!(f, "l={l},m=({},{})", m[0], m[1]),
            Mode::Node(i) => write!(f, "node={i}"),
        }
    }
}

#[derive(Debug)]
enum Imp {
    Torus(TorusBasis),
    Sphere(SphereBasis),
    Radial(RadialBasis),
}

/// Precomputed discretization of one manifold.
#[derive(Debug)]
pub struct Basis {
    spec: ManifoldSpec,
    imp: Imp,
}

impl Basis {
    pub fn new(spec: ManifoldSpec) -> Result<Arc<Self>> {
        let imp = match &spec {
            ManifoldSpec::Torus(t) => Imp::Torus(TorusBasis::new(t)?),
            ManifoldSpec::Sphere(s) => Imp::Sphere(SphereBasis::new(s)?),
            ManifoldSpec::Radial(r) => Imp::Radial(RadialBasis::new(r)?),
        };
        Ok(Arc::new(Self { spec, imp }))
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn n_modes(&self) -> usize {
        self.modes().len()
    }

    pub fn modes(&self) -> &[Mode] {
        match &self.imp {
            Imp::Torus(b) => &b.modes,
            Imp::Sphere(b) => &b.modes,
            Imp::Radial(b) => &b.modes,
        }
    }

    pub fn grid_len(&self) -> usize {
        self.grid_weights().len()
    }

    /// Quadrature weights on the grid, including the metric volume factor.
    pub fn grid_weights(&self) -> &[f64] {
        match &self.imp {
            Imp::Torus(b) => &b.grid_weights,
            Imp::Sphere(b) => &b.grid_weights,
            Imp::Radial(b) => &b.mass_weights,
        }
    }

    /// Weights `w` with `(u, v) = Σ w_i c_i conj(d_i)` in coefficient space.
    pub fn coeff_weights(&self) -> &[f64] {
        match &self.imp {
            Imp::Torus(b) => &b.coeff_weights,
            Imp::Sphere(b) => &b.coeff_weights,
            Imp::Radial(b) => &b.mass_weights,
        }
    }

    /// Riemannian volume of the (truncated) manifold.
    pub fn volume(&self) -> f64 {
        match &self.imp {
            Imp::Torus(b) => b.volume,
            Imp::Sphere(b) => b.volume,
            Imp::Radial(b) => b.volume,
        }
    }

    pub fn to_grid(&self, coeffs: &[C64]) -> Result<Vec<C64>> {
        self.check_len(coeffs.len(), self.n_modes(), "coefficient")?;
        Ok(match &self.imp {
            Imp::Torus(b) => b.to_grid(coeffs),
            Imp::Sphere(b) => b.to_grid(coeffs),
            Imp::Radial(_) => coeffs.to_vec(),
        })
    }

    /// Quadrature projection of grid values onto the modes (dealiased).
    pub fn from_grid(&self, grid: &[C64]) -> Result<Vec<C64>> {
        self.check_len(grid.len(), self.grid_len(), "grid")?;
        Ok(match &self.imp {
            Imp::Torus(b) => b.from_grid(grid),
            Imp::Sphere(b) => b.from_grid(grid),
            Imp::Radial(_) => grid.to_vec(),
        })
    }

    fn check_len(&self, got: usize, want: usize, what: &str) -> Result<()> {
        if got != want {
            return Err(Error::Config(format!("{what} length {got} does not match basis size {want}")));
        }
        Ok(())
    }

    /// Diagonal symbol of `-Δ` when the basis diagonalizes it.
    pub fn laplacian_symbol(&self) -> Option<&[f64]> {
        match &self.imp {
            Imp::Torus(b) => Some(&b.lap),
            Imp::Sphere(b) => Some(&b.lap),
            Imp::Radial(_) => None,
        }
    }

    /// `-Δ` applied in coefficient space.
    pub fn neg_laplacian(&self, coeffs: &[C64]) -> Vec<C64> {
        match &self.imp {
            Imp::Radial(b) => b.neg_laplacian(coeffs),
            _ => {
                let lap = self.laplacian_symbol().expect("diagonal basis");
                coeffs.iter().zip(lap).map(|(c, l)| c * l).collect()
            }
        }
    }

    /// `(I - Δ)^{-1}` applied in coefficient space.
    pub fn sobolev_inverse(&self, coeffs: &[C64]) -> Vec<C64> {
        match &self.imp {
            Imp::Radial(b) => b.sobolev_inverse(coeffs),
            _ => {
                let lap = self.laplacian_symbol().expect("diagonal basis");
                coeffs.iter().zip(lap).map(|(c, l)| c / (1.0 + l)).collect()
            }
        }
    }

    /// Largest eigenvalue of `-Δ` on the truncated space (upper bound for the
    /// radial stencil).
    pub fn laplacian_max(&self) -> f64 {
        match &self.imp {
            Imp::Radial(b) => b.laplacian_bound(),
            _ => self.laplacian_symbol().expect("diagonal basis").iter().fold(0.0, |m, x| m.max(*x)),
        }
    }

    /// Coefficients of the constant function `value`, if constants lie in the
    /// discrete space.
    pub fn constant(&self, value: C64) -> Option<Vec<C64>> {
        let mut c = vec![C64::new(0.0, 0.0); self.n_modes()];
        match &self.imp {
            Imp::Torus(b) => c[b.zero_mode] = value,
            Imp::Sphere(b) => c[0] = value * b.unit_volume.sqrt(),
            Imp::Radial(_) => return None,
        }
        Some(c)
    }

    /// Smooth random field: Gaussian coefficients damped by `(1 + λ_q)^{-1}`
    /// on compact bases, a sum of random Gaussian bumps on radial grids.
    pub fn random_coeffs(&self, rng: &mut Rand) -> Vec<C64> {
        match &self.imp {
            Imp::Radial(b) => b.random_field(rng),
            _ => {
                let lap = self.laplacian_symbol().expect("diagonal basis");
                lap.iter().map(|l| rng::complex_normal(rng) / (1.0 + l)).collect()
            }
        }
    }

    pub fn torus(&self) -> Option<&TorusBasis> {
        match &self.imp {
            Imp::Torus(b) => Some(b),
            _ => None,
        }
    }

    pub fn sphere(&self) -> Option<&SphereBasis> {
        match &self.imp {
            Imp::Sphere(b) => Some(b),
            _ => None,
        }
    }

    pub fn radial(&self) -> Option<&RadialBasis> {
        match &self.imp {
            Imp::Radial(b) => Some(b),
            _ => None,
        }
    }
}

/// `(‖u‖_{L²}, ‖u‖_{H¹}, ‖u‖_{L^{p+1}})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub lp1: f64,
}

/// Coefficient vector in a shared basis.
#[derive(Clone, Debug)]
pub struct SpectralField {
    basis: Arc<Basis>,
    coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn new(basis: Arc<Basis>, coeffs: Vec<C64>) -> Result<Self> {
        basis.check_len(coeffs.len(), basis.n_modes(), "coefficient")?;
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: Arc<Basis>) -> Self {
        let n = basis.n_modes();
        Self { basis, coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    /// Single basis mode with unit coefficient.
    pub fn mode(basis: Arc<Basis>, mode: &Mode) -> Result<Self> {
        let idx = basis
            .modes()
            .iter()
            .position(|m| m == mode)
            .ok_or_else(|| Error::Config(format!("mode {mode} not in basis")))?;
        let mut f = Self::zeros(basis);
        f.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn constant(basis: Arc<Basis>, value: C64) -> Result<Self> {
        let c = basis
            .constant(value)
            .ok_or_else(|| Error::Config(String::from("constants are not in this discrete space")))?;
        Ok(Self { basis, coeffs: c })
    }

    pub fn from_grid(basis: Arc<Basis>, grid: &[C64]) -> Result<Self> {
        let coeffs = basis.from_grid(grid)?;
        Ok(Self { basis, coeffs })
    }

    pub fn random(basis: Arc<Basis>, seed: u64, stream: u64) -> Self {
        let mut r = rng::seeded(seed, stream);
        let coeffs = basis.random_coeffs(&mut r);
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Same basis, new coefficients.
    pub fn with_coeffs(&self, coeffs: Vec<C64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self { basis: self.basis.clone(), coeffs }
    }

    pub fn to_grid(&self) -> Vec<C64> {
        self.basis.to_grid(&self.coeffs).expect("length checked at construction")
    }

    pub fn same_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis.spec == other.basis.spec {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    /// `(u, v) = ∫ u conj(v) dV`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.same_basis(other)?;
        Ok(weighted_inner(self.basis.coeff_weights(), &self.coeffs, &other.coeffs))
    }

    pub fn norm_l2(&self) -> f64 {
        weighted_inner(self.basis.coeff_weights(), &self.coeffs, &self.coeffs).re.max(0.0).sqrt()
    }

    /// `‖∇u‖²_{L²} = (-Δu, u)`.
    pub fn dirichlet_energy(&self) -> f64 {
        let l = self.basis.neg_laplacian(&self.coeffs);
        weighted_inner(self.basis.coeff_weights(), &l, &self.coeffs).re
    }

    /// `∫ |u|^s dV` by grid quadrature.
    pub fn power_integral(&self, s: f64) -> f64 {
        let g = self.to_grid();
        g.iter().zip(self.basis.grid_weights()).map(|(z, w)| w * z.norm().powf(s)).sum()
    }

    pub fn norms(&self, p: f64) -> Norms {
        let l2sq = self.norm_l2().powi(2);
        let grad = self.dirichlet_energy();
        Norms {
            l2: l2sq.sqrt(),
            h1: (l2sq + grad).max(0.0).sqrt(),
            lp1: self.power_integral(p + 1.0).powf(1.0 / (p + 1.0)),
        }
    }

    /// Dealiased projection of `|u|^{p-1} u`.
    pub fn nonlinearity(&self, p: f64) -> Self {
        let g: Vec<C64> = self
            .to_grid()
            .into_iter()
            .map(|z| {
                let a = z.norm();
                if a == 0.0 { z } else { z * a.powf(p - 1.0) }
            })
            .collect();
        Self::from_grid(self.basis.clone(), &g).expect("grid from same basis")
    }

    pub fn scale(&self, a: C64) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * a).collect())
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: C64, other: &Self) -> Self {
        self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + a * y).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Mean value `(u, 1)/vol`.
    pub fn mean(&self) -> C64 {
        let g = self.to_grid();
        let s: C64 = g.iter().zip(self.basis.grid_weights()).map(|(z, w)| z * w).sum();
        s / self.basis.volume()
    }

    pub fn neg_laplacian(&self) -> Self {
        self.with_coeffs(self.basis.neg_laplacian(&self.coeffs))
    }
}

pub(crate) fn weighted_inner(w: &[f64], a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| *w * x * y.conj()).sum()
}

impl Serialize for SpectralField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SpectralField", 2)?;
        st.serialize_field("manifold", &self.basis.spec)?;
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        st.serialize_field("coeffs", &pairs)?;
        st.end()
    }
}

#[cfg(test)]
mod tests;
