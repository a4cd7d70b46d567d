//! Spectral constrained minimization for travelling-wave profiles of the
//! nonlinear Schrödinger and Klein–Gordon equations.
//!
//! A travelling wave `v(t, x) = e^{iλt} u(g(t)x)`, where `g(t)` is the flow of a
//! Killing field `X`, reduces the time-dependent equation to a stationary
//! problem for `u`. This crate discretizes `u` on flat tori (Fourier), on
//! `S²`/`S³` (spherical harmonics) and on radially symmetric noncompact
//! manifolds `N × [0, ∞)` (weighted collocation), and computes constrained
//! minimizers of the associated quadratic forms and energies.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and the
//! command-line driver live in the `tw-cli` crate.
//!
//! Module map:
//! - [`basis`]: discrete function spaces, transforms, inner products, norms.
//! - [`operators`]: Laplacian, Killing fields, quadratic forms, energies,
//!   spectra, and the harmonic-polynomial representation on `V_k`.
//! - [`minimizer`]: projected-gradient constrained minimization, multiplier
//!   recovery, PDE residuals, classification, `V_μ`-restricted runs.
//! - [`experiments`]: metric-scaling sweeps, Gagliardo–Nirenberg scans,
//!   anisotropic scaling laws, Killing perturbations, two nonlinearities,
//!   negative-energy construction.
//! - [`radial`]: vanish-at-infinity criteria, radial minimizers, the
//!   concentration–compactness classifier, Lipschitz splitting cutoffs and
//!   strict subadditivity checks.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::wrong_self_convention)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod linalg;
pub mod minimizer;
pub mod operators;
pub mod quadrature;
pub mod radial;
pub mod rng;

pub use error::{Error, Result};

/// Complex double used for every field coefficient.
pub type C64 = num_complex::Complex64;
