//! Laplacian, Killing fields, quadratic forms, energies and spectra.
//!
//! Sign convention: every API exposes the positive operator `-Δ`.

mod forms;
mod harmonic;
mod killing;
mod spectrum;

pub use forms::{energy_nlkg, energy_nls, form_f_nlkg, form_f_nls, gradient};
pub use harmonic::{
    binomial, build_harmonic_rep, check_l_alpha_semidefinite, harmonic_dimension, l_alpha_from_reps,
    monomial_integral, phase_aligned_distance, predicted_min, unit_sphere_area, x_eigenstructure,
    HarmonicSpaceRep, LAlphaReport, LAlphaRow, XEigenReport,
};
pub use killing::{apply_killing, apply_laplacian, commutator_defect, KillingSpec};
pub use spectrum::{coercivity_check, Regime, SpectrumReport};
