//! Numerical experiments built on the solver: metric-scaling sweeps and
//! symmetry breaking, the trivial constant solution, Gagliardo–Nirenberg
//! scans, anisotropic and mass-preserving scaling laws on a plane surrogate,
//! Killing-field perturbations and the two-nonlinearity problem.

mod gn;
mod perturb;
mod plane;
mod scaling;
mod two;

pub use gn::{chain_defect, gn_gate, gn_ratio, gn_scan, GNReport, GnGate, GnSample};
pub use perturb::{align, perturbation_study, BoundRow, PerturbationReport, PerturbedMinimizer};
pub use plane::{
    anisotropic_identities, grid_for, measure, negative_energy_construction, AnisotropicReport, GaussianBump, GradedAxis, LawCheck,
    Measures, NegativeEnergyOptions, NegativeEnergyReport, NegativeEnergyStep, PlaneGrid, PlaneOptions,
    ROUNDOFF_FLOOR,
};
pub use scaling::{
    assemble_sweep, scaled_manifold, scaling_sweep, sweep_point, tail_slope, trivial_constant,
    trivial_constant_residual, ScalingSweepResult, SweepPoint,
};
pub use two::{exponent_ratio, interpolation_theta, two_nonlinearity_minimize, TwoNonlinearityReport};

#[cfg(test)]
mod tests;
