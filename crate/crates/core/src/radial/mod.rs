//! Radially symmetric noncompact manifolds `N × [0, ∞)` with volume density
//! `A(r)`: vanish-at-infinity criteria for `A`, radial minimizers with a
//! domain-doubling check, the technical assumption `I_β < -(m² - λ²)β/2`,
//! strict subadditivity of `I_β`, the concentration–compactness classifier
//! and the Lipschitz splitting cutoffs.
//!
//! Fields are node values on the radial grid with a Dirichlet condition at
//! `r_max`. Cross-section Killing fields act trivially on them.

mod cc;
mod cutoff;
mod solve;
mod vanish;

pub use cc::{
    archetype, archetype_suite, cc_classify, default_radii, Archetype, ArchetypeSequence, CCReport, CcOptions,
    ConcentrationWitness, SplittingWitness, SuiteEntry, Verdict, Window,
};
pub use cutoff::{splitting_cutoffs, SplitCutoffs};
pub use solve::{
    estimate_i_beta, extend_by_zero, lemma_l1_check, minimize_radial, radial_dilation_scan, technical_assumption,
    InequalityRow, LemmaReport, RadialMinimizeReport, TechnicalAssumptionReport, DOMAIN_TOLERANCE, LEMMA_MARGIN,
};
pub use vanish::{check_vanish_criteria, GrowthTest, IntegralTest, VanishCriteria};

#[cfg(test)]
mod tests;
