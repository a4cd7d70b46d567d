use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::format;

use serde::Serialize;

use crate::basis::Basis;
use crate::minimizer::{minimize, Constraint, Equation, MinimizeResult, ProblemSpec, Scheme};
use crate::operators::KillingSpec;
use crate::{Error, Result};

/// Interpolation exponent with `1/(p+1) = (1-θ)/2 + θ/(q+1)`:
/// `θ = (p-1)(q+1) / ((q-1)(p+1))`.
pub fn interpolation_theta(p: f64, q: f64) -> f64 {
    (p - 1.0) * (q + 1.0) / ((q - 1.0) * (p + 1.0))
}

/// `2(q-p)/(q-1)`, below 2 whenever `p > 1`.
pub fn exponent_ratio(p: f64, q: f64) -> f64 {
    2.0 * (q - p) / (q - 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoNonlinearityReport {
    pub result: MinimizeResult,
    pub theta: f64,
    pub exponent_ratio: f64,
    pub exponent_below_two: bool,
    pub warnings: Vec<String>,
}

/// Minimizes `‖∇u‖² + λ‖u‖² - 2/(p+1) ∫|u|^{p+1}` at `∫|u|^{q+1} = β`; the
/// multiplier is the coefficient of `|u|^{q-1}u`. A nonzero Killing field is
/// ignored with a warning.
#[allow(clippy::too_many_arguments)]
pub fn two_nonlinearity_minimize(
    basis: &Arc<Basis>,
    x: &KillingSpec,
    lambda: f64,
    p: f64,
    q: f64,
    beta: f64,
    n_random_starts: usize,
    seed: u64,
) -> Result<TwoNonlinearityReport> {
    let mut warnings = Vec::new();
    if *x != KillingSpec::Zero {
        warnings.push(format!("Killing field {x:?} ignored: the two-nonlinearity problem has no transport term"));
    }
    let mut problem = ProblemSpec::new(Equation::TwoNonlinearity, p, Constraint::LpPlusOne { a: beta }, Scheme::FMin)
        .with_lambda(lambda)
        .with_q(q)
        .with_seed(seed);
    problem.n_random_starts = n_random_starts;
    let result = match minimize(&problem, basis, &KillingSpec::Zero, &[]) {
        Ok(r) => r,
        Err(Error::NonConverged(r)) => {
            warnings.push(String::from("no start converged; reporting the best iterate"));
            *r
        }
        Err(e) => return Err(e),
    };
    let ratio = exponent_ratio(p, q);
    Ok(TwoNonlinearityReport {
        result,
        theta: interpolation_theta(p, q),
        exponent_ratio: ratio,
        exponent_below_two: ratio < 2.0,
        warnings,
    })
}
