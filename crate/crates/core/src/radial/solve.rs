use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use super::vanish::check_vanish_criteria;
use crate::basis::{Basis, ManifoldSpec, RadialSpec, SpectralField};
use crate::minimizer::{minimize, Constraint, Functional, MinimizeResult, ProblemSpec, Scheme};
use crate::operators::KillingSpec;
use crate::{Error, Result, C64};

/// Largest relative change of the objective under `r_max → 2 r_max` accepted
/// as converged in the domain.
pub const DOMAIN_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct RadialMinimizeReport {
    pub result: MinimizeResult,
    /// Objective of the same problem on `[0, 2 r_max]`.
    pub doubled_objective: f64,
    pub relative_change: f64,
    /// `X` has zero symbol on radial fields, so the `X²` and `iX` terms vanish.
    pub x_acts_trivially: bool,
    pub warnings: Vec<String>,
}

fn best(r: Result<MinimizeResult>) -> Result<MinimizeResult> {
    match r {
        Err(Error::NonConverged(r)) => Ok(*r),
        other => other,
    }
}

fn radial_basis(spec: &RadialSpec) -> Result<Arc<Basis>> {
    Basis::new(ManifoldSpec::Radial(spec.clone()))
}

/// `u` on a larger radial grid with the same step, extended by zero.
pub fn extend_by_zero(u: &SpectralField, target: &Arc<Basis>) -> Result<SpectralField> {
    let n = target.grid_len();
    if u.coeffs().len() > n {
        return Err(Error::Config("target grid is smaller than the field's".into()));
    }
    let mut c = u.coeffs().to_vec();
    c.resize(n, C64::new(0.0, 0.0));
    SpectralField::new(target.clone(), c)
}

/// Minimizes over radial fields on `[0, r_max]` and again on `[0, 2 r_max]`
/// (warm-started from the zero extension); fails with `IncreaseDomain` when the
/// objective moves by more than [`DOMAIN_TOLERANCE`].
pub fn minimize_radial(problem: &ProblemSpec, spec: &RadialSpec, x: &KillingSpec) -> Result<RadialMinimizeReport> {
    let mspec = ManifoldSpec::Radial(spec.clone());
    let b = x.speed_bound(&mspec);
    if !(b < 1.0) {
        return Err(Error::ParameterRegime(format!("radial minimization needs sup|X| < 1, got {b}")));
    }
    let mut warnings = Vec::new();
    match check_vanish_criteria(spec) {
        Ok(c) if c.inconclusive() => {
            warnings.push("neither vanish-at-infinity criterion holds for A(r)".into())
        }
        Ok(c) if c.below_lower_bound => warnings.push(format!("A dips to {} below the assumed lower bound", c.a_min)),
        Ok(_) => {}
        Err(e) => warnings.push(format!("vanish criteria not evaluated: {e}")),
    }
    let basis = radial_basis(spec)?;
    let x_acts_trivially = x.symbol(&basis)?.iter().all(|s| *s == 0.0);
    let result = best(minimize(problem, &basis, x, &[]))?;
    if !result.converged {
        return Err(Error::NonConverged(alloc::boxed::Box::new(result)));
    }
    let big = radial_basis(&spec.doubled())?;
    let warm = extend_by_zero(&result.u, &big)?;
    let doubled = best(minimize(problem, &big, x, &[warm]))?;
    let relative_change = (result.objective - doubled.objective).abs() / result.objective.abs().max(f64::MIN_POSITIVE);
    if relative_change > DOMAIN_TOLERANCE {
        return Err(Error::IncreaseDomain { relative_change });
    }
    Ok(RadialMinimizeReport {
        doubled_objective: doubled.objective,
        relative_change,
        x_acts_trivially,
        warnings,
        result,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TechnicalAssumptionReport {
    pub beta: f64,
    /// `-(m² - λ²) β / 2`.
    pub threshold: f64,
    /// Lowest energy found at mass `β`.
    pub i_beta_est: f64,
    /// `threshold - i_beta_est`; positive when the inequality holds.
    pub margin: f64,
    pub holds: bool,
    pub minimizer_energy: Option<f64>,
    /// Lowest energy among the mass-preserving dilations of a Gaussian, when
    /// the minimizer alone did not settle the inequality.
    pub construction_energy: Option<f64>,
    pub construction_scale: Option<f64>,
}

/// Energy of `s·g(s^{2/n} r)`, `g` a Gaussian with `‖g‖² = β`, for
/// `s = 2^{j/4}` over the widths the grid resolves; returns the lowest value
/// and its `s`.
pub fn radial_dilation_scan(fun: &Functional, basis: &Arc<Basis>, beta: f64) -> Result<(f64, f64)> {
    let rb = basis.radial().ok_or_else(|| Error::Config("dilation scan needs a radial basis".into()))?;
    let alpha = 2.0 / basis.dim() as f64;
    let r_max = rb.nodes.last().copied().unwrap_or(0.0) + rb.h;
    let mut best: Option<(f64, f64)> = None;
    for j in -160..=160 {
        let s = 2f64.powf(j as f64 / 4.0);
        let w = s.powf(-alpha);
        if w < 8.0 * rb.h || w > r_max / 8.0 {
            continue;
        }
        let g: Vec<C64> = rb.nodes.iter().map(|r| C64::new((-(r / w).powi(2)).exp(), 0.0)).collect();
        let u = SpectralField::from_grid(basis.clone(), &g)?;
        let u = u.scale(C64::new((beta / u.norm_l2().powi(2)).sqrt(), 0.0));
        let e = fun.value(&u);
        if best.is_none_or(|(b, _)| e < b) {
            best = Some((e, s));
        }
    }
    best.ok_or_else(|| Error::GridTooCoarse("no dilation width between 8h and r_max/8".into()))
}

/// Tests `I_β < -(m² - λ²) β / 2` on the best energy found at mass `β`: the
/// constrained minimizer first, then the dilation construction.
pub fn technical_assumption(problem: &ProblemSpec, spec: &RadialSpec, x: &KillingSpec) -> Result<TechnicalAssumptionReport> {
    let beta = match (problem.scheme, problem.constraint) {
        (Scheme::EnergyMin, Constraint::Mass { beta }) => beta,
        _ => return Err(Error::Config("the technical assumption concerns energy minimization at fixed mass".into())),
    };
    let (m, l) = (problem.m_mass, problem.lambda);
    let threshold = -(m * m - l * l) * beta / 2.0;
    let basis = radial_basis(spec)?;
    let minimizer_energy = best(minimize(problem, &basis, x, &[])).ok().map(|r| r.objective);
    let mut est = minimizer_energy.unwrap_or(f64::INFINITY);
    let (mut construction_energy, mut construction_scale) = (None, None);
    if !(est < threshold) {
        let fun = Functional::new(problem, &basis, x)?;
        let (e, s) = radial_dilation_scan(&fun, &basis, beta)?;
        construction_energy = Some(e);
        construction_scale = Some(s);
        est = est.min(e);
    }
    Ok(TechnicalAssumptionReport {
        beta,
        threshold,
        i_beta_est: est,
        margin: threshold - est,
        holds: est < threshold,
        minimizer_energy,
        construction_energy,
        construction_scale,
    })
}

/// `I_β` estimates for each `β` under one discretization: the lower of the
/// constrained minimizer and the dilation construction.
pub fn estimate_i_beta(problem: &ProblemSpec, spec: &RadialSpec, x: &KillingSpec, betas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let basis = radial_basis(spec)?;
    betas
        .iter()
        .map(|&beta| {
            let mut pr = problem.clone();
            pr.constraint = Constraint::Mass { beta };
            if pr.scheme != Scheme::EnergyMin {
                return Err(Error::Config("I_beta estimates use energy minimization".into()));
            }
            let r = best(minimize(&pr, &basis, x, &[]))?;
            let fun = Functional::new(&pr, &basis, x)?;
            let scan = radial_dilation_scan(&fun, &basis, beta).map(|(e, _)| e).unwrap_or(f64::INFINITY);
            Ok((beta, r.objective.min(scan)))
        })
        .collect()
}

/// Margin required of each strict inequality.
pub const LEMMA_MARGIN: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub kind: String,
    pub beta: f64,
    /// `σ` for the scaling inequality, `η` for subadditivity.
    pub parameter: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    /// `β` values whose estimate fails `I_β < -(m² - λ²) β / 2`.
    pub hypothesis_failures: Vec<f64>,
    pub rows: Vec<InequalityRow>,
    pub failures: usize,
    pub all_hold: bool,
}

fn lookup(values: &[(f64, f64)], beta: f64) -> Option<f64> {
    values.iter().find(|(b, _)| (b - beta).abs() <= 1e-12 * beta.abs().max(1.0)).map(|(_, i)| *i)
}

/// Checks `I_{σβ} < σ I_β` and `I_β < I_{β-η} + I_η` on the estimates, each
/// with margin [`LEMMA_MARGIN`]. Failures are reported, not resolved: the
/// estimates only bound the infima from above.
pub fn lemma_l1_check(values: &[(f64, f64)], m_mass: f64, lambda: f64, sigma: f64) -> Result<LemmaReport> {
    if !(sigma > 1.0) {
        return Err(Error::Config(format!("sigma must exceed 1 (got {sigma}); sigma = 1 is the equality case")));
    }
    let shift = m_mass * m_mass - lambda * lambda;
    let hypothesis_failures: Vec<f64> =
        values.iter().filter(|(b, i)| !(*i < -shift * b / 2.0)).map(|(b, _)| *b).collect();
    let mut rows = Vec::new();
    let mut missing = vec![];
    for &(beta, i_beta) in values {
        match lookup(values, sigma * beta) {
            Some(i_s) => rows.push(InequalityRow {
                kind: "scaling".into(),
                beta,
                parameter: sigma,
                lhs: i_s,
                rhs: sigma * i_beta,
                holds: i_s < sigma * i_beta - LEMMA_MARGIN,
            }),
            None => missing.push(sigma * beta),
        }
        for &(eta, i_eta) in values {
            if !(eta < beta) {
                continue;
            }
            if let Some(i_rest) = lookup(values, beta - eta) {
                rows.push(InequalityRow {
                    kind: "subadditivity".into(),
                    beta,
                    parameter: eta,
                    lhs: i_beta,
                    rhs: i_rest + i_eta,
                    holds: i_beta < i_rest + i_eta - LEMMA_MARGIN,
                });
            }
        }
    }
    if !rows.iter().any(|r| r.kind == "scaling") {
        return Err(Error::MissingEntry(format!("no I estimate at sigma*beta for any beta; wanted {missing:?}")));
    }
    let failures = rows.iter().filter(|r| !r.holds).count();
    Ok(LemmaReport { hypothesis_failures, failures, all_hold: failures == 0, rows })
}
