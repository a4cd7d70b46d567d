use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::basis::{Basis, ManifoldSpec, SpectralField, SphereSpec, TorusSpec};
use crate::minimizer::{
    minimize, verify_pde, Classification, Constraint, Equation, MinimizeResult, ProblemSpec, Scheme,
};
use crate::operators::{form_f_nlkg, KillingSpec};
use crate::{Error, Result, C64};

/// One scale of a metric-scaling sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub scale: f64,
    pub volume: f64,
    /// `m² A^{2/(p+1)} V^{(p-1)/(p+1)}`: value of the form at the constant
    /// satisfying the constraint.
    pub constant_branch: f64,
    /// The same value from the assembled functional.
    pub constant_assembled: f64,
    /// `m² A^{1/(p+1)} V^{p/(p+1)}`, the expression printed with the
    /// scaling argument.
    pub printed_branch: f64,
    pub minimized: f64,
    pub x_norm: f64,
    pub classification: Classification,
    pub converged: bool,
    pub residual: f64,
    /// `minimized < constant_branch - 1e-8·|constant_branch|` with a
    /// nonconstant minimizer.
    pub breaks_symmetry: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingSweepResult {
    pub scales: Vec<f64>,
    pub constant_branch: Vec<f64>,
    pub constant_assembled: Vec<f64>,
    pub printed_branch: Vec<f64>,
    pub minimized: Vec<f64>,
    pub x_norms: Vec<f64>,
    pub classification: Vec<Classification>,
    pub converged: Vec<bool>,
    /// Smallest scale with a symmetry-breaking minimizer.
    pub breaking_scale: Option<f64>,
    /// Largest relative gap between closed form and assembled functional.
    pub closed_form_defect: f64,
    /// Fitted log-log slope of `constant_branch`, and its exact value
    /// `n(p-1)/(p+1)`.
    pub slope: f64,
    pub expected_slope: f64,
    /// Fitted slope of `printed_branch`, and `np/(p+1)`.
    pub printed_slope: f64,
    pub printed_expected_slope: f64,
    pub all_converged: bool,
}

/// Manifold at `scale`: a torus of period `scale` (grid density kept per unit
/// length, rounded up to a power of two) or a sphere of radius `scale`.
pub fn scaled_manifold(base: &ManifoldSpec, scale: f64) -> Result<ManifoldSpec> {
    if !(scale > 0.0) {
        return Err(Error::Config(format!("scale must be positive, got {scale}")));
    }
    match base {
        ManifoldSpec::Torus(t) => {
            let points = ((t.grid_points as f64 * scale / t.period).ceil() as usize).next_power_of_two();
            Ok(ManifoldSpec::Torus(TorusSpec { period: scale, grid_points: points.max(t.grid_points), ..t.clone() }))
        }
        ManifoldSpec::Sphere(s) => Ok(ManifoldSpec::Sphere(SphereSpec { metric_scale: scale * scale, ..s.clone() })),
        ManifoldSpec::Radial(_) => Err(Error::Config("metric scaling needs a compact manifold".into())),
    }
}

/// `Vol(M)` from the closed forms.
fn closed_volume(spec: &ManifoldSpec) -> f64 {
    match spec {
        ManifoldSpec::Torus(t) => t.volume(),
        ManifoldSpec::Sphere(s) => s.unit_volume() * s.metric_scale.powf(s.n as f64 / 2.0),
        ManifoldSpec::Radial(_) => f64::NAN,
    }
}

/// `X` rescaled so that `sup|X|` is the same on the scaled manifold.
fn scaled_killing(x: &KillingSpec, base: &ManifoldSpec, spec: &ManifoldSpec) -> KillingSpec {
    let b0 = x.speed_bound(base);
    let b1 = x.speed_bound(spec);
    if b1 > 0.0 && b0.is_finite() {
        x.scaled(b0 / b1)
    } else {
        x.clone()
    }
}

/// Evaluates one scale of the sweep: constant branch in closed form and through
/// the assembled functional, then an `F`-minimization with `∫|u|^{p+1} = A`
/// at `λ = 0`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_point(
    base: &ManifoldSpec,
    x: &KillingSpec,
    m_mass: f64,
    p: f64,
    a: f64,
    scale: f64,
    seed: u64,
    n_random_starts: usize,
) -> Result<SweepPoint> {
    let b = x.speed_bound(base);
    if !(b < 1.0) {
        return Err(Error::ParameterRegime(format!("the scaling sweep needs sup|X| < 1, got {b}")));
    }
    if !(a > 0.0) || !(p > 1.0) {
        return Err(Error::Config(format!("need A > 0 and p > 1 (got A = {a}, p = {p})")));
    }
    let spec = scaled_manifold(base, scale)?;
    let xs = scaled_killing(x, base, &spec);
    let basis = Basis::new(spec.clone())?;
    let volume = closed_volume(&spec);
    let m2 = m_mass * m_mass;
    let constant_branch = m2 * a.powf(2.0 / (p + 1.0)) * volume.powf((p - 1.0) / (p + 1.0));
    let printed_branch = m2 * a.powf(1.0 / (p + 1.0)) * volume.powf(p / (p + 1.0));
    let c = (a / volume).powf(1.0 / (p + 1.0));
    let u = SpectralField::constant(basis.clone(), C64::new(c, 0.0))?;
    let constant_assembled = form_f_nlkg(&u, &xs, 0.0, m_mass)?;

    let mut problem = ProblemSpec::new(Equation::Nlkg, p, Constraint::LpPlusOne { a }, Scheme::FMin)
        .with_mass(m_mass)
        .with_seed(seed);
    problem.n_random_starts = n_random_starts;
    let r = run(&problem, &basis, &xs)?;
    let breaks_symmetry = r.objective < constant_branch - 1e-8 * constant_branch.abs()
        && r.classification != Classification::Constant;
    Ok(SweepPoint {
        scale,
        volume,
        constant_branch,
        constant_assembled,
        printed_branch,
        minimized: r.objective,
        x_norm: r.x_norm,
        classification: r.classification,
        converged: r.converged,
        residual: r.residual,
        breaks_symmetry,
    })
}

fn run(problem: &ProblemSpec, basis: &Arc<Basis>, x: &KillingSpec) -> Result<MinimizeResult> {
    match minimize(problem, basis, x, &[]) {
        Ok(r) => Ok(r),
        Err(Error::NonConverged(r)) => Ok(*r),
        Err(e) => Err(e),
    }
}

/// Collects sweep points (in the given order) into a result.
pub fn assemble_sweep(points: &[SweepPoint], n: usize, p: f64) -> ScalingSweepResult {
    let col = |f: fn(&SweepPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let scales = col(|q| q.scale);
    let constant_branch = col(|q| q.constant_branch);
    let printed_branch = col(|q| q.printed_branch);
    let closed_form_defect = points
        .iter()
        .map(|q| (q.constant_assembled - q.constant_branch).abs() / q.constant_branch.abs())
        .fold(0.0, f64::max);
    let breaking_scale = points.iter().filter(|q| q.breaks_symmetry).map(|q| q.scale).reduce(f64::min);
    let nf = n as f64;
    ScalingSweepResult {
        slope: tail_slope(&scales, &constant_branch),
        expected_slope: nf * (p - 1.0) / (p + 1.0),
        printed_slope: tail_slope(&scales, &printed_branch),
        printed_expected_slope: nf * p / (p + 1.0),
        constant_assembled: col(|q| q.constant_assembled),
        minimized: col(|q| q.minimized),
        x_norms: col(|q| q.x_norm),
        classification: points.iter().map(|q| q.classification).collect(),
        converged: points.iter().map(|q| q.converged).collect(),
        all_converged: points.iter().all(|q| q.converged),
        scales,
        constant_branch,
        printed_branch,
        breaking_scale,
        closed_form_defect,
    }
}

/// Sequential sweep over `scales`.
#[allow(clippy::too_many_arguments)]
pub fn scaling_sweep(
    base: &ManifoldSpec,
    x: &KillingSpec,
    m_mass: f64,
    p: f64,
    a: f64,
    scales: &[f64],
    seed: u64,
    n_random_starts: usize,
) -> Result<ScalingSweepResult> {
    let points = scales
        .iter()
        .map(|&s| sweep_point(base, x, m_mass, p, a, s, seed, n_random_starts))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_sweep(&points, base.dim(), p))
}

/// Least-squares slope of `log y` against `log x`, skipping the first three
/// points when at least two remain.
pub fn tail_slope(x: &[f64], y: &[f64]) -> f64 {
    let skip = if x.len() >= 5 { 3 } else { 0 };
    let lx: Vec<f64> = x[skip..].iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y[skip..].iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    if lx.len() < 2 {
        return f64::NAN;
    }
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Positive constant solving `(m² - λ²) c = K c^p`:
/// `c = ((m² - λ²)/K)^{1/(p-1)}`.
pub fn trivial_constant(m_mass: f64, lambda: f64, k: f64, p: f64) -> Result<f64> {
    let shift = m_mass * m_mass - lambda * lambda;
    if !(shift > 0.0) {
        return Err(Error::NoPositiveConstant(shift));
    }
    if !(k > 0.0) || !(p > 1.0) {
        return Err(Error::Config(format!("need K > 0 and p > 1 (got K = {k}, p = {p})")));
    }
    Ok((shift / k).powf(1.0 / (p - 1.0)))
}

/// Relative residual of the stationary NLKG equation at the trivial constant.
pub fn trivial_constant_residual(
    basis: &Arc<Basis>,
    x: &KillingSpec,
    m_mass: f64,
    lambda: f64,
    k: f64,
    p: f64,
) -> Result<f64> {
    let c = trivial_constant(m_mass, lambda, k, p)?;
    let u = SpectralField::constant(basis.clone(), C64::new(c, 0.0))?;
    let a = u.power_integral(p + 1.0);
    let problem = ProblemSpec::new(Equation::Nlkg, p, Constraint::LpPlusOne { a }, Scheme::FMin)
        .with_lambda(lambda)
        .with_mass(m_mass);
    verify_pde(&u, &problem, x, k)
}
