//! Constrained minimization on the discrete spaces.
//!
//! Two schemes:
//! - `EnergyMin`: minimize the energy at fixed mass `‖u‖²_{L²} = β`;
//! - `FMin`: minimize the quadratic form at fixed `∫|u|^{p+1} = A`.
//!
//! Each step moves along the Sobolev-preconditioned Riemannian gradient of the
//! constraint surface and retracts by scaling. Objective differences between
//! iterates are evaluated directly so the Armijo test stays meaningful down to
//! round-off.

mod engine;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, ManifoldSpec, SpectralField};
use crate::operators::KillingSpec;
use crate::{Error, Result, C64};

pub use engine::Functional;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Nls,
    Nlkg,
    TwoNonlinearity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Constraint {
    /// `‖u‖²_{L²} = beta`.
    Mass { beta: f64 },
    /// `∫|u|^{p+1} = a` (`q+1` for two nonlinearities).
    LpPlusOne { a: f64 },
}

impl Constraint {
    pub fn level(&self) -> f64 {
        match *self {
            Self::Mass { beta } => beta,
            Self::LpPlusOne { a } => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EnergyMin,
    FMin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub objective_rtol: f64,
    pub gradient_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub backtrack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { objective_rtol: 1e-10, gradient_tol: 1e-8, max_iter: 20_000, armijo: 1e-4, backtrack: 0.5 }
    }
}

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub equation: Equation,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "one")]
    pub m_mass: f64,
    pub p: f64,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "one")]
    pub k_coupling: f64,
    pub constraint: Constraint,
    pub scheme: Scheme,
    #[serde(default)]
    pub subspace_mu: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "three")]
    pub n_random_starts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Keep iterates real-valued on the grid.
    #[serde(default)]
    pub real_only: bool,
}

impl ProblemSpec {
    pub fn new(equation: Equation, p: f64, constraint: Constraint, scheme: Scheme) -> Self {
        Self {
            equation,
            lambda: 0.0,
            m_mass: 1.0,
            p,
            q: None,
            k_coupling: 1.0,
            constraint,
            scheme,
            subspace_mu: None,
            tolerances: Tolerances::default(),
            n_random_starts: 3,
            seed: 0,
            real_only: false,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_mass(mut self, m: f64) -> Self {
        self.m_mass = m;
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k_coupling = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Power of the constrained integral.
    pub fn constraint_power(&self) -> f64 {
        match self.equation {
            Equation::TwoNonlinearity => self.q.unwrap_or(self.p),
            _ => self.p,
        }
    }

    /// Checks parameter ranges that do not depend on the manifold's operators.
    pub fn validate(&self, n: usize) -> Result<()> {
        let p = self.p;
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Config(format!("p must exceed 1 (got {p})")));
        }
        if !(self.constraint.level() > 0.0) {
            return Err(Error::Config(format!("constraint level must be positive (got {})", self.constraint.level())));
        }
        let critical = if n >= 3 { (n as f64 + 2.0) / (n as f64 - 2.0) } else { f64::INFINITY };
        match (self.equation, self.scheme, self.constraint) {
            (Equation::TwoNonlinearity, Scheme::FMin, Constraint::LpPlusOne { .. }) => {
                let q = self.q.ok_or_else(|| Error::Config("two nonlinearities need q".into()))?;
                if !(q > p) {
                    return Err(Error::Config(format!("need q > p (got p = {p}, q = {q})")));
                }
                if p >= critical {
                    return Err(Error::Config(format!("p = {p} must be below (n+2)/(n-2) = {critical}")));
                }
            }
            (Equation::TwoNonlinearity, ..) => {
                return Err(Error::Config("two nonlinearities use scheme f_min with an lp_plus_one constraint".into()))
            }
            (_, Scheme::EnergyMin, Constraint::Mass { .. }) => {
                let bound = 1.0 + 4.0 / n as f64;
                if p > bound {
                    return Err(Error::Config(format!("energy minimization needs p <= 1 + 4/n = {bound} (got {p})")));
                }
            }
            (_, Scheme::FMin, Constraint::LpPlusOne { .. }) => {
                if p >= critical {
                    return Err(Error::Config(format!("p = {p} must be below (n+2)/(n-2) = {critical}")));
                }
            }
            (_, s, c) => {
                return Err(Error::Config(format!("scheme {s:?} cannot be paired with constraint {c:?}")));
            }
        }
        if self.equation != Equation::TwoNonlinearity && !(self.k_coupling > 0.0) {
            return Err(Error::Config(format!("K must be positive (got {})", self.k_coupling)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Constant,
    StandingOnly,
    Travelling,
}

/// Summary of one multistart run.
#[derive(Clone, Debug, Serialize)]
pub struct StartSummary {
    pub label: String,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub x_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeResult {
    pub u: SpectralField,
    pub objective: f64,
    /// `λ` (EnergyMin, NLS), effective `m² - λ²` (EnergyMin, NLKG), `K`
    /// (FMin) or the coefficient of `|u|^{q-1}u` (two nonlinearities).
    pub multiplier: f64,
    pub multiplier_imag: f64,
    pub residual: f64,
    pub x_norm: f64,
    pub classification: Classification,
    pub iterations: usize,
    pub converged: bool,
    pub descent_log: Vec<f64>,
    pub constraint_defect: f64,
    pub starts: Vec<StartSummary>,
    pub problem: ProblemSpec,
    pub manifold: ManifoldSpec,
    pub killing: KillingSpec,
}

/// Minimizes over the configured constraint surface, starting from the
/// admissible constant (when it exists) or a bump at the origin (radial
/// grids), `n_random_starts` seeded random fields and the supplied `inits`;
/// returns the lowest converged run.
pub fn minimize(
    problem: &ProblemSpec,
    basis: &Arc<Basis>,
    x: &KillingSpec,
    inits: &[SpectralField],
) -> Result<MinimizeResult> {
    let fun = Functional::new(problem, basis, x)?;
    fun.check_regime()?;
    let mut starts: Vec<(String, SpectralField)> = Vec::new();
    if let Some(c) = basis.constant(C64::new(1.0, 0.0)) {
        let f = SpectralField::new(basis.clone(), c)?;
        if fun.admissible(&f) {
            starts.push(("constant".into(), f));
        }
    } else if let Some(rb) = basis.radial() {
        starts.push(("origin-bump".into(), SpectralField::new(basis.clone(), rb.origin_bump())?));
    }
    for i in 0..problem.n_random_starts {
        starts.push((format!("random-{i}"), SpectralField::random(basis.clone(), problem.seed, i as u64)));
    }
    for (i, f) in inits.iter().enumerate() {
        if f.basis().spec() != basis.spec() {
            return Err(Error::BasisMismatch);
        }
        starts.push((format!("init-{i}"), f.clone()));
    }
    let mut runs = Vec::new();
    for (label, f) in starts {
        if let Some(run) = fun.descend(f)? {
            runs.push((label, run));
        }
    }
    if runs.is_empty() {
        return Err(Error::Degenerate("every start vanishes on the admissible subspace".into()));
    }
    let summaries: Vec<StartSummary> = runs
        .iter()
        .map(|(label, r)| StartSummary {
            label: label.clone(),
            objective: r.objective,
            iterations: r.iterations,
            converged: r.converged,
            x_norm: r.x_norm,
        })
        .collect();
    let any_converged = runs.iter().any(|(_, r)| r.converged);
    let mut best: Option<usize> = None;
    for (i, (_, r)) in runs.iter().enumerate() {
        if any_converged && !r.converged {
            continue;
        }
        best = Some(match best {
            None => i,
            Some(b) => {
                let rb = &runs[b].1;
                let tie = (r.objective - rb.objective).abs() <= 1e-12 * rb.objective.abs().max(1.0);
                if (tie && r.x_norm > rb.x_norm) || (!tie && r.objective < rb.objective) {
                    i
                } else {
                    b
                }
            }
        });
    }
    let (_, run) = runs.swap_remove(best.expect("at least one run"));
    let result = fun.finish(run, summaries)?;
    if any_converged {
        Ok(result)
    } else {
        Err(Error::NonConverged(alloc::boxed::Box::new(result)))
    }
}

/// Multiplier making `u` a solution of the auxiliary equation; also returns the
/// imaginary part of the underlying pairing quotient.
pub fn recover_multiplier(u: &SpectralField, problem: &ProblemSpec, x: &KillingSpec) -> Result<(f64, f64)> {
    Functional::new(problem, u.basis(), x)?.multiplier(u)
}

/// Relative `L²` residual `‖L u - N(u)‖ / (‖L u‖ + ‖N(u)‖)` of the auxiliary
/// equation with the given multiplier.
pub fn verify_pde(u: &SpectralField, problem: &ProblemSpec, x: &KillingSpec, multiplier: f64) -> Result<f64> {
    Functional::new(problem, u.basis(), x)?.residual(u, multiplier)
}

/// Constant, standing (`Xu = 0`) or travelling (`Xu ≠ 0`).
pub fn classify(u: &SpectralField, x: &KillingSpec) -> Result<Classification> {
    let mean = u.mean();
    let g = u.to_grid();
    let dev: f64 = g.iter().zip(u.basis().grid_weights()).map(|(z, w)| w * (z - mean).norm_sqr()).sum::<f64>().sqrt();
    let norm = u.norm_l2();
    if dev < 1e-8 * norm {
        return Ok(Classification::Constant);
    }
    let xu = crate::operators::apply_killing(u, x)?.norm_l2();
    Ok(if xu > 1e-6 * u.norms(1.0).h1 { Classification::Travelling } else { Classification::StandingOnly })
}

/// Result of a `V_μ`-restricted minimization.
#[derive(Clone, Debug, Serialize)]
pub struct VmuReport {
    pub result: MinimizeResult,
    pub mu: f64,
    pub subspace_dim: usize,
    /// `max ‖Xu - iμu‖ / ‖u‖` at exit.
    pub eigen_defect: f64,
    /// Relative defect of `E(u) = E^#_μ(u) + shift·‖u‖²` at exit.
    pub identity_defect: f64,
    /// Relative defect of the same identity with the shift `-(μ+λ)²/2`.
    pub alternative_identity_defect: f64,
}

/// `E^#_μ(u) = ½‖∇u‖² - K/(p+1) ∫|u|^{p+1}`.
pub fn reduced_energy(u: &SpectralField, p: f64, k: f64) -> f64 {
    0.5 * u.dirichlet_energy() - k / (p + 1.0) * u.power_integral(p + 1.0)
}

/// Coefficient `s` with `E(u) = E^#_μ(u) + s‖u‖²` on `V_μ`.
pub fn vmu_shift(problem: &ProblemSpec, mu: f64) -> f64 {
    let l = problem.lambda;
    match problem.equation {
        Equation::Nls => 0.5 * mu,
        _ => -0.5 * ((mu + l) * (mu + l) - l * l),
    }
}

/// Minimization restricted to `V_μ = {u : Xu = iμu}`.
pub fn minimize_in_vmu(problem: &ProblemSpec, basis: &Arc<Basis>, x: &KillingSpec, mu: f64) -> Result<VmuReport> {
    if problem.scheme != Scheme::EnergyMin || problem.equation == Equation::TwoNonlinearity {
        return Err(Error::Config("V_mu restriction is implemented for the energy scheme".into()));
    }
    let mut pr = problem.clone();
    pr.subspace_mu = Some(mu);
    let fun = Functional::new(&pr, basis, x)?;
    let subspace_dim = fun.mask().map(|m| m.iter().filter(|b| **b).count()).unwrap_or(0);
    let result = minimize(&pr, basis, x, &[])?;
    let u = &result.u;
    let xu = crate::operators::apply_killing(u, x)?;
    let eigen_defect = xu.axpy(C64::new(0.0, -mu), u).norm_l2() / u.norm_l2();
    let e = match pr.equation {
        Equation::Nls => crate::operators::energy_nls(u, x, pr.p, pr.k_coupling)?,
        _ => crate::operators::energy_nlkg(u, x, pr.lambda, pr.p, pr.k_coupling)?,
    };
    let sharp = reduced_energy(u, pr.p, pr.k_coupling);
    let mass = u.norm_l2().powi(2);
    let scale = e.abs().max(sharp.abs()).max(f64::MIN_POSITIVE);
    let identity_defect = (e - sharp - vmu_shift(&pr, mu) * mass).abs() / scale;
    let alternative_identity_defect = (e - sharp + 0.5 * (mu + pr.lambda).powi(2) * mass).abs() / scale;
    Ok(VmuReport { result, mu, subspace_dim, eigen_defect, identity_defect, alternative_identity_defect })
}
