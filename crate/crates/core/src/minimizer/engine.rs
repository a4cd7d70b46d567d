use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{classify, Constraint, Equation, MinimizeResult, ProblemSpec, Scheme, StartSummary};
use crate::basis::{weighted_inner, Basis, SpectralField};
use crate::operators::{apply_killing, KillingSpec};
use crate::{Error, Result, C64};

const MAX_BACKTRACKS: usize = 80;

/// Objective, gradient, constraint and retraction of one [`ProblemSpec`] on
/// one basis.
#[derive(Clone, Debug)]
pub struct Functional {
    problem: ProblemSpec,
    basis: Arc<Basis>,
    x: KillingSpec,
    sigma: Vec<f64>,
    /// `L = -Δ + diag(d)` is the linear operator of the quadratic part.
    diag: Vec<f64>,
    mask: Option<Vec<bool>>,
}

pub(super) struct Run {
    pub u: SpectralField,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub descent_log: Vec<f64>,
    pub x_norm: f64,
}

impl Functional {
    pub fn new(problem: &ProblemSpec, basis: &Arc<Basis>, x: &KillingSpec) -> Result<Self> {
        problem.validate(basis.dim())?;
        let sigma = x.symbol(basis)?;
        let (l, m) = (problem.lambda, problem.m_mass);
        let f_min = problem.scheme == Scheme::FMin;
        let diag = sigma
            .iter()
            .map(|&s| match problem.equation {
                Equation::Nls => s + if f_min { l } else { 0.0 },
                Equation::Nlkg => -s * s - 2.0 * l * s + if f_min { m * m - l * l } else { 0.0 },
                Equation::TwoNonlinearity => l,
            })
            .collect();
        let mask = match problem.subspace_mu {
            None => None,
            Some(mu) => {
                let tol = 1e-9 * mu.abs().max(1.0);
                let mask: Vec<bool> = sigma.iter().map(|s| (s - mu).abs() <= tol).collect();
                if !mask.iter().any(|b| *b) {
                    return Err(Error::SubspaceEmpty { mu });
                }
                Some(mask)
            }
        };
        Ok(Self { problem: problem.clone(), basis: basis.clone(), x: x.clone(), sigma, diag, mask })
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn symbol(&self) -> &[f64] {
        &self.sigma
    }

    fn active(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }

    /// Refuses parameter regimes in which the objective is unbounded below or
    /// not coercive.
    pub fn check_regime(&self) -> Result<()> {
        let pr = &self.problem;
        let (l, m) = (pr.lambda, pr.m_mass);
        let lap = self.basis.laplacian_symbol();
        let min_over = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            match lap {
                None => 0.0,
                Some(lap) => (0..lap.len())
                    .filter(|&i| self.active(i))
                    .map(|i| f(lap[i], self.sigma[i]))
                    .fold(f64::INFINITY, f64::min),
            }
        };
        let speed = self.x.speed_bound(self.basis.spec());
        match pr.equation {
            Equation::TwoNonlinearity => Ok(()),
            Equation::Nls => {
                if pr.scheme == Scheme::FMin {
                    let alpha = min_over(&|lap, s| lap + s);
                    if !(l > -alpha) {
                        return Err(Error::ParameterRegime(format!(
                            "F is not coercive: need lambda > -alpha = {} (lambda = {l})",
                            -alpha
                        )));
                    }
                }
                Ok(())
            }
            Equation::Nlkg => {
                if speed > 1.0 + 1e-12 && self.mask.is_none() {
                    return Err(Error::ParameterRegime(format!(
                        "sup|X| = {speed} > 1: -Δ + X² is indefinite and straightforward minimization is not \
                         possible; restrict to V_mu"
                    )));
                }
                if pr.scheme == Scheme::FMin {
                    let beta = min_over(&|lap, s| lap - s * s - 2.0 * l * s);
                    if !(m * m > l * l - beta) {
                        return Err(Error::ParameterRegime(format!(
                            "F is not coercive: need m^2 > lambda^2 - beta(lambda) = {} (m^2 = {})",
                            l * l - beta,
                            m * m
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// `L u`.
    pub fn linear(&self, u: &SpectralField) -> SpectralField {
        let lap = self.basis.neg_laplacian(u.coeffs());
        u.with_coeffs(lap.iter().zip(u.coeffs()).zip(&self.diag).map(|((a, c), d)| a + c * d).collect())
    }

    fn scaled_nonlinear(&self) -> (f64, f64) {
        match (self.problem.equation, self.problem.scheme) {
            (Equation::TwoNonlinearity, _) => (1.0, 2.0 / (self.problem.p + 1.0)),
            (_, Scheme::EnergyMin) => (0.5, self.problem.k_coupling / (self.problem.p + 1.0)),
            (_, Scheme::FMin) => (1.0, 0.0),
        }
    }

    /// Objective value.
    pub fn value(&self, u: &SpectralField) -> f64 {
        let quad = weighted_inner(self.basis.coeff_weights(), self.linear(u).coeffs(), u.coeffs()).re;
        let (a, b) = self.scaled_nonlinear();
        let nl = if b == 0.0 { 0.0 } else { b * u.power_integral(self.problem.p + 1.0) };
        a * quad - nl
    }

    /// `value(c) - value(u)` evaluated without cancellation.
    pub fn difference(&self, u: &SpectralField, c: &SpectralField) -> f64 {
        let d = c.sub(u);
        let sum = c.axpy(C64::new(1.0, 0.0), u);
        let quad = weighted_inner(self.basis.coeff_weights(), self.linear(&d).coeffs(), sum.coeffs()).re;
        let (a, b) = self.scaled_nonlinear();
        if b == 0.0 {
            return a * quad;
        }
        a * quad - b * power_difference(u, c, &d, self.problem.p + 1.0)
    }

    /// `L²` gradient of the objective.
    pub fn gradient(&self, u: &SpectralField) -> SpectralField {
        let lu = self.linear(u);
        match (self.problem.equation, self.problem.scheme) {
            (Equation::TwoNonlinearity, _) => {
                lu.axpy(C64::new(-1.0, 0.0), &u.nonlinearity(self.problem.p)).scale(C64::new(2.0, 0.0))
            }
            (_, Scheme::EnergyMin) => lu.axpy(C64::new(-self.problem.k_coupling, 0.0), &u.nonlinearity(self.problem.p)),
            (_, Scheme::FMin) => lu.scale(C64::new(2.0, 0.0)),
        }
    }

    fn normal(&self, u: &SpectralField) -> SpectralField {
        match self.problem.constraint {
            Constraint::Mass { .. } => u.clone(),
            Constraint::LpPlusOne { .. } => u.nonlinearity(self.problem.constraint_power()),
        }
    }

    /// Current value of the constrained quantity.
    pub fn constraint_value(&self, u: &SpectralField) -> f64 {
        match self.problem.constraint {
            Constraint::Mass { .. } => u.norm_l2().powi(2),
            Constraint::LpPlusOne { .. } => u.power_integral(self.problem.constraint_power() + 1.0),
        }
    }

    /// Scales `u` onto the constraint surface.
    pub fn retract(&self, u: &SpectralField) -> Option<SpectralField> {
        let v = self.constraint_value(u);
        if !(v > 0.0) || !v.is_finite() {
            return None;
        }
        let level = self.problem.constraint.level();
        let s = match self.problem.constraint {
            Constraint::Mass { .. } => (level / v).sqrt(),
            Constraint::LpPlusOne { .. } => (level / v).powf(1.0 / (self.problem.constraint_power() + 1.0)),
        };
        Some(u.scale(C64::new(s, 0.0)))
    }

    /// Restriction to `V_μ` and to real fields, as configured.
    pub fn project(&self, u: &SpectralField) -> SpectralField {
        let mut v = match &self.mask {
            None => u.clone(),
            Some(m) => u.with_coeffs(
                u.coeffs().iter().zip(m).map(|(c, keep)| if *keep { *c } else { C64::new(0.0, 0.0) }).collect(),
            ),
        };
        if self.problem.real_only {
            let g: Vec<C64> = v.to_grid().into_iter().map(|z| C64::new(z.re, 0.0)).collect();
            v = SpectralField::from_grid(self.basis.clone(), &g).expect("grid of this basis");
        }
        v
    }

    pub fn admissible(&self, u: &SpectralField) -> bool {
        self.retract(&self.project(u)).is_some()
    }

    fn preconditioned_norm(&self) -> f64 {
        let hess = match (self.problem.equation, self.problem.scheme) {
            (_, Scheme::EnergyMin) => 1.0,
            _ => 2.0,
        };
        let norm = match self.basis.laplacian_symbol() {
            Some(lap) => (0..lap.len())
                .filter(|&i| self.active(i))
                .map(|i| (lap[i] + self.diag[i]).abs() / (1.0 + lap[i]))
                .fold(0.0, f64::max),
            None => self.diag.iter().fold(1.0f64, |a, d| a.max(d.abs())),
        };
        hess * norm.max(1e-3)
    }

    pub(super) fn descend(&self, start: SpectralField) -> Result<Option<Run>> {
        let tol = self.problem.tolerances;
        let Some(mut u) = self.retract(&self.project(&start)) else {
            return Ok(None);
        };
        let tau0 = 1.0 / self.preconditioned_norm();
        let mut tau = tau0;
        let mut f = self.value(&u);
        let mut log = alloc::vec![f];
        let mut last_change = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;
        loop {
            let g = self.gradient(&u);
            let nrm = self.normal(&u);
            let pg = u.with_coeffs(self.basis.sobolev_inverse(g.coeffs()));
            let pn = u.with_coeffs(self.basis.sobolev_inverse(nrm.coeffs()));
            let denom = pn.inner(&nrm)?.re;
            let tangent = |v: &SpectralField| -> Result<SpectralField> {
                let c = if denom > 0.0 { v.inner(&nrm)?.re / denom } else { 0.0 };
                Ok(self.project_mask(&v.axpy(C64::new(-c, 0.0), &pn)))
            };
            let grad = tangent(&pg)?;
            // H¹ pairing of tangent vectors: ⟨P a, P b⟩_{H¹} = Re(a, P b)
            let resid = g.axpy(C64::new(-if denom > 0.0 { pg.inner(&nrm)?.re / denom } else { 0.0 }, 0.0), &nrm);
            let gg = grad.inner(&resid)?.re.max(0.0);
            let rel = gg.sqrt() / pg.inner(&g)?.re.max(f64::MIN_POSITIVE).sqrt();
            if rel < tol.gradient_tol && last_change < tol.objective_rtol {
                converged = true;
                break;
            }
            if iterations >= tol.max_iter {
                break;
            }
            let dir = grad;
            let slope = g.inner(&dir)?.re;
            let mut t = tau;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                if let Some(c) = self.retract(&self.project(&u.axpy(C64::new(-t, 0.0), &dir))) {
                    let d = self.difference(&u, &c);
                    if d <= -tol.armijo * t * slope || (d <= 0.0 && tol.armijo * t * slope <= 1e-15 * f.abs()) {
                        accepted = Some((c, d));
                        break;
                    }
                }
                t *= tol.backtrack;
            }
            let Some((c, d)) = accepted else {
                // no representable decrease along the gradient
                converged = rel < tol.gradient_tol;
                break;
            };
            last_change = d.abs() / f.abs().max(f64::MIN_POSITIVE);
            f += d;
            log.push(f);
            u = c;
            tau = (2.0 * t).min(1.5 * tau0);
            iterations += 1;
        }
        let x_norm = apply_killing(&u, &self.x)?.norm_l2();
        let objective = self.value(&u);
        Ok(Some(Run { u, objective, iterations, converged, descent_log: log, x_norm }))
    }

    fn project_mask(&self, u: &SpectralField) -> SpectralField {
        match &self.mask {
            None => u.clone(),
            Some(m) => u.with_coeffs(
                u.coeffs().iter().zip(m).map(|(c, keep)| if *keep { *c } else { C64::new(0.0, 0.0) }).collect(),
            ),
        }
    }

    /// Recovered multiplier and the imaginary part of its defining quotient.
    pub fn multiplier(&self, u: &SpectralField) -> Result<(f64, f64)> {
        let pr = &self.problem;
        let lu = self.linear(u);
        let q = match (pr.equation, pr.scheme) {
            (Equation::TwoNonlinearity, _) => {
                let den = u.power_integral(pr.q.unwrap_or(pr.p) + 1.0);
                if !(den > 0.0) {
                    return Err(Error::Degenerate("zero field".into()));
                }
                (lu.inner(u)? - u.power_integral(pr.p + 1.0)) / den
            }
            (_, Scheme::EnergyMin) => {
                let den = u.norm_l2().powi(2);
                if !(den > 0.0) {
                    return Err(Error::Degenerate("zero field".into()));
                }
                -self.gradient(u).inner(u)? / den
            }
            (_, Scheme::FMin) => {
                let den = u.power_integral(pr.p + 1.0);
                if !(den > 0.0) {
                    return Err(Error::Degenerate("zero field".into()));
                }
                lu.inner(u)? / den
            }
        };
        Ok((q.re, q.im))
    }

    /// Relative residual of the auxiliary equation with the given multiplier.
    pub fn residual(&self, u: &SpectralField, multiplier: f64) -> Result<f64> {
        let pr = &self.problem;
        let lu = self.linear(u);
        let (lin, nl) = match (pr.equation, pr.scheme) {
            (Equation::TwoNonlinearity, _) => {
                let nq = u.nonlinearity(pr.q.unwrap_or(pr.p));
                (lu, u.nonlinearity(pr.p).axpy(C64::new(multiplier, 0.0), &nq))
            }
            (_, Scheme::EnergyMin) => {
                (lu.axpy(C64::new(multiplier, 0.0), u), u.nonlinearity(pr.p).scale(C64::new(pr.k_coupling, 0.0)))
            }
            (_, Scheme::FMin) => (lu, u.nonlinearity(pr.p).scale(C64::new(multiplier, 0.0))),
        };
        let scale = lin.norm_l2() + nl.norm_l2();
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(lin.sub(&nl).norm_l2() / scale)
    }

    pub(super) fn finish(&self, run: Run, starts: Vec<StartSummary>) -> Result<MinimizeResult> {
        let u = run.u;
        let (multiplier, multiplier_imag) = self.multiplier(&u)?;
        let residual = self.residual(&u, multiplier)?;
        let classification = classify(&u, &self.x)?;
        let level = self.problem.constraint.level();
        let constraint_defect = (self.constraint_value(&u) - level).abs() / level;
        Ok(MinimizeResult {
            objective: run.objective,
            multiplier,
            multiplier_imag,
            residual,
            x_norm: run.x_norm,
            classification,
            iterations: run.iterations,
            converged: run.converged,
            descent_log: run.descent_log,
            constraint_defect,
            starts,
            problem: self.problem.clone(),
            manifold: self.basis.spec().clone(),
            killing: self.x.clone(),
            u,
        })
    }
}

/// `∫|c|^s - ∫|u|^s` from the grid values of `u`, `c` and `d = c - u`.
fn power_difference(u: &SpectralField, c: &SpectralField, d: &SpectralField, s: f64) -> f64 {
    let gu = u.to_grid();
    let gc = c.to_grid();
    let gd = d.to_grid();
    let half = 0.5 * s;
    gu.iter()
        .zip(&gc)
        .zip(&gd)
        .zip(u.basis().grid_weights())
        .map(|(((a, b), e), w)| {
            let b2 = a.norm_sqr();
            if b2 == 0.0 {
                return w * b.norm().powf(s);
            }
            let delta = (e * (b + a).conj()).re;
            w * b2.powf(half) * (half * (delta / b2).max(-1.0).ln_1p()).exp_m1()
        })
        .sum()
}
