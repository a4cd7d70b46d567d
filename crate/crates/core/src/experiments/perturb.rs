use alloc::format;
use alloc::vec;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::basis::{Basis, Mode, SpectralField};
use crate::minimizer::{minimize, MinimizeResult, ProblemSpec};
use crate::operators::{commutator_defect, form_f_nls, KillingSpec};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub eps: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `|ΔF| / (sup|X''|·ε·‖u‖²_{H¹})`.
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbedMinimizer {
    pub eps: f64,
    pub objective: f64,
    pub converged: bool,
    pub residual: f64,
    /// `sup|u_ε - u_0|` after aligning phase and symmetry translation.
    pub sup_diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub sup_x_pp: f64,
    pub bound: Vec<BoundRow>,
    pub total_violations: usize,
    pub base_objective: f64,
    pub minimizers: Vec<PerturbedMinimizer>,
    /// Sup differences non-increasing as `ε` decreases.
    pub monotone: bool,
}

/// Form-perturbation bound on `n_fields` random fields, then minimizers of the
/// perturbed problems warm-started from the unperturbed one.
pub fn perturbation_study(
    basis: &Arc<Basis>,
    x: &KillingSpec,
    x_pp: &KillingSpec,
    eps_list: &[f64],
    problem: &ProblemSpec,
    n_fields: usize,
) -> Result<PerturbationReport> {
    let sup_x_pp = x_pp.speed_bound(basis.spec());
    if !sup_x_pp.is_finite() {
        return Err(Error::InvalidPerturbation("X'' is not defined on this manifold".into()));
    }
    let probe = SpectralField::random(basis.clone(), problem.seed ^ 0x9e37, 0);
    let mut fields_eps = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let xe = x.perturbed(eps, x_pp)?;
        let defect = commutator_defect(&probe, &xe).map_err(|e| Error::InvalidPerturbation(format!("{e}")))?;
        if defect > 1e-10 {
            return Err(Error::InvalidPerturbation(format!("[Δ, X + εX''] has relative size {defect:e}")));
        }
        fields_eps.push((eps, xe));
    }

    let lambda = problem.lambda;
    let fields: Vec<SpectralField> =
        (0..n_fields).map(|i| SpectralField::random(basis.clone(), problem.seed, 1000 + i as u64)).collect();
    let mut bound = Vec::new();
    for (eps, xe) in &fields_eps {
        let mut row = BoundRow { eps: *eps, samples: fields.len(), violations: 0, max_ratio: 0.0 };
        for u in &fields {
            let df = (form_f_nls(u, xe, lambda)? - form_f_nls(u, x, lambda)?).abs();
            let rhs = sup_x_pp * eps.abs() * u.norms(1.0).h1.powi(2);
            if df > rhs + 1e-10 {
                row.violations += 1;
            }
            if rhs > 0.0 {
                row.max_ratio = row.max_ratio.max(df / rhs);
            }
        }
        bound.push(row);
    }

    let base = best(minimize(problem, basis, x, &[]))?;
    let mut minimizers = Vec::new();
    for (eps, xe) in &fields_eps {
        let r = best(minimize(problem, basis, xe, core::slice::from_ref(&base.u)))?;
        let aligned = align(&r.u, &base.u)?;
        let diff = aligned.sub(&base.u).to_grid().iter().map(|z| z.norm()).fold(0.0, f64::max);
        minimizers.push(PerturbedMinimizer {
            eps: *eps,
            objective: r.objective,
            converged: r.converged,
            residual: r.residual,
            sup_diff: diff,
        });
    }
    let mut order: Vec<&PerturbedMinimizer> = minimizers.iter().collect();
    order.sort_by(|a, b| b.eps.abs().total_cmp(&a.eps.abs()));
    let monotone = order.windows(2).all(|w| w[1].sup_diff <= w[0].sup_diff);
    Ok(PerturbationReport {
        sup_x_pp,
        total_violations: bound.iter().map(|r| r.violations).sum(),
        bound,
        base_objective: base.objective,
        minimizers,
        monotone,
    })
}

fn best(r: Result<MinimizeResult>) -> Result<MinimizeResult> {
    match r {
        Err(Error::NonConverged(r)) => Ok(*r),
        other => other,
    }
}

/// Per-mode frequency vectors of the continuous symmetries acting diagonally:
/// translations on tori, rotations about the Killing axes on spheres.
fn symmetry_frequencies(basis: &Basis) -> Option<(Vec<Vec<f64>>, f64)> {
    if let Some(tb) = basis.torus() {
        let f = tb.wavenumbers.iter().map(|q| q.iter().map(|&k| k as f64).collect()).collect();
        return Some((f, tb.period));
    }
    basis.sphere()?;
    let dims = if basis.dim() == 2 { 1 } else { 2 };
    let f = basis
        .modes()
        .iter()
        .map(|m| match m {
            Mode::Harmonic { m, .. } => m[..dims].iter().map(|&k| k as f64).collect(),
            _ => vec![0.0; dims],
        })
        .collect();
    Some((f, core::f64::consts::TAU))
}

fn shifted_overlap(u: &SpectralField, v: &SpectralField, freqs: &[Vec<f64>], period: f64, s: &[f64]) -> C64 {
    let w = u.basis().coeff_weights();
    u.coeffs()
        .iter()
        .zip(v.coeffs())
        .zip(freqs)
        .zip(w)
        .map(|(((a, b), k), w)| {
            let ph: f64 = k.iter().zip(s).map(|(k, s)| k * s).sum::<f64>() * core::f64::consts::TAU / period;
            *w * a * b.conj() * C64::from_polar(1.0, ph)
        })
        .sum()
}

/// `u` translated along the manifold's diagonal symmetries and multiplied by a
/// unit scalar so that `Re (u, reference)` is maximal.
pub fn align(u: &SpectralField, reference: &SpectralField) -> Result<SpectralField> {
    u.same_basis(reference)?;
    let t = match symmetry_frequencies(u.basis()) {
        Some((freqs, period)) => {
            let s = best_shift(u, reference, &freqs, period);
            let coeffs = u
                .coeffs()
                .iter()
                .zip(&freqs)
                .map(|(c, k)| {
                    let ph = k.iter().zip(&s).map(|(k, s)| k * s).sum::<f64>() * core::f64::consts::TAU / period;
                    c * C64::from_polar(1.0, ph)
                })
                .collect();
            u.with_coeffs(coeffs)
        }
        None => u.clone(),
    };
    Ok(phase_align(&t, reference))
}

/// Grid search over one period per axis, then compass refinement.
fn best_shift(u: &SpectralField, reference: &SpectralField, freqs: &[Vec<f64>], period: f64) -> Vec<f64> {
    let d = freqs.first().map_or(0, |f| f.len());
    let kmax = freqs.iter().flatten().fold(0.0f64, |m, k| m.max(k.abs())).max(1.0);
    let per_axis = ((8.0 * kmax) as usize).clamp(8, if d == 1 { 4096 } else { 128 });
    let h = period / per_axis as f64;
    let mut val = f64::NEG_INFINITY;
    let mut s = vec![0.0; d];
    for flat in 0..per_axis.pow(d as u32) {
        let mut rem = flat;
        let t: Vec<f64> = (0..d)
            .map(|_| {
                let i = rem % per_axis;
                rem /= per_axis;
                i as f64 * h
            })
            .collect();
        let v = shifted_overlap(u, reference, freqs, period, &t).norm();
        if v > val {
            val = v;
            s = t;
        }
    }
    let mut step = h / 2.0;
    while step > 1e-13 * period {
        let mut moved = false;
        for k in 0..d {
            for dir in [-1.0, 1.0] {
                let mut t = s.clone();
                t[k] += dir * step;
                let v = shifted_overlap(u, reference, freqs, period, &t).norm();
                if v > val {
                    val = v;
                    s = t;
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    // the maximum is flat to roundoff, so polish the stationary point directly
    for _ in 0..3 {
        match newton_step(u, reference, freqs, period, &s) {
            Some(t) if t.iter().zip(&s).all(|(a, b)| (a - b).abs() < h) => s = t,
            _ => break,
        }
    }
    s
}

/// One Newton step on `|O(s)|²`, where `O` is the shifted overlap.
fn newton_step(u: &SpectralField, v: &SpectralField, freqs: &[Vec<f64>], period: f64, s: &[f64]) -> Option<Vec<f64>> {
    let d = s.len();
    let scale = core::f64::consts::TAU / period;
    let w = u.basis().coeff_weights();
    let mut o = C64::new(0.0, 0.0);
    let mut g = [C64::new(0.0, 0.0); 2];
    let mut h = [[C64::new(0.0, 0.0); 2]; 2];
    for (((a, b), k), w) in u.coeffs().iter().zip(v.coeffs()).zip(freqs).zip(w) {
        let ph: f64 = k.iter().zip(s).map(|(k, s)| k * s).sum::<f64>() * scale;
        let t = *w * a * b.conj() * C64::from_polar(1.0, ph);
        o += t;
        for i in 0..d {
            g[i] += t * C64::new(0.0, k[i] * scale);
            for j in 0..d {
                h[i][j] -= t * (k[i] * k[j] * scale * scale);
            }
        }
    }
    let grad: Vec<f64> = (0..d).map(|i| 2.0 * (o.conj() * g[i]).re).collect();
    let hess = |i: usize, j: usize| 2.0 * (g[i].conj() * g[j] + o.conj() * h[i][j]).re;
    let step = if d == 1 {
        vec![-grad[0] / hess(0, 0)]
    } else {
        let (a, b, c) = (hess(0, 0), hess(0, 1), hess(1, 1));
        let det = a * c - b * b;
        vec![-(c * grad[0] - b * grad[1]) / det, -(a * grad[1] - b * grad[0]) / det]
    };
    step.iter().all(|x| x.is_finite()).then(|| s.iter().zip(&step).map(|(s, d)| s + d).collect())
}

fn phase_align(u: &SpectralField, reference: &SpectralField) -> SpectralField {
    let ov = u.inner(reference).expect("same basis");
    if ov.norm() == 0.0 {
        return u.clone();
    }
    u.scale(ov.conj() / ov.norm())
}
