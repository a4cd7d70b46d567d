use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};

use num_rational::Ratio;
#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::basis::{Basis, ManifoldSpec, SpectralField};
use crate::operators::{energy_nlkg, form_f_nlkg, KillingSpec};
use crate::{Error, Result, C64};

/// Exact comparison of `γ(p+1) < 2` with `p < 1 + 4/n` for rational `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GnGate {
    pub n: u32,
    pub p: (i64, i64),
    /// `γ(p+1)` as a reduced fraction.
    pub gamma_p1: (i64, i64),
    pub gamma_below_two: bool,
    pub p_subcritical: bool,
}

impl GnGate {
    pub fn agrees(&self) -> bool {
        self.gamma_below_two == self.p_subcritical
    }
}

/// `p = num/den` with `den > 0`.
pub fn gn_gate(n: u32, num: i64, den: i64) -> Result<GnGate> {
    if den <= 0 || n == 0 {
        return Err(Error::Config(format!("need n >= 1 and a positive denominator (n = {n}, p = {num}/{den})")));
    }
    let p = Ratio::new(num, den);
    let nn = Ratio::from_integer(n as i64);
    let one = Ratio::from_integer(1);
    let two = Ratio::from_integer(2);
    let gamma = nn / two - nn / (p + one);
    let gamma_p1 = gamma * (p + one);
    let bound = one + Ratio::from_integer(4) / nn;
    Ok(GnGate {
        n,
        p: (*p.numer(), *p.denom()),
        gamma_p1: (*gamma_p1.numer(), *gamma_p1.denom()),
        gamma_below_two: gamma_p1 < two,
        p_subcritical: p < bound,
    })
}

/// `‖u‖_{L^{p+1}} / (‖u‖_{L²}^{1-γ} ‖u‖_{H¹}^γ)`.
pub fn gn_ratio(u: &SpectralField, p: f64) -> f64 {
    let n = u.basis().dim() as f64;
    let gamma = n / 2.0 - n / (p + 1.0);
    let norms = u.norms(p);
    norms.lp1 / (norms.l2.powf(1.0 - gamma) * norms.h1.powf(gamma))
}

/// Relative defect of `F = 2ℰ + 2/(p+1) ∫|u|^{p+1} + (m² - λ²)‖u‖²` with
/// `K = 1`.
pub fn chain_defect(u: &SpectralField, x: &KillingSpec, lambda: f64, m_mass: f64, p: f64) -> Result<f64> {
    let f = form_f_nlkg(u, x, lambda, m_mass)?;
    let e = energy_nlkg(u, x, lambda, p, 1.0)?;
    let pot = u.power_integral(p + 1.0);
    let q = u.norm_l2().powi(2);
    let shift = m_mass * m_mass - lambda * lambda;
    let rhs = 2.0 * e + 2.0 / (p + 1.0) * pot + shift * q;
    let scale = f.abs().max(2.0 * e.abs()).max(pot).max(shift.abs() * q).max(f64::MIN_POSITIVE);
    Ok((f - rhs).abs() / scale)
}

#[derive(Clone, Debug, Serialize)]
pub struct GnSample {
    pub label: String,
    pub ratio: f64,
    pub chain_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GNReport {
    pub gamma: f64,
    /// Largest sampled ratio: a lower bound for the inequality's constant.
    pub c_estimate: f64,
    pub argmax: String,
    pub samples: usize,
    /// `γ(p+1) < 2` in floating point.
    pub gamma_below_two: bool,
    pub max_chain_defect: f64,
    pub table: Vec<GnSample>,
}

/// Evaluates the ratio on `n_samples` random fields and on constants, the
/// lowest and highest nonconstant modes and a localized bump; checks the
/// form/energy identity on every sample.
pub fn gn_scan(
    basis: &Arc<Basis>,
    x: &KillingSpec,
    lambda: f64,
    m_mass: f64,
    p: f64,
    n_samples: usize,
    seed: u64,
) -> Result<GNReport> {
    if !(p > 1.0) {
        return Err(Error::Config(format!("p must exceed 1 (got {p})")));
    }
    let n = basis.dim() as f64;
    let gamma = n / 2.0 - n / (p + 1.0);
    let mut fields: Vec<(String, SpectralField)> = adversarial(basis)?;
    for i in 0..n_samples {
        fields.push((format!("random-{i}"), SpectralField::random(basis.clone(), seed, i as u64)));
    }
    let mut table = Vec::with_capacity(fields.len());
    for (label, u) in &fields {
        table.push(GnSample {
            label: label.clone(),
            ratio: gn_ratio(u, p),
            chain_defect: chain_defect(u, x, lambda, m_mass, p)?,
        });
    }
    let best = table.iter().filter(|s| s.ratio.is_finite()).fold(None::<&GnSample>, |b, s| match b {
        Some(b) if b.ratio >= s.ratio => Some(b),
        _ => Some(s),
    });
    Ok(GNReport {
        gamma,
        c_estimate: best.map_or(f64::NAN, |s| s.ratio),
        argmax: best.map_or_else(String::new, |s| s.label.clone()),
        samples: table.len(),
        gamma_below_two: gamma * (p + 1.0) < 2.0,
        max_chain_defect: table.iter().map(|s| s.chain_defect).fold(0.0, f64::max),
        table,
    })
}

fn adversarial(basis: &Arc<Basis>) -> Result<Vec<(String, SpectralField)>> {
    let mut out = Vec::new();
    if let Some(c) = basis.constant(C64::new(1.0, 0.0)) {
        out.push(("constant".to_string(), SpectralField::new(basis.clone(), c)?));
    }
    if let Some(lap) = basis.laplacian_symbol() {
        let low = (0..lap.len()).filter(|&i| lap[i] > 0.0).min_by(|&a, &b| lap[a].total_cmp(&lap[b]));
        let high = (0..lap.len()).max_by(|&a, &b| lap[a].total_cmp(&lap[b]));
        for (label, idx) in [("lowest-mode", low), ("highest-mode", high)] {
            if let Some(i) = idx {
                let mut c = vec![C64::new(0.0, 0.0); lap.len()];
                c[i] = C64::new(1.0, 0.0);
                out.push((format!("{label}:{}", basis.modes()[i]), SpectralField::new(basis.clone(), c)?));
            }
        }
    }
    let grid = bump_grid(basis);
    out.push(("bump".to_string(), SpectralField::from_grid(basis.clone(), &grid)?));
    if let Some(rb) = basis.radial() {
        let k = core::f64::consts::PI / (4.0 * rb.h);
        let osc: Vec<C64> = grid.iter().zip(&rb.nodes).map(|(g, r)| g * (k * r).cos()).collect();
        out.push(("oscillating-bump".to_string(), SpectralField::from_grid(basis.clone(), &osc)?));
    }
    Ok(out)
}

/// Grid values of a bump localized near one point.
fn bump_grid(basis: &Basis) -> Vec<C64> {
    match basis.spec() {
        ManifoldSpec::Torus(t) => {
            let tb = basis.torus().expect("torus basis");
            let w = t.period / 8.0;
            (0..basis.grid_len())
                .map(|i| {
                    let d2: f64 = tb.grid_point(i).iter().map(|x| (x - t.period / 2.0).powi(2)).sum();
                    C64::new((-d2 / (w * w)).exp(), 0.0)
                })
                .collect()
        }
        ManifoldSpec::Sphere(_) => {
            let sb = basis.sphere().expect("sphere basis");
            (0..basis.grid_len())
                .map(|i| {
                    let (x, _) = sb.grid_point(i);
                    C64::new((-(1.0 - x) / 0.05).exp(), 0.0)
                })
                .collect()
        }
        ManifoldSpec::Radial(s) => {
            let rb = basis.radial().expect("radial basis");
            let w = s.r_max / 16.0;
            rb.nodes.iter().map(|r| C64::new((-(r / w).powi(2)).exp(), 0.0)).collect()
        }
    }
}
