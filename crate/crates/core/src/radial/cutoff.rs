use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::basis::{ManifoldSpec, SpectralField};
use crate::operators::{form_f_nlkg, KillingSpec};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Serialize)]
pub struct SplitCutoffs {
    pub u_sharp: SpectralField,
    pub u_flat: SpectralField,
    /// Node values of `χ#` (one on `r ≤ d`, zero on `r ≥ d + 1`) and `χ_b`
    /// (zero on `r ≤ d + 1`, one on `r ≥ d + 2`).
    pub chi_sharp: Vec<f64>,
    pub chi_flat: Vec<f64>,
    /// `∫_S |u|² + |∇u|² + |u|^{p+1}` over the seam `S = [d, d + 2]`.
    pub seam_mass: f64,
    /// `|F(u) - F(u#) - F(u_b)|` and its collar bound `(|m² - λ²| + 2)·seam`.
    pub form_defect: f64,
    pub form_bound: f64,
    /// `|∫|u|^{p+1} - ∫|u#|^{p+1} - ∫|u_b|^{p+1}|` and its bound
    /// `∫_S |u|^{p+1}`.
    pub lp_defect: f64,
    pub lp_bound: f64,
    /// Largest difference quotient of either cutoff.
    pub lipschitz: f64,
    pub bounds_hold: bool,
}

/// Splits a radial field with the two Lipschitz-1 cutoffs around the core set
/// `r ≤ d`, and compares the splitting defects of `F_{m,λ,X}` and of the
/// `L^{p+1}` mass with their seam bounds.
pub fn splitting_cutoffs(
    u: &SpectralField,
    d: f64,
    p: f64,
    x: &KillingSpec,
    lambda: f64,
    m_mass: f64,
) -> Result<SplitCutoffs> {
    let r_max = match u.basis().spec() {
        ManifoldSpec::Radial(s) => s.r_max,
        _ => return Err(Error::Config("splitting cutoffs act on radial fields".into())),
    };
    if !(d >= 0.0) || !(d + 2.0 < r_max) {
        return Err(Error::Geometry(format!("need 0 <= d and d + 2 < r_max (d = {d}, r_max = {r_max})")));
    }
    let rb = u.basis().radial().expect("radial basis");
    let chi_sharp: Vec<f64> = rb.nodes.iter().map(|&r| (d + 1.0 - r).clamp(0.0, 1.0)).collect();
    let chi_flat: Vec<f64> = rb.nodes.iter().map(|&r| (r - d - 1.0).clamp(0.0, 1.0)).collect();
    let grid = u.to_grid();
    let apply = |chi: &[f64]| -> Result<SpectralField> {
        let g: Vec<C64> = grid.iter().zip(chi).map(|(z, c)| z * *c).collect();
        SpectralField::from_grid(u.basis().clone(), &g)
    };
    let u_sharp = apply(&chi_sharp)?;
    let u_flat = apply(&chi_flat)?;

    let in_seam = |r: f64| r >= d - 1e-12 && r <= d + 2.0 + 1e-12;
    let weights = u.basis().grid_weights();
    let mut l2 = 0.0;
    let mut lp = 0.0;
    for ((z, w), &r) in grid.iter().zip(weights).zip(&rb.nodes) {
        if in_seam(r) {
            l2 += w * z.norm_sqr();
            lp += w * z.norm().powf(p + 1.0);
        }
    }
    // staggered derivative lives at r_{j+1/2}
    let du = rb.derivative(&grid);
    let grad: f64 = du
        .iter()
        .zip(&rb.stiffness)
        .enumerate()
        .filter(|(j, _)| in_seam((*j as f64 + 0.5) * rb.h))
        .map(|(_, (g, s))| s * g.norm_sqr())
        .sum();
    let seam_mass = l2 + grad + lp;

    let f = |v: &SpectralField| form_f_nlkg(v, x, lambda, m_mass);
    let form_defect = (f(u)? - f(&u_sharp)? - f(&u_flat)?).abs();
    let shift = (m_mass * m_mass - lambda * lambda).abs();
    let form_bound = (shift + 2.0) * seam_mass;
    let q = p + 1.0;
    let lp_defect = (u.power_integral(q) - u_sharp.power_integral(q) - u_flat.power_integral(q)).abs();
    let lipschitz = [&chi_sharp, &chi_flat]
        .iter()
        .flat_map(|c| c.windows(2).map(|w| (w[1] - w[0]).abs() / rb.h))
        .fold(0.0, f64::max);
    let slack = 1e-12 * (f(u)?.abs() + u.power_integral(q));
    Ok(SplitCutoffs {
        bounds_hold: form_defect <= form_bound + slack && lp_defect <= lp + slack,
        u_sharp,
        u_flat,
        chi_sharp,
        chi_flat,
        seam_mass,
        form_defect,
        form_bound,
        lp_defect,
        lp_bound: lp,
        lipschitz,
    })
}
