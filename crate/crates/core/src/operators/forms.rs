use super::killing::{apply_killing, apply_laplacian, KillingSpec};
use crate::basis::SpectralField;
use crate::minimizer::{Equation, ProblemSpec};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Value of a Hermitian form given its pieces; errors if the pairing has a
/// non-negligible imaginary part.
fn hermitian_value(total: C64, magnitude: f64) -> Result<f64> {
    if total.im.abs() > 1e-10 * magnitude.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian { imag: total.im, real: total.re });
    }
    Ok(total.re)
}

/// `F_{λ,X}(u) = (-Δu - iXu + λu, u)`.
pub fn form_f_nls(u: &SpectralField, x: &KillingSpec, lambda: f64) -> Result<f64> {
    let lap = apply_laplacian(u).inner(u)?;
    let xu = apply_killing(u, x)?.inner(u)?;
    let q = u.inner(u)?;
    let total = lap - I * xu + q * lambda;
    hermitian_value(total, lap.norm() + xu.norm() + lambda.abs() * q.norm())
}

/// `F_{m,λ,X}(u) = (-Δu + X²u + 2iλXu + (m² - λ²)u, u)`.
pub fn form_f_nlkg(u: &SpectralField, x: &KillingSpec, lambda: f64, m_mass: f64) -> Result<f64> {
    let (quad, mag) = nlkg_quadratic(u, x, lambda)?;
    let q = u.inner(u)?;
    let shift = m_mass * m_mass - lambda * lambda;
    hermitian_value(quad + q * shift, mag + shift.abs() * q.norm())
}

fn nlkg_quadratic(u: &SpectralField, x: &KillingSpec, lambda: f64) -> Result<(C64, f64)> {
    let xu = apply_killing(u, x)?;
    let lap = apply_laplacian(u).inner(u)?;
    let x2 = apply_killing(&xu, x)?.inner(u)?;
    let x1 = xu.inner(u)?;
    let total = lap + x2 + I * x1 * (2.0 * lambda);
    Ok((total, lap.norm() + x2.norm() + 2.0 * lambda.abs() * x1.norm()))
}

/// `E(u) = ½(-Δu - iXu, u) - K/(p+1) ∫|u|^{p+1}`.
pub fn energy_nls(u: &SpectralField, x: &KillingSpec, p: f64, k: f64) -> Result<f64> {
    let quad = form_f_nls(u, x, 0.0)?;
    Ok(0.5 * quad - k / (p + 1.0) * u.power_integral(p + 1.0))
}

/// `ℰ(u) = ½(-Δu + X²u + 2iλXu, u) - K/(p+1) ∫|u|^{p+1}`.
pub fn energy_nlkg(u: &SpectralField, x: &KillingSpec, lambda: f64, p: f64, k: f64) -> Result<f64> {
    let (quad, mag) = nlkg_quadratic(u, x, lambda)?;
    let quad = hermitian_value(quad, mag)?;
    Ok(0.5 * quad - k / (p + 1.0) * u.power_integral(p + 1.0))
}

/// L²-gradient of the energy: `d/dτ E(u + τv)|₀ = Re (G, v)`.
///
/// NLS: `G = -Δu - iXu - K|u|^{p-1}u`; NLKG: `G = -Δu + X²u + 2iλXu - K|u|^{p-1}u`;
/// two nonlinearities: `G = -Δu + λu - |u|^{p-1}u` (the `K` and `X` inputs are
/// not used there).
pub fn gradient(u: &SpectralField, problem: &ProblemSpec, x: &KillingSpec) -> Result<SpectralField> {
    let lap = apply_laplacian(u);
    let lin = match problem.equation {
        Equation::Nls => lap.axpy(-I, &apply_killing(u, x)?),
        Equation::Nlkg => {
            let xu = apply_killing(u, x)?;
            lap.axpy(C64::new(1.0, 0.0), &apply_killing(&xu, x)?).axpy(I * (2.0 * problem.lambda), &xu)
        }
        Equation::TwoNonlinearity => {
            let g = lap.axpy(C64::new(problem.lambda, 0.0), u);
            return Ok(g.axpy(C64::new(-1.0, 0.0), &u.nonlinearity(problem.p)));
        }
    };
    Ok(lin.axpy(C64::new(-problem.k_coupling, 0.0), &u.nonlinearity(problem.p)))
}
