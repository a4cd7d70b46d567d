use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nonuniform axis `x = c·sinh(s)` on a uniform `s`-grid; resolves features
/// from width `~8c` up to the domain size at a fixed number of points per
/// e-fold.
#[derive(Clone, Debug)]
pub struct GradedAxis {
    pub nodes: Vec<f64>,
    /// Trapezoid weights of the mapped rule, `x'(s)·ds`.
    pub weights: Vec<f64>,
    jac: Vec<f64>,
    ds: f64,
    half_width: f64,
}

impl GradedAxis {
    pub fn new(w_min: f64, half_width: f64, ds: f64) -> Result<Self> {
        if !(w_min > 0.0) || !(half_width > w_min) || !(ds > 0.0) {
            return Err(Error::Config(format!(
                "graded axis needs 0 < w_min < half_width and ds > 0 (got {w_min}, {half_width}, {ds})"
            )));
        }
        let c = w_min / 8.0;
        let s_max = (half_width / c).asinh();
        let n = (2.0 * s_max / ds).ceil() as usize;
        let h = 2.0 * s_max / n as f64;
        let s: Vec<f64> = (0..=n).map(|i| -s_max + i as f64 * h).collect();
        let jac: Vec<f64> = s.iter().map(|s| c * s.cosh()).collect();
        Ok(Self {
            nodes: s.iter().map(|s| c * s.sinh()).collect(),
            weights: jac.iter().map(|j| j * h).collect(),
            jac,
            ds: h,
            half_width,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Eighth-order `d/dx` of samples taken with `stride`, zero outside.
    fn derivative_into(&self, f: &[f64], offset: usize, stride: usize, out: &mut [f64]) {
        const STENCIL: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let n = self.len();
        let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { f[offset + i as usize * stride] };
        for i in 0..n {
            let k = i as isize;
            let d: f64 = STENCIL.iter().zip(1..).map(|(c, j)| c * (at(k + j) - at(k - j))).sum();
            out[offset + i * stride] = d / (self.ds * self.jac[i]);
        }
    }
}

/// Tensor product of graded axes, row-major with the last axis fastest.
#[derive(Clone, Debug)]
pub struct PlaneGrid {
    pub axes: Vec<GradedAxis>,
}

impl PlaneGrid {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index(&self, mut flat: usize, out: &mut [usize]) {
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = flat % a.len();
            flat /= a.len();
        }
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let d = self.axes.len();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        (0..self.len())
            .map(|i| {
                self.index(i, &mut idx);
                for k in 0..d {
                    x[k] = self.axes[k].nodes[idx[k]];
                }
                f(&x)
            })
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let d = self.axes.len();
        let mut idx = vec![0usize; d];
        (0..self.len())
            .map(|i| {
                self.index(i, &mut idx);
                (0..d).map(|k| self.axes[k].weights[idx[k]]).product()
            })
            .collect()
    }

    pub fn integrate(&self, values: &[f64], weights: &[f64]) -> f64 {
        values.iter().zip(weights).map(|(v, w)| v * w).sum()
    }

    /// `∂_k f`.
    pub fn partial(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let stride: usize = self.axes[axis + 1..].iter().map(|a| a.len()).product();
        let outer: usize = self.axes[..axis].iter().map(|a| a.len()).product();
        let n = self.axes[axis].len();
        let mut out = vec![0.0; f.len()];
        for o in 0..outer {
            for inner in 0..stride {
                self.axes[axis].derivative_into(f, o * n * stride + inner, stride, &mut out);
            }
        }
        out
    }

    /// Fraction of `∫ v` carried by the central half of the box.
    pub fn central_fraction(&self, v: &[f64], weights: &[f64]) -> f64 {
        let d = self.axes.len();
        let mut idx = vec![0usize; d];
        let mut inside = 0.0;
        let mut total = 0.0;
        for i in 0..self.len() {
            self.index(i, &mut idx);
            let t = v[i] * weights[i];
            total += t;
            if (0..d).all(|k| self.axes[k].nodes[idx[k]].abs() <= 0.5 * self.axes[k].half_width) {
                inside += t;
            }
        }
        inside / total
    }
}

/// `A·exp(-Σ (x_k / w_k)²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub widths: Vec<f64>,
}

impl GaussianBump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let e: f64 = x.iter().zip(&self.widths).map(|(x, w)| (x / w).powi(2)).sum();
        self.amplitude * (-e).exp()
    }

    /// `r^σ u(r^{a_1} x_1, …, r^{a_n} x_n)`.
    pub fn scaled(&self, r: f64, sigma: f64, exps: &[f64]) -> Self {
        Self {
            amplitude: self.amplitude * r.powf(sigma),
            widths: self.widths.iter().zip(exps).map(|(w, a)| w * r.powf(-a)).collect(),
        }
    }

    /// `∫ u² = A² (π/2)^{n/2} Π w_k`.
    pub fn l2_sq(&self) -> f64 {
        let half_pi = core::f64::consts::FRAC_PI_2;
        self.amplitude.powi(2) * self.widths.iter().map(|w| w * half_pi.sqrt()).product::<f64>()
    }
}

/// Grid quantities of one field.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Measures {
    pub l2: f64,
    /// `∫|u|^p` for the requested `p`.
    pub lp: f64,
    pub grad: f64,
    /// `‖∂_y u‖²` and `‖y ∂_x u‖²` (two dimensions only).
    pub dy: f64,
    pub y_dx: f64,
}

/// Grid norms of a bump; errors if it is not contained in the central half of
/// the box.
pub fn measure(grid: &PlaneGrid, u: &GaussianBump, p: f64) -> Result<Measures> {
    let w = grid.weights();
    let v = grid.sample(|x| u.eval(x));
    let sq: Vec<f64> = v.iter().map(|a| a * a).collect();
    let frac = grid.central_fraction(&sq, &w);
    if frac < 1.0 - 1e-10 {
        return Err(Error::DomainOverflow(format!("only {frac} of the mass lies in the central half")));
    }
    let mut m = Measures {
        l2: grid.integrate(&sq, &w),
        lp: grid.integrate(&v.iter().map(|a| a.abs().powf(p)).collect::<Vec<_>>(), &w),
        ..Measures::default()
    };
    for k in 0..grid.axes.len() {
        let d = grid.partial(&v, k);
        let d2: Vec<f64> = d.iter().map(|a| a * a).collect();
        let e = grid.integrate(&d2, &w);
        m.grad += e;
        if grid.axes.len() == 2 && k == 1 {
            m.dy = e;
        }
        if grid.axes.len() == 2 && k == 0 {
            let y = grid.sample(|x| x[1]);
            let yd: Vec<f64> = d.iter().zip(&y).map(|(a, y)| (a * y).powi(2)).collect();
            m.y_dx = grid.integrate(&yd, &w);
        }
    }
    Ok(m)
}

/// Grid resolution for plane-surrogate experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneOptions {
    /// Step of the uniform parameter grid; refinement halves it.
    #[serde(default = "default_ds")]
    pub ds: f64,
    /// Half side of the box; defaults to 16 times the widest feature.
    #[serde(default)]
    pub half_width: Option<f64>,
}

fn default_ds() -> f64 {
    0.08
}

impl Default for PlaneOptions {
    fn default() -> Self {
        Self { ds: default_ds(), half_width: None }
    }
}

/// Graded grid resolving every bump in `fields`.
pub fn grid_for(fields: &[&GaussianBump], ds: f64, half_width: Option<f64>) -> Result<PlaneGrid> {
    let d = fields[0].widths.len();
    let axes = (0..d)
        .map(|k| {
            let w_min = fields.iter().map(|f| f.widths[k]).fold(f64::INFINITY, f64::min);
            let w_max = fields.iter().map(|f| f.widths[k]).fold(0.0, f64::max);
            GradedAxis::new(w_min, half_width.unwrap_or(16.0 * w_max), ds)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlaneGrid { axes })
}

/// One measured power law `Q(scaled) = r^e Q(u)` at two resolutions.
#[derive(Clone, Debug, Serialize)]
pub struct LawCheck {
    pub name: String,
    pub exponent: f64,
    pub predicted: f64,
    pub coarse_ratio: f64,
    pub fine_ratio: f64,
    pub coarse_error: f64,
    pub fine_error: f64,
    /// Fine error at most a quarter of the coarse one, or below `1e-12`.
    pub converges: bool,
}

/// Relative errors under `1e-12` count as converged.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

fn law(name: &str, exponent: f64, r: f64, coarse: (f64, f64), fine: (f64, f64)) -> LawCheck {
    let predicted = r.powf(exponent);
    let cr = coarse.1 / coarse.0;
    let fr = fine.1 / fine.0;
    let ce = (cr / predicted - 1.0).abs();
    let fe = (fr / predicted - 1.0).abs();
    LawCheck {
        name: name.into(),
        exponent,
        predicted,
        coarse_ratio: cr,
        fine_ratio: fr,
        coarse_error: ce,
        fine_error: fe,
        converges: fe <= ce / 4.0 || fe < ROUNDOFF_FLOOR,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnisotropicReport {
    pub r: f64,
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub grid_points: [usize; 2],
    pub laws: Vec<LawCheck>,
    pub max_fine_error: f64,
    pub all_converge: bool,
}

/// Checks the scaling laws of `u(r,σ,a,b)(x, y) = r^σ u(r^a x, r^b y)`:
/// `‖∂_y‖² ~ r^{b+2σ-a}`, `‖y∂_x‖² ~ r^{2σ+a-3b}`, `∫|u|^p ~ r^{σp-a-b}`,
/// `‖u‖² ~ r^{2σ-a-b}` and, when `a = b`, `‖∇u‖² ~ r^{2σ}`; each at step
/// `ds` and `ds/2`.
pub fn anisotropic_identities(
    u: &GaussianBump,
    r: f64,
    sigma: f64,
    a: f64,
    b: f64,
    p: f64,
    opts: &PlaneOptions,
) -> Result<AnisotropicReport> {
    if u.widths.len() != 2 {
        return Err(Error::Config(format!("anisotropic scaling needs a planar bump, got {} widths", u.widths.len())));
    }
    if !(r > 0.0) || !(p > 0.0) {
        return Err(Error::Config(format!("need r > 0 and p > 0 (got r = {r}, p = {p})")));
    }
    let v = u.scaled(r, sigma, &[a, b]);
    let mut runs = Vec::new();
    let mut sizes = [0usize; 2];
    for ds in [opts.ds, opts.ds / 2.0] {
        let grid = grid_for(&[u, &v], ds, opts.half_width)?;
        sizes = [grid.axes[0].len(), grid.axes[1].len()];
        runs.push((measure(&grid, u, p)?, measure(&grid, &v, p)?));
    }
    let (c, f) = (runs[0], runs[1]);
    let mut laws = vec![
        law("dy", b + 2.0 * sigma - a, r, (c.0.dy, c.1.dy), (f.0.dy, f.1.dy)),
        law("y_dx", 2.0 * sigma + a - 3.0 * b, r, (c.0.y_dx, c.1.y_dx), (f.0.y_dx, f.1.y_dx)),
        law("lp", sigma * p - a - b, r, (c.0.lp, c.1.lp), (f.0.lp, f.1.lp)),
        law("l2", 2.0 * sigma - a - b, r, (c.0.l2, c.1.l2), (f.0.l2, f.1.l2)),
    ];
    if a == b {
        laws.push(law("gradient", 2.0 * sigma, r, (c.0.grad, c.1.grad), (f.0.grad, f.1.grad)));
    }
    Ok(AnisotropicReport {
        r,
        sigma,
        a,
        b,
        p,
        grid_points: sizes,
        max_fine_error: laws.iter().map(|l| l.fine_error).fold(0.0, f64::max),
        all_converge: laws.iter().all(|l| l.converges),
        laws,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativeEnergyOptions {
    /// Factor applied to the scaling parameter at each step.
    #[serde(default = "half")]
    pub shrink: f64,
    #[serde(default = "forty")]
    pub max_steps: usize,
    #[serde(default = "default_ds")]
    pub ds: f64,
}

fn half() -> f64 {
    0.5
}

fn forty() -> usize {
    40
}

impl Default for NegativeEnergyOptions {
    fn default() -> Self {
        Self { shrink: half(), max_steps: forty(), ds: default_ds() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeEnergyStep {
    pub s: f64,
    pub l2: f64,
    pub lp1: f64,
    pub grad: f64,
    pub energy: f64,
    /// `∫|u|^{p+1} / ‖∇u‖²`.
    pub ratio: f64,
    /// Relative errors of the `L²`, `L^{p+1}`, gradient and ratio laws.
    pub law_errors: [f64; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeEnergyReport {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub alpha: f64,
    /// `p - 1 - 4/n`.
    pub ratio_exponent: f64,
    pub steps: Vec<NegativeEnergyStep>,
    pub first_negative: Option<usize>,
    /// The first iterate with negative energy.
    pub field: Option<GaussianBump>,
    pub max_law_error: f64,
    pub max_l2_defect: f64,
}

/// Mass-preserving dilations `u^s(x) = s·u(s^{2/n} x)` of a Gaussian with
/// `‖u‖² = β`, for `s = shrink^j`, until `ℰ(u) = ½‖∇u‖² - ∫|u|^{p+1}/(p+1)`
/// turns negative.
pub fn negative_energy_construction(
    n: usize,
    p: f64,
    beta: f64,
    opts: &NegativeEnergyOptions,
) -> Result<NegativeEnergyReport> {
    if !(1..=2).contains(&n) {
        return Err(Error::Config(format!("the plane surrogate supports n = 1, 2 (got {n})")));
    }
    let nf = n as f64;
    if !(p > 1.0 && p < 1.0 + 4.0 / nf) {
        return Err(Error::ParameterRegime(format!("need 1 < p < 1 + 4/n = {} (got {p})", 1.0 + 4.0 / nf)));
    }
    if !(beta > 0.0) || !(opts.shrink > 0.0 && opts.shrink < 1.0) {
        return Err(Error::Config(format!("need beta > 0 and 0 < shrink < 1 (got {beta}, {})", opts.shrink)));
    }
    let alpha = 2.0 / nf;
    let ratio_exponent = p - 1.0 - 4.0 / nf;
    let base = GaussianBump { amplitude: 1.0, widths: vec![1.0; n] };
    let base = GaussianBump { amplitude: (beta / base.l2_sq()).sqrt(), ..base };
    let mut steps = Vec::new();
    let mut first_negative = None;
    let mut field = None;
    for j in 0..=opts.max_steps {
        let s = opts.shrink.powi(j as i32);
        let u = base.scaled(s, 1.0, &vec![alpha; n]);
        let grid = grid_for(&[&base, &u], opts.ds, None)?;
        let m0 = measure(&grid, &base, p + 1.0)?;
        let m = measure(&grid, &u, p + 1.0)?;
        let rel = |got: f64, want: f64| (got / want - 1.0).abs();
        let ratio = m.lp / m.grad;
        let law_errors = [
            rel(m.l2 / m0.l2, s.powf(2.0 - alpha * nf)),
            rel(m.lp / m0.lp, s.powf(p + 1.0 - alpha * nf)),
            rel(m.grad / m0.grad, s.powf(2.0 * alpha + 2.0 - alpha * nf)),
            rel(ratio / (m0.lp / m0.grad), s.powf(ratio_exponent)),
        ];
        let energy = 0.5 * m.grad - m.lp / (p + 1.0);
        steps.push(NegativeEnergyStep { s, l2: m.l2, lp1: m.lp, grad: m.grad, energy, ratio, law_errors });
        if energy < 0.0 {
            first_negative = Some(j);
            field = Some(u);
            break;
        }
    }
    Ok(NegativeEnergyReport {
        n,
        p,
        beta,
        alpha,
        ratio_exponent,
        max_law_error: steps.iter().flat_map(|s| s.law_errors).fold(0.0, f64::max),
        max_l2_defect: steps.iter().map(|s| (s.l2 - beta).abs()).fold(0.0, f64::max),
        steps,
        first_negative,
        field,
    })
}
