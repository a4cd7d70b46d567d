use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::Mode;
use crate::linalg::BandCholesky;
use crate::rng::{self, Rand};
use crate::{Error, Result, C64};

/// Volume density `A(r)` of `dM = A(r) dr dN`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialWeight {
    /// `A(r) = c`.
    Constant { value: f64 },
    /// `A(r) = e^{a r}`.
    Exponential { rate: f64 },
    /// `A(r) = (s + r)^k`.
    Polynomial { shift: f64, power: f64 },
}

impl RadialWeight {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Exponential { rate } => (rate * r).exp(),
            Self::Polynomial { shift, power } => (shift + r).powf(power),
        }
    }
}

/// Radially symmetric manifold `N × [0, r_max]` on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    /// Dimension of `M` (cross-section dimension plus one).
    pub dim: usize,
    pub r_max: f64,
    /// Number of grid intervals; nodes are `r_i = i·r_max/intervals`.
    pub intervals: usize,
    pub weight: RadialWeight,
    #[serde(default = "one")]
    pub cross_section_volume: f64,
    /// Assumed positive lower bound on `A`, reported against the samples.
    #[serde(default)]
    pub a_lower_bound: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl RadialSpec {
    pub fn new(dim: usize, r_max: f64, intervals: usize, weight: RadialWeight) -> Self {
        Self { dim, r_max, intervals, weight, cross_section_volume: 1.0, a_lower_bound: None }
    }

    pub fn step(&self) -> f64 {
        self.r_max / self.intervals as f64
    }

    /// All nodes including `r_max`.
    pub fn grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.intervals).map(|i| i as f64 * h).collect()
    }

    pub fn sampled_weight(&self) -> Vec<f64> {
        self.grid().iter().map(|&r| self.weight.eval(r)).collect()
    }

    /// Composite-trapezoid `Vol(N)·∫ f(r) A(r) dr` over all nodes.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let g = self.grid();
        let w = crate::quadrature::trapezoid_weights(&g);
        self.cross_section_volume * g.iter().zip(&w).map(|(&r, w)| w * f(r) * self.weight.eval(r)).sum::<f64>()
    }

    /// Same spec on `[0, 2 r_max]` at equal step.
    pub fn doubled(&self) -> Self {
        Self { r_max: 2.0 * self.r_max, intervals: 2 * self.intervals, ..self.clone() }
    }
}

/// Fourth-order staggered derivative, Neumann reflection at `r = 0` and a
/// Dirichlet condition at `r_max`.
#[derive(Debug)]
pub struct RadialBasis {
    pub(super) modes: Vec<Mode>,
    pub(super) mass_weights: Vec<f64>,
    pub(super) volume: f64,
    /// Unknown nodes `r_0 .. r_{N-1}`.
    pub nodes: Vec<f64>,
    pub h: f64,
    /// `Vol(N)·A(r_{j+1/2})·h` at the half points.
    pub stiffness: Vec<f64>,
    /// Row `j` of the derivative operator as `(column, coefficient)` pairs.
    pub deriv: Vec<Vec<(usize, f64)>>,
    precond: BandCholesky,
    lap_bound: f64,
    r_max: f64,
}

impl RadialBasis {
    pub(super) fn new(spec: &RadialSpec) -> Result<Self> {
        let n = spec.intervals;
        if n < 8 {
            return Err(Error::Config(format!("radial grid needs at least 8 intervals, got {n}")));
        }
        if !(spec.r_max > 0.0) || !(spec.cross_section_volume > 0.0) || spec.dim == 0 {
            return Err(Error::Config(format!(
                "invalid radial spec: r_max {}, Vol(N) {}, dim {}",
                spec.r_max, spec.cross_section_volume, spec.dim
            )));
        }
        let h = spec.step();
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let a_nodes: Vec<f64> = spec.grid().iter().map(|&r| spec.weight.eval(r)).collect();
        if let Some(bad) = a_nodes.iter().position(|a| !(*a > 0.0)) {
            return Err(Error::Config(format!("A(r) must be positive; A({}) = {}", bad as f64 * h, a_nodes[bad])));
        }
        let vol = spec.cross_section_volume;
        let mass_weights: Vec<f64> =
            (0..n).map(|i| if i == 0 { 0.5 * h } else { h } * a_nodes[i] * vol).collect();
        let stiffness: Vec<f64> = (0..n).map(|j| vol * spec.weight.eval((j as f64 + 0.5) * h) * h).collect();
        let deriv: Vec<Vec<(usize, f64)>> = (0..n).map(|j| stencil_row(j, n, h)).collect();
        // band of DᵀSD, |a - b| <= 3
        let mut band = vec![[0.0f64; 4]; n];
        for (j, row) in deriv.iter().enumerate() {
            for &(a, ca) in row {
                for &(b, cb) in row {
                    if a >= b {
                        band[a][a - b] += ca * stiffness[j] * cb;
                    }
                }
            }
        }
        let lap_bound = (0..n)
            .map(|i| {
                let row: f64 = (0..4).map(|k| band[i][k].abs()).sum::<f64>()
                    + (1..4).filter(|k| i + k < n).map(|k| band[i + k][k].abs()).sum::<f64>();
                row / mass_weights[i]
            })
            .fold(0.0, f64::max);
        let precond = BandCholesky::new(n, 3, |i, j| {
            band[i][i - j] + if i == j { mass_weights[i] } else { 0.0 }
        })?;
        let volume = vol * {
            let g = spec.grid();
            let w = crate::quadrature::trapezoid_weights(&g);
            g.iter().zip(&w).map(|(&r, w)| w * spec.weight.eval(r)).sum::<f64>()
        };
        Ok(Self {
            modes: (0..n).map(Mode::Node).collect(),
            mass_weights,
            volume,
            nodes,
            h,
            stiffness,
            deriv,
            precond,
            lap_bound,
            r_max: spec.r_max,
        })
    }

    /// Discrete `∂_r u` at the half points.
    pub fn derivative(&self, u: &[C64]) -> Vec<C64> {
        self.deriv.iter().map(|row| row.iter().map(|&(i, c)| u[i] * c).sum()).collect()
    }

    pub(super) fn neg_laplacian(&self, u: &[C64]) -> Vec<C64> {
        let du = self.derivative(u);
        let mut out = vec![C64::new(0.0, 0.0); u.len()];
        for (j, row) in self.deriv.iter().enumerate() {
            let s = du[j] * self.stiffness[j];
            for &(i, c) in row {
                out[i] += s * c;
            }
        }
        out.iter_mut().zip(&self.mass_weights).for_each(|(o, w)| *o /= *w);
        out
    }

    pub(super) fn sobolev_inverse(&self, u: &[C64]) -> Vec<C64> {
        let mut re: Vec<f64> = u.iter().zip(&self.mass_weights).map(|(z, w)| z.re * w).collect();
        let mut im: Vec<f64> = u.iter().zip(&self.mass_weights).map(|(z, w)| z.im * w).collect();
        self.precond.solve(&mut re);
        self.precond.solve(&mut im);
        re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect()
    }

    pub(super) fn laplacian_bound(&self) -> f64 {
        self.lap_bound
    }

    /// Gaussian centered at `r = 0` of width `max(r_max/16, 4h)`.
    pub fn origin_bump(&self) -> Vec<C64> {
        let w = (self.r_max / 16.0).max(4.0 * self.h);
        self.nodes.iter().map(|r| C64::new((-(r / w).powi(2)).exp(), 0.0)).collect()
    }

    pub(super) fn random_field(&self, rng: &mut Rand) -> Vec<C64> {
        let mut u = vec![C64::new(0.0, 0.0); self.nodes.len()];
        let bumps = 1 + (rng::uniform(rng) * 3.0) as usize;
        for _ in 0..bumps {
            let center = rng::uniform(rng) * 0.4 * self.r_max;
            let width = (0.5 + rng::uniform(rng) * 1.5).min(0.1 * self.r_max).max(2.0 * self.h);
            let amp = rng::complex_normal(rng);
            for (x, &r) in u.iter_mut().zip(&self.nodes) {
                let s = (r - center) / width;
                *x += amp * (-s * s).exp();
            }
        }
        // taper so the Dirichlet end is reached smoothly
        for (x, &r) in u.iter_mut().zip(&self.nodes) {
            let t = r / self.r_max;
            *x *= 1.0 - t.powi(8);
        }
        u
    }
}

fn stencil_row(j: usize, n: usize, h: f64) -> Vec<(usize, f64)> {
    let c = 1.0 / (24.0 * h);
    let taps = [(j as i64 - 1, c), (j as i64, -27.0 * c), (j as i64 + 1, 27.0 * c), (j as i64 + 2, -c)];
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(4);
    let mut add = |idx: i64, coef: f64| {
        // even reflection at 0, odd reflection about the Dirichlet node n
        let (idx, coef) = if idx < 0 {
            (-idx, coef)
        } else if idx > n as i64 {
            (2 * n as i64 - idx, -coef)
        } else {
            (idx, coef)
        };
        if idx as usize >= n {
            return;
        }
        match row.iter_mut().find(|(i, _)| *i == idx as usize) {
            Some(e) => e.1 += coef,
            None => row.push((idx as usize, coef)),
        }
    };
    for (i, cf) in taps {
        add(i, cf);
    }
    row
}
