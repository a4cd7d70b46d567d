use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::Mode;
use crate::{fft, Error, Result, C64};

/// Flat torus `ℝⁿ / kℤⁿ` with metric `r·g_flat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub n: usize,
    pub period: f64,
    pub grid_points: usize,
    #[serde(default = "one")]
    pub metric_scale: f64,
    /// Largest nonlinearity power the grid must dealias.
    #[serde(default = "three")]
    pub p_max: f64,
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

impl TorusSpec {
    pub fn new(n: usize, period: f64, grid_points: usize) -> Self {
        Self { n, period, grid_points, metric_scale: 1.0, p_max: 3.0 }
    }

    /// Largest active wavenumber per axis.
    pub fn max_wavenumber(&self) -> i64 {
        ((self.grid_points as f64 - 1.0) / (self.p_max + 1.0)).floor() as i64
    }

    pub fn volume(&self) -> f64 {
        (self.metric_scale.sqrt() * self.period).powi(self.n as i32)
    }
}

#[derive(Debug)]
pub struct TorusBasis {
    pub(super) modes: Vec<Mode>,
    pub(super) lap: Vec<f64>,
    pub(super) coeff_weights: Vec<f64>,
    pub(super) grid_weights: Vec<f64>,
    pub(super) volume: f64,
    pub(super) zero_mode: usize,
    shape: Vec<usize>,
    slots: Vec<usize>,
    /// Mode wavenumbers, for Killing symbols.
    pub wavenumbers: Vec<Vec<i64>>,
    pub period: f64,
    pub metric_scale: f64,
    pub n: usize,
    pub grid_points: usize,
}

impl TorusBasis {
    pub(super) fn new(spec: &TorusSpec) -> Result<Self> {
        let TorusSpec { n, period, grid_points: np, metric_scale, p_max } = *spec;
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("torus dimension {n} outside 1..=3")));
        }
        if np < 8 || !np.is_power_of_two() {
            return Err(Error::Config(format!("grid_points {np} must be a power of two >= 8")));
        }
        if !(period > 0.0) || !(metric_scale > 0.0) || !(p_max >= 1.0) {
            return Err(Error::Config(format!(
                "invalid torus parameters: period {period}, metric_scale {metric_scale}, p_max {p_max}"
            )));
        }
        let mmax = spec.max_wavenumber();
        if mmax < 1 {
            return Err(Error::Config(format!("grid_points {np} too small to dealias p = {p_max}")));
        }
        let side = (2 * mmax + 1) as usize;
        let count = side.pow(n as u32);
        let volume = spec.volume();
        let mut modes = Vec::with_capacity(count);
        let mut wavenumbers = Vec::with_capacity(count);
        let mut lap = Vec::with_capacity(count);
        let mut slots = Vec::with_capacity(count);
        let mut zero_mode = 0;
        for flat in 0..count {
            let mut rem = flat;
            let mut q = vec![0i64; n];
            for axis in (0..n).rev() {
                q[axis] = (rem % side) as i64 - mmax;
                rem /= side;
            }
            let mut slot = 0usize;
            for &qi in &q {
                slot = slot * np + qi.rem_euclid(np as i64) as usize;
            }
            let k2: f64 = q.iter().map(|&qi| (2.0 * PI * qi as f64 / period).powi(2)).sum();
            if q.iter().all(|&x| x == 0) {
                zero_mode = flat;
            }
            lap.push(k2 / metric_scale);
            slots.push(slot);
            modes.push(Mode::Fourier(q.clone()));
            wavenumbers.push(q);
        }
        let total = np.pow(n as u32);
        Ok(Self {
            modes,
            lap,
            coeff_weights: vec![volume; count],
            grid_weights: vec![volume / total as f64; total],
            volume,
            zero_mode,
            shape: vec![np; n],
            slots,
            wavenumbers,
            period,
            metric_scale,
            n,
            grid_points: np,
        })
    }

    pub(super) fn to_grid(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); self.grid_weights.len()];
        for (c, &s) in coeffs.iter().zip(&self.slots) {
            g[s] = *c;
        }
        fft::transform_nd(&mut g, &self.shape, true);
        g
    }

    pub(super) fn from_grid(&self, grid: &[C64]) -> Vec<C64> {
        let mut g = grid.to_vec();
        fft::transform_nd(&mut g, &self.shape, false);
        let inv = 1.0 / g.len() as f64;
        self.slots.iter().map(|&s| g[s] * inv).collect()
    }

    /// Coordinates of grid point `idx` (row-major, last axis fastest).
    pub fn grid_point(&self, idx: usize) -> Vec<f64> {
        let h = self.period / self.grid_points as f64;
        let mut rem = idx;
        let mut x = vec![0.0; self.n];
        for axis in (0..self.n).rev() {
            x[axis] = (rem % self.grid_points) as f64 * h;
            rem /= self.grid_points;
        }
        x
    }
}
