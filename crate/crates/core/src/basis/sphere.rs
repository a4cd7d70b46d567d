use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::Mode;
use crate::quadrature::{gauss_legendre, jacobi, normalized_legendre};
use crate::{fft, Error, Result, C64};

/// Round sphere `Sⁿ` (n = 2 or 3) with metric `r·g_round`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub n: usize,
    pub max_degree: usize,
    pub quad_theta: usize,
    pub quad_phi: usize,
    #[serde(default = "one")]
    pub metric_scale: f64,
    #[serde(default = "three")]
    pub p_max: f64,
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

impl SphereSpec {
    /// Smallest admissible quadrature for `p_max = 3`; the azimuthal count is
    /// rounded up to a power of two so the FFT path is used.
    pub fn new(n: usize, max_degree: usize) -> Self {
        Self::with_power(n, max_degree, 3.0)
    }

    pub fn with_power(n: usize, max_degree: usize, p_max: f64) -> Self {
        let (qt, qp) = Self::min_quadrature(max_degree, p_max);
        Self { n, max_degree, quad_theta: qt, quad_phi: qp.next_power_of_two(), metric_scale: 1.0, p_max }
    }

    pub fn min_quadrature(max_degree: usize, p_max: f64) -> (usize, usize) {
        let band = (p_max + 1.0) * max_degree as f64;
        ((band / 2.0).ceil() as usize + 1, band.ceil() as usize + 1)
    }

    pub fn unit_volume(&self) -> f64 {
        match self.n {
            2 => 4.0 * PI,
            _ => 2.0 * PI * PI,
        }
    }
}

#[derive(Debug)]
pub struct SphereBasis {
    pub(super) modes: Vec<Mode>,
    pub(super) lap: Vec<f64>,
    pub(super) coeff_weights: Vec<f64>,
    pub(super) grid_weights: Vec<f64>,
    pub(super) volume: f64,
    pub(super) unit_volume: f64,
    /// Latitude nodes: `cos θ` on `S²`, `cos 2χ` on `S³`.
    pub nodes: Vec<f64>,
    pub latitude_weights: Vec<f64>,
    pub n_phi: usize,
    pub n: usize,
    pub metric_scale: f64,
    profiles: Vec<Vec<f64>>,
    groups: Vec<([i64; 2], Vec<usize>)>,
}

impl SphereBasis {
    pub(super) fn new(spec: &SphereSpec) -> Result<Self> {
        let SphereSpec { n, max_degree: big_l, quad_theta, quad_phi, metric_scale, p_max } = *spec;
        if n != 2 && n != 3 {
            return Err(Error::Config(format!("sphere solver supports n = 2 or 3, got {n}")));
        }
        if big_l == 0 || (n == 3 && big_l > 20) {
            return Err(Error::Config(format!("max_degree {big_l} out of range")));
        }
        let (min_t, min_p) = SphereSpec::min_quadrature(big_l, p_max);
        if quad_theta < min_t || quad_phi < min_p {
            return Err(Error::Config(format!(
                "quadrature {quad_theta}x{quad_phi} below dealiasing bound {min_t}x{min_p}"
            )));
        }
        if !(metric_scale > 0.0) {
            return Err(Error::Config(format!("metric_scale must be positive, got {metric_scale}")));
        }
        let (nodes, lw) = gauss_legendre(quad_theta);
        let mut modes = Vec::new();
        let mut profiles = Vec::new();
        let mut lap = Vec::new();
        if n == 2 {
            let tables: Vec<Vec<Vec<f64>>> = nodes.iter().map(|&x| normalized_legendre(big_l, x)).collect();
            for l in 0..=big_l {
                for m in -(l as i64)..=(l as i64) {
                    let am = m.unsigned_abs() as usize;
                    let sign = if m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
                    profiles.push(tables.iter().map(|t| sign * t[l][am]).collect());
                    modes.push(Mode::Harmonic { l, m: [m, 0] });
                    lap.push((l * (l + 1)) as f64 / metric_scale);
                }
            }
        } else {
            for l in 0..=big_l {
                let li = l as i64;
                for m1 in -li..=li {
                    for m2 in -li..=li {
                        let s = m1.abs() + m2.abs();
                        if s > li || (li - s) % 2 != 0 {
                            continue;
                        }
                        let k = ((li - s) / 2) as usize;
                        let (a1, a2) = (m1.abs() as f64, m2.abs() as f64);
                        let mut prof: Vec<f64> = nodes
                            .iter()
                            .map(|&t| {
                                ((1.0 + t) / 2.0).powf(a1 / 2.0)
                                    * ((1.0 - t) / 2.0).powf(a2 / 2.0)
                                    * jacobi(k, a2, a1, t)
                            })
                            .collect();
                        let norm2: f64 =
                            prof.iter().zip(&lw).map(|(p, w)| w / 4.0 * 4.0 * PI * PI * p * p).sum();
                        let inv = 1.0 / norm2.sqrt();
                        prof.iter_mut().for_each(|p| *p *= inv);
                        profiles.push(prof);
                        modes.push(Mode::Harmonic { l, m: [m1, m2] });
                        lap.push((l * (l + 2)) as f64 / metric_scale);
                    }
                }
            }
        }
        let mut groups: Vec<([i64; 2], Vec<usize>)> = Vec::new();
        for (i, m) in modes.iter().enumerate() {
            let Mode::Harmonic { m: f, .. } = m else { unreachable!() };
            match groups.iter_mut().find(|(g, _)| g == f) {
                Some((_, v)) => v.push(i),
                None => groups.push((*f, vec![i])),
            }
        }
        let vol_factor = metric_scale.powf(n as f64 / 2.0);
        let unit_volume = spec.unit_volume();
        let dphi = 2.0 * PI / quad_phi as f64;
        let grid_weights: Vec<f64> = if n == 2 {
            lw.iter().flat_map(|&w| core::iter::repeat_n(w * dphi * vol_factor, quad_phi)).collect()
        } else {
            lw.iter()
                .flat_map(|&w| core::iter::repeat_n(w / 4.0 * dphi * dphi * vol_factor, quad_phi * quad_phi))
                .collect()
        };
        Ok(Self {
            lap,
            coeff_weights: vec![vol_factor; modes.len()],
            modes,
            grid_weights,
            volume: unit_volume * vol_factor,
            unit_volume,
            nodes,
            latitude_weights: lw,
            n_phi: quad_phi,
            n,
            metric_scale,
            profiles,
            groups,
        })
    }

    fn ring_len(&self) -> usize {
        if self.n == 2 { self.n_phi } else { self.n_phi * self.n_phi }
    }

    fn slot(&self, f: [i64; 2]) -> usize {
        let np = self.n_phi as i64;
        if self.n == 2 {
            f[0].rem_euclid(np) as usize
        } else {
            (f[0].rem_euclid(np) * np + f[1].rem_euclid(np)) as usize
        }
    }

    fn ring_transform(&self, ring: &mut [C64], inverse: bool) {
        if self.n == 2 {
            if inverse { fft::inverse(ring) } else { fft::forward(ring) }
        } else {
            fft::transform_nd(ring, &[self.n_phi, self.n_phi], inverse);
        }
    }

    pub(super) fn to_grid(&self, coeffs: &[C64]) -> Vec<C64> {
        let rl = self.ring_len();
        let mut out = vec![C64::new(0.0, 0.0); self.nodes.len() * rl];
        let mut ring = vec![C64::new(0.0, 0.0); rl];
        for t in 0..self.nodes.len() {
            ring.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for (f, idx) in &self.groups {
                let s: C64 = idx.iter().map(|&i| coeffs[i] * self.profiles[i][t]).sum();
                ring[self.slot(*f)] += s;
            }
            self.ring_transform(&mut ring, true);
            out[t * rl..(t + 1) * rl].copy_from_slice(&ring);
        }
        out
    }

    pub(super) fn from_grid(&self, grid: &[C64]) -> Vec<C64> {
        let rl = self.ring_len();
        let mut coeffs = vec![C64::new(0.0, 0.0); self.modes.len()];
        let az = if self.n == 2 { 2.0 * PI } else { PI * PI };
        for t in 0..self.nodes.len() {
            let mut ring = grid[t * rl..(t + 1) * rl].to_vec();
            self.ring_transform(&mut ring, false);
            let w = self.latitude_weights[t] * az / rl as f64;
            for (f, idx) in &self.groups {
                let z = ring[self.slot(*f)] * w;
                for &i in idx {
                    coeffs[i] += z * self.profiles[i][t];
                }
            }
        }
        coeffs
    }

    /// Sample points as `(latitude node, azimuth indices)`; azimuth `a` sits at
    /// `2π a / n_phi`.
    pub fn grid_point(&self, idx: usize) -> (f64, [usize; 2]) {
        if self.n == 2 {
            (self.nodes[idx / self.n_phi], [idx % self.n_phi, 0])
        } else {
            let rl = self.n_phi * self.n_phi;
            let r = idx % rl;
            (self.nodes[idx / rl], [r / self.n_phi, r % self.n_phi])
        }
    }
}
