//! Radix-2 FFT and a direct DFT for the odd-sized azimuthal grids.
//!
//! Convention: `forward` computes `X_k = Σ_j x_j e^{-2πi jk/N}` and `inverse`
//! computes `x_j = Σ_k X_k e^{+2πi jk/N}`; neither normalizes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

fn bit_reverse(data: &mut [C64]) {
    let n = data.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
}

fn radix2(data: &mut [C64], sign: f64) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    bit_reverse(data);
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // twiddles computed directly rather than by recurrence to keep
        // round-off at the 1e-15 level for N up to a few thousand
        let tw: Vec<C64> = (0..half)
            .map(|k| C64::new((ang * k as f64).cos(), (ang * k as f64).sin()))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * tw[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// In-place forward transform. Power-of-two lengths use the FFT, anything
/// else falls back to the O(N²) sum.
pub fn forward(data: &mut [C64]) {
    if data.len().is_power_of_two() {
        radix2(data, -1.0);
    } else {
        direct(data, -1.0);
    }
}

pub fn inverse(data: &mut [C64]) {
    if data.len().is_power_of_two() {
        radix2(data, 1.0);
    } else {
        direct(data, 1.0);
    }
}

fn direct(data: &mut [C64], sign: f64) {
    let n = data.len();
    let src = data.to_vec();
    for (k, out) in data.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (j, x) in src.iter().enumerate() {
            let ang = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
            acc += x * C64::new(ang.cos(), ang.sin());
        }
        *out = acc;
    }
}

/// Apply a 1-D transform along every axis of a row-major array with the given
/// shape (last axis contiguous).
pub fn transform_nd(data: &mut [C64], shape: &[usize], inverse_dir: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len());
    let mut stride = 1usize;
    for axis in (0..shape.len()).rev() {
        let len = shape[axis];
        let outer = total / (len * stride);
        let mut line = vec![C64::new(0.0, 0.0); len];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                if inverse_dir {
                    inverse(&mut line);
                } else {
                    forward(&mut line);
                }
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
        stride *= len;
    }
}

/// Evaluate `Σ_m c_m e^{i m φ_a}` at `φ_a = 2π a / n_points` for integer
/// frequencies `freqs[j]` (any sign, any count).
pub fn synth_trig(coeffs: &[C64], freqs: &[i64], n_points: usize, out: &mut [C64]) {
    debug_assert_eq!(out.len(), n_points);
    for (a, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, &m) in coeffs.iter().zip(freqs) {
            let idx = (m * a as i64).rem_euclid(n_points as i64) as f64;
            let ang = 2.0 * PI * idx / n_points as f64;
            acc += c * C64::new(ang.cos(), ang.sin());
        }
        *o = acc;
    }
}

/// Discrete projection `(1/n) Σ_a f_a e^{-i m φ_a}` for each requested frequency.
pub fn analyze_trig(values: &[C64], freqs: &[i64], out: &mut [C64]) {
    let n = values.len();
    for (o, &m) in out.iter_mut().zip(freqs) {
        let mut acc = C64::new(0.0, 0.0);
        for (a, v) in values.iter().enumerate() {
            let idx = (m * a as i64).rem_euclid(n as i64) as f64;
            let ang = -2.0 * PI * idx / n as f64;
            acc += v * C64::new(ang.cos(), ang.sin());
        }
        *o = acc / n as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[C64], sign: f64) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(C64::new(0.0, 0.0), |acc, (j, v)| {
                    let a = sign * 2.0 * PI * (j * k) as f64 / n as f64;
                    acc + v * C64::new(a.cos(), a.sin())
                })
            })
            .collect()
    }

    #[test]
    fn radix2_matches_naive_sum() {
        let x: Vec<C64> = (0..16)
            .map(|j| C64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let mut y = x.clone();
        forward(&mut y);
        let z = naive(&x, -1.0);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-12);
        }
        inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / 16.0 - b).norm() < 1e-14);
        }
    }

    #[test]
    fn odd_length_falls_back_to_direct() {
        let x: Vec<C64> = (0..9).map(|j| C64::new(j as f64, -(j as f64) * 0.5)).collect();
        let mut y = x.clone();
        forward(&mut y);
        for (a, b) in y.iter().zip(&naive(&x, -1.0)) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn trig_synthesis_inverts_analysis() {
        let freqs = [-2i64, 0, 1, 3];
        let c = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.0, 1.0), C64::new(0.25, -0.75)];
        let mut grid = vec![C64::new(0.0, 0.0); 9];
        synth_trig(&c, &freqs, 9, &mut grid);
        let mut back = [C64::new(0.0, 0.0); 4];
        analyze_trig(&grid, &freqs, &mut back);
        for (a, b) in back.iter().zip(&c) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
