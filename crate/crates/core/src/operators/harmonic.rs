//! Degree-`k` harmonic polynomials on `ℝ^{n+1}` restricted to `Sⁿ`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::linalg::{
    cholesky, forward_substitute, hermitian_eigen, lu_solve, null_space, CMat, DMat,
};
use crate::{Error, Result, C64};

/// `V_k` with an exact Gram matrix and the matrix of `X_ij`.
#[derive(Clone, Debug)]
pub struct HarmonicSpaceRep {
    pub n: usize,
    pub k: usize,
    pub plane: [usize; 2],
    /// Exponent vectors of the degree-`k` monomials (row order of the bases).
    pub monomials: Vec<Vec<u32>>,
    /// Null-space basis of the ambient Laplacian; columns span `V_k`.
    pub basis_polys: DMat,
    /// `L²(Sⁿ)` Gram matrix of `basis_polys`.
    pub gram: DMat,
    /// Matrix of `X_ij` in the `basis_polys` coordinates.
    pub x_matrix: DMat,
    /// `L²`-orthonormal basis of `V_k` (monomial coefficients, columns).
    pub orthonormal: DMat,
    /// Real skew-symmetric matrix of `X_ij` in the orthonormal basis.
    pub x_orthonormal: DMat,
    monomial_gram: DMat,
}

pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n as u64 - i) / (i + 1);
    }
    r
}

/// `dim V_k = C(n+k, k) - C(n+k-2, k-2)`.
pub fn harmonic_dimension(n: usize, k: usize) -> usize {
    let (n, k) = (n as i64, k as i64);
    (binomial(n + k, k) - binomial(n + k - 2, k - 2)) as usize
}

fn monomials(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(vars: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for d in (0..=degree).rev() {
            prefix.push(d);
            rec(vars, degree - d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, degree, &mut Vec::new(), &mut out);
    out
}

fn double_factorial(m: i64) -> f64 {
    let mut r = 1.0;
    let mut k = m;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

/// Surface area of the unit sphere in `ℝ^big_n`.
pub fn unit_sphere_area(big_n: usize) -> f64 {
    // ω = 2 π^{N/2} / Γ(N/2)
    let gamma_half = if big_n.is_multiple_of(2) {
        (1..big_n / 2).map(|i| i as f64).product::<f64>()
    } else {
        double_factorial(big_n as i64 - 2) * PI.sqrt() / 2f64.powi((big_n as i32 - 1) / 2)
    };
    2.0 * PI.powf(big_n as f64 / 2.0) / gamma_half
}

/// `∫_{S^{N-1}} x^a dS`, exact.
pub fn monomial_integral(a: &[u32]) -> f64 {
    if a.iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let big_n = a.len();
    let total: u32 = a.iter().sum();
    let num: f64 = a.iter().map(|&e| double_factorial(e as i64 - 1)).product();
    let den: f64 = (0..total / 2).map(|j| (big_n + 2 * j as usize) as f64).product();
    unit_sphere_area(big_n) * num / den
}

/// Basis, Gram matrix and rotation-generator matrix of `V_k` on `Sⁿ`.
pub fn build_harmonic_rep(n: usize, k: usize, plane: [usize; 2]) -> Result<HarmonicSpaceRep> {
    if !(1..=5).contains(&n) || k > 12 {
        return Err(Error::Config(format!("harmonic representation needs n <= 5, k <= 12 (got n={n}, k={k})")));
    }
    let vars = n + 1;
    if plane[0] == plane[1] || plane[0] >= vars || plane[1] >= vars {
        return Err(Error::Config(format!("invalid rotation plane {plane:?} in R^{vars}")));
    }
    let mons = monomials(vars, k as u32);
    let index: BTreeMap<Vec<u32>, usize> = mons.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();

    let basis_polys = if k < 2 {
        DMat::identity(mons.len())
    } else {
        let lower = monomials(vars, k as u32 - 2);
        let lidx: BTreeMap<Vec<u32>, usize> = lower.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut lap = DMat::zeros(lower.len(), mons.len());
        for (c, a) in mons.iter().enumerate() {
            for i in 0..vars {
                if a[i] >= 2 {
                    let mut b = a.clone();
                    b[i] -= 2;
                    lap[(lidx[&b], c)] += (a[i] * (a[i] - 1)) as f64;
                }
            }
        }
        null_space(&lap, 1e-12)
    };
    let dim = harmonic_dimension(n, k);
    if basis_polys.cols != dim {
        return Err(Error::Assembly(format!(
            "harmonic null space has dimension {} but dim V_{k} = {dim}",
            basis_polys.cols
        )));
    }

    let monomial_gram = DMat::from_fn(mons.len(), mons.len(), |i, j| {
        let s: Vec<u32> = mons[i].iter().zip(&mons[j]).map(|(a, b)| a + b).collect();
        monomial_integral(&s)
    });
    let gm_n = monomial_gram.matmul(&basis_polys);
    let gram = basis_polys.tr_matmul(&gm_n);

    // orthonormalize twice: Q = N L^{-T}, then once more against the exact Gram
    let mut q = orthonormalize(&basis_polys, &gram)?;
    let g2 = q.tr_matmul(&monomial_gram.matmul(&q));
    q = orthonormalize(&q, &g2)?;

    let [pi, pj] = plane;
    let mut xm = DMat::zeros(mons.len(), mons.len());
    for (c, a) in mons.iter().enumerate() {
        // (x_i ∂_j - x_j ∂_i) x^a
        if a[pj] > 0 {
            let mut b = a.clone();
            b[pj] -= 1;
            b[pi] += 1;
            xm[(index[&b], c)] += a[pj] as f64;
        }
        if a[pi] > 0 {
            let mut b = a.clone();
            b[pi] -= 1;
            b[pj] += 1;
            xm[(index[&b], c)] -= a[pi] as f64;
        }
    }
    let xq = xm.matmul(&q);
    let x_orthonormal = q.tr_matmul(&monomial_gram.matmul(&xq));
    let xn = xm.matmul(&basis_polys);
    let rhs = basis_polys.tr_matmul(&monomial_gram.matmul(&xn));
    let mut x_matrix = DMat::zeros(dim, dim);
    for c in 0..dim {
        let mut col = rhs.col(c).to_vec();
        lu_solve(&gram, &mut col)?;
        x_matrix.col_mut(c).copy_from_slice(&col);
    }
    Ok(HarmonicSpaceRep {
        n,
        k,
        plane,
        monomials: mons,
        basis_polys,
        gram,
        x_matrix,
        orthonormal: q,
        x_orthonormal,
        monomial_gram,
    })
}

/// `B L^{-T}` where `L Lᵀ = gram`.
fn orthonormalize(b: &DMat, gram: &DMat) -> Result<DMat> {
    let l = cholesky(gram)?;
    let mut out = DMat::zeros(b.rows, b.cols);
    let mut row = vec![0.0; b.cols];
    for r in 0..b.rows {
        for (c, x) in row.iter_mut().enumerate() {
            *x = b[(r, c)];
        }
        forward_substitute(&l, &mut row);
        for (c, x) in row.iter().enumerate() {
            out[(r, c)] = *x;
        }
    }
    Ok(out)
}

impl HarmonicSpaceRep {
    pub fn dim(&self) -> usize {
        self.orthonormal.cols
    }

    /// `max |G X + Xᵀ G|`: skew-adjointness of `X` with respect to the Gram matrix.
    pub fn skew_defect(&self) -> f64 {
        let gx = self.gram.matmul(&self.x_matrix);
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((gx[(i, j)] + gx[(j, i)]).abs());
            }
        }
        worst / self.gram.max_abs().max(1.0)
    }

    /// Coordinates in the orthonormal basis of a complex polynomial in `V_k`
    /// given by monomial coefficients.
    pub fn coordinates(&self, poly: &[C64]) -> Vec<C64> {
        let re: Vec<f64> = poly.iter().map(|z| z.re).collect();
        let im: Vec<f64> = poly.iter().map(|z| z.im).collect();
        let gre = matvec(&self.monomial_gram, &re);
        let gim = matvec(&self.monomial_gram, &im);
        (0..self.dim())
            .map(|c| {
                let col = self.orthonormal.col(c);
                C64::new(crate::linalg::dot(col, &gre), crate::linalg::dot(col, &gim))
            })
            .collect()
    }

    /// Monomial coefficients of `(x_i + i x_j)^k` for the representation plane.
    pub fn highest_weight_poly(&self) -> Vec<C64> {
        let [pi, pj] = self.plane;
        let mut out = vec![C64::new(0.0, 0.0); self.monomials.len()];
        let k = self.k as u32;
        for (idx, a) in self.monomials.iter().enumerate() {
            let others = a.iter().enumerate().any(|(v, &e)| v != pi && v != pj && e > 0);
            if others {
                continue;
            }
            let s = a[pj];
            // C(k, s) x_i^{k-s} (i x_j)^s
            let c = binomial(k as i64, s as i64) as f64;
            out[idx] = C64::new(0.0, 1.0).powu(s) * c;
        }
        out
    }
}

fn matvec(m: &DMat, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.rows];
    for (c, &xc) in x.iter().enumerate() {
        if xc != 0.0 {
            for (yi, a) in y.iter_mut().zip(m.col(c)) {
                *yi += a * xc;
            }
        }
    }
    y
}

/// Spectrum of `X` on `V_k`.
#[derive(Clone, Debug, Serialize)]
pub struct XEigenReport {
    pub n: usize,
    pub k: usize,
    /// `μ` with `X z = iμ z`, ascending.
    pub eigenvalues: Vec<f64>,
    pub max_integer_defect: f64,
    pub max_modulus: f64,
    /// Distance between the normalized `μ = k` eigenvector and `(x₁ + i x₂)^k`
    /// after phase alignment.
    pub highest_weight_distance: f64,
}

pub fn x_eigenstructure(rep: &HarmonicSpaceRep) -> Result<XEigenReport> {
    let d = rep.dim();
    let c = &rep.x_orthonormal;
    // X z = iμ z  ⇔  (-iC) z = μ z
    let h = CMat { re: DMat::zeros(d, d), im: DMat::from_fn(d, d, |i, j| -c[(i, j)]) };
    let (eigs, _) = hermitian_eigen(&h, false)?;
    let max_integer_defect = eigs.iter().map(|m| (m - m.round()).abs()).fold(0.0, f64::max);
    let max_modulus = eigs.iter().map(|m| m.abs()).fold(0.0, f64::max);

    // inverse iteration on the real embedding of -iC - kI
    let shift = rep.k as f64 + 1e-7;
    let emb = DMat::from_fn(2 * d, 2 * d, |r, col| {
        let (br, bc, i, j) = (r / d, col / d, r % d, col % d);
        let base = match (br, bc) {
            (0, 1) => c[(i, j)],
            (1, 0) => -c[(i, j)],
            _ => 0.0,
        };
        if r == col { base - shift } else { base }
    });
    let target = rep.coordinates(&rep.highest_weight_poly());
    let mut v: Vec<f64> = target.iter().map(|z| z.re + 0.1).chain(target.iter().map(|z| z.im - 0.1)).collect();
    for _ in 0..3 {
        lu_solve(&emb, &mut v)?;
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
    }
    let z: Vec<C64> = (0..d).map(|i| C64::new(v[i], v[d + i])).collect();
    let highest_weight_distance = phase_aligned_distance(&z, &target);
    Ok(XEigenReport { n: rep.n, k: rep.k, eigenvalues: eigs, max_integer_defect, max_modulus, highest_weight_distance })
}

/// `min_θ ‖a/‖a‖ - e^{iθ} b/‖b‖‖`.
pub fn phase_aligned_distance(a: &[C64], b: &[C64]) -> f64 {
    let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / na - phase * y / nb).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// One row of the `-L_α` report.
#[derive(Clone, Debug, Serialize)]
pub struct LAlphaRow {
    pub k: usize,
    pub dim: usize,
    pub min_eigenvalue: f64,
    /// `min_{|j| ≤ k} k(k+n-1) - j² - αj`.
    pub predicted_min: f64,
    pub error: f64,
    /// Eigenvalues within `1e-8` of zero.
    pub kernel_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LAlphaReport {
    pub n: usize,
    pub alpha: f64,
    pub rows: Vec<LAlphaRow>,
    pub max_error: f64,
    /// Every computed minimum is `≥ -1e-8`.
    pub semidefinite: bool,
    pub first_negative_k: Option<usize>,
    /// `|α| < n - 1`.
    pub strict_bound: bool,
    /// `|α| ≤ n - 1`.
    pub nonstrict_bound: bool,
    /// Semidefinite exactly when `|α| ≤ n - 1` (checked over `k ≤ k_max`).
    pub agrees_with_lemma: bool,
}

pub fn predicted_min(n: usize, k: usize, alpha: f64) -> f64 {
    let base = (k * (k + n - 1)) as f64;
    (-(k as i64)..=(k as i64))
        .map(|j| base - (j * j) as f64 - alpha * j as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Diagonalize `-L_α = -Δ + X² + iαX` on each `V_k`, `k ≤ k_max`.
pub fn check_l_alpha_semidefinite(n: usize, k_max: usize, alpha: f64) -> Result<LAlphaReport> {
    let reps: Vec<HarmonicSpaceRep> =
        (0..=k_max).map(|k| build_harmonic_rep(n, k, [0, 1])).collect::<Result<_>>()?;
    l_alpha_from_reps(&reps, alpha)
}

/// Same as [`check_l_alpha_semidefinite`] on prebuilt representations.
pub fn l_alpha_from_reps(reps: &[HarmonicSpaceRep], alpha: f64) -> Result<LAlphaReport> {
    let n = reps.first().map(|r| r.n).unwrap_or(1);
    let mut rows = Vec::new();
    for rep in reps {
        let d = rep.dim();
        let c = &rep.x_orthonormal;
        let c2 = c.matmul(c);
        let kk = (rep.k * (rep.k + n - 1)) as f64;
        // -Δ ↦ k(k+n-1), X² ↦ C², iαX ↦ iαC
        let h = CMat {
            re: DMat::from_fn(d, d, |i, j| c2[(i, j)] + if i == j { kk } else { 0.0 }),
            im: DMat::from_fn(d, d, |i, j| alpha * c[(i, j)]),
        };
        let (eigs, _) = hermitian_eigen(&h, false)?;
        let min = eigs[0];
        let pred = predicted_min(n, rep.k, alpha);
        rows.push(LAlphaRow {
            k: rep.k,
            dim: d,
            min_eigenvalue: min,
            predicted_min: pred,
            error: (min - pred).abs(),
            kernel_dim: eigs.iter().filter(|e| e.abs() < 1e-8).count(),
        });
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    let semidefinite = rows.iter().all(|r| r.min_eigenvalue >= -1e-8);
    let first_negative_k = rows.iter().find(|r| r.min_eigenvalue < -1e-8).map(|r| r.k);
    let bound = (n as f64 - 1.0) - alpha.abs();
    let nonstrict_bound = bound >= 0.0;
    Ok(LAlphaReport {
        n,
        alpha,
        max_error,
        semidefinite,
        first_negative_k,
        strict_bound: bound > 0.0,
        nonstrict_bound,
        agrees_with_lemma: semidefinite == nonstrict_bound,
        rows,
    })
}
