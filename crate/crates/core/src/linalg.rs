//! Dense and banded linear algebra used by the spectral checks.
//!
//! The symmetric eigensolver is the Householder tridiagonalization plus
//! implicit QL iteration (the classical `tred2`/`tql2` pair). Hermitian
//! matrices are handled through the real embedding `[[A, -B], [B, A]]`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng;
use crate::{Error, Result, C64};

/// Dense real matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[c * rows + r] = f(r, c);
            }
        }
        m
    }

    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in oc.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.cols, other.cols, |i, j| dot(self.col(i), other.col(j)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl core::ops::Index<(usize, usize)> for DMat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[c * self.rows + r]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[c * self.rows + r]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigen-decomposition of a real symmetric matrix. Eigenvalues ascending;
/// eigenvectors (if requested) are the columns of the returned matrix.
pub fn symmetric_eigen(a: &DMat, want_vectors: bool) -> Result<(Vec<f64>, Option<DMat>)> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| DMat::zeros(0, 0))));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, want_vectors);
    tql2(&mut v, &mut d, &mut e, want_vectors)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals = idx.iter().map(|&i| d[i]).collect();
    let vecs = want_vectors.then(|| {
        let mut out = DMat::zeros(n, n);
        for (c, &i) in idx.iter().enumerate() {
            out.col_mut(c).copy_from_slice(v.col(i));
        }
        out
    });
    Ok((vals, vecs))
}

fn tred2(v: &mut DMat, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = v.rows;
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    let vkj = v[(k, j)];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = v.col_mut(j);
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for j in 0..n {
            d[j] = v[(j, j)];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                let col = v.col_mut(j);
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut DMat, d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(1);
    let mut total_iter = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                total_iter += 1;
                if total_iter > max_iter {
                    return Err(Error::EigenNonConvergence { iterations: total_iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        let rows = v.rows;
                        let (lo, hi) = v.data.split_at_mut((i + 1) * rows);
                        let ci = &mut lo[i * rows..];
                        let ci1 = &mut hi[..rows];
                        for k in 0..rows {
                            let hk = ci1[k];
                            ci1[k] = s * ci[k] + c * hk;
                            ci[k] = c * ci[k] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Dense complex matrix stored as real and imaginary parts.
#[derive(Clone, Debug)]
pub struct CMat {
    pub re: DMat,
    pub im: DMat,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { re: DMat::zeros(rows, cols), im: DMat::zeros(rows, cols) }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        C64::new(self.re[(r, c)], self.im[(r, c)])
    }

    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        self.re[(r, c)] = z.re;
        self.im[(r, c)] = z.im;
    }

    pub fn rows(&self) -> usize {
        self.re.rows
    }

    /// Largest `|H - Hᴴ|` entry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                let b = self.get(j, i).conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }
}

/// Hermitian eigen-decomposition. Eigenvalues ascending; eigenvectors are
/// returned as columns of a complex matrix when requested.
pub fn hermitian_eigen(h: &CMat, want_vectors: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let n = h.rows();
    let emb = DMat::from_fn(2 * n, 2 * n, |r, c| {
        let (br, bc) = (r / n, c / n);
        let (i, j) = (r % n, c % n);
        match (br, bc) {
            (0, 0) | (1, 1) => h.re[(i, j)],
            (0, 1) => -h.im[(i, j)],
            _ => h.im[(i, j)],
        }
    });
    let (vals2, vecs2) = symmetric_eigen(&emb, want_vectors)?;
    let vals: Vec<f64> = vals2.iter().step_by(2).copied().collect();
    if !want_vectors {
        return Ok((vals, None));
    }
    let vecs2 = vecs2.expect("requested");
    let scale = vals2.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let cluster_tol = 1e-9 * scale;
    let mut out = CMat::zeros(n, n);
    let mut col = 0usize;
    let mut start = 0usize;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n && vals2[end] - vals2[end - 1] <= cluster_tol {
            end += 1;
        }
        let want = (end - start) / 2;
        let mut cands: Vec<Vec<C64>> = (start..end)
            .map(|c| {
                let v = vecs2.col(c);
                (0..n).map(|i| C64::new(v[i], v[n + i])).collect()
            })
            .collect();
        for _ in 0..want {
            let (best, _) = cands
                .iter()
                .enumerate()
                .map(|(i, z)| (i, cnorm(z)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let mut z = cands.swap_remove(best);
            let nz = cnorm(&z);
            z.iter_mut().for_each(|x| *x /= nz);
            for other in cands.iter_mut() {
                let proj: C64 = z.iter().zip(other.iter()).map(|(a, b)| a.conj() * b).sum();
                for (o, a) in other.iter_mut().zip(&z) {
                    *o -= proj * a;
                }
            }
            for (i, zi) in z.iter().enumerate() {
                out.set(i, col, *zi);
            }
            col += 1;
        }
        start = end;
    }
    debug_assert_eq!(col, n);
    Ok((vals, Some(out)))
}

fn cnorm(z: &[C64]) -> f64 {
    z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &DMat) -> Result<DMat> {
    let n = a.rows;
    let mut l = DMat::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)];
        for k in 0..j {
            s -= l[(j, k)] * l[(j, k)];
        }
        if s <= 0.0 {
            return Err(Error::Assembly(alloc::format!(
                "matrix not positive definite at pivot {j} ({s:e})"
            )));
        }
        let djj = s.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solve `L x = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &DMat, b: &mut [f64]) {
    let n = l.rows;
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Orthonormal-free basis of the null space of `a` (columns), by reduced row
/// echelon form with partial pivoting. Entries below `tol·max|a|` count as zero.
pub fn null_space(a: &DMat, tol: f64) -> DMat {
    let (m, n) = (a.rows, a.cols);
    // row-major working copy: rows are contiguous during elimination
    let mut w: Vec<Vec<f64>> = (0..m).map(|r| (0..n).map(|c| a[(r, c)]).collect()).collect();
    let thresh = tol * a.max_abs().max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut row = 0usize;
    for c in 0..n {
        if row >= m {
            break;
        }
        let (pr, pv) = (row..m)
            .map(|r| (r, w[r][c].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pv <= thresh {
            continue;
        }
        w.swap(row, pr);
        let inv = 1.0 / w[row][c];
        for x in w[row].iter_mut() {
            *x *= inv;
        }
        let prow = w[row].clone();
        for (r, wr) in w.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = wr[c];
            if f != 0.0 {
                for (x, p) in wr.iter_mut().zip(&prow).skip(c) {
                    *x -= f * p;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let mut out = DMat::zeros(n, free.len());
    for (k, &fc) in free.iter().enumerate() {
        out[(fc, k)] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            out[(pc, k)] = -w[r][fc];
        }
    }
    out
}

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &DMat, b: &mut [f64]) -> Result<()> {
    let n = a.rows;
    let mut m = a.clone();
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|r| (r, m[(r, k)].abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pv == 0.0 {
            return Err(Error::Assembly(alloc::format!("singular matrix at column {k}")));
        }
        if p != k {
            for c in 0..n {
                m.data.swap(c * n + k, c * n + p);
            }
            b.swap(k, p);
        }
        let piv = m[(k, k)];
        for r in (k + 1)..n {
            let f = m[(r, k)] / piv;
            if f == 0.0 {
                continue;
            }
            m[(r, k)] = f;
            for c in (k + 1)..n {
                let v = m[(k, c)];
                m[(r, c)] -= f * v;
            }
            b[r] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in (k + 1)..n {
            s -= m[(k, c)] * b[c];
        }
        b[k] = s / m[(k, k)];
    }
    Ok(())
}

/// Cholesky factorization of a symmetric positive-definite band matrix with
/// `bw` sub-diagonals.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // l[i][k] = L(i, i - bw + k), k in 0..=bw
    l: Vec<f64>,
}

impl BandCholesky {
    /// `entry(i, j)` is queried only for `j ≤ i ≤ j + bw`.
    pub fn new(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = entry(i, j);
                let k0 = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if j == i {
                    if s <= 0.0 {
                        return Err(Error::Assembly(alloc::format!(
                            "band matrix not positive definite at row {i}"
                        )));
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= self.l[k * w + (i + bw - k)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
    }
}

/// Outcome of a Lanczos run on a self-adjoint operator.
#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub min: f64,
    pub max: f64,
    pub min_vector: Vec<C64>,
    pub iterations: usize,
}

/// Extreme eigenvalues of an operator self-adjoint with respect to the weighted
/// pairing `Σ wᵢ xᵢ conj(yᵢ)`, by Lanczos with full reorthogonalization.
pub fn lanczos_extremes(
    n: usize,
    weights: &[f64],
    mut apply: impl FnMut(&[C64], &mut [C64]),
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<LanczosResult> {
    let wdot = |a: &[C64], b: &[C64]| -> C64 {
        a.iter().zip(b).zip(weights).map(|((x, y), w)| *w * x * y.conj()).sum()
    };
    let mut rng = rng::seeded(seed, 0x1a2c);
    let mut q0: Vec<C64> = (0..n).map(|_| rng::complex_normal(&mut rng)).collect();
    let nq = wdot(&q0, &q0).re.sqrt();
    q0.iter_mut().for_each(|x| *x /= nq);
    let mut basis: Vec<Vec<C64>> = vec![q0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let limit = n.min(max_iter);
    let mut last: Option<(f64, f64, Vec<f64>, usize)> = None;
    let mut converged = false;
    for it in 0..limit {
        apply(&basis[it], &mut w);
        let a = wdot(&w, &basis[it]).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = wdot(&w, q);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let b = wdot(&w, &w).re.sqrt();
        let m = alpha.len();
        let exhausted = b <= 1e-13 * alpha.iter().fold(1.0f64, |s, x| s.max(x.abs())) || m == n;
        if m.is_multiple_of(8) || exhausted || it + 1 == limit {
            let t = DMat::from_fn(m, m, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let (vals, vecs) = symmetric_eigen(&t, true)?;
            let vecs = vecs.expect("requested");
            let scale = vals.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            let r_lo = (b * vecs[(m - 1, 0)]).abs();
            let r_hi = (b * vecs[(m - 1, m - 1)]).abs();
            last = Some((vals[0], vals[m - 1], vecs.col(0).to_vec(), m));
            if exhausted || (r_lo <= tol * scale && r_hi <= tol * scale) {
                converged = true;
                break;
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let (min, max, s, m) = last.ok_or(Error::EigenNonConvergence { iterations: 0 })?;
    if !converged {
        return Err(Error::EigenNonConvergence { iterations: m });
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (k, sk) in s.iter().enumerate() {
        for (x, y) in v.iter_mut().zip(&basis[k]) {
            *x += *sk * y;
        }
    }
    Ok(LanczosResult { min, max, min_vector: v, iterations: m })
}
