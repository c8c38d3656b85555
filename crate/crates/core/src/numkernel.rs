// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra.
//!
//! Everything here works on row-major [`ComplexMatrix`] values of modest
//! size (symbols are at most a few dozen rows, ring realizations at most
//! 2048). The routines are self-contained: LU with partial pivoting for
//! determinants, Householder tridiagonalization plus implicit QL for
//! Hermitian spectra, a cyclic Jacobi solver when eigenvectors are needed,
//! and Hessenberg reduction plus shifted QR for general spectra.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Hermiticity tolerance (absolute, entrywise).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `|z| = 1` for phases fed into symbols.
pub const UNIT_PHASE_TOL: f64 = 1e-12;
pub const MAX_DETERMINANT_DIM: usize = 256;
/// Largest matrix accepted by the general eigensolver (the ring oracle needs
/// more than the 64 rows a symbol ever has).
pub const MAX_GENERAL_DIM: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |m - m*| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} steps")]
    ConvergenceFailure { iterations: usize },
    #[error("|z| = {modulus} is not a unit phase")]
    NonUnitPhase { modulus: f64 },
    #[error("dimension {dim} exceeds limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let v = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, NumError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(NumError::Shape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn scalar(v: C64) -> Self {
        Self { rows: 1, cols: 1, data: vec![v] }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Max entrywise `|m - m*|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// Copies a square block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }
}

fn require_square(m: &ComplexMatrix) -> Result<usize, NumError> {
    if m.is_square() {
        Ok(m.rows)
    } else {
        Err(NumError::NonSquare { rows: m.rows, cols: m.cols })
    }
}

/// Checks `|z| = 1` within [`UNIT_PHASE_TOL`].
pub fn check_unit_phase(z: C64) -> Result<(), NumError> {
    let modulus = z.norm();
    if (modulus - 1.0).abs() > UNIT_PHASE_TOL || !modulus.is_finite() {
        return Err(NumError::NonUnitPhase { modulus });
    }
    Ok(())
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> Result<C64, NumError> {
    let n = require_square(m)?;
    if n > MAX_DETERMINANT_DIM {
        return Err(NumError::TooLarge { dim: n, limit: MAX_DETERMINANT_DIM });
    }
    let mut a = m.clone();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let (piv, piv_abs) = (k..n).map(|i| (i, a[(i, k)].norm())).fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        if piv != k {
            for j in 0..n {
                a.data.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                let akj = a[(k, j)];
                a[(i, j)] -= factor * akj;
            }
        }
    }
    Ok(det)
}

/// Max-norm of `m* m - I`.
pub fn unitarity_defect(m: &ComplexMatrix) -> Result<f64, NumError> {
    let n = require_square(m)?;
    let g = m.adjoint().matmul(m);
    Ok(g.sub(&ComplexMatrix::identity(n)).max_abs())
}

fn check_hermitian(m: &ComplexMatrix) -> Result<usize, NumError> {
    let n = require_square(m)?;
    let defect = m.hermitian_defect();
    if defect.is_nan() || defect > HERMITIAN_TOL {
        return Err(NumError::NotHermitian { defect });
    }
    Ok(n)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, NumError> {
    let n = check_hermitian(m)?;
    match n {
        1 => return Ok(vec![m[(0, 0)].re]),
        2 => return Ok(hermitian_2x2(m)),
        _ => {}
    }
    let (mut d, mut e) = tridiagonalize(m);
    tql_eigenvalues(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn hermitian_2x2(m: &ComplexMatrix) -> Vec<f64> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)].norm();
    if b == 0.0 {
        return if a <= d { vec![a, d] } else { vec![d, a] };
    }
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = half.hypot(b);
    vec![mean - r, mean + r]
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form. Returns `(diagonal, subdiagonal)`; `subdiagonal[i]` couples rows
/// `i` and `i + 1`, the last entry is unused.
fn tridiagonalize(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows;
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x: Vec<C64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // Full-vector v padded with zeros on rows 0..=k.
        let off = k + 1;
        // w = A v (all rows)
        let w: Vec<C64> = (0..n).map(|i| (0..len).map(|j| a[(i, off + j)] * v[j]).sum()).collect();
        // c = v* w restricted to active rows
        let c: C64 = (0..len).map(|j| v[j].conj() * w[off + j]).sum();
        // u = w - c v
        let mut u = w;
        for j in 0..len {
            u[off + j] -= c * v[j];
        }
        // A <- A - 2 (v u* + u v*)
        for i in 0..n {
            let vi = if i >= off { v[i - off] } else { C64::new(0.0, 0.0) };
            let ui = u[i];
            for j in 0..n {
                let vj = if j >= off { v[j - off] } else { C64::new(0.0, 0.0) };
                let delta = vi * u[j].conj() + ui * vj.conj();
                if delta.re != 0.0 || delta.im != 0.0 {
                    a[(i, j)] -= delta * 2.0;
                }
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    for i in 0..n - 1 {
        e[i] = a[(i + 1, i)].norm();
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// Eigenvalues overwrite `d`.
fn tql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<(), NumError> {
    let n = d.len();
    let max_iter = 60 * n.max(1);
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > max_iter {
                return Err(NumError::ConvergenceFailure { iterations: total });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Slower than [`hermitian_eigenvalues`] but returns an orthonormal basis of
/// eigenvectors (columns of the second matrix), used for backward-error
/// certification.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), NumError> {
    let n = check_hermitian(m)?;
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        sweeps += 1;
        if sweeps > 100 {
            return Err(NumError::ConvergenceFailure { iterations: sweeps });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Rotation in the (p, q) plane zeroing the off-diagonal entry.
                let phase = apq / mag;
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // Columns: new_p = c*col_p - s*conj(phase)*col_q ; new_q = s*phase*col_p + c*col_q
                let sp = phase * s;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * sp.conj();
                    a[(k, q)] = akp * sp + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * sp;
                    a[(q, k)] = apk * sp.conj() + aqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp.conj();
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// `max |m V - V Λ|` for an eigen-decomposition.
pub fn eigen_residual(m: &ComplexMatrix, values: &[f64], vectors: &ComplexMatrix) -> f64 {
    let mv = m.matmul(vectors);
    let mut worst: f64 = 0.0;
    for i in 0..m.rows {
        for (j, &lambda) in values.iter().enumerate() {
            worst = worst.max((mv[(i, j)] - vectors[(i, j)] * lambda).norm());
        }
    }
    worst
}

/// All eigenvalues of a general square matrix, with multiplicity.
///
/// Householder reduction to upper Hessenberg form followed by single-shift
/// QR with Wilkinson shifts. The iteration budget is `100 * dim` QR sweeps.
pub fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>, NumError> {
    let n = require_square(m)?;
    if n > MAX_GENERAL_DIM {
        return Err(NumError::TooLarge { dim: n, limit: MAX_GENERAL_DIM });
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = m.clone();
    hessenberg_reduce(&mut h);
    hessenberg_qr(&mut h)
}

fn hessenberg_reduce(a: &mut ComplexMatrix) {
    let n = a.rows;
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let off = k + 1;
        let xnorm = (0..len).map(|i| a[(off + i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(off, k)];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v: Vec<C64> = (0..len).map(|i| a[(off + i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // A <- H A, H = I - 2 v v*, acting on rows off..n
        for j in 0..n {
            let s: C64 = (0..len).map(|i| v[i].conj() * a[(off + i, j)]).sum();
            if s.re == 0.0 && s.im == 0.0 {
                continue;
            }
            for i in 0..len {
                a[(off + i, j)] -= v[i] * s * 2.0;
            }
        }
        // A <- A H, acting on columns off..n
        for i in 0..n {
            let s: C64 = (0..len).map(|j| a[(i, off + j)] * v[j]).sum();
            if s.re == 0.0 && s.im == 0.0 {
                continue;
            }
            for j in 0..len {
                a[(i, off + j)] -= s * v[j].conj() * 2.0;
            }
        }
        for i in (off + 1)..n {
            a[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg_qr(h: &mut ComplexMatrix) -> Result<Vec<C64>, NumError> {
    let n = h.rows;
    let budget = 100 * n;
    let mut eig = vec![C64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut total = 0usize;
    let mut stuck = 0usize;
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the active unreduced block [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= f64::EPSILON * diag {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            stuck = 0;
            continue;
        }
        total += 1;
        stuck += 1;
        if total > budget {
            return Err(NumError::ConvergenceFailure { iterations: total });
        }
        let mut shift = wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        if stuck % 11 == 10 {
            // exceptional shift to break cycles
            let sub = h[(hi, hi - 1)].norm();
            shift = h[(hi, hi)] + C64::new(0.75 * sub, 0.4375 * sub);
        }
        // explicit single-shift QR step on the active block
        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let a = h[(k, k)];
            let b = h[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (C64::new(1.0, 0.0), C64::new(0.0, 0.0)) } else { (a / r, b / r) };
            // G = [[c*, s*], [-s, c]]
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c.conj() * x + s.conj() * y;
                h[(k + 1, j)] = -s * x + c * y;
            }
            rotations.push((c, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rotations[idx];
            // right-multiply by G* = [[c, -s*], [s, c*]]
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s;
                h[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eig)
}

/// Hermitian "corner-tridiagonal" matrix: tridiagonal with the wrap entries
/// `(0, m-1)` and `(m-1, 0)` carrying a unit phase.
///
/// `off[i]` couples site `i` to site `i + 1 (mod m)`; the wrap coupling
/// `off[m-1]` is multiplied by `z*` above the diagonal and `z` below.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl CornerTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self, NumError> {
        if diag.is_empty() || diag.len() != off.len() {
            return Err(NumError::Shape(format!("diag has {} entries, off has {}", diag.len(), off.len())));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Dense realization at the unit phase `z`.
    pub fn realize(&self, z: C64) -> Result<ComplexMatrix, NumError> {
        check_unit_phase(z)?;
        let m = self.dim();
        let re = |x: f64| C64::new(x, 0.0);
        let out = match m {
            1 => ComplexMatrix::scalar(z.conj() * self.off[0] + self.diag[0] + z * self.off[0]),
            2 => {
                let upper = re(self.off[0]) + z.conj() * self.off[1];
                ComplexMatrix::from_rows(&[&[re(self.diag[0]), upper], &[upper.conj(), re(self.diag[1])]])
            }
            _ => {
                let mut a = ComplexMatrix::zeros(m, m);
                for i in 0..m {
                    a[(i, i)] = re(self.diag[i]);
                }
                for i in 0..m - 1 {
                    a[(i, i + 1)] = re(self.off[i]);
                    a[(i + 1, i)] = re(self.off[i]);
                }
                a[(0, m - 1)] = z.conj() * self.off[m - 1];
                a[(m - 1, 0)] = z * self.off[m - 1];
                a
            }
        };
        Ok(out)
    }
}
