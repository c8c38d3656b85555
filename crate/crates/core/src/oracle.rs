// SPDX-License-Identifier: Apache-2.0

//! Brute-force references: pointwise operator application, ring
//! realizations of periodic operators and partial geometric means.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::fredholm::phase;
use crate::lattice::{LatticeError, PeriodicTailSequence, Side, StrictlyLocalOperator};
use crate::numkernel::{general_eigenvalues, hermitian_eigenvalues, ComplexMatrix, NumError, C64, MAX_GENERAL_DIM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("ring realization of dimension {dim} exceeds {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("operator is not purely periodic")]
    NotPeriodic,
    #[error("value {value} at site {site} is not positive")]
    NonPositive { site: i64, value: f64 },
    #[error("horizon must be positive")]
    EmptyHorizon,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A finitely supported `ℂⁿ`-valued sequence on `[start, start + len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteVector {
    start: i64,
    n: usize,
    values: Vec<C64>,
}

impl SiteVector {
    pub fn zeros(start: i64, len: usize, n: usize) -> Self {
        Self { start, n, values: vec![C64::new(0.0, 0.0); len * n] }
    }

    /// Site values given as one `ℂⁿ` vector per site.
    pub fn from_sites(start: i64, sites: &[Vec<C64>]) -> Self {
        let n = sites.first().map_or(1, Vec::len);
        assert!(sites.iter().all(|s| s.len() == n), "ragged site vectors");
        Self { start, n, values: sites.concat() }
    }

    /// The unit vector at site `x`, component `i`.
    pub fn delta(x: i64, i: usize, n: usize) -> Self {
        let mut v = Self::zeros(x, 1, n);
        v.values[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last site.
    pub fn end(&self) -> i64 {
        self.start + self.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Value at `x`, zero outside the support.
    pub fn at(&self, x: i64) -> Vec<C64> {
        if x < self.start || x >= self.end() {
            return vec![C64::new(0.0, 0.0); self.n];
        }
        let o = (x - self.start) as usize * self.n;
        self.values[o..o + self.n].to_vec()
    }

    pub fn set(&mut self, x: i64, v: &[C64]) {
        assert!(x >= self.start && x < self.end() && v.len() == self.n);
        let o = (x - self.start) as usize * self.n;
        self.values[o..o + self.n].copy_from_slice(v);
    }

    pub fn site_norm_sq(&self, x: i64) -> f64 {
        self.at(x).iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `a·self + b·other` on the union of the supports.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Self {
        assert_eq!(self.n, other.n);
        let start = self.start.min(other.start);
        let end = self.end().max(other.end());
        let mut out = Self::zeros(start, (end - start) as usize, self.n);
        for x in start..end {
            let v: Vec<C64> = self.at(x).iter().zip(other.at(x)).map(|(u, w)| a * u + b * w).collect();
            out.set(x, &v);
        }
        out
    }

    /// Largest site norm over `[lo, hi]`.
    pub fn max_site_norm(&self, lo: i64, hi: i64) -> f64 {
        (lo..=hi).map(|x| self.site_norm_sq(x).sqrt()).fold(0.0, f64::max)
    }
}

/// `(Av)(x) = Σ_k A_k(x) v(x + k)`; the support grows by `k0` each way.
pub fn apply(op: &StrictlyLocalOperator, v: &SiteVector) -> SiteVector {
    assert_eq!(op.dim(), v.dim(), "dimension mismatch");
    let k0 = op.bandwidth() as i64;
    let start = v.start() - k0;
    let end = v.end() + k0;
    let mut out = SiteVector::zeros(start, (end - start) as usize, v.dim());
    for x in start..end {
        let mut acc = vec![C64::new(0.0, 0.0); v.dim()];
        for k in -k0..=k0 {
            let y = x + k;
            if y < v.start() || y >= v.end() {
                continue;
            }
            let w = op.coefficient(k, x).mul_vec(&v.at(y));
            for (a, b) in acc.iter_mut().zip(w) {
                *a += b;
            }
        }
        out.set(x, &acc);
    }
    out
}

/// Dense matrix of a purely periodic operator on the ring `ℤ/(n_⋆·cells)`.
#[derive(Debug, Clone)]
pub struct CirculantRealization {
    pub cells: usize,
    pub sites: usize,
    pub matrix: ComplexMatrix,
}

pub fn circulant_realization(op: &StrictlyLocalOperator, side: Side, cells: usize) -> Result<CirculantRealization, OracleError> {
    if !op.is_purely_periodic() {
        return Err(OracleError::NotPeriodic);
    }
    let n = op.dim();
    let sites = op.period(side) * cells;
    let dim = n * sites;
    if dim > MAX_GENERAL_DIM {
        return Err(OracleError::TooLarge { dim, limit: MAX_GENERAL_DIM });
    }
    let k0 = op.bandwidth() as i64;
    let ring = sites as i64;
    let mut matrix = ComplexMatrix::zeros(dim, dim);
    for x in 0..ring {
        for k in -k0..=k0 {
            let a = op.coefficient(k, x);
            let y = (x + k).rem_euclid(ring) as usize;
            for i in 0..n {
                for j in 0..n {
                    matrix[(x as usize * n + i, y * n + j)] += a[(i, j)];
                }
            }
        }
    }
    Ok(CirculantRealization { cells, sites, matrix })
}

fn eigenvalues_of(m: &ComplexMatrix) -> Result<Vec<C64>, NumError> {
    if m.hermitian_defect() <= 1e-13 {
        Ok(hermitian_eigenvalues(m)?.into_iter().map(|v| C64::new(v, 0.0)).collect())
    } else {
        general_eigenvalues(m)
    }
}

/// Eigenvalues of the ring realization.
pub fn circulant_spectrum(op: &StrictlyLocalOperator, side: Side, cells: usize) -> Result<Vec<C64>, OracleError> {
    Ok(eigenvalues_of(&circulant_realization(op, side, cells)?.matrix)?)
}

/// `⋃_{z^M = 1} σ(Â(side, z))` as a multiset.
pub fn symbol_union(op: &StrictlyLocalOperator, side: Side, cells: usize) -> Result<Vec<C64>, OracleError> {
    let mut out = Vec::new();
    for k in 0..cells {
        let m = op.symbol_at(side, phase(TAU * k as f64 / cells as f64))?;
        out.extend(eigenvalues_of(&m)?);
    }
    Ok(out)
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// multisets; infinite when the sizes differ.
pub fn multiset_mismatch(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for u in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, w) in b.iter().enumerate() {
            if !used[j] {
                let d = (u - w).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// `(Π_{0 ≤ m < horizon} α(m))^{1/horizon}`, evaluated in the log domain.
pub fn geometric_mean_limit(seq: &PeriodicTailSequence<f64>, horizon: u64) -> Result<f64, OracleError> {
    if horizon == 0 {
        return Err(OracleError::EmptyHorizon);
    }
    let log_at = |x: i64| -> Result<f64, OracleError> {
        let v = *seq.value_at(x);
        if v > 0.0 && v.is_finite() {
            Ok(v.ln())
        } else {
            Err(OracleError::NonPositive { site: x, value: v })
        }
    };
    let h = horizon as i64;
    let core_end = seq.core_end().clamp(0, h);
    let mut sum = 0.0;
    for x in 0..core_end {
        sum += log_at(x)?;
    }
    // past the core the tail repeats, so whole periods are summed at once
    let n = seq.period(Side::Right) as i64;
    let period: Vec<f64> = (0..n).map(|m| log_at(core_end + m)).collect::<Result<_, _>>()?;
    let rest = h - core_end;
    sum += (rest / n) as f64 * period.iter().sum::<f64>();
    sum += period[..(rest % n) as usize].iter().sum::<f64>();
    Ok((sum / h as f64).exp())
}
