// SPDX-License-Identifier: Apache-2.0

//! Eventually periodic sequences on the integers and the banded operators
//! built from them.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::numkernel::{check_unit_phase, ComplexMatrix, NumError, C64};

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("a periodic tail must have at least one value")]
    EmptyTail,
    #[error("invalid operator: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("operator dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("downsampling factor must be positive")]
    ZeroFactor,
    #[error("operator is not purely periodic")]
    NotPeriodic,
    #[error(transparent)]
    Num(#[from] NumError),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A sequence on ℤ given by a finite core table and exactly periodic tails.
///
/// Outside the core `[core_start, core_start + core.len())` the value at
/// site `x` is `left[x mod n_L]` (below the core) or `right[x mod n_R]`
/// (above it), with the residue taken in `[0, n)`. An empty core still has
/// a position: it marks where the left tail hands over to the right one.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTailSequence<T> {
    core_start: i64,
    core: Vec<T>,
    left: Vec<T>,
    right: Vec<T>,
}

impl<T: Clone> PeriodicTailSequence<T> {
    pub fn new(core_start: i64, core: Vec<T>, left: Vec<T>, right: Vec<T>) -> Result<Self, LatticeError> {
        if left.is_empty() || right.is_empty() {
            return Err(LatticeError::EmptyTail);
        }
        Ok(Self { core_start, core, left, right })
    }

    pub fn constant(value: T) -> Self {
        Self { core_start: 0, core: Vec::new(), left: vec![value.clone()], right: vec![value] }
    }

    /// Same periodic table on both sides.
    pub fn periodic(tail: Vec<T>) -> Result<Self, LatticeError> {
        Self::new(0, Vec::new(), tail.clone(), tail)
    }

    /// Left tail for `x < 0`, right tail for `x >= 0`.
    pub fn two_sided(left: Vec<T>, right: Vec<T>) -> Result<Self, LatticeError> {
        Self::new(0, Vec::new(), left, right)
    }

    /// Tabulates `f` on the window `[start, end)` and on one period of each
    /// tail. `f` must be periodic with the given periods outside the window.
    pub fn tabulate(start: i64, end: i64, left_period: usize, right_period: usize, mut f: impl FnMut(i64) -> T) -> Self {
        assert!(left_period >= 1 && right_period >= 1 && end >= start);
        let core = (start..end).map(&mut f).collect();
        let nl = left_period as i64;
        let nr = right_period as i64;
        let lbase = start - nl;
        let left = (0..nl).map(|m| f(lbase + (m - lbase).rem_euclid(nl))).collect();
        let right = (0..nr).map(|m| f(end + (m - end).rem_euclid(nr))).collect();
        Self { core_start: start, core, left, right }
    }

    pub fn value_at(&self, x: i64) -> &T {
        let end = self.core_end();
        if x < self.core_start {
            &self.left[x.rem_euclid(self.left.len() as i64) as usize]
        } else if x >= end {
            &self.right[x.rem_euclid(self.right.len() as i64) as usize]
        } else {
            &self.core[(x - self.core_start) as usize]
        }
    }

    /// Tail value for the residue class of `x` (ignores the core).
    pub fn tail_value(&self, side: Side, x: i64) -> &T {
        let t = self.tail(side);
        &t[x.rem_euclid(t.len() as i64) as usize]
    }

    pub fn core_start(&self) -> i64 {
        self.core_start
    }

    pub fn core_end(&self) -> i64 {
        self.core_start + self.core.len() as i64
    }

    pub fn core_values(&self) -> &[T] {
        &self.core
    }

    pub fn tail(&self, side: Side) -> &[T] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn period(&self, side: Side) -> usize {
        self.tail(side).len()
    }

    pub fn iter_all(&self) -> impl Iterator<Item = &T> {
        self.core.iter().chain(&self.left).chain(&self.right)
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> PeriodicTailSequence<U> {
        PeriodicTailSequence {
            core_start: self.core_start,
            core: self.core.iter().map(&mut f).collect(),
            left: self.left.iter().map(&mut f).collect(),
            right: self.right.iter().map(&mut f).collect(),
        }
    }

    /// `x ↦ s(x + d)`.
    pub fn shift(&self, d: i64) -> Self {
        Self::tabulate(self.core_start - d, self.core_end() - d, self.left.len(), self.right.len(), |x| self.value_at(x + d).clone())
    }

    /// `y ↦ s(m·y + r)`.
    pub fn decimate(&self, m: usize, r: i64) -> Self {
        assert!(m >= 1);
        let mi = m as i64;
        let start = div_ceil(self.core_start - r, mi);
        let end = div_ceil(self.core_end() - r, mi).max(start);
        let nl = self.left.len() / gcd(self.left.len(), m);
        let nr = self.right.len() / gcd(self.right.len(), m);
        Self::tabulate(start, end, nl, nr, |y| self.value_at(mi * y + r).clone())
    }

    /// Pointwise combination; the result covers both cores and uses the
    /// least common multiple of the periods.
    pub fn zip_with<U: Clone, V: Clone>(&self, other: &PeriodicTailSequence<U>, mut f: impl FnMut(&T, &U) -> V) -> PeriodicTailSequence<V> {
        let start = self.core_start.min(other.core_start);
        let end = self.core_end().max(other.core_end());
        PeriodicTailSequence::tabulate(start, end, lcm(self.left.len(), other.left.len()), lcm(self.right.len(), other.right.len()), |x| {
            f(self.value_at(x), other.value_at(x))
        })
    }

    /// Same sequence with the core widened to cover `[start, end)` and tails
    /// repeated to the given periods (which must be multiples of the current
    /// ones).
    pub fn reshaped(&self, start: i64, end: i64, left_period: usize, right_period: usize) -> Self {
        assert!(left_period.is_multiple_of(self.left.len()) && right_period.is_multiple_of(self.right.len()));
        let start = start.min(self.core_start);
        let end = end.max(self.core_end());
        Self::tabulate(start, end, left_period, right_period, |x| self.value_at(x).clone())
    }
}

impl<T: Clone + PartialEq> PeriodicTailSequence<T> {
    /// Drops core entries at either edge that the tails already reproduce.
    pub fn compact(&self) -> Self {
        let mut s = self.clone();
        let mut lead = 0;
        while lead < s.core.len() && s.core[lead] == *s.tail_value(Side::Left, s.core_start + lead as i64) {
            lead += 1;
        }
        s.core.drain(..lead);
        s.core_start += lead as i64;
        while let Some(last) = s.core.last() {
            let x = s.core_end() - 1;
            if last == s.tail_value(Side::Right, x) {
                s.core.pop();
            } else {
                break;
            }
        }
        s
    }

    /// True when one periodic table describes the whole sequence.
    pub fn is_purely_periodic(&self) -> bool {
        let n = lcm(self.left.len(), self.right.len()) as i64;
        (0..n).all(|m| self.tail_value(Side::Left, m) == self.tail_value(Side::Right, m))
            && (self.core_start..self.core_end()).all(|x| self.value_at(x) == self.tail_value(Side::Right, x))
    }
}

/// One problem found while validating an [`OperatorDraft`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ZeroDimension,
    BandOutOfRange { k: i64, k0: usize },
    Shape { k: i64, location: String, rows: usize, cols: usize },
    NonFinite { k: i64, location: String },
    PeriodMismatch { k: i64, side: Side, expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDimension => write!(f, "internal dimension must be positive"),
            Violation::BandOutOfRange { k, k0 } => write!(f, "band {k} lies outside [-{k0}, {k0}]"),
            Violation::Shape { k, location, rows, cols } => {
                write!(f, "band {k} {location}: {rows}x{cols} matrix has the wrong shape")
            }
            Violation::NonFinite { k, location } => write!(f, "band {k} {location}: non-finite entry"),
            Violation::PeriodMismatch { k, side, expected, found } => {
                write!(f, "band {k}: {side} period {found}, expected {expected}")
            }
        }
    }
}

fn location_of(seq: &PeriodicTailSequence<ComplexMatrix>) -> impl Iterator<Item = (String, &ComplexMatrix)> {
    let core = seq.core.iter().enumerate().map(|(i, m)| (format!("core[{i}]"), m));
    let left = seq.left.iter().enumerate().map(|(i, m)| (format!("left_period[{i}]"), m));
    let right = seq.right.iter().enumerate().map(|(i, m)| (format!("right_period[{i}]"), m));
    core.chain(left).chain(right)
}

/// Unchecked operator description, as read from user input.
#[derive(Debug, Clone)]
pub struct OperatorDraft {
    pub n: usize,
    pub k0: usize,
    pub coeffs: BTreeMap<i64, PeriodicTailSequence<ComplexMatrix>>,
}

impl OperatorDraft {
    /// Checks the draft and returns the normalized operator, or every
    /// violation found.
    pub fn validate(&self) -> Result<StrictlyLocalOperator, Vec<Violation>> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push(Violation::ZeroDimension);
        }
        let mut periods: Option<(i64, usize, usize)> = None;
        for (&k, seq) in &self.coeffs {
            if k.unsigned_abs() as usize > self.k0 {
                out.push(Violation::BandOutOfRange { k, k0: self.k0 });
            }
            for (location, m) in location_of(seq) {
                if m.rows() != self.n || m.cols() != self.n {
                    out.push(Violation::Shape { k, location, rows: m.rows(), cols: m.cols() });
                } else if !m.is_finite() {
                    out.push(Violation::NonFinite { k, location });
                }
            }
            let (nl, nr) = (seq.period(Side::Left), seq.period(Side::Right));
            match periods {
                None => periods = Some((k, nl, nr)),
                Some((_, el, er)) => {
                    if nl != el {
                        out.push(Violation::PeriodMismatch { k, side: Side::Left, expected: el, found: nl });
                    }
                    if nr != er {
                        out.push(Violation::PeriodMismatch { k, side: Side::Right, expected: er, found: nr });
                    }
                }
            }
        }
        if !out.is_empty() {
            return Err(out);
        }
        let (_, nl, nr) = periods.unwrap_or((0, 1, 1));
        let start = self.coeffs.values().map(|s| s.core_start()).min().unwrap_or(0);
        let end = self.coeffs.values().map(|s| s.core_end()).max().unwrap_or(0);
        let n = self.n;
        let zero = ComplexMatrix::zeros(n, n);
        let k0 = self.k0 as i64;
        Ok(StrictlyLocalOperator::from_fn(n, self.k0, (start, end), (nl, nr), |k, x| match self.coeffs.get(&k) {
            Some(seq) => seq.value_at(x).clone(),
            None => {
                debug_assert!(k.abs() <= k0);
                zero.clone()
            }
        }))
    }
}

/// A banded operator `(Aψ)(x) = Σ_{|k| ≤ k0} A_k(x) ψ(x + k)` on
/// `ℓ²(ℤ, ℂⁿ)`, with all coefficient sequences sharing one core window and
/// one pair of tail periods.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictlyLocalOperator {
    n: usize,
    k0: usize,
    coeffs: Vec<PeriodicTailSequence<ComplexMatrix>>,
}

impl StrictlyLocalOperator {
    /// Builds an operator from a coefficient function `(k, x) ↦ A_k(x)`
    /// that is periodic with the given periods outside `window`.
    pub fn from_fn(n: usize, k0: usize, window: (i64, i64), periods: (usize, usize), mut f: impl FnMut(i64, i64) -> ComplexMatrix) -> Self {
        let (start, end) = window;
        let coeffs: Vec<_> = (-(k0 as i64)..=k0 as i64)
            .map(|k| PeriodicTailSequence::tabulate(start, end.max(start), periods.0, periods.1, |x| f(k, x)))
            .collect();
        Self { n, k0, coeffs }.compacted()
    }

    /// Multiplication by a sequence of `n × n` matrices.
    pub fn multiplication(seq: &PeriodicTailSequence<ComplexMatrix>) -> Self {
        let n = seq.value_at(0).rows();
        Self { n, k0: 0, coeffs: vec![seq.clone()] }.compacted()
    }

    /// Scalar multiplication operator.
    pub fn scalar_multiplication(seq: &PeriodicTailSequence<f64>) -> Self {
        Self::multiplication(&seq.map(|&v| ComplexMatrix::scalar(C64::new(v, 0.0))))
    }

    pub fn identity(n: usize) -> Self {
        Self::multiplication(&PeriodicTailSequence::constant(ComplexMatrix::identity(n)))
    }

    /// The left shift `(Lψ)(x) = ψ(x + 1)` on `ℂⁿ`-valued sequences.
    pub fn left_shift(n: usize) -> Self {
        Self::constant_bands(n, &[(1, ComplexMatrix::identity(n))])
    }

    /// Translation-invariant operator with the given `(k, A_k)` bands.
    pub fn constant_bands(n: usize, bands: &[(i64, ComplexMatrix)]) -> Self {
        let k0 = bands.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        Self::from_fn(n, k0, (0, 0), (1, 1), |k, _| {
            bands.iter().filter(|(kk, _)| *kk == k).fold(ComplexMatrix::zeros(n, n), |acc, (_, m)| acc.add(m))
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.k0
    }

    pub fn period(&self, side: Side) -> usize {
        self.coeffs[0].period(side)
    }

    pub fn core_window(&self) -> (i64, i64) {
        (self.coeffs[0].core_start(), self.coeffs[0].core_end())
    }

    /// Coefficient sequence of band `k` (zero outside the bandwidth).
    pub fn band(&self, k: i64) -> Option<&PeriodicTailSequence<ComplexMatrix>> {
        if k.unsigned_abs() as usize > self.k0 {
            None
        } else {
            Some(&self.coeffs[(k + self.k0 as i64) as usize])
        }
    }

    /// `A_k(x)`, zero outside the band.
    pub fn coefficient(&self, k: i64, x: i64) -> ComplexMatrix {
        match self.band(k) {
            Some(seq) => seq.value_at(x).clone(),
            None => ComplexMatrix::zeros(self.n, self.n),
        }
    }

    fn tail_coefficient(&self, side: Side, k: i64, r: i64) -> ComplexMatrix {
        match self.band(k) {
            Some(seq) => seq.tail_value(side, r).clone(),
            None => ComplexMatrix::zeros(self.n, self.n),
        }
    }

    /// Shares a single core window across bands and trims edge entries the
    /// tails already reproduce.
    fn compacted(self) -> Self {
        let (mut start, mut end) = (self.coeffs[0].core_start(), self.coeffs[0].core_end());
        let agrees = |x: i64, side: Side| self.coeffs.iter().all(|s| s.value_at(x) == s.tail_value(side, x));
        while start < end && agrees(start, Side::Left) {
            start += 1;
        }
        while end > start && agrees(end - 1, Side::Right) {
            end -= 1;
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|s| PeriodicTailSequence::tabulate(start, end, s.period(Side::Left), s.period(Side::Right), |x| s.value_at(x).clone()))
            .collect();
        Self { n: self.n, k0: self.k0, coeffs }
    }

    fn hull_window(&self, other: &Self, pad: i64) -> (i64, i64) {
        let (a0, a1) = self.core_window();
        let (b0, b1) = other.core_window();
        (a0.min(b0) - pad, a1.max(b1) + pad)
    }

    fn joint_periods(&self, other: &Self) -> (usize, usize) {
        (lcm(self.period(Side::Left), other.period(Side::Left)), lcm(self.period(Side::Right), other.period(Side::Right)))
    }

    /// Formal adjoint: `A_k(x) ↦ A_{-k}(x + k)*` at band `k`.
    pub fn adjoint(&self) -> Self {
        let k0 = self.k0 as i64;
        let (s, e) = self.core_window();
        let periods = (self.period(Side::Left), self.period(Side::Right));
        Self::from_fn(self.n, self.k0, (s - k0, e + k0), periods, |k, x| self.coefficient(-k, x + k).adjoint())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LatticeError> {
        if self.n != other.n {
            return Err(LatticeError::DimensionMismatch(self.n, other.n));
        }
        let k0 = self.k0.max(other.k0);
        Ok(Self::from_fn(self.n, k0, self.hull_window(other, 0), self.joint_periods(other), |k, x| {
            self.coefficient(k, x).add(&other.coefficient(k, x))
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LatticeError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, k0: self.k0, coeffs: self.coeffs.iter().map(|q| q.map(|m| m.scale(s))).collect() }
    }

    /// Operator product `self · other`: `C_{k+j}(x) = Σ A_k(x) B_j(x + k)`.
    pub fn compose(&self, other: &Self) -> Result<Self, LatticeError> {
        if self.n != other.n {
            return Err(LatticeError::DimensionMismatch(self.n, other.n));
        }
        let ka = self.k0 as i64;
        let kb = other.k0 as i64;
        let k0 = self.k0 + other.k0;
        let pad = ka;
        Ok(Self::from_fn(self.n, k0, self.hull_window(other, pad), self.joint_periods(other), |kc, x| {
            let mut acc = ComplexMatrix::zeros(self.n, self.n);
            for k in -ka..=ka {
                let j = kc - k;
                if j.abs() > kb {
                    continue;
                }
                acc = acc.add(&self.coefficient(k, x).matmul(&other.coefficient(j, x + k)));
            }
            acc
        }))
    }

    /// Scalar operator formed by the `(i, j)` entry of every coefficient.
    pub fn entry(&self, i: usize, j: usize) -> Self {
        let coeffs = self.coeffs.iter().map(|s| s.map(|m| ComplexMatrix::scalar(m[(i, j)]))).collect();
        Self { n: 1, k0: self.k0, coeffs }.compacted()
    }

    /// Assembles an `(rows·n) × (cols·n)` block operator from a row-major
    /// grid of operators of equal dimension `n`.
    pub fn block(grid: &[Vec<StrictlyLocalOperator>]) -> Result<Self, LatticeError> {
        let n = grid[0][0].n;
        let rows = grid.len();
        let cols = grid[0].len();
        let mut window = grid[0][0].core_window();
        let mut periods = (1, 1);
        let mut k0 = 0;
        for op in grid.iter().flatten() {
            if op.n != n {
                return Err(LatticeError::DimensionMismatch(n, op.n));
            }
            let (s, e) = op.core_window();
            window = (window.0.min(s), window.1.max(e));
            periods = (lcm(periods.0, op.period(Side::Left)), lcm(periods.1, op.period(Side::Right)));
            k0 = k0.max(op.k0);
        }
        Ok(Self::from_fn(rows * n, k0, window, periods, |k, x| {
            let mut m = ComplexMatrix::zeros(rows * n, cols * n);
            for (bi, row) in grid.iter().enumerate() {
                for (bj, op) in row.iter().enumerate() {
                    let c = op.coefficient(k, x);
                    for i in 0..n {
                        for j in 0..n {
                            m[(bi * n + i, bj * n + j)] = c[(i, j)];
                        }
                    }
                }
            }
            m
        }))
    }

    /// The same operator with bandwidth `k0`, provided every band outside
    /// `[-k0, k0]` vanishes identically.
    pub fn narrowed(&self, k0: usize) -> Option<Self> {
        if k0 >= self.k0 {
            return Some(self.clone());
        }
        let cut = self.k0 - k0;
        let dropped = self.coeffs[..cut].iter().chain(&self.coeffs[self.coeffs.len() - cut..]);
        if dropped.flat_map(|s| s.iter_all()).all(|m| m.is_zero()) {
            Some(Self { n: self.n, k0, coeffs: self.coeffs[cut..self.coeffs.len() - cut].to_vec() })
        } else {
            None
        }
    }

    /// The same operator with tail tables repeated to the given periods,
    /// which must be multiples of the current ones.
    pub fn with_periods(&self, left: usize, right: usize) -> Self {
        let (s, e) = self.core_window();
        let coeffs = self.coeffs.iter().map(|c| c.reshaped(s, e, left, right)).collect();
        Self { n: self.n, k0: self.k0, coeffs }
    }

    /// Drops outer bands that vanish identically.
    pub fn trimmed(&self) -> Self {
        let mut k0 = self.k0;
        let zero_band = |k: i64| self.band(k).is_none_or(|s| s.iter_all().all(|m| m.is_zero()));
        while k0 > 0 && zero_band(k0 as i64) && zero_band(-(k0 as i64)) {
            k0 -= 1;
        }
        let cut = self.k0 - k0;
        Self { n: self.n, k0, coeffs: self.coeffs[cut..self.coeffs.len() - cut].to_vec() }
    }

    /// Largest entrywise difference between the coefficient tables of two
    /// operators, over cores and both tails.
    pub fn coefficient_distance(&self, other: &Self) -> Result<f64, LatticeError> {
        let diff = self.sub(other)?;
        Ok(diff.coeffs.iter().flat_map(|s| s.iter_all()).map(|m| m.max_abs()).fold(0.0, f64::max))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().flat_map(|s| s.iter_all()).all(|m| m.is_finite())
    }

    /// True when a single periodic table describes every band.
    pub fn is_purely_periodic(&self) -> bool {
        self.coeffs.iter().all(|s| s.is_purely_periodic())
    }

    /// The periodic operator that agrees with this one on the given tail.
    pub fn periodic_part(&self, side: Side) -> Self {
        let np = self.period(side);
        Self::from_fn(self.n, self.k0, (0, 0), (np, np), |k, x| self.tail_coefficient(side, k, x))
    }

    /// The symbol of the `side` tail at the unit phase `z`: an
    /// `(n·p) × (n·p)` matrix (`p` the tail period) with row/column index
    /// `i·p + r` for component `i` and residue `r`.
    pub fn symbol_at(&self, side: Side, z: C64) -> Result<ComplexMatrix, LatticeError> {
        check_unit_phase(z)?;
        let p = self.period(side);
        let pi = p as i64;
        let dim = self.n * p;
        let mut out = ComplexMatrix::zeros(dim, dim);
        let zc = z.conj();
        let power = |w: i64| -> C64 {
            if w >= 0 {
                z.powi(w as i32)
            } else {
                zc.powi((-w) as i32)
            }
        };
        for k in -(self.k0 as i64)..=self.k0 as i64 {
            let seq = &self.coeffs[(k + self.k0 as i64) as usize];
            let tail = seq.tail(side);
            for r in 0..pi {
                let a = &tail[r as usize];
                let s = (r + k).rem_euclid(pi);
                let w = (r + k).div_euclid(pi);
                let ph = power(w);
                for i in 0..self.n {
                    for j in 0..self.n {
                        let v = a[(i, j)];
                        if v.re != 0.0 || v.im != 0.0 {
                            out[(i * p + r as usize, j * p + s as usize)] += v * ph;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The `m·n`-dimensional operator obtained by grouping `m` consecutive
    /// sites into one cell: component `(i, r)` of cell `y` is component `i`
    /// of site `m·y + r`. Bandwidth becomes `ceil(k0 / m)`.
    pub fn downsample(&self, m: usize) -> Result<Self, LatticeError> {
        if m == 0 {
            return Err(LatticeError::ZeroFactor);
        }
        let mi = m as i64;
        let n = self.n;
        let k0 = self.k0 as i64;
        let new_k0 = div_ceil(k0, mi).max(0) as usize;
        let (s, e) = self.core_window();
        let start = div_ceil(s - (mi - 1), mi) - 1;
        let end = div_ceil(e, mi) + 1;
        let periods =
            (self.period(Side::Left) / gcd(self.period(Side::Left), m), self.period(Side::Right) / gcd(self.period(Side::Right), m));
        Ok(Self::from_fn(n * m, new_k0, (start, end), periods, |w, y| {
            let mut b = ComplexMatrix::zeros(n * m, n * m);
            for r in 0..mi {
                for k in -k0..=k0 {
                    let t = r + k;
                    if t.div_euclid(mi) != w {
                        continue;
                    }
                    let col = t.rem_euclid(mi) as usize;
                    let a = self.coefficient(k, mi * y + r);
                    for i in 0..n {
                        for j in 0..n {
                            b[(i * m + r as usize, j * m + col)] += a[(i, j)];
                        }
                    }
                }
            }
            b
        }))
    }
}
