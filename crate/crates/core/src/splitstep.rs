// SPDX-License-Identifier: Apache-2.0

//! The chirally symmetric split-step walk: operator construction, the Λ
//! calculus for averaging periodic tails, index formulas and band spectra.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::fredholm::{
    fredholm_index, hermitian_family_bands, Band, FredholmError, IndexReport, MatrixFamily, SamplingOptions, SpectralBands, Warning,
};
use crate::lattice::{lcm, LatticeError, PeriodicTailSequence, Side, StrictlyLocalOperator};
use crate::numkernel::{ComplexMatrix, CornerTridiagonal, NumError, C64};

/// Relative tolerance when comparing the two products that decide
/// Fredholmness.
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitStepError {
    #[error("{value} lies outside [-1, 1]")]
    OutOfDomain { value: f64 },
    #[error("parameter out of range: {}", format_ranges(.0))]
    Range(Vec<RangeViolation>),
    #[error("{field} on the {side} tail contains both -1 and +1, so its average is 0/0")]
    UndefinedQuotient { side: Side, field: &'static str },
    #[error("0 * infinity is undefined")]
    UndefinedProduct,
    #[error("no closed form for tail period {period}")]
    UnsupportedPeriod { period: usize },
    #[error("sign of zero reached in the index formula")]
    ZeroSign,
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Num(#[from] NumError),
}

fn format_ranges(v: &[RangeViolation]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("; ")
}

/// Where in a sequence a value sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRef {
    Core(usize),
    LeftPeriod(usize),
    RightPeriod(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeViolation {
    pub field: &'static str,
    pub slot: SlotRef,
    pub value: f64,
}

impl fmt::Display for RangeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, i) = match self.slot {
            SlotRef::Core(i) => ("core.values", i),
            SlotRef::LeftPeriod(i) => ("left_period", i),
            SlotRef::RightPeriod(i) => ("right_period", i),
        };
        write!(f, "{}.{}[{}] = {} is outside [-1, 1]", self.field, name, i, self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A value in `[0, ∞]` stored by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedHalfLine {
    log: f64,
}

impl ExtendedHalfLine {
    pub const ZERO: Self = Self { log: f64::NEG_INFINITY };
    pub const ONE: Self = Self { log: 0.0 };
    pub const INFINITY: Self = Self { log: f64::INFINITY };

    pub fn from_log(log: f64) -> Self {
        debug_assert!(!log.is_nan());
        Self { log }
    }

    pub fn from_value(v: f64) -> Self {
        assert!(v >= 0.0, "negative value {v}");
        Self { log: v.ln() }
    }

    pub fn ln(self) -> f64 {
        self.log
    }

    pub fn value(self) -> f64 {
        self.log.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log == f64::NEG_INFINITY
    }

    pub fn is_infinite(self) -> bool {
        self.log == f64::INFINITY
    }

    pub fn try_mul(self, other: Self) -> Result<Self, SplitStepError> {
        let s = self.log + other.log;
        if s.is_nan() {
            return Err(SplitStepError::UndefinedProduct);
        }
        Ok(Self { log: s })
    }

    pub fn recip(self) -> Self {
        Self { log: -self.log }
    }

    /// `self^r` for a finite non-zero exponent.
    pub fn powf(self, r: f64) -> Self {
        assert!(r.is_finite() && r != 0.0);
        Self { log: self.log * r }
    }

    pub fn product(values: impl IntoIterator<Item = Self>) -> Result<Self, SplitStepError> {
        values.into_iter().try_fold(Self::ONE, |acc, v| acc.try_mul(v))
    }
}

impl PartialOrd for ExtendedHalfLine {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log.partial_cmp(&other.log)
    }
}

fn check_unit_interval(s: f64) -> Result<(), SplitStepError> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(SplitStepError::OutOfDomain { value: s });
    }
    Ok(())
}

/// `Λ(s) = (1 + s) / (1 − s)`, with `Λ(−1) = 0` and `Λ(1) = ∞`.
pub fn lambda_map(s: f64) -> Result<ExtendedHalfLine, SplitStepError> {
    check_unit_interval(s)?;
    Ok(ExtendedHalfLine::from_log(s.ln_1p() - (-s).ln_1p()))
}

/// Inverse of [`lambda_map`].
pub fn lambda_inverse(t: ExtendedHalfLine) -> f64 {
    match t.ln() {
        l if l == f64::INFINITY => 1.0,
        l if l == f64::NEG_INFINITY => -1.0,
        l => (0.5 * l).tanh(),
    }
}

/// `ln(1 + s)` as an extended value; `s = −1` gives `−∞`.
fn log_one_plus(s: f64) -> f64 {
    if s <= -1.0 {
        f64::NEG_INFINITY
    } else {
        s.ln_1p()
    }
}

fn root_plus(v: f64) -> f64 {
    (1.0 + v).max(0.0).sqrt()
}

fn root_minus(v: f64) -> f64 {
    (1.0 - v).max(0.0).sqrt()
}

fn complement(v: f64) -> f64 {
    (1.0 - v * v).max(0.0).sqrt()
}

/// The Λ-average `Λ⁻¹((Π_m Λ(t_m))^{1/n})` of one period of a tail.
pub fn lambda_average(tail: &[f64]) -> Result<f64, SplitStepError> {
    let prod = ExtendedHalfLine::product(tail.iter().map(|&v| lambda_map(v)).collect::<Result<Vec<_>, _>>()?)?;
    Ok(lambda_inverse(prod.powf(1.0 / tail.len() as f64)))
}

/// Coin parameters `p` and `a` of the split-step walk.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitStepModel {
    p: PeriodicTailSequence<f64>,
    a: PeriodicTailSequence<f64>,
}

/// Averaged tail parameters on one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLimits {
    pub side: Side,
    pub p: f64,
    pub a: f64,
}

fn collect_range(field: &'static str, seq: &PeriodicTailSequence<f64>, out: &mut Vec<RangeViolation>) {
    let bad = |v: f64| !(-1.0..=1.0).contains(&v);
    for (i, &v) in seq.core_values().iter().enumerate() {
        if bad(v) {
            out.push(RangeViolation { field, slot: SlotRef::Core(i), value: v });
        }
    }
    for (i, &v) in seq.tail(Side::Left).iter().enumerate() {
        if bad(v) {
            out.push(RangeViolation { field, slot: SlotRef::LeftPeriod(i), value: v });
        }
    }
    for (i, &v) in seq.tail(Side::Right).iter().enumerate() {
        if bad(v) {
            out.push(RangeViolation { field, slot: SlotRef::RightPeriod(i), value: v });
        }
    }
}

fn coin(v: f64) -> ComplexMatrix {
    let w = complement(v);
    ComplexMatrix::from_real_rows(&[&[v, w], &[w, -v]])
}

fn scalar(v: f64) -> ComplexMatrix {
    ComplexMatrix::scalar(C64::new(v, 0.0))
}

impl SplitStepModel {
    pub fn new(p: PeriodicTailSequence<f64>, a: PeriodicTailSequence<f64>) -> Result<Self, SplitStepError> {
        let mut bad = Vec::new();
        collect_range("p", &p, &mut bad);
        collect_range("a", &a, &mut bad);
        if !bad.is_empty() {
            return Err(SplitStepError::Range(bad));
        }
        Ok(Self { p, a })
    }

    /// Constant parameters on each side, switching at site 0.
    pub fn two_phase(p: (f64, f64), a: (f64, f64)) -> Result<Self, SplitStepError> {
        Self::new(PeriodicTailSequence::two_sided(vec![p.0], vec![p.1])?, PeriodicTailSequence::two_sided(vec![a.0], vec![a.1])?)
    }

    /// The same periodic parameters everywhere.
    pub fn periodic(p: Vec<f64>, a: Vec<f64>) -> Result<Self, SplitStepError> {
        Self::new(PeriodicTailSequence::periodic(p)?, PeriodicTailSequence::periodic(a)?)
    }

    pub fn p(&self) -> &PeriodicTailSequence<f64> {
        &self.p
    }

    pub fn a(&self) -> &PeriodicTailSequence<f64> {
        &self.a
    }

    pub fn p_at(&self, x: i64) -> f64 {
        *self.p.value_at(x)
    }

    pub fn a_at(&self, x: i64) -> f64 {
        *self.a.value_at(x)
    }

    /// Common tail period of `p` and `a`.
    pub fn period(&self, side: Side) -> usize {
        lcm(self.p.period(side), self.a.period(side))
    }

    /// One common period of `(p, a)` on the given tail.
    pub fn tail(&self, side: Side) -> (Vec<f64>, Vec<f64>) {
        let n = self.period(side) as i64;
        ((0..n).map(|m| *self.p.tail_value(side, m)).collect(), (0..n).map(|m| *self.a.tail_value(side, m)).collect())
    }

    /// Smallest window outside which both sequences follow their tails.
    pub fn window(&self) -> (i64, i64) {
        (self.p.core_start().min(self.a.core_start()), self.p.core_end().max(self.a.core_end()))
    }

    /// The model with both tails replaced by the given side's tail.
    pub fn periodic_part(&self, side: Side) -> Self {
        let (p, a) = self.tail(side);
        Self::periodic(p, a).expect("tail values were validated")
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.p.is_purely_periodic() && self.a.is_purely_periodic()
    }

    /// `sup |p| < 1` and `sup |a| < 1`.
    pub fn strictly_inside(&self) -> bool {
        self.p.iter_all().chain(self.a.iter_all()).all(|v| v.abs() < 1.0)
    }

    /// The Λ-averaged limits `(p(⋆), a(⋆))`.
    pub fn tail_average(&self, side: Side) -> Result<TailLimits, SplitStepError> {
        let (p, a) = self.tail(side);
        let avg = |field: &'static str, t: &[f64]| {
            lambda_average(t).map_err(|e| match e {
                SplitStepError::UndefinedProduct => SplitStepError::UndefinedQuotient { side, field },
                other => other,
            })
        };
        Ok(TailLimits { side, p: avg("p", &p)?, a: avg("a", &a)? })
    }

    fn scalar_operator(&self, k0: usize, f: impl Fn(i64, i64) -> f64) -> StrictlyLocalOperator {
        let (s, e) = self.window();
        let pad = k0 as i64 + 1;
        let periods = (self.period(Side::Left), self.period(Side::Right));
        StrictlyLocalOperator::from_fn(1, k0, (s - pad, e + pad), periods, |k, x| scalar(f(k, x)))
    }

    fn half_shifts() -> (StrictlyLocalOperator, StrictlyLocalOperator) {
        let upper = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let lower = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let d = StrictlyLocalOperator::constant_bands(2, &[(0, upper), (1, lower)]);
        let d_star = d.adjoint();
        (d, d_star)
    }

    /// The chiral symmetry `Γ = diag(1, L*) C(p) diag(1, L)`.
    pub fn gamma_operator(&self) -> StrictlyLocalOperator {
        let (d, d_star) = Self::half_shifts();
        let c = StrictlyLocalOperator::multiplication(&self.p.map(|&v| coin(v)));
        let full = d_star.compose(&c).and_then(|x| x.compose(&d)).expect("dimensions agree");
        full.narrowed(1).expect("outer bands of the symmetry vanish").with_periods(self.period(Side::Left), self.period(Side::Right))
    }

    /// The second reflection `Γ' = C(a)`.
    pub fn second_reflection(&self) -> StrictlyLocalOperator {
        StrictlyLocalOperator::multiplication(&self.a.map(|&v| coin(v))).with_periods(self.period(Side::Left), self.period(Side::Right))
    }

    /// The evolution `U = Γ Γ'`, expanded from its three factors
    /// `diag(1, L*) · C(p) · diag(1, L) C(a)`; bandwidth 2.
    pub fn evolution_operator(&self) -> StrictlyLocalOperator {
        let (d, d_star) = Self::half_shifts();
        let cp = StrictlyLocalOperator::multiplication(&self.p.map(|&v| coin(v)));
        let right = d.compose(&self.second_reflection()).expect("dimensions agree");
        d_star.compose(&cp).and_then(|x| x.compose(&right)).expect("dimensions agree")
    }

    /// Half-step blocks `F_{1,±}`, `F_{2,±}` of `F = η* ε`.
    pub fn half_step_blocks(&self) -> HalfStepBlocks {
        let p = |x| self.p_at(x);
        let a = |x| self.a_at(x);
        let make = |first: bool, sign: Sign| {
            let s = sign.value();
            self.scalar_operator(1, move |k, x| {
                let (same, other) = match sign {
                    Sign::Plus => (root_plus(a(x)), root_minus(a(x))),
                    Sign::Minus => (root_minus(a(x)), root_plus(a(x))),
                };
                let v = match (first, k) {
                    (true, 0) => -s * root_plus(p(x)) * other,
                    (true, -1) => same * root_minus(p(x - 1)),
                    (false, 0) => -s * root_minus(p(x)) * same,
                    (false, -1) => other * root_plus(p(x - 1)),
                    _ => 0.0,
                };
                0.5 * v
            })
        };
        HalfStepBlocks {
            f1_plus: make(true, Sign::Plus),
            f1_minus: make(true, Sign::Minus),
            f2_plus: make(false, Sign::Plus),
            f2_minus: make(false, Sign::Minus),
        }
    }

    /// Closed form of `det(2 F̂_{1,±}(side, z))`.
    pub fn f1_determinant_closed(&self, side: Side, sign: Sign, z: C64) -> C64 {
        let (f0, fm1) = self.f1_tail_factors(side, sign);
        let n = f0.len();
        let sgn = if n % 2 == 1 { 1.0 } else { -1.0 };
        let a: f64 = f0.iter().product();
        let b: f64 = fm1.iter().product();
        C64::new(a, 0.0) + z.conj() * (sgn * b)
    }

    /// Diagonal and subdiagonal factors of `2F_{1,±}` over one tail period.
    pub fn f1_tail_factors(&self, side: Side, sign: Sign) -> (Vec<f64>, Vec<f64>) {
        let (p, a) = self.tail(side);
        let n = p.len();
        let s = sign.value();
        let a_same = |v: f64| if sign == Sign::Plus { root_plus(v) } else { root_minus(v) };
        let a_other = |v: f64| if sign == Sign::Plus { root_minus(v) } else { root_plus(v) };
        let f0 = (0..n).map(|m| -s * root_plus(p[m]) * a_other(a[m])).collect();
        let fm1 = (0..n).map(|m| a_same(a[m]) * root_minus(p[(m + n - 1) % n])).collect();
        (f0, fm1)
    }

    /// The real-part blocks `R_+`, `R_-` and the imaginary block `Q` of
    /// the transformed evolution.
    pub fn wada_parts(&self) -> WadaParts {
        let p = |x| self.p_at(x);
        let a = |x| self.a_at(x);
        let b = |x| complement(a(x));
        let real = |sign: Sign| {
            self.scalar_operator(1, move |k, x| {
                let v = match k {
                    1 => r1(sign, p(x), p(x + 1), a(x + 1)),
                    -1 => r1(sign, p(x - 1), p(x), a(x)),
                    _ => r0(sign, p(x), a(x), a(x + 1)),
                };
                0.5 * v
            })
        };
        let (s, e) = self.window();
        let periods = (self.period(Side::Left), self.period(Side::Right));
        let imag = StrictlyLocalOperator::from_fn(1, 1, (s - 2, e + 2), periods, |k, x| {
            let v = match k {
                1 => root_plus(p(x)) * root_plus(p(x + 1)) * b(x + 1),
                -1 => -root_minus(p(x)) * b(x) * root_minus(p(x - 1)),
                _ => -complement(p(x)) * (a(x) + a(x + 1)),
            };
            ComplexMatrix::scalar(C64::new(0.0, 0.5 * v))
        });
        WadaParts { r_plus: real(Sign::Plus), r_minus: real(Sign::Minus), q: imag }
    }

    /// Products `Π(1+p)(1∓a)` and `Π(1−p)(1±a)` over one tail period,
    /// compared in the log domain.
    pub fn balance(&self, side: Side, sign: Sign) -> Balance {
        let (p, a) = self.tail(side);
        let s = sign.value();
        let mut first = 0.0;
        let mut second = 0.0;
        for (&pm, &am) in p.iter().zip(&a) {
            first += log_one_plus(pm) + log_one_plus(-s * am);
            second += log_one_plus(-pm) + log_one_plus(s * am);
        }
        let positive = first > f64::NEG_INFINITY || second > f64::NEG_INFINITY;
        let gap = if first == second {
            0.0
        } else if first.is_infinite() || second.is_infinite() {
            f64::INFINITY
        } else {
            (first - second).abs()
        };
        Balance { side, sign, log_first: first, log_second: second, positive, fredholm: gap > BALANCE_TOL, gap }
    }

    /// Indices `ind_±` by the averaged-limit sign formula, cross-checked
    /// against the winding of `det F̂_{1,±}`.
    pub fn index_pm(&self, opts: &SamplingOptions) -> Result<TheoremBReport, SplitStepError> {
        let limits = [self.tail_average(Side::Left).ok(), self.tail_average(Side::Right).ok()];
        let blocks = self.half_step_blocks();
        let mut warnings = Vec::new();
        let mut signs = Vec::new();
        for sign in Sign::BOTH {
            let balances = [self.balance(Side::Left, sign), self.balance(Side::Right, sign)];
            for b in &balances {
                if b.positive && !b.fredholm {
                    warnings.push(Warning::NearBalanced { side: b.side, detail: format!("{sign} products agree to relative {:e}", b.gap) });
                }
            }
            let fredholm = balances.iter().all(|b| b.positive && b.fredholm);
            let index = match (fredholm, limits) {
                (true, [Some(l), Some(r)]) => {
                    let s = sign.value();
                    Some(sign_difference(r.p - s * r.a, l.p - s * l.a)?)
                }
                _ => None,
            };
            let winding = fredholm_index(blocks.f1(sign), opts)?;
            let agree = index == winding.index && fredholm == winding.fredholm;
            signs.push(SignIndex { sign, balances, fredholm, index, winding, agree });
        }
        let minus = signs.pop().expect("two signs");
        let plus = signs.pop().expect("two signs");
        Ok(TheoremBReport { limits, plus, minus, warnings })
    }

    /// Coefficients of `2R̂_±(side, ·)` as a corner-tridiagonal family
    /// (halved, so the realization is `R̂_±` itself).
    pub fn theorem_c_family(&self, side: Side, sign: Sign) -> CornerTridiagonal {
        let (p, a) = self.tail(side);
        let n = p.len();
        let diag = (0..n).map(|m| 0.5 * r0(sign, p[m], a[m], a[(m + 1) % n])).collect();
        let off = (0..n).map(|m| 0.5 * r1(sign, p[m], p[(m + 1) % n], a[(m + 1) % n])).collect();
        CornerTridiagonal::new(diag, off).expect("matching lengths")
    }

    /// `R̂_±(side, z)` realized at the unit phase `z`.
    pub fn theorem_c_matrix(&self, side: Side, sign: Sign, z: C64) -> Result<ComplexMatrix, SplitStepError> {
        Ok(self.theorem_c_family(side, sign).realize(z)?)
    }

    /// Band set `⋃_z σ(R̂_±(side, z))` for the chosen sides and signs.
    pub fn real_part_bands(&self, sides: &[Side], signs: &[Sign], opts: &SamplingOptions) -> Result<SpectralBands, SplitStepError> {
        let families: Vec<MatrixFamily<'_>> = sides
            .iter()
            .flat_map(|&side| signs.iter().map(move |&sign| (side, sign)))
            .map(|(side, sign)| {
                let fam = self.theorem_c_family(side, sign);
                Box::new(move |z: C64| Ok(fam.realize(z)?)) as MatrixFamily<'_>
            })
            .collect();
        Ok(hermitian_family_bands(&families, opts)?)
    }

    /// Essential spectrum of `U` as conjugation-symmetric arcs, with the
    /// real-part bands it is derived from.
    pub fn essential_spectrum_u(&self, opts: &SamplingOptions) -> Result<SpectralBands, SplitStepError> {
        let mut bands = self.real_part_bands(&Side::BOTH, &Sign::BOTH, opts)?;
        for b in &mut bands.intervals {
            b.lo = b.lo.max(-1.0);
            b.hi = b.hi.min(1.0);
        }
        Ok(SpectralBands::from_intervals(bands.intervals, opts.merge_tol, bands.resolution))
    }

    /// Closed-form bands for tail periods 1 and 2.
    pub fn closed_bands(&self, side: Side) -> Result<ClosedBands, SplitStepError> {
        let (p, a) = self.tail(side);
        match p.len() {
            1 => {
                let centre = p[0] * a[0];
                let radius = complement(p[0]) * complement(a[0]);
                Ok(ClosedBands {
                    intervals: vec![Band { lo: centre - radius, hi: centre + radius }],
                    singleton: radius == 0.0,
                    connected: true,
                    gap: None,
                })
            }
            2 => {
                let (p0, p1, a0, a1) = (p[0], p[1], a[0], a[1]);
                let d = (p0 + p1) * (a0 + a1) / 4.0;
                let base = 2.0 - (1.0 + p0 * p1) * (1.0 + a0 * a1);
                let cross = complement(p0) * complement(p1) * complement(a0) * complement(a1);
                let d1 = (base - cross) / 2.0;
                let d2 = (base + cross) / 2.0;
                let inner = (d * d + d1).max(0.0).sqrt();
                let outer = (d * d + d2).max(0.0).sqrt();
                let singleton = p.iter().chain(&a).any(|v| v.abs() == 1.0);
                let fam = self.theorem_c_family(side, Sign::Plus);
                let same = |x: f64, y: f64| (x - y).abs() <= 1e-12;
                let connected = same(fam.diag[0], fam.diag[1]) && same(fam.off[0], fam.off[1]);
                Ok(ClosedBands {
                    intervals: vec![Band { lo: d - outer, hi: d - inner }, Band { lo: d + inner, hi: d + outer }],
                    singleton,
                    connected,
                    gap: Some(2.0 * inner),
                })
            }
            period => Err(SplitStepError::UnsupportedPeriod { period }),
        }
    }
}

fn r0(sign: Sign, p: f64, a: f64, a_next: f64) -> f64 {
    let s = sign.value();
    (p + s) * a + (p - s) * a_next
}

fn r1(sign: Sign, p: f64, p_next: f64, a_next: f64) -> f64 {
    let s = sign.value();
    ((1.0 - s * p).max(0.0) * (1.0 + s * p_next).max(0.0) * (1.0 - a_next * a_next).max(0.0)).sqrt()
}

fn sign_difference(right: f64, left: f64) -> Result<i64, SplitStepError> {
    if right == 0.0 || left == 0.0 {
        return Err(SplitStepError::ZeroSign);
    }
    let sgn = |v: f64| if v > 0.0 { 1 } else { -1 };
    Ok((sgn(right) - sgn(left)) / 2)
}

#[derive(Debug, Clone)]
pub struct HalfStepBlocks {
    pub f1_plus: StrictlyLocalOperator,
    pub f1_minus: StrictlyLocalOperator,
    pub f2_plus: StrictlyLocalOperator,
    pub f2_minus: StrictlyLocalOperator,
}

impl HalfStepBlocks {
    pub fn f1(&self, sign: Sign) -> &StrictlyLocalOperator {
        match sign {
            Sign::Plus => &self.f1_plus,
            Sign::Minus => &self.f1_minus,
        }
    }

    pub fn f2(&self, sign: Sign) -> &StrictlyLocalOperator {
        match sign {
            Sign::Plus => &self.f2_plus,
            Sign::Minus => &self.f2_minus,
        }
    }

    /// The full `2 × 2` block operator `[[F_{1,-}, F_{2,+}], [F_{1,+}, F_{2,-}]]`.
    pub fn assemble(&self) -> StrictlyLocalOperator {
        StrictlyLocalOperator::block(&[
            vec![self.f1_minus.clone(), self.f2_plus.clone()],
            vec![self.f1_plus.clone(), self.f2_minus.clone()],
        ])
        .expect("scalar blocks")
    }
}

#[derive(Debug, Clone)]
pub struct WadaParts {
    pub r_plus: StrictlyLocalOperator,
    pub r_minus: StrictlyLocalOperator,
    pub q: StrictlyLocalOperator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance {
    pub side: Side,
    pub sign: Sign,
    /// `ln Π(1+p)(1∓a)`.
    pub log_first: f64,
    /// `ln Π(1−p)(1±a)`.
    pub log_second: f64,
    /// The two products are not both zero.
    pub positive: bool,
    pub fredholm: bool,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignIndex {
    pub sign: Sign,
    pub balances: [Balance; 2],
    pub fredholm: bool,
    /// From the averaged limits.
    pub index: Option<i64>,
    /// From the winding of `det F̂_{1,±}`.
    pub winding: IndexReport,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremBReport {
    pub limits: [Option<TailLimits>; 2],
    pub plus: SignIndex,
    pub minus: SignIndex,
    pub warnings: Vec<Warning>,
}

impl TheoremBReport {
    pub fn sign(&self, sign: Sign) -> &SignIndex {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    pub fn fredholm(&self) -> bool {
        self.plus.fredholm && self.minus.fredholm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBands {
    pub intervals: Vec<Band>,
    /// Every band is a single point.
    pub singleton: bool,
    /// The bands join into one interval.
    pub connected: bool,
    /// `min I₂ − max I₁` for period 2.
    pub gap: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::essential_spectrum_bands;
    use crate::numkernel::{determinant, hermitian_eigenvalues, unitarity_defect};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn domain_wall() -> SplitStepModel {
        SplitStepModel::two_phase((-0.5, 0.5), (0.0, 0.0)).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_map(0.0).unwrap().value(), 1.0);
        assert!((lambda_map(0.5).unwrap().value() - 3.0).abs() < 1e-15);
        assert!(lambda_map(-1.0).unwrap().is_zero());
        assert!(lambda_map(1.0).unwrap().is_infinite());
        assert!(lambda_map(1.5).is_err());
        assert_eq!(lambda_inverse(ExtendedHalfLine::INFINITY), 1.0);
        assert_eq!(lambda_inverse(ExtendedHalfLine::ZERO), -1.0);
        assert!(ExtendedHalfLine::ZERO.try_mul(ExtendedHalfLine::INFINITY).is_err());
    }

    #[test]
    fn tail_average_examples() {
        let m = SplitStepModel::periodic(vec![0.5], vec![0.5]).unwrap();
        let t = m.tail_average(Side::Left).unwrap();
        assert!((t.p - 0.5).abs() < 1e-15 && (t.a - 0.5).abs() < 1e-15);

        let s = 0.3;
        let m = SplitStepModel::periodic(vec![0.0, s], vec![0.0, 0.0]).unwrap();
        let expect = lambda_inverse(lambda_map(s).unwrap().powf(0.5));
        assert!((m.tail_average(Side::Right).unwrap().p - expect).abs() < 1e-15);

        let m = SplitStepModel::periodic(vec![1.0, -0.3, 0.2], vec![0.0]).unwrap();
        assert_eq!(m.tail_average(Side::Right).unwrap().p, 1.0);

        let m = SplitStepModel::periodic(vec![1.0, -1.0], vec![0.0]).unwrap();
        assert!(matches!(m.tail_average(Side::Left), Err(SplitStepError::UndefinedQuotient { field: "p", .. })));
    }

    #[test]
    fn range_is_validated() {
        let err = SplitStepModel::new(PeriodicTailSequence::periodic(vec![1.5]).unwrap(), PeriodicTailSequence::constant(0.0)).unwrap_err();
        match err {
            SplitStepError::Range(v) => {
                assert!(v.iter().any(|r| r.field == "p" && r.slot == SlotRef::LeftPeriod(0)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gamma_and_u_shapes() {
        let m = domain_wall();
        let g = m.gamma_operator();
        assert_eq!((g.dim(), g.bandwidth()), (2, 1));
        let u = m.evolution_operator();
        assert_eq!((u.dim(), u.bandwidth()), (2, 2));
        assert!(u.band(2).unwrap().iter_all().all(|m| m.is_zero()));
        // Γ coefficients at a site of the right tail
        let x = 3;
        let g0 = g.coefficient(0, x);
        assert_eq!(g0[(0, 0)], c(0.5));
        assert_eq!(g0[(1, 1)], c(-0.5));
        assert!((g.coefficient(1, x)[(0, 1)] - c(0.75f64.sqrt())).norm() < 1e-15);
        assert!((g.coefficient(-1, x)[(1, 0)] - c(0.75f64.sqrt())).norm() < 1e-15);
        // at the wall the lower diagonal entry sees p(x − 1)
        assert_eq!(g.coefficient(0, 0)[(1, 1)], c(0.5));
    }

    #[test]
    fn symbols_are_unitary_and_chiral() {
        let m = SplitStepModel::periodic(vec![0.3, -0.7], vec![0.1, 0.6]).unwrap();
        let g = m.gamma_operator();
        let u = m.evolution_operator();
        for k in 0..16 {
            let z = C64::from_polar(1.0, 0.4 * k as f64);
            let gs = g.symbol_at(Side::Left, z).unwrap();
            let us = u.symbol_at(Side::Left, z).unwrap();
            assert!(gs.hermitian_defect() < 1e-14);
            assert!(unitarity_defect(&gs).unwrap() < 1e-14);
            assert!(unitarity_defect(&us).unwrap() < 1e-14);
            let chiral = us.adjoint().sub(&gs.matmul(&us).matmul(&gs)).max_abs();
            assert!(chiral < 1e-14);
        }
    }

    #[test]
    fn f1_determinant_example() {
        let m = SplitStepModel::periodic(vec![0.0], vec![0.0]).unwrap();
        let z = C64::from_polar(1.0, 1.3);
        let closed = m.f1_determinant_closed(Side::Left, Sign::Plus, z);
        assert!((closed - (z.conj() - c(1.0))).norm() < 1e-15);
        let sym = m.half_step_blocks().f1_plus.symbol_at(Side::Left, z).unwrap().scale(c(2.0));
        assert!((determinant(&sym).unwrap() - closed).norm() < 1e-15);
    }

    #[test]
    fn wada_example_and_identities() {
        let m = SplitStepModel::periodic(vec![0.0], vec![0.0]).unwrap();
        let w = m.wada_parts();
        let l = StrictlyLocalOperator::left_shift(1);
        let cosine = l.add(&l.adjoint()).unwrap().scale(c(0.5));
        assert!(w.r_plus.coefficient_distance(&cosine).unwrap() < 1e-15);

        let m = SplitStepModel::new(
            PeriodicTailSequence::new(-1, vec![0.2, -0.4], vec![0.3, -0.6], vec![0.1]).unwrap(),
            PeriodicTailSequence::new(0, vec![0.5], vec![-0.2], vec![0.7, 0.05, -0.3]).unwrap(),
        )
        .unwrap();
        let f = m.half_step_blocks();
        let w = m.wada_parts();
        let gram = |x: &StrictlyLocalOperator, y: &StrictlyLocalOperator| x.adjoint().compose(y).unwrap();
        let r1 = gram(&f.f1_minus, &f.f1_minus).sub(&gram(&f.f1_plus, &f.f1_plus)).unwrap();
        assert!(r1.coefficient_distance(&w.r_plus).unwrap() < 1e-14);
        let r2 = gram(&f.f2_minus, &f.f2_minus).sub(&gram(&f.f2_plus, &f.f2_plus)).unwrap();
        assert!(r2.coefficient_distance(&w.r_minus).unwrap() < 1e-14);
        let q = gram(&f.f2_minus, &f.f1_plus).sub(&gram(&f.f2_plus, &f.f1_minus)).unwrap();
        assert!(q.coefficient_distance(&w.q.scale(C64::new(0.0, 1.0))).unwrap() < 1e-14);
    }

    #[test]
    fn index_examples() {
        let r = domain_wall().index_pm(&SamplingOptions::default()).unwrap();
        assert_eq!((r.plus.index, r.minus.index), (Some(1), Some(1)));
        assert!(r.plus.agree && r.minus.agree);
        assert_eq!(r.plus.winding.index, Some(1));
        assert_eq!((r.plus.winding.wn_left, r.plus.winding.wn_right), (Some(-1), Some(0)));

        let r = SplitStepModel::periodic(vec![0.5], vec![0.0]).unwrap().index_pm(&SamplingOptions::default()).unwrap();
        assert_eq!((r.plus.index, r.minus.index), (Some(0), Some(0)));

        let r = SplitStepModel::two_phase((0.3, -0.2), (0.3, 0.1)).unwrap().index_pm(&SamplingOptions::default()).unwrap();
        assert!(!r.plus.fredholm);
        assert!(r.minus.fredholm);
        assert!(r.plus.agree);
    }

    #[test]
    fn theorem_c_examples() {
        let m = SplitStepModel::periodic(vec![0.5], vec![0.5]).unwrap();
        for t in [0.0, 1.0, 2.5] {
            let z = C64::from_polar(1.0, t);
            let r = m.theorem_c_matrix(Side::Left, Sign::Plus, z).unwrap();
            assert!((r[(0, 0)].re - (0.25 + 0.75 * t.cos())).abs() < 1e-15);
        }
        let m = SplitStepModel::periodic(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        for t in [0.0, 0.7, 3.1] {
            let r = m.theorem_c_matrix(Side::Right, Sign::Plus, C64::from_polar(1.0, t)).unwrap();
            let ev = hermitian_eigenvalues(&r).unwrap();
            assert!((ev[0] + FRAC_1_SQRT_2).abs() < 1e-15 && (ev[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn theorem_c_family_is_the_wada_symbol() {
        let m = SplitStepModel::periodic(vec![0.3, -0.5, 0.8], vec![-0.1, 0.4, 0.2]).unwrap();
        let w = m.wada_parts();
        for t in [0.0, 0.9, 2.0, 4.4] {
            let z = C64::from_polar(1.0, t);
            for (sign, op) in [(Sign::Plus, &w.r_plus), (Sign::Minus, &w.r_minus)] {
                let direct = op.symbol_at(Side::Left, z).unwrap();
                let closed = m.theorem_c_matrix(Side::Left, sign, z).unwrap();
                assert!(direct.sub(&closed).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn essential_spectrum_examples() {
        let opts = SamplingOptions::default();
        let m = SplitStepModel::periodic(vec![0.0], vec![0.0]).unwrap();
        let s = m.essential_spectrum_u(&opts).unwrap();
        assert_eq!(s.arcs.len(), 1);
        assert_eq!((s.arcs[0].theta_lo, s.arcs[0].theta_hi), (0.0, std::f64::consts::TAU));

        let m = SplitStepModel::periodic(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let s = m.essential_spectrum_u(&opts).unwrap();
        assert_eq!(s.intervals.len(), 2);
        assert!((s.intervals[0].lo + FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.intervals[1].hi - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(s.arcs.len(), 4);

        let m = SplitStepModel::periodic(vec![0.5], vec![0.5]).unwrap();
        let b = essential_spectrum_bands(&m.wada_parts().r_plus, &opts).unwrap();
        assert!((b.intervals[0].lo + 0.5).abs() < 1e-12 && (b.intervals[0].hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_band_examples() {
        let m = SplitStepModel::periodic(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let cb = m.closed_bands(Side::Left).unwrap();
        assert_eq!(cb.intervals, vec![Band { lo: -1.0, hi: 0.0 }, Band { lo: 0.0, hi: 1.0 }]);
        assert!(cb.connected);

        let (p0, a0) = (0.4, -0.3);
        let two = SplitStepModel::periodic(vec![p0, p0], vec![a0, a0]).unwrap().closed_bands(Side::Left).unwrap();
        let one = SplitStepModel::periodic(vec![p0], vec![a0]).unwrap().closed_bands(Side::Left).unwrap();
        assert!((two.intervals[0].lo - one.intervals[0].lo).abs() < 1e-15);
        assert!((two.intervals[1].hi - one.intervals[0].hi).abs() < 1e-15);
        assert!((two.intervals[0].hi - two.intervals[1].lo).abs() < 1e-7);

        let cb = SplitStepModel::periodic(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap().closed_bands(Side::Right).unwrap();
        assert!(cb.singleton);
        assert!((cb.intervals[0].lo + FRAC_1_SQRT_2).abs() < 1e-15 && cb.intervals[0].lo == cb.intervals[0].hi);
        assert!((cb.intervals[1].lo - FRAC_1_SQRT_2).abs() < 1e-15 && cb.intervals[1].lo == cb.intervals[1].hi);

        let three = SplitStepModel::periodic(vec![0.1, 0.2, 0.3], vec![0.0]).unwrap();
        assert!(matches!(three.closed_bands(Side::Left), Err(SplitStepError::UnsupportedPeriod { period: 3 })));
    }
}
