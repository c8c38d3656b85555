// SPDX-License-Identifier: Apache-2.0

//! Winding numbers of symbol determinants, Fredholm indices and essential
//! spectra of strictly local operators.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{LatticeError, Side, StrictlyLocalOperator};
use crate::numkernel::{determinant, general_eigenvalues, hermitian_eigenvalues, ComplexMatrix, NumError, C64, HERMITIAN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FredholmError {
    #[error("curve passes within {min_modulus:e} of the origin")]
    CurveThroughOrigin { min_modulus: f64 },
    #[error("adaptive refinement exhausted near t = {t}")]
    RefinementExhausted { t: f64 },
    #[error("accumulated argument {turns} turns is not an integer")]
    NonIntegerWinding { turns: f64 },
    #[error("symbol family is not Hermitian (defect {defect:e})")]
    NotHermitianFamily { defect: f64 },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub samples: usize,
    /// Maximum number of interval halvings per sample segment.
    pub adaptive_budget: u32,
    pub min_modulus_tol: f64,
    pub merge_tol: f64,
    pub refine_rounds: u32,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { samples: 1024, adaptive_budget: 16, min_modulus_tol: 1e-9, merge_tol: 1e-9, refine_rounds: 3 }
    }
}

impl SamplingOptions {
    pub fn with_samples(samples: usize) -> Self {
        Self { samples, ..Self::default() }
    }
}

/// Unit phase `e^{it}`.
pub fn phase(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

/// A closed curve `t ↦ f(e^{it})`, `t ∈ [0, 2π]`.
pub struct CircleCurve<'a> {
    evaluator: Box<dyn Fn(C64) -> C64 + Sync + 'a>,
    pub samples: usize,
    pub adaptive_budget: u32,
}

impl<'a> CircleCurve<'a> {
    pub fn new(evaluator: impl Fn(C64) -> C64 + Sync + 'a, samples: usize, adaptive_budget: u32) -> Self {
        Self { evaluator: Box::new(evaluator), samples: samples.max(3), adaptive_budget }
    }

    pub fn eval(&self, t: f64) -> C64 {
        (self.evaluator)(phase(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Smallest `|f|` over all evaluated points.
    pub min_modulus: f64,
}

struct SegmentSum {
    delta: f64,
    min_modulus: f64,
}

fn arg_step(from: C64, to: C64) -> f64 {
    (to * from.conj()).arg()
}

fn refine_segment(curve: &CircleCurve<'_>, t0: f64, f0: C64, t1: f64, f1: C64, depth: u32) -> Result<SegmentSum, FredholmError> {
    let step = arg_step(f0, f1);
    if step.abs() < PI / 2.0 && f0.norm() > 0.0 && f1.norm() > 0.0 {
        return Ok(SegmentSum { delta: step, min_modulus: f0.norm().min(f1.norm()) });
    }
    if depth >= curve.adaptive_budget {
        return Err(FredholmError::RefinementExhausted { t: t0 });
    }
    let tm = 0.5 * (t0 + t1);
    let fm = curve.eval(tm);
    let a = refine_segment(curve, t0, f0, tm, fm, depth + 1)?;
    let b = refine_segment(curve, tm, fm, t1, f1, depth + 1)?;
    Ok(SegmentSum { delta: a.delta + b.delta, min_modulus: a.min_modulus.min(b.min_modulus) })
}

/// Counter-clockwise winding number of the curve about the origin.
///
/// Each sample segment is bisected until consecutive arguments differ by
/// less than π/2; the summed argument increments are then an integer
/// multiple of 2π.
pub fn winding_number(curve: &CircleCurve<'_>, min_modulus_tol: f64) -> Result<Winding, FredholmError> {
    let m = curve.samples;
    let ts: Vec<f64> = (0..=m).map(|k| TAU * k as f64 / m as f64).collect();
    let mut values: Vec<C64> = ts[..m].par_iter().map(|&t| curve.eval(t)).collect();
    values.push(values[0]);
    let sample_min = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if sample_min.is_nan() || sample_min < min_modulus_tol {
        return Err(FredholmError::CurveThroughOrigin { min_modulus: sample_min });
    }
    let segments: Vec<Result<SegmentSum, FredholmError>> =
        (0..m).into_par_iter().map(|k| refine_segment(curve, ts[k], values[k], ts[k + 1], values[k + 1], 0)).collect();
    let mut total = 0.0;
    let mut min_modulus = sample_min;
    for s in segments {
        let s = s?;
        total += s.delta;
        min_modulus = min_modulus.min(s.min_modulus);
    }
    if min_modulus.is_nan() || min_modulus < min_modulus_tol {
        return Err(FredholmError::CurveThroughOrigin { min_modulus });
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(FredholmError::NonIntegerWinding { turns });
    }
    Ok(Winding { winding: rounded as i64, min_modulus })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A determinant curve came within tolerance of the origin.
    NearDegenerate { side: Side, min_modulus: f64 },
    /// Two products that decide Fredholmness agree to within tolerance.
    NearBalanced { side: Side, detail: String },
    /// The eigenstate window leaks mass at its edges.
    WindowTooSmall { boundary_fraction: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NearDegenerate { side, min_modulus } => {
                write!(f, "NearDegenerate: {side} determinant reaches {min_modulus:e}")
            }
            Warning::NearBalanced { side, detail } => write!(f, "NearDegenerate: {side} {detail}"),
            Warning::WindowTooSmall { boundary_fraction } => {
                write!(f, "WindowTooSmall: boundary mass fraction {boundary_fraction:e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SideDiagnostics {
    pub side: Side,
    pub winding: Option<i64>,
    pub min_abs_det: f64,
    pub failure: Option<FredholmError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub fredholm: bool,
    pub wn_left: Option<i64>,
    pub wn_right: Option<i64>,
    pub index: Option<i64>,
    pub min_abs_det: f64,
    pub sides: [SideDiagnostics; 2],
    pub warnings: Vec<Warning>,
}

/// Winding number of `det Â(side, ·)`, with failures folded into the
/// diagnostics.
pub fn side_winding(op: &StrictlyLocalOperator, side: Side, opts: &SamplingOptions) -> Result<SideDiagnostics, FredholmError> {
    // surface shape errors once instead of inside the evaluator
    determinant(&op.symbol_at(side, C64::new(1.0, 0.0))?)?;
    let curve = CircleCurve::new(
        |z| op.symbol_at(side, z).ok().and_then(|m| determinant(&m).ok()).unwrap_or(C64::new(f64::NAN, f64::NAN)),
        opts.samples,
        opts.adaptive_budget,
    );
    Ok(match winding_number(&curve, opts.min_modulus_tol) {
        Ok(w) => SideDiagnostics { side, winding: Some(w.winding), min_abs_det: w.min_modulus, failure: None },
        Err(e @ FredholmError::CurveThroughOrigin { min_modulus }) => {
            SideDiagnostics { side, winding: None, min_abs_det: min_modulus, failure: Some(e) }
        }
        Err(e @ FredholmError::RefinementExhausted { .. }) => SideDiagnostics { side, winding: None, min_abs_det: 0.0, failure: Some(e) },
        Err(e) => return Err(e),
    })
}

/// Fredholm index as the difference of right and left symbol windings.
pub fn fredholm_index(op: &StrictlyLocalOperator, opts: &SamplingOptions) -> Result<IndexReport, FredholmError> {
    let left = side_winding(op, Side::Left, opts)?;
    let right = side_winding(op, Side::Right, opts)?;
    let mut warnings = Vec::new();
    for d in [&left, &right] {
        if d.failure.is_some() {
            warnings.push(Warning::NearDegenerate { side: d.side, min_modulus: d.min_abs_det });
        }
    }
    let index = match (left.winding, right.winding) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };
    Ok(IndexReport {
        fredholm: index.is_some(),
        wn_left: left.winding,
        wn_right: right.winding,
        index,
        min_abs_det: left.min_abs_det.min(right.min_abs_det),
        sides: [left, right],
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

/// Closed arc `{e^{iθ} : θ_lo ≤ θ ≤ θ_hi}` with `0 ≤ θ_lo ≤ θ_hi ≤ 2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl Arc {
    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        let inside = |t: f64| t >= self.theta_lo - tol && t <= self.theta_hi + tol;
        inside(t) || inside(t + TAU) || inside(t - TAU)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBands {
    pub intervals: Vec<Band>,
    pub arcs: Vec<Arc>,
    /// Endpoint uncertainty from sampling and refinement.
    pub resolution: f64,
}

impl SpectralBands {
    pub fn from_intervals(mut intervals: Vec<Band>, merge_tol: f64, resolution: f64) -> Self {
        intervals = merge_bands(intervals, merge_tol);
        let arcs = arcs_from_real_parts(&intervals, merge_tol);
        Self { intervals, arcs, resolution }
    }

    /// Distance from `x` to the nearest interval.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|b| {
                if x < b.lo {
                    b.lo - x
                } else if x > b.hi {
                    x - b.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Angular distance from `e^{iθ}` to the nearest arc.
    pub fn arc_distance(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(TAU);
        self.arcs
            .iter()
            .map(|a| {
                if a.contains(t, 0.0) {
                    0.0
                } else {
                    let d = |x: f64| {
                        let r = (t - x).rem_euclid(TAU);
                        r.min(TAU - r)
                    };
                    d(a.theta_lo).min(d(a.theta_hi))
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_real(&self, x: f64, tol: f64) -> bool {
        self.distance_to(x) <= tol
    }
}

/// Sorts and merges intervals whose gap is below `merge_tol`.
pub fn merge_bands(mut bands: Vec<Band>, merge_tol: f64) -> Vec<Band> {
    bands.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut out: Vec<Band> = Vec::with_capacity(bands.len());
    for b in bands {
        match out.last_mut() {
            Some(last) if b.lo <= last.hi + merge_tol => last.hi = last.hi.max(b.hi),
            _ => out.push(b),
        }
    }
    out
}

fn merge_arcs(mut arcs: Vec<Arc>, tol: f64) -> Vec<Arc> {
    arcs.sort_by(|a, b| a.theta_lo.total_cmp(&b.theta_lo).then(a.theta_hi.total_cmp(&b.theta_hi)));
    let mut out: Vec<Arc> = Vec::with_capacity(arcs.len());
    for a in arcs {
        match out.last_mut() {
            Some(last) if a.theta_lo <= last.theta_hi + tol => last.theta_hi = last.theta_hi.max(a.theta_hi),
            _ => out.push(a),
        }
    }
    out
}

/// Arcs `{e^{iθ} : cos θ ∈ ⋃ intervals}` (conjugation symmetric).
pub fn arcs_from_real_parts(intervals: &[Band], merge_tol: f64) -> Vec<Arc> {
    let mut arcs = Vec::new();
    for b in intervals {
        let lo = b.lo.clamp(-1.0, 1.0);
        let hi = b.hi.clamp(-1.0, 1.0);
        if b.hi < -1.0 || b.lo > 1.0 {
            continue;
        }
        let (a0, a1) = (hi.acos(), lo.acos());
        arcs.push(Arc { theta_lo: a0, theta_hi: a1 });
        arcs.push(Arc { theta_lo: TAU - a1, theta_hi: TAU - a0 });
    }
    merge_arcs(arcs, merge_tol)
}

/// A Hermitian-matrix-valued function on the unit circle.
pub type MatrixFamily<'a> = Box<dyn Fn(C64) -> Result<ComplexMatrix, FredholmError> + Sync + Send + 'a>;

fn branch_eigenvalues(family: &MatrixFamily<'_>, t: f64) -> Result<Vec<f64>, FredholmError> {
    let m = family(phase(t))?;
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(FredholmError::NotHermitianFamily { defect });
    }
    let herm = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(hermitian_eigenvalues(&herm)?)
}

/// Ternary search for an extremum of branch `j` near `t0`. Returns the
/// extremal value and the spread of values across the final bracket.
fn refine_extremum(
    family: &MatrixFamily<'_>,
    j: usize,
    t0: f64,
    half_width: f64,
    maximize: bool,
    rounds: u32,
) -> Result<(f64, f64), FredholmError> {
    let sign = if maximize { 1.0 } else { -1.0 };
    let eval = |t: f64| -> Result<f64, FredholmError> { Ok(sign * branch_eigenvalues(family, t)?[j]) };
    let mut center = t0;
    let mut h = half_width;
    let mut best = eval(t0)?;
    let mut spread = 0.0;
    for _ in 0..rounds {
        let (mut a, mut b) = (center - h, center + h);
        for _ in 0..40 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if eval(m1)? < eval(m2)? {
                a = m1;
            } else {
                b = m2;
            }
        }
        let mid = 0.5 * (a + b);
        let (fa, fm, fb) = (eval(a)?, eval(mid)?, eval(b)?);
        let local = fa.max(fm).max(fb);
        if local > best {
            best = local;
            center = if fm >= fa && fm >= fb {
                mid
            } else if fa > fb {
                a
            } else {
                b
            };
        }
        spread = (local - fa.min(fm).min(fb)).abs();
        h = (b - a).max(1e-15);
    }
    Ok((sign * best, spread))
}

fn extremal_candidates(values: &[f64], maximize: bool) -> Vec<usize> {
    let m = values.len();
    let s = if maximize { 1.0 } else { -1.0 };
    let best = values.iter().map(|v| s * v).fold(f64::NEG_INFINITY, f64::max);
    let slack = (0..m).map(|k| (values[(k + 1) % m] - values[k]).abs()).fold(0.0, f64::max);
    let mut cands: Vec<usize> = (0..m)
        .filter(|&k| {
            let v = s * values[k];
            v >= s * values[(k + m - 1) % m] && v >= s * values[(k + 1) % m] && v >= best - slack
        })
        .collect();
    cands.sort_by(|&a, &b| (s * values[b]).total_cmp(&(s * values[a])));
    cands.truncate(6);
    cands
}

/// Band set `⋃_t σ(family(e^{it}))` of one or more Hermitian families.
///
/// Each sorted eigenvalue branch is continuous in `t`, so its range is an
/// interval; sampled extrema are refined by ternary search and the ranges
/// merged.
pub fn hermitian_family_bands(families: &[MatrixFamily<'_>], opts: &SamplingOptions) -> Result<SpectralBands, FredholmError> {
    let m = opts.samples.max(4);
    let h = TAU / m as f64;
    let mut intervals = Vec::new();
    let mut resolution: f64 = 0.0;
    for family in families {
        let table: Vec<Vec<f64>> = (0..m).into_par_iter().map(|k| branch_eigenvalues(family, h * k as f64)).collect::<Result<_, _>>()?;
        let dim = table[0].len();
        let refined: Vec<Result<(Band, f64), FredholmError>> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let branch: Vec<f64> = table.iter().map(|row| row[j]).collect();
                let mut lo = branch.iter().copied().fold(f64::INFINITY, f64::min);
                let mut hi = branch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut res: f64 = 0.0;
                if hi - lo > 0.0 {
                    for k in extremal_candidates(&branch, true) {
                        let (v, s) = refine_extremum(family, j, h * k as f64, h, true, opts.refine_rounds)?;
                        hi = hi.max(v);
                        res = res.max(s);
                    }
                    for k in extremal_candidates(&branch, false) {
                        let (v, s) = refine_extremum(family, j, h * k as f64, h, false, opts.refine_rounds)?;
                        lo = lo.min(v);
                        res = res.max(s);
                    }
                }
                Ok((Band { lo, hi }, res))
            })
            .collect();
        for r in refined {
            let (band, res) = r?;
            intervals.push(band);
            resolution = resolution.max(res);
        }
    }
    Ok(SpectralBands::from_intervals(intervals, opts.merge_tol, resolution + 1e-10))
}

fn symbol_family<'a>(op: &'a StrictlyLocalOperator, side: Side) -> MatrixFamily<'a> {
    Box::new(move |z| Ok(op.symbol_at(side, z)?))
}

/// Essential spectrum of an operator with Hermitian symbols, as bands.
pub fn essential_spectrum_bands(op: &StrictlyLocalOperator, opts: &SamplingOptions) -> Result<SpectralBands, FredholmError> {
    let families = [symbol_family(op, Side::Left), symbol_family(op, Side::Right)];
    hermitian_family_bands(&families, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub side: Side,
    pub z: C64,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCloud {
    pub points: Vec<CloudPoint>,
    /// Spacing of the phase grid in radians.
    pub angular_step: f64,
}

/// Eigenvalues of both tail symbols over a uniform phase grid.
pub fn essential_spectrum_cloud(op: &StrictlyLocalOperator, samples: usize) -> Result<SpectralCloud, FredholmError> {
    let m = samples.max(1);
    let mut points = Vec::new();
    for side in Side::BOTH {
        let rows: Vec<Result<Vec<CloudPoint>, FredholmError>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let z = phase(TAU * k as f64 / m as f64);
                let ev = general_eigenvalues(&op.symbol_at(side, z)?)?;
                Ok(ev.into_iter().map(|value| CloudPoint { side, z, value }).collect())
            })
            .collect();
        for r in rows {
            points.extend(r?);
        }
    }
    Ok(SpectralCloud { points, angular_step: TAU / m as f64 })
}
