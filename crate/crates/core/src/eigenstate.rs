// SPDX-License-Identifier: Apache-2.0

//! Symmetry-protected eigenstates of the split-step walk at `±1`: the
//! decaying branch, the first-order recursion and a decay certificate.

use thiserror::Error;

use crate::fredholm::Warning;
use crate::lattice::Side;
use crate::numkernel::C64;
use crate::oracle::{apply, SiteVector};
use crate::splitstep::{lambda_map, ExtendedHalfLine, Sign, SplitStepError, SplitStepModel};

/// Boundary mass fraction above which a window is rejected.
pub const BOUNDARY_MASS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenstateError {
    #[error("sup |{field}| = 1; the recursion needs parameters strictly inside (-1, 1)")]
    SupremumViolated { field: &'static str },
    #[error("p ∓ a vanishes on the {side} tail for sign {sign}; the walk is not Fredholm there")]
    FredholmViolated { side: Side, sign: Sign },
    #[error("no decaying branch for sign {sign}: the index vanishes")]
    ZeroIndex { sign: Sign },
    #[error("window [{lo}, {hi}] must contain 0 and leave an interior")]
    BadWindow { lo: i64, hi: i64 },
    #[error("window too small: boundary mass fraction {boundary_fraction:e}")]
    WindowTooSmall { boundary_fraction: f64, bundle: Box<EigenstateBundle> },
    #[error("no onset for the decay sandwich inside the window")]
    SandwichFailure,
    #[error(transparent)]
    SplitStep(#[from] SplitStepError),
}

/// Which of the two series `Δ_{1,±}`, `Δ_{2,±}` converges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    First,
    Second,
}

impl Branch {
    pub fn number(self) -> u8 {
        match self {
            Branch::First => 1,
            Branch::Second => 2,
        }
    }

    /// `(−1)^j`.
    pub fn parity(self) -> f64 {
        match self {
            Branch::First => -1.0,
            Branch::Second => 1.0,
        }
    }
}

/// `x ↦ δ_{j,±}(x) = √(Λ((−1)^j p(x)) Λ(∓(−1)^j a(x)))`.
#[derive(Debug, Clone)]
pub struct DeltaProfile<'a> {
    model: &'a SplitStepModel,
    branch: Branch,
    sign: Sign,
}

fn lambda_log(s: f64) -> f64 {
    lambda_map(s).expect("validated parameter").ln()
}

impl DeltaProfile<'_> {
    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn ln_at(&self, x: i64) -> f64 {
        let e = self.branch.parity();
        0.5 * (lambda_log(e * self.model.p_at(x)) + lambda_log(-self.sign.value() * e * self.model.a_at(x)))
    }

    pub fn at(&self, x: i64) -> f64 {
        self.ln_at(x).exp()
    }
}

fn require_strict(model: &SplitStepModel) -> Result<(), EigenstateError> {
    if model.p().iter_all().any(|v| v.abs() >= 1.0) {
        return Err(EigenstateError::SupremumViolated { field: "p" });
    }
    if model.a().iter_all().any(|v| v.abs() >= 1.0) {
        return Err(EigenstateError::SupremumViolated { field: "a" });
    }
    Ok(())
}

pub fn delta_profile(model: &SplitStepModel, branch: Branch, sign: Sign) -> Result<DeltaProfile<'_>, EigenstateError> {
    require_strict(model)?;
    Ok(DeltaProfile { model, branch, sign })
}

/// Mean of `ln Λ(p) + ln Λ(∓a)` over one period of a tail; its sign is the
/// sign of `p(⋆) ∓ a(⋆)`.
fn tail_log_rate(model: &SplitStepModel, side: Side, sign: Sign) -> f64 {
    let (p, a) = model.tail(side);
    let s = sign.value();
    p.iter().zip(&a).map(|(&pm, &am)| lambda_log(pm) + lambda_log(-s * am)).sum::<f64>() / p.len() as f64
}

/// The convergent branch by the sign rule on averaged limits, or `None`
/// when neither series converges (zero index).
pub fn series_branch(model: &SplitStepModel, sign: Sign) -> Result<Option<Branch>, EigenstateError> {
    require_strict(model)?;
    let s = sign.value();
    let mut gap = [0.0; 2];
    for (slot, side) in gap.iter_mut().zip(Side::BOTH) {
        let t = model.tail_average(side)?;
        *slot = t.p - s * t.a;
        if *slot == 0.0 {
            return Err(EigenstateError::FredholmViolated { side, sign });
        }
    }
    let [left, right] = gap;
    Ok([Branch::First, Branch::Second].into_iter().find(|b| {
        let e = b.parity();
        e * right < 0.0 && 0.0 < e * left
    }))
}

/// The convergent branch by the root test on the tails of `δ²`: the
/// geometric mean of `δ_j(x)²` must be below 1 going right and of
/// `δ_j(x)^{−2}` going left.
pub fn series_branch_root_test(model: &SplitStepModel, sign: Sign) -> Result<Option<Branch>, EigenstateError> {
    require_strict(model)?;
    let right = tail_log_rate(model, Side::Right, sign);
    let left = tail_log_rate(model, Side::Left, sign);
    Ok([Branch::First, Branch::Second].into_iter().find(|b| {
        let e = b.parity();
        e * right < 0.0 && -e * left < 0.0
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCertificate {
    pub branch: Branch,
    pub sign: Sign,
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub epsilon: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    /// Smallest `|x|` from which the sandwich holds through the window.
    pub onset: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateBundle {
    pub sign: Sign,
    pub branch: Branch,
    /// Inclusive window `[lo, hi]`.
    pub window: (i64, i64),
    pub psi: Vec<f64>,
    /// `ln |ψ(x)|`, free of underflow.
    pub log_abs_psi: Vec<f64>,
    /// Two-component eigenvector `Ψ(x)`.
    pub state: Vec<[f64; 2]>,
    /// `ln ‖Ψ(x)‖²`.
    pub log_norm_sq: Vec<f64>,
    /// `max ‖((U ∓ 1)Ψ)(x)‖` over the window interior.
    pub residual: f64,
    pub boundary_fraction: f64,
    pub certificate: Option<DecayCertificate>,
    pub warnings: Vec<Warning>,
}

impl EigenstateBundle {
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.window.0..=self.window.1
    }

    fn index(&self, x: i64) -> usize {
        (x - self.window.0) as usize
    }

    pub fn psi_at(&self, x: i64) -> f64 {
        self.psi[self.index(x)]
    }

    pub fn state_at(&self, x: i64) -> [f64; 2] {
        self.state[self.index(x)]
    }

    pub fn log_norm_sq_at(&self, x: i64) -> f64 {
        self.log_norm_sq[self.index(x)]
    }

    /// `Ψ` as a finitely supported vector.
    pub fn site_vector(&self) -> SiteVector {
        let sites: Vec<Vec<C64>> = self.state.iter().map(|s| vec![C64::new(s[0], 0.0), C64::new(s[1], 0.0)]).collect();
        SiteVector::from_sites(self.window.0, &sites)
    }
}

/// First-component factor `∓(−1)^j √Λ(∓(−1)^j a(x))` in log-magnitude and
/// sign form.
fn first_component(model: &SplitStepModel, branch: Branch, sign: Sign, x: i64) -> (f64, f64) {
    let t = -sign.value() * branch.parity();
    (0.5 * lambda_log(t * model.a_at(x)), t.signum())
}

/// Builds `Ψ_±` on the inclusive window with `ψ(0) = 1`, checks
/// `(U ∓ 1)Ψ` in the interior and attaches a decay certificate.
pub fn build_eigenstate(model: &SplitStepModel, sign: Sign, window: (i64, i64)) -> Result<EigenstateBundle, EigenstateError> {
    let (lo, hi) = window;
    if lo > 0 || hi < 0 || hi - lo < 6 {
        return Err(EigenstateError::BadWindow { lo, hi });
    }
    let branch = series_branch(model, sign)?.ok_or(EigenstateError::ZeroIndex { sign })?;
    let delta = delta_profile(model, branch, sign)?;
    let len = (hi - lo + 1) as usize;
    let s = sign.value();
    let mut log_abs = vec![0.0; len];
    let mut phase = vec![1.0; len];
    let at = |x: i64| (x - lo) as usize;
    // ψ(x + 1) = ±δ(x) ψ(x)
    for x in 0..hi {
        log_abs[at(x + 1)] = log_abs[at(x)] + delta.ln_at(x);
        phase[at(x + 1)] = s * phase[at(x)];
    }
    for x in (lo..0).rev() {
        log_abs[at(x)] = log_abs[at(x + 1)] - delta.ln_at(x);
        phase[at(x)] = s * phase[at(x + 1)];
    }
    let psi: Vec<f64> = log_abs.iter().zip(&phase).map(|(l, ph)| ph * l.exp()).collect();
    let mut state = Vec::with_capacity(len);
    let mut log_norm_sq = Vec::with_capacity(len);
    for x in lo..=hi {
        let (lf, sf) = first_component(model, branch, sign, x);
        let i = at(x);
        state.push([sf * (lf + log_abs[i]).exp() * phase[i], psi[i]]);
        log_norm_sq.push(2.0 * log_abs[i] + (2.0 * lf).exp().ln_1p());
    }
    let mut bundle = EigenstateBundle {
        sign,
        branch,
        window,
        psi,
        log_abs_psi: log_abs,
        state,
        log_norm_sq,
        residual: 0.0,
        boundary_fraction: 0.0,
        certificate: None,
        warnings: Vec::new(),
    };
    bundle.residual = eigen_residual(model, &bundle.site_vector(), sign, window);
    let peak = bundle.log_norm_sq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = bundle.log_norm_sq.iter().map(|l| (l - peak).exp()).sum();
    let edges = (bundle.log_norm_sq[0] - peak).exp() + (bundle.log_norm_sq[len - 1] - peak).exp();
    bundle.boundary_fraction = edges / total;
    if bundle.boundary_fraction > BOUNDARY_MASS_TOL {
        let boundary_fraction = bundle.boundary_fraction;
        bundle.warnings.push(Warning::WindowTooSmall { boundary_fraction });
        return Err(EigenstateError::WindowTooSmall { boundary_fraction, bundle: Box::new(bundle) });
    }
    bundle.certificate = Some(decay_certificate(&bundle, model)?);
    Ok(bundle)
}

/// `max ‖((U ∓ 1)v)(x)‖` over sites at least two away from the window edges.
pub fn eigen_residual(model: &SplitStepModel, v: &SiteVector, sign: Sign, window: (i64, i64)) -> f64 {
    let u = model.evolution_operator();
    let uv = apply(&u, v);
    let diff = uv.combine(C64::new(1.0, 0.0), v, C64::new(-sign.value(), 0.0));
    let k0 = u.bandwidth() as i64;
    diff.max_site_norm(window.0 + k0, window.1 - k0)
}

/// Constants of the two-sided exponential sandwich
/// `κ↓ e^{−c↓|x|} ≤ ‖Ψ(x)‖² ≤ κ↑ e^{−c↑|x|}` for `|x| ≥ onset`.
pub fn decay_certificate(bundle: &EigenstateBundle, model: &SplitStepModel) -> Result<DecayCertificate, EigenstateError> {
    let (branch, sign) = (bundle.branch, bundle.sign);
    let e = branch.parity();
    // per-site decay of |ψ|² averaged over a period, going outwards
    let right = (e * tail_log_rate(model, Side::Right, sign)).exp();
    let left = (-e * tail_log_rate(model, Side::Left, sign)).exp();
    let delta_lo = right.min(left);
    let delta_hi = right.max(left);
    let t = -sign.value() * e;
    let ratios: Vec<f64> = model.a().iter_all().map(|&a| lambda_map(t * a).expect("validated").value() + 1.0).collect();
    let lambda_lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let epsilon = (1.0 - delta_hi).min(delta_lo) / 2.0;
    let c_lo = -(delta_lo - epsilon).ln();
    let c_hi = -(delta_hi + epsilon).ln();
    let psi0 = bundle.psi_at(0).powi(2);
    let kappa_lo = psi0 * lambda_lo;
    let kappa_hi = psi0 * lambda_hi;

    let (lo, hi) = (bundle.window.0 + 2, bundle.window.1 - 2);
    let reach = (-lo).min(hi);
    let holds = |x: i64| {
        let d = x.unsigned_abs() as f64;
        let v = bundle.log_norm_sq_at(x);
        let slack = 1e-12 * (1.0 + v.abs());
        kappa_lo.ln() - c_lo * d <= v + slack && v <= kappa_hi.ln() - c_hi * d + slack
    };
    // the onset is one past the outermost failing |x|
    let mut onset = 0;
    for x in lo..=hi {
        if !holds(x) {
            onset = onset.max(x.unsigned_abs() + 1);
        }
    }
    if onset as i64 > reach {
        return Err(EigenstateError::SandwichFailure);
    }
    Ok(DecayCertificate { branch, sign, delta_lo, delta_hi, lambda_lo, lambda_hi, epsilon, c_lo, c_hi, kappa_lo, kappa_hi, onset })
}

/// `ln` of the `|ψ|²` product over a tail period, for comparison with the
/// partial geometric means of the oracle.
pub fn squared_delta_log_mean(model: &SplitStepModel, branch: Branch, sign: Sign, side: Side) -> f64 {
    branch.parity() * tail_log_rate(model, side, sign)
}

/// `Λ`-product of `|ψ|²` decay over the given tail as an extended value.
pub fn tail_decay(model: &SplitStepModel, branch: Branch, sign: Sign, side: Side) -> ExtendedHalfLine {
    let rate = squared_delta_log_mean(model, branch, sign, side);
    ExtendedHalfLine::from_log(if side == Side::Left { -rate } else { rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall() -> SplitStepModel {
        SplitStepModel::two_phase((-0.5, 0.5), (0.0, 0.0)).unwrap()
    }

    #[test]
    fn delta_examples() {
        let m = SplitStepModel::periodic(vec![0.5], vec![0.0]).unwrap();
        let d = delta_profile(&m, Branch::First, Sign::Plus).unwrap();
        assert!((d.at(3) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let m = SplitStepModel::periodic(vec![0.3, -0.6], vec![0.2, 0.7]).unwrap();
        for sign in Sign::BOTH {
            let d1 = delta_profile(&m, Branch::First, sign).unwrap();
            let d2 = delta_profile(&m, Branch::Second, sign).unwrap();
            for x in -3..3 {
                assert!((d1.at(x) * d2.at(x) - 1.0).abs() < 1e-14);
            }
        }
        let m = SplitStepModel::periodic(vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(delta_profile(&m, Branch::First, Sign::Plus), Err(EigenstateError::SupremumViolated { .. })));
    }

    #[test]
    fn branch_examples() {
        for sign in Sign::BOTH {
            assert_eq!(series_branch(&wall(), sign).unwrap(), Some(Branch::First));
            assert_eq!(series_branch_root_test(&wall(), sign).unwrap(), Some(Branch::First));
        }
        let rev = SplitStepModel::two_phase((0.5, -0.5), (0.0, 0.0)).unwrap();
        assert_eq!(series_branch(&rev, Sign::Plus).unwrap(), Some(Branch::Second));
        let flat = SplitStepModel::periodic(vec![0.5], vec![0.0]).unwrap();
        assert_eq!(series_branch(&flat, Sign::Minus).unwrap(), None);
        let bal = SplitStepModel::two_phase((0.3, 0.1), (0.3, 0.5)).unwrap();
        assert!(matches!(series_branch(&bal, Sign::Plus), Err(EigenstateError::FredholmViolated { side: Side::Left, .. })));
    }

    #[test]
    fn domain_wall_state() {
        let m = wall();
        for sign in Sign::BOTH {
            let b = build_eigenstate(&m, sign, (-128, 128)).unwrap();
            assert!(b.residual <= 1e-12, "residual {}", b.residual);
            for x in -128i64..=128 {
                let expect = -(x.abs() as f64) * 3f64.ln();
                assert!((2.0 * b.log_abs_psi[(x + 128) as usize] - expect).abs() < 1e-10);
            }
            let c = b.certificate.unwrap();
            assert!((c.delta_lo - 1.0 / 3.0).abs() < 1e-15 && (c.delta_hi - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!((c.lambda_lo, c.lambda_hi), (2.0, 2.0));
            assert!(c.onset <= 4);
            assert!(c.c_hi <= c.c_lo && c.kappa_lo <= c.kappa_hi);
        }
    }

    #[test]
    fn chiral_partner_is_an_eigenvector() {
        let m = SplitStepModel::new(
            crate::lattice::PeriodicTailSequence::new(-2, vec![0.1, -0.2, 0.4], vec![-0.6, -0.3], vec![0.5]).unwrap(),
            crate::lattice::PeriodicTailSequence::new(0, vec![0.3], vec![0.1], vec![-0.2, 0.1]).unwrap(),
        )
        .unwrap();
        for sign in Sign::BOTH {
            let b = build_eigenstate(&m, sign, (-200, 200)).unwrap();
            assert!(b.residual < 1e-10);
            let g = apply(&m.gamma_operator(), &b.site_vector());
            assert!(eigen_residual(&m, &g, sign, (-198, 198)) < 1e-10);
        }
    }

    #[test]
    fn small_window_and_zero_index() {
        let slow = SplitStepModel::two_phase((-0.05, 0.05), (0.0, 0.0)).unwrap();
        assert!(matches!(build_eigenstate(&slow, Sign::Plus, (-16, 16)), Err(EigenstateError::WindowTooSmall { .. })));
        let flat = SplitStepModel::periodic(vec![0.5], vec![0.0]).unwrap();
        assert!(matches!(build_eigenstate(&flat, Sign::Plus, (-16, 16)), Err(EigenstateError::ZeroIndex { .. })));
    }
}
