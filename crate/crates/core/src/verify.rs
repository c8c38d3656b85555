// SPDX-License-Identifier: Apache-2.0

//! Invariant suite: each check reports a measured defect against a fixed
//! tolerance. The low-level checks take operators directly so corrupted
//! inputs can be fed in.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fredholm::{fredholm_index, phase, SamplingOptions};
use crate::lattice::{Side, StrictlyLocalOperator};
use crate::numkernel::{determinant, unitarity_defect, C64};
use crate::oracle::{apply, circulant_spectrum, multiset_mismatch, symbol_union, OracleError, SiteVector};
use crate::splitstep::{Sign, SplitStepError, SplitStepModel};

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub defect: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

impl CheckOutcome {
    pub fn measured(name: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        let status = if defect <= tolerance { CheckStatus::Passed } else { CheckStatus::Failed };
        Self { name: name.into(), defect, tolerance, status }
    }

    fn skipped(name: impl Into<String>, tolerance: f64, why: String) -> Self {
        Self { name: name.into(), defect: f64::NAN, tolerance, status: CheckStatus::Skipped(why) }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Failed
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub z_samples: usize,
    pub oracle_cells: usize,
    pub random_vectors: usize,
    pub seed: u64,
    pub sampling: SamplingOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { z_samples: 64, oracle_cells: 64, random_vectors: 50, seed: 0x5eed, sampling: SamplingOptions::default() }
    }
}

fn phases(samples: usize) -> impl Iterator<Item = C64> {
    // offset by half a step so z = 1 and the real axis are not the only points
    (0..samples).map(move |k| phase(TAU * (k as f64 + 0.5) / samples as f64))
}

/// Largest unitarity defect of `Â(side, z)` over the sample phases.
pub fn symbol_unitarity_defect(op: &StrictlyLocalOperator, samples: usize) -> Result<f64, SplitStepError> {
    let mut worst: f64 = 0.0;
    for side in Side::BOTH {
        for z in phases(samples) {
            worst = worst.max(unitarity_defect(&op.symbol_at(side, z)?)?);
        }
    }
    Ok(worst)
}

/// Largest `‖Γ̂ − Γ̂*‖` and unitarity defect of `Γ̂`.
pub fn involution_defect(gamma: &StrictlyLocalOperator, samples: usize) -> Result<f64, SplitStepError> {
    let mut worst: f64 = 0.0;
    for side in Side::BOTH {
        for z in phases(samples) {
            let g = gamma.symbol_at(side, z)?;
            worst = worst.max(g.hermitian_defect()).max(unitarity_defect(&g)?);
        }
    }
    Ok(worst)
}

/// Largest `‖Û* − Γ̂ÛΓ̂‖` over the sample phases on both tails.
pub fn chiral_symbol_defect(u: &StrictlyLocalOperator, gamma: &StrictlyLocalOperator, samples: usize) -> Result<f64, SplitStepError> {
    let mut worst: f64 = 0.0;
    for side in Side::BOTH {
        for z in phases(samples) {
            let us = u.symbol_at(side, z)?;
            let gs = gamma.symbol_at(side, z)?;
            worst = worst.max(us.adjoint().sub(&gs.matmul(&us).matmul(&gs)).max_abs());
        }
    }
    Ok(worst)
}

fn random_vector(rng: &mut ChaCha8Rng, start: i64, len: usize, n: usize) -> SiteVector {
    let sites: Vec<Vec<C64>> =
        (0..len).map(|_| (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect();
    SiteVector::from_sites(start, &sites)
}

/// Largest `‖(U* − ΓUΓ)v‖` over seeded random vectors supported on the
/// model window and its neighbourhood; this also sees the core.
pub fn chiral_operator_defect(
    u: &StrictlyLocalOperator,
    gamma: &StrictlyLocalOperator,
    window: (i64, i64),
    vectors: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u_star = u.adjoint();
    let start = window.0 - 4;
    let len = (window.1 - window.0 + 8) as usize;
    let mut worst: f64 = 0.0;
    for _ in 0..vectors {
        let v = random_vector(&mut rng, start, len, u.dim());
        let lhs = apply(&u_star, &v);
        let rhs = apply(gamma, &apply(u, &apply(gamma, &v)));
        let diff = lhs.combine(C64::new(1.0, 0.0), &rhs, C64::new(-1.0, 0.0));
        worst = worst.max(diff.norm_sq().sqrt() / v.norm_sq().sqrt());
    }
    worst
}

/// Largest relative gap between the numeric determinant of `2F̂_{1,±}` and
/// its closed form.
pub fn determinant_closed_form_defect(model: &SplitStepModel, samples: usize) -> Result<f64, SplitStepError> {
    let blocks = model.half_step_blocks();
    let mut worst: f64 = 0.0;
    for sign in Sign::BOTH {
        for side in Side::BOTH {
            let (f0, fm1) = model.f1_tail_factors(side, sign);
            let scale = f0.iter().product::<f64>().abs() + fm1.iter().product::<f64>().abs();
            for z in phases(samples) {
                let numeric = determinant(&blocks.f1(sign).symbol_at(side, z)?.scale(C64::new(2.0, 0.0)))?;
                let closed = model.f1_determinant_closed(side, sign, z);
                let err = (numeric - closed).norm();
                worst = worst.max(if scale > 0.0 { err / scale } else { err });
            }
        }
    }
    Ok(worst)
}

/// Multiset distance between ring eigenvalues and sampled symbol
/// eigenvalues, for the periodic operator on one tail.
pub fn circulant_defect(op: &StrictlyLocalOperator, side: Side, cells: usize) -> Result<f64, OracleError> {
    let periodic = op.periodic_part(side);
    let ring = circulant_spectrum(&periodic, side, cells)?;
    let union = symbol_union(&periodic, side, cells)?;
    Ok(multiset_mismatch(&ring, &union))
}

fn circulant_checks(op: &StrictlyLocalOperator, cells: usize, out: &mut Vec<CheckOutcome>) -> Result<(), SplitStepError> {
    for side in Side::BOTH {
        let name = format!("circulant_equality_{side}");
        match circulant_defect(op, side, cells) {
            Ok(d) => out.push(CheckOutcome::measured(name, d, 1e-9)),
            Err(OracleError::TooLarge { dim, limit }) => {
                out.push(CheckOutcome::skipped(name, 1e-9, format!("ring dimension {dim} exceeds {limit}")))
            }
            Err(OracleError::Num(e)) => return Err(e.into()),
            Err(OracleError::Lattice(e)) => return Err(e.into()),
            Err(e) => out.push(CheckOutcome::skipped(name, 1e-9, e.to_string())),
        }
    }
    Ok(())
}

/// Full suite for a split-step model.
pub fn verify_splitstep(model: &SplitStepModel, opts: &VerifyOptions) -> Result<VerifyReport, SplitStepError> {
    let u = model.evolution_operator();
    let gamma = model.gamma_operator();
    let mut checks = vec![
        CheckOutcome::measured("symbol_unitarity", symbol_unitarity_defect(&u, opts.z_samples)?, 1e-12),
        CheckOutcome::measured("gamma_involution", involution_defect(&gamma, opts.z_samples)?, 1e-12),
        CheckOutcome::measured("chiral_identity", chiral_symbol_defect(&u, &gamma, opts.z_samples)?, 1e-12),
        CheckOutcome::measured(
            "chiral_identity_operator",
            chiral_operator_defect(&u, &gamma, model.window(), opts.random_vectors, opts.seed),
            1e-12,
        ),
        CheckOutcome::measured("determinant_closed_form", determinant_closed_form_defect(model, opts.z_samples)?, 1e-12),
    ];
    circulant_checks(&u, opts.oracle_cells, &mut checks)?;

    let blocks = model.half_step_blocks();
    let wada = model.wada_parts();
    let gram = |x: &StrictlyLocalOperator, y: &StrictlyLocalOperator| x.adjoint().compose(y);
    let r1 = gram(&blocks.f1_minus, &blocks.f1_minus)?.sub(&gram(&blocks.f1_plus, &blocks.f1_plus)?)?;
    let r2 = gram(&blocks.f2_minus, &blocks.f2_minus)?.sub(&gram(&blocks.f2_plus, &blocks.f2_plus)?)?;
    let q = gram(&blocks.f2_minus, &blocks.f1_plus)?.sub(&gram(&blocks.f2_plus, &blocks.f1_minus)?)?;
    let wada_defect = r1
        .coefficient_distance(&wada.r_plus)?
        .max(r2.coefficient_distance(&wada.r_minus)?)
        .max(q.coefficient_distance(&wada.q.scale(C64::new(0.0, 1.0)))?);
    checks.push(CheckOutcome::measured("real_part_identities", wada_defect, 1e-12));

    let mut family_defect: f64 = 0.0;
    for side in Side::BOTH {
        for z in phases(opts.z_samples) {
            for (sign, op) in [(Sign::Plus, &wada.r_plus), (Sign::Minus, &wada.r_minus)] {
                let direct = op.symbol_at(side, z)?;
                family_defect = family_defect.max(direct.sub(&model.theorem_c_matrix(side, sign, z)?).max_abs());
            }
        }
    }
    checks.push(CheckOutcome::measured("real_part_family", family_defect, 1e-12));

    let report = model.index_pm(&opts.sampling)?;
    let mismatches = Sign::BOTH.iter().filter(|&&s| !report.sign(s).agree).count();
    checks.push(CheckOutcome::measured("index_cross_check", mismatches as f64, 0.0));
    Ok(VerifyReport { checks })
}

/// Suite for a raw strictly local operator.
pub fn verify_operator(op: &StrictlyLocalOperator, opts: &VerifyOptions) -> Result<VerifyReport, SplitStepError> {
    let mut checks = Vec::new();
    let adjoint = op.adjoint();
    let mut adj_defect: f64 = 0.0;
    for side in Side::BOTH {
        for z in phases(opts.z_samples) {
            let a = op.symbol_at(side, z)?.adjoint();
            adj_defect = adj_defect.max(a.sub(&adjoint.symbol_at(side, z)?).max_abs());
        }
    }
    checks.push(CheckOutcome::measured("adjoint_symbol", adj_defect, 1e-12));
    circulant_checks(op, opts.oracle_cells, &mut checks)?;

    let original = fredholm_index(op, &opts.sampling)?;
    let grouped = fredholm_index(&op.downsample(2)?, &opts.sampling)?;
    let agree = original.fredholm == grouped.fredholm && original.index == grouped.index;
    checks.push(CheckOutcome::measured("downsample_index", if agree { 0.0 } else { 1.0 }, 0.0));
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PeriodicTailSequence;

    #[test]
    fn domain_wall_passes() {
        let m = SplitStepModel::two_phase((-0.5, 0.5), (0.0, 0.0)).unwrap();
        let r = verify_splitstep(&m, &VerifyOptions::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn periodic_model_circulant() {
        let m = SplitStepModel::periodic(vec![0.2, -0.7], vec![0.4, 0.1]).unwrap();
        let opts = VerifyOptions { oracle_cells: 32, ..VerifyOptions::default() };
        let r = verify_splitstep(&m, &opts).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert!(r.get("circulant_equality_left").unwrap().defect <= 1e-9);
    }

    #[test]
    fn corrupted_coefficient_breaks_chirality() {
        let m = SplitStepModel::two_phase((-0.5, 0.5), (0.1, 0.3)).unwrap();
        let gamma = m.gamma_operator();
        let u = m.evolution_operator();
        // perturb one core entry of the k = 1 band
        let bump = StrictlyLocalOperator::from_fn(2, 1, (0, 1), (1, 1), |k, _| {
            let mut b = crate::numkernel::ComplexMatrix::zeros(2, 2);
            if k == 1 {
                b[(0, 1)] = C64::new(1e-3, 0.0);
            }
            b
        });
        let bad = u.add(&bump).unwrap();
        assert!(chiral_operator_defect(&u, &gamma, m.window(), 10, 1) < 1e-12);
        assert!(chiral_operator_defect(&bad, &gamma, m.window(), 10, 1) > 1e-6);
        // a corrupted tail shows up in the symbol check as well
        let bad_tail = u
            .add(&StrictlyLocalOperator::multiplication(&PeriodicTailSequence::constant(crate::numkernel::ComplexMatrix::from_real_rows(
                &[&[1e-3, 0.0], &[0.0, 0.0]],
            ))))
            .unwrap();
        assert!(chiral_symbol_defect(&bad_tail, &gamma, 16).unwrap() > 1e-6);
    }

    #[test]
    fn raw_operator_suite() {
        let l = StrictlyLocalOperator::left_shift(1);
        let seq = PeriodicTailSequence::two_sided(vec![0.5], vec![-0.5]).unwrap();
        let op = l.add(&StrictlyLocalOperator::scalar_multiplication(&seq)).unwrap();
        let r = verify_operator(&op, &VerifyOptions::default()).unwrap();
        assert!(r.all_passed(), "{r:?}");
    }
}
