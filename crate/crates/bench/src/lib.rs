// SPDX-License-Identifier: Apache-2.0

//! Fixture models shared by the benchmarks.

use chiralwalk_core::{PeriodicTailSequence, SplitStepModel};

/// Domain wall between `p = −1/2` and `p = +1/2` with `a ≡ 0`.
pub fn domain_wall() -> SplitStepModel {
    SplitStepModel::two_phase((-0.5, 0.5), (0.0, 0.0)).expect("parameters in range")
}

/// A model with a core and tail periods up to `period` on both sides.
pub fn dimerized(period: usize) -> SplitStepModel {
    let tail = |offset: f64| (0..period).map(|k| (0.37 * k as f64 + offset).sin() * 0.9).collect::<Vec<_>>();
    let p = PeriodicTailSequence::new(-2, vec![0.9, -0.95, 0.0, 0.3], tail(0.1), tail(1.3)).expect("non-empty tails");
    let a = PeriodicTailSequence::new(0, vec![0.5], tail(2.2), tail(-0.7)).expect("non-empty tails");
    SplitStepModel::new(p, a).expect("parameters in range")
}
