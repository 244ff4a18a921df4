//! Reference profiles used throughout the tests, the CLI fixtures and the
//! acceptance suite.

use crate::num::q;
use crate::prefs::{IntProfile, Profile};

/// Three alternatives, Borda: `p1 = 5/9`, `p3 = 4/9`.
pub fn borda3_example() -> Profile {
    Profile::from_sparse(3, &[(1, q(5, 9)), (3, q(4, 9))]).expect("valid fixture")
}

/// Four alternatives, Borda: the profile whose coalition for `A2` is
/// walked through step by step (`p7 = p8 = p20 = 2/9`, `p14 = p15 = p17 = 1/9`).
pub fn borda4_worked_example() -> Profile {
    Profile::from_sparse(4, &[(7, q(2, 9)), (8, q(2, 9)), (14, q(1, 9)), (15, q(1, 9)), (17, q(1, 9)), (20, q(2, 9))])
        .expect("valid fixture")
}

/// 21 voters under `w = (1, 0.9, 0)`: manipulable in the limit, not with
/// finitely many voters.
pub fn finite_counterexample() -> IntProfile {
    IntProfile::new(3, vec![6, 7, 8, 0, 0, 0]).expect("valid fixture")
}
