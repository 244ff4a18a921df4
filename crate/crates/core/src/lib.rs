//! Coalitional manipulability of scoring-rule elections.
//!
//! * [`rules`]: weight vectors and the named rules.
//! * [`prefs`]: canonical ranking order, profiles, tallies, arrangements.
//! * [`manip`]: exact (or float) manipulability verdicts and symbolic systems.
//! * [`witness`]: explicit strategic ballots for manipulable profiles.
//! * [`oracle`]: exact LP and finite brute-force deciders used as ground truth.
//! * [`mc`]: Monte Carlo estimation of manipulable shares under IAC.

pub mod error;
pub mod fixtures;
pub mod manip;
pub mod mc;
pub mod num;
pub mod oracle;
pub mod prefs;
pub mod rules;
pub mod witness;

pub use error::{Error, Result};
pub use num::Q;
pub use prefs::{IntProfile, Profile, Ranking};
pub use manip::{check_all, check_bounded, check_plurality, check_theorem, BoundedCoalitionSpec, ManipVerdict};
pub use mc::{estimate_share, estimate_share_with, EstimateOptions, EstimateResult, Execution, Mode};
pub use oracle::{finite_brute_force, lp_manipulable, OracleResult};
pub use rules::{NamedRule, ScoringRule};
pub use witness::{build_witness, validate_witness, Witness};
