//! Exact power indices and control-by-adding-players problems for weighted
//! voting games.
//!
//! The crate computes Penrose–Banzhaf and Shapley–Shubik indices as exact
//! rationals, decides the control problems by exhaustive search, and builds
//! the CNF-to-control reduction instances together with structural checks
//! that work even when the instances are far too large to count.

pub mod cnf;
pub mod control;
pub mod counting;
pub mod error;
pub mod gadgets;
pub mod game;
pub mod reductions;

pub use cnf::{parse_dimacs, seed_suite, CnfFormula, PartialAssignment, SatDecision};
pub use control::{
    decide_control, power_index, verify_reduction, verify_reduction_with, ControlDecision,
    VerificationReport, VerifyMode, VerifyOptions,
};
pub use counting::{CountingStrategy, Method, PivotalCountBySize};
pub use error::{Error, ErrorKind, Result};
pub use game::{banzhaf, is_pivotal, is_winning, shapley_shubik, Coalition, Game, RationalIndex, Weight};
