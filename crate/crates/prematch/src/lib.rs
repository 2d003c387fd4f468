//! Online preemptive maximum matching over edge streams.
//!
//! The centerpiece is a randomized geometric-rounding matcher: weights are
//! rounded down to powers of a base `theta` shifted by a random exponent, and
//! an arriving edge displaces its conflicting matched edges only when it beats
//! every one of them in rounded weight. The crate also ships the layered
//! adversarial instance distribution that bounds what any online matcher can
//! do on unweighted graphs, an exact offline matching oracle used as ground
//! truth, and a verification harness that mechanically checks the charging
//! argument behind the matcher's competitive ratio.

// Guards are written `!(x > y)` on purpose: unlike `x <= y`, the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod graph;
pub mod matchers;
pub mod oracle;
pub mod rounding;
pub mod seeding;
pub mod trace;

pub use graph::{Edge, EdgeStream, Matching};
pub use matchers::{run_matcher, Algorithm};
pub use rounding::RoundingScheme;
pub use trace::{Action, StreamTrace, TraceEvent};
