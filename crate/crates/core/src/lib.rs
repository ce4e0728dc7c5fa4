//! Exact generating-function toolkit for recursively specified classes of
//! unlabeled rooted trees.
//!
//! The crate provides, in dependency order:
//!
//! - [`series`]: truncated formal power series over exact rationals;
//! - [`polya`]: the multiset operators E, E_m, E_{>=m} and the star/hat
//!   transforms on counting series;
//! - [`trees`]: canonical rooted trees, brute-force enumeration, tree
//!   modules with their free-monoid composition, and class membership
//!   testing — the independent oracle for everything series-based;
//! - [`dsl`]: the class-specification language (recursive systems of the
//!   form T_i = node / Σ_j γ_j·T_j), its query expressions, validation,
//!   and the degree-synchronous fixed-point evaluator;
//! - [`structure`]: dependency digraph, radius-of-convergence
//!   classification, cycle-module extraction, and explicit closed forms;
//! - [`laws`]: period detection, the ratio test for coefficient sequences,
//!   density diagnostics, and the growth/ratio coherence report;
//! - [`oracle`]: independent reference computations used by the test
//!   suites (pentagonal partition recurrence, direct multiset formulas).
//!
//! All values are immutable and all functions are pure, so everything here
//! is safe to share across threads.

pub mod corpus;
pub mod dsl;
pub mod error;
pub mod laws;
pub mod oracle;
pub mod polya;
pub mod series;
pub mod structure;
pub mod trees;

pub use error::{Error, Result};
pub use polya::MultiplicityBound;
pub use series::{Coeff, TruncatedSeries};
