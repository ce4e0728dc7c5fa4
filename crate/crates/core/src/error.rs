//! Error type shared by every module of the library.

use thiserror::Error;

/// Everything that can go wrong across the toolkit.
///
/// Operations with mathematical preconditions (constant-term requirements,
/// counting-series requirements) report them as typed variants instead of
/// panicking, so the CLI can map them to a stable exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation defined only for series with zero constant term.
    #[error("{op} requires a zero constant term, found {found}")]
    NonzeroConstantTerm { op: &'static str, found: String },

    /// Truncated logarithm is defined only at constant term 1.
    #[error("log requires constant term 1, found {found}")]
    ConstantTermNotOne { found: String },

    /// Pólya operators act on counting series: nonnegative integers only.
    #[error("{op} requires nonnegative integer coefficients, found {found} at degree {degree}")]
    NotACountingSeries {
        op: &'static str,
        degree: usize,
        found: String,
    },

    /// Syntax error in a system file, expression, or literal.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    /// A class, definition, or let-binding name that does not resolve.
    #[error("unknown name `{name}`")]
    UnknownName { name: String },

    /// Structurally invalid system: duplicate names, bad vector widths,
    /// a production vector with no present slot, and so on.
    #[error("malformed system: {msg}")]
    MalformedSystem { msg: String },

    /// Expression used where the other kind (tree vs. forest) is required.
    #[error("kind mismatch: {msg}")]
    KindMismatch { msg: String },

    /// Requested truncation order above the configured resource bound.
    #[error("order {requested} exceeds the configured bound {limit}")]
    OrderLimitExceeded { requested: usize, limit: usize },

    /// Requested enumeration size above the configured resource bound.
    #[error("size {requested} exceeds the configured bound {limit}")]
    SizeLimitExceeded { requested: usize, limit: usize },

    /// Malformed tree or module literal, or a path that does not address a leaf.
    #[error("invalid path: {msg}")]
    InvalidPath { msg: String },

    /// Explicit closed forms exist only when every class has radius >= 1.
    #[error("RADIUS_SUB_ONE: explicit form unavailable (class `{class}`)")]
    ExplicitFormUnavailable { class: String },

    /// Cycle-module extraction on a component that failed the unit-cycle test.
    #[error("component {{{component}}} is not a unit cycle: {reason}")]
    NotAUnitCycle { component: String, reason: String },

    /// Statistical diagnostics need data: zero series, empty window, and so on.
    #[error("insufficient data: {msg}")]
    InsufficientData { msg: String },

    /// A mathematical invariant the implementation relies on was violated.
    /// Seeing this variant means a bug, not a bad input.
    #[error("internal invariant violated: {msg}")]
    Invariant { msg: String },
}

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
