//! Ready-made systems used by the test suites, the benchmarks, and the
//! documentation examples. The sources live under `systems/` at the
//! repository root and are embedded at compile time; each constructor
//! parses its source, which doubles as a parser smoke test.
//!
//! The six systems cover the structural spectrum: two with genuinely
//! branching recursion (growth above radius one), three periodic or
//! chain-like ones sitting exactly at radius one, and one bounded-height
//! class whose single class is driven by an unbounded multiset slot.

use crate::dsl::{parse_system, ComptonSystem};

/// Source of the all-trees system: every unlabeled rooted tree.
pub const ALL_TREES_SRC: &str = include_str!("../../../systems/alltrees.fst");
/// Source of the chain system: trees in which every node has at most one child.
pub const LINEAR_SRC: &str = include_str!("../../../systems/linear.fst");
/// Source of the bounded-height system: the bare node and height-one trees.
pub const HEIGHT_ONE_SRC: &str = include_str!("../../../systems/height1.fst");
/// Source of the unordered full binary tree system, counted by nodes.
pub const BINARY_SRC: &str = include_str!("../../../systems/binary.fst");
/// Source of the parity-split chain system (period two).
pub const EVEN_CHAINS_SRC: &str = include_str!("../../../systems/evenchains.fst");
/// Source of the decorated-spine system (period three).
pub const BAMBOO_SRC: &str = include_str!("../../../systems/bamboo.fst");

fn parse_embedded(src: &str) -> ComptonSystem {
    parse_system(src).expect("embedded system sources parse")
}

/// All unlabeled rooted trees, partitioned into the bare node and the rest.
pub fn all_trees() -> ComptonSystem {
    parse_embedded(ALL_TREES_SRC)
}

/// Chains: one tree per size.
pub fn linear() -> ComptonSystem {
    parse_embedded(LINEAR_SRC)
}

/// Trees of height at most one.
pub fn height_one() -> ComptonSystem {
    parse_embedded(HEIGHT_ONE_SRC)
}

/// Unordered full binary trees, counted by nodes.
pub fn binary() -> ComptonSystem {
    parse_embedded(BINARY_SRC)
}

/// Chains split by parity into a two-class cycle.
pub fn even_chains() -> ComptonSystem {
    parse_embedded(EVEN_CHAINS_SRC)
}

/// Spines carrying a side leaf every third node: a weight-three cycle.
pub fn bamboo() -> ComptonSystem {
    parse_embedded(BAMBOO_SRC)
}

/// Every corpus system, with a short stable label. The labels match the
/// file stems under `systems/`.
pub fn all() -> Vec<(&'static str, ComptonSystem)> {
    vec![
        ("alltrees", all_trees()),
        ("linear", linear()),
        ("height1", height_one()),
        ("binary", binary()),
        ("evenchains", even_chains()),
        ("bamboo", bamboo()),
    ]
}
