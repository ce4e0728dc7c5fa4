//! Concrete unlabeled rooted trees: canonical forms, brute-force
//! enumeration, membership testing against a system, and tree modules
//! with their free-monoid composition.
//!
//! Everything here works on explicit objects and never touches series
//! arithmetic, so the counts this module produces are an independent
//! check on the generating-function pipeline.
//!
//! The canonical form of a tree is defined through its balanced-paren
//! encoding: children are stored sorted ascending by encoding. The order
//! is plain byte order, nothing graded; it only has to be fixed. Two
//! trees are isomorphic exactly when their encodings are equal.

use crate::dsl::{ClassExpr, ComptonSystem, ProductionVector};
use crate::error::{Error, Result};
use crate::polya::MultiplicityBound;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

/// Default cap on sizes for enumeration and membership testing. The
/// enumerator materializes every tree up to the requested size, so the
/// cap guards memory, not correctness.
pub const DEFAULT_MAX_SIZE: usize = 16;

/// An unlabeled rooted tree in canonical form.
#[derive(Clone)]
pub struct RootedTree {
    children: Vec<RootedTree>,
    enc: String,
    size: usize,
}

impl RootedTree {
    /// The single-node tree.
    pub fn leaf() -> Self {
        RootedTree {
            children: Vec::new(),
            enc: "()".to_string(),
            size: 1,
        }
    }

    /// A root over the given children; sorts them into canonical order.
    pub fn new(mut children: Vec<RootedTree>) -> Self {
        children.sort();
        let mut enc =
            String::with_capacity(2 + children.iter().map(|c| c.enc.len()).sum::<usize>());
        enc.push('(');
        for c in &children {
            enc.push_str(&c.enc);
        }
        enc.push(')');
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        RootedTree {
            children,
            enc,
            size,
        }
    }

    /// A fresh root over the components of a forest.
    pub fn root_append(forest: &Forest) -> Self {
        RootedTree::new(forest.components.clone())
    }

    pub fn children(&self) -> &[RootedTree] {
        &self.children
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Balanced-paren encoding; equal exactly for isomorphic trees.
    pub fn encoding(&self) -> &str {
        &self.enc
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Parse a tree literal like `(()(()))`. Children may appear in any
    /// order; the result is canonical.
    pub fn parse(s: &str) -> Result<Self> {
        let raw = RawTree::parse(s)?;
        Ok(raw.canonical())
    }
}

impl PartialEq for RootedTree {
    fn eq(&self, other: &Self) -> bool {
        self.enc == other.enc
    }
}

impl Eq for RootedTree {}

impl PartialOrd for RootedTree {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootedTree {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.enc.cmp(&other.enc)
    }
}

impl Hash for RootedTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.enc.hash(state);
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.enc)
    }
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedTree({})", self.enc)
    }
}

/// A finite multiset of trees, stored sorted by encoding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Forest {
    components: Vec<RootedTree>,
}

impl Forest {
    pub fn empty() -> Self {
        Forest {
            components: Vec::new(),
        }
    }

    pub fn new(mut components: Vec<RootedTree>) -> Self {
        components.sort();
        Forest { components }
    }

    pub fn components(&self) -> &[RootedTree] {
        &self.components
    }

    /// Total node count over all components.
    pub fn size(&self) -> usize {
        self.components.iter().map(|t| t.size()).sum()
    }

    /// Multiset union with another forest.
    pub fn merge(&self, other: &Forest) -> Forest {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Forest::new(components)
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            f.write_str(c.encoding())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Forest({})", self)
    }
}

// Written form of a tree, children in source order. Only an intermediate
// for literal parsing: module paths in a literal address the children as
// written, before canonical sorting.
struct RawTree {
    children: Vec<RawTree>,
}

impl RawTree {
    fn parse(s: &str) -> Result<RawTree> {
        let chars: Vec<char> = s.trim().chars().collect();
        let mut pos = 0usize;
        let tree = RawTree::parse_at(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Parse {
                line: 1,
                col: pos + 1,
                msg: "trailing input after the tree literal".into(),
            });
        }
        Ok(tree)
    }

    fn parse_at(chars: &[char], pos: &mut usize) -> Result<RawTree> {
        if chars.get(*pos) != Some(&'(') {
            return Err(Error::Parse {
                line: 1,
                col: *pos + 1,
                msg: "expected `(`".into(),
            });
        }
        *pos += 1;
        let mut children = Vec::new();
        while chars.get(*pos) == Some(&'(') {
            children.push(RawTree::parse_at(chars, pos)?);
        }
        if chars.get(*pos) != Some(&')') {
            return Err(Error::Parse {
                line: 1,
                col: *pos + 1,
                msg: "expected `(` or `)`".into(),
            });
        }
        *pos += 1;
        Ok(RawTree { children })
    }

    fn canonical(&self) -> RootedTree {
        RootedTree::new(self.children.iter().map(|c| c.canonical()).collect())
    }

    // Canonicalize while relocating a path given in written child order.
    fn canonical_tracking(&self, path: &[usize]) -> Result<(RootedTree, Vec<usize>)> {
        if path.is_empty() {
            return Ok((self.canonical(), Vec::new()));
        }
        let i = path[0];
        if i >= self.children.len() {
            return Err(Error::InvalidPath {
                msg: format!("child index {i} out of range"),
            });
        }
        let (target, sub) = self.children[i].canonical_tracking(&path[1..])?;
        let mut kids: Vec<RootedTree> = Vec::with_capacity(self.children.len());
        for (k, c) in self.children.iter().enumerate() {
            kids.push(if k == i {
                target.clone()
            } else {
                c.canonical()
            });
        }
        let tree = RootedTree::new(kids);
        let j = first_equal_child(&tree, &target);
        let mut out = Vec::with_capacity(path.len());
        out.push(j);
        out.extend(sub);
        Ok((tree, out))
    }
}

fn first_equal_child(tree: &RootedTree, child: &RootedTree) -> usize {
    tree.children
        .iter()
        .position(|c| c == child)
        .expect("the child was just inserted")
}

/// The subtree addressed by a path of child indices (empty path: the
/// whole tree).
pub fn full_subtree<'a>(tree: &'a RootedTree, path: &[usize]) -> Result<&'a RootedTree> {
    let mut node = tree;
    for &i in path {
        node = node.children.get(i).ok_or_else(|| Error::InvalidPath {
            msg: format!("child index {i} out of range"),
        })?;
    }
    Ok(node)
}

// Replace the subtree at `path` by `replacement`, re-sorting on the way
// up, and return the canonical path to the replacement (first-equal-child
// at every level) extended by `tail`.
fn graft(
    tree: &RootedTree,
    path: &[usize],
    replacement: &RootedTree,
    tail: &[usize],
) -> Result<(RootedTree, Vec<usize>)> {
    if path.is_empty() {
        return Ok((replacement.clone(), tail.to_vec()));
    }
    let i = path[0];
    if i >= tree.children.len() {
        return Err(Error::InvalidPath {
            msg: format!("child index {i} out of range"),
        });
    }
    let (new_child, sub) = graft(&tree.children[i], &path[1..], replacement, tail)?;
    let mut kids = tree.children.clone();
    kids[i] = new_child.clone();
    let new_tree = RootedTree::new(kids);
    let j = first_equal_child(&new_tree, &new_child);
    let mut out = Vec::with_capacity(path.len() + tail.len());
    out.push(j);
    out.extend(sub);
    Ok((new_tree, out))
}

/// Replace the subtree at `path` (any node, not only a leaf) and return
/// the re-canonicalized tree.
pub fn replace_subtree(
    tree: &RootedTree,
    path: &[usize],
    replacement: &RootedTree,
) -> Result<RootedTree> {
    full_subtree(tree, path)?;
    Ok(graft(tree, path, replacement, &[])?.0)
}

/// A tree with one designated leaf, the socket future growth plugs into.
/// The path is canonical: at every level it takes the first child whose
/// subtree equals the one containing the designated leaf, so equal
/// modules have equal (tree, path) pairs. Size is the node count minus
/// one; the identity module is the bare node with the root as its own
/// socket.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TreeModule {
    tree: RootedTree,
    path: Vec<usize>,
}

impl TreeModule {
    /// Wrap a tree and a leaf path; the path is canonicalized.
    pub fn new(tree: RootedTree, path: &[usize]) -> Result<Self> {
        let mut node = &tree;
        let mut canonical = Vec::with_capacity(path.len());
        for &i in path {
            let target = node.children.get(i).ok_or_else(|| Error::InvalidPath {
                msg: format!("child index {i} out of range"),
            })?;
            canonical.push(first_equal_child(node, target));
            node = target;
        }
        if !node.is_leaf() {
            return Err(Error::InvalidPath {
                msg: "the path must address a leaf".into(),
            });
        }
        Ok(TreeModule {
            tree,
            path: canonical,
        })
    }

    /// The bare node with the root as the designated leaf.
    pub fn identity() -> Self {
        TreeModule {
            tree: RootedTree::leaf(),
            path: Vec::new(),
        }
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    /// Module size: node count minus one, additive under composition.
    pub fn size(&self) -> usize {
        self.tree.size() - 1
    }

    pub fn is_identity(&self) -> bool {
        self.path.is_empty()
    }

    /// Parse a module literal: a tree literal, `@`, and a dot-separated
    /// child path addressing a leaf, e.g. `(()(()))@1.0`. Path indices
    /// count children as written; the identity module is `()@`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let at = s.rfind('@').ok_or_else(|| Error::Parse {
            line: 1,
            col: s.len() + 1,
            msg: "expected `@` between the tree and the path".into(),
        })?;
        let raw = RawTree::parse(&s[..at])?;
        let path_str = &s[at + 1..];
        let mut path = Vec::new();
        if !path_str.is_empty() {
            for seg in path_str.split('.') {
                let idx: usize = seg.parse().map_err(|_| Error::Parse {
                    line: 1,
                    col: at + 2,
                    msg: format!("bad path segment `{seg}`"),
                })?;
                path.push(idx);
            }
        }
        let (tree, canonical) = raw.canonical_tracking(&path)?;
        TreeModule::new(tree, &canonical)
    }
}

impl fmt::Display for TreeModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "{}@{}", self.tree.encoding(), path.join("."))
    }
}

impl fmt::Debug for TreeModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeModule({})", self)
    }
}

/// Compose two modules: plug the second module's tree into the first
/// module's socket. Sizes add; the identity is neutral on both sides.
pub fn stack_compose(m1: &TreeModule, m2: &TreeModule) -> TreeModule {
    let (tree, path) = graft(&m1.tree, &m1.path, &m2.tree, &m2.path)
        .expect("module paths are valid by construction");
    TreeModule { tree, path }
}

/// Plug a plain tree into the module's socket, yielding a tree.
pub fn stack_apply(m: &TreeModule, t: &RootedTree) -> RootedTree {
    graft(&m.tree, &m.path, t, &[])
        .expect("module paths are valid by construction")
        .0
}

/// Factor a module into indecomposables along its designated path. A
/// module is indecomposable exactly when its path has length one; the
/// identity factors into the empty product. Composing the factors in
/// order recovers the module.
pub fn factor_module(m: &TreeModule) -> Vec<TreeModule> {
    let mut factors = Vec::with_capacity(m.path.len());
    let mut tree = m.tree.clone();
    let mut path = m.path.as_slice().to_vec();
    while let Some((&head, rest)) = path.split_first() {
        let sub = tree.children[head].clone();
        let mut kids = tree.children.clone();
        kids[head] = RootedTree::leaf();
        let head_tree = RootedTree::new(kids);
        let socket = first_equal_child(&head_tree, &RootedTree::leaf());
        factors.push(TreeModule {
            tree: head_tree,
            path: vec![socket],
        });
        tree = sub;
        path = rest.to_vec();
    }
    factors
}

/// All canonical trees with exactly `n` nodes, sorted by encoding, with
/// the default size cap.
pub fn enumerate_trees(n: usize) -> Result<Vec<RootedTree>> {
    enumerate_trees_bounded(n, DEFAULT_MAX_SIZE)
}

/// As [`enumerate_trees`], with an explicit size cap.
pub fn enumerate_trees_bounded(n: usize, max_size: usize) -> Result<Vec<RootedTree>> {
    if n > max_size {
        return Err(Error::SizeLimitExceeded {
            requested: n,
            limit: max_size,
        });
    }
    let by_size = trees_by_size(n);
    Ok(by_size.into_iter().nth(n).unwrap_or_default())
}

// by_size[s] = sorted trees with s nodes, s = 0..=n (s = 0 empty).
fn trees_by_size(n: usize) -> Vec<Vec<RootedTree>> {
    let mut by_size: Vec<Vec<RootedTree>> = vec![Vec::new()];
    if n == 0 {
        return by_size;
    }
    by_size.push(vec![RootedTree::leaf()]);
    for s in 2..=n {
        // every tree of size s is a root over a forest of total size s−1
        let mut candidates: Vec<RootedTree> = by_size[1..s].iter().flatten().cloned().collect();
        candidates.sort();
        let forests = forests_with(&candidates, s - 1, MultiplicityBound::AtLeast(1));
        let mut trees: Vec<RootedTree> = forests.iter().map(RootedTree::root_append).collect();
        trees.sort();
        by_size.push(trees);
    }
    by_size
}

// Multisets over `candidates` (sorted by encoding, repetition allowed)
// with total size `total` and a component count obeying `bound`.
// Components are chosen nondecreasing by candidate index, so each forest
// appears exactly once and arrives already sorted.
fn forests_with(candidates: &[RootedTree], total: usize, bound: MultiplicityBound) -> Vec<Forest> {
    fn dfs(
        candidates: &[RootedTree],
        start: usize,
        remaining: usize,
        bound: MultiplicityBound,
        cur: &mut Vec<RootedTree>,
        out: &mut Vec<Forest>,
    ) {
        if remaining == 0 {
            let count = cur.len();
            let ok = match bound {
                MultiplicityBound::Exactly(m) => count == m as usize,
                MultiplicityBound::AtLeast(m) => count >= m as usize,
            };
            if ok {
                out.push(Forest {
                    components: cur.clone(),
                });
            }
            return;
        }
        if let MultiplicityBound::Exactly(m) = bound {
            if cur.len() >= m as usize {
                return;
            }
        }
        for idx in start..candidates.len() {
            let sz = candidates[idx].size();
            if sz > remaining {
                continue;
            }
            cur.push(candidates[idx].clone());
            dfs(candidates, idx, remaining - sz, bound, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    dfs(candidates, 0, total, bound, &mut Vec::new(), &mut out);
    out
}

/// Indices of every class containing the tree, ascending, with the
/// default size cap. Class 0 holds exactly the bare node; a later class
/// holds the tree when its root forest satisfies one of the class's
/// production vectors, components classified recursively. More than one
/// index means the system's classes overlap; the full set is reported.
pub fn classify_tree(system: &ComptonSystem, tree: &RootedTree) -> Result<Vec<usize>> {
    classify_tree_bounded(system, tree, DEFAULT_MAX_SIZE)
}

/// As [`classify_tree`], with an explicit size cap.
pub fn classify_tree_bounded(
    system: &ComptonSystem,
    tree: &RootedTree,
    max_size: usize,
) -> Result<Vec<usize>> {
    if tree.size() > max_size {
        return Err(Error::SizeLimitExceeded {
            requested: tree.size(),
            limit: max_size,
        });
    }
    let mut memo: HashMap<String, Vec<usize>> = HashMap::new();
    Ok(classify_rec(system, tree, &mut memo))
}

fn classify_rec(
    system: &ComptonSystem,
    tree: &RootedTree,
    memo: &mut HashMap<String, Vec<usize>>,
) -> Vec<usize> {
    if let Some(hit) = memo.get(tree.encoding()) {
        return hit.clone();
    }
    let child_sets: Vec<Vec<usize>> = tree
        .children()
        .iter()
        .map(|c| classify_rec(system, c, memo))
        .collect();
    let mut out = Vec::new();
    if tree.is_leaf() {
        out.push(0);
    }
    for i in 1..system.class_count() {
        if system
            .productions(i)
            .iter()
            .any(|v| vector_matches(&child_sets, v))
        {
            out.push(i);
        }
    }
    memo.insert(tree.encoding().to_string(), out.clone());
    out
}

// Can the children (given by their class sets) be assigned to the
// vector's slots so every bound is met? Children with equal class sets
// are interchangeable, so they are grouped and counts are distributed
// over compatible slots by backtracking.
fn vector_matches(child_sets: &[Vec<usize>], vector: &ProductionVector) -> bool {
    let support: Vec<(usize, MultiplicityBound)> = vector.support().collect();
    let mut groups: BTreeMap<&[usize], usize> = BTreeMap::new();
    for set in child_sets {
        *groups.entry(set.as_slice()).or_insert(0) += 1;
    }
    let groups: Vec<(&[usize], usize)> = groups.into_iter().collect();
    // a child whose class set misses the support can never be placed
    for (set, _) in &groups {
        if !support.iter().any(|(j, _)| set.contains(j)) {
            return false;
        }
    }

    fn assign(
        groups: &[(&[usize], usize)],
        support: &[(usize, MultiplicityBound)],
        g: usize,
        tallies: &mut Vec<usize>,
    ) -> bool {
        if g == groups.len() {
            return support
                .iter()
                .zip(tallies.iter())
                .all(|((_, b), &t)| match b {
                    MultiplicityBound::Exactly(m) => t == *m as usize,
                    MultiplicityBound::AtLeast(m) => t >= *m as usize,
                });
        }
        let (set, count) = groups[g];
        let slots: Vec<usize> = support
            .iter()
            .enumerate()
            .filter(|(_, (j, _))| set.contains(j))
            .map(|(p, _)| p)
            .collect();

        // distribute `count` children over `slots`, pruning on Exactly caps
        fn split(
            groups: &[(&[usize], usize)],
            support: &[(usize, MultiplicityBound)],
            g: usize,
            slots: &[usize],
            k: usize,
            left: usize,
            tallies: &mut Vec<usize>,
        ) -> bool {
            if k == slots.len() {
                return left == 0 && assign(groups, support, g + 1, tallies);
            }
            let p = slots[k];
            let cap = match support[p].1 {
                MultiplicityBound::Exactly(m) => (m as usize).saturating_sub(tallies[p]),
                MultiplicityBound::AtLeast(_) => left,
            };
            for take in 0..=left.min(cap) {
                tallies[p] += take;
                if split(groups, support, g, slots, k + 1, left - take, tallies) {
                    tallies[p] -= take;
                    return true;
                }
                tallies[p] -= take;
            }
            false
        }
        split(groups, support, g, &slots, 0, count, tallies)
    }

    let mut tallies = vec![0usize; support.len()];
    assign(&groups, &support, 0, &mut tallies)
}

/// Count the objects an expression denotes at exactly `n` nodes by
/// explicit enumeration, with the default size cap. Tree-valued
/// expressions count trees, forest-valued ones count forests.
pub fn count_by_enumeration(system: &ComptonSystem, expr: &ClassExpr, n: usize) -> Result<u64> {
    count_by_enumeration_bounded(system, expr, n, DEFAULT_MAX_SIZE)
}

/// As [`count_by_enumeration`], with an explicit size cap.
pub fn count_by_enumeration_bounded(
    system: &ComptonSystem,
    expr: &ClassExpr,
    n: usize,
    max_size: usize,
) -> Result<u64> {
    if n > max_size {
        return Err(Error::SizeLimitExceeded {
            requested: n,
            limit: max_size,
        });
    }
    system.kind_of(expr)?;
    Ok(denote(system, expr, n, max_size)?.len() as u64)
}

// The set of objects of size exactly n, every object carried as a forest
// (a tree as the singleton forest).
fn denote(
    system: &ComptonSystem,
    expr: &ClassExpr,
    n: usize,
    max_size: usize,
) -> Result<BTreeSet<Forest>> {
    let mut out = BTreeSet::new();
    match expr {
        ClassExpr::NodeClass => {
            if n == 1 {
                out.insert(Forest::new(vec![RootedTree::leaf()]));
            }
        }
        ClassExpr::Class(i) => {
            for tree in enumerate_trees_bounded(n, max_size)? {
                if classify_tree_bounded(system, &tree, max_size)?.contains(i) {
                    out.insert(Forest::new(vec![tree]));
                }
            }
        }
        ClassExpr::Def(d) => {
            return denote(system, &system.defs()[*d].expr, n, max_size);
        }
        ClassExpr::Union(parts) => {
            for p in parts {
                out.extend(denote(system, p, n, max_size)?);
            }
        }
        ClassExpr::Sum(parts) => {
            // objects of every size 0..=n per part, then all size splits
            let mut tables: Vec<Vec<BTreeSet<Forest>>> = Vec::with_capacity(parts.len());
            for p in parts {
                let mut table = Vec::with_capacity(n + 1);
                for s in 0..=n {
                    table.push(denote(system, p, s, max_size)?);
                }
                tables.push(table);
            }
            fn splits(
                tables: &[Vec<BTreeSet<Forest>>],
                p: usize,
                remaining: usize,
                acc: &Forest,
                out: &mut BTreeSet<Forest>,
            ) {
                if p == tables.len() {
                    if remaining == 0 {
                        out.insert(acc.clone());
                    }
                    return;
                }
                for s in 0..=remaining {
                    for f in &tables[p][s] {
                        splits(tables, p + 1, remaining - s, &acc.merge(f), out);
                    }
                }
            }
            splits(&tables, 0, n, &Forest::empty(), &mut out);
        }
        ClassExpr::Multiset(bound, inner) => {
            let mut candidates: Vec<RootedTree> = Vec::new();
            for s in 1..=n {
                for f in denote(system, inner, s, max_size)? {
                    let [tree] = f.components() else {
                        unreachable!("multiset operands are tree-valued");
                    };
                    candidates.push(tree.clone());
                }
            }
            candidates.sort();
            out.extend(forests_with(&candidates, n, *bound));
        }
        ClassExpr::RootAppend(inner) => {
            if n >= 1 {
                for f in denote(system, inner, n - 1, max_size)? {
                    out.insert(Forest::new(vec![RootedTree::root_append(&f)]));
                }
            }
        }
    }
    Ok(out)
}
