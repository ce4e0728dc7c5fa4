//! Structural analysis of a system: which classes are finite, which have
//! counting series with radius of convergence exactly one, and which grow
//! faster; extraction of the weight data of period-giving cycles; and
//! construction of explicit closed forms for the radius-one case.
//!
//! The analysis is purely combinatorial. It works on the dependency
//! digraph of the classes (an edge i -> j when some satisfiable
//! production of i uses j), its strongly connected components, and a
//! per-component test: a component keeps the radius at one exactly when
//! every class in it continues the component through a single production,
//! with multiplicity exactly one, all remaining slots of that production
//! being fixed multiplicities of one-member classes. Failing components
//! force geometric growth; passing components act like a chain of rigid
//! modules whose sizes telescope into a single periodic factor.

use crate::dsl::{ClassExpr, ComptonSystem, GExpr, SystemSeries};
use crate::error::{Error, Result};
use crate::polya::MultiplicityBound;
use crate::series::{Coeff, TruncatedSeries};
use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

/// Structural growth verdict for a class or expression. The order runs
/// from the fastest growth to the tamest, so `min` combines verdicts
/// across parts of a union or product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RadiusVerdict {
    /// Radius of convergence strictly below one: exponential growth.
    RadiusSubOne,
    /// Radius exactly one: infinite class, subexponential growth.
    RadiusOne,
    /// Finitely many members (possibly none).
    Finite,
}

impl fmt::Display for RadiusVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RadiusVerdict::RadiusSubOne => "RADIUS_SUB_ONE",
            RadiusVerdict::RadiusOne => "RADIUS_ONE",
            RadiusVerdict::Finite => "FINITE",
        })
    }
}

impl Serialize for RadiusVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Dependency digraph of a system: an edge i -> j when some satisfiable
/// production of class i uses class j with a nonzero multiplicity bound
/// and j denotes at least one tree.
#[derive(Debug, Clone, Serialize)]
pub struct DependencyDigraph {
    /// Sorted adjacency lists over class indices.
    pub edges: Vec<Vec<usize>>,
    /// Strongly connected components, members sorted; components are
    /// emitted successors-first, so ids order the condensation reverse
    /// topologically.
    pub components: Vec<Vec<usize>>,
    /// Component id per class.
    pub comp_of: Vec<usize>,
    /// Per component: more than one class, or one class looping on
    /// itself.
    pub nontrivial: Vec<bool>,
    /// Per class: height of its component in the condensation, 0 for
    /// sinks.
    pub rank: Vec<usize>,
}

/// Build the dependency digraph of a system, with strongly connected
/// components and condensation heights.
pub fn build_digraph(system: &ComptonSystem) -> DependencyDigraph {
    let n = system.class_count();
    let productive = system.productive_classes();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, out_edges) in edges.iter_mut().enumerate() {
        let mut out = BTreeSet::new();
        for v in system.productions(i) {
            if !v.is_live(&productive) {
                continue;
            }
            for (j, _) in v.support() {
                if productive[j] {
                    out.insert(j);
                }
            }
        }
        *out_edges = out.into_iter().collect();
    }

    let (comp_of, components) = Tarjan::run(&edges);
    let ncomp = components.len();
    let nontrivial: Vec<bool> = components
        .iter()
        .map(|comp| comp.len() > 1 || edges[comp[0]].contains(&comp[0]))
        .collect();

    // components arrive successors-first, so every successor is ranked
    // before its predecessors
    let mut comp_rank = vec![0usize; ncomp];
    for c in 0..ncomp {
        let mut rank = 0usize;
        for &v in &components[c] {
            for &w in &edges[v] {
                if comp_of[w] != c {
                    rank = rank.max(comp_rank[comp_of[w]] + 1);
                }
            }
        }
        comp_rank[c] = rank;
    }
    let rank = (0..n).map(|v| comp_rank[comp_of[v]]).collect();

    DependencyDigraph {
        edges,
        components,
        comp_of,
        nontrivial,
        rank,
    }
}

/// Per-class result of [`classify_radius`].
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub name: String,
    pub index: usize,
    pub productive: bool,
    pub verdict: RadiusVerdict,
    /// One line of evidence: which classification rule fired.
    pub evidence: String,
    /// Exact member count, present for finite classes.
    pub member_count: Option<String>,
    /// Degree bound of a finite class: every coefficient of its series
    /// beyond this degree is zero.
    pub degree_bound: Option<u64>,
    /// Exact counting polynomial of a finite class, coefficients by
    /// degree from 0; omitted when the degree bound exceeds
    /// [`FINITE_POLY_LIMIT`].
    pub polynomial: Option<Vec<String>>,
    /// True when the class has exactly one member.
    pub singleton: bool,
    /// Node count of the unique member of a singleton class.
    pub singleton_size: Option<u64>,
    /// Strongly connected component id (ids are emitted dependencies
    /// first, so successors have smaller ids).
    pub component: usize,
    /// Height of the component in the condensation: 0 for sinks.
    pub rank: usize,
    /// Weight of one trip around the class's unit cycle, when it sits on
    /// a passing recursive component.
    pub cycle_weight: Option<u64>,
    /// Connector weight from the cycle's anchor class to this class.
    pub cycle_offset: Option<u64>,
}

/// Per-component result of [`classify_radius`].
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub id: usize,
    pub classes: Vec<String>,
    /// More than one class, or one class looping on itself.
    pub nontrivial: bool,
    /// Outcome of the unit-cycle test; absent for trivial components.
    pub unit_cycle: Option<bool>,
    /// Why the unit-cycle test failed, when it did.
    pub failure: Option<String>,
    pub rank: usize,
}

/// Full structural classification of a system.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusReport {
    pub system: String,
    pub classes: Vec<ClassReport>,
    pub components: Vec<ComponentReport>,
    /// Worst verdict over the productive classes.
    pub overall: RadiusVerdict,
}

/// Weight data of one class on a period-giving cycle.
#[derive(Debug, Clone, Serialize)]
pub struct CycleModuleInfo {
    pub class: String,
    /// Nodes added by one move along the cycle from this class: one for
    /// the fresh root plus the side slots' singleton sizes.
    pub step_weight: u64,
    /// Total weight from the anchor (smallest class index on the cycle)
    /// to this class.
    pub offset: u64,
    /// Total weight of one full trip around the cycle; the period of the
    /// class's counting series.
    pub cycle_weight: u64,
    /// Satisfiable productions of this class leaving the cycle entirely,
    /// in canonical source form.
    pub escape_productions: Vec<String>,
}

// Cycle layout of a passing component: classes in cycle order starting at
// the smallest index, the weight of each forward step, and per-class
// satisfiable productions that avoid the component.
#[derive(Debug, Clone)]
struct CycleData {
    order: Vec<usize>,
    steps: Vec<u64>,
    weight: u64,
    escapes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
enum UnitCycle {
    Passes(CycleData),
    Fails(String),
}

/// Degree bound above which the exact polynomial of a finite class is
/// not materialized in reports.
pub const FINITE_POLY_LIMIT: u64 = 4096;

struct Analysis {
    productive: Vec<bool>,
    digraph: DependencyDigraph,
    counts: Vec<Option<BigInt>>,
    singleton_size: Vec<Option<u64>>,
    degree_bound: Vec<Option<u64>>,
    polynomial: Vec<Option<TruncatedSeries>>,
    // indexed like components; None for trivial ones
    unit_cycle: Vec<Option<UnitCycle>>,
    verdicts: Vec<RadiusVerdict>,
}

impl Analysis {
    fn comp_of(&self, v: usize) -> usize {
        self.digraph.comp_of[v]
    }

    fn nontrivial(&self, comp: usize) -> bool {
        self.digraph.nontrivial[comp]
    }
}

// Tarjan's strongly-connected-components algorithm; components are
// emitted successors-first, so component ids are already a reverse
// topological order of the condensation.
struct Tarjan<'a> {
    edges: &'a [Vec<usize>],
    index: Vec<Option<usize>>,
    lowlink: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next_index: usize,
    comp_of: Vec<usize>,
    components: Vec<Vec<usize>>,
}

impl<'a> Tarjan<'a> {
    fn run(edges: &'a [Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
        let n = edges.len();
        let mut t = Tarjan {
            edges,
            index: vec![None; n],
            lowlink: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next_index: 0,
            comp_of: vec![0; n],
            components: Vec::new(),
        };
        for v in 0..n {
            if t.index[v].is_none() {
                t.visit(v);
            }
        }
        (t.comp_of, t.components)
    }

    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.next_index);
        self.lowlink[v] = self.next_index;
        self.next_index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for &w in &self.edges[v] {
            if self.index[w].is_none() {
                self.visit(w);
                self.lowlink[v] = self.lowlink[v].min(self.lowlink[w]);
            } else if self.on_stack[w] {
                self.lowlink[v] = self.lowlink[v].min(self.index[w].expect("visited"));
            }
        }
        if self.lowlink[v] == self.index[v].expect("just set") {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("stack holds the component");
                self.on_stack[w] = false;
                self.comp_of[w] = self.components.len();
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            self.components.push(comp);
        }
    }
}

// A satisfiable production of class i allows arbitrarily many components
// from a productive class.
fn has_unbounded_slot(system: &ComptonSystem, i: usize, productive: &[bool]) -> bool {
    system.productions(i).iter().any(|v| {
        v.is_live(productive)
            && v.support()
                .any(|(j, b)| matches!(b, MultiplicityBound::AtLeast(_)) && productive[j])
    })
}

fn checked_add(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).ok_or_else(|| Error::Invariant {
        msg: "weight arithmetic overflowed".into(),
    })
}

fn checked_mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or_else(|| Error::Invariant {
        msg: "weight arithmetic overflowed".into(),
    })
}

// Multiset coefficient C(count + m - 1, m): ways to pick an m-multiset
// from `count` distinct objects.
fn multiset_coefficient(count: &BigInt, m: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..m {
        num *= count + BigInt::from(m - 1 - k);
        den *= BigInt::from(k + 1);
    }
    let (q, r) = num::Integer::div_rem(&num, &den);
    debug_assert!(r.is_zero());
    q
}

fn analyze(system: &ComptonSystem) -> Result<Analysis> {
    let n = system.class_count();
    let productive = system.productive_classes();
    let digraph = build_digraph(system);
    let ncomp = digraph.components.len();

    // a class is infinite outright when a satisfiable production allows
    // arbitrarily many components from a productive class
    let unbounded: Vec<bool> = (0..n)
        .map(|i| has_unbounded_slot(system, i, &productive))
        .collect();

    // reachability closure per component (over the condensation)
    let mut comp_reaches_nontrivial = vec![false; ncomp];
    let mut comp_reaches_unbounded = vec![false; ncomp];
    let mut comp_reaches_failing = vec![false; ncomp];

    // finiteness, member counts, and exact polynomials, in dependency
    // order (smaller component ids depend on nothing later)
    let mut finite = vec![false; n];
    let mut counts: Vec<Option<BigInt>> = vec![None; n];
    let mut singleton_size: Vec<Option<u64>> = vec![None; n];
    let mut degree_bound: Vec<Option<u64>> = vec![None; n];
    let mut polynomial: Vec<Option<TruncatedSeries>> = vec![None; n];
    for c in 0..ncomp {
        let mut reach_nontrivial = digraph.nontrivial[c];
        let mut reach_unbounded = digraph.components[c].iter().any(|&v| unbounded[v]);
        for &v in &digraph.components[c] {
            for &w in &digraph.edges[v] {
                let d = digraph.comp_of[w];
                if d != c {
                    reach_nontrivial |= comp_reaches_nontrivial[d];
                    reach_unbounded |= comp_reaches_unbounded[d];
                }
            }
        }
        comp_reaches_nontrivial[c] = reach_nontrivial;
        comp_reaches_unbounded[c] = reach_unbounded;

        for &v in &digraph.components[c] {
            finite[v] = !reach_nontrivial && !reach_unbounded;
        }
        if !reach_nontrivial && !reach_unbounded {
            // trivial component, single class, all dependencies counted
            let v = digraph.components[c][0];
            let count = if v == 0 {
                BigInt::one()
            } else if !productive[v] {
                BigInt::zero()
            } else {
                let mut total = BigInt::zero();
                for vector in system.productions(v) {
                    if !vector.is_live(&productive) {
                        continue;
                    }
                    let mut product = BigInt::one();
                    for (j, b) in vector.support() {
                        match b {
                            MultiplicityBound::Exactly(m) => {
                                let cj = counts[j].as_ref().ok_or_else(|| Error::Invariant {
                                    msg: "dependency counted after its user".into(),
                                })?;
                                product *= multiset_coefficient(cj, m as u64);
                            }
                            MultiplicityBound::AtLeast(0) => {
                                // over an empty class: only the empty choice
                                debug_assert!(!productive[j]);
                            }
                            MultiplicityBound::AtLeast(_) => {
                                return Err(Error::Invariant {
                                    msg: "unbounded slot inside a finite class".into(),
                                });
                            }
                        }
                    }
                    total += product;
                }
                total
            };
            if count.is_one() {
                // the unique member's size, from the unique contributing
                // production
                let size = if v == 0 {
                    1u64
                } else {
                    let vector = system
                        .productions(v)
                        .iter()
                        .find(|vec| {
                            vec.is_live(&productive)
                                && vec.support().all(|(j, b)| match b {
                                    MultiplicityBound::Exactly(_) => {
                                        counts[j].as_ref().is_some_and(|c| c.is_one())
                                    }
                                    MultiplicityBound::AtLeast(_) => !productive[j],
                                })
                        })
                        .ok_or_else(|| Error::Invariant {
                            msg: "singleton class without a singleton production".into(),
                        })?;
                    let mut size = 1u64;
                    for (j, b) in vector.support() {
                        if let MultiplicityBound::Exactly(m) = b {
                            let sj = singleton_size[j].ok_or_else(|| Error::Invariant {
                                msg: "singleton dependency without a size".into(),
                            })?;
                            size = checked_add(size, checked_mul(m as u64, sj)?)?;
                        }
                    }
                    size
                };
                singleton_size[v] = Some(size);
            }
            counts[v] = Some(count);

            let bound = finite_degree_bound(system, v, &productive, &degree_bound)?;
            degree_bound[v] = Some(bound);
            if bound <= FINITE_POLY_LIMIT {
                polynomial[v] = Some(finite_polynomial(
                    system,
                    v,
                    &productive,
                    &polynomial,
                    bound,
                    counts[v].as_ref().expect("just set"),
                )?);
            }
        }
    }

    // unit-cycle test on nontrivial components
    let mut unit_cycle: Vec<Option<UnitCycle>> = vec![None; ncomp];
    for (c, slot) in unit_cycle.iter_mut().enumerate() {
        if !digraph.nontrivial[c] {
            continue;
        }
        *slot = Some(test_unit_cycle(
            system,
            &digraph.components[c],
            &productive,
            &counts,
            &singleton_size,
        )?);
    }

    // propagate failing components the same way as the other flags
    for c in 0..ncomp {
        let mut fails = matches!(unit_cycle[c], Some(UnitCycle::Fails(_)));
        for &v in &digraph.components[c] {
            for &w in &digraph.edges[v] {
                let d = digraph.comp_of[w];
                if d != c {
                    fails |= comp_reaches_failing[d];
                }
            }
        }
        comp_reaches_failing[c] = fails;
    }

    let verdicts: Vec<RadiusVerdict> = (0..n)
        .map(|v| {
            if finite[v] {
                RadiusVerdict::Finite
            } else if comp_reaches_failing[digraph.comp_of[v]] {
                RadiusVerdict::RadiusSubOne
            } else {
                RadiusVerdict::RadiusOne
            }
        })
        .collect();

    Ok(Analysis {
        productive,
        digraph,
        counts,
        singleton_size,
        degree_bound,
        polynomial,
        unit_cycle,
        verdicts,
    })
}

// Degree bound of a finite class: the deepest live production gives
// 1 (the root) plus each fixed slot's multiplicity times the bound of the
// slotted class. Unbounded slots inside a finite class can only cover
// empty classes and admit just the empty choice.
fn finite_degree_bound(
    system: &ComptonSystem,
    v: usize,
    productive: &[bool],
    degree_bound: &[Option<u64>],
) -> Result<u64> {
    if v == 0 {
        return Ok(1);
    }
    if !productive[v] {
        return Ok(0);
    }
    let mut best = 0u64;
    for vector in system.productions(v) {
        if !vector.is_live(productive) {
            continue;
        }
        let mut total = 1u64;
        for (j, b) in vector.support() {
            if let MultiplicityBound::Exactly(m) = b {
                let dj = degree_bound[j].ok_or_else(|| Error::Invariant {
                    msg: "dependency bounded after its user".into(),
                })?;
                total = checked_add(total, checked_mul(m as u64, dj)?)?;
            }
        }
        best = best.max(total);
    }
    Ok(best)
}

// Extend a finite class's polynomial with zeros. Sound precisely because
// the series is a genuine polynomial: above the degree bound every
// coefficient is known to vanish, not merely untracked.
fn pad_poly(p: &TruncatedSeries, order: usize) -> TruncatedSeries {
    if p.order() >= order {
        return p.truncated(order);
    }
    let mut coeffs = p.coeffs().to_vec();
    coeffs.resize(order + 1, Coeff::zero());
    TruncatedSeries::from_coeffs(coeffs)
}

// Exact counting polynomial of a finite class whose degree bound fits the
// materialization limit. Dependencies are already materialized: a user of
// a class whose bound exceeds the limit exceeds it itself.
fn finite_polynomial(
    system: &ComptonSystem,
    v: usize,
    productive: &[bool],
    polynomial: &[Option<TruncatedSeries>],
    bound: u64,
    count: &BigInt,
) -> Result<TruncatedSeries> {
    let order = bound as usize;
    if v == 0 {
        return Ok(TruncatedSeries::x(order));
    }
    if !productive[v] {
        return Ok(TruncatedSeries::zero(order));
    }
    let mut total = TruncatedSeries::zero(order);
    for vector in system.productions(v) {
        if !vector.is_live(productive) {
            continue;
        }
        let mut term = TruncatedSeries::x(order);
        for (j, b) in vector.support() {
            if !productive[j] {
                // liveness leaves only AtLeast(0) slots over empty
                // classes, and the empty multiset contributes a factor
                // of one
                debug_assert_eq!(b, MultiplicityBound::AtLeast(0));
                continue;
            }
            let pj = polynomial[j].as_ref().ok_or_else(|| Error::Invariant {
                msg: "dependency polynomial missing".into(),
            })?;
            term = term.cauchy_mul(&b.apply(&pad_poly(pj, order))?);
        }
        total = total.add(&term);
    }
    // the polynomial and the bare count must agree on the member total
    let mut sum = Coeff::zero();
    for c in total.coeffs() {
        sum += c;
    }
    if sum != Coeff::from_integer(count.clone()) {
        return Err(Error::Invariant {
            msg: "finite polynomial disagrees with the member count".into(),
        });
    }
    Ok(total)
}

fn test_unit_cycle(
    system: &ComptonSystem,
    component: &[usize],
    productive: &[bool],
    counts: &[Option<BigInt>],
    singleton_size: &[Option<u64>],
) -> Result<UnitCycle> {
    let in_comp = |j: usize| component.contains(&j);
    let mut succ: Vec<usize> = Vec::with_capacity(component.len());
    let mut step: Vec<u64> = Vec::with_capacity(component.len());
    let mut escapes: Vec<Vec<usize>> = Vec::with_capacity(component.len());

    for &k in component {
        let mut touching: Vec<usize> = Vec::new();
        let mut escaping: Vec<usize> = Vec::new();
        for (g, vector) in system.productions(k).iter().enumerate() {
            if !vector.is_live(productive) {
                continue;
            }
            if vector.support().any(|(j, _)| in_comp(j)) {
                touching.push(g);
            } else {
                escaping.push(g);
            }
        }
        if touching.len() != 1 {
            return Ok(UnitCycle::Fails(format!(
                "class `{}` has {} satisfiable productions using the component; a unit cycle \
                 allows exactly one",
                system.class_name(k),
                touching.len()
            )));
        }
        let vector = &system.productions(k)[touching[0]];
        let comp_slots: Vec<(usize, MultiplicityBound)> =
            vector.support().filter(|(j, _)| in_comp(*j)).collect();
        let [(next, bound)] = comp_slots.as_slice() else {
            return Ok(UnitCycle::Fails(format!(
                "class `{}` uses the component in {} slots of one production; a unit cycle \
                 allows exactly one",
                system.class_name(k),
                comp_slots.len()
            )));
        };
        if *bound != MultiplicityBound::Exactly(1) {
            return Ok(UnitCycle::Fails(format!(
                "class `{}` continues the component with multiplicity {}, not exactly 1",
                system.class_name(k),
                bound
            )));
        }
        let mut weight = 1u64;
        for (j, b) in vector.support() {
            if in_comp(j) {
                continue;
            }
            match b {
                MultiplicityBound::Exactly(m) => {
                    let singleton = counts[j].as_ref().is_some_and(|c| c.is_one());
                    if !singleton {
                        return Ok(UnitCycle::Fails(format!(
                            "class `{}` decorates its cycle production with `{}`, which is not \
                             a one-member class",
                            system.class_name(k),
                            system.class_name(j)
                        )));
                    }
                    let sj = singleton_size[j].ok_or_else(|| Error::Invariant {
                        msg: "singleton without a recorded size".into(),
                    })?;
                    weight = checked_add(weight, checked_mul(m as u64, sj)?)?;
                }
                MultiplicityBound::AtLeast(0) if !productive[j] => {}
                MultiplicityBound::AtLeast(_) => {
                    return Ok(UnitCycle::Fails(format!(
                        "class `{}` decorates its cycle production with an unbounded slot on \
                         `{}`",
                        system.class_name(k),
                        system.class_name(j)
                    )));
                }
            }
        }
        succ.push(*next);
        step.push(weight);
        escapes.push(escaping);
    }

    // one move per class and strong connectivity force a single cycle
    let anchor = component[0];
    let mut order = vec![anchor];
    let mut steps = Vec::with_capacity(component.len());
    let mut at = anchor;
    loop {
        let pos = component.iter().position(|&k| k == at).expect("member");
        steps.push(step[pos]);
        at = succ[pos];
        if at == anchor {
            break;
        }
        order.push(at);
    }
    if order.len() != component.len() {
        return Err(Error::Invariant {
            msg: "successor walk did not cover the component".into(),
        });
    }
    let mut weight = 0u64;
    for &s in &steps {
        weight = checked_add(weight, s)?;
    }
    let escapes_in_order: Vec<Vec<usize>> = order
        .iter()
        .map(|&k| {
            let pos = component.iter().position(|&x| x == k).expect("member");
            escapes[pos].clone()
        })
        .collect();
    Ok(UnitCycle::Passes(CycleData {
        order,
        steps,
        weight,
        escapes: escapes_in_order,
    }))
}

// One line naming the rule that fixed the verdict of class i.
fn evidence_line(system: &ComptonSystem, analysis: &Analysis, i: usize) -> String {
    let comp = analysis.comp_of(i);
    if !analysis.productive[i] {
        return "empty: no production is satisfiable".into();
    }
    match analysis.verdicts[i] {
        RadiusVerdict::Finite => {
            "finite: reaches no recursive component and no unbounded slot".into()
        }
        RadiusVerdict::RadiusSubOne => match &analysis.unit_cycle[comp] {
            Some(UnitCycle::Fails(reason)) => {
                format!("its component fails the unit-cycle test: {reason}")
            }
            _ => "reaches a component failing the unit-cycle test".into(),
        },
        RadiusVerdict::RadiusOne => match &analysis.unit_cycle[comp] {
            Some(UnitCycle::Passes(cycle)) => {
                format!("on a unit cycle of weight {}", cycle.weight)
            }
            _ if has_unbounded_slot(system, i, &analysis.productive) => {
                "infinite through an unbounded slot; every reachable recursive component \
                 passes the unit-cycle test"
                    .into()
            }
            _ => "infinite through recursion below; every reachable recursive component \
                 passes the unit-cycle test"
                .into(),
        },
    }
}

/// Classify every class of a system by the radius of convergence of its
/// counting series, with exact member counts and polynomials for the
/// finite classes, cycle weights for classes on passing recursive
/// components, and the unit-cycle outcome for every recursive component.
pub fn classify_radius(system: &ComptonSystem) -> Result<RadiusReport> {
    let analysis = analyze(system)?;
    let n = system.class_count();
    let digraph = &analysis.digraph;

    // cycle placement of classes on passing recursive components
    let mut cycle_weight: Vec<Option<u64>> = vec![None; n];
    let mut cycle_offset: Vec<Option<u64>> = vec![None; n];
    for unit in analysis.unit_cycle.iter().flatten() {
        if let UnitCycle::Passes(cycle) = unit {
            let mut offset = 0u64;
            for (pos, &k) in cycle.order.iter().enumerate() {
                cycle_weight[k] = Some(cycle.weight);
                cycle_offset[k] = Some(offset);
                offset = checked_add(offset, cycle.steps[pos])?;
            }
        }
    }

    let classes = (0..n)
        .map(|i| ClassReport {
            name: system.class_name(i).to_string(),
            index: i,
            productive: analysis.productive[i],
            verdict: analysis.verdicts[i],
            evidence: evidence_line(system, &analysis, i),
            member_count: analysis.counts[i].as_ref().map(|c| c.to_string()),
            degree_bound: analysis.degree_bound[i],
            polynomial: analysis.polynomial[i].as_ref().map(|p| {
                p.integer_coeffs()
                    .expect("counting polynomials are integer valued")
                    .iter()
                    .map(|c| c.to_string())
                    .collect()
            }),
            singleton: analysis.counts[i].as_ref().is_some_and(|c| c.is_one()),
            singleton_size: analysis.singleton_size[i],
            component: digraph.comp_of[i],
            rank: digraph.rank[i],
            cycle_weight: cycle_weight[i],
            cycle_offset: cycle_offset[i],
        })
        .collect();
    let components = digraph
        .components
        .iter()
        .enumerate()
        .map(|(id, comp)| ComponentReport {
            id,
            classes: comp
                .iter()
                .map(|&v| system.class_name(v).to_string())
                .collect(),
            nontrivial: digraph.nontrivial[id],
            unit_cycle: analysis.unit_cycle[id]
                .as_ref()
                .map(|u| matches!(u, UnitCycle::Passes(_))),
            failure: match &analysis.unit_cycle[id] {
                Some(UnitCycle::Fails(reason)) => Some(reason.clone()),
                _ => None,
            },
            rank: digraph.rank[comp[0]],
        })
        .collect();
    let overall = (0..n)
        .filter(|&i| analysis.productive[i])
        .map(|i| analysis.verdicts[i])
        .min()
        .unwrap_or(RadiusVerdict::Finite);
    Ok(RadiusReport {
        system: system.name().to_string(),
        classes,
        components,
        overall,
    })
}

/// Weight data of the cycle through the given component (class indices in
/// any order). Fails with [`Error::NotAUnitCycle`] when the component is
/// not one of the system's recursive components or does not pass the
/// unit-cycle test.
pub fn extract_cycle_modules(
    system: &ComptonSystem,
    component: &[usize],
) -> Result<Vec<CycleModuleInfo>> {
    let analysis = analyze(system)?;
    let requested: BTreeSet<usize> = component.iter().copied().collect();
    let label = || {
        component
            .iter()
            .map(|&i| {
                if i < system.class_count() {
                    system.class_name(i).to_string()
                } else {
                    format!("#{i}")
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let id = analysis
        .digraph
        .components
        .iter()
        .position(|c| c.iter().copied().collect::<BTreeSet<_>>() == requested)
        .ok_or_else(|| Error::NotAUnitCycle {
            component: label(),
            reason: "not a strongly connected component of the system".into(),
        })?;
    match &analysis.unit_cycle[id] {
        None => Err(Error::NotAUnitCycle {
            component: label(),
            reason: "the component has no cycle".into(),
        }),
        Some(UnitCycle::Fails(reason)) => Err(Error::NotAUnitCycle {
            component: label(),
            reason: reason.clone(),
        }),
        Some(UnitCycle::Passes(cycle)) => {
            let mut out = Vec::with_capacity(cycle.order.len());
            let mut offset = 0u64;
            for (pos, &k) in cycle.order.iter().enumerate() {
                let escape_productions = cycle.escapes[pos]
                    .iter()
                    .map(|&g| system.vector_source(&system.productions(k)[g]))
                    .collect();
                out.push(CycleModuleInfo {
                    class: system.class_name(k).to_string(),
                    step_weight: cycle.steps[pos],
                    offset,
                    cycle_weight: cycle.weight,
                    escape_productions,
                });
                offset = checked_add(offset, cycle.steps[pos])?;
            }
            Ok(out)
        }
    }
}

/// Does the expression denote the empty set?
fn expr_is_empty(system: &ComptonSystem, productive: &[bool], expr: &ClassExpr) -> bool {
    match expr {
        ClassExpr::NodeClass => false,
        ClassExpr::Class(i) => !productive[*i],
        ClassExpr::Def(d) => expr_is_empty(system, productive, &system.defs()[*d].expr),
        ClassExpr::Union(parts) => parts.iter().all(|p| expr_is_empty(system, productive, p)),
        ClassExpr::Sum(parts) => parts.iter().any(|p| expr_is_empty(system, productive, p)),
        ClassExpr::Multiset(bound, inner) => match bound {
            // the empty multiset is always available
            MultiplicityBound::Exactly(0) | MultiplicityBound::AtLeast(0) => false,
            _ => expr_is_empty(system, productive, inner),
        },
        ClassExpr::RootAppend(inner) => expr_is_empty(system, productive, inner),
    }
}

/// Structural verdict for a query expression, combining the per-class
/// verdicts of a report.
pub fn expr_verdict(
    system: &ComptonSystem,
    report: &RadiusReport,
    expr: &ClassExpr,
) -> RadiusVerdict {
    let productive: Vec<bool> = report.classes.iter().map(|c| c.productive).collect();
    fn go(
        system: &ComptonSystem,
        report: &RadiusReport,
        productive: &[bool],
        expr: &ClassExpr,
    ) -> RadiusVerdict {
        if expr_is_empty(system, productive, expr) {
            return RadiusVerdict::Finite;
        }
        match expr {
            ClassExpr::NodeClass => RadiusVerdict::Finite,
            ClassExpr::Class(i) => report.classes[*i].verdict,
            ClassExpr::Def(d) => go(system, report, productive, &system.defs()[*d].expr),
            ClassExpr::Union(parts) | ClassExpr::Sum(parts) => parts
                .iter()
                .filter(|p| !expr_is_empty(system, productive, p))
                .map(|p| go(system, report, productive, p))
                .min()
                .unwrap_or(RadiusVerdict::Finite),
            ClassExpr::Multiset(bound, inner) => {
                if expr_is_empty(system, productive, inner) {
                    return RadiusVerdict::Finite;
                }
                let inner_verdict = go(system, report, productive, inner);
                match (inner_verdict, bound) {
                    (RadiusVerdict::Finite, MultiplicityBound::Exactly(_)) => RadiusVerdict::Finite,
                    // unboundedly many objects from a nonempty class
                    (RadiusVerdict::Finite, MultiplicityBound::AtLeast(_)) => {
                        RadiusVerdict::RadiusOne
                    }
                    (v, _) => v,
                }
            }
            ClassExpr::RootAppend(inner) => go(system, report, productive, inner),
        }
    }
    go(system, report, &productive, expr)
}

// Cap on the powers of x and term replication materialized inside a
// closed form; a guard against pathologically heavy singleton sizes, not
// a correctness bound.
const EXPLICIT_POWER_LIMIT: u64 = 1 << 16;

// Push n factors of x, guarding against unreasonably heavy powers.
fn push_x_power(factors: &mut Vec<GExpr>, n: u64) -> Result<()> {
    if n > EXPLICIT_POWER_LIMIT {
        return Err(Error::SizeLimitExceeded {
            requested: n as usize,
            limit: EXPLICIT_POWER_LIMIT as usize,
        });
    }
    factors.extend(std::iter::repeat_n(GExpr::X, n as usize));
    Ok(())
}

// A series split as (constant term, remainder expression). Constants
// arise from multiset bounds that admit the empty multiset; the closed
// grammar has no constants, so they are carried symbolically and must
// cancel into surrounding products before the form is complete.
type Parts = (u64, Option<GExpr>);

fn parts_add(a: Parts, b: Parts) -> Result<Parts> {
    let c = checked_add(a.0, b.0)?;
    let rest = match (a.1, b.1) {
        (None, r) | (r, None) => r,
        (Some(x), Some(y)) => Some(GExpr::sum(vec![x, y])),
    };
    Ok((c, rest))
}

fn replicate(e: GExpr, times: u64) -> Result<GExpr> {
    if times > EXPLICIT_POWER_LIMIT {
        return Err(Error::SizeLimitExceeded {
            requested: times as usize,
            limit: EXPLICIT_POWER_LIMIT as usize,
        });
    }
    Ok(GExpr::sum(vec![e; times as usize]))
}

fn parts_mul(a: &Parts, b: &Parts) -> Result<Parts> {
    let c = checked_mul(a.0, b.0)?;
    let mut terms = Vec::new();
    if let Some(ra) = &a.1 {
        if b.0 > 0 {
            terms.push(replicate(ra.clone(), b.0)?);
        }
        if let Some(rb) = &b.1 {
            terms.push(GExpr::product(vec![ra.clone(), rb.clone()]));
        }
    }
    if let Some(rb) = &b.1 {
        if a.0 > 0 {
            terms.push(replicate(rb.clone(), a.0)?);
        }
    }
    let rest = if terms.is_empty() {
        None
    } else {
        Some(GExpr::sum(terms))
    };
    Ok((c, rest))
}

fn e_op(m: u32, e: GExpr) -> GExpr {
    if m == 1 {
        e
    } else {
        GExpr::ExactlyOp(m, Box::new(e))
    }
}

// The (constant, rest) form of one multiset factor over class j.
fn slot_parts(
    system: &ComptonSystem,
    analysis: &Analysis,
    j: usize,
    bound: MultiplicityBound,
) -> Parts {
    let name = system.class_name(j).to_string();
    match bound {
        MultiplicityBound::Exactly(m) => {
            debug_assert!(m >= 1 && analysis.productive[j]);
            (0, Some(e_op(m, GExpr::Ref(name))))
        }
        MultiplicityBound::AtLeast(0) => {
            if analysis.productive[j] {
                (1, Some(GExpr::AtLeastOp(1, Box::new(GExpr::Ref(name)))))
            } else {
                // over an empty class only the empty multiset remains
                (1, None)
            }
        }
        MultiplicityBound::AtLeast(m) => {
            debug_assert!(analysis.productive[j]);
            (0, Some(GExpr::AtLeastOp(m, Box::new(GExpr::Ref(name)))))
        }
    }
}

// x * product of slot factors, for one satisfiable production.
fn production_parts(
    system: &ComptonSystem,
    analysis: &Analysis,
    vector: &crate::dsl::ProductionVector,
) -> Result<Parts> {
    let mut acc: Parts = (0, Some(GExpr::X));
    for (j, b) in vector.support() {
        let factor = slot_parts(system, analysis, j, b);
        acc = parts_mul(&acc, &factor)?;
    }
    Ok(acc)
}

// Escape-sum of a cycle class: the productions avoiding the component,
// without the leading x (it is absorbed into the geometric factor).
fn escape_parts(
    system: &ComptonSystem,
    analysis: &Analysis,
    class: usize,
    escapes: &[usize],
) -> Result<Parts> {
    let mut acc: Parts = (0, None);
    for &g in escapes {
        let vector = &system.productions(class)[g];
        let mut term: Parts = (1, None);
        for (j, b) in vector.support() {
            let factor = slot_parts(system, analysis, j, b);
            term = parts_mul(&term, &factor)?;
        }
        acc = parts_add(acc, term)?;
    }
    Ok(acc)
}

// Closed form of one class, with free references to the classes it
// depends on.
fn class_body(system: &ComptonSystem, analysis: &Analysis, i: usize) -> Result<GExpr> {
    if i == 0 {
        return Ok(GExpr::X);
    }
    let comp = analysis.comp_of(i);
    if analysis.nontrivial(comp) {
        let Some(UnitCycle::Passes(cycle)) = &analysis.unit_cycle[comp] else {
            return Err(Error::Invariant {
                msg: "closed form requested for a failing component".into(),
            });
        };
        let weight = u32::try_from(cycle.weight).map_err(|_| Error::SizeLimitExceeded {
            requested: cycle.weight as usize,
            limit: u32::MAX as usize,
        })?;
        let my_pos = cycle.order.iter().position(|&k| k == i).expect("member");
        let len = cycle.order.len();
        let mut terms: Vec<GExpr> = Vec::new();
        let mut offset = 0u64;
        for hop in 0..len {
            let pos = (my_pos + hop) % len;
            let k = cycle.order[pos];
            if !cycle.escapes[pos].is_empty() {
                let esc = escape_parts(system, analysis, k, &cycle.escapes[pos])?;
                let mut factors: Vec<GExpr> = Vec::new();
                push_x_power(&mut factors, offset)?;
                factors.push(GExpr::Geometric(weight));
                if esc.0 > 0 {
                    terms.push(replicate(GExpr::product(factors.clone()), esc.0)?);
                }
                if let Some(rest) = esc.1 {
                    factors.push(rest);
                    terms.push(GExpr::product(factors));
                }
            }
            offset = checked_add(offset, cycle.steps[pos])?;
        }
        if terms.is_empty() {
            return Err(Error::Invariant {
                msg: "productive cycle without any escape production".into(),
            });
        }
        return Ok(GExpr::sum(terms));
    }

    let mut total: Parts = (0, None);
    for vector in system.productions(i) {
        if !vector.is_live(&analysis.productive) {
            continue;
        }
        total = parts_add(total, production_parts(system, analysis, vector)?)?;
    }
    debug_assert_eq!(total.0, 0);
    total.1.ok_or_else(|| Error::Invariant {
        msg: "productive class produced an empty form".into(),
    })
}

// Class indices named by the free references of an expression.
fn referenced_classes(system: &ComptonSystem, expr: &GExpr) -> BTreeSet<usize> {
    expr.free_names()
        .into_iter()
        .filter_map(|name| (0..system.class_count()).find(|&i| system.class_name(i) == name))
        .collect()
}

// The (constant, rest) form of a query expression over bound class names.
fn expr_parts(system: &ComptonSystem, analysis: &Analysis, expr: &ClassExpr) -> Result<Parts> {
    match expr {
        ClassExpr::NodeClass => Ok((0, Some(GExpr::Ref(system.class_name(0).to_string())))),
        ClassExpr::Class(i) => {
            if !analysis.productive[*i] {
                return Ok((0, None));
            }
            Ok((0, Some(GExpr::Ref(system.class_name(*i).to_string()))))
        }
        ClassExpr::Def(d) => expr_parts(system, analysis, &system.defs()[*d].expr),
        ClassExpr::Union(parts) => {
            let mut acc: Parts = (0, None);
            for p in parts {
                acc = parts_add(acc, expr_parts(system, analysis, p)?)?;
            }
            Ok(acc)
        }
        ClassExpr::Sum(parts) => {
            let mut acc: Parts = (1, None);
            for p in parts {
                let factor = expr_parts(system, analysis, p)?;
                acc = parts_mul(&acc, &factor)?;
            }
            Ok(acc)
        }
        ClassExpr::Multiset(bound, inner) => {
            let (c, rest) = expr_parts(system, analysis, inner)?;
            debug_assert_eq!(c, 0, "tree-valued operands have no constant term");
            match (bound, rest) {
                (MultiplicityBound::Exactly(0), _) => Ok((1, None)),
                (_, None) => match bound {
                    // nothing to choose from: only the empty multiset
                    MultiplicityBound::AtLeast(0) => Ok((1, None)),
                    _ => Ok((0, None)),
                },
                (MultiplicityBound::Exactly(m), Some(r)) => Ok((0, Some(e_op(*m, r)))),
                (MultiplicityBound::AtLeast(0), Some(r)) => {
                    Ok((1, Some(GExpr::AtLeastOp(1, Box::new(r)))))
                }
                (MultiplicityBound::AtLeast(m), Some(r)) => {
                    Ok((0, Some(GExpr::AtLeastOp(*m, Box::new(r)))))
                }
            }
        }
        ClassExpr::RootAppend(inner) => {
            let inner_parts = expr_parts(system, analysis, inner)?;
            parts_mul(&(0, Some(GExpr::X)), &inner_parts)
        }
    }
}

/// Explicit closed form for a class or def, as a let-chain binding every
/// class the form depends on, dependencies first. Fails with
/// [`Error::ExplicitFormUnavailable`] when any needed class has radius
/// below one; empty classes and defs have no form because the closed
/// grammar has no zero.
pub fn to_explicit(system: &ComptonSystem, name: &str) -> Result<GExpr> {
    let analysis = analyze(system)?;
    explicit_with(system, &analysis, name)
}

/// Explicit closed forms for every productive class of a system, each a
/// self-contained let-chain, in class order. Refused outright when any
/// class of the system sits at radius below one; empty classes are
/// skipped because the closed grammar has no zero expression.
pub fn explicit_system(system: &ComptonSystem) -> Result<Vec<(String, GExpr)>> {
    let analysis = analyze(system)?;
    if let Some(i) =
        (0..system.class_count()).find(|&i| analysis.verdicts[i] == RadiusVerdict::RadiusSubOne)
    {
        return Err(Error::ExplicitFormUnavailable {
            class: system.class_name(i).to_string(),
        });
    }
    let mut out = Vec::new();
    for i in 0..system.class_count() {
        if !analysis.productive[i] {
            continue;
        }
        let name = system.class_name(i);
        out.push((name.to_string(), explicit_with(system, &analysis, name)?));
    }
    Ok(out)
}

fn explicit_with(system: &ComptonSystem, analysis: &Analysis, name: &str) -> Result<GExpr> {
    let expr = system
        .lookup(name)
        .ok_or_else(|| Error::UnknownName { name: name.into() })?;

    let (constant, body) = expr_parts(system, analysis, &expr)?;
    if constant != 0 {
        return Err(Error::KindMismatch {
            msg: format!(
                "the series of `{name}` has constant term {constant}; the closed grammar only \
                 expresses series vanishing at zero"
            ),
        });
    }
    let Some(body) = body else {
        return Err(Error::KindMismatch {
            msg: format!(
                "`{name}` denotes the empty class; the closed grammar has no zero expression"
            ),
        });
    };

    // chase references to a fixpoint, building each class's form once
    let mut bodies: Vec<Option<GExpr>> = vec![None; system.class_count()];
    let mut needed = referenced_classes(system, &body);
    let mut queue: Vec<usize> = needed.iter().rev().copied().collect();
    while let Some(i) = queue.pop() {
        if bodies[i].is_some() {
            continue;
        }
        if analysis.verdicts[i] == RadiusVerdict::RadiusSubOne {
            return Err(Error::ExplicitFormUnavailable {
                class: system.class_name(i).to_string(),
            });
        }
        let value = class_body(system, analysis, i)?;
        for j in referenced_classes(system, &value) {
            if needed.insert(j) {
                queue.push(j);
            }
        }
        // process smaller indices first so the sub-one report is stable
        queue.sort_unstable_by(|a, b| b.cmp(a));
        bodies[i] = Some(value);
    }

    // bind dependencies first: rank ascending, index as tie-break
    let mut order: Vec<usize> = needed.iter().copied().collect();
    order.sort_by_key(|&i| (analysis.digraph.rank[i], i));
    let mut result = body;
    for &i in order.iter().rev() {
        let value = bodies[i].take().ok_or_else(|| Error::Invariant {
            msg: "referenced class without a built form".into(),
        })?;
        result = GExpr::Let {
            name: system.class_name(i).to_string(),
            value: Box::new(value),
            body: Box::new(result),
        };
    }
    Ok(result)
}

/// One class's growth estimate against its structural verdict.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    pub class: String,
    pub verdict: RadiusVerdict,
    /// sup of coefficient^(1/n) over the window, absent when the window
    /// holds no positive coefficient.
    pub estimate: Option<f64>,
    /// Whether the estimate is consistent with the verdict; absent when
    /// there is no estimate.
    pub agrees: Option<bool>,
}

/// Numeric guard for the structural classifier: per-class growth
/// estimates next to the verdicts they should track.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub system: String,
    /// Truncation order the estimates were read at.
    pub order: usize,
    pub checks: Vec<GrowthCheck>,
}

impl CrosscheckReport {
    /// Classes whose estimate contradicts their verdict.
    pub fn disagreements(&self) -> Vec<&GrowthCheck> {
        self.checks
            .iter()
            .filter(|c| c.agrees == Some(false))
            .collect()
    }
}

// Natural log of a positive big integer, safe for values far beyond f64
// range.
pub(crate) fn log_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 53;
    let top = (v >> shift).to_f64().expect("53 bits fit");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Compare each class's structural verdict with an empirical growth
/// estimate read off the tail of its series: sup of t(n)^(1/n) over the
/// window [order/2, order]. Verdicts at or above radius one disagree with
/// estimates of at least 1.5; a sub-one verdict disagrees with estimates
/// of at most 1.05 once the order reaches 200.
pub fn growth_crosscheck(
    system: &ComptonSystem,
    report: &RadiusReport,
    series: &SystemSeries,
) -> CrosscheckReport {
    let order = series.order();
    let lo = (order / 2).max(1);
    let checks = (0..system.class_count())
        .map(|i| {
            let s: &TruncatedSeries = series.class(i);
            let mut best: Option<f64> = None;
            for n in lo..=order {
                if let Some(c) = s.coeff(n) {
                    if c.is_positive() {
                        debug_assert!(c.is_integer());
                        let v = c.to_integer();
                        let est = (log_bigint(&v) / n as f64).exp();
                        best = Some(best.map_or(est, |b: f64| b.max(est)));
                    }
                }
            }
            let verdict = report.classes[i].verdict;
            let agrees = best.map(|est| match verdict {
                RadiusVerdict::Finite | RadiusVerdict::RadiusOne => est < 1.5,
                RadiusVerdict::RadiusSubOne => !(est <= 1.05 && order >= 200),
            });
            GrowthCheck {
                class: system.class_name(i).to_string(),
                verdict,
                estimate: best,
                agrees,
            }
        })
        .collect();
    CrosscheckReport {
        system: system.name().to_string(),
        order,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::dsl::{evaluate_gexpr, evaluate_system, parse_system};

    fn verdict_of(report: &RadiusReport, name: &str) -> RadiusVerdict {
        report
            .classes
            .iter()
            .find(|c| c.name == name)
            .expect("class present")
            .verdict
    }

    #[test]
    fn corpus_verdicts() {
        let cases = [
            ("alltrees", RadiusVerdict::RadiusSubOne),
            ("linear", RadiusVerdict::RadiusOne),
            ("height1", RadiusVerdict::RadiusOne),
            ("binary", RadiusVerdict::RadiusSubOne),
            ("evenchains", RadiusVerdict::RadiusOne),
            ("bamboo", RadiusVerdict::RadiusOne),
        ];
        for (label, want) in cases {
            let (_, system) = corpus::all()
                .into_iter()
                .find(|(l, _)| *l == label)
                .expect("corpus member");
            let report = classify_radius(&system).unwrap();
            assert_eq!(report.overall, want, "{label}");
            assert_eq!(verdict_of(&report, "T0"), RadiusVerdict::Finite, "{label}");
        }
    }

    #[test]
    fn verdict_order_puts_faster_growth_first() {
        assert!(RadiusVerdict::RadiusSubOne < RadiusVerdict::RadiusOne);
        assert!(RadiusVerdict::RadiusOne < RadiusVerdict::Finite);
        assert_eq!(RadiusVerdict::RadiusSubOne.to_string(), "RADIUS_SUB_ONE");
    }

    #[test]
    fn finite_class_counting() {
        // T1: a root over two nodes (1 member); T2: a root over one or
        // two T1's (C(1+1,2) + 1 = 2 members); sizes are fixed
        let sys = parse_system(
            "system finite\nclass T0 = node\nclass T1 = node / [T0:2]\n\
             class T2 = node / [T1:1] | [T1:2]\n",
        )
        .unwrap();
        let report = classify_radius(&sys).unwrap();
        assert_eq!(report.overall, RadiusVerdict::Finite);
        let t1 = &report.classes[1];
        assert_eq!(t1.member_count.as_deref(), Some("1"));
        assert!(t1.singleton);
        assert_eq!(t1.singleton_size, Some(3));
        let t2 = &report.classes[2];
        assert_eq!(t2.member_count.as_deref(), Some("2"));
        assert!(!t2.singleton);
        assert_eq!(t2.singleton_size, None);
    }

    #[test]
    fn empty_class_is_finite_with_zero_members() {
        let sys = parse_system("system s\nclass T0 = node\nclass T1 = node / [T1:1]\n").unwrap();
        let report = classify_radius(&sys).unwrap();
        assert!(!report.classes[1].productive);
        assert_eq!(report.classes[1].verdict, RadiusVerdict::Finite);
        assert_eq!(report.classes[1].member_count.as_deref(), Some("0"));
        assert!(!report.classes[1].singleton);
    }

    #[test]
    fn unit_cycle_failures_carry_reasons() {
        let report = classify_radius(&corpus::binary()).unwrap();
        let comp = report
            .components
            .iter()
            .find(|c| c.nontrivial)
            .expect("recursive component");
        assert_eq!(comp.unit_cycle, Some(false));
        assert!(comp.failure.as_deref().unwrap().contains("T1"));
    }

    #[test]
    fn dead_productions_do_not_disturb_the_cycle() {
        // the [T1:1, TE:1] production references an empty class, so only
        // the chain production counts and the cycle stays a unit cycle
        let sys = parse_system(
            "system s\nclass T0 = node\nclass TE = node / [TE:1]\n\
             class T1 = node / [T0:1] | [T1:1] | [T1:1, TE:1]\n",
        )
        .unwrap();
        let report = classify_radius(&sys).unwrap();
        assert_eq!(verdict_of(&report, "T1"), RadiusVerdict::RadiusOne);
    }

    #[test]
    fn digraph_shapes_on_small_systems() {
        // a self-loop at the recursive class, below the node class
        let d = build_digraph(&corpus::linear());
        assert_eq!(d.edges, vec![vec![], vec![0, 1]]);
        assert_eq!(d.components, vec![vec![0], vec![1]]);
        assert_eq!(d.nontrivial, vec![false, true]);
        assert_eq!(d.rank, vec![0, 1]);

        // a single two-class cycle
        let d = build_digraph(&corpus::bamboo());
        assert_eq!(d.edges, vec![vec![], vec![2], vec![0, 1]]);
        assert_eq!(d.components, vec![vec![0], vec![1, 2]]);
        assert_eq!(d.nontrivial, vec![false, true]);
        assert_eq!(d.comp_of, vec![0, 1, 1]);
        assert_eq!(d.rank, vec![0, 1, 1]);

        // unbounded slots still give edges, but no cycle
        let d = build_digraph(&corpus::height_one());
        assert_eq!(d.edges, vec![vec![], vec![0]]);
        assert_eq!(d.nontrivial, vec![false, false]);
        assert_eq!(d.rank, vec![0, 1]);
    }

    #[test]
    fn finite_classes_carry_degree_bounds_and_polynomials() {
        let sys = parse_system(
            "system finite\nclass T0 = node\nclass T1 = node / [T0:2]\n\
             class T2 = node / [T1:1] | [T1:2]\n",
        )
        .unwrap();
        let report = classify_radius(&sys).unwrap();
        let strings = |xs: &[i32]| -> Option<Vec<String>> {
            Some(xs.iter().map(|x| x.to_string()).collect())
        };
        assert_eq!(report.classes[0].degree_bound, Some(1));
        assert_eq!(report.classes[0].polynomial, strings(&[0, 1]));
        assert_eq!(report.classes[1].degree_bound, Some(3));
        assert_eq!(report.classes[1].polynomial, strings(&[0, 0, 0, 1]));
        // T2 has one member of size 4 and one of size 7
        assert_eq!(report.classes[2].degree_bound, Some(7));
        assert_eq!(
            report.classes[2].polynomial,
            strings(&[0, 0, 0, 0, 1, 0, 0, 1])
        );

        // an empty class is the zero polynomial
        let sys = parse_system("system s\nclass T0 = node\nclass T1 = node / [T1:1]\n").unwrap();
        let report = classify_radius(&sys).unwrap();
        assert_eq!(report.classes[1].degree_bound, Some(0));
        assert_eq!(report.classes[1].polynomial, strings(&[0]));
    }

    #[test]
    fn evidence_names_the_rule_that_fired() {
        let linear = classify_radius(&corpus::linear()).unwrap();
        assert!(linear.classes[0].evidence.starts_with("finite"));
        assert_eq!(linear.classes[1].evidence, "on a unit cycle of weight 1");

        let height1 = classify_radius(&corpus::height_one()).unwrap();
        assert!(height1.classes[1].evidence.contains("unbounded slot"));

        let all = classify_radius(&corpus::all_trees()).unwrap();
        assert!(all.classes[1]
            .evidence
            .contains("fails the unit-cycle test"));

        let sys = parse_system("system s\nclass T0 = node\nclass T1 = node / [T1:1]\n").unwrap();
        let report = classify_radius(&sys).unwrap();
        assert!(report.classes[1].evidence.starts_with("empty"));
    }

    #[test]
    fn cycle_placement_lands_in_the_class_reports() {
        let report = classify_radius(&corpus::bamboo()).unwrap();
        let t0 = &report.classes[0];
        assert_eq!((t0.cycle_weight, t0.cycle_offset), (None, None));
        let ta = &report.classes[1];
        assert_eq!((ta.cycle_weight, ta.cycle_offset), (Some(3), Some(0)));
        let tb = &report.classes[2];
        assert_eq!((tb.cycle_weight, tb.cycle_offset), (Some(3), Some(1)));
    }

    #[test]
    fn class_reports_serialize_with_the_contract_fields() {
        let report = classify_radius(&corpus::bamboo()).unwrap();
        let value = serde_json::to_value(&report).unwrap();
        let ta = &value["classes"][1];
        assert_eq!(ta["name"], "Ta");
        assert_eq!(ta["verdict"], "RADIUS_ONE");
        assert_eq!(ta["component"], 1);
        assert_eq!(ta["rank"], 1);
        assert_eq!(ta["cycle_weight"], 3);
        assert!(ta["evidence"].as_str().unwrap().contains("unit cycle"));
        assert_eq!(value["classes"][0]["polynomial"][1], "1");
        assert_eq!(value["overall"], "RADIUS_ONE");
    }

    #[test]
    fn whole_system_forms_cover_every_productive_class() {
        let forms = explicit_system(&corpus::even_chains()).unwrap();
        let printed: Vec<(String, String)> = forms
            .iter()
            .map(|(name, form)| (name.clone(), form.to_string()))
            .collect();
        assert_eq!(
            printed,
            vec![
                ("T0".to_string(), "let T0 = x in T0".to_string()),
                (
                    "Todd".to_string(),
                    "let T0 = x in let Todd = x * x/(1-x^2) * T0 in Todd".to_string()
                ),
                (
                    "Teven".to_string(),
                    "let T0 = x in let Teven = x/(1-x^2) * T0 in Teven".to_string()
                ),
            ]
        );
        // every form reproduces its class series
        let sys = corpus::even_chains();
        let series = evaluate_system(&sys, 30).unwrap();
        for (i, (_, form)) in forms.iter().enumerate() {
            assert_eq!(&evaluate_gexpr(form, 30).unwrap(), series.class(i));
        }
        // one sub-one class refuses the whole system
        let err = explicit_system(&corpus::all_trees()).unwrap_err();
        assert!(matches!(err, Error::ExplicitFormUnavailable { .. }));
    }

    #[test]
    fn cycle_module_extraction_on_the_decorated_spine() {
        let sys = corpus::bamboo();
        let infos = extract_cycle_modules(&sys, &[1, 2]).unwrap();
        assert_eq!(infos.len(), 2);
        assert_eq!(infos[0].class, "Ta");
        assert_eq!(infos[0].step_weight, 1);
        assert_eq!(infos[0].offset, 0);
        assert_eq!(infos[0].cycle_weight, 3);
        assert!(infos[0].escape_productions.is_empty());
        assert_eq!(infos[1].class, "Tb");
        assert_eq!(infos[1].step_weight, 2);
        assert_eq!(infos[1].offset, 1);
        assert_eq!(infos[1].escape_productions, vec!["[T0:1]".to_string()]);
        // a failing component is refused with the reason attached
        let err = extract_cycle_modules(&corpus::binary(), &[1]).unwrap_err();
        assert!(matches!(err, Error::NotAUnitCycle { .. }));
        // and so is a set that is not a component
        assert!(extract_cycle_modules(&sys, &[0, 1]).is_err());
    }

    #[test]
    fn explicit_forms_print_and_evaluate() {
        let cases = [
            (
                "linear",
                "Lin",
                "let T0 = x in let T1 = x/(1-x) * T0 in T0 + T1",
            ),
            (
                "height1",
                "H1",
                "let T0 = x in let T1 = x * Egeq(1, T0) in T0 + T1",
            ),
            (
                "evenchains",
                "Even",
                "let T0 = x in let Teven = x/(1-x^2) * T0 in Teven",
            ),
            (
                "bamboo",
                "Bam",
                "let T0 = x in let Ta = x * x/(1-x^3) * T0 in Ta",
            ),
        ];
        for (label, def, want) in cases {
            let (_, system) = corpus::all()
                .into_iter()
                .find(|(l, _)| *l == label)
                .expect("corpus member");
            let form = to_explicit(&system, def).unwrap();
            assert_eq!(form.to_string(), want, "{label}");
            // the closed form reproduces the class series
            let series = evaluate_system(&system, 24).unwrap();
            let from_form = evaluate_gexpr(&form, 24).unwrap();
            let direct = series.expr(&system, &system.lookup(def).unwrap()).unwrap();
            assert_eq!(from_form, direct, "{label}");
        }
    }

    #[test]
    fn explicit_form_refuses_sub_one_classes() {
        let err = to_explicit(&corpus::all_trees(), "AllTrees").unwrap_err();
        assert_eq!(
            err.to_string(),
            "RADIUS_SUB_ONE: explicit form unavailable (class `T1`)"
        );
        // a finite class of the same system still has a form
        let form = to_explicit(&corpus::all_trees(), "T0").unwrap();
        assert_eq!(form.to_string(), "let T0 = x in T0");
    }

    #[test]
    fn expression_verdicts_combine_structurally() {
        let sys = corpus::linear();
        let report = classify_radius(&sys).unwrap();
        let v = |src: &str| {
            let expr = crate::dsl::parse_class_expr(&sys, src).unwrap();
            expr_verdict(&sys, &report, &expr)
        };
        assert_eq!(v("T0"), RadiusVerdict::Finite);
        assert_eq!(v("T1"), RadiusVerdict::RadiusOne);
        assert_eq!(v("T0 | T1"), RadiusVerdict::RadiusOne);
        // unbounded multisets of a finite nonempty class sit at radius one
        assert_eq!(v("mset(>=1, T0)"), RadiusVerdict::RadiusOne);
        assert_eq!(v("mset(3, T0)"), RadiusVerdict::Finite);
        assert_eq!(v("node / mset(>=2, T1)"), RadiusVerdict::RadiusOne);
        let all = corpus::all_trees();
        let all_report = classify_radius(&all).unwrap();
        let expr = crate::dsl::parse_class_expr(&all, "T0 | T1").unwrap();
        assert_eq!(
            expr_verdict(&all, &all_report, &expr),
            RadiusVerdict::RadiusSubOne
        );
    }

    #[test]
    fn growth_estimates_track_the_verdicts() {
        for (label, system) in corpus::all() {
            let report = classify_radius(&system).unwrap();
            let series = evaluate_system(&system, 200).unwrap();
            let crosscheck = growth_crosscheck(&system, &report, &series);
            assert_eq!(crosscheck.order, 200);
            assert!(crosscheck.disagreements().is_empty(), "{label}");
            for check in crosscheck.checks {
                if let Some(agrees) = check.agrees {
                    assert!(
                        agrees,
                        "{label}/{}: estimate {:?} vs {}",
                        check.class, check.estimate, check.verdict
                    );
                }
            }
        }
    }
}
