//! The class-specification language.
//!
//! A system declares a reserved node class T_0 = {•} plus further classes,
//! each defined by production vectors: T_i is the class of trees whose root
//! carries a forest matching one of the vectors, a vector constraining how
//! many components come from each class (exactly m, or at least m).
//! Query expressions combine classes by union, disjoint sum, multiset
//! operators, and root append; closed-form expressions (the `GExpr` type)
//! live in the grammar generated by x and x/(1−x^m) under +, ×, E_m, and
//! E_{>=m}.
//!
//! Parsing lives in [`parse`], series evaluation in [`eval`]; this module
//! owns the types, structural validation, and canonical printing. Printing
//! then parsing is the identity on every value, and parsing then printing
//! fixes the canonical spelling.

pub mod eval;
mod parse;

pub use eval::{
    evaluate_gexpr, evaluate_gexpr_bounded, evaluate_system, evaluate_system_bounded, SystemSeries,
    DEFAULT_MAX_ORDER,
};
pub use parse::{parse_class_expr, parse_gexpr, parse_system};

use crate::error::{Error, Result};
use crate::polya::MultiplicityBound;
use std::collections::BTreeSet;
use std::fmt;

/// One production: a dense vector of multiplicity bounds, one per class of
/// the owning system. `Exactly(0)` marks an absent slot. At least one slot
/// must be present, since the all-absent vector would denote the bare node,
/// which belongs to the node class alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductionVector {
    bounds: Vec<MultiplicityBound>,
}

impl ProductionVector {
    /// Build from a dense bound vector; rejects the all-absent vector.
    pub fn new(bounds: Vec<MultiplicityBound>) -> Result<Self> {
        if bounds.iter().all(|b| b.is_absent()) {
            return Err(Error::MalformedSystem {
                msg: "production vector has no present slot; the bare node belongs to the node \
                      class only"
                    .into(),
            });
        }
        Ok(ProductionVector { bounds })
    }

    /// Build a dense vector of the given width from sparse (class, bound)
    /// slots. Rejects duplicate or out-of-range slots and the empty vector.
    pub fn from_slots(width: usize, slots: &[(usize, MultiplicityBound)]) -> Result<Self> {
        let mut bounds = vec![MultiplicityBound::Exactly(0); width];
        for &(class, bound) in slots {
            if class >= width {
                return Err(Error::MalformedSystem {
                    msg: format!("slot index {class} out of range for {width} classes"),
                });
            }
            if !bounds[class].is_absent() {
                return Err(Error::MalformedSystem {
                    msg: format!("duplicate slot for class index {class}"),
                });
            }
            bounds[class] = bound;
        }
        Self::new(bounds)
    }

    /// Dense bound vector, indexed by class.
    pub fn bounds(&self) -> &[MultiplicityBound] {
        &self.bounds
    }

    /// Bound for one class.
    pub fn slot(&self, class: usize) -> MultiplicityBound {
        self.bounds[class]
    }

    /// Present slots, in class order.
    pub fn support(&self) -> impl Iterator<Item = (usize, MultiplicityBound)> + '_ {
        self.bounds
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_absent())
            .map(|(j, &b)| (j, b))
    }

    /// A vector is live when every slot demanding at least one component
    /// refers to a productive class; dead vectors denote the empty set.
    pub fn is_live(&self, productive: &[bool]) -> bool {
        self.support().all(|(j, b)| match b {
            MultiplicityBound::Exactly(m) => m == 0 || productive[j],
            MultiplicityBound::AtLeast(m) => m == 0 || productive[j],
        })
    }

    /// True when the empty forest satisfies the vector, i.e. every present
    /// slot is an AtLeast(0). Such a vector puts the bare node into the
    /// class, which `validate` flags.
    pub fn matches_empty_forest(&self) -> bool {
        self.bounds.iter().all(|b| {
            matches!(
                b,
                MultiplicityBound::Exactly(0) | MultiplicityBound::AtLeast(0)
            )
        })
    }
}

/// A declared class: its name and production vectors. The node class has
/// no productions; every other class has at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub productions: Vec<ProductionVector>,
}

/// A named query expression (`def` in the concrete syntax).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefBinding {
    pub name: String,
    pub expr: ClassExpr,
}

/// Query expressions over the classes of one system.
///
/// Kinds: `NodeClass` and `Class` denote trees; `Union` preserves the
/// operand kind; `Sum` and `Multiset` denote forests; `RootAppend` turns a
/// forest back into trees by planting it under a fresh root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassExpr {
    /// The reserved single-node class (always index 0).
    NodeClass,
    /// A declared class, by index.
    Class(usize),
    /// A named definition, by index.
    Def(usize),
    /// Set union; operands are assumed disjoint and must share a kind.
    Union(Vec<ClassExpr>),
    /// Disjoint sum: one object from each operand, merged into one forest.
    Sum(Vec<ClassExpr>),
    /// Multisets of trees from the operand, with the given count bound.
    Multiset(MultiplicityBound, Box<ClassExpr>),
    /// A fresh root over a forest from the operand.
    RootAppend(Box<ClassExpr>),
}

/// What a class expression denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Tree,
    Forest,
}

/// A recursive specification: the node class plus recursively produced
/// classes, and optional named query expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComptonSystem {
    name: String,
    quantifier_rank: Option<u32>,
    classes: Vec<ClassDef>,
    defs: Vec<DefBinding>,
}

// Words with fixed meaning in one of the two concrete syntaxes; using them
// as names would make the canonical print unparseable.
pub(crate) const RESERVED: &[&str] = &[
    "system", "class", "def", "node", "rank", "mset", "let", "in", "E", "Egeq", "x",
];

fn valid_ident(s: &str) -> bool {
    if RESERVED.contains(&s) {
        return false;
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ComptonSystem {
    /// Assemble a system from class definitions. The first class must be
    /// the node class (no productions); later classes need at least one
    /// production vector of matching width.
    pub fn new(name: &str, classes: Vec<ClassDef>) -> Result<Self> {
        if !valid_ident(name) {
            return Err(Error::MalformedSystem {
                msg: format!("`{name}` is not a valid system name"),
            });
        }
        if classes.is_empty() {
            return Err(Error::MalformedSystem {
                msg: "a system needs at least the node class".into(),
            });
        }
        if !classes[0].productions.is_empty() {
            return Err(Error::MalformedSystem {
                msg: "the first class is the node class and takes no productions".into(),
            });
        }
        let width = classes.len();
        let mut seen = BTreeSet::new();
        for (i, class) in classes.iter().enumerate() {
            if !valid_ident(&class.name) {
                return Err(Error::MalformedSystem {
                    msg: format!("`{}` is not a valid class name", class.name),
                });
            }
            if !seen.insert(class.name.clone()) {
                return Err(Error::MalformedSystem {
                    msg: format!("duplicate name `{}`", class.name),
                });
            }
            if i > 0 && class.productions.is_empty() {
                return Err(Error::MalformedSystem {
                    msg: format!("class `{}` needs at least one production", class.name),
                });
            }
            for v in &class.productions {
                if v.bounds().len() != width {
                    return Err(Error::MalformedSystem {
                        msg: format!(
                            "production vector of class `{}` has width {}, expected {width}",
                            class.name,
                            v.bounds().len()
                        ),
                    });
                }
            }
        }
        Ok(ComptonSystem {
            name: name.to_string(),
            quantifier_rank: None,
            classes,
            defs: Vec::new(),
        })
    }

    /// Attach the optional quantifier-rank metadata.
    pub fn set_quantifier_rank(&mut self, rank: Option<u32>) {
        self.quantifier_rank = rank;
    }

    /// Add a named query expression. The name must be fresh and the
    /// expression must resolve and kind-check against this system.
    pub fn add_def(&mut self, name: &str, expr: ClassExpr) -> Result<()> {
        if !valid_ident(name) {
            return Err(Error::MalformedSystem {
                msg: format!("`{name}` is not a valid definition name"),
            });
        }
        let clash =
            self.classes.iter().any(|c| c.name == name) || self.defs.iter().any(|d| d.name == name);
        if clash {
            return Err(Error::MalformedSystem {
                msg: format!("duplicate name `{name}`"),
            });
        }
        self.kind_of(&expr)?;
        self.defs.push(DefBinding {
            name: name.to_string(),
            expr,
        });
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quantifier_rank(&self) -> Option<u32> {
        self.quantifier_rank
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[ClassDef] {
        &self.classes
    }

    pub fn class_name(&self, i: usize) -> &str {
        &self.classes[i].name
    }

    pub fn productions(&self, i: usize) -> &[ProductionVector] {
        &self.classes[i].productions
    }

    pub fn defs(&self) -> &[DefBinding] {
        &self.defs
    }

    /// Resolve a name to the expression it denotes: a class reference or a
    /// definition reference.
    pub fn lookup(&self, name: &str) -> Option<ClassExpr> {
        if let Some(i) = self.classes.iter().position(|c| c.name == name) {
            return Some(if i == 0 {
                ClassExpr::NodeClass
            } else {
                ClassExpr::Class(i)
            });
        }
        self.defs
            .iter()
            .position(|d| d.name == name)
            .map(ClassExpr::Def)
    }

    /// Kind of an expression; also checks that every reference resolves.
    pub fn kind_of(&self, expr: &ClassExpr) -> Result<Kind> {
        match expr {
            ClassExpr::NodeClass => Ok(Kind::Tree),
            ClassExpr::Class(i) => {
                if *i >= self.classes.len() {
                    return Err(Error::UnknownName {
                        name: format!("class #{i}"),
                    });
                }
                Ok(Kind::Tree)
            }
            ClassExpr::Def(d) => {
                let def = self.defs.get(*d).ok_or_else(|| Error::UnknownName {
                    name: format!("def #{d}"),
                })?;
                self.kind_of(&def.expr)
            }
            ClassExpr::Union(parts) => {
                if parts.is_empty() {
                    return Err(Error::KindMismatch {
                        msg: "empty union".into(),
                    });
                }
                let first = self.kind_of(&parts[0])?;
                for p in &parts[1..] {
                    if self.kind_of(p)? != first {
                        return Err(Error::KindMismatch {
                            msg: "union mixes tree-valued and forest-valued operands".into(),
                        });
                    }
                }
                Ok(first)
            }
            ClassExpr::Sum(parts) => {
                if parts.is_empty() {
                    return Err(Error::KindMismatch {
                        msg: "empty sum".into(),
                    });
                }
                for p in parts {
                    self.kind_of(p)?;
                }
                Ok(Kind::Forest)
            }
            ClassExpr::Multiset(_, inner) => {
                if self.kind_of(inner)? != Kind::Tree {
                    return Err(Error::KindMismatch {
                        msg: "multiset operand must be tree-valued".into(),
                    });
                }
                Ok(Kind::Forest)
            }
            ClassExpr::RootAppend(inner) => {
                if self.kind_of(inner)? != Kind::Forest {
                    return Err(Error::KindMismatch {
                        msg: "root append takes a forest-valued operand".into(),
                    });
                }
                Ok(Kind::Tree)
            }
        }
    }

    /// Least fixed point of "some production is satisfiable": class 0 is
    /// productive; a later class is productive once one of its vectors only
    /// demands components from already-productive classes.
    pub fn productive_classes(&self) -> Vec<bool> {
        let n = self.classes.len();
        let mut productive = vec![false; n];
        productive[0] = true;
        loop {
            let mut changed = false;
            for i in 1..n {
                if productive[i] {
                    continue;
                }
                if self.classes[i]
                    .productions
                    .iter()
                    .any(|v| v.is_live(&productive))
                {
                    productive[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return productive;
            }
        }
    }

    /// Canonical source text. Parsing it back yields an equal system.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        match self.quantifier_rank {
            Some(r) => out.push_str(&format!("system {} rank {}\n", self.name, r)),
            None => out.push_str(&format!("system {}\n", self.name)),
        }
        for (i, class) in self.classes.iter().enumerate() {
            if i == 0 {
                out.push_str(&format!("class {} = node\n", class.name));
                continue;
            }
            let prods: Vec<String> = class
                .productions
                .iter()
                .map(|v| self.vector_source(v))
                .collect();
            out.push_str(&format!(
                "class {} = node / {}\n",
                class.name,
                prods.join(" | ")
            ));
        }
        for def in &self.defs {
            out.push_str(&format!(
                "def {} = {}\n",
                def.name,
                self.expr_source(&def.expr)
            ));
        }
        out
    }

    /// Canonical text of one production vector, e.g. `[T0:2, T1:>=1]`.
    pub fn vector_source(&self, v: &ProductionVector) -> String {
        let slots: Vec<String> = v
            .support()
            .map(|(j, b)| format!("{}:{}", self.classes[j].name, b))
            .collect();
        format!("[{}]", slots.join(", "))
    }

    /// Canonical text of a query expression over this system.
    pub fn expr_source(&self, expr: &ClassExpr) -> String {
        let mut out = String::new();
        self.write_expr(&mut out, expr, 0);
        out
    }

    // Precedence: union 1, sum 2, prefix/primary 3.
    fn write_expr(&self, out: &mut String, expr: &ClassExpr, required: u8) {
        let prec = match expr {
            ClassExpr::Union(_) => 1,
            ClassExpr::Sum(_) => 2,
            _ => 3,
        };
        let parens = prec < required;
        if parens {
            out.push('(');
        }
        match expr {
            ClassExpr::NodeClass => out.push_str(&self.classes[0].name),
            ClassExpr::Class(i) => out.push_str(&self.classes[*i].name),
            ClassExpr::Def(d) => out.push_str(&self.defs[*d].name),
            ClassExpr::Union(parts) => {
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" | ");
                    }
                    self.write_expr(out, p, 2);
                }
            }
            ClassExpr::Sum(parts) => {
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    self.write_expr(out, p, 3);
                }
            }
            ClassExpr::Multiset(bound, inner) => {
                out.push_str(&format!("mset({}, ", bound));
                self.write_expr(out, inner, 0);
                out.push(')');
            }
            ClassExpr::RootAppend(inner) => {
                out.push_str("node / ");
                self.write_expr(out, inner, 3);
            }
        }
        if parens {
            out.push(')');
        }
    }
}

/// Report produced by [`validate`]: per-class facts plus free-form
/// warnings. Validation never fails; suspicious constructions only warn.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Whether each class denotes a nonempty set of trees.
    pub productive: Vec<bool>,
    /// Whether each class is reachable from the definitions' references
    /// (every class counts as reachable when the system has no defs).
    pub reachable: Vec<bool>,
    pub warnings: Vec<String>,
}

/// Structural diagnosis of a system: productivity, reachability from the
/// declared definitions, and warnings for constructions that are legal but
/// easy to misread (AtLeast(0) slots, vectors matched by the empty forest,
/// references to empty classes, unions).
pub fn validate(system: &ComptonSystem) -> ValidationReport {
    let n = system.class_count();
    let productive = system.productive_classes();
    let mut warnings = Vec::new();

    for i in 1..n {
        if !productive[i] {
            warnings.push(format!(
                "class `{}` is empty: no production is satisfiable",
                system.class_name(i)
            ));
        }
        for (k, v) in system.productions(i).iter().enumerate() {
            for (j, b) in v.support() {
                if matches!(b, MultiplicityBound::AtLeast(0)) {
                    warnings.push(format!(
                        "class `{}` production {} uses >=0 on `{}`; the slot also matches zero \
                         components",
                        system.class_name(i),
                        k + 1,
                        system.class_name(j)
                    ));
                }
                if !productive[j] && !b.is_absent() {
                    warnings.push(format!(
                        "class `{}` production {} references empty class `{}`",
                        system.class_name(i),
                        k + 1,
                        system.class_name(j)
                    ));
                }
            }
            if v.matches_empty_forest() {
                warnings.push(format!(
                    "class `{}` production {} is satisfied by the empty forest, so the class \
                     contains the bare node",
                    system.class_name(i),
                    k + 1
                ));
            }
        }
    }

    for def in system.defs() {
        if contains_union(&def.expr) {
            warnings.push(format!(
                "def `{}` takes a union; operands are assumed disjoint",
                def.name
            ));
        }
    }

    // Reachability from def references; trivially complete without defs.
    let reachable = if system.defs().is_empty() {
        vec![true; n]
    } else {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for def in system.defs() {
            collect_class_refs(system, &def.expr, &mut stack);
        }
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            for v in system.productions(i) {
                for (j, _) in v.support() {
                    if !seen[j] {
                        stack.push(j);
                    }
                }
            }
        }
        for (i, flag) in seen.iter().enumerate() {
            if !flag {
                warnings.push(format!(
                    "class `{}` is not reachable from any def",
                    system.class_name(i)
                ));
            }
        }
        seen
    };

    ValidationReport {
        productive,
        reachable,
        warnings,
    }
}

fn contains_union(expr: &ClassExpr) -> bool {
    match expr {
        ClassExpr::Union(_) => true,
        ClassExpr::Sum(parts) => parts.iter().any(contains_union),
        ClassExpr::Multiset(_, inner) | ClassExpr::RootAppend(inner) => contains_union(inner),
        _ => false,
    }
}

fn collect_class_refs(system: &ComptonSystem, expr: &ClassExpr, out: &mut Vec<usize>) {
    match expr {
        ClassExpr::NodeClass => out.push(0),
        ClassExpr::Class(i) => out.push(*i),
        ClassExpr::Def(d) => collect_class_refs(system, &system.defs()[*d].expr, out),
        ClassExpr::Union(parts) | ClassExpr::Sum(parts) => {
            for p in parts {
                collect_class_refs(system, p, out);
            }
        }
        ClassExpr::Multiset(_, inner) | ClassExpr::RootAppend(inner) => {
            collect_class_refs(system, inner, out)
        }
    }
}

/// Closed-form expressions: the grammar generated by the atoms x and
/// x/(1−x^m) under sum, product, the multiset operators E_m and E_{>=m}
/// (m >= 1 throughout), plus let-bindings for shared subexpressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GExpr {
    /// The atom x.
    X,
    /// The atom x/(1−x^m), m >= 1.
    Geometric(u32),
    Add(Vec<GExpr>),
    Mul(Vec<GExpr>),
    /// E(m, e): multisets of exactly m objects, m >= 1.
    ExactlyOp(u32, Box<GExpr>),
    /// Egeq(m, e): multisets of at least m objects, m >= 1.
    AtLeastOp(u32, Box<GExpr>),
    Let {
        name: String,
        value: Box<GExpr>,
        body: Box<GExpr>,
    },
    Ref(String),
}

impl GExpr {
    /// n-ary sum that collapses a single term to itself.
    pub fn sum(mut terms: Vec<GExpr>) -> GExpr {
        assert!(
            !terms.is_empty(),
            "empty sum has no meaning in this grammar"
        );
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            GExpr::Add(terms)
        }
    }

    /// n-ary product that collapses a single factor to itself.
    pub fn product(mut factors: Vec<GExpr>) -> GExpr {
        assert!(
            !factors.is_empty(),
            "empty product has no meaning in this grammar"
        );
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            GExpr::Mul(factors)
        }
    }

    /// Names referenced but not bound by an enclosing let.
    pub fn free_names(&self) -> BTreeSet<String> {
        fn walk(e: &GExpr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match e {
                GExpr::X | GExpr::Geometric(_) => {}
                GExpr::Add(parts) | GExpr::Mul(parts) => {
                    for p in parts {
                        walk(p, bound, out);
                    }
                }
                GExpr::ExactlyOp(_, inner) | GExpr::AtLeastOp(_, inner) => walk(inner, bound, out),
                GExpr::Let { name, value, body } => {
                    walk(value, bound, out);
                    bound.push(name.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
                GExpr::Ref(name) => {
                    if !bound.iter().any(|b| b == name) {
                        out.insert(name.clone());
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    // Precedence: let 0, add 1, mul 2, primary 3.
    fn write(&self, out: &mut String, required: u8) {
        let prec = match self {
            GExpr::Let { .. } => 0,
            GExpr::Add(_) => 1,
            GExpr::Mul(_) => 2,
            _ => 3,
        };
        let parens = prec < required;
        if parens {
            out.push('(');
        }
        match self {
            GExpr::X => out.push('x'),
            GExpr::Geometric(1) => out.push_str("x/(1-x)"),
            GExpr::Geometric(m) => out.push_str(&format!("x/(1-x^{m})")),
            GExpr::Add(terms) => {
                for (k, t) in terms.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    t.write(out, 2);
                }
            }
            GExpr::Mul(factors) => {
                for (k, f) in factors.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" * ");
                    }
                    f.write(out, 3);
                }
            }
            GExpr::ExactlyOp(m, inner) => {
                out.push_str(&format!("E({m}, "));
                inner.write(out, 0);
                out.push(')');
            }
            GExpr::AtLeastOp(m, inner) => {
                out.push_str(&format!("Egeq({m}, "));
                inner.write(out, 0);
                out.push(')');
            }
            GExpr::Let { name, value, body } => {
                out.push_str(&format!("let {name} = "));
                value.write(out, 1);
                out.push_str(" in ");
                body.write(out, 0);
            }
            GExpr::Ref(name) => out.push_str(name),
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for GExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write(&mut out, 0);
        f.write_str(&out)
    }
}
