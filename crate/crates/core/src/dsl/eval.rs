//! Exact series evaluation for systems and expressions.
//!
//! The engine advances every class and every multiset operator one degree
//! at a time: the coefficient of a class at degree n only needs operator
//! values at degree n−1 (the fresh root shifts by one), and each operator
//! value at degree n only needs class coefficients up to n. All arithmetic
//! is big-integer; the divisions demanded by the exponential and
//! cycle-index recurrences are checked exact.

use super::{ClassExpr, ComptonSystem, GExpr};
use crate::error::{Error, Result};
use crate::polya;
use crate::polya::MultiplicityBound;
use crate::series::TruncatedSeries;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Default cap on requested truncation orders. Generous: the cost model is
/// quadratic in the order, so the cap exists to catch typos, not budgets.
pub const DEFAULT_MAX_ORDER: usize = 1 << 17;

/// Counting series of every class of one system, truncated at a common
/// order, plus evaluation of query expressions against them.
#[derive(Debug, Clone)]
pub struct SystemSeries {
    class_series: Vec<TruncatedSeries>,
}

impl SystemSeries {
    pub fn order(&self) -> usize {
        self.class_series[0].order()
    }

    /// Counting series of one class.
    pub fn class(&self, i: usize) -> &TruncatedSeries {
        &self.class_series[i]
    }

    pub fn classes(&self) -> &[TruncatedSeries] {
        &self.class_series
    }

    /// Series of a query expression over these class series.
    pub fn expr(&self, system: &ComptonSystem, expr: &ClassExpr) -> Result<TruncatedSeries> {
        let order = self.order();
        match expr {
            ClassExpr::NodeClass => Ok(TruncatedSeries::x(order)),
            ClassExpr::Class(i) => Ok(self.class_series[*i].clone()),
            ClassExpr::Def(d) => self.expr(system, &system.defs()[*d].expr),
            ClassExpr::Union(parts) => {
                let mut acc = TruncatedSeries::zero(order);
                for p in parts {
                    acc = acc.add(&self.expr(system, p)?);
                }
                Ok(acc)
            }
            ClassExpr::Sum(parts) => {
                let mut acc = TruncatedSeries::one(order);
                for p in parts {
                    acc = acc.cauchy_mul(&self.expr(system, p)?);
                }
                Ok(acc)
            }
            ClassExpr::Multiset(bound, inner) => bound.apply(&self.expr(system, inner)?),
            ClassExpr::RootAppend(inner) => {
                Ok(TruncatedSeries::x(order).cauchy_mul(&self.expr(system, inner)?))
            }
        }
    }
}

// One tracked Euler operator E(T_j): c[k] = Σ_{d|k} d·t_j(d) accumulated as
// class coefficients arrive, and b = E(T_j) via n·b(n) = Σ c(k)·b(n−k).
struct EulerState {
    c: Vec<BigInt>,
    b: Vec<BigInt>,
}

// The family E_0, E_1, ..., E_mmax of one class, advanced with the
// cycle-index recurrence m·E_m = Σ_{k=1..m} A(x^k)·E_{m−k}.
struct FamilyState {
    e: Vec<Vec<BigInt>>,
}

// Where a production factor reads its coefficients.
#[derive(Clone, Copy)]
enum FactorKind {
    // full E(T_j), used by AtLeast(0) slots
    Euler(usize),
    // E_m(T_j), m >= 1
    Family(usize, usize),
    // E(T_j) − Σ_{l<m} E_l(T_j), m >= 1
    Geq(usize, usize),
}

// Running partial products of one production vector's factors. partials[s]
// is the series of factor_0 ⋯ factor_s; the last row is the forest series
// of the vector.
struct ProductChain {
    factors: Vec<FactorKind>,
    fvals: Vec<Vec<BigInt>>,
    partials: Vec<Vec<BigInt>>,
}

struct Engine<'a> {
    system: &'a ComptonSystem,
    order: usize,
    t: Vec<Vec<BigInt>>,
    euler: Vec<Option<EulerState>>,
    family: Vec<Option<FamilyState>>,
    // chains[i] aligns with productions(i)
    chains: Vec<Vec<ProductChain>>,
}

impl<'a> Engine<'a> {
    fn new(system: &'a ComptonSystem, order: usize) -> Self {
        let k = system.class_count();
        let mut need_euler = vec![false; k];
        let mut family_max: Vec<Option<usize>> = vec![None; k];
        let raise = |v: &mut Option<usize>, m: usize| {
            *v = Some(v.map_or(m, |cur| cur.max(m)));
        };
        for i in 0..k {
            for vector in system.productions(i) {
                for (j, bound) in vector.support() {
                    match bound {
                        MultiplicityBound::Exactly(m) => {
                            raise(&mut family_max[j], m as usize);
                        }
                        MultiplicityBound::AtLeast(0) => need_euler[j] = true,
                        MultiplicityBound::AtLeast(m) => {
                            need_euler[j] = true;
                            raise(&mut family_max[j], m as usize - 1);
                        }
                    }
                }
            }
        }

        let euler = need_euler
            .iter()
            .map(|&need| {
                need.then(|| EulerState {
                    c: vec![BigInt::zero(); order + 1],
                    b: {
                        let mut b = vec![BigInt::zero(); order + 1];
                        b[0] = BigInt::one();
                        b
                    },
                })
            })
            .collect();
        let family = family_max
            .iter()
            .map(|max| {
                max.map(|mmax| FamilyState {
                    e: (0..=mmax)
                        .map(|m| {
                            let mut row = vec![BigInt::zero(); order + 1];
                            if m == 0 {
                                row[0] = BigInt::one();
                            }
                            row
                        })
                        .collect(),
                })
            })
            .collect();

        let chains = (0..k)
            .map(|i| {
                system
                    .productions(i)
                    .iter()
                    .map(|vector| {
                        let factors: Vec<FactorKind> = vector
                            .support()
                            .map(|(j, bound)| match bound {
                                MultiplicityBound::Exactly(m) => FactorKind::Family(j, m as usize),
                                MultiplicityBound::AtLeast(0) => FactorKind::Euler(j),
                                MultiplicityBound::AtLeast(m) => FactorKind::Geq(j, m as usize),
                            })
                            .collect();
                        let n = factors.len();
                        ProductChain {
                            factors,
                            fvals: vec![Vec::new(); n],
                            partials: vec![Vec::new(); n],
                        }
                    })
                    .collect()
            })
            .collect();

        Engine {
            system,
            order,
            t: vec![vec![BigInt::zero()]; k],
            euler,
            family,
            chains,
        }
    }

    fn factor_value(&self, kind: FactorKind, deg: usize) -> BigInt {
        match kind {
            FactorKind::Euler(j) => self.euler[j].as_ref().expect("tracked").b[deg].clone(),
            FactorKind::Family(j, m) => self.family[j].as_ref().expect("tracked").e[m][deg].clone(),
            FactorKind::Geq(j, m) => {
                let mut v = self.euler[j].as_ref().expect("tracked").b[deg].clone();
                let fam = self.family[j].as_ref().expect("tracked");
                for l in 0..m {
                    v -= &fam.e[l][deg];
                }
                v
            }
        }
    }

    // Extend every tracked operator and partial product to degree n.
    // Class coefficients t(·) must already be known through degree n.
    fn extend_operators(&mut self, n: usize) -> Result<()> {
        let k = self.system.class_count();
        for j in 0..k {
            if self.euler[j].is_some() {
                let tjn = self.t[j][n].clone();
                let state = self.euler[j].as_mut().expect("tracked");
                if !tjn.is_zero() {
                    let contrib = BigInt::from(n) * &tjn;
                    let mut mult = n;
                    while mult <= self.order {
                        state.c[mult] += &contrib;
                        mult += n;
                    }
                }
                if n > 0 {
                    let mut acc = BigInt::zero();
                    for l in 1..=n {
                        if !state.c[l].is_zero() && !state.b[n - l].is_zero() {
                            acc += &state.c[l] * &state.b[n - l];
                        }
                    }
                    let (q, r) = num::Integer::div_rem(&acc, &BigInt::from(n));
                    if !r.is_zero() {
                        return Err(Error::Invariant {
                            msg: format!("exponential recurrence not divisible at degree {n}"),
                        });
                    }
                    state.b[n] = q;
                }
            }
            if self.family[j].is_some() && n > 0 {
                let mmax = self.family[j].as_ref().expect("tracked").e.len() - 1;
                for m in 1..=mmax {
                    let mut acc = BigInt::zero();
                    {
                        let fam = self.family[j].as_ref().expect("tracked");
                        for cyc in 1..=m {
                            let mut q = 1usize;
                            while q * cyc <= n {
                                let tq = &self.t[j][q];
                                if !tq.is_zero() {
                                    let prev = &fam.e[m - cyc][n - q * cyc];
                                    if !prev.is_zero() {
                                        acc += tq * prev;
                                    }
                                }
                                q += 1;
                            }
                        }
                    }
                    let (quot, rem) = num::Integer::div_rem(&acc, &BigInt::from(m));
                    if !rem.is_zero() {
                        return Err(Error::Invariant {
                            msg: format!("cycle-index recurrence not divisible at degree {n}"),
                        });
                    }
                    self.family[j].as_mut().expect("tracked").e[m][n] = quot;
                }
            }
        }

        for i in 0..k {
            for g in 0..self.chains[i].len() {
                let nf = self.chains[i][g].factors.len();
                for s in 0..nf {
                    let kind = self.chains[i][g].factors[s];
                    let v = self.factor_value(kind, n);
                    self.chains[i][g].fvals[s].push(v);
                }
                for s in 0..nf {
                    let value = if s == 0 {
                        self.chains[i][g].fvals[0][n].clone()
                    } else {
                        let chain = &self.chains[i][g];
                        let mut acc = BigInt::zero();
                        for a in 0..=n {
                            let left = &chain.partials[s - 1][a];
                            if left.is_zero() {
                                continue;
                            }
                            let right = &chain.fvals[s][n - a];
                            if !right.is_zero() {
                                acc += left * right;
                            }
                        }
                        acc
                    };
                    self.chains[i][g].partials[s].push(value);
                }
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<SystemSeries> {
        self.extend_operators(0)?;
        for n in 1..=self.order {
            let k = self.system.class_count();
            for i in 0..k {
                let value = if i == 0 {
                    if n == 1 {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                } else {
                    let mut acc = BigInt::zero();
                    for chain in &self.chains[i] {
                        let last = chain.partials.last().expect("nonempty vector");
                        acc += &last[n - 1];
                    }
                    acc
                };
                if value.is_negative() {
                    return Err(Error::Invariant {
                        msg: format!("negative coefficient at degree {n}"),
                    });
                }
                self.t[i].push(value);
            }
            self.extend_operators(n)?;
        }
        let class_series = self
            .t
            .into_iter()
            .map(|coeffs| {
                TruncatedSeries::from_coeffs(
                    coeffs.into_iter().map(BigRational::from_integer).collect(),
                )
            })
            .collect();
        Ok(SystemSeries { class_series })
    }
}

/// Evaluate every class series of a system to the given truncation order.
pub fn evaluate_system(system: &ComptonSystem, order: usize) -> Result<SystemSeries> {
    evaluate_system_bounded(system, order, DEFAULT_MAX_ORDER)
}

/// As [`evaluate_system`], with an explicit resource bound on the order.
pub fn evaluate_system_bounded(
    system: &ComptonSystem,
    order: usize,
    max_order: usize,
) -> Result<SystemSeries> {
    if order > max_order {
        return Err(Error::OrderLimitExceeded {
            requested: order,
            limit: max_order,
        });
    }
    Engine::new(system, order).run()
}

/// Evaluate a closed-form expression to the given truncation order.
pub fn evaluate_gexpr(expr: &GExpr, order: usize) -> Result<TruncatedSeries> {
    evaluate_gexpr_bounded(expr, order, DEFAULT_MAX_ORDER)
}

/// As [`evaluate_gexpr`], with an explicit resource bound on the order.
pub fn evaluate_gexpr_bounded(
    expr: &GExpr,
    order: usize,
    max_order: usize,
) -> Result<TruncatedSeries> {
    if order > max_order {
        return Err(Error::OrderLimitExceeded {
            requested: order,
            limit: max_order,
        });
    }
    let mut env: Vec<(String, TruncatedSeries)> = Vec::new();
    eval_gexpr_in(expr, order, &mut env)
}

fn eval_gexpr_in(
    expr: &GExpr,
    order: usize,
    env: &mut Vec<(String, TruncatedSeries)>,
) -> Result<TruncatedSeries> {
    match expr {
        GExpr::X => Ok(TruncatedSeries::x(order)),
        GExpr::Geometric(m) => Ok(TruncatedSeries::geometric(1, *m as usize, order)),
        GExpr::Add(terms) => {
            let mut acc = TruncatedSeries::zero(order);
            for t in terms {
                acc = acc.add(&eval_gexpr_in(t, order, env)?);
            }
            Ok(acc)
        }
        GExpr::Mul(factors) => {
            let mut acc = TruncatedSeries::one(order);
            for f in factors {
                acc = acc.cauchy_mul(&eval_gexpr_in(f, order, env)?);
            }
            Ok(acc)
        }
        GExpr::ExactlyOp(m, inner) => {
            let s = eval_gexpr_in(inner, order, env)?;
            polya::polya_exp_m(&s, *m as usize)
        }
        GExpr::AtLeastOp(m, inner) => {
            let s = eval_gexpr_in(inner, order, env)?;
            polya::polya_exp_geq(&s, *m as usize)
        }
        GExpr::Let { name, value, body } => {
            let v = eval_gexpr_in(value, order, env)?;
            env.push((name.clone(), v));
            let result = eval_gexpr_in(body, order, env);
            env.pop();
            result
        }
        GExpr::Ref(name) => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| Error::UnknownName { name: name.clone() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system;

    fn ints(s: &TruncatedSeries) -> Vec<i64> {
        s.coeffs()
            .iter()
            .map(|c| {
                assert!(c.is_integer());
                let v: BigInt = c.to_integer();
                i64::try_from(v).unwrap()
            })
            .collect()
    }

    #[test]
    fn chains_count_one_per_size() {
        let sys = parse_system(
            "system linear\nclass T0 = node\nclass T1 = node / [T0:1] | [T1:1]\ndef Lin = T0 | T1\n",
        )
        .unwrap();
        let series = evaluate_system(&sys, 8).unwrap();
        assert_eq!(ints(series.class(0)), vec![0, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(ints(series.class(1)), vec![0, 0, 1, 1, 1, 1, 1, 1, 1]);
        let lin = series.expr(&sys, &sys.lookup("Lin").unwrap()).unwrap();
        assert_eq!(ints(&lin), vec![0, 1, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn all_trees_match_the_classical_counts() {
        let sys = parse_system(
            "system alltrees\nclass T0 = node\nclass T1 = node / [T0:>=1, T1:>=0] | [T1:>=1]\n\
             def AllTrees = T0 | T1\n",
        )
        .unwrap();
        let series = evaluate_system(&sys, 10).unwrap();
        let all = series.expr(&sys, &sys.lookup("AllTrees").unwrap()).unwrap();
        assert_eq!(ints(&all), vec![0, 1, 1, 2, 4, 9, 20, 48, 115, 286, 719]);
    }

    #[test]
    fn binary_trees_interleave_zeros() {
        let sys = parse_system(
            "system binary\nclass T0 = node\n\
             class T1 = node / [T0:2] | [T0:1, T1:1] | [T1:2]\ndef Bin = T0 | T1\n",
        )
        .unwrap();
        let series = evaluate_system(&sys, 11).unwrap();
        let bin = series.expr(&sys, &sys.lookup("Bin").unwrap()).unwrap();
        assert_eq!(ints(&bin), vec![0, 1, 0, 1, 0, 1, 0, 2, 0, 3, 0, 6]);
    }

    #[test]
    fn height_one_class_agrees_with_the_operator_route() {
        let sys =
            parse_system("system height1\nclass T0 = node\nclass T1 = node / [T0:>=1]\n").unwrap();
        let series = evaluate_system(&sys, 12).unwrap();
        let direct = TruncatedSeries::x(12)
            .cauchy_mul(&polya::polya_exp_geq(&TruncatedSeries::x(12), 1).unwrap());
        assert_eq!(series.class(1), &direct);
    }

    #[test]
    fn parity_classes_split_chains() {
        let sys = parse_system(
            "system evenchains\nclass T0 = node\nclass Todd = node / [Teven:1]\n\
             class Teven = node / [T0:1] | [Todd:1]\ndef Even = Teven\n",
        )
        .unwrap();
        let series = evaluate_system(&sys, 9).unwrap();
        assert_eq!(ints(series.class(1)), vec![0, 0, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(ints(series.class(2)), vec![0, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn expr_multiset_routes_through_the_polya_operators() {
        let sys =
            parse_system("system linear\nclass T0 = node\nclass T1 = node / [T0:1] | [T1:1]\n")
                .unwrap();
        let series = evaluate_system(&sys, 10).unwrap();
        let expr =
            ClassExpr::Multiset(MultiplicityBound::AtLeast(1), Box::new(ClassExpr::Class(1)));
        let via_expr = series.expr(&sys, &expr).unwrap();
        let direct = polya::polya_exp_geq(series.class(1), 1).unwrap();
        assert_eq!(via_expr, direct);
        // partitions with every part at least 2
        assert_eq!(ints(&via_expr), vec![0, 0, 1, 1, 2, 2, 4, 4, 7, 8, 12]);
    }

    #[test]
    fn root_append_shifts_a_product() {
        let sys = parse_system("system s\nclass T0 = node\n").unwrap();
        let series = evaluate_system(&sys, 5).unwrap();
        let expr = ClassExpr::RootAppend(Box::new(ClassExpr::Sum(vec![
            ClassExpr::NodeClass,
            ClassExpr::NodeClass,
        ])));
        let s = series.expr(&sys, &expr).unwrap();
        assert_eq!(ints(&s), vec![0, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn gexpr_evaluation_matches_the_operators() {
        let e = crate::dsl::parse_gexpr("let t = x/(1-x) in E(2, t)").unwrap();
        let got = evaluate_gexpr(&e, 8).unwrap();
        let want = polya::polya_exp_m(&TruncatedSeries::geometric(1, 1, 8), 2).unwrap();
        assert_eq!(got, want);
        let g = crate::dsl::parse_gexpr("x/(1-x^3)").unwrap();
        assert_eq!(
            ints(&evaluate_gexpr(&g, 7).unwrap()),
            vec![0, 1, 0, 0, 1, 0, 0, 1]
        );
    }

    #[test]
    fn order_limit_is_enforced() {
        let sys = parse_system("system s\nclass T0 = node\n").unwrap();
        assert!(matches!(
            evaluate_system_bounded(&sys, 10, 5),
            Err(Error::OrderLimitExceeded {
                requested: 10,
                limit: 5
            })
        ));
    }
}
