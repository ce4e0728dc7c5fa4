//! Pólya exponentiation: the multiset operators E, E_m, and E_{>=m} on
//! counting series, together with the star and hat transforms.
//!
//! For a counting series A (nonnegative integer coefficients, zero constant
//! term) the full multiset operator satisfies the partition-product
//! identity
//!
//!   1 + E_{>=1}(A) = Π_{n>=1} (1 − x^n)^{−a(n)} = exp(A*(x)),
//!
//! where A*(n) = (1/n)·Σ_{d|n} d·a(d). The module computes E by the
//! all-integer product route, keeps a literal product-formula evaluator as
//! a cross-check, and leaves exp∘star to callers as a third route.

use crate::error::{Error, Result};
use crate::series::{fmt_coeff, Coeff, TruncatedSeries};
use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt;

/// Multiplicity constraint attached to one slot of a production vector:
/// take exactly m objects, or at least m objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultiplicityBound {
    Exactly(u32),
    AtLeast(u32),
}

impl MultiplicityBound {
    /// True for the Exactly(0) bound, the only one denoting "absent".
    pub fn is_absent(&self) -> bool {
        matches!(self, MultiplicityBound::Exactly(0))
    }

    /// Apply the corresponding multiset operator to a counting series.
    pub fn apply(&self, p: &TruncatedSeries) -> Result<TruncatedSeries> {
        match *self {
            MultiplicityBound::Exactly(m) => polya_exp_m(p, m as usize),
            MultiplicityBound::AtLeast(m) => polya_exp_geq(p, m as usize),
        }
    }
}

impl fmt::Display for MultiplicityBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplicityBound::Exactly(m) => write!(f, "{m}"),
            MultiplicityBound::AtLeast(m) => write!(f, ">={m}"),
        }
    }
}

impl Serialize for MultiplicityBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Validate a counting series and return its integer coefficients.
fn counting_coeffs(p: &TruncatedSeries, op: &'static str) -> Result<Vec<BigInt>> {
    if !p.coeffs()[0].is_zero() {
        return Err(Error::NonzeroConstantTerm {
            op,
            found: fmt_coeff(&p.coeffs()[0]),
        });
    }
    let mut out = Vec::with_capacity(p.order() + 1);
    for (degree, c) in p.coeffs().iter().enumerate() {
        if !c.is_integer() || c.is_negative() {
            return Err(Error::NotACountingSeries {
                op,
                degree,
                found: fmt_coeff(c),
            });
        }
        out.push(c.numer().clone());
    }
    Ok(out)
}

fn from_bigints(coeffs: Vec<BigInt>) -> TruncatedSeries {
    TruncatedSeries::from_coeffs(coeffs.into_iter().map(Coeff::from_integer).collect())
}

/// Star transform: p*(n) = (1/n)·Σ_{d|n} d·p(d), p*(0) = 0.
/// Defined for any series with zero constant term; additive in p.
pub fn star_transform(p: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !p.coeffs()[0].is_zero() {
        return Err(Error::NonzeroConstantTerm {
            op: "star_transform",
            found: fmt_coeff(&p.coeffs()[0]),
        });
    }
    let n = p.order();
    let mut sums = vec![Coeff::zero(); n + 1];
    for d in 1..=n {
        if p.coeffs()[d].is_zero() {
            continue;
        }
        let weighted = &p.coeffs()[d] * Coeff::from_integer(BigInt::from(d));
        let mut t = d;
        while t <= n {
            sums[t] += &weighted;
            t += d;
        }
    }
    for (t, s) in sums.iter_mut().enumerate().skip(1) {
        *s = &*s / Coeff::from_integer(BigInt::from(t));
    }
    Ok(TruncatedSeries::from_coeffs(sums))
}

/// Full multiset operator E(p) = Π_{s>=1} (1 − x^s)^{−p(s)}, computed
/// factor by factor in integer arithmetic. Each factor is expanded by its
/// binomial series Σ_k C(p(s)+k−1, k)·x^{sk}; for exponent 1 the expansion
/// is the comb Σ_k x^{sk}, folded in by one running pass.
pub fn polya_exp(p: &TruncatedSeries) -> Result<TruncatedSeries> {
    let a = counting_coeffs(p, "polya_exp")?;
    let n = p.order();
    let mut acc = vec![BigInt::zero(); n + 1];
    acc[0] = BigInt::one();
    for s in 1..=n {
        if a[s].is_zero() {
            continue;
        }
        if a[s].is_one() {
            // multiply by 1/(1−x^s): ascending prefix pass
            for t in s..=n {
                let (lo, hi) = acc.split_at_mut(t);
                hi[0] += &lo[t - s];
            }
        } else {
            let cap = n / s;
            let mut factor = Vec::with_capacity(cap + 1);
            factor.push(BigInt::one());
            for k in 1..=cap {
                // C(e+k−1, k) = C(e+k−2, k−1)·(e+k−1)/k, exact at every step
                let next = &factor[k - 1] * (&a[s] + BigInt::from(k - 1)) / BigInt::from(k);
                factor.push(next);
            }
            let mut fresh = vec![BigInt::zero(); n + 1];
            for (t, slot) in fresh.iter_mut().enumerate() {
                let mut sum = BigInt::zero();
                let mut k = 0usize;
                while k * s <= t {
                    let prev = &acc[t - k * s];
                    if !prev.is_zero() {
                        sum += &factor[k] * prev;
                    }
                    k += 1;
                }
                *slot = sum;
            }
            acc = fresh;
        }
    }
    Ok(from_bigints(acc))
}

/// The same product Π (1 − x^s)^{−p(s)} evaluated the plain way: each
/// factor applied p(s) times as a geometric-series pass. Kept as an
/// internal cross-check of `polya_exp`; intended for modest multiplicities.
pub fn partition_product(p: &TruncatedSeries) -> Result<TruncatedSeries> {
    let a = counting_coeffs(p, "partition_product")?;
    let n = p.order();
    let mut acc = vec![BigInt::zero(); n + 1];
    acc[0] = BigInt::one();
    for s in 1..=n {
        let mut applied = BigInt::zero();
        while applied < a[s] {
            for t in s..=n {
                let (lo, hi) = acc.split_at_mut(t);
                hi[0] += &lo[t - s];
            }
            applied += 1;
        }
    }
    Ok(from_bigints(acc))
}

/// The family E_0(p), …, E_m(p) by the cycle-index recurrence
/// m·E_m(A) = Σ_{k=1..m} A(x^k)·E_{m−k}(A).
fn polya_exp_family(p: &TruncatedSeries, m: usize) -> Result<Vec<TruncatedSeries>> {
    counting_coeffs(p, "polya_exp_m")?;
    let order = p.order();
    let powers: Vec<TruncatedSeries> = (1..=m).map(|k| p.substitute_power(k)).collect();
    let mut family = vec![TruncatedSeries::one(order)];
    for j in 1..=m {
        let mut sum = TruncatedSeries::zero(order);
        for k in 1..=j {
            sum = sum.add(&powers[k - 1].cauchy_mul(&family[j - k]));
        }
        let scaled = sum.scalar_mul(&Coeff::new(BigInt::one(), BigInt::from(j)));
        if !scaled.is_integer_valued() {
            return Err(Error::Invariant {
                msg: format!("E_{j} produced a non-integer coefficient"),
            });
        }
        family.push(scaled);
    }
    Ok(family)
}

/// Multiset operator for exactly m objects. E_0 = 1, E_1 = identity.
pub fn polya_exp_m(p: &TruncatedSeries, m: usize) -> Result<TruncatedSeries> {
    Ok(polya_exp_family(p, m)?.pop().expect("family is nonempty"))
}

/// Multiset operator for at least m objects:
/// E_{>=m}(p) = E(p) − Σ_{j<m} E_j(p). E_{>=0} is the full E.
pub fn polya_exp_geq(p: &TruncatedSeries, m: usize) -> Result<TruncatedSeries> {
    let mut acc = polya_exp(p)?;
    if m > 0 {
        let family = polya_exp_family(p, m - 1)?;
        for e_j in &family {
            acc = acc.sub(e_j);
        }
    }
    Ok(acc)
}

/// Hat transform: q̂(n) = Σ_{m<=n} ⌊n/m⌋·m·q(m), q̂(0) = 0; equivalently
/// (x/(1−x))·(Q*)'(x). Requires a zero constant term.
pub fn hat_transform(q: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !q.coeffs()[0].is_zero() {
        return Err(Error::NonzeroConstantTerm {
            op: "hat_transform",
            found: fmt_coeff(&q.coeffs()[0]),
        });
    }
    let n = q.order();
    let mut out = vec![Coeff::zero(); n + 1];
    for m in 1..=n {
        if q.coeffs()[m].is_zero() {
            continue;
        }
        let weighted = &q.coeffs()[m] * Coeff::from_integer(BigInt::from(m));
        for (t, slot) in out.iter_mut().enumerate().skip(m) {
            *slot += &weighted * Coeff::from_integer(BigInt::from(t / m));
        }
    }
    Ok(TruncatedSeries::from_coeffs(out))
}
