//! Exact truncated formal power series over arbitrary-precision rationals.
//!
//! A series carries its coefficients up to an inclusive truncation order N.
//! Every binary operation truncates to the smaller operand order, so a
//! result degree is present only when both inputs determined it. No
//! floating point appears anywhere in this module.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Exact rational coefficient. `BigRational` keeps itself reduced with a
/// positive denominator, which is exactly the canonical form we need.
pub type Coeff = BigRational;

/// Render a coefficient as `num/den`, omitting the denominator when it is 1.
pub fn fmt_coeff(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Formal power series truncated at an inclusive degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    /// Coefficient vector indexed by degree; length is order + 1.
    coeffs: Vec<Coeff>,
}

impl TruncatedSeries {
    /// The zero series at the given order.
    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![Coeff::zero(); order + 1],
        }
    }

    /// The constant series 1 at the given order.
    pub fn one(order: usize) -> Self {
        Self::monomial(0, order)
    }

    /// The series x at the given order (zero when the order is 0).
    pub fn x(order: usize) -> Self {
        Self::monomial(1, order)
    }

    /// The single monomial x^degree, silently absent above the order.
    pub fn monomial(degree: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if degree <= order {
            s.coeffs[degree] = Coeff::one();
        }
        s
    }

    /// x^offset / (1 - x^period): support {offset, offset+period, ...},
    /// all coefficients 1. The period must be at least 1.
    pub fn geometric(offset: usize, period: usize, order: usize) -> Self {
        assert!(period >= 1, "geometric series needs period >= 1");
        let mut s = Self::zero(order);
        let mut d = offset;
        while d <= order {
            s.coeffs[d] = Coeff::one();
            d += period;
        }
        s
    }

    /// Build a series from an explicit coefficient vector (degree 0 first).
    /// An empty vector denotes the zero series of order 0.
    pub fn from_coeffs(mut coeffs: Vec<Coeff>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Coeff::zero());
        }
        TruncatedSeries { coeffs }
    }

    /// Convenience constructor from machine integers, mostly for tests.
    pub fn from_ints(values: &[i64]) -> Self {
        Self::from_coeffs(
            values
                .iter()
                .map(|&v| Coeff::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    /// Inclusive truncation degree.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient at the given degree, or None beyond the truncation
    /// (beyond the order the value is unknown, not zero).
    pub fn coeff(&self, degree: usize) -> Option<&Coeff> {
        self.coeffs.get(degree)
    }

    /// All stored coefficients, indexed by degree.
    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    /// Copy truncated (or zero-extended is forbidden: shrinking only).
    /// Panics if asked to extend, since the missing degrees are unknown.
    pub fn truncated(&self, order: usize) -> Self {
        assert!(
            order <= self.order(),
            "cannot extend a truncated series from {} to {}",
            self.order(),
            order
        );
        TruncatedSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// True when every coefficient is an integer.
    pub fn is_integer_valued(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// The coefficients as integers, when the series is integer-valued.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        if !self.is_integer_valued() {
            return None;
        }
        Some(self.coeffs.iter().map(|c| c.numer().clone()).collect())
    }

    /// Coefficientwise sum, truncated to the smaller order.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| &self.coeffs[k] + &other.coeffs[k])
            .collect();
        TruncatedSeries { coeffs }
    }

    /// Coefficientwise difference, truncated to the smaller order.
    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|k| &self.coeffs[k] - &other.coeffs[k])
            .collect();
        TruncatedSeries { coeffs }
    }

    /// Multiply every coefficient by a fixed rational.
    pub fn scalar_mul(&self, factor: &Coeff) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Cauchy product, truncated to the smaller operand order.
    /// Time O(N^2) coefficient operations; zero factors are skipped.
    pub fn cauchy_mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut coeffs = vec![Coeff::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs }
    }

    /// A(x^d) at the same truncation order. Requires d >= 1; d = 1 is the
    /// identity. The coefficient at n is a(n/d) when d divides n, else 0.
    pub fn substitute_power(&self, d: usize) -> Self {
        assert!(d >= 1, "substitute_power needs exponent >= 1");
        let n = self.order();
        let mut coeffs = vec![Coeff::zero(); n + 1];
        let mut src = 0;
        let mut dst = 0;
        while dst <= n {
            coeffs[dst] = self.coeffs[src].clone();
            src += 1;
            dst += d;
        }
        TruncatedSeries { coeffs }
    }

    /// Truncated exponential of a series with zero constant term.
    ///
    /// Uses the linear recurrence n·b(n) = Σ_{k=1..n} k·a(k)·b(n−k) obtained
    /// from B' = A'·B, so the whole prefix costs O(N^2) operations.
    pub fn exp_truncated(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm {
                op: "exp",
                found: fmt_coeff(&self.coeffs[0]),
            });
        }
        let n = self.order();
        let mut b = vec![Coeff::zero(); n + 1];
        b[0] = Coeff::one();
        // weighted input coefficients k·a(k), reused across output degrees
        let weighted: Vec<Coeff> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * Coeff::from_integer(BigInt::from(k)))
            .collect();
        for m in 1..=n {
            let mut acc = Coeff::zero();
            for k in 1..=m {
                if weighted[k].is_zero() || b[m - k].is_zero() {
                    continue;
                }
                acc += &weighted[k] * &b[m - k];
            }
            b[m] = acc / Coeff::from_integer(BigInt::from(m));
        }
        Ok(TruncatedSeries { coeffs: b })
    }

    /// Truncated logarithm of a series with constant term 1.
    ///
    /// From A·B' = A' with B = log A:
    /// b(n) = a(n) − (1/n)·Σ_{k=1..n−1} k·b(k)·a(n−k).
    pub fn log_truncated(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::ConstantTermNotOne {
                found: fmt_coeff(&self.coeffs[0]),
            });
        }
        let n = self.order();
        let mut b = vec![Coeff::zero(); n + 1];
        for m in 1..=n {
            let mut acc = Coeff::zero();
            for (k, bk) in b.iter().enumerate().take(m).skip(1) {
                if bk.is_zero() || self.coeffs[m - k].is_zero() {
                    continue;
                }
                acc += bk * &self.coeffs[m - k] * Coeff::from_integer(BigInt::from(k));
            }
            b[m] = &self.coeffs[m] - acc / Coeff::from_integer(BigInt::from(m));
        }
        Ok(TruncatedSeries { coeffs: b })
    }

    /// Formal derivative. The order drops by one, saturating at 0: the
    /// derivative of an order-0 series is the zero series of order 0.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..=self.order())
            .map(|k| &self.coeffs[k] * Coeff::from_integer(BigInt::from(k)))
            .collect();
        TruncatedSeries { coeffs }
    }

    /// True when every coefficient is >= 0.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Degrees (>= 1) with a strictly positive coefficient.
    pub fn positive_support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| c.is_positive())
            .map(|(n, _)| n)
            .collect()
    }

    /// CSV dump of the degrees in `lo..=hi` (clamped to the order), with a
    /// `n,coefficient` header. Coefficients print as `num/den`, the
    /// denominator omitted when 1.
    pub fn to_csv_range(&self, lo: usize, hi: usize) -> String {
        let hi = hi.min(self.order());
        let mut out = String::from("n,coefficient\n");
        for n in lo..=hi {
            out.push_str(&format!("{},{}\n", n, fmt_coeff(&self.coeffs[n])));
        }
        out
    }

    /// CSV dump of every stored degree.
    pub fn to_csv(&self) -> String {
        self.to_csv_range(0, self.order())
    }
}
