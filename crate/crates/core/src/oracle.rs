//! Independent reference computations used to cross-check the main code
//! paths. Everything here is deliberately written against the definitions
//! rather than sharing machinery with the functions it checks, so agreement
//! between an oracle and a production path is meaningful evidence.

use crate::error::Result;
use crate::series::{Coeff, TruncatedSeries};
use num::bigint::BigInt;
use num::{One, Zero};

/// Partition numbers p(0..=n) by the pentagonal-number recurrence
///
///   p(n) = Σ_{k>=1} (−1)^{k−1} [ p(n − k(3k−1)/2) + p(n − k(3k+1)/2) ],
///
/// independent of any power-series machinery. Time O(n^1.5) additions.
pub fn partition_numbers(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for m in 1..=n {
        let mut acc = BigInt::zero();
        let mut k = 1usize;
        loop {
            let g1 = k * (3 * k - 1) / 2;
            let g2 = k * (3 * k + 1) / 2;
            if g1 > m && g2 > m {
                break;
            }
            let negate = k.is_multiple_of(2);
            for g in [g1, g2] {
                if g <= m {
                    if negate {
                        acc -= &p[m - g];
                    } else {
                        acc += &p[m - g];
                    }
                }
            }
            k += 1;
        }
        p[m] = acc;
    }
    p
}

/// Multiset operator for exactly `m` objects, computed by the direct
/// nested-composition formula
///
///   E_m(A) = Σ_{j=1..m} (1/j!) Σ_{m_1+…+m_j=m, m_i>=1}
///            (1/(m_1·…·m_j)) · A(x^{m_1})·…·A(x^{m_j}).
///
/// Factorially expensive in m; kept as a test oracle for the production
/// recurrence. E_0 is the constant series 1.
pub fn polya_exp_m_direct(p: &TruncatedSeries, m: usize) -> Result<TruncatedSeries> {
    let order = p.order();
    if m == 0 {
        return Ok(TruncatedSeries::one(order));
    }
    // Substituted powers A(x^k) for k = 1..=m, shared by all compositions.
    let powers: Vec<TruncatedSeries> = (0..=m)
        .map(|k| {
            if k == 0 {
                TruncatedSeries::one(order)
            } else {
                p.substitute_power(k)
            }
        })
        .collect();

    let mut total = TruncatedSeries::zero(order);
    let mut parts: Vec<usize> = Vec::new();
    // Depth-first enumeration of compositions of m into positive parts.
    fn walk(
        remaining: usize,
        parts: &mut Vec<usize>,
        powers: &[TruncatedSeries],
        order: usize,
        total: &mut TruncatedSeries,
    ) {
        if remaining == 0 {
            let j = parts.len();
            let mut product = TruncatedSeries::one(order);
            let mut weight = BigInt::one();
            for &part in parts.iter() {
                product = product.cauchy_mul(&powers[part]);
                weight *= BigInt::from(part);
            }
            let mut j_factorial = BigInt::one();
            for i in 2..=j {
                j_factorial *= BigInt::from(i);
            }
            let scale = Coeff::new(BigInt::one(), weight * j_factorial);
            *total = total.add(&product.scalar_mul(&scale));
            return;
        }
        for next in 1..=remaining {
            parts.push(next);
            walk(remaining - next, parts, powers, order, total);
            parts.pop();
        }
    }
    walk(m, &mut parts, &powers, order, &mut total);
    Ok(total)
}

/// Brute-force count of multisets of exactly `m` distinguishable objects,
/// graded by total size, where `object_counts[s]` objects of size `s`
/// exist. Choosing a k-multiset from c distinct objects of one size has
/// C(c+k−1, k) outcomes; a dynamic program over sizes multiplies these out
/// without any generating-function machinery.
pub fn multiset_counts(object_counts: &[u64], m: usize, order: usize) -> Vec<BigInt> {
    // dp[taken][total] = number of multisets using sizes processed so far
    let mut dp = vec![vec![BigInt::zero(); order + 1]; m + 1];
    dp[0][0] = BigInt::one();
    for (size, &count) in object_counts.iter().enumerate() {
        if size == 0 || count == 0 {
            continue;
        }
        let mut next = dp.clone();
        for taken in 0..=m {
            for total in 0..=order {
                if dp[taken][total].is_zero() {
                    continue;
                }
                let mut ways = BigInt::one(); // C(count+k-1, k), built up in k
                let mut k = 1usize;
                while taken + k <= m && total + k * size <= order {
                    ways = ways * BigInt::from(count + k as u64 - 1) / BigInt::from(k);
                    let add = &dp[taken][total] * &ways;
                    next[taken + k][total + k * size] += add;
                    k += 1;
                }
            }
        }
        dp = next;
    }
    dp.swap_remove(m)
}
