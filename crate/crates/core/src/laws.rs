//! Empirical limit-law analysis: period detection, the coefficient ratio
//! test, asymptotic density sampling, and the coherence check tying the
//! structural classification to the observed ratio behavior.
//!
//! The ratio test examines a(m-d)/a(m) along the support lattice of a
//! counting series. For a class whose radius of convergence is one, the
//! ratios creep up to 1 and the labeled-fraction reading of any monadic
//! property stabilizes; for a sub-one radius they stabilize strictly
//! below 1. Truncations make every verdict here empirical: INCONCLUSIVE
//! is a first-class outcome and short windows are never forced into a
//! binary answer. The tolerance and window thresholds are calibrated on
//! the partition series, the canonical radius-one case, whose gap to 1
//! decays like a constant over the square root of the degree.

use crate::dsl::{evaluate_system, ClassExpr, ComptonSystem, Kind};
use crate::error::{Error, Result};
use crate::polya::polya_exp_geq;
use crate::series::{Coeff, TruncatedSeries};
use crate::structure::{classify_radius, expr_verdict, log_bigint, RadiusVerdict};
use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use serde::Serialize;
use std::fmt;

/// Ratio tolerance for the convergence and divergence verdicts.
pub const RATIO_TOLERANCE: f64 = 0.05;

/// Fewest ratio samples on which a verdict other than INCONCLUSIVE is
/// ever issued.
pub const MIN_SAMPLES: usize = 8;

/// Smallest window end (in degrees) for a CONVERGES_TO_ONE verdict; at
/// this depth the partition series has pulled within tolerance of 1.
pub const CONVERGENCE_WINDOW_END: usize = 2000;

/// Support period of a series: the gcd of the degrees with nonzero
/// coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodInfo {
    pub period: usize,
    /// Smallest positive degree with a nonzero coefficient.
    pub onset: usize,
    /// The first few support degrees, as evidence.
    pub support_sample: Vec<usize>,
}

/// Detect the support period of a series, ignoring the constant term.
/// Fails when every coefficient at degree one and above vanishes.
pub fn detect_period(a: &TruncatedSeries) -> Result<PeriodInfo> {
    let mut period = 0usize;
    let mut onset = None;
    let mut sample = Vec::new();
    for n in 1..=a.order() {
        let c = a.coeff(n).expect("within order");
        if !c.is_zero() {
            period = num::integer::gcd(period, n);
            onset.get_or_insert(n);
            if sample.len() < 8 {
                sample.push(n);
            }
        }
    }
    let Some(onset) = onset else {
        return Err(Error::InsufficientData {
            msg: "the series vanishes at every positive degree".into(),
        });
    };
    Ok(PeriodInfo {
        period,
        onset,
        support_sample: sample,
    })
}

/// Outcome of the ratio test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioVerdict {
    ConvergesToOne,
    Diverges,
    Inconclusive,
}

impl fmt::Display for RatioVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioVerdict::ConvergesToOne => "CONVERGES_TO_ONE",
            RatioVerdict::Diverges => "DIVERGES",
            RatioVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

impl Serialize for RatioVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One sampled ratio, kept exact and rendered to twelve decimal digits.
#[derive(Debug, Clone, Serialize)]
pub struct RatioSample {
    pub degree: usize,
    /// Exact value as "numerator/denominator".
    pub exact: String,
    /// Decimal rendering, rounded to twelve fractional digits.
    pub decimal: String,
}

/// Trend statistics over the sampled ratios.
#[derive(Debug, Clone, Serialize)]
pub struct TrendStats {
    pub last_degree: usize,
    pub last_exact: String,
    pub last_decimal: String,
    /// |1 - last ratio|.
    pub last_gap: f64,
    /// Mean gap over the second half of the samples is below the mean
    /// over the first half (or both are negligible).
    pub gap_shrinking: bool,
    /// Gaps are nonincreasing across the last quarter of the samples.
    pub monotone_tail: bool,
    /// Limit of the gap extrapolated from the last quarter under a
    /// constant-plus-inverse-square-root model, clamped at zero.
    pub extrapolated_gap: f64,
}

/// Result of the ratio test over a window.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub period: usize,
    pub onset: usize,
    /// Inclusive degree window the samples were drawn from.
    pub window: (usize, usize),
    pub samples: Vec<RatioSample>,
    pub trend: TrendStats,
    pub verdict: RatioVerdict,
}

// Twelve-digit decimal rendering of an exact rational, rounded to
// nearest with ties away from zero.
fn decimal12(r: &BigRational) -> String {
    let scale = BigInt::from(10u64).pow(12);
    let scaled = r * BigRational::from_integer(scale.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = if scaled.is_negative() {
        (scaled - half).ceil()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    let negative = rounded.is_negative();
    let digits = rounded.magnitude().to_string();
    let padded = format!("{digits:0>13}");
    let split = padded.len() - 12;
    let (int_part, frac_part) = padded.split_at(split);
    format!("{}{int_part}.{frac_part}", if negative { "-" } else { "" })
}

// Ratio as f64 via logarithms, safe when both sides overflow f64.
fn ratio_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (log_bigint(&r.numer().abs()) - log_bigint(&r.denom().abs())).exp()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Run the ratio test on a counting series over the inclusive degree
/// window [lo, hi] (clamped to the truncation order). Samples are the
/// ratios a(m-d)/a(m) at multiples m of the support period d where both
/// coefficients are positive. Fails when the series has no support or
/// the window yields no sample at all; fewer than [`MIN_SAMPLES`]
/// samples always yield INCONCLUSIVE.
pub fn ratio_test(a: &TruncatedSeries, lo: usize, hi: usize) -> Result<RatioReport> {
    let info = detect_period(a)?;
    let d = info.period;
    let lo = lo.max(1);
    let hi = hi.min(a.order());

    let mut samples = Vec::new();
    let mut values = Vec::new();
    let mut m = d.max(d * lo.div_ceil(d));
    while m <= hi {
        if m >= d {
            let prev = a.coeff(m - d).expect("within order");
            let cur = a.coeff(m).expect("within order");
            if prev.is_positive() && cur.is_positive() {
                let ratio = prev / cur;
                samples.push(RatioSample {
                    degree: m,
                    exact: format!("{}/{}", ratio.numer(), ratio.denom()),
                    decimal: decimal12(&ratio),
                });
                values.push(ratio_f64(&ratio));
            }
        }
        m += d;
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData {
            msg: "no positive coefficient pair in the window".into(),
        });
    }

    let k = values.len();
    let gaps: Vec<f64> = values.iter().map(|v| (1.0 - v).abs()).collect();
    let half = k / 2;
    let quarter_start = k - (k / 4).max(1);
    let first_mean = mean(&gaps[..half.max(1)]);
    let second_mean = mean(&gaps[half.min(k - 1)..]);
    let gap_shrinking = second_mean < first_mean || second_mean <= RATIO_TOLERANCE / 10.0;
    let monotone_tail = gaps[quarter_start..].windows(2).all(|w| w[1] <= w[0]);

    // fit gap = alpha + beta/sqrt(degree) on the last quarter
    let tail: Vec<(f64, f64)> = samples[quarter_start..]
        .iter()
        .zip(&gaps[quarter_start..])
        .map(|(s, &g)| (1.0 / (s.degree as f64).sqrt(), g))
        .collect();
    let extrapolated_gap = if tail.len() < 2 {
        gaps[k - 1]
    } else {
        let n = tail.len() as f64;
        let sx: f64 = tail.iter().map(|(x, _)| x).sum();
        let sy: f64 = tail.iter().map(|(_, y)| y).sum();
        let sxx: f64 = tail.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = tail.iter().map(|(x, y)| x * y).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < f64::EPSILON {
            gaps[k - 1]
        } else {
            let beta = (n * sxy - sx * sy) / denom;
            ((sy - beta * sx) / n).max(0.0)
        }
    };

    let last = samples.last().expect("nonempty");
    let trend = TrendStats {
        last_degree: last.degree,
        last_exact: last.exact.clone(),
        last_decimal: last.decimal.clone(),
        last_gap: gaps[k - 1],
        gap_shrinking,
        monotone_tail,
        extrapolated_gap,
    };

    let tau = RATIO_TOLERANCE;
    let last_gap = gaps[k - 1];
    let tail_values = &values[quarter_start..];
    let tail_low = tail_values.iter().all(|&v| v <= 1.0 - tau);
    let spread = tail_values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        - tail_values.iter().cloned().fold(f64::INFINITY, f64::min);

    let verdict = if k < MIN_SAMPLES {
        RatioVerdict::Inconclusive
    } else if last_gap <= tau && gap_shrinking && last.degree >= CONVERGENCE_WINDOW_END {
        RatioVerdict::ConvergesToOne
    } else if last_gap >= tau
        && tail_low
        && spread <= tau / 2.0
        && (!gap_shrinking || last_gap >= 4.0 * tau)
    {
        RatioVerdict::Diverges
    } else {
        RatioVerdict::Inconclusive
    };

    Ok(RatioReport {
        period: d,
        onset: info.onset,
        window: (lo, hi),
        samples,
        trend,
        verdict,
    })
}

/// Density samples b(nd)/a(nd) along the period lattice; degrees with a
/// zero denominator are skipped and no verdict is attached.
pub fn density(b: &TruncatedSeries, a: &TruncatedSeries, period: usize) -> Vec<RatioSample> {
    assert!(period >= 1, "period is a positive integer");
    let hi = a.order().min(b.order());
    let mut out = Vec::new();
    let mut m = period;
    while m <= hi {
        let denom = a.coeff(m).expect("within order");
        if !denom.is_zero() {
            let ratio = b.coeff(m).expect("within order") / denom;
            out.push(RatioSample {
                degree: m,
                exact: format!("{}/{}", ratio.numer(), ratio.denom()),
                decimal: decimal12(&ratio),
            });
        }
        m += period;
    }
    out
}

/// Coefficientwise quotient samples a(n)/c(n) over an inclusive window,
/// for comparison against the constant predicted by Tauberian arguments;
/// degrees where c vanishes are skipped.
pub fn schur_ratio(
    a: &TruncatedSeries,
    c: &TruncatedSeries,
    lo: usize,
    hi: usize,
) -> Vec<RatioSample> {
    let lo = lo.max(1);
    let hi = hi.min(a.order()).min(c.order());
    let mut out = Vec::new();
    for n in lo..=hi {
        let denom = c.coeff(n).expect("within order");
        if denom.is_zero() {
            continue;
        }
        let ratio = a.coeff(n).expect("within order") / denom;
        out.push(RatioSample {
            degree: n,
            exact: format!("{}/{}", ratio.numer(), ratio.denom()),
            decimal: decimal12(&ratio),
        });
    }
    out
}

/// Agreement between the structural classification and the empirical
/// ratio trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coherence {
    Agree,
    Conflict,
}

impl fmt::Display for Coherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coherence::Agree => "AGREE",
            Coherence::Conflict => "CONFLICT",
        })
    }
}

impl Serialize for Coherence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Combined report: structural verdict for a tree class, ratio test on
/// its forests, and whether the two sides agree.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub system: String,
    pub tree_class: String,
    pub order: usize,
    pub structural: RadiusVerdict,
    /// Absent when the class is empty and there is nothing to sample.
    pub ratio: Option<RatioReport>,
    pub coherence: Coherence,
}

/// Check the structural classification of a tree class against the ratio
/// test on its forest series E(at least 1 tree), both computed to the
/// given order.
///
/// The sides agree when "radius one, or finite and nonempty" coincides
/// with a CONVERGES_TO_ONE verdict. INCONCLUSIVE counts as
/// non-convergence, so windows shorter than the convergence threshold
/// can surface a CONFLICT for slowly converging series; run with order
/// at least [`CONVERGENCE_WINDOW_END`] for a meaningful check.
pub fn check_main_theorem(
    system: &ComptonSystem,
    tree_class: &ClassExpr,
    order: usize,
) -> Result<CoherenceReport> {
    if system.kind_of(tree_class)? != Kind::Tree {
        return Err(Error::KindMismatch {
            msg: "the coherence check takes a tree-valued class expression".into(),
        });
    }
    let series = evaluate_system(system, order)?;
    let t = series.expr(system, tree_class)?;
    let forest = polya_exp_geq(&t, 1)?;
    let ratio = match ratio_test(&forest, 1, order) {
        Ok(r) => Some(r),
        Err(Error::InsufficientData { .. }) => None,
        Err(e) => return Err(e),
    };

    let report = classify_radius(system)?;
    let structural = expr_verdict(system, &report, tree_class);
    let nonempty = (1..=order).any(|n| t.coeff(n).is_some_and(|c: &Coeff| c.is_positive()));
    let expects_convergence =
        structural == RadiusVerdict::RadiusOne || (structural == RadiusVerdict::Finite && nonempty);
    let observed_convergence = ratio
        .as_ref()
        .is_some_and(|r| r.verdict == RatioVerdict::ConvergesToOne);
    let coherence = if expects_convergence == observed_convergence {
        Coherence::Agree
    } else {
        Coherence::Conflict
    };

    Ok(CoherenceReport {
        system: system.name().to_string(),
        tree_class: system.expr_source(tree_class),
        order,
        structural,
        ratio,
        coherence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::oracle::partition_numbers;
    use crate::series::TruncatedSeries;
    use num::BigRational;

    fn partition_series(order: usize) -> TruncatedSeries {
        let coeffs = partition_numbers(order)
            .into_iter()
            .map(BigRational::from_integer)
            .collect();
        TruncatedSeries::from_coeffs(coeffs)
    }

    fn series_of(coeffs: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_ints(coeffs)
    }

    #[test]
    fn period_detection() {
        // partitions without the constant term have period 1
        let mut p = partition_series(64);
        let info = detect_period(&p).unwrap();
        assert_eq!(info.period, 1);
        assert_eq!(info.onset, 1);
        // x^2/(1-x^2) has period 2, x^3+x^6 has period 3
        p = series_of(&[0, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(detect_period(&p).unwrap().period, 2);
        p = series_of(&[0, 0, 0, 1, 0, 0, 1]);
        let info = detect_period(&p).unwrap();
        assert_eq!(info.period, 3);
        assert_eq!(info.onset, 3);
        assert_eq!(info.support_sample, vec![3, 6]);
        // the zero series has no period
        assert!(matches!(
            detect_period(&TruncatedSeries::zero(16)),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn twelve_digit_rendering_rounds_to_nearest() {
        let r = BigRational::new(173525.into(), 204226.into());
        assert_eq!(decimal12(&r), "0.849671442422");
        assert_eq!(
            decimal12(&BigRational::from_integer(2.into())),
            "2.000000000000"
        );
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(decimal12(&third), "0.333333333333");
        let two_thirds = BigRational::new(2.into(), 3.into());
        assert_eq!(decimal12(&two_thirds), "0.666666666667");
    }

    #[test]
    fn partition_ratios_converge_to_one() {
        let p = partition_series(5000);
        let report = ratio_test(&p, 1, 5000).unwrap();
        assert_eq!(report.period, 1);
        assert_eq!(report.verdict, RatioVerdict::ConvergesToOne);
        let last = ratio_f64_of(&report.trend.last_exact);
        assert!((0.97..1.0).contains(&last), "last ratio {last}");
        assert!(report.trend.gap_shrinking);
        // the known sample point p(49)/p(50) = 173525/204226, reduced
        let sample = report.samples.iter().find(|s| s.degree == 50).unwrap();
        let expected = BigRational::new(173525.into(), 204226.into());
        assert_eq!(sample.exact, expected.to_string());
        assert_eq!(sample.exact, "15775/18566");
    }

    fn ratio_f64_of(exact: &str) -> f64 {
        let (n, d) = exact.split_once('/').unwrap();
        n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
    }

    #[test]
    fn forest_ratios_of_a_fast_class_diverge() {
        // forests over unrestricted trees: ratios settle near 0.338
        let system = corpus::all_trees();
        let series = evaluate_system(&system, 200).unwrap();
        let t = series
            .expr(&system, &system.lookup("AllTrees").unwrap())
            .unwrap();
        let forest = polya_exp_geq(&t, 1).unwrap();
        let report = ratio_test(&forest, 1, 200).unwrap();
        assert_eq!(report.verdict, RatioVerdict::Diverges);
        let last = ratio_f64_of(&report.trend.last_exact);
        assert!((0.3..0.4).contains(&last), "last ratio {last}");
    }

    #[test]
    fn short_windows_stay_inconclusive() {
        let p = partition_series(200);
        let report = ratio_test(&p, 1, 200).unwrap();
        // the gap is still around 0.09 here: too wide to converge, but
        // shrinking, so divergence is not claimed either
        assert_eq!(report.verdict, RatioVerdict::Inconclusive);
        let tiny = ratio_test(&p, 1, 9);
        assert_eq!(tiny.unwrap().verdict, RatioVerdict::Inconclusive);
        // a window with no sample at all is an error
        let sparse = series_of(&[0, 0, 0, 1]);
        assert!(matches!(
            ratio_test(&sparse, 1, 2),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn exact_one_ratios_converge() {
        // a(n) = 1 for all n: every ratio is exactly 1
        let ones = TruncatedSeries::from_coeffs(vec![BigRational::from_integer(1.into()); 2501]);
        let report = ratio_test(&ones, 1, 2500).unwrap();
        assert_eq!(report.verdict, RatioVerdict::ConvergesToOne);
        assert_eq!(report.trend.last_gap, 0.0);
        assert!(report.trend.monotone_tail);
        assert_eq!(report.trend.extrapolated_gap, 0.0);
    }

    #[test]
    fn density_and_schur_sampling() {
        let p = partition_series(120);
        // partitions containing a part of size 1 correspond to p(n-1)
        let shifted = {
            let mut coeffs = partition_numbers(119);
            coeffs.insert(0, 0.into());
            TruncatedSeries::from_coeffs(
                coeffs.into_iter().map(BigRational::from_integer).collect(),
            )
        };
        let samples = density(&shifted, &p, 1);
        assert_eq!(samples.len(), 120);
        let values: Vec<f64> = samples.iter().map(|s| ratio_f64_of(&s.exact)).collect();
        // log-concavity of partitions kicks in at degree 26
        assert!(
            values[25..].windows(2).all(|w| w[0] <= w[1]),
            "increasing toward 1"
        );
        // p(119)/p(120) is roughly 0.897
        assert!(values[119] > 0.85 && values[119] < 1.0);
        // b = a gives all ones, b = 0 gives all zeros
        let same = density(&p, &p, 1);
        assert!(same.iter().all(|s| s.exact == "1/1"));
        let zero = density(&TruncatedSeries::zero(120), &p, 1);
        assert!(zero.iter().all(|s| s.exact == "0/1"));
        // (1+x) * partitions: the quotient is 1 + p(n-1)/p(n), creeping
        // up toward 2; convergence is slow, so only the trend is pinned
        let one_plus_x = TruncatedSeries::one(120).add(&TruncatedSeries::x(120));
        let a = p.cauchy_mul(&one_plus_x);
        let samples = schur_ratio(&a, &p, 100, 120);
        let vals: Vec<f64> = samples.iter().map(|s| ratio_f64_of(&s.exact)).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let last = *vals.last().unwrap();
        assert!(last > 1.85 && last < 2.0, "ratio {last}");
    }

    #[test]
    fn coherence_on_slow_and_fast_systems() {
        let linear = corpus::linear();
        let expr = linear.lookup("Lin").unwrap();
        let report = check_main_theorem(&linear, &expr, 2400).unwrap();
        assert_eq!(report.structural, RadiusVerdict::RadiusOne);
        assert_eq!(
            report.ratio.as_ref().unwrap().verdict,
            RatioVerdict::ConvergesToOne
        );
        assert_eq!(report.coherence, Coherence::Agree);

        let all = corpus::all_trees();
        let expr = all.lookup("AllTrees").unwrap();
        let report = check_main_theorem(&all, &expr, 200).unwrap();
        assert_eq!(report.structural, RadiusVerdict::RadiusSubOne);
        assert_eq!(
            report.ratio.as_ref().unwrap().verdict,
            RatioVerdict::Diverges
        );
        assert_eq!(report.coherence, Coherence::Agree);

        // forest-valued expressions are refused
        let forest_expr = crate::dsl::parse_class_expr(&all, "mset(>=1, T1)").unwrap();
        assert!(check_main_theorem(&all, &forest_expr, 50).is_err());
    }

    #[test]
    fn coherence_with_period_two() {
        let system = corpus::even_chains();
        let expr = system.lookup("Even").unwrap();
        let report = check_main_theorem(&system, &expr, 2400).unwrap();
        let ratio = report.ratio.as_ref().unwrap();
        assert_eq!(ratio.period, 2);
        assert_eq!(ratio.verdict, RatioVerdict::ConvergesToOne);
        assert_eq!(report.coherence, Coherence::Agree);
    }
}
