//! Classification of integer counting sequences.
//!
//! Sequences are slices of terms together with the index `offset` of their
//! first term, so thresholds are reported as indices `n` rather than slice
//! positions.
//!
//! Rules, in order of precedence:
//!
//! 1. **Eventually zero**: the sequence ends in at least three zeros.
//! 2. **Eventually polynomial** of degree `d`: some tail of at least `d + 3`
//!    terms has constant `d`-th finite differences. The smallest such `d` is
//!    reported, with the earliest threshold for that `d`.
//! 3. **Fibonacci-like**: from some threshold `n₀` on,
//!    `f(n) = f(n-1) + f(n-2) + a·n + b`. `a` and `b` are fitted at `n₀` and
//!    `n₀ + 1`, and at least five further terms must confirm them.
//! 4. Otherwise unclassified.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::avoid::CountSequence;

/// Zeros needed at the end of a sequence to call it eventually zero.
pub const ZERO_TAIL: usize = 3;
/// Terms beyond the degree needed to accept a polynomial fit.
pub const POLY_EXTRA_TERMS: usize = 3;
/// Confirmations needed beyond the two terms that fit a Fibonacci-like recurrence.
pub const FIB_CONFIRMATIONS: usize = 5;
/// Largest degree tried by [`classify`].
pub const DEFAULT_MAX_DEGREE: usize = 7;

/// A polynomial that matches the sequence from `threshold` on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFit {
    pub degree: usize,
    pub threshold: usize,
    /// Coefficients of `1, n, n², …` as exact fractions.
    #[serde(serialize_with = "ser_rationals", deserialize_with = "de_rationals")]
    pub coefficients: Vec<BigRational>,
}

impl PolyFit {
    pub fn eval(&self, n: usize) -> BigRational {
        let x = BigRational::from_integer(BigInt::from(n));
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * &x + c)
    }
}

/// `f(n) = f(n-1) + f(n-2) + a·n + b` for all `n >= threshold`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibFit {
    #[serde(serialize_with = "crate::bigserde::ser_int", deserialize_with = "crate::bigserde::de_int")]
    pub a: BigInt,
    #[serde(serialize_with = "crate::bigserde::ser_int", deserialize_with = "crate::bigserde::de_int")]
    pub b: BigInt,
    pub threshold: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    EventuallyZero { threshold: usize },
    EventualPolynomial(PolyFit),
    FibLike(FibFit),
    Unclassified,
}

impl Verdict {
    pub fn degree(&self) -> Option<usize> {
        match self {
            Verdict::EventualPolynomial(p) => Some(p.degree),
            _ => None,
        }
    }
}

/// A verdict plus the number of trailing terms that support it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub evidence: usize,
}

fn ser_rationals<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

fn de_rationals<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

fn differences(v: &[BigInt]) -> Vec<BigInt> {
    v.windows(2).map(|w| &w[1] - &w[0]).collect()
}

fn all_equal(v: &[BigInt]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// Finds the smallest degree `d <= max_degree`, then the earliest start,
/// such that the tail from that start has at least `d + 3` terms and
/// constant `d`-th differences.
pub fn detect_eventual_polynomial(terms: &[BigInt], offset: usize, max_degree: usize) -> Option<PolyFit> {
    for degree in 0..=max_degree {
        for start in 0..terms.len() {
            let tail = &terms[start..];
            if tail.len() < degree + POLY_EXTRA_TERMS {
                break;
            }
            let mut diffs = tail.to_vec();
            for _ in 0..degree {
                diffs = differences(&diffs);
            }
            if all_equal(&diffs) {
                return Some(PolyFit {
                    degree,
                    threshold: offset + start,
                    coefficients: interpolate(&tail[..=degree], offset + start),
                });
            }
        }
    }
    None
}

/// Monomial coefficients of the polynomial through `values` at
/// `n = first, first + 1, …`, by Newton forward differences.
fn interpolate(values: &[BigInt], first: usize) -> Vec<BigRational> {
    let mut leading = Vec::with_capacity(values.len());
    let mut row = values.to_vec();
    while !row.is_empty() {
        leading.push(row[0].clone());
        row = differences(&row);
    }
    let mut result = vec![BigRational::zero(); values.len()];
    // basis = (n - first)(n - first - 1)…(n - first - k + 1) / k!
    let mut basis = vec![BigRational::one()];
    for (k, delta) in leading.iter().enumerate() {
        for (i, c) in basis.iter().enumerate() {
            result[i] += c * BigRational::from_integer(delta.clone());
        }
        let root = BigRational::from_integer(BigInt::from(first + k));
        let scale = BigRational::from_integer(BigInt::from(k + 1));
        let mut next = vec![BigRational::zero(); basis.len() + 1];
        for (i, c) in basis.iter().enumerate() {
            next[i + 1] += c / &scale;
            next[i] -= c * &root / &scale;
        }
        basis = next;
    }
    while result.len() > 1 && result.last().is_some_and(Zero::is_zero) {
        result.pop();
    }
    result
}

/// Fits `f(n) = f(n-1) + f(n-2) + a·n + b` at the earliest threshold that
/// is confirmed by every later term (at least five beyond the fitted ones).
///
/// Near the end of the sequence, where a slope can no longer be confirmed,
/// a constant excess (`a = 0`, one fitted term) is still accepted.
pub fn detect_fib_like(terms: &[BigInt], offset: usize) -> Option<FibFit> {
    if terms.len() < 2 + 1 + FIB_CONFIRMATIONS {
        return None;
    }
    // excess[i] = f(i) - f(i-1) - f(i-2), for i >= 2
    let excess: Vec<BigInt> = (2..terms.len())
        .map(|i| &terms[i] - &terms[i - 1] - &terms[i - 2])
        .collect();
    let index = |k: usize| BigInt::from(offset + k + 2);
    for k in 0..excess.len() {
        let left = excess.len() - k;
        if left >= 2 + FIB_CONFIRMATIONS {
            let a = &excess[k + 1] - &excess[k];
            let b = &excess[k] - &a * index(k);
            if (k + 2..excess.len()).all(|m| excess[m] == &a * index(m) + &b) {
                return Some(FibFit {
                    a,
                    b,
                    threshold: offset + k + 2,
                });
            }
        } else if left > FIB_CONFIRMATIONS {
            // Too short to fit a slope; a constant excess has one parameter.
            if excess[k + 1..].iter().all(|e| *e == excess[k]) {
                return Some(FibFit {
                    a: BigInt::zero(),
                    b: excess[k].clone(),
                    threshold: offset + k + 2,
                });
            }
        } else {
            break;
        }
    }
    None
}

/// Classifies with the default maximum degree.
pub fn classify(terms: &[BigInt], offset: usize) -> ClassificationReport {
    classify_with(terms, offset, DEFAULT_MAX_DEGREE)
}

pub fn classify_with(terms: &[BigInt], offset: usize, max_degree: usize) -> ClassificationReport {
    let zeros = terms.iter().rev().take_while(|t| t.is_zero()).count();
    if zeros >= ZERO_TAIL {
        return ClassificationReport {
            verdict: Verdict::EventuallyZero {
                threshold: offset + terms.len() - zeros,
            },
            evidence: zeros,
        };
    }
    if let Some(fit) = detect_eventual_polynomial(terms, offset, max_degree) {
        let evidence = offset + terms.len() - fit.threshold;
        return ClassificationReport {
            verdict: Verdict::EventualPolynomial(fit),
            evidence,
        };
    }
    if let Some(fit) = detect_fib_like(terms, offset) {
        let fitted = if fit.a.is_zero() { 1 } else { 2 };
        let evidence = offset + terms.len() - fit.threshold - fitted;
        return ClassificationReport {
            verdict: Verdict::FibLike(fit),
            evidence,
        };
    }
    ClassificationReport {
        verdict: Verdict::Unclassified,
        evidence: 0,
    }
}

/// Classifies the terms `f(from), …, f(N)` of an avoidance counting sequence.
///
/// A permutation that avoids a set also has every shorter pattern of itself
/// avoiding it, so once a count with `n >= 1` is zero all later counts are
/// zero. A single trailing zero therefore already settles the verdict.
pub fn classify_counts(seq: &CountSequence, from: usize) -> ClassificationReport {
    let terms: Vec<BigInt> = seq.counts[from.min(seq.counts.len())..]
        .iter()
        .map(|c| BigInt::from(c.clone()))
        .collect();
    if seq.patterns().is_some() {
        if let Some(first_zero) = seq.counts.iter().enumerate().skip(1).position(|(_, c)| c.is_zero()) {
            let first_zero = first_zero + 1;
            if first_zero < seq.counts.len() {
                let threshold = first_zero.max(from);
                return ClassificationReport {
                    verdict: Verdict::EventuallyZero { threshold },
                    evidence: seq.counts.len() - threshold,
                };
            }
        }
    }
    classify(&terms, from)
}

/// Convenience conversion for callers holding unsigned counts.
pub fn to_signed(v: &[BigUint]) -> Vec<BigInt> {
    v.iter().map(|x| BigInt::from(x.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avoid::Source;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn table_row_degree_four() {
        let s = ints(&[1, 2, 6, 20, 58, 141, 297, 561, 975, 1588]);
        let fit = detect_eventual_polynomial(&s, 1, 7).unwrap();
        assert_eq!(fit.degree, 4);
        for (i, v) in s.iter().enumerate() {
            assert_eq!(fit.eval(i + 1), BigRational::from_integer(v.clone()));
        }
    }

    #[test]
    fn constant_sequence() {
        let fit = detect_eventual_polynomial(&ints(&[5; 7]), 0, 3).unwrap();
        assert_eq!((fit.degree, fit.threshold), (0, 0));
        assert_eq!(fit.coefficients, vec![rat(5, 1)]);
    }

    #[test]
    fn interpolation_of_known_polynomial() {
        // n(n+1)/2 sampled at 1..8
        let s: Vec<BigInt> = (1..=8).map(|n| BigInt::from(n * (n + 1) / 2)).collect();
        let fit = detect_eventual_polynomial(&s, 1, 5).unwrap();
        assert_eq!(fit.degree, 2);
        assert_eq!(fit.coefficients, vec![rat(0, 1), rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn zero_takes_precedence() {
        let r = classify(&ints(&[1, 1, 0, 0, 0, 0, 0]), 0);
        assert_eq!(r.verdict, Verdict::EventuallyZero { threshold: 2 });
        assert_eq!(r.evidence, 5);
        let r = classify(&ints(&[1, 2, 2, 0, 0, 0, 0]), 0);
        assert!(matches!(r.verdict, Verdict::EventuallyZero { .. }));
    }

    #[test]
    fn arithmetic_tail_is_linear() {
        let r = classify(&ints(&[1, 2, 4, 6, 8, 10, 12, 14]), 0);
        assert_eq!(r.verdict.degree(), Some(1));
        match r.verdict {
            Verdict::EventualPolynomial(p) => assert_eq!(p.threshold, 1),
            _ => unreachable!(),
        }
    }

    #[test]
    fn observed_fib_like_sequence() {
        let s = ints(&[1, 2, 6, 12, 18, 26, 39, 60, 94, 149, 238, 382, 615]);
        let fit = detect_fib_like(&s, 0).unwrap();
        assert_eq!((fit.a, fit.b, fit.threshold), (0.into(), (-5).into(), 6));
        let r = classify(&s, 0);
        assert!(matches!(r.verdict, Verdict::FibLike(_)));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["verdict"], "fib_like");
        assert_eq!(json["a"], 0);
        assert_eq!(json["b"], -5);
        assert_eq!(json["threshold"], 6);
    }

    #[test]
    fn pure_fibonacci() {
        let s = ints(&[1, 1, 2, 3, 5, 8, 13, 21, 34]);
        let one_based = detect_fib_like(&s, 1).unwrap();
        assert_eq!((one_based.a, one_based.b, one_based.threshold), (0.into(), 0.into(), 3));
        assert_eq!(detect_fib_like(&s, 0).unwrap().threshold, 2);
        // One fitted term plus five confirmations is the shortest accepted window.
        assert!(detect_fib_like(&s[..8], 1).is_some());
        assert_eq!(detect_fib_like(&s[..7], 1), None);
    }

    #[test]
    fn late_constant_excess() {
        // Excess is -1 at n = 7 and 0 afterwards: too short to confirm a slope.
        let s = ints(&[1, 2, 6, 12, 14, 21, 34, 55, 89, 144, 233, 377, 610]);
        let fit = detect_fib_like(&s, 1).unwrap();
        assert_eq!((fit.a, fit.b, fit.threshold), (0.into(), 0.into(), 8));
        assert_eq!(classify(&s, 1).evidence, 5);
        let s = ints(&[1, 2, 6, 12, 14, 20, 32, 53, 84, 136, 220, 356, 576]);
        assert_eq!(detect_fib_like(&s, 1), None);
    }

    #[test]
    fn quadratic_is_not_fib_like() {
        let s: Vec<BigInt> = (1..=13).map(|n| BigInt::from(3 * n * n - 2 * n + 7)).collect();
        assert_eq!(detect_fib_like(&s, 1), None);
        assert_eq!(classify(&s, 1).verdict.degree(), Some(2));
    }

    #[test]
    fn unclassified_growth() {
        let s: Vec<BigInt> = (0..12).map(|n| BigInt::from(3).pow(n)).collect();
        assert_eq!(classify(&s, 0).verdict, Verdict::Unclassified);
    }

    #[test]
    fn single_trailing_zero_settles_avoidance_counts() {
        let seq = CountSequence::new(
            Source::Avoiders("1234,4321".parse().unwrap()),
            [1u32, 1, 2, 6, 22, 86, 306, 882, 1764, 1764, 0].map(BigUint::from).to_vec(),
        );
        let r = classify_counts(&seq, 1);
        assert_eq!(r.verdict, Verdict::EventuallyZero { threshold: 10 });
        // Without provenance the generic rule applies.
        let given = CountSequence::new(Source::Given, seq.counts.clone());
        assert!(!matches!(classify_counts(&given, 1).verdict, Verdict::EventuallyZero { .. }));
    }

    #[test]
    fn report_json_round_trips() {
        let s = ints(&[1, 2, 6, 20, 58, 141, 297, 561, 975, 1588]);
        let r = classify(&s, 1);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with(r#"{"verdict":"eventual_polynomial","degree":4,"threshold":1,"coefficients":["#));
        assert_eq!(serde_json::from_str::<ClassificationReport>(&json).unwrap(), r);
        let u = ClassificationReport { verdict: Verdict::Unclassified, evidence: 0 };
        assert_eq!(serde_json::to_string(&u).unwrap(), r#"{"verdict":"unclassified","evidence":0}"#);
    }

    fn poly_values(coeffs: &[i64], ns: impl Iterator<Item = i64>) -> Vec<BigInt> {
        ns.map(|n| coeffs.iter().rev().fold(BigInt::zero(), |acc, &c| acc * n + c)).collect()
    }

    fn poly_strategy() -> impl Strategy<Value = Vec<i64>> {
        (0usize..=7).prop_flat_map(|deg| {
            (proptest::collection::vec(-20i64..=20, deg), (1i64..=20).prop_flat_map(|m| prop_oneof![Just(m), Just(-m)]))
                .prop_map(|(mut low, lead)| {
                    low.push(lead);
                    low
                })
        })
    }

    proptest! {
        #[test]
        fn polynomial_round_trip(coeffs in poly_strategy()) {
            let deg = coeffs.len() - 1;
            let s = poly_values(&coeffs, 1..=(deg as i64 + 6));
            let r = classify(&s, 1);
            match r.verdict {
                Verdict::EventualPolynomial(fit) => {
                    prop_assert_eq!(fit.degree, deg);
                    let expected: Vec<BigRational> = coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect();
                    prop_assert_eq!(fit.coefficients, expected);
                }
                other => prop_assert!(false, "got {:?}", other),
            }
        }

        #[test]
        fn shifted_polynomial_keeps_degree(coeffs in poly_strategy(), k in 0usize..=3, junk in proptest::collection::vec(-1000i64..1000, 3)) {
            let deg = coeffs.len() - 1;
            let mut s = poly_values(&coeffs, 1..=(deg as i64 + 6 + k as i64));
            for i in 0..k {
                s[i] += junk[i] * 7 + 1_000_003;
            }
            let fit = detect_eventual_polynomial(&s, 1, 7).unwrap();
            prop_assert_eq!(fit.degree, deg);
            prop_assert!(fit.threshold <= k + 1);
        }

        #[test]
        fn degree_is_minimal(coeffs in poly_strategy(), extra in 0usize..4) {
            let deg = coeffs.len() - 1;
            let s = poly_values(&coeffs, 1..=(deg as i64 + 3 + extra as i64));
            let fit = detect_eventual_polynomial(&s, 1, 7).unwrap();
            prop_assert!(fit.degree <= deg);
        }

        #[test]
        fn fib_like_recovers_parameters(a in -10i64..=10, b in -10i64..=10, f0 in -50i64..50, f1 in -50i64..50, len in 9usize..16, offset in 0usize..3) {
            let mut s = vec![BigInt::from(f0), BigInt::from(f1)];
            for i in 2..len {
                let n = (offset + i) as i64;
                let next = &s[i - 1] + &s[i - 2] + a * n + b;
                s.push(next);
            }
            let fit = detect_fib_like(&s, offset).unwrap();
            prop_assert_eq!(fit.a, BigInt::from(a));
            prop_assert_eq!(fit.b, BigInt::from(b));
            prop_assert_eq!(fit.threshold, offset + 2);
        }
    }
}
