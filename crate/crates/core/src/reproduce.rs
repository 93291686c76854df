//! Named, runnable checks of the headline results.
//!
//! Each claim runs one computation and compares it to the reference value,
//! producing a [`ClaimReport`] with expected and actual values side by side.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::avoid::{count_avoiders, CountOptions};
use crate::error::{Error, Result};
use crate::perm::PatternSet;
use crate::seq::{classify, detect_eventual_polynomial, Verdict};
use crate::survey::{enumerate_symmetry_classes, random_experiment, wilf_survey, Bucket, DEFAULT_SUBSET_BUDGET};
use crate::template::{certify_with, eval_doubled_split_recurrence, eval_single_split_recurrence, TemplateFamily};

/// Recognized claim ids, in the order they are listed to users.
pub const CLAIMS: [&str; 8] = [
    "table1",
    "sym1524",
    "wilf1100",
    "prop4",
    "prop7",
    "catalan",
    "fiblike",
    "experiment820",
];

/// Pattern sets with their counts for `n = 1..=10` and polynomial degree.
pub const TABLE1: [(&str, [u64; 10], usize); 6] = [
    ("1234,1243,1342,4231", [1, 2, 6, 20, 64, 187, 492, 1170, 2543, 5116], 6),
    ("1234,1243,1432,3412", [1, 2, 6, 20, 59, 148, 324, 638, 1157, 1966], 5),
    ("1234,1243,2341,4231", [1, 2, 6, 20, 64, 184, 469, 1072, 2235, 4318], 6),
    ("1234,1243,3241,3412", [1, 2, 6, 20, 58, 141, 297, 561, 975, 1588], 4),
    ("1234,1324,2413,4231", [1, 2, 6, 20, 60, 159, 379, 827, 1675, 3184], 6),
    ("1234,1342,1423,3421", [1, 2, 6, 20, 64, 182, 459, 1045, 2187, 4270], 7),
];

/// The Fibonacci-like sequence from the random experiment, indexed from 0.
pub const FIB_EXAMPLE: [i64; 13] = [1, 2, 6, 12, 18, 26, 39, 60, 94, 149, 238, 382, 615];

/// Reference bucket shares (percent) for 820 random 12-sets, and the allowed deviation.
pub const EXPERIMENT_SHARES: [(Bucket, f64); 4] = [
    (Bucket::Zero, 23.3),
    (Bucket::Constant, 32.6),
    (Bucket::Linear, 31.5),
    (Bucket::Quadratic, 8.0),
];
pub const EXPERIMENT_TOLERANCE: f64 = 5.0;
pub const EXPERIMENT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.claim, if self.passed { "pass" } else { "FAIL" })?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {}: expected {}, got {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.expected,
                c.actual
            )?;
        }
        Ok(())
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, expected: impl fmt::Display, actual: impl fmt::Display, passed: bool) {
        self.0.push(Check {
            name: name.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            passed,
        });
    }

    fn eq<T: PartialEq + fmt::Display>(&mut self, name: impl Into<String>, expected: T, actual: T) {
        let ok = expected == actual;
        self.push(name, expected, actual, ok);
    }

    fn report(self, claim: &str) -> ClaimReport {
        ClaimReport {
            claim: claim.to_string(),
            passed: self.0.iter().all(|c| c.passed),
            checks: self.0,
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn set(s: &str) -> PatternSet {
    s.parse().expect("built-in pattern set")
}

fn catalan(max_n: usize) -> Vec<BigUint> {
    let mut c = vec![BigUint::from(1u32)];
    for n in 0..max_n {
        let next = &c[n] * BigUint::from(2 * (2 * n + 1)) / BigUint::from(n + 2);
        c.push(next);
    }
    c
}

/// Runs one claim. `workers` sizes the pool for the survey-scale claims.
pub fn reproduce(claim: &str, workers: usize) -> Result<ClaimReport> {
    let options = CountOptions::default();
    let mut checks = Checks(Vec::new());
    match claim {
        "table1" => {
            for (patterns, counts, degree) in TABLE1 {
                let seq = count_avoiders(&set(patterns), 10)?;
                let got: Vec<BigUint> = seq.from_one().to_vec();
                let want: Vec<BigUint> = counts.iter().map(|&c| BigUint::from(c)).collect();
                checks.eq(format!("{{{patterns}}} counts"), join(&want), join(&got));
                let terms: Vec<BigInt> = got.into_iter().map(BigInt::from).collect();
                let fit = detect_eventual_polynomial(&terms, 1, 7).map(|f| f.degree.to_string());
                checks.eq(
                    format!("{{{patterns}}} degree"),
                    degree.to_string(),
                    fit.unwrap_or_else(|| "none".into()),
                );
            }
        }
        "sym1524" => {
            let classes = enumerate_symmetry_classes(4, 4, DEFAULT_SUBSET_BUDGET)?;
            checks.eq("symmetry classes of 4-subsets of S_4", 1524, classes.len());
            checks.eq("orbit sizes sum", 10626, classes.iter().map(|c| c.orbit).sum::<usize>());
        }
        "wilf1100" => {
            let stubs = enumerate_symmetry_classes(4, 4, DEFAULT_SUBSET_BUDGET)?;
            let survey = wilf_survey(&stubs, 10, options, workers)?;
            let p = &survey.primary;
            checks.push(
                "distinct fingerprints at horizon 10",
                ">= 1100",
                p.distinct,
                p.distinct >= 1100 && p.distinct <= 1524,
            );
            checks.eq("classes not counted to horizon 10", 0, p.failed.len());
            if let Some(fb) = &survey.fallback {
                checks.push("distinct fingerprints at horizon 9", ">= 1000", fb.distinct, fb.distinct >= 1000);
            }
        }
        "prop4" | "prop7" => {
            let (templates, patterns, rec) = if claim == "prop4" {
                ("45312:10101", "2143,2413,3142", eval_single_split_recurrence(9))
            } else {
                ("14253:10101,15243:10101", "2341,2413,2431,3241", eval_doubled_split_recurrence(9))
            };
            let family = TemplateFamily::new(templates.parse()?);
            let patterns = set(patterns);
            let cert = certify_with(&family, &patterns)?;
            checks.eq("certification bound", 10, cert.bound);
            checks.eq("verified", true, cert.verified);
            let generated: Vec<usize> = (0..=9).map(|n| family.level(n).count()).collect();
            let recurrence: Vec<BigUint> = rec.counts.clone();
            let generated_big: Vec<BigUint> = generated.iter().map(|&c| BigUint::from(c)).collect();
            checks.eq("family sizes n = 0..9 (recurrence vs generation)", join(&recurrence), join(&generated_big));
            let q = count_avoiders(&patterns, 9)?;
            let below = recurrence.iter().zip(&q.counts).all(|(r, q)| r <= q);
            checks.push("family size <= avoider count, n = 0..9", join(&q.counts), join(&recurrence), below);
        }
        "catalan" => {
            let seq = count_avoiders(&set("132"), 12)?;
            checks.eq("132-avoiders n = 0..12", join(&catalan(12)), join(&seq.counts));
        }
        "fiblike" => {
            let terms: Vec<BigInt> = FIB_EXAMPLE.iter().map(|&t| BigInt::from(t)).collect();
            let got = match classify(&terms, 0).verdict {
                Verdict::FibLike(fit) => format!("a={} b={} threshold={}", fit.a, fit.b, fit.threshold),
                other => format!("{other:?}"),
            };
            checks.eq("f(n) = f(n-1) + f(n-2) + a*n + b", "a=0 b=-5 threshold=6".to_string(), got);
        }
        "experiment820" => {
            let e = random_experiment(12, 4, 13, 820, EXPERIMENT_SEED, options, workers)?;
            for (bucket, share) in EXPERIMENT_SHARES {
                let got = 100.0 * e.fraction(bucket);
                checks.push(
                    format!("{bucket:?} share (%)"),
                    format!("{share} +/- {EXPERIMENT_TOLERANCE}"),
                    format!("{got:.1}"),
                    (got - share).abs() <= EXPERIMENT_TOLERANCE,
                );
            }
            let np = 100.0 * e.fraction(Bucket::NonPolynomial);
            checks.push("non-polynomial share (%)", "in [1, 8]", format!("{np:.1}"), (1.0..=8.0).contains(&np));
            let n = e.count(Bucket::NonPolynomial);
            let fib = e.fib_like_non_polynomial;
            checks.push(
                "Fibonacci-like among non-polynomial",
                ">= 50%",
                format!("{fib}/{n}"),
                n > 0 && 2 * fib >= n,
            );
            checks.eq("failed trials", 0, e.count(Bucket::Failed));
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown claim `{claim}`; available: {}",
                CLAIMS.join(", ")
            )))
        }
    }
    Ok(checks.report(claim))
}
