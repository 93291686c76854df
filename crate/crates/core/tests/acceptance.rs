//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use patavoid::avoid::{count_avoiders, count_avoiders_naive, CountOptions};
use patavoid::contain::contains;
use patavoid::reproduce::{EXPERIMENT_SEED, EXPERIMENT_SHARES, FIB_EXAMPLE, TABLE1};
use patavoid::seq::{classify, detect_eventual_polynomial, Verdict};
use patavoid::survey::{
    compute_records, enumerate_symmetry_classes, polynomial_scan, random_experiment, wilf_clusters, wilf_from_records,
    Bucket, SurveyRecord, DEFAULT_SUBSET_BUDGET,
};
use patavoid::symmetry::Symmetry;
use patavoid::template::{
    certify_with, eval_doubled_split_recurrence, eval_single_split_recurrence, search_witness, TemplateFamily,
};
use patavoid::{PatternSet, Permutation};

// Pinned targets and tolerances.
const CATALAN_N: usize = 12;
const CATALAN_LAST: u64 = 208_012;
const SYMMETRY_CLASSES: usize = 1524;
const SUBSETS: usize = 10_626;
const WILF_HORIZON: usize = 10;
const WILF_MIN: usize = 1100;
const WILF_FALLBACK_MIN: usize = 1000;
const POLY_MAX_DEGREE: usize = 7;
const POLY_TOTAL_RANGE: (usize, usize) = (50, 75);
const CERT_BOUND: usize = 10;
const FAMILY_CHECK_N: usize = 9;
const SHARE_TOLERANCE_PP: f64 = 5.0;
const NON_POLY_RANGE_PCT: (f64, f64) = (1.0, 8.0);
const FIB_MIN_SHARE: f64 = 0.5;
const ORACLE_SETS: usize = 50;
const ORACLE_N: usize = 7;
const PROPERTY_SEED: u64 = 2024;

// Runtime limits, where one is stated.
const LIMIT_CATALAN: Duration = Duration::from_secs(10);
const LIMIT_TABLE: Duration = Duration::from_secs(60);
const LIMIT_CLASSES: Duration = Duration::from_secs(30);
const LIMIT_SINGLE_FAMILY: Duration = Duration::from_secs(60);
const LIMIT_TWO_FAMILY: Duration = Duration::from_secs(300);
const LIMIT_EXPERIMENT: Duration = Duration::from_secs(900);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail.push_str(&format!("; took {took:.1?}, limit {limit:?}"));
        }
    }
    (o, took)
}

fn set(s: &str) -> PatternSet {
    s.parse().unwrap()
}

fn ints(v: &[BigUint]) -> Vec<BigInt> {
    v.iter().cloned().map(BigInt::from).collect()
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn catalan() -> Outcome {
    let seq = count_avoiders(&set("132"), CATALAN_N).unwrap();
    let mut want = vec![BigUint::from(1u32)];
    for n in 0..CATALAN_N {
        let next = &want[n] * BigUint::from(2 * (2 * n + 1)) / BigUint::from(n + 2);
        want.push(next);
    }
    let ok = seq.counts == want && want[CATALAN_N] == BigUint::from(CATALAN_LAST);
    outcome(ok, format!("f(12) = {}", seq.counts[CATALAN_N]))
}

fn table1() -> Outcome {
    let mut bad = Vec::new();
    let mut degrees = Vec::new();
    for (patterns, counts, degree) in TABLE1 {
        let seq = count_avoiders(&set(patterns), 10).unwrap();
        let got: Vec<BigUint> = seq.from_one().to_vec();
        let want: Vec<BigUint> = counts.iter().map(|&c| BigUint::from(c)).collect();
        let fit = detect_eventual_polynomial(&ints(&got), 1, POLY_MAX_DEGREE).map(|f| f.degree);
        degrees.push(fit.map_or("-".to_string(), |d| d.to_string()));
        if got != want || fit != Some(degree) {
            bad.push(patterns);
        }
    }
    outcome(bad.is_empty(), format!("degrees {}; mismatches {bad:?}", degrees.join(",")))
}

fn classes() -> Outcome {
    let stubs = enumerate_symmetry_classes(4, 4, DEFAULT_SUBSET_BUDGET).unwrap();
    let total: usize = stubs.iter().map(|s| s.orbit).sum();
    outcome(
        stubs.len() == SYMMETRY_CLASSES && total == SUBSETS,
        format!("{} classes, orbit sizes sum to {total}", stubs.len()),
    )
}

fn wilf(records: &[SurveyRecord]) -> Outcome {
    let survey = wilf_from_records(records.to_vec(), CountOptions::default(), workers()).unwrap();
    let p = &survey.primary;
    // The reduced horizon is checked whether or not any class failed at the full one.
    let short = wilf_clusters(records, WILF_HORIZON - 1);
    let fallback = survey.fallback.as_ref().map_or(short.distinct, |f| f.distinct);
    let ok = p.horizon == WILF_HORIZON
        && p.failed.is_empty()
        && (WILF_MIN..=SYMMETRY_CLASSES).contains(&p.distinct)
        && fallback >= WILF_FALLBACK_MIN;
    outcome(
        ok,
        format!(
            "{} distinct at N = {} ({} failed); {} distinct at N = {}",
            p.distinct,
            p.horizon,
            p.failed.len(),
            fallback,
            WILF_HORIZON - 1
        ),
    )
}

fn polyscan(records: &[SurveyRecord]) -> Outcome {
    let hits = polynomial_scan(records, POLY_MAX_DEGREE).unwrap();
    let mut missing = Vec::new();
    for (patterns, _, degree) in TABLE1 {
        let class = set(patterns);
        if !hits.iter().any(|h| h.class == class && h.degree == degree) {
            missing.push(patterns);
        }
    }
    let total = hits.len();
    let ok = missing.is_empty() && (POLY_TOTAL_RANGE.0..=POLY_TOTAL_RANGE.1).contains(&total);
    let mut by_degree = [0usize; POLY_MAX_DEGREE + 1];
    for h in &hits {
        by_degree[h.degree] += 1;
    }
    outcome(
        ok,
        format!(
            "total {total} (want {}..={}), by degree 1..7 {:?}; table classes missing {missing:?}",
            POLY_TOTAL_RANGE.0,
            POLY_TOTAL_RANGE.1,
            &by_degree[1..]
        ),
    )
}

fn family_claim(templates: &str, patterns: &str, recurrence: Vec<BigUint>) -> Outcome {
    let family = TemplateFamily::new(templates.parse().unwrap());
    let patterns = set(patterns);
    let cert = certify_with(&family, &patterns).unwrap();
    let generated: Vec<BigUint> = (0..=FAMILY_CHECK_N).map(|n| BigUint::from(family.level(n).count())).collect();
    let q = count_avoiders(&patterns, FAMILY_CHECK_N).unwrap();
    let below = recurrence.iter().zip(&q.counts).all(|(r, q)| r <= q);
    let ok = cert.verified && cert.bound == CERT_BOUND && generated == recurrence && below;
    outcome(
        ok,
        format!(
            "verified {} at bound {}; sizes {:?}; bounded by avoiders {below}",
            cert.verified,
            cert.bound,
            recurrence.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        ),
    )
}

fn fib_like() -> Outcome {
    let terms: Vec<BigInt> = FIB_EXAMPLE.iter().map(|&t| BigInt::from(t)).collect();
    match classify(&terms, 0).verdict {
        Verdict::FibLike(fit) => outcome(
            fit.a == BigInt::from(0) && fit.b == BigInt::from(-5) && fit.threshold == 6,
            format!("a = {}, b = {}, threshold {}", fit.a, fit.b, fit.threshold),
        ),
        other => outcome(false, format!("{other:?}")),
    }
}

fn experiment() -> Outcome {
    let e = random_experiment(12, 4, 13, 820, EXPERIMENT_SEED, CountOptions::default(), workers()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (bucket, share) in EXPERIMENT_SHARES {
        let got = 100.0 * e.fraction(bucket);
        ok &= (got - share).abs() <= SHARE_TOLERANCE_PP;
        parts.push(format!("{bucket:?} {got:.1}% (ref {share}%)"));
    }
    let np = 100.0 * e.fraction(Bucket::NonPolynomial);
    ok &= np >= NON_POLY_RANGE_PCT.0 && np <= NON_POLY_RANGE_PCT.1;
    let n = e.count(Bucket::NonPolynomial);
    let fib = e.fib_like_non_polynomial;
    ok &= n > 0 && fib as f64 >= FIB_MIN_SHARE * n as f64;
    ok &= e.count(Bucket::Failed) == 0;
    parts.push(format!("non-polynomial {np:.1}%, Fibonacci-like {fib}/{n}"));
    outcome(ok, parts.join("; "))
}

fn random_set(rng: &mut ChaCha8Rng) -> PatternSet {
    let k = rng.gen_range(1..=4);
    let mut out = Vec::new();
    for _ in 0..k {
        let len = rng.gen_range(2..=5);
        let mut v: Vec<u8> = (1..=len).collect();
        v.shuffle(rng);
        out.push(Permutation::new(v).unwrap());
    }
    PatternSet::new(out)
}

fn oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(PROPERTY_SEED);
    let mut bad = Vec::new();
    for _ in 0..ORACLE_SETS {
        let s = random_set(&mut rng);
        if count_avoiders(&s, ORACLE_N).unwrap().counts != count_avoiders_naive(&s, ORACLE_N).unwrap().counts {
            bad.push(s.to_string());
        }
    }
    outcome(bad.is_empty(), format!("{ORACLE_SETS} sets at N = {ORACLE_N}; disagreements {bad:?}"))
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(PROPERTY_SEED + 1);
    let mut failures: Vec<String> = Vec::new();

    // Counts are invariant under the eight symmetries.
    for _ in 0..20 {
        let s = random_set(&mut rng);
        let base = count_avoiders(&s, 8).unwrap().counts;
        for g in Symmetry::ALL {
            if count_avoiders(&g.apply_set(&s), 8).unwrap().counts != base {
                failures.push(format!("symmetry {g} changes counts of {s}"));
            }
        }
    }

    // Group laws.
    for g in Symmetry::ALL {
        if g.compose(g.inverse_element()) != Symmetry::IDENTITY {
            failures.push(format!("{g} has no inverse"));
        }
        for h in Symmetry::ALL {
            for k in Symmetry::ALL {
                if g.compose(h).compose(k) != g.compose(h.compose(k)) {
                    failures.push(format!("composition not associative at {g},{h},{k}"));
                }
            }
        }
    }

    // Containment is transitive.
    for _ in 0..300 {
        let n = rng.gen_range(0..=8u8);
        let mut v: Vec<u8> = (1..=n).collect();
        v.shuffle(&mut rng);
        let pi = Permutation::new(v).unwrap();
        let sub = |p: &Permutation, rng: &mut ChaCha8Rng| {
            let keep: Vec<u8> = p.as_slice().iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            patavoid::flatten(&keep).unwrap()
        };
        let sigma = sub(&pi, &mut rng);
        let tau = sub(&sigma, &mut rng);
        if !(contains(&pi, &sigma) && contains(&sigma, &tau) && contains(&pi, &tau)) {
            failures.push(format!("transitivity fails for {pi}, {sigma}, {tau}"));
        }
    }

    // Polynomial round trip.
    for _ in 0..40 {
        let deg = rng.gen_range(0..=7usize);
        let mut coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-20..=20)).collect();
        if coeffs[deg] == 0 {
            coeffs[deg] = 1;
        }
        let terms: Vec<BigInt> = (1..=deg + 6)
            .map(|n| {
                let x = BigInt::from(n);
                coeffs.iter().rev().fold(BigInt::from(0), |acc, &c| acc * &x + c)
            })
            .collect();
        match detect_eventual_polynomial(&terms, 1, 7) {
            Some(fit) if fit.degree == deg => {
                let want: Vec<_> = coeffs.iter().map(|&c| num_rational::BigRational::from_integer(c.into())).collect();
                if fit.coefficients != want {
                    failures.push(format!("round trip of {coeffs:?} gave {:?}", fit.coefficients));
                }
            }
            other => failures.push(format!("degree {deg} polynomial {coeffs:?} classified as {other:?}")),
        }
    }

    // Certified families stay pattern-free past the bound.
    for (t, p) in [("45312:10101", "2143,2413,3142"), ("14253:10101,15243:10101", "2341,2413,2431,3241")] {
        let family = TemplateFamily::new(t.parse().unwrap());
        let patterns = set(p);
        let cert = certify_with(&family, &patterns).unwrap();
        if let Some(w) = search_witness(&family, &patterns, cert.bound + 3) {
            failures.push(format!("{t} has witness {} of {} beyond the bound", w.permutation, w.pattern));
        }
    }

    outcome(failures.is_empty(), format!("{} failures {:?}", failures.len(), failures))
}

fn main() {
    let mut results: Vec<(&str, Outcome, Duration)> = Vec::new();
    let mut run = |name: &'static str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
        let (o, took) = timed(limit, f);
        println!("{} {name}: {} [{took:.1?}]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o, took));
    };

    run("1 catalan", Some(LIMIT_CATALAN), &mut catalan);
    run("2 table", Some(LIMIT_TABLE), &mut table1);
    run("3 symmetry classes", Some(LIMIT_CLASSES), &mut classes);

    let start = Instant::now();
    let stubs = enumerate_symmetry_classes(4, 4, DEFAULT_SUBSET_BUDGET).unwrap();
    let records = compute_records(&stubs, WILF_HORIZON, CountOptions::default(), workers()).unwrap();
    println!("     survey of {} classes to N = {WILF_HORIZON} took {:.1?}", records.len(), start.elapsed());

    run("4 wilf lower bound", None, &mut || wilf(&records));
    run("5 polynomial scan", None, &mut || polyscan(&records));
    run("6 single template family", Some(LIMIT_SINGLE_FAMILY), &mut || {
        family_claim("45312:10101", "2143,2413,3142", eval_single_split_recurrence(FAMILY_CHECK_N).counts)
    });
    run("7 two template family", Some(LIMIT_TWO_FAMILY), &mut || {
        family_claim(
            "14253:10101,15243:10101",
            "2341,2413,2431,3241",
            eval_doubled_split_recurrence(FAMILY_CHECK_N).counts,
        )
    });
    run("8 fibonacci-like fit", None, &mut fib_like);
    run("9 random experiment", Some(LIMIT_EXPERIMENT), &mut experiment);
    run("10 oracle equivalence", None, &mut oracle);
    run("11 property suites", None, &mut properties);

    let failed: Vec<&str> = results.iter().filter(|(_, o, _)| !o.pass).map(|(n, _, _)| *n).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
