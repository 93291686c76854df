//! Surveys over families of pattern sets.
//!
//! - [`enumerate_symmetry_classes`] lists every `k`-subset of `S_m` up to the
//!   eight symmetries.
//! - [`compute_records`] counts avoiders for each class representative.
//! - [`wilf_survey`] groups records by their counting prefix. Equal prefixes
//!   are necessary for Wilf equivalence but not sufficient, so the number of
//!   distinct prefixes is a lower bound on the number of Wilf classes.
//! - [`polynomial_scan`] picks out classes whose counts look polynomial.
//! - [`random_experiment`] samples random pattern sets and tallies how their
//!   counting sequences behave.
//!
//! Parallel work goes through a rayon pool of the requested size; results
//! are always reassembled in a fixed order, so output does not depend on the
//! number of workers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avoid::{AvoiderTree, CountOptions, CountSequence, Source};
use crate::error::{Error, Result};
use crate::perm::{PatternSet, Permutation};
use crate::seq::{classify_counts, detect_eventual_polynomial, detect_fib_like, ClassificationReport, Verdict};
use crate::symmetry::canonicalize_set;

/// Default cap on the number of subsets [`enumerate_symmetry_classes`] will visit.
pub const DEFAULT_SUBSET_BUDGET: u64 = 50_000_000;

/// One symmetry class: its canonical representative and how many sets it contains.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassStub {
    pub class: PatternSet,
    pub orbit: usize,
}

/// A symmetry class with its counts for `n = 1..=N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub class: PatternSet,
    pub orbit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_counts")]
    pub counts: Option<Vec<BigUint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ClassificationReport>,
    /// Set when counting failed, e.g. on an exhausted node budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

mod opt_counts {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "crate::bigserde::uint_vec")] Vec<BigUint>);

    pub(super) fn serialize<S: Serializer>(v: &Option<Vec<BigUint>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => Wrap(v.clone()).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub(super) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigUint>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl SurveyRecord {
    /// Counts the class up to `max_n` and classifies the result.
    pub fn compute(stub: &ClassStub, max_n: usize, options: CountOptions) -> Self {
        match AvoiderTree::new(&stub.class, options).count(max_n) {
            Ok(seq) => {
                let verdict = classify_counts(&seq, 1);
                SurveyRecord {
                    class: stub.class.clone(),
                    orbit: stub.orbit,
                    counts: Some(seq.from_one().to_vec()),
                    verdict: Some(verdict),
                    error: None,
                }
            }
            Err(e) => SurveyRecord {
                class: stub.class.clone(),
                orbit: stub.orbit,
                counts: None,
                verdict: None,
                error: Some(e.to_string()),
            },
        }
    }

    /// Counts for `n = 0..=N` (with `f(0) = 1`), if available.
    pub fn count_sequence(&self) -> Option<CountSequence> {
        let counts = self.counts.as_ref()?;
        let mut all = vec![BigUint::from(1u32)];
        all.extend(counts.iter().cloned());
        Some(CountSequence::new(Source::Avoiders(self.class.clone()), all))
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Visits every `k`-subset of `0..n` as increasing index lists.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every `num_patterns`-subset of `S_{pattern_length}`, grouped into symmetry
/// classes. Classes come back sorted by representative; orbit sizes sum to
/// the number of subsets.
pub fn enumerate_symmetry_classes(num_patterns: usize, pattern_length: usize, subset_budget: u64) -> Result<Vec<ClassStub>> {
    if pattern_length > 8 {
        return Err(Error::InvalidInput(format!("pattern length {pattern_length} is too large to enumerate")));
    }
    let pool: Vec<Permutation> = Permutation::all(pattern_length).collect();
    let total = binomial(pool.len() as u64, num_patterns as u64).unwrap_or(u64::MAX);
    if total > subset_budget {
        return Err(Error::BudgetExceeded {
            budget: subset_budget,
            length: pattern_length,
        });
    }
    let mut classes: BTreeMap<PatternSet, usize> = BTreeMap::new();
    for_each_subset(pool.len(), num_patterns, |idx| {
        let set = PatternSet::new(idx.iter().map(|&i| pool[i].clone()));
        *classes.entry(canonicalize_set(&set)).or_default() += 1;
    });
    Ok(classes
        .into_iter()
        .map(|(class, orbit)| ClassStub { class, orbit })
        .collect())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

/// Counts every class in parallel. Records come back in the order of `stubs`.
pub fn compute_records(stubs: &[ClassStub], max_n: usize, options: CountOptions, workers: usize) -> Result<Vec<SurveyRecord>> {
    compute_records_streaming(stubs, max_n, options, workers, |_| Ok(()))
}

/// As [`compute_records`], also handing each record to `sink` as soon as it
/// is done (in completion order).
pub fn compute_records_streaming(
    stubs: &[ClassStub],
    max_n: usize,
    options: CountOptions,
    workers: usize,
    sink: impl Fn(&SurveyRecord) -> Result<()> + Sync,
) -> Result<Vec<SurveyRecord>> {
    pool(workers)?.install(|| {
        stubs
            .par_iter()
            .map(|stub| {
                let record = SurveyRecord::compute(stub, max_n, options);
                sink(&record)?;
                Ok(record)
            })
            .collect()
    })
}

/// Records sharing one counting prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    #[serde(with = "crate::bigserde::uint_vec")]
    pub fingerprint: Vec<BigUint>,
    pub members: Vec<PatternSet>,
}

/// Distinct counting prefixes at a horizon: a lower bound on Wilf classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WilfReport {
    pub horizon: usize,
    pub records: usize,
    pub distinct: usize,
    /// Classes that could not be counted to the horizon.
    pub failed: Vec<PatternSet>,
    pub clusters: Vec<Cluster>,
}

/// Groups records by `(f(1), …, f(horizon))`. Records with fewer terms are
/// listed as failed.
pub fn wilf_clusters(records: &[SurveyRecord], horizon: usize) -> WilfReport {
    let mut groups: BTreeMap<Vec<BigUint>, Vec<PatternSet>> = BTreeMap::new();
    let mut failed = Vec::new();
    for r in records {
        match &r.counts {
            Some(c) if c.len() >= horizon => groups.entry(c[..horizon].to_vec()).or_default().push(r.class.clone()),
            _ => failed.push(r.class.clone()),
        }
    }
    let clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(fingerprint, mut members)| {
            members.sort();
            Cluster { fingerprint, members }
        })
        .collect();
    failed.sort();
    WilfReport {
        horizon,
        records: records.len(),
        distinct: clusters.len(),
        failed,
        clusters,
    }
}

/// Wilf clustering at `horizon`, plus a clustering one step shorter when
/// some classes could not be counted that far.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WilfSurvey {
    pub primary: WilfReport,
    pub fallback: Option<WilfReport>,
}

/// Counts each class to `horizon` and clusters by fingerprint. Budget
/// failures are retried one step shorter and reported in the fallback.
pub fn wilf_survey(stubs: &[ClassStub], horizon: usize, options: CountOptions, workers: usize) -> Result<WilfSurvey> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    let records = compute_records(stubs, horizon, options, workers)?;
    wilf_from_records(records, options, workers)
}

/// Clusters existing records; failed ones are recounted one step shorter.
pub fn wilf_from_records(records: Vec<SurveyRecord>, options: CountOptions, workers: usize) -> Result<WilfSurvey> {
    let horizon = records
        .iter()
        .filter_map(|r| r.counts.as_ref().map(Vec::len))
        .max()
        .unwrap_or(0);
    let primary = wilf_clusters(&records, horizon);
    let fallback = if !primary.failed.is_empty() && horizon > 1 {
        let short = horizon - 1;
        let retry: Vec<ClassStub> = records
            .iter()
            .filter(|r| r.counts.as_ref().is_none_or(|c| c.len() < short))
            .map(|r| ClassStub { class: r.class.clone(), orbit: r.orbit })
            .collect();
        let mut redone: BTreeMap<PatternSet, SurveyRecord> = compute_records(&retry, short, options, workers)?
            .into_iter()
            .map(|r| (r.class.clone(), r))
            .collect();
        let merged: Vec<SurveyRecord> = records
            .into_iter()
            .map(|r| redone.remove(&r.class).unwrap_or(r))
            .collect();
        Some(wilf_clusters(&merged, short))
    } else {
        None
    };
    Ok(WilfSurvey { primary, fallback })
}

/// A class whose counts appear polynomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PolyClass {
    pub degree: usize,
    pub class: PatternSet,
    pub threshold: usize,
}

/// Classes whose counts `f(1..N)` fit a polynomial of degree `1..=max_degree`,
/// sorted by degree then class. Requires `N >= max_degree + 3`, the fewest
/// terms that can confirm a degree-`max_degree` fit.
pub fn polynomial_scan(records: &[SurveyRecord], max_degree: usize) -> Result<Vec<PolyClass>> {
    let mut out = Vec::new();
    for r in records {
        let Some(counts) = &r.counts else { continue };
        if counts.len() < max_degree + crate::seq::POLY_EXTRA_TERMS {
            return Err(Error::InvalidInput(format!(
                "{} has {} terms; a degree-{max_degree} scan needs at least {}",
                r.class,
                counts.len(),
                max_degree + crate::seq::POLY_EXTRA_TERMS
            )));
        }
        if counts.last().is_some_and(Zero::is_zero) {
            continue;
        }
        let terms: Vec<BigInt> = counts.iter().map(|c| BigInt::from(c.clone())).collect();
        if let Some(fit) = detect_eventual_polynomial(&terms, 1, max_degree) {
            if fit.degree >= 1 {
                out.push(PolyClass {
                    degree: fit.degree,
                    class: r.class.clone(),
                    threshold: fit.threshold,
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// How a sampled counting sequence behaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Zero,
    Constant,
    Linear,
    Quadratic,
    Cubic,
    HigherPoly,
    NonPolynomial,
    /// Counting hit the node budget.
    Failed,
}

impl Bucket {
    pub const ALL: [Bucket; 8] = [
        Bucket::Zero,
        Bucket::Constant,
        Bucket::Linear,
        Bucket::Quadratic,
        Bucket::Cubic,
        Bucket::HigherPoly,
        Bucket::NonPolynomial,
        Bucket::Failed,
    ];

    /// Buckets a classification of `f(1..=max_n)`. A polynomial verdict only
    /// counts when its tail has at least `degree + 4` terms, i.e. the
    /// threshold is at most `max_n - degree - 3`.
    pub fn of(report: &ClassificationReport, max_n: usize) -> Bucket {
        match &report.verdict {
            Verdict::EventuallyZero { .. } => Bucket::Zero,
            Verdict::EventualPolynomial(fit) if fit.threshold + fit.degree + 3 <= max_n => match fit.degree {
                0 => Bucket::Constant,
                1 => Bucket::Linear,
                2 => Bucket::Quadratic,
                3 => Bucket::Cubic,
                _ => Bucket::HigherPoly,
            },
            _ => Bucket::NonPolynomial,
        }
    }
}

/// One sampled pattern set and its outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub index: u64,
    pub patterns: PatternSet,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_counts")]
    pub counts: Option<Vec<BigUint>>,
    pub bucket: Bucket,
    /// Whether the counts obey `f(n) = f(n-1) + f(n-2) + a·n + b` from some point on.
    pub fib_like: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub num_patterns: usize,
    pub pattern_length: usize,
    pub max_n: usize,
    pub trials: usize,
    pub seed: u64,
    pub buckets: BTreeMap<Bucket, usize>,
    /// Non-polynomial trials that are Fibonacci-like.
    pub fib_like_non_polynomial: usize,
    pub results: Vec<Trial>,
}

impl ExperimentReport {
    pub fn count(&self, b: Bucket) -> usize {
        self.buckets.get(&b).copied().unwrap_or(0)
    }

    pub fn fraction(&self, b: Bucket) -> f64 {
        self.count(b) as f64 / self.trials as f64
    }
}

/// The pattern set drawn for one trial: a partial Fisher–Yates shuffle of
/// `S_{pattern_length}` (in lexicographic order) driven by ChaCha8 seeded
/// with `seed` on stream `trial`.
pub fn sample_patterns(seed: u64, trial: u64, num_patterns: usize, pattern_length: usize) -> PatternSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut all: Vec<Permutation> = Permutation::all(pattern_length).collect();
    let k = num_patterns.min(all.len());
    let (chosen, _) = all.partial_shuffle(&mut rng, k);
    PatternSet::new(chosen.iter().cloned())
}

/// Samples `trials` random `num_patterns`-subsets of `S_{pattern_length}`,
/// counts each up to `max_n`, and tallies the behaviour of `f(1..=max_n)`.
pub fn random_experiment(
    num_patterns: usize,
    pattern_length: usize,
    max_n: usize,
    trials: usize,
    seed: u64,
    options: CountOptions,
    workers: usize,
) -> Result<ExperimentReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let total = (1..=pattern_length).product::<usize>();
    if num_patterns > total {
        return Err(Error::InvalidInput(format!(
            "cannot choose {num_patterns} distinct patterns of length {pattern_length}"
        )));
    }
    let results: Vec<Trial> = pool(workers)?.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|index| {
                let patterns = sample_patterns(seed, index, num_patterns, pattern_length);
                match AvoiderTree::new(&patterns, options).count(max_n) {
                    Ok(seq) => {
                        let report = classify_counts(&seq, 1);
                        let bucket = Bucket::of(&report, max_n);
                        let terms: Vec<BigInt> = seq.from_one().iter().map(|c| BigInt::from(c.clone())).collect();
                        let fib_like = detect_fib_like(&terms, 1).is_some();
                        Trial {
                            index,
                            patterns,
                            counts: Some(seq.from_one().to_vec()),
                            bucket,
                            fib_like,
                        }
                    }
                    Err(_) => Trial {
                        index,
                        patterns,
                        counts: None,
                        bucket: Bucket::Failed,
                        fib_like: false,
                    },
                }
            })
            .collect()
    });
    let mut buckets: BTreeMap<Bucket, usize> = Bucket::ALL.iter().map(|&b| (b, 0)).collect();
    for t in &results {
        *buckets.get_mut(&t.bucket).unwrap() += 1;
    }
    let fib_like_non_polynomial = results
        .iter()
        .filter(|t| t.bucket == Bucket::NonPolynomial && t.fib_like)
        .count();
    Ok(ExperimentReport {
        num_patterns,
        pattern_length,
        max_n,
        trials,
        seed,
        buckets,
        fib_like_non_polynomial,
        results,
    })
}

/// Reads survey records from a JSON Lines file. Blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<SurveyRecord>> {
    let file = File::open(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SurveyRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&line, &line, 0, format!("line {} of {}: {e}", i + 1, path.display())))?;
        out.push(record);
    }
    Ok(out)
}

/// Writes records one JSON object per line, in the given order.
pub fn write_records(path: &Path, records: &[SurveyRecord]) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp).map_err(io)?);
        for r in records {
            serde_json::to_writer(&mut w, r).map_err(|e| Error::InvalidInput(e.to_string()))?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

/// Runs a symmetry-class survey into `path`, appending records as they
/// finish. Classes already present in `path` with a horizon of at least
/// `max_n` are kept and not recounted. The finished file is rewritten in
/// class order.
pub fn run_survey_to_file(
    stubs: &[ClassStub],
    max_n: usize,
    options: CountOptions,
    workers: usize,
    path: &Path,
) -> Result<Vec<SurveyRecord>> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut done: BTreeMap<PatternSet, SurveyRecord> = BTreeMap::new();
    if path.exists() {
        for r in read_records(path)? {
            if r.counts.as_ref().is_some_and(|c| c.len() >= max_n) {
                let mut r = r;
                if let Some(c) = r.counts.as_mut() {
                    c.truncate(max_n);
                }
                done.insert(r.class.clone(), r);
            }
        }
    }
    let wanted: BTreeSet<&PatternSet> = stubs.iter().map(|s| &s.class).collect();
    done.retain(|k, _| wanted.contains(k));
    let todo: Vec<ClassStub> = stubs.iter().filter(|s| !done.contains_key(&s.class)).cloned().collect();
    let appender = Mutex::new(fs::OpenOptions::new().create(true).append(true).open(path).map_err(io)?);
    let fresh = compute_records_streaming(&todo, max_n, options, workers, |r| {
        let mut line = serde_json::to_vec(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
        line.push(b'\n');
        appender.lock().unwrap().write_all(&line).map_err(io)
    })?;
    for r in fresh {
        done.insert(r.class.clone(), r);
    }
    let mut all: Vec<SurveyRecord> = done.into_values().collect();
    // Recompute verdicts for truncated records so they describe the stored counts.
    for r in &mut all {
        if let Some(seq) = r.count_sequence() {
            r.verdict = Some(classify_counts(&seq, 1));
        }
    }
    all.sort_by(|a, b| a.class.cmp(&b.class));
    write_records(path, &all)?;
    Ok(all)
}
