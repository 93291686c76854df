use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde::Serialize;
use serde_json::Value;

use patavoid::avoid::{count_avoiders_naive, AvoiderTree, CheckMode, CountOptions, CountSequence, DEFAULT_NODE_BUDGET};
use patavoid::reproduce::reproduce;
use patavoid::seq::{classify_counts, classify_with, ClassificationReport, Verdict, DEFAULT_MAX_DEGREE};
use patavoid::survey::{
    enumerate_symmetry_classes, polynomial_scan, random_experiment, read_records, run_survey_to_file, wilf_from_records,
    Bucket, DEFAULT_SUBSET_BUDGET,
};
use patavoid::template::{certify_with, TemplateFamily, TemplateSet};
use patavoid::{Error, PatternSet, Permutation};

const BUDGET_ENV: &str = "PATAVOID_NODE_BUDGET";

#[derive(Parser)]
#[command(name = "patavoid", version, about = "Permutation pattern avoidance toolkit")]
struct Cli {
    /// Cap on generating-tree nodes per count (overrides PATAVOID_NODE_BUDGET).
    #[arg(long, global = true)]
    node_budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count permutations avoiding a pattern set for n = 0..=N.
    Count(CountArgs),
    /// Generate or certify template families.
    #[command(subcommand)]
    Template(TemplateCommand),
    /// Classify an integer sequence.
    Analyze(AnalyzeArgs),
    /// Survey every symmetry class of k-subsets of S_m.
    Survey(SurveyArgs),
    /// Random pattern sets and how their counting sequences behave.
    Experiment(ExperimentArgs),
    /// Run a named end-to-end check.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct CountArgs {
    /// Comma-separated patterns, e.g. 123,2413 (use ';' once any pattern has 10+ entries).
    #[arg(long)]
    patterns: String,
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    /// Filter all permutations instead of walking the generating tree (N <= 8).
    #[arg(long)]
    naive: bool,
    /// Re-check every child against every pattern (slow; for debugging).
    #[arg(long)]
    full_check: bool,
    /// Start output at n = 1.
    #[arg(long)]
    one_based: bool,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Subcommand)]
enum TemplateCommand {
    /// List the members of length n.
    Gen {
        /// Comma-separated templates, e.g. 45312:10101.
        #[arg(long)]
        templates: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Decide whether the family avoids the patterns at every length.
    Certify {
        #[arg(long)]
        templates: String,
        #[arg(long)]
        patterns: String,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Comma-separated integers.
    #[arg(long, allow_hyphen_values = true)]
    seq: String,
    /// Index of the first term.
    #[arg(long, default_value_t = 1)]
    offset: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    max_degree: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct SurveyArgs {
    #[command(subcommand)]
    command: Option<SurveyCommand>,
    #[arg(long, default_value_t = 4)]
    num_patterns: usize,
    #[arg(long, default_value_t = 4)]
    pattern_length: usize,
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    /// JSON Lines output; an existing file is resumed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Subcommand)]
enum SurveyCommand {
    /// Distinct counting prefixes in a survey file.
    Wilf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Classes in a survey file whose counts look polynomial.
    Polyscan {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        max_degree: usize,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 12)]
    num_patterns: usize,
    #[arg(long, default_value_t = 4)]
    pattern_length: usize,
    #[arg(long, default_value_t = 13)]
    max_n: usize,
    #[arg(long, default_value_t = 820)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Args)]
struct ReproduceArgs {
    claim: String,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// A failure with its exit status.
enum Failure {
    Invalid(String),
    Budget(String),
    ClaimFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::ClaimFailed) => ExitCode::from(3),
    }
}

fn node_budget(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Invalid(format!("{BUDGET_ENV}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn run(cli: Cli) -> Outcome {
    let options = CountOptions::with_budget(node_budget(cli.node_budget)?);
    match cli.command {
        Command::Count(args) => count(args, options),
        Command::Template(cmd) => template(cmd),
        Command::Analyze(args) => analyze(args),
        Command::Survey(args) => survey(args, options),
        Command::Experiment(args) => experiment(args, options),
        Command::Reproduce(args) => {
            let report = reproduce(&args.claim, args.workers)?;
            match args.emit {
                Emit::Json => print_json(&report),
                _ => print!("{report}"),
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::ClaimFailed)
            }
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable output"));
}

/// A count as a JSON number, or a decimal string when it does not fit in 64 bits.
fn count_value(c: &BigUint) -> Value {
    match u64::try_from(c) {
        Ok(x) => x.into(),
        Err(_) => c.to_string().into(),
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Serialize)]
struct CountOutput<'a> {
    patterns: &'a PatternSet,
    counts: Vec<Value>,
    max_n: usize,
}

#[derive(Serialize)]
struct GenOutput<'a> {
    templates: Vec<String>,
    n: usize,
    count: usize,
    members: &'a [Permutation],
}

fn count(args: CountArgs, mut options: CountOptions) -> Outcome {
    let patterns: PatternSet = args.patterns.parse()?;
    if args.full_check {
        options.check = CheckMode::Full;
    }
    let seq: CountSequence = if args.naive {
        count_avoiders_naive(&patterns, args.max_n)?
    } else {
        AvoiderTree::new(&patterns, options).count(args.max_n)?
    };
    let shown = if args.one_based { seq.from_one() } else { &seq.counts[..] };
    match args.emit {
        Emit::Text => println!("{}", join(shown)),
        Emit::Json => print_json(&CountOutput {
            patterns: &patterns,
            counts: shown.iter().map(count_value).collect(),
            max_n: args.max_n,
        }),
        Emit::Csv => {
            let report = classify_counts(&seq, 1);
            let degree = report.verdict.degree().map(|d| d.to_string()).unwrap_or_default();
            println!("patterns,counts,degree");
            println!("\"{}\",\"{}\",{}", patterns, join(seq.from_one()), degree);
        }
    }
    Ok(())
}

fn template(cmd: TemplateCommand) -> Outcome {
    match cmd {
        TemplateCommand::Gen { templates, n, emit } => {
            let set: TemplateSet = templates.parse()?;
            if n > patavoid::perm::MAX_LEN {
                return Err(Failure::Invalid(format!("n = {n} exceeds {}", patavoid::perm::MAX_LEN)));
            }
            let members = TemplateFamily::new(set.clone()).generate(n);
            match emit {
                Emit::Json => print_json(&GenOutput {
                    templates: set.to_strings(),
                    n,
                    count: members.len(),
                    members: &members,
                }),
                _ => {
                    let mut out = BufWriter::new(std::io::stdout().lock());
                    for m in &members {
                        // A closed pipe (e.g. `| head`) just ends the listing.
                        if writeln!(out, "{m}").is_err() {
                            return Ok(());
                        }
                    }
                    let _ = out.flush();
                }
            }
        }
        TemplateCommand::Certify { templates, patterns, emit } => {
            let family = TemplateFamily::new(templates.parse()?);
            let patterns: PatternSet = patterns.parse()?;
            let cert = certify_with(&family, &patterns)?;
            match emit {
                Emit::Json => print_json(&cert),
                _ => {
                    println!("verified: {} (bound {})", cert.verified, cert.bound);
                    if let Some(w) = &cert.witness {
                        println!("witness: {} contains {} (length {})", w.permutation, w.pattern, w.length);
                    }
                }
            }
        }
    }
    Ok(())
}

fn parse_terms(text: &str) -> Result<Vec<BigInt>, Failure> {
    let mut out = Vec::new();
    let mut pos = 0;
    for token in text.split(',') {
        let t = token.trim();
        let value = t.parse::<BigInt>().map_err(|_| {
            Failure::Invalid(format!("cannot parse '{t}' at position {pos} of '{text}': expected an integer"))
        })?;
        out.push(value);
        pos += token.len() + 1;
    }
    Ok(out)
}

fn describe(report: &ClassificationReport) -> String {
    match &report.verdict {
        Verdict::EventuallyZero { threshold } => format!("eventually zero from n = {threshold}"),
        Verdict::EventualPolynomial(fit) => {
            let coeffs: Vec<String> = fit.coefficients.iter().map(|c| c.to_string()).collect();
            format!(
                "eventually polynomial of degree {} from n = {}; coefficients of 1, n, n^2, ...: {}",
                fit.degree,
                fit.threshold,
                coeffs.join(", ")
            )
        }
        Verdict::FibLike(fit) => format!(
            "Fibonacci-like: f(n) = f(n-1) + f(n-2) + ({})n + ({}) from n = {}",
            fit.a, fit.b, fit.threshold
        ),
        Verdict::Unclassified => "unclassified".to_string(),
    }
}

fn analyze(args: AnalyzeArgs) -> Outcome {
    let terms = parse_terms(&args.seq)?;
    let report = classify_with(&terms, args.offset, args.max_degree);
    match args.emit {
        Emit::Json => print_json(&report),
        _ => println!("{} ({} supporting terms)", describe(&report), report.evidence),
    }
    Ok(())
}

fn survey(args: SurveyArgs, options: CountOptions) -> Outcome {
    match args.command {
        Some(SurveyCommand::Wilf { input, workers, emit }) => {
            let records = read_records(&input)?;
            let wilf = wilf_from_records(records, options, workers)?;
            match emit {
                Emit::Json => print_json(&wilf),
                _ => {
                    let p = &wilf.primary;
                    println!(
                        "horizon {}: {} distinct fingerprints among {} classes ({} not counted that far)",
                        p.horizon,
                        p.distinct,
                        p.records,
                        p.failed.len()
                    );
                    if let Some(f) = &wilf.fallback {
                        println!("horizon {}: {} distinct fingerprints", f.horizon, f.distinct);
                    }
                }
            }
            Ok(())
        }
        Some(SurveyCommand::Polyscan { input, max_degree, emit }) => {
            let records = read_records(&input)?;
            let hits = polynomial_scan(&records, max_degree)?;
            match emit {
                Emit::Json => print_json(&hits),
                Emit::Csv => {
                    println!("patterns,counts,degree");
                    for h in &hits {
                        let counts = records
                            .iter()
                            .find(|r| r.class == h.class)
                            .and_then(|r| r.counts.as_ref())
                            .map(|c| join(c))
                            .unwrap_or_default();
                        println!("\"{}\",\"{}\",{}", h.class, counts, h.degree);
                    }
                }
                Emit::Text => {
                    for h in &hits {
                        println!("{} degree {} from n = {}", h.class, h.degree, h.threshold);
                    }
                    println!("total: {}", hits.len());
                }
            }
            Ok(())
        }
        None => {
            let Some(out) = args.out else {
                return Err(Failure::Invalid("survey needs --out".into()));
            };
            let stubs = enumerate_symmetry_classes(args.num_patterns, args.pattern_length, DEFAULT_SUBSET_BUDGET)?;
            let records = run_survey_to_file(&stubs, args.max_n, options, args.workers, &out)?;
            let failed = records.iter().filter(|r| r.counts.is_none()).count();
            println!(
                "{} classes counted to n = {} ({} hit the node budget); written to {}",
                records.len(),
                args.max_n,
                failed,
                out.display()
            );
            Ok(())
        }
    }
}

fn experiment(args: ExperimentArgs, options: CountOptions) -> Outcome {
    let e = random_experiment(
        args.num_patterns,
        args.pattern_length,
        args.max_n,
        args.trials,
        args.seed,
        options,
        args.workers,
    )?;
    match args.emit {
        Emit::Json => print_json(&e),
        _ => {
            for b in Bucket::ALL {
                println!("{:<15} {:>6} {:>6.1}%", format!("{b:?}"), e.count(b), 100.0 * e.fraction(b));
            }
            println!(
                "Fibonacci-like among non-polynomial: {}/{}",
                e.fib_like_non_polynomial,
                e.count(Bucket::NonPolynomial)
            );
        }
    }
    Ok(())
}
