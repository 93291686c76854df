//! Exact enumeration of avoidance classes.
//!
//! The class `Av(Σ)` is grown as a generating tree: the children of a
//! length-`n` avoider are obtained by inserting `n + 1` into each of its
//! `n + 1` gaps, keeping those that still avoid `Σ`. Deleting the maximum of
//! an avoider leaves an avoider, so every member of `Av_{n+1}(Σ)` is reached
//! from exactly one parent.
//!
//! A child can only contain a pattern through an occurrence that uses the
//! inserted maximum. Such an occurrence plays the role of the pattern's own
//! maximum, so the admissible gaps of a parent are found by locating the
//! pattern-minus-its-maximum in the parent and ruling out every gap that
//! would complete it.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::contain::{avoids, Matcher};
use crate::error::{Error, Result};
use crate::perm::{PatternSet, Permutation, MAX_LEN};

/// Default cap on the number of generating-tree nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Largest length accepted by [`count_avoiders_naive`].
pub const NAIVE_MAX_N: usize = 8;

/// How children are tested for avoidance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CheckMode {
    /// Only occurrences through the inserted maximum are searched.
    #[default]
    Incremental,
    /// Every child is re-checked against every pattern.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountOptions {
    /// Maximum number of tree nodes, counted over all lengths `0..=N`.
    pub node_budget: u64,
    pub check: CheckMode,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            check: CheckMode::Incremental,
        }
    }
}

impl CountOptions {
    pub fn with_budget(node_budget: u64) -> Self {
        CountOptions {
            node_budget,
            ..Default::default()
        }
    }
}

/// Where a counting sequence came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Avoiders(PatternSet),
    Recurrence(String),
    Given,
}

/// Counts `f(0), f(1), …, f(N)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSequence {
    pub source: Source,
    #[serde(with = "crate::bigserde::uint_vec")]
    pub counts: Vec<BigUint>,
}

impl CountSequence {
    pub fn new(source: Source, counts: Vec<BigUint>) -> Self {
        CountSequence { source, counts }
    }

    pub fn max_n(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    /// The pattern set, when the sequence counts avoiders.
    pub fn patterns(&self) -> Option<&PatternSet> {
        match &self.source {
            Source::Avoiders(s) => Some(s),
            _ => None,
        }
    }

    /// Terms for `n >= 1`.
    pub fn from_one(&self) -> &[BigUint] {
        self.counts.get(1..).unwrap_or(&[])
    }

    /// Counts as `u64`, `None` if any term is too large.
    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.counts.iter().map(|c| u64::try_from(c).ok()).collect()
    }
}

/// A pattern with its maximum removed, and where that maximum sat.
#[derive(Clone, Debug)]
struct ReducedPattern {
    matcher: Matcher,
    split: usize,
}

/// Reusable generating tree for one pattern set.
#[derive(Clone, Debug)]
pub struct AvoiderTree {
    patterns: PatternSet,
    reduced: Vec<ReducedPattern>,
    full: Vec<Matcher>,
    has_empty: bool,
    options: CountOptions,
}

struct Walk<'a> {
    tree: &'a AvoiderTree,
    max_n: usize,
    level_counts: Vec<u64>,
    nodes: u64,
    marks: Vec<i32>,
    collect: Option<Vec<Permutation>>,
}

impl AvoiderTree {
    pub fn new(patterns: &PatternSet, options: CountOptions) -> Self {
        let mut reduced = Vec::new();
        let mut has_empty = false;
        for sigma in patterns {
            if sigma.is_empty() {
                has_empty = true;
                continue;
            }
            let k = sigma.len() as u8;
            let split = sigma.as_slice().iter().position(|&v| v == k).unwrap();
            reduced.push(ReducedPattern {
                matcher: Matcher::new(&sigma.delete_max()),
                split,
            });
        }
        AvoiderTree {
            patterns: patterns.clone(),
            reduced,
            full: patterns.iter().map(Matcher::new).collect(),
            has_empty,
            options,
        }
    }

    /// Gaps of `parent` where inserting a new maximum keeps the class.
    /// Gap `g` places the new entry before `parent[g]`.
    fn admissible_gaps(&self, parent: &mut Vec<u8>, marks: &mut Vec<i32>) -> SmallVec<[u8; 32]> {
        let n = parent.len();
        let mut gaps = SmallVec::new();
        match self.options.check {
            CheckMode::Incremental => {
                marks.clear();
                marks.resize(n + 2, 0);
                for rp in &self.reduced {
                    let last = rp.matcher.len();
                    rp.matcher.for_each_occurrence(parent, |pos| {
                        let lo = if rp.split == 0 { 0 } else { pos[rp.split - 1] + 1 };
                        let hi = if rp.split == last { n } else { pos[rp.split] };
                        marks[lo] += 1;
                        marks[hi + 1] -= 1;
                        false
                    });
                }
                let mut depth = 0;
                for (g, m) in marks.iter().take(n + 1).enumerate() {
                    depth += m;
                    if depth == 0 {
                        gaps.push(g as u8);
                    }
                }
            }
            CheckMode::Full => {
                let new = n as u8 + 1;
                for g in 0..=n {
                    parent.insert(g, new);
                    if !self.full.iter().any(|m| m.occurs_in(parent)) {
                        gaps.push(g as u8);
                    }
                    parent.remove(g);
                }
            }
        }
        gaps
    }

    fn check_len(max_n: usize) -> Result<()> {
        if max_n > MAX_LEN {
            return Err(Error::InvalidInput(format!("length {max_n} exceeds {MAX_LEN}")));
        }
        Ok(())
    }

    fn walk(&self, max_n: usize, collect: bool) -> Result<Walk<'_>> {
        Self::check_len(max_n)?;
        let mut walk = Walk {
            tree: self,
            max_n,
            level_counts: vec![0; max_n + 1],
            nodes: 0,
            marks: Vec::new(),
            collect: collect.then(Vec::new),
        };
        if self.has_empty {
            return Ok(walk);
        }
        walk.level_counts[0] = 1;
        walk.nodes = 1;
        let mut root = Vec::with_capacity(max_n);
        if max_n == 0 {
            if let Some(out) = walk.collect.as_mut() {
                out.push(Permutation::empty());
            }
        } else {
            walk.expand(&mut root)?;
        }
        Ok(walk)
    }

    pub fn count(&self, max_n: usize) -> Result<CountSequence> {
        let walk = self.walk(max_n, false)?;
        Ok(CountSequence::new(
            Source::Avoiders(self.patterns.clone()),
            walk.level_counts.into_iter().map(BigUint::from).collect(),
        ))
    }

    /// Members of `Av_n(Σ)` in lexicographic order.
    pub fn enumerate(&self, n: usize) -> Result<Vec<Permutation>> {
        let walk = self.walk(n, true)?;
        let mut out = walk.collect.unwrap_or_default();
        out.sort();
        Ok(out)
    }
}

impl Walk<'_> {
    fn expand(&mut self, perm: &mut Vec<u8>) -> Result<()> {
        let n = perm.len();
        let gaps = self.tree.admissible_gaps(perm, &mut self.marks);
        self.level_counts[n + 1] += gaps.len() as u64;
        self.nodes += gaps.len() as u64;
        if self.nodes > self.tree.options.node_budget {
            return Err(Error::BudgetExceeded {
                budget: self.tree.options.node_budget,
                length: n + 1,
            });
        }
        let new = n as u8 + 1;
        if n + 1 == self.max_n {
            if let Some(out) = self.collect.as_mut() {
                for &g in &gaps {
                    perm.insert(g as usize, new);
                    out.push(Permutation::from_vec_unchecked(perm.clone()));
                    perm.remove(g as usize);
                }
            }
            return Ok(());
        }
        for &g in &gaps {
            perm.insert(g as usize, new);
            self.expand(perm)?;
            perm.remove(g as usize);
        }
        Ok(())
    }
}

/// `|Av_n(Σ)|` for `n = 0..=max_n`.
pub fn count_avoiders(patterns: &PatternSet, max_n: usize) -> Result<CountSequence> {
    count_avoiders_with(patterns, max_n, CountOptions::default())
}

pub fn count_avoiders_with(patterns: &PatternSet, max_n: usize, options: CountOptions) -> Result<CountSequence> {
    AvoiderTree::new(patterns, options).count(max_n)
}

/// The members of `Av_n(Σ)`, sorted.
pub fn enumerate_avoiders(patterns: &PatternSet, n: usize, options: CountOptions) -> Result<Vec<Permutation>> {
    AvoiderTree::new(patterns, options).enumerate(n)
}

/// Counts by filtering all `n!` permutations. Only for cross-checking; `max_n <= 8`.
pub fn count_avoiders_naive(patterns: &PatternSet, max_n: usize) -> Result<CountSequence> {
    if max_n > NAIVE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "naive counting is limited to n <= {NAIVE_MAX_N}, got {max_n}"
        )));
    }
    let counts = (0..=max_n)
        .map(|n| BigUint::from(Permutation::all(n).filter(|p| avoids(p, patterns)).count()))
        .collect();
    Ok(CountSequence::new(Source::Avoiders(patterns.clone()), counts))
}
