//! Permutations in one-line notation and finite sets of patterns.
//!
//! Values start at 1. The empty permutation is a valid value of length 0.
//! Entries are stored as `u8`, which bounds the length at 255.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported permutation length.
pub const MAX_LEN: usize = u8::MAX as usize;

/// A permutation of `{1..n}` in one-line notation.
///
/// Ordering is length-lexicographic: shorter permutations come first, equal
/// lengths compare entry by entry.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Permutation {
    values: Vec<u8>,
}

impl Permutation {
    /// Validates that `values` is a bijection on `{1..n}`.
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if !is_permutation(&values) {
            return Err(Error::InvalidInput(format!("{values:?} is not a permutation of 1..{}", values.len())));
        }
        Ok(Permutation { values })
    }

    /// Wraps values already known to form a permutation.
    pub(crate) fn from_vec_unchecked(values: Vec<u8>) -> Self {
        debug_assert!(is_permutation(&values));
        Permutation { values }
    }

    pub fn empty() -> Self {
        Permutation { values: Vec::new() }
    }

    /// The increasing permutation `12…n`.
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_LEN);
        Permutation { values: (1..=n as u8).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.values
    }

    /// The permutation with its largest entry removed.
    pub fn delete_max(&self) -> Permutation {
        let n = self.len() as u8;
        Permutation {
            values: self.values.iter().copied().filter(|&v| v != n).collect(),
        }
    }

    /// All `n!` permutations of length `n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut next = Some(Permutation::identity(n));
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut v = current.values.clone();
            if next_permutation(&mut v) {
                next = Some(Permutation { values: v });
            }
            Some(current)
        })
    }
}

fn is_permutation(values: &[u8]) -> bool {
    let n = values.len();
    let mut seen = vec![false; n];
    for &v in values {
        let v = v as usize;
        if v == 0 || v > n || seen[v - 1] {
            return false;
        }
        seen[v - 1] = true;
    }
    true
}

/// Advances `v` to its lexicographic successor; false once `v` is the last.
fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Reduces a word of distinct entries to the order-isomorphic permutation.
///
/// `2975` flattens to `1432`.
pub fn flatten<T: Ord>(word: &[T]) -> Result<Permutation> {
    if word.len() > MAX_LEN {
        return Err(Error::InvalidInput(format!("word of length {} exceeds {MAX_LEN}", word.len())));
    }
    let mut order: Vec<usize> = (0..word.len()).collect();
    order.sort_by(|&a, &b| word[a].cmp(&word[b]));
    if order.windows(2).any(|w| word[w[0]] == word[w[1]]) {
        return Err(Error::InvalidInput("word has repeated entries".into()));
    }
    let mut values = vec![0u8; word.len()];
    for (rank, &pos) in order.iter().enumerate() {
        values[pos] = rank as u8 + 1;
    }
    Ok(Permutation { values })
}

/// Flattens a slice of distinct `u8` values into `out`.
#[cfg(test)]
pub(crate) fn flatten_into(word: &[u8], out: &mut Vec<u8>) {
    out.clear();
    out.extend(word.iter().map(|&v| 1 + word.iter().filter(|&&w| w < v).count() as u8));
}

impl Ord for Permutation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.values.cmp(&other.values))
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compact digits for `n <= 9`, comma-separated values otherwise.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.values {
                write!(f, "{v}")?;
            }
        } else {
            for (i, v) in self.values.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_permutation_at(s, s, 0)
    }
}

/// Parses `text`, a substring of `input` starting at character `offset`.
pub(crate) fn parse_permutation_at(input: &str, text: &str, offset: usize) -> Result<Permutation> {
    let mut values = Vec::new();
    if text.contains(',') {
        let mut pos = offset;
        for token in text.split(',') {
            let trimmed = token.trim();
            let v: usize = trimmed
                .parse()
                .map_err(|_| Error::parse(input, trimmed, pos, "expected a positive integer"))?;
            if v == 0 || v > MAX_LEN {
                return Err(Error::parse(input, trimmed, pos, "value out of range"));
            }
            values.push(v as u8);
            pos += token.chars().count() + 1;
        }
    } else {
        for (i, c) in text.chars().enumerate() {
            match c.to_digit(10) {
                Some(d) if d > 0 => values.push(d as u8),
                _ => {
                    return Err(Error::parse(input, &c.to_string(), offset + i, "expected a digit 1-9"));
                }
            }
        }
    }
    if !is_permutation(&values) {
        return Err(Error::parse(input, text, offset, "not a permutation of 1..n"));
    }
    Ok(Permutation { values })
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite set of patterns, deduplicated and kept in length-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatternSet {
    patterns: Vec<Permutation>,
}

impl PatternSet {
    pub fn new(patterns: impl IntoIterator<Item = Permutation>) -> Self {
        let mut patterns: Vec<Permutation> = patterns.into_iter().collect();
        patterns.sort();
        patterns.dedup();
        PatternSet { patterns }
    }

    pub fn empty() -> Self {
        PatternSet::default()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Permutation> {
        self.patterns.iter()
    }

    pub fn as_slice(&self) -> &[Permutation] {
        &self.patterns
    }

    pub fn contains_pattern(&self, p: &Permutation) -> bool {
        self.patterns.binary_search(p).is_ok()
    }

    pub fn is_subset(&self, other: &PatternSet) -> bool {
        self.patterns.iter().all(|p| other.contains_pattern(p))
    }

    pub fn max_len(&self) -> usize {
        self.patterns.iter().map(Permutation::len).max().unwrap_or(0)
    }

    /// Compact pattern strings, e.g. `["1234", "1243"]`.
    pub fn to_strings(&self) -> Vec<String> {
        self.patterns.iter().map(ToString::to_string).collect()
    }
}

impl Ord for PatternSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.patterns.cmp(&other.patterns))
    }
}

impl PartialOrd for PatternSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<Permutation> for PatternSet {
    fn from_iter<I: IntoIterator<Item = Permutation>>(iter: I) -> Self {
        PatternSet::new(iter)
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a Permutation;
    type IntoIter = std::slice::Iter<'a, Permutation>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

impl fmt::Display for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PatternSet{self}")
    }
}

/// Parses a pattern list.
///
/// Patterns are separated by commas and written compactly (`1234,1243`).
/// When any pattern needs length ten or more, separate patterns with `;`
/// and write each one comma-separated (`10,9,8,7,6,5,4,3,2,1;12`).
/// An empty string is the empty set.
impl FromStr for PatternSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sep = if s.contains(';') { ';' } else { ',' };
        let mut patterns = Vec::new();
        let mut pos = 0;
        if s.trim().is_empty() {
            return Ok(PatternSet::empty());
        }
        for token in s.split(sep) {
            let lead = token.chars().take_while(|c| c.is_whitespace()).count();
            let trimmed = token.trim();
            if trimmed.is_empty() {
                return Err(Error::parse(s, token, pos, "empty pattern"));
            }
            patterns.push(parse_permutation_at(s, trimmed, pos + lead)?);
            pos += token.chars().count() + 1;
        }
        Ok(PatternSet::new(patterns))
    }
}
