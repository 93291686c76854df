//! Classical pattern containment.
//!
//! Occurrences are found by backtracking over subsequence embeddings. Each
//! partial embedding must already be order-isomorphic to the matching prefix
//! of the pattern, which is checked in constant time against the nearest
//! smaller and nearest larger earlier pattern entries.

use smallvec::SmallVec;

use crate::perm::{PatternSet, Permutation};

type Positions = SmallVec<[usize; 8]>;

/// A pattern preprocessed for repeated containment queries.
#[derive(Clone, Debug)]
pub struct Matcher {
    pattern: Vec<u8>,
    // For entry j: index of the earlier entry with the largest value below
    // pattern[j], and of the earlier entry with the smallest value above it.
    below: Vec<Option<usize>>,
    above: Vec<Option<usize>>,
}

impl Matcher {
    pub fn new(pattern: &Permutation) -> Self {
        Matcher::from_slice(pattern.as_slice())
    }

    /// `pattern` must consist of distinct values.
    pub fn from_slice(pattern: &[u8]) -> Self {
        let mut below = Vec::with_capacity(pattern.len());
        let mut above = Vec::with_capacity(pattern.len());
        for (j, &v) in pattern.iter().enumerate() {
            let prefix = &pattern[..j];
            below.push(
                prefix
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w < v)
                    .max_by_key(|(_, &w)| w)
                    .map(|(i, _)| i),
            );
            above.push(
                prefix
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > v)
                    .min_by_key(|(_, &w)| w)
                    .map(|(i, _)| i),
            );
        }
        Matcher {
            pattern: pattern.to_vec(),
            below,
            above,
        }
    }

    pub fn pattern(&self) -> &[u8] {
        &self.pattern
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    /// True iff some subsequence of `text` (distinct values) is order-isomorphic to the pattern.
    pub fn occurs_in(&self, text: &[u8]) -> bool {
        if self.pattern.is_empty() {
            return true;
        }
        if text.len() < self.pattern.len() {
            return false;
        }
        let mut chosen: Positions = SmallVec::from_elem(0, self.pattern.len());
        self.search(text, 0, 0, &mut chosen, &mut |_| true)
    }

    /// Calls `visit` with the positions of every occurrence in `text`, in
    /// lexicographic order of positions. `visit` returns `true` to stop early.
    pub fn for_each_occurrence<F>(&self, text: &[u8], mut visit: F)
    where
        F: FnMut(&[usize]) -> bool,
    {
        if self.pattern.is_empty() {
            visit(&[]);
            return;
        }
        if text.len() < self.pattern.len() {
            return;
        }
        let mut chosen: Positions = SmallVec::from_elem(0, self.pattern.len());
        self.search(text, 0, 0, &mut chosen, &mut visit);
    }

    fn search<F>(&self, text: &[u8], j: usize, start: usize, chosen: &mut Positions, visit: &mut F) -> bool
    where
        F: FnMut(&[usize]) -> bool,
    {
        let k = self.pattern.len();
        let last = text.len() - (k - j);
        let lo = self.below[j].map(|i| text[chosen[i]]);
        let hi = self.above[j].map(|i| text[chosen[i]]);
        for pos in start..=last {
            let v = text[pos];
            if lo.is_some_and(|l| v < l) || hi.is_some_and(|h| v > h) {
                continue;
            }
            chosen[j] = pos;
            if j + 1 == k {
                if visit(chosen) {
                    return true;
                }
            } else if self.search(text, j + 1, pos + 1, chosen, visit) {
                return true;
            }
        }
        false
    }
}

/// True iff `pi` contains a copy of `sigma`.
pub fn contains(pi: &Permutation, sigma: &Permutation) -> bool {
    Matcher::new(sigma).occurs_in(pi.as_slice())
}

/// True iff `pi` contains no pattern of `sigma_set`. Every permutation avoids the empty set.
pub fn avoids(pi: &Permutation, sigma_set: &PatternSet) -> bool {
    sigma_set.iter().all(|s| !contains(pi, s))
}

/// Reference containment check: tries every subsequence of the right length.
#[cfg(test)]
pub(crate) fn contains_brute_force(pi: &[u8], sigma: &[u8]) -> bool {
    fn rec(pi: &[u8], sigma: &[u8], start: usize, picked: &mut Vec<u8>) -> bool {
        if picked.len() == sigma.len() {
            let mut flat = Vec::new();
            crate::perm::flatten_into(picked, &mut flat);
            return flat == sigma;
        }
        for i in start..pi.len() {
            picked.push(pi[i]);
            if rec(pi, sigma, i + 1, picked) {
                return true;
            }
            picked.pop();
        }
        false
    }
    rec(pi, sigma, 0, &mut Vec::new())
}
