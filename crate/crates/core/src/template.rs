//! Template-generated permutation families.
//!
//! A template `(P, B)` of length `t` describes permutations that split into
//! consecutive subwords `W_1 … W_t` whose value ranges are stacked in the
//! order given by `P`. A `0` in `B` forces the matching subword to be a single
//! entry; a `1` allows any length, including zero. Every subword, flattened,
//! must itself belong to the family, and for `n >= 2` each subword must be
//! strictly shorter than the whole permutation. Lengths 0 and 1 hold the
//! empty permutation and `1`.
//!
//! For a set of templates, a permutation belongs to the family when it fits
//! at least one template, with subwords drawn from the family of the whole
//! set.
//!
//! If the `B` strings have at most `k` zeros and no member of length at most
//! `(l - 1)(k + 1) + 1` contains a given pattern of length `l`, then no member
//! of any length contains it. [`certify_avoidance`] checks exactly that
//! finite range.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::avoid::{CountSequence, Source};
use crate::contain::Matcher;
use crate::error::{Error, Result};
use crate::perm::{parse_permutation_at, PatternSet, Permutation, MAX_LEN};

/// A template: a permutation `P` and a same-length binary string `B`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Template {
    order: Permutation,
    // true where B has a 1 (subword of any length).
    free: Vec<bool>,
}

impl Template {
    pub fn new(order: Permutation, free: Vec<bool>) -> Result<Self> {
        if order.is_empty() {
            return Err(Error::InvalidInput("template must have length at least 1".into()));
        }
        if order.len() != free.len() {
            return Err(Error::InvalidInput(format!(
                "template permutation has length {} but its binary string has length {}",
                order.len(),
                free.len()
            )));
        }
        Ok(Template { order, free })
    }

    pub fn order(&self) -> &Permutation {
        &self.order
    }

    /// `B` as booleans, `true` for `1`.
    pub fn free_slots(&self) -> &[bool] {
        &self.free
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of zeros in `B`.
    pub fn zeros(&self) -> usize {
        self.free.iter().filter(|&&f| !f).count()
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.order)?;
        for &b in &self.free {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Template({self})")
    }
}

fn parse_template_at(input: &str, text: &str, offset: usize) -> Result<Template> {
    let Some((order, bits)) = text.split_once(':') else {
        return Err(Error::parse(input, text, offset, "expected PERMUTATION:BINARY, e.g. 45312:10101"));
    };
    let order = parse_permutation_at(input, order, offset)?;
    let bits_offset = offset + text.chars().take_while(|&c| c != ':').count() + 1;
    let mut free = Vec::new();
    for (i, c) in bits.chars().enumerate() {
        match c {
            '0' => free.push(false),
            '1' => free.push(true),
            _ => return Err(Error::parse(input, &c.to_string(), bits_offset + i, "expected 0 or 1")),
        }
    }
    Template::new(order, free).map_err(|e| Error::parse(input, text, offset, e.to_string()))
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_template_at(s, s, 0)
    }
}

impl Serialize for Template {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Template {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A nonempty list of templates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::InvalidInput("a template set must not be empty".into()));
        }
        Ok(TemplateSet { templates })
    }

    pub fn single(t: Template) -> Self {
        TemplateSet { templates: vec![t] }
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    /// Largest number of zeros over the `B` strings.
    pub fn max_zeros(&self) -> usize {
        self.templates.iter().map(Template::zeros).max().unwrap_or(0)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.templates.iter().map(ToString::to_string).collect()
    }
}

impl<'de> Deserialize<'de> for TemplateSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TemplateSet::new(Vec::<Template>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for TemplateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_strings().join(","))
    }
}

impl fmt::Debug for TemplateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TemplateSet({self})")
    }
}

/// Comma-separated templates, e.g. `14253:10101,15243:10101`.
impl FromStr for TemplateSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut templates = Vec::new();
        let mut pos = 0;
        for token in s.split(',') {
            let lead = token.chars().take_while(|c| c.is_whitespace()).count();
            templates.push(parse_template_at(s, token.trim(), pos + lead)?);
            pos += token.chars().count() + 1;
        }
        TemplateSet::new(templates)
    }
}

/// All members of one length, stored row-major and sorted.
#[derive(Debug)]
pub struct Level {
    len: usize,
    data: Vec<u8>,
    count: usize,
}

impl Level {
    fn from_rows(len: usize, mut data: Vec<u8>) -> Self {
        debug_assert!(len > 0);
        let rows = data.len() / len;
        let mut idx: Vec<usize> = (0..rows).collect();
        idx.sort_unstable_by(|&a, &b| data[a * len..(a + 1) * len].cmp(&data[b * len..(b + 1) * len]));
        idx.dedup_by(|a, b| data[*a * len..(*a + 1) * len] == data[*b * len..(*b + 1) * len]);
        let mut sorted = Vec::with_capacity(idx.len() * len);
        for &i in &idx {
            sorted.extend_from_slice(&data[i * len..(i + 1) * len]);
        }
        data = sorted;
        Level {
            len,
            count: idx.len(),
            data,
        }
    }

    pub fn perm_len(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Members as raw slices, in lexicographic order.
    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        let len = self.len;
        (0..self.count).map(move |i| &self.data[i * len..(i + 1) * len])
    }

    pub fn to_permutations(&self) -> Vec<Permutation> {
        self.rows().map(|r| Permutation::from_vec_unchecked(r.to_vec())).collect()
    }
}

/// The family generated by a template set, with memoized levels.
///
/// Levels are built once and shared; concurrent callers may build the same
/// level twice, but only one copy is stored.
#[derive(Debug)]
pub struct TemplateFamily {
    templates: TemplateSet,
    levels: RwLock<Vec<Arc<Level>>>,
}

impl TemplateFamily {
    pub fn new(templates: TemplateSet) -> Self {
        TemplateFamily {
            templates,
            levels: RwLock::new(Vec::new()),
        }
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    /// The members of length `n`.
    pub fn level(&self, n: usize) -> Arc<Level> {
        assert!(n <= MAX_LEN, "length {n} exceeds {MAX_LEN}");
        if let Some(l) = self.levels.read().unwrap().get(n) {
            return Arc::clone(l);
        }
        let lower: Vec<Arc<Level>> = (0..n).map(|m| self.level(m)).collect();
        let built = Arc::new(self.build(n, &lower));
        let mut levels = self.levels.write().unwrap();
        if levels.len() == n {
            levels.push(Arc::clone(&built));
            built
        } else {
            Arc::clone(&levels[n])
        }
    }

    pub fn generate(&self, n: usize) -> Vec<Permutation> {
        self.level(n).to_permutations()
    }

    fn build(&self, n: usize, lower: &[Arc<Level>]) -> Level {
        match n {
            0 => return Level { len: 0, data: Vec::new(), count: 1 },
            1 => return Level { len: 1, data: vec![1], count: 1 },
            _ => {}
        }
        let mut out = Vec::new();
        for t in self.templates.templates() {
            let mut sizes = vec![0usize; t.len()];
            compositions(t, n, 0, n, &mut sizes, &mut |sizes| {
                emit_products(t, sizes, lower, &mut out);
            });
        }
        Level::from_rows(n, out)
    }
}

/// Calls `visit` for every assignment of subword sizes summing to `n`,
/// with zeros of `B` forcing size 1 and every size below `n`.
fn compositions(t: &Template, n: usize, i: usize, remaining: usize, sizes: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if i == t.len() {
        if remaining == 0 {
            visit(sizes);
        }
        return;
    }
    // Slots after i that must be singletons.
    let forced_after = t.free[i + 1..].iter().filter(|&&f| !f).count();
    if remaining < forced_after {
        return;
    }
    if !t.free[i] {
        if remaining > forced_after {
            sizes[i] = 1;
            compositions(t, n, i + 1, remaining - 1, sizes, visit);
        }
        return;
    }
    let cap = (remaining - forced_after).min(n - 1);
    for s in 0..=cap {
        sizes[i] = s;
        compositions(t, n, i + 1, remaining - s, sizes, visit);
    }
}

/// Appends every concatenation of family members with the given sizes,
/// shifted into the value blocks that `P` dictates.
fn emit_products(t: &Template, sizes: &[usize], lower: &[Arc<Level>], out: &mut Vec<u8>) {
    let order = t.order().as_slice();
    let offsets: Vec<u8> = (0..sizes.len())
        .map(|i| {
            (0..sizes.len())
                .filter(|&j| order[j] < order[i])
                .map(|j| sizes[j])
                .sum::<usize>() as u8
        })
        .collect();
    let n: usize = sizes.iter().sum();
    let mut buf = Vec::with_capacity(n);
    fn rec(i: usize, sizes: &[usize], offsets: &[u8], lower: &[Arc<Level>], buf: &mut Vec<u8>, out: &mut Vec<u8>) {
        if i == sizes.len() {
            out.extend_from_slice(buf);
            return;
        }
        if sizes[i] == 0 {
            return rec(i + 1, sizes, offsets, lower, buf, out);
        }
        let mark = buf.len();
        for row in lower[sizes[i]].rows() {
            buf.extend(row.iter().map(|&v| v + offsets[i]));
            rec(i + 1, sizes, offsets, lower, buf, out);
            buf.truncate(mark);
        }
    }
    rec(0, sizes, &offsets, lower, &mut buf, out);
}

/// The family of `templates` at length `n`, sorted.
pub fn generate_s(templates: &TemplateSet, n: usize) -> Vec<Permutation> {
    TemplateFamily::new(templates.clone()).generate(n)
}

/// Single-template form of [`generate_s`].
pub fn generate_r(template: &Template, n: usize) -> Vec<Permutation> {
    generate_s(&TemplateSet::single(template.clone()), n)
}

/// A family member that contains one of the patterns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub length: usize,
    pub permutation: Permutation,
    pub pattern: Permutation,
}

/// Outcome of [`certify_avoidance`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub templates: TemplateSet,
    pub patterns: PatternSet,
    /// `(l - 1)(k + 1) + 1` for the longest pattern.
    pub bound: usize,
    pub verified: bool,
    pub witness: Option<Witness>,
}

/// Length up to which a pattern of length `pattern_len` must be checked.
pub fn certification_bound(pattern_len: usize, max_zeros: usize) -> usize {
    (pattern_len - 1) * (max_zeros + 1) + 1
}

/// Searches members of length `1..=max_len` for a pattern occurrence, taking
/// each pattern only up to its own limit from `limit`. Returns the first hit
/// in order of length, then member, then pattern.
fn find_witness(
    family: &TemplateFamily,
    patterns: &PatternSet,
    max_len: usize,
    limit: impl Fn(&Permutation) -> usize,
) -> Option<Witness> {
    let matchers: Vec<(Matcher, usize, &Permutation)> =
        patterns.iter().map(|p| (Matcher::new(p), limit(p), p)).collect();
    for m in 1..=max_len {
        let active: Vec<&(Matcher, usize, &Permutation)> =
            matchers.iter().filter(|(mt, lim, _)| m <= *lim && mt.len() <= m).collect();
        if active.is_empty() {
            continue;
        }
        let level = family.level(m);
        for row in level.rows() {
            if let Some((_, _, p)) = active.iter().find(|(mt, _, _)| mt.occurs_in(row)) {
                return Some(Witness {
                    length: m,
                    permutation: Permutation::from_vec_unchecked(row.to_vec()),
                    pattern: (*p).clone(),
                });
            }
        }
    }
    None
}

/// Decides whether every member of the family, at every length, avoids all
/// of `patterns`, by checking each pattern up to its certification bound.
pub fn certify_avoidance(templates: &TemplateSet, patterns: &PatternSet) -> Result<Certificate> {
    certify_with(&TemplateFamily::new(templates.clone()), patterns)
}

/// As [`certify_avoidance`], reusing the levels already built in `family`.
pub fn certify_with(family: &TemplateFamily, patterns: &PatternSet) -> Result<Certificate> {
    if patterns.iter().any(Permutation::is_empty) {
        return Err(Error::InvalidInput("cannot certify avoidance of the empty pattern".into()));
    }
    let k = family.templates().max_zeros();
    let bound = patterns.iter().map(|p| certification_bound(p.len(), k)).max().unwrap_or(0);
    if bound > MAX_LEN {
        return Err(Error::InvalidInput(format!("certification bound {bound} exceeds {MAX_LEN}")));
    }
    let witness = find_witness(family, patterns, bound, |p| certification_bound(p.len(), k));
    Ok(Certificate {
        templates: family.templates().clone(),
        patterns: patterns.clone(),
        bound,
        verified: witness.is_none(),
        witness,
    })
}

/// Checks every pattern against every member of length `1..=max_len`,
/// ignoring the certification bound.
pub fn search_witness(family: &TemplateFamily, patterns: &PatternSet, max_len: usize) -> Option<Witness> {
    find_witness(family, patterns, max_len, |_| usize::MAX)
}

/// `a_0 = a_1 = 1` and, for `n > 1`,
/// `a_n = c · Σ_{i=1}^{n-1} Σ_{j=i+1}^{n} a_{i-1} a_{j-i-1} a_{n-j}`.
///
/// The sum runs over the positions `i < j` of two marked entries that split
/// a permutation into three independent blocks.
pub fn eval_split_recurrence(max_n: usize, multiplier: u32) -> Vec<BigUint> {
    let mut a: Vec<BigUint> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        if n <= 1 {
            a.push(BigUint::from(1u32));
            continue;
        }
        let mut total = BigUint::from(0u32);
        for i in 1..n {
            for j in i + 1..=n {
                total += &a[i - 1] * &a[j - i - 1] * &a[n - j];
            }
        }
        a.push(total * multiplier);
    }
    a
}

/// Sizes of the family of `45312:10101`, via the split recurrence.
pub fn eval_single_split_recurrence(max_n: usize) -> CountSequence {
    CountSequence::new(
        Source::Recurrence("single split".into()),
        eval_split_recurrence(max_n, 1),
    )
}

/// Sizes of the family of `{14253:10101, 15243:10101}`, via the doubled split recurrence.
pub fn eval_doubled_split_recurrence(max_n: usize) -> CountSequence {
    CountSequence::new(
        Source::Recurrence("doubled split".into()),
        eval_split_recurrence(max_n, 2),
    )
}
