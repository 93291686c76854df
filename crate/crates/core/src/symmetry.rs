//! The eight symmetries of the permutation matrix and canonical forms of
//! pattern sets under them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{PatternSet, Permutation};

/// An element of the group generated by reverse, complement and inverse.
///
/// The map applies reverse first, then complement, then inverse, each only
/// when its flag is set. Every group element has exactly one such form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symmetry {
    pub reverse: bool,
    pub complement: bool,
    pub inverse: bool,
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry::new(false, false, false);
    pub const REVERSE: Symmetry = Symmetry::new(true, false, false);
    pub const COMPLEMENT: Symmetry = Symmetry::new(false, true, false);
    pub const INVERSE: Symmetry = Symmetry::new(false, false, true);

    /// All eight elements, identity first.
    pub const ALL: [Symmetry; 8] = [
        Symmetry::new(false, false, false),
        Symmetry::new(true, false, false),
        Symmetry::new(false, true, false),
        Symmetry::new(true, true, false),
        Symmetry::new(false, false, true),
        Symmetry::new(true, false, true),
        Symmetry::new(false, true, true),
        Symmetry::new(true, true, true),
    ];

    pub const fn new(reverse: bool, complement: bool, inverse: bool) -> Self {
        Symmetry {
            reverse,
            complement,
            inverse,
        }
    }

    /// The element `self ∘ other` (apply `other` first).
    ///
    /// Uses `inverse ∘ reverse = complement ∘ inverse` and
    /// `inverse ∘ complement = reverse ∘ inverse` to move inverses left.
    pub fn compose(self, other: Symmetry) -> Symmetry {
        let (r, c) = if other.inverse {
            (self.complement ^ other.reverse, self.reverse ^ other.complement)
        } else {
            (self.reverse ^ other.reverse, self.complement ^ other.complement)
        };
        Symmetry::new(r, c, self.inverse ^ other.inverse)
    }

    pub fn inverse_element(self) -> Symmetry {
        Symmetry::ALL
            .into_iter()
            .find(|&g| g.compose(self) == Symmetry::IDENTITY)
            .expect("group element has an inverse")
    }

    pub fn apply(self, pi: &Permutation) -> Permutation {
        let mut v = pi.as_slice().to_vec();
        self.apply_in_place(&mut v);
        Permutation::from_vec_unchecked(v)
    }

    pub(crate) fn apply_in_place(self, v: &mut Vec<u8>) {
        let n = v.len() as u8;
        if self.reverse {
            v.reverse();
        }
        if self.complement {
            for x in v.iter_mut() {
                *x = n + 1 - *x;
            }
        }
        if self.inverse {
            let mut inv = vec![0u8; v.len()];
            for (i, &x) in v.iter().enumerate() {
                inv[x as usize - 1] = i as u8 + 1;
            }
            *v = inv;
        }
    }

    pub fn apply_set(self, set: &PatternSet) -> PatternSet {
        set.iter().map(|p| self.apply(p)).collect()
    }

    pub fn name(self) -> &'static str {
        match (self.reverse, self.complement, self.inverse) {
            (false, false, false) => "identity",
            (true, false, false) => "reverse",
            (false, true, false) => "complement",
            (true, true, false) => "reverse-complement",
            (false, false, true) => "inverse",
            (true, false, true) => "inverse-reverse",
            (false, true, true) => "inverse-complement",
            (true, true, true) => "inverse-reverse-complement",
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Symmetry::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::parse(s, s, 0, "unknown symmetry"))
    }
}

/// The smallest image of `set` under the eight symmetries.
///
/// Two sets lie in the same symmetry class iff their canonical forms agree.
pub fn canonicalize_set(set: &PatternSet) -> PatternSet {
    Symmetry::ALL
        .iter()
        .map(|g| g.apply_set(set))
        .min()
        .expect("group is nonempty")
}

/// The distinct images of `set`, sorted.
pub fn orbit(set: &PatternSet) -> Vec<PatternSet> {
    let mut images: Vec<PatternSet> = Symmetry::ALL.iter().map(|g| g.apply_set(set)).collect();
    images.sort();
    images.dedup();
    images
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contain::contains;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn generator_examples() {
        assert_eq!(Symmetry::REVERSE.apply(&p("123")), p("321"));
        assert_eq!(Symmetry::COMPLEMENT.apply(&p("231")), p("213"));
        assert_eq!(Symmetry::INVERSE.apply(&p("231")), p("312"));
        assert_eq!(Symmetry::IDENTITY.apply(&p("2413")), p("2413"));
        assert_eq!(Symmetry::IDENTITY.apply(&Permutation::empty()), Permutation::empty());
    }

    #[test]
    fn eight_distinct_elements() {
        // 12453 has trivial stabilizer, so distinct elements give distinct images.
        let probe = p("12453");
        let mut images: Vec<Permutation> = Symmetry::ALL.iter().map(|g| g.apply(&probe)).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), 8);
    }

    #[test]
    fn generators_are_involutions() {
        for n in 0..=5 {
            for pi in Permutation::all(n) {
                for g in [Symmetry::REVERSE, Symmetry::COMPLEMENT, Symmetry::INVERSE] {
                    assert_eq!(g.apply(&g.apply(&pi)), pi);
                }
            }
        }
    }

    #[test]
    fn composition_table_matches_action() {
        for n in 0..=5 {
            for pi in Permutation::all(n) {
                for g in Symmetry::ALL {
                    for h in Symmetry::ALL {
                        assert_eq!(g.compose(h).apply(&pi), g.apply(&h.apply(&pi)), "{g} after {h} on {pi}");
                    }
                }
            }
        }
    }

    #[test]
    fn group_laws() {
        for g in Symmetry::ALL {
            assert_eq!(g.compose(Symmetry::IDENTITY), g);
            assert_eq!(Symmetry::IDENTITY.compose(g), g);
            assert_eq!(g.compose(g.inverse_element()), Symmetry::IDENTITY);
            for h in Symmetry::ALL {
                assert!(Symmetry::ALL.contains(&g.compose(h)));
                for k in Symmetry::ALL {
                    assert_eq!(g.compose(h).compose(k), g.compose(h.compose(k)));
                }
            }
        }
    }

    #[test]
    fn symmetry_preserves_containment() {
        for n in 0..=6 {
            let pis: Vec<Permutation> = Permutation::all(n).collect();
            for k in 0..=4.min(n) {
                for sigma in Permutation::all(k) {
                    for pi in &pis {
                        let c = contains(pi, &sigma);
                        for g in Symmetry::ALL {
                            assert_eq!(c, contains(&g.apply(pi), &g.apply(&sigma)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_form_is_orbit_invariant() {
        let sets: Vec<PatternSet> = ["132", "1234,1243,1342,4231", "12,321", "2413,3142", ""]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        for s in &sets {
            let c = canonicalize_set(s);
            assert_eq!(canonicalize_set(&c), c);
            for g in Symmetry::ALL {
                assert_eq!(canonicalize_set(&g.apply_set(s)), c);
            }
            assert!(orbit(s).contains(&c));
            assert_eq!(8 % orbit(s).len(), 0);
        }
    }

    #[test]
    fn singletons_of_length_three() {
        let mut classes: Vec<PatternSet> = Permutation::all(3)
            .map(|q| canonicalize_set(&PatternSet::new([q])))
            .collect();
        classes.sort();
        classes.dedup();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].to_strings(), ["123"]);
        assert_eq!(classes[1].to_strings(), ["132"]);
    }

    #[test]
    fn names_round_trip() {
        for g in Symmetry::ALL {
            assert_eq!(g.name().parse::<Symmetry>().unwrap(), g);
        }
    }
}
