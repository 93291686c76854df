//! Permutation pattern avoidance toolkit.
//!
//! - [`perm`]: permutations, pattern sets and their text formats
//! - [`contain`]: classical pattern containment
//! - [`symmetry`]: the eight matrix symmetries and canonical pattern sets
//! - [`avoid`]: exact counting of avoidance classes via a generating tree
//! - [`template`]: template-generated permutation families and their certification
//! - [`seq`]: classification of counting sequences
//! - [`survey`]: exhaustive and randomized surveys over pattern sets
//! - [`reproduce`]: named end-to-end checks of the reference results

pub mod avoid;
mod bigserde;
pub mod contain;
pub mod error;
pub mod perm;
pub mod reproduce;
pub mod seq;
pub mod survey;
pub mod symmetry;
pub mod template;

pub use avoid::{count_avoiders, count_avoiders_naive, enumerate_avoiders, CountOptions, CountSequence};
pub use contain::{avoids, contains};
pub use error::{Error, Result};
pub use perm::{flatten, PatternSet, Permutation};
pub use symmetry::{canonicalize_set, Symmetry};
