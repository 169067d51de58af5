//! Symmetry-reduced moment-matrix relaxation for `(n, 2)^d` pQRACs.
//!
//! A quantum strategy is described by operator words: the identity, the encoded states
//! `rho_{x,z}`, Bob's projectors `M^y_b` and, at level [`Level::Q1Succ`], products
//! `rho_{x,z} M^{z_i}_{x_{z_i}}`. The moment matrix collects `Re tr(w_i^dagger w_j)`.
//! Any `d`-dimensional strategy gives a PSD moment matrix whose pairing with the game
//! matrix is the game value, so maximizing over PSD matrices in the span of sampled
//! moment matrices bounds the value from above.
//!
//! Relabeling inputs and outputs leaves the game unchanged, so the relaxation can be
//! restricted to matrices invariant under that group. Averaging random moment matrices
//! over the group and collecting their span gives a small basis for the search space.
//!
//! The identity word is realized as the `d x d` identity, so entry `(1, 1)` is `d`.

mod average;
mod bound;
mod group;
mod moment;
mod plan;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::numerics::combinations;
use crate::{Error, Result};

pub use average::{brute_force_average, group_average};
pub use bound::{
    bound_from_span, bound_problem, discover_span, qbar_from_ptilde, upper_bound, BoundOptions, BoundReport, SpanOptions,
    SpanResult,
};
pub use group::{apply_group, GroupElement};
pub use moment::{game_matrix, moment_matrix, random_moment_matrix, random_realization, Realization};
pub use plan::{memory_estimate, MemoryEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "Q1")]
    Q1,
    #[serde(rename = "Q1succ")]
    Q1Succ,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Q1 => "Q1",
            Level::Q1Succ => "Q1succ",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q1" => Ok(Level::Q1),
            "q1succ" | "q1+succ" => Ok(Level::Q1Succ),
            _ => Err(Error::InvalidParameter(format!("unknown level {s:?} (expected Q1 or Q1succ)"))),
        }
    }
}

/// One operator word. Pairs `z` are sorted and `x[k]` is the dit at position `z[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WordLabel {
    Identity,
    State { z: [usize; 2], x: [usize; 2] },
    Measurement { y: usize, b: usize },
    /// `rho_{x,z} M^{z[i]}_{x[i]}`.
    SuccessPair { z: [usize; 2], x: [usize; 2], i: usize },
}

impl WordLabel {
    pub fn in_range(&self, n: usize, d: usize) -> bool {
        match *self {
            WordLabel::Identity => true,
            WordLabel::State { z, x } => z[0] < z[1] && z[1] < n && x[0] < d && x[1] < d,
            WordLabel::Measurement { y, b } => y < n && b < d,
            WordLabel::SuccessPair { z, x, i } => z[0] < z[1] && z[1] < n && x[0] < d && x[1] < d && i < 2,
        }
    }
}

fn check_params(n: usize, d: usize) -> Result<()> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!("hierarchy needs n >= 2 and d >= 2 (n={n}, d={d})")));
    }
    Ok(())
}

/// Canonical word list: identity, states, measurements, then success pairs.
pub fn build_words(n: usize, d: usize, level: Level) -> Result<Vec<WordLabel>> {
    check_params(n, d)?;
    let pairs = combinations(n, 2);
    let inputs = || (0..d * d).map(move |i| [i / d, i % d]);
    let mut words = vec![WordLabel::Identity];
    for z in &pairs {
        words.extend(inputs().map(|x| WordLabel::State { z: [z[0], z[1]], x }));
    }
    for y in 0..n {
        words.extend((0..d).map(|b| WordLabel::Measurement { y, b }));
    }
    if level == Level::Q1Succ {
        for z in &pairs {
            for x in inputs() {
                words.extend((0..2).map(|i| WordLabel::SuccessPair { z: [z[0], z[1]], x, i }));
            }
        }
    }
    Ok(words)
}

/// Words of one scenario with a reverse index.
#[derive(Debug, Clone)]
pub struct WordSet {
    pub n: usize,
    pub d: usize,
    pub level: Level,
    pub words: Vec<WordLabel>,
    index: HashMap<WordLabel, usize>,
}

impl WordSet {
    pub fn new(n: usize, d: usize, level: Level) -> Result<Self> {
        let words = build_words(n, d, level)?;
        let index = words.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        Ok(Self { n, d, level, words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, w: &WordLabel) -> Option<usize> {
        self.index.get(w).copied()
    }
}

#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub n: usize,
    pub d: usize,
    pub level: Level,
    pub words: Vec<WordLabel>,
    /// Real symmetric, indexed like `words`.
    pub entries: DMatrix<f64>,
}

impl MomentMatrix {
    pub fn word_set(&self) -> Result<WordSet> {
        let ws = WordSet::new(self.n, self.d, self.level)?;
        if ws.words != self.words {
            return Err(Error::Validation("moment matrix words are not in canonical order".into()));
        }
        Ok(ws)
    }

    pub fn with_entries(&self, entries: DMatrix<f64>) -> Self {
        Self { n: self.n, d: self.d, level: self.level, words: self.words.clone(), entries }
    }
}
