//! Basis-set JSON files.
//!
//! ```json
//! {"d": 2, "n": 1, "bases": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]}
//! ```
//!
//! `bases[k][c]` is column `c` of basis `k`, a list of `d` `[re, im]` pairs. Numbers
//! are written with 17 significant digits so a save/load round trip is exact.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Basis, BasisSet, FILE_ORTHONORMAL_TOL};
use crate::numerics::{c64, CMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisSetFile {
    pub d: usize,
    pub n: usize,
    pub bases: Vec<Vec<Vec<[f64; 2]>>>,
}

impl BasisSetFile {
    pub fn from_set(set: &BasisSet) -> Self {
        let bases = set
            .bases()
            .iter()
            .map(|b| {
                (0..b.dim())
                    .map(|c| b.matrix().column(c).iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            })
            .collect();
        Self { d: set.d(), n: set.n(), bases }
    }

    pub fn into_set(self) -> Result<BasisSet> {
        let d = self.d;
        if d == 0 {
            return Err(Error::Validation("d must be positive".into()));
        }
        if self.bases.len() != self.n {
            return Err(Error::Validation(format!("n = {} but {} bases present", self.n, self.bases.len())));
        }
        let mut out = Vec::with_capacity(self.n);
        for (k, cols) in self.bases.into_iter().enumerate() {
            if cols.len() != d || cols.iter().any(|c| c.len() != d) {
                return Err(Error::Validation(format!("basis {k} is not {d} columns of length {d}")));
            }
            let m = CMatrix::from_fn(d, d, |r, c| c64(cols[c][r][0], cols[c][r][1]));
            let basis = Basis::with_tolerance(m, FILE_ORTHONORMAL_TOL)
                .map_err(|e| Error::Validation(format!("basis {k}: {e}")))?;
            out.push(basis);
        }
        BasisSet::new(out)
    }
}

impl Serialize for BasisSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BasisSetFile::from_set(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BasisSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        BasisSetFile::deserialize(deserializer)?.into_set().map_err(serde::de::Error::custom)
    }
}

fn push_num(s: &mut String, x: f64) {
    if x.is_finite() {
        let _ = write!(s, "{x:.16e}");
    } else {
        s.push_str("null");
    }
}

/// Serialized file contents with full-precision numbers.
pub fn to_json_string(set: &BasisSet) -> String {
    let mut s = String::new();
    let _ = write!(s, "{{\"d\": {}, \"n\": {}, \"bases\": [", set.d(), set.n());
    for (k, b) in set.bases().iter().enumerate() {
        if k > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for c in 0..b.dim() {
            if c > 0 {
                s.push_str(", ");
            }
            s.push('[');
            for r in 0..b.dim() {
                if r > 0 {
                    s.push_str(", ");
                }
                let z = b.matrix()[(r, c)];
                s.push('[');
                push_num(&mut s, z.re);
                s.push_str(", ");
                push_num(&mut s, z.im);
                s.push(']');
            }
            s.push(']');
        }
        s.push(']');
    }
    s.push_str("]}\n");
    s
}

pub fn parse_basis_set(text: &str) -> Result<BasisSet> {
    let file: BasisSetFile = serde_json::from_str(text)?;
    file.into_set()
}

pub fn save_basis_set(set: &BasisSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(set))?;
    Ok(())
}

pub fn load_basis_set(path: impl AsRef<Path>) -> Result<BasisSet> {
    parse_basis_set(&std::fs::read_to_string(path)?)
}
