//! Orthonormal bases, MUB constructions, unbiasedness measures and basis-set files.

mod construct;
mod galois;
mod io;
mod measures;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::{c64, random_unitary, CMatrix, CVector};
use crate::{Error, Result};

pub use construct::{fourier, mub_family, prime_power};
pub use galois::GaloisField;
pub use io::{load_basis_set, parse_basis_set, save_basis_set, to_json_string, BasisSetFile};
pub(crate) use measures::pair_success;
pub use measures::{
    avg_distance_sq, classical_pair_value, distance_sq, is_mub_pair, overlap_moduli, pair_table,
    pbar, qbar, quantum_pair_value, PairMeasures,
};

/// Orthonormality tolerance for bases built in memory.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Looser tolerance applied to bases read from files.
pub const FILE_ORTHONORMAL_TOL: f64 = 1e-8;

/// `d` orthonormal vectors of `C^d`, stored as the columns of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    vectors: CMatrix,
}

impl Basis {
    pub fn new(vectors: CMatrix) -> Result<Self> {
        Self::with_tolerance(vectors, ORTHONORMAL_TOL)
    }

    pub fn with_tolerance(vectors: CMatrix, tol: f64) -> Result<Self> {
        if !vectors.is_square() || vectors.nrows() == 0 {
            return Err(Error::NotSquare { rows: vectors.nrows(), cols: vectors.ncols() });
        }
        if let Some((i, j, dev)) = worst_gram_entry(&vectors) {
            if dev > tol {
                return Err(Error::Validation(format!(
                    "columns {i} and {j} violate orthonormality by {dev:e} (tolerance {tol:e})"
                )));
            }
        }
        Ok(Self { vectors })
    }

    pub fn computational(d: usize) -> Self {
        Self { vectors: CMatrix::identity(d, d) }
    }

    /// Columns of the `U` factor of a seeded uniform-entry Ginibre draw.
    pub fn random(d: usize, seed: u64) -> Self {
        Self { vectors: random_unitary(d, seed) }
    }

    pub(crate) fn from_unitary_unchecked(vectors: CMatrix) -> Self {
        Self { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    /// `U B`, the basis rotated by a common unitary.
    pub fn rotated(&self, u: &CMatrix) -> Self {
        Self { vectors: u * &self.vectors }
    }

    /// Columns reordered so that new column `k` is old column `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (k, &src) in perm.iter().enumerate() {
            m.set_column(k, &self.vectors.column(src));
        }
        Self { vectors: m }
    }

    /// Each column multiplied by a unit phase.
    pub fn rephased(&self, phases: &[f64]) -> Self {
        let mut m = self.vectors.clone();
        for (k, &phi) in phases.iter().enumerate() {
            let z = Complex64::from_polar(1.0, phi);
            m.column_mut(k).iter_mut().for_each(|x| *x *= z);
        }
        Self { vectors: m }
    }
}

/// Position and size of the largest `|G - I|` entry of the Gram matrix.
fn worst_gram_entry(m: &CMatrix) -> Option<(usize, usize, f64)> {
    let g = m.adjoint() * m;
    let mut worst = None;
    let mut best = -1.0;
    for i in 0..g.nrows() {
        for j in i..g.ncols() {
            let target = if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
            let dev = (g[(i, j)] - target).norm();
            if dev > best {
                best = dev;
                worst = Some((i, j, dev));
            }
        }
    }
    worst
}

/// Ordered list of bases of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    d: usize,
    bases: Vec<Basis>,
}

impl BasisSet {
    pub fn new(bases: Vec<Basis>) -> Result<Self> {
        let Some(first) = bases.first() else {
            return Err(Error::TooFewBases { need: 1, got: 0 });
        };
        let d = first.dim();
        if let Some(b) = bases.iter().find(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: b.dim() });
        }
        Ok(Self { d, bases })
    }

    /// `n` independent seeded random bases; basis `k` uses `derive_seed(seed, k)`.
    pub fn random(n: usize, d: usize, seed: u64) -> Self {
        let bases = (0..n as u64)
            .map(|k| Basis::random(d, crate::numerics::derive_seed(seed, k)))
            .collect();
        Self { d, bases }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn basis(&self, k: usize) -> &Basis {
        &self.bases[k]
    }

    pub fn into_bases(self) -> Vec<Basis> {
        self.bases
    }

    /// The bases at positions `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self { d: self.d, bases: idx.iter().map(|&i| self.bases[i].clone()).collect() }
    }

    pub fn rotated(&self, u: &CMatrix) -> Self {
        Self { d: self.d, bases: self.bases.iter().map(|b| b.rotated(u)).collect() }
    }

    pub(crate) fn require(&self, need: usize) -> Result<()> {
        if self.n() < need {
            return Err(Error::TooFewBases { need, got: self.n() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub n: usize,
    pub d: usize,
    pub dbar_sq: f64,
    pub pbar: f64,
    pub qbar: f64,
}

impl SetSummary {
    pub fn of(set: &BasisSet) -> Result<Self> {
        Ok(Self {
            n: set.n(),
            d: set.d(),
            dbar_sq: avg_distance_sq(set)?,
            pbar: pbar(set)?,
            qbar: qbar(set)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_orthonormal() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = c64(0.1, 0.0);
        let err = Basis::new(m).unwrap_err().to_string();
        assert!(err.contains("columns"), "{err}");
    }

    #[test]
    fn set_rejects_mixed_dimensions() {
        let r = BasisSet::new(vec![Basis::computational(2), Basis::computational(3)]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        assert!(BasisSet::new(vec![]).is_err());
    }

    #[test]
    fn random_set_is_orthonormal() {
        let s = BasisSet::random(4, 6, 11);
        for b in s.bases() {
            assert!(Basis::new(b.matrix().clone()).is_ok());
        }
    }
}
