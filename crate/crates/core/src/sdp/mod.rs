//! Small dense semidefinite programming.
//!
//! [`solve_lmi`] maximizes `c . y` subject to a block-diagonal linear matrix inequality
//! `F0 + sum_i y_i F_i >= 0` and linear equalities `A y = b`. It follows the central path
//! of the log-det barrier with Newton steps and reports a dual bound taken from a
//! certified dual point at every step, so the returned gap is rigorous rather than
//! estimated. [`solve_povm`] handles POVM optimization through its dual, which is an
//! instance of the same LMI form.

mod dump;
mod lmi;
mod povm;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::numerics::CMatrix;
use crate::{Error, Result};

pub use dump::{dump_lmi, write_lmi_dump};
pub use lmi::solve_lmi;
pub use povm::{solve_povm, BlockSdpProblem};

/// Real symmetric matrix term of an LMI, dense or as a full list of nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub enum SymMat {
    Dense(DMatrix<f64>),
    /// `(row, col, value)` with both triangles listed explicitly.
    Sparse(Vec<(usize, usize, f64)>),
}

impl SymMat {
    pub fn zero() -> Self {
        SymMat::Sparse(Vec::new())
    }

    /// Sparse symmetric matrix from upper-triangle entries; off-diagonal entries are mirrored.
    pub fn from_upper(entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut out = Vec::new();
        for (r, c, v) in entries {
            if v == 0.0 {
                continue;
            }
            out.push((r, c, v));
            if r != c {
                out.push((c, r, v));
            }
        }
        SymMat::Sparse(out)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SymMat::Dense(m) => m.iter().all(|&x| x == 0.0),
            SymMat::Sparse(e) => e.is_empty(),
        }
    }

    /// `dst += alpha * self`.
    pub fn add_to(&self, dst: &mut DMatrix<f64>, alpha: f64) {
        match self {
            SymMat::Dense(m) => *dst += m * alpha,
            SymMat::Sparse(e) => {
                for &(r, c, v) in e {
                    dst[(r, c)] += alpha * v;
                }
            }
        }
    }

    /// `tr(self * m)` for symmetric `m`.
    pub fn dot(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            SymMat::Dense(a) => a.dot(m),
            SymMat::Sparse(e) => e.iter().map(|&(r, c, v)| v * m[(c, r)]).sum(),
        }
    }

    /// `w * self * w` for symmetric `w`.
    pub fn sandwich(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            SymMat::Dense(a) => w * a * w,
            SymMat::Sparse(e) => {
                let n = w.nrows();
                let mut out = DMatrix::zeros(n, n);
                for &(r, c, v) in e {
                    out.ger(v, &w.column(r), &w.column(c), 1.0);
                }
                out
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            SymMat::Dense(m) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
                }
                let scale = m.amax().max(1.0);
                let asym = (m - m.transpose()).amax();
                if asym > 1e-12 * scale {
                    return Err(Error::Validation(format!("LMI term not symmetric (deviation {asym:.3e})")));
                }
            }
            SymMat::Sparse(e) => {
                if let Some(&(r, c, _)) = e.iter().find(|&&(r, c, _)| r >= n || c >= n) {
                    return Err(Error::Validation(format!("sparse entry ({r}, {c}) outside a {n}x{n} block")));
                }
                let dense = self.to_dense(n);
                if (&dense - dense.transpose()).amax() > 1e-12 * dense.amax().max(1.0) {
                    return Err(Error::Validation("sparse LMI term not symmetric".into()));
                }
            }
        }
        Ok(())
    }
}

/// `maximize c . y` s.t. `F0 + sum_i y_i F_i >= 0` (block diagonal) and `A y = b`.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    pub block_sizes: Vec<usize>,
    pub c: Vec<f64>,
    /// `f0[block]`.
    pub f0: Vec<SymMat>,
    /// `f[var][block]`.
    pub f: Vec<Vec<SymMat>>,
    pub eq_a: Vec<Vec<f64>>,
    pub eq_b: Vec<f64>,
}

impl LmiProblem {
    /// Single-block problem `sum_i y_i F_i >= 0` with no constant term.
    pub fn new(c: Vec<f64>, f: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = f.first().map(|m| m.nrows()).ok_or_else(|| Error::InvalidParameter("no LMI terms".into()))?;
        Self::with_blocks(vec![n], c, vec![SymMat::zero()], f.into_iter().map(|m| vec![SymMat::Dense(m)]).collect())
    }

    pub fn with_blocks(block_sizes: Vec<usize>, c: Vec<f64>, f0: Vec<SymMat>, f: Vec<Vec<SymMat>>) -> Result<Self> {
        let p = Self { block_sizes, c, f0, f, eq_a: Vec::new(), eq_b: Vec::new() };
        p.validate()?;
        Ok(p)
    }

    pub fn add_equality(&mut self, a: Vec<f64>, b: f64) -> Result<()> {
        if a.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), found: a.len() });
        }
        self.eq_a.push(a);
        self.eq_b.push(b);
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.c.len()
    }

    /// Total LMI dimension, the sum of block sizes.
    pub fn dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.nvars();
        let nb = self.block_sizes.len();
        if nb == 0 || self.block_sizes.contains(&0) {
            return Err(Error::InvalidParameter("LMI blocks must be non-empty".into()));
        }
        if self.f.len() != v {
            return Err(Error::DimensionMismatch { expected: v, found: self.f.len() });
        }
        if self.f0.len() != nb {
            return Err(Error::DimensionMismatch { expected: nb, found: self.f0.len() });
        }
        for (k, &n) in self.block_sizes.iter().enumerate() {
            self.f0[k].check(n)?;
        }
        for fi in &self.f {
            if fi.len() != nb {
                return Err(Error::DimensionMismatch { expected: nb, found: fi.len() });
            }
            for (k, &n) in self.block_sizes.iter().enumerate() {
                fi[k].check(n)?;
            }
        }
        if self.eq_a.len() != self.eq_b.len() || self.eq_a.iter().any(|r| r.len() != v) {
            return Err(Error::Validation("equality rows must have one entry per variable".into()));
        }
        Ok(())
    }

    /// Blocks of `F0 + sum_i y_i F_i`.
    pub fn slack(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        self.block_sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut m = self.f0[k].to_dense(n);
                for (fi, &yi) in self.f.iter().zip(y) {
                    if yi != 0.0 {
                        fi[k].add_to(&mut m, yi);
                    }
                }
                m
            })
            .collect()
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        self.c.iter().zip(y).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative gap `(dual - primal) / max(1, |primal|)` at which to stop.
    pub tol: f64,
    /// Cap on Newton steps, phase I included.
    pub max_iter: usize,
    /// Strictly feasible starting point; searched for when absent or infeasible.
    pub start: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, start: None }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    /// Primal objective `c . y` at the returned point.
    pub objective: f64,
    /// Best certified upper bound on the optimum (`+inf` if none was certified).
    pub dual_bound: f64,
    /// Relative gap `(dual_bound - objective) / max(1, |objective|)`.
    pub gap: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Iterates whose primal value exceeded the certified dual value; always 0 for a sound solve.
    pub duality_violations: usize,
    /// Dual matrix blocks of the best certificate.
    #[serde(skip)]
    pub dual_blocks: Vec<DMatrix<f64>>,
    /// POVM elements, set by [`solve_povm`].
    #[serde(skip)]
    pub povm: Option<Vec<CMatrix>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_ops_match_dense() {
        let s = SymMat::from_upper([(0, 1, 2.0), (2, 2, -1.0), (1, 2, 0.5)]);
        let d = SymMat::Dense(s.to_dense(3));
        let w = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 3.0]);
        assert!((s.dot(&w) - d.dot(&w)).abs() < 1e-14);
        assert!((s.sandwich(&w) - d.sandwich(&w)).amax() < 1e-14);
    }

    #[test]
    fn validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(LmiProblem::new(vec![1.0], vec![bad]).is_err());
        let ok = DMatrix::identity(2, 2);
        let mut p = LmiProblem::new(vec![1.0], vec![ok]).unwrap();
        assert!(p.add_equality(vec![1.0, 2.0], 1.0).is_err());
        assert!(SymMat::from_upper([(0, 3, 1.0)]).check(2).is_err());
    }
}
