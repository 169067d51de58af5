use nalgebra::DMatrix;

use super::{solve_lmi, LmiProblem, SdpSolution, SolverOptions, SymMat};
use crate::numerics::{c64, check_hermitian, hermitian_eig, CMatrix};
use crate::{Error, Result};

/// `maximize sum_b tr(S_b M_b)` over POVMs `{M_b}`.
#[derive(Debug, Clone)]
pub struct BlockSdpProblem {
    pub blocks: Vec<CMatrix>,
}

impl BlockSdpProblem {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let d = blocks.first().map(|b| b.nrows()).ok_or_else(|| Error::InvalidParameter("no cost blocks".into()))?;
        for b in &blocks {
            if !b.is_square() {
                return Err(Error::NotSquare { rows: b.nrows(), cols: b.ncols() });
            }
            if b.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, found: b.nrows() });
            }
            check_hermitian(b)?;
        }
        Ok(Self { blocks })
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].nrows()
    }
}

/// Real symmetric embedding `X + iY -> [[X, -Y], [Y, X]]`.
fn embed(h: &CMatrix) -> DMatrix<f64> {
    let d = h.nrows();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let z = h[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Solves the POVM problem through its dual `min tr Y` s.t. `Y >= S_b` for every `b`.
///
/// The optimal POVM is read off the dual matrices of the certified LMI solve, so
/// `sum_b M_b = I` holds to the accuracy of the Newton system rather than the gap.
/// `objective` is the value of the returned POVM and `dual_bound` is `tr Y`.
pub fn solve_povm(p: &BlockSdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let d = p.dim();
    let nb = p.blocks.len();

    let mut terms: Vec<SymMat> = Vec::with_capacity(d * d);
    let mut c = Vec::with_capacity(d * d);
    for k in 0..d {
        terms.push(SymMat::from_upper([(k, k, 1.0), (d + k, d + k, 1.0)]));
        c.push(-1.0);
    }
    for i in 0..d {
        for j in i + 1..d {
            terms.push(SymMat::from_upper([(i, j, 1.0), (d + i, d + j, 1.0)]));
            c.push(0.0);
            terms.push(SymMat::from_upper([(i, d + j, -1.0), (j, d + i, 1.0)]));
            c.push(0.0);
        }
    }
    let f = terms.into_iter().map(|t| vec![t; nb]).collect();
    let f0 = p.blocks.iter().map(|s| SymMat::Dense(-embed(s))).collect();
    let lmi = LmiProblem::with_blocks(vec![2 * d; nb], c, f0, f)?;

    let mut top = f64::NEG_INFINITY;
    for s in &p.blocks {
        top = top.max(*hermitian_eig(s)?.values.last().expect("non-empty block"));
    }
    let mut start = vec![0.0; d * d];
    start[..d].iter_mut().for_each(|y| *y = top + 1.0);
    let opts = SolverOptions { start: Some(start), ..opts.clone() };
    let mut sol = solve_lmi(&lmi, &opts)?;
    if sol.dual_blocks.len() != nb {
        return Err(Error::Solver("POVM solve produced no dual certificate".into()));
    }

    let povm: Vec<CMatrix> = sol
        .dual_blocks
        .iter()
        .map(|z| {
            let m = CMatrix::from_fn(d, d, |r, cc| {
                c64(z[(r, cc)] + z[(d + r, d + cc)], z[(d + r, cc)] - z[(r, d + cc)])
            });
            (&m + m.adjoint()) * c64(0.5, 0.0)
        })
        .collect();
    let value: f64 = p.blocks.iter().zip(&povm).map(|(s, m)| (s * m).trace().re).sum();
    let bound = -sol.objective;
    sol.objective = value;
    sol.dual_bound = bound;
    sol.gap = (bound - value) / value.abs().max(1.0);
    sol.povm = Some(povm);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{mub_family, quantum_pair_value, Basis};
    use crate::numerics::projector;

    fn completeness(m: &[CMatrix]) -> f64 {
        let d = m[0].nrows();
        let sum = m.iter().fold(CMatrix::zeros(d, d), |acc, x| acc + x);
        (sum - CMatrix::identity(d, d)).camax()
    }

    #[test]
    fn projector_costs() {
        let d = 3;
        let b = Basis::computational(d);
        let p = BlockSdpProblem::new((0..d).map(|k| projector(&b.vector(k))).collect()).unwrap();
        let s = solve_povm(&p, &SolverOptions::default()).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-7, "{}", s.objective);
        let m = s.povm.unwrap();
        assert!(completeness(&m) < 1e-8);
        for (k, mk) in m.iter().enumerate() {
            assert!((mk[(k, k)].re - 1.0).abs() < 1e-6);
            assert!(hermitian_eig(mk).unwrap().values[0] > -1e-8);
        }
    }

    #[test]
    fn equal_costs_give_trace() {
        let s = CMatrix::from_fn(2, 2, |r, c| if r == c { c64(0.7 + r as f64, 0.0) } else { c64(0.1, if r < c { 0.2 } else { -0.2 }) });
        let p = BlockSdpProblem::new(vec![s.clone(); 3]).unwrap();
        let sol = solve_povm(&p, &SolverOptions::default()).unwrap();
        assert!((sol.objective - s.trace().re).abs() < 1e-7);
        assert!(completeness(sol.povm.as_ref().unwrap()) < 1e-8);
    }

    #[test]
    fn mub_pair_discrimination() {
        // Bob guessing x_1 given the optimal pair encodings of d = 3 MUBs
        let d = 3;
        let fam = mub_family(d).unwrap();
        let (b0, b1) = (fam.basis(0), fam.basis(1));
        let mut blocks = vec![CMatrix::zeros(d, d); d];
        for (x0, block) in blocks.iter_mut().enumerate() {
            for x1 in 0..d {
                let h = projector(&b0.vector(x0)) + projector(&b1.vector(x1));
                let (_, v) = crate::numerics::max_eig(&h).unwrap();
                *block += projector(&v) / c64((d * d) as f64, 0.0);
            }
        }
        let sol = solve_povm(&BlockSdpProblem::new(blocks).unwrap(), &SolverOptions::default()).unwrap();
        assert!((sol.objective - quantum_pair_value(d)).abs() < 1e-6, "{}", sol.objective);
    }

    #[test]
    fn scaling_invariance() {
        let b = crate::bases::BasisSet::random(1, 3, 4);
        let blocks: Vec<CMatrix> = (0..3).map(|k| projector(&b.basis(0).vector(k)) * c64(0.3 + k as f64, 0.0)).collect();
        let p1 = BlockSdpProblem::new(blocks.clone()).unwrap();
        let p2 = BlockSdpProblem::new(blocks.iter().map(|m| m * c64(7.0, 0.0)).collect()).unwrap();
        let s1 = solve_povm(&p1, &SolverOptions::default()).unwrap();
        let s2 = solve_povm(&p2, &SolverOptions::default()).unwrap();
        assert!((s2.objective - 7.0 * s1.objective).abs() < 1e-6 * s2.objective);
        for (a, b) in s1.povm.unwrap().iter().zip(s2.povm.unwrap().iter()) {
            assert!((a - b).camax() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_blocks() {
        assert!(BlockSdpProblem::new(vec![]).is_err());
        assert!(BlockSdpProblem::new(vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)]).is_err());
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = c64(1.0, 0.0);
        assert!(BlockSdpProblem::new(vec![h]).is_err());
    }
}
