use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Basis, BasisSet};
use crate::numerics::{combinations, pairwise_sum};
use crate::{Error, Result};

fn same_dim(a: &Basis, b: &Basis) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `|<a_i|b_j>|` for all `i, j`.
pub fn overlap_moduli(a: &Basis, b: &Basis) -> Result<DMatrix<f64>> {
    same_dim(a, b)?;
    Ok((a.matrix().adjoint() * b.matrix()).map(|z| z.norm()))
}

pub fn is_mub_pair(a: &Basis, b: &Basis, tol: f64) -> Result<bool> {
    let target = 1.0 / a.dim() as f64;
    let o = overlap_moduli(a, b)?;
    Ok(o.iter().all(|x| (x * x - target).abs() <= tol))
}

/// Squared basis distance `1 - 1/(d-1) sum_ij (|<a_i|b_j>|^2 - 1/d)^2`.
///
/// For `d = 1` every pair of bases coincides up to phase and the distance is 0.
pub fn distance_sq(a: &Basis, b: &Basis) -> Result<f64> {
    let d = a.dim();
    if d == 1 {
        same_dim(a, b)?;
        return Ok(0.0);
    }
    let o = overlap_moduli(a, b)?;
    let target = 1.0 / d as f64;
    // symmetric summation order: sort terms so D(a,b) == D(b,a) bit for bit
    let mut terms: Vec<f64> = o.iter().map(|x| (x * x - target).powi(2)).collect();
    terms.sort_by(f64::total_cmp);
    Ok(1.0 - pairwise_sum(&terms) / (d as f64 - 1.0))
}

/// Optimal two-basis QRAC value `1/2 + 1/(2 d^2) sum_ij |<a_i|b_j>|` for measurement
/// bases `a` and `b`.
pub(crate) fn pair_success(a: &Basis, b: &Basis) -> Result<f64> {
    let d = a.dim() as f64;
    let o = overlap_moduli(a, b)?;
    let mut terms: Vec<f64> = o.iter().copied().collect();
    terms.sort_by(f64::total_cmp);
    Ok(0.5 + pairwise_sum(&terms) / (2.0 * d * d))
}

/// Optimal quantum `2^d -> 1` value, `(1 + 1/sqrt(d)) / 2`.
pub fn quantum_pair_value(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (d as f64).sqrt())
}

/// Optimal classical `2^d -> 1` value, `(1 + 1/d) / 2`.
pub fn classical_pair_value(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / d as f64)
}

fn pair_mean(set: &BasisSet, f: impl Fn(&Basis, &Basis) -> Result<f64>) -> Result<f64> {
    set.require(2)?;
    let vals = combinations(set.n(), 2)
        .into_iter()
        .map(|p| f(set.basis(p[0]), set.basis(p[1])))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = vals;
    // order-independent so permuting the bases cannot change the result
    sorted.sort_by(f64::total_cmp);
    Ok(pairwise_sum(&sorted) / sorted.len() as f64)
}

/// Mean squared distance over all unordered pairs.
pub fn avg_distance_sq(set: &BasisSet) -> Result<f64> {
    pair_mean(set, distance_sq)
}

/// Mean optimal two-basis QRAC value over all pairs; the `(n,2)^d` pQRAC value of the set.
pub fn pbar(set: &BasisSet) -> Result<f64> {
    pair_mean(set, pair_success)
}

/// `pbar` affinely rescaled so identical bases give 0 and pairwise MUBs give 1.
pub fn qbar(set: &BasisSet) -> Result<f64> {
    let d = set.d();
    if d < 2 {
        return Err(Error::InvalidParameter("qbar needs d >= 2".into()));
    }
    let pc = classical_pair_value(d);
    let pq = quantum_pair_value(d);
    Ok((pbar(set)? - pc) / (pq - pc))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairMeasures {
    pub a: usize,
    pub b: usize,
    pub distance_sq: f64,
    pub pair_value: f64,
    pub qbar: f64,
    pub max_unbiasedness_deviation: f64,
}

/// Per-pair breakdown of the set measures.
pub fn pair_table(set: &BasisSet) -> Result<Vec<PairMeasures>> {
    set.require(2)?;
    let d = set.d();
    let pc = classical_pair_value(d);
    let pq = quantum_pair_value(d);
    combinations(set.n(), 2)
        .into_iter()
        .map(|p| {
            let (x, y) = (set.basis(p[0]), set.basis(p[1]));
            let pv = pair_success(x, y)?;
            let o = overlap_moduli(x, y)?;
            let dev = o.iter().fold(0.0f64, |m, v| m.max((v * v - 1.0 / d as f64).abs()));
            Ok(PairMeasures {
                a: p[0],
                b: p[1],
                distance_sq: distance_sq(x, y)?,
                pair_value: pv,
                qbar: if d >= 2 { (pv - pc) / (pq - pc) } else { f64::NAN },
                max_unbiasedness_deviation: dev,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{fourier, mub_family};

    #[test]
    fn identical_and_unbiased_extremes() {
        let c = Basis::computational(3);
        let f = fourier(3);
        assert!(distance_sq(&c, &c).unwrap().abs() < 1e-15);
        assert!((distance_sq(&c, &f).unwrap() - 1.0).abs() < 1e-12);
        let o = overlap_moduli(&c, &f).unwrap();
        assert!(o.iter().all(|x| (x - 1.0 / 3f64.sqrt()).abs() < 1e-12));
        let id = overlap_moduli(&c, &c).unwrap();
        assert_eq!(id, DMatrix::identity(3, 3));
    }

    #[test]
    fn identical_bases_not_unbiased() {
        let c = Basis::computational(4);
        assert!(!is_mub_pair(&c, &c, 1e-6).unwrap());
    }

    #[test]
    fn qubit_pbar() {
        let s = mub_family(2).unwrap().subset(&[0, 1]);
        assert!((pbar(&s).unwrap() - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn set_endpoints() {
        for d in [2, 3, 5] {
            let mub = mub_family(d).unwrap();
            assert!((pbar(&mub).unwrap() - quantum_pair_value(d)).abs() < 1e-12);
            assert!((qbar(&mub).unwrap() - 1.0).abs() < 1e-10);
            assert!((avg_distance_sq(&mub).unwrap() - 1.0).abs() < 1e-12);
            let same = BasisSet::new(vec![Basis::computational(d); 3]).unwrap();
            assert!((pbar(&same).unwrap() - classical_pair_value(d)).abs() < 1e-12);
            assert!(qbar(&same).unwrap().abs() < 1e-12);
            assert!(avg_distance_sq(&same).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let one = BasisSet::new(vec![Basis::computational(3)]).unwrap();
        assert!(pbar(&one).is_err());
        assert!(avg_distance_sq(&one).is_err());
        let tiny = BasisSet::new(vec![Basis::computational(1); 2]).unwrap();
        assert!(qbar(&tiny).is_err());
        assert!(distance_sq(&Basis::computational(2), &Basis::computational(3)).is_err());
    }

    #[test]
    fn pair_table_rows() {
        let s = mub_family(3).unwrap();
        let t = pair_table(&s).unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.iter().all(|r| (r.qbar - 1.0).abs() < 1e-10));
    }
}
