use nalgebra::DMatrix;

use crate::{Error, Result};

/// Incrementally grown orthonormal basis for the span of inserted vectors.
///
/// Symmetric matrices are vectorized over the upper triangle with off-diagonal
/// entries scaled by `sqrt(2)`, so the Euclidean inner product of two vectors equals
/// the Frobenius inner product of the matrices.
#[derive(Debug, Clone)]
pub struct SpanTracker {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
    tol: f64,
}

impl SpanTracker {
    pub fn new(ambient_dim: usize, tol: f64) -> Self {
        Self { ambient_dim, basis: Vec::new(), tol }
    }

    /// Tracker for symmetric `n x n` matrices.
    pub fn for_symmetric(n: usize, tol: f64) -> Self {
        Self::new(n * (n + 1) / 2, tol)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Relative residual `|v - P v| / |v|` against the current basis.
    pub fn relative_residual(&self, v: &[f64]) -> Result<f64> {
        let (r, norm) = self.residual(v)?;
        Ok(if norm == 0.0 { 0.0 } else { l2(&r) / norm })
    }

    /// Returns `true` iff the basis grew.
    pub fn insert(&mut self, v: &[f64]) -> Result<bool> {
        let (mut r, norm) = self.residual(v)?;
        if norm == 0.0 {
            return Ok(false);
        }
        let rn = l2(&r);
        if rn / norm <= self.tol {
            return Ok(false);
        }
        r.iter_mut().for_each(|x| *x /= rn);
        self.basis.push(r);
        Ok(true)
    }

    pub fn insert_symmetric(&mut self, m: &DMatrix<f64>) -> Result<bool> {
        let v = vectorize_symmetric(m);
        self.insert(&v)
    }

    fn residual(&self, v: &[f64]) -> Result<(Vec<f64>, f64)> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: v.len() });
        }
        let norm = l2(v);
        let mut r = v.to_vec();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &self.basis {
                let c: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        Ok((r, norm))
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn vectorize_symmetric(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let x = if i == j { m[(i, j)] } else { std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]) };
            out.push(x);
        }
    }
    out
}

pub fn unvectorize_symmetric(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng_for;
    use rand::Rng;

    #[test]
    fn identity_twice() {
        let mut t = SpanTracker::for_symmetric(3, 1e-7);
        let i = DMatrix::<f64>::identity(3, 3);
        assert!(t.insert_symmetric(&i).unwrap());
        assert!(!t.insert_symmetric(&i).unwrap());
    }

    #[test]
    fn orthogonal_rank_one() {
        let mut t = SpanTracker::for_symmetric(3, 1e-7);
        let mut e1 = DMatrix::<f64>::zeros(3, 3);
        e1[(0, 0)] = 1.0;
        let mut e2 = DMatrix::<f64>::zeros(3, 3);
        e2[(1, 1)] = 1.0;
        assert!(t.insert_symmetric(&e1).unwrap());
        assert!(t.insert_symmetric(&e2).unwrap());
    }

    #[test]
    fn saturates_at_triangular_count() {
        let d = 6;
        let mut rng = rng_for(1, 0);
        let mut t = SpanTracker::for_symmetric(d, 1e-7);
        for _ in 0..(d * (d + 1) / 2 + 5) {
            let a = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
            let s = &a + a.transpose();
            t.insert_symmetric(&s).unwrap();
        }
        assert_eq!(t.dim(), d * (d + 1) / 2);
        for (i, a) in t.basis().iter().enumerate() {
            for (j, b) in t.basis().iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let mut t = SpanTracker::new(4, 1e-7);
        assert!(t.insert(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn vectorization_preserves_frobenius() {
        let mut rng = rng_for(2, 0);
        let a = DMatrix::from_fn(5, 5, |_, _| rng.gen::<f64>());
        let a = &a + a.transpose();
        let b = DMatrix::from_fn(5, 5, |_, _| rng.gen::<f64>());
        let b = &b + b.transpose();
        let va = vectorize_symmetric(&a);
        let vb = vectorize_symmetric(&b);
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        assert!((dot - a.dot(&b)).abs() < 1e-10);
        assert!((unvectorize_symmetric(&va, 5) - &a).amax() < 1e-14);
    }
}
