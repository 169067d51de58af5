//! Cyclic Jacobi eigensolver for hermitian matrices.
//!
//! Sweeps visit the upper triangle in row-major order, so the rotation sequence (and
//! therefore the basis chosen inside a degenerate eigenspace) is a pure function of
//! the input bits.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{c64, check_hermitian, CMatrix, CVector};
use crate::Result;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eig(h: &CMatrix) -> Result<Eigen> {
    check_hermitian(h)?;
    Ok(jacobi(h.clone()))
}

/// Real symmetric convenience wrapper around [`hermitian_eig`].
pub fn symmetric_eig(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let h = a.map(|x| c64(x, 0.0));
    let eig = hermitian_eig(&h)?;
    Ok((eig.values, eig.vectors.map(|z| z.re)))
}

/// Largest eigenvalue and a unit eigenvector for it.
///
/// When the top eigenvalue is degenerate the lowest-index column among the
/// (ascending-ordered) eigenvectors within `1e-12 * scale` of the maximum is
/// returned. The vector's global phase is fixed so that its largest-modulus
/// component (first one on ties) is real and positive.
pub fn max_eig(h: &CMatrix) -> Result<(f64, CVector)> {
    let eig = hermitian_eig(h)?;
    let n = eig.values.len();
    let top = eig.values[n - 1];
    let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let col = (0..n)
        .find(|&k| top - eig.values[k] <= 1e-12 * scale)
        .unwrap_or(n - 1);
    let v = fix_phase(eig.vectors.column(col).into_owned());
    Ok((top, v))
}

pub(crate) fn fix_phase(mut v: CVector) -> CVector {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_abs + 1e-14 {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs > 0.0 {
        let phase = v[best] / v[best].norm();
        v /= phase;
    }
    v
}

fn jacobi(mut a: CMatrix) -> Eigen {
    let n = a.nrows();
    let mut v = CMatrix::identity(n, n);
    for i in 0..n {
        a[(i, i)] = c64(a[(i, i)].re, 0.0);
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Eigen { values, vectors }
}

/// One two-sided rotation zeroing `a[p,q]`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let alpha = a[(p, p)].re;
    let gamma = a[(q, q)].re;
    // Tiny off-diagonal relative to the diagonal gap: the rotation is an exact no-op
    // in floating point, just clear it.
    if beta < 1e-300 || (alpha - gamma).abs() > beta * 1e18 {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let u = apq / beta;
    let theta = (gamma - alpha) / (2.0 * beta);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, conj(u)) * [[c, s], [-s, c]]
    let upp = c64(c, 0.0);
    let upq = c64(s, 0.0);
    let uqp = -u.conj() * s;
    let uqq = u.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = c64(a[(p, p)].re, 0.0);
    a[(q, q)] = c64(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}
