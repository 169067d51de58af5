use std::f64::consts::PI;

use num_complex::Complex64;

use super::galois::{is_prime, GaloisField};
use super::{Basis, BasisSet};
use crate::numerics::{c64, CMatrix};
use crate::{Error, Result};

/// `(p, k)` with `d = p^k`, or `None` when `d` is not a prime power.
pub fn prime_power(d: usize) -> Option<(usize, usize)> {
    if d < 2 {
        return None;
    }
    let p = (2..=d).find(|&p| d.is_multiple_of(p))?;
    debug_assert!(is_prime(p));
    let mut k = 0;
    let mut rest = d;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Discrete Fourier basis: `|f_b>_j = w^(j b) / sqrt(d)` with `w = exp(2 pi i / d)`.
pub fn fourier(d: usize) -> Basis {
    let s = 1.0 / (d as f64).sqrt();
    let m = CMatrix::from_fn(d, d, |j, b| {
        Complex64::from_polar(s, 2.0 * PI * ((j * b) % d) as f64 / d as f64)
    });
    Basis::from_unitary_unchecked(m)
}

/// Complete family of `d + 1` mutually unbiased bases for `d = p^k`.
///
/// The computational basis comes first. For odd `p` the remaining bases are
/// indexed by `a` in `GF(d)` with vectors
/// `|v_{a,b}>_j = w^tr(a j^2 + b j) / sqrt(d)`, `w = exp(2 pi i / p)`; for `k = 1`
/// this is the prime-dimension quadratic-phase family.
///
/// For `p = 2` the quadratic phase is lifted to `Z_4`: with `S_a` the symmetric
/// binary matrix `(S_a)_{rs} = tr(a x^r x^s)`, the vectors are
/// `|v_{a,b}>_j = i^(j^T S_a j mod 4) (-1)^(b . j) / sqrt(d)` where `j` and `b`
/// run over `GF(2)^k`. Distinct `a` give `S_a - S_a'` nonsingular mod 2, which is
/// what makes the bases pairwise unbiased.
pub fn mub_family(d: usize) -> Result<BasisSet> {
    let (p, k) = prime_power(d).ok_or(Error::UnsupportedDimension(d))?;
    let field = GaloisField::new(p, k)?;
    let mut bases = vec![Basis::computational(d)];
    if p == 2 {
        for a in 0..d {
            bases.push(binary_basis(&field, a));
        }
    } else {
        for a in 0..d {
            bases.push(odd_basis(&field, a));
        }
    }
    BasisSet::new(bases)
}

fn odd_basis(f: &GaloisField, a: usize) -> Basis {
    let d = f.order();
    let p = f.p();
    let s = 1.0 / (d as f64).sqrt();
    let m = CMatrix::from_fn(d, d, |j, b| {
        let jj = f.mul(j, j);
        let arg = f.add(f.mul(a, jj), f.mul(b, j));
        Complex64::from_polar(s, 2.0 * PI * f.trace(arg) as f64 / p as f64)
    });
    Basis::from_unitary_unchecked(m)
}

fn binary_basis(f: &GaloisField, a: usize) -> Basis {
    let d = f.order();
    let k = f.k();
    let form: Vec<Vec<usize>> = (0..k)
        .map(|r| (0..k).map(|c| f.trace(f.mul(a, f.mul(f.monomial(r), f.monomial(c))))).collect())
        .collect();
    let bit = |x: usize, i: usize| (x >> i) & 1;
    let s = 1.0 / (d as f64).sqrt();
    let i_pow = [c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0), c64(0.0, -1.0)];
    let m = CMatrix::from_fn(d, d, |j, b| {
        let mut quad = 0;
        for (r, row) in form.iter().enumerate() {
            for (c, &f) in row.iter().enumerate() {
                quad += bit(j, r) * f * bit(j, c);
            }
        }
        let parity = (0..k).map(|r| bit(j, r) * bit(b, r)).sum::<usize>() % 2;
        let phase = (quad + 2 * parity) % 4;
        i_pow[phase] * s
    });
    Basis::from_unitary_unchecked(m)
}
