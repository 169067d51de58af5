use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_params, WordLabel, WordSet};
use crate::numerics::permutations;
use crate::{Error, Result};

/// Relabeling `(pi_1, ..., pi_n; omega)`: question `y` becomes `omega[y]` and the answer
/// `b` to the relabeled question `y'` becomes `pis[y'][b]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub omega: Vec<usize>,
    pub pis: Vec<Vec<usize>>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

impl GroupElement {
    pub fn new(omega: Vec<usize>, pis: Vec<Vec<usize>>) -> Result<Self> {
        let n = omega.len();
        let d = pis.first().map_or(0, Vec::len);
        check_params(n, d)?;
        if pis.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: pis.len() });
        }
        if !is_permutation(&omega) || pis.iter().any(|p| p.len() != d || !is_permutation(p)) {
            return Err(Error::InvalidParameter("group element entries must be permutations".into()));
        }
        Ok(Self { omega, pis })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self { omega: (0..n).collect(), pis: vec![(0..d).collect(); n] }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Self {
        let mut omega: Vec<usize> = (0..n).collect();
        omega.shuffle(rng);
        let pis = (0..n)
            .map(|_| {
                let mut p: Vec<usize> = (0..d).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        Self { omega, pis }
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn d(&self) -> usize {
        self.pis[0].len()
    }

    /// `n! (d!)^n`, saturating.
    pub fn group_order(n: usize, d: usize) -> u128 {
        let fact = |k: usize| (1..=k as u128).fold(1u128, |a, b| a.saturating_mul(b));
        (0..n).fold(fact(n), |acc, _| acc.saturating_mul(fact(d)))
    }

    /// Every element, omega-major. Refuses groups larger than `cap`.
    pub fn enumerate_all(n: usize, d: usize, cap: u64) -> Result<Vec<Self>> {
        check_params(n, d)?;
        let order = Self::group_order(n, d);
        if order > cap as u128 {
            return Err(Error::ResourceCap { requested: order, cap });
        }
        let sd = permutations(d);
        let mut out = Vec::with_capacity(order as usize);
        for omega in permutations(n) {
            let mut idx = vec![0usize; n];
            loop {
                out.push(Self { omega: omega.clone(), pis: idx.iter().map(|&i| sd[i].clone()).collect() });
                // odometer over the n station permutations
                let mut k = 0;
                while k < n {
                    idx[k] += 1;
                    if idx[k] < sd.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// `self * other`, acting as `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let inv = invert(&self.omega);
        let omega = other.omega.iter().map(|&y| self.omega[y]).collect();
        let pis = (0..self.n())
            .map(|k| other.pis[inv[k]].iter().map(|&b| self.pis[k][b]).collect())
            .collect();
        Self { omega, pis }
    }

    pub fn inverse(&self) -> Self {
        let omega = invert(&self.omega);
        let pis = (0..self.n()).map(|k| invert(&self.pis[self.omega[k]])).collect();
        Self { omega, pis }
    }

    /// Index map `perm[i]` = position of `g w_i`.
    pub fn word_permutation(&self, ws: &WordSet) -> Vec<usize> {
        ws.words
            .iter()
            .map(|w| ws.index_of(&apply_group(self, w)).expect("group maps words onto words"))
            .collect()
    }
}

pub fn apply_group(g: &GroupElement, w: &WordLabel) -> WordLabel {
    let relabel = |z: [usize; 2], x: [usize; 2]| {
        let zz = [g.omega[z[0]], g.omega[z[1]]];
        let xx = [g.pis[zz[0]][x[0]], g.pis[zz[1]][x[1]]];
        if zz[0] < zz[1] {
            (zz, xx, false)
        } else {
            ([zz[1], zz[0]], [xx[1], xx[0]], true)
        }
    };
    match *w {
        WordLabel::Identity => WordLabel::Identity,
        WordLabel::Measurement { y, b } => {
            let y2 = g.omega[y];
            WordLabel::Measurement { y: y2, b: g.pis[y2][b] }
        }
        WordLabel::State { z, x } => {
            let (z, x, _) = relabel(z, x);
            WordLabel::State { z, x }
        }
        WordLabel::SuccessPair { z, x, i } => {
            let (z, x, swapped) = relabel(z, x);
            WordLabel::SuccessPair { z, x, i: if swapped { 1 - i } else { i } }
        }
    }
}
