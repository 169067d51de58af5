use nalgebra::DMatrix;

use super::{check_params, Level, MomentMatrix, WordLabel, WordSet};
use crate::bases::BasisSet;
use crate::numerics::{binomial, combinations, derive_seed, projector, random_unitary, CMatrix, CVector};
use crate::seesaw::state_step;
use crate::{Error, Result};

/// A concrete strategy: pure encodings for every `(z, x)` and `n` measurement bases.
#[derive(Debug, Clone)]
pub struct Realization {
    pub n: usize,
    pub d: usize,
    /// Columns are the basis vectors of measurement `y`.
    pub bases: Vec<CMatrix>,
    /// `states[pair][x1 * d + x2]`, pairs in lexicographic order.
    pub states: Vec<Vec<CVector>>,
}

impl Realization {
    /// Measurements from `set`, each encoding the top eigenvector of its two projectors.
    pub fn from_bases(set: &BasisSet) -> Result<Self> {
        let enc = state_step(set)?;
        Ok(Self {
            n: set.n(),
            d: set.d(),
            bases: set.bases().iter().map(|b| b.matrix().clone()).collect(),
            states: enc.states,
        })
    }

    /// Direct evaluation of the `(n, 2)^d` success probability.
    pub fn value(&self) -> f64 {
        let d = self.d;
        let mut total = 0.0;
        for (z, states) in combinations(self.n, 2).iter().zip(&self.states) {
            for (i, psi) in states.iter().enumerate() {
                for (k, xk) in [i / d, i % d].into_iter().enumerate() {
                    total += psi.dotc(&self.bases[z[k]].column(xk)).norm_sqr();
                }
            }
        }
        total / (binomial(self.n, 2) as f64 * 2.0 * (d * d) as f64)
    }
}

/// Random measurements and independent random pure encodings.
pub fn random_realization(n: usize, d: usize, seed: u64) -> Result<Realization> {
    check_params(n, d)?;
    let bases = (0..n).map(|k| random_unitary(d, derive_seed(seed, k as u64))).collect();
    let npairs = binomial(n, 2) as usize;
    let states = (0..npairs)
        .map(|p| {
            (0..d * d)
                .map(|i| {
                    let s = derive_seed(seed, (n + p * d * d + i) as u64);
                    random_unitary(d, s).column(0).into_owned()
                })
                .collect()
        })
        .collect();
    Ok(Realization { n, d, bases, states })
}

fn word_operator(r: &Realization, w: &WordLabel, pair_index: &dyn Fn([usize; 2]) -> usize) -> CMatrix {
    let d = r.d;
    let state = |z: [usize; 2], x: [usize; 2]| projector(&r.states[pair_index(z)][x[0] * d + x[1]]);
    let meas = |y: usize, b: usize| projector(&r.bases[y].column(b).into_owned());
    match *w {
        WordLabel::Identity => CMatrix::identity(d, d),
        WordLabel::State { z, x } => state(z, x),
        WordLabel::Measurement { y, b } => meas(y, b),
        WordLabel::SuccessPair { z, x, i } => state(z, x) * meas(z[i], x[i]),
    }
}

/// Moment matrix `Re tr(w_i^dagger w_j)` of a realization, symmetric to the last bit.
pub fn moment_matrix(r: &Realization, level: Level) -> Result<MomentMatrix> {
    let (n, d) = (r.n, r.d);
    if r.bases.len() != n || r.states.len() != binomial(n, 2) as usize {
        return Err(Error::Validation("realization does not match its (n, d)".into()));
    }
    let ws = WordSet::new(n, d, level)?;
    let pair_index = |z: [usize; 2]| z[0] * (2 * n - z[0] - 1) / 2 + (z[1] - z[0] - 1);
    let nw = ws.len();
    let mut ops = CMatrix::zeros(nw, d * d);
    for (i, w) in ws.words.iter().enumerate() {
        let o = word_operator(r, w, &pair_index);
        for (k, v) in o.iter().enumerate() {
            ops[(i, k)] = *v;
        }
    }
    let gram = ops.conjugate() * ops.transpose();
    let mut entries = DMatrix::zeros(nw, nw);
    for i in 0..nw {
        for j in i..nw {
            let v = 0.5 * (gram[(i, j)].re + gram[(j, i)].re);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(MomentMatrix { n, d, level, words: ws.words, entries })
}

pub fn random_moment_matrix(n: usize, d: usize, level: Level, seed: u64) -> Result<MomentMatrix> {
    moment_matrix(&random_realization(n, d, seed)?, level)
}

/// Game matrix `B` with `tr(B Gamma)` equal to the success probability.
///
/// Each pair `(rho_{x,z}, M^{z_i}_{x_i})` carries weight `1/(C(n,2) 2 d^2)`, split evenly
/// between the two symmetric positions.
pub fn game_matrix(words: &[WordLabel], n: usize, d: usize) -> Result<DMatrix<f64>> {
    check_params(n, d)?;
    let level = if words.iter().any(|w| matches!(w, WordLabel::SuccessPair { .. })) { Level::Q1Succ } else { Level::Q1 };
    let ws = WordSet::new(n, d, level)?;
    if ws.words != words {
        return Err(Error::Validation("game matrix needs the canonical word list".into()));
    }
    let half = 0.5 / (binomial(n, 2) as f64 * 2.0 * (d * d) as f64);
    let mut b = DMatrix::zeros(ws.len(), ws.len());
    for (s, w) in words.iter().enumerate() {
        if let WordLabel::State { z, x } = *w {
            for k in 0..2 {
                let m = ws.index_of(&WordLabel::Measurement { y: z[k], b: x[k] }).expect("measurement word");
                b[(s, m)] += half;
                b[(m, s)] += half;
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{mub_family, quantum_pair_value, Basis, BasisSet};
    use crate::numerics::symmetric_eig;

    fn pairing(b: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
        b.component_mul(g).sum()
    }

    #[test]
    fn entries_follow_born_rule() {
        let g = random_moment_matrix(4, 3, Level::Q1Succ, 5).unwrap();
        let ws = g.word_set().unwrap();
        assert_eq!(g.entries[(0, 0)], 3.0);
        for (i, w) in ws.words.iter().enumerate() {
            match w {
                WordLabel::State { .. } => assert!((g.entries[(i, i)] - 1.0).abs() < 1e-12),
                WordLabel::Measurement { .. } => assert!((g.entries[(0, i)] - 1.0).abs() < 1e-12),
                _ => {}
            }
            for (j, v) in ws.words.iter().enumerate() {
                if matches!((w, v), (WordLabel::State { .. }, WordLabel::Measurement { .. })) {
                    assert!((-1e-10..=1.0 + 1e-10).contains(&g.entries[(i, j)]));
                }
                assert_eq!(g.entries[(i, j)], g.entries[(j, i)]);
            }
        }
        let (vals, _) = symmetric_eig(&g.entries).unwrap();
        assert!(vals[0] > -1e-8);
    }

    #[test]
    fn game_matrix_on_mubs() {
        let set = mub_family(2).unwrap();
        let r = Realization::from_bases(&set).unwrap();
        let g = moment_matrix(&r, Level::Q1).unwrap();
        let b = game_matrix(&g.words, 3, 2).unwrap();
        assert!((pairing(&b, &g.entries) - quantum_pair_value(2)).abs() < 1e-10);
        assert!((r.value() - quantum_pair_value(2)).abs() < 1e-10);
    }

    #[test]
    fn game_matrix_on_identical_bases() {
        let b0 = Basis::random(3, 9);
        let set = BasisSet::new(vec![b0.clone(), b0.clone(), b0]).unwrap();
        let g = moment_matrix(&Realization::from_bases(&set).unwrap(), Level::Q1Succ).unwrap();
        let b = game_matrix(&g.words, 3, 3).unwrap();
        assert!((pairing(&b, &g.entries) - 0.5 * (1.0 + 1.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn game_matrix_matches_direct_value() {
        for seed in 0..5 {
            let r = random_realization(4, 3, seed).unwrap();
            let g = moment_matrix(&r, Level::Q1).unwrap();
            let b = game_matrix(&g.words, 4, 3).unwrap();
            assert!((pairing(&b, &g.entries) - r.value()).abs() < 1e-12);
        }
    }

    #[test]
    fn game_matrix_rejects_foreign_words() {
        let mut w = super::super::build_words(3, 2, Level::Q1).unwrap();
        w.swap(1, 2);
        assert!(game_matrix(&w, 3, 2).is_err());
    }
}
