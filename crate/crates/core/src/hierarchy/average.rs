use nalgebra::DMatrix;

use super::{GroupElement, MomentMatrix, WordSet};
use crate::numerics::permutations;
use crate::Result;

/// Adds `P G P^T` to `acc`, where `P` sends word `i` to `perm[i]`.
fn conjugate_into(acc: &mut DMatrix<f64>, g: &DMatrix<f64>, perm: &[usize]) {
    let n = perm.len();
    for j in 0..n {
        let pj = perm[j];
        for i in 0..n {
            acc[(perm[i], pj)] += g[(i, j)];
        }
    }
}

fn average_over(g: &DMatrix<f64>, ws: &WordSet, elements: impl Iterator<Item = GroupElement>) -> DMatrix<f64> {
    let mut acc = DMatrix::zeros(g.nrows(), g.ncols());
    let mut count = 0usize;
    for e in elements {
        conjugate_into(&mut acc, g, &e.word_permutation(ws));
        count += 1;
    }
    acc / count as f64
}

/// Reynolds average over all relabelings.
///
/// The group is the semidirect product of the output permutations with the question
/// permutations, so averaging over `S_n` and then over each station's `S_d` in turn gives
/// the full average with `n! + n d!` conjugations instead of `n! (d!)^n`.
pub fn group_average(gamma: &MomentMatrix) -> Result<MomentMatrix> {
    let ws = gamma.word_set()?;
    let (n, d) = (gamma.n, gamma.d);
    let ident: Vec<Vec<usize>> = vec![(0..d).collect(); n];
    let mut g = average_over(
        &gamma.entries,
        &ws,
        permutations(n).into_iter().map(|omega| GroupElement { omega, pis: ident.clone() }),
    );
    let sd = permutations(d);
    for station in 0..n {
        let elems = sd.iter().map(|p| {
            let mut pis = ident.clone();
            pis[station] = p.clone();
            GroupElement { omega: (0..n).collect(), pis }
        });
        g = average_over(&g, &ws, elems);
    }
    symmetrize(&mut g);
    Ok(gamma.with_entries(g))
}

/// Average over every group element. Fails when the group exceeds `cap` elements.
pub fn brute_force_average(gamma: &MomentMatrix, cap: u64) -> Result<MomentMatrix> {
    let ws = gamma.word_set()?;
    let all = GroupElement::enumerate_all(gamma.n, gamma.d, cap)?;
    let mut g = average_over(&gamma.entries, &ws, all.into_iter());
    symmetrize(&mut g);
    Ok(gamma.with_entries(g))
}

fn symmetrize(g: &mut DMatrix<f64>) {
    for i in 0..g.nrows() {
        for j in i + 1..g.ncols() {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{game_matrix, random_moment_matrix, Level};
    use super::*;
    use crate::numerics::rng_for;

    #[test]
    fn nested_matches_brute_force() {
        for seed in 0..3 {
            let g = random_moment_matrix(3, 2, Level::Q1Succ, seed).unwrap();
            let a = group_average(&g).unwrap();
            let b = brute_force_average(&g, 1000).unwrap();
            assert!((a.entries - b.entries).amax() < 1e-12);
        }
    }

    #[test]
    fn idempotent_and_trace_preserving() {
        let g = random_moment_matrix(4, 3, Level::Q1, 2).unwrap();
        let a = group_average(&g).unwrap();
        let aa = group_average(&a).unwrap();
        assert!((a.entries.clone() - aa.entries).amax() < 1e-12);
        assert!((a.entries.trace() - g.entries.trace()).abs() < 1e-10);
    }

    #[test]
    fn result_is_invariant() {
        let g = random_moment_matrix(4, 3, Level::Q1Succ, 8).unwrap();
        let a = group_average(&g).unwrap();
        let ws = a.word_set().unwrap();
        let mut rng = rng_for(3, 0);
        for _ in 0..10 {
            let e = GroupElement::random(4, 3, &mut rng);
            let mut h = DMatrix::zeros(ws.len(), ws.len());
            conjugate_into(&mut h, &a.entries, &e.word_permutation(&ws));
            assert!((h - &a.entries).amax() < 1e-10);
        }
    }

    #[test]
    fn game_matrix_is_invariant() {
        let ws = WordSet::new(4, 3, Level::Q1).unwrap();
        let b = game_matrix(&ws.words, 4, 3).unwrap();
        let mut rng = rng_for(4, 0);
        for _ in 0..100 {
            let e = GroupElement::random(4, 3, &mut rng);
            let mut h = DMatrix::zeros(ws.len(), ws.len());
            conjugate_into(&mut h, &b, &e.word_permutation(&ws));
            assert_eq!(h, b);
        }
    }

    #[test]
    fn objective_survives_averaging() {
        let g = random_moment_matrix(4, 3, Level::Q1, 6).unwrap();
        let b = game_matrix(&g.words, 4, 3).unwrap();
        let a = group_average(&g).unwrap();
        let lhs = b.component_mul(&g.entries).sum();
        let rhs = b.component_mul(&a.entries).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
