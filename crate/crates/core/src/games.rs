//! QRAC and pQRAC values for fixed measurement bases.
//!
//! With Bob's bases fixed, Alice's best encoding of an input is the top eigenvector
//! of the sum of the projectors Bob would accept, so every value here is an average
//! of largest eigenvalues. Inputs are enumerated exhaustively.

use serde::{Deserialize, Serialize};

use crate::bases::{mub_family, pair_success, Basis, BasisSet};
use crate::numerics::{
    binomial, combinations, cubic_real_roots, digits, inner, max_eig, pairwise_sum, projector,
    CMatrix, CVector,
};
use crate::{par, Error, Result};

/// Default cap on largest-eigenvalue evaluations per call.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// `(n, m)^d -> 1` promise QRAC parameters. `m = n` is the plain `n^d -> 1` QRAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqracGame {
    pub n: usize,
    pub m: usize,
    pub d: usize,
}

impl PqracGame {
    pub fn new(n: usize, m: usize, d: usize) -> Result<Self> {
        if m == 0 || m > n || d == 0 {
            return Err(Error::InvalidParameter(format!("need 1 <= m <= n and d >= 1 (n={n}, m={m}, d={d})")));
        }
        Ok(Self { n, m, d })
    }

    /// Number of promise subsets, `C(n, m)`.
    pub fn subsets(&self) -> u128 {
        binomial(self.n, self.m)
    }

    /// Number of encoded states, `C(n, m) d^m`.
    pub fn input_states(&self) -> u128 {
        self.subsets().saturating_mul((self.d as u128).saturating_pow(self.m as u32))
    }

    /// Number of measurement operators, `n d`.
    pub fn measurement_ops(&self) -> usize {
        self.n * self.d
    }

    /// `1 / (C(n, m) m d^m)`.
    pub fn weight(&self) -> f64 {
        1.0 / (self.input_states() as f64 * self.m as f64)
    }
}

/// One encoded input: the promise subset `z` and the dits `x[i]` at positions `z[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputLabel {
    pub z: Vec<usize>,
    pub x: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputSuccess {
    pub input: InputLabel,
    /// `sum_{y in z} P(b = x_y)`, the largest eigenvalue for this input.
    pub success: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameValueReport {
    pub value: f64,
    pub weight: f64,
    pub per_input_success: Vec<InputSuccess>,
    #[serde(skip)]
    pub encodings: Option<Vec<CVector>>,
}

#[derive(Debug, Clone, Copy)]
pub struct GameOptions {
    pub cap: u64,
    pub encodings: bool,
}

impl Default for GameOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, encodings: false }
    }
}

fn check_cap(requested: u128, cap: u64) -> Result<()> {
    if requested > cap as u128 {
        return Err(Error::ResourceCap { requested, cap });
    }
    Ok(())
}

/// Optimal two-basis QRAC value `(1/2d^2) sum (1 + |<a_i|b_j>|)`.
pub fn pair_value(a: &Basis, b: &Basis) -> Result<f64> {
    pair_success(a, b)
}

/// Largest eigenvalue of `|v1><v1| + |v2><v2| + |v3><v3|` from its characteristic cubic
/// restricted to the span of the three vectors.
pub fn three_basis_lambda_max(v1: &CVector, v2: &CVector, v3: &CVector) -> Result<f64> {
    if v2.len() != v1.len() || v3.len() != v1.len() {
        return Err(Error::DimensionMismatch { expected: v1.len(), found: v2.len().max(v3.len()) });
    }
    let g12 = inner(v1, v2);
    let g13 = inner(v1, v3);
    let g23 = inner(v2, v3);
    let s = g12.norm_sqr() + g13.norm_sqr() + g23.norm_sqr();
    // Gram determinant of three unit vectors
    let det = 1.0 + 2.0 * (g12 * g23 * g13.conj()).re - s;
    let roots = cubic_real_roots(3.0, s - 3.0, det.max(0.0))?;
    Ok(roots[0])
}

fn lambda_max(vectors: &[CVector], want_vector: bool) -> Result<(f64, Option<CVector>)> {
    match (vectors.len(), want_vector) {
        (1, _) => Ok((1.0, Some(vectors[0].clone()))),
        (2, false) => Ok((1.0 + inner(&vectors[0], &vectors[1]).norm(), None)),
        (3, false) => Ok((three_basis_lambda_max(&vectors[0], &vectors[1], &vectors[2])?, None)),
        _ => {
            let d = vectors[0].len();
            let mut h = CMatrix::zeros(d, d);
            for v in vectors {
                h += projector(v);
            }
            let h = (&h + h.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
            let (l, v) = max_eig(&h)?;
            Ok((l, Some(v)))
        }
    }
}

/// Sum of largest eigenvalues over all `d^k` inputs of the bases `set[idx]`.
fn subset_successes(set: &BasisSet, idx: &[usize], encodings: bool) -> Result<Vec<(InputLabel, f64, Option<CVector>)>> {
    let d = set.d();
    let k = idx.len();
    let count = d.pow(k as u32);
    let inputs: Vec<usize> = (0..count).collect();
    par::map(&inputs, |&i| {
        let x = digits(i, d, k);
        let vecs: Vec<CVector> = idx.iter().zip(&x).map(|(&y, &xy)| set.basis(y).vector(xy)).collect();
        let (l, v) = lambda_max(&vecs, encodings)?;
        Ok((InputLabel { z: idx.to_vec(), x }, l, if encodings { v } else { None }))
    })
    .into_iter()
    .collect()
}

fn assemble(game: PqracGame, parts: Vec<(InputLabel, f64, Option<CVector>)>, encodings: bool) -> GameValueReport {
    let lambdas: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let weight = game.weight();
    let value = pairwise_sum(&lambdas) * weight;
    let mut enc = Vec::new();
    let mut per_input_success = Vec::with_capacity(parts.len());
    for (input, success, v) in parts {
        per_input_success.push(InputSuccess { input, success });
        if let Some(v) = v {
            enc.push(v);
        }
    }
    GameValueReport { value, weight, per_input_success, encodings: encodings.then_some(enc) }
}

/// `n^d -> 1` QRAC value with measurement bases `set`.
pub fn qrac_value(set: &BasisSet, opts: GameOptions) -> Result<GameValueReport> {
    set.require(1)?;
    let game = PqracGame::new(set.n(), set.n(), set.d())?;
    check_cap(game.input_states(), opts.cap)?;
    let idx: Vec<usize> = (0..set.n()).collect();
    let parts = subset_successes(set, &idx, opts.encodings)?;
    Ok(assemble(game, parts, opts.encodings))
}

/// `(n, m)^d -> 1` pQRAC value with measurement bases `set`.
pub fn pqrac_value(set: &BasisSet, m: usize, opts: GameOptions) -> Result<GameValueReport> {
    if m < 2 || m > set.n() {
        return Err(Error::InvalidParameter(format!("promise size m={m} must satisfy 2 <= m <= n={}", set.n())));
    }
    let game = PqracGame::new(set.n(), m, set.d())?;
    check_cap(game.input_states(), opts.cap)?;
    let mut parts = Vec::new();
    for z in combinations(set.n(), m) {
        parts.extend(subset_successes(set, &z, opts.encodings)?);
    }
    Ok(assemble(game, parts, opts.encodings))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnomalyBin {
    /// Bin centre, a multiple of the resolution.
    pub value: f64,
    pub count: usize,
    pub subsets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub d: usize,
    pub n: usize,
    pub family: String,
    pub resolution: f64,
    pub bins: Vec<AnomalyBin>,
}

impl AnomalyReport {
    pub fn is_anomalous(&self) -> bool {
        self.bins.len() > 1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AnomalyOptions {
    pub resolution: f64,
    pub cap: u64,
}

impl Default for AnomalyOptions {
    fn default() -> Self {
        Self { resolution: 1e-6, cap: DEFAULT_CAP }
    }
}

/// QRAC value of every `n`-subset of the complete MUB family in dimension `d`,
/// binned at `opts.resolution`.
pub fn anomaly_scan(d: usize, n: usize, opts: AnomalyOptions) -> Result<AnomalyReport> {
    let family = mub_family(d)?;
    if n == 0 || n > family.n() {
        return Err(Error::InvalidParameter(format!("subset size {n} must be in 1..={}", family.n())));
    }
    let subsets = combinations(family.n(), n);
    let total = (subsets.len() as u128).saturating_mul((d as u128).saturating_pow(n as u32));
    check_cap(total, opts.cap)?;
    let inner_opts = GameOptions { cap: u64::MAX, encodings: false };
    let values = subsets
        .iter()
        .map(|z| qrac_value(&family.subset(z), inner_opts).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;

    let mut bins: Vec<(i64, AnomalyBin)> = Vec::new();
    for (z, v) in subsets.into_iter().zip(values) {
        let key = (v / opts.resolution).round() as i64;
        match bins.iter_mut().find(|(k, _)| *k == key) {
            Some((_, bin)) => {
                bin.count += 1;
                bin.subsets.push(z);
            }
            None => bins.push((key, AnomalyBin { value: key as f64 * opts.resolution, count: 1, subsets: vec![z] })),
        }
    }
    bins.sort_by_key(|b| std::cmp::Reverse(b.0));
    Ok(AnomalyReport {
        d,
        n,
        family: format!("computational + {d} quadratic-phase bases over GF({d})"),
        resolution: opts.resolution,
        bins: bins.into_iter().map(|(_, b)| b).collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollapseReport {
    pub uniform: bool,
    pub tol: f64,
    pub max_deviation: f64,
    /// Per input: `max_y |P(b = x_y) - mean_y P(b = x_y)|` for its optimal encoding.
    pub per_input: Vec<f64>,
}

/// Checks whether each optimal encoding is accepted with the same probability by
/// every one of Bob's bases.
pub fn uniform_collapse_check(set: &BasisSet, tol: f64) -> Result<CollapseReport> {
    set.require(2)?;
    let report = qrac_value(set, GameOptions { cap: DEFAULT_CAP, encodings: true })?;
    let encodings = report.encodings.expect("encodings requested");
    let mut per_input = Vec::with_capacity(encodings.len());
    for (row, psi) in report.per_input_success.iter().zip(&encodings) {
        let probs: Vec<f64> = row
            .input
            .x
            .iter()
            .enumerate()
            .map(|(y, &xy)| inner(&set.basis(y).vector(xy), psi).norm_sqr())
            .collect();
        let mean = probs.iter().sum::<f64>() / probs.len() as f64;
        per_input.push(probs.iter().fold(0.0f64, |m, p| m.max((p - mean).abs())));
    }
    let max_deviation = per_input.iter().cloned().fold(0.0, f64::max);
    Ok(CollapseReport { uniform: max_deviation <= tol, tol, max_deviation, per_input })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{fourier, pbar, quantum_pair_value};
    use crate::numerics::c64;

    #[test]
    fn game_counts() {
        let g = PqracGame::new(4, 2, 3).unwrap();
        assert_eq!(g.subsets(), 6);
        assert_eq!(g.input_states(), 54);
        assert_eq!(g.measurement_ops(), 12);
        assert!((g.weight() - 1.0 / 108.0).abs() < 1e-18);
        assert!(PqracGame::new(2, 3, 2).is_err());
    }

    #[test]
    fn single_basis_is_perfect() {
        let s = BasisSet::new(vec![Basis::random(4, 1)]).unwrap();
        assert!((qrac_value(&s, GameOptions::default()).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_pair() {
        let s = mub_family(2).unwrap().subset(&[0, 1]);
        let want = (2.0 + 2f64.sqrt()) / 4.0;
        assert!((qrac_value(&s, GameOptions::default()).unwrap().value - want).abs() < 1e-12);
        assert!((pair_value(s.basis(0), s.basis(1)).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_is_classical() {
        let b = Basis::random(5, 3);
        assert!((pair_value(&b, &b).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn pair_routes_agree() {
        for seed in 0..10 {
            let s = BasisSet::random(2, 4, seed);
            let dense = qrac_value(&s, GameOptions { encodings: true, ..Default::default() }).unwrap().value;
            let closed = pair_value(s.basis(0), s.basis(1)).unwrap();
            assert!((dense - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn report_sum_matches_value() {
        let s = BasisSet::random(3, 3, 8);
        let r = pqrac_value(&s, 2, GameOptions::default()).unwrap();
        let sum: f64 = r.per_input_success.iter().map(|p| p.success).sum();
        assert!((sum * r.weight - r.value).abs() < 1e-12);
        assert_eq!(r.per_input_success.len(), 27);
    }

    #[test]
    fn pqrac_two_equals_pbar() {
        for seed in 0..5 {
            let s = BasisSet::random(4, 3, seed);
            let a = pqrac_value(&s, 2, GameOptions::default()).unwrap().value;
            assert!((a - pbar(&s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn pqrac_full_equals_qrac() {
        let s = BasisSet::random(3, 3, 2);
        let a = pqrac_value(&s, 3, GameOptions::default()).unwrap().value;
        let b = qrac_value(&s, GameOptions::default()).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn pqrac_mixed_set() {
        let m = mub_family(2).unwrap();
        let s = BasisSet::new(vec![m.basis(0).clone(), m.basis(0).clone(), m.basis(1).clone()]).unwrap();
        let want = (0.75 + 2.0 * quantum_pair_value(2)) / 3.0;
        assert!((pqrac_value(&s, 2, GameOptions::default()).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn three_vector_edge_cases() {
        let v = Basis::random(4, 5);
        let a = v.vector(0);
        assert!((three_basis_lambda_max(&a, &a, &a).unwrap() - 3.0).abs() < 1e-12);
        let l = three_basis_lambda_max(&v.vector(0), &v.vector(1), &v.vector(2)).unwrap();
        assert!((l - 1.0).abs() < 1e-5);
    }

    #[test]
    fn three_vector_matches_dense() {
        for seed in 0..50 {
            let b = BasisSet::random(3, 6, seed);
            let vs: Vec<CVector> = (0..3).map(|k| b.basis(k).vector(k)).collect();
            let l = three_basis_lambda_max(&vs[0], &vs[1], &vs[2]).unwrap();
            let mut h = CMatrix::zeros(6, 6);
            for v in &vs {
                h += projector(v);
            }
            let h = (&h + h.adjoint()) * c64(0.5, 0.0);
            let (dense, _) = max_eig(&h).unwrap();
            assert!((l - dense).abs() < 1e-9);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let s = BasisSet::random(3, 4, 0);
        let r = qrac_value(&s, GameOptions { cap: 10, encodings: false });
        assert!(matches!(r, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn anomaly_small_dimension() {
        let r = anomaly_scan(3, 3, AnomalyOptions::default()).unwrap();
        assert_eq!(r.bins.len(), 1);
        assert_eq!(r.bins[0].count, 4);
    }

    #[test]
    fn collapse_qubit_pair() {
        let s = BasisSet::new(vec![Basis::computational(2), fourier(2)]).unwrap();
        let r = uniform_collapse_check(&s, 1e-9).unwrap();
        assert!(r.uniform, "{}", r.max_deviation);
    }
}
