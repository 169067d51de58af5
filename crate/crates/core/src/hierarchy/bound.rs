use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_params, game_matrix, group_average, random_moment_matrix, Level, WordSet};
use crate::bases::{classical_pair_value, quantum_pair_value};
use crate::numerics::{derive_seed, unvectorize_symmetric, vectorize_symmetric, SpanTracker};
use crate::sdp::{solve_lmi, LmiProblem, SdpStatus, SolverOptions, SymMat};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanOptions {
    /// Relative residual below which a sample counts as dependent.
    pub tol: f64,
    /// Consecutive dependent samples before stopping.
    pub stall_k: usize,
    pub seed: u64,
    /// Hard cap on samples drawn.
    pub max_samples: usize,
}

impl Default for SpanOptions {
    fn default() -> Self {
        Self { tol: 1e-7, stall_k: 10, seed: 0, max_samples: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub struct SpanResult {
    pub n: usize,
    pub d: usize,
    pub level: Level,
    /// Averaged samples that grew the span, in the order they were found.
    pub generators: Vec<DMatrix<f64>>,
    /// Orthonormal (Frobenius) basis of the same span.
    pub orthonormal: Vec<DMatrix<f64>>,
    /// Total samples drawn, dependent ones included.
    pub samples: usize,
}

impl SpanResult {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }
}

/// Samples averaged moment matrices until `stall_k` consecutive ones add nothing.
///
/// Sample `j` uses seed `derive_seed(seed, j)`. Samples are generated in parallel batches
/// but inserted in index order, so the result does not depend on the thread count.
pub fn discover_span(n: usize, d: usize, level: Level, opts: &SpanOptions) -> Result<SpanResult> {
    check_params(n, d)?;
    if opts.stall_k == 0 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter("stall_k must be >= 1 and tol > 0".into()));
    }
    let nw = WordSet::new(n, d, level)?.len();
    let mut tracker = SpanTracker::for_symmetric(nw, opts.tol);
    let mut generators = Vec::new();
    let (mut stall, mut drawn) = (0usize, 0usize);
    let batch = par_width().max(1);
    'outer: while drawn < opts.max_samples {
        let idx: Vec<usize> = (drawn..(drawn + batch).min(opts.max_samples)).collect();
        let mats = par::map(&idx, |&j| {
            random_moment_matrix(n, d, level, derive_seed(opts.seed, j as u64)).and_then(|g| group_average(&g))
        });
        for m in mats {
            let m = m?.entries;
            drawn += 1;
            if tracker.insert_symmetric(&m)? {
                generators.push(m);
                stall = 0;
            } else {
                stall += 1;
                if stall >= opts.stall_k {
                    break 'outer;
                }
            }
        }
    }
    if stall < opts.stall_k {
        log::warn!("span discovery hit the sample cap ({}) before stalling", opts.max_samples);
    }
    let orthonormal = tracker.basis().iter().map(|v| unvectorize_symmetric(v, nw)).collect();
    Ok(SpanResult { n, d, level, generators, orthonormal, samples: drawn })
}

#[cfg(feature = "parallel")]
fn par_width() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn par_width() -> usize {
    1
}

#[derive(Debug, Clone)]
pub struct BoundOptions {
    pub span: SpanOptions,
    pub solver: SolverOptions,
    /// Eigenvalues below this fraction of the largest define the common kernel.
    pub face_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { span: SpanOptions::default(), solver: SolverOptions::default(), face_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: usize,
    pub level: Level,
    pub span_dim: usize,
    /// Certified upper bound on the success probability.
    pub ptilde_bound: f64,
    pub qbar_bound: f64,
    /// Value of the best feasible moment matrix found.
    pub ptilde_primal: f64,
    /// Dual minus primal, in success-probability units.
    pub gap: f64,
    /// True when `qbar_bound` plus ten times the gap (in the same units) is below 1.
    pub excluded: bool,
    /// Samples drawn during span discovery.
    pub seeds: usize,
    pub base_seed: u64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Rank of the face the problem was reduced to.
    pub face_dim: usize,
    pub wall_time: f64,
}

/// The reduced LMI over span coefficients together with its strictly feasible start.
pub fn bound_problem(span: &SpanResult, face_tol: f64) -> Result<(LmiProblem, Vec<f64>)> {
    if span.generators.is_empty() {
        return Err(Error::InvalidParameter("empty span".into()));
    }
    let nw = span.generators[0].nrows();
    let words = WordSet::new(span.n, span.d, span.level)?.words;
    let b = game_matrix(&words, span.n, span.d)?;

    // every PSD matrix in the span lives on the range of the generators' sum
    let sum = span.generators.iter().fold(DMatrix::zeros(nw, nw), |acc, g| acc + g);
    let eig = sum.clone().symmetric_eigen();
    let top = eig.eigenvalues.max();
    let keep: Vec<usize> = (0..nw).filter(|&i| eig.eigenvalues[i] > face_tol * top).collect();
    let p = DMatrix::from_fn(nw, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);

    let mut c = Vec::with_capacity(span.dim());
    let mut f = Vec::with_capacity(span.dim());
    let mut eq = Vec::with_capacity(span.dim());
    for q in &span.orthonormal {
        c.push(b.component_mul(q).sum());
        let mut fq = p.transpose() * q * &p;
        fq = (&fq + fq.transpose()) * 0.5;
        f.push(vec![SymMat::Dense(fq)]);
        eq.push(q[(0, 0)]);
    }
    let mut lmi = LmiProblem::with_blocks(vec![keep.len()], c, vec![SymMat::zero()], f)?;
    lmi.add_equality(eq, span.d as f64)?;

    let mean = sum / span.dim() as f64;
    let mv = vectorize_symmetric(&mean);
    let start = span
        .orthonormal
        .iter()
        .map(|q| vectorize_symmetric(q).iter().zip(&mv).map(|(a, b)| a * b).sum())
        .collect();
    Ok((lmi, start))
}

/// Affine map from success probability to the unbiasedness scale.
pub fn qbar_from_ptilde(p: f64, d: usize) -> f64 {
    let (pc, pq) = (classical_pair_value(d), quantum_pair_value(d));
    (p - pc) / (pq - pc)
}

/// Certified upper bound on the `(n, 2)^d` value over `d`-dimensional strategies.
pub fn upper_bound(n: usize, d: usize, level: Level, opts: &BoundOptions) -> Result<BoundReport> {
    let t0 = Instant::now();
    let span = discover_span(n, d, level, &opts.span)?;
    let mut report = bound_from_span(&span, opts)?;
    report.base_seed = opts.span.seed;
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

pub fn bound_from_span(span: &SpanResult, opts: &BoundOptions) -> Result<BoundReport> {
    let t0 = Instant::now();
    let (lmi, start) = bound_problem(span, opts.face_tol)?;
    let face_dim = lmi.block_sizes[0];
    let sol = solve_lmi(&lmi, &SolverOptions { start: Some(start), ..opts.solver.clone() })?;
    if !sol.dual_bound.is_finite() {
        return Err(Error::Solver("no dual certificate for the hierarchy bound".into()));
    }
    let d = span.d;
    let scale = quantum_pair_value(d) - classical_pair_value(d);
    let gap = (sol.dual_bound - sol.objective).max(0.0);
    let qbar_bound = qbar_from_ptilde(sol.dual_bound, d);
    Ok(BoundReport {
        n: span.n,
        d,
        level: span.level,
        span_dim: span.dim(),
        ptilde_bound: sol.dual_bound,
        qbar_bound,
        ptilde_primal: sol.objective,
        gap,
        excluded: qbar_bound + 10.0 * gap / scale < 1.0,
        seeds: span.samples,
        base_seed: 0,
        status: sol.status,
        iterations: sol.iterations,
        face_dim,
        wall_time: t0.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_small_case_is_stable() {
        let dims: Vec<usize> = (0..3)
            .map(|s| discover_span(3, 2, Level::Q1, &SpanOptions { seed: s, ..Default::default() }).unwrap().dim())
            .collect();
        assert!(dims.iter().all(|&k| k == dims[0]), "{dims:?}");
        let doubled = discover_span(3, 2, Level::Q1, &SpanOptions { stall_k: 20, ..Default::default() }).unwrap();
        assert_eq!(doubled.dim(), dims[0]);
    }

    #[test]
    fn bound_small_case() {
        let r = upper_bound(3, 2, Level::Q1, &BoundOptions::default()).unwrap();
        assert!((r.qbar_bound - 1.0).abs() < 1e-4, "{r:?}");
        assert!(!r.excluded);
        assert!(r.ptilde_bound >= quantum_pair_value(2) - 1e-6);
    }

    #[test]
    fn bound_three_dimensional() {
        let r = upper_bound(4, 3, Level::Q1, &BoundOptions::default()).unwrap();
        assert_eq!(r.span_dim, 7);
        assert!((r.qbar_bound - 1.13165).abs() < 1e-4, "{r:?}");
        assert!(r.ptilde_bound >= quantum_pair_value(3) - 1e-6);
    }

    #[test]
    fn rejects_bad_options() {
        let o = SpanOptions { stall_k: 0, ..Default::default() };
        assert!(discover_span(3, 2, Level::Q1, &o).is_err());
    }
}
