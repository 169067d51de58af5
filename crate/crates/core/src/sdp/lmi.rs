use nalgebra::{DMatrix, DVector};

use super::{LmiProblem, SdpSolution, SdpStatus, SolverOptions, SymMat};
use crate::{Error, Result};

/// Barrier parameter `1/t` shrinks by this factor once the iterate is centred.
const BARRIER_FACTOR: f64 = 0.2;
/// Newton decrement squared below which the iterate counts as centred.
const CENTERED: f64 = 0.5;
const ARMIJO: f64 = 0.01;
/// Once a slack block's Cholesky diagonal spans more than this ratio, Newton terms are
/// formed in eigenbases (no cancellation in `X^-1`) and the step comes from a QR of the
/// scaled Jacobian instead of the normal equations.
const SCALING_RATIO: f64 = 1e3;

/// Maximizes `c . y` over the LMI and equalities of `p`.
///
/// A starting point that is missing or not strictly feasible triggers a phase-I search;
/// if that fails the solution has status [`SdpStatus::Infeasible`].
pub fn solve_lmi(p: &LmiProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    if let Some(s) = &opts.start {
        if s.len() != p.nvars() {
            return Err(Error::DimensionMismatch { expected: p.nvars(), found: s.len() });
        }
    }
    let mut budget = opts.max_iter;
    let start = find_start(p, opts.start.as_deref(), &mut budget)?;
    let used = opts.max_iter - budget;
    let Some(y0) = start else {
        return Ok(SdpSolution {
            y: Vec::new(),
            objective: f64::NEG_INFINITY,
            dual_bound: f64::INFINITY,
            gap: f64::INFINITY,
            status: SdpStatus::Infeasible,
            iterations: used,
            duality_violations: 0,
            dual_blocks: Vec::new(),
            povm: None,
        });
    };
    let run = path_follow(p, y0, opts.tol, &mut budget, None)?;
    let gap = rel_gap(run.dual_bound, run.objective);
    log::debug!("lmi solve: objective {:.12} bound {:.12} after {} steps", run.objective, run.dual_bound, opts.max_iter - budget);
    Ok(SdpSolution {
        objective: run.objective,
        dual_bound: run.dual_bound,
        gap,
        status: if gap <= opts.tol { SdpStatus::Optimal } else { SdpStatus::MaxIter },
        iterations: opts.max_iter - budget,
        duality_violations: run.violations,
        y: run.y,
        dual_blocks: run.dual_blocks,
        povm: None,
    })
}

fn rel_gap(dual: f64, primal: f64) -> f64 {
    (dual - primal) / primal.abs().max(1.0)
}

struct Run {
    y: Vec<f64>,
    objective: f64,
    dual_bound: f64,
    dual_blocks: Vec<DMatrix<f64>>,
    violations: usize,
}

fn cholesky_all(blocks: Vec<DMatrix<f64>>) -> Option<Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>>> {
    blocks.into_iter().map(|b| b.cholesky()).collect()
}

fn log_det(ch: &[nalgebra::Cholesky<f64, nalgebra::Dyn>]) -> f64 {
    ch.iter().map(|c| 2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>()).sum()
}

fn is_positive_definite(blocks: Vec<DMatrix<f64>>) -> bool {
    cholesky_all(blocks).is_some()
}

/// Solves `K x = rhs`, falling back to a least-squares solve when `K` is singular.
fn solve_system(k: DMatrix<f64>, rhs: DVector<f64>, spd: bool) -> Result<DVector<f64>> {
    if spd {
        if let Some(ch) = k.clone().cholesky() {
            return Ok(ch.solve(&rhs));
        }
    }
    let lu = k.clone().lu();
    if let Some(mut x) = lu.solve(&rhs) {
        // a few rounds of iterative refinement; the KKT matrix is badly scaled late in the path
        for _ in 0..3 {
            let r = &rhs - &k * &x;
            match lu.solve(&r) {
                Some(dx) if dx.iter().all(|v| v.is_finite()) => x += dx,
                _ => break,
            }
        }
        if x.iter().all(|v| v.is_finite()) {
            return Ok(x);
        }
    }
    k.svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Solver(format!("Newton system unsolvable: {e}")))
}

fn project_equalities(p: &LmiProblem, y: &mut [f64]) -> Result<()> {
    if p.eq_a.is_empty() {
        return Ok(());
    }
    let m = p.eq_a.len();
    let a = DMatrix::from_fn(m, p.nvars(), |r, c| p.eq_a[r][c]);
    let yv = DVector::from_column_slice(y);
    let r = &a * &yv - DVector::from_column_slice(&p.eq_b);
    let pinv = a.pseudo_inverse(1e-12).map_err(|e| Error::Solver(e.to_string()))?;
    let fixed = yv - pinv * r;
    y.copy_from_slice(fixed.as_slice());
    Ok(())
}

fn find_start(p: &LmiProblem, start: Option<&[f64]>, budget: &mut usize) -> Result<Option<Vec<f64>>> {
    let v = p.nvars();
    let mut y = start.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; v]);
    project_equalities(p, &mut y)?;
    if is_positive_definite(p.slack(&y)) {
        return Ok(Some(y));
    }
    log::debug!("lmi start not strictly feasible; running phase I");

    // maximize s  s.t.  F(y) - s I >= 0,  s <= 1,  |y_i| <= r,  A y = b
    let lam_min = p
        .slack(&y)
        .into_iter()
        .map(|b| b.symmetric_eigen().eigenvalues.min())
        .fold(f64::INFINITY, f64::min);
    let s0 = lam_min - 1.0;
    let r = 1e3 * y.iter().fold(1.0f64, |m, x| m.max(x.abs()));

    let mut sizes = p.block_sizes.clone();
    sizes.extend(std::iter::repeat_n(1, 1 + 2 * v));
    let mut f0 = p.f0.clone();
    f0.push(SymMat::from_upper([(0, 0, 1.0)]));
    for _ in 0..2 * v {
        f0.push(SymMat::from_upper([(0, 0, r)]));
    }
    let mut f: Vec<Vec<SymMat>> = Vec::with_capacity(v + 1);
    for (i, fi) in p.f.iter().enumerate() {
        let mut terms = fi.clone();
        terms.push(SymMat::zero());
        for j in 0..v {
            let (lo, hi) = if i == j { (-1.0, 1.0) } else { (0.0, 0.0) };
            terms.push(SymMat::from_upper([(0, 0, lo)]));
            terms.push(SymMat::from_upper([(0, 0, hi)]));
        }
        f.push(terms);
    }
    let mut fs: Vec<SymMat> = p.block_sizes.iter().map(|&n| SymMat::from_upper((0..n).map(|k| (k, k, -1.0)))).collect();
    fs.push(SymMat::from_upper([(0, 0, -1.0)]));
    fs.extend(std::iter::repeat_n(SymMat::zero(), 2 * v));
    f.push(fs);
    let mut c = vec![0.0; v];
    c.push(1.0);
    let mut aux = LmiProblem::with_blocks(sizes, c, f0, f)?;
    for (row, &b) in p.eq_a.iter().zip(&p.eq_b) {
        let mut row = row.clone();
        row.push(0.0);
        aux.add_equality(row, b)?;
    }
    let mut ys = y;
    ys.push(s0);
    let stop = |primal: f64, dual: f64| (primal > 0.0 && primal >= 0.5 * dual) || dual < 0.0;
    let run = path_follow(&aux, ys, 1e-6, budget, Some(&stop))?;
    if run.objective <= 0.0 {
        return Ok(None);
    }
    let y = run.y[..v].to_vec();
    Ok(is_positive_definite(p.slack(&y)).then_some(y))
}

/// `(row, col, value)` entries of a sparse symmetric term.
type Entries = Vec<(usize, usize, f64)>;

/// Upper-triangle entries `(a <= b)` of a sparse symmetric term.
fn upper(entries: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    entries.iter().copied().filter(|&(a, b, _)| a <= b).collect()
}

/// `tr(F_i W F_j W)` for two sparse symmetric terms given by their upper triangles;
/// `w` is the column-major storage of the symmetric `n x n` matrix `W`.
fn sparse_pair(ei: &[(usize, usize, f64)], ej: &[(usize, usize, f64)], w: &[f64], n: usize) -> f64 {
    let at = |r: usize, c: usize| w[r + c * n];
    let mut s = 0.0;
    for &(a, b, u) in ei {
        for &(c, e, x) in ej {
            // sum over both orientations of each off-diagonal entry, using W = W^T
            let t = match (a == b, c == e) {
                (true, true) => at(a, c) * at(a, c),
                (true, false) => 2.0 * at(a, c) * at(a, e),
                (false, true) => 2.0 * at(b, c) * at(a, c),
                (false, false) => 2.0 * (at(b, c) * at(a, e) + at(b, e) * at(a, c)),
            };
            s += u * x * t;
        }
    }
    s
}

fn diagonal_spread(chol: &[nalgebra::Cholesky<f64, nalgebra::Dyn>]) -> f64 {
    chol.iter()
        .map(|c| {
            let d = c.l_dirty().diagonal();
            d.max() / d.min()
        })
        .fold(1.0, f64::max)
}

/// Eigenvectors and `lambda^-1/2` of each slack block.
struct Frame {
    q: DMatrix<f64>,
    s: DVector<f64>,
}

fn eigen_frames(blocks: Vec<DMatrix<f64>>) -> Option<Vec<Frame>> {
    blocks
        .into_iter()
        .map(|x| {
            let e = x.symmetric_eigen();
            (e.eigenvalues.min() > 0.0).then(|| Frame { s: e.eigenvalues.map(|l| l.sqrt().recip()), q: e.eigenvectors })
        })
        .collect()
}

/// Column `i` of block `k` holds the packed upper triangle of
/// `diag(s) Q^T F_ik Q diag(s)`, off-diagonals weighted by sqrt 2, so that
/// inner products of columns are `tr(F_i W F_j W)`.
struct ScaledBlock {
    vars: Vec<usize>,
    cols: DMatrix<f64>,
}

fn scaled_terms(p: &LmiProblem, t: f64, frames: &[Frame]) -> (DVector<f64>, Vec<ScaledBlock>) {
    let v = p.nvars();
    let mut g = DVector::from_fn(v, |i, _| -t * p.c[i]);
    let mut blocks = Vec::with_capacity(frames.len());
    for (k, fr) in frames.iter().enumerate() {
        let n = p.block_sizes[k];
        let vars: Vec<usize> = (0..v).filter(|&i| !p.f[i][k].is_zero()).collect();
        let qt = fr.q.transpose();
        let mut cols = DMatrix::zeros(n * (n + 1) / 2, vars.len());
        for (col, &i) in vars.iter().enumerate() {
            let m = match &p.f[i][k] {
                SymMat::Dense(f) => &qt * f * &fr.q,
                SymMat::Sparse(e) => {
                    let mut m = DMatrix::zeros(n, n);
                    for &(a, b, val) in e {
                        m.ger(val, &qt.column(a), &qt.column(b), 1.0);
                    }
                    m
                }
            };
            let mut r = 0;
            for c in 0..n {
                for a in 0..=c {
                    let x = fr.s[a] * fr.s[c] * 0.5 * (m[(a, c)] + m[(c, a)]);
                    if a == c {
                        g[i] -= x;
                        cols[(r, col)] = x;
                    } else {
                        cols[(r, col)] = std::f64::consts::SQRT_2 * x;
                    }
                    r += 1;
                }
            }
        }
        blocks.push(ScaledBlock { vars, cols });
    }
    (g, blocks)
}

/// `H = sum_k J_k^T J_k`, only needed when the QR step is unavailable.
fn scaled_hessian(v: usize, blocks: &[ScaledBlock]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(v, v);
    for blk in blocks {
        let gram = blk.cols.tr_mul(&blk.cols);
        for (a, &i) in blk.vars.iter().enumerate() {
            for (b, &j) in blk.vars.iter().enumerate() {
                h[(i, j)] += gram[(a, b)];
            }
        }
    }
    h
}

fn plain_terms(
    p: &LmiProblem,
    t: f64,
    w: &[DMatrix<f64>],
    uppers: &[Vec<Entries>],
) -> (DVector<f64>, DMatrix<f64>) {
    let v = p.nvars();
    let nb = p.block_sizes.len();
    let g = DVector::from_fn(v, |i, _| -t * p.c[i] - (0..nb).map(|k| p.f[i][k].dot(&w[k])).sum::<f64>());
    // W F W is only formed for dense terms; sparse pairs use entries of W directly
    let sand: Vec<Vec<Option<DMatrix<f64>>>> = (0..v)
        .map(|j| (0..nb).map(|k| matches!(p.f[j][k], SymMat::Dense(_)).then(|| p.f[j][k].sandwich(&w[k]))).collect())
        .collect();
    let mut h = DMatrix::zeros(v, v);
    for i in 0..v {
        for j in i..v {
            let mut s = 0.0;
            for k in 0..nb {
                s += match (&p.f[i][k], &p.f[j][k]) {
                    (SymMat::Sparse(ei), SymMat::Sparse(ej)) => {
                        if ei.is_empty() || ej.is_empty() {
                            0.0
                        } else {
                            sparse_pair(&uppers[i][k], &uppers[j][k], w[k].as_slice(), p.block_sizes[k])
                        }
                    }
                    (fi, SymMat::Dense(_)) => fi.dot(sand[j][k].as_ref().expect("dense sandwich")),
                    (SymMat::Dense(_), fj) => fj.dot(sand[i][k].as_ref().expect("dense sandwich")),
                };
            }
            h[(i, j)] = s;
            h[(j, i)] = s;
        }
    }
    (g, h)
}

enum Certificate {
    Plain(Vec<DMatrix<f64>>),
    Scaled(Vec<Frame>, Vec<ScaledBlock>),
}

fn near_psd(m: &DMatrix<f64>) -> bool {
    let shift = 1e-14 * m.amax().max(f64::MIN_POSITIVE);
    (m + DMatrix::identity(m.nrows(), m.nrows()) * shift).cholesky().is_some()
}

impl Certificate {
    fn hessian(&self, v: usize) -> DMatrix<f64> {
        match self {
            Certificate::Scaled(_, blocks) => scaled_hessian(v, blocks),
            Certificate::Plain(_) => unreachable!("plain terms carry their Hessian"),
        }
    }

    /// The blocks of `(W - W F(delta) W) / t` when they are positive semidefinite.
    fn dual_blocks(&self, p: &LmiProblem, delta: &DVector<f64>, t: f64) -> Option<Vec<DMatrix<f64>>> {
        match self {
            Certificate::Plain(w) => {
                let z: Vec<DMatrix<f64>> = w
                    .iter()
                    .enumerate()
                    .map(|(k, wk)| {
                        let n = p.block_sizes[k];
                        let mut fd = DMatrix::zeros(n, n);
                        for (j, fj) in p.f.iter().enumerate() {
                            if delta[j] != 0.0 {
                                fj[k].add_to(&mut fd, delta[j]);
                            }
                        }
                        let zk = wk - wk * fd * wk;
                        (&zk + zk.transpose()) * (0.5 / t)
                    })
                    .collect();
                z.iter().all(near_psd).then_some(z)
            }
            Certificate::Scaled(frames, blocks) => {
                // in the eigenbasis Z = diag(s) (I - sum delta_j E_j) diag(s) / t
                let mut out = Vec::with_capacity(frames.len());
                for (fr, blk) in frames.iter().zip(blocks) {
                    let n = fr.s.len();
                    let packed = blk.apply(delta);
                    let mut inner = DMatrix::identity(n, n);
                    let mut r = 0;
                    for c in 0..n {
                        for a in 0..=c {
                            let x = if a == c { packed[r] } else { packed[r] / std::f64::consts::SQRT_2 };
                            inner[(a, c)] -= x;
                            if a != c {
                                inner[(c, a)] -= x;
                            }
                            r += 1;
                        }
                    }
                    if !near_psd(&inner) {
                        return None;
                    }
                    let scaled = DMatrix::from_fn(n, n, |a, c| fr.s[a] * fr.s[c] * inner[(a, c)] / t);
                    let zk = &fr.q * scaled * fr.q.transpose();
                    out.push((&zk + zk.transpose()) * 0.5);
                }
                Some(out)
            }
        }
    }
}

impl ScaledBlock {
    /// Packed `diag(s) Q^T F(delta) Q diag(s)`.
    fn apply(&self, delta: &DVector<f64>) -> DVector<f64> {
        let d = DVector::from_iterator(self.vars.len(), self.vars.iter().map(|&j| delta[j]));
        &self.cols * d
    }

    fn apply_t(&self, r: &DVector<f64>, out: &mut DVector<f64>) {
        let x = self.cols.tr_mul(r);
        for (a, &i) in self.vars.iter().enumerate() {
            out[i] += x[a];
        }
    }
}

/// Orthonormal null-space basis of the equality matrix and its pseudo-inverse;
/// `basis` is `None` when there are no equalities.
struct NullSpace {
    basis: Option<DMatrix<f64>>,
    pinv: DMatrix<f64>,
}

impl NullSpace {
    fn of(a: &DMatrix<f64>) -> NullSpace {
        let v = a.ncols();
        if a.nrows() == 0 {
            return NullSpace { basis: None, pinv: DMatrix::zeros(v, 0) };
        }
        let pinv = a.clone().pseudo_inverse(1e-12).unwrap_or_else(|_| DMatrix::zeros(v, a.nrows()));
        let proj = DMatrix::identity(v, v) - &pinv * a;
        let e = proj.symmetric_eigen();
        let keep: Vec<usize> = (0..v).filter(|&i| e.eigenvalues[i] > 0.5).collect();
        let basis = DMatrix::from_fn(v, keep.len(), |r, c| e.eigenvectors[(r, keep[c])]);
        NullSpace { basis: Some(basis), pinv }
    }

    fn dim(&self) -> usize {
        self.basis.as_ref().map_or(self.pinv.nrows(), |b| b.ncols())
    }

    fn restrict(&self, m: DMatrix<f64>) -> DMatrix<f64> {
        match &self.basis {
            Some(b) => m * b,
            None => m,
        }
    }

    fn project(&self, x: DVector<f64>) -> DVector<f64> {
        match &self.basis {
            Some(b) => b.tr_mul(&x),
            None => x,
        }
    }

    fn lift(&self, z: DVector<f64>) -> DVector<f64> {
        match &self.basis {
            Some(b) => b * z,
            None => z,
        }
    }
}

/// Newton step and equality multipliers from a QR factorization of the scaled
/// Jacobian restricted to the null space; never forms the squared system.
fn scaled_step(
    blocks: &[ScaledBlock],
    v: usize,
    c: &[f64],
    t: f64,
    null: &NullSpace,
    residual: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let rows: usize = blocks.iter().map(|b| b.cols.nrows()).sum();
    let k = null.dim();
    if rows < k {
        return None;
    }
    let mut jac = DMatrix::zeros(rows, v);
    let mut e = DVector::zeros(rows);
    let mut off = 0;
    for blk in blocks {
        let n = (((8 * blk.cols.nrows() + 1) as f64).sqrt() as usize - 1) / 2;
        for (col, &i) in blk.vars.iter().enumerate() {
            jac.view_mut((off, i), (blk.cols.nrows(), 1)).copy_from(&blk.cols.column(col));
        }
        for c in 0..n {
            e[off + c * (c + 1) / 2 + c] = 1.0;
        }
        off += blk.cols.nrows();
    }
    let cvec = DVector::from_column_slice(c);
    let dp = &null.pinv * residual;
    let jn = null.restrict(jac.clone());
    let qr = jn.qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|x| x.abs() <= 1e-15 * scale) {
        return None;
    }
    let mut proj = &e - &jac * &dp;
    qr.q_tr_mul(&mut proj);
    let z1 = r.solve_upper_triangular(&proj.rows(0, k).into_owned())?;
    let w = r.tr_solve_upper_triangular(&(null.project(cvec.clone()) * t))?;
    let z2 = r.solve_upper_triangular(&w)?;
    let delta = dp + null.lift(z1 + z2);
    if !delta.iter().all(|x| x.is_finite()) {
        return None;
    }
    // A^T nu = t c + J^T (e - J delta)
    let mut rhs = cvec * t;
    let fit = &e - &jac * &delta;
    let mut acc = DVector::zeros(v);
    let mut off = 0;
    for blk in blocks {
        let len = blk.cols.nrows();
        blk.apply_t(&fit.rows(off, len).into_owned(), &mut acc);
        off += len;
    }
    rhs += acc;
    let nu = null.pinv.tr_mul(&rhs);
    Some((delta, nu))
}

type StopRule<'a> = &'a dyn Fn(f64, f64) -> bool;

fn path_follow(p: &LmiProblem, mut y: Vec<f64>, tol: f64, budget: &mut usize, stop: Option<StopRule>) -> Result<Run> {
    let v = p.nvars();
    let m = p.eq_a.len();
    let nb = p.block_sizes.len();
    let a = DMatrix::from_fn(m, v, |r, c| p.eq_a[r][c]);
    let b = DVector::from_column_slice(&p.eq_b);

    let mut t = 1.0;
    let mut best_dual = f64::INFINITY;
    let mut dual_blocks = Vec::new();
    let mut violations = 0;
    let mut chol = cholesky_all(p.slack(&y)).ok_or_else(|| Error::Solver("start point is not strictly feasible".into()))?;
    let mut recentre_only = 0;
    let mut null: Option<NullSpace> = None;
    let uppers: Vec<Vec<Entries>> = p
        .f
        .iter()
        .map(|fi| fi.iter().map(|t| if let SymMat::Sparse(e) = t { upper(e) } else { Vec::new() }).collect())
        .collect();

    loop {
        let primal = p.objective(&y);
        let frames = if diagonal_spread(&chol) > SCALING_RATIO { eigen_frames(p.slack(&y)) } else { None };
        let (g, mut h, cert) = match frames {
            Some(frames) => {
                let (g, cols) = scaled_terms(p, t, &frames);
                (g, None, Certificate::Scaled(frames, cols))
            }
            None => {
                let w: Vec<DMatrix<f64>> = chol.iter().map(|ch| ch.inverse()).collect();
                let (g, h) = plain_terms(p, t, &w, &uppers);
                (g, Some(h), Certificate::Plain(w))
            }
        };
        let residual = &b - &a * DVector::from_column_slice(&y);
        let qr_step = match &cert {
            Certificate::Scaled(_, blocks) => {
                let null = null.get_or_insert_with(|| NullSpace::of(&a));
                scaled_step(blocks, v, &p.c, t, null, &residual)
            }
            Certificate::Plain(_) => None,
        };
        let (delta, nu) = if let Some(step) = qr_step {
            step
        } else if m == 0 {
            let h = h.get_or_insert_with(|| cert.hessian(v));
            (solve_system(h.clone(), -&g, true)?, DVector::zeros(0))
        } else {
            let h = h.get_or_insert_with(|| cert.hessian(v));
            let mut kkt = DMatrix::zeros(v + m, v + m);
            kkt.view_mut((0, 0), (v, v)).copy_from(h);
            kkt.view_mut((v, 0), (m, v)).copy_from(&a);
            kkt.view_mut((0, v), (v, m)).copy_from(&a.transpose());
            let mut rhs = DVector::zeros(v + m);
            rhs.rows_mut(0, v).copy_from(&(-&g));
            rhs.rows_mut(v, m).copy_from(&residual);
            let sol = solve_system(kkt, rhs, false)?;
            (sol.rows(0, v).into_owned(), sol.rows(v, m).into_owned())
        };
        let dec2 = match &cert {
            Certificate::Scaled(_, blocks) => blocks.iter().map(|blk| blk.apply(&delta).norm_squared()).sum::<f64>(),
            Certificate::Plain(_) => delta.dot(&(h.as_ref().expect("plain Hessian") * &delta)).max(0.0),
        };

        // dual certificate Z = (W - W F(delta) W) / t, valid when the decrement is below 1
        if dec2 < 0.81 {
            if let Some(z) = cert.dual_blocks(p, &delta, t) {
                let mu = &nu / t;
                let dual = (0..nb).map(|k| p.f0[k].dot(&z[k])).sum::<f64>() + mu.dot(&b);
                if primal > dual + 1e-9 * dual.abs().max(1.0) {
                    violations += 1;
                    log::warn!("weak duality violated: primal {primal} > dual {dual}");
                }
                if dual < best_dual {
                    best_dual = dual;
                    dual_blocks = z;
                }
            }
        }

        if let Some(stop) = stop {
            if stop(primal, best_dual) {
                break;
            }
        }
        if rel_gap(best_dual, primal) <= tol || *budget == 0 {
            break;
        }
        if dec2 <= CENTERED && recentre_only == 0 {
            t /= BARRIER_FACTOR;
            recentre_only = 1;
            continue;
        }
        recentre_only = 0;

        // damped Newton step: stay strictly feasible, then Armijo on the barrier function
        let phi = |ch: &[nalgebra::Cholesky<f64, nalgebra::Dyn>], yy: &[f64]| -t * p.objective(yy) - log_det(ch);
        let phi0 = phi(&chol, &y);
        let slope = g.dot(&delta);
        let mut s = 1.0;
        let mut accepted = None;
        while s > 1e-14 {
            let trial: Vec<f64> = y.iter().zip(delta.iter()).map(|(yi, di)| yi + s * di).collect();
            if let Some(ch) = cholesky_all(p.slack(&trial)) {
                if phi(&ch, &trial) <= phi0 + ARMIJO * s * slope.min(0.0) {
                    accepted = Some((trial, ch));
                    break;
                }
            }
            s *= 0.5;
        }
        *budget -= 1;
        match accepted {
            Some((trial, ch)) => {
                y = trial;
                chol = ch;
            }
            None => {
                log::debug!("lmi line search stalled at gap {:.3e}", rel_gap(best_dual, primal));
                break;
            }
        }
    }
    Ok(Run { objective: p.objective(&y), y, dual_bound: best_dual, dual_blocks, violations })
}
