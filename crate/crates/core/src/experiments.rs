//! Monte Carlo study of how the pQRAC value `pbar` tracks the distance measure `D^2`
//! on random basis sets, with rank correlation and a 2D density export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bases::{avg_distance_sq, pbar, BasisSet};
use crate::numerics::derive_seed;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub pbar: f64,
    pub dbar_sq: f64,
    /// Seed of the basis set, so the sample can be regenerated alone.
    pub seed: u64,
}

/// `count` random sets of `n` bases in dimension `d`; sample `j` uses `derive_seed(seed, j)`.
pub fn monte_carlo(n: usize, d: usize, count: usize, seed: u64) -> Result<Vec<Sample>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and d >= 2 (n={n}, d={d})")));
    }
    let seeds: Vec<u64> = (0..count as u64).map(|j| derive_seed(seed, j)).collect();
    par::map(&seeds, |&s| {
        let set = BasisSet::random(n, d, s);
        Ok(Sample { pbar: pbar(&set)?, dbar_sq: avg_distance_sq(&set)?, seed: s })
    })
    .into_iter()
    .collect()
}

/// 1-based ranks with ties sharing their average rank.
fn ranks(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN in rank input".into()));
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    Ok(r)
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("spearman needs at least two points".into()));
    }
    let (rx, ry) = (ranks(xs)?, ranks(ys)?);
    let m = (xs.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - m) * (b - m);
        sxx += (a - m) * (a - m);
        syy += (b - m) * (b - m);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidParameter("rank variance is zero, correlation undefined".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Relative frequencies over a `bins_x x bins_y` grid (`x = pbar`, `y = dbar_sq`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `cells[ix][iy]`, summing to 1.
    pub cells: Vec<Vec<f64>>,
}

pub const DEFAULT_BINS: usize = 50;

fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    // a degenerate range gets a unit-width window so every point lands in a bin
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
}

fn bin_of(v: f64, e: &[f64]) -> usize {
    let bins = e.len() - 1;
    let t = (v - e[0]) / (e[bins] - e[0]) * bins as f64;
    (t.floor().max(0.0) as usize).min(bins - 1)
}

/// Bins span the observed data range; the maxima fall in the last bin.
pub fn density_grid(samples: &[Sample], bins_x: usize, bins_y: usize) -> Result<DensityGrid> {
    if samples.is_empty() || bins_x == 0 || bins_y == 0 {
        return Err(Error::InvalidParameter("density grid needs samples and at least one bin per axis".into()));
    }
    let range = |f: fn(&Sample) -> f64| {
        samples.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (x0, x1) = range(|s| s.pbar);
    let (y0, y1) = range(|s| s.dbar_sq);
    let (x_edges, y_edges) = (edges(x0, x1, bins_x), edges(y0, y1, bins_y));
    let mut cells = vec![vec![0.0; bins_y]; bins_x];
    let unit = 1.0 / samples.len() as f64;
    for s in samples {
        cells[bin_of(s.pbar, &x_edges)][bin_of(s.dbar_sq, &y_edges)] += unit;
    }
    Ok(DensityGrid { x_edges, y_edges, cells })
}

pub fn samples_csv(samples: &[Sample]) -> String {
    let mut s = String::from("seed,pbar,dbar_sq\n");
    for x in samples {
        let _ = writeln!(s, "{},{:.17e},{:.17e}", x.seed, x.pbar, x.dbar_sq);
    }
    s
}

impl DensityGrid {
    /// Header row `x\y` followed by the `y` edges; each data row starts with its `x` edge.
    /// The last edge on each axis is the upper bound of the final bin.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x\\y");
        for e in &self.y_edges {
            let _ = write!(s, ",{e:.17e}");
        }
        s.push('\n');
        for (ix, row) in self.cells.iter().enumerate() {
            let _ = write!(s, "{:.17e}", self.x_edges[ix]);
            for c in row {
                let _ = write!(s, ",{c:.17e}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{:.17e}", self.x_edges[self.cells.len()]);
        s
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().flatten().sum()
    }
}
