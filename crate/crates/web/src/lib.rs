//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string so the page can `JSON.parse` it without
//! generated TypeScript glue.

use mubforge_core::experiments::{density_grid, monte_carlo, spearman};
use mubforge_core::games::{anomaly_scan, AnomalyOptions};
use mubforge_core::seesaw::{self, SeesawConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest scan the page may request, in eigenvalue evaluations.
const ANOMALY_CAP: u64 = 2_000_000;

pub fn anomaly_json(d: usize, n: usize) -> Result<String, String> {
    let opts = AnomalyOptions { cap: ANOMALY_CAP, ..AnomalyOptions::default() };
    let r = anomaly_scan(d, n, opts).map_err(|e| e.to_string())?;
    let bins: Vec<_> = r.bins.iter().map(|b| json!({ "value": b.value, "count": b.count })).collect();
    Ok(json!({ "d": d, "n": n, "family": r.family, "anomalous": r.is_anomalous(), "bins": bins }).to_string())
}

pub fn seesaw_json(n: usize, d: usize, seed: u64, rounds: usize) -> Result<String, String> {
    let mut cfg = SeesawConfig::new(n, d);
    cfg.seeds = vec![seed];
    cfg.max_rounds = rounds;
    let r = seesaw::run(&cfg).map_err(|e| e.to_string())?;
    Ok(json!({
        "trajectory": r.trajectory,
        "pbar": r.pbar,
        "qbar": r.qbar,
        "dbar_sq": r.dbar_sq,
        "rounds": r.rounds,
        "converged": r.converged,
    })
    .to_string())
}

pub fn density_json(n: usize, d: usize, count: usize, seed: u64, bins: usize) -> Result<String, String> {
    let samples = monte_carlo(n, d, count, seed).map_err(|e| e.to_string())?;
    let grid = density_grid(&samples, bins, bins).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = samples.iter().map(|s| s.pbar).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.dbar_sq).collect();
    let rho = spearman(&xs, &ys).ok();
    Ok(json!({ "spearman": rho, "x_edges": grid.x_edges, "y_edges": grid.y_edges, "cells": grid.cells }).to_string())
}

/// Binned QRAC values over all `n`-subsets of the MUB family in dimension `d`.
#[wasm_bindgen]
pub fn anomaly(d: usize, n: usize) -> Result<String, JsError> {
    anomaly_json(d, n).map_err(|e| JsError::new(&e))
}

/// Single-seed see-saw run; `trajectory` holds `pbar` after every round.
#[wasm_bindgen]
pub fn seesaw_trajectory(n: usize, d: usize, seed: u64, rounds: usize) -> Result<String, JsError> {
    seesaw_json(n, d, seed, rounds).map_err(|e| JsError::new(&e))
}

/// Monte Carlo `(pbar, D^2)` density grid and rank correlation.
#[wasm_bindgen]
pub fn density(n: usize, d: usize, count: usize, seed: u64, bins: usize) -> Result<String, JsError> {
    density_json(n, d, count, seed, bins).map_err(|e| JsError::new(&e))
}
