use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::anyhow;
use serde_json::{json, Value};

use mubforge_core::bases::{mub_family, pair_table, BasisSet, BasisSetFile, SetSummary};
use mubforge_core::experiments::{density_grid, monte_carlo, samples_csv, spearman};
use mubforge_core::games::{anomaly_scan, pqrac_value, qrac_value, AnomalyOptions, GameOptions};
use mubforge_core::hierarchy::{
    bound_from_span, bound_problem, discover_span, memory_estimate, BoundOptions, Level, SpanOptions,
};
use mubforge_core::sdp::{write_lmi_dump, SdpStatus, SolverOptions};
use mubforge_core::seesaw::{self, SeesawConfig};

use crate::output::{write, Report};
use crate::{Cli, Command, Failure, Global};

pub enum Outcome {
    Done,
    NotConverged(String),
}

fn input(msg: String) -> Failure {
    Failure::Input(anyhow!(msg))
}

/// Reads a basis set from a plain basis file or from a report that embeds one
/// (`mubs` and `seesaw` output).
pub fn load_bases(path: &Path) -> Result<BasisSet, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("reading {}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if let Some(r) = v.get_mut("result") {
        v = r.take();
    }
    if v.get("bases").is_some_and(Value::is_object) {
        v = v["bases"].take();
    }
    let file: BasisSetFile = serde_json::from_value(v).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(file.into_set()?)
}

fn global_config(g: &Global) -> Value {
    json!({ "seed": g.seed, "format": g.format, "tol": g.tol, "threads": rayon::current_num_threads() })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    let t0 = Instant::now();
    let mut outcome = Outcome::Done;
    let report = match &cli.command {
        Command::Mubs { d } => {
            let set = mub_family(*d)?;
            let cfg = merge(global_config(g), json!({ "d": d }));
            let mut csv = String::from("basis,vector,component,re,im\n");
            for (k, b) in set.bases().iter().enumerate() {
                for c in 0..b.dim() {
                    for (r, z) in b.matrix().column(c).iter().enumerate() {
                        let _ = writeln!(csv, "{k},{c},{r},{:.17e},{:.17e}", z.re, z.im);
                    }
                }
            }
            Report::new("mubs", cfg, &BasisSetFile::from_set(&set), t0.elapsed().as_secs_f64())?.with_csv(csv)
        }
        Command::Measure { bases } => {
            let set = load_bases(bases)?;
            let summary = SetSummary::of(&set)?;
            let pairs = pair_table(&set)?;
            let mut csv = String::from("a,b,distance_sq,pair_value,qbar,max_unbiasedness_deviation\n");
            for p in &pairs {
                let _ = writeln!(
                    csv,
                    "{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
                    p.a, p.b, p.distance_sq, p.pair_value, p.qbar, p.max_unbiasedness_deviation
                );
            }
            let cfg = merge(global_config(g), json!({ "bases": bases }));
            let result = json!({ "summary": summary, "pairs": pairs });
            Report::new("measure", cfg, &result, t0.elapsed().as_secs_f64())?.with_csv(csv)
        }
        Command::Qrac { bases, m } => {
            let set = load_bases(bases)?;
            let m = m.unwrap_or(set.n());
            let opts = GameOptions::default();
            let r = if m == set.n() { qrac_value(&set, opts)? } else { pqrac_value(&set, m, opts)? };
            let mut csv = String::from("z,x,success\n");
            for s in &r.per_input_success {
                let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
                let _ = writeln!(csv, "{},{},{:.17e}", join(&s.input.z), join(&s.input.x), s.success);
            }
            let cfg = merge(global_config(g), json!({ "bases": bases, "m": m, "cap": opts.cap }));
            Report::new("qrac", cfg, &r, t0.elapsed().as_secs_f64())?.with_csv(csv)
        }
        Command::Anomaly { d, n, resolution } => {
            let mut opts = AnomalyOptions::default();
            if let Some(r) = resolution.or(g.tol) {
                opts.resolution = r;
            }
            let r = anomaly_scan(*d, *n, opts)?;
            let mut csv = String::from("value,count\n");
            let digits = (-opts.resolution.log10()).ceil().max(0.0) as usize;
            for b in &r.bins {
                let _ = writeln!(csv, "{:.*},{}", digits, b.value, b.count);
            }
            let cfg = merge(
                global_config(g),
                json!({ "d": d, "n": n, "resolution": opts.resolution, "cap": opts.cap }),
            );
            let result = merge(serde_json::to_value(&r)?, json!({ "anomalous": r.is_anomalous() }));
            Report::new("anomaly", cfg, &result, t0.elapsed().as_secs_f64())?.with_csv(csv)
        }
        Command::Seesaw { n, d, seeds, rounds } => {
            let mut cfg = SeesawConfig::new(*n, *d);
            cfg.seeds = (g.seed..g.seed.saturating_add(*seeds)).collect();
            cfg.max_rounds = *rounds;
            if let Some(t) = g.tol {
                cfg.improvement_eps = t;
            }
            let r = seesaw::run(&cfg)?;
            if !r.converged {
                outcome = Outcome::NotConverged(format!("best seed {} stopped at the {rounds}-round cap", r.seed));
            }
            let conf = merge(
                global_config(g),
                json!({
                    "n": n, "d": d, "seeds": seeds, "rounds": rounds,
                    "improvement_eps": cfg.improvement_eps, "solver_tol": cfg.solver_tol, "rounding": "loewdin",
                }),
            );
            let csv = r.trajectory_csv();
            Report::new("seesaw", conf, &r, t0.elapsed().as_secs_f64())?.with_csv(csv)
        }
        Command::Bound { n, d, level, stall_k, dump } => {
            let level: Level = level.parse()?;
            let mut opts = BoundOptions {
                span: SpanOptions { stall_k: *stall_k, seed: g.seed, ..SpanOptions::default() },
                ..BoundOptions::default()
            };
            if let Some(t) = g.tol {
                opts.solver = SolverOptions::with_tol(t);
            }
            let span = discover_span(*n, *d, level, &opts.span)?;
            if let Some(path) = dump {
                let (lmi, _) = bound_problem(&span, opts.face_tol)?;
                write_lmi_dump(&lmi, path)?;
            }
            let mut r = bound_from_span(&span, &opts)?;
            r.base_seed = g.seed;
            if r.status != SdpStatus::Optimal {
                outcome = Outcome::NotConverged(format!("solver stopped with status {:?}", r.status));
            }
            let cfg = merge(
                global_config(g),
                json!({
                    "n": n, "d": d, "level": level.to_string(), "stall_k": stall_k,
                    "span_tol": opts.span.tol, "solver_tol": opts.solver.tol,
                    "max_iter": opts.solver.max_iter, "face_tol": opts.face_tol,
                }),
            );
            Report::new("bound", cfg, &r, t0.elapsed().as_secs_f64())?
        }
        Command::Mc { n, d, count, bins, grid } => {
            let samples = monte_carlo(*n, *d, *count, g.seed)?;
            let xs: Vec<f64> = samples.iter().map(|s| s.pbar).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s.dbar_sq).collect();
            let rho = if samples.len() >= 2 { spearman(&xs, &ys).ok() } else { None };
            if let Some(path) = grid {
                let gr = density_grid(&samples, *bins, *bins)?;
                std::fs::write(path, gr.to_csv()).map_err(|e| input(format!("writing {}: {e}", path.display())))?;
            }
            let cfg = merge(global_config(g), json!({ "n": n, "d": d, "count": count, "bins": bins }));
            let result = json!({ "spearman": rho, "samples": samples });
            Report::new("mc", cfg, &result, t0.elapsed().as_secs_f64())?.with_csv(samples_csv(&samples))
        }
        Command::Plan { n, d, k } => {
            let e = memory_estimate(*n, *d, *k)?;
            let cfg = merge(global_config(g), json!({ "n": n, "d": d, "k": k }));
            // u128 counts go out as strings to stay exact in JSON
            let result = json!({
                "n": e.n, "d": e.d, "k": e.k,
                "a_plus_b": e.a_plus_b.to_string(),
                "word_count": e.word_count.to_string(),
                "parameter_count": e.parameter_count.to_string(),
                "bytes": e.bytes.to_string(),
                "saturated": e.saturated,
            });
            let csv = format!(
                "n,d,k,a_plus_b,word_count,parameter_count,bytes,saturated\n{},{},{},{},{},{},{},{}\n",
                e.n, e.d, e.k, e.a_plus_b, e.word_count, e.parameter_count, e.bytes, e.saturated
            );
            Report::new("plan", cfg, &result, t0.elapsed().as_secs_f64())?.with_csv(csv)
        }
    };
    let text = report.render(g.format)?;
    write(g, &text)?;
    Ok(outcome)
}
