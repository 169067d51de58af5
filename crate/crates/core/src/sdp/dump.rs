//! Plain-text LMI dump for cross-checking against external solvers.
//!
//! ```text
//! lmi <blocks> <vars> <equalities>
//! sizes <n_1> ... <n_blocks>
//! c <c_1> ... <c_vars>
//! F <var> <block> <nnz>      (var 0 is the constant term, then 1..=vars)
//! <row> <col> <value>        (upper triangle, 0-based)
//! eq <a_1> ... <a_vars> <b>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{LmiProblem, SymMat};
use crate::Result;

fn upper_entries(m: &SymMat, n: usize) -> Vec<(usize, usize, f64)> {
    let dense = m.to_dense(n);
    let mut out = Vec::new();
    for r in 0..n {
        for c in r..n {
            if dense[(r, c)] != 0.0 {
                out.push((r, c, dense[(r, c)]));
            }
        }
    }
    out
}

pub fn dump_lmi(p: &LmiProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lmi {} {} {}", p.block_sizes.len(), p.nvars(), p.eq_a.len());
    let sizes: Vec<String> = p.block_sizes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "sizes {}", sizes.join(" "));
    let c: Vec<String> = p.c.iter().map(|x| format!("{x:.17e}")).collect();
    let _ = writeln!(s, "c {}", c.join(" "));
    let terms = std::iter::once(&p.f0).chain(p.f.iter());
    for (var, blocks) in terms.enumerate() {
        for (k, (m, &n)) in blocks.iter().zip(&p.block_sizes).enumerate() {
            let entries = upper_entries(m, n);
            if entries.is_empty() {
                continue;
            }
            let _ = writeln!(s, "F {var} {k} {}", entries.len());
            for (r, cc, v) in entries {
                let _ = writeln!(s, "{r} {cc} {v:.17e}");
            }
        }
    }
    for (row, b) in p.eq_a.iter().zip(&p.eq_b) {
        let a: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        let _ = writeln!(s, "eq {} {b:.17e}", a.join(" "));
    }
    s
}

pub fn write_lmi_dump(p: &LmiProblem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, dump_lmi(p))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_layout() {
        let mut p = LmiProblem::with_blocks(
            vec![2],
            vec![1.0, 0.0],
            vec![SymMat::from_upper([(0, 0, 1.0), (1, 1, 1.0)])],
            vec![vec![SymMat::from_upper([(0, 1, 1.0)])], vec![SymMat::zero()]],
        )
        .unwrap();
        p.add_equality(vec![0.0, 1.0], 2.0).unwrap();
        let text = dump_lmi(&p);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lmi 1 2 1");
        assert_eq!(lines[1], "sizes 2");
        assert!(lines.contains(&"F 0 0 2"));
        assert!(lines.contains(&"F 1 0 1"));
        assert!(!text.contains("F 2 0"));
        assert!(lines.last().unwrap().starts_with("eq "));
    }
}
