//! Plain-text graph files.
//!
//! ```text
//! n m
//! i j w      (m lines, 0-based, whitespace separated)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::AffinityMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub fn read_graph(path: impl AsRef<Path>) -> Result<AffinityMatrix> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn parse_graph(text: &str) -> Result<AffinityMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::GraphFormat {
        line: 0,
        message: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(fmt_err(hline, "header must be `n m`"));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| fmt_err(hline, "bad vertex count"))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| fmt_err(hline, "bad edge count"))?;

    let mut weights = Matrix::zeros(n);
    let mut seen: HashMap<(usize, usize), f64> = HashMap::new();
    let mut count = 0;
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(fmt_err(line, "edge line must be `i j w`"));
        }
        let i: usize = f[0]
            .parse()
            .map_err(|_| fmt_err(line, "bad vertex index"))?;
        let j: usize = f[1]
            .parse()
            .map_err(|_| fmt_err(line, "bad vertex index"))?;
        let w: f64 = f[2].parse().map_err(|_| fmt_err(line, "bad weight"))?;
        if i >= n || j >= n {
            return Err(fmt_err(line, &format!("vertex out of range (n = {n})")));
        }
        if i == j {
            return Err(fmt_err(line, "self-loop"));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(fmt_err(line, "weight must be a finite nonnegative number"));
        }
        let key = (i.min(j), i.max(j));
        if let Some(&prev) = seen.get(&key) {
            if prev != w {
                return Err(fmt_err(
                    line,
                    &format!("edge {i}-{j} repeated with weight {w} != {prev}"),
                ));
            }
        }
        seen.insert(key, w);
        weights.set(i, j, w);
        weights.set(j, i, w);
        count += 1;
    }
    if count != m {
        return Err(fmt_err(
            hline,
            &format!("header declares {m} edges, found {count}"),
        ));
    }
    AffinityMatrix::new(weights)
}

fn fmt_err(line: usize, message: &str) -> Error {
    Error::GraphFormat {
        line,
        message: message.to_string(),
    }
}

/// Serializes every positive edge once (`i < j`).
pub fn write_graph(a: &AffinityMatrix) -> String {
    let n = a.n();
    let mut out = format!("{} {}\n", n, a.edge_count());
    for i in 0..n {
        for j in i + 1..n {
            if a.adjacent(i, j) {
                let _ = writeln!(out, "{i} {j} {}", a.get(i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;

    #[test]
    fn parse_simple() {
        let g = parse_graph("# triangle\n3 3\n0 1 1\n1 2 0.5\n0 2 0.25\n").unwrap();
        assert_eq!(g.get(2, 1), 0.5);
        assert_eq!(g.get(0, 2), 0.25);
    }

    #[test]
    fn round_trip_example() {
        let g = example_graph();
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_graph("").is_err());
        assert!(parse_graph("2 1\n0 0 1\n").is_err());
        assert!(parse_graph("2 2\n0 1 1\n1 0 0.5\n").is_err());
        assert!(parse_graph("2 1\n0 2 1\n").is_err());
        assert!(parse_graph("2 2\n0 1 1\n").is_err());
        assert!(parse_graph("2 1\n0 1 -1\n").is_err());
        assert!(parse_graph("2 1\n0 1\n").is_err());
        // identical duplicate is harmless
        assert!(parse_graph("2 2\n0 1 1\n1 0 1\n").is_ok());
    }
}
