//! Plain-text formats. All indices in files are 1-based.
//!
//! * edge list: `i j [w]` per line, `#` starts a comment; an optional
//!   `# nodes N` line fixes the agent count
//! * profile: `i K` with `K` a nonnegative decimal or `inf`
//! * opinions: `i x0`
//!
//! Floats are written in shortest round-trip form, so save followed by load
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::Trajectory;
use crate::equilibrium::HittingMatrix;
use crate::error::{Error, Result};
use crate::graph::{AugmentedGraph, Graph, Stubbornness, StubbornnessProfile};

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

/// Non-empty, non-comment lines as `(1-based line number, fields)`.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (k + 1, l.split_whitespace().collect()))
    })
}

fn index(line: usize, field: &str) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i - 1),
        _ => parse_err(line, format!("expected a 1-based index, got {field:?}")),
    }
}

fn number(line: usize, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => parse_err(line, format!("expected a finite number, got {field:?}")),
    }
}

fn declared_nodes(text: &str) -> Result<Option<usize>> {
    for (k, l) in text.lines().enumerate() {
        let rest = l.trim().strip_prefix('#').map(str::trim);
        if let Some(count) = rest.and_then(|r| r.strip_prefix("nodes")) {
            return match count.trim().parse() {
                Ok(n) => Ok(Some(n)),
                Err(_) => parse_err(k + 1, format!("bad node count {:?}", count.trim())),
            };
        }
    }
    Ok(None)
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    for (line, f) in records(text) {
        if !(2..=3).contains(&f.len()) {
            return parse_err(line, "expected `i j [w]`");
        }
        let w = if f.len() == 3 {
            number(line, f[2])?
        } else {
            1.0
        };
        edges.push((index(line, f[0])?, index(line, f[1])?, w));
    }
    let max = edges
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    let n = declared_nodes(text)?.unwrap_or(max);
    Graph::from_edges(n, edges)
}

/// Edge list with a `# nodes N` header; unit weights are omitted.
pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("# nodes {}\n", g.n());
    for &(i, j, w) in g.edges() {
        if w == 1.0 {
            writeln!(s, "{} {}", i + 1, j + 1).unwrap();
        } else {
            writeln!(s, "{} {} {}", i + 1, j + 1, w).unwrap();
        }
    }
    s
}

/// Profile for `n` agents; agents not listed are non-stubborn.
pub fn parse_profile(text: &str, n: usize) -> Result<StubbornnessProfile> {
    let mut levels = vec![Stubbornness::Finite(0.0); n];
    let mut seen = vec![false; n];
    for (line, f) in records(text) {
        if f.len() != 2 {
            return parse_err(line, "expected `i K`");
        }
        let i = index(line, f[0])?;
        if i >= n {
            return parse_err(line, format!("agent {} out of range 1..={n}", i + 1));
        }
        if std::mem::replace(&mut seen[i], true) {
            return parse_err(line, format!("agent {} listed twice", i + 1));
        }
        levels[i] = if f[1].eq_ignore_ascii_case("inf") {
            Stubbornness::Full
        } else {
            let k = number(line, f[1])?;
            if k < 0.0 {
                return parse_err(line, "stubbornness must be nonnegative");
            }
            Stubbornness::Finite(k)
        };
    }
    StubbornnessProfile::new(levels)
}

/// One line per agent with nonzero stubbornness.
pub fn write_profile(p: &StubbornnessProfile) -> String {
    let mut s = String::new();
    for (i, level) in p.levels().iter().enumerate() {
        match *level {
            Stubbornness::Full => writeln!(s, "{} inf", i + 1).unwrap(),
            Stubbornness::Finite(k) if k != 0.0 => writeln!(s, "{} {}", i + 1, k).unwrap(),
            Stubbornness::Finite(_) => {}
        }
    }
    s
}

/// Opinions for exactly `n` agents, each listed once.
pub fn parse_opinions(text: &str, n: usize) -> Result<Vec<f64>> {
    let mut x0 = vec![None; n];
    for (line, f) in records(text) {
        if f.len() != 2 {
            return parse_err(line, "expected `i x0`");
        }
        let i = index(line, f[0])?;
        if i >= n {
            return parse_err(line, format!("agent {} out of range 1..={n}", i + 1));
        }
        if x0[i].replace(number(line, f[1])?).is_some() {
            return parse_err(line, format!("agent {} listed twice", i + 1));
        }
    }
    match x0.iter().position(Option::is_none) {
        Some(i) => parse_err(0, format!("no opinion for agent {}", i + 1)),
        None => Ok(x0.into_iter().map(Option::unwrap).collect()),
    }
}

pub fn write_opinions(x0: &[f64]) -> String {
    let mut s = String::new();
    for (i, x) in x0.iter().enumerate() {
        writeln!(s, "{} {}", i + 1, x).unwrap();
    }
    s
}

/// Columns `t, x_1..x_n, err_norm`; `err_norm` is empty without an
/// equilibrium reference.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut s = String::from("t");
    for i in 1..=n {
        write!(s, ",x_{i}").unwrap();
    }
    s.push_str(",err_norm\n");
    for (t, x) in traj.states.iter().enumerate() {
        write!(s, "{t}").unwrap();
        for v in x {
            write!(s, ",{v}").unwrap();
        }
        match &traj.errors {
            Some(e) => writeln!(s, ",{}", e[t]).unwrap(),
            None => s.push_str(",\n"),
        }
    }
    s
}

/// Columns `i, x_inf`.
pub fn equilibrium_csv(x: &[f64]) -> String {
    let mut s = String::from("i,x_inf\n");
    for (i, v) in x.iter().enumerate() {
        writeln!(s, "{},{}", i + 1, v).unwrap();
    }
    s
}

/// Header `i` followed by the stubborn agent ids; one row per agent, with
/// identity rows for fully stubborn agents.
pub fn hitting_csv(f: &HittingMatrix, n: usize) -> String {
    let mut s = String::from("i");
    for &j in &f.stubborn {
        write!(s, ",{}", j + 1).unwrap();
    }
    s.push('\n');
    for i in 0..n {
        write!(s, "{}", i + 1).unwrap();
        for v in f.row(i) {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// 1-based label of an augmented node: `7` for agent 7, `u7` for its
/// virtual node.
pub fn node_label(aug: &AugmentedGraph, node: usize) -> String {
    if aug.is_virtual(node) {
        format!("u{}", aug.agent_of_virtual(node) + 1)
    } else {
        (node + 1).to_string()
    }
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&read_text(path)?)
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    write_text(path, &write_graph(g))
}

pub fn load_profile(path: impl AsRef<Path>, n: usize) -> Result<StubbornnessProfile> {
    parse_profile(&read_text(path)?, n)
}

pub fn save_profile(p: &StubbornnessProfile, path: impl AsRef<Path>) -> Result<()> {
    write_text(path, &write_profile(p))
}

pub fn load_opinions(path: impl AsRef<Path>, n: usize) -> Result<Vec<f64>> {
    parse_opinions(&read_text(path)?, n)
}
