//! The matching digraph of a market.
//!
//! Vertices are the acceptable pairs. Within a worker's row there is an arc
//! `(w,a) -> (w,b)` whenever `w` prefers `b` to `a`; within a firm's column
//! there is an arc `(x,f) -> (y,f)` whenever `f` prefers `y` to `x`. Every
//! implied arc is stored, so each row and column is a transitive tournament.
//! A vertex set is a stable matching iff it is independent and every vertex
//! is in it or has an out-neighbour in it.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::market::{Market, Pair};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcKind {
    /// Same worker, towards the firm it prefers.
    Worker,
    /// Same firm, towards the worker it prefers.
    Firm,
}

/// An arc between vertex indices.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub kind: ArcKind,
}

#[derive(Clone, Debug)]
pub struct MatchingDigraph {
    num_workers: usize,
    num_firms: usize,
    vertices: Vec<Pair>,
    index: HashMap<Pair, usize>,
    // sorted by target vertex
    out: Vec<Vec<(usize, ArcKind)>>,
    // vertex indices per worker / firm, most preferred partner first
    rows: Vec<Vec<usize>>,
    columns: Vec<Vec<usize>>,
}

/// Builds the full matching digraph of `m`.
pub fn build_digraph(m: &Market) -> MatchingDigraph {
    let vertices = m.acceptable_pairs();
    let index: HashMap<Pair, usize> = vertices.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let rows: Vec<Vec<usize>> = (0..m.num_workers())
        .map(|w| m.worker_prefs(w).iter().map(|&f| index[&Pair::new(w, f)]).collect())
        .collect();
    let columns: Vec<Vec<usize>> = (0..m.num_firms())
        .map(|f| m.firm_prefs(f).iter().map(|&w| index[&Pair::new(w, f)]).collect())
        .collect();

    let mut out = vec![Vec::new(); vertices.len()];
    for (line, kind) in rows
        .iter()
        .map(|r| (r, ArcKind::Worker))
        .chain(columns.iter().map(|c| (c, ArcKind::Firm)))
    {
        for (better, &to) in line.iter().enumerate() {
            for &from in &line[better + 1..] {
                out[from].push((to, kind));
            }
        }
    }
    for targets in &mut out {
        targets.sort_unstable();
    }

    MatchingDigraph {
        num_workers: m.num_workers(),
        num_firms: m.num_firms(),
        vertices,
        index,
        out,
        rows,
        columns,
    }
}

impl MatchingDigraph {
    pub fn vertices(&self) -> &[Pair] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    pub fn num_firms(&self) -> usize {
        self.num_firms
    }

    pub fn vertex_index(&self, p: Pair) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn out_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, ArcKind)> + '_ {
        self.out[v].iter().copied()
    }

    /// Kind of the arc `from -> to`, if present.
    pub fn arc_between(&self, from: Pair, to: Pair) -> Option<ArcKind> {
        let (a, b) = (self.vertex_index(from)?, self.vertex_index(to)?);
        let targets = &self.out[a];
        targets.binary_search_by_key(&b, |&(t, _)| t).ok().map(|i| targets[i].1)
    }

    /// All arcs, ordered by source then target.
    pub fn arcs(&self) -> Vec<Arc> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(from, ts)| ts.iter().map(move |&(to, kind)| Arc { from, to, kind }))
            .collect()
    }

    pub fn num_arcs(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Vertex indices in worker `w`'s row, most preferred first.
    pub fn row(&self, w: usize) -> &[usize] {
        &self.rows[w]
    }

    /// Vertex indices in firm `f`'s column, most preferred first.
    pub fn column(&self, f: usize) -> &[usize] {
        &self.columns[f]
    }
}

/// True iff `set` is independent (no shared worker or firm) and dominating
/// (every vertex is in `set` or points into it). Pairs that are not vertices
/// make the set non-stable.
pub fn is_stable_vertex_set(d: &MatchingDigraph, set: &[Pair]) -> bool {
    let mut chosen = vec![false; d.num_vertices()];
    let mut worker_used = vec![false; d.num_workers];
    let mut firm_used = vec![false; d.num_firms];
    for &p in set {
        let Some(v) = d.vertex_index(p) else {
            return false;
        };
        if chosen[v] {
            continue;
        }
        if std::mem::replace(&mut worker_used[p.worker], true) || std::mem::replace(&mut firm_used[p.firm], true) {
            return false;
        }
        chosen[v] = true;
    }
    (0..d.num_vertices()).all(|v| chosen[v] || d.out[v].iter().any(|&(t, _)| chosen[t]))
}

/// Covering arcs only: consecutive ranks within each row and column. Its
/// transitive closure per row and column is the full arc set.
pub fn reduced_view(d: &MatchingDigraph) -> Vec<Arc> {
    let mut arcs: Vec<Arc> = d
        .rows
        .iter()
        .map(|r| (r, ArcKind::Worker))
        .chain(d.columns.iter().map(|c| (c, ArcKind::Firm)))
        .flat_map(|(line, kind)| {
            line.windows(2).map(move |w| Arc {
                from: w[1],
                to: w[0],
                kind,
            })
        })
        .collect();
    arcs.sort_unstable();
    arcs
}

const PALETTE: [&str; 6] = ["#f1c232", "#6fa8dc", "#e06666", "#93c47d", "#b4a7d6", "#f6b26b"];

/// Graphviz rendering with vertex `(i,j)` pinned at row `i`, column `j`.
///
/// Each named highlight set gets its own fill colour; a vertex in several
/// sets is drawn wedged. With `reduced`, only covering arcs are drawn.
pub fn export_dot(d: &MatchingDigraph, highlights: &[(String, Vec<Pair>)], reduced: bool) -> Result<String> {
    let mut fills: Vec<Vec<&str>> = vec![Vec::new(); d.num_vertices()];
    for (k, (name, pairs)) in highlights.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for &p in pairs {
            let v = d.vertex_index(p).ok_or_else(|| Error::UnknownVertex {
                set: name.clone(),
                worker: p.worker + 1,
                firm: p.firm + 1,
            })?;
            if !fills[v].contains(&colour) {
                fills[v].push(colour);
            }
        }
    }

    let node_id = |v: usize| {
        let p = d.vertices[v];
        format!("v{}_{}", p.worker + 1, p.firm + 1)
    };

    let mut out = String::new();
    out.push_str("digraph matching {\n");
    out.push_str("  graph [layout=neato, splines=true, overlap=true");
    if !highlights.is_empty() {
        let legend: Vec<String> = highlights
            .iter()
            .enumerate()
            .map(|(k, (name, _))| format!("{name}={}", PALETTE[k % PALETTE.len()]))
            .collect();
        let _ = write!(out, ", label=\"{}\", labelloc=b", legend.join("  "));
    }
    out.push_str("];\n");
    out.push_str("  node [shape=circle, fontsize=10, style=filled, fillcolor=white];\n");
    for (v, p) in d.vertices.iter().enumerate() {
        let _ = write!(
            out,
            "  {} [label=\"({},{})\", pos=\"{},{}!\"",
            node_id(v),
            p.worker + 1,
            p.firm + 1,
            p.firm as f64 * 1.5,
            0.0 - p.worker as f64 * 1.5
        );
        match fills[v].as_slice() {
            [] => {}
            [c] => {
                let _ = write!(out, ", fillcolor=\"{c}\"");
            }
            many => {
                let _ = write!(out, ", style=wedged, fillcolor=\"{}\"", many.join(":"));
            }
        }
        out.push_str("];\n");
    }
    let arcs = if reduced { reduced_view(d) } else { d.arcs() };
    for a in arcs {
        let style = match a.kind {
            ArcKind::Worker => "color=black",
            ArcKind::Firm => "color=gray40, style=dashed",
        };
        let _ = writeln!(out, "  {} -> {} [{style}];", node_id(a.from), node_id(a.to));
    }
    out.push_str("}\n");
    Ok(out)
}
