//! Undirected weighted graphs, random d-regular generation and instance file I/O.
//!
//! Vertices are 0-based everywhere inside the crate. The Gset format is 1-based
//! and converted at the parse boundary; the plain edge-list format uses the same
//! layout but stays 0-based.
//!
//! Random regular graphs are not guaranteed to be connected.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Attempts made by the pairing model before [`GraphError::GenerationFailed`].
pub const REGULAR_RETRY_BUDGET: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex index {index} out of range for graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("no {d}-regular graph on {n} vertices")]
    InfeasibleDegree { n: usize, d: usize },
    #[error("pairing model failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed edge line {line}: {content}")]
    MalformedEdgeLine { line: usize, content: String },
    #[error("header announces {expected} edges, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
}

/// A canonical undirected edge, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Immutable undirected weighted graph.
///
/// Edges are stored once with `u < v` in the order they were supplied.
/// Neighbor lists are kept in CSR form, sorted by neighbor index.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
}

impl Graph {
    /// Builds a graph from raw `(u, v, w)` triples in either orientation.
    pub fn from_edge_list(
        n: usize,
        raw_edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, GraphError> {
        let raw_edges = raw_edges.into_iter();
        let mut edges = Vec::with_capacity(raw_edges.size_hint().0);
        let mut seen = HashSet::with_capacity(raw_edges.size_hint().0);
        for (a, b, w) in raw_edges {
            for index in [a, b] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            edges.push(Edge { u, v, w });
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![(0usize, 0.0f64); offsets[n]];
        for e in &edges {
            neighbors[cursor[e.u]] = (e.v, e.w);
            cursor[e.u] += 1;
            neighbors[cursor[e.v]] = (e.u, e.w);
            cursor[e.v] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_by_key(|&(u, _)| u);
        }

        Ok(Self {
            n,
            edges,
            offsets,
            neighbors,
        })
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_edge_list(n, std::iter::empty()).expect("empty graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted `(neighbor, weight)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// Sum of incident edge weights of `v`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbors(v).iter().map(|&(_, w)| w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1.0)
    }

    /// Renders the graph in Gset layout (1-based).
    pub fn to_gset_string(&self) -> String {
        self.render(1)
    }

    /// Renders the graph in plain edge-list layout (0-based).
    pub fn to_edge_list_string(&self) -> String {
        self.render(0)
    }

    fn render(&self, base: usize) -> String {
        let mut out = String::with_capacity(16 * (self.edges.len() + 1));
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u + base, e.v + base, e.w);
        }
        out
    }
}

/// Random `d`-regular graph with unit weights from the pairing model.
///
/// Stubs are shuffled and paired in order; a pairing containing a self-loop or
/// a repeated pair is discarded and a fresh shuffle is drawn.
pub fn generate_d_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(GraphError::InfeasibleDegree { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);
    'attempt: for _ in 0..REGULAR_RETRY_BUDGET {
        stubs.shuffle(&mut rng);
        seen.clear();
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v, 1.0));
        }
        return Graph::from_edge_list(n, edges);
    }
    Err(GraphError::GenerationFailed(REGULAR_RETRY_BUDGET))
}

/// Parses a Gset instance: header `n m`, then `m` lines `i j w` with 1-based indices.
pub fn parse_gset(text: &str) -> Result<Graph, GraphError> {
    parse_with_base(text, 1)
}

/// Parses the 0-based edge-list layout written by [`Graph::to_edge_list_string`].
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    parse_with_base(text, 0)
}

fn parse_with_base(text: &str, base: usize) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines
        .next()
        .ok_or_else(|| GraphError::MalformedHeader("empty input".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, m) = match fields.as_slice() {
        [n, m] => match (n.parse::<usize>(), m.parse::<usize>()) {
            (Ok(n), Ok(m)) => (n, m),
            _ => return Err(GraphError::MalformedHeader(header.to_string())),
        },
        _ => return Err(GraphError::MalformedHeader(header.to_string())),
    };

    let mut raw = Vec::with_capacity(m);
    for (line, content) in lines {
        let malformed = || GraphError::MalformedEdgeLine {
            line,
            content: content.to_string(),
        };
        let parts: Vec<&str> = content.split_whitespace().collect();
        let (i, j, w) = match parts.as_slice() {
            [i, j, w] => (
                i.parse::<usize>().map_err(|_| malformed())?,
                j.parse::<usize>().map_err(|_| malformed())?,
                w.parse::<f64>().map_err(|_| malformed())?,
            ),
            [i, j] => (
                i.parse::<usize>().map_err(|_| malformed())?,
                j.parse::<usize>().map_err(|_| malformed())?,
                1.0,
            ),
            _ => return Err(malformed()),
        };
        if i < base || j < base {
            return Err(malformed());
        }
        raw.push((i - base, j - base, w));
    }
    if raw.len() != m {
        return Err(GraphError::EdgeCountMismatch {
            expected: m,
            found: raw.len(),
        });
    }
    Graph::from_edge_list(n, raw)
}
