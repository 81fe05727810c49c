//! Simple graphs with a fixed edge order, plus the body-bar construction.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A finite simple graph. Vertices are `0..n` internally; the edge list order
/// is canonical and indexes every rigidity-matrix row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph from 0-based edges, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(edges.len());
        for (k, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {} = {{{}, {}}} has an endpoint outside 1..={n}",
                    k + 1,
                    u + 1,
                    v + 1
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!(
                    "edge {} is a loop at vertex {}",
                    k + 1,
                    u + 1
                )));
            }
            if index.insert(key(u, v), k).is_some() {
                return Err(Error::InvalidGraph(format!(
                    "edge {} = {{{}, {}}} is a duplicate",
                    k + 1,
                    u + 1,
                    v + 1
                )));
            }
        }
        Ok(Self { n, edges, index })
    }

    /// Builds a graph from 1-based edges.
    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if let Some((k, _)) = edges.iter().enumerate().find(|(_, e)| e.0 == 0 || e.1 == 0) {
            return Err(Error::InvalidGraph(format!(
                "edge {} uses vertex 0; vertices are numbered from 1",
                k + 1
            )));
        }
        Self::new(n, edges.iter().map(|&(u, v)| (u - 1, v - 1)).collect())
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, edges).expect("complete graph is simple")
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> (usize, usize) {
        self.edges[k]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&key(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.index.contains_key(&key(u, v))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Edge indices incident to `v`.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].0 == v || self.edges[k].1 == v)
            .collect()
    }

    /// The cone graph `G*o`. The cone vertex is appended as vertex `n`
    /// (external label 0) and the coning edges `{i, o}` follow the original
    /// edges in vertex order.
    pub fn cone(&self) -> Self {
        let mut edges = self.edges.clone();
        edges.extend((0..self.n).map(|i| (i, self.n)));
        Self::new(self.n + 1, edges).expect("cone of a simple graph is simple")
    }

    /// Copy with one extra edge appended.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push((u, v));
        Self::new(self.n, edges)
    }
}

/// Undirected multigraph input for [`body_bar_graph`]. Parallel edges are
/// allowed, loops are not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// A body-bar graph `G_H`, with the body (vertex of `H`) owning each vertex.
#[derive(Clone, Debug)]
pub struct BodyBarGraph {
    pub graph: Graph,
    pub body_of: Vec<usize>,
    /// Edge indices of `graph` that are bars between bodies, in `H`-edge order.
    pub bars: Vec<usize>,
}

/// Replaces each vertex `v` of `H` by a complete graph on `deg_H(v)` vertices
/// and each edge of `H` by a bar, using every body vertex exactly once.
///
/// Body edges come first (body by body), then the bars in `H`-edge order.
pub fn body_bar_graph(h: &Multigraph) -> Result<BodyBarGraph> {
    let mut degree = vec![0usize; h.n];
    for (k, &(u, v)) in h.edges.iter().enumerate() {
        if u >= h.n || v >= h.n {
            return Err(Error::InvalidGraph(format!(
                "multigraph edge {} leaves the vertex range",
                k + 1
            )));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!(
                "multigraph edge {} is a loop",
                k + 1
            )));
        }
        degree[u] += 1;
        degree[v] += 1;
    }
    if let Some(v) = degree.iter().position(|&d| d == 0) {
        return Err(Error::InvalidGraph(format!(
            "multigraph vertex {} is isolated",
            v + 1
        )));
    }

    let mut first = Vec::with_capacity(h.n);
    let mut body_of = Vec::new();
    for (v, &d) in degree.iter().enumerate() {
        first.push(body_of.len());
        body_of.extend(std::iter::repeat_n(v, d));
    }

    let mut edges = Vec::new();
    for (v, &d) in degree.iter().enumerate() {
        for a in 0..d {
            for b in a + 1..d {
                edges.push((first[v] + a, first[v] + b));
            }
        }
    }
    let mut next = vec![0usize; h.n];
    let mut bars = Vec::with_capacity(h.edges.len());
    for &(u, v) in &h.edges {
        let a = first[u] + next[u];
        let b = first[v] + next[v];
        next[u] += 1;
        next[v] += 1;
        bars.push(edges.len());
        edges.push((a, b));
    }
    let graph = Graph::new(body_of.len(), edges)?;
    Ok(BodyBarGraph {
        graph,
        body_of,
        bars,
    })
}
