//! Immutable compressed-sparse-row graph storage.
//!
//! A [`CsrGraph`] keeps the forward adjacency (`offsets`/`dests`/`weights`)
//! together with its exact transpose (`rev_offsets`/`rev_srcs`/`rev_eid`).
//! Neighbour ranges are sorted ascending, so edge lookup is a binary search.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type NodeId = u32;
pub type EdgeId = usize;
pub type Weight = i32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CsrError {
    #[error("edge ({u}, {v}) has an endpoint outside [0, {n})")]
    InvalidEdge { u: u64, v: u64, n: usize },
    #[error("edge ({u}, {v}) has negative weight {w}")]
    NegativeWeight { u: u64, v: u64, w: i64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
}

/// An edge as handed to [`CsrGraph::build_from_edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputEdge {
    pub u: u64,
    pub v: u64,
    pub w: Option<i64>,
}

impl InputEdge {
    pub fn new(u: u64, v: u64) -> Self {
        InputEdge { u, v, w: None }
    }

    pub fn weighted(u: u64, v: u64, w: i64) -> Self {
        InputEdge { u, v, w: Some(w) }
    }
}

/// One entry of a neighbour slice: the other endpoint, the weight, and the
/// forward edge index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjacent {
    pub node: NodeId,
    pub weight: Weight,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    n: usize,
    offsets: Vec<usize>,
    dests: Vec<NodeId>,
    weights: Vec<Weight>,
    rev_offsets: Vec<usize>,
    rev_srcs: Vec<NodeId>,
    rev_eid: Vec<EdgeId>,
    directed: bool,
}

impl CsrGraph {
    /// Builds a graph from an edge list. Undirected edges are stored in both
    /// directions; duplicate `(u, v)` pairs collapse to the lightest weight.
    /// Missing weights default to 1.
    pub fn build_from_edges(n: usize, edges: &[InputEdge], directed: bool) -> Result<CsrGraph, CsrError> {
        let mut arcs: Vec<(NodeId, NodeId, Weight)> = Vec::with_capacity(edges.len() * 2);
        for e in edges {
            if e.u >= n as u64 || e.v >= n as u64 {
                return Err(CsrError::InvalidEdge { u: e.u, v: e.v, n });
            }
            let w = e.w.unwrap_or(1);
            if w < 0 {
                return Err(CsrError::NegativeWeight { u: e.u, v: e.v, w });
            }
            let w = Weight::try_from(w).unwrap_or(Weight::MAX);
            let (u, v) = (e.u as NodeId, e.v as NodeId);
            arcs.push((u, v, w));
            if !directed {
                arcs.push((v, u, w));
            }
        }
        // Sorting by (u, v, w) puts the minimum weight first within each pair.
        arcs.sort_unstable();
        arcs.dedup_by(|next, kept| next.0 == kept.0 && next.1 == kept.1);
        Ok(Self::from_sorted_arcs(n, &arcs, directed))
    }

    fn from_sorted_arcs(n: usize, arcs: &[(NodeId, NodeId, Weight)], directed: bool) -> CsrGraph {
        let m = arcs.len();
        let mut offsets = vec![0usize; n + 1];
        for &(u, _, _) in arcs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let dests = arcs.iter().map(|a| a.1).collect();
        let weights = arcs.iter().map(|a| a.2).collect();

        let mut rev_offsets = vec![0usize; n + 1];
        for &(_, v, _) in arcs {
            rev_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            rev_offsets[i + 1] += rev_offsets[i];
        }
        let mut cursor = rev_offsets.clone();
        let mut rev_srcs = vec![0; m];
        let mut rev_eid = vec![0; m];
        // Arcs are visited in ascending source order, so each in-list ends up sorted.
        for (eid, &(u, v, _)) in arcs.iter().enumerate() {
            let slot = cursor[v as usize];
            rev_srcs[slot] = u;
            rev_eid[slot] = eid;
            cursor[v as usize] += 1;
        }
        CsrGraph {
            n,
            offsets,
            dests,
            weights,
            rev_offsets,
            rev_srcs,
            rev_eid,
            directed,
        }
    }

    /// Reads a whitespace-separated `u v [w]` edge list. Lines starting with
    /// `#` are skipped, except a `# nodes N` header. The node count is
    /// `1 + max id` unless the header or `num_nodes` asks for more.
    pub fn load_edge_list(
        path: impl AsRef<Path>,
        directed: bool,
        num_nodes: Option<usize>,
    ) -> Result<CsrGraph, CsrError> {
        let text =
            fs::read_to_string(path.as_ref()).map_err(|e| CsrError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse_edge_list(&text, directed, num_nodes)
    }

    pub fn parse_edge_list(text: &str, directed: bool, num_nodes: Option<usize>) -> Result<CsrGraph, CsrError> {
        let mut edges = Vec::new();
        let mut max_id: Option<u64> = None;
        let mut header: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if let Some(rest) = trimmed.strip_prefix("# nodes ") {
                if let Some(Ok(k)) = rest.split_whitespace().next().map(str::parse::<usize>) {
                    header = Some(header.map_or(k, |h: usize| h.max(k)));
                }
                continue;
            }
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(CsrError::Parse {
                    line,
                    msg: format!("expected `u v [w]`, found {} fields", fields.len()),
                });
            }
            let id = |s: &str| {
                s.parse::<u64>().map_err(|_| CsrError::Parse {
                    line,
                    msg: format!("invalid node id `{s}`"),
                })
            };
            let u = id(fields[0])?;
            let v = id(fields[1])?;
            let w = match fields.get(2) {
                Some(s) => Some(s.parse::<i64>().map_err(|_| CsrError::Parse {
                    line,
                    msg: format!("invalid weight `{s}`"),
                })?),
                None => None,
            };
            if u >= u32::MAX as u64 || v >= u32::MAX as u64 {
                return Err(CsrError::Parse {
                    line,
                    msg: "node id out of range".to_string(),
                });
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push(InputEdge { u, v, w });
        }
        let inferred = max_id.map_or(0, |m| m as usize + 1);
        let declared = num_nodes.max(header);
        let n = declared.map_or(inferred, |d| d.max(inferred));
        Self::build_from_edges(n, &edges, directed)
    }

    /// Renders the graph in the edge-list format accepted by
    /// [`CsrGraph::parse_edge_list`]. Undirected graphs list each edge once.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for u in 0..self.n as NodeId {
            for a in self.neighbors(u) {
                if !self.directed && a.node < u {
                    continue;
                }
                out.push_str(&format!("{} {} {}\n", u, a.node, a.weight));
            }
        }
        out
    }

    /// Redraws every weight uniformly from `[lo, hi]`. Both directions of an
    /// undirected edge receive the same draw.
    pub fn assign_random_weights(&self, lo: Weight, hi: Weight, seed: u64) -> CsrGraph {
        assert!(lo <= hi, "empty weight range [{lo}, {hi}]");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = self.weights.clone();
        for u in 0..self.n {
            for e in self.offsets[u]..self.offsets[u + 1] {
                let v = self.dests[e] as usize;
                if self.directed || u <= v {
                    weights[e] = rng.gen_range(lo..=hi);
                } else {
                    let back = self
                        .find_edge(v as NodeId, u as NodeId)
                        .expect("undirected edge has a mirror");
                    weights[e] = weights[back];
                }
            }
        }
        let mut g = self.clone();
        g.weights = weights;
        g
    }

    /// The transpose: every edge `(u, v, w)` becomes `(v, u, w)`.
    pub fn transpose(&self) -> CsrGraph {
        let mut arcs = Vec::with_capacity(self.num_edges());
        for u in 0..self.n as NodeId {
            for a in self.neighbors(u) {
                arcs.push((a.node, u, a.weight));
            }
        }
        arcs.sort_unstable();
        Self::from_sorted_arcs(self.n, &arcs, self.directed)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.dests.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dests(&self) -> &[NodeId] {
        &self.dests
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn rev_offsets(&self) -> &[usize] {
        &self.rev_offsets
    }

    pub fn rev_srcs(&self) -> &[NodeId] {
        &self.rev_srcs
    }

    pub fn rev_eid(&self) -> &[EdgeId] {
        &self.rev_eid
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.rev_offsets[v + 1] - self.rev_offsets[v]
    }

    /// Out-edges of `v`, exactly the range `offsets[v]..offsets[v + 1]`.
    pub fn neighbors(&self, v: NodeId) -> impl ExactSizeIterator<Item = Adjacent> + '_ {
        let range = self.offsets[v as usize]..self.offsets[v as usize + 1];
        range.map(move |e| Adjacent {
            node: self.dests[e],
            weight: self.weights[e],
            edge: e,
        })
    }

    /// In-edges of `v`; `edge` is the forward edge index of `(src, v)`.
    pub fn in_neighbors(&self, v: NodeId) -> impl ExactSizeIterator<Item = Adjacent> + '_ {
        let range = self.rev_offsets[v as usize]..self.rev_offsets[v as usize + 1];
        range.map(move |r| {
            let e = self.rev_eid[r];
            Adjacent {
                node: self.rev_srcs[r],
                weight: self.weights[e],
                edge: e,
            }
        })
    }

    pub fn neighbor_ids(&self, v: NodeId) -> &[NodeId] {
        &self.dests[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Forward edge index of `(u, v)`, found by binary search.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let base = self.offsets[u as usize];
        self.neighbor_ids(u).binary_search(&v).ok().map(|i| base + i)
    }

    pub fn is_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.find_edge(u, v).is_some()
    }

    pub fn edge_weight(&self, e: EdgeId) -> Weight {
        self.weights[e]
    }

    pub fn edge_source(&self, e: EdgeId) -> NodeId {
        // offsets is non-decreasing; the owner is the last u with offsets[u] <= e.
        (self.offsets.partition_point(|&o| o <= e) - 1) as NodeId
    }

    pub fn edge_dest(&self, e: EdgeId) -> NodeId {
        self.dests[e]
    }

    pub fn min_weight(&self) -> Option<Weight> {
        self.weights.iter().copied().min()
    }

    pub fn max_weight(&self) -> Option<Weight> {
        self.weights.iter().copied().max()
    }

    /// A short FNV-1a digest of the structure, used to label oracle results.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.n as u64);
        eat(self.directed as u64);
        for &o in &self.offsets {
            eat(o as u64);
        }
        for (&d, &w) in self.dests.iter().zip(&self.weights) {
            eat(d as u64);
            eat(w as u64);
        }
        h
    }

    pub fn degree_summary(&self) -> DegreeSummary {
        let max = (0..self.n as NodeId).map(|v| self.out_degree(v)).max().unwrap_or(0);
        let avg = if self.n == 0 {
            0.0
        } else {
            self.num_edges() as f64 / self.n as f64
        };
        DegreeSummary {
            nodes: self.n,
            edges: self.num_edges(),
            avg_degree: avg,
            max_degree: max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeSummary {
    pub nodes: usize,
    pub edges: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
}

/// Parameters of the recursive-matrix generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for RmatParams {
    fn default() -> Self {
        RmatParams {
            a: 0.57,
            b: 0.19,
            c: 0.19,
            d: 0.05,
        }
    }
}

/// `edges` distinct node pairs drawn uniformly, without self-loops. The
/// request is capped at the number of available pairs.
pub fn uniform_random_edges(n: usize, edges: usize, directed: bool, seed: u64) -> Vec<InputEdge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = if n < 2 {
        0
    } else if directed {
        n * (n - 1)
    } else {
        n * (n - 1) / 2
    };
    let target = edges.min(pairs);
    let mut seen = std::collections::HashSet::with_capacity(target);
    let mut out = Vec::with_capacity(target);
    while out.len() < target {
        let u = rng.gen_range(0..n as u64);
        let v = rng.gen_range(0..n as u64);
        if u == v {
            continue;
        }
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if seen.insert(key) {
            out.push(InputEdge::new(key.0, key.1));
        }
    }
    out
}

/// Recursive-matrix (skewed degree) edges. Samples are drawn on the
/// enclosing power-of-two square and rejected outside `[0, n)`; self-loops
/// and duplicates are rejected too, up to a bounded number of attempts.
pub fn rmat_edges(n: usize, edges: usize, params: RmatParams, directed: bool, seed: u64) -> Vec<InputEdge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n < 2 {
        return Vec::new();
    }
    let scale = usize::BITS - (n - 1).leading_zeros();
    let total = params.a + params.b + params.c + params.d;
    let (a, ab, abc) = (
        params.a / total,
        (params.a + params.b) / total,
        (params.a + params.b + params.c) / total,
    );
    let mut seen = std::collections::HashSet::with_capacity(edges);
    let mut out = Vec::with_capacity(edges);
    let mut attempts = 0usize;
    let budget = edges.saturating_mul(64).max(1024);
    while out.len() < edges && attempts < budget {
        attempts += 1;
        let (mut u, mut v) = (0u64, 0u64);
        for _ in 0..scale {
            let r: f64 = rng.gen();
            let (du, dv) = if r < a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            u = (u << 1) | du;
            v = (v << 1) | dv;
        }
        if u >= n as u64 || v >= n as u64 || u == v {
            continue;
        }
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if seen.insert(key) {
            out.push(InputEdge::new(key.0, key.1));
        }
    }
    out
}
