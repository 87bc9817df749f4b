//! Textbook reference algorithms for checking the interpreter on small graphs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use thiserror::Error;

use crate::csr::{CsrGraph, NodeId};

/// Largest graph [`oracle_tc`] accepts; it enumerates all O(n³) triples.
pub const TC_NODE_LIMIT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {n} nodes; the oracle is limited to {limit}")]
    GraphTooLarge { n: usize, limit: usize },
    #[error("node {node} is out of range")]
    BadNode { node: NodeId },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleValues {
    /// `None` for unreachable nodes.
    Distances(Vec<Option<i64>>),
    Scores(Vec<f64>),
    Count(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub algorithm: &'static str,
    pub parameters: String,
    pub graph_hash: u64,
    pub values: OracleValues,
}

fn check_node(g: &CsrGraph, v: NodeId) -> Result<(), OracleError> {
    if (v as usize) < g.num_nodes() {
        Ok(())
    } else {
        Err(OracleError::BadNode { node: v })
    }
}

/// Binary-heap Dijkstra over out-edges.
pub fn oracle_sssp(g: &CsrGraph, src: NodeId) -> Result<Vec<Option<i64>>, OracleError> {
    check_node(g, src)?;
    let mut dist: Vec<Option<i64>> = vec![None; g.num_nodes()];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = Some(0);
    heap.push(Reverse((0i64, src)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u as usize].is_some_and(|best| d > best) {
            continue;
        }
        for a in g.neighbors(u) {
            let nd = d + a.weight as i64;
            let slot = &mut dist[a.node as usize];
            if slot.is_none_or(|cur| nd < cur) {
                *slot = Some(nd);
                heap.push(Reverse((nd, a.node)));
            }
        }
    }
    Ok(dist)
}

/// Brandes dependency accumulation over unweighted out-edge BFS, summed over
/// `sources`. Unnormalized; a source gains nothing from its own pass.
pub fn oracle_bc(g: &CsrGraph, sources: &[NodeId]) -> Result<Vec<f64>, OracleError> {
    let n = g.num_nodes();
    let mut bc = vec![0.0; n];
    for &s in sources {
        check_node(g, s)?;
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        sigma[s as usize] = 1.0;
        dist[s as usize] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &w in g.neighbor_ids(v) {
                let (vi, wi) = (v as usize, w as usize);
                if dist[wi] < 0 {
                    dist[wi] = dist[vi] + 1;
                    q.push_back(w);
                }
                if dist[wi] == dist[vi] + 1 {
                    sigma[wi] += sigma[vi];
                    preds[wi].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &v in &preds[w as usize] {
                delta[v as usize] += sigma[v as usize] / sigma[w as usize] * (1.0 + delta[w as usize]);
            }
            if w != s {
                bc[w as usize] += delta[w as usize];
            }
        }
    }
    Ok(bc)
}

/// Dense power iteration: r'(v) = (1−d)/n + d·(Σ_{u→v} r(u)/outdeg(u) + D/n)
/// where D is the rank held by dangling nodes. Stops when the largest change
/// drops below `eps` or after `max_iter` iterations.
pub fn oracle_pr(g: &CsrGraph, d: f64, eps: f64, max_iter: usize) -> Vec<f64> {
    let n = g.num_nodes();
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    // m[v][u]: share of u's rank that flows to v.
    let mut m = vec![vec![0.0f64; n]; n];
    for u in 0..n {
        let deg = g.out_degree(u as NodeId);
        if deg == 0 {
            for row in m.iter_mut() {
                row[u] = 1.0 / nf;
            }
        } else {
            for &v in g.neighbor_ids(u as NodeId) {
                m[v as usize][u] += 1.0 / deg as f64;
            }
        }
    }
    let mut r = vec![1.0 / nf; n];
    for _ in 0..max_iter {
        let next: Vec<f64> = m
            .iter()
            .map(|row| (1.0 - d) / nf + d * row.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let delta = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r = next;
        if delta < eps {
            break;
        }
    }
    r
}

/// Counts triples u < v < w with edges v→u, v→w and u→w, looked up in a
/// dense adjacency matrix. On an undirected graph this is the number of
/// triangles.
#[allow(clippy::needless_range_loop)]
pub fn oracle_tc(g: &CsrGraph) -> Result<u64, OracleError> {
    let n = g.num_nodes();
    if n > TC_NODE_LIMIT {
        return Err(OracleError::GraphTooLarge {
            n,
            limit: TC_NODE_LIMIT,
        });
    }
    let mut adj = vec![vec![false; n]; n];
    for u in 0..n {
        for &v in g.neighbor_ids(u as NodeId) {
            adj[u][v as usize] = true;
        }
    }
    let mut count = 0;
    for u in 0..n {
        for v in u + 1..n {
            if !adj[v][u] {
                continue;
            }
            for w in v + 1..n {
                if adj[v][w] && adj[u][w] {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

impl OracleResult {
    pub fn sssp(g: &CsrGraph, src: NodeId) -> Result<Self, OracleError> {
        Ok(OracleResult {
            algorithm: "sssp",
            parameters: format!("src={src}"),
            graph_hash: g.fingerprint(),
            values: OracleValues::Distances(oracle_sssp(g, src)?),
        })
    }

    pub fn bc(g: &CsrGraph, sources: &[NodeId]) -> Result<Self, OracleError> {
        Ok(OracleResult {
            algorithm: "bc",
            parameters: format!("sources={}", sources.len()),
            graph_hash: g.fingerprint(),
            values: OracleValues::Scores(oracle_bc(g, sources)?),
        })
    }

    pub fn pr(g: &CsrGraph, d: f64, eps: f64, max_iter: usize) -> Self {
        OracleResult {
            algorithm: "pr",
            parameters: format!("damping={d} eps={eps} max_iter={max_iter}"),
            graph_hash: g.fingerprint(),
            values: OracleValues::Scores(oracle_pr(g, d, eps, max_iter)),
        }
    }

    pub fn tc(g: &CsrGraph) -> Result<Self, OracleError> {
        Ok(OracleResult {
            algorithm: "tc",
            parameters: String::new(),
            graph_hash: g.fingerprint(),
            values: OracleValues::Count(oracle_tc(g)?),
        })
    }
}
