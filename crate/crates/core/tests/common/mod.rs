#![allow(dead_code)]

use graphdsl::corpus::{list_corpus, CorpusEntry};
use graphdsl::csr::{rmat_edges, uniform_random_edges, CsrGraph, InputEdge, RmatParams};
use graphdsl::interpreter::{parse_args, run, Args, PropertyStore, RunConfig};
use graphdsl::semantic::{check_source, AnnotatedProgram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod criteria;
pub mod emit;
pub mod programs;

/// A seeded graph with n ≤ 60: even seeds uniform, odd seeds RMAT-skewed;
/// every third graph is directed. Weights are drawn from [1, 100].
pub fn random_graph(seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(2..=60);
    let edges = rng.gen_range(n..=4 * n);
    let directed = seed % 3 == 0;
    let list = if seed % 2 == 0 {
        uniform_random_edges(n, edges, directed, seed)
    } else {
        rmat_edges(n, edges, RmatParams::default(), directed, seed)
    };
    CsrGraph::build_from_edges(n, &list, directed)
        .unwrap()
        .assign_random_weights(1, 100, seed)
}

pub fn k4() -> CsrGraph {
    let e: Vec<InputEdge> = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        .iter()
        .map(|&(u, v)| InputEdge::new(u, v))
        .collect();
    CsrGraph::build_from_edges(4, &e, false).unwrap()
}

pub fn weighted_triangle() -> CsrGraph {
    let e = [
        InputEdge::weighted(0, 1, 5),
        InputEdge::weighted(1, 2, 1),
        InputEdge::weighted(0, 2, 7),
    ];
    CsrGraph::build_from_edges(3, &e, false).unwrap()
}

pub fn path3() -> CsrGraph {
    CsrGraph::build_from_edges(3, &[InputEdge::new(0, 1), InputEdge::new(1, 2)], false).unwrap()
}

pub fn two_cycle() -> CsrGraph {
    CsrGraph::build_from_edges(2, &[InputEdge::new(0, 1), InputEdge::new(1, 0)], true).unwrap()
}

pub fn entry(name: &str) -> CorpusEntry {
    list_corpus().into_iter().find(|e| e.name == name).unwrap()
}

pub fn program(entry: &CorpusEntry) -> AnnotatedProgram {
    check_source(entry.source).unwrap()
}

/// Corpus arguments for a graph; `seed` varies the SSSP source and BC source set.
pub fn args_for(entry: &CorpusEntry, p: &AnnotatedProgram, g: &CsrGraph, seed: u64) -> Args {
    parse_args(p, &pairs_for(entry, g.num_nodes(), seed), g.num_nodes()).unwrap()
}

pub fn pairs_for(entry: &CorpusEntry, n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = entry.default_args();
    for (name, value) in pairs.iter_mut() {
        match name.as_str() {
            "src" => *value = rng.gen_range(0..n).to_string(),
            "sourceSet" if seed % 2 == 1 => {
                let k = rng.gen_range(1..=n.min(5));
                let set: Vec<String> = (0..k).map(|_| rng.gen_range(0..n).to_string()).collect();
                *value = set.join(",");
            }
            "threshold" => *value = "1e-9".into(),
            _ => {}
        }
    }
    pairs
}

pub fn run_entry(
    entry: &CorpusEntry,
    p: &AnnotatedProgram,
    g: &CsrGraph,
    args: &Args,
    config: &RunConfig,
) -> PropertyStore {
    run(p, g, args, config).unwrap_or_else(|e| panic!("{} failed: {e}", entry.name))
}
