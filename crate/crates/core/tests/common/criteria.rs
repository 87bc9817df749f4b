//! Acceptance checks shared by the per-criterion tests and `acceptance.rs`.
//! Each returns `Err` with a description of the first failure.

use std::time::Instant;

use graphdsl::codegen::{structural_check, BackendKind};
use graphdsl::corpus::{list_corpus, load_corpus};
use graphdsl::csr::{CsrGraph, NodeId};
use graphdsl::frontend::parse_source;
use graphdsl::frontend::pretty::pretty_print;
use graphdsl::interpreter::{parse_args, run, RunConfig};
use graphdsl::semantic::check_source;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::emit;
use super::programs::random_program;
use super::*;

pub type Outcome = Result<String, String>;

pub fn corpus_round_trip() -> Outcome {
    let start = Instant::now();
    let g = random_graph(4);
    for e in list_corpus() {
        let (ast, entry) = load_corpus(e.name).map_err(|err| err.to_string())?;
        if ast.census() != entry.census {
            return Err(format!("{}: census {:?} != {:?}", e.name, ast.census(), entry.census));
        }
        let printed = pretty_print(&ast);
        let again = parse_source(&printed).map_err(|err| format!("{}: reparse: {err}", e.name))?;
        if pretty_print(&again) != printed {
            return Err(format!("{}: pretty-print is not a fixed point", e.name));
        }
        let p = check_source(entry.source).map_err(|err| format!("{}: {err}", e.name))?;
        let args = args_for(&entry, &p, &g, 1);
        run(&p, &g, &args, &RunConfig::default()).map_err(|err| format!("{}: {err}", e.name))?;
    }
    let t = start.elapsed();
    if t.as_secs_f64() >= 1.0 {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("4 programs in {t:?}"))
}

pub fn oracle_equivalence(graphs: u64) -> Outcome {
    let start = Instant::now();
    let entries: Vec<_> = list_corpus().into_iter().map(|e| (program(&e), e)).collect();
    let configs = [RunConfig::default(), RunConfig::parallel(4)];
    for seed in 0..graphs {
        let g = random_graph(seed);
        for (p, e) in &entries {
            let args = args_for(e, p, &g, seed);
            let oracle = e.oracle_for(&g, &args).map_err(|err| err.to_string())?;
            for config in &configs {
                let store = run(p, &g, &args, config).map_err(|err| format!("{} seed {seed}: {err}", e.name))?;
                let c = e.compare(&store, &oracle).map_err(|err| err.to_string())?;
                if !c.pass {
                    return Err(format!(
                        "{} seed {seed} {:?}: got {} want {} (abs {}, rel {})",
                        e.name, config.mode, c.interpreter, c.oracle, c.max_abs_error, c.max_rel_error
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{graphs} graphs x 4 programs x 2 modes in {:?}",
        start.elapsed()
    ))
}

fn run_fixture(
    name: &str,
    g: &CsrGraph,
    pairs: &[(&str, &str)],
) -> Result<graphdsl::interpreter::PropertyStore, String> {
    let e = entry(name);
    let p = program(&e);
    let mut all = e.default_args();
    for (k, v) in pairs {
        all.retain(|(n, _)| n != k);
        all.push((k.to_string(), v.to_string()));
    }
    let args = parse_args(&p, &all, g.num_nodes()).map_err(|err| err.to_string())?;
    run(&p, g, &args, &RunConfig::default()).map_err(|err| err.to_string())
}

pub fn fixtures() -> Outcome {
    let tc = run_fixture("tc", &k4(), &[])?;
    let count = tc.scalar("count").or(tc.returned).map(|v| v.as_i64());
    if count != Some(4) {
        return Err(format!("TC(K4) = {count:?}"));
    }
    let sssp = run_fixture("sssp", &weighted_triangle(), &[("src", "0")])?;
    let dist = sssp.property("dist").unwrap().as_i64();
    if dist != [0, 5, 6] {
        return Err(format!("SSSP triangle = {dist:?}"));
    }
    let bc = run_fixture("bc", &path3(), &[("sourceSet", "all")])?;
    let bc = bc.property("bc").unwrap().as_f64();
    if bc.iter().zip([0.0, 2.0, 0.0]).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(format!("BC path-3 = {bc:?}"));
    }
    let pr = run_fixture("pr", &two_cycle(), &[("threshold", "1e-12")])?;
    let pr = pr.property("pr").unwrap().as_f64();
    if pr.iter().any(|x| (x - 0.5).abs() > 1e-12) {
        return Err(format!("PR 2-cycle = {pr:?}"));
    }
    Ok("TC(K4)=4, SSSP=[0,5,6], BC=[0,2,0], PR=[0.5,0.5]".into())
}

fn audit_one(label: &str, source: &str, g: &CsrGraph, pairs: &[(String, String)]) -> Result<usize, String> {
    let p = check_source(source).map_err(|err| format!("{label}: {err}\n{source}"))?;
    let args = parse_args(&p, pairs, g.num_nodes()).map_err(|err| format!("{label}: {err}"))?;
    let config = RunConfig {
        audit: true,
        ..RunConfig::default()
    };
    let store = run(&p, g, &args, &config).map_err(|err| format!("{label}: {err}\n{source}"))?;
    let report = store.audit.expect("audit requested");
    if let Some(v) = report.violations.first() {
        return Err(format!("{label}: {v}\n{source}"));
    }
    Ok(report.regions_entered)
}

pub fn transfer_soundness(programs: u64) -> Outcome {
    let mut regions = 0;
    for e in list_corpus() {
        for seed in 0..4 {
            let g = random_graph(seed);
            let mut pairs = e.default_args();
            for (name, value) in pairs.iter_mut() {
                if name == "src" {
                    *value = (seed as usize % g.num_nodes()).to_string();
                }
            }
            regions += audit_one(e.name, e.source, &g, &pairs)?;
        }
    }
    for seed in 0..programs {
        let g = random_graph(seed + 1000);
        let source = random_program(seed);
        let s = ChaCha8Rng::seed_from_u64(seed).gen_range(0..g.num_nodes() as NodeId);
        let pairs = vec![("s".to_string(), s.to_string())];
        regions += audit_one(&format!("random program {seed}"), &source, &g, &pairs)?;
    }
    Ok(format!(
        "corpus + {programs} random programs, {regions} regions audited"
    ))
}

pub fn csr_properties(graphs: u64) -> Outcome {
    let start = Instant::now();
    for seed in 0..graphs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=64);
        let m = rng.gen_range(0..=4 * n);
        let directed = rng.gen_bool(0.5);
        let list = if rng.gen_bool(0.5) {
            graphdsl::csr::uniform_random_edges(n, m, directed, seed)
        } else {
            graphdsl::csr::rmat_edges(n, m, Default::default(), directed, seed)
        };
        let g = CsrGraph::build_from_edges(n, &list, directed).map_err(|e| e.to_string())?;
        if g.transpose().transpose() != g {
            return Err(format!("seed {seed}: transpose is not an involution"));
        }
        let out: usize = (0..n as NodeId).map(|v| g.out_degree(v)).sum();
        let inn: usize = (0..n as NodeId).map(|v| g.in_degree(v)).sum();
        if out != g.num_edges() || inn != g.num_edges() {
            return Err(format!("seed {seed}: degree sums {out}/{inn} != m {}", g.num_edges()));
        }
        let mut adj = vec![vec![false; n]; n];
        for e in &list {
            adj[e.u as usize][e.v as usize] = true;
            if !directed {
                adj[e.v as usize][e.u as usize] = true;
            }
        }
        for u in 0..n {
            let ids = g.neighbor_ids(u as NodeId);
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("seed {seed}: adjacency of {u} not strictly sorted"));
            }
            for v in 0..n {
                if g.is_edge(u as NodeId, v as NodeId) != adj[u][v] {
                    return Err(format!("seed {seed}: is_edge({u},{v}) disagrees with matrix"));
                }
            }
        }
    }
    let t = start.elapsed();
    if t.as_secs() >= 30 {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("{graphs} graphs in {t:?}"))
}

pub fn codegen_snapshots() -> Outcome {
    let first = emit::corpus_units();
    let second = emit::corpus_units();
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut files = 0;
    for (a, b) in first.iter().zip(&second) {
        if a.unit != b.unit {
            return Err(format!("{} {}: regeneration differs", a.entry.name, a.unit.backend));
        }
        let dir = emit::golden_dir().join(a.entry.name).join(a.unit.backend.name());
        for (name, text) in &a.unit.files {
            let path = dir.join(name);
            if update {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                std::fs::write(&path, text).map_err(|e| e.to_string())?;
            }
            let golden = std::fs::read_to_string(&path)
                .map_err(|e| format!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display()))?;
            if &golden != text {
                return Err(format!("{} differs from the golden file", path.display()));
            }
            files += 1;
        }
    }
    Ok(format!("{} units, {files} files byte-identical", first.len()))
}

pub fn structural_contracts() -> Outcome {
    let cases = emit::corpus_units();
    for c in &cases {
        let r = structural_check(&c.unit, &c.program, &c.analyses);
        if !r.is_clean() {
            return Err(format!(
                "{} {}: {}",
                c.entry.name,
                c.unit.backend,
                r.violations.join("; ")
            ));
        }
    }
    let mutations = emit::mutations(&cases, 7);
    for m in &mutations {
        let c = &cases[m.case];
        if structural_check(&m.unit, &c.program, &c.analyses).is_clean() {
            return Err(format!("mutation not detected: {}", m.label));
        }
    }
    Ok(format!(
        "{} units clean, {}/{} mutations detected",
        cases.len(),
        mutations.len(),
        mutations.len()
    ))
}

pub fn size_envelope() -> Outcome {
    let cases = emit::corpus_units();
    let mut report = Vec::new();
    for e in list_corpus() {
        let count = |b: BackendKind| {
            cases
                .iter()
                .find(|c| c.entry.name == e.name && c.unit.backend == b)
                .map(|c| c.unit.body_line_count())
                .unwrap()
        };
        let target = match e.name {
            "bc" => 150.0,
            "pr" => 120.0,
            "sssp" => 125.0,
            _ => 75.0,
        };
        let (acc, cuda, cl) = (
            count(BackendKind::OpenAcc),
            count(BackendKind::Cuda),
            count(BackendKind::OpenCl),
        );
        let lo = target * 0.5;
        let hi = target * 1.5;
        if (cuda as f64) < lo || (cuda as f64) > hi {
            return Err(format!("{}: CUDA body {cuda} lines outside [{lo}, {hi}]", e.name));
        }
        if !(acc < cuda && cuda < cl) {
            return Err(format!(
                "{}: ordering OpenACC {acc} < CUDA {cuda} < OpenCL {cl} fails",
                e.name
            ));
        }
        let dsl = e.line_count();
        if dsl > e.max_lines {
            return Err(format!("{}: DSL source has {dsl} lines, limit {}", e.name, e.max_lines));
        }
        report.push(format!("{} {acc}/{cuda}/{cl} (dsl {dsl})", e.name));
    }
    Ok(report.join(", "))
}

/// Compiles and runs every unit for which a toolchain exists. `Ok` messages
/// starting with "skipped" mean nothing could run.
pub fn toolchain_agreement(graphs: u64) -> Outcome {
    let mut ran = Vec::new();
    let mut skipped = Vec::new();
    let cases = emit::corpus_units();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for b in BackendKind::ALL {
        let Some(argv) = emit::compiler(b) else {
            skipped.push(b.name());
            continue;
        };
        let mut runs = 0;
        for c in cases.iter().filter(|c| c.unit.backend == b) {
            let exe = emit::compile(&c.unit, &argv, dir.path())?;
            for seed in 0..graphs {
                let g = random_graph(seed);
                let pairs = pairs_for(&c.entry, g.num_nodes(), seed);
                let args = parse_args(&c.program, &pairs, g.num_nodes()).map_err(|e| e.to_string())?;
                let store = run(&c.program, &g, &args, &RunConfig::default()).map_err(|e| e.to_string())?;
                let out = emit::run_unit(&exe, &g, &pairs, dir.path())
                    .map_err(|e| format!("{} {b} seed {seed}: {e}", c.entry.name))?;
                emit::compare_output(&c.entry, &out, &store)
                    .map_err(|e| format!("{} {b} seed {seed}: {e}", c.entry.name))?;
                runs += 1;
            }
        }
        ran.push(format!("{b} {runs} runs"));
    }
    if ran.is_empty() {
        return Ok(format!("skipped: no toolchain for {}", skipped.join(", ")));
    }
    if skipped.is_empty() {
        return Ok(ran.join(", "));
    }
    Ok(format!("{}; no toolchain for {}", ran.join(", "), skipped.join(", ")))
}
