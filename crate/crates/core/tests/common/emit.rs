//! Corpus units, seeded mutations and the OpenACC toolchain runner.

use std::path::{Path, PathBuf};
use std::process::Command;

use graphdsl::codegen::{generate, BackendKind, CodegenConfig, EmitUnit, BODY_BEGIN, BODY_END};
use graphdsl::corpus::{list_corpus, CorpusEntry, Tolerance};
use graphdsl::csr::CsrGraph;
use graphdsl::interpreter::{PropertyStore, Value};
use graphdsl::semantic::{analyze, check_source, Analyses, AnnotatedProgram};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub entry: CorpusEntry,
    pub program: AnnotatedProgram,
    pub analyses: Analyses,
    pub unit: EmitUnit,
}

pub fn config(name: &str) -> CodegenConfig {
    CodegenConfig {
        program_name: Some(name.to_string()),
        ..CodegenConfig::default()
    }
}

/// The 16 corpus units, program-major in backend order.
pub fn corpus_units() -> Vec<Case> {
    let mut out = Vec::new();
    for entry in list_corpus() {
        let program = check_source(entry.source).unwrap();
        let analyses = analyze(&program);
        for b in BackendKind::ALL {
            let unit = generate(&program, &analyses, b, &config(entry.name))
                .unwrap_or_else(|e| panic!("{} {b}: {e}", entry.name));
            out.push(Case {
                entry: entry.clone(),
                program: program.clone(),
                analyses: analyses.clone(),
                unit,
            });
        }
    }
    out
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// A unit with one file's text replaced.
pub fn with_file(unit: &EmitUnit, file: &str, text: String) -> EmitUnit {
    let mut u = unit.clone();
    for (n, t) in u.files.iter_mut() {
        if n == file {
            *t = text.clone();
        }
    }
    u
}

fn replace_line(text: &str, line: usize, new: Option<String>) -> String {
    let mut out = String::new();
    for (i, l) in text.lines().enumerate() {
        if i + 1 == line {
            if let Some(n) = &new {
                out.push_str(n);
                out.push('\n');
            }
        } else {
            out.push_str(l);
            out.push('\n');
        }
    }
    out
}

/// Drops `symbol` from every data clause of an OpenACC pragma line.
pub fn drop_clause_item(line: &str, symbol: &str) -> String {
    let mut out = String::new();
    let mut rest = line;
    while let Some(open) = rest.find('(') {
        let head = &rest[..open];
        let close = open + rest[open..].find(')').unwrap();
        let items: Vec<&str> = rest[open + 1..close]
            .split(", ")
            .filter(|i| i.split('[').next() != Some(symbol))
            .collect();
        let keyword = head.rsplit(' ').next().unwrap_or("");
        if items.is_empty() {
            out.push_str(head[..head.len() - keyword.len()].trim_end());
        } else {
            out.push_str(head);
            out.push('(');
            out.push_str(&items.join(", "));
            out.push(')');
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

/// A mutated unit and what was done to it.
pub struct Mutation {
    pub label: String,
    pub case: usize,
    pub unit: EmitUnit,
}

fn body_lines(text: &str) -> Vec<usize> {
    let mut inside = false;
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        match l.trim() {
            BODY_BEGIN => inside = true,
            BODY_END => inside = false,
            _ if inside => out.push(i + 1),
            _ => {}
        }
    }
    out
}

const SWAPS: &[(&str, &str)] = &[
    ("atomicMin(", "atomicMax("),
    ("atomicMax(", "atomicMin("),
    ("atomicAdd(", "atomicSub("),
    (".fetch_add(", ".fetch_sub("),
    (".fetch_min(", ".fetch_max("),
    (".fetch_max(", ".fetch_min("),
    ("cmpxchg_add_double(", "atomic_add("),
    ("cmpxchg_min_", "cmpxchg_max_"),
    ("cmpxchg_max_", "cmpxchg_min_"),
    ("#pragma acc atomic update", "#pragma acc atomic read"),
    ("#pragma acc atomic write", "#pragma acc atomic read"),
];

/// 30 seeded mutations: ten deleted transfers, ten swapped atomic idioms and
/// ten removed OpenACC reduction clauses.
pub fn mutations(cases: &[Case], seed: u64) -> Vec<Mutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..10 {
        let ci = rng.gen_range(0..cases.len());
        let u = &cases[ci].unit;
        let t = u.structure.transfers.choose(&mut rng).unwrap();
        let text = u.file(&t.file).unwrap();
        let line = text.lines().nth(t.line - 1).unwrap();
        let new = if u.backend == BackendKind::OpenAcc {
            Some(drop_clause_item(line, &t.symbol))
        } else {
            None
        };
        out.push(Mutation {
            label: format!(
                "{}: delete {} of {} at line {}",
                file_label(u, &t.file),
                t.direction.short(),
                t.symbol,
                t.line
            ),
            case: ci,
            unit: with_file(u, &t.file, replace_line(text, t.line, new)),
        });
    }
    let mut swaps = Vec::new();
    for (ci, c) in cases.iter().enumerate() {
        for (file, text) in &c.unit.files {
            let lines: Vec<&str> = text.lines().collect();
            for l in body_lines(text) {
                for (from, to) in SWAPS {
                    if lines[l - 1].contains(from) {
                        swaps.push((ci, file.clone(), l, *from, *to));
                    }
                }
            }
        }
    }
    for _ in 0..10 {
        let (ci, file, l, from, to) = swaps.choose(&mut rng).unwrap().clone();
        let u = &cases[ci].unit;
        let text = u.file(&file).unwrap();
        let line = text.lines().nth(l - 1).unwrap().replacen(from, to, 1);
        out.push(Mutation {
            label: format!("{}: `{from}` -> `{to}` at line {l}", file_label(u, &file)),
            case: ci,
            unit: with_file(u, &file, replace_line(text, l, Some(line))),
        });
    }
    let mut clauses = Vec::new();
    for (ci, c) in cases.iter().enumerate() {
        if c.unit.backend != BackendKind::OpenAcc {
            continue;
        }
        let (file, text) = &c.unit.files[0];
        for (i, l) in text.lines().enumerate() {
            let mut rest = l;
            while let Some(p) = rest.find(" reduction(") {
                let end = p + rest[p..].find(')').unwrap() + 1;
                clauses.push((ci, file.clone(), i + 1, rest[p..end].to_string()));
                rest = &rest[end..];
            }
        }
    }
    for _ in 0..10 {
        let (ci, file, l, clause) = clauses.choose(&mut rng).unwrap().clone();
        let u = &cases[ci].unit;
        let text = u.file(&file).unwrap();
        let line = text.lines().nth(l - 1).unwrap().replacen(&clause, "", 1);
        out.push(Mutation {
            label: format!("{}: remove `{}` at line {l}", file_label(u, &file), clause.trim()),
            case: ci,
            unit: with_file(u, &file, replace_line(text, l, Some(line))),
        });
    }
    out
}

fn file_label(u: &EmitUnit, file: &str) -> String {
    format!("{}/{}", u.program, file)
}

/// Removes every recorded transfer line from a unit.
pub fn strip_transfers(u: &EmitUnit) -> EmitUnit {
    let mut out = u.clone();
    for (name, text) in out.files.iter_mut() {
        let lines: std::collections::BTreeSet<usize> = u
            .structure
            .transfers
            .iter()
            .filter(|t| &t.file == name)
            .map(|t| t.line)
            .collect();
        *text = text
            .lines()
            .enumerate()
            .filter(|(i, _)| !lines.contains(&(i + 1)))
            .map(|(_, l)| format!("{l}\n"))
            .collect();
    }
    out
}

/// Compiler command for `b`, when one is installed and works.
pub fn compiler(b: BackendKind) -> Option<Vec<String>> {
    let argv: Vec<String> = match b {
        BackendKind::OpenAcc if which("g++") => vec!["g++".into(), "-fopenacc".into(), "-O1".into(), "-w".into()],
        BackendKind::Cuda if which("nvcc") => vec!["nvcc".into(), "-O1".into(), "-w".into(), "-arch=native".into()],
        BackendKind::Sycl if which("icpx") => vec!["icpx".into(), "-fsycl".into(), "-O1".into(), "-w".into()],
        BackendKind::Sycl if which("acpp") => vec!["acpp".into(), "-O1".into(), "-w".into()],
        BackendKind::OpenCl if which("g++") && Path::new("/usr/include/CL/cl.h").exists() => {
            vec!["g++".into(), "-O1".into(), "-w".into()]
        }
        _ => return None,
    };
    if b == BackendKind::OpenAcc {
        let dir = tempfile::tempdir().ok()?;
        let src = dir.path().join("probe.cpp");
        std::fs::write(
            &src,
            "int main() {\n#pragma acc parallel loop\nfor (int i = 0; i < 4; i++) {}\nreturn 0;\n}\n",
        )
        .ok()?;
        let out = Command::new(&argv[0])
            .args(&argv[1..])
            .arg("-o")
            .arg(dir.path().join("probe"))
            .arg(&src)
            .output()
            .ok()?;
        if !out.status.success() {
            return None;
        }
    }
    Some(argv)
}

pub fn which(tool: &str) -> bool {
    Command::new("sh")
        .args(["-c", &format!("command -v {tool}")])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// Writes a unit's files into `dir` and compiles its host file.
pub fn compile(u: &EmitUnit, argv: &[String], dir: &Path) -> Result<PathBuf, String> {
    for (name, text) in &u.files {
        std::fs::write(dir.join(name), text).map_err(|e| e.to_string())?;
    }
    let exe = dir.join(format!("{}_{}", u.program, u.backend.name()));
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..]).arg("-o").arg(&exe).arg(dir.join(&u.files[0].0));
    if u.backend == BackendKind::OpenCl {
        cmd.arg("-lOpenCL");
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{}: {}", u.files[0].0, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(exe)
}

/// Runs a compiled unit on `g` and returns its stdout.
pub fn run_unit(exe: &Path, g: &CsrGraph, pairs: &[(String, String)], dir: &Path) -> Result<String, String> {
    let graph = dir.join("graph.txt");
    std::fs::write(&graph, g.to_edge_list()).map_err(|e| e.to_string())?;
    let out = Command::new(exe)
        .current_dir(dir)
        .arg(&graph)
        .arg(if g.is_directed() { "1" } else { "0" })
        .arg(g.num_nodes().to_string())
        .args(pairs.iter().map(|(k, v)| format!("{k}={v}")))
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Compares driver output with the interpreter's value for the entry's output.
pub fn compare_output(entry: &CorpusEntry, stdout: &str, store: &PropertyStore) -> Result<(), String> {
    let want: Vec<f64> = match store.property(entry.output) {
        Some(p) => p.as_f64(),
        None => {
            let v = store
                .scalar(entry.output)
                .or(store.returned)
                .ok_or("no interpreter output")?;
            vec![match v {
                Value::Int(i) => i as f64,
                other => other.as_f64(),
            }]
        }
    };
    let mut got = Vec::new();
    for line in stdout.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [name, _, v] if *name == entry.output => got.push(v.parse::<f64>().map_err(|e| e.to_string())?),
            ["return", v] if store.property(entry.output).is_none() => {
                got.push(v.parse::<f64>().map_err(|e| e.to_string())?)
            }
            _ => {}
        }
    }
    if got.len() != want.len() {
        return Err(format!("{} values, expected {}", got.len(), want.len()));
    }
    for (i, (a, b)) in got.iter().zip(&want).enumerate() {
        let abs = (a - b).abs();
        let ok = match entry.tolerance {
            Tolerance::Exact => a == b,
            Tolerance::Relative(t) => abs <= 1e-12 || abs / a.abs().max(b.abs()) <= t,
            Tolerance::Absolute(t) => abs <= t,
        };
        if !ok {
            return Err(format!("{}[{i}] = {a}, interpreter {b}", entry.output));
        }
    }
    Ok(())
}
