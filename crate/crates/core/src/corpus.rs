//! The four bundled DSL programs with their argument schemas, expected
//! construct counts and matching oracles.

use thiserror::Error;

use crate::csr::{CsrGraph, NodeId};
use crate::frontend::ast::Census;
use crate::frontend::{parse_source, FrontendError, Program};
use crate::interpreter::{ArgValue, Args, PropertyStore};
use crate::oracles::{OracleError, OracleResult, OracleValues};
use crate::semantic::{inf_value_int, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    Node,
    NodeSet,
    Int,
    Double,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgSpec {
    pub name: &'static str,
    pub kind: ArgKind,
    /// Text form accepted by [`crate::interpreter::parse_args`].
    pub default: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleId {
    Sssp,
    Bc,
    Pr,
    Tc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Exact,
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub path: &'static str,
    pub source: &'static str,
    pub function: &'static str,
    pub args: Vec<ArgSpec>,
    pub census: Census,
    pub oracle: OracleId,
    pub tolerance: Tolerance,
    /// Property or scalar holding the result.
    pub output: &'static str,
    pub max_lines: usize,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus entry `{0}` (expected one of bc, pr, sssp, tc)")]
    UnknownCorpusEntry(String),
    #[error("corpus program `{name}` does not parse: {source}")]
    Parse {
        name: String,
        #[source]
        source: FrontendError,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("argument `{0}` is missing or has the wrong type")]
    Arg(String),
    #[error("interpreter output has no `{0}`")]
    MissingOutput(String),
}

pub fn list_corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            name: "bc",
            path: "corpus/bc.sp",
            source: include_str!("../../../corpus/bc.sp"),
            function: "ComputeBC",
            args: vec![ArgSpec {
                name: "sourceSet",
                kind: ArgKind::NodeSet,
                default: "all",
            }],
            census: Census {
                forall: 3,
                parallel_forall: 2,
                fixed_point: 0,
                iterate_in_bfs: 1,
                iterate_in_reverse: 1,
                min_max: 0,
                reduce: 3,
            },
            oracle: OracleId::Bc,
            tolerance: Tolerance::Relative(1e-9),
            output: "bc",
            max_lines: 30,
        },
        CorpusEntry {
            name: "pr",
            path: "corpus/pr.sp",
            source: include_str!("../../../corpus/pr.sp"),
            function: "ComputePR",
            args: vec![
                ArgSpec {
                    name: "damping",
                    kind: ArgKind::Double,
                    default: "0.85",
                },
                ArgSpec {
                    name: "threshold",
                    kind: ArgKind::Double,
                    default: "1e-6",
                },
                ArgSpec {
                    name: "maxIter",
                    kind: ArgKind::Int,
                    default: "100",
                },
            ],
            census: Census {
                forall: 3,
                parallel_forall: 2,
                fixed_point: 1,
                iterate_in_bfs: 0,
                iterate_in_reverse: 0,
                min_max: 2,
                reduce: 2,
            },
            oracle: OracleId::Pr,
            tolerance: Tolerance::Absolute(1e-6),
            output: "pr",
            max_lines: 30,
        },
        CorpusEntry {
            name: "sssp",
            path: "corpus/sssp.sp",
            source: include_str!("../../../corpus/sssp.sp"),
            function: "ComputeSSSP",
            args: vec![ArgSpec {
                name: "src",
                kind: ArgKind::Node,
                default: "0",
            }],
            census: Census {
                forall: 2,
                parallel_forall: 2,
                fixed_point: 1,
                iterate_in_bfs: 0,
                iterate_in_reverse: 0,
                min_max: 1,
                reduce: 0,
            },
            oracle: OracleId::Sssp,
            tolerance: Tolerance::Exact,
            output: "dist",
            max_lines: 20,
        },
        CorpusEntry {
            name: "tc",
            path: "corpus/tc.sp",
            source: include_str!("../../../corpus/tc.sp"),
            function: "ComputeTC",
            args: vec![],
            census: Census {
                forall: 3,
                parallel_forall: 3,
                fixed_point: 0,
                iterate_in_bfs: 0,
                iterate_in_reverse: 0,
                min_max: 0,
                reduce: 1,
            },
            oracle: OracleId::Tc,
            tolerance: Tolerance::Exact,
            output: "count",
            max_lines: 20,
        },
    ]
}

pub fn find_entry(name: &str) -> Result<CorpusEntry, CorpusError> {
    list_corpus()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CorpusError::UnknownCorpusEntry(name.to_string()))
}

pub fn load_corpus(name: &str) -> Result<(Program, CorpusEntry), CorpusError> {
    let entry = find_entry(name)?;
    let program = parse_source(entry.source).map_err(|source| CorpusError::Parse {
        name: name.to_string(),
        source,
    })?;
    Ok((program, entry))
}

/// Outcome of comparing an interpreter run with its oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub pass: bool,
    pub interpreter: String,
    pub oracle: String,
}

fn summarize(values: &[f64]) -> String {
    let shown: Vec<String> = values.iter().take(8).map(|v| format!("{v}")).collect();
    let more = if values.len() > 8 { ", ..." } else { "" };
    format!("[{}{more}]", shown.join(", "))
}

impl CorpusEntry {
    pub fn default_args(&self) -> Vec<(String, String)> {
        self.args
            .iter()
            .map(|a| (a.name.to_string(), a.default.to_string()))
            .collect()
    }

    pub fn line_count(&self) -> usize {
        self.source.lines().count()
    }

    pub fn oracle_for(&self, g: &CsrGraph, args: &Args) -> Result<OracleResult, CorpusError> {
        let value = |name: &str| match args.get(name) {
            Some(ArgValue::Value(v)) => Ok(*v),
            _ => Err(CorpusError::Arg(name.to_string())),
        };
        Ok(match self.oracle {
            OracleId::Sssp => OracleResult::sssp(g, value("src")?.as_i64() as NodeId)?,
            OracleId::Bc => match args.get("sourceSet") {
                Some(ArgValue::NodeSet(s)) => OracleResult::bc(g, s)?,
                _ => return Err(CorpusError::Arg("sourceSet".into())),
            },
            OracleId::Pr => OracleResult::pr(
                g,
                value("damping")?.as_f64(),
                value("threshold")?.as_f64(),
                value("maxIter")?.as_i64().max(0) as usize,
            ),
            OracleId::Tc => OracleResult::tc(g)?,
        })
    }

    /// Compares the interpreter's result with the oracle's under this entry's
    /// tolerance. Unreachable SSSP nodes hold INF in the interpreter.
    pub fn compare(&self, store: &PropertyStore, oracle: &OracleResult) -> Result<Comparison, CorpusError> {
        let missing = || CorpusError::MissingOutput(self.output.to_string());
        let (got, want): (Vec<f64>, Vec<f64>) = match &oracle.values {
            OracleValues::Distances(d) => {
                let inf = inf_value_int(ScalarType::Int);
                let got = store.property(self.output).ok_or_else(missing)?.as_i64();
                let enc = |x: Option<i64>| x.unwrap_or(inf) as f64;
                let got = got.iter().map(|&x| enc((x < inf).then_some(x))).collect();
                (got, d.iter().map(|&x| enc(x)).collect())
            }
            OracleValues::Scores(s) => (store.property(self.output).ok_or_else(missing)?.as_f64(), s.clone()),
            OracleValues::Count(c) => {
                let v = store.scalar(self.output).or(store.returned).ok_or_else(missing)?;
                (vec![v.as_f64()], vec![*c as f64])
            }
        };
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        let mut pass = got.len() == want.len();
        for (a, b) in got.iter().zip(&want) {
            let abs = (a - b).abs();
            let rel = if abs == 0.0 { 0.0 } else { abs / a.abs().max(b.abs()) };
            max_abs = max_abs.max(abs);
            max_rel = max_rel.max(rel);
            pass &= match self.tolerance {
                Tolerance::Exact => a == b,
                Tolerance::Relative(t) => rel <= t || abs <= 1e-12,
                Tolerance::Absolute(t) => abs <= t,
            };
        }
        Ok(Comparison {
            max_abs_error: max_abs,
            max_rel_error: max_rel,
            pass,
            interpreter: summarize(&got),
            oracle: summarize(&want),
        })
    }
}
