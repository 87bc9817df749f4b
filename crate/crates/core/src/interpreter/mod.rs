//! Direct execution of an [`AnnotatedProgram`] on a [`CsrGraph`].
//!
//! Sequential mode visits loop elements in ascending order. Parallel mode runs
//! the outermost loop of each region on a rayon pool owned by the call;
//! reductions and Min/Max go through atomics, and the outer filter is
//! evaluated for every element before any body runs.

mod machine;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::csr::{CsrGraph, NodeId};
use crate::frontend::Span;
use crate::semantic::{AnnotatedProgram, ScalarType, SymbolKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Value {
    pub fn as_i64(self) -> i64 {
        match self {
            Value::Int(i) => i,
            Value::Float(f) => f as i64,
            Value::Bool(b) => b as i64,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(i) => i as f64,
            Value::Float(f) => f,
            Value::Bool(b) => b as i64 as f64,
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Int(i) => i != 0,
            Value::Float(f) => f != 0.0,
        }
    }

    /// Converts to the representation of `ty`, truncating floats to integers.
    pub fn convert(self, ty: ScalarType) -> Value {
        if ty.is_floating() {
            Value::Float(self.as_f64())
        } else if ty == ScalarType::Bool {
            Value::Bool(self.as_bool())
        } else {
            Value::Int(self.as_i64())
        }
    }

    pub fn zero(ty: ScalarType) -> Value {
        Value::Int(0).convert(ty)
    }

    pub(crate) fn to_bits(self) -> u64 {
        match self {
            Value::Int(i) => i as u64,
            Value::Float(f) => f.to_bits(),
            Value::Bool(b) => b as u64,
        }
    }

    pub(crate) fn from_bits(bits: u64, ty: ScalarType) -> Value {
        if ty.is_floating() {
            Value::Float(f64::from_bits(bits))
        } else if ty == ScalarType::Bool {
            Value::Bool(bits != 0)
        } else {
            Value::Int(bits as i64)
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Value(Value),
    NodeSet(Vec<NodeId>),
}

pub type Args = BTreeMap<String, ArgValue>;

#[derive(Debug, Clone, PartialEq)]
pub enum PropArray {
    Int(Vec<i64>),
    Float(Vec<f64>),
    Bool(Vec<bool>),
}

impl PropArray {
    pub fn len(&self) -> usize {
        match self {
            PropArray::Int(v) => v.len(),
            PropArray::Float(v) => v.len(),
            PropArray::Bool(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Value {
        match self {
            PropArray::Int(v) => Value::Int(v[i]),
            PropArray::Float(v) => Value::Float(v[i]),
            PropArray::Bool(v) => Value::Bool(v[i]),
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i).as_f64()).collect()
    }

    pub fn as_i64(&self) -> Vec<i64> {
        (0..self.len()).map(|i| self.get(i).as_i64()).collect()
    }
}

/// Final state of a run: every node property and scalar declared at function
/// scope, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyStore {
    pub n: usize,
    pub properties: Vec<(String, PropArray)>,
    pub scalars: Vec<(String, Value)>,
    pub returned: Option<Value>,
    /// Iterations executed by each fixedPoint, summed over all entries.
    pub fixed_point_iterations: Vec<usize>,
    pub audit: Option<AuditReport>,
}

impl PropertyStore {
    pub fn property(&self, name: &str) -> Option<&PropArray> {
        self.properties.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    pub fn scalar(&self, name: &str) -> Option<Value> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// `name<TAB>node<TAB>value` and `name<TAB>value` lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, arr) in &self.properties {
            for i in 0..arr.len() {
                out.push_str(&format!("{name}\t{i}\t{}\n", arr.get(i)));
            }
        }
        for (name, v) in &self.scalars {
            out.push_str(&format!("{name}\t{v}\n"));
        }
        if let Some(v) = self.returned {
            out.push_str(&format!("return\t{v}\n"));
        }
        out
    }
}

/// Result of an instrumented run that materializes only the analysed
/// transfer sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuditReport {
    pub regions_entered: usize,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel { threads: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Per-entry fixedPoint iteration limit; defaults to `10 * n + 100`.
    pub fixpoint_cap: Option<usize>,
    pub audit: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Sequential,
            fixpoint_cap: None,
            audit: false,
        }
    }
}

impl RunConfig {
    pub fn parallel(threads: usize) -> Self {
        RunConfig {
            mode: Mode::Parallel { threads },
            ..RunConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("missing argument `{name}`")]
    UnboundArg { name: String },
    #[error("bad argument `{name}`: {message}")]
    BadArg { name: String, message: String },
    #[error("division by zero")]
    DivisionByZero { span: Span },
    #[error("node {node} is out of range for a graph with {n} nodes")]
    NodeOutOfRange { span: Span, node: i64, n: usize },
    #[error("no edge from {u} to {v}")]
    NoSuchEdge { span: Span, u: i64, v: i64 },
    #[error("fixedPoint did not converge within {cap} iterations")]
    NonTermination { span: Span, cap: usize },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl RuntimeError {
    pub fn span(&self) -> Option<Span> {
        match self {
            RuntimeError::DivisionByZero { span }
            | RuntimeError::NodeOutOfRange { span, .. }
            | RuntimeError::NoSuchEdge { span, .. }
            | RuntimeError::NonTermination { span, .. } => Some(*span),
            _ => None,
        }
    }
}

/// Level structure of a BFS from `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsContext {
    pub root: NodeId,
    /// −1 for unreached nodes.
    pub level: Vec<i64>,
    pub level_order: Vec<Vec<NodeId>>,
    pub hops: usize,
}

/// Level-synchronous BFS over out-edges. Each pass expands the current level
/// and the loop stops after a pass that reaches no new node.
pub fn bfs_levels(g: &CsrGraph, root: NodeId) -> BfsContext {
    let n = g.num_nodes();
    let mut level = vec![-1i64; n];
    level[root as usize] = 0;
    let mut level_order = vec![vec![root]];
    let mut current = 0i64;
    loop {
        let mut finished = true;
        let mut next = Vec::new();
        for &v in &level_order[current as usize] {
            for &w in g.neighbor_ids(v) {
                if level[w as usize] == -1 {
                    level[w as usize] = current + 1;
                    next.push(w);
                    finished = false;
                }
            }
        }
        if finished {
            break;
        }
        next.sort_unstable();
        level_order.push(next);
        current += 1;
    }
    BfsContext {
        root,
        level,
        hops: current as usize,
        level_order,
    }
}

/// Queue-based BFS distances, used to cross-check [`bfs_levels`].
pub fn queue_bfs(g: &CsrGraph, root: NodeId) -> Vec<i64> {
    let mut level = vec![-1i64; g.num_nodes()];
    let mut q = VecDeque::from([root]);
    level[root as usize] = 0;
    while let Some(v) = q.pop_front() {
        for &w in g.neighbor_ids(v) {
            if level[w as usize] == -1 {
                level[w as usize] = level[v as usize] + 1;
                q.push_back(w);
            }
        }
    }
    level
}

/// Builds an argument map from `name=value` text pairs. Node sets accept a
/// comma-separated list or `all`.
pub fn parse_args(p: &AnnotatedProgram, pairs: &[(String, String)], n: usize) -> Result<Args, RuntimeError> {
    let mut args = Args::new();
    for (name, text) in pairs {
        let sym = p
            .value_params()
            .find(|s| &s.name == name)
            .ok_or_else(|| RuntimeError::BadArg {
                name: name.clone(),
                message: "no such parameter".into(),
            })?;
        let bad = |message: String| RuntimeError::BadArg {
            name: name.clone(),
            message,
        };
        let text = text.trim();
        let value = if sym.kind == SymbolKind::NodeSet {
            if text == "all" {
                ArgValue::NodeSet((0..n as NodeId).collect())
            } else {
                let nodes = text
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<NodeId>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(e.to_string()))?;
                ArgValue::NodeSet(nodes)
            }
        } else {
            let ty = sym.ty.expect("value parameters are typed");
            let v = if ty.is_floating() {
                Value::Float(
                    text.parse()
                        .map_err(|_| bad(format!("expected {ty}, found `{text}`")))?,
                )
            } else if ty == ScalarType::Bool {
                match text {
                    "true" | "True" => Value::Bool(true),
                    "false" | "False" => Value::Bool(false),
                    _ => return Err(bad(format!("expected bool, found `{text}`"))),
                }
            } else {
                Value::Int(
                    text.parse()
                        .map_err(|_| bad(format!("expected {ty}, found `{text}`")))?,
                )
            };
            ArgValue::Value(v)
        };
        args.insert(name.clone(), value);
    }
    Ok(args)
}

/// Executes `program` on `graph`.
pub fn run(
    program: &AnnotatedProgram,
    graph: &CsrGraph,
    args: &Args,
    config: &RunConfig,
) -> Result<PropertyStore, RuntimeError> {
    machine::run(program, graph, args, config)
}
