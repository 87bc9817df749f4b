//! Type checking and the host/device analyses.
//!
//! [`type_check`] lowers the entry function of a parsed [`Program`] into a
//! resolved, typed tree ([`AnnotatedProgram`]) in which every name is a
//! [`SymbolId`] and every parallel region is numbered. The analyses in
//! [`analysis`] run over that tree and are shared by the interpreter and all
//! code generators.

pub mod analysis;
pub mod report;
mod typecheck;

use std::fmt;

use thiserror::Error;

use crate::frontend::ast::{BinaryOp, MinMaxKind, ReduceOp, Span, UnaryOp};
pub use crate::frontend::Program;

pub use analysis::{
    analyze, analyze_transfers, detect_reductions, fixed_points, Analyses, FixedPointInfo, GraphArray, Polarity,
    ReductionInfo, RegionTransfer, TransferAnalysis, TransferScope,
};
pub use typecheck::{type_check, type_check_function};

pub type SymbolId = usize;
pub type RegionId = usize;
pub type FixedPointId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarType {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
}

impl ScalarType {
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            ScalarType::Int | ScalarType::Long | ScalarType::Float | ScalarType::Double
        )
    }

    pub fn is_integral(self) -> bool {
        matches!(self, ScalarType::Int | ScalarType::Long)
    }

    pub fn is_floating(self) -> bool {
        matches!(self, ScalarType::Float | ScalarType::Double)
    }

    fn rank(self) -> u8 {
        match self {
            ScalarType::Int => 0,
            ScalarType::Long => 1,
            ScalarType::Float => 2,
            ScalarType::Double => 3,
            _ => 0,
        }
    }

    /// The common type of two numeric operands.
    pub fn promote(a: ScalarType, b: ScalarType) -> ScalarType {
        if a.rank() >= b.rank() {
            a
        } else {
            b
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarType::Int => "int",
            ScalarType::Long => "long",
            ScalarType::Float => "float",
            ScalarType::Double => "double",
            ScalarType::Bool => "bool",
            ScalarType::Node => "node",
            ScalarType::Edge => "edge",
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Graph,
    Node,
    Edge,
    Scalar,
    NodeProperty,
    EdgeProperty,
    NodeSet,
}

impl SymbolKind {
    pub fn name(self) -> &'static str {
        match self {
            SymbolKind::Graph => "graph",
            SymbolKind::Node => "node",
            SymbolKind::Edge => "edge",
            SymbolKind::Scalar => "scalar",
            SymbolKind::NodeProperty => "node-property",
            SymbolKind::EdgeProperty => "edge-property",
            SymbolKind::NodeSet => "node-set",
        }
    }

    pub fn is_property(self) -> bool {
        matches!(self, SymbolKind::NodeProperty | SymbolKind::EdgeProperty)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
    /// Value type for scalars, node/edge variables, and property elements.
    pub ty: Option<ScalarType>,
    pub span: Span,
    pub is_param: bool,
    /// Region the symbol is declared in; such symbols live only on the device.
    pub region: Option<RegionId>,
    pub scope_depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: ScalarType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    /// `INF` resolved against `ty`.
    Inf,
    Var(SymbolId),
    NodeProp {
        prop: SymbolId,
        node: Box<TExpr>,
    },
    EdgeProp {
        prop: SymbolId,
        edge: Box<TExpr>,
    },
    EdgeWeight(Box<TExpr>),
    /// BFS level of a node inside `iterateInBFS`/`iterateInReverse`.
    Level(Box<TExpr>),
    Unary {
        op: UnaryOp,
        operand: Box<TExpr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<TExpr>,
        rhs: Box<TExpr>,
        /// Type both operands are converted to before the operation.
        operand_ty: ScalarType,
    },
    NumNodes,
    NumEdges,
    OutDegree(Box<TExpr>),
    InDegree(Box<TExpr>),
    IsEdge(Box<TExpr>, Box<TExpr>),
    GetEdge(Box<TExpr>, Box<TExpr>),
    MinWeight,
    MaxWeight,
}

impl TExpr {
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TExpr)) {
        f(self);
        match &self.kind {
            TExprKind::NodeProp { node: x, .. }
            | TExprKind::EdgeProp { edge: x, .. }
            | TExprKind::EdgeWeight(x)
            | TExprKind::Level(x)
            | TExprKind::OutDegree(x)
            | TExprKind::InDegree(x)
            | TExprKind::Unary { operand: x, .. } => x.visit(f),
            TExprKind::Binary { lhs, rhs, .. } => {
                lhs.visit(f);
                rhs.visit(f);
            }
            TExprKind::IsEdge(a, b) | TExprKind::GetEdge(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Place {
    Var(SymbolId),
    NodeProp { prop: SymbolId, node: TExpr },
    EdgeProp { prop: SymbolId, edge: TExpr },
}

impl Place {
    pub fn symbol(&self) -> SymbolId {
        match self {
            Place::Var(s) | Place::NodeProp { prop: s, .. } | Place::EdgeProp { prop: s, .. } => *s,
        }
    }

    pub fn index(&self) -> Option<&TExpr> {
        match self {
            Place::Var(_) => None,
            Place::NodeProp { node, .. } => Some(node),
            Place::EdgeProp { edge, .. } => Some(edge),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TDomain {
    Nodes,
    Neighbors(TExpr),
    NodesTo(TExpr),
    Set(SymbolId),
}

/// How a `fixedPoint` decides it has converged.
#[derive(Debug, Clone, PartialEq)]
pub enum Convergence {
    /// `!prop` (all false) or `prop` (all true) over a boolean node property.
    /// The property is double-buffered across iterations and the flag is
    /// updated alongside every write to it.
    Property { prop: SymbolId, polarity: Polarity },
    /// Any scalar boolean expression, evaluated after each iteration.
    Scalar(TExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionKind {
    ForAll,
    BfsForward,
    BfsReverse,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::ForAll => "forall",
            RegionKind::BfsForward => "bfs",
            RegionKind::BfsReverse => "reverse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionInfo {
    pub id: RegionId,
    pub kind: RegionKind,
    pub span: Span,
    /// The per-element iteration variable (thread index in generated code).
    pub var: SymbolId,
    /// Innermost enclosing `fixedPoint`.
    pub fixed_point: Option<FixedPointId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TStmt {
    pub kind: TStmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TStmtKind {
    Decl {
        sym: SymbolId,
        init: Option<TExpr>,
    },
    Assign {
        place: Place,
        value: TExpr,
    },
    /// Whole-property assignment `dst = src`.
    CopyProp {
        dst: SymbolId,
        src: SymbolId,
    },
    /// `op` applied to `place`; `value` is the literal 1 for `++`.
    Reduce {
        place: Place,
        op: ReduceOp,
        value: TExpr,
    },
    ForAll {
        var: SymbolId,
        domain: TDomain,
        filter: Option<TExpr>,
        body: Vec<TStmt>,
        parallel: bool,
        /// Set when this loop is the outermost parallel loop of a region.
        region: Option<RegionId>,
    },
    FixedPoint {
        id: FixedPointId,
        flag: SymbolId,
        convergence: Convergence,
        body: Vec<TStmt>,
    },
    Bfs {
        var: SymbolId,
        root: TExpr,
        body: Vec<TStmt>,
        region: RegionId,
        reverse: Option<ReverseBlock>,
    },
    If {
        cond: TExpr,
        then_body: Vec<TStmt>,
        else_body: Vec<TStmt>,
    },
    /// Atomic compare-and-multi-assign. `candidate` is compared against the
    /// first target; when it improves, all targets are written.
    MinMax {
        kind: MinMaxKind,
        targets: Vec<Place>,
        candidate: TExpr,
        attached: Vec<TExpr>,
    },
    Attach {
        inits: Vec<(SymbolId, TExpr)>,
    },
    Return(Option<TExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseBlock {
    pub filter: Option<TExpr>,
    pub body: Vec<TStmt>,
    pub region: RegionId,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct TypeError {
    pub span: Span,
    pub message: String,
}

impl TypeError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        TypeError {
            span,
            message: message.into(),
        }
    }
}

/// The typed, resolved form of one DSL function.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedProgram {
    pub name: String,
    pub symbols: Vec<Symbol>,
    pub params: Vec<SymbolId>,
    pub graph: Option<SymbolId>,
    pub body: Vec<TStmt>,
    pub regions: Vec<RegionInfo>,
    pub fixed_point_count: usize,
    pub return_type: Option<ScalarType>,
    pub diagnostics: Vec<Diagnostic>,
}

impl AnnotatedProgram {
    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id]
    }

    pub fn name_of(&self, id: SymbolId) -> &str {
        &self.symbols[id].name
    }

    /// Parameters that carry a run-time value (everything except the graph
    /// and output properties).
    pub fn value_params(&self) -> impl Iterator<Item = &Symbol> {
        self.params.iter().map(|&p| &self.symbols[p]).filter(|s| {
            matches!(
                s.kind,
                SymbolKind::Scalar | SymbolKind::Node | SymbolKind::Edge | SymbolKind::NodeSet
            )
        })
    }

    /// Symbols declared at function scope (parameters included), in
    /// declaration order: the program's observable final state.
    pub fn top_level_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.scope_depth <= 1)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }
}

/// Walks a statement list, calling `f` on every statement (pre-order).
pub fn walk_stmts<'a>(stmts: &'a [TStmt], f: &mut impl FnMut(&'a TStmt)) {
    for s in stmts {
        f(s);
        for child in child_blocks(s) {
            walk_stmts(child, f);
        }
    }
}

pub fn child_blocks(s: &TStmt) -> Vec<&[TStmt]> {
    match &s.kind {
        TStmtKind::ForAll { body, .. } | TStmtKind::FixedPoint { body, .. } => vec![body],
        TStmtKind::Bfs { body, reverse, .. } => {
            let mut v: Vec<&[TStmt]> = vec![body];
            if let Some(r) = reverse {
                v.push(&r.body);
            }
            v
        }
        TStmtKind::If {
            then_body, else_body, ..
        } => vec![then_body, else_body],
        _ => vec![],
    }
}

/// Expressions that appear directly in a statement (not in nested blocks).
pub fn stmt_exprs(s: &TStmt) -> Vec<&TExpr> {
    fn place_exprs<'a>(p: &'a Place, out: &mut Vec<&'a TExpr>) {
        if let Some(i) = p.index() {
            out.push(i);
        }
    }
    let mut out = Vec::new();
    match &s.kind {
        TStmtKind::Decl { init, .. } => out.extend(init.iter()),
        TStmtKind::Assign { place, value } | TStmtKind::Reduce { place, value, .. } => {
            place_exprs(place, &mut out);
            out.push(value);
        }
        TStmtKind::CopyProp { .. } => {}
        TStmtKind::ForAll { domain, filter, .. } => {
            match domain {
                TDomain::Neighbors(e) | TDomain::NodesTo(e) => out.push(e),
                _ => {}
            }
            out.extend(filter.iter());
        }
        TStmtKind::FixedPoint { convergence, .. } => {
            if let Convergence::Scalar(e) = convergence {
                out.push(e);
            }
        }
        TStmtKind::Bfs { root, reverse, .. } => {
            out.push(root);
            if let Some(r) = reverse {
                out.extend(r.filter.iter());
            }
        }
        TStmtKind::If { cond, .. } => out.push(cond),
        TStmtKind::MinMax {
            targets,
            candidate,
            attached,
            ..
        } => {
            for t in targets {
                place_exprs(t, &mut out);
            }
            out.push(candidate);
            out.extend(attached.iter());
        }
        TStmtKind::Attach { inits } => out.extend(inits.iter().map(|(_, e)| e)),
        TStmtKind::Return(e) => out.extend(e.iter()),
    }
    out
}

/// INF for a numeric type: half the type's maximum, so `INF + w` cannot
/// overflow.
pub fn inf_value_int(ty: ScalarType) -> i64 {
    match ty {
        ScalarType::Long => i64::MAX / 2,
        _ => (i32::MAX / 2) as i64,
    }
}

pub fn inf_value_float(ty: ScalarType) -> f64 {
    match ty {
        ScalarType::Float => (f32::MAX / 2.0) as f64,
        _ => f64::MAX / 2.0,
    }
}

/// Parses `source` and type-checks its first function.
pub fn check_source(source: &str) -> Result<AnnotatedProgram, crate::Error> {
    let program = crate::frontend::parse_source(source)?;
    Ok(type_check(&program)?)
}
