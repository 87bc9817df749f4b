use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::Mutex;
use rayon::prelude::*;

use super::*;
use crate::frontend::ast::{BinaryOp, MinMaxKind, ReduceOp, UnaryOp};
use crate::semantic::analysis::{analyze_transfers, GraphArray, TransferAnalysis};
use crate::semantic::{
    inf_value_float, inf_value_int, Convergence, Place, RegionId, SymbolId, TDomain, TExpr, TExprKind, TStmt, TStmtKind,
};

const LOCK_SHARDS: usize = 256;

enum Cell {
    Empty,
    Scalar(AtomicU64),
    Array(Box<[AtomicU64]>),
    Set(Vec<NodeId>),
}

/// Convergence property currently double-buffered by a fixedPoint.
#[derive(Clone, Copy)]
struct Fused {
    flag: SymbolId,
    active: bool,
}

#[derive(Default)]
struct AuditState {
    materialized: Option<(RegionId, BTreeSet<SymbolId>, BTreeSet<GraphArray>)>,
    stale: BTreeSet<SymbolId>,
    report: AuditReport,
}

type Frame = Vec<Value>;

enum Flow {
    Next,
    Return,
}

struct Machine<'a> {
    p: &'a AnnotatedProgram,
    g: &'a CsrGraph,
    cells: Vec<Cell>,
    next: Vec<Option<Box<[AtomicU64]>>>,
    fused: Vec<Option<Fused>>,
    levels: Vec<Vec<i64>>,
    locks: Vec<Mutex<()>>,
    pool: Option<rayon::ThreadPool>,
    cap: usize,
    transfers: Option<TransferAnalysis>,
    audit: Option<Mutex<AuditState>>,
    fp_iterations: Vec<usize>,
    returned: Option<Value>,
}

fn zeros(len: usize, ty: ScalarType) -> Box<[AtomicU64]> {
    let bits = Value::zero(ty).to_bits();
    (0..len).map(|_| AtomicU64::new(bits)).collect()
}

pub(super) fn run(
    p: &AnnotatedProgram,
    g: &CsrGraph,
    args: &Args,
    config: &RunConfig,
) -> Result<PropertyStore, RuntimeError> {
    let n = g.num_nodes();
    let mut cells = Vec::with_capacity(p.symbols.len());
    for s in &p.symbols {
        let cell = match s.kind {
            _ if s.region.is_some() => Cell::Empty,
            SymbolKind::Graph => Cell::Empty,
            SymbolKind::NodeProperty => Cell::Array(zeros(n, s.ty.expect("typed"))),
            SymbolKind::EdgeProperty => Cell::Array(zeros(g.num_edges(), s.ty.expect("typed"))),
            SymbolKind::NodeSet => {
                let nodes = match args.get(&s.name) {
                    Some(ArgValue::NodeSet(v)) => v.clone(),
                    Some(_) => {
                        return Err(RuntimeError::BadArg {
                            name: s.name.clone(),
                            message: "expected a node set".into(),
                        })
                    }
                    None => return Err(RuntimeError::UnboundArg { name: s.name.clone() }),
                };
                if let Some(&bad) = nodes.iter().find(|&&v| v as usize >= n) {
                    return Err(RuntimeError::BadArg {
                        name: s.name.clone(),
                        message: format!("node {bad} is out of range"),
                    });
                }
                Cell::Set(nodes)
            }
            SymbolKind::Scalar | SymbolKind::Node | SymbolKind::Edge => {
                let ty = s.ty.expect("typed");
                let mut v = Value::zero(ty);
                if s.is_param {
                    v = match args.get(&s.name) {
                        Some(ArgValue::Value(v)) => v.convert(ty),
                        Some(_) => {
                            return Err(RuntimeError::BadArg {
                                name: s.name.clone(),
                                message: format!("expected a {ty}"),
                            })
                        }
                        None => return Err(RuntimeError::UnboundArg { name: s.name.clone() }),
                    };
                    if ty == ScalarType::Node && !(0..n as i64).contains(&v.as_i64()) {
                        return Err(RuntimeError::BadArg {
                            name: s.name.clone(),
                            message: format!("node {} is out of range", v.as_i64()),
                        });
                    }
                }
                Cell::Scalar(AtomicU64::new(v.to_bits()))
            }
        };
        cells.push(cell);
    }
    let pool = match config.mode {
        Mode::Sequential => None,
        Mode::Parallel { threads } => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| RuntimeError::Pool(e.to_string()))?,
        ),
    };
    let mut m = Machine {
        p,
        g,
        next: (0..p.symbols.len()).map(|_| None).collect(),
        fused: vec![None; p.symbols.len()],
        cells,
        levels: Vec::new(),
        locks: (0..LOCK_SHARDS).map(|_| Mutex::new(())).collect(),
        pool,
        cap: config.fixpoint_cap.unwrap_or(10 * n + 100),
        transfers: config.audit.then(|| analyze_transfers(p)),
        audit: config.audit.then(|| Mutex::new(AuditState::default())),
        fp_iterations: vec![0; p.fixed_point_count],
        returned: None,
    };
    let mut frame: Frame = p
        .symbols
        .iter()
        .map(|s| Value::zero(s.ty.unwrap_or(ScalarType::Int)))
        .collect();
    m.host_block(&p.body, &mut frame)?;
    Ok(m.finish())
}

impl Machine<'_> {
    fn finish(self) -> PropertyStore {
        let mut properties = Vec::new();
        let mut scalars = Vec::new();
        for s in self.p.top_level_symbols() {
            let ty = s.ty.unwrap_or(ScalarType::Int);
            match (&self.cells[s.id], s.kind) {
                (Cell::Array(a), SymbolKind::NodeProperty) => {
                    let vals = a.iter().map(|x| Value::from_bits(x.load(Ordering::Relaxed), ty));
                    let arr = if ty.is_floating() {
                        PropArray::Float(vals.map(Value::as_f64).collect())
                    } else if ty == ScalarType::Bool {
                        PropArray::Bool(vals.map(Value::as_bool).collect())
                    } else {
                        PropArray::Int(vals.map(Value::as_i64).collect())
                    };
                    properties.push((s.name.clone(), arr));
                }
                (Cell::Scalar(x), _) => scalars.push((s.name.clone(), Value::from_bits(x.load(Ordering::Relaxed), ty))),
                _ => {}
            }
        }
        let audit = self.audit.map(|a| {
            let mut st = a.into_inner();
            for s in self.p.params.iter().map(|&id| &self.p.symbols[id]) {
                if s.kind.is_property() && st.stale.contains(&s.id) {
                    st.report
                        .violations
                        .push(format!("output property `{}` left stale on the host", s.name));
                }
            }
            st.report
        });
        PropertyStore {
            n: self.g.num_nodes(),
            properties,
            scalars,
            returned: self.returned,
            fixed_point_iterations: self.fp_iterations,
            audit,
        }
    }

    fn ty(&self, sym: SymbolId) -> ScalarType {
        self.p.symbols[sym].ty.unwrap_or(ScalarType::Int)
    }

    fn is_local(&self, sym: SymbolId) -> bool {
        self.p.symbols[sym].region.is_some()
    }

    // ----- audit -----

    fn audit_access(&self, sym: SymbolId, region: Option<RegionId>, write: bool) {
        let Some(a) = &self.audit else { return };
        if self.is_local(sym) {
            return;
        }
        let mut st = a.lock();
        let name = &self.p.symbols[sym].name;
        match region {
            Some(r) => {
                let ok = st.materialized.as_ref().is_some_and(|(_, set, _)| set.contains(&sym));
                if !ok {
                    let what = if write { "wrote" } else { "read" };
                    st.report
                        .violations
                        .push(format!("region {r} {what} unmaterialized `{name}`"));
                }
            }
            None => {
                if st.stale.contains(&sym) {
                    st.report.violations.push(format!("host accessed stale `{name}`"));
                }
            }
        }
    }

    fn audit_graph(&self, region: Option<RegionId>, arrays: &[GraphArray]) {
        let (Some(a), Some(r)) = (&self.audit, region) else {
            return;
        };
        let mut st = a.lock();
        let missing: Vec<GraphArray> = match &st.materialized {
            Some((_, _, have)) => arrays.iter().copied().filter(|g| !have.contains(g)).collect(),
            None => arrays.to_vec(),
        };
        for g in missing {
            st.report
                .violations
                .push(format!("region {r} used graph array {} without a transfer", g.name()));
        }
    }

    fn audit_host_kill(&self, sym: SymbolId) {
        if let Some(a) = &self.audit {
            a.lock().stale.remove(&sym);
        }
    }

    fn audit_enter(&self, region: RegionId) {
        let (Some(a), Some(t)) = (&self.audit, &self.transfers) else {
            return;
        };
        let rt = &t.regions[region];
        let mut st = a.lock();
        st.report.regions_entered += 1;
        let stale_in: Vec<SymbolId> = rt.copy_in.intersection(&st.stale).copied().collect();
        for s in stale_in {
            st.report.violations.push(format!(
                "region {region} copied in stale host value of `{}`",
                self.p.symbols[s].name
            ));
        }
        let mut set = rt.copy_in.clone();
        set.extend(rt.device_only.iter().copied());
        st.materialized = Some((region, set, rt.graph_arrays.clone()));
    }

    fn audit_exit(&self, region: RegionId) {
        let (Some(a), Some(t)) = (&self.audit, &self.transfers) else {
            return;
        };
        let rt = &t.regions[region];
        let mut st = a.lock();
        st.materialized = None;
        for s in rt.writes.difference(&rt.copy_out) {
            st.stale.insert(*s);
        }
    }

    // ----- storage -----

    fn read_var(&self, sym: SymbolId, f: &Frame, region: Option<RegionId>) -> Value {
        if self.is_local(sym) {
            return f[sym];
        }
        self.audit_access(sym, region, false);
        match &self.cells[sym] {
            Cell::Scalar(x) => Value::from_bits(x.load(Ordering::Relaxed), self.ty(sym)),
            _ => f[sym],
        }
    }

    fn write_var(&self, sym: SymbolId, v: Value, f: &mut Frame, region: Option<RegionId>) {
        let v = v.convert(self.ty(sym));
        if self.is_local(sym) {
            f[sym] = v;
            return;
        }
        if region.is_some() {
            self.audit_access(sym, region, true);
        } else {
            self.audit_host_kill(sym);
        }
        if let Cell::Scalar(x) = &self.cells[sym] {
            x.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn array(&self, sym: SymbolId) -> &[AtomicU64] {
        match &self.cells[sym] {
            Cell::Array(a) => a,
            _ => unreachable!("`{}` is not an array", self.p.symbols[sym].name),
        }
    }

    fn read_elem(&self, sym: SymbolId, i: usize, region: Option<RegionId>) -> Value {
        self.audit_access(sym, region, false);
        Value::from_bits(self.array(sym)[i].load(Ordering::Relaxed), self.ty(sym))
    }

    /// The storage a write to `sym[i]` lands in: the next buffer while `sym`
    /// is a double-buffered convergence property.
    fn write_slot(&self, sym: SymbolId, i: usize) -> &AtomicU64 {
        match (&self.fused[sym], &self.next[sym]) {
            (Some(_), Some(next)) => &next[i],
            _ => &self.array(sym)[i],
        }
    }

    fn after_write(&self, sym: SymbolId, stored: Value) {
        if let Some(fz) = self.fused[sym] {
            if stored.as_bool() == fz.active {
                if let Cell::Scalar(flag) = &self.cells[fz.flag] {
                    flag.store(0, Ordering::Relaxed);
                }
            }
        }
    }

    fn write_elem(&self, sym: SymbolId, i: usize, v: Value, region: Option<RegionId>) {
        self.audit_access(sym, region, true);
        let v = v.convert(self.ty(sym));
        self.write_slot(sym, i).store(v.to_bits(), Ordering::Relaxed);
        self.after_write(sym, v);
    }

    fn node_index(&self, e: &TExpr, f: &Frame, r: Option<RegionId>) -> Result<usize, RuntimeError> {
        let v = self.eval(e, f, r)?.as_i64();
        let n = self.g.num_nodes();
        if v < 0 || v as usize >= n {
            return Err(RuntimeError::NodeOutOfRange {
                span: e.span,
                node: v,
                n,
            });
        }
        Ok(v as usize)
    }

    fn edge_index(&self, e: &TExpr, f: &Frame, r: Option<RegionId>) -> Result<usize, RuntimeError> {
        let v = self.eval(e, f, r)?.as_i64();
        if v < 0 || v as usize >= self.g.num_edges() {
            return Err(RuntimeError::NoSuchEdge {
                span: e.span,
                u: -1,
                v: -1,
            });
        }
        Ok(v as usize)
    }

    /// Resolves a place to (symbol, element index).
    fn locate(&self, p: &Place, f: &Frame, r: Option<RegionId>) -> Result<(SymbolId, Option<usize>), RuntimeError> {
        Ok(match p {
            Place::Var(s) => (*s, None),
            Place::NodeProp { prop, node } => (*prop, Some(self.node_index(node, f, r)?)),
            Place::EdgeProp { prop, edge } => (*prop, Some(self.edge_index(edge, f, r)?)),
        })
    }

    fn read_at(&self, loc: (SymbolId, Option<usize>), f: &Frame, r: Option<RegionId>) -> Value {
        match loc {
            (s, None) => self.read_var(s, f, r),
            (s, Some(i)) => self.read_elem(s, i, r),
        }
    }

    fn write_at(&self, loc: (SymbolId, Option<usize>), v: Value, f: &mut Frame, r: Option<RegionId>) {
        match loc {
            (s, None) => self.write_var(s, v, f, r),
            (s, Some(i)) => {
                if r.is_none() {
                    // A partial host write needs a current host copy.
                    self.audit_access(s, None, true);
                }
                self.write_elem(s, i, v, r)
            }
        }
    }

    fn reduce_at(&self, loc: (SymbolId, Option<usize>), op: ReduceOp, v: Value, f: &mut Frame, r: Option<RegionId>) {
        let sym = loc.0;
        let ty = self.ty(sym);
        let v = v.convert(ty);
        let slot = match loc {
            (s, None) if self.is_local(s) => {
                f[s] = combine(op, f[s], v, ty);
                return;
            }
            (s, None) => {
                self.audit_access(s, r, false);
                match &self.cells[s] {
                    Cell::Scalar(x) => x,
                    _ => return,
                }
            }
            (s, Some(i)) => {
                self.audit_access(s, r, false);
                self.write_slot(s, i)
            }
        };
        let mut cur = slot.load(Ordering::Relaxed);
        loop {
            let new = combine(op, Value::from_bits(cur, ty), v, ty);
            match slot.compare_exchange_weak(cur, new.to_bits(), Ordering::AcqRel, Ordering::Relaxed) {
                Ok(_) => {
                    self.after_write(sym, new);
                    return;
                }
                Err(actual) => cur = actual,
            }
        }
    }

    // ----- expressions -----

    fn eval(&self, e: &TExpr, f: &Frame, r: Option<RegionId>) -> Result<Value, RuntimeError> {
        Ok(match &e.kind {
            TExprKind::Int(i) => Value::Int(*i),
            TExprKind::Float(x) => Value::Float(*x),
            TExprKind::Bool(b) => Value::Bool(*b),
            TExprKind::Inf => {
                if e.ty.is_floating() {
                    Value::Float(inf_value_float(e.ty))
                } else {
                    Value::Int(inf_value_int(e.ty))
                }
            }
            TExprKind::Var(s) => self.read_var(*s, f, r),
            TExprKind::NodeProp { prop, node } => {
                let i = self.node_index(node, f, r)?;
                self.read_elem(*prop, i, r)
            }
            TExprKind::EdgeProp { prop, edge } => {
                let i = self.edge_index(edge, f, r)?;
                self.read_elem(*prop, i, r)
            }
            TExprKind::EdgeWeight(edge) => {
                self.audit_graph(r, &[GraphArray::Weights]);
                let i = self.edge_index(edge, f, r)?;
                Value::Int(self.g.edge_weight(i) as i64)
            }
            TExprKind::Level(node) => {
                let i = self.node_index(node, f, r)?;
                Value::Int(self.levels.last().map_or(-1, |l| l[i]))
            }
            TExprKind::Unary { op, operand } => {
                let x = self.eval(operand, f, r)?;
                match (op, x) {
                    (UnaryOp::Not, x) => Value::Bool(!x.as_bool()),
                    (UnaryOp::Neg, Value::Float(v)) => Value::Float(-v),
                    (UnaryOp::Neg, x) => Value::Int(x.as_i64().wrapping_neg()),
                }
            }
            TExprKind::Binary {
                op,
                lhs,
                rhs,
                operand_ty,
            } => {
                let l = self.eval(lhs, f, r)?;
                match op {
                    BinaryOp::And if !l.as_bool() => return Ok(Value::Bool(false)),
                    BinaryOp::Or if l.as_bool() => return Ok(Value::Bool(true)),
                    BinaryOp::And | BinaryOp::Or => return Ok(Value::Bool(self.eval(rhs, f, r)?.as_bool())),
                    _ => {}
                }
                let rv = self.eval(rhs, f, r)?;
                binary(*op, l.convert(*operand_ty), rv.convert(*operand_ty), e.span)?
            }
            TExprKind::NumNodes => Value::Int(self.g.num_nodes() as i64),
            TExprKind::NumEdges => Value::Int(self.g.num_edges() as i64),
            TExprKind::OutDegree(x) => {
                self.audit_graph(r, &[GraphArray::Offsets]);
                let v = self.node_index(x, f, r)?;
                Value::Int(self.g.out_degree(v as NodeId) as i64)
            }
            TExprKind::InDegree(x) => {
                self.audit_graph(r, &[GraphArray::RevOffsets]);
                let v = self.node_index(x, f, r)?;
                Value::Int(self.g.in_degree(v as NodeId) as i64)
            }
            TExprKind::IsEdge(a, b) => {
                self.audit_graph(r, &[GraphArray::Offsets, GraphArray::Dests]);
                let (u, v) = (self.node_index(a, f, r)?, self.node_index(b, f, r)?);
                Value::Bool(self.g.is_edge(u as NodeId, v as NodeId))
            }
            TExprKind::GetEdge(a, b) => {
                self.audit_graph(r, &[GraphArray::Offsets, GraphArray::Dests]);
                let (u, v) = (self.node_index(a, f, r)?, self.node_index(b, f, r)?);
                match self.g.find_edge(u as NodeId, v as NodeId) {
                    Some(eid) => Value::Int(eid as i64),
                    None => {
                        return Err(RuntimeError::NoSuchEdge {
                            span: e.span,
                            u: u as i64,
                            v: v as i64,
                        })
                    }
                }
            }
            TExprKind::MinWeight => {
                self.audit_graph(r, &[GraphArray::Weights]);
                Value::Int(self.g.min_weight().unwrap_or(0) as i64)
            }
            TExprKind::MaxWeight => {
                self.audit_graph(r, &[GraphArray::Weights]);
                Value::Int(self.g.max_weight().unwrap_or(0) as i64)
            }
        })
    }

    fn domain(&self, d: &TDomain, f: &Frame, r: Option<RegionId>) -> Result<Vec<NodeId>, RuntimeError> {
        Ok(match d {
            TDomain::Nodes => (0..self.g.num_nodes() as NodeId).collect(),
            TDomain::Neighbors(x) => {
                self.audit_graph(r, &[GraphArray::Offsets, GraphArray::Dests]);
                let v = self.node_index(x, f, r)?;
                self.g.neighbor_ids(v as NodeId).to_vec()
            }
            TDomain::NodesTo(x) => {
                self.audit_graph(r, &[GraphArray::RevOffsets, GraphArray::RevSrcs]);
                let v = self.node_index(x, f, r)?;
                self.g.in_neighbors(v as NodeId).map(|a| a.node).collect()
            }
            TDomain::Set(s) => {
                self.audit_access(*s, r, false);
                match &self.cells[*s] {
                    Cell::Set(v) => v.clone(),
                    _ => Vec::new(),
                }
            }
        })
    }

    // ----- statements shared by host and device -----

    /// Statements that may appear inside a region. `r` is `None` at host level.
    fn simple(&self, s: &TStmt, f: &mut Frame, r: Option<RegionId>) -> Result<(), RuntimeError> {
        match &s.kind {
            TStmtKind::Decl { sym, init } => {
                let v = match init {
                    Some(e) => self.eval(e, f, r)?,
                    None => Value::zero(self.ty(*sym)),
                };
                self.write_var(*sym, v, f, r);
            }
            TStmtKind::Assign { place, value } => {
                let v = self.eval(value, f, r)?;
                let loc = self.locate(place, f, r)?;
                self.write_at(loc, v, f, r);
            }
            TStmtKind::Reduce { place, op, value } => {
                let v = self.eval(value, f, r)?;
                let loc = self.locate(place, f, r)?;
                self.reduce_at(loc, *op, v, f, r);
            }
            TStmtKind::MinMax {
                kind,
                targets,
                candidate,
                attached,
            } => {
                let locs = targets
                    .iter()
                    .map(|t| self.locate(t, f, r))
                    .collect::<Result<Vec<_>, _>>()?;
                let ty0 = self.ty(locs[0].0);
                let cand = self.eval(candidate, f, r)?.convert(ty0);
                let vals = attached
                    .iter()
                    .map(|a| self.eval(a, f, r))
                    .collect::<Result<Vec<_>, _>>()?;
                let shard = (locs[0].0.wrapping_mul(0x9E37_79B9) ^ locs[0].1.unwrap_or(0)) % LOCK_SHARDS;
                let _guard = self.locks[shard].lock();
                let cur = self.read_at(locs[0], f, r);
                let improves = match (kind, ty0.is_floating()) {
                    (MinMaxKind::Min, true) => cand.as_f64() < cur.as_f64(),
                    (MinMaxKind::Max, true) => cand.as_f64() > cur.as_f64(),
                    (MinMaxKind::Min, false) => cand.as_i64() < cur.as_i64(),
                    (MinMaxKind::Max, false) => cand.as_i64() > cur.as_i64(),
                };
                if improves {
                    self.write_at(locs[0], cand, f, r);
                    for (loc, v) in locs[1..].iter().zip(vals) {
                        self.write_at(*loc, v, f, r);
                    }
                }
            }
            _ => unreachable!("not a simple statement"),
        }
        Ok(())
    }

    fn device_block(&self, stmts: &[TStmt], f: &mut Frame, r: RegionId) -> Result<(), RuntimeError> {
        for s in stmts {
            match &s.kind {
                TStmtKind::ForAll {
                    var,
                    domain,
                    filter,
                    body,
                    ..
                } => {
                    for v in self.domain(domain, f, Some(r))? {
                        f[*var] = Value::Int(v as i64);
                        if let Some(flt) = filter {
                            if !self.eval(flt, f, Some(r))?.as_bool() {
                                continue;
                            }
                        }
                        self.device_block(body, f, r)?;
                    }
                }
                TStmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    if self.eval(cond, f, Some(r))?.as_bool() {
                        self.device_block(then_body, f, r)?;
                    } else {
                        self.device_block(else_body, f, r)?;
                    }
                }
                _ => self.simple(s, f, Some(r))?,
            }
        }
        Ok(())
    }

    /// Runs `body` once per element of `elems` that passes `filter`.
    fn parallel_pass(
        &self,
        elems: &[NodeId],
        var: SymbolId,
        filter: Option<&TExpr>,
        body: &[TStmt],
        f: &Frame,
        r: RegionId,
    ) -> Result<(), RuntimeError> {
        match &self.pool {
            None => {
                let mut frame = f.clone();
                for &v in elems {
                    frame[var] = Value::Int(v as i64);
                    if let Some(flt) = filter {
                        if !self.eval(flt, &frame, Some(r))?.as_bool() {
                            continue;
                        }
                    }
                    self.device_block(body, &mut frame, r)?;
                }
                Ok(())
            }
            Some(pool) => {
                // Filters see the state before any iteration of this pass.
                let passing: Vec<NodeId> = match filter {
                    None => elems.to_vec(),
                    Some(flt) => {
                        let mut frame = f.clone();
                        let mut keep = Vec::new();
                        for &v in elems {
                            frame[var] = Value::Int(v as i64);
                            if self.eval(flt, &frame, Some(r))?.as_bool() {
                                keep.push(v);
                            }
                        }
                        keep
                    }
                };
                pool.install(|| {
                    passing.par_iter().try_for_each_init(
                        || f.clone(),
                        |frame, &v| {
                            frame[var] = Value::Int(v as i64);
                            self.device_block(body, frame, r)
                        },
                    )
                })
            }
        }
    }

    // ----- host -----

    fn host_block(&mut self, stmts: &[TStmt], f: &mut Frame) -> Result<Flow, RuntimeError> {
        for s in stmts {
            if let Flow::Return = self.host_stmt(s, f)? {
                return Ok(Flow::Return);
            }
        }
        Ok(Flow::Next)
    }

    fn host_stmt(&mut self, s: &TStmt, f: &mut Frame) -> Result<Flow, RuntimeError> {
        match &s.kind {
            TStmtKind::Decl { sym, init: None } if self.p.symbols[*sym].kind.is_property() => {
                let len = match self.p.symbols[*sym].kind {
                    SymbolKind::NodeProperty => self.g.num_nodes(),
                    _ => self.g.num_edges(),
                };
                self.cells[*sym] = Cell::Array(zeros(len, self.ty(*sym)));
                self.audit_host_kill(*sym);
            }
            TStmtKind::CopyProp { dst, src } => {
                self.audit_access(*src, None, false);
                self.audit_host_kill(*dst);
                let vals: Vec<u64> = self.array(*src).iter().map(|x| x.load(Ordering::Relaxed)).collect();
                let (sty, dty) = (self.ty(*src), self.ty(*dst));
                for (slot, bits) in self.array(*dst).iter().zip(vals) {
                    slot.store(Value::from_bits(bits, sty).convert(dty).to_bits(), Ordering::Relaxed);
                }
            }
            TStmtKind::Attach { inits } => {
                for (sym, e) in inits {
                    let v = self.eval(e, f, None)?.convert(self.ty(*sym));
                    self.audit_host_kill(*sym);
                    for slot in self.array(*sym) {
                        slot.store(v.to_bits(), Ordering::Relaxed);
                    }
                }
            }
            TStmtKind::Return(e) => {
                if let Some(e) = e {
                    self.returned = Some(self.eval(e, f, None)?);
                }
                return Ok(Flow::Return);
            }
            TStmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let body = if self.eval(cond, f, None)?.as_bool() {
                    then_body
                } else {
                    else_body
                };
                return self.host_block(body, f);
            }
            TStmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                region: Some(r),
                ..
            } => {
                self.audit_enter(*r);
                let elems = self.domain(domain, f, Some(*r))?;
                self.parallel_pass(&elems, *var, filter.as_ref(), body, f, *r)?;
                self.audit_exit(*r);
            }
            TStmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                region: None,
                ..
            } => {
                for v in self.domain(domain, f, None)? {
                    self.write_var(*var, Value::Int(v as i64), f, None);
                    if let Some(flt) = filter {
                        if !self.eval(flt, f, None)?.as_bool() {
                            continue;
                        }
                    }
                    if let Flow::Return = self.host_block(body, f)? {
                        return Ok(Flow::Return);
                    }
                }
            }
            TStmtKind::Bfs {
                var,
                root,
                body,
                region,
                reverse,
            } => {
                let root = self.node_index(root, f, None)? as NodeId;
                let ctx = bfs_levels(self.g, root);
                self.levels.push(ctx.level.clone());
                self.audit_enter(*region);
                for nodes in &ctx.level_order {
                    self.parallel_pass(nodes, *var, None, body, f, *region)?;
                }
                self.audit_exit(*region);
                if let Some(rev) = reverse {
                    self.audit_enter(rev.region);
                    for nodes in ctx.level_order.iter().rev() {
                        self.parallel_pass(nodes, *var, rev.filter.as_ref(), &rev.body, f, rev.region)?;
                    }
                    self.audit_exit(rev.region);
                }
                self.levels.pop();
            }
            TStmtKind::FixedPoint {
                id,
                flag,
                convergence,
                body,
            } => return self.fixed_point(*id, *flag, convergence, body, s.span, f),
            _ => self.simple(s, f, None)?,
        }
        Ok(Flow::Next)
    }

    fn fixed_point(
        &mut self,
        id: usize,
        flag: SymbolId,
        convergence: &Convergence,
        body: &[TStmt],
        span: Span,
        f: &mut Frame,
    ) -> Result<Flow, RuntimeError> {
        let mut iterations = 0;
        while !self.read_var(flag, f, None).as_bool() {
            iterations += 1;
            self.fp_iterations[id] += 1;
            if iterations > self.cap {
                return Err(RuntimeError::NonTermination { span, cap: self.cap });
            }
            match convergence {
                Convergence::Property { prop, polarity } => {
                    let active = polarity.active_value();
                    self.write_var(flag, Value::Bool(true), f, None);
                    let settled = Value::Bool(!active).to_bits();
                    let len = self.array(*prop).len();
                    self.next[*prop] = Some((0..len).map(|_| AtomicU64::new(settled)).collect());
                    self.fused[*prop] = Some(Fused { flag, active });
                    let flow = self.host_block(body, f);
                    self.fused[*prop] = None;
                    let next = self.next[*prop].take().expect("next buffer set above");
                    if let Cell::Array(cur) = &mut self.cells[*prop] {
                        *cur = next;
                    }
                    if let Flow::Return = flow? {
                        return Ok(Flow::Return);
                    }
                }
                Convergence::Scalar(e) => {
                    if let Flow::Return = self.host_block(body, f)? {
                        return Ok(Flow::Return);
                    }
                    let done = self.eval(e, f, None)?;
                    self.write_var(flag, done, f, None);
                }
            }
        }
        Ok(Flow::Next)
    }
}

fn combine(op: ReduceOp, cur: Value, v: Value, ty: ScalarType) -> Value {
    match op {
        ReduceOp::All => Value::Bool(cur.as_bool() && v.as_bool()),
        ReduceOp::Any => Value::Bool(cur.as_bool() || v.as_bool()),
        ReduceOp::Sum | ReduceOp::Count if ty.is_floating() => Value::Float(cur.as_f64() + v.as_f64()),
        ReduceOp::Sum | ReduceOp::Count => Value::Int(cur.as_i64().wrapping_add(v.as_i64())),
        ReduceOp::Product if ty.is_floating() => Value::Float(cur.as_f64() * v.as_f64()),
        ReduceOp::Product => Value::Int(cur.as_i64().wrapping_mul(v.as_i64())),
    }
}

fn binary(op: BinaryOp, l: Value, r: Value, span: Span) -> Result<Value, RuntimeError> {
    use BinaryOp::*;
    Ok(match (l, r) {
        (Value::Float(a), Value::Float(b)) => match op {
            Add => Value::Float(a + b),
            Sub => Value::Float(a - b),
            Mul => Value::Float(a * b),
            Div | Mod if b == 0.0 => return Err(RuntimeError::DivisionByZero { span }),
            Div => Value::Float(a / b),
            Mod => Value::Float(a % b),
            Lt => Value::Bool(a < b),
            Le => Value::Bool(a <= b),
            Gt => Value::Bool(a > b),
            Ge => Value::Bool(a >= b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            And | Or => unreachable!("logical operators short-circuit"),
        },
        (Value::Bool(a), Value::Bool(b)) => match op {
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            _ => unreachable!("type checker admits only ==/!= on bools"),
        },
        (a, b) => {
            let (a, b) = (a.as_i64(), b.as_i64());
            match op {
                Add => Value::Int(a.wrapping_add(b)),
                Sub => Value::Int(a.wrapping_sub(b)),
                Mul => Value::Int(a.wrapping_mul(b)),
                Div | Mod if b == 0 => return Err(RuntimeError::DivisionByZero { span }),
                Div => Value::Int(a.wrapping_div(b)),
                Mod => Value::Int(a.wrapping_rem(b)),
                Lt => Value::Bool(a < b),
                Le => Value::Bool(a <= b),
                Gt => Value::Bool(a > b),
                Ge => Value::Bool(a >= b),
                Eq => Value::Bool(a == b),
                Ne => Value::Bool(a != b),
                And | Or => unreachable!("logical operators short-circuit"),
            }
        }
    })
}
