//! Host/device transfer sets, reduction sites and fixed-point flag fusion.
//!
//! The model is host-authoritative: the host copy of every symbol is current
//! outside parallel regions. A transfer scope copies `copy_in` to the device
//! before its first region and `copy_out` back after its last one. Static
//! graph arrays are copied once at function start and never back.

use std::collections::BTreeSet;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphArray {
    Offsets,
    Dests,
    Weights,
    RevOffsets,
    RevSrcs,
}

impl GraphArray {
    pub const ALL: [GraphArray; 5] = [
        GraphArray::Offsets,
        GraphArray::Dests,
        GraphArray::Weights,
        GraphArray::RevOffsets,
        GraphArray::RevSrcs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphArray::Offsets => "offsets",
            GraphArray::Dests => "dests",
            GraphArray::Weights => "weights",
            GraphArray::RevOffsets => "rev_offsets",
            GraphArray::RevSrcs => "rev_srcs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// Converged when the property is false at every node (`!modified`).
    AllFalse,
    /// Converged when the property is true at every node.
    AllTrue,
}

impl Polarity {
    /// The value whose write keeps the loop running.
    pub fn active_value(self) -> bool {
        matches!(self, Polarity::AllFalse)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionTransfer {
    pub region: RegionId,
    pub kind: RegionKind,
    pub copy_in: BTreeSet<SymbolId>,
    pub copy_out: BTreeSet<SymbolId>,
    pub device_only: BTreeSet<SymbolId>,
    pub graph_arrays: BTreeSet<GraphArray>,
    /// Outside symbols the region writes, whether or not they are live after.
    pub writes: BTreeSet<SymbolId>,
}

/// A maximal run of regions sharing one set of host/device copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferScope {
    pub id: usize,
    pub regions: Vec<RegionId>,
    pub copy_in: BTreeSet<SymbolId>,
    pub copy_out: BTreeSet<SymbolId>,
    pub device_only: BTreeSet<SymbolId>,
    pub graph_arrays: BTreeSet<GraphArray>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransferAnalysis {
    pub regions: Vec<RegionTransfer>,
    pub scopes: Vec<TransferScope>,
    /// Union of the graph arrays any region needs.
    pub graph_arrays: BTreeSet<GraphArray>,
}

impl TransferAnalysis {
    pub fn scope_of(&self, region: RegionId) -> Option<&TransferScope> {
        self.scopes.iter().find(|s| s.regions.contains(&region))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionInfo {
    pub target: SymbolId,
    pub op: ReduceOp,
    /// Outermost region containing the site.
    pub region: RegionId,
    pub is_fixed_point_flag: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointInfo {
    pub id: FixedPointId,
    pub flag: SymbolId,
    pub property: Option<SymbolId>,
    pub polarity: Option<Polarity>,
    /// Every write to the convergence property inside the loop body.
    pub fused_update_sites: Vec<Span>,
    pub regions: Vec<RegionId>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analyses {
    pub transfers: TransferAnalysis,
    pub reductions: Vec<ReductionInfo>,
    pub fixed_points: Vec<FixedPointInfo>,
}

pub fn analyze(p: &AnnotatedProgram) -> Analyses {
    Analyses {
        transfers: analyze_transfers(p),
        reductions: detect_reductions(p),
        fixed_points: fixed_points(p),
    }
}

/// Symbols referenced by an expression.
fn expr_refs(e: &TExpr, out: &mut BTreeSet<SymbolId>) {
    e.visit(&mut |x| match &x.kind {
        TExprKind::Var(s) => {
            out.insert(*s);
        }
        TExprKind::NodeProp { prop, .. } | TExprKind::EdgeProp { prop, .. } => {
            out.insert(*prop);
        }
        _ => {}
    });
}

fn stmt_own_refs(s: &TStmt, out: &mut BTreeSet<SymbolId>) {
    for e in stmt_exprs(s) {
        expr_refs(e, out);
    }
    match &s.kind {
        TStmtKind::Decl { sym, .. } => {
            out.insert(*sym);
        }
        TStmtKind::Assign { place, .. } | TStmtKind::Reduce { place, .. } => {
            out.insert(place.symbol());
        }
        TStmtKind::MinMax { targets, .. } => out.extend(targets.iter().map(Place::symbol)),
        TStmtKind::CopyProp { dst, src } => {
            out.insert(*dst);
            out.insert(*src);
        }
        TStmtKind::ForAll {
            domain: TDomain::Set(s),
            ..
        } => {
            out.insert(*s);
        }
        TStmtKind::FixedPoint { flag, convergence, .. } => {
            out.insert(*flag);
            if let Convergence::Property { prop, .. } = convergence {
                out.insert(*prop);
            }
        }
        TStmtKind::Attach { inits } => out.extend(inits.iter().map(|(s, _)| *s)),
        _ => {}
    }
}

/// Every symbol referenced anywhere in `stmts`.
pub(crate) fn refs(stmts: &[TStmt]) -> BTreeSet<SymbolId> {
    let mut out = BTreeSet::new();
    walk_stmts(stmts, &mut |s| stmt_own_refs(s, &mut out));
    out
}

fn place_writes(stmts: &[TStmt], out: &mut BTreeSet<SymbolId>) {
    walk_stmts(stmts, &mut |s| match &s.kind {
        TStmtKind::Assign { place, .. } | TStmtKind::Reduce { place, .. } => {
            out.insert(place.symbol());
        }
        TStmtKind::MinMax { targets, .. } => out.extend(targets.iter().map(Place::symbol)),
        _ => {}
    });
}

fn expr_graph_arrays(e: &TExpr, out: &mut BTreeSet<GraphArray>) {
    e.visit(&mut |x| match &x.kind {
        TExprKind::EdgeWeight(_) | TExprKind::MinWeight | TExprKind::MaxWeight => {
            out.insert(GraphArray::Weights);
        }
        TExprKind::GetEdge(..) | TExprKind::IsEdge(..) => {
            out.insert(GraphArray::Offsets);
            out.insert(GraphArray::Dests);
        }
        TExprKind::OutDegree(_) => {
            out.insert(GraphArray::Offsets);
        }
        TExprKind::InDegree(_) => {
            out.insert(GraphArray::RevOffsets);
        }
        _ => {}
    });
}

fn graph_arrays_of(stmts: &[TStmt], out: &mut BTreeSet<GraphArray>) {
    walk_stmts(stmts, &mut |s| {
        for e in stmt_exprs(s) {
            expr_graph_arrays(e, out);
        }
        if let TStmtKind::ForAll { domain, .. } = &s.kind {
            domain_graph_arrays(domain, out);
        }
    });
}

fn domain_graph_arrays(d: &TDomain, out: &mut BTreeSet<GraphArray>) {
    match d {
        TDomain::Neighbors(_) => {
            out.insert(GraphArray::Offsets);
            out.insert(GraphArray::Dests);
        }
        TDomain::NodesTo(_) => {
            out.insert(GraphArray::RevOffsets);
            out.insert(GraphArray::RevSrcs);
        }
        _ => {}
    }
}

/// The parts of a region-opening statement that run on the device.
struct RegionParts<'a> {
    region: RegionId,
    exprs: Vec<&'a TExpr>,
    domain: Option<&'a TDomain>,
    body: &'a [TStmt],
}

fn region_parts(s: &TStmt) -> Vec<RegionParts<'_>> {
    match &s.kind {
        TStmtKind::ForAll {
            domain,
            filter,
            body,
            region: Some(r),
            ..
        } => {
            let mut exprs: Vec<&TExpr> = filter.iter().collect();
            if let TDomain::Neighbors(e) | TDomain::NodesTo(e) = domain {
                exprs.push(e);
            }
            vec![RegionParts {
                region: *r,
                exprs,
                domain: Some(domain),
                body,
            }]
        }
        TStmtKind::Bfs {
            body, region, reverse, ..
        } => {
            let mut v = vec![RegionParts {
                region: *region,
                exprs: vec![],
                domain: None,
                body,
            }];
            if let Some(r) = reverse {
                v.push(RegionParts {
                    region: r.region,
                    exprs: r.filter.iter().collect(),
                    domain: None,
                    body: &r.body,
                });
            }
            v
        }
        _ => vec![],
    }
}

fn opens_region(s: &TStmt) -> bool {
    matches!(
        s.kind,
        TStmtKind::ForAll { region: Some(_), .. } | TStmtKind::Bfs { .. }
    )
}

struct TransferBuilder<'p> {
    p: &'p AnnotatedProgram,
    regions: Vec<Option<RegionTransfer>>,
    scopes: Vec<TransferScope>,
    /// Enclosing fixed points: (flag, convergence property).
    fixed_points: Vec<(SymbolId, Option<SymbolId>)>,
}

impl TransferBuilder<'_> {
    fn block(&mut self, stmts: &[TStmt], after: &BTreeSet<SymbolId>) {
        let mut pending: Vec<RegionId> = Vec::new();
        for (i, s) in stmts.iter().enumerate() {
            let mut after_i = refs(&stmts[i + 1..]);
            after_i.extend(after.iter().copied());
            let is_bfs = matches!(s.kind, TStmtKind::Bfs { .. });
            if !opens_region(s) || is_bfs {
                self.close_scope(&mut pending);
            }
            if opens_region(s) {
                let parts = region_parts(s);
                // The forward pass of a BFS also feeds its reverse pass.
                let mut later = after_i.clone();
                for part in parts.iter().skip(1) {
                    for e in &part.exprs {
                        expr_refs(e, &mut later);
                    }
                    later.extend(refs(part.body));
                }
                for (k, part) in parts.iter().enumerate() {
                    let live = if k == 0 { &later } else { &after_i };
                    let t = self.region(part, live);
                    self.regions[part.region] = Some(t);
                    pending.push(part.region);
                }
                if is_bfs {
                    self.close_scope(&mut pending);
                }
                continue;
            }
            match &s.kind {
                TStmtKind::FixedPoint {
                    flag,
                    convergence,
                    body,
                    ..
                } => {
                    let mut inner = after_i.clone();
                    inner.extend(refs(body));
                    stmt_own_refs(s, &mut inner);
                    let prop = match convergence {
                        Convergence::Property { prop, .. } => Some(*prop),
                        Convergence::Scalar(_) => None,
                    };
                    self.fixed_points.push((*flag, prop));
                    self.block(body, &inner);
                    self.fixed_points.pop();
                }
                TStmtKind::ForAll { body, .. } => {
                    let mut inner = after_i.clone();
                    inner.extend(refs(body));
                    stmt_own_refs(s, &mut inner);
                    self.block(body, &inner);
                }
                TStmtKind::If {
                    then_body, else_body, ..
                } => {
                    self.block(then_body, &after_i);
                    self.block(else_body, &after_i);
                }
                _ => {}
            }
        }
        self.close_scope(&mut pending);
    }

    fn close_scope(&mut self, pending: &mut Vec<RegionId>) {
        if pending.is_empty() {
            return;
        }
        let mut scope = TransferScope {
            id: self.scopes.len(),
            regions: std::mem::take(pending),
            copy_in: BTreeSet::new(),
            copy_out: BTreeSet::new(),
            device_only: BTreeSet::new(),
            graph_arrays: BTreeSet::new(),
        };
        for r in &scope.regions {
            let t = self.regions[*r]
                .as_ref()
                .expect("region analysed before its scope closes");
            scope.copy_in.extend(t.copy_in.iter().copied());
            scope.copy_out.extend(t.copy_out.iter().copied());
            scope.device_only.extend(t.device_only.iter().copied());
            scope.graph_arrays.extend(t.graph_arrays.iter().copied());
        }
        self.scopes.push(scope);
    }

    fn region(&self, part: &RegionParts<'_>, live_after: &BTreeSet<SymbolId>) -> RegionTransfer {
        let info = &self.p.regions[part.region];
        let local = |s: SymbolId| self.p.symbols[s].region == Some(part.region) || s == info.var;
        let mut referenced = refs(part.body);
        for e in &part.exprs {
            expr_refs(e, &mut referenced);
        }
        if let Some(TDomain::Set(s)) = part.domain {
            referenced.insert(*s);
        }
        let mut written = BTreeSet::new();
        place_writes(part.body, &mut written);

        let mut graph_arrays = BTreeSet::new();
        graph_arrays_of(part.body, &mut graph_arrays);
        for e in &part.exprs {
            expr_graph_arrays(e, &mut graph_arrays);
        }
        match part.domain {
            Some(d) => domain_graph_arrays(d, &mut graph_arrays),
            None => {
                // BFS passes walk out-edges to find the next level.
                graph_arrays.insert(GraphArray::Offsets);
                graph_arrays.insert(GraphArray::Dests);
            }
        }

        let is_outside = |s: &SymbolId| !local(*s) && self.p.symbols[*s].kind != SymbolKind::Graph;
        let mut copy_in: BTreeSet<SymbolId> = referenced.iter().copied().filter(is_outside).collect();
        let mut writes: BTreeSet<SymbolId> = written.iter().copied().filter(is_outside).collect();
        // A write to a convergence property also writes the enclosing flag.
        for (flag, prop) in &self.fixed_points {
            if prop.is_some_and(|p| written.contains(&p)) {
                copy_in.insert(*flag);
                writes.insert(*flag);
            }
        }
        let copy_out = writes
            .iter()
            .copied()
            .filter(|s| self.live_at_exit(*s, live_after))
            .collect();
        let device_only = self
            .p
            .symbols
            .iter()
            .filter(|s| s.region == Some(part.region) && s.id != info.var)
            .map(|s| s.id)
            .collect();
        RegionTransfer {
            region: part.region,
            kind: info.kind,
            copy_in,
            copy_out,
            device_only,
            graph_arrays,
            writes,
        }
    }

    fn live_at_exit(&self, s: SymbolId, live_after: &BTreeSet<SymbolId>) -> bool {
        let sym = &self.p.symbols[s];
        live_after.contains(&s) || (sym.is_param && sym.kind.is_property())
    }
}

/// Computes per-region transfer sets and merges consecutive regions of one
/// block into shared scopes. A BFS statement (forward and reverse pass) is
/// always a scope of its own.
pub fn analyze_transfers(p: &AnnotatedProgram) -> TransferAnalysis {
    let mut b = TransferBuilder {
        p,
        regions: vec![None; p.regions.len()],
        scopes: Vec::new(),
        fixed_points: Vec::new(),
    };
    b.block(&p.body, &BTreeSet::new());
    let regions: Vec<RegionTransfer> = b
        .regions
        .into_iter()
        .map(|r| r.expect("every region is reachable from the body"))
        .collect();
    let graph_arrays = regions.iter().flat_map(|r| r.graph_arrays.iter().copied()).collect();
    TransferAnalysis {
        regions,
        scopes: b.scopes,
        graph_arrays,
    }
}

fn visit_with_region<'a>(
    stmts: &'a [TStmt],
    region: Option<RegionId>,
    fps: &mut Vec<(SymbolId, Option<SymbolId>, FixedPointId)>,
    f: &mut impl FnMut(&'a TStmt, Option<RegionId>, &[(SymbolId, Option<SymbolId>, FixedPointId)]),
) {
    for s in stmts {
        f(s, region, fps);
        match &s.kind {
            TStmtKind::ForAll { body, region: r, .. } => visit_with_region(body, region.or(*r), fps, f),
            TStmtKind::Bfs {
                body,
                region: r,
                reverse,
                ..
            } => {
                visit_with_region(body, Some(*r), fps, f);
                if let Some(rev) = reverse {
                    visit_with_region(&rev.body, Some(rev.region), fps, f);
                }
            }
            TStmtKind::FixedPoint {
                id,
                flag,
                convergence,
                body,
            } => {
                let prop = match convergence {
                    Convergence::Property { prop, .. } => Some(*prop),
                    Convergence::Scalar(_) => None,
                };
                fps.push((*flag, prop, *id));
                visit_with_region(body, region, fps, f);
                fps.pop();
            }
            TStmtKind::If {
                then_body, else_body, ..
            } => {
                visit_with_region(then_body, region, fps, f);
                visit_with_region(else_body, region, fps, f);
            }
            _ => {}
        }
    }
}

fn written_places(s: &TStmt) -> Vec<&Place> {
    match &s.kind {
        TStmtKind::Assign { place, .. } | TStmtKind::Reduce { place, .. } => vec![place],
        TStmtKind::MinMax { targets, .. } => targets.iter().collect(),
        _ => vec![],
    }
}

/// Reports every reduction inside a parallel region, plus one OR-reduction on
/// the fixed-point flag for each in-region write to a convergence property.
pub fn detect_reductions(p: &AnnotatedProgram) -> Vec<ReductionInfo> {
    let mut out = Vec::new();
    visit_with_region(&p.body, None, &mut Vec::new(), &mut |s, region, fps| {
        let Some(region) = region else { return };
        if let TStmtKind::Reduce { place, op, .. } = &s.kind {
            out.push(ReductionInfo {
                target: place.symbol(),
                op: *op,
                region,
                is_fixed_point_flag: false,
                span: s.span,
            });
        }
        for place in written_places(s) {
            for (flag, prop, _) in fps {
                if *prop == Some(place.symbol()) {
                    out.push(ReductionInfo {
                        target: *flag,
                        op: ReduceOp::Any,
                        region,
                        is_fixed_point_flag: true,
                        span: s.span,
                    });
                }
            }
        }
    });
    out
}

pub fn fixed_points(p: &AnnotatedProgram) -> Vec<FixedPointInfo> {
    let mut infos: Vec<FixedPointInfo> = Vec::new();
    walk_stmts(&p.body, &mut |s| {
        if let TStmtKind::FixedPoint {
            id,
            flag,
            convergence,
            body,
        } = &s.kind
        {
            let (property, polarity) = match convergence {
                Convergence::Property { prop, polarity } => (Some(*prop), Some(*polarity)),
                Convergence::Scalar(_) => (None, None),
            };
            let mut sites = Vec::new();
            let mut regions = BTreeSet::new();
            walk_stmts(body, &mut |t| {
                if written_places(t).iter().any(|pl| Some(pl.symbol()) == property) {
                    sites.push(t.span);
                }
                for part in region_parts(t) {
                    regions.insert(part.region);
                }
            });
            infos.push(FixedPointInfo {
                id: *id,
                flag: *flag,
                property,
                polarity,
                fused_update_sites: sites,
                regions: regions.into_iter().collect(),
                span: s.span,
            });
        }
    });
    infos.sort_by_key(|f| f.id);
    infos
}
