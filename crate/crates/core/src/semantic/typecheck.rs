use std::collections::HashMap;

use super::*;
use crate::frontend::ast::{
    Block, Domain, Expr, ExprKind, FunctionDecl, Ident, Literal, NamedArg, Stmt, StmtKind, TypeExpr,
};
use crate::frontend::pretty;

/// Type-checks the first function of `program`.
pub fn type_check(program: &Program) -> Result<AnnotatedProgram, TypeError> {
    let f = program
        .functions
        .first()
        .ok_or_else(|| TypeError::new(Span::default(), "program has no functions"))?;
    check_function(f)
}

/// Type-checks the function called `name`.
pub fn type_check_function(program: &Program, name: &str) -> Result<AnnotatedProgram, TypeError> {
    let f = program
        .functions
        .iter()
        .find(|f| f.name.name == name)
        .ok_or_else(|| TypeError::new(Span::default(), format!("no function named `{name}`")))?;
    check_function(f)
}

const RESERVED: &[&str] = &["level", "weight"];

fn check_function(f: &FunctionDecl) -> Result<AnnotatedProgram, TypeError> {
    let mut c = Checker {
        symbols: Vec::new(),
        scopes: vec![HashMap::new()],
        regions: Vec::new(),
        region: None,
        bfs_depth: 0,
        fixed_points: Vec::new(),
        fp_count: 0,
        graph: None,
        diagnostics: Vec::new(),
        return_type: None,
    };
    let mut params = Vec::new();
    for p in &f.params {
        let id = c.declare_typed(&p.name, &p.ty, true, p.span)?;
        if c.symbols[id].kind == SymbolKind::Graph {
            if c.graph.is_some() {
                return Err(TypeError::new(p.span, "only one Graph parameter is supported"));
            }
            c.graph = Some(id);
        }
        params.push(id);
    }
    // Parameters and top-level declarations share one scope.
    let body = c.stmts(&f.body.stmts)?;
    Ok(AnnotatedProgram {
        name: f.name.name.clone(),
        symbols: c.symbols,
        params,
        graph: c.graph,
        body,
        regions: c.regions,
        fixed_point_count: c.fp_count,
        return_type: c.return_type,
        diagnostics: c.diagnostics,
    })
}

struct Checker {
    symbols: Vec<Symbol>,
    scopes: Vec<HashMap<String, SymbolId>>,
    regions: Vec<RegionInfo>,
    region: Option<RegionId>,
    bfs_depth: usize,
    /// Enclosing fixed points with their convergence property, innermost last.
    fixed_points: Vec<(FixedPointId, Option<SymbolId>)>,
    fp_count: usize,
    graph: Option<SymbolId>,
    diagnostics: Vec<Diagnostic>,
    return_type: Option<ScalarType>,
}

fn assignable(target: ScalarType, value: ScalarType) -> bool {
    target == value
        || (target.is_numeric() && value.is_numeric())
        || (target.is_integral() && value == ScalarType::Node)
}

impl Checker {
    fn declare(
        &mut self,
        name: &Ident,
        kind: SymbolKind,
        ty: Option<ScalarType>,
        is_param: bool,
    ) -> Result<SymbolId, TypeError> {
        if RESERVED.contains(&name.name.as_str()) {
            return Err(TypeError::new(name.span, format!("`{}` is a reserved name", name.name)));
        }
        let scope = self.scopes.last_mut().expect("scope stack is never empty");
        if scope.contains_key(&name.name) {
            return Err(TypeError::new(
                name.span,
                format!("`{}` is already declared in this scope", name.name),
            ));
        }
        let id = self.symbols.len();
        scope.insert(name.name.clone(), id);
        self.symbols.push(Symbol {
            id,
            name: name.name.clone(),
            kind,
            ty,
            span: name.span,
            is_param,
            region: self.region,
            scope_depth: self.scopes.len(),
        });
        Ok(id)
    }

    fn declare_typed(
        &mut self,
        name: &Ident,
        ty: &TypeExpr,
        is_param: bool,
        span: Span,
    ) -> Result<SymbolId, TypeError> {
        let (kind, elem) = match ty {
            TypeExpr::Int => (SymbolKind::Scalar, Some(ScalarType::Int)),
            TypeExpr::Long => (SymbolKind::Scalar, Some(ScalarType::Long)),
            TypeExpr::Float => (SymbolKind::Scalar, Some(ScalarType::Float)),
            TypeExpr::Double => (SymbolKind::Scalar, Some(ScalarType::Double)),
            TypeExpr::Bool => (SymbolKind::Scalar, Some(ScalarType::Bool)),
            TypeExpr::Node => (SymbolKind::Node, Some(ScalarType::Node)),
            TypeExpr::Edge => (SymbolKind::Edge, Some(ScalarType::Edge)),
            TypeExpr::Graph => (SymbolKind::Graph, None),
            TypeExpr::PropNode(inner) | TypeExpr::PropEdge(inner) => {
                let elem = match **inner {
                    TypeExpr::Int => ScalarType::Int,
                    TypeExpr::Long => ScalarType::Long,
                    TypeExpr::Float => ScalarType::Float,
                    TypeExpr::Double => ScalarType::Double,
                    TypeExpr::Bool => ScalarType::Bool,
                    _ => {
                        return Err(TypeError::new(
                            span,
                            format!(
                                "property element type must be primitive, found {}",
                                pretty::type_str(inner)
                            ),
                        ))
                    }
                };
                let kind = if matches!(ty, TypeExpr::PropNode(_)) {
                    SymbolKind::NodeProperty
                } else {
                    SymbolKind::EdgeProperty
                };
                (kind, Some(elem))
            }
            TypeExpr::SetNode(g) => {
                let gid = self.lookup(g, span)?;
                if self.symbols[gid].kind != SymbolKind::Graph {
                    return Err(TypeError::new(span, format!("`{g}` is not a graph")));
                }
                (SymbolKind::NodeSet, Some(ScalarType::Node))
            }
        };
        self.declare(name, kind, elem, is_param)
    }

    fn lookup(&self, name: &str, span: Span) -> Result<SymbolId, TypeError> {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name).copied())
            .ok_or_else(|| TypeError::new(span, format!("undeclared symbol `{name}`")))
    }

    fn expect_graph(&self, ident: &Ident) -> Result<SymbolId, TypeError> {
        let id = self.lookup(&ident.name, ident.span)?;
        if self.symbols[id].kind != SymbolKind::Graph {
            return Err(TypeError::new(ident.span, format!("`{}` is not a graph", ident.name)));
        }
        Ok(id)
    }

    fn with_scope<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, TypeError>) -> Result<T, TypeError> {
        self.scopes.push(HashMap::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    fn block(&mut self, b: &Block) -> Result<Vec<TStmt>, TypeError> {
        self.with_scope(|c| c.stmts(&b.stmts))
    }

    fn stmts(&mut self, stmts: &[Stmt]) -> Result<Vec<TStmt>, TypeError> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn host_only(&self, span: Span, what: &str) -> Result<(), TypeError> {
        if self.region.is_some() {
            return Err(TypeError::new(
                span,
                format!("{what} is not allowed inside a parallel region"),
            ));
        }
        Ok(())
    }

    fn is_region_local(&self, sym: SymbolId) -> bool {
        match self.region {
            Some(r) => self.symbols[sym].region == Some(r) || self.regions[r].var == sym,
            None => true,
        }
    }

    fn stmt(&mut self, s: &Stmt) -> Result<TStmt, TypeError> {
        let span = s.span;
        let kind = match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                match ty {
                    TypeExpr::Graph | TypeExpr::SetNode(_) => {
                        return Err(TypeError::new(span, "graphs and node sets can only be parameters"))
                    }
                    TypeExpr::PropNode(_) | TypeExpr::PropEdge(_) => {
                        self.host_only(span, "a property declaration")?;
                        if init.is_some() {
                            return Err(TypeError::new(
                                span,
                                "properties are initialized with attachNodeProperty",
                            ));
                        }
                    }
                    _ => {}
                }
                let init = match init {
                    Some(e) => {
                        let target_ty = scalar_of(ty);
                        let v = self.expr(e, target_ty)?;
                        if let Some(t) = target_ty {
                            if !assignable(t, v.ty) {
                                return Err(TypeError::new(
                                    e.span,
                                    format!("cannot initialize {t} `{}` with {}", name.name, v.ty),
                                ));
                            }
                        }
                        Some(v)
                    }
                    None => None,
                };
                let sym = self.declare_typed(name, ty, false, span)?;
                TStmtKind::Decl { sym, init }
            }
            StmtKind::Assign { target, value } => {
                if let ExprKind::Var(name) = &target.kind {
                    let sym = self.lookup(name, target.span)?;
                    if self.symbols[sym].kind == SymbolKind::NodeProperty {
                        self.host_only(span, "whole-property assignment")?;
                        let src = match &value.kind {
                            ExprKind::Var(v) => self.lookup(v, value.span)?,
                            _ => {
                                return Err(TypeError::new(
                                    value.span,
                                    "a property can only be assigned another property",
                                ))
                            }
                        };
                        let (d, s2) = (&self.symbols[sym], &self.symbols[src]);
                        if s2.kind != SymbolKind::NodeProperty || d.ty != s2.ty {
                            return Err(TypeError::new(
                                value.span,
                                format!("cannot assign `{}` to property `{}`", s2.name, d.name),
                            ));
                        }
                        return Ok(TStmt {
                            kind: TStmtKind::CopyProp { dst: sym, src },
                            span,
                        });
                    }
                }
                let place = self.place(target)?;
                let pty = self.place_type(&place);
                let v = self.expr(value, Some(pty))?;
                if !assignable(pty, v.ty) {
                    return Err(TypeError::new(value.span, format!("cannot assign {} to {}", v.ty, pty)));
                }
                if let Place::Var(sym) = place {
                    if self.region.is_some() && !self.is_region_local(sym) {
                        self.diagnostics.push(Diagnostic {
                            severity: Severity::Warning,
                            span,
                            message: format!(
                                "data race: `{}` is written by concurrent iterations without a reduction",
                                self.symbols[sym].name
                            ),
                        });
                    }
                }
                TStmtKind::Assign { place, value: v }
            }
            StmtKind::Reduce { target, op, value } => {
                let place = self.place(target)?;
                let pty = self.place_type(&place);
                let ok = match op {
                    ReduceOp::Sum | ReduceOp::Product | ReduceOp::Count => pty.is_numeric(),
                    ReduceOp::All | ReduceOp::Any => pty == ScalarType::Bool,
                };
                if !ok {
                    return Err(TypeError::new(
                        span,
                        format!("{} reduction `{}` cannot target a {pty} value", op.name(), op.token()),
                    ));
                }
                let v = match value {
                    Some(e) => {
                        let v = self.expr(e, Some(pty))?;
                        if !assignable(pty, v.ty) {
                            return Err(TypeError::new(e.span, format!("cannot reduce {} into {pty}", v.ty)));
                        }
                        v
                    }
                    None => TExpr {
                        kind: TExprKind::Int(1),
                        ty: ScalarType::Int,
                        span,
                    },
                };
                TStmtKind::Reduce {
                    place,
                    op: *op,
                    value: v,
                }
            }
            StmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                parallel,
            } => return self.forall(span, var, domain, filter.as_ref(), body, *parallel),
            StmtKind::FixedPoint {
                flag,
                convergence,
                body,
            } => {
                self.host_only(span, "fixedPoint")?;
                let flag_id = self.lookup(&flag.name, flag.span)?;
                let fs = &self.symbols[flag_id];
                if fs.kind != SymbolKind::Scalar || fs.ty != Some(ScalarType::Bool) {
                    return Err(TypeError::new(
                        flag.span,
                        format!("fixedPoint flag `{}` must be a bool variable", flag.name),
                    ));
                }
                let conv = self.convergence(convergence)?;
                let id = self.fp_count;
                self.fp_count += 1;
                let conv_prop = match &conv {
                    Convergence::Property { prop, .. } => Some(*prop),
                    Convergence::Scalar(_) => None,
                };
                self.fixed_points.push((id, conv_prop));
                let body = self.block(body);
                self.fixed_points.pop();
                TStmtKind::FixedPoint {
                    id,
                    flag: flag_id,
                    convergence: conv,
                    body: body?,
                }
            }
            StmtKind::IterateInBfs {
                var,
                graph,
                root,
                body,
                reverse,
            } => {
                self.host_only(span, "iterateInBFS")?;
                self.expect_graph(graph)?;
                let root = self.expr(root, Some(ScalarType::Node))?;
                if root.ty != ScalarType::Node {
                    return Err(TypeError::new(root.span, "BFS root must be a node"));
                }
                self.with_scope(|c| {
                    let fwd = c.regions.len();
                    c.region = Some(fwd);
                    let var_id = c.declare(var, SymbolKind::Node, Some(ScalarType::Node), false)?;
                    c.regions.push(RegionInfo {
                        id: fwd,
                        kind: RegionKind::BfsForward,
                        span: body.span,
                        var: var_id,
                        fixed_point: c.fixed_points.last().map(|f| f.0),
                    });
                    c.bfs_depth += 1;
                    let result = (|| {
                        let fbody = c.block(body)?;
                        let reverse = match reverse {
                            Some(r) => {
                                let rid = c.regions.len();
                                c.regions.push(RegionInfo {
                                    id: rid,
                                    kind: RegionKind::BfsReverse,
                                    span: r.span,
                                    var: var_id,
                                    fixed_point: c.fixed_points.last().map(|f| f.0),
                                });
                                c.region = Some(rid);
                                let filter = match &r.filter {
                                    Some(f) => Some(c.bool_expr(f)?),
                                    None => None,
                                };
                                Some(ReverseBlock {
                                    filter,
                                    body: c.block(&r.body)?,
                                    region: rid,
                                    span: r.span,
                                })
                            }
                            None => None,
                        };
                        Ok(TStmtKind::Bfs {
                            var: var_id,
                            root,
                            body: fbody,
                            region: fwd,
                            reverse,
                        })
                    })();
                    c.bfs_depth -= 1;
                    c.region = None;
                    result
                })?
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let cond = self.bool_expr(cond)?;
                let then_body = self.block(then_block)?;
                let else_body = match else_block {
                    Some(b) => self.block(b)?,
                    None => Vec::new(),
                };
                TStmtKind::If {
                    cond,
                    then_body,
                    else_body,
                }
            }
            StmtKind::MinMax {
                targets,
                kind,
                compare,
                attached,
            } => {
                let places = targets.iter().map(|t| self.place(t)).collect::<Result<Vec<_>, _>>()?;
                if pretty::expr(&compare.0) != pretty::expr(&targets[0]) {
                    return Err(TypeError::new(
                        compare.0.span,
                        format!(
                            "first {} argument must be the first target `{}`",
                            kind.keyword(),
                            pretty::expr(&targets[0])
                        ),
                    ));
                }
                let subject_ty = self.place_type(&places[0]);
                if !subject_ty.is_numeric() {
                    return Err(TypeError::new(
                        targets[0].span,
                        format!("{} target must be numeric, found {subject_ty}", kind.keyword()),
                    ));
                }
                let candidate = self.expr(&compare.1, Some(subject_ty))?;
                if !candidate.ty.is_numeric() {
                    return Err(TypeError::new(
                        compare.1.span,
                        format!("{} candidate must be numeric", kind.keyword()),
                    ));
                }
                if attached.len() + 1 != places.len() {
                    return Err(TypeError::new(
                        span,
                        format!("{} targets but {} values", places.len(), attached.len() + 1),
                    ));
                }
                let mut values = Vec::new();
                for (p, a) in places[1..].iter().zip(attached) {
                    let pty = self.place_type(p);
                    let v = self.expr(a, Some(pty))?;
                    if !assignable(pty, v.ty) {
                        return Err(TypeError::new(
                            a.span,
                            format!("cannot assign {} to {pty} target", v.ty),
                        ));
                    }
                    values.push(v);
                }
                TStmtKind::MinMax {
                    kind: *kind,
                    targets: places,
                    candidate,
                    attached: values,
                }
            }
            StmtKind::Call { receiver, method, args } => {
                if method.name != "attachNodeProperty" {
                    return Err(TypeError::new(
                        method.span,
                        format!("`{}` cannot be used as a statement", method.name),
                    ));
                }
                self.host_only(span, "attachNodeProperty")?;
                match receiver {
                    Some(r) => {
                        self.expect_graph(r)?;
                    }
                    None => return Err(TypeError::new(method.span, "attachNodeProperty needs a graph receiver")),
                }
                TStmtKind::Attach {
                    inits: self.attach_args(args)?,
                }
            }
            StmtKind::Return(value) => {
                self.host_only(span, "return")?;
                let v = match value {
                    Some(e) => {
                        let v = self.expr(e, None)?;
                        match self.return_type {
                            Some(t) if !assignable(t, v.ty) => {
                                return Err(TypeError::new(e.span, "inconsistent return types"))
                            }
                            None => self.return_type = Some(v.ty),
                            _ => {}
                        }
                        Some(v)
                    }
                    None => None,
                };
                TStmtKind::Return(v)
            }
        };
        Ok(TStmt { kind, span })
    }

    fn attach_args(&mut self, args: &[NamedArg]) -> Result<Vec<(SymbolId, TExpr)>, TypeError> {
        let mut inits = Vec::new();
        for a in args {
            let name = a
                .name
                .as_ref()
                .ok_or_else(|| TypeError::new(a.value.span, "attachNodeProperty arguments must be `prop = value`"))?;
            let sym = self
                .lookup(&name.name, name.span)
                .map_err(|_| TypeError::new(name.span, format!("undeclared property `{}`", name.name)))?;
            let s = &self.symbols[sym];
            if s.kind != SymbolKind::NodeProperty {
                return Err(TypeError::new(
                    name.span,
                    format!("`{}` is not a node property", name.name),
                ));
            }
            let ety = s.ty.expect("properties have an element type");
            let v = self.expr(&a.value, Some(ety))?;
            if !assignable(ety, v.ty) {
                return Err(TypeError::new(
                    a.value.span,
                    format!("cannot initialize {ety} property with {}", v.ty),
                ));
            }
            inits.push((sym, v));
        }
        Ok(inits)
    }

    fn forall(
        &mut self,
        span: Span,
        var: &Ident,
        domain: &Domain,
        filter: Option<&Expr>,
        body: &Block,
        parallel: bool,
    ) -> Result<TStmt, TypeError> {
        let tdomain = match domain {
            Domain::Nodes { graph } => {
                self.expect_graph(graph)?;
                TDomain::Nodes
            }
            Domain::Neighbors { graph, of } | Domain::NodesTo { graph, of } => {
                self.expect_graph(graph)?;
                let of = self.expr(of, Some(ScalarType::Node))?;
                if of.ty != ScalarType::Node {
                    return Err(TypeError::new(of.span, format!("expected a node, found {}", of.ty)));
                }
                if matches!(domain, Domain::Neighbors { .. }) {
                    TDomain::Neighbors(of)
                } else {
                    TDomain::NodesTo(of)
                }
            }
            Domain::Set { name } => {
                let id = self.lookup(&name.name, name.span)?;
                if self.symbols[id].kind != SymbolKind::NodeSet {
                    return Err(TypeError::new(name.span, format!("`{}` is not iterable", name.name)));
                }
                TDomain::Set(id)
            }
        };
        let opens_region = parallel && self.region.is_none();
        let saved = self.region;
        let result = self.with_scope(|c| {
            let region = if opens_region {
                let rid = c.regions.len();
                c.region = Some(rid);
                Some(rid)
            } else {
                None
            };
            let var_id = c.declare(var, SymbolKind::Node, Some(ScalarType::Node), false)?;
            if let Some(rid) = region {
                c.regions.push(RegionInfo {
                    id: rid,
                    kind: RegionKind::ForAll,
                    span,
                    var: var_id,
                    fixed_point: c.fixed_points.last().map(|f| f.0),
                });
            }
            let filter = match filter {
                Some(f) => Some(c.bool_expr(f)?),
                None => None,
            };
            let body = c.block(body)?;
            Ok(TStmtKind::ForAll {
                var: var_id,
                domain: tdomain,
                filter,
                body,
                parallel,
                region,
            })
        });
        self.region = saved;
        Ok(TStmt { kind: result?, span })
    }

    fn convergence(&mut self, e: &Expr) -> Result<Convergence, TypeError> {
        let bare_prop = |c: &Self, x: &Expr| -> Option<SymbolId> {
            if let ExprKind::Var(name) = &x.kind {
                let id = c.lookup(name, x.span).ok()?;
                let s = &c.symbols[id];
                if s.kind == SymbolKind::NodeProperty {
                    return Some(id);
                }
            }
            None
        };
        let (prop, polarity, at) = match &e.kind {
            ExprKind::Unary {
                op: UnaryOp::Not,
                operand,
            } => match bare_prop(self, operand) {
                Some(p) => (p, Polarity::AllFalse, operand.span),
                None => return Ok(Convergence::Scalar(self.bool_expr(e)?)),
            },
            _ => match bare_prop(self, e) {
                Some(p) => (p, Polarity::AllTrue, e.span),
                None => return Ok(Convergence::Scalar(self.bool_expr(e)?)),
            },
        };
        if self.symbols[prop].ty != Some(ScalarType::Bool) {
            return Err(TypeError::new(
                at,
                format!(
                    "convergence property `{}` must be propNode<bool>",
                    self.symbols[prop].name
                ),
            ));
        }
        Ok(Convergence::Property { prop, polarity })
    }

    fn place(&mut self, target: &Expr) -> Result<Place, TypeError> {
        match &target.kind {
            ExprKind::Var(name) => {
                let id = self.lookup(name, target.span)?;
                match self.symbols[id].kind {
                    SymbolKind::Scalar | SymbolKind::Node | SymbolKind::Edge => Ok(Place::Var(id)),
                    k => Err(TypeError::new(
                        target.span,
                        format!("cannot write to {} `{name}` here", k.name()),
                    )),
                }
            }
            ExprKind::Prop { object, name } => {
                let obj = self.expr(object, None)?;
                match obj.ty {
                    ScalarType::Node => {
                        if name.name == "level" {
                            return Err(TypeError::new(name.span, "BFS level is read-only"));
                        }
                        let prop = self.prop_symbol(name, SymbolKind::NodeProperty)?;
                        Ok(Place::NodeProp { prop, node: obj })
                    }
                    ScalarType::Edge => {
                        if name.name == "weight" {
                            return Err(TypeError::new(name.span, "edge weights are read-only"));
                        }
                        let prop = self.prop_symbol(name, SymbolKind::EdgeProperty)?;
                        Ok(Place::EdgeProp { prop, edge: obj })
                    }
                    t => Err(TypeError::new(
                        object.span,
                        format!("property `{}` attached to a non-node value of type {t}", name.name),
                    )),
                }
            }
            _ => Err(TypeError::new(target.span, "not an assignable location")),
        }
    }

    fn place_type(&self, p: &Place) -> ScalarType {
        self.symbols[p.symbol()].ty.expect("places have value types")
    }

    fn prop_symbol(&self, name: &Ident, kind: SymbolKind) -> Result<SymbolId, TypeError> {
        let id = self
            .lookup(&name.name, name.span)
            .map_err(|_| TypeError::new(name.span, format!("undeclared property `{}`", name.name)))?;
        if self.symbols[id].kind != kind {
            return Err(TypeError::new(
                name.span,
                format!("`{}` is not a {}", name.name, kind.name()),
            ));
        }
        Ok(id)
    }

    fn bool_expr(&mut self, e: &Expr) -> Result<TExpr, TypeError> {
        let t = self.expr(e, Some(ScalarType::Bool))?;
        if t.ty != ScalarType::Bool {
            return Err(TypeError::new(e.span, format!("expected bool, found {}", t.ty)));
        }
        Ok(t)
    }

    fn expr(&mut self, e: &Expr, expected: Option<ScalarType>) -> Result<TExpr, TypeError> {
        let span = e.span;
        let mk = |kind, ty| Ok(TExpr { kind, ty, span });
        match &e.kind {
            ExprKind::Lit(Literal::Int(i)) => mk(TExprKind::Int(*i), ScalarType::Int),
            ExprKind::Lit(Literal::Float(f)) => mk(TExprKind::Float(*f), ScalarType::Double),
            ExprKind::Lit(Literal::Bool(b)) => mk(TExprKind::Bool(*b), ScalarType::Bool),
            ExprKind::Lit(Literal::Inf) => {
                let ty = expected.filter(|t| t.is_numeric()).unwrap_or(ScalarType::Int);
                mk(TExprKind::Inf, ty)
            }
            ExprKind::Var(name) => {
                let id = self.lookup(name, span)?;
                let s = &self.symbols[id];
                match s.kind {
                    SymbolKind::Scalar | SymbolKind::Node | SymbolKind::Edge => {
                        mk(TExprKind::Var(id), s.ty.expect("value symbol"))
                    }
                    SymbolKind::NodeProperty | SymbolKind::EdgeProperty => Err(TypeError::new(
                        span,
                        format!("property `{name}` used without a node; write `v.{name}`"),
                    )),
                    k => Err(TypeError::new(
                        span,
                        format!("{} `{name}` cannot be used as a value", k.name()),
                    )),
                }
            }
            ExprKind::Prop { object, name } => {
                let obj = self.expr(object, None)?;
                match obj.ty {
                    ScalarType::Node if name.name == "level" => {
                        if self.bfs_depth == 0 {
                            return Err(TypeError::new(
                                name.span,
                                "`level` is only available inside iterateInBFS/iterateInReverse",
                            ));
                        }
                        mk(TExprKind::Level(Box::new(obj)), ScalarType::Int)
                    }
                    ScalarType::Node => {
                        let prop = self.prop_symbol(name, SymbolKind::NodeProperty)?;
                        let ty = self.symbols[prop].ty.expect("property type");
                        mk(
                            TExprKind::NodeProp {
                                prop,
                                node: Box::new(obj),
                            },
                            ty,
                        )
                    }
                    ScalarType::Edge if name.name == "weight" => {
                        mk(TExprKind::EdgeWeight(Box::new(obj)), ScalarType::Int)
                    }
                    ScalarType::Edge => {
                        let prop = self.prop_symbol(name, SymbolKind::EdgeProperty)?;
                        let ty = self.symbols[prop].ty.expect("property type");
                        mk(
                            TExprKind::EdgeProp {
                                prop,
                                edge: Box::new(obj),
                            },
                            ty,
                        )
                    }
                    t => Err(TypeError::new(
                        object.span,
                        format!("property `{}` attached to a non-node value of type {t}", name.name),
                    )),
                }
            }
            ExprKind::Unary { op, operand } => {
                let x = self.expr(operand, expected)?;
                let ok = match op {
                    UnaryOp::Not => x.ty == ScalarType::Bool,
                    UnaryOp::Neg => x.ty.is_numeric(),
                };
                if !ok {
                    return Err(TypeError::new(
                        span,
                        format!(
                            "operator `{}` cannot be applied to {}",
                            if *op == UnaryOp::Not { "!" } else { "-" },
                            x.ty
                        ),
                    ));
                }
                let ty = x.ty;
                mk(
                    TExprKind::Unary {
                        op: *op,
                        operand: Box::new(x),
                    },
                    ty,
                )
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let hint = if op.is_logical() {
                    Some(ScalarType::Bool)
                } else {
                    expected.filter(|t| t.is_numeric())
                };
                let mut l = self.expr(lhs, hint)?;
                let mut r = self.expr(rhs, hint)?;
                if l.kind == TExprKind::Inf && r.ty.is_numeric() {
                    l.ty = r.ty;
                }
                if r.kind == TExprKind::Inf && l.ty.is_numeric() {
                    r.ty = l.ty;
                }
                let mismatch = || {
                    TypeError::new(
                        span,
                        format!("operator `{}` cannot combine {} and {}", op.symbol(), l.ty, r.ty),
                    )
                };
                let (operand_ty, result_ty) = if op.is_logical() {
                    if l.ty != ScalarType::Bool || r.ty != ScalarType::Bool {
                        return Err(mismatch());
                    }
                    (ScalarType::Bool, ScalarType::Bool)
                } else if op.is_relational() {
                    let t = if l.ty.is_numeric() && r.ty.is_numeric() {
                        ScalarType::promote(l.ty, r.ty)
                    } else if l.ty != r.ty && index_like(l.ty) && index_like(r.ty) {
                        ScalarType::promote(arith(l.ty), arith(r.ty))
                    } else if l.ty == r.ty
                        && (l.ty == ScalarType::Node
                            || (matches!(op, BinaryOp::Eq | BinaryOp::Ne)
                                && matches!(l.ty, ScalarType::Bool | ScalarType::Edge)))
                    {
                        l.ty
                    } else {
                        return Err(mismatch());
                    };
                    (t, ScalarType::Bool)
                } else {
                    if !arith(l.ty).is_numeric() || !arith(r.ty).is_numeric() {
                        return Err(mismatch());
                    }
                    let t = ScalarType::promote(arith(l.ty), arith(r.ty));
                    if *op == BinaryOp::Mod && !t.is_integral() {
                        return Err(mismatch());
                    }
                    (t, t)
                };
                mk(
                    TExprKind::Binary {
                        op: *op,
                        lhs: Box::new(l),
                        rhs: Box::new(r),
                        operand_ty,
                    },
                    result_ty,
                )
            }
            ExprKind::Call { receiver, method, args } => {
                let Some(recv) = receiver else {
                    return Err(TypeError::new(
                        method.span,
                        format!("unknown function `{}`", method.name),
                    ));
                };
                self.expect_graph(recv)?;
                let arity = |n: usize| -> Result<(), TypeError> {
                    if args.len() != n {
                        return Err(TypeError::new(
                            span,
                            format!("`{}` takes {n} argument(s), found {}", method.name, args.len()),
                        ));
                    }
                    Ok(())
                };
                let node_arg = |c: &mut Self, i: usize| -> Result<Box<TExpr>, TypeError> {
                    let a = c.expr(&args[i], Some(ScalarType::Node))?;
                    if a.ty != ScalarType::Node {
                        return Err(TypeError::new(a.span, format!("expected a node, found {}", a.ty)));
                    }
                    Ok(Box::new(a))
                };
                let (kind, ty) = match method.name.as_str() {
                    "num_nodes" => {
                        arity(0)?;
                        (TExprKind::NumNodes, ScalarType::Int)
                    }
                    "num_edges" => {
                        arity(0)?;
                        (TExprKind::NumEdges, ScalarType::Int)
                    }
                    "count_outNbrs" => {
                        arity(1)?;
                        (TExprKind::OutDegree(node_arg(self, 0)?), ScalarType::Int)
                    }
                    "count_inNbrs" => {
                        arity(1)?;
                        (TExprKind::InDegree(node_arg(self, 0)?), ScalarType::Int)
                    }
                    "is_an_edge" => {
                        arity(2)?;
                        (
                            TExprKind::IsEdge(node_arg(self, 0)?, node_arg(self, 1)?),
                            ScalarType::Bool,
                        )
                    }
                    "get_edge" => {
                        arity(2)?;
                        (
                            TExprKind::GetEdge(node_arg(self, 0)?, node_arg(self, 1)?),
                            ScalarType::Edge,
                        )
                    }
                    "minWt" => {
                        arity(0)?;
                        (TExprKind::MinWeight, ScalarType::Int)
                    }
                    "maxWt" => {
                        arity(0)?;
                        (TExprKind::MaxWeight, ScalarType::Int)
                    }
                    other => return Err(TypeError::new(method.span, format!("unknown graph method `{other}`"))),
                };
                mk(kind, ty)
            }
        }
    }
}

/// Nodes take part in arithmetic as ints.
fn arith(t: ScalarType) -> ScalarType {
    if t == ScalarType::Node {
        ScalarType::Int
    } else {
        t
    }
}

fn index_like(t: ScalarType) -> bool {
    t == ScalarType::Node || t.is_integral()
}

fn scalar_of(ty: &TypeExpr) -> Option<ScalarType> {
    Some(match ty {
        TypeExpr::Int => ScalarType::Int,
        TypeExpr::Long => ScalarType::Long,
        TypeExpr::Float => ScalarType::Float,
        TypeExpr::Double => ScalarType::Double,
        TypeExpr::Bool => ScalarType::Bool,
        TypeExpr::Node => ScalarType::Node,
        TypeExpr::Edge => ScalarType::Edge,
        _ => return None,
    })
}
