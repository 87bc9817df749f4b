//! Lowering of the typed tree to backend text.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    prelude, BackendKind, CodegenConfig, CodegenError, Direction, EmitUnit, KernelInfo, LaunchSite, Structure,
    TransferSite, BODY_END,
};
use crate::frontend::ast::{BinaryOp, MinMaxKind, ReduceOp, Span, UnaryOp};
use crate::semantic::*;

type Result<T> = std::result::Result<T, CodegenError>;

/// Indented lines of C-like text.
#[derive(Debug, Clone, Default)]
pub(crate) struct Code {
    lines: Vec<(usize, String)>,
    depth: usize,
}

impl Code {
    pub(crate) fn line(&mut self, s: impl Into<String>) {
        self.lines.push((self.depth, s.into()));
    }

    pub(crate) fn open(&mut self, head: impl AsRef<str>) {
        let head = head.as_ref();
        if head.is_empty() {
            self.line("{");
        } else {
            self.line(format!("{head} {{"));
        }
        self.depth += 1;
    }

    pub(crate) fn close(&mut self) {
        self.close_with("");
    }

    pub(crate) fn close_with(&mut self, tail: &str) {
        self.depth -= 1;
        self.line(format!("}}{tail}"));
    }

    fn else_branch(&mut self) {
        self.depth -= 1;
        self.line("} else {");
        self.depth += 1;
    }

    pub(crate) fn splice(&mut self, other: Code) {
        for (d, s) in other.lines {
            self.lines.push((self.depth + d, s));
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.lines.len()
    }

    pub(crate) fn render(&self, indent: usize) -> String {
        let mut out = String::new();
        for (d, s) in &self.lines {
            out.push_str(&" ".repeat(d * indent));
            out.push_str(s);
            out.push('\n');
        }
        out
    }
}

/// Identifiers the generated code uses for itself.
const RESERVED: &[&str] = &[
    "V",
    "E",
    "Q",
    "argc",
    "argv",
    "auto",
    "bfs_edge",
    "bfs_finished",
    "bfs_nbr",
    "bool",
    "break",
    "case",
    "char",
    "class",
    "const",
    "context",
    "continue",
    "default",
    "delete",
    "dests",
    "device",
    "do",
    "double",
    "else",
    "enum",
    "event",
    "extern",
    "false",
    "find_edge",
    "float",
    "for",
    "free",
    "global_size",
    "goto",
    "graph",
    "h",
    "hops_from_source",
    "i",
    "if",
    "inline",
    "input",
    "int",
    "level",
    "load_graph",
    "local_size",
    "long",
    "main",
    "malloc",
    "memcpy",
    "namespace",
    "new",
    "numBlocks",
    "numThreads",
    "NUM_THREADS",
    "offsets",
    "operator",
    "platform",
    "printf",
    "private",
    "program",
    "public",
    "queue",
    "register",
    "result",
    "return",
    "rev_offsets",
    "rev_srcs",
    "short",
    "signed",
    "sizeof",
    "source",
    "source_text",
    "static",
    "status",
    "std",
    "struct",
    "switch",
    "sycl",
    "template",
    "this",
    "true",
    "typedef",
    "union",
    "unsigned",
    "using",
    "virtual",
    "void",
    "volatile",
    "weights",
    "while",
];

const RESERVED_PREFIXES: &[&str] = &["cand_", "edge_", "tmp_", "cl_", "cuda", "atomic", "__"];

/// C identifiers for every symbol: reserved words and generator prefixes get
/// a `_` suffix, and shadowed names outside regions get their symbol id.
pub(crate) fn c_names(p: &AnnotatedProgram, device_prefix: &str) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(p.symbols.len());
    for s in &p.symbols {
        let mut name = s.name.clone();
        if RESERVED.contains(&name.as_str())
            || name.starts_with(device_prefix)
            || RESERVED_PREFIXES.iter().any(|pre| name.starts_with(pre))
            || name.ends_with("_next")
            || name.ends_with("_out")
        {
            name.push('_');
        }
        if s.region.is_none() {
            let n = seen.entry(name.clone()).or_insert(0);
            *n += 1;
            if *n > 1 {
                name = format!("{name}_{}", s.id);
            }
        }
        out.push(name);
    }
    out
}

pub(crate) fn host_ty(ty: ScalarType) -> &'static str {
    match ty {
        ScalarType::Int | ScalarType::Node | ScalarType::Edge => "int",
        ScalarType::Long => "long long",
        ScalarType::Float | ScalarType::Double => "double",
        ScalarType::Bool => "bool",
    }
}

fn inf_literal(ty: ScalarType) -> String {
    match ty {
        ScalarType::Long => format!("{}LL", inf_value_int(ty)),
        ScalarType::Float | ScalarType::Double => format!("{:?}", inf_value_float(ty)),
        _ => inf_value_int(ty).to_string(),
    }
}

fn float_literal(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn prec(op: BinaryOp) -> u8 {
    use BinaryOp::*;
    match op {
        Or => 1,
        And => 2,
        Eq | Ne => 3,
        Lt | Le | Gt | Ge => 4,
        Add | Sub => 5,
        Mul | Div | Mod => 6,
    }
}

fn op_text(op: BinaryOp) -> &'static str {
    use BinaryOp::*;
    match op {
        Add => "+",
        Sub => "-",
        Mul => "*",
        Div => "/",
        Mod => "%",
        Eq => "==",
        Ne => "!=",
        Lt => "<",
        Le => "<=",
        Gt => ">",
        Ge => ">=",
        And => "&&",
        Or => "||",
    }
}

const PRIMARY: u8 = 8;
const UNARY: u8 = 7;

fn paren(s: (String, u8), min: u8) -> String {
    if s.1 < min {
        format!("({})", s.0)
    } else {
        s.0
    }
}

/// Host array sizes, by element kind.
fn size_text(kind: SymbolKind) -> &'static str {
    if kind == SymbolKind::EdgeProperty {
        "E"
    } else {
        "V"
    }
}

fn graph_array_size(a: GraphArray) -> &'static str {
    match a {
        GraphArray::Offsets | GraphArray::RevOffsets => "(V + 1)",
        _ => "E",
    }
}

/// A symbol's host and device storage as seen by transfer code.
struct Item {
    host: String,
    dev: String,
    ty: ScalarType,
    /// `None` for scalars.
    size: Option<&'static str>,
}

pub(crate) struct Gen<'a> {
    p: &'a AnnotatedProgram,
    an: &'a Analyses,
    b: BackendKind,
    cfg: &'a CodegenConfig,
    unit: String,
    fn_name: String,
    names: Vec<String>,
    /// Non-local symbols that need a device buffer, in id order.
    device: BTreeSet<SymbolId>,
    /// Convergence properties: double-buffered on host and device.
    double_buffered: BTreeSet<SymbolId>,
    /// Property parameters whose host pointer is swapped; they get a local copy.
    swapped: BTreeSet<SymbolId>,
    /// Local property arrays allocated by the host function.
    locals: Vec<SymbolId>,
    has_bfs: bool,
    /// Convergence state while emitting a fixedPoint body: prop -> (flag, active).
    fused: BTreeMap<SymbolId, (SymbolId, bool)>,
    /// Neighbor-loop variables: (var, source node var, edge index name).
    edge_vars: Vec<(SymbolId, Option<SymbolId>, String)>,
    /// OpenACC reduction clauses for the region being emitted.
    acc_reductions: BTreeSet<(String, String)>,
    tmp: usize,
    kernels: Code,
    kernel_infos: Vec<KernelInfo>,
    transfers: Vec<(String, Direction, Option<usize>, usize)>,
    launches: Vec<(String, usize)>,
}

impl<'a> Gen<'a> {
    pub(crate) fn new(p: &'a AnnotatedProgram, an: &'a Analyses, b: BackendKind, cfg: &'a CodegenConfig) -> Self {
        let names = c_names(p, &cfg.device_var_prefix);
        let mut device = BTreeSet::new();
        for r in &an.transfers.regions {
            for &s in r.copy_in.iter().chain(&r.copy_out).chain(&r.device_only) {
                if p.symbols[s].region.is_none() {
                    device.insert(s);
                }
            }
        }
        let double_buffered: BTreeSet<SymbolId> = an.fixed_points.iter().filter_map(|f| f.property).collect();
        let mut swapped: BTreeSet<SymbolId> = double_buffered.clone();
        walk_stmts(&p.body, &mut |s| {
            if let TStmtKind::CopyProp { dst, src } = &s.kind {
                swapped.insert(*dst);
                swapped.insert(*src);
            }
        });
        swapped.retain(|s| p.symbols[*s].is_param);
        let locals = p
            .symbols
            .iter()
            .filter(|s| s.kind.is_property() && !s.is_param && s.region.is_none())
            .map(|s| s.id)
            .collect();
        let has_bfs = p.regions.iter().any(|r| r.kind == RegionKind::BfsForward);
        let mut fn_name = p.name.clone();
        if RESERVED.contains(&fn_name.as_str()) {
            fn_name.push('_');
        }
        let unit = cfg.program_name.clone().unwrap_or_else(|| p.name.to_ascii_lowercase());
        Gen {
            p,
            an,
            b,
            cfg,
            unit,
            fn_name,
            names,
            device,
            double_buffered,
            swapped,
            locals,
            has_bfs,
            fused: BTreeMap::new(),
            edge_vars: Vec::new(),
            acc_reductions: BTreeSet::new(),
            tmp: 0,
            kernels: Code::default(),
            kernel_infos: Vec::new(),
            transfers: Vec::new(),
            launches: Vec::new(),
        }
    }

    fn acc(&self) -> bool {
        self.b == BackendKind::OpenAcc
    }

    fn prefix(&self) -> &str {
        &self.cfg.device_var_prefix
    }

    fn unsupported(&self, construct: impl Into<String>, span: Span) -> CodegenError {
        CodegenError::UnsupportedConstruct {
            backend: self.b,
            construct: construct.into(),
            span,
        }
    }

    fn sym(&self, s: SymbolId) -> &Symbol {
        &self.p.symbols[s]
    }

    fn ty_of(&self, s: SymbolId) -> ScalarType {
        self.sym(s).ty.unwrap_or(ScalarType::Int)
    }

    fn fresh(&mut self, base: &str) -> String {
        let n = self.tmp;
        self.tmp += 1;
        format!("{base}_{n}")
    }

    fn kernel_name(&self, r: RegionId) -> String {
        format!("{}_kernel_{r}", self.fn_name)
    }

    /// Element type of a device pointer.
    fn dev_ty(&self, ty: ScalarType) -> &'static str {
        match (self.b, ty) {
            (BackendKind::OpenCl, ScalarType::Bool) => "char",
            (BackendKind::OpenCl, ScalarType::Long) => "long",
            _ => host_ty(ty),
        }
    }

    fn graph_name(&self) -> &str {
        self.p.graph.map(|g| self.names[g].as_str()).unwrap_or("g")
    }

    // ---- references ----

    fn var_ref(&self, s: SymbolId, dev: bool) -> String {
        let name = &self.names[s];
        if dev && !self.acc() && self.sym(s).region.is_none() {
            format!("{}{name}[0]", self.prefix())
        } else {
            name.clone()
        }
    }

    fn arr_ref(&self, s: SymbolId, dev: bool, next: bool) -> String {
        let mut name = self.names[s].clone();
        if next {
            name.push_str("_next");
        }
        if dev && !self.acc() {
            format!("{}{name}", self.prefix())
        } else {
            name
        }
    }

    fn garr(&self, a: GraphArray, dev: bool) -> String {
        if !dev {
            format!("{}.{}", self.graph_name(), a.name())
        } else if self.acc() {
            a.name().to_string()
        } else {
            format!("{}{}", self.prefix(), a.name())
        }
    }

    fn level_ref(&self, dev: bool) -> String {
        if dev && !self.acc() {
            format!("{}level", self.prefix())
        } else {
            "level".into()
        }
    }

    fn flag_ref(&self, name: &str, dev: bool) -> String {
        if dev && !self.acc() {
            format!("{}{name}[0]", self.prefix())
        } else {
            name.to_string()
        }
    }

    fn item(&self, s: SymbolId, next: bool) -> Item {
        let sym = self.sym(s);
        let mut host = self.names[s].clone();
        if next {
            host.push_str("_next");
        }
        let dev = format!("{}{host}", self.prefix());
        let size = sym.kind.is_property().then(|| size_text(sym.kind));
        Item {
            host,
            dev,
            ty: self.ty_of(s),
            size,
        }
    }

    fn items(&self, set: &BTreeSet<SymbolId>) -> Vec<Item> {
        let mut out = Vec::new();
        for &s in set {
            if self.sym(s).region.is_some() {
                continue;
            }
            out.push(self.item(s, false));
            if self.fused.contains_key(&s) {
                out.push(self.item(s, true));
            }
        }
        out
    }

    fn bytes(&self, ty: ScalarType, size: Option<&str>) -> String {
        match size {
            None => format!("sizeof({})", self.dev_ty(ty)),
            Some(n) => format!("sizeof({}) * {n}", self.dev_ty(ty)),
        }
    }

    // ---- expressions ----

    fn expr(&self, e: &TExpr, dev: bool) -> Result<String> {
        Ok(self.expr_p(e, dev)?.0)
    }

    fn cast_to(&self, e: &TExpr, ty: ScalarType, dev: bool) -> Result<(String, u8)> {
        let inner = self.expr_p(e, dev)?;
        if host_ty(e.ty) == host_ty(ty) || (e.ty.is_integral() && ty.is_integral() && ty != ScalarType::Long) {
            return Ok(inner);
        }
        if ty == ScalarType::Bool || e.ty == ScalarType::Bool {
            return Ok(inner);
        }
        Ok((format!("({}){}", self.dev_ty(ty), paren(inner, UNARY)), UNARY))
    }

    fn expr_p(&self, e: &TExpr, dev: bool) -> Result<(String, u8)> {
        use TExprKind as K;
        let prim = |s: String| Ok((s, PRIMARY));
        match &e.kind {
            K::Int(i) => {
                let s = if *i > i32::MAX as i64 || *i < i32::MIN as i64 {
                    format!("{i}LL")
                } else {
                    i.to_string()
                };
                if *i < 0 {
                    Ok((s, UNARY))
                } else {
                    prim(s)
                }
            }
            K::Float(x) => {
                let s = float_literal(*x);
                if *x < 0.0 {
                    Ok((s, UNARY))
                } else {
                    prim(s)
                }
            }
            K::Bool(b) => prim(b.to_string()),
            K::Inf => prim(inf_literal(e.ty)),
            K::Var(s) => prim(self.var_ref(*s, dev)),
            K::NodeProp { prop, node } => prim(format!(
                "{}[{}]",
                self.arr_ref(*prop, dev, false),
                self.expr(node, dev)?
            )),
            K::EdgeProp { prop, edge } => prim(format!(
                "{}[{}]",
                self.arr_ref(*prop, dev, false),
                self.expr(edge, dev)?
            )),
            K::EdgeWeight(x) => prim(format!(
                "{}[{}]",
                self.garr(GraphArray::Weights, dev),
                self.expr(x, dev)?
            )),
            K::Level(x) => prim(format!("{}[{}]", self.level_ref(dev), self.expr(x, dev)?)),
            K::Unary { op, operand } => {
                let inner = self.expr_p(operand, dev)?;
                let text = paren(inner, UNARY);
                Ok(match op {
                    UnaryOp::Not => (format!("!{text}"), UNARY),
                    UnaryOp::Neg if text.starts_with('-') => (format!("-({text})"), UNARY),
                    UnaryOp::Neg => (format!("-{text}"), UNARY),
                })
            }
            K::Binary {
                op,
                lhs,
                rhs,
                operand_ty,
            } => {
                let p = prec(*op);
                let l = paren(self.cast_to(lhs, *operand_ty, dev)?, p);
                let r = paren(self.cast_to(rhs, *operand_ty, dev)?, p + 1);
                Ok((format!("{l} {} {r}", op_text(*op)), p))
            }
            K::NumNodes => prim("V".into()),
            K::NumEdges => prim("E".into()),
            K::OutDegree(x) | K::InDegree(x) => {
                let arr = if matches!(e.kind, K::OutDegree(_)) {
                    GraphArray::Offsets
                } else {
                    GraphArray::RevOffsets
                };
                let a = self.garr(arr, dev);
                let n = paren(self.expr_p(x, dev)?, 6);
                prim(format!("({a}[{n} + 1] - {a}[{n}])"))
            }
            K::IsEdge(a, b) => prim(format!("({} >= 0)", self.find_edge(a, b, dev)?)),
            K::GetEdge(a, b) => {
                if let (K::Var(x), K::Var(y)) = (&a.kind, &b.kind) {
                    if let Some((_, _, name)) = self
                        .edge_vars
                        .iter()
                        .rev()
                        .find(|(v, from, _)| v == y && *from == Some(*x))
                    {
                        return prim(name.clone());
                    }
                }
                prim(self.find_edge(a, b, dev)?)
            }
            K::MinWeight | K::MaxWeight if dev => {
                Err(self.unsupported("min/max edge weight inside a parallel region", e.span))
            }
            K::MinWeight => prim(format!("graph_min_weight({})", self.graph_name())),
            K::MaxWeight => prim(format!("graph_max_weight({})", self.graph_name())),
        }
    }

    fn find_edge(&self, a: &TExpr, b: &TExpr, dev: bool) -> Result<String> {
        Ok(format!(
            "find_edge({}, {}, {}, {})",
            self.garr(GraphArray::Offsets, dev),
            self.garr(GraphArray::Dests, dev),
            self.expr(a, dev)?,
            self.expr(b, dev)?
        ))
    }

    fn place_ref(&self, place: &Place, dev: bool) -> Result<String> {
        Ok(match place {
            Place::Var(s) => self.var_ref(*s, dev),
            Place::NodeProp { prop, node: i } | Place::EdgeProp { prop, edge: i } => {
                format!("{}[{}]", self.arr_ref(*prop, dev, false), self.expr(i, dev)?)
            }
        })
    }

    fn is_local(&self, s: SymbolId) -> bool {
        self.sym(s).region.is_some()
    }

    // ---- writes ----

    /// Plain store of `value`; convergence properties go to their next
    /// buffer and clear the flag when the active value is written.
    fn write(&mut self, c: &mut Code, place: &Place, value: &TExpr, dev: bool, atomic: bool) -> Result<()> {
        let ty = self.ty_of(place.symbol());
        let v = paren(self.cast_to(value, ty, dev)?, 0);
        self.write_text(c, place, v, value_literal(value), dev, atomic)
    }

    fn write_text(
        &mut self,
        c: &mut Code,
        place: &Place,
        v: String,
        literal: Option<bool>,
        dev: bool,
        atomic: bool,
    ) -> Result<()> {
        let s = place.symbol();
        let acc_atomic = dev && atomic && self.acc() && !self.is_local(s);
        if let (Some(&(flag, active)), Some(idx)) = (self.fused.get(&s), place.index()) {
            let target = format!("{}[{}]", self.arr_ref(s, dev, true), self.expr(idx, dev)?);
            let flag = self.var_ref(flag, dev);
            match literal {
                Some(b) => {
                    if acc_atomic {
                        c.line("#pragma acc atomic write");
                    }
                    c.line(format!("{target} = {v};"));
                    if b == active {
                        c.line(format!("{flag} = false;"));
                    }
                }
                None => {
                    let t = self.fresh("tmp");
                    c.line(format!("bool {t} = {v};"));
                    if acc_atomic {
                        c.line("#pragma acc atomic write");
                    }
                    c.line(format!("{target} = {t};"));
                    let cond = if active { t } else { format!("!{t}") };
                    c.line(format!("if ({cond}) {flag} = false;"));
                }
            }
            if dev && self.acc() {
                self.acc_reductions
                    .insert(("&&".into(), self.names[self.fused[&s].0].clone()));
            }
            return Ok(());
        }
        let target = self.place_ref(place, dev)?;
        if acc_atomic {
            c.line("#pragma acc atomic write");
        }
        c.line(format!("{target} = {v};"));
        Ok(())
    }

    // ---- statements ----

    fn block(&mut self, c: &mut Code, stmts: &[TStmt], dev: bool) -> Result<()> {
        for s in stmts {
            if dev {
                self.dev_stmt(c, s)?;
            } else {
                self.host_stmt(c, s)?;
            }
        }
        Ok(())
    }

    fn decl(&mut self, c: &mut Code, sym: SymbolId, init: &Option<TExpr>, dev: bool, span: Span) -> Result<()> {
        let s = self.sym(sym);
        match s.kind {
            SymbolKind::Scalar | SymbolKind::Node | SymbolKind::Edge => {
                let ty = self.ty_of(sym);
                let init = match init {
                    Some(e) => paren(self.cast_to(e, ty, dev)?, 0),
                    None if ty == ScalarType::Bool => "false".into(),
                    None if ty.is_floating() => "0.0".into(),
                    None => "0".into(),
                };
                c.line(format!("{} {} = {init};", host_ty(ty), self.names[sym]));
                Ok(())
            }
            SymbolKind::NodeProperty | SymbolKind::EdgeProperty if !dev => Ok(()),
            _ => Err(self.unsupported(format!("declaration of {}", s.kind.name()), span)),
        }
    }

    fn dev_stmt(&mut self, c: &mut Code, s: &TStmt) -> Result<()> {
        match &s.kind {
            TStmtKind::Decl { sym, init } => self.decl(c, *sym, init, true, s.span),
            TStmtKind::Assign { place, value } => self.write(c, place, value, true, false),
            TStmtKind::Reduce { place, op, value } => self.dev_reduce(c, place, *op, value, s.span),
            TStmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                ..
            } => self.nested_loop(c, *var, domain, filter.as_ref(), body, true, s.span),
            TStmtKind::If {
                cond,
                then_body,
                else_body,
            } => self.if_stmt(c, cond, then_body, else_body, true),
            TStmtKind::MinMax {
                kind,
                targets,
                candidate,
                attached,
            } => self.dev_minmax(c, *kind, targets, candidate, attached, s.span),
            _ => Err(self.unsupported("this statement inside a parallel region", s.span)),
        }
    }

    fn host_stmt(&mut self, c: &mut Code, s: &TStmt) -> Result<()> {
        match &s.kind {
            TStmtKind::Decl { sym, init } => self.decl(c, *sym, init, false, s.span),
            TStmtKind::Assign { place, value } => self.write(c, place, value, false, false),
            TStmtKind::CopyProp { dst, src } => {
                let (d, r) = (&self.names[*dst], &self.names[*src]);
                c.line(format!("std::swap({d}, {r});"));
                if !self.acc() && self.device.contains(dst) && self.device.contains(src) {
                    let pre = self.prefix();
                    c.line(format!("std::swap({pre}{d}, {pre}{r});"));
                }
                Ok(())
            }
            TStmtKind::Reduce { place, op, value } => {
                if self.fused.contains_key(&place.symbol()) {
                    return Err(self.unsupported("reduction on a convergence property", s.span));
                }
                let t = self.place_ref(place, false)?;
                let v = self.expr(value, false)?;
                c.line(plain_reduce(&t, *op, &v));
                Ok(())
            }
            TStmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                region,
                ..
            } => match region {
                Some(r) => self.region_forall(c, *r, *var, domain, filter.as_ref(), body, s.span),
                None => self.nested_loop(c, *var, domain, filter.as_ref(), body, false, s.span),
            },
            TStmtKind::FixedPoint {
                id,
                flag,
                convergence,
                body,
            } => self.fixed_point(c, *id, *flag, convergence, body),
            TStmtKind::Bfs {
                var,
                root,
                body,
                region,
                reverse,
            } => self.bfs(c, *var, root, body, *region, reverse.as_ref()),
            TStmtKind::If {
                cond,
                then_body,
                else_body,
            } => self.if_stmt(c, cond, then_body, else_body, false),
            TStmtKind::MinMax {
                kind,
                targets,
                candidate,
                attached,
            } => self.host_minmax(c, *kind, targets, candidate, attached),
            TStmtKind::Attach { inits } => {
                let mut nodes = Vec::new();
                let mut edges = Vec::new();
                for (sym, e) in inits {
                    let v = paren(self.cast_to(e, self.ty_of(*sym), false)?, 0);
                    let line = format!("{}[i] = {v};", self.names[*sym]);
                    if self.sym(*sym).kind == SymbolKind::EdgeProperty {
                        edges.push(line);
                    } else {
                        nodes.push(line);
                    }
                }
                for (lines, n) in [(nodes, "V"), (edges, "E")] {
                    if lines.is_empty() {
                        continue;
                    }
                    c.open(format!("for (int i = 0; i < {n}; i++)"));
                    for l in lines {
                        c.line(l);
                    }
                    c.close();
                }
                Ok(())
            }
            TStmtKind::Return(e) => {
                c.open("");
                match e {
                    Some(e) => {
                        let ty = self.p.return_type.unwrap_or(e.ty);
                        let v = paren(self.cast_to(e, ty, false)?, 0);
                        c.line(format!("{} result = {v};", host_ty(ty)));
                        self.cleanup(c);
                        c.line("return result;");
                    }
                    None => {
                        self.cleanup(c);
                        c.line("return;");
                    }
                }
                c.close();
                Ok(())
            }
        }
    }

    fn if_stmt(
        &mut self,
        c: &mut Code,
        cond: &TExpr,
        then_body: &[TStmt],
        else_body: &[TStmt],
        dev: bool,
    ) -> Result<()> {
        c.open(format!("if ({})", self.expr(cond, dev)?));
        self.block(c, then_body, dev)?;
        if !else_body.is_empty() {
            c.else_branch();
            self.block(c, else_body, dev)?;
        }
        c.close();
        Ok(())
    }

    /// A sequential loop: any loop on the host, or a loop nested in a region.
    #[allow(clippy::too_many_arguments)]
    fn nested_loop(
        &mut self,
        c: &mut Code,
        var: SymbolId,
        domain: &TDomain,
        filter: Option<&TExpr>,
        body: &[TStmt],
        dev: bool,
        span: Span,
    ) -> Result<()> {
        let v = self.names[var].clone();
        let mut pushed = false;
        match domain {
            TDomain::Nodes => c.open(format!("for (int {v} = 0; {v} < V; {v}++)")),
            TDomain::Neighbors(of) | TDomain::NodesTo(of) => {
                let (off, dst) = if matches!(domain, TDomain::Neighbors(_)) {
                    (GraphArray::Offsets, GraphArray::Dests)
                } else {
                    (GraphArray::RevOffsets, GraphArray::RevSrcs)
                };
                let (off, dst) = (self.garr(off, dev), self.garr(dst, dev));
                let n = paren(self.expr_p(of, dev)?, 6);
                let e = format!("edge_{v}");
                c.open(format!("for (int {e} = {off}[{n}]; {e} < {off}[{n} + 1]; {e}++)"));
                c.line(format!("int {v} = {dst}[{e}];"));
                if matches!(domain, TDomain::Neighbors(_)) {
                    let from = match &of.kind {
                        TExprKind::Var(x) => Some(*x),
                        _ => None,
                    };
                    self.edge_vars.push((var, from, e));
                    pushed = true;
                }
            }
            TDomain::Set(s) if !dev => c.open(format!("for (int {v} : {})", self.names[*s])),
            TDomain::Set(_) => return Err(self.unsupported("iteration over a node set inside a parallel region", span)),
        }
        let filtered = match filter {
            Some(f) => {
                c.open(format!("if ({})", self.expr(f, dev)?));
                true
            }
            None => false,
        };
        self.block(c, body, dev)?;
        if filtered {
            c.close();
        }
        c.close();
        if pushed {
            self.edge_vars.pop();
        }
        Ok(())
    }

    fn dev_reduce(&mut self, c: &mut Code, place: &Place, op: ReduceOp, value: &TExpr, span: Span) -> Result<()> {
        let s = place.symbol();
        if self.fused.contains_key(&s) {
            return Err(self.unsupported("reduction on a convergence property", span));
        }
        let ty = self.ty_of(s);
        let t = self.place_ref(place, true)?;
        let v = paren(self.cast_to(value, ty, true)?, 0);
        if self.is_local(s) {
            c.line(plain_reduce(&t, op, &v));
            return Ok(());
        }
        let scalar = matches!(place, Place::Var(_));
        if matches!(op, ReduceOp::All | ReduceOp::Any) {
            if self.acc() && scalar {
                let sym = if op == ReduceOp::All { "&&" } else { "||" };
                self.acc_reductions.insert((sym.into(), t.clone()));
                c.line(plain_reduce(&t, op, &v));
                return Ok(());
            }
            let (cond, val) = if op == ReduceOp::All {
                (format!("!({v})"), "false")
            } else {
                (v, "true")
            };
            c.open(format!("if ({cond})"));
            if self.acc() {
                c.line("#pragma acc atomic write");
            }
            c.line(format!("{t} = {val};"));
            c.close();
            return Ok(());
        }
        let product = op == ReduceOp::Product;
        let emulate = self.cfg.float_atomics_emulation && ty.is_floating();
        let line = match self.b {
            BackendKind::Cuda if product => format!("atomicMul(&{t}, {v});"),
            BackendKind::Cuda if emulate => format!("atomicAddCas(&{t}, {v});"),
            BackendKind::Cuda if ty == ScalarType::Long => {
                format!("atomicAdd((unsigned long long*)&{t}, (unsigned long long)({v}));")
            }
            BackendKind::Cuda => format!("atomicAdd(&{t}, {v});"),
            BackendKind::Sycl if product => format!("atomic_mul<{}>({t}, {v});", host_ty(ty)),
            BackendKind::Sycl if emulate => format!("atomic_add_cas<{}>({t}, {v});", host_ty(ty)),
            BackendKind::Sycl => format!("atomic_ref_t<{}>({t}).fetch_add({v});", host_ty(ty)),
            BackendKind::OpenCl => {
                let suffix = cl_suffix(ty);
                match (product, ty) {
                    (true, _) => format!("cmpxchg_mul_{suffix}(&{t}, {v});"),
                    (false, ScalarType::Long) => format!("atom_add(&{t}, {v});"),
                    (false, t2) if t2.is_floating() => format!("cmpxchg_add_double(&{t}, {v});"),
                    _ => format!("atomic_add(&{t}, {v});"),
                }
            }
            BackendKind::OpenAcc => {
                let line = plain_reduce(&t, op, &v);
                if scalar {
                    let sym = if product { "*" } else { "+" };
                    self.acc_reductions.insert((sym.into(), t.clone()));
                } else {
                    c.line("#pragma acc atomic update");
                }
                line
            }
        };
        c.line(line);
        Ok(())
    }

    fn dev_minmax(
        &mut self,
        c: &mut Code,
        kind: MinMaxKind,
        targets: &[Place],
        candidate: &TExpr,
        attached: &[TExpr],
        span: Span,
    ) -> Result<()> {
        let s0 = targets[0].symbol();
        let ty = self.ty_of(s0);
        if ty == ScalarType::Bool {
            return Err(self.unsupported("Min/Max on a bool target", span));
        }
        if self.fused.contains_key(&s0) {
            return Err(self.unsupported("Min/Max on a convergence property", span));
        }
        let t0 = self.place_ref(&targets[0], true)?;
        let cand_text = paren(self.cast_to(candidate, ty, true)?, 0);
        let worse = if kind == MinMaxKind::Min { ">" } else { "<" };
        let scalar = matches!(targets[0], Place::Var(_));
        if self.is_local(s0) || (self.acc() && scalar) {
            if !self.is_local(s0) {
                if !attached.is_empty() {
                    return Err(self.unsupported("Min/Max with attached writes on a scalar", span));
                }
                let op = if kind == MinMaxKind::Min { "min" } else { "max" };
                self.acc_reductions.insert((op.into(), t0.clone()));
            }
            let cand = self.fresh("cand");
            c.line(format!("{} {cand} = {cand_text};", host_ty(ty)));
            c.open(format!("if ({t0} {worse} {cand})"));
            c.line(format!("{t0} = {cand};"));
            self.attached(c, targets, attached, true)?;
            c.close();
            return Ok(());
        }
        if self.acc() {
            let cand = self.fresh("cand");
            c.line(format!("{} {cand} = {cand_text};", host_ty(ty)));
            c.open(format!("if ({t0} {worse} {cand})"));
            c.line("#pragma acc atomic write");
            c.line(format!("{t0} = {cand};"));
            self.attached(c, targets, attached, true)?;
            c.close();
            return Ok(());
        }
        let op = if kind == MinMaxKind::Min { "min" } else { "max" };
        let b = self.b;
        let call = move |x: &str| match b {
            BackendKind::Cuda => format!("atomic{}(&{t0}, {x})", if op == "min" { "Min" } else { "Max" }),
            BackendKind::Sycl => format!("atomic_ref_t<{}>({t0}).fetch_{op}({x})", host_ty(ty)),
            _ => format!("cmpxchg_{op}_{}(&{t0}, {x})", cl_suffix(ty)),
        };
        if attached.is_empty() {
            c.line(format!("{};", call(&cand_text)));
            return Ok(());
        }
        let cand = self.fresh("cand");
        c.line(format!("{} {cand} = {cand_text};", self.dev_ty(ty)));
        c.open(format!("if ({} {worse} {cand})", call(&cand)));
        self.attached(c, targets, attached, true)?;
        c.close();
        Ok(())
    }

    fn attached(&mut self, c: &mut Code, targets: &[Place], attached: &[TExpr], dev: bool) -> Result<()> {
        for (place, value) in targets[1..].iter().zip(attached) {
            self.write(c, place, value, dev, true)?;
        }
        Ok(())
    }

    fn host_minmax(
        &mut self,
        c: &mut Code,
        kind: MinMaxKind,
        targets: &[Place],
        candidate: &TExpr,
        attached: &[TExpr],
    ) -> Result<()> {
        let ty = self.ty_of(targets[0].symbol());
        let t0 = self.place_ref(&targets[0], false)?;
        let cand = self.fresh("cand");
        let text = paren(self.cast_to(candidate, ty, false)?, 0);
        c.line(format!("{} {cand} = {text};", host_ty(ty)));
        let worse = if kind == MinMaxKind::Min { ">" } else { "<" };
        c.open(format!("if ({t0} {worse} {cand})"));
        c.line(format!("{t0} = {cand};"));
        self.attached(c, targets, attached, false)?;
        c.close();
        Ok(())
    }

    // ---- transfers ----

    fn transfer(&mut self, c: &mut Code, item: &Item, dir: Direction, scope: Option<usize>) {
        let host = if item.size.is_some() {
            item.host.clone()
        } else {
            format!("&{}", item.host)
        };
        let bytes = self.bytes(item.ty, item.size);
        let dev = &item.dev;
        let line = match (self.b, dir) {
            (BackendKind::Cuda, Direction::HostToDevice) => {
                format!("cudaMemcpy({dev}, {host}, {bytes}, cudaMemcpyHostToDevice);")
            }
            (BackendKind::Cuda, Direction::DeviceToHost) => {
                format!("cudaMemcpy({host}, {dev}, {bytes}, cudaMemcpyDeviceToHost);")
            }
            (BackendKind::Sycl, Direction::HostToDevice) => format!("Q.memcpy({dev}, {host}, {bytes}).wait();"),
            (BackendKind::Sycl, Direction::DeviceToHost) => format!("Q.memcpy({host}, {dev}, {bytes}).wait();"),
            (BackendKind::OpenCl, Direction::HostToDevice) => {
                format!("clEnqueueWriteBuffer(queue, {dev}, CL_TRUE, 0, {bytes}, {host}, 0, NULL, NULL);")
            }
            (BackendKind::OpenCl, Direction::DeviceToHost) => {
                format!("clEnqueueReadBuffer(queue, {dev}, CL_TRUE, 0, {bytes}, {host}, 0, NULL, NULL);")
            }
            (BackendKind::OpenAcc, _) => unreachable!("OpenACC moves data with clauses"),
        };
        self.transfers.push((item.host.clone(), dir, scope, c.len()));
        c.line(line);
    }

    fn acc_item(item: &Item) -> String {
        match item.size {
            Some(n) => format!("{}[0:{n}]", item.host),
            None => item.host.clone(),
        }
    }

    fn scope_begin(&mut self, c: &mut Code, id: usize) {
        let sc = &self.an.transfers.scopes[id];
        let regions: Vec<String> = sc.regions.iter().map(|r| r.to_string()).collect();
        c.line(format!("// transfer scope {id}: regions {}", regions.join(", ")));
        let ins = self.items(&sc.copy_in);
        if !self.acc() {
            for item in &ins {
                self.transfer(c, item, Direction::HostToDevice, Some(id));
            }
            return;
        }
        let outs = self.items(&sc.copy_out);
        let in_names: BTreeSet<&str> = ins.iter().map(|i| i.host.as_str()).collect();
        let out_names: BTreeSet<&str> = outs.iter().map(|i| i.host.as_str()).collect();
        let mut copyin = Vec::new();
        let mut copy = Vec::new();
        let mut copyout = Vec::new();
        let mut create = Vec::new();
        let line = c.len();
        for item in &ins {
            let dirs: &[Direction] = if out_names.contains(item.host.as_str()) {
                copy.push(Self::acc_item(item));
                &[Direction::HostToDevice, Direction::DeviceToHost]
            } else {
                copyin.push(Self::acc_item(item));
                &[Direction::HostToDevice]
            };
            for d in dirs {
                self.transfers.push((item.host.clone(), *d, Some(id), line));
            }
        }
        for item in outs.iter().filter(|i| !in_names.contains(i.host.as_str())) {
            copyout.push(Self::acc_item(item));
            self.transfers
                .push((item.host.clone(), Direction::DeviceToHost, Some(id), line));
        }
        let only: BTreeSet<SymbolId> = sc
            .device_only
            .iter()
            .copied()
            .filter(|s| !sc.copy_in.contains(s) && !sc.copy_out.contains(s))
            .collect();
        for item in self.items(&only) {
            create.push(Self::acc_item(&item));
        }
        let bfs = sc
            .regions
            .iter()
            .any(|r| self.p.regions[*r].kind == RegionKind::BfsForward);
        if bfs {
            create.push("level[0:V]".into());
        }
        let mut pragma = "#pragma acc data".to_string();
        for (name, list) in [
            ("copyin", copyin),
            ("copy", copy),
            ("copyout", copyout),
            ("create", create),
        ] {
            if !list.is_empty() {
                pragma.push_str(&format!(" {name}({})", list.join(", ")));
            }
        }
        if pragma.len() > "#pragma acc data".len() {
            c.line(pragma);
        }
        c.open("");
    }

    fn scope_end(&mut self, c: &mut Code, id: usize) {
        if self.acc() {
            c.close();
        } else {
            let outs = self.items(&self.an.transfers.scopes[id].copy_out);
            for item in &outs {
                self.transfer(c, item, Direction::DeviceToHost, Some(id));
            }
        }
        c.line(format!("// end transfer scope {id}"));
    }

    fn scope_id(&self, r: RegionId) -> usize {
        self.an
            .transfers
            .scope_of(r)
            .map(|s| s.id)
            .expect("every region belongs to a transfer scope")
    }

    fn scope_first(&self, r: RegionId) -> bool {
        self.an.transfers.scopes[self.scope_id(r)].regions.first() == Some(&r)
    }

    fn scope_last(&self, r: RegionId) -> bool {
        self.an.transfers.scopes[self.scope_id(r)].regions.last() == Some(&r)
    }

    // ---- regions ----

    #[allow(clippy::too_many_arguments)]
    fn region_forall(
        &mut self,
        c: &mut Code,
        r: RegionId,
        var: SymbolId,
        domain: &TDomain,
        filter: Option<&TExpr>,
        body: &[TStmt],
        span: Span,
    ) -> Result<()> {
        if *domain != TDomain::Nodes {
            return Err(self.unsupported("a parallel region over anything but g.nodes()", span));
        }
        if self.scope_first(r) {
            let id = self.scope_id(r);
            self.scope_begin(c, id);
        }
        self.acc_reductions.clear();
        let mut k = Code::default();
        if let Some(f) = filter {
            k.open(format!("if ({})", self.expr(f, true)?));
        }
        self.block(&mut k, body, true)?;
        if filter.is_some() {
            k.close();
        }
        self.launch(c, r, var, k, false);
        if self.scope_last(r) {
            let id = self.scope_id(r);
            self.scope_end(c, id);
        }
        Ok(())
    }

    /// Kernel parameters: (declaration, host argument).
    fn kernel_params(&self, r: RegionId, bfs_forward: bool) -> Vec<(String, String)> {
        let rt = &self.an.transfers.regions[r];
        let ptr = |ty: ScalarType, name: &str| match self.b {
            BackendKind::OpenCl => format!("__global {}* {name}", self.dev_ty(ty)),
            _ => format!("{}* {name}", self.dev_ty(ty)),
        };
        let mut out = vec![("int V".to_string(), "V".to_string())];
        let mut uses_e = false;
        let mut probe = |e: &TExpr| {
            e.visit(&mut |x| uses_e |= matches!(x.kind, TExprKind::NumEdges));
        };
        let body = region_body(&self.p.body, r);
        walk_stmts(body.0, &mut |s| stmt_exprs(s).into_iter().for_each(&mut probe));
        body.1.iter().for_each(|e| probe(e));
        if uses_e {
            out.push(("int E".into(), "E".into()));
        }
        let pre = self.prefix();
        for a in &rt.graph_arrays {
            let n = format!("{pre}{}", a.name());
            out.push((ptr(ScalarType::Int, &n), n));
        }
        if rt.kind != RegionKind::ForAll {
            let n = format!("{pre}level");
            out.push((ptr(ScalarType::Int, &n), n));
            out.push(("int hops_from_source".into(), "hops_from_source".into()));
            if bfs_forward {
                let n = format!("{pre}bfs_finished");
                out.push((ptr(ScalarType::Bool, &n), n));
            }
        }
        let syms: BTreeSet<SymbolId> = rt
            .copy_in
            .iter()
            .chain(&rt.copy_out)
            .chain(&rt.device_only)
            .copied()
            .filter(|s| !self.is_local(*s))
            .collect();
        for s in syms {
            let ty = self.ty_of(s);
            let n = format!("{pre}{}", self.names[s]);
            out.push((ptr(ty, &n), n.clone()));
            if self.fused.contains_key(&s) {
                let n = format!("{n}_next");
                out.push((ptr(ty, &n), n));
            }
        }
        out
    }

    /// Wraps a per-element body `k` into the backend's kernel form and emits
    /// the launch.
    fn launch(&mut self, c: &mut Code, r: RegionId, var: SymbolId, k: Code, bfs_forward: bool) {
        let name = self.kernel_name(r);
        let v = self.names[var].clone();
        let params = self.kernel_params(r, bfs_forward);
        self.kernel_infos.push(KernelInfo {
            name: name.clone(),
            region: r,
            params: params.iter().map(|(_, a)| a.clone()).collect(),
        });
        let decls: Vec<&str> = params.iter().map(|(d, _)| d.as_str()).collect();
        let args: Vec<&str> = params.iter().map(|(_, a)| a.as_str()).collect();
        match self.b {
            BackendKind::Cuda => {
                let kc = &mut self.kernels;
                kc.open(format!("__global__ void {name}({})", decls.join(", ")));
                kc.line(format!("int {v} = blockIdx.x * blockDim.x + threadIdx.x;"));
                kc.line(format!("if ({v} >= V) return;"));
                kc.splice(k);
                kc.close();
                kc.line("");
                self.launches.push((name.clone(), c.len()));
                c.line(format!("{name}<<<numBlocks, numThreads>>>({});", args.join(", ")));
                c.line("cudaDeviceSynchronize();");
            }
            BackendKind::OpenCl => {
                let kc = &mut self.kernels;
                kc.open(format!("__kernel void {name}({})", decls.join(", ")));
                kc.open(format!(
                    "for (int {v} = get_global_id(0); {v} < V; {v} += get_global_size(0))"
                ));
                kc.splice(k);
                kc.close();
                kc.close();
                kc.line("");
                for (i, (d, a)) in params.iter().enumerate() {
                    let size = if d.contains('*') {
                        "sizeof(cl_mem)"
                    } else {
                        "sizeof(int)"
                    };
                    c.line(format!("clSetKernelArg({name}, {i}, {size}, &{a});"));
                }
                self.launches.push((name.clone(), c.len()));
                c.line(format!(
                    "clEnqueueNDRangeKernel(queue, {name}, 1, NULL, &global_size, NULL, 0, NULL, &event);"
                ));
                c.line("clWaitForEvents(1, &event);");
            }
            BackendKind::Sycl => {
                self.launches.push((name.clone(), c.len()));
                c.line(format!("// {name}"));
                c.open("Q.submit([&](sycl::handler& h)");
                c.open("h.parallel_for(sycl::range<1>(NUM_THREADS), [=](sycl::id<1> i)");
                c.open(format!("for (int {v} = i[0]; {v} < V; {v} += NUM_THREADS)"));
                c.splice(k);
                c.close();
                c.close_with(");");
                c.close_with(").wait();");
            }
            BackendKind::OpenAcc => {
                self.launches.push((name.clone(), c.len()));
                c.line(format!("// {name}"));
                let mut pragma = "#pragma acc parallel loop".to_string();
                for (op, x) in std::mem::take(&mut self.acc_reductions) {
                    pragma.push_str(&format!(" reduction({op}:{x})"));
                }
                c.line(pragma);
                c.open(format!("for (int {v} = 0; {v} < V; {v}++)"));
                c.splice(k);
                c.close();
            }
        }
    }

    fn bfs(
        &mut self,
        c: &mut Code,
        var: SymbolId,
        root: &TExpr,
        body: &[TStmt],
        region: RegionId,
        reverse: Option<&ReverseBlock>,
    ) -> Result<()> {
        let scope = self.scope_id(region);
        let last = reverse.map_or(region, |r| r.region);
        if self.scope_first(region) {
            self.scope_begin(c, scope);
        }
        let v = self.names[var].clone();
        let root = self.expr(root, false)?;
        if self.acc() {
            c.line("#pragma acc parallel loop");
        }
        c.open("for (int i = 0; i < V; i++)");
        c.line(format!("level[i] = (i == {root}) ? 0 : -1;"));
        c.close();
        if !self.acc() {
            let level = self.level_item();
            self.transfer(c, &level, Direction::HostToDevice, None);
        }
        c.line("hops_from_source = 0;");
        c.open("do");
        c.line("bfs_finished = true;");
        let flag = Item {
            host: "bfs_finished".into(),
            dev: format!("{}bfs_finished", self.prefix()),
            ty: ScalarType::Bool,
            size: None,
        };
        if !self.acc() {
            self.transfer(c, &flag, Direction::HostToDevice, None);
        }
        self.acc_reductions.clear();
        let mut k = Code::default();
        let level = self.level_ref(true);
        let (off, dst) = (self.garr(GraphArray::Offsets, true), self.garr(GraphArray::Dests, true));
        k.open(format!("if ({level}[{v}] == hops_from_source)"));
        k.open(format!(
            "for (int bfs_edge = {off}[{v}]; bfs_edge < {off}[{v} + 1]; bfs_edge++)"
        ));
        k.line(format!("int bfs_nbr = {dst}[bfs_edge];"));
        k.open(format!("if ({level}[bfs_nbr] == -1)"));
        if self.acc() {
            k.line("#pragma acc atomic write");
        }
        k.line(format!("{level}[bfs_nbr] = hops_from_source + 1;"));
        k.line(format!("{} = false;", self.flag_ref("bfs_finished", true)));
        k.close();
        k.close();
        if self.acc() {
            self.acc_reductions.insert(("&&".into(), "bfs_finished".into()));
        }
        self.block(&mut k, body, true)?;
        k.close();
        self.launch(c, region, var, k, true);
        if !self.acc() {
            self.transfer(c, &flag, Direction::DeviceToHost, None);
        }
        c.line("hops_from_source++;");
        c.close_with(" while (!bfs_finished);");
        if let Some(rev) = reverse {
            c.line("hops_from_source--;");
            c.open("while (hops_from_source >= 0)");
            self.acc_reductions.clear();
            let mut k = Code::default();
            let mut cond = format!("{level}[{v}] == hops_from_source");
            if let Some(f) = &rev.filter {
                cond = format!("{cond} && {}", paren(self.expr_p(f, true)?, 3));
            }
            k.open(format!("if ({cond})"));
            self.block(&mut k, &rev.body, true)?;
            k.close();
            self.launch(c, rev.region, var, k, false);
            c.line("hops_from_source--;");
            c.close();
        }
        if self.scope_last(last) {
            self.scope_end(c, scope);
        }
        Ok(())
    }

    fn level_item(&self) -> Item {
        Item {
            host: "level".into(),
            dev: format!("{}level", self.prefix()),
            ty: ScalarType::Int,
            size: Some("V"),
        }
    }

    fn fixed_point(
        &mut self,
        c: &mut Code,
        id: FixedPointId,
        flag: SymbolId,
        convergence: &Convergence,
        body: &[TStmt],
    ) -> Result<()> {
        let f = self.names[flag].clone();
        c.line(format!("// fixedPoint {id} until {f}"));
        c.open(format!("while (!{f})"));
        match convergence {
            Convergence::Property { prop, polarity } => {
                let active = polarity.active_value();
                let p = self.names[*prop].clone();
                let size = size_text(self.sym(*prop).kind);
                c.line(format!("{f} = true;"));
                c.open(format!("for (int i = 0; i < {size}; i++)"));
                c.line(format!("{p}_next[i] = {};", !active));
                c.close();
                let prev = self.fused.insert(*prop, (flag, active));
                self.block(c, body, false)?;
                match prev {
                    Some(x) => self.fused.insert(*prop, x),
                    None => self.fused.remove(prop),
                };
                c.line(format!("std::swap({p}, {p}_next);"));
                if !self.acc() && self.device.contains(prop) {
                    let pre = self.prefix();
                    c.line(format!("std::swap({pre}{p}, {pre}{p}_next);"));
                }
            }
            Convergence::Scalar(e) => {
                self.block(c, body, false)?;
                c.line(format!("{f} = {};", self.expr(e, false)?));
            }
        }
        c.close();
        c.line(format!("// end fixedPoint {id}"));
        Ok(())
    }

    // ---- function assembly ----

    fn param_decl(&self, s: SymbolId) -> String {
        let sym = self.sym(s);
        let name = &self.names[s];
        match sym.kind {
            SymbolKind::Graph => format!("graph& {name}"),
            SymbolKind::NodeProperty | SymbolKind::EdgeProperty => {
                let suffix = if self.swapped.contains(&s) { "_out" } else { "" };
                format!("{}* {name}{suffix}", host_ty(self.ty_of(s)))
            }
            SymbolKind::NodeSet => format!("const std::vector<int>& {name}"),
            _ => format!("{} {name}", host_ty(self.ty_of(s))),
        }
    }

    fn ret_ty(&self) -> &'static str {
        self.p.return_type.map(host_ty).unwrap_or("void")
    }

    fn alloc_dev(&self, c: &mut Code, name: &str, ty: ScalarType, size: Option<&str>) {
        let bytes = self.bytes(ty, size);
        let t = self.dev_ty(ty);
        match self.b {
            BackendKind::Cuda => {
                c.line(format!("{t}* {name};"));
                c.line(format!("cudaMalloc(&{name}, {bytes});"));
            }
            BackendKind::Sycl => {
                c.line(format!(
                    "{t}* {name} = sycl::malloc_device<{t}>({}, Q);",
                    size.unwrap_or("1")
                ));
            }
            BackendKind::OpenCl => c.line(format!(
                "cl_mem {name} = clCreateBuffer(context, CL_MEM_READ_WRITE, {bytes}, NULL, &status);"
            )),
            BackendKind::OpenAcc => {}
        }
    }

    /// Device buffers in allocation order: (name, type, size).
    fn device_buffers(&self) -> Vec<(String, ScalarType, Option<&'static str>)> {
        let pre = self.prefix();
        let mut out = Vec::new();
        for &s in &self.device {
            let item = self.item(s, false);
            out.push((item.dev, item.ty, item.size));
            if self.double_buffered.contains(&s) {
                let item = self.item(s, true);
                out.push((item.dev, item.ty, item.size));
            }
        }
        if self.has_bfs {
            out.push((format!("{pre}level"), ScalarType::Int, Some("V")));
            out.push((format!("{pre}bfs_finished"), ScalarType::Bool, None));
        }
        out
    }

    fn host_arrays(&self) -> Vec<(String, ScalarType, &'static str)> {
        let mut out = Vec::new();
        for &s in self.swapped.iter().chain(&self.locals) {
            let (ty, size) = (self.ty_of(s), size_text(self.sym(s).kind));
            out.push((self.names[s].clone(), ty, size));
            if self.double_buffered.contains(&s) {
                out.push((format!("{}_next", self.names[s]), ty, size));
            }
        }
        if self.has_bfs {
            out.push(("level".into(), ScalarType::Int, "V"));
        }
        out
    }

    fn cleanup(&self, c: &mut Code) {
        for &s in &self.swapped {
            let n = &self.names[s];
            let size = size_text(self.sym(s).kind);
            c.line(format!(
                "memcpy({n}_out, {n}, sizeof({}) * {size});",
                host_ty(self.ty_of(s))
            ));
        }
        let pre = self.prefix();
        let mut dev: Vec<String> = self
            .an
            .transfers
            .graph_arrays
            .iter()
            .map(|a| format!("{pre}{}", a.name()))
            .collect();
        dev.extend(self.device_buffers().into_iter().map(|(n, _, _)| n));
        for n in &dev {
            match self.b {
                BackendKind::Cuda => c.line(format!("cudaFree({n});")),
                BackendKind::Sycl => c.line(format!("sycl::free({n}, Q);")),
                BackendKind::OpenCl => c.line(format!("clReleaseMemObject({n});")),
                BackendKind::OpenAcc => {}
            }
        }
        for (n, _, _) in self.host_arrays() {
            c.line(format!("free({n});"));
        }
        match self.b {
            BackendKind::OpenAcc if !self.an.transfers.graph_arrays.is_empty() => {
                c.line(format!("#pragma acc exit data delete({})", self.acc_graph_list()));
            }
            BackendKind::OpenCl => {
                for r in 0..self.p.regions.len() {
                    c.line(format!("clReleaseKernel({});", self.kernel_name(r)));
                }
                c.line("clReleaseProgram(program);");
                c.line("clReleaseCommandQueue(queue);");
                c.line("clReleaseContext(context);");
            }
            _ => {}
        }
    }

    fn acc_graph_list(&self) -> String {
        self.an
            .transfers
            .graph_arrays
            .iter()
            .map(|a| format!("{}[0:{}]", a.name(), graph_array_size(*a).trim_matches(['(', ')'])))
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn setup(&mut self, c: &mut Code) {
        let g = self.graph_name().to_string();
        c.line(format!("int V = {g}.V;"));
        c.line(format!("int E = {g}.E;"));
        let n = self.cfg.num_threads;
        match self.b {
            BackendKind::Cuda => {
                c.line(format!("const int numThreads = {n};"));
                c.line("const int numBlocks = (V + numThreads - 1) / numThreads;");
            }
            BackendKind::Sycl => {
                c.line("sycl::queue Q(sycl::default_selector_v);");
                c.line(format!("const int NUM_THREADS = {n};"));
            }
            BackendKind::OpenCl => {
                c.line(format!("size_t global_size = {n};"));
                c.line("cl_int status;");
                c.line("cl_platform_id platform;");
                c.line("clGetPlatformIDs(1, &platform, NULL);");
                c.line("cl_device_id device;");
                c.line("clGetDeviceIDs(platform, CL_DEVICE_TYPE_DEFAULT, 1, &device, NULL);");
                c.line("cl_context context = clCreateContext(NULL, 1, &device, NULL, NULL, &status);");
                c.line("cl_command_queue queue = clCreateCommandQueue(context, device, 0, &status);");
                c.line(format!(
                    "std::string source = read_kernel_source(\"{}_opencl.cl\");",
                    self.unit
                ));
                c.line("const char* source_text = source.c_str();");
                c.line("cl_program program = clCreateProgramWithSource(context, 1, &source_text, NULL, &status);");
                c.line("clBuildProgram(program, 1, &device, NULL, NULL, NULL);");
                for r in 0..self.p.regions.len() {
                    let k = self.kernel_name(r);
                    c.line(format!("cl_kernel {k} = clCreateKernel(program, \"{k}\", &status);"));
                }
                c.line("cl_event event;");
            }
            BackendKind::OpenAcc => {
                for a in &self.an.transfers.graph_arrays {
                    c.line(format!("int* {} = {g}.{};", a.name(), a.name()));
                }
                if !self.an.transfers.graph_arrays.is_empty() {
                    c.line(format!("#pragma acc enter data copyin({})", self.acc_graph_list()));
                    for a in &self.an.transfers.graph_arrays {
                        self.transfers
                            .push((a.name().to_string(), Direction::HostToDevice, None, c.len() - 1));
                    }
                }
            }
        }
        if self.has_bfs {
            c.line("int hops_from_source = 0;");
            c.line("bool bfs_finished = false;");
        }
        for (n, ty, size) in self.host_arrays() {
            let t = host_ty(ty);
            c.line(format!("{t}* {n} = ({t}*)malloc(sizeof({t}) * {size});"));
        }
        for &s in &self.swapped {
            let n = &self.names[s];
            let size = size_text(self.sym(s).kind);
            c.line(format!(
                "memcpy({n}, {n}_out, sizeof({}) * {size});",
                host_ty(self.ty_of(s))
            ));
        }
        if self.acc() {
            return;
        }
        for (n, ty, size) in self.device_buffers() {
            self.alloc_dev(c, &n, ty, size);
        }
        let arrays: Vec<GraphArray> = self.an.transfers.graph_arrays.iter().copied().collect();
        for a in arrays {
            let name = format!("{}{}", self.prefix(), a.name());
            let size = graph_array_size(a);
            self.alloc_dev(c, &name, ScalarType::Int, Some(size));
            let item = Item {
                host: format!("{g}.{}", a.name()),
                dev: name,
                ty: ScalarType::Int,
                size: Some(size),
            };
            self.transfer(c, &item, Direction::HostToDevice, None);
            let last = self.transfers.last_mut().unwrap();
            last.0 = a.name().to_string();
        }
    }

    fn host_function(&mut self) -> Result<Code> {
        if self.p.graph.is_none() {
            return Err(self.unsupported("a function without a Graph parameter", Span::default()));
        }
        let params: Vec<String> = self.p.params.iter().map(|&s| self.param_decl(s)).collect();
        let mut c = Code::default();
        c.open(format!("{} {}({})", self.ret_ty(), self.fn_name, params.join(", ")));
        self.setup(&mut c);
        let body = &self.p.body;
        self.block(&mut c, body, false)?;
        let ends_with_return = matches!(body.last().map(|s| &s.kind), Some(TStmtKind::Return(_)));
        if !ends_with_return {
            self.cleanup(&mut c);
        }
        c.close();
        Ok(c)
    }

    fn driver(&self) -> Code {
        let mut c = Code::default();
        c.open("int main(int argc, char** argv)");
        c.open("if (argc < 4)");
        c.line("fprintf(stderr, \"usage: %s GRAPH DIRECTED NODES [name=value ...]\\n\", argv[0]);");
        c.line("return 2;");
        c.close();
        c.line("graph input = load_graph(argv[1], atoi(argv[2]) != 0, atoi(argv[3]));");
        let mut args = Vec::new();
        let mut outputs = Vec::new();
        for &s in &self.p.params {
            let sym = self.sym(s);
            let n = self.names[s].clone();
            let ty = self.ty_of(s);
            let t = host_ty(ty);
            let text = format!("arg_text(argc, argv, \"{}\")", sym.name);
            match sym.kind {
                SymbolKind::Graph => {
                    args.push("input".to_string());
                    continue;
                }
                SymbolKind::NodeProperty | SymbolKind::EdgeProperty => {
                    let size = if sym.kind == SymbolKind::EdgeProperty {
                        "input.E + 1"
                    } else {
                        "input.V + 1"
                    };
                    c.line(format!("{t}* {n} = ({t}*)calloc({size}, sizeof({t}));"));
                    outputs.push((s, n.clone()));
                }
                SymbolKind::NodeSet => {
                    c.line(format!("std::vector<int> {n} = arg_nodes({text}, input.V);"));
                }
                _ => {
                    let parse = match ty {
                        ScalarType::Bool => format!("arg_bool({text})"),
                        ScalarType::Float | ScalarType::Double => format!("atof({text})"),
                        _ => format!("({t})atoll({text})"),
                    };
                    c.line(format!("{t} {n} = {parse};"));
                }
            }
            args.push(n);
        }
        let call = format!("{}({})", self.fn_name, args.join(", "));
        match self.p.return_type {
            Some(ty) => c.line(format!("{} result = {call};", host_ty(ty))),
            None => c.line(format!("{call};")),
        }
        for (s, n) in outputs {
            let (fmt, cast) = print_format(self.ty_of(s));
            let count = if self.sym(s).kind == SymbolKind::EdgeProperty {
                "input.E"
            } else {
                "input.V"
            };
            c.line(format!(
                "for (int i = 0; i < {count}; i++) printf(\"{}\\t%d\\t{fmt}\\n\", i, {cast}{n}[i]);",
                self.sym(s).name
            ));
        }
        if let Some(ty) = self.p.return_type {
            let (fmt, cast) = print_format(ty);
            c.line(format!("printf(\"return\\t{fmt}\\n\", {cast}result);"));
        }
        c.line("return 0;");
        c.close();
        c
    }

    pub(crate) fn run(mut self) -> std::result::Result<EmitUnit, CodegenError> {
        let host_fn = self.host_function()?;
        let indent = self.cfg.indent;
        let host_name = format!("{}_{}.{}", self.unit, self.b.name(), self.b.extension());
        let prelude = prelude::host(self.b, &self.unit);
        let mut host_text = prelude.clone();
        let mut files = Vec::new();
        let mut kernel_file = None;
        let kernels_text = self.kernels.render(indent);
        let host_offset;
        match self.b {
            BackendKind::Cuda => {
                host_text.push_str(&kernels_text);
                host_offset = count_lines(&host_text);
            }
            BackendKind::OpenCl => {
                let cl_name = format!("{}_opencl.cl", self.unit);
                let mut cl = prelude::opencl_kernels(&self.unit);
                cl.push_str(&kernels_text);
                cl.push_str(BODY_END);
                cl.push('\n');
                kernel_file = Some((cl_name, cl));
                host_offset = count_lines(&host_text);
            }
            _ => host_offset = count_lines(&host_text),
        }
        host_text.push_str(&host_fn.render(indent));
        host_text.push('\n');
        host_text.push_str(BODY_END);
        host_text.push('\n');
        host_text.push_str(&self.driver().render(indent));
        files.push((host_name.clone(), host_text));
        files.extend(kernel_file);
        let structure = Structure {
            device_prefix: self.cfg.device_var_prefix.clone(),
            kernels: self.kernel_infos,
            launches: self
                .launches
                .into_iter()
                .map(|(kernel, l)| LaunchSite {
                    kernel,
                    file: host_name.clone(),
                    line: host_offset + l + 1,
                })
                .collect(),
            transfers: self
                .transfers
                .into_iter()
                .map(|(symbol, direction, scope, l)| TransferSite {
                    symbol,
                    direction,
                    scope,
                    file: host_name.clone(),
                    line: host_offset + l + 1,
                })
                .collect(),
        };
        let line_counts = files.iter().map(|(n, t)| (n.clone(), super::body_lines(t))).collect();
        Ok(EmitUnit {
            backend: self.b,
            program: self.unit,
            files,
            structure,
            line_counts,
        })
    }
}

fn count_lines(s: &str) -> usize {
    s.matches('\n').count()
}

fn value_literal(e: &TExpr) -> Option<bool> {
    match e.kind {
        TExprKind::Bool(b) => Some(b),
        _ => None,
    }
}

fn plain_reduce(t: &str, op: ReduceOp, v: &str) -> String {
    match op {
        ReduceOp::Sum | ReduceOp::Count => format!("{t} += {v};"),
        ReduceOp::Product => format!("{t} *= {v};"),
        ReduceOp::All => format!("{t} = {t} && {v};"),
        ReduceOp::Any => format!("{t} = {t} || {v};"),
    }
}

fn cl_suffix(ty: ScalarType) -> &'static str {
    match ty {
        ScalarType::Long => "long",
        t if t.is_floating() => "double",
        _ => "int",
    }
}

fn print_format(ty: ScalarType) -> (&'static str, &'static str) {
    match ty {
        ScalarType::Float | ScalarType::Double => ("%.17g", "(double)"),
        ScalarType::Bool => ("%d", "(int)"),
        _ => ("%lld", "(long long)"),
    }
}

/// The statements of region `r` and its filter, found in `stmts`.
fn region_body(stmts: &[TStmt], r: RegionId) -> (&[TStmt], Vec<&TExpr>) {
    let mut found: Option<(&[TStmt], Vec<&TExpr>)> = None;
    walk_stmts(stmts, &mut |s| match &s.kind {
        TStmtKind::ForAll {
            region: Some(x),
            body,
            filter,
            ..
        } if *x == r => found = Some((body, filter.iter().collect())),
        TStmtKind::Bfs {
            region, body, reverse, ..
        } => {
            if *region == r {
                found = Some((body, vec![]));
            }
            if let Some(rev) = reverse {
                if rev.region == r {
                    found = Some((&rev.body, rev.filter.iter().collect()));
                }
            }
        }
        _ => {}
    });
    found.unwrap_or((&[], vec![]))
}
