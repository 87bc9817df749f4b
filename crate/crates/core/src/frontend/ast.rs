//! Untyped syntax tree produced by the parser.
//!
//! Names are stored unresolved. Every node carries the [`Span`] of the
//! source text it was parsed from.

use std::fmt;

/// Source location: 1-based line and column of the first character, byte
/// offset, and byte length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn new(line: u32, col: u32, offset: usize, len: usize) -> Self {
        Span { line, col, offset, len }
    }

    /// Smallest span covering `self` and `other` (taking position from the
    /// earlier one).
    pub fn to(self, other: Span) -> Span {
        let (first, last) = if self.offset <= other.offset {
            (self, other)
        } else {
            (other, self)
        };
        let end = (last.offset + last.len).max(first.offset + first.len);
        Span {
            len: end - first.offset,
            ..first
        }
    }

    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeExpr {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
    Graph,
    PropNode(Box<TypeExpr>),
    PropEdge(Box<TypeExpr>),
    /// `setNode<g>`; the identifier names the owning graph.
    SetNode(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub functions: Vec<FunctionDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: Ident,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReduceOp {
    Sum,
    Product,
    Count,
    All,
    Any,
}

impl ReduceOp {
    pub fn token(self) -> &'static str {
        match self {
            ReduceOp::Sum => "+=",
            ReduceOp::Product => "*=",
            ReduceOp::Count => "++",
            ReduceOp::All => "&&=",
            ReduceOp::Any => "||=",
        }
    }

    pub fn from_token(tok: &str) -> Option<ReduceOp> {
        Some(match tok {
            "+=" => ReduceOp::Sum,
            "*=" => ReduceOp::Product,
            "++" => ReduceOp::Count,
            "&&=" => ReduceOp::All,
            "||=" => ReduceOp::Any,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ReduceOp::Sum => "Sum",
            ReduceOp::Product => "Product",
            ReduceOp::Count => "Count",
            ReduceOp::All => "All",
            ReduceOp::Any => "Any",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MinMaxKind {
    Min,
    Max,
}

impl MinMaxKind {
    pub fn keyword(self) -> &'static str {
        match self {
            MinMaxKind::Min => "Min",
            MinMaxKind::Max => "Max",
        }
    }
}

/// Iteration domain of a `forall`/`for`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// `g.nodes()`
    Nodes { graph: Ident },
    /// `g.neighbors(v)`: out-neighbours.
    Neighbors { graph: Ident, of: Expr },
    /// `g.nodes_to(v)`: in-neighbours.
    NodesTo { graph: Ident, of: Expr },
    /// A set-valued variable such as a `setNode` parameter.
    Set { name: Ident },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversePass {
    pub filter: Option<Expr>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArg {
    pub name: Option<Ident>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl {
        ty: TypeExpr,
        name: Ident,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    /// `target op= value`; `value` is `None` for `++`.
    Reduce {
        target: Expr,
        op: ReduceOp,
        value: Option<Expr>,
    },
    ForAll {
        var: Ident,
        domain: Domain,
        filter: Option<Expr>,
        body: Block,
        parallel: bool,
    },
    FixedPoint {
        flag: Ident,
        convergence: Expr,
        body: Block,
    },
    /// `iterateInBFS (v in g.nodes() from root) {..}` optionally followed by
    /// its `iterateInReverse` companion.
    IterateInBfs {
        var: Ident,
        graph: Ident,
        root: Expr,
        body: Block,
        reverse: Option<ReversePass>,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    /// `<t0, t1, ..> = <Min(a, b), x1, ..>`
    MinMax {
        targets: Vec<Expr>,
        kind: MinMaxKind,
        compare: (Expr, Expr),
        attached: Vec<Expr>,
    },
    /// Method-call statement such as `g.attachNodeProperty(dist = INF)`.
    Call {
        receiver: Option<Ident>,
        method: Ident,
        args: Vec<NamedArg>,
    },
    Return(Option<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 5,
        }
    }

    pub fn is_relational(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    /// `INF`: the largest safe value of the surrounding numeric type.
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Lit(Literal),
    Var(String),
    /// `object.name`; resolved to a property or edge weight later.
    Prop {
        object: Box<Expr>,
        name: Ident,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// `receiver.method(args)`, e.g. `g.count_outNbrs(v)`.
    Call {
        receiver: Option<Ident>,
        method: Ident,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

/// Counts of the constructs a program contains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Census {
    /// Both `forall` and sequential `for`.
    pub forall: usize,
    pub parallel_forall: usize,
    pub fixed_point: usize,
    pub iterate_in_bfs: usize,
    pub iterate_in_reverse: usize,
    pub min_max: usize,
    pub reduce: usize,
}

impl Program {
    pub fn census(&self) -> Census {
        let mut c = Census::default();
        for f in &self.functions {
            census_block(&f.body, &mut c);
        }
        c
    }

    /// A copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        for f in &mut p.functions {
            f.span = Span::default();
            f.name.span = Span::default();
            for prm in &mut f.params {
                prm.span = Span::default();
                prm.name.span = Span::default();
            }
            strip_block(&mut f.body);
        }
        p
    }
}

fn census_block(b: &Block, c: &mut Census) {
    for s in &b.stmts {
        match &s.kind {
            StmtKind::ForAll { body, parallel, .. } => {
                c.forall += 1;
                if *parallel {
                    c.parallel_forall += 1;
                }
                census_block(body, c);
            }
            StmtKind::FixedPoint { body, .. } => {
                c.fixed_point += 1;
                census_block(body, c);
            }
            StmtKind::IterateInBfs { body, reverse, .. } => {
                c.iterate_in_bfs += 1;
                census_block(body, c);
                if let Some(r) = reverse {
                    c.iterate_in_reverse += 1;
                    census_block(&r.body, c);
                }
            }
            StmtKind::If {
                then_block, else_block, ..
            } => {
                census_block(then_block, c);
                if let Some(e) = else_block {
                    census_block(e, c);
                }
            }
            StmtKind::MinMax { .. } => c.min_max += 1,
            StmtKind::Reduce { .. } => c.reduce += 1,
            _ => {}
        }
    }
}

fn strip_block(b: &mut Block) {
    b.span = Span::default();
    for s in &mut b.stmts {
        s.span = Span::default();
        match &mut s.kind {
            StmtKind::Decl { name, init, .. } => {
                name.span = Span::default();
                if let Some(e) = init {
                    strip_expr(e);
                }
            }
            StmtKind::Assign { target, value } => {
                strip_expr(target);
                strip_expr(value);
            }
            StmtKind::Reduce { target, value, .. } => {
                strip_expr(target);
                if let Some(v) = value {
                    strip_expr(v);
                }
            }
            StmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                ..
            } => {
                var.span = Span::default();
                strip_domain(domain);
                if let Some(f) = filter {
                    strip_expr(f);
                }
                strip_block(body);
            }
            StmtKind::FixedPoint {
                flag,
                convergence,
                body,
            } => {
                flag.span = Span::default();
                strip_expr(convergence);
                strip_block(body);
            }
            StmtKind::IterateInBfs {
                var,
                graph,
                root,
                body,
                reverse,
            } => {
                var.span = Span::default();
                graph.span = Span::default();
                strip_expr(root);
                strip_block(body);
                if let Some(r) = reverse {
                    r.span = Span::default();
                    if let Some(f) = &mut r.filter {
                        strip_expr(f);
                    }
                    strip_block(&mut r.body);
                }
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                strip_expr(cond);
                strip_block(then_block);
                if let Some(e) = else_block {
                    strip_block(e);
                }
            }
            StmtKind::MinMax {
                targets,
                compare,
                attached,
                ..
            } => {
                targets.iter_mut().for_each(strip_expr);
                strip_expr(&mut compare.0);
                strip_expr(&mut compare.1);
                attached.iter_mut().for_each(strip_expr);
            }
            StmtKind::Call { receiver, method, args } => {
                if let Some(r) = receiver {
                    r.span = Span::default();
                }
                method.span = Span::default();
                for a in args {
                    if let Some(n) = &mut a.name {
                        n.span = Span::default();
                    }
                    strip_expr(&mut a.value);
                }
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    strip_expr(e);
                }
            }
        }
    }
}

fn strip_domain(d: &mut Domain) {
    match d {
        Domain::Nodes { graph } => graph.span = Span::default(),
        Domain::Neighbors { graph, of } | Domain::NodesTo { graph, of } => {
            graph.span = Span::default();
            strip_expr(of);
        }
        Domain::Set { name } => name.span = Span::default(),
    }
}

fn strip_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Lit(_) | ExprKind::Var(_) => {}
        ExprKind::Prop { object, name } => {
            strip_expr(object);
            name.span = Span::default();
        }
        ExprKind::Unary { operand, .. } => strip_expr(operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            strip_expr(lhs);
            strip_expr(rhs);
        }
        ExprKind::Call { receiver, method, args } => {
            if let Some(r) = receiver {
                r.span = Span::default();
            }
            method.span = Span::default();
            args.iter_mut().for_each(strip_expr);
        }
    }
}
