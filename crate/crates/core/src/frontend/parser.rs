//! Recursive-descent parser. See `docs/grammar.md` for the accepted grammar.

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::FrontendError;

const MAX_DEPTH: usize = 128;

const TYPE_KEYWORDS: &[&str] = &[
    "int", "long", "float", "double", "bool", "node", "edge", "Graph", "propNode", "propEdge", "setNode",
];

pub fn parse(tokens: &[Token]) -> Result<Program, FrontendError> {
    if tokens.last().map(|t| t.kind) != Some(TokenKind::Eof) {
        return Err(FrontendError::Parse {
            span: tokens.last().map(|t| t.span).unwrap_or_default(),
            expected: vec!["end of input".to_string()],
            found: "unterminated token stream".to_string(),
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    let mut functions = Vec::new();
    while !p.at_eof() {
        functions.push(p.function()?);
    }
    if functions.is_empty() {
        return Err(p.error(&["function"]));
    }
    Ok(Program { functions })
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos]
    }

    fn peek_nth(&self, n: usize) -> &'t Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error(&self, expected: &[&str]) -> FrontendError {
        let t = self.peek();
        FrontendError::Parse {
            span: t.span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: if t.kind == TokenKind::Eof {
                "end of input".to_string()
            } else {
                format!("`{}`", t.lexeme)
            },
        }
    }

    fn check(&self, lexeme: &str) -> bool {
        let t = self.peek();
        matches!(t.kind, TokenKind::Keyword | TokenKind::Op | TokenKind::Punct) && t.lexeme == lexeme
    }

    fn eat(&mut self, lexeme: &str) -> bool {
        if self.check(lexeme) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lexeme: &str) -> Result<Span, FrontendError> {
        if self.check(lexeme) {
            Ok(self.advance().span)
        } else {
            Err(self.error(&[lexeme]))
        }
    }

    fn ident(&mut self) -> Result<Ident, FrontendError> {
        let t = self.peek();
        if t.kind == TokenKind::Ident {
            self.advance();
            Ok(Ident::new(t.lexeme.clone(), t.span))
        } else {
            Err(self.error(&["identifier"]))
        }
    }

    fn enter(&mut self) -> Result<(), FrontendError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(FrontendError::Structural {
                span: self.peek().span,
                message: format!("nesting deeper than {MAX_DEPTH} levels"),
            });
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn function(&mut self) -> Result<FunctionDecl, FrontendError> {
        let start = self.expect("function")?;
        let name = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.check(")") {
            loop {
                let pstart = self.peek().span;
                let ty = self.type_expr()?;
                let pname = self.ident()?;
                params.push(Param {
                    ty,
                    span: pstart.to(pname.span),
                    name: pname,
                });
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        let body = self.block()?;
        Ok(FunctionDecl {
            span: start.to(body.span),
            name,
            params,
            body,
        })
    }

    fn is_type_start(&self) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.lexeme.as_str())
    }

    fn type_expr(&mut self) -> Result<TypeExpr, FrontendError> {
        if !self.is_type_start() {
            return Err(self.error(TYPE_KEYWORDS));
        }
        let t = self.advance();
        Ok(match t.lexeme.as_str() {
            "int" => TypeExpr::Int,
            "long" => TypeExpr::Long,
            "float" => TypeExpr::Float,
            "double" => TypeExpr::Double,
            "bool" => TypeExpr::Bool,
            "node" => TypeExpr::Node,
            "edge" => TypeExpr::Edge,
            "Graph" => TypeExpr::Graph,
            "propNode" | "propEdge" => {
                self.expect("<")?;
                self.enter()?;
                let inner = self.type_expr();
                self.leave();
                let inner = inner?;
                self.expect(">")?;
                if t.lexeme == "propNode" {
                    TypeExpr::PropNode(Box::new(inner))
                } else {
                    TypeExpr::PropEdge(Box::new(inner))
                }
            }
            "setNode" => {
                self.expect("<")?;
                let g = self.ident()?;
                self.expect(">")?;
                TypeExpr::SetNode(g.name)
            }
            _ => unreachable!("guarded by is_type_start"),
        })
    }

    fn block(&mut self) -> Result<Block, FrontendError> {
        self.enter()?;
        let r = self.block_inner();
        self.leave();
        r
    }

    fn block_inner(&mut self) -> Result<Block, FrontendError> {
        let open = self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.check("}") {
            if self.at_eof() {
                return Err(self.error(&["}"]));
            }
            stmts.push(self.stmt()?);
        }
        let close = self.expect("}")?;
        Ok(Block {
            stmts,
            span: open.to(close),
        })
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.peek().span;
        if self.is_type_start() {
            let ty = self.type_expr()?;
            let name = self.ident()?;
            let init = if self.eat("=") { Some(self.expr()?) } else { None };
            let end = self.expect(";")?;
            return Ok(Stmt {
                kind: StmtKind::Decl { ty, name, init },
                span: start.to(end),
            });
        }
        if self.check("forall") || self.check("for") {
            return self.forall();
        }
        if self.check("fixedPoint") {
            self.advance();
            self.expect("until")?;
            self.expect("(")?;
            let flag = self.ident()?;
            self.expect(":")?;
            let convergence = self.expr()?;
            self.expect(")")?;
            let body = self.block()?;
            return Ok(Stmt {
                span: start.to(body.span),
                kind: StmtKind::FixedPoint {
                    flag,
                    convergence,
                    body,
                },
            });
        }
        if self.check("iterateInBFS") {
            return self.bfs();
        }
        if self.check("iterateInReverse") {
            return Err(FrontendError::Structural {
                span: start,
                message: "iterateInReverse must immediately follow an iterateInBFS block".to_string(),
            });
        }
        if self.check("if") {
            return self.if_stmt();
        }
        if self.check("return") {
            self.advance();
            let value = if self.check(";") { None } else { Some(self.expr()?) };
            let end = self.expect(";")?;
            return Ok(Stmt {
                kind: StmtKind::Return(value),
                span: start.to(end),
            });
        }
        if self.check("<") {
            return self.min_max();
        }
        // Method-call statement: `recv.method(args);`
        if self.peek().kind == TokenKind::Ident
            && self.peek_nth(1).is(TokenKind::Punct, ".")
            && self.peek_nth(2).kind == TokenKind::Ident
            && self.peek_nth(3).is(TokenKind::Punct, "(")
        {
            let receiver = self.ident()?;
            self.advance();
            let method = self.ident()?;
            let args = self.call_args(true)?;
            let end = self.expect(";")?;
            return Ok(Stmt {
                kind: StmtKind::Call {
                    receiver: Some(receiver),
                    method,
                    args,
                },
                span: start.to(end),
            });
        }
        let target = self.lvalue()?;
        let t = self.peek();
        let kind = if self.eat("=") {
            StmtKind::Assign {
                target,
                value: self.expr()?,
            }
        } else if self.eat("++") {
            StmtKind::Reduce {
                target,
                op: ReduceOp::Count,
                value: None,
            }
        } else if let Some(op) = ReduceOp::from_token(&t.lexeme).filter(|_| t.kind == TokenKind::Op) {
            self.advance();
            StmtKind::Reduce {
                target,
                op,
                value: Some(self.expr()?),
            }
        } else {
            return Err(self.error(&["=", "+=", "*=", "++", "&&=", "||="]));
        };
        let end = self.expect(";")?;
        Ok(Stmt {
            kind,
            span: start.to(end),
        })
    }

    fn lvalue(&mut self) -> Result<Expr, FrontendError> {
        let base = self.ident()?;
        let var = Expr::new(ExprKind::Var(base.name), base.span);
        if self.eat(".") {
            let name = self.ident()?;
            let span = var.span.to(name.span);
            Ok(Expr::new(
                ExprKind::Prop {
                    object: Box::new(var),
                    name,
                },
                span,
            ))
        } else {
            Ok(var)
        }
    }

    fn forall(&mut self) -> Result<Stmt, FrontendError> {
        let kw = self.advance();
        let parallel = kw.lexeme == "forall";
        self.expect("(")?;
        let var = self.ident()?;
        self.expect("in")?;
        let domain = self.domain()?;
        let filter = self.filter_clause()?;
        self.expect(")")?;
        let body = self.block()?;
        Ok(Stmt {
            span: kw.span.to(body.span),
            kind: StmtKind::ForAll {
                var,
                domain,
                filter,
                body,
                parallel,
            },
        })
    }

    fn domain(&mut self) -> Result<Domain, FrontendError> {
        let head = self.ident()?;
        if self.check(".") && self.peek_nth(2).is(TokenKind::Punct, "(") {
            self.advance();
            let method = self.ident()?;
            self.expect("(")?;
            let d = match method.name.as_str() {
                "nodes" => Domain::Nodes { graph: head },
                "neighbors" => Domain::Neighbors {
                    graph: head,
                    of: self.expr()?,
                },
                "nodes_to" => Domain::NodesTo {
                    graph: head,
                    of: self.expr()?,
                },
                _ => {
                    return Err(FrontendError::Parse {
                        span: method.span,
                        expected: vec!["nodes".to_string(), "neighbors".to_string(), "nodes_to".to_string()],
                        found: format!("`{}`", method.name),
                    })
                }
            };
            self.expect(")")?;
            Ok(d)
        } else {
            Ok(Domain::Set { name: head })
        }
    }

    fn filter_clause(&mut self) -> Result<Option<Expr>, FrontendError> {
        if self.check(".") && self.peek_nth(1).is(TokenKind::Keyword, "filter") {
            self.advance();
            self.advance();
            self.expect("(")?;
            let e = self.expr()?;
            self.expect(")")?;
            Ok(Some(e))
        } else {
            Ok(None)
        }
    }

    fn bfs(&mut self) -> Result<Stmt, FrontendError> {
        let kw = self.advance();
        self.expect("(")?;
        let var = self.ident()?;
        self.expect("in")?;
        let graph = self.ident()?;
        self.expect(".")?;
        let nodes = self.ident()?;
        if nodes.name != "nodes" {
            return Err(FrontendError::Parse {
                span: nodes.span,
                expected: vec!["nodes".to_string()],
                found: format!("`{}`", nodes.name),
            });
        }
        self.expect("(")?;
        self.expect(")")?;
        self.expect("from")?;
        let root = self.expr()?;
        self.expect(")")?;
        let body = self.block()?;
        let mut span = kw.span.to(body.span);
        let reverse = if self.check("iterateInReverse") {
            let rkw = self.advance();
            let filter = if self.eat("(") {
                let f = self.expr()?;
                self.expect(")")?;
                Some(f)
            } else {
                None
            };
            let rbody = self.block()?;
            let rspan = rkw.span.to(rbody.span);
            span = span.to(rspan);
            Some(ReversePass {
                filter,
                body: rbody,
                span: rspan,
            })
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::IterateInBfs {
                var,
                graph,
                root,
                body,
                reverse,
            },
            span,
        })
    }

    fn if_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let kw = self.advance();
        self.expect("(")?;
        let cond = self.expr()?;
        self.expect(")")?;
        let then_block = self.block()?;
        let mut span = kw.span.to(then_block.span);
        let else_block = if self.eat("else") {
            let b = if self.check("if") {
                self.enter()?;
                let nested = self.if_stmt();
                self.leave();
                let nested = nested?;
                Block {
                    span: nested.span,
                    stmts: vec![nested],
                }
            } else {
                self.block()?
            };
            span = span.to(b.span);
            Some(b)
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_block,
                else_block,
            },
            span,
        })
    }

    fn min_max(&mut self) -> Result<Stmt, FrontendError> {
        let start = self.expect("<")?;
        let mut targets = vec![self.lvalue()?];
        while self.eat(",") {
            targets.push(self.lvalue()?);
        }
        self.expect(">")?;
        self.expect("=")?;
        self.expect("<")?;
        let kind = if self.eat("Min") {
            MinMaxKind::Min
        } else if self.eat("Max") {
            MinMaxKind::Max
        } else {
            return Err(self.error(&["Min", "Max"]));
        };
        self.expect("(")?;
        let a = self.expr()?;
        self.expect(",")?;
        let b = self.expr()?;
        self.expect(")")?;
        let mut attached = Vec::new();
        while self.eat(",") {
            // Attached values stop below the relational level so the closing
            // `>` is not read as a comparison.
            attached.push(self.binary(BinaryOp::Add.precedence())?);
        }
        self.expect(">")?;
        let end = self.expect(";")?;
        Ok(Stmt {
            kind: StmtKind::MinMax {
                targets,
                kind,
                compare: (a, b),
                attached,
            },
            span: start.to(end),
        })
    }

    fn call_args(&mut self, allow_named: bool) -> Result<Vec<NamedArg>, FrontendError> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.check(")") {
            loop {
                let named =
                    allow_named && self.peek().kind == TokenKind::Ident && self.peek_nth(1).is(TokenKind::Op, "=");
                let name = if named {
                    let n = self.ident()?;
                    self.advance();
                    Some(n)
                } else {
                    None
                };
                args.push(NamedArg {
                    name,
                    value: self.expr()?,
                });
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    pub fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        let t = self.peek();
        if t.kind != TokenKind::Op {
            return None;
        }
        Some(match t.lexeme.as_str() {
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "%" => BinaryOp::Mod,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "&&" => BinaryOp::And,
            "||" => BinaryOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        self.enter()?;
        let r = self.binary_inner(min_prec);
        self.leave();
        r
    }

    fn binary_inner(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let op = if self.check("!") {
            Some(UnaryOp::Not)
        } else if self.check("-") {
            Some(UnaryOp::Neg)
        } else {
            None
        };
        match op {
            Some(op) => {
                let start = self.advance().span;
                self.enter()?;
                let operand = self.unary();
                self.leave();
                let operand = operand?;
                let span = start.to(operand.span);
                Ok(Expr::new(
                    ExprKind::Unary {
                        op,
                        operand: Box::new(operand),
                    },
                    span,
                ))
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        while self.check(".") {
            self.advance();
            let name = self.ident()?;
            if self.check("(") {
                let receiver = match &e.kind {
                    ExprKind::Var(v) => Ident::new(v.clone(), e.span),
                    _ => {
                        return Err(FrontendError::Structural {
                            span: e.span,
                            message: "method receiver must be a plain identifier".to_string(),
                        })
                    }
                };
                let args = self.call_args(false)?.into_iter().map(|a| a.value).collect();
                let span = e.span.to(self.prev_span());
                e = Expr::new(
                    ExprKind::Call {
                        receiver: Some(receiver),
                        method: name,
                        args,
                    },
                    span,
                );
            } else {
                let span = e.span.to(name.span);
                e = Expr::new(
                    ExprKind::Prop {
                        object: Box::new(e),
                        name,
                    },
                    span,
                );
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let t = self.peek();
        let lit = |l| Ok(Expr::new(ExprKind::Lit(l), t.span));
        match t.kind {
            TokenKind::IntLit => {
                self.advance();
                lit(Literal::Int(t.lexeme.parse().expect("lexer validated")))
            }
            TokenKind::FloatLit => {
                self.advance();
                lit(Literal::Float(t.lexeme.parse().expect("lexer validated")))
            }
            TokenKind::BoolLit => {
                self.advance();
                lit(Literal::Bool(matches!(t.lexeme.as_str(), "True" | "true")))
            }
            TokenKind::Keyword if t.lexeme == "INF" => {
                self.advance();
                lit(Literal::Inf)
            }
            TokenKind::Ident => {
                self.advance();
                if self.check("(") {
                    let args = self.call_args(false)?.into_iter().map(|a| a.value).collect();
                    let span = t.span.to(self.prev_span());
                    return Ok(Expr::new(
                        ExprKind::Call {
                            receiver: None,
                            method: Ident::new(t.lexeme.clone(), t.span),
                            args,
                        },
                        span,
                    ));
                }
                Ok(Expr::new(ExprKind::Var(t.lexeme.clone()), t.span))
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.advance();
                let e = self.expr()?;
                let close = self.expect(")")?;
                Ok(Expr::new(e.kind, t.span.to(close)))
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_source, FrontendError};
    use super::*;

    fn body(src: &str) -> Vec<Stmt> {
        let p = parse_source(&format!("function f(Graph g) {{ {src} }}")).unwrap();
        p.functions[0].body.stmts.clone()
    }

    fn strip(e: &Expr) -> Expr {
        let mut p = Program {
            functions: vec![FunctionDecl {
                name: Ident::new("x", Span::default()),
                params: vec![],
                body: Block {
                    stmts: vec![Stmt {
                        kind: StmtKind::Return(Some(e.clone())),
                        span: Span::default(),
                    }],
                    span: Span::default(),
                },
                span: Span::default(),
            }],
        };
        p = p.without_spans();
        match &p.functions[0].body.stmts[0].kind {
            StmtKind::Return(Some(e)) => e.clone(),
            _ => unreachable!(),
        }
    }

    fn var(n: &str) -> Expr {
        Expr::new(ExprKind::Var(n.into()), Span::default())
    }

    fn prop(o: &str, n: &str) -> Expr {
        Expr::new(
            ExprKind::Prop {
                object: Box::new(var(o)),
                name: Ident::new(n, Span::default()),
            },
            Span::default(),
        )
    }

    #[test]
    fn min_construct_with_attached_value() {
        let s = body("<nbr.dist,nbr.modified> = <Min(nbr.dist, v.dist + e.weight), True>;");
        let StmtKind::MinMax {
            targets,
            kind,
            compare,
            attached,
        } = &s[0].kind
        else {
            panic!("not a MinMax: {:?}", s[0].kind);
        };
        assert_eq!(*kind, MinMaxKind::Min);
        assert_eq!(
            targets.iter().map(strip).collect::<Vec<_>>(),
            vec![prop("nbr", "dist"), prop("nbr", "modified")]
        );
        assert_eq!(strip(&compare.0), prop("nbr", "dist"));
        assert_eq!(
            strip(&compare.1),
            Expr::new(
                ExprKind::Binary {
                    op: BinaryOp::Add,
                    lhs: Box::new(prop("v", "dist")),
                    rhs: Box::new(prop("e", "weight")),
                },
                Span::default()
            )
        );
        assert_eq!(attached.len(), 1);
        assert_eq!(attached[0].kind, ExprKind::Lit(Literal::Bool(true)));
    }

    #[test]
    fn fixed_point_with_negated_property() {
        let s = body("fixedPoint until (fin: !modified) { }");
        let StmtKind::FixedPoint {
            flag,
            convergence,
            body,
        } = &s[0].kind
        else {
            panic!()
        };
        assert_eq!(flag.name, "fin");
        assert_eq!(
            strip(convergence),
            Expr::new(
                ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(var("modified"))
                },
                Span::default()
            )
        );
        assert!(body.stmts.is_empty());
    }

    #[test]
    fn empty_forall() {
        let s = body("forall (v in g.nodes()) { }");
        let StmtKind::ForAll {
            var,
            domain,
            filter,
            body,
            parallel,
        } = &s[0].kind
        else {
            panic!()
        };
        assert_eq!(var.name, "v");
        assert!(matches!(domain, Domain::Nodes { graph } if graph.name == "g"));
        assert!(filter.is_none());
        assert!(body.stmts.is_empty());
        assert!(*parallel);
    }

    #[test]
    fn precedence_follows_c() {
        let s = body("x = !a || b && c == d + e * f;");
        let StmtKind::Assign { value, .. } = &s[0].kind else {
            panic!()
        };
        let ExprKind::Binary { op, lhs, rhs } = &value.kind else {
            panic!()
        };
        assert_eq!(*op, BinaryOp::Or);
        assert!(matches!(lhs.kind, ExprKind::Unary { op: UnaryOp::Not, .. }));
        let ExprKind::Binary { op, rhs: and_rhs, .. } = &rhs.kind else {
            panic!()
        };
        assert_eq!(*op, BinaryOp::And);
        let ExprKind::Binary { op, rhs: eq_rhs, .. } = &and_rhs.kind else {
            panic!()
        };
        assert_eq!(*op, BinaryOp::Eq);
        assert!(matches!(eq_rhs.kind, ExprKind::Binary { op: BinaryOp::Add, .. }));
    }

    #[test]
    fn reverse_outside_bfs_is_structural_error() {
        let err = parse_source("function f(Graph g) { iterateInReverse (v != s) { } }").unwrap_err();
        assert!(matches!(err, FrontendError::Structural { .. }), "{err:?}");
        let err = parse_source(
            "function f(Graph g, node s) { iterateInBFS (v in g.nodes() from s) { } int x = 0; iterateInReverse { } }",
        )
        .unwrap_err();
        assert!(matches!(err, FrontendError::Structural { .. }));
    }

    #[test]
    fn reduction_operators() {
        let s = body("a += 1; b *= 2; c++; d &&= x; e ||= y;");
        let ops: Vec<ReduceOp> = s
            .iter()
            .map(|s| match &s.kind {
                StmtKind::Reduce { op, .. } => *op,
                k => panic!("{k:?}"),
            })
            .collect();
        assert_eq!(
            ops,
            [
                ReduceOp::Sum,
                ReduceOp::Product,
                ReduceOp::Count,
                ReduceOp::All,
                ReduceOp::Any
            ]
        );
    }

    #[test]
    fn attach_takes_named_args() {
        let s = body("g.attachNodeProperty(dist = INF, modified = False);");
        let StmtKind::Call { method, args, .. } = &s[0].kind else {
            panic!()
        };
        assert_eq!(method.name, "attachNodeProperty");
        let names: Vec<_> = args.iter().map(|a| a.name.as_ref().unwrap().name.as_str()).collect();
        assert_eq!(names, ["dist", "modified"]);
    }

    #[test]
    fn parse_error_reports_expected_and_span() {
        let err = parse_source("function f(Graph g) { x = 1 }").unwrap_err();
        match err {
            FrontendError::Parse { span, expected, found } => {
                assert_eq!(expected, vec![";".to_string()]);
                assert_eq!(found, "`}`");
                assert_eq!((span.line, span.col), (1, 29));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!(
            "function f(Graph g) {{ x = {}1{}; }}",
            "(".repeat(5000),
            ")".repeat(5000)
        );
        assert!(parse_source(&src).is_err());
    }
}
