//! Canonical source rendering of a [`Program`]. Reparsing the output yields
//! the same tree up to spans.

use super::ast::*;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, f) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| format!("{} {}", type_str(&p.ty), p.name.name))
            .collect();
        out.push_str(&format!("function {}({}) ", f.name.name, params.join(", ")));
        block(&f.body, 0, &mut out);
        out.push('\n');
    }
    out
}

pub fn type_str(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Int => "int".into(),
        TypeExpr::Long => "long".into(),
        TypeExpr::Float => "float".into(),
        TypeExpr::Double => "double".into(),
        TypeExpr::Bool => "bool".into(),
        TypeExpr::Node => "node".into(),
        TypeExpr::Edge => "edge".into(),
        TypeExpr::Graph => "Graph".into(),
        TypeExpr::PropNode(inner) => format!("propNode<{}>", type_str(inner)),
        TypeExpr::PropEdge(inner) => format!("propEdge<{}>", type_str(inner)),
        TypeExpr::SetNode(g) => format!("setNode<{g}>"),
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn block(b: &Block, level: usize, out: &mut String) {
    out.push_str("{\n");
    for s in &b.stmts {
        stmt(s, level + 1, out);
    }
    indent(level, out);
    out.push('}');
}

fn stmt(s: &Stmt, level: usize, out: &mut String) {
    indent(level, out);
    match &s.kind {
        StmtKind::Decl { ty, name, init } => {
            out.push_str(&format!("{} {}", type_str(ty), name.name));
            if let Some(e) = init {
                out.push_str(" = ");
                out.push_str(&expr(e));
            }
            out.push(';');
        }
        StmtKind::Assign { target, value } => {
            out.push_str(&format!("{} = {};", expr(target), expr(value)));
        }
        StmtKind::Reduce { target, op, value } => match value {
            Some(v) => out.push_str(&format!("{} {} {};", expr(target), op.token(), expr(v))),
            None => out.push_str(&format!("{}{};", expr(target), op.token())),
        },
        StmtKind::ForAll {
            var,
            domain,
            filter,
            body,
            parallel,
        } => {
            let kw = if *parallel { "forall" } else { "for" };
            out.push_str(&format!("{kw} ({} in {}", var.name, domain_str(domain)));
            if let Some(f) = filter {
                out.push_str(&format!(".filter({})", expr(f)));
            }
            out.push_str(") ");
            block(body, level, out);
        }
        StmtKind::FixedPoint {
            flag,
            convergence,
            body,
        } => {
            out.push_str(&format!("fixedPoint until ({}: {}) ", flag.name, expr(convergence)));
            block(body, level, out);
        }
        StmtKind::IterateInBfs {
            var,
            graph,
            root,
            body,
            reverse,
        } => {
            out.push_str(&format!(
                "iterateInBFS ({} in {}.nodes() from {}) ",
                var.name,
                graph.name,
                expr(root)
            ));
            block(body, level, out);
            if let Some(r) = reverse {
                out.push('\n');
                indent(level, out);
                out.push_str("iterateInReverse ");
                if let Some(f) = &r.filter {
                    out.push_str(&format!("({}) ", expr(f)));
                }
                block(&r.body, level, out);
            }
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            out.push_str(&format!("if ({}) ", expr(cond)));
            block(then_block, level, out);
            if let Some(e) = else_block {
                out.push_str(" else ");
                block(e, level, out);
            }
        }
        StmtKind::MinMax {
            targets,
            kind,
            compare,
            attached,
        } => {
            let ts: Vec<String> = targets.iter().map(expr).collect();
            let mut rhs = format!("{}({}, {})", kind.keyword(), expr(&compare.0), expr(&compare.1));
            for a in attached {
                rhs.push_str(", ");
                rhs.push_str(&expr_prec(a, BinaryOp::Add.precedence()));
            }
            out.push_str(&format!("<{}> = <{}>;", ts.join(", "), rhs));
        }
        StmtKind::Call { receiver, method, args } => {
            if let Some(r) = receiver {
                out.push_str(&r.name);
                out.push('.');
            }
            let args: Vec<String> = args
                .iter()
                .map(|a| match &a.name {
                    Some(n) => format!("{} = {}", n.name, expr(&a.value)),
                    None => expr(&a.value),
                })
                .collect();
            out.push_str(&format!("{}({});", method.name, args.join(", ")));
        }
        StmtKind::Return(e) => match e {
            Some(e) => out.push_str(&format!("return {};", expr(e))),
            None => out.push_str("return;"),
        },
    }
    out.push('\n');
}

fn domain_str(d: &Domain) -> String {
    match d {
        Domain::Nodes { graph } => format!("{}.nodes()", graph.name),
        Domain::Neighbors { graph, of } => format!("{}.neighbors({})", graph.name, expr(of)),
        Domain::NodesTo { graph, of } => format!("{}.nodes_to({})", graph.name, expr(of)),
        Domain::Set { name } => name.name.clone(),
    }
}

pub fn expr(e: &Expr) -> String {
    expr_prec(e, 0)
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(i) => i.to_string(),
        // Debug formatting keeps a `.` or exponent, so the text relexes as a float.
        Literal::Float(f) => format!("{f:?}"),
        Literal::Bool(true) => "True".into(),
        Literal::Bool(false) => "False".into(),
        Literal::Inf => "INF".into(),
    }
}

fn expr_prec(e: &Expr, min_prec: u8) -> String {
    match &e.kind {
        ExprKind::Lit(l) => literal(l),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Prop { object, name } => format!("{}.{}", expr_prec(object, 6), name.name),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnaryOp::Not => "!",
                UnaryOp::Neg => "-",
            };
            format!("{sym}{}", expr_prec(operand, 6))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let s = format!("{} {} {}", expr_prec(lhs, p), op.symbol(), expr_prec(rhs, p + 1));
            if p < min_prec {
                format!("({s})")
            } else {
                s
            }
        }
        ExprKind::Call { receiver, method, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            match receiver {
                Some(r) => format!("{}.{}({})", r.name, method.name, args.join(", ")),
                None => format!("{}({})", method.name, args.join(", ")),
            }
        }
    }
}
