//! Seeded generator of small, well-typed DSL programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gen {
    rng: ChaCha8Rng,
    out: String,
    depth: usize,
    /// Host scalars in scope: (name, is_int).
    scalars: Vec<(String, bool)>,
    next_id: usize,
}

/// Properties every generated program declares as parameters.
const HEADER: &str = "function Rand(Graph g, propNode<int> a, propNode<double> b, propNode<bool> m, node s) {\n";

pub fn random_program(seed: u64) -> String {
    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: String::from(HEADER),
        depth: 1,
        scalars: Vec::new(),
        next_id: 0,
    };
    gen.line("g.attachNodeProperty(a = 0, b = 1.0, m = False);");
    let count = gen.rng.gen_range(2..=6);
    for _ in 0..count {
        gen.host_stmt(true);
    }
    if gen.rng.gen_bool(0.3) {
        if let Some((name, _)) = gen.scalars.first().cloned() {
            gen.line(&format!("return {name};"));
        }
    }
    gen.out.push_str("}\n");
    gen.out
}

impl Gen {
    fn line(&mut self, s: &str) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn fresh(&mut self, base: &str) -> String {
        self.next_id += 1;
        format!("{base}{}", self.next_id)
    }

    fn open(&mut self, head: &str) {
        self.line(&format!("{head} {{"));
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.line("}");
    }

    fn int_scalar(&mut self) -> Option<String> {
        let ints: Vec<String> = self
            .scalars
            .iter()
            .filter(|(_, i)| *i)
            .map(|(n, _)| n.clone())
            .collect();
        ints.choose(&mut self.rng).cloned()
    }

    fn int_expr(&mut self, node: Option<&str>) -> String {
        let mut opts = vec![format!("{}", self.rng.gen_range(0..5)), "g.num_nodes()".to_string()];
        if let Some(v) = node {
            opts.push(format!("{v}.a"));
            opts.push(format!("g.count_outNbrs({v})"));
        }
        if let Some(x) = self.int_scalar() {
            opts.push(x);
        }
        let a = opts.choose(&mut self.rng).unwrap().clone();
        if self.rng.gen_bool(0.4) {
            let b = opts.choose(&mut self.rng).unwrap().clone();
            let op = ["+", "-", "*"].choose(&mut self.rng).unwrap();
            format!("{a} {op} {b}")
        } else {
            a
        }
    }

    fn double_expr(&mut self, node: Option<&str>) -> String {
        let mut opts = vec!["0.5".to_string(), "2.0".to_string()];
        if let Some(v) = node {
            opts.push(format!("{v}.b"));
        }
        let a = opts.choose(&mut self.rng).unwrap().clone();
        format!("{a} + {}", self.int_expr(node))
    }

    fn bool_expr(&mut self, node: Option<&str>) -> String {
        let l = self.int_expr(node);
        let r = self.int_expr(node);
        let op = ["<", ">", "==", "!=", "<=", ">="].choose(&mut self.rng).unwrap();
        match node {
            Some(v) if self.rng.gen_bool(0.3) => format!("{v}.m == True || {l} {op} {r}"),
            _ => format!("{l} {op} {r}"),
        }
    }

    fn host_stmt(&mut self, allow_loops: bool) {
        let choice = self.rng.gen_range(0..if allow_loops { 9 } else { 5 });
        match choice {
            0 => {
                let name = self.fresh("x");
                let e = self.int_expr(None);
                self.line(&format!("int {name} = {e};"));
                self.scalars.push((name, true));
            }
            1 => {
                if let Some(x) = self.int_scalar() {
                    let e = self.int_expr(None);
                    self.line(&format!("{x} = {x} + {e};"));
                } else {
                    self.line("s.a = 7;");
                }
            }
            2 => {
                let e = self.int_expr(Some("s"));
                self.line(&format!("s.a = {e};"));
            }
            3 | 4 => self.region(),
            5 => {
                self.fixed_point_min();
            }
            6 => {
                let it = self.fresh("it");
                let done = self.fresh("done");
                let k = self.rng.gen_range(1..4);
                self.line(&format!("int {it} = 0;"));
                self.line(&format!("bool {done} = False;"));
                self.open(&format!("fixedPoint until ({done}: {it} >= {k})"));
                let scope = self.scalars.len();
                let inner = self.rng.gen_range(1..3);
                for _ in 0..inner {
                    self.host_stmt(false);
                }
                self.line(&format!("{it}++;"));
                self.close();
                self.scalars.truncate(scope);
                self.scalars.push((it, true));
            }
            7 => self.bfs(),
            _ => {
                let c = self.bool_expr(None);
                self.open(&format!("if ({c})"));
                let scope = self.scalars.len();
                self.host_stmt(false);
                self.close();
                self.scalars.truncate(scope);
            }
        }
    }

    fn region(&mut self) {
        let v = self.fresh("v");
        let filter = if self.rng.gen_bool(0.4) {
            format!(".filter({})", self.bool_expr(Some(&v)))
        } else {
            String::new()
        };
        self.open(&format!("forall ({v} in g.nodes(){filter})"));
        let n = self.rng.gen_range(1..4);
        for _ in 0..n {
            self.device_stmt(&v, 0);
        }
        self.close();
    }

    fn device_stmt(&mut self, v: &str, nest: usize) {
        match self.rng.gen_range(0..7) {
            0 => {
                let t = self.fresh("t");
                let e = self.int_expr(Some(v));
                self.line(&format!("int {t} = {e};"));
                self.line(&format!("{v}.a = {t} + 1;"));
            }
            1 => {
                let e = self.double_expr(Some(v));
                self.line(&format!("{v}.b = {e};"));
            }
            2 => match self.int_scalar() {
                Some(x) => {
                    let e = self.int_expr(Some(v));
                    self.line(&format!("{x} += {e};"));
                }
                None => self.line(&format!("{v}.m = True;")),
            },
            3 if nest == 0 => {
                let w = self.fresh("w");
                self.open(&format!("forall ({w} in g.neighbors({v}))"));
                let e = self.double_expr(Some(v));
                self.line(&format!("{w}.b += {e};"));
                if self.rng.gen_bool(0.5) {
                    self.device_stmt(&w, nest + 1);
                }
                self.close();
            }
            4 if nest == 0 => {
                let w = self.fresh("w");
                self.open(&format!("for ({w} in g.nodes_to({v}))"));
                self.line(&format!("<{v}.a> = <Max({v}.a, {w}.a)>;"));
                self.close();
            }
            5 => {
                let c = self.bool_expr(Some(v));
                self.open(&format!("if ({c})"));
                self.line(&format!("{v}.m = True;"));
                self.close();
            }
            _ => {
                let e = self.int_expr(Some(v));
                self.line(&format!("<s.a> = <Min(s.a, {e})>;"));
            }
        }
    }

    fn fixed_point_min(&mut self) {
        let fin = self.fresh("fin");
        let (v, w) = (self.fresh("v"), self.fresh("w"));
        self.line("g.attachNodeProperty(m = False);");
        self.line("s.m = True;");
        self.line(&format!("bool {fin} = False;"));
        self.open(&format!("fixedPoint until ({fin}: !m)"));
        self.open(&format!("forall ({v} in g.nodes().filter({v}.m == True))"));
        self.open(&format!("forall ({w} in g.neighbors({v}))"));
        self.line(&format!("<{w}.a, {w}.m> = <Min({w}.a, {v}.a + 1), True>;"));
        self.close();
        self.close();
        self.close();
    }

    fn bfs(&mut self) {
        let (v, w) = (self.fresh("v"), self.fresh("w"));
        self.open(&format!("iterateInBFS ({v} in g.nodes() from s)"));
        self.open(&format!(
            "forall ({w} in g.neighbors({v}).filter({w}.level == {v}.level + 1))"
        ));
        self.line(&format!("{w}.b += {v}.b;"));
        self.close();
        self.close();
        if self.rng.gen_bool(0.7) {
            let u = self.fresh("u");
            self.open(&format!("iterateInReverse ({v} != s)"));
            self.open(&format!(
                "forall ({u} in g.neighbors({v}).filter({u}.level == {v}.level + 1))"
            ));
            self.line(&format!("{v}.a += {u}.a + 1;"));
            self.close();
            self.close();
        }
    }
}
