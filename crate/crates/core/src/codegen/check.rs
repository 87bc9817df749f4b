//! Re-reads an emitted unit and checks its transfer and atomicity contracts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::gen::c_names;
use super::{BackendKind, Direction, EmitUnit};
use crate::frontend::ast::{MinMaxKind, ReduceOp};
use crate::semantic::*;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Region facts the check needs from the typed tree.
#[derive(Default)]
struct RegionFacts {
    /// Convergence properties of every enclosing fixedPoint: prop -> flag.
    fused: BTreeMap<SymbolId, SymbolId>,
    /// Expected idiom -> number of sites.
    idioms: BTreeMap<String, usize>,
}

struct Checker<'a> {
    unit: &'a EmitUnit,
    p: &'a AnnotatedProgram,
    an: &'a Analyses,
    names: Vec<String>,
    prefix: String,
    host: Vec<&'a str>,
    kernel_file: Vec<&'a str>,
    out: Vec<String>,
}

/// Checks `unit` against the analyses it was generated from. The check works
/// on the text, so hand-edited or mutated units are judged by what they say.
pub fn structural_check(unit: &EmitUnit, program: &AnnotatedProgram, analyses: &Analyses) -> CheckReport {
    let prefix = unit.structure.device_prefix.clone();
    let host = unit.files.first().map(|(_, t)| t.lines().collect()).unwrap_or_default();
    let kernel_file = unit.files.get(1).map(|(_, t)| t.lines().collect()).unwrap_or_default();
    let mut c = Checker {
        unit,
        p: program,
        an: analyses,
        names: c_names(program, &prefix),
        prefix,
        host,
        kernel_file,
        out: Vec::new(),
    };
    let facts = c.region_facts();
    c.scopes(&facts);
    c.kernels(&facts);
    c.fixed_points();
    c.bfs();
    c.graph_arrays();
    CheckReport { violations: c.out }
}

/// Parsed transfer statement: (device-side symbol, direction).
fn parse_transfer(b: BackendKind, line: &str, prefix: &str) -> Option<(String, Direction)> {
    let t = line.trim();
    let args = |head: &str| -> Option<Vec<String>> {
        let rest = t.strip_prefix(head)?;
        let inner = &rest[..rest.rfind(')')?];
        Some(inner.split(',').map(|a| a.trim().to_string()).collect())
    };
    let strip = |s: &str| s.strip_prefix(prefix).map(str::to_string);
    match b {
        BackendKind::Cuda => {
            let a = args("cudaMemcpy(")?;
            if a.len() < 4 {
                return None;
            }
            if a[3] == "cudaMemcpyHostToDevice" {
                Some((strip(&a[0])?, Direction::HostToDevice))
            } else if a[3] == "cudaMemcpyDeviceToHost" {
                Some((strip(&a[1])?, Direction::DeviceToHost))
            } else {
                None
            }
        }
        BackendKind::Sycl => {
            let a = args("Q.memcpy(")?;
            if a.len() < 2 {
                return None;
            }
            match strip(&a[0]) {
                Some(s) => Some((s, Direction::HostToDevice)),
                None => Some((strip(&a[1])?, Direction::DeviceToHost)),
            }
        }
        BackendKind::OpenCl => {
            if let Some(a) = args("clEnqueueWriteBuffer(") {
                Some((strip(a.get(1)?)?, Direction::HostToDevice))
            } else {
                let a = args("clEnqueueReadBuffer(")?;
                Some((strip(a.get(1)?)?, Direction::DeviceToHost))
            }
        }
        BackendKind::OpenAcc => None,
    }
}

/// Data-clause items of an OpenACC pragma: (name, H2D, D2H).
fn parse_acc_clauses(line: &str) -> Vec<(String, bool, bool)> {
    let mut out = Vec::new();
    for (clause, h2d, d2h) in [
        ("copyin(", true, false),
        ("copyout(", false, true),
        ("copy(", true, true),
        ("create(", false, false),
    ] {
        let mut rest = line;
        while let Some(i) = rest.find(clause) {
            let before = rest[..i].chars().last();
            rest = &rest[i + clause.len()..];
            if before.is_some_and(|c| c.is_alphanumeric() || c == '_') {
                continue;
            }
            let mut depth = 0;
            let mut end = rest.len();
            for (j, ch) in rest.char_indices() {
                match ch {
                    '(' | '[' => depth += 1,
                    ']' => depth -= 1,
                    ')' if depth == 0 => {
                        end = j;
                        break;
                    }
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            for item in rest[..end].split(", ") {
                let name = item.split('[').next().unwrap_or("").trim();
                if !name.is_empty() {
                    out.push((name.to_string(), h2d, d2h));
                }
            }
        }
    }
    out
}

/// Line range `[start, end]` of the brace block that opens at or after `start`.
fn block_end(lines: &[&str], start: usize) -> usize {
    let mut depth = 0i32;
    let mut opened = false;
    for (i, l) in lines.iter().enumerate().skip(start) {
        for ch in l.chars() {
            match ch {
                '{' => {
                    depth += 1;
                    opened = true;
                }
                '}' => depth -= 1,
                _ => {}
            }
        }
        if opened && depth <= 0 {
            return i;
        }
    }
    lines.len().saturating_sub(1)
}

fn count(text: &[&str], pat: &str) -> usize {
    text.iter().map(|l| l.matches(pat).count()).sum()
}

impl<'a> Checker<'a> {
    fn b(&self) -> BackendKind {
        self.unit.backend
    }

    fn acc(&self) -> bool {
        self.b() == BackendKind::OpenAcc
    }

    fn kernel_name(&self, r: RegionId) -> String {
        self.unit
            .structure
            .kernels
            .iter()
            .find(|k| k.region == r)
            .map(|k| k.name.clone())
            .unwrap_or_else(|| format!("{}_kernel_{r}", self.p.name))
    }

    fn find_marker(&self, marker: &str) -> Option<usize> {
        self.host
            .iter()
            .position(|l| l.trim() == marker || l.trim().starts_with(&format!("{marker}:")))
    }

    fn is_launch(&self, line: &str, k: &str) -> bool {
        let t = line.trim();
        match self.b() {
            BackendKind::Cuda => t.starts_with(&format!("{k}<<<")),
            BackendKind::OpenCl => t.contains(&format!("clEnqueueNDRangeKernel(queue, {k},")),
            _ => t == format!("// {k}"),
        }
    }

    fn launches_of(&self, k: &str, from: usize, to: usize) -> Vec<usize> {
        (from..=to.min(self.host.len().saturating_sub(1)))
            .filter(|&i| self.is_launch(self.host[i], k))
            .collect()
    }

    fn transfers_in(&self, from: usize, to: usize) -> Vec<(usize, String, Direction)> {
        let mut out = Vec::new();
        for i in from..to.min(self.host.len()) {
            if let Some((s, d)) = parse_transfer(self.b(), self.host[i], &self.prefix) {
                out.push((i, s, d));
            }
        }
        out
    }

    fn region_facts(&self) -> BTreeMap<RegionId, RegionFacts> {
        let mut out = BTreeMap::new();
        self.facts_walk(&self.p.body, &mut BTreeMap::new(), &mut out);
        out
    }

    fn facts_walk(
        &self,
        stmts: &[TStmt],
        fused: &mut BTreeMap<SymbolId, SymbolId>,
        out: &mut BTreeMap<RegionId, RegionFacts>,
    ) {
        for s in stmts {
            match &s.kind {
                TStmtKind::ForAll {
                    region: Some(r), body, ..
                } => {
                    let f = self.facts_for(body, fused, false);
                    out.insert(*r, f);
                }
                TStmtKind::Bfs {
                    body, region, reverse, ..
                } => {
                    out.insert(*region, self.facts_for(body, fused, true));
                    if let Some(rev) = reverse {
                        out.insert(rev.region, self.facts_for(&rev.body, fused, false));
                    }
                }
                TStmtKind::FixedPoint {
                    flag,
                    convergence,
                    body,
                    ..
                } => {
                    let prev = match convergence {
                        Convergence::Property { prop, .. } => Some((*prop, fused.insert(*prop, *flag))),
                        Convergence::Scalar(_) => None,
                    };
                    self.facts_walk(body, fused, out);
                    if let Some((prop, old)) = prev {
                        match old {
                            Some(f) => fused.insert(prop, f),
                            None => fused.remove(&prop),
                        };
                    }
                }
                _ => {
                    for child in child_blocks(s) {
                        self.facts_walk(child, fused, out);
                    }
                }
            }
        }
    }

    fn facts_for(&self, body: &[TStmt], fused: &BTreeMap<SymbolId, SymbolId>, bfs_forward: bool) -> RegionFacts {
        let mut f = RegionFacts {
            fused: fused.clone(),
            idioms: BTreeMap::new(),
        };
        let acc = self.acc();
        let mut clauses: BTreeSet<String> = BTreeSet::new();
        if acc && bfs_forward {
            clauses.insert("reduction(&&:bfs_finished)".into());
            f.idioms.insert("#pragma acc atomic write".into(), 1);
        }
        let local = |s: SymbolId| self.p.symbols[s].region.is_some();
        let ty = |s: SymbolId| self.p.symbols[s].ty.unwrap_or(ScalarType::Int);
        let emulate = |t: ScalarType| t.is_floating() && self.unit_emulates();
        walk_stmts(body, &mut |s| {
            let mut writes: Vec<SymbolId> = Vec::new();
            match &s.kind {
                TStmtKind::Reduce { place, op, .. } if !local(place.symbol()) => {
                    let t = place.symbol();
                    let name = &self.names[t];
                    let scalar = matches!(place, Place::Var(_));
                    let idiom: Option<String> = match (self.b(), op) {
                        (BackendKind::OpenAcc, ReduceOp::All | ReduceOp::Any) if scalar => {
                            let o = if *op == ReduceOp::All { "&&" } else { "||" };
                            clauses.insert(format!("reduction({o}:{name})"));
                            None
                        }
                        (BackendKind::OpenAcc, ReduceOp::All | ReduceOp::Any) => {
                            Some("#pragma acc atomic write".into())
                        }
                        (_, ReduceOp::All | ReduceOp::Any) => None,
                        (BackendKind::OpenAcc, _) if scalar => {
                            let o = if *op == ReduceOp::Product { "*" } else { "+" };
                            clauses.insert(format!("reduction({o}:{name})"));
                            None
                        }
                        (BackendKind::OpenAcc, _) => Some("#pragma acc atomic update".into()),
                        (BackendKind::Cuda, ReduceOp::Product) => Some("atomicMul(".into()),
                        (BackendKind::Cuda, _) if emulate(ty(t)) => Some("atomicAddCas(".into()),
                        (BackendKind::Cuda, _) => Some("atomicAdd(".into()),
                        (BackendKind::Sycl, ReduceOp::Product) => Some("atomic_mul<".into()),
                        (BackendKind::Sycl, _) if emulate(ty(t)) => Some("atomic_add_cas<".into()),
                        (BackendKind::Sycl, _) => Some(".fetch_add(".into()),
                        (BackendKind::OpenCl, ReduceOp::Product) => Some("cmpxchg_mul_".into()),
                        (BackendKind::OpenCl, _) => Some(
                            match ty(t) {
                                ScalarType::Long => "atom_add(",
                                x if x.is_floating() => "cmpxchg_add_double(",
                                _ => "atomic_add(",
                            }
                            .into(),
                        ),
                    };
                    if let Some(i) = idiom {
                        *f.idioms.entry(i).or_insert(0) += 1;
                    }
                }
                TStmtKind::MinMax { kind, targets, .. } => {
                    let t = targets[0].symbol();
                    writes.extend(targets[1..].iter().map(Place::symbol));
                    if !local(t) {
                        let name = &self.names[t];
                        let min = *kind == MinMaxKind::Min;
                        let scalar = matches!(targets[0], Place::Var(_));
                        let idiom = match self.b() {
                            BackendKind::OpenAcc if scalar => {
                                let o = if min { "min" } else { "max" };
                                clauses.insert(format!("reduction({o}:{name})"));
                                None
                            }
                            BackendKind::OpenAcc => Some("#pragma acc atomic write"),
                            BackendKind::Cuda => Some(if min { "atomicMin(" } else { "atomicMax(" }),
                            BackendKind::Sycl => Some(if min { ".fetch_min(" } else { ".fetch_max(" }),
                            BackendKind::OpenCl => Some(if min { "cmpxchg_min_" } else { "cmpxchg_max_" }),
                        };
                        // OpenACC also guards each attached store.
                        let extra = match self.b() {
                            BackendKind::OpenAcc if !scalar => {
                                targets[1..].iter().filter(|p| !local(p.symbol())).count()
                            }
                            _ => 0,
                        };
                        if let Some(i) = idiom {
                            *f.idioms.entry(i.to_string()).or_insert(0) += 1 + extra;
                        }
                    }
                }
                TStmtKind::Assign { place, .. } => writes.push(place.symbol()),
                _ => {}
            }
            if acc {
                for w in writes {
                    if let Some(flag) = fused.get(&w) {
                        clauses.insert(format!("reduction(&&:{})", self.names[*flag]));
                    }
                }
            }
        });
        for c in clauses {
            f.idioms.insert(c, 1);
        }
        f
    }

    fn unit_emulates(&self) -> bool {
        let host = self.host.join("\n");
        host.contains("atomicAddCas(&") || host.contains("atomic_add_cas<")
    }

    fn scopes(&mut self, facts: &BTreeMap<RegionId, RegionFacts>) {
        for sc in &self.an.transfers.scopes {
            let begin = self.find_marker(&format!("// transfer scope {}", sc.id));
            let end = self.find_marker(&format!("// end transfer scope {}", sc.id));
            let (Some(begin), Some(end)) = (begin, end) else {
                self.out.push(format!("scope {}: markers missing", sc.id));
                continue;
            };
            let fused = sc
                .regions
                .first()
                .and_then(|r| facts.get(r))
                .map(|f| f.fused.clone())
                .unwrap_or_default();
            let expect = |set: &BTreeSet<SymbolId>| -> Vec<String> {
                let mut v = Vec::new();
                for &s in set {
                    if self.p.symbols[s].region.is_some() {
                        continue;
                    }
                    v.push(self.names[s].clone());
                    if fused.contains_key(&s) {
                        v.push(format!("{}_next", self.names[s]));
                    }
                }
                v
            };
            let ins = expect(&sc.copy_in);
            let outs = expect(&sc.copy_out);
            let mut launches = Vec::new();
            for &r in &sc.regions {
                let k = self.kernel_name(r);
                launches.extend(self.launches_of(&k, begin, end));
            }
            launches.sort();
            let (Some(&first), Some(&last)) = (launches.first(), launches.last()) else {
                self.out.push(format!("scope {}: no kernel launch", sc.id));
                continue;
            };
            if self.acc() {
                let clauses = self
                    .host
                    .get(begin + 1)
                    .filter(|l| l.trim_start().starts_with("#pragma acc data"))
                    .map(|l| parse_acc_clauses(l))
                    .unwrap_or_default();
                for x in &ins {
                    if !clauses.iter().any(|(n, h, _)| n == x && *h) {
                        self.out.push(format!("scope {}: missing H2D for {x}", sc.id));
                    }
                }
                for x in &outs {
                    if !clauses.iter().any(|(n, _, d)| n == x && *d) {
                        self.out.push(format!("scope {}: missing D2H for {x}", sc.id));
                    }
                }
                let bfs = sc
                    .regions
                    .iter()
                    .any(|r| self.p.regions[*r].kind == RegionKind::BfsForward);
                if bfs && !clauses.iter().any(|(n, _, _)| n == "level") {
                    self.out.push(format!("scope {}: level has no device copy", sc.id));
                }
                continue;
            }
            let transfers = self.transfers_in(begin, end + 1);
            for x in &ins {
                if !transfers
                    .iter()
                    .any(|(i, s, d)| s == x && *d == Direction::HostToDevice && *i < first)
                {
                    self.out.push(format!("scope {}: missing H2D for {x}", sc.id));
                }
            }
            for x in &outs {
                if !transfers
                    .iter()
                    .any(|(i, s, d)| s == x && *d == Direction::DeviceToHost && *i > last)
                {
                    self.out.push(format!("scope {}: missing D2H for {x}", sc.id));
                }
            }
        }
    }

    /// Text of kernel `k`, from its definition or launch comment to the end
    /// of its body.
    fn kernel_text(&self, k: &str) -> Option<Vec<&'a str>> {
        let (lines, start) = match self.b() {
            BackendKind::Cuda => {
                let head = format!("__global__ void {k}(");
                (
                    &self.host,
                    self.host.iter().position(|l| l.trim_start().starts_with(&head))?,
                )
            }
            BackendKind::OpenCl => {
                let head = format!("__kernel void {k}(");
                (
                    &self.kernel_file,
                    self.kernel_file
                        .iter()
                        .position(|l| l.trim_start().starts_with(&head))?,
                )
            }
            _ => {
                let head = format!("// {k}");
                (&self.host, self.host.iter().position(|l| l.trim() == head)?)
            }
        };
        let end = block_end(lines, start);
        Some(lines[start..=end].to_vec())
    }

    fn kernels(&mut self, facts: &BTreeMap<RegionId, RegionFacts>) {
        for region in &self.p.regions {
            let k = self.kernel_name(region.id);
            let Some(text) = self.kernel_text(&k) else {
                self.out.push(format!("kernel {k} is not defined"));
                continue;
            };
            if matches!(self.b(), BackendKind::Cuda | BackendKind::OpenCl)
                && self.launches_of(&k, 0, self.host.len()).is_empty()
            {
                self.out.push(format!("kernel {k} is never launched"));
            }
            if let Some(f) = facts.get(&region.id) {
                for (idiom, want) in &f.idioms {
                    let got = count(&text, idiom);
                    if got < *want {
                        self.out
                            .push(format!("kernel {k}: expected {want} x `{idiom}`, found {got}"));
                    }
                }
            }
            if matches!(self.b(), BackendKind::Cuda | BackendKind::OpenCl) {
                let head = text.first().copied().unwrap_or("");
                for a in &self.an.transfers.regions[region.id].graph_arrays {
                    let n = format!("{}{}", self.prefix, a.name());
                    if !head.contains(&n) {
                        self.out
                            .push(format!("kernel {k}: graph array {} is not a parameter", a.name()));
                    }
                }
            }
            if self.b() == BackendKind::OpenCl {
                self.opencl_float_rule(&k, &text);
            }
        }
    }

    fn opencl_float_rule(&mut self, k: &str, text: &[&str]) {
        for l in text {
            for op in [
                "atomic_add(&",
                "atom_add(&",
                "atomic_min(&",
                "atomic_max(&",
                "atomic_xchg(&",
            ] {
                let mut rest = *l;
                while let Some(i) = rest.find(op) {
                    rest = &rest[i + op.len()..];
                    let target: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
                    let name = target.strip_prefix(self.prefix.as_str()).unwrap_or(&target);
                    let name = name.strip_suffix("_next").unwrap_or(name);
                    let floating = self
                        .p
                        .symbols
                        .iter()
                        .enumerate()
                        .any(|(id, s)| self.names[id] == name && s.ty.is_some_and(|t| t.is_floating()));
                    if floating {
                        self.out
                            .push(format!("kernel {k}: float atomics must use atomic_cmpxchg ({name})"));
                    }
                }
            }
        }
    }

    fn fixed_points(&mut self) {
        for fp in &self.an.fixed_points {
            if fp.property.is_none() || fp.regions.is_empty() {
                continue;
            }
            let flag = self.names[fp.flag].clone();
            let begin = self.find_marker(&format!("// fixedPoint {} until {flag}", fp.id));
            let end = self.find_marker(&format!("// end fixedPoint {}", fp.id));
            let (Some(begin), Some(end)) = (begin, end) else {
                self.out.push(format!("fixedPoint {}: markers missing", fp.id));
                continue;
            };
            if self.acc() {
                let copied = (begin..end).any(|i| {
                    let l = self.host[i];
                    l.trim_start().starts_with("#pragma acc data")
                        && parse_acc_clauses(l).iter().any(|(n, h, d)| *n == flag && *h && *d)
                });
                if !copied {
                    self.out
                        .push(format!("fixedPoint {}: flag {flag} is not copied both ways", fp.id));
                }
                continue;
            }
            let t = self.transfers_in(begin, end);
            for (d, what) in [
                (Direction::HostToDevice, "copied to the device"),
                (Direction::DeviceToHost, "copied back"),
            ] {
                if !t.iter().any(|(_, s, x)| *s == flag && *x == d) {
                    self.out
                        .push(format!("fixedPoint {}: flag {flag} is not {what}", fp.id));
                }
            }
        }
    }

    fn bfs(&mut self) {
        if self.acc() {
            return;
        }
        for region in self.p.regions.iter().filter(|r| r.kind == RegionKind::BfsForward) {
            let k = self.kernel_name(region.id);
            let Some(&launch) = self.launches_of(&k, 0, self.host.len()).first() else {
                continue;
            };
            let start = (0..launch).rev().find(|&i| self.host[i].trim() == "do {");
            let end = (launch..self.host.len()).find(|&i| self.host[i].trim() == "} while (!bfs_finished);");
            let (Some(start), Some(end)) = (start, end) else {
                self.out.push(format!("bfs kernel {k}: level loop missing"));
                continue;
            };
            let t = self.transfers_in(start, end);
            if !t
                .iter()
                .any(|(i, s, d)| s == "bfs_finished" && *d == Direction::HostToDevice && *i < launch)
            {
                self.out.push(format!("bfs kernel {k}: missing H2D for bfs_finished"));
            }
            if !t
                .iter()
                .any(|(i, s, d)| s == "bfs_finished" && *d == Direction::DeviceToHost && *i > launch)
            {
                self.out.push(format!("bfs kernel {k}: missing D2H for bfs_finished"));
            }
            let level = self.transfers_in(0, start);
            if !level
                .iter()
                .any(|(_, s, d)| s == "level" && *d == Direction::HostToDevice)
            {
                self.out.push(format!("bfs kernel {k}: missing H2D for level"));
            }
        }
    }

    fn graph_arrays(&mut self) {
        let arrays: Vec<GraphArray> = self.an.transfers.graph_arrays.iter().copied().collect();
        if self.acc() {
            let enter = self
                .host
                .iter()
                .find(|l| l.trim_start().starts_with("#pragma acc enter data"))
                .map(|l| parse_acc_clauses(l))
                .unwrap_or_default();
            for a in arrays {
                if !enter.iter().any(|(n, h, _)| n == a.name() && *h) {
                    self.out
                        .push(format!("graph array {} is never copied to the device", a.name()));
                }
            }
            return;
        }
        let all = self.transfers_in(0, self.host.len());
        let mut loops: Vec<(usize, usize)> = Vec::new();
        for (i, l) in self.host.iter().enumerate() {
            if l.trim().starts_with("// fixedPoint ") {
                let id = l.trim()["// fixedPoint ".len()..].split(' ').next().unwrap_or("");
                let end = self.find_marker(&format!("// end fixedPoint {id}")).unwrap_or(i);
                loops.push((i, end));
            }
        }
        for a in arrays {
            let sites: Vec<&(usize, String, Direction)> = all.iter().filter(|(_, s, _)| s == a.name()).collect();
            let h2d: Vec<usize> = sites
                .iter()
                .filter(|(_, _, d)| *d == Direction::HostToDevice)
                .map(|(i, _, _)| *i)
                .collect();
            if h2d.len() != 1 {
                self.out.push(format!(
                    "graph array {} must be copied to the device once, found {}",
                    a.name(),
                    h2d.len()
                ));
            }
            if h2d.iter().any(|i| loops.iter().any(|(s, e)| s < i && i < e)) {
                self.out
                    .push(format!("graph array {} is copied inside a fixedPoint", a.name()));
            }
            if sites.iter().any(|(_, _, d)| *d == Direction::DeviceToHost) {
                self.out
                    .push(format!("graph array {} is copied back to the host", a.name()));
            }
        }
    }
}
