//! Line-oriented text dump of the analyses, stable across runs.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::*;

fn names(p: &AnnotatedProgram, set: &BTreeSet<SymbolId>) -> String {
    let mut v: Vec<&str> = set.iter().map(|s| p.name_of(*s)).collect();
    v.sort_unstable();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(" ")
    }
}

fn arrays(set: &BTreeSet<GraphArray>) -> String {
    if set.is_empty() {
        return "-".into();
    }
    set.iter().map(|a| a.name()).collect::<Vec<_>>().join(" ")
}

pub fn render(p: &AnnotatedProgram, a: &Analyses) -> String {
    let mut out = String::new();
    let t = &a.transfers;
    writeln!(out, "function {}", p.name).unwrap();
    writeln!(out, "graph-arrays {}", arrays(&t.graph_arrays)).unwrap();
    for r in &t.regions {
        let info = &p.regions[r.region];
        writeln!(
            out,
            "region {} {} var={} line={}",
            r.region,
            r.kind.name(),
            p.name_of(info.var),
            info.span.line
        )
        .unwrap();
        writeln!(out, "  copy_in {}", names(p, &r.copy_in)).unwrap();
        writeln!(out, "  copy_out {}", names(p, &r.copy_out)).unwrap();
        writeln!(out, "  device_only {}", names(p, &r.device_only)).unwrap();
        writeln!(out, "  graph {}", arrays(&r.graph_arrays)).unwrap();
    }
    for s in &t.scopes {
        let regions: Vec<String> = s.regions.iter().map(|r| r.to_string()).collect();
        writeln!(out, "scope {} regions={}", s.id, regions.join(",")).unwrap();
        writeln!(out, "  copy_in {}", names(p, &s.copy_in)).unwrap();
        writeln!(out, "  copy_out {}", names(p, &s.copy_out)).unwrap();
        writeln!(out, "  device_only {}", names(p, &s.device_only)).unwrap();
    }
    for r in &a.reductions {
        writeln!(
            out,
            "reduction {} {} region={} fixed_point_flag={} at {}:{}",
            p.name_of(r.target),
            r.op.name(),
            r.region,
            r.is_fixed_point_flag,
            r.span.line,
            r.span.col
        )
        .unwrap();
    }
    for f in &a.fixed_points {
        let conv = match (f.property, f.polarity) {
            (Some(prop), Some(Polarity::AllFalse)) => format!("all-false {}", p.name_of(prop)),
            (Some(prop), _) => format!("all-true {}", p.name_of(prop)),
            _ => "scalar".to_string(),
        };
        let sites: Vec<String> = f
            .fused_update_sites
            .iter()
            .map(|s| format!("{}:{}", s.line, s.col))
            .collect();
        writeln!(
            out,
            "fixed_point {} flag={} converge={} sites={}",
            f.id,
            p.name_of(f.flag),
            conv,
            if sites.is_empty() { "-".into() } else { sites.join(",") }
        )
        .unwrap();
    }
    for d in &p.diagnostics {
        let sev = match d.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        writeln!(out, "{sev} {}:{} {}", d.span.line, d.span.col, d.message).unwrap();
    }
    out
}
