use std::fmt::Write as _;
use std::io::{self, Write};
use std::process::ExitCode;

use graphdsl::csr::CsrError;
use graphdsl::frontend::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One `file:line:col: severity: message` line, plus a source excerpt when
/// the span is known.
#[derive(Debug, Clone)]
pub struct Diag {
    pub file: String,
    pub pos: Option<(u32, u32)>,
    pub severity: Severity,
    pub message: String,
    excerpt: Option<(String, usize, usize)>,
    usage: bool,
}

impl Diag {
    fn new(file: &str, severity: Severity, message: impl Into<String>) -> Self {
        Diag {
            file: file.to_string(),
            pos: None,
            severity,
            message: message.into(),
            excerpt: None,
            usage: false,
        }
    }

    pub fn error(file: &str, message: impl Into<String>) -> Self {
        Diag::new(file, Severity::Error, message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Diag {
            usage: true,
            ..Diag::new("graphdsl", Severity::Error, message)
        }
    }

    pub fn io(file: &str, e: io::Error) -> Self {
        Diag::error(file, e.to_string())
    }

    pub fn at(file: &str, source: &str, span: Span, message: impl Into<String>) -> Self {
        let mut d = Diag::error(file, message);
        d.locate(source, span);
        d
    }

    pub fn warning(file: &str, source: &str, span: Span, message: &str) -> Self {
        let mut d = Diag::new(file, Severity::Warning, message);
        d.locate(source, span);
        d
    }

    pub fn graph(file: &str, e: CsrError) -> Self {
        let mut d = Diag::error(file, e.to_string());
        if let CsrError::Parse { line, msg } = e {
            d.pos = Some((line as u32, 1));
            d.message = msg;
        }
        d
    }

    fn locate(&mut self, source: &str, span: Span) {
        if span.line == 0 {
            return;
        }
        self.pos = Some((span.line, span.col));
        if let Some(text) = source.lines().nth(span.line as usize - 1) {
            self.excerpt = Some((text.to_string(), span.col as usize, span.len.max(1)));
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(if self.usage { 2 } else { 1 })
    }
}

pub struct Reporter {
    color: bool,
}

impl Reporter {
    /// Coloring is on only when `GRAPHDSL_COLOR=1`.
    pub fn from_env() -> Self {
        Reporter {
            color: std::env::var("GRAPHDSL_COLOR").is_ok_and(|v| v == "1"),
        }
    }

    pub fn render(&self, d: &Diag) -> String {
        let (word, code) = match d.severity {
            Severity::Error => ("error", "31"),
            Severity::Warning => ("warning", "33"),
        };
        let sev = if self.color {
            format!("\x1b[1;{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        };
        let mut out = match d.pos {
            Some((l, c)) => format!("{}:{l}:{c}: {sev}: {}\n", d.file, d.message),
            None => format!("{}: {sev}: {}\n", d.file, d.message),
        };
        if let Some((text, col, len)) = &d.excerpt {
            let width = text.chars().count().saturating_sub(col - 1).max(1);
            let _ = writeln!(out, "  {text}");
            let _ = writeln!(out, "  {}{}", " ".repeat(col - 1), "^".repeat((*len).min(width)));
        }
        out
    }

    pub fn emit(&mut self, d: &Diag) {
        let _ = io::stderr().write_all(self.render(d).as_bytes());
    }
}
