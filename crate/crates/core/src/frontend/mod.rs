//! Lexing and parsing of DSL source text.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

use thiserror::Error;

pub use ast::{Program, Span};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use pretty::pretty_print;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{message}")]
    Lex { span: Span, message: String },
    #[error("expected {}, found {found}", expected_list(.expected))]
    Parse {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
    #[error("{message}")]
    Structural { span: Span, message: String },
}

fn expected_list(items: &[String]) -> String {
    match items {
        [one] => format!("`{one}`"),
        _ => format!(
            "one of {}",
            items.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", ")
        ),
    }
}

impl FrontendError {
    pub fn span(&self) -> Span {
        match self {
            FrontendError::Lex { span, .. }
            | FrontendError::Parse { span, .. }
            | FrontendError::Structural { span, .. } => *span,
        }
    }
}

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str) -> Result<Program, FrontendError> {
    let tokens = tokenize(source)?;
    parse(&tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn never_panics_and_spans_in_bounds(src in "\\PC{0,200}") {
            if let Err(e) = parse_source(&src) {
                let s = e.span();
                prop_assert!(s.offset + s.len <= src.len());
                prop_assert!(s.line >= 1 && s.col >= 1);
            }
        }

        #[test]
        fn never_panics_on_token_soup(
            words in proptest::collection::vec(
                prop::sample::select(vec![
                    "function", "f", "(", ")", "{", "}", "Graph", "g", "forall", "v", "in",
                    "g.nodes()", ".", "filter", "<", ">", "=", "Min", ",", ";", "x", "+=",
                    "iterateInBFS", "iterateInReverse", "from", "fixedPoint", "until", ":",
                    "!", "1", "2.5", "True", "INF", "propNode", "int", "if", "else", "return",
                ]),
                0..60,
            )
        ) {
            let src = words.join(" ");
            if let Err(e) = parse_source(&src) {
                prop_assert!(e.span().end() <= src.len());
            }
        }

        #[test]
        fn lexemes_tile_the_source(src in "[a-z0-9 +*/<>=!&|;(){}.,:\\n-]{0,120}") {
            if let Ok(tokens) = tokenize(&src) {
                let mut pos = 0;
                let mut last = (1, 1);
                for t in &tokens {
                    let gap = &src[pos..t.span.offset];
                    // Gaps hold only whitespace and comments.
                    let stripped: String = gap
                        .lines()
                        .map(|l| l.split("//").next().unwrap_or(""))
                        .collect();
                    prop_assert!(stripped.trim().is_empty(), "gap {:?}", gap);
                    prop_assert_eq!(&src[t.span.offset..t.span.end()], t.lexeme.as_str());
                    prop_assert!((t.span.line, t.span.col) >= last);
                    last = (t.span.line, t.span.col);
                    pos = t.span.end();
                }
                prop_assert_eq!(pos, src.len());
            }
        }
    }
}
