use super::ast::Span;
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Ident,
    IntLit,
    FloatLit,
    BoolLit,
    Op,
    Punct,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }
}

pub const KEYWORDS: &[&str] = &[
    "function",
    "forall",
    "for",
    "in",
    "if",
    "else",
    "fixedPoint",
    "until",
    "iterateInBFS",
    "iterateInReverse",
    "from",
    "return",
    "filter",
    "Min",
    "Max",
    "INF",
    "int",
    "long",
    "float",
    "double",
    "bool",
    "node",
    "edge",
    "Graph",
    "propNode",
    "propEdge",
    "setNode",
];

// Longest first so that prefix operators never shadow longer ones.
const OPERATORS: &[&str] = &[
    "&&=", "||=", "++", "+=", "*=", "==", "!=", "<=", ">=", "&&", "||", "+", "-", "*", "/", "%", "=", "<", ">", "!",
];

const PUNCT: &[char] = &['(', ')', '{', '}', ',', '.', ';', ':'];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: (usize, u32, u32)) -> Span {
        Span::new(start.1, start.2, start.0, self.pos - start.0)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }
}

/// Splits source text into tokens, dropping whitespace and `//` comments.
/// The stream always ends with an [`TokenKind::Eof`] token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let start = cur.mark();
        if c.is_ascii_alphabetic() || c == '_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            let word = &source[start.0..cur.pos];
            let kind = if matches!(word, "True" | "False" | "true" | "false") {
                TokenKind::BoolLit
            } else if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                lexeme: word.to_string(),
                span: cur.span_from(start),
            });
            continue;
        }
        if c.is_ascii_digit() {
            tokens.push(lex_number(&mut cur, start)?);
            continue;
        }
        if let Some(op) = OPERATORS.iter().find(|op| source[cur.pos..].starts_with(**op)) {
            for _ in 0..op.len() {
                cur.bump();
            }
            tokens.push(Token {
                kind: TokenKind::Op,
                lexeme: op.to_string(),
                span: cur.span_from(start),
            });
            continue;
        }
        if PUNCT.contains(&c) {
            cur.bump();
            tokens.push(Token {
                kind: TokenKind::Punct,
                lexeme: c.to_string(),
                span: cur.span_from(start),
            });
            continue;
        }
        cur.bump();
        return Err(FrontendError::Lex {
            span: cur.span_from(start),
            message: format!("unrecognized character {c:?}"),
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        lexeme: String::new(),
        span: Span::new(cur.line, cur.col, cur.pos, 0),
    });
    Ok(tokens)
}

fn lex_number(cur: &mut Cursor<'_>, start: (usize, u32, u32)) -> Result<Token, FrontendError> {
    let digits = |cur: &mut Cursor<'_>| {
        let mut n = 0;
        while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            cur.bump();
            n += 1;
        }
        n
    };
    let unterminated = |cur: &Cursor<'_>, what: &str| FrontendError::Lex {
        span: cur.span_from(start),
        message: format!("unterminated numeric literal: {what}"),
    };
    digits(cur);
    let mut is_float = false;
    if cur.peek() == Some('.') && !matches!(cur.peek_at(1), Some(c) if c.is_ascii_alphabetic() || c == '_') {
        cur.bump();
        is_float = true;
        if digits(cur) == 0 {
            return Err(unterminated(cur, "expected digits after `.`"));
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        cur.bump();
        is_float = true;
        if matches!(cur.peek(), Some('+' | '-')) {
            cur.bump();
        }
        if digits(cur) == 0 {
            return Err(unterminated(cur, "expected exponent digits"));
        }
    }
    if matches!(cur.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
        cur.bump();
        return Err(FrontendError::Lex {
            span: cur.span_from(start),
            message: "malformed numeric literal".to_string(),
        });
    }
    let lexeme = cur.src[start.0..cur.pos].to_string();
    let span = cur.span_from(start);
    if is_float {
        match lexeme.parse::<f64>() {
            Ok(x) if x.is_finite() => {}
            Ok(_) => {
                return Err(FrontendError::Lex {
                    span,
                    message: format!("float literal `{lexeme}` out of range"),
                })
            }
            Err(_) => {
                return Err(FrontendError::Lex {
                    span,
                    message: format!("invalid float literal `{lexeme}`"),
                })
            }
        }
    } else if lexeme.parse::<i64>().is_err() {
        return Err(FrontendError::Lex {
            span,
            message: format!("integer literal `{lexeme}` out of range"),
        });
    }
    Ok(Token {
        kind: if is_float {
            TokenKind::FloatLit
        } else {
            TokenKind::IntLit
        },
        lexeme,
        span,
    })
}
