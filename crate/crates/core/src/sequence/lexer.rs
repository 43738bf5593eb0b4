use std::fmt;

use thiserror::Error;

/// Parse failure with its location in the source text.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownItem(String),
    UnknownSpin(String),
    BadNumber(String),
    MalformedExpression(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken { found, expected } => write!(f, "expected {expected}, found `{found}`"),
            ParseErrorKind::UnexpectedEnd { expected } => write!(f, "unexpected end of input, expected {expected}"),
            ParseErrorKind::UnknownItem(name) => write!(f, "unknown sequence item `{name}`"),
            ParseErrorKind::UnknownSpin(name) => write!(f, "unknown spin label `{name}` (expected a or b)"),
            ParseErrorKind::BadNumber(s) => write!(f, "bad numeric literal `{s}`"),
            ParseErrorKind::MalformedExpression(msg) => write!(f, "malformed angle expression: {msg}"),
        }
    }
}

impl ParseError {
    pub(crate) fn at(src: &str, offset: usize, kind: ParseErrorKind) -> Self {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { kind, offset, line, column }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Semi,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => f.write_str(s),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Comma => f.write_str(","),
            Tok::Colon => f.write_str(":"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Slash => f.write_str("/"),
            Tok::Semi => f.write_str(";"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

const MAX_LITERAL_LEN: usize = 64;

/// Splits sequence text into tokens. `#` starts a comment running to the
/// end of the line; `π` and `−` are accepted as `pi` and `-`.
pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '+' => Some(Tok::Plus),
            '-' | '\u{2212}' => Some(Tok::Minus),
            '*' | '\u{b7}' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            ';' => Some(Tok::Semi),
            '\u{3c0}' => Some(Tok::Ident("pi".into())),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push(Token { tok, offset });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    name.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(name), offset });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let rest = &src[offset..];
            let len = number_len(rest);
            let lexeme = &rest[..len];
            if len > MAX_LITERAL_LEN || !lexeme.bytes().any(|b| b.is_ascii_digit()) {
                return Err(ParseError::at(
                    src,
                    offset,
                    ParseErrorKind::BadNumber(lexeme.chars().take(MAX_LITERAL_LEN).collect()),
                ));
            }
            for _ in 0..lexeme.chars().count() {
                chars.next();
            }
            out.push(Token { tok: Tok::Number(lexeme.to_string()), offset });
            continue;
        }
        return Err(ParseError::at(src, offset, ParseErrorKind::UnexpectedChar(c)));
    }
    Ok(out)
}

/// Length of the numeric literal at the start of `s`: digits, an optional
/// fraction, and an exponent only when digits follow it.
fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut k = i + 1;
        if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
            k += 1;
        }
        if k < b.len() && b[k].is_ascii_digit() {
            while k < b.len() && b[k].is_ascii_digit() {
                k += 1;
            }
            i = k;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_implicit_identifiers() {
        assert_eq!(toks("8J"), vec![Tok::Number("8".into()), Tok::Ident("J".into())]);
        assert_eq!(toks("2.5e-3"), vec![Tok::Number("2.5e-3".into())]);
        // exponent marker without digits stays an identifier
        assert_eq!(toks("2e"), vec![Tok::Number("2".into()), Tok::Ident("e".into())]);
        assert_eq!(toks("π/3"), vec![Tok::Ident("pi".into()), Tok::Slash, Tok::Number("3".into())]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            toks("# header\nGz # trailing\n; Gz"),
            vec![Tok::Ident("Gz".into()), Tok::Semi, Tok::Ident("Gz".into())]
        );
    }

    #[test]
    fn error_position() {
        let err = tokenize("Gz\n - Rx(b, pi$)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!((err.line, err.column), (2, 12));
        assert!(tokenize(".").is_err());
    }
}
