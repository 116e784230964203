use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Punct(char),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

const PUNCT: &str = "+-*/^()[]{},;:=@";

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    let span = |b: usize, e: usize, line: usize, ls: usize| SourceSpan::new(b, e, line, src[ls..b].chars().count() + 1);
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        if c == '\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' || src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), span: span(start, i, line, line_start) });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // exponent only when digits follow, so `2e` stays `2 e`
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push(Token { tok: Tok::Number(src[start..i].to_string()), span: span(start, i, line, line_start) });
            continue;
        }
        if c == '"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'"' {
                return Err(ParseError::new("unterminated string", span(start, i, line, line_start)));
            }
            i += 1;
            out.push(Token { tok: Tok::Str(src[start + 1..i - 1].to_string()), span: span(start, i, line, line_start) });
            continue;
        }
        if PUNCT.contains(c) {
            i += 1;
            out.push(Token { tok: Tok::Punct(c), span: span(start, i, line, line_start) });
            continue;
        }
        return Err(ParseError::new(format!("unexpected character `{c}`"), span(start, start + c.len_utf8(), line, line_start)));
    }
    out.push(Token { tok: Tok::Eof, span: span(src.len(), src.len(), line, line_start) });
    Ok(out)
}
