use std::fmt;

use crate::object::Object;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    /// `base"…"`
    Str { base: String, value: String },
    /// `base<TERM>` or `base⟨TERM⟩`
    Obj { base: String, value: Object },
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str { base, .. } => write!(f, "{base} literal"),
            Tok::Obj { base, .. } => write!(f, "{base} object literal"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const PUNCT: [&str; 21] = [
    "&&", "->", "(", ")", "{", "}", "[", "]", ",", ".", ":", ";", "|", "&", "\\", "+", "^", "=", "!",
    "<", ">",
];

struct Cursor<'a> {
    src: &'a str,
    at: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.at..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self, bytes: usize) {
        for c in self.src[self.at..self.at + bytes].chars() {
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        self.at += bytes;
    }
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens. With `literals`, an identifier immediately
/// followed by `"`, `<` or `⟨` starts a literal.
pub fn tokenize(src: &str, literals: bool) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut cur = Cursor {
        src,
        at: 0,
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump(c.len_utf8());
            } else if c == '#' {
                let n = cur.rest().find('\n').unwrap_or(cur.rest().len());
                cur.bump(n);
            } else {
                break;
            }
        }
        let pos = cur.pos();
        let Some(c) = cur.peek() else {
            out.push((Tok::Eof, pos));
            return Ok(out);
        };
        if ident_start(c) {
            let n = cur
                .rest()
                .char_indices()
                .find(|&(_, c)| !ident_char(c))
                .map_or(cur.rest().len(), |(i, _)| i);
            let name = cur.rest()[..n].to_owned();
            cur.bump(n);
            match cur.peek() {
                Some('"') if literals => {
                    let value = json_string(&mut cur)?;
                    out.push((Tok::Str { base: name, value }, pos));
                }
                Some(open @ ('<' | '⟨')) if literals => {
                    cur.bump(open.len_utf8());
                    let value = json_object(&mut cur)?;
                    let close = if open == '<' { '>' } else { '⟩' };
                    while cur.peek().is_some_and(char::is_whitespace) {
                        cur.bump(cur.peek().unwrap().len_utf8());
                    }
                    if cur.peek() != Some(close) {
                        return Err(ParseError::new(cur.pos(), format!("expected `{close}` after object literal")));
                    }
                    cur.bump(close.len_utf8());
                    out.push((Tok::Obj { base: name, value }, pos));
                }
                _ => out.push((Tok::Ident(name), pos)),
            }
        } else if c.is_ascii_digit() {
            let n = cur
                .rest()
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(cur.rest().len());
            let text = &cur.rest()[..n];
            let v = text
                .parse()
                .map_err(|_| ParseError::new(pos, format!("integer {text} is too large")))?;
            cur.bump(n);
            out.push((Tok::Int(v), pos));
        } else if let Some(p) = PUNCT.iter().find(|p| cur.rest().starts_with(**p)) {
            cur.bump(p.len());
            out.push((Tok::Punct(p), pos));
        } else {
            return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
        }
    }
}

fn json_string(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    let pos = cur.pos();
    let mut it = serde_json::Deserializer::from_str(cur.rest()).into_iter::<String>();
    match it.next() {
        Some(Ok(s)) => {
            let used = it.byte_offset();
            cur.bump(used);
            Ok(s)
        }
        _ => Err(ParseError::new(pos, "malformed string literal")),
    }
}

fn json_object(cur: &mut Cursor<'_>) -> Result<Object, ParseError> {
    let pos = cur.pos();
    let mut it = serde_json::Deserializer::from_str(cur.rest()).into_iter::<Object>();
    match it.next() {
        Some(Ok(o)) => {
            let used = it.byte_offset();
            cur.bump(used);
            Ok(o)
        }
        Some(Err(e)) => Err(ParseError::new(pos, format!("malformed object literal: {e}"))),
        None => Err(ParseError::new(pos, "missing object literal")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, true).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn literals_and_punctuation() {
        assert_eq!(
            toks(r#"f(uri"a?b") && x.2"#),
            vec![
                Tok::Ident("f".into()),
                Tok::Punct("("),
                Tok::Str { base: "uri".into(), value: "a?b".into() },
                Tok::Punct(")"),
                Tok::Punct("&&"),
                Tok::Ident("x".into()),
                Tok::Punct("."),
                Tok::Int(2),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn object_literals_in_both_brackets() {
        let o = Tok::Obj {
            base: "obj".into(),
            value: Object::sym("u"),
        };
        assert_eq!(toks(r#"obj<{"OMS":"u"}>"#)[0], o);
        assert_eq!(toks(r#"obj⟨ {"OMS":"u"} ⟩"#)[0], o);
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a\n  b", true).unwrap();
        assert_eq!(t[1].1, Pos { line: 2, column: 3 });
        let e = tokenize("a\n  @", true).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }
}
