//! Minimal reader for ground ASP terms and facts (`name(args).` with
//! integers, constants and nested function terms).

use std::fmt;

use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Int(i64),
    Const(String),
    Fn(String, Vec<Term>),
}

impl Term {
    pub fn fun(name: &str, args: Vec<Term>) -> Term {
        Term::Fn(name.to_string(), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    /// Functor name and arity (constants have arity 0).
    pub fn signature(&self) -> Option<(&str, usize)> {
        match self {
            Term::Int(_) => None,
            Term::Const(c) => Some((c, 0)),
            Term::Fn(f, args) => Some((f, args.len())),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Const(c) => f.write_str(c),
            Term::Fn(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: impl Into<String>) -> FrontendError {
        FrontendError::Syntax {
            line: self.line,
            col: self.pos - self.line_start + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.src.get(self.pos) {
            match c {
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b'%' => {
                    while self.src.get(self.pos).is_some_and(|&c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), FrontendError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn term(&mut self) -> Result<Term, FrontendError> {
        match self.peek() {
            Some(c) if c == b'-' || c.is_ascii_digit() => {
                let start = self.pos;
                self.pos += 1;
                while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                text.parse()
                    .map(Term::Int)
                    .map_err(|_| self.err(format!("bad integer `{text}`")))
            }
            Some(c) if c.is_ascii_lowercase() || c == b'_' => {
                let start = self.pos;
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|&c| c.is_ascii_alphanumeric() || c == b'_' || c == b'\'')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .to_string();
                if self.src.get(self.pos) == Some(&b'(') {
                    self.pos += 1;
                    let mut args = vec![self.term()?];
                    loop {
                        match self.peek() {
                            Some(b',') => {
                                self.pos += 1;
                                args.push(self.term()?);
                            }
                            Some(b')') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.err("expected `,` or `)`")),
                        }
                    }
                    Ok(Term::Fn(name, args))
                } else {
                    Ok(Term::Const(name))
                }
            }
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses a sequence of `term.` facts; `%` starts a line comment.
pub fn parse_term_document(src: &str) -> Result<Vec<Term>, FrontendError> {
    let mut r = Reader {
        src: src.as_bytes(),
        pos: 0,
        line: 1,
        line_start: 0,
    };
    let mut facts = Vec::new();
    while r.peek().is_some() {
        let t = r.term()?;
        r.expect(b'.')?;
        facts.push(t);
    }
    Ok(facts)
}
