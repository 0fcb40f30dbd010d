//! Line cursor shared by the file parsers.

use std::fmt;

use relat_core::{Bound, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

pub type PResult<T> = Result<T, ParseError>;

/// Non-blank lines with comments removed, numbered from 1.
pub fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

pub fn error_at(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_name(c: char) -> bool {
    is_ident(c) || c == '-' || c == '.'
}

#[derive(Clone)]
pub struct Cursor<'a> {
    pub line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(line: usize, text: &'a str) -> Cursor<'a> {
        Cursor { line, text, pos: 0 }
    }

    pub fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    pub fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(error_at(self.line, self.column(), message))
    }

    pub fn error_from<T>(&self, column: usize, message: impl Into<String>) -> PResult<T> {
        Err(error_at(self.line, column, message))
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    /// Consumes `word` when it is followed by a non-identifier character.
    pub fn eat_word(&mut self, word: &str) -> bool {
        let save = self.pos;
        if self.eat_str(word) && !self.text[self.pos..].chars().next().is_some_and(is_name) {
            return true;
        }
        self.pos = save;
        false
    }

    pub fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(d) => self.error(format!("expected `{c}`, found `{d}`")),
                None => self.error(format!("expected `{c}` before the end of the line")),
            }
        }
    }

    pub fn expect_str(&mut self, s: &str) -> PResult<()> {
        if self.eat_str(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest.char_indices().find(|&(_, c)| !f(c)).map(|(i, _)| i).unwrap_or(rest.len());
        self.pos += len;
        &self.text[start..start + len]
    }

    /// Variables, points, symbols and metavariables.
    pub fn ident(&mut self) -> PResult<&'a str> {
        let s = self.take_while(is_ident);
        if s.is_empty() {
            return self.error("expected an identifier");
        }
        Ok(s)
    }

    /// Names of theories, structures and axioms; may contain `-` and `.`.
    pub fn name(&mut self) -> PResult<&'a str> {
        let s = self.take_while(is_name);
        if s.is_empty() {
            return self.error("expected a name");
        }
        Ok(s)
    }

    /// A file path or structure reference: everything up to whitespace or `:`.
    pub fn word(&mut self) -> PResult<&'a str> {
        let s = self.take_while(|c| !c.is_whitespace() && c != ':');
        if s.is_empty() {
            return self.error("expected a name or path");
        }
        Ok(s)
    }

    /// The rest of the line, trimmed.
    pub fn rest(&mut self) -> &'a str {
        self.skip_ws();
        let s = self.text[self.pos..].trim_end();
        self.pos = self.text.len();
        s
    }

    pub fn expect_end(&mut self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.error(format!("unexpected `{c}`")),
        }
    }

    pub fn starts_with_digit(&mut self) -> bool {
        self.peek().is_some_and(|c| c.is_ascii_digit())
    }

    /// `p`, `p/q` in `[0, 1]`.
    pub fn unit_rational(&mut self) -> PResult<Rat> {
        let col = self.column_after_ws();
        let s = self.take_while(|c| c.is_ascii_digit() || c == '/');
        if s.is_empty() {
            return self.error_from(col, "expected a rational");
        }
        let r: Rat = s.parse().map_err(|_| error_at(self.line, col, format!("malformed rational `{s}`")))?;
        if !r.in_unit_interval() {
            return self.error_from(col, format!("rational {s} is out of [0,1]"));
        }
        Ok(r)
    }

    /// A rational index, optionally prefixed by `>` for an open bound.
    pub fn bound(&mut self) -> PResult<Bound> {
        let strict = self.eat('>');
        let r = self.unit_rational()?;
        Ok(if strict { Bound::open(r) } else { Bound::closed(r) })
    }

    pub fn column_after_ws(&mut self) -> usize {
        self.skip_ws();
        self.column()
    }

    pub fn mark(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, mark: usize) {
        self.pos = mark;
    }
}
