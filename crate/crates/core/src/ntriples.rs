//! Line-oriented N-Triples parser.
//!
//! Parsing is all-or-nothing: the first malformed statement aborts with its
//! 1-based line number.

use crate::kg::{is_valid_iri, Graph, Literal, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

/// Parses an N-Triples document into a [`Graph`].
pub fn parse_ntriples(text: &str) -> Result<Graph, ParseError> {
    let mut graph = Graph::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let err = |reason: String| ParseError { line: idx + 1, reason };
        if let Some(triple) = parse_line(line).map_err(err)? {
            graph.insert(triple);
        }
    }
    Ok(graph)
}

fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => Term::Blank(cur.blank()?),
        _ => return Err(cur.unexpected("subject IRI or blank node")),
    };
    cur.skip_ws();
    let predicate = match cur.peek() {
        Some('<') => cur.iri()?,
        _ => return Err(cur.unexpected("predicate IRI")),
    };
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => Term::Blank(cur.blank()?),
        Some('"') => Term::Literal(cur.literal()?),
        _ => return Err(cur.unexpected("object term")),
    };
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.unexpected("'.'"));
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(cur.unexpected("end of statement"));
    }
    Ok(Some(Triple::new(subject, predicate, object)))
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.bump();
        }
    }

    fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    fn unexpected(&self, expected: &str) -> String {
        match self.peek() {
            Some(c) => format!("expected {expected} at column {}, found {c:?}", self.column()),
            None => format!("expected {expected}, found end of line"),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("{c:?}")))
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated IRI".into()),
                Some('>') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err("invalid escape in IRI".into()),
                    };
                    out.push(c);
                }
                Some(c) => out.push(c),
            }
        }
        if !is_valid_iri(&out) {
            return Err(format!("invalid or relative IRI <{out}>"));
        }
        Ok(out)
    }

    fn blank(&mut self) -> Result<String, String> {
        self.expect('_')?;
        self.expect(':')?;
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphanumeric() || c == '_' => {}
            _ => return Err(self.unexpected("blank node label")),
        }
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{B7}') {
                self.bump();
            } else {
                break;
            }
        }
        // a trailing '.' terminates the statement rather than belonging to the label
        while self.src[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated string literal".into()),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{C}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        Some(c) => return Err(format!("invalid escape sequence \\{c}")),
                        None => return Err("unterminated escape sequence".into()),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('^') => {
                self.bump();
                self.expect('^')?;
                let datatype = self.iri()?;
                Ok(Literal::typed(lexical, datatype))
            }
            Some('@') => {
                self.bump();
                let tag = self.lang_tag()?;
                Ok(Literal::lang(lexical, tag))
            }
            _ => Ok(Literal::typed(lexical, vocab::XSD_STRING)),
        }
    }

    fn lang_tag(&mut self) -> Result<String, String> {
        let start = self.pos;
        let mut first = true;
        loop {
            let seg_start = self.pos;
            while let Some(c) = self.peek() {
                let ok = if first {
                    c.is_ascii_alphabetic()
                } else {
                    c.is_ascii_alphanumeric()
                };
                if !ok {
                    break;
                }
                self.bump();
            }
            if self.pos == seg_start {
                return Err(self.unexpected("language tag"));
            }
            first = false;
            if self.peek() == Some('-') {
                self.bump();
            } else {
                break;
            }
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, String> {
        let start = self.pos;
        for _ in 0..digits {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return Err(format!("expected {digits} hex digits in \\u escape")),
            }
        }
        let code = u32::from_str_radix(&self.src[start..self.pos], 16).map_err(|e| e.to_string())?;
        char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
    }
}
