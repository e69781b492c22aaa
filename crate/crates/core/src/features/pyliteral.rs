//! Parser for the Python-literal `args` column: a list of dicts with string
//! keys and scalar, list or dict values.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PyValue {
    Str(String),
    /// Numbers, `None`, `True`, `False`, kept as source text.
    Atom(String),
    List(Vec<PyValue>),
    Dict(Vec<(PyValue, PyValue)>),
}

impl PyValue {
    /// Stable text form used as a category label.
    pub fn category(&self) -> String {
        match self {
            PyValue::Str(s) => s.clone(),
            PyValue::Atom(a) => a.clone(),
            PyValue::List(items) => {
                let parts: Vec<_> = items.iter().map(PyValue::repr).collect();
                format!("[{}]", parts.join(", "))
            }
            PyValue::Dict(_) => self.repr(),
        }
    }

    fn repr(&self) -> String {
        match self {
            PyValue::Str(s) => format!("{s:?}"),
            PyValue::Atom(a) => a.clone(),
            PyValue::List(_) => self.category(),
            PyValue::Dict(kv) => {
                let parts: Vec<_> = kv
                    .iter()
                    .map(|(k, v)| format!("{}: {}", k.repr(), v.repr()))
                    .collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }
}

pub fn parse(text: &str) -> Result<PyValue> {
    let mut p = Parser {
        s: text.as_bytes(),
        i: 0,
    };
    let v = p.value()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing characters"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("args literal: {what} at byte {}", self.i))
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() != Some(c) {
            return Err(self.err(&format!("expected `{}`", c as char)));
        }
        self.i += 1;
        Ok(())
    }

    fn value(&mut self) -> Result<PyValue> {
        match self.peek() {
            Some(b'[') => self.seq(b'[', b']').map(PyValue::List),
            Some(b'(') => self.seq(b'(', b')').map(PyValue::List),
            Some(b'{') => self.dict(),
            Some(q @ (b'\'' | b'"')) => self.string(q).map(PyValue::Str),
            Some(_) => self.atom(),
            None => Err(self.err("unexpected end")),
        }
    }

    fn seq(&mut self, open: u8, close: u8) -> Result<Vec<PyValue>> {
        self.expect(open)?;
        let mut items = Vec::new();
        loop {
            if self.peek() == Some(close) {
                self.i += 1;
                return Ok(items);
            }
            items.push(self.value()?);
            match self.peek() {
                Some(b',') => self.i += 1,
                Some(c) if c == close => {}
                _ => return Err(self.err("expected `,` or closing bracket")),
            }
        }
    }

    fn dict(&mut self) -> Result<PyValue> {
        self.expect(b'{')?;
        let mut kv = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.i += 1;
                return Ok(PyValue::Dict(kv));
            }
            let k = self.value()?;
            self.expect(b':')?;
            let v = self.value()?;
            kv.push((k, v));
            match self.peek() {
                Some(b',') => self.i += 1,
                Some(b'}') => {}
                _ => return Err(self.err("expected `,` or `}`")),
            }
        }
    }

    fn string(&mut self, quote: u8) -> Result<String> {
        self.i += 1;
        let mut out = Vec::new();
        while let Some(&c) = self.s.get(self.i) {
            self.i += 1;
            match c {
                b'\\' => {
                    let Some(&e) = self.s.get(self.i) else {
                        return Err(self.err("dangling escape"));
                    };
                    self.i += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b't' => out.push(b'\t'),
                        b'r' => out.push(b'\r'),
                        b'0' => out.push(0),
                        b'\\' | b'\'' | b'"' => out.push(e),
                        b'x' => {
                            let hex = self
                                .s
                                .get(self.i..self.i + 2)
                                .and_then(|h| std::str::from_utf8(h).ok())
                                .and_then(|h| u8::from_str_radix(h, 16).ok())
                                .ok_or_else(|| self.err("bad \\x escape"))?;
                            self.i += 2;
                            out.push(hex);
                        }
                        other => {
                            out.push(b'\\');
                            out.push(other);
                        }
                    }
                }
                c if c == quote => return Ok(String::from_utf8_lossy(&out).into_owned()),
                c => out.push(c),
            }
        }
        Err(self.err("unterminated string"))
    }

    fn atom(&mut self) -> Result<PyValue> {
        let start = self.i;
        while let Some(&c) = self.s.get(self.i) {
            if matches!(c, b',' | b']' | b')' | b'}' | b':') || c.is_ascii_whitespace() {
                break;
            }
            self.i += 1;
        }
        if start == self.i {
            return Err(self.err("empty token"));
        }
        let text =
            std::str::from_utf8(&self.s[start..self.i]).map_err(|_| self.err("non-UTF-8 token"))?;
        Ok(PyValue::Atom(text.to_string()))
    }
}
