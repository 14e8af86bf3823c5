//! Shared block syntax of model and clause files: `key: value` pairs, quoted
//! strings, brace/bracket groups, rest-of-line values and `//` comments.

use super::error::{IrError, IrErrorKind};
use super::{Sort, Source, SourceRef, INVENTED_MARKER};
use crate::value::{atom, Value};

const STOP: &[char] = &['{', '}', '[', ']', '(', ')', ':', ',', '"'];

#[derive(Clone)]
pub(crate) struct Cursor<'a> {
    pub src: &'a str,
    pub pos: usize,
    pub end: usize,
}

#[derive(Clone, Debug)]
pub(crate) enum RawValue {
    Word(String),
    Str(String),
    Group { open: char, start: usize, end: usize },
    Rest(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Field {
    pub key: String,
    pub key_pos: usize,
    pub value: RawValue,
    pub value_pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor {
            src,
            pos: 0,
            end: src.len(),
        }
    }

    pub fn sub(&self, start: usize, end: usize) -> Self {
        Cursor {
            src: self.src,
            pos: start,
            end,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..self.end]
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.end
    }

    pub fn err(&self, msg: impl Into<String>) -> IrError {
        IrError::syntax(self.src, self.pos, msg)
    }

    pub fn err_at(&self, pos: usize, kind: IrErrorKind) -> IrError {
        IrError::at(self.src, pos, kind)
    }

    /// Skips spaces and comments, stopping at a newline.
    pub fn skip_inline(&mut self) {
        loop {
            match self.peek() {
                Some(' ' | '\t' | '\r') => {
                    self.bump();
                }
                Some('/') if self.rest().starts_with("//") => {
                    let n = self.rest().find('\n').unwrap_or(self.rest().len());
                    self.pos += n;
                }
                _ => return,
            }
        }
    }

    pub fn skip_all(&mut self) {
        loop {
            self.skip_inline();
            if self.peek() == Some('\n') {
                self.bump();
            } else {
                return;
            }
        }
    }

    pub fn at_line_end(&mut self) -> bool {
        self.skip_inline();
        matches!(self.peek(), None | Some('\n'))
    }

    pub fn eat(&mut self, c: char) -> bool {
        self.skip_inline();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), IrError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> IrError {
        match self.peek() {
            None => self.err(format!("expected {wanted}, found end of input")),
            Some('\n') => self.err(format!("expected {wanted}, found end of line")),
            Some(c) => self.err(format!("expected {wanted}, found `{c}`")),
        }
    }

    /// Bare word; returns it with its offset.
    pub fn word(&mut self) -> Option<(&'a str, usize)> {
        self.skip_inline();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || STOP.contains(&c) || self.rest().starts_with("->") {
                break;
            }
            self.bump();
        }
        (self.pos > start).then(|| (&self.src[start..self.pos], start))
    }

    pub fn expect_word(&mut self, wanted: &str) -> Result<(&'a str, usize), IrError> {
        self.word().ok_or_else(|| self.unexpected(wanted))
    }

    pub fn keyword(&mut self, kw: &str) -> Result<(), IrError> {
        let save = self.pos;
        match self.word() {
            Some((w, _)) if w == kw => Ok(()),
            _ => {
                self.pos = save;
                self.skip_inline();
                Err(self.unexpected(&format!("`{kw}`")))
            }
        }
    }

    /// Remainder of the current line, comments stripped and trimmed.
    pub fn rest_of_line(&mut self) -> (&'a str, usize) {
        self.skip_inline();
        let start = self.pos;
        let line_len = self.rest().find('\n').unwrap_or(self.rest().len());
        let line = &self.src[start..start + line_len];
        let content = match line.find("//") {
            Some(i) => &line[..i],
            None => line,
        };
        self.pos = start + line_len;
        (content.trim_end(), start)
    }

    pub fn quoted(&mut self) -> Result<String, IrError> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err("unterminated string")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some(c @ ('"' | '\\')) => out.push(c),
                    _ => return Err(self.err("invalid escape in string")),
                },
                Some(c) => out.push(c),
            }
        }
    }

    /// Balanced group starting at the current `open` char; returns the inner range.
    pub fn group(&mut self, open: char, close: char) -> Result<(usize, usize), IrError> {
        self.expect(open)?;
        let start = self.pos;
        let mut depth = 1;
        loop {
            let here = self.pos;
            match self.peek() {
                None => return Err(self.err(format!("unclosed `{open}`"))),
                Some('"') => {
                    self.quoted()?;
                }
                Some('/') if self.rest().starts_with("//") => self.skip_inline(),
                Some(c) => {
                    self.bump();
                    if c == open {
                        depth += 1;
                    } else if c == close {
                        depth -= 1;
                        if depth == 0 {
                            return Ok((start, here));
                        }
                    }
                }
            }
        }
    }

    /// `key: value` pairs up to the end of the cursor or an unmatched `}`.
    pub fn fields(&mut self, rest_keys: &[&str]) -> Result<Vec<Field>, IrError> {
        let mut out = Vec::new();
        loop {
            self.skip_all();
            if self.at_end() || self.peek() == Some('}') {
                return Ok(out);
            }
            let (key, key_pos) = self.expect_word("key")?;
            self.expect(':')?;
            self.skip_inline();
            let value_pos = self.pos;
            let rest = rest_keys.contains(&key) && !(key == "source" && self.peek() == Some('{'));
            let value = match self.peek() {
                _ if rest => {
                    let (text, _) = self.rest_of_line();
                    if text.is_empty() {
                        return Err(self.err(format!("missing value for `{key}`")));
                    }
                    RawValue::Rest(text.to_string())
                }
                Some('{') => {
                    let (start, end) = self.group('{', '}')?;
                    RawValue::Group {
                        open: '{',
                        start,
                        end,
                    }
                }
                Some('[') => {
                    let (start, end) = self.group('[', ']')?;
                    RawValue::Group {
                        open: '[',
                        start,
                        end,
                    }
                }
                Some('"') => RawValue::Str(self.quoted()?),
                _ => RawValue::Word(self.expect_word("value")?.0.to_string()),
            };
            out.push(Field {
                key: key.to_string(),
                key_pos,
                value,
                value_pos,
            });
        }
    }

    /// Body of a `name { ... }` block; consumes the closing brace.
    pub fn block(&mut self, rest_keys: &[&str]) -> Result<Vec<Field>, IrError> {
        self.expect('{')?;
        let fields = self.fields(rest_keys)?;
        self.skip_all();
        self.expect('}')?;
        Ok(fields)
    }
}

impl Field {
    pub fn text(&self, cur: &Cursor) -> Result<String, IrError> {
        match &self.value {
            RawValue::Word(s) | RawValue::Str(s) | RawValue::Rest(s) => Ok(s.clone()),
            RawValue::Group { .. } => Err(IrError::syntax(
                cur.src,
                self.value_pos,
                format!("`{}` expects a scalar value", self.key),
            )),
        }
    }

    pub fn parsed<T: std::str::FromStr<Err = String>>(&self, cur: &Cursor) -> Result<T, IrError> {
        self.text(cur)?
            .parse()
            .map_err(|e| IrError::syntax(cur.src, self.value_pos, e))
    }

    pub fn group<'a>(&self, cur: &Cursor<'a>, open: char) -> Result<Cursor<'a>, IrError> {
        match self.value {
            RawValue::Group { open: o, start, end } if o == open => Ok(cur.sub(start, end)),
            _ => Err(IrError::syntax(
                cur.src,
                self.value_pos,
                format!("`{}` expects a `{open}...` group", self.key),
            )),
        }
    }

    /// Offset of the first non-blank char of a rest-of-line value.
    pub fn rest_offset(&self) -> usize {
        self.value_pos
    }

    pub fn unknown(&self, cur: &Cursor, what: &str) -> IrError {
        IrError::syntax(
            cur.src,
            self.key_pos,
            format!("unknown key `{}` in {what}", self.key),
        )
    }
}

pub(crate) fn bool_word(f: &Field, cur: &Cursor) -> Result<bool, IrError> {
    match f.text(cur)?.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(IrError::syntax(
            cur.src,
            f.value_pos,
            format!("expected true or false, found `{other}`"),
        )),
    }
}

/// `[a, b, c]` contents as words.
pub(crate) fn word_list(cur: &mut Cursor) -> Result<Vec<String>, IrError> {
    let mut out = Vec::new();
    cur.skip_all();
    if cur.at_end() {
        return Ok(out);
    }
    loop {
        cur.skip_all();
        out.push(cur.expect_word("name")?.0.to_string());
        cur.skip_all();
        if cur.at_end() {
            return Ok(out);
        }
        cur.expect(',')?;
    }
}

/// Source group or the invented marker.
pub(crate) fn source(f: &Field, cur: &Cursor) -> Result<Source, IrError> {
    match &f.value {
        RawValue::Rest(text) | RawValue::Word(text) => {
            if text == INVENTED_MARKER || text == "invented" {
                Ok(Source::Invented)
            } else {
                Err(IrError::syntax(
                    cur.src,
                    f.value_pos,
                    format!("expected a source group or `{INVENTED_MARKER}`"),
                ))
            }
        }
        _ => {
            let mut inner = f.group(cur, '{')?;
            source_ref(&mut inner).map(Source::Ref)
        }
    }
}

pub(crate) fn source_ref(cur: &mut Cursor) -> Result<SourceRef, IrError> {
    let mut r = SourceRef::default();
    let mut seen_doc = false;
    for f in cur.fields(&[])? {
        match f.key.as_str() {
            "doc" => {
                r.document = f.text(cur)?;
                seen_doc = true;
            }
            "section" => r.section = f.text(cur)?,
            "quote" => r.quote = f.text(cur)?,
            "clause" => r.clause = Some(f.text(cur)?),
            _ => return Err(f.unknown(cur, "source")),
        }
    }
    if !cur.at_end() {
        return Err(cur.unexpected("key"));
    }
    if !seen_doc {
        return Err(cur.err("source is missing `doc`"));
    }
    Ok(r)
}

/// Literal value: `true`, `3`, `atom`, `{a, b}`, `{k: v, ...}`.
pub(crate) fn literal(cur: &mut Cursor) -> Result<Value, IrError> {
    cur.skip_inline();
    if cur.peek() == Some('{') {
        cur.expect('{')?;
        cur.skip_all();
        if cur.eat('}') {
            return Ok(Value::Set(Default::default()));
        }
        let save = cur.pos;
        let is_map = cur.word().is_some() && {
            cur.skip_inline();
            cur.peek() == Some(':')
        };
        cur.pos = save;
        if is_map {
            let mut entries = std::collections::BTreeMap::new();
            loop {
                cur.skip_all();
                let (k, kpos) = cur.expect_word("map key")?;
                cur.expect(':')?;
                let v = literal(cur)?;
                if entries.insert(atom(k), v).is_some() {
                    return Err(cur.err_at(kpos, IrErrorKind::DuplicateId(k.to_string())));
                }
                cur.skip_all();
                if cur.eat('}') {
                    return Ok(Value::Map(entries));
                }
                cur.expect(',')?;
            }
        }
        let mut items = std::collections::BTreeSet::new();
        loop {
            cur.skip_all();
            items.insert(literal(cur)?);
            cur.skip_all();
            if cur.eat('}') {
                return Ok(Value::Set(items));
            }
            cur.expect(',')?;
        }
    }
    let (w, pos) = cur.expect_word("literal")?;
    Ok(match w {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ if w.starts_with(|c: char| c.is_ascii_digit() || c == '-') => Value::Int(
            w.parse()
                .map_err(|_| IrError::syntax(cur.src, pos, format!("invalid integer `{w}`")))?,
        ),
        _ => Value::Atom(atom(w)),
    })
}

pub(crate) fn sort(cur: &mut Cursor) -> Result<Sort, IrError> {
    let (w, pos) = cur.expect_word("sort")?;
    match w {
        "BOOL" => Ok(Sort::Bool),
        "COUNTER" => {
            cur.expect('(')?;
            let (n, npos) = cur.expect_word("counter maximum")?;
            let max: i64 = n
                .parse()
                .ok()
                .filter(|m| *m >= 0)
                .ok_or_else(|| IrError::syntax(cur.src, npos, "counter maximum must be a non-negative integer"))?;
            cur.expect(')')?;
            Ok(Sort::Counter(max))
        }
        "ENUM" => {
            let (start, end) = cur.group('[', ']')?;
            let vals = word_list(&mut cur.sub(start, end))?;
            if vals.is_empty() {
                return Err(IrError::syntax(cur.src, pos, "ENUM needs at least one value"));
            }
            Ok(Sort::Enum(vals.iter().map(|v| atom(v)).collect()))
        }
        "SET" => {
            cur.expect('(')?;
            let (d, _) = cur.expect_word("domain name")?;
            cur.expect(')')?;
            Ok(Sort::Set(d.to_string()))
        }
        "MAP" => {
            cur.expect('(')?;
            let (d, _) = cur.expect_word("domain name")?;
            cur.skip_inline();
            if !cur.src[cur.pos..cur.end].starts_with("->") {
                return Err(cur.unexpected("`->`"));
            }
            cur.pos += 2;
            let inner = sort(cur)?;
            cur.expect(')')?;
            Ok(Sort::Map(d.to_string(), Box::new(inner)))
        }
        other => Err(cur.err_at(pos, IrErrorKind::UnknownSort(other.to_string()))),
    }
}

/// Writes `s` bare if it reads back as a single word, otherwise quoted.
pub(crate) fn scalar(s: &str) -> String {
    let bare = !s.is_empty()
        && !s.contains("->")
        && !s.contains("//")
        && s.chars().all(|c| !c.is_whitespace() && !STOP.contains(&c));
    if bare {
        s.to_string()
    } else {
        quote(s)
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn write_literal(v: &Value, out: &mut String) {
    match v {
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(n) => out.push_str(&n.to_string()),
        Value::Atom(a) => out.push_str(a),
        Value::Set(items) => {
            out.push('{');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_literal(item, out);
            }
            out.push('}');
        }
        Value::Map(entries) => {
            out.push('{');
            for (i, (k, item)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(k);
                out.push_str(": ");
                write_literal(item, out);
            }
            out.push('}');
        }
    }
}

pub(crate) fn write_source(s: &Source, out: &mut String) {
    match s {
        Source::Invented => out.push_str(INVENTED_MARKER),
        Source::Ref(r) => {
            out.push_str("{ doc: ");
            out.push_str(&scalar(&r.document));
            out.push_str("  section: ");
            out.push_str(&quote(&r.section));
            out.push_str("  quote: ");
            out.push_str(&quote(&r.quote));
            if let Some(c) = &r.clause {
                out.push_str("  clause: ");
                out.push_str(&scalar(c));
            }
            out.push_str(" }");
        }
    }
}
