//! Independent method finder used as a test oracle for the splitter.
//!
//! This is a hand-written lexer plus a brace-structure walk; it shares no
//! code with the tree-sitter based splitter. It returns the verbatim text of
//! every method or constructor declaration that has a body.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Word,
    Literal,
    Punct(u8),
}

#[derive(Debug, Clone, Copy)]
struct Tok {
    kind: Kind,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Vec<Tok> {
    let b = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if b[i..].starts_with(b"//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if b[i..].starts_with(b"/*") {
            i += 2;
            while i + 1 < b.len() && !(b[i] == b'*' && b[i + 1] == b'/') {
                i += 1;
            }
            i += 2;
        } else if b[i..].starts_with(b"\"\"\"") {
            let start = i;
            i += 3;
            while i < b.len() && !b[i..].starts_with(b"\"\"\"") {
                i += if b[i] == b'\\' { 2 } else { 1 };
            }
            i += 3;
            toks.push(Tok { kind: Kind::Literal, start, end: i });
        } else if c == b'"' || c == b'\'' {
            let start = i;
            i += 1;
            while i < b.len() && b[i] != c {
                i += if b[i] == b'\\' { 2 } else { 1 };
            }
            i += 1;
            toks.push(Tok { kind: Kind::Literal, start, end: i });
        } else if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' || c >= 0x80 {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$' || b[i] >= 0x80) {
                i += 1;
            }
            toks.push(Tok { kind: Kind::Word, start, end: i });
        } else {
            toks.push(Tok { kind: Kind::Punct(c), start: i, end: i + 1 });
            i += 1;
        }
    }
    toks
}

struct Scan<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    found: Vec<String>,
}

const TYPE_KEYWORDS: [&str; 3] = ["class", "interface", "enum"];

impl<'a> Scan<'a> {
    fn word(&self, i: usize) -> Option<&'a str> {
        let t = self.toks.get(i)?;
        (t.kind == Kind::Word).then(|| &self.src[t.start..t.end])
    }

    fn is(&self, i: usize, p: u8) -> bool {
        self.toks.get(i).map(|t| t.kind == Kind::Punct(p)).unwrap_or(false)
    }

    fn matching(&self, open: usize, o: u8, c: u8) -> usize {
        let mut depth = 0usize;
        let mut i = open;
        while i < self.toks.len() {
            if self.is(i, o) {
                depth += 1;
            } else if self.is(i, c) {
                depth -= 1;
                if depth == 0 {
                    return i;
                }
            }
            i += 1;
        }
        self.toks.len() - 1
    }

    /// Whether tokens `from..to` open a type declaration (`class X`, `@interface`, `record R(`).
    fn declares_type(&self, from: usize, to: usize) -> bool {
        let mut depth = 0i32;
        for i in from..to {
            if self.is(i, b'(') {
                depth += 1;
            } else if self.is(i, b')') {
                depth -= 1;
            } else if depth == 0 {
                if let Some(w) = self.word(i) {
                    let after_dot = i > 0 && self.is(i - 1, b'.');
                    if TYPE_KEYWORDS.contains(&w) && !after_dot {
                        return true;
                    }
                    if w == "record" && self.word(i + 1).is_some() && (self.is(i + 2, b'(') || self.is(i + 2, b'<')) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// `{` at `brace` follows `new Type(...)`, i.e. opens an anonymous class.
    fn opens_anonymous(&self, brace: usize) -> bool {
        if brace == 0 || !self.is(brace - 1, b')') {
            return false;
        }
        // walk back to the matching `(`
        let mut depth = 0i32;
        let mut i = brace - 1;
        loop {
            if self.is(i, b')') {
                depth += 1;
            } else if self.is(i, b'(') {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            if i == 0 {
                return false;
            }
            i -= 1;
        }
        // then over the created type
        while i > 0 {
            i -= 1;
            match self.toks[i].kind {
                Kind::Word => {
                    if self.word(i) == Some("new") {
                        return true;
                    }
                }
                Kind::Punct(b'.' | b'<' | b'>' | b',' | b'?' | b'&' | b'@') => {}
                _ => return false,
            }
        }
        false
    }

    /// Scans a type body starting just after its `{`; returns the index of its `}`.
    fn type_body(&mut self, mut i: usize, is_enum: bool) -> usize {
        if is_enum {
            // constants up to the first top-level `;` or the closing brace
            loop {
                if i >= self.toks.len() || self.is(i, b'}') {
                    return i;
                }
                if self.is(i, b';') {
                    i += 1;
                    break;
                }
                if self.is(i, b'(') {
                    i = self.expression_parens(i) + 1;
                    continue;
                }
                if self.is(i, b'{') {
                    i = self.type_body(i + 1, false) + 1;
                    continue;
                }
                i += 1;
            }
        }
        loop {
            if i >= self.toks.len() || self.is(i, b'}') {
                return i;
            }
            i = self.member(i);
        }
    }

    /// Scans one member starting at token `start`; returns the index after it.
    fn member(&mut self, start: usize) -> usize {
        let mut i = start;
        let mut saw_assign = false;
        loop {
            if i >= self.toks.len() {
                return i;
            }
            if self.is(i, b';') {
                return i + 1;
            }
            if self.is(i, b'=') {
                saw_assign = true;
            }
            if self.is(i, b'(') {
                i = self.expression_parens(i) + 1;
                continue;
            }
            if self.is(i, b'{') {
                if saw_assign {
                    // field initializer: array initializer or anonymous class
                    i = self.brace_in_expression(i) + 1;
                    continue;
                }
                if self.declares_type(start, i) {
                    let is_enum = (start..i).any(|k| self.word(k) == Some("enum"));
                    let close = self.type_body(i + 1, is_enum);
                    return close + 1;
                }
                let close = self.matching(i, b'{', b'}');
                let words_only = (start..i).all(|k| {
                    matches!(self.toks[k].kind, Kind::Word)
                        || self.is(k, b'@')
                        || (self.is(k, b'.'))
                });
                let has_params = (start..i).any(|k| self.is(k, b'('));
                let is_method = if has_params {
                    // after the last top-level `)` only a throws clause may follow
                    let last_close = (start..i).rev().find(|&k| self.is(k, b')')).unwrap();
                    let tail = last_close + 1..i;
                    tail.is_empty() || self.word(last_close + 1) == Some("throws")
                } else {
                    // compact record constructor: modifiers and a name, nothing else
                    words_only && (start..i).any(|k| self.toks[k].kind == Kind::Word)
                        && !(start..i).all(|k| self.word(k) == Some("static"))
                };
                if is_method {
                    let text = &self.src[self.toks[start].start..self.toks[close].end];
                    self.found.push(text.to_string());
                }
                self.code_block(i + 1, close);
                return close + 1;
            }
            i += 1;
        }
    }

    /// Scans `(`...`)` that may contain anonymous classes or lambdas; returns the `)`.
    fn expression_parens(&mut self, open: usize) -> usize {
        let close = self.matching(open, b'(', b')');
        let mut i = open + 1;
        while i < close {
            if self.is(i, b'{') {
                i = self.brace_in_expression(i) + 1;
            } else {
                i += 1;
            }
        }
        close
    }

    /// A `{` met inside an expression; returns its matching `}`.
    fn brace_in_expression(&mut self, open: usize) -> usize {
        if self.opens_anonymous(open) {
            self.type_body(open + 1, false)
        } else {
            let close = self.matching(open, b'{', b'}');
            self.code_block(open + 1, close);
            close
        }
    }

    /// Statements between `from` and the closing brace at `close`.
    fn code_block(&mut self, from: usize, close: usize) {
        let mut i = from;
        while i < close {
            if self.is(i, b'{') {
                if self.opens_anonymous(i) {
                    i = self.type_body(i + 1, false) + 1;
                    continue;
                }
                let c = self.matching(i, b'{', b'}');
                self.code_block(i + 1, c);
                i = c + 1;
                continue;
            }
            let local_type = match self.word(i) {
                Some(w) if TYPE_KEYWORDS.contains(&w) => !(i > 0 && self.is(i - 1, b'.')),
                Some("record") => self.word(i + 1).is_some() && (self.is(i + 2, b'(') || self.is(i + 2, b'<')),
                _ => false,
            };
            if local_type {
                let is_enum = self.word(i) == Some("enum");
                let mut j = i;
                while j < close && !self.is(j, b'{') {
                    j += 1;
                }
                i = self.type_body(j + 1, is_enum) + 1;
                continue;
            }
            i += 1;
        }
    }
}

/// Verbatim text of every method or constructor with a body, in the order
/// their declarations open.
pub fn concrete_method_texts(src: &str) -> Vec<String> {
    let mut scan = Scan { src, toks: lex(src), found: Vec::new() };
    let mut i = 0;
    while i < scan.toks.len() {
        // top level: package/import statements end with `;`, types open with `{`
        if scan.is(i, b'(') {
            // annotation arguments may contain braces
            i = scan.matching(i, b'(', b')') + 1;
        } else if scan.is(i, b'{') {
            let start = (0..i)
                .rev()
                .find(|&k| scan.is(k, b';') || scan.is(k, b'}'))
                .map(|k| k + 1)
                .unwrap_or(0);
            let is_enum = (start..i).any(|k| scan.word(k) == Some("enum"));
            i = scan.type_body(i + 1, is_enum) + 1;
        } else {
            i += 1;
        }
    }
    scan.found
}
