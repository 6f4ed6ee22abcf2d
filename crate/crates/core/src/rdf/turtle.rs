//! Turtle reader. N-Triples is read by the same code in a restricted mode that
//! rejects directives, prefixed names and the abbreviated syntaxes.

use std::collections::HashMap;

use super::{line_col, resolve_iri, BlankNamer, Literal, ParseError, Resource, Term, Triple};
use crate::vocab;

pub(super) fn parse<F: FnMut(Triple)>(
    input: &[u8],
    base: Option<&str>,
    blanks: BlankNamer,
    ntriples: bool,
    sink: F,
) -> Result<(), ParseError> {
    let text = match std::str::from_utf8(input) {
        Ok(t) => t,
        Err(e) => {
            let valid = std::str::from_utf8(&input[..e.valid_up_to()]).unwrap_or("");
            let (line, column) = line_col(valid, valid.len());
            return Err(ParseError::Syntax {
                line,
                column,
                message: "invalid UTF-8".into(),
            });
        }
    };
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut parser = Parser {
        text,
        pos: 0,
        base: base.map(str::to_string),
        prefixes: HashMap::new(),
        blanks,
        ntriples,
        sink,
    };
    parser.document()
}

struct Parser<'a, F> {
    text: &'a str,
    pos: usize,
    base: Option<String>,
    prefixes: HashMap<String, String>,
    blanks: BlankNamer,
    ntriples: bool,
    sink: F,
}

type PResult<T> = Result<T, ParseError>;

fn is_pn_chars_base(c: char) -> bool {
    matches!(c,
        'A'..='Z' | 'a'..='z'
        | '\u{C0}'..='\u{D6}' | '\u{D8}'..='\u{F6}' | '\u{F8}'..='\u{2FF}'
        | '\u{370}'..='\u{37D}' | '\u{37F}'..='\u{1FFF}' | '\u{200C}'..='\u{200D}'
        | '\u{2070}'..='\u{218F}' | '\u{2C00}'..='\u{2FEF}' | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}' | '\u{FDF0}'..='\u{FFFD}' | '\u{10000}'..='\u{EFFFF}')
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c == '\u{B7}'
        || ('\u{300}'..='\u{36F}').contains(&c)
        || ('\u{203F}'..='\u{2040}').contains(&c)
}

impl<'a, F: FnMut(Triple)> Parser<'a, F> {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        self.err_at(self.pos, message)
    }

    fn err_at<T>(&self, pos: usize, message: impl Into<String>) -> PResult<T> {
        let (line, column) = line_col(self.text, pos);
        Err(ParseError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' || c == '\r' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        self.skip_ws();
        match self.peek() {
            Some(found) if found == c => {
                self.bump();
                Ok(())
            }
            Some(found) => self.err(format!("expected '{c}', found '{found}'")),
            None => self.err(format!("expected '{c}', found end of input")),
        }
    }

    fn emit(&mut self, subject: Resource, predicate: String, object: Term) {
        (self.sink)(Triple {
            subject,
            predicate,
            object,
        });
    }

    fn document(&mut self) -> PResult<()> {
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(());
            }
            self.statement()?;
        }
    }

    fn keyword_ci(&self, word: &str) -> bool {
        let rest = self.rest();
        rest.len() >= word.len()
            && rest.is_char_boundary(word.len())
            && rest[..word.len()].eq_ignore_ascii_case(word)
            && rest[word.len()..]
                .chars()
                .next()
                .is_none_or(|c| c.is_whitespace() || c == '<' || c == '#')
    }

    fn statement(&mut self) -> PResult<()> {
        if self.peek() == Some('@') {
            if self.ntriples {
                return self.err("directives are not allowed in N-Triples");
            }
            if self.rest().starts_with("@prefix") {
                self.pos += "@prefix".len();
                self.prefix_decl()?;
                return self.expect('.');
            }
            if self.rest().starts_with("@base") {
                self.pos += "@base".len();
                self.base_decl()?;
                return self.expect('.');
            }
            return self.err("unknown directive");
        }
        if !self.ntriples {
            if self.keyword_ci("PREFIX") {
                self.pos += "PREFIX".len();
                return self.prefix_decl();
            }
            if self.keyword_ci("BASE") {
                self.pos += "BASE".len();
                return self.base_decl();
            }
        }
        self.triples()?;
        self.expect('.')
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        self.skip_ws();
        let start = self.pos;
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if is_pn_chars(c) || c == '.' {
                prefix.push(c);
                self.bump();
            } else {
                return self.err(format!("invalid character '{c}' in prefix name"));
            }
        }
        if prefix.ends_with('.') || prefix.starts_with(|c: char| !is_pn_chars_base(c)) && !prefix.is_empty() {
            return self.err_at(start, format!("invalid prefix name '{prefix}'"));
        }
        self.expect(':')?;
        self.skip_ws();
        let iri = self.iriref()?;
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn base_decl(&mut self) -> PResult<()> {
        self.skip_ws();
        let iri = self.iriref()?;
        self.base = Some(iri);
        Ok(())
    }

    fn triples(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some('[') && !self.ntriples {
            let subject = self.blank_node_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> PResult<Resource> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Resource::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(Resource::Blank(self.blank_label()?)),
            Some('(') if !self.ntriples => match self.collection()? {
                Term::Iri(i) => Ok(Resource::Iri(i)),
                Term::Blank(b) => Ok(Resource::Blank(b)),
                Term::Literal(_) => unreachable!("collections are never literals"),
            },
            Some('[') if !self.ntriples => {
                // `[]` used as a plain subject
                let start = self.pos;
                self.bump();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.bump();
                    Ok(Resource::Blank(self.blanks.fresh()))
                } else {
                    self.err_at(start, "unexpected blank node property list")
                }
            }
            Some(_) if !self.ntriples => Ok(Resource::Iri(self.prefixed_name()?)),
            Some(c) => self.err(format!("unexpected '{c}' in subject position")),
            None => self.err("unexpected end of input"),
        }
    }

    fn predicate_object_list(&mut self, subject: &Resource) -> PResult<()> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            if self.peek() != Some(';') || self.ntriples {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            match self.peek() {
                Some('.') | Some(']') | None => return Ok(()),
                _ => {}
            }
        }
    }

    fn verb(&mut self) -> PResult<String> {
        self.skip_ws();
        if !self.ntriples && self.peek() == Some('a') {
            let next = self.peek_at(1);
            if next.is_none_or(|c| !(is_pn_chars(c) || c == ':' || c == '.')) {
                self.bump();
                return Ok(vocab::rdf::TYPE.to_string());
            }
        }
        match self.peek() {
            Some('<') => self.iriref(),
            Some(_) if !self.ntriples => self.prefixed_name(),
            Some(c) => self.err(format!("unexpected '{c}' in predicate position")),
            None => self.err("unexpected end of input"),
        }
    }

    fn object_list(&mut self, subject: &Resource, predicate: &str) -> PResult<()> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.to_string(), object);
            self.skip_ws();
            if self.peek() == Some(',') && !self.ntriples {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> PResult<Term> {
        self.skip_ws();
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err("unexpected end of input"),
        };
        match c {
            '<' => Ok(Term::Iri(self.iriref()?)),
            '_' if self.peek_at(1) == Some(':') => Ok(Term::Blank(self.blank_label()?)),
            '"' | '\'' => self.rdf_literal(),
            _ if self.ntriples => self.err(format!("unexpected '{c}' in object position")),
            '(' => self.collection(),
            '[' => Ok(Term::from(self.blank_node_property_list()?)),
            '+' | '-' | '.' | '0'..='9' => self.numeric_literal(),
            _ => {
                for (word, value) in [("true", "true"), ("false", "false")] {
                    if self.rest().starts_with(word)
                        && self.rest()[word.len()..]
                            .chars()
                            .next()
                            .is_none_or(|c| !(is_pn_chars(c) || c == ':'))
                    {
                        self.pos += word.len();
                        return Ok(Term::Literal(Literal::typed(value, vocab::xsd::BOOLEAN)));
                    }
                }
                Ok(Term::Iri(self.prefixed_name()?))
            }
        }
    }

    fn blank_node_property_list(&mut self) -> PResult<Resource> {
        self.expect('[')?;
        let node = Resource::Blank(self.blanks.fresh());
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
        }
        self.expect(']')?;
        Ok(node)
    }

    fn collection(&mut self) -> PResult<Term> {
        self.expect('(')?;
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                None => return self.err("unterminated collection"),
                _ => items.push(self.object()?),
            }
        }
        if items.is_empty() {
            return Ok(Term::Iri(vocab::rdf::NIL.to_string()));
        }
        let nodes: Vec<String> = items.iter().map(|_| self.blanks.fresh()).collect();
        for (i, item) in items.into_iter().enumerate() {
            let node = Resource::Blank(nodes[i].clone());
            self.emit(node.clone(), vocab::rdf::FIRST.to_string(), item);
            let rest = match nodes.get(i + 1) {
                Some(next) => Term::Blank(next.clone()),
                None => Term::Iri(vocab::rdf::NIL.to_string()),
            };
            self.emit(node, vocab::rdf::REST.to_string(), rest);
        }
        Ok(Term::Blank(nodes[0].clone()))
    }

    fn iriref(&mut self) -> PResult<String> {
        let start = self.pos;
        if self.bump() != Some('<') {
            return self.err_at(start, "expected IRI");
        }
        let mut iri = String::new();
        loop {
            match self.bump() {
                None => return self.err_at(start, "unterminated IRI"),
                Some('>') => break,
                Some('\\') => {
                    let c = self.uchar()?;
                    iri.push(c);
                }
                Some(c) if matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') || c <= ' ' => {
                    return self.err(format!("invalid character {c:?} in IRI"));
                }
                Some(c) => iri.push(c),
            }
        }
        match resolve_iri(self.base.as_deref(), &iri) {
            Ok(resolved) => Ok(resolved),
            Err(message) => self.err_at(start, message),
        }
    }

    /// Reads the part of `\uXXXX` / `\UXXXXXXXX` after the backslash.
    fn uchar(&mut self) -> PResult<char> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return self.err("invalid escape sequence"),
        };
        let start = self.pos;
        for _ in 0..width {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return self.err("invalid unicode escape"),
            }
        }
        let code = u32::from_str_radix(&self.text[start..self.pos], 16).expect("hex digits");
        match char::from_u32(code) {
            Some(c) => Ok(c),
            None => self.err_at(start, "escape is not a unicode scalar value"),
        }
    }

    fn blank_label(&mut self) -> PResult<String> {
        self.pos += 2; // "_:"
        let start = self.pos;
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
                self.bump();
            }
            _ => return self.err("invalid blank node label"),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || c == '.' {
                self.bump();
            } else {
                break;
            }
        }
        while self.text[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        Ok(self.blanks.labeled(&self.text[start..self.pos]))
    }

    fn prefixed_name(&mut self) -> PResult<String> {
        let start = self.pos;
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || c == '.' {
                prefix.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() != Some(':') {
            return self.err_at(start, format!("expected prefixed name, found '{prefix}'"));
        }
        self.bump();
        let namespace = match self.prefixes.get(&prefix) {
            Some(ns) => ns.clone(),
            None => return self.err_at(start, format!("undefined prefix '{prefix}:'")),
        };
        let mut local = String::new();
        // positions (byte offset before the char) of literal trailing dots
        let mut trailing_dots: Vec<usize> = Vec::new();
        let mut first = true;
        loop {
            let before = self.pos;
            let c = match self.peek() {
                Some(c) => c,
                None => break,
            };
            if c == '.' && !first {
                self.bump();
                local.push('.');
                trailing_dots.push(before);
                continue;
            }
            let accepted = if c == '%' {
                let h1 = self.peek_at(1);
                let h2 = self.peek_at(2);
                if h1.is_some_and(|h| h.is_ascii_hexdigit()) && h2.is_some_and(|h| h.is_ascii_hexdigit()) {
                    local.push('%');
                    self.bump();
                    local.push(self.bump().unwrap());
                    local.push(self.bump().unwrap());
                    true
                } else {
                    return self.err("invalid percent escape in local name");
                }
            } else if c == '\\' {
                match self.peek_at(1) {
                    Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => {
                        self.bump();
                        self.bump();
                        local.push(e);
                        true
                    }
                    _ => return self.err("invalid escape in local name"),
                }
            } else if (first && (is_pn_chars_u(c) || c == ':' || c.is_ascii_digit()))
                || (!first && (is_pn_chars(c) || c == ':'))
            {
                self.bump();
                local.push(c);
                true
            } else {
                false
            };
            if !accepted {
                break;
            }
            trailing_dots.clear();
            first = false;
        }
        if let Some(&pos) = trailing_dots.first() {
            local.truncate(local.len() - trailing_dots.len());
            self.pos = pos;
        }
        let iri = format!("{namespace}{local}");
        match resolve_iri(self.base.as_deref(), &iri) {
            Ok(resolved) => Ok(resolved),
            Err(message) => self.err_at(start, message),
        }
    }

    fn rdf_literal(&mut self) -> PResult<Term> {
        let lexical = self.string()?;
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        self.bump();
                    } else {
                        break;
                    }
                }
                let tag = &self.text[start..self.pos];
                if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return self.err_at(start, "invalid language tag");
                }
                Ok(Term::Literal(Literal::lang(lexical, tag)))
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.pos += 2;
                let datatype = match self.peek() {
                    Some('<') => self.iriref()?,
                    _ if !self.ntriples => self.prefixed_name()?,
                    _ => return self.err("expected datatype IRI"),
                };
                Ok(Term::Literal(Literal::typed(lexical, datatype)))
            }
            _ => Ok(Term::Literal(Literal::string(lexical))),
        }
    }

    fn string(&mut self) -> PResult<String> {
        let start = self.pos;
        let quote = self.bump().expect("caller checked the quote");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            if self.ntriples {
                return self.err_at(start, "long strings are not allowed in N-Triples");
            }
            self.pos += 2;
        } else if self.ntriples && quote == '\'' {
            return self.err_at(start, "single-quoted strings are not allowed in N-Triples");
        }
        let mut out = String::new();
        loop {
            let c = match self.bump() {
                Some(c) => c,
                None => return self.err_at(start, "unterminated string"),
            };
            if c == quote {
                if !long {
                    return Ok(out);
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    // a run of quotes longer than three ends with the delimiter
                    if self.peek_at(2) != Some(quote) {
                        self.pos += 2;
                        return Ok(out);
                    }
                }
                out.push(c);
                continue;
            }
            match c {
                '\\' => match self.peek() {
                    Some('u') | Some('U') => out.push(self.uchar()?),
                    Some(e) => {
                        let unescaped = match e {
                            't' => '\t',
                            'b' => '\u{8}',
                            'n' => '\n',
                            'r' => '\r',
                            'f' => '\u{c}',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            _ => return self.err(format!("invalid escape '\\{e}'")),
                        };
                        self.bump();
                        out.push(unescaped);
                    }
                    None => return self.err_at(start, "unterminated string"),
                },
                '\n' | '\r' if !long => return self.err("line break in short string"),
                _ => out.push(c),
            }
        }
    }

    fn numeric_literal(&mut self) -> PResult<Term> {
        let start = self.pos;
        if matches!(self.peek(), Some('+') | Some('-')) {
            self.bump();
        }
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.bump();
            }
            p.pos - s
        };
        let int_digits = digits(self);
        let mut datatype = vocab::xsd::INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            digits(self);
            datatype = vocab::xsd::DECIMAL;
        } else if int_digits == 0 {
            return self.err_at(start, "invalid numeric literal");
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            self.bump();
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.bump();
            }
            if digits(self) == 0 {
                return self.err("invalid exponent");
            }
            datatype = vocab::xsd::DOUBLE;
        }
        Ok(Term::Literal(Literal::typed(&self.text[start..self.pos], datatype)))
    }
}
