//! Parsers for signature files and for terms of a signature.
//!
//! Signature files are line oriented:
//!
//! ```text
//! sorts: Term Type          # data sorts, space separated
//! term_sort: Term
//! type_sorts: Type          # optional; defaults to all sorts
//! param Type : iota omicron # optional, per data sort
//! op Pi : (Term, Var.Term) -> Term
//! ```
//!
//! `#` starts a comment anywhere on a line. Sort expressions use `1`, `Var`,
//! sort names, parenthesized comma tuples (left associated) and `Var.` for
//! name abstraction.
//!
//! Term parsing is sort directed: `#k` is the k-th context variable, an
//! identifier is a parameter, a bare constant operation or a binder-bound
//! name depending on the expected sort, `op(a, b, ...)` applies an operation
//! to its flattened argument tuple, and `x. body` is a name abstraction.

use crate::error::{Error, Result};
use crate::syntax::{alpha_normalize, CompoundSort, NTerm, OpDecl, RawTerm, Signature};
use std::collections::BTreeMap;

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Parse a signature from source text. Directive order is free but each of
/// `sorts:`, `term_sort:`, `type_sorts:` may appear at most once.
pub fn parse_signature(src: &str) -> Result<Signature> {
    let mut sorts: Option<Vec<String>> = None;
    let mut term_sort: Option<String> = None;
    let mut type_sorts: Option<Vec<String>> = None;
    let mut params: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut ops: Vec<OpDecl> = Vec::new();

    for (idx, raw_line) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("sorts:") {
            if sorts.is_some() {
                return Err(Error::parse(lineno, 1, "duplicate `sorts:` directive"));
            }
            sorts = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if let Some(rest) = line.strip_prefix("term_sort:") {
            if term_sort.is_some() {
                return Err(Error::parse(lineno, 1, "duplicate `term_sort:` directive"));
            }
            let name = rest.trim();
            if name.is_empty() {
                return Err(Error::parse(lineno, 1, "`term_sort:` needs a sort name"));
            }
            term_sort = Some(name.to_string());
        } else if let Some(rest) = line.strip_prefix("type_sorts:") {
            if type_sorts.is_some() {
                return Err(Error::parse(lineno, 1, "duplicate `type_sorts:` directive"));
            }
            type_sorts = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if let Some(rest) = line.strip_prefix("param ") {
            let (sort, names) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, 1, "expected `param <sort> : <names>`"))?;
            let sort = sort.trim().to_string();
            let names: Vec<String> = names.split_whitespace().map(str::to_string).collect();
            if sort.is_empty() || names.is_empty() {
                return Err(Error::parse(lineno, 1, "expected `param <sort> : <names>`"));
            }
            params.entry(sort).or_default().extend(names);
        } else if let Some(rest) = line.strip_prefix("op ") {
            let (name, sig_part) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, 1, "expected `op <name> : <arg> -> <result>`"))?;
            let (arg_src, result) = sig_part
                .rsplit_once("->")
                .ok_or_else(|| Error::parse(lineno, 1, "expected `->` in operation declaration"))?;
            let mut p = SortParser::new(arg_src, lineno);
            let arg = p.sort()?;
            p.finish()?;
            ops.push(OpDecl {
                name: name.trim().to_string(),
                arg,
                result: result.trim().to_string(),
            });
        } else {
            return Err(Error::parse(
                lineno,
                1,
                format!("unrecognized directive: `{line}`"),
            ));
        }
    }

    let sorts = sorts.ok_or_else(|| Error::Invalid("missing `sorts:` directive".into()))?;
    let term_sort =
        term_sort.ok_or_else(|| Error::Invalid("missing `term_sort:` directive".into()))?;
    let type_sorts = type_sorts.unwrap_or_else(|| sorts.clone());
    let sig = Signature {
        sorts,
        term_sort,
        type_sorts,
        params,
        ops,
        tag: None,
    };
    sig.validate()?;
    Ok(sig)
}

struct SortParser<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> SortParser<'a> {
    fn new(src: &'a str, line: usize) -> SortParser<'a> {
        SortParser { src, pos: 0, line }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos + 1, msg)
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if is_ident_start(c) => {
                self.bump();
            }
            _ => return Err(self.err("expected an identifier")),
        }
        while matches!(self.peek(), Some(c) if is_ident_continue(c)) {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn sort(&mut self) -> Result<CompoundSort> {
        self.skip_ws();
        match self.peek() {
            Some('1') => {
                self.bump();
                Ok(CompoundSort::Unit)
            }
            Some('(') => {
                self.bump();
                let mut parts = vec![self.sort()?];
                self.skip_ws();
                while self.peek() == Some(',') {
                    self.bump();
                    parts.push(self.sort()?);
                    self.skip_ws();
                }
                if self.bump() != Some(')') {
                    return Err(self.err("expected `)` or `,` in tuple sort"));
                }
                Ok(CompoundSort::tuple(parts))
            }
            Some(c) if is_ident_start(c) => {
                let name = self.ident()?;
                if name == "Var" {
                    self.skip_ws();
                    if self.peek() == Some('.') {
                        self.bump();
                        return Ok(CompoundSort::abs(self.sort()?));
                    }
                    return Ok(CompoundSort::Var);
                }
                Ok(CompoundSort::Data(name))
            }
            _ => Err(self.err("expected a sort expression")),
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.err("trailing input after sort expression"));
        }
        Ok(())
    }
}

struct TermParser<'a> {
    sig: &'a Signature,
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> TermParser<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos + 1, msg)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.bump() == Some(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if is_ident_start(c) => {
                self.bump();
            }
            _ => return Err(self.err("expected an identifier")),
        }
        while matches!(self.peek(), Some(c) if is_ident_continue(c)) {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn term(&mut self, sort: &CompoundSort) -> Result<RawTerm> {
        self.skip_ws();
        match sort {
            CompoundSort::Unit => {
                self.expect('(')?;
                self.expect(')')?;
                Ok(RawTerm::Unit)
            }
            CompoundSort::Var => Ok(RawTerm::Name(self.ident()?)),
            CompoundSort::Abs(inner) => {
                let name = self.ident()?;
                self.expect('.')?;
                Ok(RawTerm::bind(&name, self.term(inner)?))
            }
            CompoundSort::Pair(..) => {
                self.expect('(')?;
                let spine = sort.spine();
                let mut parts = Vec::with_capacity(spine.len());
                for (i, part_sort) in spine.iter().enumerate() {
                    if i > 0 {
                        self.expect(',')?;
                    }
                    parts.push(self.term(part_sort)?);
                }
                self.expect(')')?;
                let mut it = parts.into_iter();
                let first = it.next().expect("tuple sorts have at least two parts");
                Ok(it.fold(first, RawTerm::pair))
            }
            CompoundSort::Data(d) => self.data_term(d),
        }
    }

    fn data_term(&mut self, d: &str) -> Result<RawTerm> {
        self.skip_ws();
        if self.peek() == Some('#') {
            self.bump();
            let k = self.number()?;
            if d != self.sig.term_sort {
                return Err(self.err(format!(
                    "context variables have sort `{}`, expected `{d}`",
                    self.sig.term_sort
                )));
            }
            return Ok(RawTerm::FreeVar(k));
        }
        let name = self.ident()?;
        if let Some(ps) = self.sig.param_sort(&name) {
            if ps != d {
                return Err(self.err(format!(
                    "parameter `{name}` has sort `{ps}`, expected `{d}`"
                )));
            }
            return Ok(RawTerm::Param(name, d.to_string()));
        }
        let decl = match self.sig.op(&name) {
            Some(decl) => decl,
            None => return Err(self.err(format!("unknown operation `{name}`"))),
        };
        if decl.result != d {
            return Err(self.err(format!(
                "operation `{name}` produces `{}`, expected `{d}`",
                decl.result
            )));
        }
        self.skip_ws();
        if self.peek() != Some('(') {
            if decl.arg == CompoundSort::Unit {
                return Ok(RawTerm::op(&name, RawTerm::Unit));
            }
            return Err(self.err(format!("operation `{name}` needs arguments")));
        }
        if decl.arg == CompoundSort::Unit {
            self.expect('(')?;
            self.expect(')')?;
            return Ok(RawTerm::op(&name, RawTerm::Unit));
        }
        self.expect('(')?;
        let arg_sort = decl.arg.clone();
        let arg = match &arg_sort {
            CompoundSort::Pair(..) => {
                let spine = arg_sort.spine();
                let mut parts = Vec::with_capacity(spine.len());
                for (i, part_sort) in spine.iter().enumerate() {
                    if i > 0 {
                        self.expect(',')?;
                    }
                    parts.push(self.term(part_sort)?);
                }
                let mut it = parts.into_iter();
                let first = it.next().expect("nonempty spine");
                it.fold(first, RawTerm::pair)
            }
            other => self.term(other)?,
        };
        self.expect(')')?;
        Ok(RawTerm::op(&name, arg))
    }
}

/// Parse a term at the given compound sort over `arity` context variables.
/// The result is alpha normal and fully checked. `line` seeds error
/// positions when the text came from a larger file.
pub fn parse_term_of_sort(
    src: &str,
    sig: &Signature,
    sort: &CompoundSort,
    arity: usize,
    line: usize,
) -> Result<NTerm> {
    let mut p = TermParser { sig, src, pos: 0, line };
    let raw = p.term(sort)?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.err("trailing input after term"));
    }
    let t = alpha_normalize(&raw)?;
    sig.check_term(&t, sort, arity, 0)?;
    Ok(t)
}

/// Parse a term of a data sort.
pub fn parse_data_term(
    src: &str,
    sig: &Signature,
    sort_name: &str,
    arity: usize,
    line: usize,
) -> Result<NTerm> {
    parse_term_of_sort(src, sig, &CompoundSort::data(sort_name), arity, line)
}
