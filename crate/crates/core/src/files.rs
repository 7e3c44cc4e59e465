//! Plain-text file formats for judgement databases, equality databases, and
//! quotient reports.
//!
//! Judgement files carry one record per line:
//!
//! ```text
//! ctx: T1 ; T2 ; ... ; Tn
//! typing: T1 ; ... ; Tn |- t : T
//! ```
//!
//! Equality files use the same context syntax:
//!
//! ```text
//! typeeq: T1 ; ... ; Tn |- S = S'
//! termeq: T1 ; ... ; Tn |- o = o' : T
//! ```
//!
//! Blank lines and full-line `#` comments are ignored. The empty context is
//! written `<empty>` and accepted both as `<empty>` and as an empty field.
//! Rendering is canonical (sorted by length, then total size, then text), so
//! render-then-parse is the identity on the underlying sets and every file
//! written here can be read back.

use std::fmt::Write as _;

use crate::congruence::{ctx_key, sec_key, EqDB, Quotient, TermEq, TypeEq};
use crate::csystem::{Context, Section};
use crate::error::{Error, Result};
use crate::monad::ModuleOps;
use crate::subsystem::JudgementDB;

/// Contexts and sections read from a judgement file, in file order.
#[derive(Debug, Clone, Default)]
pub struct ParsedJudgements {
    pub contexts: Vec<Context>,
    pub sections: Vec<Section>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col: 1, msg: msg.into() }
}

/// Parse a context field: entry `i` is a type over the first `i - 1` entries.
fn parse_context_field(module: &dyn ModuleOps, field: &str, line: usize) -> Result<Context> {
    let field = field.trim();
    if field.is_empty() || field == "<empty>" {
        return Ok(Context::empty());
    }
    let mut entries = Vec::new();
    for (i, part) in field.split(" ; ").enumerate() {
        entries.push(module.parse_term(part.trim(), i, line)?);
    }
    Context::new(entries)
}

/// Split `ctx |- rest` at the turnstile. No term prints ` |- `, so the first
/// occurrence is the separator.
fn split_turnstile(rest: &str, line: usize) -> Result<(&str, &str)> {
    rest.split_once(" |- ")
        .ok_or_else(|| parse_err(line, "expected `|-` between context and judgement"))
}

/// Split `body : ty` at the type annotation. No term prints ` : `, so the
/// rightmost occurrence is the separator.
fn split_type_annot(rest: &str, line: usize) -> Result<(&str, &str)> {
    rest.rsplit_once(" : ")
        .ok_or_else(|| parse_err(line, "expected `:` before the type"))
}

fn split_equals(rest: &str, line: usize) -> Result<(&str, &str)> {
    rest.split_once(" = ")
        .ok_or_else(|| parse_err(line, "expected `=` between the two sides"))
}

fn parse_section_line(module: &dyn ModuleOps, rest: &str, line: usize) -> Result<Section> {
    let (ctx_part, judg) = split_turnstile(rest, line)?;
    let ctx = parse_context_field(module, ctx_part, line)?;
    let (tm_part, ty_part) = split_type_annot(judg, line)?;
    let ty = module.parse_term(ty_part.trim(), ctx.len(), line)?;
    let tm = module.monad().parse_term(tm_part.trim(), ctx.len(), line)?;
    Section::new(ctx, ty, tm)
}

fn parse_typeeq_line(module: &dyn ModuleOps, rest: &str, line: usize) -> Result<TypeEq> {
    let (ctx_part, eq_part) = split_turnstile(rest, line)?;
    let ctx = parse_context_field(module, ctx_part, line)?;
    let (lhs_part, rhs_part) = split_equals(eq_part, line)?;
    let lhs = module.parse_term(lhs_part.trim(), ctx.len(), line)?;
    let rhs = module.parse_term(rhs_part.trim(), ctx.len(), line)?;
    TypeEq::new(ctx, lhs, rhs)
}

fn parse_termeq_line(module: &dyn ModuleOps, rest: &str, line: usize) -> Result<TermEq> {
    let (ctx_part, judg) = split_turnstile(rest, line)?;
    let ctx = parse_context_field(module, ctx_part, line)?;
    let (eq_part, ty_part) = split_type_annot(judg, line)?;
    let ty = module.parse_term(ty_part.trim(), ctx.len(), line)?;
    let (lhs_part, rhs_part) = split_equals(eq_part, line)?;
    let lhs = module.monad().parse_term(lhs_part.trim(), ctx.len(), line)?;
    let rhs = module.monad().parse_term(rhs_part.trim(), ctx.len(), line)?;
    TermEq::new(ctx, ty, lhs, rhs)
}

/// Lines that carry content: (1-based number, text), skipping blanks and
/// full-line `#` comments.
fn content_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parse a judgement file (`ctx:` and `typing:` lines) over the given module.
pub fn parse_judgement_file(module: &dyn ModuleOps, src: &str) -> Result<ParsedJudgements> {
    let mut out = ParsedJudgements::default();
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("ctx:") {
            out.contexts.push(parse_context_field(module, rest, line)?);
        } else if let Some(rest) = text.strip_prefix("typing:") {
            out.sections.push(parse_section_line(module, rest, line)?);
        } else {
            return Err(parse_err(line, "expected a `ctx:` or `typing:` line"));
        }
    }
    Ok(out)
}

/// Parse an equality file (`typeeq:` and `termeq:` lines) over the given module.
pub fn parse_eq_file(module: &dyn ModuleOps, src: &str) -> Result<EqDB> {
    let mut eq = EqDB::new();
    for (line, text) in content_lines(src) {
        if let Some(rest) = text.strip_prefix("typeeq:") {
            eq.insert_type_eq(parse_typeeq_line(module, rest, line)?);
        } else if let Some(rest) = text.strip_prefix("termeq:") {
            eq.insert_term_eq(parse_termeq_line(module, rest, line)?);
        } else {
            return Err(parse_err(line, "expected a `typeeq:` or `termeq:` line"));
        }
    }
    Ok(eq)
}

/// Render a judgement database in the file grammar, canonically ordered.
pub fn render_judgements(db: &JudgementDB) -> String {
    let mut ctxs: Vec<&Context> = db.contexts().iter().collect();
    ctxs.sort_by_key(|c| ctx_key(c));
    let mut secs: Vec<&Section> = db.sections().iter().collect();
    secs.sort_by_key(|s| sec_key(s));

    let mut out = String::new();
    for c in ctxs {
        let _ = writeln!(out, "ctx: {c}");
    }
    for s in secs {
        let _ = writeln!(out, "typing: {s}");
    }
    out
}

/// Render an equality database in the file grammar, canonically ordered.
pub fn render_eq(eq: &EqDB) -> String {
    let mut tys: Vec<&TypeEq> = eq.type_eqs().iter().collect();
    tys.sort_by_key(|e| (ctx_key(e.ctx()), e.lhs().size() + e.rhs().size(), e.to_string()));
    let mut tms: Vec<&TermEq> = eq.term_eqs().iter().collect();
    tms.sort_by_key(|e| (ctx_key(e.ctx()), e.lhs().size() + e.rhs().size(), e.to_string()));

    let mut out = String::new();
    for e in tys {
        let _ = writeln!(out, "typeeq: {e}");
    }
    for e in tms {
        let _ = writeln!(out, "termeq: {e}");
    }
    out
}

/// Render a quotient report: one line per class (representative first,
/// members joined by ` ~ `), then the induced father and boundary tables on
/// class ids. Class ids are 1-based in file order.
pub fn render_quotient(q: &Quotient) -> String {
    let mut out = String::new();
    for (i, class) in q.ctx_classes.iter().enumerate() {
        let members: Vec<String> = class.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "ctx-class {}: {}", i + 1, members.join(" ~ "));
    }
    for (i, class) in q.sec_classes.iter().enumerate() {
        let members: Vec<String> = class.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "sec-class {}: {}", i + 1, members.join(" ~ "));
    }
    for (i, f) in q.ft_map.iter().enumerate() {
        let _ = writeln!(out, "ft: ctx-class {} -> ctx-class {}", i + 1, f + 1);
    }
    for (i, b) in q.boundary_map.iter().enumerate() {
        match b {
            Some(c) => {
                let _ = writeln!(out, "boundary: sec-class {} -> ctx-class {}", i + 1, c + 1);
            }
            None => {
                let _ = writeln!(out, "boundary: sec-class {} -> out-of-bounds", i + 1);
            }
        }
    }
    out
}
