//! Builtin monads and module combinators.
//!
//! Three small monads cover the degenerate corners of the theory: `identity`
//! (elements are bare variables, so arity zero is empty), `point` (a single
//! element at every arity) and `option` (variables plus one extra point).
//! `broken-bind` is a negative fixture whose substitution violates
//! associativity on purpose; the law suite uses it to prove it can fail.
//!
//! Module combinators: `self_module` views a monad as a module over itself,
//! `module_product` pairs two modules over the same monad, and
//! `module_tagged_union` forms a disjoint union of labelled members. Union
//! members must have mutually exclusive parse syntax; the signature modules
//! guarantee that by directing parses with the root constructor's sort.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::monad::{
    canonical_sort_lmterms, canonical_sort_rterms, Assignment, ModuleOps, ModuleSpec, MonadOps,
    MonadSpec,
};
use crate::value::{LMTerm, RTerm, Value};

/// Look up one of the builtin monads: `identity`, `point` or `option`.
pub fn builtin_monad(name: &str) -> Result<MonadSpec> {
    match name {
        "identity" => Ok(Arc::new(IdentityMonad)),
        "point" => Ok(Arc::new(PointMonad)),
        "option" => Ok(Arc::new(OptionMonad)),
        _ => Err(Error::UnknownMonad(name.to_string())),
    }
}

/// The negative fixture: substitution forgets the constant whenever the
/// assignment changes arity, which breaks associativity but nothing else.
pub fn broken_monad() -> MonadSpec {
    Arc::new(BrokenBindMonad)
}

pub fn self_module(monad: MonadSpec) -> ModuleSpec {
    Arc::new(SelfModule { monad })
}

pub fn module_product(left: ModuleSpec, right: ModuleSpec) -> Result<ModuleSpec> {
    if left.monad().key() != right.monad().key() {
        return Err(Error::MonadMismatch {
            what: "module product",
            left: left.monad().key(),
            right: right.monad().key(),
        });
    }
    Ok(Arc::new(ProductModule { left, right }))
}

pub fn module_tagged_union(members: Vec<(String, ModuleSpec)>) -> Result<ModuleSpec> {
    if members.is_empty() {
        return Err(Error::Invalid("tagged union needs at least one member".into()));
    }
    let monad_key = members[0].1.monad().key();
    let mut tags = BTreeSet::new();
    for (tag, member) in &members {
        if !tags.insert(tag.clone()) {
            return Err(Error::Invalid(format!("duplicate union tag `{tag}`")));
        }
        if member.monad().key() != monad_key {
            return Err(Error::MonadMismatch {
                what: "tagged union",
                left: monad_key,
                right: member.monad().key(),
            });
        }
    }
    Ok(Arc::new(TaggedUnionModule { members }))
}

fn check_var(i: usize, arity: usize) -> Result<()> {
    if i >= 1 && i <= arity {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, arity })
    }
}

fn check_bind_arity(f: &Assignment, t_arity: usize) -> Result<()> {
    if t_arity != f.source_arity {
        return Err(Error::ArityMismatch {
            what: "bind argument arity",
            expected: f.source_arity,
            found: t_arity,
        });
    }
    if f.components.len() != f.source_arity {
        return Err(Error::ArityMismatch {
            what: "assignment components",
            expected: f.source_arity,
            found: f.components.len(),
        });
    }
    Ok(())
}

fn rename_atomic(value: &Value, map: &[usize], target_arity: usize) -> Result<Value> {
    Ok(match value {
        Value::Var(i) => {
            let j = *map.get(*i - 1).ok_or(Error::IndexOutOfRange {
                index: *i,
                arity: map.len(),
            })?;
            check_var(j, target_arity)?;
            Value::Var(j)
        }
        other => other.clone(),
    })
}

/// Shared parser for the atomic element syntax: `#k`, `*` and `*k`.
fn parse_atomic(
    src: &str,
    arity: usize,
    allow_star: bool,
    allow_consts: &[u32],
    line: usize,
) -> Result<Value> {
    let s = src.trim();
    if s == "*" {
        if allow_star {
            return Ok(Value::Star);
        }
        return Err(Error::parse(line, 1, "`*` is not an element of this monad"));
    }
    if let Some(num) = s.strip_prefix('#') {
        let i: usize = num
            .parse()
            .map_err(|_| Error::parse(line, 1, format!("bad variable `{s}`")))?;
        check_var(i, arity)?;
        return Ok(Value::Var(i));
    }
    if let Some(num) = s.strip_prefix('*') {
        let k: u32 = num
            .parse()
            .map_err(|_| Error::parse(line, 1, format!("bad constant `{s}`")))?;
        if allow_consts.contains(&k) {
            return Ok(Value::Const(k));
        }
        return Err(Error::parse(line, 1, format!("unknown constant `{s}`")));
    }
    Err(Error::parse(line, 1, format!("cannot parse element `{s}`")))
}

fn sample_from_enumeration(all: Vec<RTerm>, rng: &mut dyn RngCore) -> Option<RTerm> {
    if all.is_empty() {
        None
    } else {
        let i = rng.gen_range(0..all.len());
        Some(all[i].clone())
    }
}

#[derive(Debug)]
struct IdentityMonad;

impl MonadOps for IdentityMonad {
    fn name(&self) -> String {
        "identity".into()
    }

    fn key(&self) -> String {
        "identity".into()
    }

    fn eta(&self, arity: usize, i: usize) -> Result<RTerm> {
        check_var(i, arity)?;
        Ok(RTerm::new(arity, Value::Var(i)))
    }

    fn bind(&self, f: &Assignment, t: &RTerm) -> Result<RTerm> {
        check_bind_arity(f, t.arity)?;
        match &t.value {
            Value::Var(i) => Ok(f.component(*i)?.clone()),
            other => Err(Error::BadPayload(format!(
                "identity monad holds variables only, got `{other}`"
            ))),
        }
    }

    fn validate(&self, t: &RTerm) -> Result<()> {
        match &t.value {
            Value::Var(i) => check_var(*i, t.arity),
            other => Err(Error::BadPayload(format!(
                "identity monad holds variables only, got `{other}`"
            ))),
        }
    }

    fn free_vars(&self, t: &RTerm) -> Result<BTreeSet<usize>> {
        self.validate(t)?;
        Ok(t.value.free_vars())
    }

    fn rename(&self, t: &RTerm, map: &[usize], target_arity: usize) -> Result<RTerm> {
        self.validate(t)?;
        Ok(RTerm::new(target_arity, rename_atomic(&t.value, map, target_arity)?))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<RTerm>> {
        if max_size == 0 {
            return Ok(Vec::new());
        }
        Ok(canonical_sort_rterms(
            (1..=arity).map(|i| RTerm::new(arity, Value::Var(i))).collect(),
        ))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<RTerm> {
        sample_from_enumeration(self.enumerate(arity, max_size).ok()?, rng)
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<RTerm> {
        Ok(RTerm::new(arity, parse_atomic(src, arity, false, &[], line)?))
    }
}

#[derive(Debug)]
struct PointMonad;

impl MonadOps for PointMonad {
    fn name(&self) -> String {
        "point".into()
    }

    fn key(&self) -> String {
        "point".into()
    }

    fn eta(&self, arity: usize, i: usize) -> Result<RTerm> {
        // The unit collapses every variable to the point, so eta's image
        // has no free variables; the monad laws still hold.
        check_var(i, arity)?;
        Ok(RTerm::new(arity, Value::Star))
    }

    fn bind(&self, f: &Assignment, t: &RTerm) -> Result<RTerm> {
        check_bind_arity(f, t.arity)?;
        self.validate(t)?;
        Ok(RTerm::new(f.target_arity, Value::Star))
    }

    fn validate(&self, t: &RTerm) -> Result<()> {
        match &t.value {
            Value::Star => Ok(()),
            other => Err(Error::BadPayload(format!(
                "point monad has a single element `*`, got `{other}`"
            ))),
        }
    }

    fn free_vars(&self, t: &RTerm) -> Result<BTreeSet<usize>> {
        self.validate(t)?;
        Ok(BTreeSet::new())
    }

    fn rename(&self, t: &RTerm, _map: &[usize], target_arity: usize) -> Result<RTerm> {
        self.validate(t)?;
        Ok(RTerm::new(target_arity, Value::Star))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<RTerm>> {
        if max_size == 0 {
            return Ok(Vec::new());
        }
        Ok(vec![RTerm::new(arity, Value::Star)])
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<RTerm> {
        sample_from_enumeration(self.enumerate(arity, max_size).ok()?, rng)
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<RTerm> {
        Ok(RTerm::new(arity, parse_atomic(src, arity, true, &[], line)?))
    }
}

#[derive(Debug)]
struct OptionMonad;

impl MonadOps for OptionMonad {
    fn name(&self) -> String {
        "option".into()
    }

    fn key(&self) -> String {
        "option".into()
    }

    fn eta(&self, arity: usize, i: usize) -> Result<RTerm> {
        check_var(i, arity)?;
        Ok(RTerm::new(arity, Value::Var(i)))
    }

    fn bind(&self, f: &Assignment, t: &RTerm) -> Result<RTerm> {
        check_bind_arity(f, t.arity)?;
        match &t.value {
            Value::Var(i) => Ok(f.component(*i)?.clone()),
            Value::Star => Ok(RTerm::new(f.target_arity, Value::Star)),
            other => Err(Error::BadPayload(format!(
                "option monad holds variables and `*`, got `{other}`"
            ))),
        }
    }

    fn validate(&self, t: &RTerm) -> Result<()> {
        match &t.value {
            Value::Var(i) => check_var(*i, t.arity),
            Value::Star => Ok(()),
            other => Err(Error::BadPayload(format!(
                "option monad holds variables and `*`, got `{other}`"
            ))),
        }
    }

    fn free_vars(&self, t: &RTerm) -> Result<BTreeSet<usize>> {
        self.validate(t)?;
        Ok(t.value.free_vars())
    }

    fn rename(&self, t: &RTerm, map: &[usize], target_arity: usize) -> Result<RTerm> {
        self.validate(t)?;
        Ok(RTerm::new(target_arity, rename_atomic(&t.value, map, target_arity)?))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<RTerm>> {
        if max_size == 0 {
            return Ok(Vec::new());
        }
        let mut out = vec![RTerm::new(arity, Value::Star)];
        out.extend((1..=arity).map(|i| RTerm::new(arity, Value::Var(i))));
        Ok(canonical_sort_rterms(out))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<RTerm> {
        sample_from_enumeration(self.enumerate(arity, max_size).ok()?, rng)
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<RTerm> {
        Ok(RTerm::new(arity, parse_atomic(src, arity, true, &[], line)?))
    }
}

#[derive(Debug)]
struct BrokenBindMonad;

impl MonadOps for BrokenBindMonad {
    fn name(&self) -> String {
        "broken-bind".into()
    }

    fn key(&self) -> String {
        "broken-bind".into()
    }

    fn eta(&self, arity: usize, i: usize) -> Result<RTerm> {
        check_var(i, arity)?;
        Ok(RTerm::new(arity, Value::Var(i)))
    }

    fn bind(&self, f: &Assignment, t: &RTerm) -> Result<RTerm> {
        check_bind_arity(f, t.arity)?;
        match &t.value {
            Value::Var(i) => Ok(f.component(*i)?.clone()),
            Value::Star => Ok(RTerm::new(f.target_arity, Value::Star)),
            // The deliberate defect: the constant survives a bind only when
            // the assignment's components avoid the constant. Unit laws are
            // unaffected (eta assignments consist of variables, and bind on
            // eta(i) never reaches this arm), renaming binds agree with
            // rename, but a nested bind can disagree with its one-step
            // composite, so only associativity breaks.
            Value::Const(1) => {
                let mentions = f.components.iter().any(|c| matches!(c.value, Value::Const(1)));
                if mentions {
                    Ok(RTerm::new(f.target_arity, Value::Star))
                } else {
                    Ok(RTerm::new(f.target_arity, Value::Const(1)))
                }
            }
            other => Err(Error::BadPayload(format!(
                "broken-bind monad holds variables, `*` and `*1`, got `{other}`"
            ))),
        }
    }

    fn validate(&self, t: &RTerm) -> Result<()> {
        match &t.value {
            Value::Var(i) => check_var(*i, t.arity),
            Value::Star | Value::Const(1) => Ok(()),
            other => Err(Error::BadPayload(format!(
                "broken-bind monad holds variables, `*` and `*1`, got `{other}`"
            ))),
        }
    }

    fn free_vars(&self, t: &RTerm) -> Result<BTreeSet<usize>> {
        self.validate(t)?;
        Ok(t.value.free_vars())
    }

    fn rename(&self, t: &RTerm, map: &[usize], target_arity: usize) -> Result<RTerm> {
        self.validate(t)?;
        Ok(RTerm::new(target_arity, rename_atomic(&t.value, map, target_arity)?))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<RTerm>> {
        if max_size == 0 {
            return Ok(Vec::new());
        }
        let mut out = vec![
            RTerm::new(arity, Value::Star),
            RTerm::new(arity, Value::Const(1)),
        ];
        out.extend((1..=arity).map(|i| RTerm::new(arity, Value::Var(i))));
        Ok(canonical_sort_rterms(out))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<RTerm> {
        sample_from_enumeration(self.enumerate(arity, max_size).ok()?, rng)
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<RTerm> {
        Ok(RTerm::new(arity, parse_atomic(src, arity, true, &[1], line)?))
    }
}

#[derive(Debug)]
struct SelfModule {
    monad: MonadSpec,
}

fn as_rterm(e: &LMTerm) -> RTerm {
    RTerm::new(e.arity, e.value.clone())
}

fn as_lmterm(t: RTerm) -> LMTerm {
    LMTerm::new(t.arity, t.value)
}

impl ModuleOps for SelfModule {
    fn name(&self) -> String {
        format!("self({})", self.monad.name())
    }

    fn key(&self) -> String {
        format!("self({})", self.monad.key())
    }

    fn monad(&self) -> MonadSpec {
        Arc::clone(&self.monad)
    }

    fn rho(&self, f: &Assignment, e: &LMTerm) -> Result<LMTerm> {
        Ok(as_lmterm(self.monad.bind(f, &as_rterm(e))?))
    }

    fn validate(&self, e: &LMTerm) -> Result<()> {
        self.monad.validate(&as_rterm(e))
    }

    fn free_vars(&self, e: &LMTerm) -> Result<BTreeSet<usize>> {
        self.monad.free_vars(&as_rterm(e))
    }

    fn rename(&self, e: &LMTerm, map: &[usize], target_arity: usize) -> Result<LMTerm> {
        Ok(as_lmterm(self.monad.rename(&as_rterm(e), map, target_arity)?))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<LMTerm>> {
        Ok(self
            .monad
            .enumerate(arity, max_size)?
            .into_iter()
            .map(as_lmterm)
            .collect())
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<LMTerm> {
        self.monad.sample(rng, arity, max_size).map(as_lmterm)
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<LMTerm> {
        Ok(as_lmterm(self.monad.parse_term(src, arity, line)?))
    }
}

#[derive(Debug)]
struct ProductModule {
    left: ModuleSpec,
    right: ModuleSpec,
}

impl ProductModule {
    fn split(&self, e: &LMTerm) -> Result<(LMTerm, LMTerm)> {
        match &e.value {
            Value::Pair(a, b) => Ok((
                LMTerm::new(e.arity, (**a).clone()),
                LMTerm::new(e.arity, (**b).clone()),
            )),
            other => Err(Error::BadPayload(format!(
                "product module elements are pairs, got `{other}`"
            ))),
        }
    }
}

impl ModuleOps for ProductModule {
    fn name(&self) -> String {
        format!("{} x {}", self.left.name(), self.right.name())
    }

    fn key(&self) -> String {
        format!("product({},{})", self.left.key(), self.right.key())
    }

    fn monad(&self) -> MonadSpec {
        self.left.monad()
    }

    fn rho(&self, f: &Assignment, e: &LMTerm) -> Result<LMTerm> {
        let (a, b) = self.split(e)?;
        let ra = self.left.rho(f, &a)?;
        let rb = self.right.rho(f, &b)?;
        Ok(LMTerm::new(f.target_arity, Value::pair(ra.value, rb.value)))
    }

    fn validate(&self, e: &LMTerm) -> Result<()> {
        let (a, b) = self.split(e)?;
        self.left.validate(&a)?;
        self.right.validate(&b)
    }

    fn free_vars(&self, e: &LMTerm) -> Result<BTreeSet<usize>> {
        let (a, b) = self.split(e)?;
        let mut fv = self.left.free_vars(&a)?;
        fv.extend(self.right.free_vars(&b)?);
        Ok(fv)
    }

    fn rename(&self, e: &LMTerm, map: &[usize], target_arity: usize) -> Result<LMTerm> {
        let (a, b) = self.split(e)?;
        let ra = self.left.rename(&a, map, target_arity)?;
        let rb = self.right.rename(&b, map, target_arity)?;
        Ok(LMTerm::new(target_arity, Value::pair(ra.value, rb.value)))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<LMTerm>> {
        let mut out = Vec::new();
        if max_size < 3 {
            return Ok(out);
        }
        for a in self.left.enumerate(arity, max_size - 2)? {
            let budget = max_size - 1 - a.size();
            for b in self.right.enumerate(arity, budget)? {
                out.push(LMTerm::new(arity, Value::pair(a.value.clone(), b.value)));
            }
        }
        Ok(canonical_sort_lmterms(out))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<LMTerm> {
        let all = self.enumerate(arity, max_size).ok()?;
        if all.is_empty() {
            None
        } else {
            let i = rng.gen_range(0..all.len());
            Some(all[i].clone())
        }
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<LMTerm> {
        // `<left | right>`, splitting on the top-level bar.
        let s = src.trim();
        let inner = s
            .strip_prefix('<')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(|| Error::parse(line, 1, "product elements look like `<a | b>`"))?;
        let mut depth = 0usize;
        let mut split_at = None;
        for (i, c) in inner.char_indices() {
            match c {
                '<' => depth += 1,
                '>' => depth = depth.saturating_sub(1),
                '|' if depth == 0 => {
                    split_at = Some(i);
                    break;
                }
                _ => {}
            }
        }
        let at = split_at.ok_or_else(|| Error::parse(line, 1, "missing `|` in product element"))?;
        let a = self.left.parse_term(&inner[..at], arity, line)?;
        let b = self.right.parse_term(&inner[at + 1..], arity, line)?;
        Ok(LMTerm::new(arity, Value::pair(a.value, b.value)))
    }
}

#[derive(Debug)]
struct TaggedUnionModule {
    members: Vec<(String, ModuleSpec)>,
}

impl TaggedUnionModule {
    fn member(&self, tag: &str) -> Result<&ModuleSpec> {
        self.members
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::BadPayload(format!("unknown union tag `{tag}`")))
    }

    fn split<'e>(&self, e: &'e LMTerm) -> Result<(&'e str, LMTerm)> {
        match &e.value {
            Value::Tagged(tag, inner) => Ok((tag, LMTerm::new(e.arity, (**inner).clone()))),
            other => Err(Error::BadPayload(format!(
                "union module elements are tagged, got `{other}`"
            ))),
        }
    }
}

impl ModuleOps for TaggedUnionModule {
    fn name(&self) -> String {
        let tags: Vec<&str> = self.members.iter().map(|(t, _)| t.as_str()).collect();
        format!("union({})", tags.join(", "))
    }

    fn key(&self) -> String {
        let parts: Vec<String> = self
            .members
            .iter()
            .map(|(t, m)| format!("{t}:{}", m.key()))
            .collect();
        format!("union({})", parts.join(","))
    }

    fn monad(&self) -> MonadSpec {
        self.members[0].1.monad()
    }

    fn rho(&self, f: &Assignment, e: &LMTerm) -> Result<LMTerm> {
        let (tag, inner) = self.split(e)?;
        let r = self.member(tag)?.rho(f, &inner)?;
        Ok(LMTerm::new(f.target_arity, Value::tagged(tag, r.value)))
    }

    fn validate(&self, e: &LMTerm) -> Result<()> {
        let (tag, inner) = self.split(e)?;
        self.member(tag)?.validate(&inner)
    }

    fn free_vars(&self, e: &LMTerm) -> Result<BTreeSet<usize>> {
        let (tag, inner) = self.split(e)?;
        self.member(tag)?.free_vars(&inner)
    }

    fn rename(&self, e: &LMTerm, map: &[usize], target_arity: usize) -> Result<LMTerm> {
        let (tag, inner) = self.split(e)?;
        let r = self.member(tag)?.rename(&inner, map, target_arity)?;
        Ok(LMTerm::new(target_arity, Value::tagged(tag, r.value)))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<LMTerm>> {
        let mut out = Vec::new();
        for (tag, member) in &self.members {
            for e in member.enumerate(arity, max_size)? {
                out.push(LMTerm::new(arity, Value::tagged(tag, e.value)));
            }
        }
        Ok(canonical_sort_lmterms(out))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<LMTerm> {
        // Pick a member at random, then fall back to the others so a single
        // empty member does not sink the sample.
        let start = rng.gen_range(0..self.members.len());
        for off in 0..self.members.len() {
            let (tag, member) = &self.members[(start + off) % self.members.len()];
            if let Some(e) = member.sample(rng, arity, max_size) {
                return Some(LMTerm::new(arity, Value::tagged(tag, e.value)));
            }
        }
        None
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<LMTerm> {
        let mut last_err = None;
        for (tag, member) in &self.members {
            match member.parse_term(src, arity, line) {
                Ok(e) => return Ok(LMTerm::new(arity, Value::tagged(tag, e.value))),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("union has at least one member"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::{compose_assignments, eta_assignment};

    #[test]
    fn option_bind_follows_the_assignment() {
        let m = builtin_monad("option").unwrap();
        let f = Assignment::new(
            2,
            1,
            vec![RTerm::new(1, Value::Star), RTerm::new(1, Value::Var(1))],
        );
        assert_eq!(
            m.bind(&f, &RTerm::new(2, Value::Var(1))).unwrap(),
            RTerm::new(1, Value::Star)
        );
        assert_eq!(
            m.bind(&f, &RTerm::new(2, Value::Var(2))).unwrap(),
            RTerm::new(1, Value::Var(1))
        );
        assert_eq!(
            m.bind(&f, &RTerm::new(2, Value::Star)).unwrap(),
            RTerm::new(1, Value::Star)
        );
    }

    #[test]
    fn identity_monad_is_empty_at_arity_zero() {
        let m = builtin_monad("identity").unwrap();
        assert!(m.enumerate(0, 4).unwrap().is_empty());
        assert_eq!(m.enumerate(2, 4).unwrap().len(), 2);
        let mut rng = rand::rngs::mock::StepRng::new(7, 11);
        assert!(m.sample(&mut rng, 0, 4).is_none());
    }

    #[test]
    fn point_monad_has_one_element_and_lawful_units() {
        let m = builtin_monad("point").unwrap();
        assert_eq!(m.enumerate(5, 3).unwrap().len(), 1);
        let id = eta_assignment(m.as_ref(), 3).unwrap();
        let t = RTerm::new(3, Value::Star);
        assert_eq!(m.bind(&id, &t).unwrap(), t);
    }

    #[test]
    fn broken_bind_violates_associativity() {
        let m = broken_monad();
        let t = RTerm::new(1, Value::Const(1));
        // g keeps the constant alive, f would kill it; the composite g;f has
        // constant-free components and keeps it alive.
        let g = Assignment::new(1, 1, vec![RTerm::new(1, Value::Star)]);
        let f = Assignment::new(1, 1, vec![RTerm::new(1, Value::Const(1))]);
        let two_step = m.bind(&f, &m.bind(&g, &t).unwrap()).unwrap();
        let one_step = m
            .bind(&compose_assignments(m.as_ref(), &f, &g).unwrap(), &t)
            .unwrap();
        assert_eq!(two_step, RTerm::new(1, Value::Star));
        assert_eq!(one_step, RTerm::new(1, Value::Const(1)));
        assert_ne!(two_step, one_step);
    }

    #[test]
    fn product_module_acts_componentwise() {
        let m = builtin_monad("option").unwrap();
        let p = module_product(self_module(Arc::clone(&m)), self_module(Arc::clone(&m))).unwrap();
        let e = LMTerm::new(2, Value::pair(Value::Var(1), Value::Var(2)));
        p.validate(&e).unwrap();
        let f = Assignment::new(
            2,
            1,
            vec![RTerm::new(1, Value::Star), RTerm::new(1, Value::Var(1))],
        );
        assert_eq!(
            p.rho(&f, &e).unwrap(),
            LMTerm::new(1, Value::pair(Value::Star, Value::Var(1)))
        );
        let printed = e.to_string();
        assert_eq!(printed, "<#1 | #2>");
        assert_eq!(p.parse_term(&printed, 2, 1).unwrap(), e);
    }

    #[test]
    fn product_requires_matching_monads() {
        let a = self_module(builtin_monad("option").unwrap());
        let b = self_module(builtin_monad("point").unwrap());
        assert!(module_product(a, b).is_err());
    }

    #[test]
    fn tagged_union_round_trips_and_enumerates_all_members() {
        let m = builtin_monad("option").unwrap();
        let u = module_tagged_union(vec![
            ("a".into(), self_module(Arc::clone(&m))),
            ("b".into(), self_module(Arc::clone(&m))),
        ])
        .unwrap();
        let e = LMTerm::new(1, Value::tagged("b", Value::Var(1)));
        u.validate(&e).unwrap();
        let f = eta_assignment(m.as_ref(), 1).unwrap();
        assert_eq!(u.rho(&f, &e).unwrap(), e);
        // Two members, each with {*, #1} at arity 1.
        assert_eq!(u.enumerate(1, 3).unwrap().len(), 4);
    }

    #[test]
    fn parse_rejects_out_of_range_variables() {
        let m = builtin_monad("option").unwrap();
        assert!(m.parse_term("#3", 2, 1).is_err());
        assert_eq!(
            m.parse_term("#2", 2, 1).unwrap(),
            RTerm::new(2, Value::Var(2))
        );
        assert_eq!(m.parse_term(" * ", 0, 1).unwrap(), RTerm::new(0, Value::Star));
    }
}
