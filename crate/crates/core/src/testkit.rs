//! Test support: reference oracles, shared fixtures, and instance samplers.
//!
//! Gated behind the `testkit` feature and consumed by this crate's own test
//! suites and the command-line crate's tests. Nothing here is library API.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::congruence::{EqDB, TypeEq};
use crate::csystem::{Context, Morph};
use crate::error::{Error, Result};
use crate::gen::Gen;
use crate::monad::{Assignment, ModuleSpec};
use crate::sigmonad::sig_module;
use crate::subsystem::{hom_membership, Bounds, JudgementDB};
use crate::syntax::{builtin_signature, NTerm, RawTerm};
use crate::value::{RTerm, Value};

/// Convert a nameless tree to a named one. Monad variable `j` becomes the
/// free name `v{j}`; binders are named `v{arity+1}`, `v{arity+2}`, ... in
/// traversal order, so a wider bind target makes those names collide with
/// component variables and forces real capture avoidance in the oracle.
pub fn named_of_nterm(t: &NTerm, arity: usize) -> RawTerm {
    fn go(t: &NTerm, arity: usize, counter: &mut usize, stack: &mut Vec<String>) -> RawTerm {
        match t {
            NTerm::FreeVar(j) => RawTerm::Name(format!("v{j}")),
            NTerm::Bound(i) => RawTerm::Name(stack[stack.len() - 1 - i].clone()),
            NTerm::Abs(body) => {
                *counter += 1;
                let name = format!("v{}", arity + *counter);
                stack.push(name.clone());
                let inner = go(body, arity, counter, stack);
                stack.pop();
                RawTerm::Bind(name, Box::new(inner))
            }
            NTerm::Op(name, arg) => {
                RawTerm::Op(name.clone(), Box::new(go(arg, arity, counter, stack)))
            }
            NTerm::PairT(a, b) => RawTerm::Pair(
                Box::new(go(a, arity, counter, stack)),
                Box::new(go(b, arity, counter, stack)),
            ),
            NTerm::Param(p, s) => RawTerm::Param(p.clone(), s.clone()),
            NTerm::Unit => RawTerm::Unit,
        }
    }
    go(t, arity, &mut 0, &mut Vec::new())
}

/// Names occurring free in a named term.
pub fn free_names(t: &RawTerm) -> BTreeSet<String> {
    fn go(t: &RawTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match t {
            RawTerm::Name(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            RawTerm::Bind(x, body) => {
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            RawTerm::Op(_, arg) => go(arg, bound, out),
            RawTerm::Pair(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            RawTerm::FreeVar(_) | RawTerm::Param(..) | RawTerm::Unit => {}
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Rename free occurrences of `from` to the fresh name `to`.
fn rename_free(t: &RawTerm, from: &str, to: &str) -> RawTerm {
    match t {
        RawTerm::Name(x) if x == from => RawTerm::Name(to.to_string()),
        RawTerm::Name(_) | RawTerm::FreeVar(_) | RawTerm::Param(..) | RawTerm::Unit => t.clone(),
        RawTerm::Bind(x, _) if x == from => t.clone(),
        RawTerm::Bind(x, body) => RawTerm::Bind(x.clone(), Box::new(rename_free(body, from, to))),
        RawTerm::Op(name, arg) => RawTerm::Op(name.clone(), Box::new(rename_free(arg, from, to))),
        RawTerm::Pair(a, b) => {
            RawTerm::Pair(Box::new(rename_free(a, from, to)), Box::new(rename_free(b, from, to)))
        }
    }
}

/// Textbook capture-avoiding simultaneous substitution on named terms. A
/// binder whose name occurs free in a substituted image is renamed to a
/// fresh `u{k}` before descending.
pub fn subst_named(
    t: &RawTerm,
    sigma: &BTreeMap<String, RawTerm>,
    fresh: &mut usize,
) -> RawTerm {
    match t {
        RawTerm::Name(x) => sigma.get(x).cloned().unwrap_or_else(|| t.clone()),
        RawTerm::Bind(x, body) => {
            let body_free = free_names(body);
            let mut image_free = BTreeSet::new();
            for (key, image) in sigma {
                if key != x && body_free.contains(key) {
                    image_free.extend(free_names(image));
                }
            }
            if image_free.contains(x) {
                *fresh += 1;
                let x2 = format!("u{fresh}");
                let renamed = rename_free(body, x, &x2);
                RawTerm::Bind(x2, Box::new(subst_named(&renamed, sigma, fresh)))
            } else {
                let mut inner = sigma.clone();
                inner.remove(x);
                RawTerm::Bind(x.clone(), Box::new(subst_named(body, &inner, fresh)))
            }
        }
        RawTerm::Op(name, arg) => {
            RawTerm::Op(name.clone(), Box::new(subst_named(arg, sigma, fresh)))
        }
        RawTerm::Pair(a, b) => RawTerm::Pair(
            Box::new(subst_named(a, sigma, fresh)),
            Box::new(subst_named(b, sigma, fresh)),
        ),
        RawTerm::FreeVar(_) | RawTerm::Param(..) | RawTerm::Unit => t.clone(),
    }
}

/// Convert a named term back to the nameless form: bound names become
/// indices, free names `v{j}` become monad variables.
pub fn nterm_of_named(t: &RawTerm) -> Result<NTerm> {
    fn go(t: &RawTerm, stack: &mut Vec<String>) -> Result<NTerm> {
        Ok(match t {
            RawTerm::Name(x) => match stack.iter().rposition(|b| b == x) {
                Some(pos) => NTerm::Bound(stack.len() - 1 - pos),
                None => {
                    let j: usize = x
                        .strip_prefix('v')
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| Error::Invalid(format!("unbound name `{x}`")))?;
                    NTerm::FreeVar(j)
                }
            },
            RawTerm::Bind(x, body) => {
                stack.push(x.clone());
                let inner = go(body, stack);
                stack.pop();
                NTerm::Abs(Box::new(inner?))
            }
            RawTerm::Op(name, arg) => NTerm::Op(name.clone(), Box::new(go(arg, stack)?)),
            RawTerm::Pair(a, b) => NTerm::pair(go(a, stack)?, go(b, stack)?),
            RawTerm::Param(p, s) => NTerm::Param(p.clone(), s.clone()),
            RawTerm::FreeVar(j) => NTerm::FreeVar(*j),
            RawTerm::Unit => NTerm::Unit,
        })
    }
    go(t, &mut Vec::new())
}

/// Reference bind for tree monads: convert to named syntax, substitute with
/// capture avoidance, convert back.
pub fn named_bind_oracle(f: &Assignment, t: &RTerm) -> Result<RTerm> {
    if t.arity != f.source_arity {
        return Err(Error::ArityMismatch {
            what: "oracle bind argument arity",
            expected: f.source_arity,
            found: t.arity,
        });
    }
    let Value::Term(tree) = &t.value else {
        return Err(Error::Invalid(format!("named oracle needs a tree term, got `{t}`")));
    };
    let named_t = named_of_nterm(tree, t.arity);
    let mut sigma = BTreeMap::new();
    for (j, comp) in f.components.iter().enumerate() {
        let Value::Term(ctree) = &comp.value else {
            return Err(Error::Invalid(format!("named oracle needs tree components, got `{comp}`")));
        };
        sigma.insert(format!("v{}", j + 1), named_of_nterm(ctree, f.target_arity));
    }
    let mut fresh = 0;
    let out = subst_named(&named_t, &sigma, &mut fresh);
    Ok(RTerm::new(f.target_arity, Value::Term(nterm_of_named(&out)?)))
}

/// The two-universe fixture: the full judgement database of the signature
/// with closed types `U` and `U'`, its diagonal equalities, and the type
/// equalities identifying all types over every stored context.
pub fn gat_uu_fixture(max_len: usize) -> Result<(ModuleSpec, JudgementDB, EqDB, Bounds)> {
    let md = sig_module(builtin_signature("gat(U:type:0,U':type:0)")?)?;
    let bounds = Bounds::new(max_len, 2)?;
    let db = JudgementDB::full(md.clone(), &bounds)?;
    let mut eq = EqDB::diagonal(&db);
    for c in db.contexts() {
        let types = md.enumerate(c.len(), bounds.max_size())?;
        for lhs in &types {
            for rhs in &types {
                eq.insert_type_eq(TypeEq::new(c.clone(), lhs.clone(), rhs.clone())?);
            }
        }
    }
    Ok((md, db, eq, bounds))
}

/// Rejection-sample a morphism that is a hom of the given subsystem.
pub fn sample_hom(
    g: &mut Gen,
    db: &JudgementDB,
    dom: &Context,
    cod: &Context,
    max_size: usize,
    tries: usize,
) -> Option<Morph> {
    for _ in 0..tries {
        let f = g.morph(db.module().monad().as_ref(), dom, cod, max_size)?;
        if hom_membership(db, &f).ok()? {
            return Some(f);
        }
    }
    None
}
