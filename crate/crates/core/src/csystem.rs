//! Contexts, morphisms, and the operations of the C-system built from a
//! module over a monad.
//!
//! An object of length n is a sequence of entries where entry i is a module
//! element at arity i-1, so each entry may mention exactly the variables
//! introduced before it. A morphism into a length-n object carries one monad
//! element per codomain entry, all at the domain's arity, and composition is
//! Kleisli substitution. Sections of canonical projections are kept as their
//! own type since the typing judgements of the subsystem layer live there.
//!
//! Functions take the minimal structure they need: a monad handle when only
//! term components are produced, a module handle whenever context entries
//! are computed.

use std::fmt;

use crate::error::{Error, Result};
use crate::monad::{
    check_assignment, include_rterm, subst_collapse_lmterm, subst_collapse_rterm, weaken_lmterm,
    weaken_rterm, Assignment, ModuleOps, MonadOps,
};
use crate::value::{LMTerm, RTerm};

/// A context. Entry i (1-based) has arity i-1; the constructor enforces
/// that ladder, payload well-formedness is `validate_context`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    entries: Vec<LMTerm>,
}

impl Context {
    pub fn empty() -> Context {
        Context { entries: Vec::new() }
    }

    pub fn new(entries: Vec<LMTerm>) -> Result<Context> {
        for (i, e) in entries.iter().enumerate() {
            if e.arity != i {
                return Err(Error::ArityMismatch {
                    what: "context entry arity",
                    expected: i,
                    found: e.arity,
                });
            }
        }
        Ok(Context { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LMTerm] {
        &self.entries
    }

    /// Entry `i`, 1-based.
    pub fn entry(&self, i: usize) -> Result<&LMTerm> {
        if i == 0 {
            return Err(Error::IndexOutOfRange { index: 0, arity: self.len() });
        }
        self.entries
            .get(i - 1)
            .ok_or(Error::IndexOutOfRange { index: i, arity: self.len() })
    }

    pub fn last(&self) -> Option<&LMTerm> {
        self.entries.last()
    }

    /// Drop the last entry. Total: the empty context is its own father.
    pub fn ft(&self) -> Context {
        let mut entries = self.entries.clone();
        entries.pop();
        Context { entries }
    }

    /// The first `k` entries.
    pub fn prefix(&self, k: usize) -> Result<Context> {
        if k > self.len() {
            return Err(Error::IndexOutOfRange { index: k, arity: self.len() });
        }
        Ok(Context { entries: self.entries[..k].to_vec() })
    }

    pub fn starts_with(&self, prefix: &Context) -> bool {
        self.entries.starts_with(&prefix.entries)
    }

    /// Extend by one entry, which must sit at the current length.
    pub fn extended(&self, ty: LMTerm) -> Result<Context> {
        if ty.arity != self.len() {
            return Err(Error::ArityMismatch {
                what: "context extension arity",
                expected: self.len(),
                found: ty.arity,
            });
        }
        let mut entries = self.entries.clone();
        entries.push(ty);
        Ok(Context { entries })
    }

    pub fn total_size(&self) -> usize {
        self.entries.iter().map(|e| e.size()).sum()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "<empty>");
        }
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " ; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// A morphism `dom -> cod`: one component per codomain entry, each a monad
/// element at the domain's arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morph {
    dom: Context,
    cod: Context,
    comps: Vec<RTerm>,
}

impl Morph {
    pub fn new(dom: Context, cod: Context, comps: Vec<RTerm>) -> Result<Morph> {
        if comps.len() != cod.len() {
            return Err(Error::ArityMismatch {
                what: "morphism components",
                expected: cod.len(),
                found: comps.len(),
            });
        }
        for c in &comps {
            if c.arity != dom.len() {
                return Err(Error::ArityMismatch {
                    what: "morphism component arity",
                    expected: dom.len(),
                    found: c.arity,
                });
            }
        }
        Ok(Morph { dom, cod, comps })
    }

    pub fn dom(&self) -> &Context {
        &self.dom
    }

    pub fn cod(&self) -> &Context {
        &self.cod
    }

    pub fn comps(&self) -> &[RTerm] {
        &self.comps
    }

    /// Component `i`, 1-based.
    pub fn comp(&self, i: usize) -> Result<&RTerm> {
        if i == 0 {
            return Err(Error::IndexOutOfRange { index: 0, arity: self.comps.len() });
        }
        self.comps
            .get(i - 1)
            .ok_or(Error::IndexOutOfRange { index: i, arity: self.comps.len() })
    }

    /// The underlying assignment: codomain variables into terms over the
    /// domain's variables.
    pub fn to_assignment(&self) -> Assignment {
        Assignment::new(self.cod.len(), self.dom.len(), self.comps.clone())
    }
}

impl fmt::Display for Morph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A typing judgement `ctx |- tm : ty`, equivalently a section of the
/// canonical projection from `(ctx, ty)`. Both `ty` and `tm` sit at the
/// context's arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Section {
    ctx: Context,
    ty: LMTerm,
    tm: RTerm,
}

impl Section {
    pub fn new(ctx: Context, ty: LMTerm, tm: RTerm) -> Result<Section> {
        if ty.arity != ctx.len() {
            return Err(Error::ArityMismatch {
                what: "section type arity",
                expected: ctx.len(),
                found: ty.arity,
            });
        }
        if tm.arity != ctx.len() {
            return Err(Error::ArityMismatch {
                what: "section term arity",
                expected: ctx.len(),
                found: tm.arity,
            });
        }
        Ok(Section { ctx, ty, tm })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ty(&self) -> &LMTerm {
        &self.ty
    }

    pub fn tm(&self) -> &RTerm {
        &self.tm
    }

    /// The boundary `(ctx, ty)`.
    pub fn boundary(&self) -> Context {
        let mut entries = self.ctx.entries.clone();
        entries.push(self.ty.clone());
        Context { entries }
    }

    pub fn total_size(&self) -> usize {
        self.ctx.total_size() + self.ty.size() + self.tm.size()
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {} : {}", self.ctx, self.tm, self.ty)
    }
}

/// Check every entry payload against the module.
pub fn validate_context(module: &dyn ModuleOps, ctx: &Context) -> Result<()> {
    for e in &ctx.entries {
        module.validate(e)?;
    }
    Ok(())
}

pub fn validate_section(module: &dyn ModuleOps, s: &Section) -> Result<()> {
    validate_context(module, &s.ctx)?;
    module.validate(&s.ty)?;
    module.monad().validate(&s.tm)
}

pub fn validate_morph(module: &dyn ModuleOps, f: &Morph) -> Result<()> {
    validate_context(module, &f.dom)?;
    validate_context(module, &f.cod)?;
    check_assignment(&*module.monad(), &f.to_assignment())
}

pub fn identity_morph(monad: &dyn MonadOps, ctx: &Context) -> Result<Morph> {
    let n = ctx.len();
    let comps = (1..=n).map(|i| monad.eta(n, i)).collect::<Result<Vec<_>>>()?;
    Morph::new(ctx.clone(), ctx.clone(), comps)
}

/// Diagrammatic composition: `f` then `g`, requiring `f.cod == g.dom`.
pub fn compose(monad: &dyn MonadOps, f: &Morph, g: &Morph) -> Result<Morph> {
    if f.cod != g.dom {
        return Err(Error::ContextMismatch(format!(
            "compose: codomain ({}) does not match domain ({})",
            f.cod, g.dom
        )));
    }
    let fa = f.to_assignment();
    let comps = g
        .comps
        .iter()
        .map(|c| monad.bind(&fa, c))
        .collect::<Result<Vec<_>>>()?;
    Morph::new(f.dom.clone(), g.cod.clone(), comps)
}

/// The canonical projection `ctx -> ft(ctx)`.
pub fn canonical_p(monad: &dyn MonadOps, ctx: &Context) -> Result<Morph> {
    if ctx.is_empty() {
        return Err(Error::Precondition(
            "the empty context has no canonical projection".into(),
        ));
    }
    let n = ctx.len();
    let comps = (1..n).map(|i| monad.eta(n, i)).collect::<Result<Vec<_>>>()?;
    Morph::new(ctx.clone(), ctx.ft(), comps)
}

/// The canonical pullback square of `p_x` along `f : dom -> ft(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pullback {
    /// `f.dom` extended by the last entry of `x` pushed forward along `f`.
    pub object: Context,
    /// The top arrow `object -> x` over `f`.
    pub q: Morph,
}

pub fn pullback(module: &dyn ModuleOps, f: &Morph, x: &Context) -> Result<Pullback> {
    if x.is_empty() {
        return Err(Error::Precondition("pullback needs a nonempty context".into()));
    }
    if f.cod != x.ft() {
        return Err(Error::ContextMismatch(format!(
            "pullback: codomain ({}) is not the father of ({})",
            f.cod, x
        )));
    }
    let monad = module.monad();
    let m = f.dom.len();
    let n = x.len() - 1;
    let pulled = module.rho(&f.to_assignment(), x.last().expect("nonempty"))?;
    let object = f.dom.extended(pulled)?;
    let mut comps = Vec::with_capacity(n + 1);
    for i in 1..=n {
        comps.push(include_rterm(&*monad, f.comp(i)?, m + 1)?);
    }
    comps.push(monad.eta(m + 1, m + 1)?);
    let q = Morph::new(object.clone(), x.clone(), comps)?;
    Ok(Pullback { object, q })
}

/// The section `ctx -> (ctx, ty)` determined by a typing judgement: the
/// identity on the first n components, the term last.
pub fn section_to_morph(monad: &dyn MonadOps, s: &Section) -> Result<Morph> {
    let n = s.ctx.len();
    let mut comps = Vec::with_capacity(n + 1);
    for i in 1..=n {
        comps.push(monad.eta(n, i)?);
    }
    comps.push(s.tm.clone());
    Morph::new(s.ctx.clone(), s.boundary(), comps)
}

/// Recover the judgement from a morphism that is a section of the canonical
/// projection. Fails naming the first component that is not the unit.
pub fn morph_to_section(monad: &dyn MonadOps, f: &Morph) -> Result<Section> {
    let n = f.dom.len();
    if f.cod.len() != n + 1 || f.cod.ft() != f.dom {
        return Err(Error::ContextMismatch(format!(
            "not a section: codomain ({}) does not extend domain ({})",
            f.cod, f.dom
        )));
    }
    for i in 1..=n {
        if *f.comp(i)? != monad.eta(n, i)? {
            return Err(Error::NotASection { component: i });
        }
    }
    Section::new(
        f.dom.clone(),
        f.cod.last().expect("nonempty").clone(),
        f.comp(n + 1)?.clone(),
    )
}

/// Append the part of `b` past `ft(a)` to `a`, weakened through the slot
/// that `a`'s last entry occupies. The extension part may be empty here;
/// the public `op_t` forbids that.
fn op_t_extend(module: &dyn ModuleOps, a: &Context, b: &Context) -> Result<Context> {
    let n = a.len() - 1;
    let mut out = a.clone();
    for j in (n + 1)..=b.len() {
        let e = weaken_lmterm(module, b.entry(j)?, n + 1)?;
        out = out.extended(e)?;
    }
    Ok(out)
}

/// Weaken `b = (ft(a), delta)` by the last entry of `a`, giving
/// `(ft(a), last(a), delta weakened)`. Requires a nonempty `delta`.
pub fn op_t(module: &dyn ModuleOps, a: &Context, b: &Context) -> Result<Context> {
    if a.is_empty() {
        return Err(Error::Precondition("op_t needs a nonempty first context".into()));
    }
    if !b.starts_with(&a.ft()) {
        return Err(Error::ContextMismatch(format!(
            "op_t: ({}) does not extend the father of ({})",
            b, a
        )));
    }
    if b.len() < a.len() {
        return Err(Error::Precondition(
            "op_t needs a strictly longer second context".into(),
        ));
    }
    op_t_extend(module, a, b)
}

/// Weaken a judgement over `(ft(a), delta)` by the last entry of `a`. An
/// empty `delta` is allowed and weakens the judgement on `ft(a)` itself.
pub fn op_ttilde(module: &dyn ModuleOps, a: &Context, j: &Section) -> Result<Section> {
    if a.is_empty() {
        return Err(Error::Precondition("op_ttilde needs a nonempty context".into()));
    }
    let n = a.len() - 1;
    if !j.ctx.starts_with(&a.ft()) {
        return Err(Error::ContextMismatch(format!(
            "op_ttilde: ({}) does not extend the father of ({})",
            j.ctx, a
        )));
    }
    let ctx = op_t_extend(module, a, &j.ctx)?;
    let ty = weaken_lmterm(module, &j.ty, n + 1)?;
    let tm = weaken_rterm(&*module.monad(), &j.tm, n + 1)?;
    Section::new(ctx, ty, tm)
}

/// Substitute the section `s` into `b = (ctx(s), ty(s), delta)`, collapsing
/// the slot its type occupies: the result is `(ctx(s), delta[tm(s)])`. An
/// empty `delta` gives back `ctx(s)`.
pub fn op_s(module: &dyn ModuleOps, s: &Section, b: &Context) -> Result<Context> {
    let n = s.ctx.len();
    if !b.starts_with(&s.boundary()) {
        return Err(Error::ContextMismatch(format!(
            "op_s: ({}) does not extend the boundary ({})",
            b,
            s.boundary()
        )));
    }
    let mut out = s.ctx.clone();
    for j in (n + 2)..=b.len() {
        let e = subst_collapse_lmterm(module, n, &s.tm, b.entry(j)?)?;
        out = out.extended(e)?;
    }
    Ok(out)
}

/// Substitute the section `s` into a judgement over `(ctx(s), ty(s), delta)`.
pub fn op_stilde(module: &dyn ModuleOps, s: &Section, j: &Section) -> Result<Section> {
    let n = s.ctx.len();
    if !j.ctx.starts_with(&s.boundary()) {
        return Err(Error::ContextMismatch(format!(
            "op_stilde: ({}) does not extend the boundary ({})",
            j.ctx,
            s.boundary()
        )));
    }
    let ctx = op_s(module, s, &j.ctx)?;
    let ty = subst_collapse_lmterm(module, n, &s.tm, &j.ty)?;
    let tm = subst_collapse_rterm(&*module.monad(), n, &s.tm, &j.tm)?;
    Section::new(ctx, ty, tm)
}

/// The diagonal: the last variable of `a`, typed by the weakening of the
/// last entry of `a`.
pub fn op_delta(module: &dyn ModuleOps, a: &Context) -> Result<Section> {
    if a.is_empty() {
        return Err(Error::Precondition("op_delta needs a nonempty context".into()));
    }
    let n1 = a.len();
    let ty = weaken_lmterm(module, a.last().expect("nonempty"), n1)?;
    let tm = module.monad().eta(n1, n1)?;
    Section::new(a.clone(), ty, tm)
}

fn splice_prefix(ctx: &Context, f: &Context) -> Result<Context> {
    let mut out = f.clone();
    for j in (f.len() + 1)..=ctx.len() {
        out = out.extended(ctx.entry(j)?.clone())?;
    }
    Ok(out)
}

/// Replace the length-`l(f)` prefix of `ctx` by `f`. Requires `f` strictly
/// shorter than `ctx`; entry payloads are kept as they are.
pub fn sigma(ctx: &Context, f: &Context) -> Result<Context> {
    if f.len() >= ctx.len() {
        return Err(Error::Precondition(format!(
            "sigma needs a strictly shorter replacement, got lengths {} and {}",
            ctx.len(),
            f.len()
        )));
    }
    splice_prefix(ctx, f)
}

/// Replace a prefix of the boundary of `j` by `f`. When `f` is as long as
/// the whole boundary the judgement is rebased onto `f` itself, with its
/// type taken from the last entry of `f`.
pub fn sigma_tilde(j: &Section, f: &Context) -> Result<Section> {
    let boundary_len = j.ctx.len() + 1;
    if f.len() > boundary_len {
        return Err(Error::Precondition(format!(
            "sigma_tilde: replacement of length {} exceeds the boundary length {}",
            f.len(),
            boundary_len
        )));
    }
    if f.len() == boundary_len {
        let ty = f.last().expect("boundary length is positive").clone();
        return Section::new(f.ft(), ty, j.tm.clone());
    }
    let ctx = splice_prefix(&j.ctx, f)?;
    Section::new(ctx, j.ty.clone(), j.tm.clone())
}
