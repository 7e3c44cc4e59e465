//! Equality judgement sets over a subsystem, the equivalence relations they
//! induce on contexts and typing judgements, and the quotient construction.
//!
//! A congruence is given extensionally: a set of type equalities
//! `Γ |- S = S'` and a set of term equalities `Γ |- o = o' : T`. The checker
//! verifies the closure conditions that make such a pair a congruence with
//! respect to the subsystem operations; the relations `~` (on contexts) and
//! `≃` (on judgements) are then computed by recursion on context length and
//! materialized as union-find partitions, from which the quotient takes its
//! classes and induced tables. Everything is certified only for instances
//! whose conclusion fits inside explicit bounds, as in the subsystem layer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::csystem::{
    op_delta, op_s, op_stilde, op_t, op_ttilde, validate_context, Context, Section,
};
use crate::error::{Error, Result};
use crate::monad::{
    subst_collapse_lmterm, subst_collapse_rterm, weaken_lmterm, weaken_rterm, ModuleOps,
};
use crate::subsystem::{check_subsystem, Bounds, JudgementDB};
use crate::value::{LMTerm, RTerm};

/// A type equality `ctx |- lhs = rhs`, both sides at the context's arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeEq {
    ctx: Context,
    lhs: LMTerm,
    rhs: LMTerm,
}

impl TypeEq {
    pub fn new(ctx: Context, lhs: LMTerm, rhs: LMTerm) -> Result<TypeEq> {
        for (what, arity) in [("type equality lhs", lhs.arity), ("type equality rhs", rhs.arity)] {
            if arity != ctx.len() {
                return Err(Error::ArityMismatch { what, expected: ctx.len(), found: arity });
            }
        }
        Ok(TypeEq { ctx, lhs, rhs })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn lhs(&self) -> &LMTerm {
        &self.lhs
    }

    pub fn rhs(&self) -> &LMTerm {
        &self.rhs
    }
}

impl fmt::Display for TypeEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {} = {}", self.ctx, self.lhs, self.rhs)
    }
}

/// A term equality `ctx |- lhs = rhs : ty`, all parts at the context's arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermEq {
    ctx: Context,
    ty: LMTerm,
    lhs: RTerm,
    rhs: RTerm,
}

impl TermEq {
    pub fn new(ctx: Context, ty: LMTerm, lhs: RTerm, rhs: RTerm) -> Result<TermEq> {
        if ty.arity != ctx.len() {
            return Err(Error::ArityMismatch {
                what: "term equality type",
                expected: ctx.len(),
                found: ty.arity,
            });
        }
        for (what, arity) in [("term equality lhs", lhs.arity), ("term equality rhs", rhs.arity)] {
            if arity != ctx.len() {
                return Err(Error::ArityMismatch { what, expected: ctx.len(), found: arity });
            }
        }
        Ok(TermEq { ctx, ty, lhs, rhs })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ty(&self) -> &LMTerm {
        &self.ty
    }

    pub fn lhs(&self) -> &RTerm {
        &self.lhs
    }

    pub fn rhs(&self) -> &RTerm {
        &self.rhs
    }
}

impl fmt::Display for TermEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {} = {} : {}", self.ctx, self.lhs, self.rhs, self.ty)
    }
}

/// The sets Ceq and C-tilde-eq.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EqDB {
    type_eqs: BTreeSet<TypeEq>,
    term_eqs: BTreeSet<TermEq>,
}

impl EqDB {
    pub fn new() -> EqDB {
        EqDB::default()
    }

    /// The identity congruence of a database: every stored context reflected
    /// as an equality of its last entry over its father, every judgement as
    /// an equality of its term with itself.
    pub fn diagonal(db: &JudgementDB) -> EqDB {
        let mut eq = EqDB::new();
        for c in db.contexts() {
            if let Some(last) = c.last() {
                eq.type_eqs.insert(TypeEq {
                    ctx: c.ft(),
                    lhs: last.clone(),
                    rhs: last.clone(),
                });
            }
        }
        for j in db.sections() {
            eq.term_eqs.insert(TermEq {
                ctx: j.ctx().clone(),
                ty: j.ty().clone(),
                lhs: j.tm().clone(),
                rhs: j.tm().clone(),
            });
        }
        eq
    }

    pub fn type_eqs(&self) -> &BTreeSet<TypeEq> {
        &self.type_eqs
    }

    pub fn term_eqs(&self) -> &BTreeSet<TermEq> {
        &self.term_eqs
    }

    pub fn insert_type_eq(&mut self, e: TypeEq) -> bool {
        self.type_eqs.insert(e)
    }

    pub fn insert_term_eq(&mut self, e: TermEq) -> bool {
        self.term_eqs.insert(e)
    }

    pub fn remove_type_eq(&mut self, e: &TypeEq) -> bool {
        self.type_eqs.remove(e)
    }

    pub fn remove_term_eq(&mut self, e: &TermEq) -> bool {
        self.term_eqs.remove(e)
    }

    pub fn contains_type_eq(&self, e: &TypeEq) -> bool {
        self.type_eqs.contains(e)
    }

    pub fn contains_term_eq(&self, e: &TermEq) -> bool {
        self.term_eqs.contains(e)
    }
}

fn type_eq_in_bounds(b: &Bounds, e: &TypeEq) -> bool {
    b.contains_context(&e.ctx) && e.lhs.size() <= b.max_size() && e.rhs.size() <= b.max_size()
}

/// A type equality concluded by the structural conditions is in scope only
/// when both contexts it extends fit the bounds; the equality morally lives
/// one step above its context, and requiring it without room for the
/// extension would demand entries no bounded closure can justify.
fn type_eq_concl_within(b: &Bounds, e: &TypeEq) -> bool {
    e.ctx.len() + 1 <= b.max_len() && type_eq_in_bounds(b, e)
}

fn term_eq_in_bounds(b: &Bounds, e: &TermEq) -> bool {
    b.contains_context(&e.ctx)
        && e.ty.size() <= b.max_size()
        && e.lhs.size() <= b.max_size()
        && e.rhs.size() <= b.max_size()
}

/// One congruence condition instance whose conclusion is missing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EqViolation {
    pub cond: &'static str,
    pub premises: String,
    pub conclusion: String,
}

impl fmt::Display for EqViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {}: {} => MISSING {}", self.cond, self.premises, self.conclusion)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqReport {
    pub bounds: Bounds,
    pub violations: Vec<EqViolation>,
}

impl EqReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for EqReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass() {
            write!(f, "pass ({})", self.bounds)
        } else {
            writeln!(f, "fail ({}): {} violations", self.bounds, self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

fn ensure_eq_within(db: &JudgementDB, eq: &EqDB, bounds: &Bounds) -> Result<()> {
    let md = &**db.module();
    let monad = db.module().monad();
    for e in &eq.type_eqs {
        validate_context(md, &e.ctx)?;
        md.validate(&e.lhs)?;
        md.validate(&e.rhs)?;
        if !type_eq_in_bounds(bounds, e) {
            return Err(Error::OutOfBounds(format!("type equality ({e}) exceeds {bounds}")));
        }
    }
    for e in &eq.term_eqs {
        validate_context(md, &e.ctx)?;
        md.validate(&e.ty)?;
        monad.validate(&e.lhs)?;
        monad.validate(&e.rhs)?;
        if !term_eq_in_bounds(bounds, e) {
            return Err(Error::OutOfBounds(format!("term equality ({e}) exceeds {bounds}")));
        }
    }
    Ok(())
}

/// Verify every congruence condition instance whose conclusion fits inside
/// the bounds. The context/judgement database must already be a certified
/// subsystem within the same bounds.
pub fn check_congruence(db: &JudgementDB, eq: &EqDB, bounds: &Bounds) -> Result<EqReport> {
    let sub_report = check_subsystem(db, bounds)?;
    if !sub_report.pass() {
        return Err(Error::Precondition(format!(
            "database is not a certified subsystem within {bounds}"
        )));
    }
    ensure_eq_within(db, eq, bounds)?;

    let md = &**db.module();
    let monad = db.module().monad();
    let mo = &*monad;
    let mut violations: Vec<EqViolation> = Vec::new();

    macro_rules! fail {
        ($cond:expr, $prem:expr, $concl:expr) => {
            violations.push(EqViolation {
                cond: $cond,
                premises: $prem,
                conclusion: $concl,
            })
        };
    }

    // (2a) An equated type is a stored context extension.
    for e in &eq.type_eqs {
        let concl = e.ctx.extended(e.lhs.clone())?;
        if bounds.contains_context(&concl) && !db.contains_context(&concl) {
            fail!("2a", format!("({e})"), format!("({concl})"));
        }
    }

    // (2b) Reflexivity at every stored context extension.
    for c in db.contexts() {
        if let Some(last) = c.last() {
            let concl = TypeEq { ctx: c.ft(), lhs: last.clone(), rhs: last.clone() };
            if !eq.type_eqs.contains(&concl) {
                fail!("2b", format!("({c})"), format!("({concl})"));
            }
        }
    }

    // (2c) Symmetry.
    for e in &eq.type_eqs {
        let concl = TypeEq { ctx: e.ctx.clone(), lhs: e.rhs.clone(), rhs: e.lhs.clone() };
        if !eq.type_eqs.contains(&concl) {
            fail!("2c", format!("({e})"), format!("({concl})"));
        }
    }

    // (2d) Transitivity.
    for e1 in &eq.type_eqs {
        for e2 in &eq.type_eqs {
            if e1.ctx != e2.ctx || e1.rhs != e2.lhs {
                continue;
            }
            let concl = TypeEq { ctx: e1.ctx.clone(), lhs: e1.lhs.clone(), rhs: e2.rhs.clone() };
            if !eq.type_eqs.contains(&concl) {
                fail!("2d", format!("({e1}) and ({e2})"), format!("({concl})"));
            }
        }
    }

    // (3a) An equated term is a stored judgement.
    for t in &eq.term_eqs {
        let concl = Section::new(t.ctx.clone(), t.ty.clone(), t.lhs.clone())?;
        if bounds.contains_section(&concl) && !db.contains_section(&concl) {
            fail!("3a", format!("({t})"), format!("({concl})"));
        }
    }

    // (3b) Reflexivity at every stored judgement.
    for j in db.sections() {
        let concl = TermEq {
            ctx: j.ctx().clone(),
            ty: j.ty().clone(),
            lhs: j.tm().clone(),
            rhs: j.tm().clone(),
        };
        if !eq.term_eqs.contains(&concl) {
            fail!("3b", format!("({j})"), format!("({concl})"));
        }
    }

    // (3c) Symmetry.
    for t in &eq.term_eqs {
        let concl =
            TermEq { ctx: t.ctx.clone(), ty: t.ty.clone(), lhs: t.rhs.clone(), rhs: t.lhs.clone() };
        if !eq.term_eqs.contains(&concl) {
            fail!("3c", format!("({t})"), format!("({concl})"));
        }
    }

    // (3d) Transitivity.
    for t1 in &eq.term_eqs {
        for t2 in &eq.term_eqs {
            if t1.ctx != t2.ctx || t1.ty != t2.ty || t1.rhs != t2.lhs {
                continue;
            }
            let concl = TermEq {
                ctx: t1.ctx.clone(),
                ty: t1.ty.clone(),
                lhs: t1.lhs.clone(),
                rhs: t2.rhs.clone(),
            };
            if !eq.term_eqs.contains(&concl) {
                fail!("3d", format!("({t1}) and ({t2})"), format!("({concl})"));
            }
        }
    }

    // (4a) Replace a context entry by an equal type, in a type equality.
    for e in &eq.type_eqs {
        let n = e.ctx.len();
        let pivot = e.ctx.extended(e.lhs.clone())?;
        for e2 in &eq.type_eqs {
            if !e2.ctx.starts_with(&pivot) {
                continue;
            }
            let mut entries = e2.ctx.entries().to_vec();
            entries[n] = e.rhs.clone();
            let cctx = Context::new(entries)?;
            let concl = TypeEq { ctx: cctx, lhs: e2.lhs.clone(), rhs: e2.rhs.clone() };
            if type_eq_concl_within(bounds, &concl) && !eq.type_eqs.contains(&concl) {
                fail!("4a", format!("({e}) and ({e2})"), format!("({concl})"));
            }
        }
    }

    // (4b) Replace a context entry by an equal type, in a term equality.
    for e in &eq.type_eqs {
        let n = e.ctx.len();
        let pivot = e.ctx.extended(e.lhs.clone())?;
        for t in &eq.term_eqs {
            if !t.ctx.starts_with(&pivot) {
                continue;
            }
            let mut entries = t.ctx.entries().to_vec();
            entries[n] = e.rhs.clone();
            let cctx = Context::new(entries)?;
            let concl =
                TermEq { ctx: cctx, ty: t.ty.clone(), lhs: t.lhs.clone(), rhs: t.rhs.clone() };
            if term_eq_in_bounds(bounds, &concl) && !eq.term_eqs.contains(&concl) {
                fail!("4b", format!("({e}) and ({t})"), format!("({concl})"));
            }
        }
    }

    // (4c) Replace the type of a term equality by an equal type.
    for e in &eq.type_eqs {
        for t in &eq.term_eqs {
            if t.ctx != e.ctx || t.ty != e.lhs {
                continue;
            }
            let concl =
                TermEq { ctx: t.ctx.clone(), ty: e.rhs.clone(), lhs: t.lhs.clone(), rhs: t.rhs.clone() };
            if term_eq_in_bounds(bounds, &concl) && !eq.term_eqs.contains(&concl) {
                fail!("4c", format!("({e}) and ({t})"), format!("({concl})"));
            }
        }
    }

    // (5a) Weaken a type equality by a stored context extension.
    for a in db.contexts() {
        if a.is_empty() {
            continue;
        }
        let i = a.len() - 1;
        let fa = a.ft();
        for e in &eq.type_eqs {
            if !e.ctx.starts_with(&fa) {
                continue;
            }
            if e.ctx.len() + 2 > bounds.max_len() {
                continue;
            }
            let cctx = if e.ctx.len() == i { a.clone() } else { op_t(md, a, &e.ctx)? };
            let concl = TypeEq {
                ctx: cctx,
                lhs: weaken_lmterm(md, &e.lhs, i + 1)?,
                rhs: weaken_lmterm(md, &e.rhs, i + 1)?,
            };
            if type_eq_concl_within(bounds, &concl) && !eq.type_eqs.contains(&concl) {
                fail!("5a", format!("({a}) and ({e})"), format!("({concl})"));
            }
        }
    }

    // (5b) Weaken a term equality by a stored context extension.
    for a in db.contexts() {
        if a.is_empty() {
            continue;
        }
        let i = a.len() - 1;
        let fa = a.ft();
        for t in &eq.term_eqs {
            if !t.ctx.starts_with(&fa) {
                continue;
            }
            if t.ctx.len() + 1 > bounds.max_len() {
                continue;
            }
            let cctx = if t.ctx.len() == i { a.clone() } else { op_t(md, a, &t.ctx)? };
            let concl = TermEq {
                ctx: cctx,
                ty: weaken_lmterm(md, &t.ty, i + 1)?,
                lhs: weaken_rterm(mo, &t.lhs, i + 1)?,
                rhs: weaken_rterm(mo, &t.rhs, i + 1)?,
            };
            if term_eq_in_bounds(bounds, &concl) && !eq.term_eqs.contains(&concl) {
                fail!("5b", format!("({a}) and ({t})"), format!("({concl})"));
            }
        }
    }

    // (6a) Substitute a stored judgement's term into a type equality.
    for k in db.sections() {
        let i = k.ctx().len();
        let bk = k.boundary();
        for e in &eq.type_eqs {
            if !e.ctx.starts_with(&bk) {
                continue;
            }
            let concl = TypeEq {
                ctx: op_s(md, k, &e.ctx)?,
                lhs: subst_collapse_lmterm(md, i, k.tm(), &e.lhs)?,
                rhs: subst_collapse_lmterm(md, i, k.tm(), &e.rhs)?,
            };
            if type_eq_concl_within(bounds, &concl) && !eq.type_eqs.contains(&concl) {
                fail!("6a", format!("({e}) and ({k})"), format!("({concl})"));
            }
        }
    }

    // (6b) Substitute a stored judgement's term into a term equality.
    for k in db.sections() {
        let i = k.ctx().len();
        let bk = k.boundary();
        for t in &eq.term_eqs {
            if !t.ctx.starts_with(&bk) {
                continue;
            }
            let concl = TermEq {
                ctx: op_s(md, k, &t.ctx)?,
                ty: subst_collapse_lmterm(md, i, k.tm(), &t.ty)?,
                lhs: subst_collapse_rterm(mo, i, k.tm(), &t.lhs)?,
                rhs: subst_collapse_rterm(mo, i, k.tm(), &t.rhs)?,
            };
            if term_eq_in_bounds(bounds, &concl) && !eq.term_eqs.contains(&concl) {
                fail!("6b", format!("({t}) and ({k})"), format!("({concl})"));
            }
        }
    }

    // (7a) Substitute equal terms into the last entry of a stored context.
    for t in &eq.term_eqs {
        let i = t.ctx.len();
        let pivot = t.ctx.extended(t.ty.clone())?;
        let k_lhs = Section::new(t.ctx.clone(), t.ty.clone(), t.lhs.clone())?;
        for b in db.contexts() {
            if b.len() < i + 2 || !b.starts_with(&pivot) {
                continue;
            }
            let s_last = b.last().expect("nonempty");
            let concl = TypeEq {
                ctx: op_s(md, &k_lhs, &b.ft())?,
                lhs: subst_collapse_lmterm(md, i, &t.lhs, s_last)?,
                rhs: subst_collapse_lmterm(md, i, &t.rhs, s_last)?,
            };
            if type_eq_concl_within(bounds, &concl) && !eq.type_eqs.contains(&concl) {
                fail!("7a", format!("({b}) and ({t})"), format!("({concl})"));
            }
        }
    }

    // (7b) Substitute equal terms into a stored judgement.
    for t in &eq.term_eqs {
        let i = t.ctx.len();
        let pivot = t.ctx.extended(t.ty.clone())?;
        let k_lhs = Section::new(t.ctx.clone(), t.ty.clone(), t.lhs.clone())?;
        for j in db.sections() {
            if !j.ctx().starts_with(&pivot) {
                continue;
            }
            let concl = TermEq {
                ctx: op_s(md, &k_lhs, j.ctx())?,
                ty: subst_collapse_lmterm(md, i, &t.lhs, j.ty())?,
                lhs: subst_collapse_rterm(mo, i, &t.lhs, j.tm())?,
                rhs: subst_collapse_rterm(mo, i, &t.rhs, j.tm())?,
            };
            if term_eq_in_bounds(bounds, &concl) && !eq.term_eqs.contains(&concl) {
                fail!("7b", format!("({j}) and ({t})"), format!("({concl})"));
            }
        }
    }

    violations.sort();
    violations.dedup();
    Ok(EqReport { bounds: *bounds, violations })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Union keeping the smaller index as root, so class roots are the
    /// canonical minima.
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub(crate) fn ctx_key(c: &Context) -> (usize, usize, String) {
    (c.len(), c.total_size(), c.to_string())
}

pub(crate) fn sec_key(s: &Section) -> (usize, usize, String) {
    (s.ctx().len(), s.total_size(), s.to_string())
}

/// A relation over canonically ordered stored elements, kept both as the
/// raw pairs of its defining recursion and as the partition those pairs
/// generate. The partition always contains the raw relation (union-find
/// adds reflexivity and closes symmetrically/transitively); the two agree
/// exactly when the raw relation is an equivalence.
#[derive(Debug, Clone)]
pub struct Rel<T> {
    elements: Vec<T>,
    index: BTreeMap<T, usize>,
    raw: BTreeSet<(usize, usize)>,
    class_ids: Vec<usize>,
    num_classes: usize,
}

impl<T: Ord + Clone + fmt::Display> Rel<T> {
    fn from_raw(elements: Vec<T>, raw: BTreeSet<(usize, usize)>) -> Rel<T> {
        let index = elements.iter().cloned().zip(0..).collect();
        let mut uf = UnionFind::new(elements.len());
        for &(a, b) in &raw {
            uf.union(a, b);
        }
        let mut root_to_class: BTreeMap<usize, usize> = BTreeMap::new();
        let mut class_ids = Vec::with_capacity(elements.len());
        for i in 0..elements.len() {
            let root = uf.find(i);
            let next = root_to_class.len();
            class_ids.push(*root_to_class.entry(root).or_insert(next));
        }
        let num_classes = root_to_class.len();
        Rel { elements, index, raw, class_ids, num_classes }
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn index_of(&self, x: &T) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Membership in the raw relation, exactly as defined by the recursion.
    pub fn raw_related(&self, a: &T, b: &T) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.raw.contains(&(i, j)),
            _ => false,
        }
    }

    /// The stored pairs as element pairs, in canonical order.
    pub fn raw_pairs(&self) -> Vec<(&T, &T)> {
        self.raw.iter().map(|&(a, b)| (&self.elements[a], &self.elements[b])).collect()
    }

    /// Same class in the generated partition.
    pub fn related(&self, a: &T, b: &T) -> bool {
        match (self.class_id(a), self.class_id(b)) {
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }

    pub fn class_id(&self, x: &T) -> Option<usize> {
        self.index_of(x).map(|i| self.class_ids[i])
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Classes in id order; members in canonical element order, so the
    /// first member of each class is its canonical representative.
    pub fn classes(&self) -> Vec<Vec<T>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, e) in self.elements.iter().enumerate() {
            out[self.class_ids[i]].push(e.clone());
        }
        out
    }

    /// Check that the raw relation is reflexive, symmetric, and transitive
    /// on the stored elements.
    pub fn verify_equivalence(&self) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            if !self.raw.contains(&(i, i)) {
                return Err(Error::Invalid(format!("relation is not reflexive at ({e})")));
            }
        }
        for &(a, b) in &self.raw {
            if !self.raw.contains(&(b, a)) {
                return Err(Error::Invalid(format!(
                    "relation is not symmetric at ({}) and ({})",
                    self.elements[a], self.elements[b]
                )));
            }
        }
        let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &self.raw {
            succ.entry(a).or_default().push(b);
        }
        for &(a, b) in &self.raw {
            if let Some(cs) = succ.get(&b) {
                for &c in cs {
                    if !self.raw.contains(&(a, c)) {
                        return Err(Error::Invalid(format!(
                            "relation is not transitive at ({}), ({}), ({})",
                            self.elements[a], self.elements[b], self.elements[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The relation `~` on stored contexts: contexts of equal length whose
/// fathers are related and whose last entries are equated over the father
/// of the first. Computed by recursion on length; the empty context is
/// related to itself outright.
pub fn build_sim(db: &JudgementDB, eq: &EqDB) -> Rel<Context> {
    let mut elements: Vec<Context> = db.contexts().iter().cloned().collect();
    elements.sort_by_cached_key(ctx_key);
    let index: BTreeMap<&Context, usize> =
        elements.iter().zip(0..).map(|(c, i)| (c, i)).collect();

    let max_len = elements.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut by_len: Vec<Vec<usize>> = vec![Vec::new(); max_len + 1];
    for (i, c) in elements.iter().enumerate() {
        by_len[c.len()].push(i);
    }

    let mut raw: BTreeSet<(usize, usize)> = BTreeSet::new();
    for level in &by_len {
        for &ia in level {
            for &ib in level {
                let a = &elements[ia];
                let b = &elements[ib];
                if a.is_empty() {
                    raw.insert((ia, ib));
                    continue;
                }
                let fa = a.ft();
                let fb = b.ft();
                let related_fathers = match (index.get(&fa), index.get(&fb)) {
                    (Some(&x), Some(&y)) => raw.contains(&(x, y)),
                    _ => false,
                };
                if !related_fathers {
                    continue;
                }
                let witness = TypeEq {
                    ctx: fa,
                    lhs: a.last().expect("nonempty").clone(),
                    rhs: b.last().expect("nonempty").clone(),
                };
                if eq.type_eqs.contains(&witness) {
                    raw.insert((ia, ib));
                }
            }
        }
    }
    Rel::from_raw(elements, raw)
}

/// Boundary comparison in unfolded form: the contexts are related and the
/// two types are equated over the left context. A boundary may lie one step
/// outside the bounds (judgements at maximal context length), where it is
/// not a stored context; the unfolding keeps the comparison defined there,
/// and a syntactically equal boundary counts as related outright, matching
/// the reflexivity it would inherit were it stored.
fn boundary_pair_related(
    sim: &Rel<Context>,
    eq: &EqDB,
    lctx: &Context,
    lty: &LMTerm,
    rctx: &Context,
    rty: &LMTerm,
) -> bool {
    if lctx == rctx && lty == rty {
        return true;
    }
    sim.raw_related(lctx, rctx)
        && eq.type_eqs.contains(&TypeEq { ctx: lctx.clone(), lhs: lty.clone(), rhs: rty.clone() })
}

/// The relation `≃` on stored judgements: boundaries related under `~` and
/// terms equated over the first judgement's context and type.
pub fn build_simeq(db: &JudgementDB, eq: &EqDB) -> Rel<Section> {
    let sim = build_sim(db, eq);
    let mut elements: Vec<Section> = db.sections().iter().cloned().collect();
    elements.sort_by_cached_key(sec_key);

    let mut raw: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (ia, a) in elements.iter().enumerate() {
        for (ib, b) in elements.iter().enumerate() {
            if a.ctx().len() != b.ctx().len() {
                continue;
            }
            if !boundary_pair_related(&sim, eq, a.ctx(), a.ty(), b.ctx(), b.ty()) {
                continue;
            }
            let witness = TermEq {
                ctx: a.ctx().clone(),
                ty: a.ty().clone(),
                lhs: a.tm().clone(),
                rhs: b.tm().clone(),
            };
            if eq.term_eqs.contains(&witness) {
                raw.insert((ia, ib));
            }
        }
    }
    Rel::from_raw(elements, raw)
}

/// Verify the replacement conditions tying the relations to the prefix
/// substitution: a context is related to itself with its father replaced by
/// a related context, and likewise a judgement rebased onto a related
/// boundary. These are at the same time the lifting conditions, since the
/// replaced element is the lift. Violations use condition ids `reg2` and
/// `reg3`.
pub fn check_regularity(db: &JudgementDB, eq: &EqDB, bounds: &Bounds) -> Result<EqReport> {
    ensure_eq_within(db, eq, bounds)?;
    let sim = build_sim(db, eq);
    let simeq = build_simeq(db, eq);
    let mut violations: Vec<EqViolation> = Vec::new();

    // reg2: ft(Γ) ~ F forces Γ ~ σ(Γ, F) with σ(Γ, F) stored.
    for g in db.contexts() {
        if g.is_empty() {
            continue;
        }
        let fg = g.ft();
        for f in db.contexts() {
            if !sim.raw_related(&fg, f) {
                continue;
            }
            let replaced = f.extended(g.last().expect("nonempty").clone())?;
            if !db.contains_context(&replaced) {
                violations.push(EqViolation {
                    cond: "reg2",
                    premises: format!("({g}) and ({f})"),
                    conclusion: format!("({replaced})"),
                });
            } else if !sim.raw_related(g, &replaced) {
                violations.push(EqViolation {
                    cond: "reg2",
                    premises: format!("({g}) and ({f})"),
                    conclusion: format!("({g}) ~ ({replaced})"),
                });
            }
        }
    }

    // reg3: boundary(J) ~ F forces J ≃ σ̃(J, F) with σ̃(J, F) stored.
    for j in db.sections() {
        for f in db.contexts() {
            let f_last = match f.last() {
                Some(last) if f.len() == j.ctx().len() + 1 => last,
                _ => continue,
            };
            if !boundary_pair_related(&sim, eq, j.ctx(), j.ty(), &f.ft(), f_last) {
                continue;
            }
            let rebased = Section::new(f.ft(), f_last.clone(), j.tm().clone())?;
            if !db.contains_section(&rebased) {
                violations.push(EqViolation {
                    cond: "reg3",
                    premises: format!("({j}) and ({f})"),
                    conclusion: format!("({rebased})"),
                });
            } else if !simeq.raw_related(j, &rebased) {
                violations.push(EqViolation {
                    cond: "reg3",
                    premises: format!("({j}) and ({f})"),
                    conclusion: format!("({j}) ~ ({rebased})"),
                });
            }
        }
    }

    violations.sort();
    violations.dedup();
    Ok(EqReport { bounds: *bounds, violations })
}

/// The reverse construction: read the equality sets off a pair of relations.
/// Type equalities come from related context pairs sharing a father, and
/// from related judgement pairs sharing a context (the boundary level, where
/// the extensions themselves may not be storable); term equalities from
/// related judgement pairs sharing context and type. Both relations must be
/// equivalences on the stored elements.
pub fn eqsets_from_relations(
    db: &JudgementDB,
    sim: &Rel<Context>,
    simeq: &Rel<Section>,
) -> Result<EqDB> {
    sim.verify_equivalence()?;
    simeq.verify_equivalence()?;
    let mut eq = EqDB::new();
    for a in db.contexts() {
        if a.is_empty() {
            continue;
        }
        for b in db.contexts() {
            if a.ft() != b.ft() || !sim.related(a, b) {
                continue;
            }
            eq.type_eqs.insert(TypeEq {
                ctx: a.ft(),
                lhs: a.last().expect("nonempty").clone(),
                rhs: b.last().expect("nonempty").clone(),
            });
        }
    }
    for a in db.sections() {
        for b in db.sections() {
            if a.ctx() != b.ctx() || !simeq.related(a, b) {
                continue;
            }
            eq.type_eqs.insert(TypeEq {
                ctx: a.ctx().clone(),
                lhs: a.ty().clone(),
                rhs: b.ty().clone(),
            });
            if a.ty() == b.ty() {
                eq.term_eqs.insert(TermEq {
                    ctx: a.ctx().clone(),
                    ty: a.ty().clone(),
                    lhs: a.tm().clone(),
                    rhs: b.tm().clone(),
                });
            }
        }
    }
    Ok(eq)
}

/// The quotient of a certified pair: equivalence classes with canonical
/// representatives, plus the father and boundary maps induced on classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    /// Context classes; members canonically ordered, first is the
    /// representative; classes ordered by representative.
    pub ctx_classes: Vec<Vec<Context>>,
    /// Judgement classes, same conventions.
    pub sec_classes: Vec<Vec<Section>>,
    /// Father map on context classes.
    pub ft_map: Vec<usize>,
    /// Boundary map on judgement classes; None when the boundary falls
    /// outside the bounds (and so is not a stored context).
    pub boundary_map: Vec<Option<usize>>,
}

fn ctx_class(sim: &Rel<Context>, c: &Context, role: &str) -> Result<usize> {
    sim.class_id(c).ok_or_else(|| {
        Error::Invalid(format!("quotient well-definedness: {role} ({c}) is not a stored context"))
    })
}

fn sec_class(simeq: &Rel<Section>, s: &Section, role: &str) -> Result<usize> {
    simeq.class_id(s).ok_or_else(|| {
        Error::Invalid(format!(
            "quotient well-definedness: {role} ({s}) is not a stored judgement"
        ))
    })
}

fn require_related_ctx(
    sim: &Rel<Context>,
    op: &str,
    left: &Context,
    right: &Context,
) -> Result<()> {
    if ctx_class(sim, left, "output")? != ctx_class(sim, right, "output")? {
        return Err(Error::Invalid(format!(
            "quotient well-definedness: {op} sent related inputs to unrelated outputs ({left}) and ({right})"
        )));
    }
    Ok(())
}

fn require_related_sec(
    simeq: &Rel<Section>,
    op: &str,
    left: &Section,
    right: &Section,
) -> Result<()> {
    if sec_class(simeq, left, "output")? != sec_class(simeq, right, "output")? {
        return Err(Error::Invalid(format!(
            "quotient well-definedness: {op} sent related inputs to unrelated outputs ({left}) and ({right})"
        )));
    }
    Ok(())
}

fn tsetc_sweeps(
    md: &dyn ModuleOps,
    bounds: &Bounds,
    sim: &Rel<Context>,
    simeq: &Rel<Section>,
) -> Result<()> {
    let ctx_classes = sim.classes();
    let sec_classes = simeq.classes();

    // Weakening at the context level.
    for ca in &ctx_classes {
        for a in ca {
            if a.is_empty() {
                continue;
            }
            let fa = a.ft();
            for a2 in ca {
                if a2.is_empty() {
                    continue;
                }
                let fa2 = a2.ft();
                for cb in &ctx_classes {
                    for b in cb {
                        if b.len() < a.len() || !b.starts_with(&fa) {
                            continue;
                        }
                        let out = op_t(md, a, b)?;
                        if !bounds.contains_context(&out) {
                            continue;
                        }
                        for b2 in cb {
                            if b2.len() < a2.len() || !b2.starts_with(&fa2) {
                                continue;
                            }
                            let out2 = op_t(md, a2, b2)?;
                            if !bounds.contains_context(&out2) {
                                continue;
                            }
                            require_related_ctx(sim, "context weakening", &out, &out2)?;
                        }
                    }
                }
            }
        }
    }

    // Weakening of judgements.
    for ca in &ctx_classes {
        for a in ca {
            if a.is_empty() {
                continue;
            }
            let fa = a.ft();
            for a2 in ca {
                if a2.is_empty() {
                    continue;
                }
                let fa2 = a2.ft();
                for cj in &sec_classes {
                    for j in cj {
                        if !j.ctx().starts_with(&fa) {
                            continue;
                        }
                        let out = op_ttilde(md, a, j)?;
                        if !bounds.contains_section(&out) {
                            continue;
                        }
                        for j2 in cj {
                            if !j2.ctx().starts_with(&fa2) {
                                continue;
                            }
                            let out2 = op_ttilde(md, a2, j2)?;
                            if !bounds.contains_section(&out2) {
                                continue;
                            }
                            require_related_sec(simeq, "judgement weakening", &out, &out2)?;
                        }
                    }
                }
            }
        }
    }

    // Substitution at the context level.
    for ck in &sec_classes {
        for k in ck {
            let bk = k.boundary();
            for k2 in ck {
                let bk2 = k2.boundary();
                for cb in &ctx_classes {
                    for b in cb {
                        if !b.starts_with(&bk) {
                            continue;
                        }
                        let out = op_s(md, k, b)?;
                        if !bounds.contains_context(&out) {
                            continue;
                        }
                        for b2 in cb {
                            if !b2.starts_with(&bk2) {
                                continue;
                            }
                            let out2 = op_s(md, k2, b2)?;
                            if !bounds.contains_context(&out2) {
                                continue;
                            }
                            require_related_ctx(sim, "context substitution", &out, &out2)?;
                        }
                    }
                }
            }
        }
    }

    // Substitution into judgements.
    for ck in &sec_classes {
        for k in ck {
            let bk = k.boundary();
            for k2 in ck {
                let bk2 = k2.boundary();
                for cj in &sec_classes {
                    for j in cj {
                        if !j.ctx().starts_with(&bk) {
                            continue;
                        }
                        let out = op_stilde(md, k, j)?;
                        if !bounds.contains_section(&out) {
                            continue;
                        }
                        for j2 in cj {
                            if !j2.ctx().starts_with(&bk2) {
                                continue;
                            }
                            let out2 = op_stilde(md, k2, j2)?;
                            if !bounds.contains_section(&out2) {
                                continue;
                            }
                            require_related_sec(simeq, "judgement substitution", &out, &out2)?;
                        }
                    }
                }
            }
        }
    }

    // The diagonal.
    for ca in &ctx_classes {
        for a in ca {
            if a.is_empty() {
                continue;
            }
            let out = op_delta(md, a)?;
            if !bounds.contains_section(&out) {
                continue;
            }
            for a2 in ca {
                if a2.is_empty() {
                    continue;
                }
                let out2 = op_delta(md, a2)?;
                if !bounds.contains_section(&out2) {
                    continue;
                }
                require_related_sec(simeq, "diagonal", &out, &out2)?;
            }
        }
    }

    Ok(())
}

/// Quotient a certified pair by its congruence. Preconditions: the
/// congruence and regularity checks pass within the bounds. Operation
/// well-definedness is verified exhaustively on in-bounds instances; a
/// failure there means the inputs did not actually satisfy the conditions
/// and is reported as an internal consistency error.
pub fn quotient(db: &JudgementDB, eq: &EqDB, bounds: &Bounds) -> Result<Quotient> {
    let congruence = check_congruence(db, eq, bounds)?;
    if !congruence.pass() {
        return Err(Error::Precondition(format!(
            "congruence conditions fail within {bounds}: {} violations",
            congruence.violations.len()
        )));
    }
    let regularity = check_regularity(db, eq, bounds)?;
    if !regularity.pass() {
        return Err(Error::Precondition(format!(
            "regularity conditions fail within {bounds}: {} violations",
            regularity.violations.len()
        )));
    }

    let sim = build_sim(db, eq);
    let simeq = build_simeq(db, eq);
    sim.verify_equivalence()?;
    simeq.verify_equivalence()?;

    let md = &**db.module();
    tsetc_sweeps(md, bounds, &sim, &simeq)?;

    let ctx_classes = sim.classes();
    let sec_classes = simeq.classes();

    let mut ft_map = Vec::with_capacity(ctx_classes.len());
    for class in &ctx_classes {
        let target = ctx_class(&sim, &class[0].ft(), "father")?;
        for member in &class[1..] {
            if ctx_class(&sim, &member.ft(), "father")? != target {
                return Err(Error::Invalid(format!(
                    "quotient well-definedness: father map splits the class of ({})",
                    class[0]
                )));
            }
        }
        ft_map.push(target);
    }

    let mut boundary_map = Vec::with_capacity(sec_classes.len());
    for class in &sec_classes {
        let target = sim.class_id(&class[0].boundary());
        for member in &class[1..] {
            if sim.class_id(&member.boundary()) != target {
                return Err(Error::Invalid(format!(
                    "quotient well-definedness: boundary map splits the class of ({})",
                    class[0]
                )));
            }
        }
        boundary_map.push(target);
    }

    Ok(Quotient { ctx_classes, sec_classes, ft_map, boundary_map })
}
