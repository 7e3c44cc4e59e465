//! Finite judgement databases and the closure conditions that make a pair
//! of sets (C, C-tilde) a subsystem of the C-system.
//!
//! A finite set can never satisfy the weakening, substitution, and diagonal
//! conditions outright, since they keep producing longer contexts. Both the
//! checker and the closure engine therefore quantify only over rule
//! instances whose conclusion fits inside explicit bounds; a pass certifies
//! closure within those bounds and nothing more. The closure engine flags
//! when a rule instance stepped outside the bounds, so callers can tell an
//! exact fixpoint from a truncated one.

use std::collections::BTreeSet;
use std::fmt;

use crate::csystem::{
    op_delta, op_s, op_stilde, op_t, op_ttilde, validate_context, validate_section, Context,
    Morph, Section,
};
use crate::error::{Error, Result};
use crate::monad::{Assignment, ModuleSpec};
use crate::value::{LMTerm, RTerm, Value};

/// Size limits for bounded certification: context length and per-term size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    max_len: usize,
    max_size: usize,
}

impl Bounds {
    pub fn new(max_len: usize, max_size: usize) -> Result<Bounds> {
        if max_len == 0 || max_size == 0 {
            return Err(Error::Invalid(format!(
                "bounds must be at least 1, got max_len={max_len}, max_size={max_size}"
            )));
        }
        Ok(Bounds { max_len, max_size })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn contains_context(&self, c: &Context) -> bool {
        c.len() <= self.max_len && c.entries().iter().all(|e| e.size() <= self.max_size)
    }

    pub fn contains_section(&self, s: &Section) -> bool {
        self.contains_context(s.ctx())
            && s.ty().size() <= self.max_size
            && s.tm().size() <= self.max_size
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "max_len={}, max_size={}", self.max_len, self.max_size)
    }
}

/// The sets C (contexts) and C-tilde (typing judgements) over one module.
/// Insertion validates payloads, so stored values are always well-formed.
#[derive(Debug, Clone)]
pub struct JudgementDB {
    module: ModuleSpec,
    contexts: BTreeSet<Context>,
    sections: BTreeSet<Section>,
}

impl PartialEq for JudgementDB {
    fn eq(&self, other: &JudgementDB) -> bool {
        self.module.key() == other.module.key()
            && self.contexts == other.contexts
            && self.sections == other.sections
    }
}

impl Eq for JudgementDB {}

impl JudgementDB {
    pub fn new(module: ModuleSpec) -> JudgementDB {
        JudgementDB { module, contexts: BTreeSet::new(), sections: BTreeSet::new() }
    }

    pub fn module(&self) -> &ModuleSpec {
        &self.module
    }

    pub fn contexts(&self) -> &BTreeSet<Context> {
        &self.contexts
    }

    pub fn sections(&self) -> &BTreeSet<Section> {
        &self.sections
    }

    pub fn contains_context(&self, c: &Context) -> bool {
        self.contexts.contains(c)
    }

    pub fn contains_section(&self, s: &Section) -> bool {
        self.sections.contains(s)
    }

    pub fn insert_context(&mut self, c: Context) -> Result<bool> {
        validate_context(&*self.module, &c)?;
        Ok(self.contexts.insert(c))
    }

    pub fn insert_section(&mut self, s: Section) -> Result<bool> {
        validate_section(&*self.module, &s)?;
        Ok(self.sections.insert(s))
    }

    pub fn remove_context(&mut self, c: &Context) -> bool {
        self.contexts.remove(c)
    }

    pub fn remove_section(&mut self, s: &Section) -> bool {
        self.sections.remove(s)
    }

    /// Every context and judgement that fits inside the bounds. Intensional
    /// families (such as "all judgements over a signature") are handled by
    /// materializing them this way and filtering.
    pub fn full(module: ModuleSpec, bounds: &Bounds) -> Result<JudgementDB> {
        let monad = module.monad();
        let mut contexts = vec![Context::empty()];
        let mut frontier = contexts.clone();
        for len in 0..bounds.max_len() {
            let entries = module.enumerate(len, bounds.max_size())?;
            let mut next = Vec::new();
            for c in &frontier {
                for e in &entries {
                    next.push(c.extended(e.clone())?);
                }
            }
            contexts.extend(next.iter().cloned());
            frontier = next;
        }
        let mut db = JudgementDB::new(module.clone());
        let mut sections = BTreeSet::new();
        for c in &contexts {
            let tys = module.enumerate(c.len(), bounds.max_size())?;
            let tms = monad.enumerate(c.len(), bounds.max_size())?;
            for ty in &tys {
                for tm in &tms {
                    sections.insert(Section::new(c.clone(), ty.clone(), tm.clone())?);
                }
            }
        }
        db.contexts = contexts.into_iter().collect();
        db.sections = sections;
        Ok(db)
    }

    /// Materialize the membership predicates over everything within bounds.
    pub fn from_predicates<FC, FS>(
        module: ModuleSpec,
        bounds: &Bounds,
        keep_context: FC,
        keep_section: FS,
    ) -> Result<JudgementDB>
    where
        FC: Fn(&Context) -> bool,
        FS: Fn(&Section) -> bool,
    {
        let mut db = JudgementDB::full(module, bounds)?;
        db.contexts.retain(|c| keep_context(c));
        db.sections.retain(|s| keep_section(s));
        Ok(db)
    }
}

/// The closure conditions, in report order. Rules 4a and 5a are the
/// context-level consequences of 4 and 5; with bounded conclusions they do
/// not follow from the bounded forms of the others, so they are checked and
/// closed under directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R4a,
    R5,
    R5a,
    R6,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleId::R1 => "1",
            RuleId::R2 => "2",
            RuleId::R3 => "3",
            RuleId::R4 => "4",
            RuleId::R4a => "4a",
            RuleId::R5 => "5",
            RuleId::R5a => "5a",
            RuleId::R6 => "6",
        };
        f.write_str(s)
    }
}

/// One rule instance whose conclusion is missing from the database.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub rule: RuleId,
    pub premises: String,
    pub conclusion: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {}: {} => MISSING {}", self.rule, self.premises, self.conclusion)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub bounds: Bounds,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CheckReport {
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

/// Premises of a rule instance, borrowed from the database; rendered only
/// when a violation is actually reported.
enum Premises<'a> {
    None,
    Ctx(&'a Context),
    Sec(&'a Section),
    CtxCtx(&'a Context, &'a Context),
    CtxSec(&'a Context, &'a Section),
    SecCtx(&'a Section, &'a Context),
    SecSec(&'a Section, &'a Section),
}

impl Premises<'_> {
    fn render(&self) -> String {
        match self {
            Premises::None => "<none>".into(),
            Premises::Ctx(a) => format!("({a})"),
            Premises::Sec(a) => format!("({a})"),
            Premises::CtxCtx(a, b) => format!("({a}) and ({b})"),
            Premises::CtxSec(a, b) => format!("({a}) and ({b})"),
            Premises::SecCtx(a, b) => format!("({a}) and ({b})"),
            Premises::SecSec(a, b) => format!("({a}) and ({b})"),
        }
    }
}

enum Conclusion {
    Ctx(Context),
    Sec(Section),
}

impl Conclusion {
    fn render(&self) -> String {
        match self {
            Conclusion::Ctx(c) => format!("({c})"),
            Conclusion::Sec(s) => format!("({s})"),
        }
    }
}

/// Enumerate every rule instance over the stored sets, invoking the visitor
/// on each in-bounds conclusion; out-of-bounds conclusions only set the
/// returned overflow flag. The visitor returns false to stop early, in
/// which case the flag covers only the instances seen so far.
fn sweep<F>(db: &JudgementDB, bounds: &Bounds, mut visit: F) -> Result<bool>
where
    F: FnMut(RuleId, &Premises<'_>, Conclusion) -> bool,
{
    let module = db.module.clone();
    let md = &*module;
    let mut overflowed = false;

    macro_rules! emit {
        ($rule:expr, $prem:expr, $concl:expr) => {
            let concl = $concl;
            let fits = match &concl {
                Conclusion::Ctx(c) => bounds.contains_context(c),
                Conclusion::Sec(s) => bounds.contains_section(s),
            };
            if fits {
                if !visit($rule, &$prem, concl) {
                    return Ok(overflowed);
                }
            } else {
                overflowed = true;
            }
        };
    }

    // (1) The empty context belongs to every subsystem.
    emit!(RuleId::R1, Premises::None, Conclusion::Ctx(Context::empty()));

    for a in &db.contexts {
        if a.is_empty() {
            continue;
        }
        let fa = a.ft();

        // (2) Fathers of stored contexts.
        emit!(RuleId::R2, Premises::Ctx(a), Conclusion::Ctx(fa.clone()));

        // (6) The diagonal judgement of each nonempty context.
        emit!(RuleId::R6, Premises::Ctx(a), Conclusion::Sec(op_delta(md, a)?));

        // (4) Weakening of judgements over the father, any tail length.
        for j in &db.sections {
            if !j.ctx().starts_with(&fa) {
                continue;
            }
            if j.ctx().len() + 1 > bounds.max_len {
                overflowed = true;
                continue;
            }
            emit!(
                RuleId::R4,
                Premises::CtxSec(a, j),
                Conclusion::Sec(op_ttilde(md, a, j)?)
            );
        }

        // (4a) Weakening at the context level; the empty tail is skipped
        // since its conclusion is the first premise itself.
        for b in &db.contexts {
            if b.len() < a.len() || !b.starts_with(&fa) {
                continue;
            }
            if b.len() + 1 > bounds.max_len {
                overflowed = true;
                continue;
            }
            emit!(
                RuleId::R4a,
                Premises::CtxCtx(a, b),
                Conclusion::Ctx(op_t(md, a, b)?)
            );
        }
    }

    for j in &db.sections {
        // (3) Boundaries of stored judgements.
        if j.ctx().len() + 1 > bounds.max_len {
            overflowed = true;
        } else {
            emit!(RuleId::R3, Premises::Sec(j), Conclusion::Ctx(j.boundary()));
        }
    }

    for k in &db.sections {
        let bk = k.boundary();

        // (5) Substitution of a judgement into judgements over its boundary.
        for j in &db.sections {
            if !j.ctx().starts_with(&bk) {
                continue;
            }
            emit!(
                RuleId::R5,
                Premises::SecSec(k, j),
                Conclusion::Sec(op_stilde(md, k, j)?)
            );
        }

        // (5a) Substitution at the context level, any tail length.
        for b in &db.contexts {
            if !b.starts_with(&bk) {
                continue;
            }
            emit!(
                RuleId::R5a,
                Premises::SecCtx(k, b),
                Conclusion::Ctx(op_s(md, k, b)?)
            );
        }
    }

    Ok(overflowed)
}

fn ensure_within_bounds(db: &JudgementDB, bounds: &Bounds) -> Result<()> {
    for c in &db.contexts {
        if !bounds.contains_context(c) {
            return Err(Error::OutOfBounds(format!("stored context ({c}) exceeds {bounds}")));
        }
    }
    for s in &db.sections {
        if !bounds.contains_section(s) {
            return Err(Error::OutOfBounds(format!("stored judgement ({s}) exceeds {bounds}")));
        }
    }
    Ok(())
}

/// Verify all closure conditions whose conclusion fits inside the bounds,
/// reporting every missing conclusion in deterministic order.
pub fn check_subsystem(db: &JudgementDB, bounds: &Bounds) -> Result<CheckReport> {
    ensure_within_bounds(db, bounds)?;
    let mut violations = Vec::new();
    sweep(db, bounds, |rule, prem, concl| {
        let present = match &concl {
            Conclusion::Ctx(c) => db.contexts.contains(c),
            Conclusion::Sec(s) => db.sections.contains(s),
        };
        if !present {
            violations.push(Violation {
                rule,
                premises: prem.render(),
                conclusion: concl.render(),
            });
        }
        true
    })?;
    violations.sort();
    violations.dedup();
    Ok(CheckReport { bounds: *bounds, violations })
}

/// Like `check_subsystem` but stops at the first violation.
pub fn has_any_violation(db: &JudgementDB, bounds: &Bounds) -> Result<bool> {
    ensure_within_bounds(db, bounds)?;
    let mut found = false;
    sweep(db, bounds, |_, _, concl| {
        let present = match &concl {
            Conclusion::Ctx(c) => db.contexts.contains(c),
            Conclusion::Sec(s) => db.sections.contains(s),
        };
        if !present {
            found = true;
        }
        !found
    })?;
    Ok(found)
}

/// Least sets containing the generators and the empty context, closed under
/// the rules restricted to in-bounds conclusions. The flag is true when the
/// result is an exact fixpoint: no rule instance ever stepped outside the
/// bounds, so the output is closed outright, not merely within them.
pub fn close(
    module: &ModuleSpec,
    generator_contexts: &[Context],
    generator_sections: &[Section],
    bounds: &Bounds,
) -> Result<(JudgementDB, bool)> {
    let mut db = JudgementDB::new(module.clone());
    for c in generator_contexts {
        if !bounds.contains_context(c) {
            return Err(Error::OutOfBounds(format!("generator context ({c}) exceeds {bounds}")));
        }
        db.insert_context(c.clone())?;
    }
    for s in generator_sections {
        if !bounds.contains_section(s) {
            return Err(Error::OutOfBounds(format!("generator judgement ({s}) exceeds {bounds}")));
        }
        db.insert_section(s.clone())?;
    }
    db.contexts.insert(Context::empty());

    loop {
        let mut new_contexts = Vec::new();
        let mut new_sections = Vec::new();
        let overflowed = sweep(&db, bounds, |_, _, concl| {
            match concl {
                Conclusion::Ctx(c) => {
                    if !db.contexts.contains(&c) {
                        new_contexts.push(c);
                    }
                }
                Conclusion::Sec(s) => {
                    if !db.sections.contains(&s) {
                        new_sections.push(s);
                    }
                }
            }
            true
        })?;
        if new_contexts.is_empty() && new_sections.is_empty() {
            // The stable pass saw every instance; its overflow flag tells
            // whether the true closure escapes the bounds.
            return Ok((db, !overflowed));
        }
        db.contexts.extend(new_contexts);
        db.sections.extend(new_sections);
    }
}

/// Membership of a morphism in the subcategory spanned by the database:
/// both endpoints stored, and every component typed, in order, by the
/// corresponding codomain entry pushed forward along the earlier components.
pub fn hom_membership(db: &JudgementDB, f: &Morph) -> Result<bool> {
    if !db.contexts.contains(f.dom()) {
        return Err(Error::Precondition(format!(
            "morphism domain ({}) is not a stored context",
            f.dom()
        )));
    }
    if !db.contexts.contains(f.cod()) {
        return Err(Error::Precondition(format!(
            "morphism codomain ({}) is not a stored context",
            f.cod()
        )));
    }
    let module = db.module.clone();
    let m = f.dom().len();
    for i in 1..=f.cod().len() {
        let partial = Assignment::new(i - 1, m, f.comps()[..i - 1].to_vec());
        let ty = module.rho(&partial, f.cod().entry(i)?)?;
        let judgement = Section::new(f.dom().clone(), ty, f.comp(i)?.clone())?;
        if !db.sections.contains(&judgement) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Generators of the epsilon family over the option monad: the variable
/// chain contexts, plus one star-typed judgement for every set bit.
pub fn epsilon_db(bits: &[bool]) -> (Vec<Context>, Vec<Section>) {
    fn chain(len: usize) -> Context {
        let mut entries = vec![LMTerm::new(0, Value::Star)];
        for j in 1..len {
            entries.push(LMTerm::new(j, Value::Var(j)));
        }
        Context::new(entries).expect("chain entries sit on the arity ladder")
    }
    let contexts = (0..=bits.len()).map(|n| chain(n + 1)).collect();
    let sections = bits
        .iter()
        .enumerate()
        .filter(|(_, set)| **set)
        .map(|(n, _)| {
            Section::new(
                chain(n + 2),
                LMTerm::new(n + 2, Value::Star),
                RTerm::new(n + 2, Value::Var(n + 2)),
            )
            .expect("chain judgement arities line up")
        })
        .collect();
    (contexts, sections)
}
