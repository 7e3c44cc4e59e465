//! The term monad of a nominal signature and its sort modules.
//!
//! For a signature with term sort T, the monad assigns to arity n the set of
//! alpha-normal terms of sort T whose context variables lie in {1..n};
//! `eta(i)` is the bare variable leaf `#i` and `bind` grafts assignment
//! components onto those leaves. Grafting needs no index shifting: bound
//! occurrences are de Bruijn indices relative to binders inside their own
//! subterm, and well-formed components carry no dangling index, so capture
//! cannot happen. The bind tests compare this against a named-substitution
//! oracle.
//!
//! Each data sort likewise carries a left module of terms of that sort with
//! the same grafting action; `sig_module` bundles the signature's type sorts
//! into one tagged union.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::builtin::module_tagged_union;
use crate::error::{Error, Result};
use crate::monad::{
    canonical_sort_lmterms, canonical_sort_rterms, Assignment, ModuleOps, ModuleSpec, MonadOps,
    MonadSpec,
};
use crate::parse::parse_data_term;
use crate::syntax::{CompoundSort, NTerm, Signature};
use crate::value::{LMTerm, RTerm, Value};

/// The term monad of a signature.
pub fn sig_monad(sig: Signature) -> Result<MonadSpec> {
    let core = SigCore::new(sig)?;
    Ok(Arc::new(SigMonad { core: Arc::new(core) }))
}

/// The module of terms of one data sort over the signature's term monad.
pub fn sort_module(sig: Signature, sort: &str) -> Result<ModuleSpec> {
    let core = Arc::new(SigCore::new(sig)?);
    if !core.sig.has_sort(sort) {
        return Err(Error::UnknownSort(sort.to_string()));
    }
    Ok(Arc::new(SortModule {
        monad: Arc::new(SigMonad { core: Arc::clone(&core) }),
        core,
        sort: sort.to_string(),
    }))
}

/// The tagged union of the signature's type-sort modules, in declaration
/// order. This is the module of "types over a context" for the signature.
pub fn sig_module(sig: Signature) -> Result<ModuleSpec> {
    let core = Arc::new(SigCore::new(sig)?);
    let monad: Arc<SigMonad> = Arc::new(SigMonad { core: Arc::clone(&core) });
    let mut members: Vec<(String, ModuleSpec)> = Vec::new();
    for sort in core.sig.type_sorts.clone() {
        let member: ModuleSpec = Arc::new(SortModule {
            monad: Arc::clone(&monad),
            core: Arc::clone(&core),
            sort,
        });
        members.push((member_tag(&member), member));
    }
    module_tagged_union(members)
}

fn member_tag(member: &ModuleSpec) -> String {
    // Tags are the sort names; SortModule::name returns exactly that.
    member.name()
}

/// Shared signature data plus the minimum-size tables used by the sampler.
/// Tables are indexed by [has_vars][under_binder]; `None` marks an empty
/// set of terms under those conditions.
#[derive(Debug)]
struct SigCore {
    sig: Arc<Signature>,
    source: String,
    min_data: [[BTreeMap<String, Option<usize>>; 2]; 2],
}

impl SigCore {
    fn new(sig: Signature) -> Result<SigCore> {
        sig.validate()?;
        let source = sig.to_source();
        let sig = Arc::new(sig);
        let mut min_data: [[BTreeMap<String, Option<usize>>; 2]; 2] = Default::default();
        for (vars, table_by_depth) in min_data.iter_mut().enumerate() {
            for (depth, table) in table_by_depth.iter_mut().enumerate() {
                *table = min_size_fixpoint(&sig, vars == 1, depth == 1);
            }
        }
        Ok(SigCore { sig, source, min_data })
    }

    fn min_sort(&self, sort: &CompoundSort, has_vars: bool, under_binder: bool) -> Option<usize> {
        min_compound(
            sort,
            &self.min_data[has_vars as usize][under_binder as usize],
            &self.min_data[has_vars as usize][1],
            under_binder,
        )
    }

    /// All terms of `sort` with size at most `budget`, free variables in
    /// {1..arity} and bound indices below `depth`.
    fn enum_sort(&self, sort: &CompoundSort, arity: usize, depth: usize, budget: usize) -> Vec<NTerm> {
        let mut out = Vec::new();
        if budget == 0 {
            return out;
        }
        match sort {
            CompoundSort::Unit => out.push(NTerm::Unit),
            CompoundSort::Var => out.extend((0..depth).map(NTerm::Bound)),
            CompoundSort::Abs(inner) => {
                for body in self.enum_sort(inner, arity, depth + 1, budget - 1) {
                    out.push(NTerm::abs(body));
                }
            }
            CompoundSort::Pair(a, b) => {
                if budget >= 3 {
                    for ta in self.enum_sort(a, arity, depth, budget - 2) {
                        let rest = budget - 1 - ta.size();
                        for tb in self.enum_sort(b, arity, depth, rest) {
                            out.push(NTerm::pair(ta.clone(), tb));
                        }
                    }
                }
            }
            CompoundSort::Data(d) => {
                if *d == self.sig.term_sort {
                    out.extend((1..=arity).map(NTerm::FreeVar));
                }
                if let Some(params) = self.sig.params.get(d) {
                    out.extend(params.iter().map(|p| NTerm::Param(p.clone(), d.clone())));
                }
                for op in self.sig.ops.iter().filter(|o| o.result == *d) {
                    for arg in self.enum_sort(&op.arg, arity, depth, budget - 1) {
                        out.push(NTerm::Op(op.name.clone(), Box::new(arg)));
                    }
                }
            }
        }
        out
    }

    fn sample_sort(
        &self,
        rng: &mut dyn RngCore,
        sort: &CompoundSort,
        arity: usize,
        depth: usize,
        budget: usize,
    ) -> Option<NTerm> {
        let has_vars = arity > 0;
        if self.min_sort(sort, has_vars, depth > 0)? > budget {
            return None;
        }
        match sort {
            CompoundSort::Unit => Some(NTerm::Unit),
            CompoundSort::Var => Some(NTerm::Bound(rng.gen_range(0..depth))),
            CompoundSort::Abs(inner) => {
                let body = self.sample_sort(rng, inner, arity, depth + 1, budget - 1)?;
                Some(NTerm::abs(body))
            }
            CompoundSort::Pair(a, b) => {
                let min_a = self.min_sort(a, has_vars, depth > 0)?;
                let min_b = self.min_sort(b, has_vars, depth > 0)?;
                // Give the left side a random share of the slack, then hand
                // whatever it leaves over to the right side.
                let budget_a = rng.gen_range(min_a..=budget - 1 - min_b);
                let ta = self.sample_sort(rng, a, arity, depth, budget_a)?;
                let tb = self.sample_sort(rng, b, arity, depth, budget - 1 - ta.size())?;
                Some(NTerm::pair(ta, tb))
            }
            CompoundSort::Data(d) => {
                // Collect the productions that fit the budget: variable
                // leaves, parameter leaves, and operations by name.
                enum Prod<'a> {
                    Leaf(NTerm),
                    Apply(&'a str, &'a CompoundSort),
                }
                let mut prods: Vec<Prod> = Vec::new();
                if *d == self.sig.term_sort && has_vars {
                    let i = rng.gen_range(1..=arity);
                    prods.push(Prod::Leaf(NTerm::FreeVar(i)));
                }
                if let Some(params) = self.sig.params.get(d) {
                    let p = &params[rng.gen_range(0..params.len())];
                    prods.push(Prod::Leaf(NTerm::Param(p.clone(), d.clone())));
                }
                for op in self.sig.ops.iter().filter(|o| o.result == *d) {
                    if let Some(m) = self.min_sort(&op.arg, has_vars, depth > 0) {
                        if 1 + m <= budget {
                            prods.push(Prod::Apply(&op.name, &op.arg));
                        }
                    }
                }
                if prods.is_empty() {
                    return None;
                }
                match &prods[rng.gen_range(0..prods.len())] {
                    Prod::Leaf(t) => Some(t.clone()),
                    Prod::Apply(name, arg_sort) => {
                        let arg = self.sample_sort(rng, arg_sort, arity, depth, budget - 1)?;
                        Some(NTerm::op(name, arg))
                    }
                }
            }
        }
    }
}

fn min_compound(
    sort: &CompoundSort,
    data_here: &BTreeMap<String, Option<usize>>,
    data_under: &BTreeMap<String, Option<usize>>,
    under_binder: bool,
) -> Option<usize> {
    match sort {
        CompoundSort::Unit => Some(1),
        CompoundSort::Var => {
            if under_binder {
                Some(1)
            } else {
                None
            }
        }
        CompoundSort::Data(d) => *data_here.get(d).unwrap_or(&None),
        CompoundSort::Pair(a, b) => {
            let ma = min_compound(a, data_here, data_under, under_binder)?;
            let mb = min_compound(b, data_here, data_under, under_binder)?;
            Some(1 + ma + mb)
        }
        CompoundSort::Abs(inner) => {
            // Inside the abstraction everything is under a binder.
            Some(1 + min_compound(inner, data_under, data_under, true)?)
        }
    }
}

fn min_size_fixpoint(
    sig: &Signature,
    has_vars: bool,
    under_binder: bool,
) -> BTreeMap<String, Option<usize>> {
    let mut here: BTreeMap<String, Option<usize>> =
        sig.sorts.iter().map(|s| (s.clone(), None)).collect();
    // The under-binder table must be solved first since Abs args refer into
    // it; when computing that table itself, `here` and `under` coincide.
    let under: BTreeMap<String, Option<usize>> = if under_binder {
        BTreeMap::new()
    } else {
        min_size_fixpoint(sig, has_vars, true)
    };
    loop {
        let mut changed = false;
        for d in &sig.sorts {
            let mut best: Option<usize> = None;
            if *d == sig.term_sort && has_vars {
                best = Some(1);
            }
            if sig.params.get(d).map_or(false, |p| !p.is_empty()) {
                best = Some(best.map_or(1, |b| b.min(1)));
            }
            for op in sig.ops.iter().filter(|o| o.result == *d) {
                let under_ref = if under_binder { &here } else { &under };
                if let Some(m) = min_compound(&op.arg, &here, under_ref, under_binder) {
                    let cand = 1 + m;
                    best = Some(best.map_or(cand, |b| b.min(cand)));
                }
            }
            if best != here[d] {
                here.insert(d.clone(), best);
                changed = true;
            }
        }
        if !changed {
            return here;
        }
    }
}

#[derive(Debug)]
struct SigMonad {
    core: Arc<SigCore>,
}

fn unwrap_term(value: &Value, who: &str) -> Result<NTerm> {
    match value {
        Value::Term(t) => Ok(t.clone()),
        other => Err(Error::BadPayload(format!(
            "{who} expects syntax-tree elements, got `{other}`"
        ))),
    }
}

fn assignment_trees(f: &Assignment) -> Result<Vec<NTerm>> {
    f.components
        .iter()
        .map(|c| unwrap_term(&c.value, "signature monad assignment"))
        .collect()
}

fn check_rename_map(map: &[usize], source_arity: usize, target_arity: usize) -> Result<()> {
    if map.len() != source_arity {
        return Err(Error::ArityMismatch {
            what: "rename map length",
            expected: source_arity,
            found: map.len(),
        });
    }
    for &j in map {
        if j == 0 || j > target_arity {
            return Err(Error::IndexOutOfRange { index: j, arity: target_arity });
        }
    }
    Ok(())
}

impl MonadOps for SigMonad {
    fn name(&self) -> String {
        self.core.sig.tag.clone().unwrap_or_else(|| "signature".into())
    }

    fn key(&self) -> String {
        format!("sig:{}", self.core.source)
    }

    fn eta(&self, arity: usize, i: usize) -> Result<RTerm> {
        if i == 0 || i > arity {
            return Err(Error::IndexOutOfRange { index: i, arity });
        }
        Ok(RTerm::new(arity, Value::Term(NTerm::FreeVar(i))))
    }

    fn bind(&self, f: &Assignment, t: &RTerm) -> Result<RTerm> {
        if t.arity != f.source_arity {
            return Err(Error::ArityMismatch {
                what: "bind argument arity",
                expected: f.source_arity,
                found: t.arity,
            });
        }
        let comps = assignment_trees(f)?;
        let tree = unwrap_term(&t.value, "signature monad")?;
        Ok(RTerm::new(f.target_arity, Value::Term(tree.graft(&comps)?)))
    }

    fn validate(&self, t: &RTerm) -> Result<()> {
        let tree = unwrap_term(&t.value, "signature monad")?;
        self.core.sig.check_term(
            &tree,
            &CompoundSort::data(&self.core.sig.term_sort),
            t.arity,
            0,
        )
    }

    fn free_vars(&self, t: &RTerm) -> Result<BTreeSet<usize>> {
        self.validate(t)?;
        Ok(t.value.free_vars())
    }

    fn rename(&self, t: &RTerm, map: &[usize], target_arity: usize) -> Result<RTerm> {
        check_rename_map(map, t.arity, target_arity)?;
        let tree = unwrap_term(&t.value, "signature monad")?;
        Ok(RTerm::new(target_arity, Value::Term(tree.rename(map)?)))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<RTerm>> {
        let sort = CompoundSort::data(&self.core.sig.term_sort);
        let terms = self.core.enum_sort(&sort, arity, 0, max_size);
        Ok(canonical_sort_rterms(
            terms
                .into_iter()
                .map(|t| RTerm::new(arity, Value::Term(t)))
                .collect(),
        ))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<RTerm> {
        let sort = CompoundSort::data(&self.core.sig.term_sort);
        let t = self.core.sample_sort(rng, &sort, arity, 0, max_size)?;
        Some(RTerm::new(arity, Value::Term(t)))
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<RTerm> {
        let t = parse_data_term(src, &self.core.sig, &self.core.sig.term_sort, arity, line)?;
        Ok(RTerm::new(arity, Value::Term(t)))
    }
}

#[derive(Debug)]
struct SortModule {
    monad: Arc<SigMonad>,
    core: Arc<SigCore>,
    sort: String,
}

impl ModuleOps for SortModule {
    fn name(&self) -> String {
        self.sort.clone()
    }

    fn key(&self) -> String {
        format!("sort({}):{}", self.sort, self.core.source)
    }

    fn monad(&self) -> MonadSpec {
        Arc::clone(&self.monad) as MonadSpec
    }

    fn rho(&self, f: &Assignment, e: &LMTerm) -> Result<LMTerm> {
        if e.arity != f.source_arity {
            return Err(Error::ArityMismatch {
                what: "rho argument arity",
                expected: f.source_arity,
                found: e.arity,
            });
        }
        let comps = assignment_trees(f)?;
        let tree = unwrap_term(&e.value, "sort module")?;
        Ok(LMTerm::new(f.target_arity, Value::Term(tree.graft(&comps)?)))
    }

    fn validate(&self, e: &LMTerm) -> Result<()> {
        let tree = unwrap_term(&e.value, "sort module")?;
        self.core
            .sig
            .check_term(&tree, &CompoundSort::data(&self.sort), e.arity, 0)
    }

    fn free_vars(&self, e: &LMTerm) -> Result<BTreeSet<usize>> {
        self.validate(e)?;
        Ok(e.value.free_vars())
    }

    fn rename(&self, e: &LMTerm, map: &[usize], target_arity: usize) -> Result<LMTerm> {
        check_rename_map(map, e.arity, target_arity)?;
        let tree = unwrap_term(&e.value, "sort module")?;
        Ok(LMTerm::new(target_arity, Value::Term(tree.rename(map)?)))
    }

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<LMTerm>> {
        let sort = CompoundSort::data(&self.sort);
        let terms = self.core.enum_sort(&sort, arity, 0, max_size);
        Ok(canonical_sort_lmterms(
            terms
                .into_iter()
                .map(|t| LMTerm::new(arity, Value::Term(t)))
                .collect(),
        ))
    }

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<LMTerm> {
        let sort = CompoundSort::data(&self.sort);
        let t = self.core.sample_sort(rng, &sort, arity, 0, max_size)?;
        Some(LMTerm::new(arity, Value::Term(t)))
    }

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<LMTerm> {
        let t = parse_data_term(src, &self.core.sig, &self.sort, arity, line)?;
        Ok(LMTerm::new(arity, Value::Term(t)))
    }
}
