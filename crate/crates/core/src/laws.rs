//! Randomized law suites: monad laws, module laws, and the simplicial
//! identities tying weakening, collapse, and substitution together.
//!
//! Every suite is seeded and exact: instances are drawn from a [`Gen`] and
//! compared with structural equality, and the report records the seed so a
//! failure can be replayed.

use std::fmt;

use crate::error::{Error, Result};
use crate::gen::Gen;
use crate::monad::{
    collapse_lmterm, collapse_map, compose_assignments, eta_assignment, subst_collapse_lmterm,
    weaken_lmterm, weaken_map, Assignment, ModuleOps, ModuleSpec, MonadOps,
};
use crate::value::{LMTerm, RTerm};

/// Arity cap for randomized law instances.
pub const LAW_MAX_ARITY: usize = 4;
/// Size cap for randomized law instances.
pub const LAW_MAX_SIZE: usize = 12;

const RETRIES: usize = 64;

/// Result of one law over a batch of random instances.
#[derive(Debug, Clone)]
pub struct LawOutcome {
    pub id: &'static str,
    pub instances: usize,
    pub counterexample: Option<String>,
}

impl LawOutcome {
    pub fn pass(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Full law-suite report for one module (and its base monad).
#[derive(Debug, Clone)]
pub struct LawReport {
    pub monad: String,
    pub module: String,
    pub samples: usize,
    pub seed: u64,
    pub outcomes: Vec<LawOutcome>,
}

impl LawReport {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(LawOutcome::pass)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "monad: {}", self.monad)?;
        writeln!(f, "module: {}", self.module)?;
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "caps: arity <= {LAW_MAX_ARITY}, size <= {LAW_MAX_SIZE}")?;
        for o in &self.outcomes {
            if let Some(ce) = &o.counterexample {
                writeln!(f, "law {}: FAIL ({} instances) counterexample: {}", o.id, o.instances, ce)?;
            } else {
                writeln!(f, "law {}: pass ({} instances)", o.id, o.instances)?;
            }
        }
        write!(f, "result: {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

/// Pick an arity in `min..=LAW_MAX_ARITY` at which the monad has terms.
fn rterm_arity(g: &mut Gen, monad: &dyn MonadOps, min: usize) -> Result<(usize, RTerm)> {
    for _ in 0..RETRIES {
        let n = g.range(min, LAW_MAX_ARITY);
        if let Some(t) = g.rterm(monad, n, LAW_MAX_SIZE) {
            return Ok((n, t));
        }
    }
    Err(Error::Invalid(format!(
        "monad {} yields no samples at arities {min}..={LAW_MAX_ARITY}",
        monad.name()
    )))
}

fn lmterm_arity(g: &mut Gen, module: &dyn ModuleOps, min: usize) -> Result<(usize, LMTerm)> {
    for _ in 0..RETRIES {
        let n = g.range(min, LAW_MAX_ARITY);
        if let Some(e) = g.lmterm(module, n, LAW_MAX_SIZE) {
            return Ok((n, e));
        }
    }
    Err(Error::Invalid(format!(
        "module {} yields no samples at arities {min}..={LAW_MAX_ARITY}",
        module.name()
    )))
}

/// A random assignment whose target arity is known to be samplable.
fn assignment_to(
    g: &mut Gen,
    monad: &dyn MonadOps,
    source: usize,
    target: usize,
) -> Result<Assignment> {
    g.assignment(monad, source, target, LAW_MAX_SIZE).ok_or_else(|| {
        Error::Invalid(format!("monad {} yields no samples at arity {target}", monad.name()))
    })
}

/// The renaming assignment with components `eta(target, map[i])`.
fn renaming_assignment(
    monad: &dyn MonadOps,
    source: usize,
    target: usize,
    map: &[usize],
) -> Result<Assignment> {
    let components = map
        .iter()
        .map(|&j| monad.eta(target, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment::new(source, target, components))
}

type LawCheck<'a> = dyn FnMut(&mut Gen) -> Result<Option<String>> + 'a;

fn run_law(g: &mut Gen, samples: usize, check: &mut LawCheck) -> Result<(usize, Option<String>)> {
    let mut first = None;
    for _ in 0..samples {
        let ce = check(g)?;
        if first.is_none() {
            first = ce;
        }
    }
    Ok((samples, first))
}

/// Run the full law suite: monad laws 1 to 3, module laws 1 and 2, and the
/// simplicial identities relating weakening, collapse, and substitution.
pub fn run_law_suite(module: &ModuleSpec, samples: usize, seed: u64) -> Result<LawReport> {
    let monad = module.monad();
    let mn = monad.as_ref();
    let md = module.as_ref();
    let mut g = Gen::new(seed);
    let mut outcomes = Vec::new();

    let mut push = |g: &mut Gen, id: &'static str, check: &mut LawCheck| -> Result<()> {
        let (instances, counterexample) = run_law(g, samples, check)?;
        outcomes.push(LawOutcome { id, instances, counterexample });
        Ok(())
    };

    // Law 1: bind along the eta assignment is the identity.
    push(&mut g, "monad-1", &mut |g| {
        let (n, t) = rterm_arity(g, mn, 0)?;
        let id = eta_assignment(mn, n)?;
        let got = mn.bind(&id, &t)?;
        Ok((got != t).then(|| format!("t = {t} (arity {n}), bind(eta, t) = {got}")))
    })?;

    // Law 2: bind applied to a generator picks out the component.
    push(&mut g, "monad-2", &mut |g| {
        let (m, _) = rterm_arity(g, mn, 0)?;
        let n = g.range(1, LAW_MAX_ARITY);
        let f = assignment_to(g, mn, n, m)?;
        let i = g.range(1, n);
        let got = mn.bind(&f, &mn.eta(n, i)?)?;
        let want = &f.components[i - 1];
        Ok((got != *want).then(|| format!("f = {f}, i = {i}, bind(f, eta_{i}) = {got}, f_{i} = {want}")))
    })?;

    // Law 3: bind is associative.
    push(&mut g, "monad-3", &mut |g| {
        let (n, t) = rterm_arity(g, mn, 0)?;
        let (m, _) = rterm_arity(g, mn, 0)?;
        let (k, _) = rterm_arity(g, mn, 0)?;
        let f = assignment_to(g, mn, n, m)?;
        let h = assignment_to(g, mn, m, k)?;
        let lhs = mn.bind(&h, &mn.bind(&f, &t)?)?;
        let rhs = mn.bind(&compose_assignments(mn, &h, &f)?, &t)?;
        Ok((lhs != rhs).then(|| format!("t = {t}, f = {f}, g = {h}, nested = {lhs}, composed = {rhs}")))
    })?;

    // Module law 1: rho along the eta assignment is the identity.
    push(&mut g, "module-1", &mut |g| {
        let (n, e) = lmterm_arity(g, md, 0)?;
        let id = eta_assignment(mn, n)?;
        let got = md.rho(&id, &e)?;
        Ok((got != e).then(|| format!("e = {e} (arity {n}), rho(eta, e) = {got}")))
    })?;

    // Module law 2: rho respects assignment composition.
    push(&mut g, "module-2", &mut |g| {
        let (n, e) = lmterm_arity(g, md, 0)?;
        let (m, _) = rterm_arity(g, mn, 0)?;
        let (k, _) = rterm_arity(g, mn, 0)?;
        let f = assignment_to(g, mn, n, m)?;
        let h = assignment_to(g, mn, m, k)?;
        let lhs = md.rho(&h, &md.rho(&f, &e)?)?;
        let rhs = md.rho(&compose_assignments(mn, &h, &f)?, &e)?;
        Ok((lhs != rhs).then(|| format!("e = {e}, f = {f}, g = {h}, nested = {lhs}, composed = {rhs}")))
    })?;

    // Post-composing with the eta assignment routes every component through
    // bind once more; the result must agree with binding f directly.
    push(&mut g, "mu-consistency", &mut |g| {
        let (n, t) = rterm_arity(g, mn, 0)?;
        let (m, _) = rterm_arity(g, mn, 0)?;
        let f = assignment_to(g, mn, n, m)?;
        let routed = compose_assignments(mn, &f, &eta_assignment(mn, n)?)?;
        let lhs = mn.bind(&routed, &t)?;
        let rhs = mn.bind(&f, &t)?;
        Ok((lhs != rhs).then(|| format!("t = {t}, f = {f}, routed = {lhs}, direct = {rhs}")))
    })?;

    // Degeneracy after the face it doubles: collapse at k undoes weakening at k.
    push(&mut g, "simplicial-1", &mut |g| {
        let (n, e) = lmterm_arity(g, md, 1)?;
        let k = g.range(1, n);
        let got = collapse_lmterm(md, &weaken_lmterm(md, &e, k)?, k)?;
        Ok((got != e).then(|| format!("e = {e} (arity {n}), k = {k}, collapse(weaken(e)) = {got}")))
    })?;

    // Degeneracy after the face above it: collapse at k undoes weakening at k+1.
    // Together with simplicial-1 this covers every weakening slot up to arity+1.
    push(&mut g, "simplicial-2", &mut |g| {
        let (n, e) = lmterm_arity(g, md, 1)?;
        let k = g.range(1, n);
        let got = collapse_lmterm(md, &weaken_lmterm(md, &e, k + 1)?, k)?;
        Ok((got != e).then(|| format!("e = {e} (arity {n}), k = {k}, collapse_k(weaken_{}(e)) = {got}", k + 1)))
    })?;

    // Substituting at a slot equals the keep-arity rho followed by a collapse.
    push(&mut g, "subst-two-step", &mut |g| {
        for _ in 0..RETRIES {
            let n = g.index(LAW_MAX_ARITY - 1);
            let m = g.range(n + 2, LAW_MAX_ARITY);
            let (Some(s), Some(e)) =
                (g.rterm(mn, n, LAW_MAX_SIZE), g.lmterm(md, m, LAW_MAX_SIZE))
            else {
                continue;
            };
            let direct = subst_collapse_lmterm(md, n, &s, &e)?;
            let mut components = Vec::with_capacity(m);
            for i in 1..=m {
                if i == n + 1 {
                    let inclusion: Vec<usize> = (1..=s.arity).collect();
                    components.push(mn.rename(&s, &inclusion, m)?);
                } else {
                    components.push(mn.eta(m, i)?);
                }
            }
            let keep = Assignment::new(m, m, components);
            let two_step = collapse_lmterm(md, &md.rho(&keep, &e)?, n + 1)?;
            return Ok((direct != two_step).then(|| {
                format!("n = {n}, s = {s}, e = {e}, direct = {direct}, two-step = {two_step}")
            }));
        }
        Err(Error::Invalid(format!("module {} yields no substitution instances", md.name())))
    })?;

    // Weakening is rho along the face renaming.
    push(&mut g, "weaken-via-rho", &mut |g| {
        let (n, e) = lmterm_arity(g, md, 0)?;
        let k = g.range(1, n + 1);
        let a = renaming_assignment(mn, n, n + 1, &weaken_map(n, k)?)?;
        let via_rho = md.rho(&a, &e)?;
        let direct = weaken_lmterm(md, &e, k)?;
        Ok((via_rho != direct).then(|| {
            format!("e = {e} (arity {n}), k = {k}, rho = {via_rho}, rename = {direct}")
        }))
    })?;

    // Collapse is rho along the degeneracy renaming.
    push(&mut g, "collapse-via-rho", &mut |g| {
        let (n, e) = lmterm_arity(g, md, 2)?;
        let k = g.range(1, n - 1);
        let a = renaming_assignment(mn, n, n - 1, &collapse_map(n, k)?)?;
        let via_rho = md.rho(&a, &e)?;
        let direct = collapse_lmterm(md, &e, k)?;
        Ok((via_rho != direct).then(|| {
            format!("e = {e} (arity {n}), k = {k}, rho = {via_rho}, rename = {direct}")
        }))
    })?;

    Ok(LawReport {
        monad: monad.name().to_string(),
        module: module.name().to_string(),
        samples,
        seed,
        outcomes,
    })
}
