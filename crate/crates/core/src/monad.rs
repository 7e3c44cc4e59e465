//! Monads on finite variable sets and left modules over them.
//!
//! A monad here is the data of, for every finite arity n, a set R({1..n}) of
//! elements together with a unit `eta` and a substitution `bind`; a left
//! module is a family LM({1..n}) with an action `rho` of assignments. Both
//! are object-safe traits so checkers can hold them as trait objects and mix
//! builtin and signature-derived instances freely.
//!
//! `rename` must be implemented structurally, not via `bind`: the law suite
//! cross-checks renaming against the eta-assignment route, and that check is
//! only meaningful when the two sides are computed independently.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::value::{LMTerm, RTerm};

/// A substitution: for each of `source_arity` variables, an element over
/// `target_arity` variables. Applying it takes terms over the source arity
/// to terms over the target arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub source_arity: usize,
    pub target_arity: usize,
    pub components: Vec<RTerm>,
}

impl Assignment {
    pub fn new(source_arity: usize, target_arity: usize, components: Vec<RTerm>) -> Assignment {
        Assignment { source_arity, target_arity, components }
    }

    /// Image of variable `i` (1-based).
    pub fn component(&self, i: usize) -> Result<&RTerm> {
        self.components.get(i - 1).ok_or(Error::IndexOutOfRange {
            index: i,
            arity: self.components.len(),
        })
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

pub trait MonadOps: fmt::Debug + Send + Sync {
    /// Human-readable name, for reports.
    fn name(&self) -> String;

    /// Identity key: two handles with equal keys present the same monad.
    fn key(&self) -> String;

    /// The unit at variable `i` of `{1..arity}`.
    fn eta(&self, arity: usize, i: usize) -> Result<RTerm>;

    /// Substitute `f` into `t`; requires `t.arity == f.source_arity`.
    fn bind(&self, f: &Assignment, t: &RTerm) -> Result<RTerm>;

    /// Structural well-formedness of an element at its recorded arity.
    fn validate(&self, t: &RTerm) -> Result<()>;

    /// Variables of `{1..t.arity}` on which `t` actually depends.
    fn free_vars(&self, t: &RTerm) -> Result<BTreeSet<usize>>;

    /// Renumber variables through `map` (variable i goes to map[i-1], which
    /// must lie in `{1..target_arity}`). Structural, never routed via bind.
    fn rename(&self, t: &RTerm, map: &[usize], target_arity: usize) -> Result<RTerm>;

    /// All elements at `arity` of size at most `max_size`, in canonical
    /// order (size, then display string), without duplicates.
    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<RTerm>>;

    /// One random element, or None when the set is empty.
    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<RTerm>;

    /// Parse the display syntax back into an element.
    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<RTerm>;
}

pub trait ModuleOps: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    fn key(&self) -> String;

    /// The monad this module acts over.
    fn monad(&self) -> MonadSpec;

    /// Module action: requires `e.arity == f.source_arity`, result has
    /// arity `f.target_arity`.
    fn rho(&self, f: &Assignment, e: &LMTerm) -> Result<LMTerm>;

    fn validate(&self, e: &LMTerm) -> Result<()>;

    fn free_vars(&self, e: &LMTerm) -> Result<BTreeSet<usize>>;

    fn rename(&self, e: &LMTerm, map: &[usize], target_arity: usize) -> Result<LMTerm>;

    fn enumerate(&self, arity: usize, max_size: usize) -> Result<Vec<LMTerm>>;

    fn sample(&self, rng: &mut dyn RngCore, arity: usize, max_size: usize) -> Option<LMTerm>;

    fn parse_term(&self, src: &str, arity: usize, line: usize) -> Result<LMTerm>;
}

pub type MonadSpec = Arc<dyn MonadOps>;
pub type ModuleSpec = Arc<dyn ModuleOps>;

/// Check the internal consistency of an assignment against its monad.
pub fn check_assignment(monad: &dyn MonadOps, f: &Assignment) -> Result<()> {
    if f.components.len() != f.source_arity {
        return Err(Error::ArityMismatch {
            what: "assignment components",
            expected: f.source_arity,
            found: f.components.len(),
        });
    }
    for c in &f.components {
        if c.arity != f.target_arity {
            return Err(Error::ArityMismatch {
                what: "assignment component arity",
                expected: f.target_arity,
                found: c.arity,
            });
        }
        monad.validate(c)?;
    }
    Ok(())
}

/// The identity assignment at `arity`: variable i goes to eta(i).
pub fn eta_assignment(monad: &dyn MonadOps, arity: usize) -> Result<Assignment> {
    let components = (1..=arity)
        .map(|i| monad.eta(arity, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment::new(arity, arity, components))
}

/// The assignment sending variable i to eta(map[i-1]) at `target_arity`.
pub fn renaming_assignment(
    monad: &dyn MonadOps,
    map: &[usize],
    target_arity: usize,
) -> Result<Assignment> {
    let components = map
        .iter()
        .map(|&j| monad.eta(target_arity, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment::new(map.len(), target_arity, components))
}

/// Kleisli composition: `g` then `f`. Requires `g.target_arity ==
/// f.source_arity`; the result substitutes g's source variables by terms
/// over f's target arity, i.e. bind(f, -) applied to each component of g.
pub fn compose_assignments(
    monad: &dyn MonadOps,
    f: &Assignment,
    g: &Assignment,
) -> Result<Assignment> {
    if g.target_arity != f.source_arity {
        return Err(Error::ArityMismatch {
            what: "assignment composition",
            expected: f.source_arity,
            found: g.target_arity,
        });
    }
    let components = g
        .components
        .iter()
        .map(|c| monad.bind(f, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment::new(g.source_arity, f.target_arity, components))
}

/// Variable map for weakening at slot `k` over arity `m`: i stays put below
/// k and shifts up by one from k on, freeing variable k in the result.
/// Requires 1 <= k <= m+1.
pub fn weaken_map(m: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > m + 1 {
        return Err(Error::Precondition(format!(
            "weakening slot {k} out of range for arity {m}"
        )));
    }
    Ok((1..=m).map(|i| if i < k { i } else { i + 1 }).collect())
}

/// Variable map for collapsing onto slot `k` over arity `m`: i stays put up
/// to k, shifts down past k, so k and k+1 are identified. Requires
/// 1 <= k <= m-1.
pub fn collapse_map(m: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || m < k + 1 {
        return Err(Error::Precondition(format!(
            "collapse slot {k} out of range for arity {m}"
        )));
    }
    Ok((1..=m).map(|i| if i <= k { i } else { i - 1 }).collect())
}

pub fn weaken_rterm(monad: &dyn MonadOps, t: &RTerm, k: usize) -> Result<RTerm> {
    monad.rename(t, &weaken_map(t.arity, k)?, t.arity + 1)
}

pub fn collapse_rterm(monad: &dyn MonadOps, t: &RTerm, k: usize) -> Result<RTerm> {
    monad.rename(t, &collapse_map(t.arity, k)?, t.arity - 1)
}

pub fn weaken_lmterm(module: &dyn ModuleOps, e: &LMTerm, k: usize) -> Result<LMTerm> {
    module.rename(e, &weaken_map(e.arity, k)?, e.arity + 1)
}

pub fn collapse_lmterm(module: &dyn ModuleOps, e: &LMTerm, k: usize) -> Result<LMTerm> {
    module.rename(e, &collapse_map(e.arity, k)?, e.arity - 1)
}

/// Reinterpret an element over a larger variable set without moving any
/// variable. Requires `new_arity >= t.arity`.
pub fn include_rterm(monad: &dyn MonadOps, t: &RTerm, new_arity: usize) -> Result<RTerm> {
    if new_arity < t.arity {
        return Err(Error::Precondition(format!(
            "cannot include arity {} into arity {new_arity}",
            t.arity
        )));
    }
    let map: Vec<usize> = (1..=t.arity).collect();
    monad.rename(t, &map, new_arity)
}

pub fn include_lmterm(module: &dyn ModuleOps, e: &LMTerm, new_arity: usize) -> Result<LMTerm> {
    if new_arity < e.arity {
        return Err(Error::Precondition(format!(
            "cannot include arity {} into arity {new_arity}",
            e.arity
        )));
    }
    let map: Vec<usize> = (1..=e.arity).collect();
    module.rename(e, &map, new_arity)
}

/// The assignment over `{1..m}` that substitutes `s` for variable n+1 and
/// closes the gap: variables up to n stay, variables past n+1 drop by one.
/// Requires `m >= n+1` and `s.arity <= m-1`.
pub fn subst_collapse_assignment(
    monad: &dyn MonadOps,
    n: usize,
    s: &RTerm,
    m: usize,
) -> Result<Assignment> {
    if m < n + 1 {
        return Err(Error::Precondition(format!(
            "substitution at slot {} needs arity at least {}, got {m}",
            n + 1,
            n + 1
        )));
    }
    if s.arity > m - 1 {
        return Err(Error::Precondition(format!(
            "substituted term has arity {}, exceeding result arity {}",
            s.arity,
            m - 1
        )));
    }
    let mut components = Vec::with_capacity(m);
    for i in 1..=m {
        if i <= n {
            components.push(monad.eta(m - 1, i)?);
        } else if i == n + 1 {
            components.push(include_rterm(monad, s, m - 1)?);
        } else {
            components.push(monad.eta(m - 1, i - 1)?);
        }
    }
    Ok(Assignment::new(m, m - 1, components))
}

/// Substitute `s` for variable n+1 of `t` and renumber down.
pub fn subst_collapse_rterm(monad: &dyn MonadOps, n: usize, s: &RTerm, t: &RTerm) -> Result<RTerm> {
    let f = subst_collapse_assignment(monad, n, s, t.arity)?;
    monad.bind(&f, t)
}

/// Substitute `s` for variable n+1 of `e` and renumber down.
pub fn subst_collapse_lmterm(
    module: &dyn ModuleOps,
    n: usize,
    s: &RTerm,
    e: &LMTerm,
) -> Result<LMTerm> {
    let f = subst_collapse_assignment(module.monad().as_ref(), n, s, e.arity)?;
    module.rho(&f, e)
}

/// Canonical enumeration order: size first, display string second.
pub fn canonical_sort_rterms(mut v: Vec<RTerm>) -> Vec<RTerm> {
    v.sort_by_cached_key(|t| (t.size(), t.to_string()));
    v.dedup();
    v
}

pub fn canonical_sort_lmterms(mut v: Vec<LMTerm>) -> Vec<LMTerm> {
    v.sort_by_cached_key(|t| (t.size(), t.to_string()));
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin_monad;
    use crate::value::Value;

    fn opt() -> MonadSpec {
        builtin_monad("option").unwrap()
    }

    #[test]
    fn maps_match_the_simplicial_conventions() {
        assert_eq!(weaken_map(3, 1).unwrap(), vec![2, 3, 4]);
        assert_eq!(weaken_map(3, 2).unwrap(), vec![1, 3, 4]);
        assert_eq!(weaken_map(3, 4).unwrap(), vec![1, 2, 3]);
        assert!(weaken_map(3, 5).is_err());
        assert_eq!(collapse_map(3, 1).unwrap(), vec![1, 1, 2]);
        assert_eq!(collapse_map(3, 2).unwrap(), vec![1, 2, 2]);
        assert!(collapse_map(3, 3).is_err());
    }

    #[test]
    fn collapse_undoes_weaken() {
        let m = opt();
        for arity in 0..4 {
            for k in 1..=arity {
                for t in m.enumerate(arity, 2).unwrap() {
                    let up = weaken_rterm(m.as_ref(), &t, k).unwrap();
                    let down = collapse_rterm(m.as_ref(), &up, k).unwrap();
                    assert_eq!(down, t);
                }
            }
        }
    }

    #[test]
    fn subst_collapse_hits_the_target_slot() {
        let m = opt();
        // Over {1,2,3}, substitute s for variable 2 (n = 1).
        let s = RTerm::new(1, Value::Star);
        let t = RTerm::new(3, Value::Var(2));
        assert_eq!(
            subst_collapse_rterm(m.as_ref(), 1, &s, &t).unwrap(),
            RTerm::new(2, Value::Star)
        );
        let keep = RTerm::new(3, Value::Var(3));
        assert_eq!(
            subst_collapse_rterm(m.as_ref(), 1, &s, &keep).unwrap(),
            RTerm::new(2, Value::Var(2))
        );
        let low = RTerm::new(3, Value::Var(1));
        assert_eq!(
            subst_collapse_rterm(m.as_ref(), 1, &s, &low).unwrap(),
            RTerm::new(2, Value::Var(1))
        );
    }

    #[test]
    fn composition_agrees_with_sequential_bind() {
        let m = opt();
        // g: 1 -> 2 variables, f: 2 -> 1 variables.
        let g = Assignment::new(1, 2, vec![RTerm::new(2, Value::Var(2))]);
        let f = Assignment::new(2, 1, vec![RTerm::new(1, Value::Star), RTerm::new(1, Value::Var(1))]);
        let t = RTerm::new(1, Value::Var(1));
        let two_step = m.bind(&f, &m.bind(&g, &t).unwrap()).unwrap();
        let fg = compose_assignments(m.as_ref(), &f, &g).unwrap();
        check_assignment(m.as_ref(), &fg).unwrap();
        assert_eq!(m.bind(&fg, &t).unwrap(), two_step);
    }

    #[test]
    fn check_assignment_rejects_mismatched_components() {
        let m = opt();
        let bad = Assignment::new(2, 1, vec![RTerm::new(1, Value::Var(1))]);
        assert!(check_assignment(m.as_ref(), &bad).is_err());
        let bad_arity = Assignment::new(1, 2, vec![RTerm::new(1, Value::Var(1))]);
        assert!(check_assignment(m.as_ref(), &bad_arity).is_err());
    }
}
