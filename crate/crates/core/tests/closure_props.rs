//! Closure properties over the epsilon families: certification, minimality
//! under deletion, monotonicity, idempotence, and bit-sensitivity.

use std::time::Instant;

use ctxcat::builtin::{builtin_monad, self_module};
use ctxcat::monad::ModuleSpec;
use ctxcat::subsystem::{
    check_subsystem, close, epsilon_db, hom_membership, Bounds, JudgementDB,
};
use ctxcat::csystem::identity_morph;

fn option_module() -> ModuleSpec {
    self_module(builtin_monad("option").unwrap())
}

fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

fn epsilon_closure(pattern: &str, bounds: &Bounds) -> (JudgementDB, bool) {
    let (ctxs, secs) = epsilon_db(&bits(pattern));
    close(&option_module(), &ctxs, &secs, bounds).unwrap()
}

#[test]
fn epsilon_1011_closure_certifies_and_is_deletion_minimal() {
    let started = Instant::now();
    let bounds = Bounds::new(5, 6).unwrap();
    let (gen_ctxs, gen_secs) = epsilon_db(&bits("1011"));
    let (db, fixpoint) = close(&option_module(), &gen_ctxs, &gen_secs, &bounds).unwrap();
    // The epsilon family is unbounded, so the bounded saturation is not a
    // true fixpoint; it still satisfies every rule instance that fits.
    assert!(!fixpoint);
    assert!(check_subsystem(&db, &bounds).unwrap().pass());

    // Every non-generator element is forced: deleting it must break some
    // rule, and the report must say which.
    let mut deletions = 0;
    for c in db.contexts().clone() {
        if gen_ctxs.contains(&c) {
            continue;
        }
        let mut pruned = db.clone();
        pruned.remove_context(&c);
        let report = check_subsystem(&pruned, &bounds).unwrap();
        assert!(!report.pass(), "deleting context ({c}) went unnoticed");
        assert!(report.violations.iter().all(|v| v.to_string().starts_with("RULE ")));
        deletions += 1;
    }
    for s in db.sections().clone() {
        if gen_secs.contains(&s) {
            continue;
        }
        let mut pruned = db.clone();
        pruned.remove_section(&s);
        let report = check_subsystem(&pruned, &bounds).unwrap();
        assert!(!report.pass(), "deleting section ({s}) went unnoticed");
        assert!(report.violations.iter().all(|v| v.to_string().starts_with("RULE ")));
        deletions += 1;
    }
    assert!(deletions > 0);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "deletion battery took {elapsed:?}");
}

// The bit-1 generator ((*,1,2) |- 3 : *) is derivable from the bit-0 one:
// weaken ((*,1) |- 2 : *) under a fresh bottom variable of type * to get
// ((*,*,2) |- 3 : *), weaken that at slot 2 through the chain (*,1) to get
// ((*,1,*,3) |- 4 : *), then substitute the generator for the starred slot.
// Every set bit therefore derives all later bits, and two patterns close to
// the same database exactly when their first set bits agree.
#[test]
fn closures_for_bits_10_and_11_coincide() {
    let bounds = Bounds::new(5, 6).unwrap();
    let (db10, _) = epsilon_closure("10", &bounds);
    let (db11, _) = epsilon_closure("11", &bounds);
    assert_eq!(db10.contexts(), db11.contexts());
    assert_eq!(db10.sections(), db11.sections());
}

#[test]
fn closures_split_by_the_first_set_bit() {
    let bounds = Bounds::new(5, 6).unwrap();
    let (db01, _) = epsilon_closure("01", &bounds);
    let (db10, _) = epsilon_closure("10", &bounds);
    assert!(db01.sections().is_subset(db10.sections()));
    let only_10 = db10.sections().difference(db01.sections()).count();
    assert!(only_10 > 0, "a later first set bit must close to a smaller set");

    let small = Bounds::new(3, 4).unwrap();
    let (db1, _) = epsilon_closure("1", &small);
    let (db0, _) = epsilon_closure("0", &small);
    assert!(db0.sections().is_subset(db1.sections()));
    assert!(db1.sections().difference(db0.sections()).count() > 0);
}

#[test]
fn close_is_monotone_in_its_generators() {
    let bounds = Bounds::new(5, 6).unwrap();
    let (db10, _) = epsilon_closure("10", &bounds);
    let (db11, _) = epsilon_closure("11", &bounds);
    assert!(db10.contexts().is_subset(db11.contexts()));
    assert!(db10.sections().is_subset(db11.sections()));
}

#[test]
fn close_is_idempotent_on_its_own_output() {
    let bounds = Bounds::new(4, 5).unwrap();
    let (db, _) = epsilon_closure("101", &bounds);
    let ctxs: Vec<_> = db.contexts().iter().cloned().collect();
    let secs: Vec<_> = db.sections().iter().cloned().collect();
    let (again, _) = close(&option_module(), &ctxs, &secs, &bounds).unwrap();
    assert_eq!(again.contexts(), db.contexts());
    assert_eq!(again.sections(), db.sections());
}

#[test]
fn identity_morphisms_of_certified_contexts_are_homs() {
    let bounds = Bounds::new(4, 5).unwrap();
    let (db, _) = epsilon_closure("11", &bounds);
    let monad = db.module().monad();
    for c in db.contexts() {
        let id = identity_morph(monad.as_ref(), c).unwrap();
        assert!(hom_membership(&db, &id).unwrap(), "identity of ({c}) is not a hom");
    }
}

#[test]
fn empty_generators_close_to_the_empty_context_alone() {
    let bounds = Bounds::new(3, 3).unwrap();
    let (db, fixpoint) = close(&option_module(), &[], &[], &bounds).unwrap();
    assert!(fixpoint);
    assert_eq!(db.contexts().len(), 1);
    assert!(db.contexts().iter().next().unwrap().is_empty());
    assert!(db.sections().is_empty());
}
