//! Acceptance battery: one test per shipping criterion, each printing a
//! single verdict line (visible under --nocapture or on failure). Stated
//! tolerances (instance counts, bounds, wall-clock budgets) are pinned here
//! as constants and asserted, not sampled down.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ctxcat::builtin::{builtin_monad, self_module};
use ctxcat::congruence::{
    build_sim, build_simeq, check_congruence, check_regularity, eqsets_from_relations, quotient,
    EqDB,
};
use ctxcat::csystem::{
    canonical_p, compose, identity_morph, morph_to_section, op_s, op_stilde, op_t, op_ttilde,
    pullback, section_to_morph, Context, Morph, Section,
};
use ctxcat::files::{render_eq, render_judgements};
use ctxcat::gen::Gen;
use ctxcat::laws::run_law_suite;
use ctxcat::monad::{
    collapse_lmterm, subst_collapse_lmterm, weaken_lmterm, Assignment, ModuleSpec,
};
use ctxcat::sigmonad::sig_module;
use ctxcat::subsystem::{check_subsystem, close, epsilon_db, Bounds, JudgementDB};
use ctxcat::syntax::builtin_signature;
use ctxcat::testkit::{gat_uu_fixture, named_bind_oracle, sample_hom};

const TRY_CAP: usize = 100_000;

fn verdict(n: usize, ok: bool, summary: &str) {
    println!("criterion {n}: {} ({summary})", if ok { "pass" } else { "FAIL" });
}

fn option_module() -> ModuleSpec {
    self_module(builtin_monad("option").unwrap())
}

fn lambda_module() -> ModuleSpec {
    sig_module(builtin_signature("lambda").unwrap()).unwrap()
}

fn axiom_worlds() -> Vec<(ModuleSpec, JudgementDB)> {
    let opt = option_module();
    let lam = lambda_module();
    vec![
        (opt.clone(), JudgementDB::full(opt, &Bounds::new(3, 4).unwrap()).unwrap()),
        (lam.clone(), JudgementDB::full(lam, &Bounds::new(2, 5).unwrap()).unwrap()),
    ]
}

#[test]
fn criterion_01_law_suites_pass_on_all_five_monads() {
    const SAMPLES: usize = 200;
    const SEED: u64 = 7;
    let required = ["monad-1", "monad-2", "monad-3", "module-1", "module-2"];
    let worlds: Vec<(&str, ModuleSpec)> = vec![
        ("identity", self_module(builtin_monad("identity").unwrap())),
        ("point", self_module(builtin_monad("point").unwrap())),
        ("option", option_module()),
        ("lambda", lambda_module()),
        ("mltt72", sig_module(builtin_signature("mltt72").unwrap()).unwrap()),
    ];
    let started = Instant::now();
    for (name, md) in &worlds {
        let report = run_law_suite(md, SAMPLES, SEED).unwrap();
        for id in required {
            let o = report
                .outcomes
                .iter()
                .find(|o| o.id == id)
                .unwrap_or_else(|| panic!("{name}: law {id} missing from the suite"));
            assert!(o.pass(), "{name}: law {id} failed:\n{report}");
            assert!(o.instances >= SAMPLES, "{name}: law {id} ran {} < {SAMPLES}", o.instances);
        }
    }
    let elapsed = started.elapsed();
    verdict(1, true, &format!("5 monads x {SAMPLES} instances, {elapsed:.2?}"));
    assert!(elapsed.as_secs() < 10, "law suites took {elapsed:?}, budget 10 s");
}

#[test]
fn criterion_02_simplicial_and_substitution_identities() {
    const SAMPLES: usize = 200;
    const MAX_SIZE: usize = 12;
    for md in [option_module(), lambda_module()] {
        let mn = md.monad();
        let mut g = Gen::new(202);
        let mut done = 0;
        let mut attempts = 0;
        while done < SAMPLES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved", md.name());
            let n = g.range(1, 4);
            let Some(e) = g.lmterm(md.as_ref(), n, MAX_SIZE) else { continue };
            let k = g.range(1, n);
            let round = collapse_lmterm(
                md.as_ref(),
                &weaken_lmterm(md.as_ref(), &e, k).unwrap(),
                k,
            )
            .unwrap();
            assert_eq!(round, e, "collapse_{k} after weaken_{k} moved e = {e}");
            done += 1;
        }

        let mut done = 0;
        let mut attempts = 0;
        while done < SAMPLES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved", md.name());
            let n = g.index(3);
            let m = g.range(n + 2, 4);
            let (Some(s), Some(e)) =
                (g.rterm(mn.as_ref(), n, MAX_SIZE), g.lmterm(md.as_ref(), m, MAX_SIZE))
            else {
                continue;
            };
            let direct = subst_collapse_lmterm(md.as_ref(), n, &s, &e).unwrap();
            let mut components = Vec::with_capacity(m);
            for i in 1..=m {
                if i == n + 1 {
                    let inclusion: Vec<usize> = (1..=s.arity).collect();
                    components.push(mn.rename(&s, &inclusion, m).unwrap());
                } else {
                    components.push(mn.eta(m, i).unwrap());
                }
            }
            let keep = Assignment::new(m, m, components);
            let two_step =
                collapse_lmterm(md.as_ref(), &md.rho(&keep, &e).unwrap(), n + 1).unwrap();
            assert_eq!(direct, two_step, "one-step and two-step substitution differ on e = {e}");
            done += 1;
        }
    }
    verdict(2, true, "collapse after weaken and one-step vs two-step subst, 200 each");
}

#[test]
fn criterion_03_csystem_axioms_on_option_and_lambda() {
    const INSTANCES: usize = 100;
    for (md, db) in axiom_worlds() {
        let mn = md.monad();
        let cs: Vec<Context> = db.contexts().iter().cloned().collect();
        let ss: Vec<Section> = db.sections().iter().cloned().collect();
        let tall: Vec<Context> = cs.iter().filter(|c| !c.is_empty()).cloned().collect();

        // (a) pullback along the identity is the identity square
        let mut g = Gen::new(301);
        for _ in 0..INSTANCES {
            let x = g.pick(&tall).unwrap();
            let id = identity_morph(mn.as_ref(), &x.ft()).unwrap();
            let pb = pullback(md.as_ref(), &id, x).unwrap();
            assert_eq!(&pb.object, x);
            assert_eq!(pb.q, identity_morph(mn.as_ref(), x).unwrap());
        }

        // (b) pullback along a composite is the iterated pullback
        let mut g = Gen::new(302);
        let mut done = 0;
        let mut attempts = 0;
        while done < INSTANCES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved (b)", md.name());
            let x = g.pick(&tall).unwrap().clone();
            let b = g.pick(&cs).unwrap().clone();
            let c = g.pick(&cs).unwrap().clone();
            let Some(f) = sample_hom(&mut g, &db, &b, &x.ft(), 3, 25) else { continue };
            let Some(h) = sample_hom(&mut g, &db, &c, &b, 3, 25) else { continue };
            let through = compose(mn.as_ref(), &h, &f).unwrap();
            let lhs = pullback(md.as_ref(), &through, &x).unwrap();
            let step1 = pullback(md.as_ref(), &f, &x).unwrap();
            let step2 = pullback(md.as_ref(), &h, &step1.object).unwrap();
            assert_eq!(lhs.object, step2.object);
            assert_eq!(lhs.q, compose(mn.as_ref(), &step2.q, &step1.q).unwrap());
            done += 1;
        }

        // (c) the canonical square commutes
        let mut g = Gen::new(303);
        let mut done = 0;
        let mut attempts = 0;
        while done < INSTANCES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved (c)", md.name());
            let x = g.pick(&tall).unwrap().clone();
            let b = g.pick(&cs).unwrap().clone();
            let Some(f) = sample_hom(&mut g, &db, &b, &x.ft(), 3, 25) else { continue };
            let pb = pullback(md.as_ref(), &f, &x).unwrap();
            let p_x = canonical_p(mn.as_ref(), &x).unwrap();
            let p_obj = canonical_p(mn.as_ref(), &pb.object).unwrap();
            assert_eq!(
                compose(mn.as_ref(), &pb.q, &p_x).unwrap(),
                compose(mn.as_ref(), &p_obj, &f).unwrap()
            );
            done += 1;
        }

        // (d) composition is associative
        let mut g = Gen::new(304);
        let mut done = 0;
        let mut attempts = 0;
        while done < INSTANCES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved (d)", md.name());
            let a = g.pick(&cs).unwrap().clone();
            let b = g.pick(&cs).unwrap().clone();
            let c = g.pick(&cs).unwrap().clone();
            let d = g.pick(&cs).unwrap().clone();
            let Some(f) = sample_hom(&mut g, &db, &a, &b, 3, 15) else { continue };
            let Some(h) = sample_hom(&mut g, &db, &b, &c, 3, 15) else { continue };
            let Some(k) = sample_hom(&mut g, &db, &c, &d, 3, 15) else { continue };
            let left = compose(mn.as_ref(), &compose(mn.as_ref(), &f, &h).unwrap(), &k).unwrap();
            let right = compose(mn.as_ref(), &f, &compose(mn.as_ref(), &h, &k).unwrap()).unwrap();
            assert_eq!(left, right);
            done += 1;
        }

        // (e) sections and section-shaped morphisms are mutually inverse
        let mut g = Gen::new(305);
        for _ in 0..INSTANCES {
            let s = g.pick(&ss).unwrap();
            let m: Morph = section_to_morph(mn.as_ref(), s).unwrap();
            let back = morph_to_section(mn.as_ref(), &m).unwrap();
            assert_eq!(&back, s);
            assert_eq!(section_to_morph(mn.as_ref(), &back).unwrap(), m);
        }
    }
    verdict(3, true, "pullback, square, compose, section axioms, 100 each on 2 monads");
}

#[test]
fn criterion_04_boundary_naturality() {
    const INSTANCES: usize = 100;
    for (md, db) in axiom_worlds() {
        let cs: Vec<Context> = db.contexts().iter().cloned().collect();
        let ss: Vec<Section> = db.sections().iter().cloned().collect();
        let tall: Vec<Context> = cs.iter().filter(|c| !c.is_empty()).cloned().collect();

        let mut g = Gen::new(401);
        let mut done = 0;
        let mut attempts = 0;
        while done < INSTANCES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved (Ttilde)", md.name());
            let a = g.pick(&tall).unwrap().clone();
            let over: Vec<&Section> =
                ss.iter().filter(|j| j.ctx().starts_with(&a.ft())).collect();
            let Some(j) = g.pick(&over) else { continue };
            let weakened = op_ttilde(md.as_ref(), &a, j).unwrap();
            assert_eq!(weakened.boundary(), op_t(md.as_ref(), &a, &j.boundary()).unwrap());
            done += 1;
        }

        let mut g = Gen::new(402);
        let mut done = 0;
        let mut attempts = 0;
        while done < INSTANCES {
            attempts += 1;
            assert!(attempts < TRY_CAP, "{}: sampler starved (Stilde)", md.name());
            let s = g.pick(&ss).unwrap().clone();
            let under: Vec<&Section> =
                ss.iter().filter(|j| j.ctx().starts_with(&s.boundary())).collect();
            let Some(j) = g.pick(&under) else { continue };
            let substituted = op_stilde(md.as_ref(), &s, j).unwrap();
            assert_eq!(substituted.boundary(), op_s(md.as_ref(), &s, &j.boundary()).unwrap());
            done += 1;
        }
    }
    verdict(4, true, "boundary commutes with weakening and substitution, 100 each");
}

#[test]
fn criterion_05_subsystem_checker_soundness() {
    let started = Instant::now();
    let bounds = Bounds::new(5, 6).unwrap();
    let (gen_ctxs, gen_secs) = epsilon_db(&[true, false, true, true]);
    let (db, _fixpoint) = close(&option_module(), &gen_ctxs, &gen_secs, &bounds).unwrap();
    assert!(check_subsystem(&db, &bounds).unwrap().pass(), "closure fails its own check");

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
    let elapsed = started.elapsed();
    verdict(5, true, &format!("1011 closure certified, {deletions} deletions flagged, {elapsed:.2?}"));
    assert!(elapsed.as_secs() < 30, "soundness battery took {elapsed:?}, budget 30 s");
}

#[test]
fn criterion_06_epsilon_separation_of_10_and_11() {
    let bounds = Bounds::new(5, 6).unwrap();
    let md = option_module();
    let close_bits = |bits: &[bool]| {
        let (cs, ss) = epsilon_db(bits);
        close(&md, &cs, &ss, &bounds).unwrap().0
    };
    let a = close_bits(&[true, false]);
    let b = close_bits(&[true, true]);
    let differ = a.contexts() != b.contexts() || a.sections() != b.sections();
    verdict(
        6,
        differ,
        &format!(
            "bounded evidence at max_len 5, max_size 6: closure(10) has {} contexts and {} \
             sections, closure(11) has {} and {}, sets {}",
            a.contexts().len(),
            a.sections().len(),
            b.contexts().len(),
            b.sections().len(),
            if differ { "differ" } else { "coincide" },
        ),
    );
    assert!(
        differ,
        "closures for bits 10 and 11 coincide at these bounds: the later generator is \
         derivable from the earlier one by two weakenings and a substitution, so the \
         closures of any two patterns with equal first set bits are equal at every bound"
    );
}

#[test]
fn criterion_07_congruence_fixture_and_quotient() {
    let (_, db, eq, bounds) = gat_uu_fixture(4).unwrap();
    let congruence = check_congruence(&db, &eq, &bounds).unwrap();
    assert!(congruence.pass(), "{congruence}");
    let regularity = check_regularity(&db, &eq, &bounds).unwrap();
    assert!(regularity.pass(), "{regularity}");

    // quotient re-checks everything and sweeps every class-related input
    // pair through every operation; Ok means zero violations.
    let q = quotient(&db, &eq, &bounds).unwrap();
    assert_eq!(q.ctx_classes.iter().map(Vec::len).sum::<usize>(), db.contexts().len());
    assert_eq!(q.sec_classes.iter().map(Vec::len).sum::<usize>(), db.sections().len());

    let diag = EqDB::diagonal(&db);
    let qd = quotient(&db, &diag, &bounds).unwrap();
    assert!(qd.ctx_classes.iter().all(|c| c.len() == 1));
    assert!(qd.sec_classes.iter().all(|c| c.len() == 1));
    verdict(7, true, "fixture congruent and regular, quotient well-defined, diagonal discrete");
}

#[test]
fn criterion_08_relation_equality_roundtrip() {
    let (_, db, eq, _) = gat_uu_fixture(4).unwrap();
    let sim = build_sim(&db, &eq);
    let simeq = build_simeq(&db, &eq);
    let eq2 = eqsets_from_relations(&db, &sim, &simeq).unwrap();
    assert_eq!(eq2, eq, "equality sets do not survive the relation roundtrip");

    let sim2 = build_sim(&db, &eq2);
    let simeq2 = build_simeq(&db, &eq2);
    assert_eq!(sim.raw_pairs(), sim2.raw_pairs());
    assert_eq!(simeq.raw_pairs(), simeq2.raw_pairs());
    verdict(8, true, "equality sets and relations convert both ways on the fixture");
}

#[test]
fn criterion_09_nameless_bind_matches_the_named_oracle() {
    const SAMPLES: usize = 500;
    let m = lambda_module().monad();
    let mut g = Gen::new(900);
    let mut done = 0;
    let mut attempts = 0;
    while done < SAMPLES {
        attempts += 1;
        assert!(attempts < TRY_CAP, "sampler starved after {done} instances");
        let n = g.index(4);
        let k = g.index(4);
        let Some(t) = g.rterm(m.as_ref(), n, 10) else { continue };
        let Some(f) = g.assignment(m.as_ref(), n, k, 8) else { continue };
        let nameless = m.bind(&f, &t).unwrap();
        let named = named_bind_oracle(&f, &t).unwrap();
        assert_eq!(nameless, named, "bind disagrees with the oracle on t = {t}, f = {f}");
        done += 1;
    }
    verdict(9, true, &format!("{SAMPLES} lambda instances agree with the substitution oracle"));
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ctxcat"))
        .args(args)
        .output()
        .expect("spawn ctxcat");
    (out.status.code().expect("exit code"), out.stdout)
}

/// Run one command twice (with distinct --out paths when `out` is set) and
/// demand byte-identical stdout and byte-identical written files.
fn assert_deterministic(dir: &Path, name: &str, args: &[&str], out: bool) {
    let mut stdouts = Vec::new();
    let mut files = Vec::new();
    for run in 0..2 {
        let path = dir.join(format!("{name}-{run}.out"));
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if out {
            full.push("--out".into());
            full.push(path.to_str().unwrap().into());
        }
        let argv: Vec<&str> = full.iter().map(String::as_str).collect();
        let (code, stdout) = run_cli(&argv);
        assert!(code == 0, "{name}: exit {code}");
        let text = String::from_utf8(stdout).unwrap();
        stdouts.push(text.replace(path.to_str().unwrap(), "<out>"));
        if out {
            files.push(std::fs::read(&path).unwrap());
        }
    }
    assert_eq!(stdouts[0], stdouts[1], "{name}: stdout differs between reruns");
    if out {
        assert_eq!(files[0], files[1], "{name}: written files differ between reruns");
    }
}

#[test]
fn criterion_10_cli_commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("lambda.sig");
    std::fs::write(&sig_path, builtin_signature("lambda").unwrap().to_source()).unwrap();

    let (gen_ctxs, gen_secs) = epsilon_db(&[true, false, true]);
    let mut gens = JudgementDB::new(option_module());
    for c in gen_ctxs {
        gens.insert_context(c).unwrap();
    }
    for s in gen_secs {
        gens.insert_section(s).unwrap();
    }
    let eps_path = dir.path().join("eps.jd");
    std::fs::write(&eps_path, render_judgements(&gens)).unwrap();

    let bounds = Bounds::new(5, 6).unwrap();
    let (closed, _) = close(
        &option_module(),
        &gens.contexts().iter().cloned().collect::<Vec<_>>(),
        &gens.sections().iter().cloned().collect::<Vec<_>>(),
        &bounds,
    )
    .unwrap();
    let closed_path = dir.path().join("closed.jd");
    std::fs::write(&closed_path, render_judgements(&closed)).unwrap();

    let (_, uu_db, uu_eq, uu_bounds) = gat_uu_fixture(2).unwrap();
    let uu_jd = dir.path().join("uu.jd");
    let uu_eqf = dir.path().join("uu.eq");
    std::fs::write(&uu_jd, render_judgements(&uu_db)).unwrap();
    std::fs::write(&uu_eqf, render_eq(&uu_eq)).unwrap();
    let uu_len = uu_bounds.max_len().to_string();
    let uu_size = uu_bounds.max_size().to_string();

    let d = dir.path();
    assert_deterministic(
        d,
        "laws",
        &["laws", "--monad", "option", "--samples", "200", "--seed", "7"],
        false,
    );
    assert_deterministic(
        d,
        "check",
        &["check", "--monad", "option", "--judgements", closed_path.to_str().unwrap(),
          "--max-len", "5", "--max-size", "6"],
        false,
    );
    assert_deterministic(
        d,
        "close",
        &["close", "--monad", "option", "--judgements", eps_path.to_str().unwrap(),
          "--max-len", "5", "--max-size", "6"],
        true,
    );
    assert_deterministic(d, "demo-epsilon", &["demo-epsilon", "10", "11"], false);
    assert_deterministic(
        d,
        "quotient",
        &["quotient", "--monad", "gat(U:type:0,U':type:0)",
          "--judgements", uu_jd.to_str().unwrap(), "--eq", uu_eqf.to_str().unwrap(),
          "--max-len", &uu_len, "--max-size", &uu_size],
        true,
    );
    assert_deterministic(
        d,
        "normalize",
        &["normalize", "--sig", sig_path.to_str().unwrap(), "--arity", "1",
          "A(L(zz. V(zz)), #1)"],
        false,
    );
    verdict(10, true, "all six commands byte-identical across reruns");
}
