//! End-to-end tests for the `ctxcat` binary: exit codes, output text,
//! and the files each command writes.

use std::path::Path;
use std::process::{Command, Output};

use ctxcat::congruence::EqDB;
use ctxcat::files::{render_eq, render_judgements};
use ctxcat::syntax::builtin_signature;
use ctxcat::subsystem::{close, Bounds, JudgementDB};
use ctxcat::testkit::gat_uu_fixture;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctxcat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ctxcat")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).expect("write fixture");
}

#[test]
fn laws_pass_on_option_and_rerun_is_identical() {
    let args = ["laws", "--monad", "option", "--samples", "200", "--seed", "7"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("law monad-1: pass"), "got:\n{text}");
    assert!(text.contains("law module-2: pass"), "got:\n{text}");
    assert!(text.ends_with("result: pass\n"), "got:\n{text}");
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn laws_fail_on_broken_bind_with_counterexample() {
    let out = run(&["laws", "--monad", "broken-bind", "--samples", "50", "--seed", "3"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("law monad-3: FAIL"), "got:\n{text}");
    assert!(text.contains("counterexample:"), "got:\n{text}");
    assert!(text.ends_with("result: FAIL\n"), "got:\n{text}");
}

#[test]
fn laws_accept_a_signature_file() {
    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("lambda.sig");
    write(&sig_path, &builtin_signature("lambda").unwrap().to_source());
    let out = run(&[
        "laws",
        "--sig",
        sig_path.to_str().unwrap(),
        "--samples",
        "60",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).ends_with("result: pass\n"));
}

#[test]
fn laws_reject_unknown_monads_as_usage_errors() {
    let out = run(&["laws", "--monad", "no-such-monad"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no-such-monad"));
}

#[test]
fn selector_is_required_and_exclusive() {
    let none = run(&["laws"]);
    assert_eq!(code(&none), 2);
    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("x.sig");
    write(&sig_path, &builtin_signature("lambda").unwrap().to_source());
    let both = run(&["laws", "--monad", "option", "--sig", sig_path.to_str().unwrap()]);
    assert_eq!(code(&both), 2);
}

fn epsilon_101_generators() -> String {
    let mut lines = vec![
        "ctx: *".to_string(),
        "ctx: * ; #1".to_string(),
        "ctx: * ; #1 ; #2".to_string(),
        "ctx: * ; #1 ; #2 ; #3".to_string(),
    ];
    lines.push("typing: * ; #1 |- #2 : *".to_string());
    lines.push("typing: * ; #1 ; #2 ; #3 |- #4 : *".to_string());
    lines.join("\n") + "\n"
}

#[test]
fn check_passes_on_a_closed_database() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.jd");
    let closed = dir.path().join("closed.jd");
    write(&gens, &epsilon_101_generators());
    let close_out = run(&[
        "close",
        "--monad",
        "option",
        "--judgements",
        gens.to_str().unwrap(),
        "--max-len",
        "4",
        "--max-size",
        "5",
        "--out",
        closed.to_str().unwrap(),
    ]);
    assert_eq!(code(&close_out), 0, "stderr: {}", stderr(&close_out));

    let check_out = run(&[
        "check",
        "--monad",
        "option",
        "--judgements",
        closed.to_str().unwrap(),
        "--max-len",
        "4",
        "--max-size",
        "5",
    ]);
    assert_eq!(code(&check_out), 0, "stdout:\n{}", stdout(&check_out));
    let text = stdout(&check_out);
    assert!(text.contains("subsystem: pass"), "got:\n{text}");
    assert!(text.ends_with("result: pass\n"), "got:\n{text}");
}

#[test]
fn check_reports_a_deleted_conclusion_with_its_rule() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.jd");
    let closed = dir.path().join("closed.jd");
    write(&gens, &epsilon_101_generators());
    run(&[
        "close",
        "--monad",
        "option",
        "--judgements",
        gens.to_str().unwrap(),
        "--max-len",
        "4",
        "--max-size",
        "5",
        "--out",
        closed.to_str().unwrap(),
    ]);

    let text = std::fs::read_to_string(&closed).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let last_typing = lines
        .iter()
        .rposition(|l| l.starts_with("typing:"))
        .expect("closure has sections");
    lines.remove(last_typing);
    let damaged = dir.path().join("damaged.jd");
    write(&damaged, &(lines.join("\n") + "\n"));

    let out = run(&[
        "check",
        "--monad",
        "option",
        "--judgements",
        damaged.to_str().unwrap(),
        "--max-len",
        "4",
        "--max-size",
        "5",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("RULE "), "got:\n{text}");
    assert!(text.contains("MISSING"), "got:\n{text}");
    assert!(text.ends_with("result: FAIL\n"), "got:\n{text}");
}

#[test]
fn check_rejects_malformed_judgement_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jd");
    write(&bad, "typing: this is not a judgement\n");
    let out = run(&["check", "--monad", "option", "--judgements", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn check_rejects_missing_files() {
    let out = run(&[
        "check",
        "--monad",
        "option",
        "--judgements",
        "/nonexistent/path.jd",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn check_flags_broken_symmetry_in_an_eq_file() {
    let (_md, db, _eq, bounds) = gat_uu_fixture(2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let jd = dir.path().join("uu.jd");
    let eq = dir.path().join("uu.eq");
    write(&jd, &render_judgements(&db));
    write(&eq, "typeeq: <empty> |- U = U'\n");

    let out = run(&[
        "check",
        "--monad",
        "gat(U:type:0,U':type:0)",
        "--judgements",
        jd.to_str().unwrap(),
        "--eq",
        eq.to_str().unwrap(),
        "--max-len",
        &bounds.max_len().to_string(),
        "--max-size",
        &bounds.max_size().to_string(),
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("RULE 2c"), "got:\n{text}");
    assert!(text.contains("congruence: FAIL"), "got:\n{text}");
}

#[test]
fn close_of_no_generators_is_the_empty_context_alone() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("none.jd");
    let out_path = dir.path().join("closed.jd");
    write(&gens, "");
    let out = run(&[
        "close",
        "--monad",
        "option",
        "--judgements",
        gens.to_str().unwrap(),
        "--max-len",
        "3",
        "--max-size",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("fixpoint: true"), "got:\n{text}");
    assert!(text.contains("contexts: 1"), "got:\n{text}");
    assert!(text.contains("sections: 0"), "got:\n{text}");
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), "ctx: <empty>\n");
}

#[test]
fn close_rerun_writes_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.jd");
    write(&gens, &epsilon_101_generators());
    let a = dir.path().join("a.jd");
    let b = dir.path().join("b.jd");
    let mut outs = Vec::new();
    for path in [&a, &b] {
        outs.push(run(&[
            "close",
            "--monad",
            "option",
            "--judgements",
            gens.to_str().unwrap(),
            "--max-len",
            "5",
            "--max-size",
            "6",
            "--out",
            path.to_str().unwrap(),
        ]));
    }
    assert_eq!(code(&outs[0]), 0);
    let first = stdout(&outs[0]);
    let second = stdout(&outs[1]);
    let first = first.replace(a.to_str().unwrap(), "<out>");
    let second = second.replace(b.to_str().unwrap(), "<out>");
    assert_eq!(first, second);
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "closure files must be byte identical"
    );
}

#[test]
fn close_matches_the_library_and_its_output_reparses() {
    let (_md, db, _eq, bounds) = gat_uu_fixture(2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.jd");
    let out_path = dir.path().join("closed.jd");
    write(&gens, &render_judgements(&db));
    let out = run(&[
        "close",
        "--monad",
        "gat(U:type:0,U':type:0)",
        "--judgements",
        gens.to_str().unwrap(),
        "--max-len",
        &bounds.max_len().to_string(),
        "--max-size",
        &bounds.max_size().to_string(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), render_judgements(&db));
}

#[test]
fn demo_epsilon_separates_one_from_zero_within_small_bounds() {
    let out = run(&["demo-epsilon", "1", "0", "--max-len", "3", "--max-size", "4"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("symmetric difference: 0 contexts, 6 sections"), "got:\n{text}");
    assert!(
        text.contains("first difference: only in closure 1: typing: * ; #1 ; #1 |- #2 : *"),
        "got:\n{text}"
    );
    assert!(text.contains("note: bounded evidence, not a proof"), "got:\n{text}");
}

#[test]
fn demo_epsilon_of_equal_patterns_reports_no_difference() {
    let out = run(&["demo-epsilon", "101", "101", "--max-len", "4", "--max-size", "5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("symmetric difference: 0 contexts, 0 sections"), "got:\n{text}");
    assert!(text.contains("first difference: none"), "got:\n{text}");
}

#[test]
fn demo_epsilon_rejects_non_binary_patterns() {
    let out = run(&["demo-epsilon", "12", "0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error:"));
}

fn uu_fixture_files(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf, Bounds) {
    let (_md, db, eq, bounds) = gat_uu_fixture(2).unwrap();
    let jd = dir.join("uu.jd");
    let eqf = dir.join("uu.eq");
    write(&jd, &render_judgements(&db));
    write(&eqf, &render_eq(&eq));
    (jd, eqf, bounds)
}

#[test]
fn quotient_merges_the_two_universes() {
    let dir = tempfile::tempdir().unwrap();
    let (jd, eqf, bounds) = uu_fixture_files(dir.path());
    let out_path = dir.path().join("q.txt");
    let out = run(&[
        "quotient",
        "--monad",
        "gat(U:type:0,U':type:0)",
        "--judgements",
        jd.to_str().unwrap(),
        "--eq",
        eqf.to_str().unwrap(),
        "--max-len",
        &bounds.max_len().to_string(),
        "--max-size",
        &bounds.max_size().to_string(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stdout:\n{}stderr: {}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("ctx classes: 3"), "got:\n{text}");
    assert!(text.contains("sec classes: 3"), "got:\n{text}");
    let report = std::fs::read_to_string(&out_path).unwrap();
    assert!(report.contains(": U ~ U'"), "got:\n{report}");
    let merged = report
        .lines()
        .find(|l| l.contains(": U ~ U'"))
        .unwrap();
    let rep = merged.split(": ").nth(1).unwrap().split(" ~ ").next().unwrap();
    assert_eq!(rep, "U", "class representative must be the lexicographic least member");
}

#[test]
fn quotient_of_the_diagonal_keeps_every_class_a_singleton() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.jd");
    let closed = dir.path().join("closed.jd");
    write(&gens, &epsilon_101_generators());
    run(&[
        "close",
        "--monad",
        "option",
        "--judgements",
        gens.to_str().unwrap(),
        "--max-len",
        "4",
        "--max-size",
        "5",
        "--out",
        closed.to_str().unwrap(),
    ]);

    let monad = ctxcat::builtin::self_module(ctxcat::builtin::builtin_monad("option").unwrap());
    let parsed =
        ctxcat::files::parse_judgement_file(monad.as_ref(), &std::fs::read_to_string(&closed).unwrap())
            .unwrap();
    let mut db = JudgementDB::new(monad.clone());
    for c in parsed.contexts {
        db.insert_context(c).unwrap();
    }
    for s in parsed.sections {
        db.insert_section(s).unwrap();
    }
    let n_ctx = db.contexts().len();
    let n_sec = db.sections().len();
    let eqf = dir.path().join("diag.eq");
    write(&eqf, &render_eq(&EqDB::diagonal(&db)));

    let out_path = dir.path().join("q.txt");
    let out = run(&[
        "quotient",
        "--monad",
        "option",
        "--judgements",
        closed.to_str().unwrap(),
        "--eq",
        eqf.to_str().unwrap(),
        "--max-len",
        "4",
        "--max-size",
        "5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stdout:\n{}stderr: {}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.contains(&format!("ctx classes: {n_ctx}")), "got:\n{text}");
    assert!(text.contains(&format!("sec classes: {n_sec}")), "got:\n{text}");
    let report = std::fs::read_to_string(&out_path).unwrap();
    for line in report.lines().filter(|l| l.starts_with("ctx-class") || l.starts_with("sec-class")) {
        assert!(!line.contains(" ~ "), "diagonal class must be a singleton: {line}");
    }
}

#[test]
fn quotient_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (jd, eqf, bounds) = uu_fixture_files(dir.path());
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for path in [&a, &b] {
        let out = run(&[
            "quotient",
            "--monad",
            "gat(U:type:0,U':type:0)",
            "--judgements",
            jd.to_str().unwrap(),
            "--eq",
            eqf.to_str().unwrap(),
            "--max-len",
            &bounds.max_len().to_string(),
            "--max-size",
            &bounds.max_size().to_string(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn quotient_refuses_to_write_when_checks_fail() {
    let dir = tempfile::tempdir().unwrap();
    let (jd, _eqf, bounds) = uu_fixture_files(dir.path());
    let broken_eq = dir.path().join("broken.eq");
    write(&broken_eq, "typeeq: <empty> |- U = U'\n");
    let out_path = dir.path().join("q.txt");
    let out = run(&[
        "quotient",
        "--monad",
        "gat(U:type:0,U':type:0)",
        "--judgements",
        jd.to_str().unwrap(),
        "--eq",
        broken_eq.to_str().unwrap(),
        "--max-len",
        &bounds.max_len().to_string(),
        "--max-size",
        &bounds.max_size().to_string(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("result: FAIL"));
    assert!(!out_path.exists(), "no quotient file may be written after failed checks");
}

#[test]
fn normalize_canonicalizes_binder_names_and_is_idempotent() {
    let out = run(&[
        "normalize",
        "--sig",
        "",
        "A(L(zz. V(zz)), #1)",
    ]);
    // empty --sig path is a usage error, exercised here to pin exit 2
    assert_eq!(code(&out), 2);

    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("lambda.sig");
    write(&sig_path, &builtin_signature("lambda").unwrap().to_source());
    let args = [
        "normalize",
        "--sig",
        sig_path.to_str().unwrap(),
        "--arity",
        "1",
        "A(L(zz. V(zz)), #1)",
    ];
    let out = run(&args);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "A(L(x1. V(x1)), #1)\n");

    let again = run(&[
        "normalize",
        "--sig",
        sig_path.to_str().unwrap(),
        "--arity",
        "1",
        "A(L(x1. V(x1)), #1)",
    ]);
    assert_eq!(stdout(&again), "A(L(x1. V(x1)), #1)\n");
}

#[test]
fn normalize_rejects_unbound_variables() {
    let out = run(&["normalize", "--monad", "option", "--arity", "0", "#1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error:"));
}

fn close_matches_epsilon_db_generators() -> (Bounds, usize, usize) {
    let bounds = Bounds::new(5, 6).unwrap();
    let (ctxs, secs) = ctxcat::subsystem::epsilon_db(&[true, false, true]);
    let monad = ctxcat::builtin::self_module(ctxcat::builtin::builtin_monad("option").unwrap());
    let (db, _fix) = close(&monad, &ctxs, &secs, &bounds).unwrap();
    (bounds, db.contexts().len(), db.sections().len())
}

#[test]
fn close_via_cli_agrees_with_the_library_closure() {
    let (bounds, n_ctx, n_sec) = close_matches_epsilon_db_generators();
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("gens.jd");
    write(&gens, &epsilon_101_generators());
    let out_path = dir.path().join("closed.jd");
    let out = run(&[
        "close",
        "--monad",
        "option",
        "--judgements",
        gens.to_str().unwrap(),
        "--max-len",
        &bounds.max_len().to_string(),
        "--max-size",
        &bounds.max_size().to_string(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains(&format!("contexts: {n_ctx}")), "got:\n{text}");
    assert!(text.contains(&format!("sections: {n_sec}")), "got:\n{text}");
}
