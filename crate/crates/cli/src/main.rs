//! Batch front end for the ctxcat kernel: law suites, subsystem and
//! congruence checking, bounded closure, quotients, and term normalization.
//!
//! Exit codes: 0 on pass, 1 when a check finds violations, 2 on usage,
//! parse, or io errors. All output is deterministic for fixed inputs and
//! seed, one record per line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctxcat::builtin::{broken_monad, builtin_monad, self_module};
use ctxcat::congruence::{check_congruence, check_regularity, quotient, EqDB};
use ctxcat::files::{
    parse_eq_file, parse_judgement_file, render_judgements, render_quotient, ParsedJudgements,
};
use ctxcat::laws::run_law_suite;
use ctxcat::monad::ModuleSpec;
use ctxcat::parse::parse_signature;
use ctxcat::sigmonad::sig_module;
use ctxcat::subsystem::{check_subsystem, close, epsilon_db, Bounds, JudgementDB};
use ctxcat::syntax::builtin_signature;

#[derive(Parser)]
#[command(name = "ctxcat", version, about = "Contextual categories from term monads")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Where the monad and module come from: a builtin name or a signature file.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Selector {
    /// Builtin monad or signature name (identity, point, option, broken-bind,
    /// lambda, mltt72, mltt72(N), gat(...))
    #[arg(long)]
    monad: Option<String>,

    /// Path to a nominal signature file
    #[arg(long)]
    sig: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Maximum context length (default: inferred from the input files)
    #[arg(long)]
    max_len: Option<usize>,

    /// Maximum term/type size (default: inferred from the input files)
    #[arg(long)]
    max_size: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the monad, module, and simplicial law suites
    Laws {
        #[command(flatten)]
        sel: Selector,
        /// Random instances per law
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Seed for the instance generator
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Check a judgement database against the subsystem conditions, and a
    /// congruence against the equality conditions when --eq is given
    Check {
        #[command(flatten)]
        sel: Selector,
        /// Judgement file to check
        #[arg(long)]
        judgements: PathBuf,
        /// Equality-judgement file to check alongside
        #[arg(long)]
        eq: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Close a generator file under the subsystem rules and write the result
    Close {
        #[command(flatten)]
        sel: Selector,
        /// Generator judgement file
        #[arg(long)]
        judgements: PathBuf,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Output path for the closed database
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the closures of two epsilon bit patterns over the option monad
    DemoEpsilon {
        /// First bit pattern, e.g. 10
        bits_a: String,
        /// Second bit pattern, e.g. 11
        bits_b: String,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Quotient a checked judgement database by a congruence
    Quotient {
        #[command(flatten)]
        sel: Selector,
        /// Judgement file to quotient
        #[arg(long)]
        judgements: PathBuf,
        /// Equality-judgement file defining the congruence
        #[arg(long)]
        eq: PathBuf,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Output path for the class tables
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a term, alpha-normalize it, and print the canonical form
    Normalize {
        #[command(flatten)]
        sel: Selector,
        /// Term source text
        term: String,
        /// Number of context variables the term may use
        #[arg(long, default_value_t = 0)]
        arity: usize,
    },
}

type CmdResult = Result<bool, String>;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Laws { sel, samples, seed } => cmd_laws(&sel, samples, seed),
        Cmd::Check { sel, judgements, eq, bounds } => cmd_check(&sel, &judgements, eq.as_deref(), &bounds),
        Cmd::Close { sel, judgements, bounds, out } => cmd_close(&sel, &judgements, &bounds, &out),
        Cmd::DemoEpsilon { bits_a, bits_b, bounds } => cmd_demo_epsilon(&bits_a, &bits_b, &bounds),
        Cmd::Quotient { sel, judgements, eq, bounds, out } => {
            cmd_quotient(&sel, &judgements, &eq, &bounds, &out)
        }
        Cmd::Normalize { sel, term, arity } => cmd_normalize(&sel, &term, arity),
    }
}

fn resolve_module(sel: &Selector) -> Result<ModuleSpec, String> {
    if let Some(name) = &sel.monad {
        return match name.as_str() {
            "identity" | "point" | "option" => {
                Ok(self_module(builtin_monad(name).map_err(|e| e.to_string())?))
            }
            "broken-bind" => Ok(self_module(broken_monad())),
            other => {
                let sig = builtin_signature(other)
                    .map_err(|_| format!("unknown monad `{other}`"))?;
                sig_module(sig).map_err(|e| e.to_string())
            }
        };
    }
    let path = sel.sig.as_ref().expect("clap enforces one selector");
    let src = read(path)?;
    let sig = parse_signature(&src).map_err(|e| format!("{}: {e}", path.display()))?;
    sig_module(sig).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_judgements(md: &ModuleSpec, path: &Path) -> Result<ParsedJudgements, String> {
    let src = read(path)?;
    parse_judgement_file(md.as_ref(), &src).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_eq(md: &ModuleSpec, path: &Path) -> Result<EqDB, String> {
    let src = read(path)?;
    parse_eq_file(md.as_ref(), &src).map_err(|e| format!("{}: {e}", path.display()))
}

/// Explicit flags win; anything unspecified is inferred as the smallest
/// bound that keeps every stored element in scope.
fn resolve_bounds(args: &BoundsArgs, parsed: &ParsedJudgements, eq: Option<&EqDB>) -> Result<Bounds, String> {
    fn see_ctx(c: &ctxcat::csystem::Context, len: &mut usize, size: &mut usize) {
        *len = (*len).max(c.len());
        for e in c.entries() {
            *size = (*size).max(e.size());
        }
    }
    let mut len = 1;
    let mut size = 1;
    for c in &parsed.contexts {
        see_ctx(c, &mut len, &mut size);
    }
    for s in &parsed.sections {
        see_ctx(s.ctx(), &mut len, &mut size);
        size = size.max(s.ty().size()).max(s.tm().size());
    }
    if let Some(eq) = eq {
        for e in eq.type_eqs() {
            see_ctx(e.ctx(), &mut len, &mut size);
            size = size.max(e.lhs().size()).max(e.rhs().size());
        }
        for e in eq.term_eqs() {
            see_ctx(e.ctx(), &mut len, &mut size);
            size = size.max(e.ty().size()).max(e.lhs().size()).max(e.rhs().size());
        }
    }
    Bounds::new(args.max_len.unwrap_or(len), args.max_size.unwrap_or(size))
        .map_err(|e| e.to_string())
}

fn build_db(md: &ModuleSpec, parsed: ParsedJudgements) -> Result<JudgementDB, String> {
    let mut db = JudgementDB::new(md.clone());
    for c in parsed.contexts {
        db.insert_context(c).map_err(|e| e.to_string())?;
    }
    for s in parsed.sections {
        db.insert_section(s).map_err(|e| e.to_string())?;
    }
    Ok(db)
}

fn cmd_laws(sel: &Selector, samples: usize, seed: u64) -> CmdResult {
    let md = resolve_module(sel)?;
    let report = run_law_suite(&md, samples, seed).map_err(|e| e.to_string())?;
    println!("{report}");
    Ok(report.pass())
}

/// Subsystem check, plus the congruence and regularity checks when an
/// equality database is supplied. Prints every violation and one status
/// line per suite; returns the conjunction.
fn run_checks(db: &JudgementDB, eq: Option<&EqDB>, bounds: &Bounds) -> CmdResult {
    println!("bounds: {bounds}");
    println!("contexts: {}", db.contexts().len());
    println!("sections: {}", db.sections().len());

    let sub = check_subsystem(db, bounds).map_err(|e| e.to_string())?;
    for v in &sub.violations {
        println!("{v}");
    }
    println!("subsystem: {} ({} violations)", status(sub.pass()), sub.violations.len());
    let mut ok = sub.pass();

    if let Some(eq) = eq {
        println!("type equalities: {}", eq.type_eqs().len());
        println!("term equalities: {}", eq.term_eqs().len());
        let cong = check_congruence(db, eq, bounds).map_err(|e| e.to_string())?;
        for v in &cong.violations {
            println!("{v}");
        }
        println!("congruence: {} ({} violations)", status(cong.pass()), cong.violations.len());
        let reg = check_regularity(db, eq, bounds).map_err(|e| e.to_string())?;
        for v in &reg.violations {
            println!("{v}");
        }
        println!("regularity: {} ({} violations)", status(reg.pass()), reg.violations.len());
        ok = ok && cong.pass() && reg.pass();
    }

    println!("result: {}", status(ok));
    Ok(ok)
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_check(sel: &Selector, judgements: &Path, eq: Option<&Path>, bounds: &BoundsArgs) -> CmdResult {
    let md = resolve_module(sel)?;
    let parsed = load_judgements(&md, judgements)?;
    let eqdb = eq.map(|p| load_eq(&md, p)).transpose()?;
    let bounds = resolve_bounds(bounds, &parsed, eqdb.as_ref())?;
    let db = build_db(&md, parsed)?;
    run_checks(&db, eqdb.as_ref(), &bounds)
}

fn cmd_close(sel: &Selector, judgements: &Path, bounds: &BoundsArgs, out: &Path) -> CmdResult {
    let md = resolve_module(sel)?;
    let parsed = load_judgements(&md, judgements)?;
    let bounds = resolve_bounds(bounds, &parsed, None)?;
    let (db, fixpoint) =
        close(&md, &parsed.contexts, &parsed.sections, &bounds).map_err(|e| e.to_string())?;
    write_file(out, &render_judgements(&db))?;
    println!("bounds: {bounds}");
    println!("fixpoint: {fixpoint}");
    println!("contexts: {}", db.contexts().len());
    println!("sections: {}", db.sections().len());
    println!("wrote: {}", out.display());
    Ok(true)
}

fn parse_bits(s: &str) -> Result<Vec<bool>, String> {
    if s.is_empty() {
        return Err("bit pattern must be nonempty".into());
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("bit patterns use 0 and 1, got `{other}`")),
        })
        .collect()
}

fn cmd_demo_epsilon(bits_a: &str, bits_b: &str, bounds: &BoundsArgs) -> CmdResult {
    let a = parse_bits(bits_a)?;
    let b = parse_bits(bits_b)?;
    let bounds = Bounds::new(bounds.max_len.unwrap_or(5), bounds.max_size.unwrap_or(6))
        .map_err(|e| e.to_string())?;
    let md = self_module(builtin_monad("option").map_err(|e| e.to_string())?);

    let close_bits = |bits: &[bool]| -> Result<JudgementDB, String> {
        let (ctxs, secs) = epsilon_db(bits);
        close(&md, &ctxs, &secs, &bounds)
            .map(|(db, _)| db)
            .map_err(|e| e.to_string())
    };
    let da = close_bits(&a)?;
    let db = close_bits(&b)?;

    println!("monad: option");
    println!("bounds: {bounds}");
    println!("closure {bits_a}: {} contexts, {} sections", da.contexts().len(), da.sections().len());
    println!("closure {bits_b}: {} contexts, {} sections", db.contexts().len(), db.sections().len());

    // The first difference is the smallest rendered line among all one-sided
    // elements, contexts before sections.
    let mut diff_ctx = 0usize;
    let mut diff_sec = 0usize;
    let mut first: Option<String> = None;
    let mut note = |line: String, count: &mut usize| {
        *count += 1;
        if first.as_ref().is_none_or(|f| line < *f) {
            first = Some(line);
        }
    };
    for (ours, theirs, tag) in [(&da, &db, bits_a), (&db, &da, bits_b)] {
        for c in ours.contexts().difference(theirs.contexts()) {
            note(format!("only in closure {tag}: ctx: {c}"), &mut diff_ctx);
        }
    }
    let mut first_sec: Option<String> = None;
    for (ours, theirs, tag) in [(&da, &db, bits_a), (&db, &da, bits_b)] {
        for s in ours.sections().difference(theirs.sections()) {
            diff_sec += 1;
            let line = format!("only in closure {tag}: typing: {s}");
            if first_sec.as_ref().is_none_or(|f| line < *f) {
                first_sec = Some(line);
            }
        }
    }
    println!("symmetric difference: {diff_ctx} contexts, {diff_sec} sections");
    match first.or(first_sec) {
        Some(line) => println!("first difference: {line}"),
        None => println!("first difference: none"),
    }
    println!("note: bounded evidence, not a proof");
    Ok(true)
}

fn cmd_quotient(sel: &Selector, judgements: &Path, eq: &Path, bounds: &BoundsArgs, out: &Path) -> CmdResult {
    let md = resolve_module(sel)?;
    let parsed = load_judgements(&md, judgements)?;
    let eqdb = load_eq(&md, eq)?;
    let bounds = resolve_bounds(bounds, &parsed, Some(&eqdb))?;
    let db = build_db(&md, parsed)?;
    if !run_checks(&db, Some(&eqdb), &bounds)? {
        return Ok(false);
    }
    let q = quotient(&db, &eqdb, &bounds).map_err(|e| e.to_string())?;
    write_file(out, &render_quotient(&q))?;
    println!("ctx classes: {}", q.ctx_classes.len());
    println!("sec classes: {}", q.sec_classes.len());
    println!("wrote: {}", out.display());
    Ok(true)
}

fn cmd_normalize(sel: &Selector, term: &str, arity: usize) -> CmdResult {
    let md = resolve_module(sel)?;
    let t = md.monad().parse_term(term, arity, 1).map_err(|e| e.to_string())?;
    println!("{t}");
    Ok(true)
}
