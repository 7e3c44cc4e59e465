//! Nominal signatures and their terms.
//!
//! A signature has one name sort plus a finite family of data sorts; compound
//! sorts are built from the unit sort, the name sort, data sorts, left
//! associated pairing and name abstraction. Each operation takes one compound
//! sort to a data sort. Terms are kept alpha-normal: binders are nameless and
//! bound occurrences are de Bruijn indices, so alpha classes compare by plain
//! structural equality. `RawTerm` is the named surface form produced by the
//! parser; `alpha_normalize` converts it down.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Compound sort expression. Pairing is left associated: (A, B, C) is
/// Pair(Pair(A, B), C).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompoundSort {
    Unit,
    Var,
    Data(String),
    Pair(Box<CompoundSort>, Box<CompoundSort>),
    Abs(Box<CompoundSort>),
}

impl CompoundSort {
    pub fn pair(a: CompoundSort, b: CompoundSort) -> CompoundSort {
        CompoundSort::Pair(Box::new(a), Box::new(b))
    }

    pub fn abs(s: CompoundSort) -> CompoundSort {
        CompoundSort::Abs(Box::new(s))
    }

    pub fn data(name: &str) -> CompoundSort {
        CompoundSort::Data(name.to_string())
    }

    /// Left-fold a nonempty list into a tuple sort.
    pub fn tuple(parts: Vec<CompoundSort>) -> CompoundSort {
        let mut it = parts.into_iter();
        let first = it.next().expect("tuple of at least one sort");
        it.fold(first, CompoundSort::pair)
    }

    /// The left spine of the tuple structure, used when flattening an
    /// operation's arguments into a comma list.
    pub fn spine(&self) -> Vec<&CompoundSort> {
        let mut out = Vec::new();
        fn walk<'a>(s: &'a CompoundSort, out: &mut Vec<&'a CompoundSort>) {
            if let CompoundSort::Pair(a, b) = s {
                walk(a, out);
                out.push(b);
            } else {
                out.push(s);
            }
        }
        walk(self, &mut out);
        out
    }

    fn render(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompoundSort::Unit => write!(f, "1"),
            CompoundSort::Var => write!(f, "Var"),
            CompoundSort::Data(d) => write!(f, "{d}"),
            CompoundSort::Pair(..) => {
                write!(f, "(")?;
                for (i, part) in self.spine().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    part.render(f)?;
                }
                write!(f, ")")
            }
            CompoundSort::Abs(s) => {
                write!(f, "Var.")?;
                s.render(f)
            }
        }
    }
}

impl fmt::Display for CompoundSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    pub arg: CompoundSort,
    pub result: String,
}

/// A nominal signature: data sorts, the distinguished term sort, the subset
/// of sorts used as types, per-sort parameter constants and the operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub sorts: Vec<String>,
    pub term_sort: String,
    pub type_sorts: Vec<String>,
    /// Parameter constants per data sort (never for the term sort).
    pub params: BTreeMap<String, Vec<String>>,
    pub ops: Vec<OpDecl>,
    /// Builtin tag, if this came from `builtin_signature`.
    pub tag: Option<String>,
}

impl Signature {
    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|o| o.name == name)
    }

    pub fn param_sort(&self, name: &str) -> Option<&str> {
        for (sort, names) in &self.params {
            if names.iter().any(|n| n == name) {
                return Some(sort);
            }
        }
        None
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s == name)
    }

    /// Structural well-formedness of the signature itself.
    pub fn validate(&self) -> Result<()> {
        if self.sorts.is_empty() {
            return Err(Error::Invalid("signature declares no sorts".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.sorts {
            if s == "Var" || s == "1" {
                return Err(Error::Invalid(format!("`{s}` cannot be a data sort name")));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::Invalid(format!("duplicate sort `{s}`")));
            }
        }
        if !self.has_sort(&self.term_sort) {
            return Err(Error::UnknownSort(self.term_sort.clone()));
        }
        for t in &self.type_sorts {
            if !self.has_sort(t) {
                return Err(Error::UnknownSort(t.clone()));
            }
        }
        let mut names = BTreeSet::new();
        for op in &self.ops {
            if !names.insert(op.name.clone()) {
                return Err(Error::Invalid(format!("duplicate operation `{}`", op.name)));
            }
            if !self.has_sort(&op.result) {
                return Err(Error::UnknownSort(op.result.clone()));
            }
            self.check_sort_expr(&op.arg)?;
        }
        for (sort, params) in &self.params {
            if !self.has_sort(sort) {
                return Err(Error::UnknownSort(sort.clone()));
            }
            if *sort == self.term_sort {
                return Err(Error::Invalid(format!(
                    "parameters are not allowed at the term sort `{sort}`"
                )));
            }
            for p in params {
                // Parameter names double as leaf tokens in the term grammar,
                // so they must not collide with operations or each other.
                if !names.insert(p.clone()) {
                    return Err(Error::Invalid(format!("parameter name `{p}` is not unique")));
                }
            }
        }
        Ok(())
    }

    fn check_sort_expr(&self, s: &CompoundSort) -> Result<()> {
        match s {
            CompoundSort::Unit | CompoundSort::Var => Ok(()),
            CompoundSort::Data(d) => {
                if self.has_sort(d) {
                    Ok(())
                } else {
                    Err(Error::UnknownSort(d.clone()))
                }
            }
            CompoundSort::Pair(a, b) => {
                self.check_sort_expr(a)?;
                self.check_sort_expr(b)
            }
            CompoundSort::Abs(inner) => self.check_sort_expr(inner),
        }
    }

    /// Canonical source text; reparsing it yields an equal signature. Also
    /// serves as the identity key when comparing base monads of modules.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("sorts: {}\n", self.sorts.join(" ")));
        out.push_str(&format!("term_sort: {}\n", self.term_sort));
        if !self.type_sorts.is_empty() {
            out.push_str(&format!("type_sorts: {}\n", self.type_sorts.join(" ")));
        }
        for (sort, params) in &self.params {
            if !params.is_empty() {
                out.push_str(&format!("param {} : {}\n", sort, params.join(" ")));
            }
        }
        for op in &self.ops {
            out.push_str(&format!("op {} : {} -> {}\n", op.name, op.arg, op.result));
        }
        out
    }

    /// Full check of a term against a compound sort: tree shape, declared
    /// operations, free variables within 1..=arity, no dangling bound index.
    pub fn check_term(&self, t: &NTerm, sort: &CompoundSort, arity: usize, depth: usize) -> Result<()> {
        match (t, sort) {
            (NTerm::Unit, CompoundSort::Unit) => Ok(()),
            (NTerm::Bound(i), CompoundSort::Var) => {
                if *i < depth {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!(
                        "dangling bound index {i} at binder depth {depth}"
                    )))
                }
            }
            (NTerm::FreeVar(i), CompoundSort::Data(d)) => {
                if *d != self.term_sort {
                    return Err(Error::SortMismatch {
                        expected: d.clone(),
                        found: self.term_sort.clone(),
                    });
                }
                if *i >= 1 && *i <= arity {
                    Ok(())
                } else {
                    Err(Error::IndexOutOfRange { index: *i, arity })
                }
            }
            (NTerm::Param(p, s), CompoundSort::Data(d)) => {
                if s != d {
                    return Err(Error::SortMismatch {
                        expected: d.clone(),
                        found: s.clone(),
                    });
                }
                match self.param_sort(p) {
                    Some(ps) if ps == d => Ok(()),
                    _ => Err(Error::Invalid(format!("`{p}` is not a parameter of sort `{d}`"))),
                }
            }
            (NTerm::Op(name, arg), CompoundSort::Data(d)) => {
                let decl = self
                    .op(name)
                    .ok_or_else(|| Error::Invalid(format!("unknown operation `{name}`")))?;
                if decl.result != *d {
                    return Err(Error::SortMismatch {
                        expected: d.clone(),
                        found: decl.result.clone(),
                    });
                }
                self.check_term(arg, &decl.arg, arity, depth)
            }
            (NTerm::PairT(a, b), CompoundSort::Pair(sa, sb)) => {
                self.check_term(a, sa, arity, depth)?;
                self.check_term(b, sb, arity, depth)
            }
            (NTerm::Abs(body), CompoundSort::Abs(inner)) => {
                self.check_term(body, inner, arity, depth + 1)
            }
            _ => Err(Error::SortMismatch {
                expected: sort.to_string(),
                found: t.shape_name().to_string(),
            }),
        }
    }
}

/// Alpha-normal term: nameless binders, bound occurrences as de Bruijn
/// indices (0 = innermost enclosing binder). Free context variables are
/// 1-based `FreeVar` leaves of the term sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NTerm {
    Op(String, Box<NTerm>),
    FreeVar(usize),
    Param(String, String),
    Bound(usize),
    Unit,
    PairT(Box<NTerm>, Box<NTerm>),
    Abs(Box<NTerm>),
}

impl NTerm {
    pub fn op(name: &str, arg: NTerm) -> NTerm {
        NTerm::Op(name.to_string(), Box::new(arg))
    }

    pub fn pair(a: NTerm, b: NTerm) -> NTerm {
        NTerm::PairT(Box::new(a), Box::new(b))
    }

    pub fn abs(body: NTerm) -> NTerm {
        NTerm::Abs(Box::new(body))
    }

    pub fn size(&self) -> usize {
        match self {
            NTerm::FreeVar(_) | NTerm::Param(..) | NTerm::Bound(_) | NTerm::Unit => 1,
            NTerm::Op(_, arg) => 1 + arg.size(),
            NTerm::PairT(a, b) => 1 + a.size() + b.size(),
            NTerm::Abs(body) => 1 + body.size(),
        }
    }

    pub fn free_vars(&self, acc: &mut BTreeSet<usize>) {
        match self {
            NTerm::FreeVar(i) => {
                acc.insert(*i);
            }
            NTerm::Op(_, arg) | NTerm::Abs(arg) => arg.free_vars(acc),
            NTerm::PairT(a, b) => {
                a.free_vars(acc);
                b.free_vars(acc);
            }
            NTerm::Param(..) | NTerm::Bound(_) | NTerm::Unit => {}
        }
    }

    /// Replace every `FreeVar(i)` leaf with `comps[i-1]`. Substituted terms
    /// carry no dangling bound index, so no shifting is involved; the bind
    /// tests pin this down against a named-substitution oracle.
    pub fn graft(&self, comps: &[NTerm]) -> Result<NTerm> {
        Ok(match self {
            NTerm::FreeVar(i) => {
                let t = comps.get(*i - 1).ok_or(Error::IndexOutOfRange {
                    index: *i,
                    arity: comps.len(),
                })?;
                t.clone()
            }
            NTerm::Op(name, arg) => NTerm::Op(name.clone(), Box::new(arg.graft(comps)?)),
            NTerm::Abs(body) => NTerm::Abs(Box::new(body.graft(comps)?)),
            NTerm::PairT(a, b) => NTerm::pair(a.graft(comps)?, b.graft(comps)?),
            NTerm::Param(..) | NTerm::Bound(_) | NTerm::Unit => self.clone(),
        })
    }

    /// Renumber free variables through `map` (1-based: i goes to map[i-1]).
    pub fn rename(&self, map: &[usize]) -> Result<NTerm> {
        Ok(match self {
            NTerm::FreeVar(i) => {
                let j = map.get(*i - 1).ok_or(Error::IndexOutOfRange {
                    index: *i,
                    arity: map.len(),
                })?;
                NTerm::FreeVar(*j)
            }
            NTerm::Op(name, arg) => NTerm::Op(name.clone(), Box::new(arg.rename(map)?)),
            NTerm::Abs(body) => NTerm::Abs(Box::new(body.rename(map)?)),
            NTerm::PairT(a, b) => NTerm::pair(a.rename(map)?, b.rename(map)?),
            NTerm::Param(..) | NTerm::Bound(_) | NTerm::Unit => self.clone(),
        })
    }

    fn shape_name(&self) -> &'static str {
        match self {
            NTerm::Op(..) => "operation",
            NTerm::FreeVar(_) => "free variable",
            NTerm::Param(..) => "parameter",
            NTerm::Bound(_) => "bound name",
            NTerm::Unit => "unit",
            NTerm::PairT(..) => "pair",
            NTerm::Abs(_) => "abstraction",
        }
    }

    fn render(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        match self {
            NTerm::FreeVar(i) => write!(f, "#{i}"),
            NTerm::Param(p, _) => write!(f, "{p}"),
            NTerm::Bound(i) => {
                // Binders are displayed as x1, x2, ... by depth from the root.
                write!(f, "x{}", depth - i)
            }
            NTerm::Unit => write!(f, "()"),
            NTerm::Op(name, arg) => {
                if **arg == NTerm::Unit {
                    return write!(f, "{name}");
                }
                write!(f, "{name}(")?;
                let mut spine = Vec::new();
                arg.arg_spine(&mut spine);
                for (i, part) in spine.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    part.render(f, depth)?;
                }
                write!(f, ")")
            }
            NTerm::PairT(..) => {
                // Reached only for a pair in argument position (right-nested
                // tuple sort); rendered as a parenthesized sub-tuple.
                write!(f, "(")?;
                let mut spine = Vec::new();
                self.arg_spine(&mut spine);
                for (i, part) in spine.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    part.render(f, depth)?;
                }
                write!(f, ")")
            }
            NTerm::Abs(body) => {
                write!(f, "x{}. ", depth + 1)?;
                body.render(f, depth + 1)
            }
        }
    }

    fn arg_spine<'a>(&'a self, out: &mut Vec<&'a NTerm>) {
        if let NTerm::PairT(a, b) = self {
            a.arg_spine(out);
            out.push(b);
        } else {
            out.push(self);
        }
    }
}

impl fmt::Display for NTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f, 0)
    }
}

/// Named surface form, as produced by the term parser. Binder names are kept
/// verbatim; `alpha_normalize` resolves them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Op(String, Box<RawTerm>),
    FreeVar(usize),
    Param(String, String),
    Name(String),
    Bind(String, Box<RawTerm>),
    Unit,
    Pair(Box<RawTerm>, Box<RawTerm>),
}

impl RawTerm {
    pub fn op(name: &str, arg: RawTerm) -> RawTerm {
        RawTerm::Op(name.to_string(), Box::new(arg))
    }

    pub fn bind(name: &str, body: RawTerm) -> RawTerm {
        RawTerm::Bind(name.to_string(), Box::new(body))
    }

    pub fn pair(a: RawTerm, b: RawTerm) -> RawTerm {
        RawTerm::Pair(Box::new(a), Box::new(b))
    }
}

/// Resolve binder names to de Bruijn indices. Inner binders shadow outer
/// ones; an unbound name is an error that carries the name.
pub fn alpha_normalize(raw: &RawTerm) -> Result<NTerm> {
    fn go(raw: &RawTerm, env: &mut Vec<String>) -> Result<NTerm> {
        Ok(match raw {
            RawTerm::Op(name, arg) => NTerm::Op(name.clone(), Box::new(go(arg, env)?)),
            RawTerm::FreeVar(i) => NTerm::FreeVar(*i),
            RawTerm::Param(p, s) => NTerm::Param(p.clone(), s.clone()),
            RawTerm::Name(x) => {
                let pos = env
                    .iter()
                    .rposition(|n| n == x)
                    .ok_or_else(|| Error::UnboundName(x.clone()))?;
                NTerm::Bound(env.len() - 1 - pos)
            }
            RawTerm::Bind(x, body) => {
                env.push(x.clone());
                let b = go(body, env);
                env.pop();
                NTerm::Abs(Box::new(b?))
            }
            RawTerm::Unit => NTerm::Unit,
            RawTerm::Pair(a, b) => NTerm::pair(go(a, env)?, go(b, env)?),
        })
    }
    go(raw, &mut Vec::new())
}

/// Builtin signature table. Accepts `lambda`, `mltt72`, `mltt72(N)` and
/// `gat(name:kind:degree, ...)` where kind is `term` or `type`.
pub fn builtin_signature(name: &str) -> Result<Signature> {
    use CompoundSort as S;
    let term = || S::data("Term");

    if name == "lambda" {
        let sig = Signature {
            sorts: vec!["Term".into()],
            term_sort: "Term".into(),
            type_sorts: vec!["Term".into()],
            params: BTreeMap::new(),
            ops: vec![
                OpDecl { name: "V".into(), arg: S::Var, result: "Term".into() },
                OpDecl { name: "L".into(), arg: S::abs(term()), result: "Term".into() },
                OpDecl { name: "A".into(), arg: S::pair(term(), term()), result: "Term".into() },
            ],
            tag: Some("lambda".into()),
        };
        sig.validate()?;
        return Ok(sig);
    }

    if name == "mltt72" || (name.starts_with("mltt72(") && name.ends_with(')')) {
        let bound: usize = if name == "mltt72" {
            2
        } else {
            name["mltt72(".len()..name.len() - 1]
                .parse()
                .map_err(|_| Error::UnknownSignature(name.to_string()))?
        };
        return mltt72_signature(bound);
    }

    if name.starts_with("gat(") && name.ends_with(')') {
        return gat_signature(&name["gat(".len()..name.len() - 1], name);
    }

    Err(Error::UnknownSignature(name.to_string()))
}

fn mltt72_signature(bound: usize) -> Result<Signature> {
    use CompoundSort as S;
    let term = || S::data("Term");
    let fam = || S::abs(term()); // the Var.Term family argument
    let mut ops = vec![
        OpDecl { name: "v".into(), arg: S::Var, result: "Term".into() },
        OpDecl { name: "Pi".into(), arg: S::tuple(vec![term(), fam()]), result: "Term".into() },
        OpDecl { name: "lam".into(), arg: S::tuple(vec![term(), fam()]), result: "Term".into() },
        OpDecl { name: "app".into(), arg: S::tuple(vec![term(), term()]), result: "Term".into() },
        OpDecl { name: "Sigma".into(), arg: S::tuple(vec![term(), fam()]), result: "Term".into() },
        OpDecl { name: "pair".into(), arg: S::tuple(vec![term(), term()]), result: "Term".into() },
        // Eliminators take an extra Var.Term family component, appended last.
        OpDecl {
            name: "E".into(),
            arg: S::tuple(vec![term(), S::abs(S::abs(term())), fam()]),
            result: "Term".into(),
        },
        OpDecl { name: "plus".into(), arg: S::tuple(vec![term(), term()]), result: "Term".into() },
        OpDecl { name: "i".into(), arg: term(), result: "Term".into() },
        OpDecl { name: "j".into(), arg: term(), result: "Term".into() },
        OpDecl {
            name: "D".into(),
            arg: S::tuple(vec![term(), fam(), fam(), fam()]),
            result: "Term".into(),
        },
        OpDecl { name: "V".into(), arg: S::Unit, result: "Term".into() },
    ];
    for n in 0..=bound {
        ops.push(OpDecl {
            name: format!("N_{n}"),
            arg: S::Unit,
            result: "Term".into(),
        });
        for i in 1..=n {
            ops.push(OpDecl {
                name: format!("i{i}_{n}"),
                arg: S::Unit,
                result: "Term".into(),
            });
        }
        // Finite-type eliminator: flat tuple of 2n+1 Term arguments plus the
        // family argument.
        let mut parts: Vec<CompoundSort> = (0..2 * n + 1).map(|_| term()).collect();
        parts.push(fam());
        ops.push(OpDecl {
            name: format!("R_{n}"),
            arg: S::tuple(parts),
            result: "Term".into(),
        });
    }
    ops.push(OpDecl { name: "N".into(), arg: S::Unit, result: "Term".into() });
    ops.push(OpDecl { name: "zero".into(), arg: S::Unit, result: "Term".into() });
    ops.push(OpDecl { name: "s".into(), arg: term(), result: "Term".into() });
    ops.push(OpDecl {
        name: "R".into(),
        arg: S::tuple(vec![term(), term(), S::abs(S::abs(term())), fam()]),
        result: "Term".into(),
    });

    let sig = Signature {
        sorts: vec!["Term".into()],
        term_sort: "Term".into(),
        type_sorts: vec!["Term".into()],
        params: BTreeMap::new(),
        ops,
        tag: Some(if bound == 2 {
            "mltt72".into()
        } else {
            format!("mltt72({bound})")
        }),
    };
    sig.validate()?;
    Ok(sig)
}

/// Algebraic signature over sorts {Term, Type}: variable injections for both
/// sorts plus one operation per listed symbol. Entry syntax `name:kind:degree`.
fn gat_signature(body: &str, full_name: &str) -> Result<Signature> {
    use CompoundSort as S;
    let mut ops = vec![
        OpDecl { name: "v_Term".into(), arg: S::Var, result: "Term".into() },
        OpDecl { name: "v_Type".into(), arg: S::Var, result: "Type".into() },
    ];
    for entry in body.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let parts: Vec<&str> = entry.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::UnknownSignature(full_name.to_string()));
        }
        let result = match parts[1] {
            "term" => "Term",
            "type" => "Type",
            _ => return Err(Error::UnknownSignature(full_name.to_string())),
        };
        let degree: usize = parts[2]
            .parse()
            .map_err(|_| Error::UnknownSignature(full_name.to_string()))?;
        let arg = if degree == 0 {
            S::Unit
        } else {
            S::tuple((0..degree).map(|_| S::data("Term")).collect())
        };
        ops.push(OpDecl {
            name: parts[0].to_string(),
            arg,
            result: result.into(),
        });
    }
    let sig = Signature {
        sorts: vec!["Term".into(), "Type".into()],
        term_sort: "Term".into(),
        type_sorts: vec!["Type".into()],
        params: BTreeMap::new(),
        ops,
        tag: Some(full_name.to_string()),
    };
    sig.validate()?;
    Ok(sig)
}
