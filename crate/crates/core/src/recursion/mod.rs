//! Structural recursion `Ψ = srec(e′)` and primitive recursion
//! `Φ = prec(e′)` on typed terms, abstraction of clause bodies, a program
//! evaluator and a fusion-law checker.
//!
//! Copies of a context are marker-major: `Y^k` lists `y1$1 … y1$k, y2$1 …`,
//! so the copies of a cycle body's context are the copies of the outer
//! context followed by those of the bound markers.

mod eval;
mod fusion;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::GraphError;
use crate::rewrite::RewriteError;
use crate::syntax::{Clause, Context, Label, Marker, Pattern, Program, RawTerm};
use crate::typing::{infer_with, raw_target, rename_target, Signatures, Term, TypeError, TypedTerm};

pub use eval::{eval, eval_term, EvalEnv, MAX_UNFOLDINGS};
pub use fusion::{fusion_check, prec_fusion_check};

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum RecursionError {
    #[error("`{0}` uses its argument outside a recursive call")]
    DependsOnArgument(String),
    #[error("clauses of `{0}` disagree on the result context")]
    InconsistentK(String),
    #[error("`{function}` calls the recursive function `{callee}` inside a clause body")]
    NestedCall { function: String, callee: String },
    #[error("`{0}` is applied to something other than its pattern variable")]
    BadRecursiveCall(String),
    #[error("`{function}` is not defined by {expected} recursion")]
    ModeMismatch { function: String, expected: Mode },
    #[error("`{0}` needs a closed argument")]
    NotClosed(String),
    #[error("`{0}` returns several markers and cannot take an open argument")]
    OpenArgument(String),
    #[error("`{function}` has no clause for label {label}")]
    NoClause { function: String, label: Label },
    #[error("`{function}`: body of clause {pattern} must have judgment {expected}")]
    BodyJudgment { function: String, pattern: String, expected: String },
    #[error("`{function}` has no clause matching {head}")]
    MatchFailure { function: String, head: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("bfun `{0}` is part of a call cycle")]
    CyclicBfuns(String),
    #[error("term still contains a call to `{0}`")]
    UnresolvedCall(String),
    #[error("fusion hypothesis fails at label {0}")]
    HypothesisFailed(Label),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Bodies see only the recursive results: `W ⊢ e′_ℓ : W`.
    Structural,
    /// Bodies also see the argument: `W, & ⊢ e′_ℓ : W`.
    Primitive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Structural => "structural",
            Mode::Primitive => "primitive",
        })
    }
}

/// A recursion definition: the result context `W` and one abstracted body
/// per clause pattern.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RecDef {
    pub name: String,
    pub mode: Mode,
    w: Context,
    clauses: Vec<(Pattern, TypedTerm)>,
}

impl RecDef {
    /// Checks the judgment of every body; labels left uncovered surface as
    /// [`RecursionError::NoClause`] when a term uses them.
    pub fn new(name: &str, mode: Mode, w: Context, clauses: Vec<(Pattern, TypedTerm)>) -> Result<RecDef, RecursionError> {
        let k = w.len();
        let source = body_source(mode, &w);
        for (p, e) in &clauses {
            let ok = !matches!(p, Pattern::Nil) && e.source().len() == source.len() && e.target().len() == k;
            if !ok {
                return Err(RecursionError::BodyJudgment {
                    function: name.to_string(),
                    pattern: pattern_text(p),
                    expected: alloc::format!("{} ⊢ _ : {}", source, w),
                });
            }
        }
        if k == 0 {
            return Err(RecursionError::InconsistentK(name.to_string()));
        }
        let clauses = clauses
            .into_iter()
            .map(|(p, e)| Ok((p, rename_target(&e.with_source(source.clone())?, &w)?)))
            .collect::<Result<Vec<_>, TypeError>>()?;
        Ok(RecDef { name: name.to_string(), mode, w, clauses })
    }

    /// Elaborates the sfun `name` of a program. The mode is structural unless
    /// some body uses the argument outside a recursive call.
    pub fn from_program(program: &Program, name: &str) -> Result<RecDef, RecursionError> {
        let sigs = signatures(program)?;
        RecDef::elaborate(program, &sigs, name)
    }

    pub(crate) fn elaborate(program: &Program, sigs: &Signatures, name: &str) -> Result<RecDef, RecursionError> {
        let src = program.sfuns.get(name).ok_or_else(|| RecursionError::UnknownFunction(name.to_string()))?;
        let w = sigs.get(name).cloned().ok_or_else(|| RecursionError::UnknownFunction(name.to_string()))?;
        let mode = match abstract_all(program, sigs, name, &src.clauses, Mode::Structural, &w) {
            Err(RecursionError::DependsOnArgument(_)) => Mode::Primitive,
            Err(e) => return Err(e),
            Ok(_) => Mode::Structural,
        };
        let bodies = abstract_all(program, sigs, name, &src.clauses, mode, &w)?;
        let clauses = src.clauses.iter().map(|c| c.pattern.clone()).zip(bodies).collect();
        RecDef::new(name, mode, w, clauses)
    }

    /// `k = |W|`.
    pub fn k(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> &Context {
        &self.w
    }

    pub fn clauses(&self) -> &[(Pattern, TypedTerm)] {
        &self.clauses
    }

    /// `e′_ℓ`; a label-variable clause has its variable replaced by `ℓ`.
    pub fn body(&self, l: &Label) -> Result<TypedTerm, RecursionError> {
        select_clause(&self.clauses, l)
            .ok_or_else(|| RecursionError::NoClause { function: self.name.clone(), label: l.clone() })
    }

    /// Concrete labels of the patterns.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for (p, _) in &self.clauses {
            match p {
                Pattern::Concrete(l) => {
                    out.insert(l.clone());
                }
                Pattern::Var { excluded, .. } => out.extend(excluded.iter().cloned()),
                Pattern::Nil => {}
            }
        }
        out
    }

    fn expect(&self, mode: Mode) -> Result<(), RecursionError> {
        if self.mode != mode {
            return Err(RecursionError::ModeMismatch { function: self.name.clone(), expected: mode });
        }
        Ok(())
    }
}

/// The body of the clause matching `l`, instantiated at `l`.
pub(crate) fn select_clause(clauses: &[(Pattern, TypedTerm)], l: &Label) -> Option<TypedTerm> {
    let concrete = clauses.iter().find(|(p, _)| matches!(p, Pattern::Concrete(m) if m == l));
    if let Some((_, e)) = concrete {
        return Some(e.clone());
    }
    clauses.iter().find_map(|(p, e)| match p {
        Pattern::Var { name, excluded } if !excluded.contains(l) => {
            Some(e.with_term(relabel(e.term(), &Label::new(name), l)))
        }
        _ => None,
    })
}

fn relabel(t: &Term, from: &Label, to: &Label) -> Term {
    let r = |u: &Term| Box::new(relabel(u, from, to));
    match t {
        Term::Label(l, u) => Term::Label(if l == from { to.clone() } else { l.clone() }, r(u)),
        Term::Def(m, u) => Term::Def(m.clone(), r(u)),
        Term::Cycle(u) => Term::Cycle(r(u)),
        Term::Compose(s, u) => Term::Compose(r(s), r(u)),
        Term::Pair(ts) => Term::Pair(ts.iter().map(|u| relabel(u, from, to)).collect()),
        Term::Call { name, arg, target } => Term::Call { name: name.clone(), arg: r(arg), target: target.clone() },
        Term::Var(_) | Term::Nil | Term::Emp | Term::Man => t.clone(),
    }
}

fn pattern_text(p: &Pattern) -> String {
    match p {
        Pattern::Concrete(l) => alloc::format!("{}:t", l),
        Pattern::Var { name, .. } => alloc::format!("{}:t", name),
        Pattern::Nil => "{}".into(),
    }
}

/// `W` or `W, &`.
fn body_source(mode: Mode, w: &Context) -> Context {
    match mode {
        Mode::Structural => w.clone(),
        Mode::Primitive => Context::concat(&[w.clone(), Context::unit()]),
    }
}

pub(crate) fn signatures(program: &Program) -> Result<Signatures, RecursionError> {
    Signatures::of_program(program).map_err(|e| match e {
        TypeError::InconsistentTarget(f) => RecursionError::InconsistentK(f),
        e => RecursionError::Type(e),
    })
}

fn abstract_all(
    program: &Program,
    sigs: &Signatures,
    name: &str,
    clauses: &[Clause],
    mode: Mode,
    w: &Context,
) -> Result<Vec<TypedTerm>, RecursionError> {
    clauses.iter().map(|c| abstract_with(program, sigs, name, c, mode, w)).collect()
}

/// `e′_ℓ` for one clause of the sfun `fname`: each `fname(t)` becomes the
/// identity tuple over `W` and, in primitive mode, each bare `t` becomes the
/// last source marker.
pub fn abstract_body(program: &Program, fname: &str, clause: &Clause, mode: Mode) -> Result<TypedTerm, RecursionError> {
    let sigs = signatures(program)?;
    let w = sigs.get(fname).cloned().ok_or_else(|| RecursionError::UnknownFunction(fname.to_string()))?;
    abstract_with(program, &sigs, fname, clause, mode, &w)
}

fn abstract_with(
    program: &Program,
    sigs: &Signatures,
    fname: &str,
    clause: &Clause,
    mode: Mode,
    w: &Context,
) -> Result<TypedTerm, RecursionError> {
    let holes: Vec<Marker> = w.iter().map(|m| m.with_suffix("#")).collect();
    let hole_t = clause.arg.with_suffix("#");
    let a = Abstraction { program, sigs, fname, arg: &clause.arg, mode, w, holes: &holes, hole_t: &hole_t };
    let call_on_arg = |u: &RawTerm| matches!(u, RawTerm::Call(f, x) if f == fname && **x == RawTerm::MarkerRef(clause.arg.clone()));
    let e = match (&clause.body, mode) {
        // `s @ f(t)` abstracts to `s` itself
        (RawTerm::Compose(s, u), Mode::Structural) if call_on_arg(u) => infer_with(&a.rewrite(s, false)?, w, sigs)?,
        _ => {
            let raw = a.rewrite(&clause.body, true)?;
            let mut source = holes.clone();
            if mode == Mode::Primitive {
                source.push(hole_t.clone());
            }
            infer_with(&raw, &Context::new(source).map_err(TypeError::from)?, sigs)?
        }
    };
    if e.target().len() != w.len() {
        return Err(RecursionError::InconsistentK(fname.to_string()));
    }
    let e = e.with_source(body_source(mode, w))?;
    Ok(rename_target(&e, w)?)
}

struct Abstraction<'a> {
    program: &'a Program,
    sigs: &'a Signatures,
    fname: &'a str,
    arg: &'a Marker,
    mode: Mode,
    w: &'a Context,
    holes: &'a [Marker],
    hole_t: &'a Marker,
}

impl Abstraction<'_> {
    /// `visible`: whether the argument variable is in scope here.
    fn rewrite(&self, t: &RawTerm, visible: bool) -> Result<RawTerm, RecursionError> {
        let r = |u: &RawTerm, v: bool| self.rewrite(u, v).map(Box::new);
        Ok(match t {
            RawTerm::MarkerRef(m) if visible && m == self.arg => match self.mode {
                Mode::Structural => return Err(RecursionError::DependsOnArgument(self.fname.to_string())),
                Mode::Primitive => RawTerm::MarkerRef(self.hole_t.clone()),
            },
            RawTerm::Call(f, u) if f == self.fname => {
                if !visible || **u != RawTerm::MarkerRef(self.arg.clone()) {
                    return Err(RecursionError::BadRecursiveCall(f.clone()));
                }
                let ids = self
                    .w
                    .iter()
                    .zip(self.holes)
                    .map(|(x, h)| {
                        let y = RawTerm::MarkerRef(h.clone());
                        if x.is_default() {
                            y
                        } else {
                            RawTerm::Def(x.clone(), Box::new(y))
                        }
                    })
                    .collect();
                RawTerm::pair(ids)
            }
            RawTerm::Call(f, u) => {
                if self.program.sfuns.contains_key(f) {
                    return Err(RecursionError::NestedCall { function: self.fname.to_string(), callee: f.clone() });
                }
                RawTerm::Call(f.clone(), r(u, visible)?)
            }
            RawTerm::Edge(l, u) => RawTerm::Edge(l.clone(), r(u, visible)?),
            RawTerm::Def(m, u) => RawTerm::Def(m.clone(), r(u, visible)?),
            RawTerm::Compose(s, u) => RawTerm::Compose(r(s, false)?, r(u, visible)?),
            RawTerm::Pair(ts) => RawTerm::Pair(ts.iter().map(|u| self.rewrite(u, visible)).collect::<Result<_, _>>()?),
            RawTerm::Cycle(u) => {
                let bound = raw_target(u, self.sigs)?.unwrap_or_else(Context::empty);
                RawTerm::Cycle(r(u, visible && !bound.contains(self.arg))?)
            }
            RawTerm::MarkerRef(_) | RawTerm::Nil | RawTerm::Emp | RawTerm::Man => t.clone(),
        })
    }
}

/// `Ψ` with `k` copies and bodies from `body`.
fn psi<F>(t: &Term, k: usize, body: &mut F) -> Result<Term, RecursionError>
where
    F: FnMut(&Label) -> Result<Term, RecursionError>,
{
    Ok(match t {
        Term::Var(i) => Term::vars(i * k, (i + 1) * k),
        Term::Emp => Term::Emp,
        Term::Nil => Term::pair(vec![Term::Nil; k]),
        Term::Man => zip_union(k),
        Term::Def(_, u) => psi(u, k, body)?,
        Term::Pair(ts) => Term::Pair(ts.iter().map(|u| psi(u, k, body)).collect::<Result<_, _>>()?),
        Term::Label(l, u) => Term::compose(body(l)?, psi(u, k, body)?),
        Term::Compose(s, u) => Term::compose(psi(s, k, body)?, psi(u, k, body)?),
        Term::Cycle(u) => Term::cycle(psi(u, k, body)?),
        Term::Call { name, .. } => return Err(RecursionError::UnresolvedCall(name.clone())),
    })
}

/// `⟨x1 ∪ y1, …, xk ∪ yk⟩` over `x1 … xk, y1 … yk`; `!` itself when `k = 1`.
fn zip_union(k: usize) -> Term {
    if k == 1 {
        return Term::Man;
    }
    Term::pair((0..k).map(|j| Term::union(Term::Var(j), Term::Var(k + j))).collect())
}

/// `π`: the first `k` of every `k + 1` copies of `x` markers.
fn pi(k: usize, x: usize) -> Term {
    Term::pair((0..x).flat_map(|i| (0..k).map(move |j| Term::Var(i * (k + 1) + j))).collect())
}

fn typed_copies(term: Term, t: &TypedTerm, src_k: usize, tgt_k: usize) -> Result<TypedTerm, RecursionError> {
    let out = TypedTerm::new(term, t.source().copies(src_k))?;
    Ok(rename_target(&out, &t.target().copies(tgt_k))?)
}

/// `Ψ(t)` for a structural definition: `Y^k ⊢ Ψ(t) : X^k`.
pub fn srec(def: &RecDef, t: &TypedTerm) -> Result<TypedTerm, RecursionError> {
    def.expect(Mode::Structural)?;
    let k = def.k();
    let term = psi(t.term(), k, &mut |l| Ok(def.body(l)?.into_term()))?;
    typed_copies(term, t, k, k)
}

/// The structural recursion `Ψ` behind a primitive definition, with bodies
/// `⟨e′_ℓ, ℓ:&⟩`: `Y^(k+1) ⊢ Ψ(t) : X^(k+1)`.
pub fn prec_lifted(def: &RecDef, t: &TypedTerm) -> Result<TypedTerm, RecursionError> {
    def.expect(Mode::Primitive)?;
    let k = def.k();
    let term = psi(t.term(), k + 1, &mut |l| {
        let e = def.body(l)?.into_term();
        Ok(Term::Pair(vec![e, Term::Label(l.clone(), Box::new(Term::Var(k)))]))
    })?;
    typed_copies(term, t, k + 1, k + 1)
}

/// `Φ(t) = π @ Ψ(t)` for a closed `t`: `⟨⟩ ⊢ Φ(t) : X^k`.
pub fn prec(def: &RecDef, t: &TypedTerm) -> Result<TypedTerm, RecursionError> {
    def.expect(Mode::Primitive)?;
    if !t.source().is_empty() {
        return Err(RecursionError::NotClosed(def.name.clone()));
    }
    prec_projected(def, t)
}

fn prec_projected(def: &RecDef, t: &TypedTerm) -> Result<TypedTerm, RecursionError> {
    let k = def.k();
    let lifted = prec_lifted(def, t)?;
    let term = Term::compose(pi(k, t.target().len()), lifted.term().clone());
    let out = TypedTerm::new(term, lifted.source().clone())?;
    Ok(rename_target(&out, &t.target().copies(k))?)
}

/// `Φ` on an open term, reading every free marker `y` both as the argument
/// hole and as its own recursive result: `Y ⊢ Φ(t) : X^k`.
pub fn prec_open(def: &RecDef, t: &TypedTerm) -> Result<TypedTerm, RecursionError> {
    def.expect(Mode::Primitive)?;
    let k = def.k();
    let n = t.source().len();
    let phi = prec_projected(def, t)?;
    let rho = Term::pair((0..n).flat_map(|i| (0..=k).map(move |_| Term::Var(i))).collect());
    let term = Term::compose(phi.term().clone(), rho);
    let out = TypedTerm::new(term, t.source().clone())?;
    Ok(rename_target(&out, phi.target())?)
}

/// Whether `t`, under a context of `len` markers, refers to a marker with
/// index in `lo..hi`.
pub(crate) fn mentions(t: &Term, len: usize, lo: usize, hi: usize) -> bool {
    match t {
        Term::Var(i) => (lo..hi).contains(i),
        Term::Man => len == 2 && lo < 2 && hi > lo,
        Term::Nil | Term::Emp => false,
        Term::Label(_, u) | Term::Def(_, u) | Term::Call { arg: u, .. } => mentions(u, len, lo, hi),
        Term::Compose(_, u) => mentions(u, len, lo, hi),
        Term::Pair(ts) => ts.iter().any(|u| mentions(u, len, lo, hi)),
        Term::Cycle(u) => mentions(u, len + u.arity(), lo, hi),
    }
}
