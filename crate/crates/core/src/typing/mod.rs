//! Judgments `Y ⊢ t : X`, substitution, target renaming and abbreviations.
//!
//! Typed terms are stored positionally: a marker reference is an index into
//! the source context in scope. The right operand of `s @ t` and the body of a
//! cycle see the enclosing context (a cycle body sees `Y + X`), while the left
//! operand of a composition sees the right operand's target. Marker names only
//! matter for printing and for graph interfaces.

pub mod abbrev;
mod term;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::{print_term, Context, Label, Marker, Program, RawTerm, SyntaxError};

pub use term::Term;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum TypeError {
    #[error("unbound marker {0}")]
    UnboundMarker(Marker),
    #[error("context mismatch at {at}: expected {expected} marker(s), found {found}")]
    ContextMismatch { at: String, expected: usize, found: usize },
    #[error("arity error: {0}")]
    ArityError(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("substitution domain does not match the source context {0}")]
    DomainMismatch(Context),
    #[error("context length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("functions `{0}` have no consistent result context")]
    InconsistentTarget(String),
    #[error(transparent)]
    Context(#[from] SyntaxError),
}

/// Result contexts `W_f` of the functions of a program.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Signatures(BTreeMap<String, Context>);

impl Signatures {
    pub fn empty() -> Signatures {
        Signatures::default()
    }

    pub fn get(&self, f: &str) -> Option<&Context> {
        self.0.get(f)
    }

    pub fn insert(&mut self, f: &str, w: Context) {
        self.0.insert(f.to_string(), w);
    }

    /// Computes `W_f` for every sfun and bfun. A clause contributes once the
    /// targets of the calls it depends on are known; functions whose clauses
    /// never resolve (pure self-recursion) get `⟨&⟩`.
    pub fn of_program(p: &Program) -> Result<Signatures, TypeError> {
        let mut sigs = Signatures::default();
        let all: Vec<(&String, &crate::syntax::FunSource)> = p.sfuns.iter().chain(p.bfuns.iter()).collect();
        loop {
            let mut changed = false;
            for (name, src) in &all {
                for clause in &src.clauses {
                    if let Some(w) = raw_target(&clause.body, &sigs)? {
                        match sigs.get(name) {
                            None => {
                                sigs.insert(name, w);
                                changed = true;
                            }
                            Some(prev) if prev.len() != w.len() => {
                                return Err(TypeError::InconsistentTarget(name.to_string()))
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (name, _) in &all {
            if sigs.get(name).is_none() {
                sigs.insert(name, Context::unit());
            }
        }
        Ok(sigs)
    }
}

/// Syntactic target of a raw term, `None` while it depends on an unknown `W_f`.
pub(crate) fn raw_target(t: &RawTerm, sigs: &Signatures) -> Result<Option<Context>, TypeError> {
    Ok(match t {
        RawTerm::MarkerRef(_) | RawTerm::Edge(..) | RawTerm::Nil | RawTerm::Man => Some(Context::unit()),
        RawTerm::Emp => Some(Context::empty()),
        RawTerm::Def(m, _) => Some(Context::single(m.clone())),
        RawTerm::Compose(s, _) => raw_target(s, sigs)?,
        RawTerm::Cycle(u) => raw_target(u, sigs)?,
        RawTerm::Pair(ts) => {
            let mut parts = Vec::with_capacity(ts.len());
            for u in ts {
                match raw_target(u, sigs)? {
                    Some(c) => parts.push(c),
                    None => return Ok(None),
                }
            }
            Some(Context::concat(&parts))
        }
        RawTerm::Call(f, _) => sigs.get(f).cloned(),
    })
}

/// A term together with its judgment `source ⊢ term : target`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct TypedTerm {
    term: Term,
    source: Context,
    target: Context,
}

impl TypedTerm {
    /// Checks a positional term against a source context.
    pub fn new(term: Term, source: Context) -> Result<TypedTerm, TypeError> {
        let arity = term.check(source.len())?;
        let target = term.target();
        debug_assert_eq!(arity, target.len());
        Ok(TypedTerm { term, source, target })
    }

    pub(crate) fn unchecked(term: Term, source: Context) -> TypedTerm {
        let target = term.target();
        TypedTerm { term, source, target }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    /// Same source with a replacement term of the same arity.
    pub(crate) fn with_term(&self, term: Term) -> TypedTerm {
        TypedTerm::unchecked(term, self.source.clone())
    }

    pub fn into_term(self) -> Term {
        self.term
    }

    pub fn source(&self) -> &Context {
        &self.source
    }

    pub fn target(&self) -> &Context {
        &self.target
    }

    /// Same term under a renamed source context of equal length.
    pub fn with_source(&self, source: Context) -> Result<TypedTerm, TypeError> {
        if source.len() != self.source.len() {
            return Err(TypeError::LengthMismatch { expected: self.source.len(), found: source.len() });
        }
        Ok(TypedTerm { term: self.term.clone(), source, target: self.target.clone() })
    }

    /// Named syntax for printing.
    pub fn to_raw(&self) -> RawTerm {
        self.term.to_raw(&self.source)
    }

    /// Judgments of every subterm in pre-order, with nesting depth.
    pub fn judgments(&self) -> Vec<Judgment> {
        let mut out = Vec::new();
        judgments(&self.term, &self.source, 0, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        self.term.size()
    }

    pub fn has_calls(&self) -> bool {
        self.term.has_calls()
    }
}

impl fmt::Display for TypedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(&self.to_raw()))
    }
}

/// One line of a judgment listing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Judgment {
    pub depth: usize,
    pub source: Context,
    pub term: String,
    pub target: Context,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ {} : {}", self.source, self.term, self.target)
    }
}

fn judgments(t: &Term, src: &Context, depth: usize, out: &mut Vec<Judgment>) {
    out.push(Judgment {
        depth,
        source: src.clone(),
        term: print_term(&t.to_raw(src)),
        target: t.target(),
    });
    match t {
        Term::Label(_, u) | Term::Def(_, u) | Term::Call { arg: u, .. } => judgments(u, src, depth + 1, out),
        Term::Compose(s, u) => {
            judgments(u, src, depth + 1, out);
            judgments(s, &u.target(), depth + 1, out);
        }
        Term::Pair(ts) => ts.iter().for_each(|u| judgments(u, src, depth + 1, out)),
        Term::Cycle(u) => judgments(u, &Context::cycle_body(src, &u.target()), depth + 1, out),
        Term::Var(_) | Term::Nil | Term::Emp | Term::Man => {}
    }
}

/// Typechecks a raw term under `source`, resolving calls against `program`.
pub fn infer(raw: &RawTerm, source: &Context, program: &Program) -> Result<TypedTerm, TypeError> {
    let sigs = Signatures::of_program(program)?;
    infer_with(raw, source, &sigs)
}

/// Typechecks a raw term with precomputed function signatures.
pub fn infer_with(raw: &RawTerm, source: &Context, sigs: &Signatures) -> Result<TypedTerm, TypeError> {
    let (term, target) = resolve(raw, source, sigs)?;
    Ok(TypedTerm { term, source: source.clone(), target })
}

/// Typechecks a term without function calls.
pub fn infer_pure(raw: &RawTerm, source: &Context) -> Result<TypedTerm, TypeError> {
    infer_with(raw, source, &Signatures::empty())
}

/// Typechecks a call-free term whose free markers, in order of first
/// occurrence, form the source context.
pub fn infer_open(raw: &RawTerm) -> Result<TypedTerm, TypeError> {
    let source = Context::new(raw.free_markers())?;
    infer_pure(raw, &source)
}

fn resolve(raw: &RawTerm, ctx: &Context, sigs: &Signatures) -> Result<(Term, Context), TypeError> {
    let one = |t: &RawTerm, what: &str| -> Result<Term, TypeError> {
        let (u, x) = resolve(t, ctx, sigs)?;
        if x.len() != 1 {
            return Err(TypeError::ContextMismatch { at: what.to_string(), expected: 1, found: x.len() });
        }
        Ok(u)
    };
    Ok(match raw {
        RawTerm::MarkerRef(m) => {
            // the last occurrence is the innermost binding
            let i = ctx.markers().iter().rposition(|x| x == m).ok_or_else(|| TypeError::UnboundMarker(m.clone()))?;
            (Term::Var(i), Context::unit())
        }
        RawTerm::Edge(l, u) => (Term::Label(l.clone(), Box::new(one(u, &format!("label {}", l))?)), Context::unit()),
        RawTerm::Compose(s, u) => {
            let (uu, x) = resolve(u, ctx, sigs)?;
            let (ss, z) = resolve(s, &x, sigs)?;
            (Term::Compose(Box::new(ss), Box::new(uu)), z)
        }
        RawTerm::Pair(ts) => {
            let mut terms = Vec::with_capacity(ts.len());
            let mut targets = Vec::with_capacity(ts.len());
            for u in ts {
                let (uu, x) = resolve(u, ctx, sigs)?;
                terms.push(uu);
                targets.push(x);
            }
            (Term::pair(terms), Context::concat(&targets))
        }
        RawTerm::Cycle(u) => {
            let bound = raw_target(u, sigs)?.ok_or_else(|| TypeError::ArityError("cycle body of unknown arity".into()))?;
            let body_ctx = Context::cycle_body(ctx, &bound);
            let (uu, x) = resolve(u, &body_ctx, sigs)?;
            debug_assert_eq!(x, bound);
            (Term::Cycle(Box::new(uu)), x)
        }
        RawTerm::Nil => (Term::Nil, Context::unit()),
        RawTerm::Emp => (Term::Emp, Context::empty()),
        RawTerm::Man => {
            if ctx.len() != 2 {
                return Err(TypeError::ContextMismatch { at: "!".into(), expected: 2, found: ctx.len() });
            }
            (Term::Man, Context::unit())
        }
        RawTerm::Def(m, u) => (Term::Def(m.clone(), Box::new(one(u, &format!("{}:=", m))?)), Context::single(m.clone())),
        RawTerm::Call(f, u) => {
            let w = sigs.get(f).ok_or_else(|| TypeError::UnknownFunction(f.clone()))?.clone();
            let arg = one(u, &format!("argument of {}", f))?;
            (Term::Call { name: f.clone(), arg: Box::new(arg), target: w.clone() }, w)
        }
    })
}

/// Simultaneous substitution `t[y1 ↦ s1, …]`; the map's domain must be the
/// source context of `t` and all values share one source `Z`.
pub fn substitute(t: &TypedTerm, map: &BTreeMap<Marker, TypedTerm>) -> Result<TypedTerm, TypeError> {
    if map.len() != t.source.len() || !t.source.iter().all(|m| map.contains_key(m)) {
        return Err(TypeError::DomainMismatch(t.source.clone()));
    }
    let z = match map.values().next() {
        Some(s) => s.source.clone(),
        None => return Err(TypeError::DomainMismatch(t.source.clone())),
    };
    let mut ss = Vec::with_capacity(map.len());
    for m in t.source.iter() {
        let s = &map[m];
        if s.source.len() != z.len() {
            return Err(TypeError::LengthMismatch { expected: z.len(), found: s.source.len() });
        }
        if s.target.len() != 1 {
            return Err(TypeError::ContextMismatch { at: format!("substitution for {}", m), expected: 1, found: s.target.len() });
        }
        ss.push(s.term.clone());
    }
    Ok(TypedTerm::unchecked(t.term.substitute(&ss, z.len()), z))
}

/// Substitution for a term over the empty context: only the new source `Z`.
pub fn weaken_closed(t: &TypedTerm, z: &Context) -> Result<TypedTerm, TypeError> {
    if !t.source.is_empty() {
        return Err(TypeError::DomainMismatch(t.source.clone()));
    }
    Ok(TypedTerm::unchecked(t.term.substitute(&[], z.len()), z.clone()))
}

/// Renames the target context; the term changes only by `:=` wrappers.
pub fn rename_target(t: &TypedTerm, names: &Context) -> Result<TypedTerm, TypeError> {
    if names.len() != t.target.len() {
        return Err(TypeError::LengthMismatch { expected: t.target.len(), found: names.len() });
    }
    let term = t.term.rename_target(names.markers());
    let out = TypedTerm::unchecked(term, t.source.clone());
    debug_assert_eq!(&out.target, names);
    Ok(out)
}

/// Labels occurring in a term.
pub fn labels(t: &Term) -> alloc::collections::BTreeSet<Label> {
    let mut out = alloc::collections::BTreeSet::new();
    t.visit(&mut |u| {
        if let Term::Label(l, _) = u {
            out.insert(l.clone());
        }
    });
    out
}
