//! The rewrite system {(sub), (Bekič)} read left to right, the value grammar
//! `M`, the `N` forms reached by η-expanding `!`, and μ-terms.
//!
//! Besides the two rules, `cycle(t)` with an empty target rewrites to `()`
//! and a cycle over a one-component tuple drops the tuple. Both are instances
//! of the (Bekič) equation with an empty part.

mod mu;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::syntax::{Context, Marker};
use crate::typing::{Term, TypeError, TypedTerm};

pub use mu::{mu_to_term, mu_to_term_with, parse_mu, print_mu, to_mu, MuTerm};

/// Contractions allowed before [`RewriteError::FuelExhausted`].
pub const DEFAULT_FUEL: usize = 1_000_000;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum RewriteError {
    #[error("rewriting did not terminate within {0} steps")]
    FuelExhausted(usize),
    #[error("expected a term of type ⟨&⟩, found {0}")]
    TypeNotSingleton(Context),
    #[error("not a normal form: {0}")]
    NotInM(String),
    #[error("not in the μ-term grammar: {0}")]
    NotInN(String),
    #[error("μ-term syntax error at {pos}: {msg}")]
    MuParse { pos: usize, msg: String },
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Order in which redexes are chosen by [`step_with`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    LeftmostInnermost,
    RightmostInnermost,
}

/// A term without redexes, certified by [`is_value`] when call-free.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalForm(pub(crate) TypedTerm);

impl NormalForm {
    pub fn typed(&self) -> &TypedTerm {
        &self.0
    }

    pub fn into_typed(self) -> TypedTerm {
        self.0
    }

    pub fn term(&self) -> &Term {
        self.0.term()
    }
}

impl core::fmt::Display for NormalForm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.0.fmt(f)
    }
}

/// Flattens nested pairs and `()` into the list of arity-1 components, or
/// `None` if the term is not built from pairs.
pub fn as_tuple(t: &Term) -> Option<Vec<Term>> {
    match t {
        Term::Emp => Some(Vec::new()),
        Term::Pair(ts) => {
            let mut out = Vec::new();
            for u in ts {
                out.extend(as_tuple(u)?);
            }
            Some(out)
        }
        _ if t.arity() == 1 => Some(alloc::vec![t.clone()]),
        _ => None,
    }
}

fn is_redex(t: &Term) -> bool {
    match t {
        Term::Compose(a, b) => **a != Term::Man && as_tuple(b).is_some(),
        Term::Cycle(u) => cycle_redex(u),
        _ => false,
    }
}

fn cycle_redex(body: &Term) -> bool {
    match body.arity() {
        0 => true,
        1 => matches!(body, Term::Pair(_)) && as_tuple(body).is_some(),
        _ => as_tuple(body).is_some(),
    }
}

/// Contracts a redex sitting under a source of `n` markers.
fn contract(t: &Term, n: usize) -> Term {
    match t {
        Term::Compose(a, b) => {
            let s = as_tuple(b).expect("redex");
            a.substitute(&s, n)
        }
        Term::Cycle(u) => match u.arity() {
            0 => Term::Emp,
            1 => Term::cycle(as_tuple(u).expect("redex").pop().expect("one component")),
            _ => bekic(u, n),
        },
        _ => unreachable!("not a redex"),
    }
}

/// `cycle(⟨t ⊕ s⟩)` with `s` the last coordinate becomes
/// `⟨π, cycle(s)⟩ @ ⟨Id, cycle(t @ ⟨Id, cycle(s)⟩)⟩`.
fn bekic(body: &Term, n: usize) -> Term {
    let x = body.target();
    let big_n = x.len();
    let mut parts = as_tuple(body).expect("tuple body");
    let s = parts.pop().expect("nonempty");
    let names = x.markers();
    let cyc_s = Term::cycle(s.rename_target(&names[big_n - 1..]));
    let mut inner: Vec<Term> = (0..n + big_n - 1).map(Term::Var).collect();
    inner.push(cyc_s.clone());
    let t = Term::pair(parts);
    let t_comp = Term::compose(t, Term::pair(inner)).rename_target(&names[..big_n - 1]);
    let mut left: Vec<Term> = (0..big_n - 1).map(|i| wrap(&names[i], Term::Var(n + i))).collect();
    left.push(cyc_s);
    let mut right: Vec<Term> = (0..n).map(Term::Var).collect();
    right.push(Term::cycle(t_comp));
    Term::compose(Term::pair(left), Term::pair(right))
}

fn wrap(x: &Marker, t: Term) -> Term {
    if x.is_default() {
        t
    } else {
        Term::def(x.clone(), t)
    }
}

/// One leftmost-innermost rewrite, or `None` for a normal term.
pub fn step(t: &TypedTerm) -> Option<TypedTerm> {
    step_with(t, Strategy::LeftmostInnermost)
}

pub fn step_with(t: &TypedTerm, strategy: Strategy) -> Option<TypedTerm> {
    step_term(t.term(), t.source().len(), strategy).map(|u| t.with_term(u))
}

fn step_term(t: &Term, n: usize, strategy: Strategy) -> Option<Term> {
    let rebuilt = match t {
        Term::Label(l, u) => step_term(u, n, strategy).map(|u| Term::Label(l.clone(), Box::new(u))),
        Term::Def(m, u) => step_term(u, n, strategy).map(|u| Term::Def(m.clone(), Box::new(u))),
        Term::Call { name, arg, target } => step_term(arg, n, strategy)
            .map(|u| Term::Call { name: name.clone(), arg: Box::new(u), target: target.clone() }),
        Term::Cycle(u) => step_term(u, n + u.arity(), strategy).map(Term::cycle),
        Term::Compose(a, b) => {
            let in_a = |s| step_term(a, b.arity(), s).map(|a2| Term::compose(a2, (**b).clone()));
            let in_b = |s| step_term(b, n, s).map(|b2| Term::compose((**a).clone(), b2));
            match strategy {
                Strategy::LeftmostInnermost => in_a(strategy).or_else(|| in_b(strategy)),
                Strategy::RightmostInnermost => in_b(strategy).or_else(|| in_a(strategy)),
            }
        }
        Term::Pair(ts) => {
            let order: Vec<usize> = match strategy {
                Strategy::LeftmostInnermost => (0..ts.len()).collect(),
                Strategy::RightmostInnermost => (0..ts.len()).rev().collect(),
            };
            order.into_iter().find_map(|i| {
                step_term(&ts[i], n, strategy).map(|u| {
                    let mut ts2 = ts.clone();
                    ts2[i] = u;
                    Term::Pair(ts2)
                })
            })
        }
        Term::Var(_) | Term::Nil | Term::Emp | Term::Man => None,
    };
    if rebuilt.is_some() {
        return rebuilt;
    }
    if is_redex(t) {
        Some(contract(t, n))
    } else {
        None
    }
}

/// Normalizes by repeated [`step_with`]; `fuel` bounds the number of steps.
pub fn normalize_with(t: &TypedTerm, strategy: Strategy, fuel: usize) -> Result<NormalForm, RewriteError> {
    let n = t.source().len();
    let mut cur = t.term().clone();
    for _ in 0..fuel {
        match step_term(&cur, n, strategy) {
            Some(next) => cur = next,
            None => return Ok(NormalForm(t.with_term(cur))),
        }
    }
    Err(RewriteError::FuelExhausted(fuel))
}

/// The unique normal form. Calls are treated as opaque constants.
pub fn normalize(t: &TypedTerm) -> Result<NormalForm, RewriteError> {
    let term = normalize_term(t.term(), t.source().len())?;
    Ok(NormalForm(t.with_term(term)))
}

/// Normal form of a positional term under `n` source markers.
pub fn normalize_term(t: &Term, n: usize) -> Result<Term, RewriteError> {
    let mut fuel = DEFAULT_FUEL;
    norm(t, n, &mut fuel)
}

fn burn(fuel: &mut usize) -> Result<(), RewriteError> {
    if *fuel == 0 {
        return Err(RewriteError::FuelExhausted(DEFAULT_FUEL));
    }
    *fuel -= 1;
    Ok(())
}

fn norm(t: &Term, n: usize, fuel: &mut usize) -> Result<Term, RewriteError> {
    Ok(match t {
        Term::Var(_) | Term::Nil | Term::Emp | Term::Man => t.clone(),
        Term::Label(l, u) => Term::Label(l.clone(), Box::new(norm(u, n, fuel)?)),
        Term::Def(m, u) => Term::Def(m.clone(), Box::new(norm(u, n, fuel)?)),
        Term::Call { name, arg, target } => {
            Term::Call { name: name.clone(), arg: Box::new(norm(arg, n, fuel)?), target: target.clone() }
        }
        Term::Pair(ts) => Term::Pair(ts.iter().map(|u| norm(u, n, fuel)).collect::<Result<_, _>>()?),
        Term::Compose(a, b) => {
            let b2 = norm(b, n, fuel)?;
            let a2 = norm(a, b.arity(), fuel)?;
            let c = Term::compose(a2, b2);
            if is_redex(&c) {
                burn(fuel)?;
                norm(&contract(&c, n), n, fuel)?
            } else {
                c
            }
        }
        Term::Cycle(u) => {
            let c = Term::cycle(norm(u, n + u.arity(), fuel)?);
            if is_redex(&c) {
                burn(fuel)?;
                norm(&contract(&c, n), n, fuel)?
            } else {
                c
            }
        }
    })
}

/// Membership in the value grammar
/// `y | ℓ:t | cycle(x:=t) | {} | ! | !@⟨s,t⟩ | x:=t | ⟨s,t⟩ | ()`.
pub fn is_value(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Nil | Term::Man | Term::Emp => true,
        Term::Label(_, u) | Term::Def(_, u) => is_value(u),
        Term::Pair(ts) => ts.iter().all(is_value),
        Term::Cycle(u) => u.arity() == 1 && !matches!(**u, Term::Pair(_)) && is_value(u),
        Term::Compose(a, p) => **a == Term::Man && as_tuple(p).is_some() && is_value(p),
        Term::Call { .. } => false,
    }
}

/// Membership in `N`: `y | ℓ:t | cycle(x:=t) | {} | !@⟨s,t⟩`.
pub fn is_n_form(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Nil => true,
        Term::Label(_, u) => is_n_form(u),
        Term::Cycle(u) => matches!(&**u, Term::Def(_, b) if is_n_form(b)),
        Term::Compose(a, p) => {
            **a == Term::Man && matches!(&**p, Term::Pair(ts) if ts.len() == 2 && ts.iter().all(is_n_form))
        }
        _ => false,
    }
}

/// Rewrites a `⟨&⟩`-typed value into `N`: every `!` becomes `! @ ⟨y1, y2⟩`,
/// `:=` wrappers go, and each cycle binds a fresh name.
pub fn eta_man_expand(t: &TypedTerm) -> Result<TypedTerm, RewriteError> {
    if t.target().len() != 1 {
        return Err(RewriteError::TypeNotSingleton(t.target().clone()));
    }
    if !is_value(t.term()) {
        return Err(RewriteError::NotInM(alloc::format!("{}", t)));
    }
    let mut scope: Vec<Marker> = t.source().markers().to_vec();
    let term = eta(t.term(), &mut scope)?;
    Ok(t.with_term(term))
}

fn fresh_binder(scope: &[Marker]) -> Marker {
    let mut i = 0usize;
    loop {
        let m = if i == 0 { Marker::new("x") } else { Marker::new(&alloc::format!("x{}", i)) };
        if !scope.contains(&m) {
            return m;
        }
        i += 1;
    }
}

fn eta(t: &Term, scope: &mut Vec<Marker>) -> Result<Term, RewriteError> {
    Ok(match t {
        Term::Var(_) | Term::Nil => t.clone(),
        Term::Label(l, u) => Term::Label(l.clone(), Box::new(eta(u, scope)?)),
        Term::Def(_, u) => eta(u, scope)?,
        Term::Man => Term::union(Term::Var(0), Term::Var(1)),
        Term::Pair(_) => match as_tuple(t) {
            Some(mut ts) if ts.len() == 1 => eta(&ts.pop().expect("one"), scope)?,
            _ => return Err(RewriteError::NotInM(alloc::format!("{:?}", t))),
        },
        Term::Compose(_, p) => {
            let ts = as_tuple(p).ok_or_else(|| RewriteError::NotInM(alloc::format!("{:?}", t)))?;
            Term::union(eta(&ts[0], scope)?, eta(&ts[1], scope)?)
        }
        Term::Cycle(u) => {
            let x = fresh_binder(scope);
            scope.push(x.clone());
            let body = eta(u, scope);
            scope.pop();
            Term::cycle(Term::def(x, body?))
        }
        Term::Emp | Term::Call { .. } => return Err(RewriteError::NotInM(alloc::format!("{:?}", t))),
    })
}

#[cfg(test)]
mod tests;
