//! Standard abbreviations: projections, identities, diagonals, swaps, products
//! and unions, each with its stated judgment.

use alloc::vec::Vec;

use super::{rename_target, Term, TypeError, TypedTerm};
use crate::syntax::Context;

fn named(term: Term, source: Context, target: &Context) -> TypedTerm {
    let t = TypedTerm::unchecked(term, source);
    rename_target(&t, target).expect("abbreviation arity")
}

/// `π^X_{X,Y} : X+Y ⊢ X`.
pub fn proj_left(x: &Context, y: &Context) -> TypedTerm {
    named(Term::vars(0, x.len()), Context::concat(&[x.clone(), y.clone()]), x)
}

/// `π^Y_{X,Y} : X+Y ⊢ Y`.
pub fn proj_right(x: &Context, y: &Context) -> TypedTerm {
    named(Term::vars(x.len(), x.len() + y.len()), Context::concat(&[x.clone(), y.clone()]), y)
}

/// `Id_X : X ⊢ X`.
pub fn identity(x: &Context) -> TypedTerm {
    named(Term::vars(0, x.len()), x.clone(), x)
}

/// `Δ_X = ⟨Id_X, Id_X⟩ : X ⊢ X+X`.
pub fn diagonal(x: &Context) -> TypedTerm {
    let id = Term::vars(0, x.len());
    let t = TypedTerm::unchecked(Term::pair(alloc::vec![id.clone(), id]), x.clone());
    let target = Context::concat(&[x.clone(), x.clone()]);
    rename_target(&t, &target).expect("diagonal arity")
}

/// `c_{X,Y} = ⟨π^Y, π^X⟩ : X+Y ⊢ Y+X`.
pub fn swap(x: &Context, y: &Context) -> TypedTerm {
    let (n, m) = (x.len(), y.len());
    let t = Term::pair(alloc::vec![Term::vars(n, n + m), Term::vars(0, n)]);
    named(t, Context::concat(&[x.clone(), y.clone()]), &Context::concat(&[y.clone(), x.clone()]))
}

/// `t1 × t2 = ⟨t1 @ π^{Y1}, t2 @ π^{Y2}⟩ : Y1+Y2 ⊢ X1+X2`.
pub fn times(t1: &TypedTerm, t2: &TypedTerm) -> TypedTerm {
    let (n, m) = (t1.source().len(), t2.source().len());
    let left = Term::compose(t1.term().clone(), Term::vars(0, n).rename_target(t1.source().markers()));
    let right = Term::compose(t2.term().clone(), Term::vars(n, n + m).rename_target(t2.source().markers()));
    let source = Context::concat(&[t1.source().clone(), t2.source().clone()]);
    let target = Context::concat(&[t1.target().clone(), t2.target().clone()]);
    named(Term::pair(alloc::vec![left, right]), source, &target)
}

/// `s ∪ t = ! @ (s ⊕ t)` for `s, t : Y ⊢ &`.
pub fn union(s: &TypedTerm, t: &TypedTerm) -> Result<TypedTerm, TypeError> {
    if s.source().len() != t.source().len() {
        return Err(TypeError::LengthMismatch { expected: s.source().len(), found: t.source().len() });
    }
    for u in [s, t] {
        if u.target().len() != 1 {
            return Err(TypeError::ContextMismatch { at: "union".into(), expected: 1, found: u.target().len() });
        }
    }
    Ok(TypedTerm::unchecked(Term::union(s.term().clone(), t.term().clone()), s.source().clone()))
}

/// `s @ t`; the target of `t` must have as many markers as the source of `s`.
pub fn compose(s: &TypedTerm, t: &TypedTerm) -> Result<TypedTerm, TypeError> {
    if s.source().len() != t.target().len() {
        return Err(TypeError::ContextMismatch { at: "@".into(), expected: s.source().len(), found: t.target().len() });
    }
    Ok(TypedTerm::unchecked(Term::compose(s.term().clone(), t.term().clone()), t.source().clone()))
}

/// `⟨t1 ⊕ … ⊕ tn⟩` over a shared source; `()` components are dropped.
pub fn pair(ts: &[TypedTerm], source: &Context) -> Result<TypedTerm, TypeError> {
    let mut terms = Vec::with_capacity(ts.len());
    for t in ts {
        if t.source().len() != source.len() {
            return Err(TypeError::LengthMismatch { expected: source.len(), found: t.source().len() });
        }
        if t.term() != &Term::Emp {
            terms.push(t.term().clone());
        }
    }
    Ok(TypedTerm::unchecked(Term::pair(terms), source.clone()))
}

/// `cycle(t)` for `t : Y+X ⊢ X`, giving `Y ⊢ cycle(t) : X`.
pub fn cycle(t: &TypedTerm) -> Result<TypedTerm, TypeError> {
    let x = t.target().len();
    let n = t.source().len();
    if n < x {
        return Err(TypeError::ContextMismatch { at: "cycle".into(), expected: x, found: n });
    }
    let outer = t.source().slice(0, n - x);
    Ok(TypedTerm::unchecked(Term::cycle(t.term().clone()), outer))
}
