use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{Const, LgError, LgTerm, LgType};
use crate::recursion::RecDef;
use crate::syntax::{Context, Label, Marker, Pattern};
use crate::typing::{Term, TypedTerm};

/// Words the λG parser reserves.
pub(crate) fn is_reserved(s: &str) -> bool {
    matches!(s, "U" | "fix" | "if" | "then" | "else" | "true" | "false" | "nil" | "srec" | "prec" | "ite")
        || (s.len() > 2 && s.starts_with("pi") && s[2..].chars().all(|c| c.is_ascii_digit()))
}

/// `base`, primed until `taken` rejects it no more.
pub(crate) fn fresh(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut n = base.to_string();
    while taken(&n) || is_reserved(&n) {
        n.push('\'');
    }
    n
}

fn stem_name(m: &Marker) -> String {
    let stem = m.stem();
    let stem = stem.strip_prefix('$').map(|d| format!("x{}", d)).unwrap_or_else(|| stem.to_string());
    let s: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "x".to_string()
    } else if s.starts_with(|c: char| c.is_ascii_digit()) {
        format!("x{}", s)
    } else {
        s
    }
}

/// Variable names for the markers of `ctx`, distinct and outside `avoid`.
pub(crate) fn binder_names(ctx: &Context, avoid: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for m in ctx.iter() {
        let n = fresh(&stem_name(m), |c| avoid.iter().any(|a| a == c) || out.iter().any(|o| o == c));
        out.push(n);
    }
    out
}

/// The λG term of a typed term: `λ(y1,…,yn). body`, or the bare body when
/// the source is empty. Calls become applications of [`Const::Fun`].
pub fn translate(t: &TypedTerm) -> Result<LgTerm, LgError> {
    let ys = binder_names(t.source(), &[]);
    let body = body(t.term(), &ys, &BTreeMap::new());
    Ok(if ys.is_empty() { body } else { LgTerm::lam(&ys, body) })
}

/// Translates `t` with its context named `scope`; labels in `labels` turn
/// into the named `L`-typed variables.
pub(crate) fn body(t: &Term, scope: &[String], labels: &BTreeMap<Label, String>) -> LgTerm {
    match t {
        Term::Var(i) => LgTerm::Var(scope[*i].clone()),
        Term::Label(l, u) => {
            let l = match labels.get(l) {
                Some(x) => LgTerm::Var(x.clone()),
                None => LgTerm::Const(Const::Label(l.clone())),
            };
            LgTerm::edge_with(l, body(u, scope, labels))
        }
        Term::Compose(s, u) => match (&**s, &**u) {
            (Term::Man, Term::Pair(ts)) if ts.len() == 2 => {
                LgTerm::union(body(&ts[0], scope, labels), body(&ts[1], scope, labels))
            }
            _ => {
                let xs = binder_names(&u.target(), &[]);
                LgTerm::app(LgTerm::lam(&xs, body(s, &xs, labels)), body(u, scope, labels))
            }
        },
        Term::Pair(ts) => LgTerm::tuple(ts.iter().map(|u| body(u, scope, labels)).collect()),
        Term::Cycle(u) => {
            let xs = binder_names(&u.target(), scope);
            let inner: Vec<String> = scope.iter().chain(&xs).cloned().collect();
            LgTerm::fix(LgTerm::lam(&xs, body(u, &inner, labels)))
        }
        Term::Nil => LgTerm::nil(),
        Term::Emp => LgTerm::Tuple(Vec::new()),
        Term::Man => LgTerm::union(LgTerm::Var(scope[0].clone()), LgTerm::Var(scope[1].clone())),
        Term::Def(_, u) => body(u, scope, labels),
        Term::Call { name, arg, target } => LgTerm::fun(name, arg.arity(), target.len(), body(arg, scope, labels)),
    }
}

/// The typed term of a λG term in the image of [`translate`].
pub fn inverse(t: &LgTerm) -> Result<TypedTerm, LgError> {
    let (ys, b) = match t {
        LgTerm::Lam(bs, b) if bs.iter().all(|(_, ty)| *ty == LgType::G) => {
            (bs.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>(), &**b)
        }
        _ => (Vec::new(), t),
    };
    let term = inv(b, &ys)?;
    let a = term.arity();
    let names: Vec<Marker> = if a == 1 {
        vec![Marker::default_marker()]
    } else {
        (1..=a).map(|i| Marker::new(&format!("x{}", i))).collect()
    };
    let source = Context::new(ys.iter().map(|y| Marker::new(y)).collect())
        .map_err(|e| LgError::NotInImage(e.to_string()))?;
    Ok(TypedTerm::new(term.rename_target(&names), source)?)
}

fn not_in_image(t: &LgTerm) -> LgError {
    LgError::NotInImage(t.to_string())
}

fn inv(t: &LgTerm, scope: &[String]) -> Result<Term, LgError> {
    Ok(match t {
        LgTerm::Var(x) => Term::Var(scope.iter().rposition(|y| y == x).ok_or_else(|| not_in_image(t))?),
        LgTerm::Tuple(ts) => Term::pair(ts.iter().map(|u| inv(u, scope)).collect::<Result<_, _>>()?),
        LgTerm::Const(Const::Nil) => Term::Nil,
        LgTerm::App(f, a) => match (&**f, &**a) {
            (LgTerm::Const(Const::Union), LgTerm::Tuple(ts)) if ts.len() == 2 => {
                Term::union(inv(&ts[0], scope)?, inv(&ts[1], scope)?)
            }
            (LgTerm::Const(Const::Union), _) => Term::compose(Term::Man, inv(a, scope)?),
            (LgTerm::Const(Const::Edge), LgTerm::Tuple(ts)) if ts.len() == 2 => match &ts[0] {
                LgTerm::Const(Const::Label(l)) => Term::Label(l.clone(), Box::new(inv(&ts[1], scope)?)),
                _ => return Err(not_in_image(t)),
            },
            (LgTerm::Const(Const::Fix), LgTerm::Lam(xs, b)) if graph_binders(xs) => {
                let inner: Vec<String> = scope.iter().cloned().chain(xs.iter().map(|x| x.0.clone())).collect();
                Term::cycle(inv(b, &inner)?)
            }
            (LgTerm::Const(Const::Proj(i)), _) => {
                let u = inv(a, scope)?;
                if *i == 0 || *i > u.arity() {
                    return Err(not_in_image(t));
                }
                Term::compose(Term::Var(i - 1), u)
            }
            (LgTerm::Const(Const::Fun { name, coarity, .. }), _) => Term::Call {
                name: name.clone(),
                arg: Box::new(inv(a, scope)?),
                target: Context::unit().copies(*coarity),
            },
            (LgTerm::Lam(xs, s), _) if graph_binders(xs) => {
                let xs: Vec<String> = xs.iter().map(|x| x.0.clone()).collect();
                let u = inv(a, scope)?;
                let outer: BTreeSet<String> = s.free_vars().into_iter().filter(|v| !xs.contains(v)).collect();
                if outer.is_empty() {
                    Term::compose(inv(s, &xs)?, u)
                } else {
                    let inner: Vec<String> = scope.iter().cloned().chain(xs).collect();
                    Term::compose(inv(s, &inner)?, Term::pair(vec![Term::vars(0, scope.len()), u]))
                }
            }
            _ => return Err(not_in_image(t)),
        },
        _ => return Err(not_in_image(t)),
    })
}

fn graph_binders(xs: &[(String, LgType)]) -> bool {
    xs.iter().all(|(_, ty)| *ty == LgType::G)
}

/// The clause table `λℓ. λ(x1,…). if ℓ ≡ a then … else …` of a recursive
/// definition; labels outside every pattern fall through to a tuple of `⊙`.
pub fn clause_table(def: &RecDef) -> Result<LgTerm, LgError> {
    let source = def.clauses().first().map(|c| c.1.source().clone()).unwrap_or_else(|| def.w().clone());
    let l = "l".to_string();
    let xs = binder_names(&source, core::slice::from_ref(&l));
    let fallback = LgTerm::tuple(vec![LgTerm::nil(); def.k()]);
    let test = |a: &Label| LgTerm::eq(LgTerm::Var(l.clone()), LgTerm::Const(Const::Label(a.clone())));

    let mut concrete = Vec::new();
    let mut vars = Vec::new();
    for (p, b) in def.clauses() {
        match p {
            Pattern::Concrete(a) => concrete.push((a.clone(), body(b.term(), &xs, &BTreeMap::new()))),
            Pattern::Var { name, excluded } => {
                let labels = BTreeMap::from([(Label::new(name), l.clone())]);
                vars.push((excluded.clone(), body(b.term(), &xs, &labels)));
            }
            Pattern::Nil => return Err(LgError::NonCanonicalClauseTable("a {} pattern in a recursive definition".into())),
        }
    }
    let seen: BTreeSet<Label> = concrete.iter().map(|c| c.0.clone()).collect();
    let mut chain = fallback;
    for (excluded, b) in vars.into_iter().rev() {
        let mut node = b;
        for a in excluded.iter().filter(|a| !seen.contains(*a)) {
            node = LgTerm::ite(test(a), chain.clone(), node);
        }
        chain = node;
    }
    for (a, b) in concrete.into_iter().rev() {
        chain = LgTerm::ite(test(&a), b, chain);
    }
    Ok(LgTerm::Lam(vec![(l, LgType::L)], Box::new(LgTerm::lam(&xs, chain))))
}
