use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::TypeError;
use crate::syntax::{Context, Label, Marker, RawTerm};

/// Positional term. `Var(i)` refers to the i-th marker of the context in scope.
#[derive(Clone, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Label(Label, Box<Term>),
    /// `s @ t`: `t` is evaluated in the current context, `s` over `t`'s target.
    Compose(Box<Term>, Box<Term>),
    /// At least two components.
    Pair(Vec<Term>),
    /// The body sees the current context followed by the cycle's target.
    Cycle(Box<Term>),
    Nil,
    Emp,
    Man,
    Def(Marker, Box<Term>),
    Call { name: String, arg: Box<Term>, target: Context },
}

impl Term {
    /// Pair with the flattening convention for zero and one components.
    pub fn pair(mut ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::Emp,
            1 => ts.pop().unwrap(),
            _ => Term::Pair(ts),
        }
    }

    pub fn label(l: &str, t: Term) -> Term {
        Term::Label(Label::new(l), Box::new(t))
    }

    pub fn compose(s: Term, t: Term) -> Term {
        Term::Compose(Box::new(s), Box::new(t))
    }

    pub fn cycle(t: Term) -> Term {
        Term::Cycle(Box::new(t))
    }

    pub fn def(m: Marker, t: Term) -> Term {
        Term::Def(m, Box::new(t))
    }

    /// `s ∪ t`.
    pub fn union(s: Term, t: Term) -> Term {
        Term::compose(Term::Man, Term::Pair(alloc::vec![s, t]))
    }

    /// The tuple `(Var(from), …, Var(to - 1))`.
    pub fn vars(from: usize, to: usize) -> Term {
        Term::pair((from..to).map(Term::Var).collect())
    }

    /// Number of target markers.
    pub fn arity(&self) -> usize {
        match self {
            Term::Var(_) | Term::Label(..) | Term::Nil | Term::Man | Term::Def(..) => 1,
            Term::Emp => 0,
            Term::Compose(s, _) => s.arity(),
            Term::Cycle(u) => u.arity(),
            Term::Pair(ts) => ts.iter().map(Term::arity).sum(),
            Term::Call { target, .. } => target.len(),
        }
    }

    /// Target context, named as the typing rules prescribe.
    pub fn target(&self) -> Context {
        match self {
            Term::Var(_) | Term::Label(..) | Term::Nil | Term::Man => Context::unit(),
            Term::Emp => Context::empty(),
            Term::Def(m, _) => Context::single(m.clone()),
            Term::Compose(s, _) => s.target(),
            Term::Cycle(u) => u.target(),
            Term::Pair(ts) => Context::concat(&ts.iter().map(Term::target).collect::<Vec<_>>()),
            Term::Call { target, .. } => target.clone(),
        }
    }

    /// Checks the term under a source of `n` markers and returns its arity.
    pub fn check(&self, n: usize) -> Result<usize, TypeError> {
        let single = |u: &Term, at: &str| -> Result<(), TypeError> {
            let a = u.check(n)?;
            if a != 1 {
                return Err(TypeError::ContextMismatch { at: at.into(), expected: 1, found: a });
            }
            Ok(())
        };
        match self {
            Term::Var(i) => {
                if *i >= n {
                    return Err(TypeError::ArityError(format!("marker index {} in a context of {}", i, n)));
                }
                Ok(1)
            }
            Term::Label(l, u) => single(u, &format!("label {}", l)).map(|_| 1),
            Term::Compose(s, u) => {
                let a = u.check(n)?;
                s.check(a)
            }
            Term::Pair(ts) => {
                if ts.len() < 2 {
                    return Err(TypeError::ArityError("pair with fewer than two components".into()));
                }
                let mut sum = 0;
                for u in ts {
                    sum += u.check(n)?;
                }
                Ok(sum)
            }
            Term::Cycle(u) => {
                let x = u.arity();
                let a = u.check(n + x)?;
                debug_assert_eq!(a, x);
                Ok(x)
            }
            Term::Nil => Ok(1),
            Term::Emp => Ok(0),
            Term::Man => {
                if n != 2 {
                    return Err(TypeError::ContextMismatch { at: "!".into(), expected: 2, found: n });
                }
                Ok(1)
            }
            Term::Def(m, u) => single(u, &format!("{}:=", m)).map(|_| 1),
            Term::Call { name, arg, target } => {
                single(arg, &format!("argument of {}", name))?;
                Ok(target.len())
            }
        }
    }

    /// Named syntax under the given source context.
    pub fn to_raw(&self, ctx: &Context) -> RawTerm {
        match self {
            Term::Var(i) => RawTerm::MarkerRef(ctx.get(*i).cloned().unwrap_or_else(|| Marker::new(&format!("?{}", i)))),
            Term::Label(l, u) => RawTerm::Edge(l.clone(), Box::new(u.to_raw(ctx))),
            Term::Compose(s, u) => RawTerm::compose(s.to_raw(&u.target()), u.to_raw(ctx)),
            Term::Pair(ts) => RawTerm::Pair(ts.iter().map(|u| u.to_raw(ctx)).collect()),
            Term::Cycle(u) => RawTerm::cycle(u.to_raw(&Context::cycle_body(ctx, &u.target()))),
            Term::Nil => RawTerm::Nil,
            Term::Emp => RawTerm::Emp,
            Term::Man => RawTerm::Man,
            Term::Def(m, u) => RawTerm::Def(m.clone(), Box::new(u.to_raw(ctx))),
            Term::Call { name, arg, .. } => RawTerm::Call(name.clone(), Box::new(arg.to_raw(ctx))),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn has_calls(&self) -> bool {
        let mut found = false;
        self.visit(&mut |u| found |= matches!(u, Term::Call { .. }));
        found
    }

    /// Pre-order traversal of every subterm.
    pub fn visit<F: FnMut(&Term)>(&self, f: &mut F) {
        f(self);
        match self {
            Term::Label(_, u) | Term::Def(_, u) | Term::Cycle(u) | Term::Call { arg: u, .. } => u.visit(f),
            Term::Compose(s, u) => {
                s.visit(f);
                u.visit(f);
            }
            Term::Pair(ts) => ts.iter().for_each(|u| u.visit(f)),
            Term::Var(_) | Term::Nil | Term::Emp | Term::Man => {}
        }
    }

    /// Inserts `by` fresh markers at position `at` of the source context.
    pub fn lift(&self, at: usize, by: usize) -> Term {
        if by == 0 {
            return self.clone();
        }
        match self {
            Term::Var(i) => Term::Var(if *i >= at { i + by } else { *i }),
            Term::Label(l, u) => Term::Label(l.clone(), Box::new(u.lift(at, by))),
            Term::Compose(s, u) => Term::Compose(s.clone(), Box::new(u.lift(at, by))),
            Term::Pair(ts) => Term::Pair(ts.iter().map(|u| u.lift(at, by)).collect()),
            Term::Cycle(u) => Term::Cycle(Box::new(u.lift(at, by))),
            Term::Def(m, u) => Term::Def(m.clone(), Box::new(u.lift(at, by))),
            Term::Call { name, arg, target } => {
                Term::Call { name: name.clone(), arg: Box::new(arg.lift(at, by)), target: target.clone() }
            }
            // `!` uses its whole context, so it becomes an explicit union
            Term::Man => Term::union(Term::Var(0).lift(at, by), Term::Var(1).lift(at, by)),
            Term::Nil | Term::Emp => self.clone(),
        }
    }

    /// `self[y_i ↦ s_i]` where every `s_i` has arity 1 over a source of `m`
    /// markers. Substituted values lose their root name so targets are kept.
    pub fn substitute(&self, s: &[Term], m: usize) -> Term {
        match self {
            Term::Var(i) => s[*i].to_default_root(),
            Term::Label(l, u) => Term::Label(l.clone(), Box::new(u.substitute(s, m))),
            Term::Compose(a, u) => Term::Compose(a.clone(), Box::new(u.substitute(s, m))),
            Term::Pair(ts) => Term::Pair(ts.iter().map(|u| u.substitute(s, m)).collect()),
            Term::Cycle(u) => {
                let x = u.arity();
                let mut ext: Vec<Term> = s.iter().map(|si| si.lift(m, x)).collect();
                ext.extend((m..m + x).map(Term::Var));
                Term::Cycle(Box::new(u.substitute(&ext, m + x)))
            }
            Term::Nil | Term::Emp => self.clone(),
            Term::Man => Term::union(s[0].to_default_root(), s[1].to_default_root()),
            Term::Def(x, u) => Term::Def(x.clone(), Box::new(u.substitute(s, m))),
            Term::Call { name, arg, target } => {
                Term::Call { name: name.clone(), arg: Box::new(arg.substitute(s, m)), target: target.clone() }
            }
        }
    }

    /// An arity-1 term renamed to target `⟨&⟩`, dropping `:=` wrappers.
    pub fn to_default_root(&self) -> Term {
        match self {
            Term::Def(_, u) => u.to_default_root(),
            Term::Compose(a, u) => Term::Compose(Box::new(a.to_default_root()), u.clone()),
            Term::Cycle(u) => Term::Cycle(Box::new(u.to_default_root())),
            Term::Pair(_) | Term::Emp | Term::Call { .. } if self.arity() != 1 => self.clone(),
            Term::Pair(ts) => {
                Term::Pair(ts.iter().map(|u| if u.arity() == 1 { u.to_default_root() } else { u.clone() }).collect())
            }
            Term::Call { target, .. } if !target.markers()[0].is_default() => {
                Term::compose(Term::Var(0), self.clone())
            }
            _ => self.clone(),
        }
    }

    /// Renames the target to `names` (same length) by the renaming clauses:
    /// roots of arity-1 leaves get a `:=` wrapper, compositions rename their
    /// left operand, pairs rename componentwise, cycles rename their body.
    pub fn rename_target(&self, names: &[Marker]) -> Term {
        debug_assert_eq!(names.len(), self.arity());
        match self {
            Term::Emp => Term::Emp,
            Term::Def(_, u) => {
                if names[0].is_default() {
                    u.to_default_root()
                } else {
                    Term::Def(names[0].clone(), u.clone())
                }
            }
            Term::Compose(a, u) => Term::Compose(Box::new(a.rename_target(names)), u.clone()),
            Term::Cycle(u) => Term::Cycle(Box::new(u.rename_target(names))),
            Term::Pair(ts) => {
                let mut out = Vec::with_capacity(ts.len());
                let mut k = 0;
                for u in ts {
                    let a = u.arity();
                    out.push(u.rename_target(&names[k..k + a]));
                    k += a;
                }
                Term::Pair(out)
            }
            Term::Call { target, .. } => {
                if target.markers() == names {
                    self.clone()
                } else {
                    let ids = names.iter().enumerate().map(|(i, n)| wrap_root(n, Term::Var(i))).collect();
                    Term::compose(Term::pair(ids), self.clone())
                }
            }
            Term::Var(_) | Term::Label(..) | Term::Nil | Term::Man => wrap_root(&names[0], self.clone()),
        }
    }
}

/// `x := t`, or `t` itself when `x` is the default marker.
pub(crate) fn wrap_root(x: &Marker, t: Term) -> Term {
    if x.is_default() {
        t
    } else {
        Term::Def(x.clone(), Box::new(t))
    }
}
