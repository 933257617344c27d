use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{mentions, prec, select_clause, signatures, srec, Mode, RecDef, RecursionError};
use crate::graph::interpret_term;
use crate::rewrite::{as_tuple, normalize_term, NormalForm};
use crate::syntax::{Context, Label, Marker, Pattern, Program, RawTerm};
use crate::typing::{infer_with, Signatures, Term, TypeError, TypedTerm};

/// Cap on cycle unfoldings while a call waits for its argument.
pub const MAX_UNFOLDINGS: usize = 64;

/// A program with its sfuns elaborated into [`RecDef`]s and its bfun bodies
/// typed.
#[derive(Clone, Debug)]
pub struct EvalEnv {
    program: Program,
    sigs: Signatures,
    defs: BTreeMap<String, RecDef>,
    bfuns: BTreeMap<String, Vec<(Pattern, TypedTerm)>>,
}

impl EvalEnv {
    pub fn new(program: Program) -> Result<EvalEnv, RecursionError> {
        let sigs = signatures(&program)?;
        let mut defs = BTreeMap::new();
        for name in program.sfuns.keys() {
            defs.insert(name.clone(), RecDef::elaborate(&program, &sigs, name)?);
        }
        let mut bfuns = BTreeMap::new();
        let mut callees: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for (name, src) in &program.bfuns {
            let mut clauses = Vec::new();
            let calls = callees.entry(name).or_default();
            for c in &src.clauses {
                raw_calls(&c.body, calls);
                let body = infer_with(&c.body, &Context::single(c.arg.clone()), &sigs)?;
                clauses.push((c.pattern.clone(), body));
            }
            if let Some(f) = calls.iter().find(|f| program.sfuns.contains_key(*f)) {
                return Err(RecursionError::NestedCall { function: name.clone(), callee: f.clone() });
            }
            bfuns.insert(name.clone(), clauses);
        }
        if let Some(f) = find_cycle(&callees) {
            return Err(RecursionError::CyclicBfuns(f));
        }
        Ok(EvalEnv { program, sigs, defs, bfuns })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn signatures(&self) -> &Signatures {
        &self.sigs
    }

    pub fn def(&self, name: &str) -> Option<&RecDef> {
        self.defs.get(name)
    }

    /// bfun clauses with bodies typed over their argument marker.
    pub fn bfuns(&self) -> &BTreeMap<String, Vec<(Pattern, TypedTerm)>> {
        &self.bfuns
    }
}

fn raw_calls(t: &RawTerm, out: &mut BTreeSet<String>) {
    match t {
        RawTerm::Call(f, u) => {
            out.insert(f.clone());
            raw_calls(u, out);
        }
        RawTerm::Edge(_, u) | RawTerm::Def(_, u) | RawTerm::Cycle(u) => raw_calls(u, out),
        RawTerm::Compose(s, u) => {
            raw_calls(s, out);
            raw_calls(u, out);
        }
        RawTerm::Pair(ts) => ts.iter().for_each(|u| raw_calls(u, out)),
        RawTerm::MarkerRef(_) | RawTerm::Nil | RawTerm::Emp | RawTerm::Man => {}
    }
}

/// A bfun that can reach itself through the call graph.
fn find_cycle(edges: &BTreeMap<&str, BTreeSet<String>>) -> Option<String> {
    fn reaches(edges: &BTreeMap<&str, BTreeSet<String>>, from: &str, goal: &str, seen: &mut BTreeSet<String>) -> bool {
        let Some(next) = edges.get(from) else { return false };
        for g in next {
            if g == goal || (seen.insert(g.clone()) && reaches(edges, g, goal, seen)) {
                return true;
            }
        }
        false
    }
    edges.keys().find(|f| reaches(edges, f, f, &mut BTreeSet::new())).map(|f| f.to_string())
}

/// Evaluates an expression whose free markers, in order of occurrence, form
/// its source context.
pub fn eval(env: &EvalEnv, expr: &RawTerm) -> Result<NormalForm, RecursionError> {
    let source = Context::new(expr.free_markers()).map_err(TypeError::from)?;
    let t = infer_with(expr, &source, &env.sigs)?;
    eval_term(env, &t)
}

/// Resolves every call, innermost first, and normalizes.
pub fn eval_term(env: &EvalEnv, t: &TypedTerm) -> Result<NormalForm, RecursionError> {
    let n = t.source().len();
    let mut m = Machine { env, active: Vec::new(), stuck: None };
    let term = m.run(t.term().clone(), n)?;
    let term = normalize_term(&drop_vacuous(&term, n), n)?;
    Ok(NormalForm(t.with_term(term)))
}

enum Head {
    Nil,
    Label(Label, Term),
}

struct Machine<'a> {
    env: &'a EvalEnv,
    /// bfun calls under evaluation; meeting one again is a black hole
    active: Vec<(String, Term, usize)>,
    stuck: Option<RecursionError>,
}

impl Machine<'_> {
    fn run(&mut self, t: Term, n: usize) -> Result<Term, RecursionError> {
        let mut cur = normalize_term(&t, n)?;
        let mut unfolds = 0;
        loop {
            let next = normalize_term(&self.resolve(&cur, n)?, n)?;
            if !next.has_calls() {
                return Ok(next);
            }
            if next != cur {
                cur = next;
                continue;
            }
            unfolds += 1;
            match unfold_outer(&cur, n) {
                Some(u) if unfolds <= MAX_UNFOLDINGS => cur = normalize_term(&u, n)?,
                _ => return Err(self.stuck.take().unwrap_or_else(|| RecursionError::UnresolvedCall(first_call(&cur)))),
            }
        }
    }

    fn resolve(&mut self, t: &Term, n: usize) -> Result<Term, RecursionError> {
        Ok(match t {
            Term::Call { name, arg, target } => {
                let arg = self.resolve(arg, n)?;
                match self.apply(name, target, &arg, n)? {
                    Some(r) => r,
                    None => Term::Call { name: name.clone(), arg: Box::new(arg), target: target.clone() },
                }
            }
            Term::Label(l, u) => Term::Label(l.clone(), Box::new(self.resolve(u, n)?)),
            Term::Def(m, u) => Term::Def(m.clone(), Box::new(self.resolve(u, n)?)),
            Term::Compose(s, u) => {
                let u2 = self.resolve(u, n)?;
                Term::compose(self.resolve(s, u.arity())?, u2)
            }
            Term::Pair(ts) => Term::Pair(ts.iter().map(|u| self.resolve(u, n)).collect::<Result<_, _>>()?),
            Term::Cycle(u) => Term::cycle(self.resolve(u, n + u.arity())?),
            Term::Var(_) | Term::Nil | Term::Emp | Term::Man => t.clone(),
        })
    }

    /// The value of `name(arg)` with target `target`, or `None` while the
    /// argument is not yet known well enough.
    fn apply(&mut self, name: &str, target: &Context, arg: &Term, n: usize) -> Result<Option<Term>, RecursionError> {
        let out = if let Some(def) = self.env.defs.get(name) {
            if arg.has_calls() {
                return Ok(None);
            }
            if !mentions(arg, n, 0, n) {
                let closed = TypedTerm::new(arg.substitute(&[], 0), Context::empty())?;
                let r = match def.mode {
                    Mode::Structural => srec(def, &closed)?,
                    Mode::Primitive => prec(def, &closed)?,
                };
                r.term().lift(0, n)
            } else if def.mode == Mode::Primitive {
                return Err(RecursionError::NotClosed(name.to_string()));
            } else if def.k() != 1 {
                return Err(RecursionError::OpenArgument(name.to_string()));
            } else {
                srec(def, &TypedTerm::new(arg.clone(), placeholder(n))?)?.into_term()
            }
        } else if let Some(clauses) = self.env.bfuns.get(name) {
            let key = (name.to_string(), normalize_term(arg, n)?, n);
            if self.active.contains(&key) {
                return Ok(Some(Term::pair(vec![Term::Nil; target.len()])));
            }
            self.active.push(key);
            let r = self.apply_bfun(name, clauses, arg, n);
            self.active.pop();
            match r? {
                Some(r) => r,
                None => return Ok(None),
            }
        } else {
            return Err(RecursionError::UnknownFunction(name.to_string()));
        };
        Ok(Some(out.rename_target(target.markers())))
    }

    fn apply_bfun(
        &mut self,
        name: &str,
        clauses: &[(Pattern, TypedTerm)],
        arg: &Term,
        n: usize,
    ) -> Result<Option<Term>, RecursionError> {
        let (body, child) = match self.expose(name, arg, n)? {
            None => return Ok(None),
            Some(Head::Nil) => {
                let c = clauses.iter().find(|(p, _)| *p == Pattern::Nil).map(|(_, b)| b.clone());
                (c.ok_or_else(|| failure(name, "{}"))?, Term::Nil)
            }
            Some(Head::Label(l, u)) => {
                (select_clause(clauses, &l).ok_or_else(|| failure(name, &format!("label {}", l)))?, u)
            }
        };
        Ok(Some(body.term().substitute(&[child], n)))
    }

    /// Brings the argument to a label or `{}` head: `(c1)`, `(c2)` and the
    /// unit laws of `∪` first, then `(fix)` unfoldings up to the size of the
    /// argument's graph.
    fn expose(&mut self, name: &str, arg: &Term, n: usize) -> Result<Option<Head>, RecursionError> {
        let mut cur = normalize_term(arg, n)?;
        let bound = match interpret_term(&cur, &placeholder(n)) {
            Ok(g) => g.vertex_count(),
            Err(_) => MAX_UNFOLDINGS,
        };
        let mut unfolds = 0;
        loop {
            cur = match cur {
                Term::Label(l, u) => return Ok(Some(Head::Label(l, *u))),
                Term::Nil => return Ok(Some(Head::Nil)),
                Term::Def(_, u) => *u,
                Term::Var(_) | Term::Man => {
                    self.stuck = Some(failure(name, "a marker"));
                    return Ok(None);
                }
                Term::Compose(a, p) if *a == Term::Man => {
                    let parts = as_tuple(&p).expect("normal form");
                    let hs = self.expose(name, &parts[0], n)?;
                    let ht = self.expose(name, &parts[1], n)?;
                    return match (hs, ht) {
                        (Some(Head::Nil), h) | (h, Some(Head::Nil)) => Ok(h),
                        (None, _) | (_, None) => Ok(None),
                        _ => Err(failure(name, "a union")),
                    };
                }
                Term::Cycle(u) => {
                    if *strip_def(&u) == Term::Var(n) {
                        return Ok(Some(Head::Nil));
                    }
                    if let Some(rest) = c2_rest(&u, n) {
                        rest
                    } else {
                        unfolds += 1;
                        if unfolds > bound {
                            return Err(failure(name, "a cycle without a label head"));
                        }
                        let mut ext: Vec<Term> = (0..n).map(Term::Var).collect();
                        ext.push(Term::Cycle(u.clone()));
                        normalize_term(&u.substitute(&ext, n), n)?
                    }
                }
                Term::Call { name: g, arg: a, target } => match self.apply(&g, &target, &a, n)? {
                    Some(r) => normalize_term(&r, n)?,
                    None => return Ok(None),
                },
                Term::Compose(s, u) => {
                    let u2 = self.resolve(&u, n)?;
                    if u2 == *u {
                        return Ok(None);
                    }
                    normalize_term(&Term::Compose(s, Box::new(u2)), n)?
                }
                Term::Pair(_) | Term::Emp => unreachable!("arity-1 argument"),
            };
        }
    }
}

/// `cycle(x := t ∪ x)` and `cycle(x := x ∪ t)` with `x` not in `t` give `t`.
fn c2_rest(body: &Term, n: usize) -> Option<Term> {
    let Term::Compose(a, p) = strip_def(body) else { return None };
    let Term::Pair(ts) = &**p else { return None };
    if **a != Term::Man || ts.len() != 2 {
        return None;
    }
    let x = Term::Var(n);
    let rest = if *strip_def(&ts[1]) == x {
        &ts[0]
    } else if *strip_def(&ts[0]) == x {
        &ts[1]
    } else {
        return None;
    };
    if mentions(rest, n + 1, n, n + 1) {
        return None;
    }
    let mut ext: Vec<Term> = (0..n).map(Term::Var).collect();
    ext.push(Term::Nil);
    Some(rest.substitute(&ext, n))
}

fn strip_def(t: &Term) -> &Term {
    match t {
        Term::Def(_, u) => strip_def(u),
        _ => t,
    }
}

fn failure(function: &str, head: &str) -> RecursionError {
    RecursionError::MatchFailure { function: function.to_string(), head: head.to_string() }
}

fn placeholder(n: usize) -> Context {
    Context::new((0..n).map(|i| Marker::new(&format!("y{}", i + 1))).collect()).expect("distinct")
}

fn first_call(t: &Term) -> String {
    let mut out = String::new();
    t.visit(&mut |u| {
        if let (Term::Call { name, .. }, true) = (u, out.is_empty()) {
            out = name.clone();
        }
    });
    out
}

/// Replaces the outermost cycle that contains a call by its `(fix)` unfolding.
fn unfold_outer(t: &Term, n: usize) -> Option<Term> {
    match t {
        Term::Cycle(u) if u.has_calls() => {
            let mut ids: Vec<Term> = (0..n).map(Term::Var).collect();
            ids.push(t.clone());
            Some(Term::compose((**u).clone(), Term::pair(ids)))
        }
        Term::Label(l, u) => unfold_outer(u, n).map(|u| Term::Label(l.clone(), Box::new(u))),
        Term::Def(m, u) => unfold_outer(u, n).map(|u| Term::Def(m.clone(), Box::new(u))),
        Term::Call { name, arg, target } => unfold_outer(arg, n).map(|a| Term::Call {
            name: name.clone(),
            arg: Box::new(a),
            target: target.clone(),
        }),
        Term::Compose(s, u) => match unfold_outer(u, n) {
            Some(u2) => Some(Term::Compose(s.clone(), Box::new(u2))),
            None => unfold_outer(s, u.arity()).map(|s2| Term::Compose(Box::new(s2), u.clone())),
        },
        Term::Pair(ts) => {
            let i = ts.iter().position(|u| u.has_calls())?;
            let mut ts = ts.clone();
            ts[i] = unfold_outer(&ts[i], n)?;
            Some(Term::Pair(ts))
        }
        _ => None,
    }
}

/// Drops cycles whose body never mentions the bound markers.
fn drop_vacuous(t: &Term, n: usize) -> Term {
    match t {
        Term::Cycle(u) => {
            let x = u.arity();
            let u2 = drop_vacuous(u, n + x);
            if mentions(&u2, n + x, n, n + x) {
                Term::cycle(u2)
            } else {
                let mut ext: Vec<Term> = (0..n).map(Term::Var).collect();
                ext.extend((0..x).map(|_| Term::Nil));
                u2.substitute(&ext, n)
            }
        }
        Term::Label(l, u) => Term::Label(l.clone(), Box::new(drop_vacuous(u, n))),
        Term::Def(m, u) => Term::Def(m.clone(), Box::new(drop_vacuous(u, n))),
        Term::Compose(s, u) => Term::compose(drop_vacuous(s, u.arity()), drop_vacuous(u, n)),
        Term::Pair(ts) => Term::Pair(ts.iter().map(|u| drop_vacuous(u, n)).collect()),
        _ => t.clone(),
    }
}
