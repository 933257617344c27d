use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::mem;

use super::translate::{body, fresh};
use super::{eliminate, type_error, Const, LgError, LgTerm, LgType};
use crate::graph::{eliminate_epsilon, Graph};
use crate::recursion::EvalEnv;
use crate::syntax::{Context, Label, Pattern};

/// Evaluation steps allowed per [`lg_eval`] call.
pub const MAX_STEPS: usize = 5_000_000;

/// bfun definitions available to [`lg_eval_with`] through [`Const::Fun`].
#[derive(Clone, Debug, Default)]
pub struct LgProgram {
    bfuns: BTreeMap<String, Vec<BfunClause>>,
}

#[derive(Clone, Debug)]
struct BfunClause {
    pattern: Pattern,
    label_var: Option<String>,
    arg: String,
    code: Rc<Code>,
}

impl LgProgram {
    pub fn empty() -> LgProgram {
        LgProgram::default()
    }

    /// Translates the bfuns of `env`; each clause body becomes a λG body over
    /// its argument and, for a label-variable pattern, that label.
    pub fn from_env(env: &EvalEnv) -> Result<LgProgram, LgError> {
        let mut bfuns = BTreeMap::new();
        for (name, clauses) in env.bfuns() {
            let mut out = Vec::new();
            for (pattern, b) in clauses {
                let arg = super::translate::binder_names(b.source(), &[]).remove(0);
                let label_var = match pattern {
                    Pattern::Var { name, .. } => Some((Label::new(name), fresh("l", |c| c == arg))),
                    _ => None,
                };
                let labels: BTreeMap<Label, String> = label_var.iter().cloned().collect();
                let t = body(b.term(), core::slice::from_ref(&arg), &labels);
                let mut scope = Vec::new();
                if let Some((_, l)) = &label_var {
                    scope.push((l.clone(), LgType::L));
                }
                scope.push((arg.clone(), LgType::G));
                let (code, _) = compile(&t, &mut scope)?;
                out.push(BfunClause { pattern: pattern.clone(), label_var: label_var.map(|v| v.1), arg, code });
            }
            bfuns.insert(name.clone(), out);
        }
        Ok(LgProgram { bfuns })
    }
}

/// Evaluates a closed term of type `G^m → G^n` (or `G^n` when `args` is
/// empty) on `args`, whose roots are taken in order, and reads the result
/// back as an ε-free graph with `n` roots.
pub fn lg_eval(t: &LgTerm, args: &[Graph]) -> Result<Graph, LgError> {
    lg_eval_with(&LgProgram::empty(), t, args)
}

pub fn lg_eval_with(program: &LgProgram, t: &LgTerm, args: &[Graph]) -> Result<Graph, LgError> {
    let t = eliminate(t)?;
    let (code, ty) = compile(&t, &mut Vec::new())?;
    let mut m = Machine { heap: Vec::new(), program, steps: 0 };
    let f = m.eval(&code, &Env::default())?;
    let (value, out) = match ty {
        LgType::Arrow(a, b) => {
            let want = a.graph_power().ok_or_else(|| type_error(format!("argument type {} is not G^m", a)))?;
            let mut roots = Vec::new();
            for g in args {
                roots.extend(m.load(g)?);
            }
            if roots.len() != want {
                return Err(type_error(format!("expected {} argument roots, got {}", want, roots.len())));
            }
            let arg = if want == 1 { roots[0] } else { m.alloc(Cell::Done(Value::Tuple(roots))) };
            (m.apply(f, arg)?, *b)
        }
        ty => {
            if !args.is_empty() {
                return Err(type_error("arguments given to a term that is not a function"));
            }
            (f, ty)
        }
    };
    let n = out.graph_power().ok_or_else(|| type_error(format!("result type {} is not G^n", out)))?;
    let roots = if out == LgType::G {
        vec![m.alloc(Cell::Done(value))]
    } else {
        match value {
            Value::Tuple(ls) if ls.len() == n => ls,
            _ => return Err(type_error("result is not a tuple")),
        }
    };
    m.readback(&roots)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Shape {
    G,
    /// A flat tuple of this many cells.
    Flat(usize),
    Other,
}

fn shape(t: &LgType) -> Shape {
    match t {
        LgType::G => Shape::G,
        LgType::Unit | LgType::Prod(_) => Shape::Flat(t.width()),
        _ => Shape::Other,
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Binder {
    name: String,
    shape: Shape,
}

#[derive(Clone, Debug)]
pub(crate) enum Code {
    Var(String),
    Lam(Rc<[Binder]>, Rc<Code>),
    App(Rc<Code>, Rc<Code>, Shape),
    Tuple(Vec<(Rc<Code>, Shape)>),
    Val(Value),
}

/// Typechecks `t` under `scope` and compiles it.
pub(crate) fn compile(t: &LgTerm, scope: &mut Vec<(String, LgType)>) -> Result<(Rc<Code>, LgType), LgError> {
    let g2 = || LgType::graphs(2);
    Ok(match t {
        LgTerm::Var(x) => {
            let ty = scope.iter().rev().find(|(y, _)| y == x).map(|b| b.1.clone());
            (Rc::new(Code::Var(x.clone())), ty.ok_or_else(|| type_error(format!("unbound variable {}", x)))?)
        }
        LgTerm::Lam(bs, b) => {
            let n = scope.len();
            scope.extend(bs.iter().cloned());
            let r = compile(b, scope);
            scope.truncate(n);
            let (code, ty) = r?;
            let binders: Vec<Binder> = bs.iter().map(|(x, ty)| Binder { name: x.clone(), shape: shape(ty) }).collect();
            let arg = LgType::prod(bs.iter().map(|b| b.1.clone()));
            (Rc::new(Code::Lam(binders.into(), code)), LgType::arrow(arg, ty))
        }
        LgTerm::Tuple(ts) => {
            let mut items = Vec::new();
            let mut tys = Vec::new();
            for u in ts {
                let (c, ty) = compile(u, scope)?;
                items.push((c, shape(&ty)));
                tys.push(ty);
            }
            (Rc::new(Code::Tuple(items)), LgType::prod(tys))
        }
        LgTerm::Const(c) => {
            let (v, ty) = match c {
                Const::Nil => (Value::Nil, LgType::G),
                Const::Label(l) => (Value::Label(l.clone()), LgType::L),
                Const::True => (Value::Bool(true), LgType::B),
                Const::False => (Value::Bool(false), LgType::B),
                Const::Union => (Value::Prim(Prim::Union), LgType::arrow(g2(), LgType::G)),
                Const::Edge => (Value::Prim(Prim::Edge), LgType::arrow(LgType::prod([LgType::L, LgType::G]), LgType::G)),
                Const::Eq => (Value::Prim(Prim::Eq), LgType::arrow(LgType::prod([LgType::L, LgType::L]), LgType::B)),
                Const::Fun { name, arity, coarity } => {
                    (Value::Prim(Prim::Fun(name.clone())), LgType::arrow(LgType::graphs(*arity), LgType::graphs(*coarity)))
                }
                _ => return Err(type_error(format!("{} must be applied", t))),
            };
            (Rc::new(Code::Val(v)), ty)
        }
        LgTerm::App(f, a) => {
            let (ac, aty) = compile(a, scope)?;
            let ash = shape(&aty);
            let (prim, ty) = match &**f {
                LgTerm::Const(Const::Fix) => {
                    let n = match &aty {
                        LgType::Arrow(x, y) if x == y => x.graph_power(),
                        _ => None,
                    };
                    let n = n.ok_or_else(|| type_error(format!("fix applied to {}", aty)))?;
                    (Prim::Fix(n), LgType::graphs(n))
                }
                LgTerm::Const(Const::If) => {
                    let cs = aty.components();
                    let half = cs.len().saturating_sub(1) / 2;
                    if cs.first() != Some(&LgType::B) || cs.len() != 1 + 2 * half || cs[1..1 + half] != cs[1 + half..] {
                        return Err(type_error(format!("if applied to {}", aty)));
                    }
                    (Prim::If(half), LgType::prod(cs[1..1 + half].iter().cloned()))
                }
                LgTerm::Const(Const::Proj(i)) => {
                    let cs = aty.components();
                    if *i == 0 || *i > cs.len() {
                        return Err(type_error(format!("projection {} out of {}", i, aty)));
                    }
                    (Prim::Proj(i - 1), cs[i - 1].clone())
                }
                _ => {
                    let (fc, fty) = compile(f, scope)?;
                    let LgType::Arrow(x, y) = fty else {
                        return Err(type_error(format!("{} is not a function", f)));
                    };
                    if *x != aty {
                        return Err(type_error(format!("{} expects {}, got {}", f, x, aty)));
                    }
                    return Ok((Rc::new(Code::App(fc, ac, ash)), *y));
                }
            };
            (Rc::new(Code::App(Rc::new(Code::Val(Value::Prim(prim))), ac, ash)), ty)
        }
    })
}

type Loc = usize;

#[derive(Clone, Debug)]
pub(crate) enum Prim {
    Union,
    Edge,
    Eq,
    /// Conditional on tuples of this width.
    If(usize),
    Fix(usize),
    /// 0-based.
    Proj(usize),
    Fun(String),
}

#[derive(Clone, Debug)]
pub(crate) enum Value {
    Nil,
    Edge(Label, Loc),
    Union(Loc, Loc),
    Label(Label),
    Bool(bool),
    Tuple(Vec<Loc>),
    Closure(Rc<[Binder]>, Rc<Code>, Env),
    Prim(Prim),
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Env(Option<Rc<(String, Loc, Env)>>);

impl Env {
    fn bind(&self, x: &str, l: Loc) -> Env {
        Env(Some(Rc::new((x.to_string(), l, self.clone()))))
    }

    fn lookup(&self, x: &str) -> Option<Loc> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.0 == x {
                return Some(node.1);
            }
            cur = &node.2;
        }
        None
    }
}

enum Cell {
    Done(Value),
    Thunk(Rc<Code>, Env, Shape),
    Apply(Value, Loc, Shape),
    Proj(usize, Loc),
    /// Under evaluation; demanding it again is the black hole.
    Pending(Shape),
}

struct Machine<'p> {
    heap: Vec<Cell>,
    program: &'p LgProgram,
    steps: usize,
}

impl Machine<'_> {
    fn alloc(&mut self, c: Cell) -> Loc {
        self.heap.push(c);
        self.heap.len() - 1
    }

    fn tick(&mut self) -> Result<(), LgError> {
        self.steps += 1;
        if self.steps > MAX_STEPS {
            return Err(LgError::FuelExhausted(MAX_STEPS));
        }
        Ok(())
    }

    fn eval(&mut self, code: &Rc<Code>, env: &Env) -> Result<Value, LgError> {
        self.tick()?;
        match &**code {
            Code::Var(x) => {
                let l = env.lookup(x).ok_or_else(|| type_error(format!("unbound variable {}", x)))?;
                self.force(l)
            }
            Code::Lam(bs, b) => Ok(Value::Closure(bs.clone(), b.clone(), env.clone())),
            Code::App(f, a, sh) => {
                let fv = self.eval(f, env)?;
                let al = self.delay(a, env, *sh)?;
                self.apply(fv, al)
            }
            Code::Tuple(items) => {
                let mut ls = Vec::new();
                for (c, sh) in items {
                    if let Shape::Flat(_) = sh {
                        ls.extend(self.tuple_of(c, env)?);
                    } else {
                        ls.push(self.delay(c, env, *sh)?);
                    }
                }
                Ok(Value::Tuple(ls))
            }
            Code::Val(v) => Ok(v.clone()),
        }
    }

    fn tuple_of(&mut self, c: &Rc<Code>, env: &Env) -> Result<Vec<Loc>, LgError> {
        match self.eval(c, env)? {
            Value::Tuple(ls) => Ok(ls),
            _ => Err(type_error("expected a tuple")),
        }
    }

    fn delay(&mut self, code: &Rc<Code>, env: &Env, sh: Shape) -> Result<Loc, LgError> {
        Ok(match &**code {
            Code::Var(x) => env.lookup(x).ok_or_else(|| type_error(format!("unbound variable {}", x)))?,
            Code::Val(v) => self.alloc(Cell::Done(v.clone())),
            _ => self.alloc(Cell::Thunk(code.clone(), env.clone(), sh)),
        })
    }

    fn force(&mut self, l: Loc) -> Result<Value, LgError> {
        let sh = match &self.heap[l] {
            Cell::Done(v) => return Ok(v.clone()),
            Cell::Pending(sh) => return self.black_hole(*sh),
            Cell::Thunk(_, _, sh) | Cell::Apply(_, _, sh) => *sh,
            Cell::Proj(..) => Shape::G,
        };
        let v = match mem::replace(&mut self.heap[l], Cell::Pending(sh)) {
            Cell::Thunk(c, env, _) => self.eval(&c, &env)?,
            Cell::Apply(f, a, _) => self.apply(f, a)?,
            Cell::Proj(i, r) => {
                let ls = self.force_tuple(r)?;
                self.force(ls[i])?
            }
            Cell::Done(_) | Cell::Pending(_) => unreachable!("handled above"),
        };
        self.heap[l] = Cell::Done(v.clone());
        Ok(v)
    }

    fn black_hole(&mut self, sh: Shape) -> Result<Value, LgError> {
        match sh {
            Shape::G => Ok(Value::Nil),
            Shape::Flat(n) => Ok(Value::Tuple((0..n).map(|_| self.alloc(Cell::Done(Value::Nil))).collect())),
            Shape::Other => Err(type_error("a non-graph value depends on itself")),
        }
    }

    fn force_tuple(&mut self, l: Loc) -> Result<Vec<Loc>, LgError> {
        match self.force(l)? {
            Value::Tuple(ls) => Ok(ls),
            _ => Err(type_error("expected a tuple")),
        }
    }

    fn label(&mut self, l: Loc) -> Result<Label, LgError> {
        match self.force(l)? {
            Value::Label(l) => Ok(l),
            _ => Err(type_error("expected a label")),
        }
    }

    fn apply(&mut self, f: Value, a: Loc) -> Result<Value, LgError> {
        self.tick()?;
        match f {
            Value::Closure(bs, b, env) => {
                let env = if bs.len() == 1 {
                    env.bind(&bs[0].name, a)
                } else {
                    let ls = self.force_tuple(a)?;
                    let mut env = env;
                    let mut at = 0;
                    for x in bs.iter() {
                        let l = match x.shape {
                            Shape::Flat(n) => {
                                let part = ls.get(at..at + n).ok_or_else(|| type_error("tuple too short"))?.to_vec();
                                at += n;
                                self.alloc(Cell::Done(Value::Tuple(part)))
                            }
                            _ => {
                                at += 1;
                                *ls.get(at - 1).ok_or_else(|| type_error("tuple too short"))?
                            }
                        };
                        env = env.bind(&x.name, l);
                    }
                    env
                };
                self.eval(&b, &env)
            }
            Value::Prim(p) => self.apply_prim(p, a),
            _ => Err(type_error("application of a non-function")),
        }
    }

    fn apply_prim(&mut self, p: Prim, a: Loc) -> Result<Value, LgError> {
        Ok(match p {
            Prim::Union => {
                let ls = self.force_tuple(a)?;
                Value::Union(ls[0], ls[1])
            }
            Prim::Edge => {
                let ls = self.force_tuple(a)?;
                Value::Edge(self.label(ls[0])?, ls[1])
            }
            Prim::Eq => {
                let ls = self.force_tuple(a)?;
                Value::Bool(self.label(ls[0])? == self.label(ls[1])?)
            }
            Prim::If(half) => {
                let ls = self.force_tuple(a)?;
                let Value::Bool(b) = self.force(ls[0])? else {
                    return Err(LgError::StuckConditional);
                };
                let from = if b { 1 } else { 1 + half };
                if half == 1 {
                    self.force(ls[from])?
                } else {
                    Value::Tuple(ls[from..from + half].to_vec())
                }
            }
            Prim::Fix(n) => {
                let f = self.force(a)?;
                match n {
                    0 => Value::Tuple(Vec::new()),
                    1 => {
                        let c = self.alloc(Cell::Pending(Shape::G));
                        self.heap[c] = Cell::Apply(f, c, Shape::G);
                        self.force(c)?
                    }
                    _ => {
                        let first = self.heap.len();
                        let cells: Vec<Loc> = (first..first + n).collect();
                        let tuple = first + n;
                        let r = first + n + 1;
                        for i in 0..n {
                            self.alloc(Cell::Proj(i, r));
                        }
                        self.alloc(Cell::Done(Value::Tuple(cells.clone())));
                        self.alloc(Cell::Apply(f, tuple, Shape::Flat(n)));
                        Value::Tuple(cells)
                    }
                }
            }
            Prim::Proj(i) => match self.force(a)? {
                Value::Tuple(ls) => self.force(ls[i])?,
                v if i == 0 => v,
                _ => return Err(type_error("projection out of a non-tuple")),
            },
            Prim::Fun(name) => self.call(&name, a)?,
        })
    }

    fn call(&mut self, name: &str, a: Loc) -> Result<Value, LgError> {
        let program = self.program;
        let clauses = program.bfuns.get(name).ok_or_else(|| LgError::UnknownFunction(name.to_string()))?;
        let failure = |head: String| LgError::MatchFailure { function: name.to_string(), head };
        let (clause, child) = match self.expose(name, a, &mut Vec::new())? {
            None => {
                let c = clauses.iter().find(|c| c.pattern == Pattern::Nil).ok_or_else(|| failure("{}".into()))?;
                (c, self.alloc(Cell::Done(Value::Nil)))
            }
            Some((l, child)) => {
                let c = clauses
                    .iter()
                    .find(|c| c.pattern == Pattern::Concrete(l.clone()))
                    .or_else(|| {
                        clauses.iter().find(|c| matches!(&c.pattern, Pattern::Var { excluded, .. } if !excluded.contains(&l)))
                    })
                    .ok_or_else(|| failure(format!("label {}", l)))?;
                let mut env = Env::default();
                if let Some(x) = &c.label_var {
                    let ll = self.alloc(Cell::Done(Value::Label(l)));
                    env = env.bind(x, ll);
                }
                let env = env.bind(&c.arg, child);
                return self.eval(&c.code.clone(), &env);
            }
        };
        let env = Env::default().bind(&clause.arg, child);
        self.eval(&clause.code.clone(), &env)
    }

    /// The head edge of a graph value, `None` for `⊙`; unions with a `⊙`
    /// side and revisited cells (ε-cycles) reduce by the unit laws.
    fn expose(&mut self, name: &str, l: Loc, seen: &mut Vec<Loc>) -> Result<Option<(Label, Loc)>, LgError> {
        if seen.contains(&l) {
            return Ok(None);
        }
        seen.push(l);
        match self.force(l)? {
            Value::Nil => Ok(None),
            Value::Edge(a, c) => Ok(Some((a, c))),
            Value::Union(a, b) => {
                let ha = self.expose(name, a, seen)?;
                let hb = self.expose(name, b, seen)?;
                match (ha, hb) {
                    (None, h) | (h, None) => Ok(h),
                    (Some(x), Some(y)) if x == y => Ok(Some(x)),
                    _ => Err(LgError::MatchFailure { function: name.to_string(), head: "a union".into() }),
                }
            }
            _ => Err(type_error("expected a graph")),
        }
    }

    /// Cells for the roots of a closed graph.
    fn load(&mut self, g: &Graph) -> Result<Vec<Loc>, LgError> {
        if g.outputs().next().is_some() {
            return Err(type_error("argument graphs must be closed"));
        }
        let base = self.heap.len();
        for _ in 0..g.vertex_count() {
            self.alloc(Cell::Done(Value::Nil));
        }
        let mut out: Vec<Vec<Loc>> = vec![Vec::new(); g.vertex_count()];
        for (v, l, u) in g.edges() {
            let item = match l {
                Some(l) => self.alloc(Cell::Done(Value::Edge(l.clone(), base + u))),
                None => base + u,
            };
            out[*v].push(item);
        }
        for (v, items) in out.into_iter().enumerate() {
            let value = match items.len() {
                0 => Value::Nil,
                _ => {
                    let mut acc = self.alloc(Cell::Done(Value::Nil));
                    for i in items.into_iter().rev() {
                        acc = self.alloc(Cell::Done(Value::Union(i, acc)));
                    }
                    Value::Union(acc, self.alloc(Cell::Done(Value::Nil)))
                }
            };
            self.heap[base + v] = Cell::Done(value);
        }
        Ok(g.roots().iter().map(|r| base + r).collect())
    }

    fn readback(&mut self, roots: &[Loc]) -> Result<Graph, LgError> {
        let mut ids: BTreeMap<Loc, usize> = BTreeMap::new();
        let mut queue = Vec::new();
        let mut edges = Vec::new();
        let mut vertex = |l: Loc, queue: &mut Vec<Loc>| {
            let next = ids.len();
            *ids.entry(l).or_insert_with(|| {
                queue.push(l);
                next
            })
        };
        let root_ids: Vec<usize> = roots.iter().map(|l| vertex(*l, &mut queue)).collect();
        while let Some(l) = queue.pop() {
            let v = vertex(l, &mut queue);
            match self.force(l)? {
                Value::Nil => {}
                Value::Edge(a, c) => edges.push((v, Some(a), vertex(c, &mut queue))),
                Value::Union(a, b) => {
                    edges.push((v, None, vertex(a, &mut queue)));
                    edges.push((v, None, vertex(b, &mut queue)));
                }
                _ => return Err(type_error("a graph cell holds a non-graph value")),
            }
        }
        let n = roots.len();
        let names = if n == 1 { Context::unit() } else { Context::unit().copies(n) };
        let g = Graph::new(ids.len(), edges, root_ids, Vec::new(), names, Context::empty());
        Ok(eliminate_epsilon(&g))
    }
}
