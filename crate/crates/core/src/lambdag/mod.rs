//! The λG calculus: a simply typed λ-calculus with graph constants `⊙`, `∪`,
//! `ℓ:−` and a first-order `fix`, the translation of typed terms into it and
//! back, a call-by-need evaluator whose black hole reads as `⊙`, and the
//! recursion operators `srec`/`prec` as source-to-source rewrites.

mod eval;
mod ops;
mod print;
mod translate;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::GraphError;
use crate::syntax::Label;
use crate::typing::TypeError;

pub use eval::{lg_eval, lg_eval_with, LgProgram, MAX_STEPS};
pub use ops::{beta_root, eliminate, lg_prec, lg_srec, substitute};
pub use print::parse_lg;
pub use translate::{clause_table, inverse, translate};

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum LgError {
    #[error("type error: {0}")]
    TypeError(String),
    #[error("conditional on a non-boolean value")]
    StuckConditional,
    #[error("not in the image of the translation: {0}")]
    NotInImage(String),
    #[error("clause table is not a case analysis on its label: {0}")]
    NonCanonicalClauseTable(String),
    #[error("no clause of {function} matches {head}")]
    MatchFailure { function: String, head: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("evaluation exceeded {0} steps")]
    FuelExhausted(usize),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Types; products are kept flat with `1 × τ = τ`, so build them with
/// [`LgType::prod`].
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum LgType {
    Unit,
    G,
    L,
    B,
    /// At least two components, none of them a product or `1`.
    Prod(Vec<LgType>),
    Arrow(Box<LgType>, Box<LgType>),
}

impl LgType {
    pub fn prod<I: IntoIterator<Item = LgType>>(items: I) -> LgType {
        let mut out = Vec::new();
        for t in items {
            match t {
                LgType::Unit => {}
                LgType::Prod(ts) => out.extend(ts),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => LgType::Unit,
            1 => out.pop().unwrap(),
            _ => LgType::Prod(out),
        }
    }

    pub fn arrow(a: LgType, b: LgType) -> LgType {
        LgType::Arrow(Box::new(a), Box::new(b))
    }

    /// `G^n`.
    pub fn graphs(n: usize) -> LgType {
        LgType::prod(vec![LgType::G; n])
    }

    /// Flat components; `1` has none.
    pub fn components(&self) -> Vec<LgType> {
        match self {
            LgType::Unit => Vec::new(),
            LgType::Prod(ts) => ts.clone(),
            t => vec![t.clone()],
        }
    }

    pub fn width(&self) -> usize {
        match self {
            LgType::Unit => 0,
            LgType::Prod(ts) => ts.len(),
            _ => 1,
        }
    }

    /// `Some(n)` when the type is `G^n`.
    pub fn graph_power(&self) -> Option<usize> {
        let cs = self.components();
        cs.iter().all(|c| *c == LgType::G).then_some(cs.len())
    }
}

impl fmt::Display for LgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LgType::Unit => f.write_str("1"),
            LgType::G => f.write_str("G"),
            LgType::L => f.write_str("L"),
            LgType::B => f.write_str("B"),
            LgType::Prod(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{}", t)?;
                }
                f.write_str(")")
            }
            LgType::Arrow(a, b) => write!(f, "({}->{})", a, b),
        }
    }
}

/// Constants. `Fix`, `If`, `Proj`, `Srec` and `Prec` are typed only when
/// applied.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum Const {
    /// `⊙`, the black hole.
    Nil,
    Union,
    /// `− : −`
    Edge,
    Fix,
    Label(Label),
    True,
    False,
    If,
    /// `≡` on labels.
    Eq,
    /// 1-based projection out of a flat tuple.
    Proj(usize),
    Srec,
    Prec,
    /// A bfun from `G^arity` to `G^coarity`, resolved against an [`LgProgram`].
    Fun { name: String, arity: usize, coarity: usize },
}

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum LgTerm {
    Var(String),
    /// `λ(x1,…,xn). t`; one binder is a plain `λx. t`.
    Lam(Vec<(String, LgType)>, Box<LgTerm>),
    App(Box<LgTerm>, Box<LgTerm>),
    /// `()` when empty; never a single component.
    Tuple(Vec<LgTerm>),
    Const(Const),
}

impl LgTerm {
    pub fn var(x: &str) -> LgTerm {
        LgTerm::Var(x.to_string())
    }

    /// A λ over graph-typed binders.
    pub fn lam<S: AsRef<str>>(xs: &[S], body: LgTerm) -> LgTerm {
        LgTerm::Lam(xs.iter().map(|x| (x.as_ref().to_string(), LgType::G)).collect(), Box::new(body))
    }

    pub fn app(f: LgTerm, a: LgTerm) -> LgTerm {
        LgTerm::App(Box::new(f), Box::new(a))
    }

    pub fn tuple(mut ts: Vec<LgTerm>) -> LgTerm {
        if ts.len() == 1 {
            ts.pop().unwrap()
        } else {
            LgTerm::Tuple(ts)
        }
    }

    pub fn nil() -> LgTerm {
        LgTerm::Const(Const::Nil)
    }

    pub fn label(l: &str) -> LgTerm {
        LgTerm::Const(Const::Label(Label::new(l)))
    }

    pub fn edge(l: &str, t: LgTerm) -> LgTerm {
        LgTerm::edge_with(LgTerm::label(l), t)
    }

    /// An edge whose label is any `L`-typed term.
    pub fn edge_with(l: LgTerm, t: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::Edge), LgTerm::Tuple(vec![l, t]))
    }

    pub fn union(s: LgTerm, t: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::Union), LgTerm::Tuple(vec![s, t]))
    }

    pub fn fix(f: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::Fix), f)
    }

    pub fn ite(c: LgTerm, s: LgTerm, t: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::If), LgTerm::Tuple(vec![c, s, t]))
    }

    pub fn eq(a: LgTerm, b: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::Eq), LgTerm::Tuple(vec![a, b]))
    }

    pub fn proj(i: usize, t: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::Proj(i)), t)
    }

    pub fn srec(e: LgTerm, t: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::app(LgTerm::Const(Const::Srec), e), t)
    }

    pub fn prec(e: LgTerm, t: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::app(LgTerm::Const(Const::Prec), e), t)
    }

    pub fn fun(name: &str, arity: usize, coarity: usize, arg: LgTerm) -> LgTerm {
        LgTerm::app(LgTerm::Const(Const::Fun { name: name.to_string(), arity, coarity }), arg)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            LgTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            LgTerm::Lam(bs, body) => {
                let n = bound.len();
                bound.extend(bs.iter().map(|b| b.0.clone()));
                body.collect_free(bound, out);
                bound.truncate(n);
            }
            LgTerm::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            LgTerm::Tuple(ts) => ts.iter().for_each(|t| t.collect_free(bound, out)),
            LgTerm::Const(_) => {}
        }
    }

    /// Every variable name, bound or free.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            LgTerm::Var(x) => {
                out.insert(x.clone());
            }
            LgTerm::Lam(bs, body) => {
                out.extend(bs.iter().map(|b| b.0.clone()));
                body.collect_names(out);
            }
            LgTerm::App(f, a) => {
                f.collect_names(out);
                a.collect_names(out);
            }
            LgTerm::Tuple(ts) => ts.iter().for_each(|t| t.collect_names(out)),
            LgTerm::Const(_) => {}
        }
    }

    /// The type of a closed term; `srec`/`prec` applications are eliminated
    /// first.
    pub fn type_of(&self) -> Result<LgType, LgError> {
        let t = eliminate(self)?;
        Ok(eval::compile(&t, &mut Vec::new())?.1)
    }
}

fn type_error(msg: impl Into<String>) -> LgError {
    LgError::TypeError(msg.into())
}
