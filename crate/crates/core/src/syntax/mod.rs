//! Concrete syntax: markers, labels, contexts, raw terms and programs.

mod lexer;
mod parser;
mod print;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use parser::{parse_program, parse_term};
pub use print::{label_text, print_term};

/// A marker name. Stored with its leading `&`, so the default marker is `"&"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Marker(String);

impl Marker {
    /// Builds a marker, adding the `&` prefix when missing.
    pub fn new(name: &str) -> Marker {
        if name.starts_with('&') {
            Marker(name.to_string())
        } else {
            let mut s = String::from("&");
            s.push_str(name);
            Marker(s)
        }
    }

    pub fn default_marker() -> Marker {
        Marker("&".to_string())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The name without the `&` prefix; empty for the default marker.
    pub fn stem(&self) -> &str {
        &self.0[1..]
    }

    pub fn is_default(&self) -> bool {
        self.0 == "&"
    }

    pub fn with_suffix(&self, suffix: &str) -> Marker {
        let mut s = self.0.clone();
        s.push_str(suffix);
        Marker(s)
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An edge label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Label(String);

impl Label {
    pub fn new(text: &str) -> Label {
        Label(text.to_string())
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&label_text(self))
    }
}

/// An ordered sequence of pairwise distinct markers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Context(Vec<Marker>);

impl Context {
    pub fn new(markers: Vec<Marker>) -> Result<Context, SyntaxError> {
        let mut seen = BTreeSet::new();
        for m in &markers {
            if !seen.insert(m) {
                return Err(SyntaxError::DuplicateMarker(m.clone()));
            }
        }
        Ok(Context(markers))
    }

    /// Builds a context from bare or `&`-prefixed names.
    pub fn of(names: &[&str]) -> Result<Context, SyntaxError> {
        Context::new(names.iter().map(|n| Marker::new(n)).collect())
    }

    pub fn empty() -> Context {
        Context(Vec::new())
    }

    /// The context `⟨&⟩`.
    pub fn unit() -> Context {
        Context(alloc::vec![Marker::default_marker()])
    }

    pub fn single(m: Marker) -> Context {
        Context(alloc::vec![m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn markers(&self) -> &[Marker] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<&Marker> {
        self.0.get(i)
    }

    pub fn position(&self, m: &Marker) -> Option<usize> {
        self.0.iter().position(|x| x == m)
    }

    pub fn contains(&self, m: &Marker) -> bool {
        self.0.contains(m)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Marker> {
        self.0.iter()
    }

    pub fn same_set(&self, other: &Context) -> bool {
        self.len() == other.len() && self.0.iter().all(|m| other.contains(m))
    }

    /// The sub-context `[from, to)`.
    pub fn slice(&self, from: usize, to: usize) -> Context {
        Context(self.0[from..to].to_vec())
    }

    /// Concatenation `X1 + … + Xn`. Markers occurring in more than one part
    /// get the suffix `$i` of their part (1-based) until all are distinct.
    pub fn concat(parts: &[Context]) -> Context {
        let mut parts: Vec<Vec<Marker>> = parts.iter().map(|c| c.0.clone()).collect();
        loop {
            let mut count: BTreeMap<&Marker, usize> = BTreeMap::new();
            for p in &parts {
                for m in p {
                    *count.entry(m).or_insert(0) += 1;
                }
            }
            let clashing: BTreeSet<Marker> = count
                .into_iter()
                .filter(|(_, n)| *n > 1)
                .map(|(m, _)| m.clone())
                .collect();
            if clashing.is_empty() {
                return Context(parts.into_iter().flatten().collect());
            }
            for (i, p) in parts.iter_mut().enumerate() {
                let suffix = alloc::format!("${}", i + 1);
                for m in p.iter_mut() {
                    if clashing.contains(m) {
                        *m = m.with_suffix(&suffix);
                    }
                }
            }
        }
    }

    /// The context of a cycle body, `Y′ + X`, where `Y′` primes the markers of
    /// `Y` that clash with `X` so that the bound markers shadow the outer ones.
    pub fn cycle_body(outer: &Context, bound: &Context) -> Context {
        let mut out: Vec<Marker> = Vec::with_capacity(outer.len() + bound.len());
        for m in &outer.0 {
            let mut m = m.clone();
            while bound.contains(&m) || out.contains(&m) {
                m = m.with_suffix("'");
            }
            out.push(m);
        }
        out.extend(bound.0.iter().cloned());
        Context(out)
    }

    /// `k` copies of every marker, marker-major: `y1$1 … y1$k, y2$1 …`.
    pub fn copies(&self, k: usize) -> Context {
        if k == 1 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.len() * k);
        for m in &self.0 {
            for j in 1..=k {
                out.push(m.with_suffix(&alloc::format!("${}", j)));
            }
        }
        // the numeric suffix after the last `$` keeps copies distinct
        Context(out)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", m)?;
        }
        f.write_str("⟩")
    }
}

/// Untyped syntax tree as written.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum RawTerm {
    MarkerRef(Marker),
    Edge(Label, Box<RawTerm>),
    Compose(Box<RawTerm>, Box<RawTerm>),
    /// At least two components.
    Pair(Vec<RawTerm>),
    Cycle(Box<RawTerm>),
    Nil,
    Emp,
    Man,
    Def(Marker, Box<RawTerm>),
    Call(String, Box<RawTerm>),
}

impl RawTerm {
    pub fn marker(name: &str) -> RawTerm {
        RawTerm::MarkerRef(Marker::new(name))
    }

    pub fn edge(label: &str, t: RawTerm) -> RawTerm {
        RawTerm::Edge(Label::new(label), Box::new(t))
    }

    pub fn compose(s: RawTerm, t: RawTerm) -> RawTerm {
        RawTerm::Compose(Box::new(s), Box::new(t))
    }

    /// Pair with the flattening convention: zero components give `()`, one gives
    /// the component itself.
    pub fn pair(mut ts: Vec<RawTerm>) -> RawTerm {
        match ts.len() {
            0 => RawTerm::Emp,
            1 => ts.pop().unwrap(),
            _ => RawTerm::Pair(ts),
        }
    }

    pub fn cycle(t: RawTerm) -> RawTerm {
        RawTerm::Cycle(Box::new(t))
    }

    pub fn def(name: &str, t: RawTerm) -> RawTerm {
        RawTerm::Def(Marker::new(name), Box::new(t))
    }

    /// `s ∪ t`, that is `! @ (s ⊕ t)`.
    pub fn union(s: RawTerm, t: RawTerm) -> RawTerm {
        RawTerm::Compose(Box::new(RawTerm::Man), Box::new(RawTerm::Pair(alloc::vec![s, t])))
    }

    /// Right-nested union of all terms; `{}` when empty.
    pub fn union_all(mut ts: Vec<RawTerm>) -> RawTerm {
        let mut acc = match ts.pop() {
            None => return RawTerm::Nil,
            Some(t) => t,
        };
        while let Some(t) = ts.pop() {
            acc = RawTerm::union(t, acc);
        }
        acc
    }

    pub fn call(name: &str, t: RawTerm) -> RawTerm {
        RawTerm::Call(name.to_string(), Box::new(t))
    }

    /// Free markers in order of first occurrence.
    pub fn free_markers(&self) -> Vec<Marker> {
        fn go(t: &RawTerm, out: &mut Vec<Marker>) {
            match t {
                RawTerm::MarkerRef(m) => {
                    if !out.contains(m) {
                        out.push(m.clone())
                    }
                }
                RawTerm::Edge(_, u) | RawTerm::Def(_, u) | RawTerm::Call(_, u) => go(u, out),
                // markers of the left operand refer to the right operand's roots
                RawTerm::Compose(_, u) => go(u, out),
                RawTerm::Pair(ts) => ts.iter().for_each(|u| go(u, out)),
                RawTerm::Cycle(u) => {
                    let bound = raw_root_names(u);
                    let mut inner = Vec::new();
                    go(u, &mut inner);
                    for m in inner {
                        if !bound.contains(&m) && !out.contains(&m) {
                            out.push(m);
                        }
                    }
                }
                RawTerm::Nil | RawTerm::Emp | RawTerm::Man => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

/// Root names of a raw term where they are syntactically evident; used only to
/// find which markers a cycle binds.
fn raw_root_names(t: &RawTerm) -> Vec<Marker> {
    match t {
        RawTerm::Def(m, _) => alloc::vec![m.clone()],
        RawTerm::Pair(ts) => ts.iter().flat_map(raw_root_names).collect(),
        RawTerm::Compose(s, _) => raw_root_names(s),
        RawTerm::Cycle(u) => raw_root_names(u),
        RawTerm::Emp => Vec::new(),
        _ => alloc::vec![Marker::default_marker()],
    }
}

/// A clause pattern.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Pattern {
    Concrete(Label),
    /// A label variable covering every label outside `excluded`.
    Var { name: String, excluded: BTreeSet<Label> },
    /// `{}`; only in bfun definitions.
    Nil,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    pub pattern: Pattern,
    /// The argument variable, as a marker name (`t` is `&t`).
    pub arg: Marker,
    pub body: RawTerm,
}

/// Clauses of one sfun or bfun definition, in source order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FunSource {
    pub clauses: Vec<Clause>,
}

pub type SfunSource = FunSource;
pub type BfunSource = FunSource;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub sfuns: BTreeMap<String, SfunSource>,
    pub bfuns: BTreeMap<String, BfunSource>,
    pub main: Option<RawTerm>,
}

impl Program {
    pub fn is_empty(&self) -> bool {
        self.sfuns.is_empty() && self.bfuns.is_empty() && self.main.is_none()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("duplicate clause in `{0}`: {1}")]
    DuplicateClause(String, String),
    #[error("overlapping patterns in `{0}`: {1}")]
    OverlappingPatterns(String, String),
    #[error("`{0}` has no clause for labels outside its concrete patterns")]
    IncompletePatterns(String),
    #[error("`{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("duplicate marker {0} in context")]
    DuplicateMarker(Marker),
}

#[cfg(test)]
mod tests;
