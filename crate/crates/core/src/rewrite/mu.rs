//! μ-terms `x | ℓ(t) | μx.t | 0 | t + t` and their correspondence with `N`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{is_n_form, RewriteError};
use crate::syntax::{label_text, Context, Label, Marker};
use crate::typing::{Term, TypedTerm};

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum MuTerm {
    /// A variable; `"&"` for the default marker, else the marker's stem.
    Var(String),
    App(Label, Box<MuTerm>),
    Mu(String, Box<MuTerm>),
    Zero,
    Plus(Box<MuTerm>, Box<MuTerm>),
}

impl MuTerm {
    pub fn var(x: &str) -> MuTerm {
        MuTerm::Var(x.to_string())
    }

    pub fn app(l: &str, t: MuTerm) -> MuTerm {
        MuTerm::App(Label::new(l), Box::new(t))
    }

    pub fn mu(x: &str, t: MuTerm) -> MuTerm {
        MuTerm::Mu(x.to_string(), Box::new(t))
    }

    pub fn plus(s: MuTerm, t: MuTerm) -> MuTerm {
        MuTerm::Plus(Box::new(s), Box::new(t))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &MuTerm, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                MuTerm::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                MuTerm::App(_, u) => go(u, bound, out),
                MuTerm::Mu(x, u) => {
                    bound.push(x.clone());
                    go(u, bound, out);
                    bound.pop();
                }
                MuTerm::Zero => {}
                MuTerm::Plus(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

fn var_name(m: &Marker) -> String {
    if m.is_default() {
        "&".to_string()
    } else {
        m.stem().to_string()
    }
}

fn marker_of(x: &str) -> Marker {
    if x == "&" {
        Marker::default_marker()
    } else {
        Marker::new(x)
    }
}

/// The μ-term of an `N`-form of type `⟨&⟩`. A binder is primed when it would
/// capture an outer variable used in its body.
pub fn to_mu(t: &TypedTerm) -> Result<MuTerm, RewriteError> {
    if t.target().len() != 1 {
        return Err(RewriteError::TypeNotSingleton(t.target().clone()));
    }
    if !is_n_form(t.term()) {
        return Err(RewriteError::NotInN(t.to_string()));
    }
    let mut scope: Vec<String> = t.source().iter().map(var_name).collect();
    Ok(mu_of(t.term(), &mut scope))
}

fn mu_of(t: &Term, scope: &mut Vec<String>) -> MuTerm {
    match t {
        Term::Var(i) => MuTerm::Var(scope[*i].clone()),
        Term::Nil => MuTerm::Zero,
        Term::Label(l, u) => MuTerm::App(l.clone(), Box::new(mu_of(u, scope))),
        Term::Compose(_, p) => match &**p {
            Term::Pair(ts) => MuTerm::plus(mu_of(&ts[0], scope), mu_of(&ts[1], scope)),
            _ => unreachable!("checked by is_n_form"),
        },
        Term::Cycle(u) => match &**u {
            Term::Def(x, b) => {
                let mut name = var_name(x);
                let mut used = BTreeSet::new();
                outer_refs(b, scope.len(), &mut used);
                let captures = |n: &str, sc: &[String]| used.iter().any(|&i| sc[i] == n);
                while captures(&name, scope) {
                    name.push('\'');
                }
                scope.push(name.clone());
                let body = mu_of(b, scope);
                scope.pop();
                MuTerm::Mu(name, Box::new(body))
            }
            _ => unreachable!("checked by is_n_form"),
        },
        _ => unreachable!("checked by is_n_form"),
    }
}

fn outer_refs(t: &Term, below: usize, out: &mut BTreeSet<usize>) {
    t.visit(&mut |u| {
        if let Term::Var(i) = u {
            if *i < below {
                out.insert(*i);
            }
        }
    });
}

/// The `N`-form of a μ-term over its free variables in order of first
/// occurrence.
pub fn mu_to_term(m: &MuTerm) -> TypedTerm {
    let source = Context::new(m.free_vars().iter().map(|x| marker_of(x)).collect()).expect("distinct names");
    mu_to_term_with(m, &source).expect("free variables are in scope")
}

/// The `N`-form of a μ-term over a given source context.
pub fn mu_to_term_with(m: &MuTerm, source: &Context) -> Result<TypedTerm, RewriteError> {
    let mut scope: Vec<String> = source.iter().map(var_name).collect();
    let term = term_of(m, &mut scope)?;
    Ok(TypedTerm::new(term, source.clone())?)
}

fn term_of(m: &MuTerm, scope: &mut Vec<String>) -> Result<Term, RewriteError> {
    Ok(match m {
        MuTerm::Var(x) => match scope.iter().rposition(|y| y == x) {
            Some(i) => Term::Var(i),
            None => return Err(RewriteError::NotInN(alloc::format!("unbound variable {}", x))),
        },
        MuTerm::App(l, u) => Term::Label(l.clone(), Box::new(term_of(u, scope)?)),
        MuTerm::Mu(x, u) => {
            scope.push(x.clone());
            let body = term_of(u, scope);
            scope.pop();
            Term::cycle(Term::def(marker_of(x), body?))
        }
        MuTerm::Zero => Term::Nil,
        MuTerm::Plus(a, b) => Term::union(term_of(a, scope)?, term_of(b, scope)?),
    })
}

fn plain_var(x: &str) -> bool {
    let mut cs = x.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '\''))
        && x != "mu"
}

/// `mu x. a(x) + 0` style text; `+` associates to the right.
pub fn print_mu(m: &MuTerm) -> String {
    let mut out = String::new();
    pr(m, 0, &mut out);
    out
}

fn pr(m: &MuTerm, prec: u8, out: &mut String) {
    match m {
        MuTerm::Var(x) => {
            if x == "&" || plain_var(x) {
                out.push_str(x);
            } else {
                out.push('&');
                out.push_str(x);
            }
        }
        MuTerm::Zero => out.push('0'),
        MuTerm::App(l, u) => {
            out.push_str(&label_text(l));
            out.push('(');
            pr(u, 0, out);
            out.push(')');
        }
        MuTerm::Mu(x, u) => {
            if prec > 0 {
                out.push('(');
            }
            out.push_str("mu ");
            pr(&MuTerm::Var(x.clone()), 2, out);
            out.push_str(". ");
            pr(u, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
        MuTerm::Plus(a, b) => {
            if prec > 0 {
                out.push('(');
            }
            pr(a, 1, out);
            out.push_str(" + ");
            pr(b, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
    }
}

impl fmt::Display for MuTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_mu(self))
    }
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Word(String),
    Quoted(String),
    Var(String),
    LParen,
    RParen,
    Plus,
    Dot,
    Eof,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, RewriteError> {
    let cs: Vec<char> = src.chars().collect();
    let word = |c: char| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '\'' | '?' | '-');
    let err = |pos: usize, msg: &str| RewriteError::MuParse { pos, msg: msg.to_string() };
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let start = i;
        match c {
            _ if c.is_whitespace() => i += 1,
            '(' | ')' | '+' | '.' => {
                out.push((start, match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '+' => Tok::Plus,
                    _ => Tok::Dot,
                }));
                i += 1;
            }
            'μ' => {
                out.push((start, Tok::Word("mu".to_string())));
                i += 1;
            }
            '&' => {
                i += 1;
                while i < cs.len() && word(cs[i]) {
                    i += 1;
                }
                let name: String = cs[start + 1..i].iter().collect();
                out.push((start, Tok::Var(if name.is_empty() { "&".to_string() } else { name })));
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match cs.get(i) {
                        None => return Err(err(start, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            s.push(match cs.get(i + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some(&c) => c,
                                None => return Err(err(i, "unterminated string")),
                            });
                            i += 2;
                        }
                        Some(&c) => {
                            s.push(c);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push((start, Tok::Quoted(s)));
            }
            _ if c.is_ascii_alphanumeric() || c == '_' => {
                while i < cs.len() && word(cs[i]) {
                    i += 1;
                }
                out.push((start, Tok::Word(cs[start..i].iter().collect())));
            }
            _ => return Err(err(start, "unexpected character")),
        }
    }
    out.push((cs.len(), Tok::Eof));
    Ok(out)
}

/// Parses the text produced by [`print_mu`]; `μ` is accepted for `mu`.
pub fn parse_mu(src: &str) -> Result<MuTerm, RewriteError> {
    let toks = lex(src)?;
    let mut p = MuParser { toks, i: 0 };
    let t = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

struct MuParser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

impl MuParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].1
    }

    fn err(&self, msg: &str) -> RewriteError {
        RewriteError::MuParse { pos: self.toks[self.i].0, msg: msg.to_string() }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), RewriteError> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn expr(&mut self) -> Result<MuTerm, RewriteError> {
        if matches!(self.peek(), Tok::Word(w) if w == "mu") && self.peek2() != &Tok::LParen {
            self.bump();
            let x = match self.bump() {
                Tok::Word(x) | Tok::Var(x) => x,
                _ => return Err(self.err("expected a variable after `mu`")),
            };
            self.expect(Tok::Dot, "expected `.`")?;
            return Ok(MuTerm::Mu(x, Box::new(self.expr()?)));
        }
        let a = self.atom()?;
        if self.peek() == &Tok::Plus {
            self.bump();
            let b = self.expr()?;
            return Ok(MuTerm::plus(a, b));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<MuTerm, RewriteError> {
        match (self.peek().clone(), self.peek2().clone()) {
            (Tok::Word(w), Tok::LParen) | (Tok::Quoted(w), Tok::LParen) => {
                self.bump();
                self.bump();
                let u = self.expr()?;
                self.expect(Tok::RParen, "expected `)`")?;
                Ok(MuTerm::App(Label::new(&w), Box::new(u)))
            }
            (Tok::Word(w), _) if w == "0" => {
                self.bump();
                Ok(MuTerm::Zero)
            }
            (Tok::Word(w), _) | (Tok::Var(w), _) => {
                self.bump();
                Ok(MuTerm::Var(w))
            }
            (Tok::LParen, _) => {
                self.bump();
                let u = self.expr()?;
                self.expect(Tok::RParen, "expected `)`")?;
                Ok(u)
            }
            _ => Err(self.err("expected a μ-term")),
        }
    }
}
