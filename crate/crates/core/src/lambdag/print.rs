use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::translate::is_reserved;
use super::{Const, LgError, LgTerm, LgType};
use crate::syntax::{label_text, Label};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Lam,
    If,
    Union,
    Eq,
    App,
    Edge,
    Atom,
}

fn kind(t: &LgTerm) -> Kind {
    match t {
        LgTerm::Lam(..) => Kind::Lam,
        LgTerm::App(f, a) => match (&**f, &**a) {
            (LgTerm::Const(Const::If), LgTerm::Tuple(ts)) if ts.len() == 3 => Kind::If,
            (LgTerm::Const(Const::Union), LgTerm::Tuple(ts)) if ts.len() == 2 => Kind::Union,
            (LgTerm::Const(Const::Eq), LgTerm::Tuple(ts)) if ts.len() == 2 => Kind::Eq,
            (LgTerm::Const(Const::Edge), LgTerm::Tuple(ts)) if ts.len() == 2 && edge_label(&ts[0]) => Kind::Edge,
            _ => Kind::App,
        },
        LgTerm::Var(_) | LgTerm::Tuple(_) | LgTerm::Const(_) => Kind::Atom,
    }
}

fn edge_label(t: &LgTerm) -> bool {
    matches!(t, LgTerm::Var(_) | LgTerm::Const(Const::Label(_)))
}

fn parts(t: &LgTerm) -> &[LgTerm] {
    match t {
        LgTerm::App(_, a) => match &**a {
            LgTerm::Tuple(ts) => ts,
            _ => unreachable!("checked by kind"),
        },
        _ => unreachable!("checked by kind"),
    }
}

struct Printer<'a, 'b> {
    f: &'a mut fmt::Formatter<'b>,
    bound: Vec<String>,
}

impl Printer<'_, '_> {
    fn at(&mut self, t: &LgTerm, allowed: &[Kind]) -> fmt::Result {
        if allowed.contains(&kind(t)) {
            self.term(t)
        } else {
            self.f.write_str("(")?;
            self.term(t)?;
            self.f.write_str(")")
        }
    }

    fn label(&mut self, l: &Label) -> fmt::Result {
        let text = label_text(l);
        if self.bound.contains(&text) || is_reserved(&text) {
            write!(self.f, "\"{}\"", l.text())
        } else {
            self.f.write_str(&text)
        }
    }

    fn union_operands<'t>(t: &'t LgTerm, out: &mut Vec<&'t LgTerm>) {
        if kind(t) == Kind::Union {
            let ps = parts(t);
            out.push(&ps[0]);
            Self::union_operands(&ps[1], out);
        } else {
            out.push(t);
        }
    }

    fn term(&mut self, t: &LgTerm) -> fmt::Result {
        match kind(t) {
            Kind::Lam => {
                let LgTerm::Lam(bs, b) = t else { unreachable!() };
                self.f.write_str("\\")?;
                let one = bs.len() == 1;
                if !one {
                    self.f.write_str("(")?;
                }
                for (i, (x, ty)) in bs.iter().enumerate() {
                    if i > 0 {
                        self.f.write_str(",")?;
                    }
                    self.f.write_str(x)?;
                    if *ty != LgType::G {
                        write!(self.f, "^{}", ty)?;
                    }
                }
                if !one {
                    self.f.write_str(")")?;
                }
                self.f.write_str(". ")?;
                let n = self.bound.len();
                self.bound.extend(bs.iter().map(|b| b.0.clone()));
                let r = self.term(b);
                self.bound.truncate(n);
                r
            }
            Kind::If => {
                let ps = parts(t);
                self.f.write_str("if ")?;
                self.term(&ps[0])?;
                self.f.write_str(" then ")?;
                self.term(&ps[1])?;
                self.f.write_str(" else ")?;
                self.term(&ps[2])
            }
            Kind::Union => {
                let mut ops = Vec::new();
                Self::union_operands(t, &mut ops);
                for (i, u) in ops.into_iter().enumerate() {
                    if i > 0 {
                        self.f.write_str(" U ")?;
                    }
                    self.at(u, &[Kind::App, Kind::Atom])?;
                }
                Ok(())
            }
            Kind::Eq => {
                let ps = parts(t);
                self.at(&ps[0], &[Kind::App, Kind::Atom])?;
                self.f.write_str(" == ")?;
                self.at(&ps[1], &[Kind::App, Kind::Atom])
            }
            Kind::App => {
                let LgTerm::App(g, a) = t else { unreachable!() };
                self.at(g, &[Kind::App, Kind::Atom])?;
                self.f.write_str(" ")?;
                self.at(a, &[Kind::Atom])
            }
            Kind::Edge => {
                let ps = parts(t);
                match &ps[0] {
                    LgTerm::Var(x) => self.f.write_str(x)?,
                    LgTerm::Const(Const::Label(l)) => self.label(l)?,
                    _ => unreachable!("checked by kind"),
                }
                self.f.write_str(":")?;
                self.at(&ps[1], &[Kind::Edge, Kind::Atom])
            }
            Kind::Atom => match t {
                LgTerm::Var(x) => self.f.write_str(x),
                LgTerm::Tuple(ts) => {
                    self.f.write_str("(")?;
                    for (i, u) in ts.iter().enumerate() {
                        if i > 0 {
                            self.f.write_str(", ")?;
                        }
                        self.term(u)?;
                    }
                    self.f.write_str(")")
                }
                LgTerm::Const(c) => match c {
                    Const::Nil => self.f.write_str("⊙"),
                    Const::Union => self.f.write_str("(U)"),
                    Const::Edge => self.f.write_str("(:)"),
                    Const::Eq => self.f.write_str("(==)"),
                    Const::Fix => self.f.write_str("fix"),
                    Const::If => self.f.write_str("ite"),
                    Const::True => self.f.write_str("true"),
                    Const::False => self.f.write_str("false"),
                    Const::Srec => self.f.write_str("srec"),
                    Const::Prec => self.f.write_str("prec"),
                    Const::Proj(i) => write!(self.f, "pi{}", i),
                    Const::Label(l) => {
                        self.f.write_str("'")?;
                        self.label(l)
                    }
                    Const::Fun { name, arity, coarity } => {
                        if (*arity, *coarity) == (1, 1) {
                            self.f.write_str(name)
                        } else {
                            write!(self.f, "{}{{{},{}}}", name, arity, coarity)
                        }
                    }
                },
                _ => unreachable!("checked by kind"),
            },
        }
    }
}

impl fmt::Display for LgTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { f, bound: Vec::new() }.term(self)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Comma,
    Colon,
    Caret,
    EqEq,
    Arrow,
    Star,
    LBrace,
    RBrace,
    Quote,
    Nil,
    Ident(String),
    Str(String),
}

fn ident_char(c: char, next: Option<char>) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '?' | '$' | '\'') || (c == '-' && next.is_some_and(|n| n.is_ascii_alphanumeric()))
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, LgError> {
    let cs: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos, msg: &str| LgError::Parse { pos, msg: msg.to_string() };
    while i < cs.len() {
        let (pos, c) = cs[i];
        let next = cs.get(i + 1).map(|p| p.1);
        let single = match c {
            '\\' | 'λ' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '^' => Some(Tok::Caret),
            '*' => Some(Tok::Star),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '\'' => Some(Tok::Quote),
            '⊙' => Some(Tok::Nil),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '=' && next == Some('=') {
            out.push((pos, Tok::EqEq));
            i += 2;
        } else if c == '-' && next == Some('>') {
            out.push((pos, Tok::Arrow));
            i += 2;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match cs.get(i).map(|p| p.1) {
                    None => return Err(err(pos, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => {
                        let e = cs.get(i + 1).map(|p| p.1).ok_or_else(|| err(pos, "unterminated string"))?;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            e => e,
                        });
                        i += 2;
                    }
                    Some(c) => {
                        s.push(c);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((pos, Tok::Str(s)));
        } else if ident_char(c, next) && c != '\'' && c != '-' {
            let mut s = String::new();
            while i < cs.len() && ident_char(cs[i].1, cs.get(i + 1).map(|p| p.1)) {
                s.push(cs[i].1);
                i += 1;
            }
            out.push((pos, Tok::Ident(s)));
        } else {
            return Err(err(pos, &format!("unexpected character {:?}", c)));
        }
    }
    Ok(out)
}

/// Parses the printed form, e.g. `\(y1,y2). (\x. a:((b:x) U (c:x))) (fix (\x. x))`.
/// An identifier before `:` is a label unless a binder of that name is in
/// scope; other unbound identifiers name bfuns.
pub fn parse_lg(src: &str) -> Result<LgTerm, LgError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, bound: Vec::new(), end: src.len() };
    let t = p.expr()?;
    if p.at < p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(t)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    bound: Vec<String>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|t| &t.1)
    }

    fn error(&self, msg: &str) -> LgError {
        let pos = self.toks.get(self.at).map_or(self.end, |t| t.0);
        LgError::Parse { pos, msg: msg.to_string() }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), LgError> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {:?}", t)))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == w)
    }

    fn expr(&mut self) -> Result<LgTerm, LgError> {
        match self.peek() {
            Some(Tok::Lambda) => {
                self.at += 1;
                let bs = self.binders()?;
                self.expect(Tok::Dot)?;
                let n = self.bound.len();
                self.bound.extend(bs.iter().map(|b| b.0.clone()));
                let body = self.expr();
                self.bound.truncate(n);
                Ok(LgTerm::Lam(bs, Box::new(body?)))
            }
            _ if self.is_word("if") => {
                self.at += 1;
                let c = self.expr()?;
                self.word("then")?;
                let s = self.expr()?;
                self.word("else")?;
                let e = self.expr()?;
                Ok(LgTerm::ite(c, s, e))
            }
            _ => self.union(),
        }
    }

    fn word(&mut self, w: &str) -> Result<(), LgError> {
        if self.is_word(w) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", w)))
        }
    }

    fn binders(&mut self) -> Result<Vec<(String, LgType)>, LgError> {
        if self.peek() == Some(&Tok::LParen) {
            self.at += 1;
            let mut out = Vec::new();
            if self.peek() == Some(&Tok::RParen) {
                self.at += 1;
                return Ok(out);
            }
            loop {
                out.push(self.binder()?);
                match self.bump() {
                    Some(Tok::Comma) => {}
                    Some(Tok::RParen) => return Ok(out),
                    _ => return Err(self.error("expected `,` or `)` in binders")),
                }
            }
        }
        Ok(alloc::vec![self.binder()?])
    }

    fn binder(&mut self) -> Result<(String, LgType), LgError> {
        let Some(Tok::Ident(x)) = self.bump() else { return Err(self.error("expected a binder")) };
        if self.peek() == Some(&Tok::Caret) {
            self.at += 1;
            return Ok((x, self.ty()?));
        }
        Ok((x, LgType::G))
    }

    fn ty(&mut self) -> Result<LgType, LgError> {
        let mut items = alloc::vec![self.ty_atom()?];
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            items.push(self.ty_atom()?);
        }
        let a = LgType::prod(items);
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            return Ok(LgType::arrow(a, self.ty()?));
        }
        Ok(a)
    }

    fn ty_atom(&mut self) -> Result<LgType, LgError> {
        match self.bump() {
            Some(Tok::Ident(s)) => match s.as_str() {
                "G" => Ok(LgType::G),
                "L" => Ok(LgType::L),
                "B" => Ok(LgType::B),
                "1" => Ok(LgType::Unit),
                _ => Err(self.error("unknown type")),
            },
            Some(Tok::LParen) => {
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.error("expected a type")),
        }
    }

    fn union(&mut self) -> Result<LgTerm, LgError> {
        let t = self.eq()?;
        if self.is_word("U") {
            self.at += 1;
            return Ok(LgTerm::union(t, self.union()?));
        }
        Ok(t)
    }

    fn eq(&mut self) -> Result<LgTerm, LgError> {
        let t = self.app()?;
        if self.peek() == Some(&Tok::EqEq) {
            self.at += 1;
            return Ok(LgTerm::eq(t, self.app()?));
        }
        Ok(t)
    }

    fn starts_primary(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => !matches!(s.as_str(), "U" | "then" | "else" | "if"),
            Some(Tok::LParen | Tok::Quote | Tok::Nil | Tok::Str(_)) => true,
            _ => false,
        }
    }

    fn app(&mut self) -> Result<LgTerm, LgError> {
        let mut t = self.primary()?;
        while self.starts_primary() {
            t = LgTerm::app(t, self.primary()?);
        }
        Ok(t)
    }

    fn label_of(&self, s: &str) -> LgTerm {
        if self.bound.iter().any(|b| b == s) {
            LgTerm::var(s)
        } else {
            LgTerm::label(s)
        }
    }

    fn primary(&mut self) -> Result<LgTerm, LgError> {
        if self.peek2() == Some(&Tok::Colon) {
            let l = match self.peek() {
                Some(Tok::Ident(s)) => self.label_of(s),
                Some(Tok::Str(s)) => LgTerm::label(s),
                _ => return Err(self.error("expected a label")),
            };
            self.at += 2;
            return Ok(LgTerm::edge_with(l, self.primary()?));
        }
        match self.bump() {
            Some(Tok::Nil) => Ok(LgTerm::nil()),
            Some(Tok::Quote) => match self.bump() {
                Some(Tok::Ident(s) | Tok::Str(s)) => Ok(LgTerm::label(&s)),
                _ => Err(self.error("expected a label after '")),
            },
            Some(Tok::Str(s)) => Ok(LgTerm::label(&s)),
            Some(Tok::Ident(s)) => self.word_atom(s),
            Some(Tok::LParen) => {
                match (self.peek(), self.peek2()) {
                    (Some(Tok::RParen), _) => {
                        self.at += 1;
                        return Ok(LgTerm::Tuple(Vec::new()));
                    }
                    (Some(Tok::Ident(s)), Some(Tok::RParen)) if s == "U" => {
                        self.at += 2;
                        return Ok(LgTerm::Const(Const::Union));
                    }
                    (Some(Tok::Colon), Some(Tok::RParen)) => {
                        self.at += 2;
                        return Ok(LgTerm::Const(Const::Edge));
                    }
                    (Some(Tok::EqEq), Some(Tok::RParen)) => {
                        self.at += 2;
                        return Ok(LgTerm::Const(Const::Eq));
                    }
                    _ => {}
                }
                let mut ts = alloc::vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                    ts.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                Ok(LgTerm::tuple(ts))
            }
            _ => {
                self.at -= 1;
                Err(self.error("expected a term"))
            }
        }
    }

    fn word_atom(&mut self, s: String) -> Result<LgTerm, LgError> {
        if self.bound.contains(&s) {
            return Ok(LgTerm::Var(s));
        }
        Ok(LgTerm::Const(match s.as_str() {
            "nil" => Const::Nil,
            "fix" => Const::Fix,
            "ite" => Const::If,
            "true" => Const::True,
            "false" => Const::False,
            "srec" => Const::Srec,
            "prec" => Const::Prec,
            _ if is_reserved(&s) && s.starts_with("pi") => Const::Proj(s[2..].parse().map_err(|_| self.error("bad projection"))?),
            _ => {
                let (mut arity, mut coarity) = (1, 1);
                if self.peek() == Some(&Tok::LBrace) {
                    self.at += 1;
                    arity = self.number()?;
                    self.expect(Tok::Comma)?;
                    coarity = self.number()?;
                    self.expect(Tok::RBrace)?;
                }
                Const::Fun { name: s, arity, coarity }
            }
        }))
    }

    fn number(&mut self) -> Result<usize, LgError> {
        match self.bump() {
            Some(Tok::Ident(s)) => s.parse().map_err(|_| self.error("expected a number")),
            _ => Err(self.error("expected a number")),
        }
    }
}
