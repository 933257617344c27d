use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lexer::{lex, Tok, Token};
use super::{Clause, FunSource, Label, Marker, Pattern, Program, RawTerm, SyntaxError};

const KEYWORDS: [&str; 6] = ["cycle", "U", "sfun", "bfun", "main", "where"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses a single term.
pub fn parse_term(text: &str) -> Result<RawTerm, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a program of `sfun`, `bfun` and `main` blocks.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut prog = Program::default();
    let mut order: Vec<(String, bool)> = Vec::new();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "sfun" || kw == "bfun" => {
                p.bump();
                let is_bfun = kw == "bfun";
                let mut any = false;
                while p.at_clause_start() {
                    let (name, clause) = p.clause()?;
                    any = true;
                    if let Some((_, b)) = order.iter().find(|(n, _)| *n == name) {
                        if *b != is_bfun {
                            return Err(SyntaxError::DuplicateDefinition(name));
                        }
                    } else {
                        order.push((name.clone(), is_bfun));
                    }
                    let map = if is_bfun { &mut prog.bfuns } else { &mut prog.sfuns };
                    map.entry(name).or_insert_with(FunSource::default).clauses.push(clause);
                }
                if !any {
                    return Err(p.error("expected a clause"));
                }
            }
            Tok::Ident(kw) if kw == "main" => {
                p.bump();
                p.expect(&Tok::Eq, "`=`")?;
                if prog.main.is_some() {
                    return Err(SyntaxError::DuplicateDefinition("main".to_string()));
                }
                prog.main = Some(p.term()?);
            }
            _ => return Err(p.error("expected `sfun`, `bfun` or `main`")),
        }
    }
    for (name, src) in prog.sfuns.iter_mut() {
        validate(name, src, false)?;
    }
    for (name, src) in prog.bfuns.iter_mut() {
        validate(name, src, true)?;
    }
    Ok(prog)
}

/// Checks disjointness and coverage, and fills in the exclusion set of a
/// label-variable clause with the concrete labels of the earlier clauses.
fn validate(name: &str, src: &mut FunSource, is_bfun: bool) -> Result<(), SyntaxError> {
    let mut concrete: BTreeSet<Label> = BTreeSet::new();
    let mut seen_nil = false;
    let n = src.clauses.len();
    for (i, clause) in src.clauses.iter_mut().enumerate() {
        match &mut clause.pattern {
            Pattern::Concrete(l) => {
                if !concrete.insert(l.clone()) {
                    return Err(SyntaxError::DuplicateClause(name.to_string(), format!("label {}", l)));
                }
            }
            Pattern::Nil => {
                if !is_bfun {
                    return Err(SyntaxError::OverlappingPatterns(
                        name.to_string(),
                        "`{}` patterns are only allowed in bfun definitions".to_string(),
                    ));
                }
                if seen_nil {
                    return Err(SyntaxError::DuplicateClause(name.to_string(), "`{}`".to_string()));
                }
                seen_nil = true;
            }
            Pattern::Var { name: v, excluded } => {
                if i + 1 != n {
                    return Err(SyntaxError::OverlappingPatterns(
                        name.to_string(),
                        format!("label variable `{}` must be the last clause", v),
                    ));
                }
                if excluded.is_empty() {
                    *excluded = concrete.clone();
                } else if *excluded != concrete {
                    return Err(SyntaxError::OverlappingPatterns(
                        name.to_string(),
                        format!("exclusions of `{}` must be exactly the earlier labels", v),
                    ));
                }
            }
        }
    }
    let has_default = matches!(src.clauses.last().map(|c| &c.pattern), Some(Pattern::Var { .. }));
    if !is_bfun && !has_default {
        return Err(SyntaxError::IncompletePatterns(name.to_string()));
    }
    Ok(())
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> SyntaxError {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Eof => "end of input".to_string(),
            other => format!("{:?}", other),
        };
        SyntaxError::Parse { line: t.line, col: t.col, msg: format!("{}, found {}", msg, found) }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {}", what)))
        }
    }

    fn expect_eof(&self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn term(&mut self) -> Result<RawTerm, SyntaxError> {
        let mut t = self.union()?;
        while *self.peek() == Tok::At {
            self.bump();
            let r = self.union()?;
            t = RawTerm::compose(t, r);
        }
        Ok(t)
    }

    fn union(&mut self) -> Result<RawTerm, SyntaxError> {
        let mut parts = alloc::vec![self.atom()?];
        while self.is_kw("U") {
            self.bump();
            parts.push(self.atom()?);
        }
        Ok(RawTerm::union_all(parts))
    }

    fn atom(&mut self) -> Result<RawTerm, SyntaxError> {
        match self.peek().clone() {
            Tok::Marker(m) => {
                self.bump();
                self.after_marker(Marker::new(&m))
            }
            Tok::Ident(s) if s == "cycle" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let t = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(RawTerm::cycle(t))
            }
            Tok::Ident(s) if is_keyword(&s) => Err(self.error("keyword in term position")),
            Tok::Ident(s) => {
                self.bump();
                match self.peek() {
                    Tok::Colon => {
                        self.bump();
                        let t = self.atom()?;
                        Ok(RawTerm::Edge(Label::new(&s), Box::new(t)))
                    }
                    Tok::LParen => {
                        self.bump();
                        let t = self.term()?;
                        self.expect(&Tok::RParen, "`)`")?;
                        Ok(RawTerm::Call(s, Box::new(t)))
                    }
                    _ => self.after_marker(Marker::new(&s)),
                }
            }
            Tok::Str(s) => {
                self.bump();
                if *self.peek() == Tok::Colon {
                    self.bump();
                    let t = self.atom()?;
                    Ok(RawTerm::Edge(Label::new(&s), Box::new(t)))
                } else {
                    Ok(RawTerm::Edge(Label::new(&s), Box::new(RawTerm::Nil)))
                }
            }
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(RawTerm::Emp);
                }
                let mut ts = alloc::vec![self.term()?];
                while matches!(self.peek(), Tok::Comma | Tok::Plus) {
                    self.bump();
                    ts.push(self.term()?);
                }
                self.expect(&Tok::RParen, "`)`, `,` or `(+)`")?;
                Ok(RawTerm::pair(ts))
            }
            Tok::LBrace => {
                self.bump();
                if *self.peek() == Tok::RBrace {
                    self.bump();
                    return Ok(RawTerm::Nil);
                }
                let mut ts = alloc::vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    ts.push(self.term()?);
                }
                self.expect(&Tok::RBrace, "`}` or `,`")?;
                Ok(RawTerm::union_all(ts))
            }
            Tok::Bang => {
                self.bump();
                Ok(RawTerm::Man)
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn after_marker(&mut self, m: Marker) -> Result<RawTerm, SyntaxError> {
        if *self.peek() == Tok::Assign {
            self.bump();
            let t = self.atom()?;
            Ok(RawTerm::Def(m, Box::new(t)))
        } else {
            Ok(RawTerm::MarkerRef(m))
        }
    }

    fn at_clause_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) && *self.peek_at(1) == Tok::LParen
    }

    fn clause(&mut self) -> Result<(String, Clause), SyntaxError> {
        let name = match self.bump() {
            Tok::Ident(s) => s,
            _ => unreachable!("checked by at_clause_start"),
        };
        self.expect(&Tok::LParen, "`(`")?;
        let (pattern, arg) = match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                self.expect(&Tok::RBrace, "`}`")?;
                (PatternHead::Nil, Marker::new("_"))
            }
            Tok::Ident(l) | Tok::Str(l) => {
                let quoted = matches!(self.peek(), Tok::Str(_));
                self.bump();
                self.expect(&Tok::Colon, "`:`")?;
                let arg = match self.bump() {
                    Tok::Ident(a) if !is_keyword(&a) => Marker::new(&a),
                    _ => return Err(self.error("expected the argument variable")),
                };
                (PatternHead::Label { text: l, quoted }, arg)
            }
            _ => return Err(self.error("expected a pattern")),
        };
        self.expect(&Tok::RParen, "`)`")?;
        self.expect(&Tok::Eq, "`=`")?;
        let body = self.term()?;
        let mut where_list: Option<(String, BTreeSet<Label>)> = None;
        if self.is_kw("where") {
            self.bump();
            let v = match self.bump() {
                Tok::Ident(v) => v,
                _ => return Err(self.error("expected a label variable after `where`")),
            };
            self.expect(&Tok::Neq, "`/=`")?;
            let mut ex = BTreeSet::new();
            loop {
                match self.bump() {
                    Tok::Ident(l) | Tok::Str(l) => {
                        ex.insert(Label::new(&l));
                    }
                    _ => return Err(self.error("expected a label")),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            where_list = Some((v, ex));
        }
        let pattern = match pattern {
            PatternHead::Nil => Pattern::Nil,
            PatternHead::Label { text, quoted } => {
                let is_var = !quoted
                    && (text.chars().next().is_some_and(|c| c.is_ascii_uppercase())
                        || where_list.as_ref().is_some_and(|(v, _)| *v == text));
                if is_var {
                    let excluded = match where_list {
                        Some((v, ex)) if v == text => ex,
                        Some((v, _)) => {
                            return Err(SyntaxError::OverlappingPatterns(
                                name,
                                format!("`where` names `{}` but the pattern variable is `{}`", v, text),
                            ))
                        }
                        None => BTreeSet::new(),
                    };
                    Pattern::Var { name: text, excluded }
                } else {
                    if where_list.is_some() {
                        return Err(SyntaxError::OverlappingPatterns(
                            name,
                            "`where` on a concrete pattern".to_string(),
                        ));
                    }
                    Pattern::Concrete(Label::new(&text))
                }
            }
        };
        Ok((name, Clause { pattern, arg, body }))
    }
}

enum PatternHead {
    Nil,
    Label { text: String, quoted: bool },
}
