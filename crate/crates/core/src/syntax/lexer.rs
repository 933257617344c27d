use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::SyntaxError;

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    /// `&` or `&name`, kept with the ampersand.
    Marker(String),
    Colon,
    Assign,
    At,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bang,
    /// `(+)`
    Plus,
    Eq,
    Neq,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '?' | '$' | '\'' | '-')
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: &str| SyntaxError::Parse { line, col, msg: msg.to_string() };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, n: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: l0, col: c0 });
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ':' if chars.get(i + 1) == Some(&'=') => push(Tok::Assign, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '(' if chars.get(i + 1) == Some(&'+') && chars.get(i + 2) == Some(&')') => {
                push(Tok::Plus, 3, &mut i, &mut col)
            }
            '⊕' => push(Tok::Plus, 1, &mut i, &mut col),
            '∪' => push(Tok::Ident("U".to_string()), 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(err(l0, c0, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(j + 1) {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(&e @ ('"' | '\\')) => s.push(e),
                                _ => return Err(err(l0, c0, "bad escape in string")),
                            }
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                if s.is_empty() {
                    return Err(err(l0, c0, "empty label"));
                }
                let n = j + 1 - i;
                push(Tok::Str(s), n, &mut i, &mut col);
            }
            '&' => {
                let n = ident_len(&chars, i + 1);
                let name: String = chars[i..i + 1 + n].iter().collect();
                push(Tok::Marker(name), n + 1, &mut i, &mut col);
            }
            c if is_ident_start(c) => {
                let n = ident_len(&chars, i);
                let name: String = chars[i..i + n].iter().collect();
                push(Tok::Ident(name), n, &mut i, &mut col);
            }
            _ => {
                return Err(err(line, col, &alloc::format!("unexpected character `{}`", c)));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Length of the identifier body starting at `i`; `--` ends it.
fn ident_len(chars: &[char], i: usize) -> usize {
    let mut j = i;
    while j < chars.len() && is_ident_continue(chars[j]) {
        if chars[j] == '-' && chars.get(j + 1) == Some(&'-') {
            break;
        }
        j += 1;
    }
    j - i
}
