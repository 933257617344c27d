use alloc::string::{String, ToString};

use super::parser::is_keyword;
use super::{Label, RawTerm};

/// A label as written: bare when alphanumeric and not a keyword, else quoted.
pub fn label_text(l: &Label) -> String {
    let t = l.text();
    let bare = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(t);
    if bare {
        return t.to_string();
    }
    let mut s = String::from("\"");
    for c in t.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\t' => s.push_str("\\t"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

/// Prints a term with minimal parentheses; unions print as `{…}`.
pub fn print_term(t: &RawTerm) -> String {
    let mut out = String::new();
    term(t, &mut out);
    out
}

fn union_parts(t: &RawTerm) -> Option<(&RawTerm, &RawTerm)> {
    if let RawTerm::Compose(m, p) = t {
        if let (RawTerm::Man, RawTerm::Pair(ts)) = (&**m, &**p) {
            if ts.len() == 2 {
                return Some((&ts[0], &ts[1]));
            }
        }
    }
    None
}

fn term(t: &RawTerm, out: &mut String) {
    match t {
        RawTerm::Compose(s, u) if union_parts(t).is_none() => {
            term(s, out);
            out.push_str(" @ ");
            atom(u, out);
        }
        _ => atom(t, out),
    }
}

fn atom(t: &RawTerm, out: &mut String) {
    if let Some((a, b)) = union_parts(t) {
        out.push('{');
        term(a, out);
        let mut rest = b;
        while let Some((x, y)) = union_parts(rest) {
            out.push_str(", ");
            term(x, out);
            rest = y;
        }
        out.push_str(", ");
        term(rest, out);
        out.push('}');
        return;
    }
    match t {
        RawTerm::MarkerRef(m) => out.push_str(m.name()),
        RawTerm::Edge(l, u) => {
            out.push_str(&label_text(l));
            out.push(':');
            atom(u, out);
        }
        RawTerm::Compose(..) => {
            out.push('(');
            term(t, out);
            out.push(')');
        }
        RawTerm::Pair(ts) => {
            out.push('(');
            for (i, u) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                term(u, out);
            }
            out.push(')');
        }
        RawTerm::Cycle(u) => {
            out.push_str("cycle(");
            term(u, out);
            out.push(')');
        }
        RawTerm::Nil => out.push_str("{}"),
        RawTerm::Emp => out.push_str("()"),
        RawTerm::Man => out.push('!'),
        RawTerm::Def(m, u) => {
            out.push_str(m.name());
            out.push_str(":=");
            atom(u, out);
        }
        RawTerm::Call(f, u) => {
            out.push_str(f);
            out.push('(');
            term(u, out);
            out.push(')');
        }
    }
}
