use alloc::format;
use alloc::string::String;

use super::Graph;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Graphviz text. Vertices are `nK`; ε-edges are dashed; roots and outputs
/// are plaintext nodes attached with dotted edges.
pub fn to_dot(g: &Graph) -> String {
    let mut s = String::from("digraph G {\n");
    for v in 0..g.vertex_count() {
        s.push_str(&format!("  n{} [shape=circle, label=\"\"];\n", v));
    }
    for (v, l, u) in g.edges() {
        match l {
            Some(l) => s.push_str(&format!("  n{} -> n{} [label={}];\n", v, u, quote(l.text()))),
            None => s.push_str(&format!("  n{} -> n{} [style=dashed];\n", v, u)),
        }
    }
    for (i, (m, v)) in g.in_markers().iter().zip(g.roots()).enumerate() {
        s.push_str(&format!("  in{} [shape=plaintext, label={}];\n", i, quote(m.name())));
        s.push_str(&format!("  in{} -> n{} [style=dotted];\n", i, v));
    }
    for (i, (v, m)) in g.outputs().enumerate() {
        s.push_str(&format!("  out{} [shape=plaintext, label={}];\n", i, quote(m.name())));
        s.push_str(&format!("  n{} -> out{} [style=dotted];\n", v, i));
    }
    s.push('}');
    s.push('\n');
    s
}
