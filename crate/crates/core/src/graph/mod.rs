//! Finite rooted ε-graphs, the graph constructors, interpretation of typed
//! terms, ε-elimination, extended bisimulation and bounded traces.

mod bisim;
mod dot;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::syntax::{Context, Label, Marker};
use crate::typing::{Term, TypedTerm};

pub use bisim::{bisimilar, bisimilar_fast, terms_bisimilar, BisimWitness};
pub use dot::to_dot;

pub type VertexId = usize;

/// Depth bound applied by [`traces`].
pub const MAX_TRACE_DEPTH: usize = 32;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum GraphError {
    #[error("output markers {0} do not match input markers {1}")]
    MarkerMismatch(Context, Context),
    #[error("interfaces differ: {0} → {1} versus {2} → {3}")]
    InterfaceMismatch(Context, Context, Context, Context),
    #[error("roots {0} are not among the output markers {1}")]
    ContextSplitError(Context, Context),
    #[error("marker {0} is not in {1}")]
    UnknownMarker(Marker, Context),
    #[error("graph is not closed with a single root")]
    NotClosed,
    #[error("term still contains a call to `{0}`")]
    UnresolvedCall(alloc::string::String),
    #[error("context length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// An edge; `None` is ε.
pub type Edge = (VertexId, Option<Label>, VertexId);

/// A graph `(V, E, I, O)` over `out_markers → in_markers`: roots are named by
/// `in_markers`, leaves by `out_markers`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    roots: Vec<VertexId>,
    outputs: Vec<(VertexId, usize)>,
    in_markers: Context,
    out_markers: Context,
}

impl Graph {
    /// Builds a graph; edges and outputs are deduplicated.
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        roots: Vec<VertexId>,
        outputs: Vec<(VertexId, usize)>,
        in_markers: Context,
        out_markers: Context,
    ) -> Graph {
        assert_eq!(roots.len(), in_markers.len(), "one root per input marker");
        assert!(edges.iter().all(|(v, _, u)| *v < n && *u < n));
        assert!(roots.iter().all(|v| *v < n));
        assert!(outputs.iter().all(|(v, y)| *v < n && *y < out_markers.len()));
        let mut g = Graph { n, edges, roots, outputs, in_markers, out_markers };
        g.normalize();
        g
    }

    fn normalize(&mut self) {
        self.edges.sort();
        self.edges.dedup();
        self.outputs.sort();
        self.outputs.dedup();
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn root(&self, m: &Marker) -> Option<VertexId> {
        self.in_markers.position(m).map(|i| self.roots[i])
    }

    /// Outputs as `(vertex, marker)` pairs.
    pub fn outputs(&self) -> impl Iterator<Item = (VertexId, &Marker)> + '_ {
        self.outputs.iter().map(|(v, y)| (*v, &self.out_markers.markers()[*y]))
    }

    pub fn in_markers(&self) -> &Context {
        &self.in_markers
    }

    pub fn out_markers(&self) -> &Context {
        &self.out_markers
    }

    pub fn has_epsilon(&self) -> bool {
        self.edges.iter().any(|e| e.1.is_none())
    }

    /// Renames the roots positionally.
    pub fn with_in_markers(mut self, names: Context) -> Result<Graph, GraphError> {
        if names.len() != self.in_markers.len() {
            return Err(GraphError::LengthMismatch { expected: self.in_markers.len(), found: names.len() });
        }
        self.in_markers = names;
        Ok(self)
    }

    /// Renames the leaves positionally.
    pub fn with_out_markers(mut self, names: Context) -> Result<Graph, GraphError> {
        if names.len() != self.out_markers.len() {
            return Err(GraphError::LengthMismatch { expected: self.out_markers.len(), found: names.len() });
        }
        self.out_markers = names;
        Ok(self)
    }

    fn offset(&self, k: usize) -> (Vec<Edge>, Vec<VertexId>) {
        let edges = self.edges.iter().map(|(v, l, u)| (v + k, l.clone(), u + k)).collect();
        let roots = self.roots.iter().map(|v| v + k).collect();
        (edges, roots)
    }

    /// Outputs re-indexed against another context holding the same names.
    fn outputs_against(&self, ctx: &Context, k: usize) -> Vec<(VertexId, usize)> {
        self.outputs
            .iter()
            .map(|(v, y)| (v + k, ctx.position(&self.out_markers.markers()[*y]).expect("same marker set")))
            .collect()
    }
}

/// `{}` over `Y`: one root, nothing else.
pub fn nil_graph(y: &Context) -> Graph {
    Graph::new(1, vec![], vec![0], vec![], Context::unit(), y.clone())
}

/// `()` over `Y`: no vertices and no roots.
pub fn emp_graph(y: &Context) -> Graph {
    Graph::new(0, vec![], vec![], vec![], Context::empty(), y.clone())
}

/// `!` over a two-marker context: one root carrying both outputs.
pub fn man_graph(y: &Context) -> Result<Graph, GraphError> {
    if y.len() != 2 {
        return Err(GraphError::LengthMismatch { expected: 2, found: y.len() });
    }
    Ok(Graph::new(1, vec![], vec![0], vec![(0, 0), (0, 1)], Context::unit(), y.clone()))
}

/// The marker `y` over `Y`: one root with output `y`.
pub fn marker_graph(y: &Marker, ctx: &Context) -> Result<Graph, GraphError> {
    let i = ctx.position(y).ok_or_else(|| GraphError::UnknownMarker(y.clone(), ctx.clone()))?;
    Ok(Graph::new(1, vec![], vec![0], vec![(0, i)], Context::unit(), ctx.clone()))
}

/// One `ℓ`-edge from the root to a vertex with output `&`.
pub fn label_graph(l: &Label) -> Graph {
    Graph::new(2, vec![(0, Some(l.clone()), 1)], vec![0], vec![(1, 0)], Context::unit(), Context::unit())
}

/// Identity on `X`.
pub fn identity_graph(x: &Context) -> Graph {
    let n = x.len();
    Graph::new(n, vec![], (0..n).collect(), (0..n).map(|i| (i, i)).collect(), x.clone(), x.clone())
}

/// `g1 ∘ g2`: ε-edges from each output of `g1` to the root of `g2` with the
/// same marker.
pub fn compose(g1: &Graph, g2: &Graph) -> Result<Graph, GraphError> {
    if !g1.out_markers.same_set(&g2.in_markers) {
        return Err(GraphError::MarkerMismatch(g1.out_markers.clone(), g2.in_markers.clone()));
    }
    let k = g1.n;
    let mut edges = g1.edges.clone();
    let (e2, r2) = g2.offset(k);
    edges.extend(e2);
    for (v, y) in &g1.outputs {
        let m = &g1.out_markers.markers()[*y];
        let j = g2.in_markers.position(m).expect("checked marker sets");
        edges.push((*v, None, r2[j]));
    }
    let outputs = g2.outputs.iter().map(|(v, y)| (v + k, *y)).collect();
    Ok(Graph::new(k + g2.n, edges, g1.roots.clone(), outputs, g1.in_markers.clone(), g2.out_markers.clone()))
}

/// `⟨g1, …, gn⟩` over a shared source; targets are concatenated with the
/// canonical renaming.
pub fn pair_many(gs: &[Graph]) -> Result<Graph, GraphError> {
    let first = match gs.first() {
        Some(g) => g,
        None => return Err(GraphError::LengthMismatch { expected: 1, found: 0 }),
    };
    let out = first.out_markers.clone();
    let mut n = 0;
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    let mut outputs = Vec::new();
    for g in gs {
        if !g.out_markers.same_set(&out) {
            return Err(GraphError::MarkerMismatch(out.clone(), g.out_markers.clone()));
        }
        let (e, r) = g.offset(n);
        edges.extend(e);
        roots.extend(r);
        outputs.extend(g.outputs_against(&out, n));
        n += g.n;
    }
    let ins = Context::concat(&gs.iter().map(|g| g.in_markers.clone()).collect::<Vec<_>>());
    Ok(Graph::new(n, edges, roots, outputs, ins, out))
}

pub fn pair(g1: &Graph, g2: &Graph) -> Result<Graph, GraphError> {
    pair_many(&[g1.clone(), g2.clone()])
}

/// The fixed point `g†` of `g : Y+X → X`: outputs named by a root marker are
/// fed back with ε-edges; the remaining outputs keep their order.
pub fn dagger(g: &Graph) -> Result<Graph, GraphError> {
    if !g.in_markers.iter().all(|x| g.out_markers.contains(x)) {
        return Err(GraphError::ContextSplitError(g.in_markers.clone(), g.out_markers.clone()));
    }
    let kept: Vec<Marker> = g.out_markers.iter().filter(|m| !g.in_markers.contains(m)).cloned().collect();
    let y = Context::new(kept).expect("subset of a context");
    let mut edges = g.edges.clone();
    let mut outputs = Vec::new();
    for (v, i) in &g.outputs {
        let m = &g.out_markers.markers()[*i];
        match g.in_markers.position(m) {
            Some(j) => edges.push((*v, None, g.roots[j])),
            None => outputs.push((*v, y.position(m).expect("kept marker"))),
        }
    }
    Ok(Graph::new(g.n, edges, g.roots.clone(), outputs, g.in_markers.clone(), y))
}

/// Interprets a call-free typed term; roots are named by its target and
/// leaves by its source.
pub fn interpret(t: &TypedTerm) -> Result<Graph, GraphError> {
    interp(t.term(), t.source())
}

/// Interprets a positional term under a named source context.
pub fn interpret_term(t: &Term, source: &Context) -> Result<Graph, GraphError> {
    interp(t, source)
}

fn interp(t: &Term, src: &Context) -> Result<Graph, GraphError> {
    Ok(match t {
        Term::Var(i) => marker_graph(&src.markers()[*i], src)?,
        Term::Nil => nil_graph(src),
        Term::Emp => emp_graph(src),
        Term::Man => man_graph(src)?,
        Term::Label(l, u) => {
            let g = interp(u, src)?.with_in_markers(Context::unit())?;
            compose(&label_graph(l), &g)?
        }
        Term::Def(x, u) => interp(u, src)?.with_in_markers(Context::single(x.clone()))?,
        Term::Pair(ts) => {
            let gs = ts.iter().map(|u| interp(u, src)).collect::<Result<Vec<_>, _>>()?;
            pair_many(&gs)?
        }
        Term::Compose(a, b) => {
            let gb = interp(b, src)?;
            let ga = interp(a, &gb.in_markers)?;
            compose(&ga, &gb)?
        }
        Term::Cycle(u) => {
            let x = u.target();
            let body = interp(u, &Context::cycle_body(src, &x))?;
            dagger(&body)?.with_out_markers(src.clone())?
        }
        Term::Call { name, .. } => return Err(GraphError::UnresolvedCall(name.clone())),
    })
}

/// Per vertex: ε-successors, labelled successors, output marker indices.
type Adjacency = (Vec<Vec<VertexId>>, Vec<Vec<(Label, VertexId)>>, Vec<Vec<usize>>);

fn adjacency(g: &Graph) -> Adjacency {
    let mut eps = vec![Vec::new(); g.n];
    let mut lab = vec![Vec::new(); g.n];
    let mut out = vec![Vec::new(); g.n];
    for (v, l, u) in &g.edges {
        match l {
            None => eps[*v].push(*u),
            Some(l) => lab[*v].push((l.clone(), *u)),
        }
    }
    for (v, y) in &g.outputs {
        out[*v].push(*y);
    }
    (eps, lab, out)
}

fn eps_closure(v: VertexId, eps: &[Vec<VertexId>]) -> Vec<VertexId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![v];
    let mut out = Vec::new();
    while let Some(w) = stack.pop() {
        if seen.insert(w) {
            out.push(w);
            stack.extend(eps[w].iter().copied());
        }
    }
    out
}

/// Shortcuts ε-paths: `v -ℓ-> u` iff `v ε* w -ℓ-> u`, outputs likewise; keeps
/// only vertices reachable from the roots.
pub fn eliminate_epsilon(g: &Graph) -> Graph {
    let (eps, lab, out) = adjacency(g);
    let mut index: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut order: Vec<VertexId> = Vec::new();
    let visit = |v: VertexId, index: &mut BTreeMap<VertexId, VertexId>, order: &mut Vec<VertexId>| {
        if let alloc::collections::btree_map::Entry::Vacant(e) = index.entry(v) {
            e.insert(order.len());
            order.push(v);
        }
    };
    for r in &g.roots {
        visit(*r, &mut index, &mut order);
    }
    let mut edges = Vec::new();
    let mut outputs = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for w in eps_closure(v, &eps) {
            for (l, u) in &lab[w] {
                visit(*u, &mut index, &mut order);
                edges.push((i, Some(l.clone()), index[u]));
            }
            for y in &out[w] {
                outputs.push((i, *y));
            }
        }
        i += 1;
    }
    let roots = g.roots.iter().map(|r| index[r]).collect();
    Graph::new(order.len(), edges, roots, outputs, g.in_markers.clone(), g.out_markers.clone())
}

/// All label strings of length at most `depth` spelled by paths from the root
/// of a closed single-rooted graph. The depth is capped at [`MAX_TRACE_DEPTH`].
pub fn traces(g: &Graph, depth: usize) -> Result<BTreeSet<Vec<Label>>, GraphError> {
    if !g.out_markers.is_empty() || g.in_markers.len() != 1 {
        return Err(GraphError::NotClosed);
    }
    let depth = depth.min(MAX_TRACE_DEPTH);
    let e = eliminate_epsilon(g);
    let (_, lab, _) = adjacency(&e);
    let mut result = BTreeSet::new();
    let mut level: BTreeSet<(Vec<Label>, VertexId)> = BTreeSet::new();
    level.insert((Vec::new(), e.roots[0]));
    result.insert(Vec::new());
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for (s, v) in &level {
            for (l, u) in &lab[*v] {
                let mut s2 = s.clone();
                s2.push(l.clone());
                result.insert(s2.clone());
                next.insert((s2, *u));
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Ok(result)
}

/// Traces rendered as strings of label texts, `""` for the empty trace.
pub fn trace_strings(ts: &BTreeSet<Vec<Label>>) -> BTreeSet<alloc::string::String> {
    ts.iter()
        .map(|s| s.iter().map(|l| l.text()).collect::<Vec<_>>().join("."))
        .collect()
}

#[cfg(test)]
mod tests;
