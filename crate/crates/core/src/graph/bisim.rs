use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::{eliminate_epsilon, interpret, Graph, GraphError, VertexId};
use crate::syntax::{Label, Marker};
use crate::typing::TypedTerm;

/// A relation between the vertices of the ε-eliminated forms of two graphs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BisimWitness {
    pub left: Graph,
    pub right: Graph,
    pub relation: BTreeSet<(VertexId, VertexId)>,
}

impl BisimWitness {
    /// Checks both transfer conditions and the output condition.
    pub fn is_bisimulation(&self) -> bool {
        let (l, r) = (Obs::of(&self.left), Obs::of(&self.right));
        self.relation.iter().all(|&(v, u)| {
            l.outs[v] == r.outs[u]
                && l.succ[v].iter().all(|(a, v2)| {
                    r.succ[u].iter().any(|(b, u2)| a == b && self.relation.contains(&(*v2, *u2)))
                })
                && r.succ[u].iter().all(|(b, u2)| {
                    l.succ[v].iter().any(|(a, v2)| a == b && self.relation.contains(&(*v2, *u2)))
                })
        })
    }
}

/// Per-vertex observations of an ε-free graph.
struct Obs {
    succ: Vec<Vec<(Label, VertexId)>>,
    outs: Vec<BTreeSet<Marker>>,
}

impl Obs {
    fn of(g: &Graph) -> Obs {
        let mut succ = vec![Vec::new(); g.vertex_count()];
        let mut outs = vec![BTreeSet::new(); g.vertex_count()];
        for (v, l, u) in g.edges() {
            if let Some(l) = l {
                succ[*v].push((l.clone(), *u));
            }
        }
        for (v, m) in g.outputs() {
            outs[v].insert(m.clone());
        }
        Obs { succ, outs }
    }
}

fn check_interfaces(g1: &Graph, g2: &Graph) -> Result<(), GraphError> {
    if !g1.in_markers().same_set(g2.in_markers()) || !g1.out_markers().same_set(g2.out_markers()) {
        return Err(GraphError::InterfaceMismatch(
            g1.out_markers().clone(),
            g1.in_markers().clone(),
            g2.out_markers().clone(),
            g2.in_markers().clone(),
        ));
    }
    Ok(())
}

/// Decides extended bisimilarity by the greatest fixpoint on vertex pairs.
/// Returns the largest bisimulation as a witness when the roots are related.
pub fn bisimilar(g1: &Graph, g2: &Graph) -> Result<(bool, Option<BisimWitness>), GraphError> {
    check_interfaces(g1, g2)?;
    let (e1, e2) = (eliminate_epsilon(g1), eliminate_epsilon(g2));
    let (o1, o2) = (Obs::of(&e1), Obs::of(&e2));
    let mut rel: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for v in 0..e1.vertex_count() {
        for u in 0..e2.vertex_count() {
            if o1.outs[v] == o2.outs[u] {
                rel.insert((v, u));
            }
        }
    }
    loop {
        let bad: Vec<(VertexId, VertexId)> = rel
            .iter()
            .copied()
            .filter(|&(v, u)| {
                let fwd = o1.succ[v]
                    .iter()
                    .all(|(a, v2)| o2.succ[u].iter().any(|(b, u2)| a == b && rel.contains(&(*v2, *u2))));
                let back = o2.succ[u]
                    .iter()
                    .all(|(b, u2)| o1.succ[v].iter().any(|(a, v2)| a == b && rel.contains(&(*v2, *u2))));
                !(fwd && back)
            })
            .collect();
        if bad.is_empty() {
            break;
        }
        for p in bad {
            rel.remove(&p);
        }
    }
    let ok = e1.in_markers().iter().all(|m| {
        let (v, u) = (e1.root(m).expect("root"), e2.root(m).expect("same interface"));
        rel.contains(&(v, u))
    });
    if ok {
        Ok((true, Some(BisimWitness { left: e1, right: e2, relation: rel })))
    } else {
        Ok((false, None))
    }
}

/// Decides extended bisimilarity by partition refinement over the disjoint
/// union of the two ε-eliminated graphs.
pub fn bisimilar_fast(g1: &Graph, g2: &Graph) -> Result<bool, GraphError> {
    check_interfaces(g1, g2)?;
    let (e1, e2) = (eliminate_epsilon(g1), eliminate_epsilon(g2));
    let (o1, o2) = (Obs::of(&e1), Obs::of(&e2));
    let k = e1.vertex_count();
    let n = k + e2.vertex_count();
    let succ: Vec<Vec<(Label, VertexId)>> = o1
        .succ
        .into_iter()
        .chain(o2.succ.into_iter().map(|s| s.into_iter().map(|(l, u)| (l, u + k)).collect()))
        .collect();
    let outs: Vec<BTreeSet<Marker>> = o1.outs.into_iter().chain(o2.outs).collect();

    let mut block = number(&outs);
    let mut count = block.iter().copied().max().map_or(0, |b| b + 1);
    loop {
        let sigs: Vec<(usize, BTreeSet<(Label, usize)>)> = (0..n)
            .map(|v| (block[v], succ[v].iter().map(|(l, u)| (l.clone(), block[*u])).collect()))
            .collect();
        let next = number(&sigs);
        let next_count = next.iter().copied().max().map_or(0, |b| b + 1);
        block = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    Ok(e1.in_markers().iter().all(|m| block[e1.root(m).expect("root")] == block[e2.root(m).expect("root") + k]))
}

/// Dense block numbers for equal keys.
fn number<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: BTreeMap<K, usize> = BTreeMap::new();
    keys.iter()
        .map(|key| {
            let next = ids.len();
            *ids.entry(key.clone()).or_insert(next)
        })
        .collect()
}

/// Bisimilarity of two call-free typed terms with equally long source and
/// target contexts; the interfaces of `t` are renamed to those of `s`.
pub fn terms_bisimilar(s: &TypedTerm, t: &TypedTerm) -> Result<bool, GraphError> {
    let g1 = interpret(s)?;
    let g2 = interpret(t)?
        .with_in_markers(g1.in_markers().clone())?
        .with_out_markers(g1.out_markers().clone())?;
    bisimilar_fast(&g1, &g2)
}
