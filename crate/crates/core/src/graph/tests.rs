use super::*;
use crate::axioms::random_term;
use crate::syntax::parse_term;
use crate::typing::infer_pure;
use alloc::string::{String, ToString};
use proptest::prelude::*;

fn ctx(names: &[&str]) -> Context {
    Context::of(names).unwrap()
}

fn g(text: &str, source: &[&str]) -> Graph {
    interpret(&infer_pure(&parse_term(text).unwrap(), &ctx(source)).unwrap()).unwrap()
}

fn bisim(a: &Graph, b: &Graph) -> bool {
    let (slow, w) = bisimilar(a, b).unwrap();
    let fast = bisimilar_fast(a, b).unwrap();
    assert_eq!(slow, fast, "naive and partition refinement disagree");
    if let Some(w) = w {
        assert!(w.is_bisimulation());
    }
    slow
}

fn strings(g: &Graph, d: usize) -> BTreeSet<String> {
    trace_strings(&traces(g, d).unwrap())
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn self_loop(l: &str) -> Graph {
    Graph::new(1, vec![(0, Some(Label::new(l)), 0)], vec![0], vec![], Context::unit(), Context::empty())
}

#[test]
fn atomic_graphs() {
    let l = label_graph(&Label::new("a"));
    assert_eq!(l.vertex_count(), 2);
    assert_eq!(l.edges(), &[(0, Some(Label::new("a")), 1)]);
    assert_eq!(l.roots(), &[0]);
    assert_eq!(l.outputs().collect::<Vec<_>>(), vec![(1, &Marker::default_marker())]);

    let n = nil_graph(&Context::empty());
    assert_eq!((n.vertex_count(), n.edges().len(), n.outputs().count()), (1, 0, 0));

    let y = ctx(&["y"]);
    assert_eq!(marker_graph(&Marker::new("y"), &y).unwrap(), identity_graph(&y).with_in_markers(Context::unit()).unwrap());
    let m = man_graph(&ctx(&["y1", "y2"])).unwrap();
    assert_eq!((m.vertex_count(), m.roots().len(), m.outputs().count()), (1, 1, 2));
    assert!(man_graph(&y).is_err());
    assert!(marker_graph(&Marker::new("z"), &y).is_err());
}

#[test]
fn compose_connects_outputs_to_roots() {
    let lhs = compose(&g("a:&y", &["y"]), &g("y := b:{}", &[])).unwrap();
    assert!(lhs.has_epsilon());
    assert!(bisim(&lhs, &g("a:b:{}", &[])));
    let t = g("{a:&y, b:c:&y}", &["y"]);
    assert!(bisim(&compose(&t, &identity_graph(&ctx(&["y"]))).unwrap(), &t));
    assert!(matches!(compose(&t, &g("{}", &[])), Err(GraphError::MarkerMismatch(..))));
}

#[test]
fn compose_over_empty_contexts_is_disjoint_union() {
    let a = emp_graph(&Context::empty());
    let b = g("()", &[]);
    let c = compose(&a, &b).unwrap();
    assert_eq!(c.vertex_count(), a.vertex_count() + b.vertex_count());
    assert!(c.edges().is_empty());
    let cl = g("() @ a:{}", &[]);
    assert_eq!(cl.vertex_count(), g("a:{}", &[]).vertex_count());
    assert!(cl.in_markers().is_empty());
}

#[test]
fn pairing() {
    let nil = nil_graph(&Context::empty());
    let p = pair(&nil, &nil).unwrap();
    assert_eq!(p.vertex_count(), 2);
    assert_eq!(p.roots(), &[0, 1]);
    assert!(p.edges().is_empty());
    assert_eq!(p.in_markers(), &ctx(&["&$1", "&$2"]));

    let (g1, g2) = (g("a:&y", &["y"]), g("b:{}", &["y"]));
    let fst = interpret(&crate::typing::abbrev::proj_left(&Context::unit(), &Context::unit())).unwrap();
    let fst = fst.with_out_markers(ctx(&["&$1", "&$2"])).unwrap();
    assert!(bisim(&compose(&fst, &pair(&g1, &g2).unwrap()).unwrap(), &g1));

    let e = emp_graph(&ctx(&["y"]));
    assert!(bisim(&pair(&g1, &e).unwrap(), &g1));
}

#[test]
fn dagger_examples() {
    let c1 = dagger(&g("&", &["&"])).unwrap();
    assert!(bisim(&c1, &nil_graph(&Context::empty())));

    let loop_a = dagger(&g("a:&", &["&"])).unwrap();
    assert!(bisim(&loop_a, &self_loop("a")));
    assert!(!eliminate_epsilon(&loop_a).has_epsilon());

    let c2 = dagger(&man_graph(&ctx(&["y", "&"])).unwrap()).unwrap();
    assert!(bisim(&c2, &marker_graph(&Marker::new("y"), &ctx(&["y"])).unwrap()));

    let bad = g("a:&y", &["y"]).with_in_markers(ctx(&["q"])).unwrap();
    assert!(matches!(dagger(&bad), Err(GraphError::ContextSplitError(..))));
}

#[test]
fn interpret_t_g() {
    let tg = g("a:(b:&x U c:&x) @ cycle(x := d:(p:&y1 U q:&y2 U r:&x))", &["y1", "y2"]);
    assert_eq!(tg.in_markers(), &Context::unit());
    assert_eq!(tg.out_markers(), &ctx(&["y1", "y2"]));
    // ε-free six-vertex picture: r -a-> v -b,c-> w -d-> u -p,q-> leaves, u -r-> w
    let l = |s: &str| Some(Label::new(s));
    let expected = Graph::new(
        6,
        vec![(0, l("a"), 1), (1, l("b"), 2), (1, l("c"), 2), (2, l("d"), 3), (3, l("p"), 4), (3, l("q"), 5), (3, l("r"), 2)],
        vec![0],
        vec![(4, 0), (5, 1)],
        Context::unit(),
        ctx(&["y1", "y2"]),
    );
    assert!(bisim(&tg, &expected));
    let tweaked = g("a:(b:&x U c:&x) @ cycle(x := d:(p:&y1 U q:&y2 U r:{}))", &["y1", "y2"]);
    assert!(!bisim(&tweaked, &expected));
}

#[test]
fn interpret_self_loop_and_emp() {
    assert!(bisim(&g("cycle(&:=a:&)", &[]), &self_loop("a")));
    let emp = g("()", &[]);
    assert_eq!((emp.vertex_count(), emp.in_markers().len(), emp.out_markers().len()), (0, 0, 0));
}

#[test]
fn epsilon_elimination_examples() {
    // a pure ε-cycle with no labelled exits
    let eps = Graph::new(2, vec![(0, None, 1), (1, None, 0)], vec![0], vec![], Context::unit(), Context::empty());
    let e = eliminate_epsilon(&eps);
    assert_eq!((e.vertex_count(), e.edges().len(), e.outputs().count()), (1, 0, 0));

    // ε-free input: only the unreachable vertex goes
    let free = Graph::new(3, vec![(0, Some(Label::new("a")), 1)], vec![0], vec![(2, 0)], Context::unit(), Context::unit());
    let e = eliminate_epsilon(&free);
    assert_eq!(e.vertex_count(), 2);
    assert_eq!(e.outputs().count(), 0);
}

#[test]
fn bisimilarity_examples() {
    let loop_a = g("cycle(&:=a:&)", &[]);
    assert!(bisim(&loop_a, &g("a:cycle(&:=a:&)", &[])));
    assert!(bisim(&loop_a, &g("a:a:cycle(&:=a:&)", &[])));
    assert!(!bisim(&loop_a, &g("b:cycle(&:=b:&)", &[])));
    assert!(!bisim(&g("a:{}", &[]), &g("b:{}", &[])));
    assert!(bisim(&g("{a:{}, a:{}}", &[]), &g("a:{}", &[])));
    assert!(matches!(
        bisimilar(&g("a:{}", &[]), &g("a:&y", &["y"])),
        Err(GraphError::InterfaceMismatch(..))
    ));
}

#[test]
fn trace_examples() {
    assert_eq!(strings(&g("cycle(&:=a:&)", &[]), 3), set(&["", "a", "a.a", "a.a.a"]));
    assert_eq!(strings(&g("{}", &[]), 5), set(&[""]));
    assert_eq!(strings(&g("a:b:{} U a:c:{}", &[]), 2), set(&["", "a", "a.b", "a.c"]));
    assert_eq!(traces(&g("a:&y", &["y"]), 2), Err(GraphError::NotClosed));
    assert_eq!(traces(&g("(a:{}, b:{})", &[]), 2), Err(GraphError::NotClosed));
    // depth is capped
    assert_eq!(strings(&g("cycle(&:=a:&)", &[]), 1000).len(), MAX_TRACE_DEPTH + 1);
}

#[test]
fn dot_output() {
    assert_eq!(to_dot(&emp_graph(&Context::empty())), "digraph G {\n}\n");
    let d = to_dot(&label_graph(&Label::new("a")));
    assert_eq!(
        d,
        "digraph G {\n  n0 [shape=circle, label=\"\"];\n  n1 [shape=circle, label=\"\"];\n  n0 -> n1 [label=\"a\"];\n  in0 [shape=plaintext, label=\"&\"];\n  in0 -> n0 [style=dotted];\n  out0 [shape=plaintext, label=\"&\"];\n  n1 -> out0 [style=dotted];\n}\n"
    );
    let c = to_dot(&g("a:&y @ (y := b:{})", &[]));
    assert!(c.contains("[style=dashed]"));
}

fn names(prefix: &str, n: usize) -> Context {
    Context::new((0..n).map(|i| Marker::new(&alloc::format!("{}{}", prefix, i + 1))).collect()).unwrap()
}

fn arb_graph(source: Context, target: Context) -> impl Strategy<Value = Graph> {
    (1usize..9, any::<u64>()).prop_map(move |(size, seed)| {
        let size = size.max(crate::axioms::min_size(target.len()));
        interpret(&random_term(&source, &target, size, seed).unwrap()).unwrap()
    })
}

fn closed() -> impl Strategy<Value = Graph> {
    arb_graph(Context::empty(), Context::unit())
}

proptest! {
    #[test]
    fn bisimilarity_is_an_equivalence(a in closed(), b in closed(), c in closed()) {
        prop_assert!(bisim(&a, &a));
        prop_assert_eq!(bisim(&a, &b), bisim(&b, &a));
        if bisim(&a, &b) && bisim(&b, &c) {
            prop_assert!(bisim(&a, &c));
        }
    }

    #[test]
    fn elimination_is_silent_and_idempotent(a in arb_graph(names("y", 2), Context::unit())) {
        let e = eliminate_epsilon(&a);
        prop_assert!(!e.has_epsilon());
        prop_assert!(bisim(&a, &e));
        let ee = eliminate_epsilon(&e);
        prop_assert_eq!(e.vertex_count(), ee.vertex_count());
        prop_assert_eq!(e.edges().len(), ee.edges().len());
        prop_assert!(bisim(&e, &ee));
    }

    #[test]
    fn compose_is_associative(
        a in arb_graph(names("x", 2), Context::unit()),
        b in arb_graph(names("y", 1), names("x", 2)),
        c in arb_graph(names("z", 1), names("y", 1)),
    ) {
        let l = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let r = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert!(bisim(&l, &r));
    }

    #[test]
    fn identities_are_neutral(a in arb_graph(names("y", 2), names("x", 2))) {
        let l = compose(&identity_graph(a.in_markers()), &a).unwrap();
        let r = compose(&a, &identity_graph(a.out_markers())).unwrap();
        prop_assert!(bisim(&l, &a));
        prop_assert!(bisim(&r, &a));
    }

    #[test]
    fn pairing_laws(
        s in arb_graph(names("y", 2), Context::unit()),
        t in arb_graph(names("y", 2), Context::unit()),
    ) {
        let p = pair(&s, &t).unwrap();
        let two = ctx(&["&$1", "&$2"]);
        let fst = marker_graph(&Marker::new("&$1"), &two).unwrap();
        let snd = marker_graph(&Marker::new("&$2"), &two).unwrap();
        prop_assert!(bisim(&compose(&fst, &p).unwrap(), &s));
        prop_assert!(bisim(&compose(&snd, &p).unwrap(), &t));
        // ⟨π1 @ p, π2 @ p⟩ = p
        let back = pair(&compose(&fst, &p).unwrap(), &compose(&snd, &p).unwrap()).unwrap();
        prop_assert!(bisim(&back, &p));
    }

    #[test]
    fn dagger_is_a_fixed_point(body in arb_graph(ctx(&["y1", "x"]), ctx(&["x"]))) {
        let d = dagger(&body).unwrap();
        let unfolded = compose(&body, &pair(&identity_graph(&ctx(&["y1"])), &d).unwrap().with_in_markers(ctx(&["y1", "x"])).unwrap()).unwrap();
        prop_assert!(bisim(&d, &unfolded));
    }

    #[test]
    fn bisimilar_graphs_have_equal_traces(a in closed(), b in closed()) {
        let ua = compose(&a, &emp_graph(&Context::empty())).unwrap();
        prop_assert!(bisim(&a, &ua));
        for d in 0..=8 {
            prop_assert_eq!(traces(&a, d).unwrap(), traces(&ua, d).unwrap());
            if bisim(&a, &b) {
                prop_assert_eq!(traces(&a, d).unwrap(), traces(&b, d).unwrap());
            }
        }
    }

    #[test]
    fn man_is_a_degenerate_commutative_monoid(
        s in arb_graph(names("y", 1), Context::unit()),
        t in arb_graph(names("y", 1), Context::unit()),
        u in arb_graph(names("y", 1), Context::unit()),
    ) {
        let two = ctx(&["&$1", "&$2"]);
        let man = man_graph(&two).unwrap();
        let union = |a: &Graph, b: &Graph| compose(&man, &pair(a, b).unwrap()).unwrap();
        let nil = nil_graph(&names("y", 1));
        prop_assert!(bisim(&union(&nil, &s), &s));
        prop_assert!(bisim(&union(&s, &nil), &s));
        prop_assert!(bisim(&union(&s, &t), &union(&t, &s)));
        prop_assert!(bisim(&union(&union(&s, &t), &u), &union(&s, &union(&t, &u))));
        prop_assert!(bisim(&union(&s, &s), &s));
    }
}
