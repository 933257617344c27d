use super::*;
use alloc::string::ToString;
use alloc::vec;
use proptest::prelude::*;

fn m(n: &str) -> RawTerm {
    RawTerm::marker(n)
}

#[test]
fn parses_self_loop() {
    let t = parse_term("cycle(&:=a:&)").unwrap();
    assert_eq!(t, RawTerm::cycle(RawTerm::def("&", RawTerm::edge("a", m("&")))));
}

#[test]
fn parses_empty_pair_and_nil() {
    assert_eq!(parse_term("()").unwrap(), RawTerm::Emp);
    assert_eq!(parse_term("{}").unwrap(), RawTerm::Nil);
    assert_eq!(parse_term("  -- nothing but nil\n {}").unwrap(), RawTerm::Nil);
}

#[test]
fn parses_t_g() {
    let t = parse_term("a:(b:&x U c:&x) @ cycle(x := d:(p:&y1 U q:&y2 U r:&x))").unwrap();
    let left = RawTerm::edge("a", RawTerm::union(RawTerm::edge("b", m("x")), RawTerm::edge("c", m("x"))));
    let body = RawTerm::edge(
        "d",
        RawTerm::union(
            RawTerm::edge("p", m("y1")),
            RawTerm::union(RawTerm::edge("q", m("y2")), RawTerm::edge("r", m("x"))),
        ),
    );
    let right = RawTerm::cycle(RawTerm::def("x", body));
    assert_eq!(t, RawTerm::compose(left, right));
    // unicode union gives the same tree
    let u = parse_term("a:(b:&x ∪ c:&x) @ cycle(x := d:(p:&y1 ∪ q:&y2 ∪ r:&x))").unwrap();
    assert_eq!(u, t);
}

#[test]
fn labels_nest_to_the_right() {
    let t = parse_term("a:b:c").unwrap();
    assert_eq!(t, RawTerm::edge("a", RawTerm::edge("b", m("c"))));
}

#[test]
fn brace_union_sugar_is_right_nested() {
    let t = parse_term("{a:{}, b:{}, c:{}}").unwrap();
    let e = |l| RawTerm::edge(l, RawTerm::Nil);
    assert_eq!(t, RawTerm::union(e("a"), RawTerm::union(e("b"), e("c"))));
    assert_eq!(parse_term("{a:{}}").unwrap(), e("a"));
}

#[test]
fn string_leaf_is_an_edge_to_nil() {
    let t = parse_term("name:\"Luxembourg City\"").unwrap();
    assert_eq!(t, RawTerm::edge("name", RawTerm::edge("Luxembourg City", RawTerm::Nil)));
}

#[test]
fn pairs_accept_both_separators() {
    let a = parse_term("(a:{}, b:{})").unwrap();
    let b = parse_term("(a:{} (+) b:{})").unwrap();
    assert_eq!(a, b);
    assert_eq!(parse_term("(a:{})").unwrap(), RawTerm::edge("a", RawTerm::Nil));
}

#[test]
fn compose_is_left_associative() {
    let t = parse_term("&x @ &y @ &z").unwrap();
    assert_eq!(t, RawTerm::compose(RawTerm::compose(m("x"), m("y")), m("z")));
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_term("a:(b:{}") {
        Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (1, 8)),
        other => panic!("{:?}", other),
    }
    match parse_term("a:{}\n  @ %") {
        Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 5)),
        other => panic!("{:?}", other),
    }
    assert!(parse_term("cycle").is_err());
    assert!(parse_term("a:{} b:{}").is_err());
}

#[test]
fn prints_basic_forms() {
    assert_eq!(print_term(&RawTerm::Nil), "{}");
    let u = RawTerm::union(RawTerm::edge("a", RawTerm::Nil), RawTerm::edge("b", RawTerm::Nil));
    assert_eq!(print_term(&u), "{a:{}, b:{}}");
    let c = parse_term("cycle(&:=a:&)").unwrap();
    assert_eq!(print_term(&c), "cycle(&:=a:&)");
    let s = parse_term("(a:&x @ (x:=b:{})) @ ()").unwrap();
    assert_eq!(print_term(&s), "a:&x @ &x:=b:{} @ ()");
    let q = parse_term("\"U\":\"a b\"").unwrap();
    assert_eq!(print_term(&q), "\"U\":\"a b\":{}");
}

#[test]
fn parses_f2_program() {
    let p = parse_program("sfun f2(L:T) = a:f2(T)").unwrap();
    let f2 = &p.sfuns["f2"];
    assert_eq!(f2.clauses.len(), 1);
    assert!(matches!(&f2.clauses[0].pattern, Pattern::Var { name, excluded } if name == "L" && excluded.is_empty()));
    assert_eq!(f2.clauses[0].arg, Marker::new("T"));
    assert_eq!(f2.clauses[0].body, RawTerm::edge("a", RawTerm::call("f2", m("T"))));
}

#[test]
fn parses_aa_program_with_where() {
    let p = parse_program("sfun aa?(a:t) = head-a?(t)  aa?(L:t) = aa?(t) where L /= a").unwrap();
    let aa = &p.sfuns["aa?"];
    assert_eq!(aa.clauses.len(), 2);
    assert_eq!(aa.clauses[0].pattern, Pattern::Concrete(Label::new("a")));
    let expected: BTreeSet<Label> = [Label::new("a")].into_iter().collect();
    assert_eq!(aa.clauses[1].pattern, Pattern::Var { name: "L".to_string(), excluded: expected.clone() });
    // without `where` the exclusions are inferred
    let p2 = parse_program("sfun aa?(a:t) = head-a?(t)  aa?(L:t) = aa?(t)").unwrap();
    assert_eq!(p2.sfuns["aa?"].clauses[1].pattern, Pattern::Var { name: "L".to_string(), excluded: expected });
}

#[test]
fn empty_program() {
    let p = parse_program("").unwrap();
    assert!(p.is_empty());
}

#[test]
fn program_with_bfun_and_main() {
    let src = "bfun head-a?({}) = {}\n head-a?(a:t) = true:{}\n head-a?(L:t) = {}\nmain = head-a?(a:{})";
    let p = parse_program(src).unwrap();
    assert_eq!(p.bfuns["head-a?"].clauses.len(), 3);
    assert_eq!(p.bfuns["head-a?"].clauses[0].pattern, Pattern::Nil);
    assert!(p.main.is_some());
}

#[test]
fn program_validation_errors() {
    assert!(matches!(
        parse_program("sfun f(a:t) = f(t)  f(a:t) = {}  f(L:t) = f(t)"),
        Err(SyntaxError::DuplicateClause(..))
    ));
    assert!(matches!(
        parse_program("sfun f(L:t) = f(t)  f(a:t) = {}"),
        Err(SyntaxError::OverlappingPatterns(..))
    ));
    assert!(matches!(
        parse_program("sfun f(a:t) = {}  f(L:t) = f(t) where L /= b"),
        Err(SyntaxError::OverlappingPatterns(..))
    ));
    assert!(matches!(parse_program("sfun f(a:t) = {}"), Err(SyntaxError::IncompletePatterns(..))));
    assert!(matches!(parse_program("sfun f({}) = {}  f(L:t) = f(t)"), Err(SyntaxError::OverlappingPatterns(..))));
    assert!(matches!(
        parse_program("sfun f(L:t) = f(t)\nbfun f(a:t) = {}"),
        Err(SyntaxError::DuplicateDefinition(..))
    ));
}

#[test]
fn context_concat_renames_clashes() {
    let amp = Context::unit();
    let c = Context::concat(&[amp.clone(), amp.clone()]);
    assert_eq!(c, Context::of(&["&$1", "&$2"]).unwrap());
    let xy = Context::of(&["x", "&"]).unwrap();
    let c = Context::concat(&[xy, amp]);
    assert_eq!(c, Context::of(&["x", "&$1", "&$2"]).unwrap());
    assert!(Context::of(&["x", "x"]).is_err());
}

#[test]
fn cycle_body_context_primes_shadowed_markers() {
    let y = Context::of(&["x", "y"]).unwrap();
    let x = Context::of(&["x"]).unwrap();
    assert_eq!(Context::cycle_body(&y, &x), Context::of(&["x'", "y", "x"]).unwrap());
}

#[test]
fn context_copies_are_marker_major() {
    let y = Context::of(&["y1", "y2"]).unwrap();
    assert_eq!(y.copies(2), Context::of(&["y1$1", "y1$2", "y2$1", "y2$2"]).unwrap());
}

#[test]
fn free_markers_skip_cycle_binders() {
    let t = parse_term("a:(b:&x U c:&x) @ cycle(x := d:(p:&y1 U q:&y2 U r:&x))").unwrap();
    assert_eq!(t.free_markers(), vec![Marker::new("y1"), Marker::new("y2")]);
}

fn arb_label() -> impl Strategy<Value = Label> {
    prop_oneof![
        Just(Label::new("a")),
        Just(Label::new("b")),
        Just(Label::new("U")),
        Just(Label::new("two words")),
        Just(Label::new("q\"t")),
        Just(Label::new("42")),
    ]
}

fn arb_marker() -> impl Strategy<Value = Marker> {
    prop_oneof![Just(Marker::new("&")), Just(Marker::new("x")), Just(Marker::new("y$1")), Just(Marker::new("z'"))]
}

fn arb_raw() -> impl Strategy<Value = RawTerm> {
    let leaf = prop_oneof![
        arb_marker().prop_map(RawTerm::MarkerRef),
        Just(RawTerm::Nil),
        Just(RawTerm::Emp),
        Just(RawTerm::Man),
    ];
    leaf.prop_recursive(5, 40, 4, |inner| {
        prop_oneof![
            (arb_label(), inner.clone()).prop_map(|(l, t)| RawTerm::Edge(l, Box::new(t))),
            (inner.clone(), inner.clone()).prop_map(|(s, t)| RawTerm::compose(s, t)),
            prop::collection::vec(inner.clone(), 2..4).prop_map(RawTerm::Pair),
            inner.clone().prop_map(RawTerm::cycle),
            (arb_marker(), inner.clone()).prop_map(|(m, t)| RawTerm::Def(m, Box::new(t))),
            (prop_oneof![Just("f"), Just("head-a?")], inner.clone())
                .prop_map(|(f, t)| RawTerm::call(f, t)),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(t in arb_raw()) {
        let text = print_term(&t);
        let back = parse_term(&text);
        prop_assert_eq!(back, Ok(t), "{}", text);
    }

    #[test]
    fn parser_never_emits_short_pairs(t in arb_raw()) {
        fn ok(t: &RawTerm) -> bool {
            match t {
                RawTerm::Pair(ts) => ts.len() >= 2 && ts.iter().all(ok),
                RawTerm::Edge(_, u) | RawTerm::Cycle(u) | RawTerm::Def(_, u) | RawTerm::Call(_, u) => ok(u),
                RawTerm::Compose(s, u) => ok(s) && ok(u),
                _ => true,
            }
        }
        let back = parse_term(&print_term(&t)).unwrap();
        prop_assert!(ok(&back));
    }

    #[test]
    fn union_sugar_matches_explicit_form(ts in prop::collection::vec(arb_raw(), 2..5)) {
        let sugar: alloc::vec::Vec<_> = ts.iter().map(print_term).collect();
        let text = alloc::format!("{{{}}}", sugar.join(", "));
        let mut explicit = ts.last().unwrap().clone();
        for t in ts.iter().rev().skip(1) {
            explicit = RawTerm::compose(RawTerm::Man, RawTerm::Pair(vec![t.clone(), explicit]));
        }
        prop_assert_eq!(parse_term(&text).unwrap(), explicit);
    }
}
