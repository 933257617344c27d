use super::*;
use crate::axioms::random_term;
use crate::graph::{interpret, terms_bisimilar};
use crate::syntax::parse_term;
use crate::typing::infer_pure;
use proptest::prelude::*;
use proptest::strategy::Strategy as Gen;
use super::Strategy;

fn ctx(names: &[&str]) -> Context {
    Context::of(names).unwrap()
}

fn typed(text: &str, source: &[&str]) -> TypedTerm {
    infer_pure(&parse_term(text).unwrap(), &ctx(source)).unwrap()
}

fn nf(text: &str, source: &[&str]) -> TypedTerm {
    normalize(&typed(text, source)).unwrap().into_typed()
}

#[test]
fn sub_step() {
    let t = typed("(a:&x) @ (x := b:{})", &[]);
    let s = step(&t).unwrap();
    assert_eq!(s.to_raw(), parse_term("a:b:{}").unwrap());
    assert_eq!(step(&s), None);
    assert_eq!(step(&typed("a:{}", &[])), None);
}

#[test]
fn bekic_step_shape() {
    let t = typed("cycle((x := a:&y, y := b:&x))", &[]);
    let s = step(&t).unwrap();
    assert_eq!(s.target(), t.target());
    match s.term() {
        Term::Compose(l, r) => {
            assert!(matches!(&**l, Term::Pair(ts) if matches!(ts[1], Term::Cycle(_))));
            assert!(matches!(&**r, Term::Cycle(_)));
        }
        other => panic!("{:?}", other),
    }
    assert!(terms_bisimilar(&t, &s).unwrap());
}

#[test]
fn empty_cycle_and_singleton_tuple() {
    assert_eq!(nf("cycle(())", &[]).term(), &Term::Emp);
    let t = TypedTerm::new(Term::cycle(Term::Pair(alloc::vec![Term::Emp, Term::label("a", Term::Var(0))])), Context::empty())
        .unwrap();
    let n = normalize(&t).unwrap();
    assert_eq!(n.term(), &Term::cycle(Term::label("a", Term::Var(0))));
}

#[test]
fn normalize_examples() {
    assert_eq!(nf("(a:&)@(a:{})", &[]).to_raw(), parse_term("a:a:{}").unwrap());
    assert_eq!(nf("a:{}", &[]).to_raw(), parse_term("a:{}").unwrap());
    let t = nf("cycle((x := a:&y, y := b:&x))", &[]);
    assert!(matches!(t.term(), Term::Pair(ts) if ts.len() == 2));
    assert!(is_value(t.term()));
    assert_eq!(t.target(), &ctx(&["x", "y"]));
}

#[test]
fn three_way_cycle_normalizes_to_a_tuple() {
    let t = typed("cycle((x := a:&y, y := b:&z, z := c:(&x U &w)))", &["w"]);
    let n = normalize(&t).unwrap();
    assert!(is_value(n.term()));
    assert_eq!(as_tuple(n.term()).unwrap().len(), 3);
    assert!(terms_bisimilar(&t, n.typed()).unwrap());
    let m = normalize_with(&t, Strategy::RightmostInnermost, DEFAULT_FUEL).unwrap();
    assert_eq!(m, n);
}

#[test]
fn man_stays_in_values() {
    let t = nf("! @ (a:{}, b:{})", &[]);
    assert!(is_value(t.term()));
    assert_eq!(t.term(), &Term::union(Term::label("a", Term::Nil), Term::label("b", Term::Nil)));
}

#[test]
fn eta_expansion() {
    let t = normalize(&typed("!", &["y1", "y2"])).unwrap();
    let e = eta_man_expand(t.typed()).unwrap();
    assert_eq!(e.term(), &Term::union(Term::Var(0), Term::Var(1)));
    let a = typed("a:{}", &[]);
    assert_eq!(eta_man_expand(&a).unwrap(), a);
    let nested = Term::label("a", Term::label("b", Term::Man));
    let nested = TypedTerm::new(nested, ctx(&["y1", "y2"])).unwrap();
    let e = eta_man_expand(&nested).unwrap();
    assert!(is_n_form(e.term()));
    assert_eq!(e.term(), &Term::label("a", Term::label("b", Term::union(Term::Var(0), Term::Var(1)))));
    assert!(matches!(
        eta_man_expand(&typed("(a:{}, b:{})", &[])),
        Err(RewriteError::TypeNotSingleton(_))
    ));
}

#[test]
fn eta_binders_are_fresh() {
    let t = typed("cycle(x := a:cycle(x := b:(&x U &y)))", &["x", "y"]);
    let e = eta_man_expand(&normalize(&t).unwrap().into_typed()).unwrap();
    let m = to_mu(&e).unwrap();
    assert_eq!(print_mu(&m), "mu x1. a(mu x2. b(x2 + y))");
}

#[test]
fn mu_images() {
    let t = typed("cycle(x := a:&x)", &[]);
    assert_eq!(to_mu(&t).unwrap(), MuTerm::mu("x", MuTerm::app("a", MuTerm::var("x"))));
    assert_eq!(to_mu(&typed("{}", &[])).unwrap(), MuTerm::Zero);
    let u = typed("!@(a:{}, b:{})", &[]);
    let m = to_mu(&u).unwrap();
    assert_eq!(m, MuTerm::plus(MuTerm::app("a", MuTerm::Zero), MuTerm::app("b", MuTerm::Zero)));
    assert_eq!(mu_to_term(&m), u);
    assert!(matches!(to_mu(&typed("a:{} @ ()", &[])), Err(RewriteError::NotInN(_))));
}

#[test]
fn mu_to_term_examples() {
    let m = MuTerm::mu("x", MuTerm::app("a", MuTerm::var("x")));
    assert_eq!(mu_to_term(&m).to_raw(), parse_term("cycle(x := a:&x)").unwrap());
    assert_eq!(mu_to_term(&MuTerm::Zero).term(), &Term::Nil);
    let unfolded = MuTerm::app("a", m.clone());
    assert!(terms_bisimilar(&mu_to_term(&m), &mu_to_term(&unfolded)).unwrap());
    let free = MuTerm::plus(MuTerm::var("y"), MuTerm::var("&"));
    assert_eq!(mu_to_term(&free).source(), &ctx(&["y", "&"]));
}

#[test]
fn to_mu_primes_capturing_binders() {
    // the inner binder is named like the outer variable it must not capture
    let t = TypedTerm::new(
        Term::cycle(Term::def(Marker::new("y"), Term::label("a", Term::union(Term::Var(0), Term::Var(1))))),
        ctx(&["y"]),
    )
    .unwrap();
    assert_eq!(print_mu(&to_mu(&t).unwrap()), "mu y'. a(y + y')");
}

#[test]
fn mu_printing_and_parsing() {
    let cases = [
        "mu x. a(x) + 0",
        "(mu x. a(x)) + b(0)",
        "a(0) + b(0) + c(0)",
        "(a(0) + b(0)) + c(0)",
        "\"x y\"(&) + mu z. z",
        "a(mu x. x) + &0",
    ];
    for c in cases {
        let m = parse_mu(c).unwrap();
        assert_eq!(print_mu(&m), c);
    }
    assert_eq!(parse_mu("μx. a(x)").unwrap(), MuTerm::mu("x", MuTerm::app("a", MuTerm::var("x"))));
    assert!(matches!(parse_mu("a(0"), Err(RewriteError::MuParse { .. })));
    assert!(matches!(parse_mu("a(0) +"), Err(RewriteError::MuParse { .. })));
}

fn source(n: usize) -> Context {
    Context::new((0..n).map(|i| Marker::new(&alloc::format!("y{}", i + 1))).collect()).unwrap()
}

fn target(k: usize) -> Context {
    match k {
        1 => Context::unit(),
        _ => Context::new((0..k).map(|i| Marker::new(&alloc::format!("x{}", i + 1))).collect()).unwrap(),
    }
}

fn arb_term() -> impl Gen<Value = TypedTerm> {
    (0usize..3, 0usize..4, 1usize..11, any::<u64>()).prop_filter_map("too small", |(n, k, size, seed)| {
        random_term(&source(n), &target(k), size, seed).ok()
    })
}

fn arb_mu() -> impl Gen<Value = MuTerm> {
    let leaf = prop_oneof![Just(MuTerm::Zero), prop::sample::select(alloc::vec!["x", "y", "&"]).prop_map(MuTerm::var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (prop::sample::select(alloc::vec!["a", "b"]), inner.clone()).prop_map(|(l, t)| MuTerm::app(l, t)),
            (prop::sample::select(alloc::vec!["x", "y", "z"]), inner.clone()).prop_map(|(x, t)| MuTerm::mu(x, t)),
            (inner.clone(), inner).prop_map(|(a, b)| MuTerm::plus(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn steps_keep_the_judgment_and_the_graph(t in arb_term()) {
        let mut cur = t.clone();
        for _ in 0..20 {
            let Some(next) = step(&cur) else { break };
            prop_assert_eq!(next.target(), cur.target());
            let again = TypedTerm::new(next.term().clone(), next.source().clone()).unwrap();
            prop_assert_eq!(again.target(), t.target());
            prop_assert!(terms_bisimilar(&cur, &next).unwrap(), "{} -> {}", cur, next);
            cur = next;
        }
    }

    #[test]
    fn strategies_agree(t in arb_term()) {
        let a = normalize_with(&t, Strategy::LeftmostInnermost, DEFAULT_FUEL).unwrap();
        let b = normalize_with(&t, Strategy::RightmostInnermost, DEFAULT_FUEL).unwrap();
        let c = normalize(&t).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
    }

    #[test]
    fn normal_forms_are_values(t in arb_term()) {
        let n = normalize(&t).unwrap();
        prop_assert!(is_value(n.term()), "{}", n);
        prop_assert_eq!(step(n.typed()), None);
        prop_assert!(terms_bisimilar(&t, n.typed()).unwrap());
        if n.typed().target().len() == 1 {
            let e = eta_man_expand(n.typed()).unwrap();
            prop_assert!(is_n_form(e.term()), "{}", e);
            prop_assert!(terms_bisimilar(&t, &e).unwrap());
            let m = to_mu(&e).unwrap();
            prop_assert_eq!(mu_to_term_with(&m, e.source()).unwrap(), e.clone());
            prop_assert_eq!(parse_mu(&print_mu(&m)).unwrap(), m);
        }
    }

    #[test]
    fn mu_round_trip(m in arb_mu()) {
        let t = mu_to_term(&m);
        prop_assert!(is_n_form(t.term()));
        prop_assert_eq!(to_mu(&t).unwrap(), m.clone());
        prop_assert_eq!(parse_mu(&print_mu(&m)).unwrap(), m);
        let g = interpret(&t).unwrap();
        prop_assert_eq!(g.in_markers(), t.target());
    }
}
