use super::*;
use crate::syntax::parse_term;
use crate::typing::{infer_pure, Term};
use alloc::vec;
use proptest::prelude::*;

fn typed(text: &str, source: &[&str]) -> TypedTerm {
    infer_pure(&parse_term(text).unwrap(), &Context::of(source).unwrap()).unwrap()
}

fn assign(contexts: &[(&str, &[&str])], terms: &[(&str, TypedTerm)]) -> Assignment {
    Assignment {
        contexts: contexts.iter().map(|(k, c)| (k.to_string(), Context::of(c).unwrap())).collect(),
        terms: terms.iter().map(|(k, t)| (k.to_string(), t.clone())).collect(),
        ci: None,
    }
}

#[test]
fn c1_needs_no_slots() {
    let eq = instantiate(&schema("c1").unwrap(), &Assignment::default()).unwrap();
    assert_eq!(eq.to_string(), "⟨⟩ ⊢ cycle(&) = {} : ⟨&⟩");
    assert!(eq.holds().unwrap());
}

#[test]
fn fix_unfolds_a_loop() {
    let a = assign(&[("Y", &[]), ("X", &["&"])], &[("t", typed("a:&", &["&"]))]);
    let eq = instantiate(&schema("fix").unwrap(), &a).unwrap();
    assert_eq!(eq.lhs.to_string(), "cycle(a:&)");
    assert_eq!(eq.rhs.term(), &Term::compose(Term::label("a", Term::Var(0)), Term::cycle(Term::label("a", Term::Var(0)))));
    assert!(eq.holds().unwrap());
}

#[test]
fn sp_splits_a_pair() {
    let a = assign(&[("Z", &[]), ("X", &["x"]), ("Y", &["y"])], &[("t", typed("(x := a:{}, y := b:{})", &[]))]);
    let eq = instantiate(&schema("SP").unwrap(), &a).unwrap();
    match eq.lhs.term() {
        Term::Pair(ts) => assert!(ts.iter().all(|u| matches!(u, Term::Compose(..)))),
        other => panic!("{:?}", other),
    }
    assert_eq!(eq.rhs, a.terms["t"]);
    assert!(eq.holds().unwrap());
}

#[test]
fn slot_judgments_are_checked() {
    let a = assign(&[("Y", &[]), ("X", &["&"])], &[("t", typed("a:{}", &[]))]);
    assert!(matches!(
        instantiate(&schema("fix").unwrap(), &a),
        Err(AxiomError::SlotJudgmentMismatch { slot, .. }) if slot == "t"
    ));
    let a = assign(&[("X", &[]), ("Y", &["y"])], &[("t", typed("a:&y", &["y"]))]);
    assert!(matches!(instantiate(&schema("CI").unwrap(), &a), Err(AxiomError::SlotJudgmentMismatch { .. })));
    assert!(matches!(schema("nope"), Err(AxiomError::UnknownSchema(_))));
}

#[test]
fn every_schema_has_a_distinct_name() {
    let mut names: Vec<&str> = axioms().iter().chain(derived().iter()).map(|s| s.name).collect();
    let n = names.len();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), n);
    assert_eq!(axioms().len(), 15);
    assert_eq!(derived().len(), 17);
}

#[test]
fn soundness_of_degen_and_bekic() {
    for name in ["degen_prime", "degen", "bekic"] {
        let r = check_soundness(&schema(name).unwrap(), 30, 6, 0);
        assert!(r.passed(), "{:?}", r);
    }
}

#[test]
fn every_law_survives_a_few_trials() {
    for s in axioms().iter().chain(derived().iter()) {
        let r = check_soundness(s, 10, 5, 7);
        assert!(r.passed(), "{:?}", r.failures.first());
    }
}

#[test]
fn the_mutant_fails() {
    let r = check_soundness(&schema("c2_mutant").unwrap(), 100, 6, 0);
    assert!(!r.passed());
    assert_eq!(r.failures[0].trial, 0);
}

#[test]
fn ci_for_every_small_rho() {
    let s = schema("CI").unwrap();
    let t2 = typed("a:(&x U b:&y1) U &y2", &["x", "y1", "y2"]);
    for rhos in [vec![vec![0, 0], vec![0, 0]], vec![vec![1, 0], vec![0, 1]], vec![vec![1, 1], vec![0, 1]]] {
        let mut a = assign(&[("X", &["x"]), ("Y", &["y1", "y2"])], &[("t", t2.clone())]);
        a.ci = Some(CiInstance { rhos });
        assert!(instantiate(&s, &a).unwrap().holds().unwrap());
    }
}

#[test]
fn generator_basics() {
    for seed in 0..20 {
        let t = random_term(&Context::empty(), &Context::unit(), 1, seed).unwrap();
        assert_eq!(t.term(), &Term::Nil);
    }
    let y = Context::of(&["y"]).unwrap();
    assert_eq!(random_term(&y, &Context::unit(), 8, 3), random_term(&y, &Context::unit(), 8, 3));
    let two = Context::of(&["p", "q"]).unwrap();
    assert_eq!(random_term(&y, &two, 2, 0), Err(AxiomError::Unsatisfiable { size: 2, arity: 2 }));
}

proptest! {
    #[test]
    fn generated_terms_reinfer(n in 0usize..3, k in 0usize..4, size in 1usize..12, seed in any::<u64>()) {
        let src = Context::new((0..n).map(|i| Marker::new(&alloc::format!("y{}", i))).collect()).unwrap();
        let tgt = Context::new((0..k).map(|i| Marker::new(&alloc::format!("x{}", i))).collect()).unwrap();
        if let Ok(t) = random_term(&src, &tgt, size, seed) {
            prop_assert_eq!(t.target(), &tgt);
            let mut unions = 0;
            t.term().visit(&mut |u| unions += (u == &Term::Man) as usize);
            prop_assert!(t.size() - 2 * unions <= size + k);
            let again = infer_pure(&t.to_raw(), &src).unwrap();
            prop_assert_eq!(again.term(), t.term());
        } else {
            prop_assert!(size < min_size(k));
        }
    }
}
