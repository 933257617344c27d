//! Acceptance criteria 1–7. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails or overruns its time bound.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uncal_core::axioms::{self, check_soundness, instantiate, min_size, random_term};
use uncal_core::graph::{self, eliminate_epsilon, interpret, terms_bisimilar};
use uncal_core::lambdag::{inverse, lg_eval, translate, LgTerm};
use uncal_core::recursion::{
    eval, eval_term, fusion_check, prec, prec_lifted, prec_open, srec, EvalEnv, Mode, RecDef, RecursionError,
};
use uncal_core::rewrite::{
    eta_man_expand, is_n_form, is_value, mu_to_term_with, normalize_with, to_mu, Strategy, DEFAULT_FUEL,
};
use uncal_core::syntax::{parse_program, parse_term, Context, Label, Marker, Pattern};
use uncal_core::typing::{abbrev, infer_pure, Term, TypedTerm};

const AA: &str = include_str!("../../../programs/aa.unql");
const ABAB: &str = include_str!("../../../programs/abab.unql");
const F1: &str = include_str!("../../../programs/f1.unql");
const F2: &str = include_str!("../../../programs/f2.unql");
const SWAP: &str = include_str!("../../../programs/relabel.unql");

type Outcome = Result<(), String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn ctx(names: &[&str]) -> Context {
    Context::of(names).unwrap()
}

fn typed(text: &str, source: &[&str]) -> TypedTerm {
    infer_pure(&parse_term(text).unwrap(), &ctx(source)).unwrap()
}

fn closed(text: &str) -> TypedTerm {
    typed(text, &[])
}

fn same(s: &TypedTerm, t: &TypedTerm) -> bool {
    terms_bisimilar(s, t).unwrap()
}

fn env(src: &str) -> EvalEnv {
    EvalEnv::new(parse_program(src).unwrap()).unwrap()
}

fn run(src: &str, expr: &str) -> TypedTerm {
    eval(&env(src), &parse_term(expr).unwrap()).unwrap().into_typed()
}

fn named(prefix: &str, n: usize) -> Context {
    Context::new((1..=n).map(|i| Marker::new(&format!("{}{}", prefix, i))).collect()).unwrap()
}

fn target(k: usize) -> Context {
    if k == 1 {
        Context::unit()
    } else {
        named("x", k)
    }
}

fn golden_examples() -> Outcome {
    let abab = run(ABAB, "&z1 @ abab(p:q:r:{})");
    ensure(same(&abab, &closed("a:b:a:{}")), || format!("abab gave {}", abab))?;

    let truth = closed("true:{}");
    for (arg, expected) in [("a:a:{}", &truth), ("cycle(&:=a:&)", &truth), ("a:b:{}", &closed("{}"))] {
        let out = run(AA, &format!("aa?({})", arg));
        ensure(same(&out, expected), || format!("aa?({}) gave {}", arg, out))?;
    }

    let p = parse_program(F2).unwrap();
    let out = eval(&EvalEnv::new(p.clone()).unwrap(), p.main.as_ref().unwrap()).unwrap().into_typed();
    let expected = typed("a:(a:&x U a:&x) @ cycle(x := a:(a:&y1 U a:&y2 U a:&x))", &["y1", "y2"]);
    ensure(same(&out, &expected), || format!("f2 on the example graph gave {}", out))?;

    let p = parse_program(F1).unwrap();
    let out = eval(&EvalEnv::new(p.clone()).unwrap(), p.main.as_ref().unwrap()).unwrap().into_typed();
    let g = eliminate_epsilon(&interpret(&out).unwrap());
    let root: Vec<_> = g.edges().iter().filter(|e| e.0 == g.roots()[0]).collect();
    ensure(root.len() == 3 && root.iter().all(|e| e.1 == Some(Label::new("result"))), || {
        format!("f1(sd) root edges {:?}", root)
    })?;

    let loop_a = closed("cycle(&:=a:&)");
    for other in ["a:cycle(&:=a:&)", "a:a:cycle(&:=a:&)"] {
        ensure(same(&loop_a, &closed(other)), || format!("cycle(&:=a:&) !~ {}", other))?;
    }
    ensure(!same(&loop_a, &closed("cycle(&:=b:&)")), || "a-loop ~ b-loop".into())
}

fn axiom_soundness() -> Outcome {
    for s in axioms::axioms().iter().chain(&axioms::derived()) {
        let r = check_soundness(s, 100, 6, 2024);
        ensure(r.passed(), || format!("{} failed: {:?}", r.schema, r.failures.first()))?;
    }
    for m in axioms::mutants() {
        let r = check_soundness(&m, 100, 6, 2024);
        ensure(!r.passed(), || format!("mutant {} survived 100 trials", m.name))?;
    }
    Ok(())
}

fn rewrite_properties() -> Outcome {
    for seed in 0..500u64 {
        let (n, k) = ((seed % 3) as usize, (seed / 3 % 4) as usize);
        let size = (1 + (seed / 12 % 10) as usize).max(min_size(k));
        let t = random_term(&named("y", n), &target(k), size, seed).map_err(|e| e.to_string())?;
        let a = normalize_with(&t, Strategy::LeftmostInnermost, DEFAULT_FUEL).map_err(|e| format!("{}: {}", t, e))?;
        let b = normalize_with(&t, Strategy::RightmostInnermost, DEFAULT_FUEL).map_err(|e| format!("{}: {}", t, e))?;
        ensure(a == b, || format!("strategies disagree on {}: {} vs {}", t, a, b))?;
        ensure(same(&t, a.typed()), || format!("nf({}) = {} is not bisimilar", t, a))?;
        ensure(is_value(a.term()), || format!("nf({}) = {} is not in M", t, a))?;
        if k == 1 {
            let e = eta_man_expand(a.typed()).map_err(|e| e.to_string())?;
            ensure(is_n_form(e.term()), || format!("{} is not in N", e))?;
            let m = to_mu(&e).map_err(|e| e.to_string())?;
            let back = mu_to_term_with(&m, e.source()).map_err(|e| e.to_string())?;
            ensure(back == e, || format!("mu_to_term(to_mu({})) = {}", e, back))?;
            ensure(to_mu(&back).as_ref() == Ok(&m), || format!("to_mu(mu_to_term({})) differs", m))?;
        }
    }
    Ok(())
}

/// The graph of the μ-image of an `⟨&⟩`-typed term.
fn chart(t: &TypedTerm) -> Result<graph::Graph, String> {
    let nf = normalize_with(t, Strategy::LeftmostInnermost, DEFAULT_FUEL).map_err(|e| e.to_string())?;
    let e = eta_man_expand(nf.typed()).map_err(|e| e.to_string())?;
    let m = to_mu(&e).map_err(|e| e.to_string())?;
    interpret(&mu_to_term_with(&m, t.source()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

/// The `⟨&⟩`-typed components `xi @ t` of a term.
fn components(t: &TypedTerm) -> Vec<TypedTerm> {
    (0..t.target().len())
        .map(|i| abbrev::compose(&TypedTerm::new(Term::Var(i), t.target().clone()).unwrap(), t).unwrap())
        .collect()
}

fn completeness() -> Outcome {
    let mut pairs = Vec::new();
    for seed in 0..100u64 {
        let size = 1 + (seed % 5) as usize;
        let s = random_term(&Context::empty(), &Context::unit(), size, seed).unwrap();
        let t = random_term(&Context::empty(), &Context::unit(), size, seed + 1000).unwrap();
        pairs.push((s, t));
    }
    let schemas: Vec<_> = axioms::axioms().into_iter().chain(axioms::derived()).collect();
    let mut forced = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0.. {
        if forced >= 100 || i > 10_000 {
            break;
        }
        let schema = &schemas[i % schemas.len()];
        let Ok(eq) = instantiate(schema, &schema.sample(&mut rng, 4)) else { continue };
        if let Some((l, r)) = components(&eq.lhs).into_iter().zip(components(&eq.rhs)).next() {
            let close = random_term(&Context::empty(), l.source(), min_size(l.source().len()).max(3), i as u64).unwrap();
            pairs.push((abbrev::compose(&l, &close).unwrap(), abbrev::compose(&r, &close).unwrap()));
            forced += 1;
        }
    }
    ensure(forced == 100, || format!("only {} forced pairs", forced))?;
    let mut agree = 0;
    for (s, t) in &pairs {
        let direct = same(s, t);
        let (cs, ct) = (chart(s)?, chart(t)?);
        let ct = ct.with_in_markers(cs.in_markers().clone()).unwrap().with_out_markers(cs.out_markers().clone()).unwrap();
        let charted = graph::bisimilar_fast(&cs, &ct).unwrap();
        ensure(direct == charted, || format!("{} vs {}: direct {} charts {}", s, t, direct, charted))?;
        if direct {
            agree += 1;
            let (gs, gt) = (interpret(s).unwrap(), interpret(t).unwrap());
            for depth in 1..=6 {
                ensure(graph::traces(&gs, depth).unwrap() == graph::traces(&gt, depth).unwrap(), || {
                    format!("{} and {} differ in traces at depth {}", s, t, depth)
                })?;
            }
        }
    }
    ensure(agree >= 100, || format!("only {} bisimilar pairs", agree))
}

fn random_def(mode: Mode, k: usize, seed: u64) -> RecDef {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = target(k).rename_all("z");
    let source = match mode {
        Mode::Structural => w.clone(),
        Mode::Primitive => Context::concat(&[w.clone(), Context::unit()]),
    };
    let mut clauses = Vec::new();
    for l in ["a", "b"] {
        clauses.push((Pattern::Concrete(Label::new(l)), axioms::random_term_with(&mut rng, &source, &w, 4).unwrap()));
    }
    let excluded = ["a", "b"].iter().map(|l| Label::new(l)).collect();
    clauses.push((Pattern::Var { name: "L".into(), excluded }, axioms::random_term_with(&mut rng, &source, &w, 4).unwrap()));
    RecDef::new("r", mode, w, clauses).unwrap()
}

trait RenameAll {
    fn rename_all(&self, prefix: &str) -> Context;
}

impl RenameAll for Context {
    fn rename_all(&self, prefix: &str) -> Context {
        if self.len() == 1 {
            self.clone()
        } else {
            named(prefix, self.len())
        }
    }
}

fn law(name: &str, lhs: TypedTerm, rhs: TypedTerm) -> Outcome {
    ensure(same(&lhs, &rhs), || format!("{}: {} !~ {}", name, lhs, rhs))
}

fn over(term: Term, source: Context) -> TypedTerm {
    TypedTerm::new(term, source).unwrap()
}

fn structural_laws(seed: u64) -> Outcome {
    let k = 1 + (seed % 2) as usize;
    let d = random_def(Mode::Structural, k, seed);
    let n = 1 + (seed % 3) as usize;
    let ys = named("y", n);
    let psi = |t: &TypedTerm| srec(&d, t).unwrap();
    let rt = |src: &Context, tgt: &Context, salt: u64| random_term(src, tgt, 5, seed ^ salt).unwrap();

    let i = (seed as usize) % n;
    law("var", psi(&over(Term::Var(i), ys.clone())), over(Term::vars(i * k, (i + 1) * k), ys.copies(k)))?;
    law("emp", psi(&over(Term::Emp, ys.clone())), over(Term::Emp, ys.copies(k)))?;
    law("nil", psi(&over(Term::Nil, ys.clone())), over(Term::pair(vec![Term::Nil; k]), ys.copies(k)))?;
    let zip = if k == 1 {
        Term::Man
    } else {
        Term::pair((0..k).map(|j| Term::union(Term::Var(j), Term::Var(k + j))).collect())
    };
    let two = ctx(&["u", "v"]);
    law("man", psi(&over(Term::Man, two.clone())), over(zip, two.copies(k)))?;
    let t = rt(&ys, &Context::unit(), 1);
    law("def", psi(&over(Term::def(Marker::new("m"), t.term().clone()), ys.clone())), psi(&t))?;
    let xs = ctx(&["x1", "x2"]);
    let (s, u) = (rt(&xs, &Context::unit(), 2), rt(&ys, &xs, 3));
    law("compose", psi(&abbrev::compose(&s, &u).unwrap()), abbrev::compose(&psi(&s), &psi(&u)).unwrap())?;
    let l = ["a", "b", "c"][(seed % 3) as usize];
    let lt = over(Term::label(l, t.term().clone()), ys.clone());
    law("label", psi(&lt), abbrev::compose(&d.body(&Label::new(l)).unwrap(), &psi(&t)).unwrap())?;
    let s2 = rt(&ys, &Context::unit(), 4);
    let p = abbrev::pair(&[t.clone(), s2.clone()], &ys).unwrap();
    law("pair", psi(&p), abbrev::pair(&[psi(&t), psi(&s2)], &ys.copies(k)).unwrap())?;
    let body = rt(&Context::concat(&[ys.clone(), Context::unit()]), &Context::unit(), 5);
    law("cycle", psi(&abbrev::cycle(&body).unwrap()), abbrev::cycle(&psi(&body)).unwrap())
}

/// `π`: the first `k` of every `k + 1` copies of `x` markers.
fn pi(k: usize, x: &Context) -> TypedTerm {
    let n = x.len();
    let term = Term::pair((0..n).flat_map(|i| (0..k).map(move |j| Term::Var(i * (k + 1) + j))).collect());
    over(term, x.copies(k + 1))
}

fn primitive_laws(seed: u64) -> Outcome {
    let k = 1 + (seed % 2) as usize;
    let d = random_def(Mode::Primitive, k, seed);
    let phi = |t: &TypedTerm| prec(&d, t).unwrap();
    let psi = |t: &TypedTerm| prec_lifted(&d, t).unwrap();
    let none = Context::empty();
    let t = random_term(&none, &Context::unit(), 5, seed ^ 11).unwrap();

    law("nil", phi(&closed("{}")), over(Term::pair(vec![Term::Nil; k]), none.clone()))?;
    let l = ["a", "b", "c"][(seed % 3) as usize];
    let lt = over(Term::label(l, t.term().clone()), none.clone());
    let arg = abbrev::pair(&[phi(&t), t.clone()], &none).unwrap();
    law("label", phi(&lt), abbrev::compose(&d.body(&Label::new(l)).unwrap(), &arg).unwrap())?;
    let xs = ctx(&["x1", "x2"]);
    let s = random_term(&xs, &Context::unit(), 5, seed ^ 12).unwrap();
    let u = random_term(&none, &xs, 5, seed ^ 13).unwrap();
    let rhs = abbrev::compose(&pi(k, &Context::unit()), &abbrev::compose(&psi(&s), &psi(&u)).unwrap()).unwrap();
    law("compose", phi(&abbrev::compose(&s, &u).unwrap()), rhs)?;
    let body = random_term(&Context::unit(), &Context::unit(), 5, seed ^ 14).unwrap();
    let rhs = abbrev::compose(&pi(k, &Context::unit()), &abbrev::cycle(&psi(&body)).unwrap()).unwrap();
    law("cycle", phi(&abbrev::cycle(&body).unwrap()), rhs)?;
    law("pairing", psi(&t), abbrev::pair(&[phi(&t), t.clone()], &none).unwrap())
}

fn recursion_characterisation() -> Outcome {
    for seed in 0..100u64 {
        structural_laws(seed).map_err(|e| format!("structural seed {}: {}", seed, e))?;
        primitive_laws(seed).map_err(|e| format!("primitive seed {}: {}", seed, e))?;
    }
    let env = env(AA);
    let aa = env.def("aa?").unwrap();
    let resolve = |t: TypedTerm| eval_term(&env, &t).unwrap().into_typed();
    let open = prec_open(aa, &typed("a:&", &["&"])).unwrap();
    let lhs = resolve(prec(aa, &closed("(a:&)@(a:{})")).unwrap());
    let rhs = resolve(abbrev::compose(&open, &prec(aa, &closed("a:{}")).unwrap()).unwrap());
    ensure(!same(&lhs, &rhs), || "aa? preserved composition".into())?;
    let lhs = resolve(prec(aa, &closed("cycle(&:=a:&)")).unwrap());
    let rhs = resolve(abbrev::cycle(&open).unwrap());
    ensure(!same(&lhs, &rhs), || "aa? preserved cycle".into())
}

fn fusion() -> Outcome {
    let extra = "sfun ab(a:t) = b:ab(t)  ab(L:t) = L:ab(t)\nsfun fb(L:t) = b:fb(t)\n\
                 sfun baba(L:t) = (z1 := b:&z2, z2 := a:&z1) @ baba(t)";
    let src: String = [F2, ABAB, SWAP, extra]
        .iter()
        .flat_map(|s| s.lines())
        .filter(|l| !l.starts_with("main"))
        .map(|l| format!("{}\n", l))
        .collect();
    let p = parse_program(&src).unwrap();
    let d = |n: &str| RecDef::from_program(&p, n).unwrap();
    for (i, (e, dd, h)) in [("f2", "fb", "ab"), ("abab", "baba", "swap")].into_iter().enumerate() {
        let r = fusion_check(&d(e), &d(dd), &d(h), 100, 6, i as u64).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{}: {:?}", r.schema, r.failures.first()))?;
    }
    match fusion_check(&d("f2"), &d("f2"), &d("ab"), 100, 6, 9) {
        Err(RecursionError::HypothesisFailed(_)) => Ok(()),
        other => Err(format!("violating triple accepted: {:?}", other.map(|r| r.passed()))),
    }
}

fn lambda_agreement() -> Outcome {
    for seed in 0..300u64 {
        let u = random_term(&Context::empty(), &Context::unit(), 1 + (seed % 10) as usize, seed).unwrap();
        let t = translate(&u).map_err(|e| e.to_string())?;
        let g = lg_eval(&t, &[]).map_err(|e| format!("{}: {}", t, e))?;
        let h = interpret(&u).unwrap();
        let g = g.with_in_markers(h.in_markers().clone()).unwrap();
        ensure(graph::bisimilar_fast(&g, &h).unwrap(), || format!("lg_eval({}) !~ {}", t, u))?;
        let back = inverse(&t).map_err(|e| e.to_string())?;
        ensure(same(&back, &u), || format!("inverse({}) = {} !~ {}", t, back, u))?;
    }
    let x = || LgTerm::var("x");
    let tr = |t: &TypedTerm| translate(t).unwrap();
    let evals_to = |t: &LgTerm, args: &[graph::Graph], u: &TypedTerm| {
        let g = lg_eval(t, args).unwrap();
        let h = interpret(u).unwrap();
        graph::bisimilar_fast(&g.with_in_markers(h.in_markers().clone()).unwrap(), &h).unwrap()
    };

    let one = tr(&closed("(a:&x) @ (x := b:{})"));
    let expected = LgTerm::app(LgTerm::lam(&["x"], LgTerm::edge("a", x())), LgTerm::edge("b", LgTerm::nil()));
    ensure(one == expected && evals_to(&one, &[], &closed("a:b:{}")), || format!("substitution gave {}", one))?;

    let two = tr(&closed("(a:{} U {}) U (b:c:{} U a:{})"));
    let expected = LgTerm::union(
        LgTerm::union(LgTerm::edge("a", LgTerm::nil()), LgTerm::nil()),
        LgTerm::union(LgTerm::edge("b", LgTerm::edge("c", LgTerm::nil())), LgTerm::edge("a", LgTerm::nil())),
    );
    ensure(two == expected && evals_to(&two, &[], &closed("a:{} U b:c:{}")), || format!("unions gave {}", two))?;

    let three = tr(&closed("cycle(&)"));
    ensure(three == LgTerm::fix(LgTerm::lam(&["x"], x())) && evals_to(&three, &[], &closed("{}")), || {
        format!("cycle(&) gave {}", three)
    })?;

    let four = tr(&typed("cycle(& := & U &y)", &["y"]));
    let expected = LgTerm::lam(&["y"], LgTerm::fix(LgTerm::lam(&["x"], LgTerm::union(x(), LgTerm::var("y")))));
    let arg = interpret(&closed("d:e:{}")).unwrap();
    ensure(four == expected && evals_to(&four, &[arg], &closed("d:e:{}")), || format!("open cycle gave {}", four))?;

    let five = tr(&closed("cycle(& := a:&)"));
    ensure(five == LgTerm::fix(LgTerm::lam(&["x"], LgTerm::edge("a", x()))), || format!("a-loop gave {}", five))?;
    ensure(evals_to(&five, &[], &closed("a:a:cycle(& := a:&)")), || "cycle(& := a:&) is not an a-loop".into())?;

    let six = tr(&typed("a:(b:&x U c:&x) @ cycle(x := d:(p:&y1 U q:&y2 U r:&x))", &["y1", "y2"]));
    let printed = "\\(y1,y2). (\\x. a:((b:x) U (c:x))) (fix (\\x. d:((p:y1) U (q:y2) U (r:x))))";
    ensure(six.to_string() == printed, || format!("example graph printed {}", six))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("golden examples", 5, golden_examples),
        ("axiom soundness", 60, axiom_soundness),
        ("rewrite properties", 120, rewrite_properties),
        ("completeness cross-check", 120, completeness),
        ("recursion characterisation", 120, recursion_characterisation),
        ("fusion law", 60, fusion),
        ("lambda-G agreement", 120, lambda_agreement),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, bound, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|()| {
            ensure(elapsed <= Duration::from_secs(bound), || format!("took {:.1?}, bound {} s", elapsed, bound))
        });
        match result {
            Ok(()) => println!("PASS {} {} ({:.2?})", i + 1, name, elapsed),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {} ({:.2?}): {}", i + 1, name, elapsed, e);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
