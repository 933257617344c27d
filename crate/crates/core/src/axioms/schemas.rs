use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{AxiomError, AxiomSchema, Assignment, Equation, Slot};
use crate::syntax::{Context, Marker};
use crate::typing::abbrev::{self, compose, cycle, identity, pair, proj_left, proj_right, times};
use crate::typing::{substitute, weaken_closed, Term, TypedTerm};

fn cat(a: &Assignment, names: &[&str]) -> Context {
    Context::concat(&names.iter().map(|n| a.context(n)).collect::<Vec<_>>())
}

fn slot(name: &str, source: Context, target: Context) -> Slot {
    Slot { name: name.to_string(), source, target }
}

fn ctx(names: &[&str]) -> Context {
    Context::of(names).expect("distinct")
}

fn typed(term: Term, source: &Context) -> Result<TypedTerm, AxiomError> {
    Ok(TypedTerm::new(term, source.clone())?)
}

fn closed(lhs: Term, rhs: Term, source: &[&str], target: Context) -> Result<Equation, AxiomError> {
    let y = ctx(source);
    let (l, r) = (typed(lhs, &y)?, typed(rhs, &y)?);
    Equation::new(y, target, l, r)
}

fn no_slots(_: &Assignment) -> Vec<Slot> {
    Vec::new()
}

macro_rules! schema {
    ($name:expr, $derived:expr, $ctxs:expr, $slots:expr, $build:expr) => {
        AxiomSchema { name: $name, derived: $derived, contexts: $ctxs, slots: $slots, build: $build }
    };
}

const Y_X: &[(&str, usize, usize)] = &[("Y", 0, 2), ("X", 0, 2)];

/// The schemas of the axiomatisation.
pub fn axioms() -> Vec<AxiomSchema> {
    vec![
        schema!("sub", false, &[("Y", 0, 3), ("X", 0, 2), ("Z", 0, 2)], |a| {
            let mut s = vec![slot("t", a.context("Y"), a.context("X"))];
            for i in 1..=a.context("Y").len() {
                s.push(slot(&format!("s{}", i), a.context("Z"), Context::unit()));
            }
            s
        }, |a| {
            let (y, z) = (a.context("Y"), a.context("Z"));
            let t = a.term("t");
            let ss: Vec<TypedTerm> = (1..=y.len()).map(|i| a.term(&format!("s{}", i)).clone()).collect();
            let lhs = compose(t, &pair(&ss, &z)?)?;
            let rhs = if y.is_empty() {
                weaken_closed(t, &z)?
            } else {
                let map: BTreeMap<Marker, TypedTerm> = y.iter().cloned().zip(ss).collect();
                substitute(t, &map)?
            };
            Equation::new(z, a.context("X"), lhs, rhs)
        }),
        schema!("SP", false, &[("Z", 0, 2), ("X", 0, 2), ("Y", 0, 2)], |a| {
            vec![slot("t", a.context("Z"), cat(a, &["X", "Y"]))]
        }, |a| {
            let (x, y, z) = (a.context("X"), a.context("Y"), a.context("Z"));
            let t = a.term("t");
            let lhs = pair(&[compose(&proj_left(&x, &y), t)?, compose(&proj_right(&x, &y), t)?], &z)?;
            Equation::new(z, cat(a, &["X", "Y"]), lhs, t.clone())
        }),
        schema!("eta_man", false, &[], no_slots, |_| {
            closed(Term::union(Term::Var(0), Term::Var(1)), Term::Man, &["x", "y"], Context::unit())
        }),
        schema!("fix", false, Y_X, |a| vec![slot("t", cat(a, &["Y", "X"]), a.context("X"))], |a| {
            let (y, x) = (a.context("Y"), a.context("X"));
            let t = a.term("t");
            let c = cycle(t)?;
            let rhs = compose(t, &pair(&[identity(&y), c.clone()], &y)?)?;
            Equation::new(y, x, c, rhs)
        }),
        schema!("nat", false, &[("Y", 0, 2), ("X", 0, 2), ("Z", 0, 2)], |a| {
            vec![slot("t", cat(a, &["Y", "X"]), a.context("X")), slot("s", a.context("Z"), a.context("Y"))]
        }, |a| {
            let (x, z) = (a.context("X"), a.context("Z"));
            let (t, s) = (a.term("t"), a.term("s"));
            let lhs = compose(&cycle(t)?, s)?;
            let rhs = cycle(&compose(t, &times(s, &identity(&x)))?)?;
            Equation::new(z, x, lhs, rhs)
        }),
        schema!("dinat", false, &[("Y", 0, 2), ("X", 0, 2), ("Z", 0, 2)], |a| {
            vec![slot("s", a.context("Z"), a.context("X")), slot("t", cat(a, &["Y", "X"]), a.context("Z"))]
        }, |a| {
            let (y, x) = (a.context("Y"), a.context("X"));
            let (s, t) = (a.term("s"), a.term("t"));
            let lhs = cycle(&compose(s, t)?)?;
            let rhs = compose(s, &cycle(&compose(t, &times(&identity(&y), s))?)?)?;
            Equation::new(y, x, lhs, rhs)
        }),
        schema!("bekic", false, &[("Z", 0, 1), ("X", 1, 2), ("Y", 1, 2)], |a| {
            let src = cat(a, &["Z", "X", "Y"]);
            vec![slot("t", src.clone(), a.context("X")), slot("s", src, a.context("Y"))]
        }, |a| {
            let (z, x) = (a.context("Z"), a.context("X"));
            let zx = cat(a, &["Z", "X"]);
            let (t, s) = (a.term("t"), a.term("s"));
            let lhs = cycle(&pair(&[t.clone(), s.clone()], &cat(a, &["Z", "X", "Y"]))?)?;
            let cyc_s = cycle(s)?;
            let inner = pair(&[identity(&zx), cyc_s.clone()], &zx)?;
            let cyc_x = cycle(&compose(t, &inner)?)?;
            let left = pair(&[proj_right(&z, &x), cyc_s], &zx)?;
            let right = pair(&[identity(&z), cyc_x], &z)?;
            Equation::new(z, cat(a, &["X", "Y"]), lhs, compose(&left, &right)?)
        }),
        schema!("CI", false, &[("X", 0, 2), ("Y", 1, 3)], |a| {
            vec![slot("t", cat(a, &["X", "Y"]), Context::unit())]
        }, ci_build),
        schema!("c1", false, &[], no_slots, |_| closed(Term::cycle(Term::Var(0)), Term::Nil, &[], Context::unit())),
        schema!("c2", false, &[], no_slots, |_| closed(Term::cycle(Term::Man), Term::Var(0), &["y"], Context::unit())),
        schema!("unitL_man", false, &[], no_slots, |_| {
            let lhs = Term::compose(Term::Man, Term::Pair(vec![Term::Nil, Term::Var(0)]));
            closed(lhs, Term::Var(0), &["x"], Context::unit())
        }),
        schema!("unitR_man", false, &[], no_slots, |_| {
            let lhs = Term::compose(Term::Man, Term::Pair(vec![Term::Var(0), Term::Nil]));
            closed(lhs, Term::Var(0), &["x"], Context::unit())
        }),
        schema!("assoc_man", false, &[], no_slots, |_| {
            let l = Term::compose(Term::Man, Term::Pair(vec![Term::Var(0), Term::union(Term::Var(1), Term::Var(2))]));
            let r = Term::compose(Term::Man, Term::Pair(vec![Term::union(Term::Var(0), Term::Var(1)), Term::Var(2)]));
            closed(l, r, &["x", "y", "z"], Context::unit())
        }),
        schema!("com_man", false, &[], no_slots, |_| {
            closed(Term::union(Term::Var(1), Term::Var(0)), Term::Man, &["x", "y"], Context::unit())
        }),
        schema!("degen", false, &[], no_slots, |_| {
            closed(Term::union(Term::Var(0), Term::Var(0)), Term::Var(0), &["x"], Context::unit())
        }),
    ]
}

/// `cycle(⟨t @ (Id_X × ρ_1), …⟩) = Δ_m @ cycle(t @ (Id_X × Δ_m))`.
fn ci_build(a: &Assignment) -> Result<Equation, AxiomError> {
    let (x, y) = (a.context("X"), a.context("Y"));
    let m = y.len();
    let t = a.term("t");
    let rhos = &a.ci.as_ref().expect("checked by instantiate").rhos;
    let id_x = identity(&x);
    let mut rows = Vec::with_capacity(m);
    for r in rhos {
        let rho = typed(Term::pair(r.iter().map(|&j| Term::Var(j)).collect()), &y)?;
        rows.push(compose(t, &times(&id_x, &rho))?);
    }
    let rows = abbrev::pair(&rows, &cat(a, &["X", "Y"]))?;
    let lhs = cycle(&crate::typing::rename_target(&rows, &y)?)?;
    let delta = crate::typing::rename_target(&typed(Term::pair(vec![Term::Var(0); m]), &Context::unit())?, &y)?;
    let rhs = compose(&delta, &cycle(&compose(t, &times(&id_x, &delta))?)?)?;
    Equation::new(x, y, lhs, rhs)
}

/// Laws of the derived theory.
pub fn derived() -> Vec<AxiomSchema> {
    vec![
        schema!("tmnl", true, &[("Y", 0, 3)], |a| vec![slot("t", a.context("Y"), Context::empty())], |a| {
            let y = a.context("Y");
            Equation::new(y.clone(), Context::empty(), a.term("t").clone(), typed(Term::Emp, &y)?)
        }),
        schema!("fst", true, &[("Z", 0, 2), ("X", 0, 2), ("Y", 0, 2)], fst_snd_slots, |a| {
            let (x, y, z) = (a.context("X"), a.context("Y"), a.context("Z"));
            let st = pair(&[a.term("s").clone(), a.term("t").clone()], &z)?;
            Equation::new(z, x.clone(), compose(&proj_left(&x, &y), &st)?, a.term("s").clone())
        }),
        schema!("snd", true, &[("Z", 0, 2), ("X", 0, 2), ("Y", 0, 2)], fst_snd_slots, |a| {
            let (x, y, z) = (a.context("X"), a.context("Y"), a.context("Z"));
            let st = pair(&[a.term("s").clone(), a.term("t").clone()], &z)?;
            Equation::new(z, y.clone(), compose(&proj_right(&x, &y), &st)?, a.term("t").clone())
        }),
        schema!("dpair", true, &[("Y", 0, 2), ("X", 0, 2), ("W", 0, 2), ("Z", 0, 2)], |a| {
            vec![
                slot("t1", a.context("Y"), a.context("X")),
                slot("t2", a.context("Y"), a.context("W")),
                slot("s", a.context("Z"), a.context("Y")),
            ]
        }, |a| {
            let z = a.context("Z");
            let (t1, t2, s) = (a.term("t1"), a.term("t2"), a.term("s"));
            let lhs = compose(&pair(&[t1.clone(), t2.clone()], &a.context("Y"))?, s)?;
            let rhs = pair(&[compose(t1, s)?, compose(t2, s)?], &z)?;
            Equation::new(z, cat(a, &["X", "W"]), lhs, rhs)
        }),
        schema!("fsi", true, &[("X", 0, 2), ("Y", 0, 2)], no_slots, |a| {
            let (x, y) = (a.context("X"), a.context("Y"));
            let xy = cat(a, &["X", "Y"]);
            let lhs = pair(&[proj_left(&x, &y), proj_right(&x, &y)], &xy)?;
            Equation::new(xy.clone(), xy.clone(), lhs, identity(&xy))
        }),
        schema!("bmul", true, &[], no_slots, |_| {
            let l = Term::Pair(vec![Term::compose(Term::Emp, Term::Var(0)), Term::compose(Term::Emp, Term::Var(1))]);
            closed(l, Term::compose(Term::Emp, Term::Man), &["x", "y"], Context::empty())
        }),
        schema!("bcomul", true, &[], no_slots, |_| {
            let l = Term::compose(Term::Pair(vec![Term::Var(0), Term::Var(0)]), Term::Nil);
            closed(l, Term::Pair(vec![Term::Nil, Term::Nil]), &[], ctx(&["&$1", "&$2"]))
        }),
        schema!("unR_at", true, Y_X, |a| vec![slot("t", a.context("Y"), a.context("X"))], |a| {
            let (y, x) = (a.context("Y"), a.context("X"));
            let t = a.term("t");
            Equation::new(y.clone(), x, compose(t, &identity(&y))?, t.clone())
        }),
        schema!("unL_at", true, Y_X, |a| vec![slot("t", a.context("Y"), a.context("X"))], |a| {
            let (y, x) = (a.context("Y"), a.context("X"));
            let t = a.term("t");
            Equation::new(y, x.clone(), compose(&identity(&x), t)?, t.clone())
        }),
        schema!("assoc_at", true, &[("Y", 0, 2), ("V", 0, 2), ("W", 0, 2), ("X", 0, 2)], |a| {
            vec![
                slot("s", a.context("W"), a.context("X")),
                slot("t", a.context("V"), a.context("W")),
                slot("u", a.context("Y"), a.context("V")),
            ]
        }, |a| {
            let (s, t, u) = (a.term("s"), a.term("t"), a.term("u"));
            let lhs = compose(&compose(s, t)?, u)?;
            let rhs = compose(s, &compose(t, u)?)?;
            Equation::new(a.context("Y"), a.context("X"), lhs, rhs)
        }),
        schema!("bunit", true, &[], no_slots, |_| {
            closed(Term::compose(Term::Emp, Term::Nil), Term::Emp, &[], Context::empty())
        }),
        schema!("compa", true, &[], no_slots, |_| {
            let l = Term::compose(Term::Pair(vec![Term::Var(0), Term::Var(0)]), Term::Man);
            let dd = Term::Pair(vec![Term::Var(0), Term::Var(0), Term::Var(1), Term::Var(1)]);
            let mid = Term::compose(Term::Pair(vec![Term::Var(0), Term::Var(2), Term::Var(1), Term::Var(3)]), dd);
            let mm = Term::Pair(vec![Term::union(Term::Var(0), Term::Var(1)), Term::union(Term::Var(2), Term::Var(3))]);
            closed(l, Term::compose(mm, mid), &["x", "y"], ctx(&["&$1", "&$2"]))
        }),
        schema!("comm_union", true, &[("Y", 0, 2)], two_unit_slots, |a| {
            let (s, t) = (a.term("s"), a.term("t"));
            Equation::new(a.context("Y"), Context::unit(), abbrev::union(s, t)?, abbrev::union(t, s)?)
        }),
        schema!("unit_union_l", true, &[("Y", 0, 2)], one_unit_slot, |a| {
            let t = a.term("t");
            let nil = typed(Term::Nil, &a.context("Y"))?;
            Equation::new(a.context("Y"), Context::unit(), abbrev::union(&nil, t)?, t.clone())
        }),
        schema!("unit_union_r", true, &[("Y", 0, 2)], one_unit_slot, |a| {
            let t = a.term("t");
            let nil = typed(Term::Nil, &a.context("Y"))?;
            Equation::new(a.context("Y"), Context::unit(), abbrev::union(t, &nil)?, t.clone())
        }),
        schema!("assoc_union", true, &[("Y", 0, 2)], |a| {
            let y = a.context("Y");
            vec![slot("s", y.clone(), Context::unit()), slot("t", y.clone(), Context::unit()), slot("u", y, Context::unit())]
        }, |a| {
            let (s, t, u) = (a.term("s"), a.term("t"), a.term("u"));
            let lhs = abbrev::union(&abbrev::union(s, t)?, u)?;
            let rhs = abbrev::union(s, &abbrev::union(t, u)?)?;
            Equation::new(a.context("Y"), Context::unit(), lhs, rhs)
        }),
        schema!("degen_prime", true, &[("Y", 0, 2)], one_unit_slot, |a| {
            let t = a.term("t");
            Equation::new(a.context("Y"), Context::unit(), abbrev::union(t, t)?, t.clone())
        }),
    ]
}

fn fst_snd_slots(a: &Assignment) -> Vec<Slot> {
    vec![slot("s", a.context("Z"), a.context("X")), slot("t", a.context("Z"), a.context("Y"))]
}

fn one_unit_slot(a: &Assignment) -> Vec<Slot> {
    vec![slot("t", a.context("Y"), Context::unit())]
}

fn two_unit_slots(a: &Assignment) -> Vec<Slot> {
    vec![slot("s", a.context("Y"), Context::unit()), slot("t", a.context("Y"), Context::unit())]
}

/// Deliberately unsound variants used to show the harness can fail.
pub fn mutants() -> Vec<AxiomSchema> {
    vec![schema!("c2_mutant", false, &[], no_slots, |_| {
        closed(Term::cycle(Term::Man), Term::Nil, &["y"], Context::unit())
    })]
}

/// Looks a schema up by name among axioms, derived laws and mutants.
pub fn schema(name: &str) -> Result<AxiomSchema, AxiomError> {
    axioms()
        .into_iter()
        .chain(derived())
        .chain(mutants())
        .find(|s| s.name == name)
        .ok_or_else(|| AxiomError::UnknownSchema(name.to_string()))
}
