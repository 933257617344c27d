use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::translate::fresh;
use super::{Const, LgError, LgTerm, LgType};

/// Rewrites every `srec e t` and `prec e t` by [`lg_srec`] and [`lg_prec`],
/// innermost first.
pub fn eliminate(t: &LgTerm) -> Result<LgTerm, LgError> {
    Ok(match t {
        LgTerm::App(f, a) => {
            if let LgTerm::App(op, e) = &**f {
                match &**op {
                    LgTerm::Const(Const::Srec) => return lg_srec(&eliminate(e)?, &eliminate(a)?),
                    LgTerm::Const(Const::Prec) => return lg_prec(&eliminate(e)?, &eliminate(a)?),
                    _ => {}
                }
            }
            LgTerm::app(eliminate(f)?, eliminate(a)?)
        }
        LgTerm::Lam(bs, b) => LgTerm::Lam(bs.clone(), Box::new(eliminate(b)?)),
        LgTerm::Tuple(ts) => LgTerm::Tuple(ts.iter().map(eliminate).collect::<Result<_, _>>()?),
        LgTerm::Var(_) | LgTerm::Const(_) => t.clone(),
    })
}

/// `srec e t` for a clause table `e : L → G^k → G^k` and a term `t` in the
/// image of the translation, rewritten by the recursion axioms into a term
/// of type `G^{k·n} → G^{k·m}`; variables are copied `k` times, marker-major.
pub fn lg_srec(e: &LgTerm, t: &LgTerm) -> Result<LgTerm, LgError> {
    let k = table_width(e, 0)?;
    let mut s = Srec::new(e, t, k);
    s.top(t)
}

/// `prec e t = π (srec (λℓ λx. (e ℓ x, ℓ:π′ x)) t)` for a closed `t : G^m`
/// and `e : L → G^{k+1} → G^k`; `π` keeps the first `k` of every `k+1`
/// components.
pub fn lg_prec(e: &LgTerm, t: &LgTerm) -> Result<LgTerm, LgError> {
    let k = table_width(e, 1)?;
    let m = match t.type_of()? {
        LgType::Arrow(..) => return Err(LgError::TypeError("prec needs a closed argument".into())),
        ty => ty.graph_power().ok_or_else(|| LgError::TypeError(format!("prec argument of type {}", ty)))?,
    };
    let mut used = t.names();
    used.extend(e.names());
    let pick = |base: &str, used: &mut BTreeSet<String>| {
        let n = fresh(base, |c| used.contains(c));
        used.insert(n.clone());
        n
    };
    let l = pick("l", &mut used);
    let xs: Vec<String> = (1..=k + 1).map(|i| pick(&format!("x{}", i), &mut used)).collect();
    let vars = |xs: &[String]| LgTerm::tuple(xs.iter().map(|x| LgTerm::Var(x.clone())).collect());
    let lifted = LgTerm::Lam(
        vec![(l.clone(), LgType::L)],
        Box::new(LgTerm::lam(
            &xs,
            LgTerm::Tuple(vec![
                LgTerm::app(LgTerm::app(e.clone(), LgTerm::Var(l.clone())), vars(&xs)),
                LgTerm::edge_with(LgTerm::Var(l.clone()), LgTerm::Var(xs[k].clone())),
            ]),
        )),
    );
    let mut s = Srec::new(&lifted, t, k + 1);
    let body = s.top(t)?;
    let zs: Vec<String> = (0..m * (k + 1)).map(|i| pick(&format!("z{}", i + 1), &mut used)).collect();
    let kept: Vec<String> = zs.chunks(k + 1).flat_map(|c| c[..k].iter().cloned()).collect();
    Ok(LgTerm::app(LgTerm::lam(&zs, vars(&kept)), body))
}

/// Checks `e = λℓ. λ(x1,…,x_{k+extra}). if ℓ ≡ a then … else …` with its
/// type, and returns `k`.
fn table_width(e: &LgTerm, extra: usize) -> Result<usize, LgError> {
    let bad = |msg: &str| LgError::NonCanonicalClauseTable(msg.to_string());
    let LgTerm::Lam(ls, inner) = e else { return Err(bad("not a λ over a label")) };
    let [(l, LgType::L)] = &ls[..] else { return Err(bad("not a λ over a label")) };
    let LgTerm::Lam(xs, chain) = &**inner else { return Err(bad("no λ over the recursive results")) };
    if !xs.iter().all(|x| x.1 == LgType::G) {
        return Err(bad("results must be graphs"));
    }
    let mut cur = &**chain;
    while let Some((c, _, otherwise)) = as_ite(cur) {
        if !is_label_test(c, l) {
            return Err(bad("a condition other than a test of the label"));
        }
        cur = otherwise;
    }
    let k = xs.len().checked_sub(extra).filter(|k| *k > 0).ok_or_else(|| bad("too few binders"))?;
    let want = LgType::arrow(LgType::L, LgType::arrow(LgType::graphs(k + extra), LgType::graphs(k)));
    let ty = e.type_of()?;
    if ty != want {
        return Err(LgError::NonCanonicalClauseTable(format!("type {} instead of {}", ty, want)));
    }
    Ok(k)
}

fn as_ite(t: &LgTerm) -> Option<(&LgTerm, &LgTerm, &LgTerm)> {
    match t {
        LgTerm::App(f, a) if **f == LgTerm::Const(Const::If) => match &**a {
            LgTerm::Tuple(ts) if ts.len() == 3 => Some((&ts[0], &ts[1], &ts[2])),
            _ => None,
        },
        _ => None,
    }
}

fn is_label_test(c: &LgTerm, l: &str) -> bool {
    let LgTerm::App(f, a) = c else { return false };
    let LgTerm::Tuple(ts) = &**a else { return false };
    if **f != LgTerm::Const(Const::Eq) || ts.len() != 2 {
        return false;
    }
    let is_l = |t: &LgTerm| matches!(t, LgTerm::Var(x) if x == l);
    let is_c = |t: &LgTerm| matches!(t, LgTerm::Const(Const::Label(_)));
    (is_l(&ts[0]) && is_c(&ts[1])) || (is_c(&ts[0]) && is_l(&ts[1]))
}

struct Srec<'a> {
    e: &'a LgTerm,
    k: usize,
    used: BTreeSet<String>,
    /// Each variable in scope with its `k` copies.
    scope: Vec<(String, Vec<String>)>,
}

impl<'a> Srec<'a> {
    fn new(e: &'a LgTerm, t: &LgTerm, k: usize) -> Srec<'a> {
        let mut used = t.names();
        used.extend(e.names());
        Srec { e, k, used, scope: Vec::new() }
    }

    fn fresh(&mut self, base: &str) -> String {
        let n = fresh(base, |c| self.used.contains(c));
        self.used.insert(n.clone());
        n
    }

    fn bind(&mut self, xs: &[(String, LgType)]) -> Result<Vec<String>, LgError> {
        let mut out = Vec::new();
        for (x, ty) in xs {
            if *ty != LgType::G {
                return Err(LgError::NotInImage(format!("binder {} of type {}", x, ty)));
            }
            let copies: Vec<String> = (1..=self.k).map(|j| self.fresh(&format!("{}_{}", x, j))).collect();
            out.extend(copies.iter().cloned());
            self.scope.push((x.clone(), copies));
        }
        Ok(out)
    }

    fn top(&mut self, t: &LgTerm) -> Result<LgTerm, LgError> {
        match t {
            LgTerm::Lam(ys, b) => {
                let names = self.bind(ys)?;
                let body = self.go(b)?;
                Ok(LgTerm::lam(&names, body))
            }
            _ => self.go(t),
        }
    }

    fn go(&mut self, t: &LgTerm) -> Result<LgTerm, LgError> {
        let k = self.k;
        let nii = || LgError::NotInImage(t.to_string());
        Ok(match t {
            LgTerm::Var(x) => {
                let (_, copies) = self.scope.iter().rev().find(|(y, _)| y == x).ok_or_else(nii)?;
                LgTerm::tuple(copies.iter().map(|c| LgTerm::Var(c.clone())).collect())
            }
            LgTerm::Tuple(ts) => LgTerm::Tuple(ts.iter().map(|u| self.go(u)).collect::<Result<_, _>>()?),
            LgTerm::Const(Const::Nil) => LgTerm::tuple(vec![LgTerm::nil(); k]),
            LgTerm::App(f, a) => match (&**f, &**a) {
                (LgTerm::Const(Const::Union), LgTerm::Tuple(ts)) if ts.len() == 2 => {
                    let (s, u) = (self.go(&ts[0])?, self.go(&ts[1])?);
                    if k == 1 {
                        LgTerm::union(s, u)
                    } else {
                        let ls: Vec<String> = (0..k).map(|_| self.fresh("u")).collect();
                        let rs: Vec<String> = (0..k).map(|_| self.fresh("v")).collect();
                        let zipped = (0..k)
                            .map(|j| LgTerm::union(LgTerm::Var(ls[j].clone()), LgTerm::Var(rs[j].clone())))
                            .collect();
                        let all: Vec<String> = ls.into_iter().chain(rs).collect();
                        LgTerm::app(LgTerm::lam(&all, LgTerm::Tuple(zipped)), LgTerm::Tuple(vec![s, u]))
                    }
                }
                (LgTerm::Const(Const::Edge), LgTerm::Tuple(ts)) if ts.len() == 2 => match &ts[0] {
                    LgTerm::Const(Const::Label(_)) => LgTerm::app(LgTerm::app(self.e.clone(), ts[0].clone()), self.go(&ts[1])?),
                    _ => return Err(nii()),
                },
                (LgTerm::Const(Const::Fix), LgTerm::Lam(xs, b)) => {
                    let n = self.scope.len();
                    let names = self.bind(xs)?;
                    let body = self.go(b);
                    self.scope.truncate(n);
                    LgTerm::fix(LgTerm::lam(&names, body?))
                }
                (LgTerm::Lam(xs, s), _) => {
                    let u = self.go(a)?;
                    let n = self.scope.len();
                    let names = self.bind(xs)?;
                    let body = self.go(s);
                    self.scope.truncate(n);
                    LgTerm::app(LgTerm::lam(&names, body?), u)
                }
                _ => return Err(nii()),
            },
            _ => return Err(nii()),
        })
    }
}

/// Capture-avoiding simultaneous substitution of free variables.
pub fn substitute(t: &LgTerm, map: &BTreeMap<String, LgTerm>) -> LgTerm {
    match t {
        LgTerm::Var(x) => map.get(x).cloned().unwrap_or_else(|| t.clone()),
        LgTerm::Lam(bs, b) => {
            let mut map = map.clone();
            for (x, _) in bs {
                map.remove(x);
            }
            let incoming: BTreeSet<String> = map.values().flat_map(|v| v.free_vars()).collect();
            let mut avoid = incoming.clone();
            avoid.extend(b.names());
            avoid.extend(bs.iter().map(|b| b.0.clone()));
            let mut out = Vec::new();
            for (x, ty) in bs {
                if incoming.contains(x) {
                    let y = fresh(x, |c| avoid.contains(c));
                    avoid.insert(y.clone());
                    map.insert(x.clone(), LgTerm::Var(y.clone()));
                    out.push((y, ty.clone()));
                } else {
                    out.push((x.clone(), ty.clone()));
                }
            }
            LgTerm::Lam(out, Box::new(substitute(b, &map)))
        }
        LgTerm::App(f, a) => LgTerm::app(substitute(f, map), substitute(a, map)),
        LgTerm::Tuple(ts) => LgTerm::Tuple(ts.iter().map(|u| substitute(u, map)).collect()),
        LgTerm::Const(_) => t.clone(),
    }
}

/// One `(beta)` step at the root of the body (under the outer λ, if any).
/// A multi-binder λ takes a literal tuple of matching length or projections
/// of its argument.
pub fn beta_root(t: &LgTerm) -> Option<LgTerm> {
    match t {
        LgTerm::Lam(ys, b) => beta(b).map(|b| LgTerm::Lam(ys.clone(), Box::new(b))),
        _ => beta(t),
    }
}

fn beta(t: &LgTerm) -> Option<LgTerm> {
    let LgTerm::App(f, a) = t else { return None };
    let LgTerm::Lam(bs, b) = &**f else { return None };
    let mut map = BTreeMap::new();
    match (&bs[..], &**a) {
        ([(x, _)], _) => {
            map.insert(x.clone(), (**a).clone());
        }
        (_, LgTerm::Tuple(ts)) if ts.len() == bs.len() => {
            for ((x, _), u) in bs.iter().zip(ts) {
                map.insert(x.clone(), u.clone());
            }
        }
        _ if bs.iter().all(|b| b.1.width() == 1) => {
            for (i, (x, _)) in bs.iter().enumerate() {
                map.insert(x.clone(), LgTerm::proj(i + 1, (**a).clone()));
            }
        }
        _ => return None,
    }
    Some(substitute(b, &map))
}
