use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{prec, srec, RecDef, RecursionError};
use crate::axioms::{random_term_with, Failure, Report};
use crate::graph::terms_bisimilar;
use crate::syntax::{Context, Label};
use crate::typing::TypedTerm;

/// Checks `h ∘ srec(e) = srec(d)`: first the hypothesis `h(e′_ℓ) ~ d′_ℓ` on
/// every pattern label and one label outside all patterns, then the law
/// itself on `trials` random closed terms.
pub fn fusion_check(
    e: &RecDef,
    d: &RecDef,
    h: &RecDef,
    trials: usize,
    size: usize,
    seed: u64,
) -> Result<Report, RecursionError> {
    for l in probe_labels(&[e, d, h]) {
        let lhs = srec(h, &e.body(&l)?)?;
        if !terms_bisimilar(&lhs, &d.body(&l)?)? {
            return Err(RecursionError::HypothesisFailed(l));
        }
    }
    pointwise(&format!("{} ∘ {} = {}", h.name, e.name, d.name), trials, size, seed, |t| {
        Ok((srec(h, &srec(e, t)?)?, srec(d, t)?))
    })
}

/// Checks `prec(d) ∘ prec(e) = prec(g)` on `trials` random closed terms.
pub fn prec_fusion_check(
    e: &RecDef,
    d: &RecDef,
    g: &RecDef,
    trials: usize,
    size: usize,
    seed: u64,
) -> Result<Report, RecursionError> {
    pointwise(&format!("{} ∘ {} = {}", d.name, e.name, g.name), trials, size, seed, |t| {
        Ok((prec(d, &prec(e, t)?)?, prec(g, t)?))
    })
}

fn probe_labels(defs: &[&RecDef]) -> BTreeSet<Label> {
    let mut out: BTreeSet<Label> = defs.iter().flat_map(|d| d.labels()).collect();
    let fresh = (0..).map(|i| Label::new(&format!("l{}", i))).find(|l| !out.contains(l)).expect("unbounded");
    out.insert(fresh);
    out
}

fn pointwise<F>(name: &str, trials: usize, size: usize, seed: u64, mut sides: F) -> Result<Report, RecursionError>
where
    F: FnMut(&TypedTerm) -> Result<(TypedTerm, TypedTerm), RecursionError>,
{
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let t = random_term_with(&mut rng, &Context::empty(), &Context::unit(), size.max(1)).expect("size ≥ 1");
        let (lhs, rhs) = sides(&t)?;
        if !terms_bisimilar(&lhs, &rhs)? {
            failures.push(Failure {
                trial,
                assignment: vec![("t".to_string(), t.to_string())],
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }
    Ok(Report { schema: name.to_string(), trials, failures })
}
