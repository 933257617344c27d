//! Equation schemas of the axiomatisation and its derived theory, a random
//! term generator, and a soundness harness over the graph model.

mod gen;
mod schemas;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{terms_bisimilar, GraphError};
use crate::syntax::{Context, Marker};
use crate::typing::{abbrev, rename_target, TypeError, TypedTerm};

pub use gen::{min_size, random_term, random_term_with, ALPHABET};
pub use schemas::{axioms, derived, mutants, schema};

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum AxiomError {
    #[error("no term of arity {arity} fits in size {size}")]
    Unsatisfiable { size: usize, arity: usize },
    #[error("slot `{slot}` of {schema} expects {expected}")]
    SlotJudgmentMismatch { schema: String, slot: String, expected: String },
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `source ⊢ lhs = rhs : target`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Equation {
    pub source: Context,
    pub lhs: TypedTerm,
    pub rhs: TypedTerm,
    pub target: Context,
}

impl Equation {
    /// Puts both sides under the given contexts, matching markers by position.
    pub fn new(source: Context, target: Context, lhs: TypedTerm, rhs: TypedTerm) -> Result<Equation, AxiomError> {
        let fit = |t: TypedTerm| -> Result<TypedTerm, AxiomError> {
            let t = t.with_source(source.clone())?;
            Ok(rename_target(&t, &target)?)
        };
        let (lhs, rhs) = (fit(lhs)?, fit(rhs)?);
        Ok(Equation { source, lhs, rhs, target })
    }

    /// Whether both sides denote bisimilar graphs.
    pub fn holds(&self) -> Result<bool, AxiomError> {
        Ok(terms_bisimilar(&self.lhs, &self.rhs)?)
    }

    /// `lhs @ ⟨s1, …, sn⟩ = rhs @ ⟨s1, …, sn⟩` for `si : z ⊢ &`.
    pub fn close(&self, z: &Context, ss: &[TypedTerm]) -> Result<Equation, AxiomError> {
        let tuple = abbrev::pair(ss, z)?;
        let lhs = abbrev::compose(&self.lhs, &tuple)?;
        let rhs = abbrev::compose(&self.rhs, &tuple)?;
        Equation::new(z.clone(), self.target.clone(), lhs, rhs)
    }
}

impl core::fmt::Display for Equation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} ⊢ {} = {} : {}", self.source, self.lhs, self.rhs, self.target)
    }
}

/// The index maps `ρ_1 … ρ_m` of a (CI) instance; `rhos[i][j]` is the
/// 0-based image of `j` under `ρ_{i+1}`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CiInstance {
    pub rhos: Vec<Vec<usize>>,
}

/// Values for a schema's metavariables.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    pub contexts: BTreeMap<String, Context>,
    pub terms: BTreeMap<String, TypedTerm>,
    pub ci: Option<CiInstance>,
}

impl Assignment {
    pub fn context(&self, name: &str) -> Context {
        self.contexts.get(name).cloned().unwrap_or_else(Context::empty)
    }

    pub fn term(&self, name: &str) -> &TypedTerm {
        &self.terms[name]
    }

    /// `name = value` lines in a fixed order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self.contexts.iter().map(|(k, c)| (k.clone(), c.to_string())).collect();
        for (k, t) in &self.terms {
            out.push((k.clone(), format!("{} ⊢ {} : {}", t.source(), t, t.target())));
        }
        if let Some(ci) = &self.ci {
            for (i, r) in ci.rhos.iter().enumerate() {
                let idx: Vec<String> = r.iter().map(|j| format!("{}", j + 1)).collect();
                out.push((format!("ρ{}", i + 1), format!("({})", idx.join(", "))));
            }
        }
        out
    }
}

/// A metavariable `name : source ⊢ target`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Slot {
    pub name: String,
    pub source: Context,
    pub target: Context,
}

/// An equation schema with its slots and a builder.
#[derive(Clone, Copy)]
pub struct AxiomSchema {
    pub name: &'static str,
    /// Part of the derived theory rather than the axioms.
    pub derived: bool,
    /// Context metavariables with their length ranges.
    contexts: &'static [(&'static str, usize, usize)],
    slots: fn(&Assignment) -> Vec<Slot>,
    build: fn(&Assignment) -> Result<Equation, AxiomError>,
}

impl core::fmt::Debug for AxiomSchema {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "AxiomSchema({})", self.name)
    }
}

impl AxiomSchema {
    /// Slots required under the contexts of `a`.
    pub fn slots(&self, a: &Assignment) -> Vec<Slot> {
        (self.slots)(a)
    }

    /// Draws contexts, slot fillers of at most `max_size` nodes and, for
    /// (CI), the index maps.
    pub fn sample<R: Rng>(&self, rng: &mut R, max_size: usize) -> Assignment {
        let mut a = Assignment::default();
        for (name, lo, hi) in self.contexts {
            let n = rng.gen_range(*lo..=*hi);
            a.contexts.insert(name.to_string(), context_named(name, n, rng.gen_bool(0.3)));
        }
        if self.name == "CI" {
            let m = a.context("Y").len();
            let rhos = (0..m).map(|_| (0..m).map(|_| rng.gen_range(0..m)).collect()).collect();
            a.ci = Some(CiInstance { rhos });
        }
        for slot in self.slots(&a) {
            let size = max_size.max(min_size(slot.target.len()));
            let t = random_term_with(rng, &slot.source, &slot.target, size).expect("size covers the arity");
            a.terms.insert(slot.name, t);
        }
        a
    }
}

/// `⟨y1, …, yn⟩` for context metavariable `Y`; a single marker may be `&`.
fn context_named(meta: &str, n: usize, default_if_single: bool) -> Context {
    if n == 1 && default_if_single {
        return Context::unit();
    }
    let stem = meta.to_lowercase();
    Context::new((1..=n).map(|i| Marker::new(&format!("{}{}", stem, i))).collect()).expect("distinct")
}

/// Checks the slot judgments and builds the equation.
pub fn instantiate(schema: &AxiomSchema, a: &Assignment) -> Result<Equation, AxiomError> {
    let mut fitted = a.clone();
    for slot in schema.slots(a) {
        let mismatch = || AxiomError::SlotJudgmentMismatch {
            schema: schema.name.to_string(),
            slot: slot.name.clone(),
            expected: format!("{} ⊢ _ : {}", slot.source, slot.target),
        };
        let t = a.terms.get(&slot.name).ok_or_else(mismatch)?;
        if t.source().len() != slot.source.len() || t.target().len() != slot.target.len() {
            return Err(mismatch());
        }
        let t = rename_target(&t.with_source(slot.source.clone())?, &slot.target)?;
        fitted.terms.insert(slot.name.clone(), t);
    }
    if schema.name == "CI" {
        let m = a.context("Y").len();
        let ok = matches!(&a.ci, Some(ci) if ci.rhos.len() == m && ci.rhos.iter().all(|r| r.len() == m && r.iter().all(|j| *j < m)));
        if !ok || m == 0 {
            return Err(AxiomError::SlotJudgmentMismatch {
                schema: "CI".into(),
                slot: "ρ".into(),
                expected: format!("{} maps from {{1..{}}} to itself", m, m),
            });
        }
    }
    (schema.build)(&fitted)
}

/// One failed trial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Failure {
    pub trial: usize,
    pub assignment: Vec<(String, String)>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Report {
    pub schema: String,
    pub trials: usize,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Instantiates `schema` `trials` times and compares both sides in the graph
/// model, bare and after substituting random terms for the source markers.
pub fn check_soundness(schema: &AxiomSchema, trials: usize, max_size: usize, seed: u64) -> Report {
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let a = schema.sample(&mut rng, max_size);
        let mut fail = |lhs: String, rhs: String, extra: Option<(String, String)>| {
            let mut assignment = a.describe();
            assignment.extend(extra);
            failures.push(Failure { trial, assignment, lhs, rhs });
        };
        let eq = match instantiate(schema, &a) {
            Ok(eq) => eq,
            Err(e) => {
                fail(format!("error: {}", e), String::new(), None);
                continue;
            }
        };
        if !eq.holds().unwrap_or(false) {
            fail(eq.lhs.to_string(), eq.rhs.to_string(), None);
            continue;
        }
        let z = context_named("Z", rng.gen_range(0..=2), false);
        let ss: Vec<TypedTerm> = (0..eq.source.len())
            .map(|_| random_term_with(&mut rng, &z, &Context::unit(), max_size.max(1)).expect("size ≥ 1"))
            .collect();
        let closed = eq.close(&z, &ss);
        match closed {
            Ok(c) if c.holds().unwrap_or(false) => {}
            Ok(c) => {
                let sigma: Vec<String> = ss.iter().map(|s| s.to_string()).collect();
                fail(c.lhs.to_string(), c.rhs.to_string(), Some(("σ".into(), format!("({})", sigma.join(", ")))));
            }
            Err(e) => fail(format!("error: {}", e), String::new(), None),
        }
    }
    Report { schema: schema.name.to_string(), trials, failures }
}

#[cfg(test)]
mod tests;
