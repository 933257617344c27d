//! Seeded generator of well-typed terms.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AxiomError;
use crate::syntax::{Context, Label, Marker};
use crate::typing::{rename_target, Term, TypedTerm};

/// Labels drawn by the generator.
pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

const DEF_NAMES: [&str; 3] = ["x", "y", "z"];

/// Smallest term size with `k` target markers.
pub fn min_size(k: usize) -> usize {
    if k <= 1 {
        1
    } else {
        k + 1
    }
}

/// A random term `source ⊢ t : target` of at most `size` nodes, counting a
/// union as one node and not counting the `:=` wrappers of the final target
/// renaming. Equal arguments give equal terms.
pub fn random_term(source: &Context, target: &Context, size: usize, seed: u64) -> Result<TypedTerm, AxiomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_term_with(&mut rng, source, target, size)
}

/// As [`random_term`], drawing from a caller-owned generator.
pub fn random_term_with<R: Rng>(
    rng: &mut R,
    source: &Context,
    target: &Context,
    size: usize,
) -> Result<TypedTerm, AxiomError> {
    let k = target.len();
    if size < min_size(k) {
        return Err(AxiomError::Unsatisfiable { size, arity: k });
    }
    let budget = rng.gen_range(min_size(k)..=size);
    let term = Gen { rng }.term(source.len(), k, budget);
    let t = TypedTerm::new(term, source.clone())?;
    Ok(rename_target(&t, target)?)
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
}

#[derive(Clone, Copy)]
enum Shape {
    Leaf,
    Label,
    Def,
    Union,
    Compose,
    Cycle,
    Pair,
}

impl<R: Rng> Gen<'_, R> {
    fn label(&mut self) -> Label {
        Label::new(ALPHABET[self.rng.gen_range(0..ALPHABET.len())])
    }

    /// A term over `n` source markers with `k` target markers and at most
    /// `b` nodes; `b >= min_size(k)`.
    fn term(&mut self, n: usize, k: usize, b: usize) -> Term {
        debug_assert!(b >= min_size(k));
        let mut shapes: Vec<Shape> = Vec::new();
        match k {
            0 => {
                shapes.push(Shape::Leaf);
                if b >= 3 {
                    shapes.push(Shape::Compose);
                }
                if b >= 2 {
                    shapes.push(Shape::Cycle);
                }
            }
            1 => {
                shapes.push(Shape::Leaf);
                if b >= 2 {
                    shapes.extend([Shape::Label, Shape::Label, Shape::Cycle, Shape::Def]);
                }
                if b >= 3 {
                    shapes.push(Shape::Compose);
                }
                if b >= 4 {
                    shapes.extend([Shape::Union, Shape::Union]);
                }
            }
            _ => {
                shapes.push(Shape::Pair);
                if b > min_size(k) {
                    shapes.push(Shape::Cycle);
                }
                if b >= min_size(k) + 2 {
                    shapes.push(Shape::Compose);
                }
            }
        }
        let shape = *shapes.choose(self.rng).expect("some shape fits");
        match shape {
            Shape::Leaf => self.leaf(n, k),
            Shape::Label => {
                let l = self.label();
                Term::Label(l, alloc::boxed::Box::new(self.term(n, 1, b - 1)))
            }
            Shape::Def => {
                let x = Marker::new(DEF_NAMES[self.rng.gen_range(0..DEF_NAMES.len())]);
                Term::def(x, self.term(n, 1, b - 1))
            }
            Shape::Union => {
                let (b1, b2) = self.split(b - 2, 1, 1);
                Term::union(self.term(n, 1, b1), self.term(n, 1, b2))
            }
            Shape::Cycle => Term::cycle(self.term(n + k, k, b - 1)),
            Shape::Compose => {
                let room = b - 1 - min_size(k);
                let j = self.rng.gen_range(0..=if room >= 3 { 2 } else { 1 });
                let (b1, b2) = self.split(b - 1, k, j);
                let t = self.term(n, j, b2);
                let s = self.term(j, k, b1);
                Term::compose(s, t)
            }
            Shape::Pair => {
                // split k into at least two positive parts
                let mut parts = Vec::new();
                let mut left = k;
                while left > 0 {
                    let p = if parts.is_empty() { self.rng.gen_range(1..left) } else { self.rng.gen_range(1..=left) };
                    parts.push(p);
                    left -= p;
                }
                if parts.iter().map(|p| min_size(*p)).sum::<usize>() > b - 1 {
                    parts = alloc::vec![1; k];
                }
                let mut spare = b - 1 - parts.iter().map(|p| min_size(*p)).sum::<usize>();
                let mut ts = Vec::with_capacity(parts.len());
                for (i, p) in parts.iter().enumerate() {
                    let extra = if i + 1 == parts.len() { spare } else { self.rng.gen_range(0..=spare) };
                    spare -= extra;
                    ts.push(self.term(n, *p, min_size(*p) + extra));
                }
                Term::Pair(ts)
            }
        }
    }

    fn leaf(&mut self, n: usize, k: usize) -> Term {
        if k == 0 {
            return Term::Emp;
        }
        let mut options = alloc::vec![Term::Nil];
        options.extend((0..n).map(Term::Var));
        options.extend((0..n).map(Term::Var));
        if n == 2 {
            options.push(Term::Man);
        }
        options.swap_remove(self.rng.gen_range(0..options.len()))
    }

    /// Splits `total` between two parts of arities `k1` and `k2`.
    fn split(&mut self, total: usize, k1: usize, k2: usize) -> (usize, usize) {
        let (m1, m2) = (min_size(k1), min_size(k2));
        let spare = total - m1 - m2;
        let e = self.rng.gen_range(0..=spare);
        (m1 + e, m2 + spare - e)
    }
}
