//! UnCAL terms and their graph model.
//!
//! The crate is `no_std` with `alloc`. Modules build on each other bottom-up:
//! [`syntax`] parses and prints, [`typing`] checks judgments `Y ⊢ t : X` and
//! provides substitution, [`graph`] interprets terms as rooted ε-graphs and
//! decides extended bisimulation, [`rewrite`] normalizes, [`axioms`] checks
//! equation schemas against the graph model, [`recursion`] runs structural and
//! primitive recursion, and [`lambdag`] hosts the lazy λG calculus.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod axioms;
pub mod graph;
pub mod lambdag;
pub mod recursion;
pub mod rewrite;
pub mod syntax;
pub mod typing;

mod error;

pub use error::Error;
