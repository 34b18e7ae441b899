//! Rewriting induction for logically constrained simply-typed term rewriting
//! systems, with recursion templates as a lemma generation method.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; process management, files, and the network live
//! in the `lcri` companion crate.

#![no_std]

extern crate alloc;

pub mod kernel;
pub mod order;
pub mod parse;
pub mod print;
pub mod program;
pub mod rewrite;
pub mod templates;
pub mod term;
pub mod theory;
pub mod trace;

pub use kernel::{ProofState, ProofStep, Rejection};
pub use program::{Program, Rule};
pub use term::{Sort, Substitution, Symbol, Term, TheoryOp, Type, Var};
pub use theory::{Solver, Verdict};
