//! Finite laboratory for the combinatorics of pigeonhole forcing.
//!
//! Everything here is exact and exhaustively checkable at small scale:
//! the poset of partial injective pigeon-to-hole maps, decision trees whose
//! paths are such maps, a forcing relation for bounded relational formulas,
//! exact matching counts with extremal-family bounds, and weak-pigeonhole
//! arrays together with the size inequalities that rule them out.
//!
//! The crate is `no_std` (with `alloc`); IO, CLI and file formats live in
//! the companion `phplab-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;
#[cfg(all(feature = "std", not(test)))]
extern crate std;

pub mod combin;
pub mod compile;
pub mod corpus;
pub mod forcing;
pub mod formula;
pub mod matching;
pub mod poset;
pub mod tree;
pub mod warray;

pub use poset::{Condition, Scale};
pub use tree::{LeafFamily, PhpTree};
