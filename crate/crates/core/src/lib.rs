//! Quantum Teichmüller space of a punctured surface as a computable object.
//!
//! The crate is organised bottom-up:
//!
//! - [`surface`]: indexed ideal triangulations, flips, reindexings, spike
//!   counts, the skew form `sigma` and flip-graph exploration.
//! - [`qtorus`]: exact arithmetic in the Chekhov-Fock quantum torus.
//! - [`ncrational`]: noncommutative rational expressions, a rewriting
//!   normalizer and a randomized root-of-unity evaluation oracle.
//! - [`coordchange`]: quantum coordinate-change homomorphisms and the
//!   groupoid / path-independence checks.
//! - [`pentagon`]: the order-5 recursion in the two-generator torus and the
//!   word-level pentagon verification.
//! - [`central`]: the central elements `P_j`, `H` and the cusped ideal.
//! - [`classical`]: the `q = 1` shear-coordinate theory.
//! - [`cli`]: the `qteich` command-line front end.

pub mod central;
pub mod classical;
pub mod cli;
pub mod coordchange;
pub mod ncrational;
pub mod pentagon;
pub mod qtorus;
pub mod surface;
