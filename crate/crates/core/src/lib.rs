//! Relative-state simulation of EPR measurements.
//!
//! Measurement is modelled as branching of observer memory: a measuring
//! interaction maps `|a_i>|[ ]>` to `|a_i>|[a_i]>` and is extended linearly to
//! superpositions. Running two local measurements on an entangled pair yields
//! a superposition of correlated record pairs whose amplitudes form the
//! K-matrix `K[i][j'] = sum_j C[i][j] <b_j'|a_j>`; the squared moduli are the
//! joint outcome probabilities each pair of observers infers from its records.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: dense complex kets and matrices, inner and tensor products,
//!   seeded random unitaries.
//! - [`relative_state`]: branched states with per-observer memory registers and
//!   the local `measure` operation.
//! - [`epr`]: coefficient matrices, observable bases, the K-matrix, joint
//!   distributions, marginals and the no-signaling check.
//! - [`spin`]: the spin-1/2 singlet and the single-angle rotated analyzer basis.
//! - [`statistics`]: N-pair branch count distributions and deviant branch weight.
//! - [`bell`]: CHSH score against the brute-forced local deterministic bound.
//! - [`cli`]: the `epr` command-line surface (JSON / CSV output).
//!
//! Index convention everywhere: row-major matrices, and for a product ket
//! `u ⊗ v` the pair `(i, j)` lives at `i * v.dim() + j`.

pub mod bell;
pub mod cli;
pub mod epr;
mod error;
pub mod linalg;
pub mod relative_state;
pub mod spin;
pub mod statistics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
