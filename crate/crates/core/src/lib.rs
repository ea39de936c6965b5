//! Exact verification of Liouville structures on the standard symplectic
//! vector space.
//!
//! A Liouville structure here is a one-form `θ^a = θ⁰ + dψ^a` on `Q^{2m}`,
//! where `θ⁰_z(v) = ½Ω(z, v)` is the canonical potential and `ψ^a` is the
//! monomial `ε/(2d)·Ω(a, z)^d`. The crate builds these forms, their Liouville
//! fields and flows, and the automorphisms and isomorphisms between them as
//! explicit polynomial maps, and checks every pullback identity with exact
//! rational polynomial arithmetic.
//!
//! Modules, bottom-up:
//!
//! - [`ratpoly`]: rationals, polynomials, polynomial maps.
//! - [`symplectic`]: `Ω`, membership in `Sp`, exact samplers.
//! - [`liouville`]: forms, fields, pullbacks, flows.
//! - [`autgroup`]: automorphisms, isomorphisms, decomposition.
//! - [`suite`]: the batch verifier and flow traces behind the CLI.

pub mod autgroup;
pub mod error;
pub mod liouville;
pub mod ratpoly;
pub mod suite;
pub mod symplectic;

pub use error::{Error, Result};
