//! Exact rational arithmetic and sparse multivariate polynomials.

mod kernel;
mod polymap;
mod polynomial;
mod rational;

pub use polymap::{eval_matrix, matrix_product, PolyMap, PolyMatrix};
pub use polynomial::{Monomial, Polynomial};
pub use rational::Rational;
