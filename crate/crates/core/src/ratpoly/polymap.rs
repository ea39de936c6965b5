use std::fmt;

use super::{Polynomial, Rational};
use crate::error::{Error, Result};

/// Matrix whose entries are polynomials, stored row-major.
pub type PolyMatrix = Vec<Vec<Polynomial>>;

/// A polynomial self-map of `Q^n`, one component polynomial per output coordinate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyMap {
    nvars: usize,
    components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::invalid("polynomial map needs at least one component"));
        };
        let nvars = first.nvars();
        for c in &components {
            Error::check_dim(nvars, c.nvars())?;
        }
        Ok(PolyMap { nvars, components })
    }

    pub fn identity(n: usize) -> Self {
        PolyMap { nvars: n, components: (0..n).map(|i| Polynomial::var(n, i).unwrap()).collect() }
    }

    /// `z ↦ M z` for a square rational matrix given row-major.
    pub fn linear(matrix: &[Vec<Rational>]) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        for row in matrix {
            Error::check_dim(n, row.len())?;
        }
        Ok(PolyMap { nvars: n, components: matrix.iter().map(|row| Polynomial::linear(row)).collect() })
    }

    /// `z ↦ z + v`.
    pub fn translation(v: &[Rational]) -> Self {
        let n = v.len();
        PolyMap {
            nvars: n,
            components: v
                .iter()
                .enumerate()
                .map(|(i, c)| &Polynomial::var(n, i).unwrap() + &Polynomial::constant(n, c.clone()))
                .collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of output components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Polynomial> {
        self.components
    }

    pub fn degree(&self) -> i64 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(-1)
    }

    pub fn eval(&self, z: &[Rational]) -> Result<Vec<Rational>> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    pub fn eval_f64(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_f64(z)).collect()
    }

    /// `self ∘ inner`: the map `z ↦ self(inner(z))`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        Error::check_dim(self.nvars, inner.len())?;
        let components = self.components.iter().map(|c| c.substitute(inner)).collect::<Result<Vec<_>>>()?;
        Ok(PolyMap { nvars: inner.nvars, components })
    }

    /// Entry `(i, j)` is `∂g_i/∂x_j`.
    pub fn jacobian(&self) -> PolyMatrix {
        self.components.iter().map(|c| (0..self.nvars).map(|j| c.partial_derivative(j).unwrap()).collect()).collect()
    }

    /// True when every component is a linear form: degree at most one and no
    /// constant term.
    pub fn is_linear(&self) -> bool {
        self.components.iter().all(|c| c.degree() <= 1 && c.constant_term().is_zero())
    }

    /// Coefficients of the degree-one part, row-major. This is the Jacobian
    /// at the origin.
    pub fn linear_part(&self) -> Vec<Vec<Rational>> {
        self.components
            .iter()
            .map(|c| {
                (0..self.nvars)
                    .map(|j| {
                        let mut e = vec![0; self.nvars];
                        e[j] = 1;
                        c.coefficient(&e)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn neg(&self) -> PolyMap {
        PolyMap { nvars: self.nvars, components: self.components.iter().map(|c| -c).collect() }
    }
}

/// Evaluates a polynomial matrix at a rational point.
pub fn eval_matrix(m: &PolyMatrix, z: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    m.iter().map(|row| row.iter().map(|p| p.eval(z)).collect()).collect()
}

/// Product of two polynomial matrices.
pub fn matrix_product(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix> {
    let inner = b.len();
    let Some(nvars) = a.first().and_then(|r| r.first()).map(Polynomial::nvars) else {
        return Ok(Vec::new());
    };
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            Error::check_dim(inner, row.len())?;
            (0..cols)
                .map(|j| {
                    let mut acc = Polynomial::zero(nvars);
                    for (k, aik) in row.iter().enumerate() {
                        acc = acc.try_add(&aik.try_mul(&b[k][j])?)?;
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMap{self}")
    }
}

impl serde::Serialize for PolyMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.components.iter())
    }
}
