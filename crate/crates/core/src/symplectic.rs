//! The standard symplectic space `(Q^{2m}, Ω)` and exact samplers for `Sp`.
//!
//! Coordinates are ordered `z = (p₁, …, p_m, q₁, …, q_m)` and
//!
//! ```text
//! Ω(x, y) = Σ_i (x_{p_i} y_{q_i} − x_{q_i} y_{p_i})
//! ```
//!
//! With this convention `θ⁰ = ½ Σ (p_i dq_i − q_i dp_i)` satisfies
//! `θ⁰_z(v) = ½Ω(z, v)` and `dθ⁰ = Σ dp_i ∧ dq_i`, whose matrix is that of `Ω`.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratpoly::{PolyMap, Polynomial, Rational};

/// A sign `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_rational(self) -> Rational {
        match self {
            Sign::Plus => Rational::one(),
            Sign::Minus => Rational::integer(-1),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("not a sign: {other:?}"))),
        }
    }
}

/// `R^{2m}` with the standard symplectic form, restricted to rational points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SymplecticSpace {
    m: usize,
}

impl SymplecticSpace {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("half-dimension m must be positive"));
        }
        Ok(SymplecticSpace { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    /// Index of the coordinate paired with `i` by `Ω`, and the sign of that pairing.
    fn partner(&self, i: usize) -> (usize, i64) {
        if i < self.m {
            (i + self.m, 1)
        } else {
            (i - self.m, -1)
        }
    }

    /// `J` with `Ω(x, y) = xᵀ J y`.
    pub fn omega_matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.dim();
        let mut j = vec![vec![Rational::zero(); n]; n];
        for (i, row) in j.iter_mut().enumerate() {
            let (k, s) = self.partner(i);
            row[k] = Rational::integer(s);
        }
        j
    }

    pub fn omega_matrix_f64(&self) -> Vec<Vec<f64>> {
        self.omega_matrix().iter().map(|r| r.iter().map(Rational::to_f64).collect()).collect()
    }

    pub fn check(&self, v: &Vector) -> Result<()> {
        Error::check_dim(self.dim(), v.len())
    }

    pub fn omega(&self, x: &Vector, y: &Vector) -> Result<Rational> {
        self.check(x)?;
        self.check(y)?;
        let mut acc = Rational::zero();
        for i in 0..self.m {
            let j = i + self.m;
            acc += &(&(&x[i] * &y[j]) - &(&x[j] * &y[i]));
        }
        Ok(acc)
    }

    pub fn omega_f64(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.m).map(|i| x[i] * y[i + self.m] - x[i + self.m] * y[i]).sum()
    }

    /// The linear polynomial `z ↦ Ω(a, z)`.
    pub fn omega_form(&self, a: &Vector) -> Result<Polynomial> {
        self.check(a)?;
        let coeffs: Vec<Rational> = (0..self.dim())
            .map(|i| {
                // Ω(a, e_i) = Σ_k a_k J[k][i]
                let (k, s) = self.partner(i);
                // J[k][i] = -s because J is antisymmetric
                &a[k] * &Rational::integer(-s)
            })
            .collect();
        Ok(Polynomial::linear(&coeffs))
    }

    pub fn basis(&self, i: usize) -> Vector {
        let mut v = vec![Rational::zero(); self.dim()];
        v[i] = Rational::one();
        Vector(v)
    }

    pub fn zero(&self) -> Vector {
        Vector(vec![Rational::zero(); self.dim()])
    }

    pub fn random_vector<R: Rng>(&self, rng: &mut R) -> Vector {
        Vector((0..self.dim()).map(|_| random_small_rational(rng)).collect())
    }

    pub fn random_nonzero_vector<R: Rng>(&self, rng: &mut R) -> Vector {
        loop {
            let v = self.random_vector(rng);
            if !v.is_zero() {
                return v;
            }
        }
    }
}

/// Rational with numerator in `[-9, 9]` and denominator in `{1, 2, 3}`.
pub fn random_small_rational<R: Rng>(rng: &mut R) -> Rational {
    let num = rng.random_range(-9i64..=9);
    let den = rng.random_range(1i64..=3);
    Rational::new(num, den).expect("nonzero denominator")
}

/// Deterministic generator for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point of `Q^{2m}`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Vector(Vec<Rational>);

impl Vector {
    pub fn new(entries: Vec<Rational>) -> Self {
        Vector(entries)
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Vector(entries.iter().map(|&n| Rational::integer(n)).collect())
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn scale(&self, s: &Rational) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Rational::to_f64).collect()
    }
}

impl Index<usize> for Vector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl<'a> Add<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector{self}")
    }
}

/// Comma-separated rational literals, e.g. `1,0,-1/2,0.5`.
impl FromStr for Vector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::Parse("empty vector literal".into()));
        }
        s.split(',').map(str::parse).collect::<Result<Vec<Rational>>>().map(Vector)
    }
}

/// A square rational matrix acting on column vectors.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LinearMap {
    matrix: Vec<Vec<Rational>>,
}

impl LinearMap {
    pub fn new(matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        for row in &matrix {
            Error::check_dim(n, row.len())?;
        }
        Ok(LinearMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap::scalar(n, Rational::one())
    }

    pub fn scalar(n: usize, s: Rational) -> Self {
        let mut matrix = vec![vec![Rational::zero(); n]; n];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = s.clone();
        }
        LinearMap { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim(), v.len())?;
        Ok(Vector(self.matrix.iter().map(|row| row.iter().zip(v.entries()).map(|(a, b)| a * b).sum()).collect()))
    }

    /// Matrix product `self · other`, i.e. the map `self ∘ other`.
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        Error::check_dim(self.dim(), other.dim())?;
        let n = self.dim();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &self.matrix[i][k] * &other.matrix[k][j]).sum()).collect())
            .collect();
        Ok(LinearMap { matrix })
    }

    pub fn transpose(&self) -> LinearMap {
        let n = self.dim();
        LinearMap { matrix: (0..n).map(|i| (0..n).map(|j| self.matrix[j][i].clone()).collect()).collect() }
    }

    pub fn to_polymap(&self) -> PolyMap {
        PolyMap::linear(&self.matrix).expect("square matrix")
    }

    pub fn from_polymap(g: &PolyMap) -> Option<LinearMap> {
        g.is_linear().then(|| LinearMap { matrix: g.linear_part() })
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.matrix.iter().map(|r| r.iter().map(Rational::to_f64).collect()).collect()
    }
}

impl fmt::Display for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.matrix.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearMap{self}")
    }
}

/// `Mᵀ J M = J`, checked exactly.
pub fn is_symplectic(space: &SymplecticSpace, m: &LinearMap) -> bool {
    if m.dim() != space.dim() {
        return false;
    }
    let j = LinearMap { matrix: space.omega_matrix() };
    let lhs = m.transpose().compose(&j).and_then(|tj| tj.compose(m)).expect("dimensions checked");
    lhs == j
}

/// The symplectic transvection `z ↦ z + c·Ω(u, z)·u`.
pub fn transvection(space: &SymplecticSpace, u: &Vector, c: &Rational) -> Result<LinearMap> {
    space.check(u)?;
    let n = space.dim();
    let row = space.omega_form(u)?;
    // coefficients of z ↦ Ω(u, z)
    let w: Vec<Rational> = (0..n)
        .map(|j| {
            let mut e = vec![0; n];
            e[j] = 1;
            row.coefficient(&e)
        })
        .collect();
    let mut matrix = LinearMap::identity(n).matrix;
    for i in 0..n {
        let cu = c * &u[i];
        if cu.is_zero() {
            continue;
        }
        for j in 0..n {
            matrix[i][j] += &(&cu * &w[j]);
        }
    }
    Ok(LinearMap { matrix })
}

/// Product of `count` random transvections drawn from `rng`.
pub fn random_symplectic_with<R: Rng>(space: &SymplecticSpace, rng: &mut R, count: usize) -> LinearMap {
    let mut acc = LinearMap::identity(space.dim());
    for _ in 0..count {
        let u = space.random_vector(rng);
        let c = random_small_rational(rng);
        let t = transvection(space, &u, &c).expect("dimension from space");
        acc = t.compose(&acc).expect("same dimension");
    }
    acc
}

/// Product of `count` transvections with small random rational data, fully
/// determined by `seed`.
pub fn random_symplectic(space: &SymplecticSpace, seed: u64, count: usize) -> LinearMap {
    random_symplectic_with(space, &mut seeded_rng(seed), count)
}

/// A symplectic map sending `a` to `b`, both nonzero.
///
/// One transvection suffices when `Ω(a, b) ≠ 0`; otherwise the map routes
/// through an intermediate vector `w` with `Ω(a, w) ≠ 0 ≠ Ω(w, b)`: the first
/// standard basis vector that works, or failing that the first sum
/// `e_i + e_j` (`i < j`) that works.
pub fn map_vector_to_vector(space: &SymplecticSpace, a: &Vector, b: &Vector) -> Result<LinearMap> {
    space.check(a)?;
    space.check(b)?;
    if a.is_zero() || b.is_zero() {
        return Err(Error::invalid("Sp acts transitively only on nonzero vectors"));
    }
    if a == b {
        return Ok(LinearMap::identity(space.dim()));
    }
    if let Some(t) = single_step(space, a, b)? {
        return Ok(t);
    }
    let w = intermediate(space, a, b)?;
    let first = single_step(space, a, &w)?.expect("Ω(a, w) ≠ 0");
    let second = single_step(space, &w, b)?.expect("Ω(w, b) ≠ 0");
    second.compose(&first)
}

/// The transvection with `u = b − a`, `c = 1/Ω(u, a)`, when `Ω(a, b) ≠ 0`.
fn single_step(space: &SymplecticSpace, a: &Vector, b: &Vector) -> Result<Option<LinearMap>> {
    if space.omega(a, b)?.is_zero() {
        return Ok(None);
    }
    let u = b - a;
    let c = space.omega(&u, a)?.recip()?;
    transvection(space, &u, &c).map(Some)
}

fn intermediate(space: &SymplecticSpace, a: &Vector, b: &Vector) -> Result<Vector> {
    let n = space.dim();
    let works = |w: &Vector| -> Result<bool> { Ok(!space.omega(a, w)?.is_zero() && !space.omega(w, b)?.is_zero()) };
    for i in 0..n {
        let e = space.basis(i);
        if works(&e)? {
            return Ok(e);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let w = &space.basis(i) + &space.basis(j);
            if works(&w)? {
                return Ok(w);
            }
        }
    }
    // Ω(a, ·) and Ω(·, b) are nonzero functionals, so some e_i + e_j works.
    Err(Error::InternalConsistency("no intermediate vector found".into()))
}

/// Random element of the stabilizer of `a` (sign `+`) or of the set map
/// `a ↦ −a` (sign `−`).
///
/// Each factor is a transvection along a direction `u` with `Ω(u, a) = 0`,
/// which fixes `a`; for sign `−` the product is followed by `−I`.
pub fn stabilizer_sample(
    space: &SymplecticSpace,
    a: &Vector,
    seed: u64,
    sign: Sign,
    count: usize,
) -> Result<LinearMap> {
    stabilizer_sample_with(space, a, &mut seeded_rng(seed), sign, count)
}

pub fn stabilizer_sample_with<R: Rng>(
    space: &SymplecticSpace,
    a: &Vector,
    rng: &mut R,
    sign: Sign,
    count: usize,
) -> Result<LinearMap> {
    space.check(a)?;
    if a.is_zero() {
        return Err(Error::invalid("stabilizer sampling needs a nonzero vector"));
    }
    // Some basis vector pairs nontrivially with a; use it to project directions.
    let pivot = (0..space.dim())
        .map(|i| space.basis(i))
        .find(|e| !space.omega(e, a).unwrap().is_zero())
        .expect("Ω is nondegenerate");
    let pivot_pair = space.omega(&pivot, a)?;
    let mut acc = LinearMap::identity(space.dim());
    for _ in 0..count {
        let v = space.random_vector(rng);
        let coef = &space.omega(&v, a)? / &pivot_pair;
        let u = &v - &pivot.scale(&coef);
        let c = random_small_rational(rng);
        acc = transvection(space, &u, &c)?.compose(&acc)?;
    }
    if sign == Sign::Minus {
        acc = LinearMap::scalar(space.dim(), Rational::integer(-1)).compose(&acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(m: usize) -> SymplecticSpace {
        SymplecticSpace::new(m).unwrap()
    }

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    fn q(n: i64) -> Rational {
        Rational::integer(n)
    }

    #[test]
    fn omega_examples() {
        assert_eq!(sp(1).omega(&v(&[1, 0]), &v(&[0, 1])).unwrap(), q(1));
        assert_eq!(sp(1).omega(&v(&[3, -2]), &v(&[3, -2])).unwrap(), q(0));
        assert_eq!(sp(2).omega(&v(&[1, 0, 0, 0]), &v(&[0, 1, 0, 0])).unwrap(), q(0));
        assert_eq!(sp(2).omega(&v(&[1, 0, 0, 0]), &v(&[0, 0, 1, 0])).unwrap(), q(1));
        assert!(sp(2).omega(&v(&[1, 0]), &v(&[0, 1])).is_err());
        assert!(SymplecticSpace::new(0).is_err());
    }

    #[test]
    fn omega_form_matches_omega() {
        let s = sp(2);
        let a = v(&[1, -2, 3, 5]);
        let z = v(&[7, 1, -1, 2]);
        let form = s.omega_form(&a).unwrap();
        assert_eq!(form.eval(z.entries()).unwrap(), s.omega(&a, &z).unwrap());
    }

    #[test]
    fn membership_examples() {
        let s = sp(1);
        assert!(is_symplectic(&s, &LinearMap::identity(2)));
        assert!(is_symplectic(&s, &LinearMap::scalar(2, q(-1))));
        let diag = LinearMap::new(vec![vec![q(2), q(0)], vec![q(0), q(1)]]).unwrap();
        assert!(!is_symplectic(&s, &diag));
        assert!(!is_symplectic(&sp(2), &LinearMap::identity(2)));
    }

    #[test]
    fn transvection_examples() {
        let s = sp(1);
        let t = transvection(&s, &v(&[1, 0]), &q(1)).unwrap();
        assert_eq!(t.apply(&v(&[0, 1])).unwrap(), v(&[1, 1]));
        assert_eq!(t.apply(&v(&[1, 0])).unwrap(), v(&[1, 0]));
        assert_eq!(transvection(&s, &v(&[3, 4]), &q(0)).unwrap(), LinearMap::identity(2));
        assert!(is_symplectic(&s, &t));
    }

    #[test]
    fn random_symplectic_examples() {
        let s = sp(2);
        assert_eq!(random_symplectic(&s, 5, 0), LinearMap::identity(4));
        for seed in 0..20 {
            assert!(is_symplectic(&s, &random_symplectic(&s, seed, 8)));
        }
        assert_eq!(random_symplectic(&s, 42, 8), random_symplectic(&s, 42, 8));
        assert_ne!(random_symplectic(&s, 42, 8), random_symplectic(&s, 43, 8));
    }

    #[test]
    fn vector_to_vector_examples() {
        let s = sp(1);
        let a = v(&[1, 0]);
        assert_eq!(map_vector_to_vector(&s, &a, &a).unwrap(), LinearMap::identity(2));

        let b = v(&[0, 1]);
        let g = map_vector_to_vector(&s, &a, &b).unwrap();
        assert_eq!(g, transvection(&s, &v(&[-1, 1]), &q(-1)).unwrap());
        assert_eq!(g.apply(&a).unwrap(), b);

        let b = v(&[2, 0]);
        let g = map_vector_to_vector(&s, &a, &b).unwrap();
        assert!(is_symplectic(&s, &g));
        assert_eq!(g.apply(&a).unwrap(), b);

        assert!(map_vector_to_vector(&s, &s.zero(), &b).is_err());
        assert!(map_vector_to_vector(&s, &a, &s.zero()).is_err());
    }

    #[test]
    fn vector_to_vector_needs_sum_intermediate() {
        // Ω(e_p1, ·) only sees q1, Ω(·, e_p2) only sees q2: no basis vector works.
        let s = sp(2);
        let a = v(&[1, 0, 0, 0]);
        let b = v(&[0, 1, 0, 0]);
        let g = map_vector_to_vector(&s, &a, &b).unwrap();
        assert!(is_symplectic(&s, &g));
        assert_eq!(g.apply(&a).unwrap(), b);
    }

    #[test]
    fn stabilizer_examples() {
        let s = sp(2);
        let a = v(&[1, 0, 0, 0]);
        assert_eq!(stabilizer_sample(&s, &a, 1, Sign::Plus, 0).unwrap(), LinearMap::identity(4));
        let neg = stabilizer_sample(&s, &a, 1, Sign::Minus, 0).unwrap();
        assert_eq!(neg, LinearMap::scalar(4, q(-1)));
        assert_eq!(neg.apply(&a).unwrap(), -&a);
        let g = stabilizer_sample(&s, &a, 7, Sign::Plus, 6).unwrap();
        assert!(is_symplectic(&s, &g));
        assert_eq!(g.apply(&a).unwrap(), a);
        assert_ne!(g, LinearMap::identity(4));
        assert!(stabilizer_sample(&s, &s.zero(), 7, Sign::Plus, 6).is_err());
    }

    #[test]
    fn parses_vectors_and_signs() {
        let x: Vector = "1, -1/2,0.25".parse().unwrap();
        assert_eq!(x, Vector::new(vec![q(1), Rational::new(-1, 2).unwrap(), Rational::new(1, 4).unwrap()]));
        assert!("".parse::<Vector>().is_err());
        assert!("1,,2".parse::<Vector>().is_err());
        assert_eq!("-".parse::<Sign>().unwrap(), Sign::Minus);
        assert!("x".parse::<Sign>().is_err());
    }

    fn det2(m: &LinearMap) -> Rational {
        let r = m.rows();
        &(&r[0][0] * &r[1][1]) - &(&r[0][1] * &r[1][0])
    }

    fn arb_small() -> impl Strategy<Value = Rational> {
        (-9i64..=9, 1i64..=3).prop_map(|(n, d)| Rational::new(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn samplers_are_symplectic(m in 1usize..=3, seed in any::<u64>(), count in 0usize..10) {
            let s = sp(m);
            let g = random_symplectic(&s, seed, count);
            prop_assert!(is_symplectic(&s, &g));
            let mut rng = seeded_rng(seed ^ 0x5eed);
            let x = s.random_vector(&mut rng);
            let y = s.random_vector(&mut rng);
            let lhs = s.omega(&g.apply(&x).unwrap(), &g.apply(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, s.omega(&x, &y).unwrap());
        }

        #[test]
        fn transitivity_witness(m in 1usize..=3, seed in any::<u64>()) {
            let s = sp(m);
            let mut rng = seeded_rng(seed);
            let a = s.random_nonzero_vector(&mut rng);
            let b = s.random_nonzero_vector(&mut rng);
            let g = map_vector_to_vector(&s, &a, &b).unwrap();
            prop_assert!(is_symplectic(&s, &g));
            prop_assert_eq!(g.apply(&a).unwrap(), b);
        }

        #[test]
        fn stabilizer_fixes_a(m in 1usize..=3, seed in any::<u64>(), count in 0usize..8, minus in any::<bool>()) {
            let s = sp(m);
            let mut rng = seeded_rng(seed);
            let a = s.random_nonzero_vector(&mut rng);
            let sign = if minus { Sign::Minus } else { Sign::Plus };
            let g = stabilizer_sample(&s, &a, seed, sign, count).unwrap();
            prop_assert!(is_symplectic(&s, &g));
            prop_assert_eq!(g.apply(&a).unwrap(), a.scale(&sign.as_rational()));
        }

        #[test]
        fn two_by_two_symplectic_iff_unit_determinant(e in prop::collection::vec(arb_small(), 4)) {
            let m = LinearMap::new(vec![e[0..2].to_vec(), e[2..4].to_vec()]).unwrap();
            prop_assert_eq!(is_symplectic(&sp(1), &m), det2(&m).is_one());
        }
    }
}
