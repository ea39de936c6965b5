use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{kernel, PolyMap, Rational};
use crate::error::{Error, Result};

/// Exponent vector of a monomial, one entry per variable.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of `x1`, then `x2`, and so on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars].into_boxed_slice())
    }

    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub(super) fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Sparse multivariate polynomial with rational coefficients.
///
/// The term map never stores a zero coefficient, so two polynomials are
/// equal exactly when their term maps are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, Rational::one())
    }

    /// The coordinate function `x_{index+1}`.
    pub fn var(nvars: usize, index: usize) -> Result<Self> {
        if index >= nvars {
            return Err(Error::IndexOutOfRange { index, len: nvars });
        }
        let mut e = vec![0; nvars];
        e[index] = 1;
        Ok(Polynomial::monomial(Monomial::new(e), Rational::one()))
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let nvars = m.0.len();
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (e, c) in terms {
            Error::check_dim(nvars, e.len())?;
            *acc.entry(Monomial::new(e)).or_default() += &c;
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Polynomial { nvars, terms: acc })
    }

    /// Linear form `Σ coeffs[i]·x_i`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; n];
                e[i] = 1;
                p.terms.insert(Monomial::new(e), c.clone());
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().next_back().map_or(-1, |m| m.degree() as i64)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(&Monomial::new(exponents.to_vec())).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.nvars])
    }

    /// Keeps only the terms of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == k).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        Error::check_dim(self.nvars, other.nvars)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(existing) => {
                    *existing += c;
                    if existing.is_zero() {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        Error::check_dim(self.nvars, other.nvars)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Polynomial::zero(self.nvars));
        }
        Ok(kernel::sum_of_products(self.nvars, &[(self, other, Rational::one())]))
    }

    /// `Σ c_k·A_k·B_k` in one pass, reducing each output coefficient once.
    pub fn sum_of_products(nvars: usize, pairs: &[(&Polynomial, &Polynomial, Rational)]) -> Result<Polynomial> {
        for (a, b, _) in pairs {
            Error::check_dim(nvars, a.nvars)?;
            Error::check_dim(nvars, b.nvars)?;
        }
        Ok(kernel::sum_of_products(nvars, pairs))
    }

    pub(super) fn from_map(nvars: usize, terms: BTreeMap<Monomial, Rational>) -> Self {
        debug_assert!(terms.values().all(|c| !c.is_zero()));
        Polynomial { nvars, terms }
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut result = Polynomial::one(self.nvars);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn eval(&self, z: &[Rational]) -> Result<Rational> {
        Error::check_dim(self.nvars, z.len())?;
        if self.terms.is_empty() {
            return Ok(Rational::zero());
        }
        // Clear all denominators once: with z_i = n_i/d_i and D = Π d_i^{e_i},
        // each term becomes an integer times D, summed without reductions.
        let mut top = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (t, &e) in top.iter_mut().zip(m.0.iter()) {
                *t = (*t).max(e);
            }
        }
        let powers = |f: &dyn Fn(&Rational) -> BigInt| -> Vec<Vec<BigInt>> {
            z.iter()
                .zip(&top)
                .map(|(x, &t)| {
                    let base = f(x);
                    let mut v = vec![BigInt::one()];
                    for _ in 0..t {
                        let next = v.last().unwrap() * &base;
                        v.push(next);
                    }
                    v
                })
                .collect()
        };
        let num_pow = powers(&|x: &Rational| x.numer());
        let den_pow = powers(&|x: &Rational| x.denom());
        let coeff_den =
            self.terms.values().fold(BigInt::one(), |acc, c| if c.is_integer() { acc } else { acc.lcm(&c.denom()) });
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut term = c.numer() * (&coeff_den / c.denom());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term *= &num_pow[i][e as usize];
                }
                let rest = top[i] - e;
                if rest > 0 {
                    term *= &den_pow[i][rest as usize];
                }
            }
            total += term;
        }
        let den = den_pow.iter().zip(&top).fold(coeff_den, |acc, (p, &t)| acc * &p[t as usize]);
        Ok(Rational::from(BigRational::new(total, den)))
    }

    pub fn eval_f64(&self, z: &[f64]) -> Result<f64> {
        Error::check_dim(self.nvars, z.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| m.0.iter().zip(z).fold(c.to_f64(), |acc, (&e, x)| acc * x.powi(e as i32)))
            .sum())
    }

    pub fn partial_derivative(&self, index: usize) -> Result<Polynomial> {
        if index >= self.nvars {
            return Err(Error::IndexOutOfRange { index, len: self.nvars });
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.to_vec();
            exps[index] -= 1;
            terms.insert(Monomial::new(exps), c * &Rational::integer(e as i64));
        }
        Ok(Polynomial { nvars: self.nvars, terms })
    }

    /// The polynomial `z ↦ self(g(z))`.
    pub fn substitute(&self, g: &PolyMap) -> Result<Polynomial> {
        Error::check_dim(self.nvars, g.len())?;
        let mut subst = Substitution::new(g);
        let mut total = Polynomial::zero(g.nvars());
        for (m, c) in &self.terms {
            let value = subst.monomial(m);
            total.add_scaled(&value, c);
        }
        Ok(total)
    }

    /// `self += c * other`, in place. Variable counts must already agree.
    pub(crate) fn add_scaled(&mut self, other: &Polynomial, c: &Rational) {
        debug_assert_eq!(self.nvars, other.nvars);
        if c.is_zero() {
            return;
        }
        for (m, oc) in &other.terms {
            let delta = oc * c;
            match self.terms.get_mut(m) {
                Some(existing) => {
                    *existing += &delta;
                    if existing.is_zero() {
                        self.terms.remove(m);
                    }
                }
                None => {
                    self.terms.insert(m.clone(), delta);
                }
            }
        }
    }
}

/// Memoized evaluation of monomials at a polynomial map.
///
/// A monomial's value is built from the value of the same monomial with its
/// last nonzero exponent cleared, so shared prefixes are computed once.
struct Substitution<'a> {
    g: &'a PolyMap,
    powers: Vec<Vec<Polynomial>>,
    prefixes: HashMap<Monomial, Polynomial>,
}

impl<'a> Substitution<'a> {
    fn new(g: &'a PolyMap) -> Self {
        let one = Polynomial::one(g.nvars());
        Substitution { g, powers: (0..g.len()).map(|_| vec![one.clone()]).collect(), prefixes: HashMap::new() }
    }

    fn power(&mut self, var: usize, e: u32) -> Polynomial {
        let cache = &mut self.powers[var];
        while cache.len() <= e as usize {
            let next = cache.last().unwrap() * &self.g.components()[var];
            cache.push(next);
        }
        cache[e as usize].clone()
    }

    fn monomial(&mut self, m: &Monomial) -> Polynomial {
        let Some(last) = m.0.iter().rposition(|&e| e > 0) else {
            return Polynomial::one(self.g.nvars());
        };
        if let Some(v) = self.prefixes.get(m) {
            return v.clone();
        }
        let mut rest = m.0.to_vec();
        let e = std::mem::take(&mut rest[last]);
        let head = self.monomial(&Monomial::new(rest));
        let value = if head.degree() == 0 && head.constant_term().is_one() {
            self.power(last, e)
        } else {
            &head * &self.power(last, e)
        };
        self.prefixes.insert(m.clone(), value.clone());
        value
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    /// Panics if the variable counts differ; see [`Polynomial::try_add`].
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial addition")
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial subtraction")
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

macro_rules! forward_owned_lhs {
    ($tr:ident, $method:ident) => {
        impl<'a> $tr<&'a Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_lhs!(Add, add);
forward_owned_lhs!(Sub, sub);
forward_owned_lhs!(Mul, mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

/// Terms from highest to lowest in graded-lex order, each written as
/// `c * x1^e1 ... xn^en` with zero exponents omitted.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " * x{}", i + 1)?,
                    _ => write!(f, " * x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.nvars, self)
    }
}

impl serde::Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::integer(n)
    }

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i).unwrap()
    }

    #[test]
    fn eval_examples() {
        let p = &x(2, 0) * &x(2, 1);
        assert_eq!(p.eval(&[q(3), q(5)]).unwrap(), q(15));
        assert_eq!(Polynomial::zero(2).eval(&[q(7), q(-1)]).unwrap(), q(0));
        let p = &x(2, 0).pow(2) - &x(2, 1);
        assert_eq!(p.eval(&[q(2), q(4)]).unwrap(), q(0));
        assert!(matches!(p.eval(&[q(1)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mul_examples() {
        let one = Polynomial::one(2);
        let p = &(&x(2, 0) + &one) * &(&x(2, 0) - &one);
        assert_eq!(p, &x(2, 0).pow(2) - &one);
        assert!((&x(2, 0) * &Polynomial::zero(2)).is_zero());
        assert_eq!(&x(2, 0) * &x(2, 0), Polynomial::monomial(Monomial::new(vec![2, 0]), q(1)));
        assert!(x(2, 0).try_mul(&x(3, 0)).is_err());
    }

    #[test]
    fn degree_of_zero_is_minus_one() {
        assert_eq!(Polynomial::zero(3).degree(), -1);
        assert_eq!(Polynomial::one(3).degree(), 0);
        assert_eq!((&x(3, 0) * &x(3, 2)).degree(), 2);
    }

    #[test]
    fn substitute_examples() {
        let id = PolyMap::identity(2);
        assert_eq!(x(2, 0).substitute(&id).unwrap(), x(2, 0));
        let shift = PolyMap::new(vec![&x(2, 0) + &Polynomial::one(2), x(2, 1)]).unwrap();
        let expected = Polynomial::from_terms(2, [(vec![2, 0], q(1)), (vec![1, 0], q(2)), (vec![0, 0], q(1))]).unwrap();
        assert_eq!(x(2, 0).pow(2).substitute(&shift).unwrap(), expected);
        let swap = PolyMap::new(vec![x(2, 1), x(2, 0)]).unwrap();
        assert_eq!(x(2, 1).substitute(&swap).unwrap(), x(2, 0));
        assert!(x(3, 0).substitute(&id).is_err());
    }

    #[test]
    fn derivative_examples() {
        let p = &x(2, 0).pow(2) * &x(2, 1);
        assert_eq!(p.partial_derivative(0).unwrap(), (&x(2, 0) * &x(2, 1)).scale(&q(2)));
        assert!(Polynomial::constant(2, q(5)).partial_derivative(1).unwrap().is_zero());
        assert!(x(2, 1).partial_derivative(0).unwrap().is_zero());
        assert!(matches!(p.partial_derivative(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn display_is_graded_lex_descending() {
        let p = Polynomial::from_terms(
            2,
            [(vec![0, 0], q(-1)), (vec![0, 2], Rational::new(1, 2).unwrap()), (vec![1, 1], q(3)), (vec![1, 0], q(1))],
        )
        .unwrap();
        assert_eq!(p.to_string(), "3 * x1 * x2 + 1/2 * x2^2 + 1 * x1 + -1");
        assert_eq!(Polynomial::zero(2).to_string(), "0");
    }

    pub(crate) fn arb_poly(nvars: usize, max_terms: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((prop::collection::vec(0..=max_deg, nvars), -9i64..=9, 1i64..=3), 0..=max_terms).prop_map(
            move |ts| {
                Polynomial::from_terms(nvars, ts.into_iter().map(|(e, n, d)| (e, Rational::new(n, d).unwrap())))
                    .unwrap()
            },
        )
    }

    fn arb_point(nvars: usize) -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-9i64..=9, 1i64..=3).prop_map(|(n, d)| Rational::new(n, d).unwrap()), nvars)
    }

    proptest! {
        #[test]
        fn ring_laws(p in arb_poly(3, 5, 2), q in arb_poly(3, 5, 2), r in arb_poly(3, 5, 2)) {
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert!((&p - &p).is_zero());
        }

        #[test]
        fn eval_is_a_homomorphism(p in arb_poly(3, 5, 3), q in arb_poly(3, 5, 3), z in arb_point(3)) {
            let lhs = (&p * &q).eval(&z).unwrap();
            prop_assert_eq!(lhs, &p.eval(&z).unwrap() * &q.eval(&z).unwrap());
        }

        #[test]
        fn mixed_partials_commute(p in arb_poly(3, 6, 4), i in 0usize..3, j in 0usize..3) {
            let a = p.partial_derivative(i).unwrap().partial_derivative(j).unwrap();
            let b = p.partial_derivative(j).unwrap().partial_derivative(i).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn degree_of_product_adds(p in arb_poly(2, 4, 3), q in arb_poly(2, 4, 3)) {
            prop_assume!(!p.is_zero() && !q.is_zero());
            prop_assert_eq!((&p * &q).degree(), p.degree() + q.degree());
        }

        #[test]
        fn pow_matches_repeated_mul(p in arb_poly(2, 3, 2), k in 0u32..5) {
            let mut expected = Polynomial::one(2);
            for _ in 0..k {
                expected = &expected * &p;
            }
            prop_assert_eq!(p.pow(k), expected);
        }
    }
}
