//! Fused kernel for `Σ c_k·A_k·B_k`.
//!
//! Every product is taken over the integers after scaling to one common
//! denominator, exponent vectors are packed into a `u128`, and coefficients
//! accumulate in the narrowest integer type that cannot overflow. Each
//! output coefficient is reduced exactly once.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use super::polynomial::{Monomial, Polynomial};
use super::Rational;

type IntTerms = Vec<(u128, BigInt)>;

pub(super) fn sum_of_products(nvars: usize, pairs: &[(&Polynomial, &Polynomial, Rational)]) -> Polynomial {
    let pairs: Vec<_> = pairs.iter().filter(|(a, b, c)| !a.is_zero() && !b.is_zero() && !c.is_zero()).collect();
    if pairs.is_empty() {
        return Polynomial::zero(nvars);
    }
    let Some(packing) = Packing::new(nvars, &pairs) else {
        return fallback(nvars, &pairs);
    };

    let forms: Vec<_> = pairs
        .iter()
        .map(|(a, b, c)| {
            let (da, ia) = integer_form(a);
            let (db, ib) = integer_form(b);
            (c.denom() * da * db, c.numer(), ia, ib)
        })
        .collect();
    let den = forms.iter().fold(BigInt::one(), |acc, f| acc.lcm(&f.0));
    let scaled: Vec<(IntTerms, IntTerms)> = forms
        .into_iter()
        .map(|(d, cn, ia, ib)| {
            let mu = cn * (&den / d);
            let (mut ia, mut ib) = (packing.pack(ia), packing.pack(ib));
            let target = if ia.len() <= ib.len() { &mut ia } else { &mut ib };
            if !mu.is_one() {
                for (_, c) in target.iter_mut() {
                    *c *= &mu;
                }
            }
            (ia, ib)
        })
        .collect();

    let ops: u128 = scaled.iter().map(|(a, b)| (a.len() * b.len()) as u128).sum();
    let headroom = 128 - ops.leading_zeros() as u64 + 1;
    let bits = |v: &IntTerms| v.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
    let widest_operand = scaled.iter().map(|(a, b)| bits(a).max(bits(b))).max().unwrap_or(0);
    let widest_product = scaled.iter().map(|(a, b)| bits(a) + bits(b)).max().unwrap_or(0);

    let fits = |operand: u64, acc: u64| widest_operand <= 64 * operand && widest_product + headroom < 64 * acc;
    let acc: Vec<(u128, BigInt)> = if widest_product + headroom < 127 {
        accumulate::<i128>(&scaled)
    } else if fits(2, 4) {
        accumulate::<Wide<2, 4>>(&scaled)
    } else if fits(3, 6) {
        accumulate::<Wide<3, 6>>(&scaled)
    } else if fits(4, 8) {
        accumulate::<Wide<4, 8>>(&scaled)
    } else if fits(4, 9) {
        accumulate::<Wide<4, 9>>(&scaled)
    } else if fits(5, 10) {
        accumulate::<Wide<5, 10>>(&scaled)
    } else if fits(6, 12) {
        accumulate::<Wide<6, 12>>(&scaled)
    } else if fits(8, 16) {
        accumulate::<Wide<8, 16>>(&scaled)
    } else {
        accumulate::<BigInt>(&scaled)
    };

    let terms: BTreeMap<Monomial, Rational> =
        acc.into_iter().map(|(k, c)| (packing.unpack(k), Rational::from(BigRational::new(c, den.clone())))).collect();
    Polynomial::from_map(nvars, terms)
}

/// `(D, [(m, D·c_m)])` with `D` the lcm of the coefficient denominators.
fn integer_form(p: &Polynomial) -> (BigInt, Vec<(&Monomial, BigInt)>) {
    let den = p.terms().fold(BigInt::one(), |acc, (_, c)| if c.is_integer() { acc } else { acc.lcm(&c.denom()) });
    let ints = p.terms().map(|(m, c)| (m, c.numer() * (&den / c.denom()))).collect();
    (den, ints)
}

fn fallback(nvars: usize, pairs: &[&(&Polynomial, &Polynomial, Rational)]) -> Polynomial {
    let mut out = Polynomial::zero(nvars);
    for (a, b, c) in pairs {
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let term = Polynomial::monomial(ma.times(mb), ca * cb * c);
                out = &out + &term;
            }
        }
    }
    out
}

/// Integer accumulator for one output coefficient.
trait Accumulator {
    type Operand;
    fn operand(c: &BigInt) -> Self::Operand;
    fn zero() -> Self;
    fn add_product(&mut self, a: &Self::Operand, b: &Self::Operand);
    fn is_zero(&self) -> bool;
    fn into_big(self) -> BigInt;
}

impl Accumulator for i128 {
    type Operand = i128;
    fn operand(c: &BigInt) -> i128 {
        i128::try_from(c).expect("operand width checked")
    }
    fn zero() -> Self {
        0
    }
    fn add_product(&mut self, a: &i128, b: &i128) {
        *self += a * b;
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Accumulator for BigInt {
    type Operand = BigInt;
    fn operand(c: &BigInt) -> BigInt {
        c.clone()
    }
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn add_product(&mut self, a: &BigInt, b: &BigInt) {
        *self += a * b;
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn into_big(self) -> BigInt {
        self
    }
}

/// Sign and magnitude of an operand of at most `L` 64-bit limbs.
#[derive(Clone, Copy)]
struct Limbs<const L: usize> {
    negative: bool,
    magnitude: [u64; L],
}

/// Two's-complement accumulator of `A` limbs taking products of `L`-limb
/// operands; requires `2L ≤ A`.
#[derive(Clone, Copy, PartialEq)]
struct Wide<const L: usize, const A: usize>([u64; A]);

impl<const L: usize, const A: usize> Accumulator for Wide<L, A> {
    type Operand = Limbs<L>;

    fn operand(c: &BigInt) -> Limbs<L> {
        let (sign, digits) = c.to_u64_digits();
        assert!(digits.len() <= L, "operand width checked");
        let mut magnitude = [0; L];
        magnitude[..digits.len()].copy_from_slice(&digits);
        Limbs { negative: sign == num_bigint::Sign::Minus, magnitude }
    }

    fn zero() -> Self {
        Wide([0; A])
    }

    fn add_product(&mut self, a: &Limbs<L>, b: &Limbs<L>) {
        let mut prod = [0u64; A];
        for (i, &x) in a.magnitude.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let mut carry = 0u128;
            for (j, &y) in b.magnitude.iter().enumerate() {
                let t = u128::from(x) * u128::from(y) + u128::from(prod[i + j]) + carry;
                prod[i + j] = t as u64;
                carry = t >> 64;
            }
            prod[i + L] = carry as u64;
        }
        if a.negative != b.negative {
            let mut borrow = false;
            for (acc, p) in self.0.iter_mut().zip(prod) {
                let (v, b1) = acc.overflowing_sub(p);
                let (v, b2) = v.overflowing_sub(borrow as u64);
                *acc = v;
                borrow = b1 || b2;
            }
        } else {
            let mut carry = false;
            for (acc, p) in self.0.iter_mut().zip(prod) {
                let (v, c1) = acc.overflowing_add(p);
                let (v, c2) = v.overflowing_add(carry as u64);
                *acc = v;
                carry = c1 || c2;
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    fn into_big(self) -> BigInt {
        let negative = self.0[A - 1] >> 63 == 1;
        let mut limbs = self.0;
        if negative {
            let mut carry = true;
            for x in limbs.iter_mut() {
                let (v, c) = (!*x).overflowing_add(carry as u64);
                *x = v;
                carry = c;
            }
        }
        let digits: Vec<u32> = limbs.iter().flat_map(|&x| [x as u32, (x >> 32) as u32]).collect();
        let magnitude = BigInt::from(num_bigint::BigUint::new(digits));
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn accumulate<A: Accumulator>(pairs: &[(IntTerms, IntTerms)]) -> Vec<(u128, BigInt)> {
    let mut acc: FxHashMap<u128, A> = FxHashMap::default();
    for (a, b) in pairs {
        let a: Vec<(u128, A::Operand)> = a.iter().map(|(k, c)| (*k, A::operand(c))).collect();
        let b: Vec<(u128, A::Operand)> = b.iter().map(|(k, c)| (*k, A::operand(c))).collect();
        acc.reserve(a.len().max(b.len()));
        for (ka, ca) in &a {
            for (kb, cb) in &b {
                acc.entry(ka + kb).or_insert_with(A::zero).add_product(ca, cb);
            }
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.into_big())).collect()
}

/// Bit-packed exponent vectors, sized so that adding two packed monomials
/// from any one pair never carries between fields.
struct Packing {
    shifts: Vec<u32>,
    masks: Vec<u128>,
}

impl Packing {
    fn new(nvars: usize, pairs: &[&(&Polynomial, &Polynomial, Rational)]) -> Option<Self> {
        let max_exp = |p: &Polynomial, i: usize| p.terms().map(|(m, _)| m.exponents()[i]).max().unwrap_or(0);
        let mut shifts = Vec::with_capacity(nvars);
        let mut masks = Vec::with_capacity(nvars);
        let mut offset = 0u32;
        for i in 0..nvars {
            let top =
                pairs.iter().map(|(a, b, _)| u64::from(max_exp(a, i)) + u64::from(max_exp(b, i))).max().unwrap_or(0);
            let width = 64 - top.leading_zeros();
            shifts.push(offset);
            masks.push((1u128 << width) - 1);
            offset += width;
            if offset > 128 {
                return None;
            }
        }
        Some(Packing { shifts, masks })
    }

    fn pack(&self, v: Vec<(&Monomial, BigInt)>) -> IntTerms {
        v.into_iter()
            .map(|(m, c)| {
                let key = m.exponents().iter().zip(&self.shifts).map(|(&e, &s)| u128::from(e) << s).sum();
                (key, c)
            })
            .collect()
    }

    fn unpack(&self, key: u128) -> Monomial {
        Monomial::new(self.shifts.iter().zip(&self.masks).map(|(&s, &mask)| ((key >> s) & mask) as u32).collect())
    }
}
