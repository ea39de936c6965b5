//! Liouville structures `θ^a = θ⁰ + dψ^a` with `ψ^a(z) = ε/(2d)·Ω(a, z)^d`.
//!
//! Everything that does not involve the time parameter of a flow is exact.
//! Flows involve `e^{t/2}` and are evaluated in `f64`, once in closed form and
//! once by fixed-step RK4 integration of the Liouville field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ratpoly::{PolyMap, PolyMatrix, Polynomial, Rational};
use crate::symplectic::{Sign, SymplecticSpace, Vector};

/// The data `(a, d, ε)` determining `ψ^a` and hence `θ^a`, `ζ^a`, `φ^a_t`.
///
/// `d = 0` or `a = 0` is the canonical structure. For odd `d` the sign is
/// redundant: `(a, d, −)` and `(−a, d, +)` give the same form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LiouvilleStructure {
    #[serde(skip)]
    space: SymplecticSpace,
    a: Vector,
    degree: u32,
    sign: Sign,
}

impl LiouvilleStructure {
    pub fn new(space: SymplecticSpace, a: Vector, degree: u32, sign: Sign) -> Result<Self> {
        space.check(&a)?;
        Ok(LiouvilleStructure { space, a, degree, sign })
    }

    pub fn canonical(space: SymplecticSpace) -> Self {
        LiouvilleStructure { space, a: space.zero(), degree: 0, sign: Sign::Plus }
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn a(&self) -> &Vector {
        &self.a
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_canonical(&self) -> bool {
        self.degree == 0 || self.a.is_zero()
    }

    /// Same `a` and degree, opposite sign.
    pub fn with_sign(&self, sign: Sign) -> Self {
        LiouvilleStructure { sign, ..self.clone() }
    }

    fn nvars(&self) -> usize {
        self.space.dim()
    }

    /// `ψ^a = ε/(2d)·Ω(a, z)^d`, zero for the canonical structure.
    pub fn psi(&self) -> Polynomial {
        if self.is_canonical() {
            return Polynomial::zero(self.nvars());
        }
        let coeff = &self.sign.as_rational() / &Rational::integer(2 * self.degree as i64);
        self.space.omega_form(&self.a).unwrap().pow(self.degree).scale(&coeff)
    }

    /// `w(z) = z + ε·Ω(a, z)^{d−1}·a`, so that `θ^a_z(v) = ½Ω(w(z), v)` and `ζ^a = ½w`.
    fn shifted_point(&self) -> Vec<Polynomial> {
        let n = self.nvars();
        let coords = PolyMap::identity(n).into_components();
        if self.is_canonical() {
            return coords;
        }
        let scale = self.space.omega_form(&self.a).unwrap().pow(self.degree - 1).scale(&self.sign.as_rational());
        coords.iter().zip(self.a.entries()).map(|(x, ai)| x + &scale.scale(ai)).collect()
    }

    pub fn theta_form(&self) -> OneForm {
        half_omega_form(&self.space, &self.shifted_point())
    }

    pub fn liouville_field(&self) -> VectorField {
        let half = Rational::new(1, 2).unwrap();
        let components = self.shifted_point().iter().map(|w| w.scale(&half)).collect();
        VectorField { components: PolyMap::new(components).unwrap() }
    }

    /// The coefficients of `θ^a` at the point `z`.
    pub fn theta_covector(&self, z: &[Rational]) -> Result<Vec<Rational>> {
        Error::check_dim(self.nvars(), z.len())?;
        let mut w = z.to_vec();
        if !self.is_canonical() {
            let c = self.space.omega(&self.a, &Vector::new(z.to_vec()))?;
            let k = &c.pow(self.degree - 1) * &self.sign.as_rational();
            for (wi, ai) in w.iter_mut().zip(self.a.entries()) {
                *wi += &(&k * ai);
            }
        }
        let m = self.space.m();
        let half = Rational::new(1, 2).unwrap();
        let (p, q) = w.split_at(m);
        Ok(q.iter().map(|x| -&(x * &half)).chain(p.iter().map(|x| x * &half)).collect())
    }

    /// The value of `θ^a` at `z` on `v`, exactly.
    pub fn theta_value(&self, z: &Vector, v: &Vector) -> Result<Rational> {
        self.theta_form().eval(z.entries(), v.entries())
    }
}

/// The one-form `v ↦ ½Ω(w, v)` for a polynomial point `w`.
fn half_omega_form(space: &SymplecticSpace, w: &[Polynomial]) -> OneForm {
    let m = space.m();
    let half = Rational::new(1, 2).unwrap();
    let mut coefficients = Vec::with_capacity(2 * m);
    // ½Ω(w, v) = ½ Σ (w_{p_i} v_{q_i} − w_{q_i} v_{p_i})
    coefficients.extend(w[m..].iter().map(|x| x.scale(&-&half)));
    coefficients.extend(w[..m].iter().map(|x| x.scale(&half)));
    OneForm { coefficients }
}

/// A one-form with polynomial coefficients: `Σ_i f_i(z) dz_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct OneForm {
    coefficients: Vec<Polynomial>,
}

impl OneForm {
    pub fn new(coefficients: Vec<Polynomial>) -> Result<Self> {
        let n = coefficients.len();
        for c in &coefficients {
            Error::check_dim(n, c.nvars())?;
        }
        Ok(OneForm { coefficients })
    }

    /// `dψ`: the gradient of `ψ` as a one-form.
    pub fn exact(psi: &Polynomial) -> Self {
        OneForm { coefficients: (0..psi.nvars()).map(|i| psi.partial_derivative(i).unwrap()).collect() }
    }

    pub fn coefficients(&self) -> &[Polynomial] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn try_add(&self, other: &OneForm) -> Result<OneForm> {
        Error::check_dim(self.dim(), other.dim())?;
        let coefficients =
            self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a.try_add(b)).collect::<Result<_>>()?;
        Ok(OneForm { coefficients })
    }

    pub fn eval(&self, z: &[Rational], v: &[Rational]) -> Result<Rational> {
        Error::check_dim(self.dim(), v.len())?;
        let mut acc = Rational::zero();
        for (c, vi) in self.coefficients.iter().zip(v) {
            acc += &(&c.eval(z)? * vi);
        }
        Ok(acc)
    }
}

/// A two-form `Σ_{i,j} ½ c_{ij} dz_i ∧ dz_j` stored by its antisymmetric
/// coefficient matrix `c_{ij} = ω(∂_i, ∂_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TwoForm {
    coefficients: PolyMatrix,
}

impl TwoForm {
    pub fn new(coefficients: PolyMatrix) -> Result<Self> {
        let n = coefficients.len();
        for (i, row) in coefficients.iter().enumerate() {
            Error::check_dim(n, row.len())?;
            for (j, c) in row.iter().enumerate() {
                if *c != -&coefficients[j][i] {
                    return Err(Error::invalid("two-form coefficients must be antisymmetric"));
                }
            }
        }
        Ok(TwoForm { coefficients })
    }

    /// `ω`: the constant two-form with the matrix of `Ω`.
    pub fn symplectic(space: &SymplecticSpace) -> Self {
        let n = space.dim();
        TwoForm {
            coefficients: space
                .omega_matrix()
                .into_iter()
                .map(|row| row.into_iter().map(|c| Polynomial::constant(n, c)).collect())
                .collect(),
        }
    }

    pub fn coefficients(&self) -> &PolyMatrix {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().flatten().all(Polynomial::is_zero)
    }

    /// `X ⌟ ω`: the one-form `v ↦ ω(X, v)`.
    pub fn contract(&self, field: &VectorField) -> Result<OneForm> {
        let n = self.coefficients.len();
        Error::check_dim(n, field.components.len())?;
        let coefficients = (0..n)
            .map(|j| {
                let mut acc = Polynomial::zero(field.components.nvars());
                for (i, xi) in field.components.components().iter().enumerate() {
                    acc = acc.try_add(&xi.try_mul(&self.coefficients[i][j])?)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(OneForm { coefficients })
    }
}

/// A polynomial vector field on `Q^{2m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VectorField {
    components: PolyMap,
}

impl VectorField {
    pub fn components(&self) -> &PolyMap {
        &self.components
    }
}

/// `(dθ)_{ij} = ∂f_j/∂z_i − ∂f_i/∂z_j`.
pub fn exterior_derivative(f: &OneForm) -> TwoForm {
    let n = f.dim();
    let grads: PolyMatrix =
        f.coefficients.iter().map(|c| (0..n).map(|i| c.partial_derivative(i).unwrap()).collect()).collect();
    // grads[j][i] = ∂f_j/∂z_i
    let coefficients = (0..n).map(|i| (0..n).map(|j| &grads[j][i] - &grads[i][j]).collect()).collect();
    TwoForm { coefficients }
}

/// `(g^*f)_i = Σ_j f_j(g(z))·∂g_j/∂z_i`, by direct substitution.
pub fn pullback_oneform(g: &PolyMap, f: &OneForm) -> Result<OneForm> {
    Error::check_dim(f.dim(), g.len())?;
    Error::check_dim(g.len(), g.nvars())?;
    let composed = f.coefficients.iter().map(|c| c.substitute(g)).collect::<Result<Vec<_>>>()?;
    let jac = g.jacobian();
    let n = g.nvars();
    let coefficients = (0..n)
        .map(|i| {
            let mut acc = Polynomial::zero(n);
            for (j, fj) in composed.iter().enumerate() {
                acc = &acc + &(fj * &jac[j][i]);
            }
            acc
        })
        .collect();
    Ok(OneForm { coefficients })
}

/// `g^*θ^a`, computed from the shape of `θ^a` rather than by substituting
/// into its expanded coefficients.
///
/// With `s = Ω(a, g)` and `W = g + ε·s^{d−1}·a`, the pullback has coefficients
/// `½Ω(W, ∂_i g)`. This is the same polynomial as
/// `pullback_oneform(g, &l.theta_form())`, but `s` is formed as a linear
/// combination of the components of `g`, so cancellations in `Ω(a, g)` happen
/// before the power is taken.
pub fn pullback_theta(g: &PolyMap, l: &LiouvilleStructure) -> Result<OneForm> {
    let space = l.space();
    Error::check_dim(space.dim(), g.len())?;
    Error::check_dim(space.dim(), g.nvars())?;
    let n = g.nvars();
    let m = space.m();
    let half = Rational::new(1, 2).unwrap();
    let jac = g.jacobian();
    // With s = Ω(a, g): Ω(g + εs^{d−1}a, ∂_i g) = Ω(g, ∂_i g) + εs^{d−1}∂_i s.
    let perturbation = if l.is_canonical() {
        None
    } else {
        let form = space.omega_form(l.a())?;
        let mut s = Polynomial::zero(n);
        for (i, gi) in g.components().iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            s.add_scaled(gi, &form.coefficient(&e));
        }
        let grad: Vec<Polynomial> = (0..n).map(|i| s.partial_derivative(i)).collect::<Result<_>>()?;
        Some((s.pow(l.degree() - 1), grad))
    };
    let neg_half = -&half;
    let eps_half = &half * &l.sign().as_rational();
    let coefficients = (0..n)
        .map(|i| {
            let mut pairs = Vec::with_capacity(2 * m + 1);
            for k in 0..m {
                pairs.push((&g.components()[k], &jac[m + k][i], half.clone()));
                pairs.push((&g.components()[m + k], &jac[k][i], neg_half.clone()));
            }
            if let Some((power, grad)) = &perturbation {
                pairs.push((power, &grad[i], eps_half.clone()));
            }
            Polynomial::sum_of_products(n, &pairs)
        })
        .collect::<Result<_>>()?;
    Ok(OneForm { coefficients })
}

/// Closed-form Liouville flow `φ^a_t(z)`.
///
/// With `s = e^{t/2}` and `c = Ω(a, z)`:
/// - canonical: `s·z`
/// - `d = 1`: `s(z + εa) − εa`
/// - `d = 2`: `s(z + ½tεc·a)`
/// - `d ≥ 3`, `n = d − 2`: `s(z − (ε/n)c^{n+1}a) + (ε/n)e^{(n+1)t/2}c^{n+1}a`
pub fn flow_closed_form(l: &LiouvilleStructure, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim(l.space().dim(), z.len())?;
    if t == 0.0 {
        return Ok(z.to_vec());
    }
    let s = (0.5 * t).exp();
    if l.is_canonical() {
        return Ok(z.iter().map(|x| s * x).collect());
    }
    let a = l.a().to_f64();
    let eps = l.sign().as_f64();
    let c = l.space().omega_f64(&a, z);
    let out = match l.degree() {
        1 => z.iter().zip(&a).map(|(x, ai)| s * (x + eps * ai) - eps * ai).collect(),
        2 => z.iter().zip(&a).map(|(x, ai)| s * (x + 0.5 * t * eps * c * ai)).collect(),
        d => {
            let n = (d - 2) as f64;
            let k = eps / n * c.powi(d as i32 - 1);
            let late = (0.5 * (n + 1.0) * t).exp();
            z.iter().zip(&a).map(|(x, ai)| s * (x - k * ai) + late * k * ai).collect()
        }
    };
    Ok(out)
}

/// A polynomial compiled for repeated `f64` evaluation.
#[derive(Debug, Clone)]
struct FloatPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl FloatPoly {
    fn new(p: &Polynomial) -> Self {
        FloatPoly {
            terms: p
                .terms()
                .map(|(m, c)| {
                    let powers =
                        m.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as i32)).collect();
                    (c.to_f64(), powers)
                })
                .collect(),
        }
    }

    fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(c, powers)| powers.iter().fold(*c, |acc, &(i, e)| acc * z[i].powi(e))).sum()
    }
}

/// Fixed-step classical RK4 integration of `z' = ζ^a(z)` from time `0` to `t`.
///
/// The field is the expanded polynomial from [`LiouvilleStructure::liouville_field`]
/// evaluated in `f64`; it shares no code with [`flow_closed_form`].
pub fn flow_numeric(l: &LiouvilleStructure, t: f64, z: &[f64], steps: usize) -> Result<Vec<f64>> {
    Error::check_dim(l.space().dim(), z.len())?;
    if steps == 0 {
        return Err(Error::invalid("RK4 needs at least one step"));
    }
    let field: Vec<FloatPoly> = l.liouville_field().components().components().iter().map(FloatPoly::new).collect();
    let rhs = |y: &[f64]| -> Vec<f64> { field.iter().map(|p| p.eval(y)).collect() };
    let h = t / steps as f64;
    let mut y = z.to_vec();
    if t == 0.0 {
        return Ok(y);
    }
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&y, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(y)
}

/// Central-difference Jacobian of `z ↦ φ_t(z)` with step `h`, row-major.
pub fn flow_jacobian_fd(l: &LiouvilleStructure, t: f64, z: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let n = z.len();
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut plus = z.to_vec();
        let mut minus = z.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = flow_closed_form(l, t, &plus)?;
        let fm = flow_closed_form(l, t, &minus)?;
        for i in 0..n {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `max |Jᵀ J_Ω J − e^t J_Ω|` for the finite-difference Jacobian of `φ_t` at `z`.
pub fn flow_scaling_defect(l: &LiouvilleStructure, t: f64, z: &[f64], h: f64) -> Result<f64> {
    let jac = flow_jacobian_fd(l, t, z, h)?;
    let omega = l.space().omega_matrix_f64();
    let n = z.len();
    let scale = t.exp();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for r in 0..n {
                    acc += jac[k][i] * omega[k][r] * jac[r][j];
                }
            }
            worst = worst.max((acc - scale * omega[i][j]).abs());
        }
    }
    Ok(worst)
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
