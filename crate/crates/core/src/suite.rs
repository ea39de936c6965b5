//! Batch verification of every invariant over a grid of structures, plus
//! the flow-trace and `Sp`-sampling outputs behind the command line tool.
//!
//! The grid is `m × d × ε` from a [`VerifyConfig`]. Each applicable
//! invariant becomes one check per grid cell, run for `trials` independent
//! trials whose randomness is derived from `(seed, check index, trial)`.
//! A check stops at its first failing trial and records that trial's data
//! as the witness.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::autgroup::{
    decompose, f_after, f_map, f_map_inverse, is_exact_pullback_equal, make_automorphism, make_isomorphism,
    translation_map, CaseTag,
};
use crate::error::{Error, Result};
use crate::liouville::{
    exterior_derivative, flow_closed_form, flow_numeric, flow_scaling_defect, max_abs_diff, pullback_oneform,
    pullback_theta, LiouvilleStructure, OneForm, TwoForm,
};
use crate::ratpoly::{PolyMap, Polynomial, Rational};
use crate::symplectic::{
    is_symplectic, map_vector_to_vector, random_symplectic_with, seeded_rng, stabilizer_sample_with, LinearMap, Sign,
    SymplecticSpace, Vector,
};

/// Identifies the report layout; bumped whenever fields change meaning.
pub const REPORT_SCHEMA: u32 = 1;

/// Transvection factors in every sampled `γ`.
pub const GAMMA_FACTORS: usize = 3;

const GROUP_LAW_TOL: f64 = 1e-9;
const GENERATOR_STEP: f64 = 1e-6;
const GENERATOR_TOL: f64 = 1e-5;
const SCALING_STEP: f64 = 1e-6;
const SCALING_TIMES: [f64; 3] = [-1.0, 0.5, 1.0];
const CANONICAL_TOL: f64 = 1e-10;
const WRONG_CENTER_ATTEMPTS: usize = 3;
const REJECTION_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub m_list: Vec<usize>,
    pub degrees: Vec<u32>,
    pub signs: Vec<Sign>,
    pub trials: u32,
    pub seed: u64,
    pub float_tol_flow: f64,
    pub float_tol_scaling: f64,
    pub rk4_steps: u32,
    /// Perturb one coefficient of every `f_a` used by the conjugation check.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            m_list: vec![1, 2],
            degrees: (0..=6).collect(),
            signs: Sign::both().to_vec(),
            trials: 50,
            seed: 42,
            float_tol_flow: 1e-8,
            float_tol_scaling: 1e-5,
            rk4_steps: 2000,
            inject_fault: false,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        fn distinct<T: Ord + Clone>(v: &[T]) -> bool {
            let mut s = v.to_vec();
            s.sort();
            s.dedup();
            s.len() == v.len()
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return Err(Error::invalid("m list must be nonempty with every m >= 1"));
        }
        if self.degrees.is_empty() || self.signs.is_empty() {
            return Err(Error::invalid("degree and sign lists must be nonempty"));
        }
        if !distinct(&self.m_list) || !distinct(&self.degrees) || !distinct(&self.signs) {
            return Err(Error::invalid("m, degree and sign lists must not repeat entries"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.rk4_steps == 0 {
            return Err(Error::invalid("rk4 steps must be at least 1"));
        }
        for (name, tol) in [("float_tol_flow", self.float_tol_flow), ("float_tol_scaling", self.float_tol_scaling)] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::invalid(format!("{name} must be a positive finite number")));
            }
        }
        if self.inject_fault && !self.degrees.iter().any(|&d| d >= 3) {
            return Err(Error::invalid("fault injection perturbs f_a and needs a degree >= 3"));
        }
        Ok(())
    }
}

/// One invariant the suite can check, for traceability of report entries.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Invariant {
    pub name: &'static str,
    pub module: &'static str,
    pub statement: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    PotentialExact,
    ContractionIdentity,
    CanonicalSpInvariance,
    FlowMatchesRk4,
    FlowGroupLaw,
    FlowGenerator,
    FlowScalingLaw,
    CanonicalFlowAtOne,
    ZeroVectorDegeneracy,
    PsiParity,
    OddDegreeSignRedundancy,
    TranslationConjugation,
    FConjugation,
    AutomorphismSoundness,
    DecompositionRoundTrip,
    AutomorphismGroupClosure,
    LinearFixedPoint,
    QuadraticLinePreservation,
    TranslationNotCanonicalAutomorphism,
    NonStabilizerRejected,
    WrongCenterConjugateRejected,
    QuadraticSignObstruction,
    IsomorphismCatalogue,
}

const KINDS: [Kind; 23] = [
    Kind::PotentialExact,
    Kind::ContractionIdentity,
    Kind::CanonicalSpInvariance,
    Kind::FlowMatchesRk4,
    Kind::FlowGroupLaw,
    Kind::FlowGenerator,
    Kind::FlowScalingLaw,
    Kind::CanonicalFlowAtOne,
    Kind::ZeroVectorDegeneracy,
    Kind::PsiParity,
    Kind::OddDegreeSignRedundancy,
    Kind::TranslationConjugation,
    Kind::FConjugation,
    Kind::AutomorphismSoundness,
    Kind::DecompositionRoundTrip,
    Kind::AutomorphismGroupClosure,
    Kind::LinearFixedPoint,
    Kind::QuadraticLinePreservation,
    Kind::TranslationNotCanonicalAutomorphism,
    Kind::NonStabilizerRejected,
    Kind::WrongCenterConjugateRejected,
    Kind::QuadraticSignObstruction,
    Kind::IsomorphismCatalogue,
];

impl Kind {
    fn invariant(self) -> Invariant {
        let (name, module, statement) = match self {
            Kind::PotentialExact => ("potential_exact", "liouville", "d theta^a = omega exactly"),
            Kind::ContractionIdentity => {
                ("contraction_identity", "liouville", "omega(zeta^a(z), v) = theta^a_z(v) as polynomials")
            }
            Kind::CanonicalSpInvariance => {
                ("canonical_sp_invariance", "liouville", "gamma^* theta^0 = theta^0 for sampled gamma in Sp")
            }
            Kind::FlowMatchesRk4 => {
                ("flow_matches_rk4", "liouville", "closed-form flow agrees with RK4 integration of zeta^a")
            }
            Kind::FlowGroupLaw => ("flow_group_law", "liouville", "phi_{s+t} = phi_s o phi_t"),
            Kind::FlowGenerator => ("flow_generator", "liouville", "(phi_h(z) - z)/h approaches zeta^a(z)"),
            Kind::FlowScalingLaw => {
                ("flow_scaling_law", "liouville", "J^T J_Omega J = e^t J_Omega for the Jacobian J of phi_t")
            }
            Kind::CanonicalFlowAtOne => ("canonical_flow_at_one", "liouville", "canonical phi_1(z) = e^{1/2} z"),
            Kind::ZeroVectorDegeneracy => {
                ("zero_vector_degeneracy", "liouville", "a = 0 agrees exactly with the canonical structure")
            }
            Kind::PsiParity => {
                ("psi_parity", "liouville", "psi^{-a} = psi^a for even d and psi^{-a} = -psi^a for odd d")
            }
            Kind::OddDegreeSignRedundancy => {
                ("odd_degree_sign_redundancy", "liouville", "for odd d, (a, -) and (-a, +) give the same theta")
            }
            Kind::TranslationConjugation => {
                ("translation_conjugation", "autgroup", "tau_a^* theta^0 = theta^a for d = 1")
            }
            Kind::FConjugation => ("f_conjugation", "autgroup", "f_a^* theta^a = theta^0 for d >= 3"),
            Kind::AutomorphismSoundness => {
                ("automorphism_soundness", "autgroup", "make_automorphism(L, gamma) pulls theta^a back to itself")
            }
            Kind::DecompositionRoundTrip => {
                ("decomposition_round_trip", "autgroup", "decompose(L, make_automorphism(L, gamma)) returns gamma")
            }
            Kind::AutomorphismGroupClosure => (
                "automorphism_group_closure",
                "autgroup",
                "the composite of two automorphisms is an automorphism with the product witness",
            ),
            Kind::LinearFixedPoint => ("linear_fixed_point", "autgroup", "d = 1 automorphisms fix -a"),
            Kind::QuadraticLinePreservation => {
                ("quadratic_line_preservation", "autgroup", "d = 2 automorphisms send a to +a or -a")
            }
            Kind::TranslationNotCanonicalAutomorphism => (
                "translation_not_canonical_automorphism",
                "autgroup",
                "tau_a is not an automorphism of theta^0 for a != 0",
            ),
            Kind::NonStabilizerRejected => (
                "non_stabilizer_rejected",
                "autgroup",
                "gamma with gamma(a) not in {a, -a} is not an automorphism for d = 2",
            ),
            Kind::WrongCenterConjugateRejected => (
                "wrong_center_conjugate_rejected",
                "autgroup",
                "some sampled f_b o gamma o f_b^-1 is not an automorphism of theta^a for a != +-b",
            ),
            Kind::QuadraticSignObstruction => (
                "quadratic_sign_obstruction",
                "autgroup",
                "no stabilizer gamma maps the d = 2 structure of one sign to the other",
            ),
            Kind::IsomorphismCatalogue => (
                "isomorphism_catalogue",
                "autgroup",
                "the distinguished isomorphisms between structures of equal degree are exact",
            ),
        };
        Invariant { name, module, statement }
    }

    /// Whether the check runs once per `m` rather than once per grid cell.
    fn per_dimension(self) -> bool {
        self == Kind::CanonicalSpInvariance
    }

    fn applies(self, d: u32) -> bool {
        match self {
            Kind::CanonicalFlowAtOne | Kind::TranslationNotCanonicalAutomorphism => d == 0,
            Kind::PsiParity | Kind::IsomorphismCatalogue => d >= 1,
            Kind::OddDegreeSignRedundancy => d % 2 == 1,
            Kind::TranslationConjugation | Kind::LinearFixedPoint => d == 1,
            Kind::QuadraticLinePreservation | Kind::NonStabilizerRejected | Kind::QuadraticSignObstruction => d == 2,
            Kind::FConjugation | Kind::WrongCenterConjugateRejected => d >= 3,
            _ => true,
        }
    }
}

/// Every invariant the suite knows, in report order.
pub fn invariants() -> Vec<Invariant> {
    KINDS.iter().map(|k| k.invariant()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn is_success(&self) -> bool {
        self.summary.fail == 0 && self.summary.error == 0
    }

    /// Pretty JSON with a trailing newline; identical for identical configs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }
}

/// `<schema>/<crate version>`.
pub fn report_version() -> String {
    format!("liouville-report-{REPORT_SCHEMA}/{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone)]
struct Plan {
    kind: Kind,
    m: usize,
    d: Option<u32>,
    sign: Option<Sign>,
}

impl Plan {
    fn parameters(&self, trials: u32) -> BTreeMap<String, Value> {
        let mut p = BTreeMap::new();
        p.insert("m".to_string(), json!(self.m));
        if let Some(d) = self.d {
            p.insert("d".to_string(), json!(d));
        }
        if let Some(sign) = self.sign {
            p.insert("sign".to_string(), json!(sign.to_string()));
        }
        p.insert("trials".to_string(), json!(trials));
        p
    }
}

fn plan(config: &VerifyConfig) -> Vec<Plan> {
    let mut out = Vec::new();
    for &m in &config.m_list {
        for &kind in KINDS.iter().filter(|k| k.per_dimension()) {
            out.push(Plan { kind, m, d: None, sign: None });
        }
        for &d in &config.degrees {
            for &sign in &config.signs {
                for &kind in KINDS.iter().filter(|k| !k.per_dimension() && k.applies(d)) {
                    out.push(Plan { kind, m, d: Some(d), sign: Some(sign) });
                }
            }
        }
    }
    out
}

/// SplitMix64 finalizer over the three coordinates of a trial.
fn trial_seed(seed: u64, check: usize, trial: u32) -> u64 {
    let mut x = seed;
    for v in [check as u64, u64::from(trial)] {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(v.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
    }
    x
}

/// Runs the whole grid. Checks are spread over the available cores; the
/// report does not depend on scheduling.
pub fn run_verification_suite(config: &VerifyConfig) -> Result<Report> {
    run_verification_suite_with(config, |_, _, _| {})
}

/// As [`run_verification_suite`], calling `observer(done, total, check)` as
/// each check finishes (in completion order).
pub fn run_verification_suite_with<F>(config: &VerifyConfig, observer: F) -> Result<Report>
where
    F: Fn(usize, usize, &CheckResult) + Sync,
{
    run_selected(config, None, observer)
}

/// Runs only the named invariants over the grid of `config`.
pub fn run_invariants(config: &VerifyConfig, names: &[&str]) -> Result<Report> {
    for name in names {
        if !KINDS.iter().any(|k| k.invariant().name == *name) {
            return Err(Error::invalid(format!("unknown invariant {name}")));
        }
    }
    run_selected(config, Some(names), |_, _, _| {})
}

fn run_selected<F>(config: &VerifyConfig, only: Option<&[&str]>, observer: F) -> Result<Report>
where
    F: Fn(usize, usize, &CheckResult) + Sync,
{
    config.validate()?;
    let mut plans = plan(config);
    if let Some(names) = only {
        plans.retain(|p| names.contains(&p.kind.invariant().name));
    }
    let total = plans.len();
    let results: Mutex<Vec<Option<CheckResult>>> = Mutex::new(vec![None; total]);
    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let worker = || loop {
        let index = next.fetch_add(1, Ordering::Relaxed);
        if index >= total {
            break;
        }
        let result = run_check(config, index, &plans[index]);
        let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
        observer(finished, total, &result);
        results.lock().expect("no panics while holding the lock")[index] = Some(result);
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(total.max(1));
    if threads <= 1 {
        worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(worker);
            }
        });
    }
    let checks: Vec<CheckResult> =
        results.into_inner().expect("workers finished").into_iter().map(|r| r.expect("every check ran")).collect();
    let mut summary = Summary { total: checks.len(), ..Summary::default() };
    for c in &checks {
        match c.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Error => summary.error += 1,
        }
    }
    Ok(Report { version: report_version(), config: config.clone(), checks, summary })
}

enum Outcome {
    Pass,
    Fail(Value),
}

struct Trial<'a> {
    config: &'a VerifyConfig,
    space: SymplecticSpace,
    d: u32,
    sign: Sign,
    trial: u32,
    rng: ChaCha8Rng,
}

fn run_check(config: &VerifyConfig, index: usize, plan: &Plan) -> CheckResult {
    let space = SymplecticSpace::new(plan.m).expect("validated m");
    let mut status = Status::Pass;
    let mut witness = None;
    for trial in 0..config.trials {
        let mut t = Trial {
            config,
            space,
            d: plan.d.unwrap_or(0),
            sign: plan.sign.unwrap_or(Sign::Plus),
            trial,
            rng: seeded_rng(trial_seed(config.seed, index, trial)),
        };
        match run_trial(plan.kind, &mut t) {
            Ok(Outcome::Pass) => {}
            Ok(Outcome::Fail(mut w)) => {
                w["trial"] = json!(trial);
                status = Status::Fail;
                witness = Some(w);
                break;
            }
            Err(e) => {
                status = Status::Error;
                witness = Some(json!({ "trial": trial, "error": e.to_string() }));
                break;
            }
        }
    }
    CheckResult {
        name: plan.kind.invariant().name.to_string(),
        parameters: plan.parameters(config.trials),
        status,
        witness,
    }
}

fn outcome(ok: bool, witness: impl FnOnce() -> Value) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail(witness())
    }
}

impl Trial<'_> {
    fn nonzero(&mut self) -> Vector {
        self.space.random_nonzero_vector(&mut self.rng)
    }

    fn gamma(&mut self) -> LinearMap {
        random_symplectic_with(&self.space, &mut self.rng, GAMMA_FACTORS)
    }

    /// `λ` for the quadratic stabilizer samples alternates with the trial.
    fn lambda(&self) -> Sign {
        if self.trial % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    fn stabilizer(&mut self, a: &Vector, lambda: Sign) -> Result<LinearMap> {
        stabilizer_sample_with(&self.space, a, &mut self.rng, lambda, GAMMA_FACTORS)
    }

    fn structure(&mut self) -> Result<LiouvilleStructure> {
        let a = self.nonzero();
        LiouvilleStructure::new(self.space, a, self.d, self.sign)
    }

    /// A structure with `‖a‖∞ ≤ ½`, for the floating-point flow checks.
    fn flow_structure(&mut self) -> Result<LiouvilleStructure> {
        let scale = Rational::new(1, 18)?;
        let a = self.nonzero().scale(&scale);
        LiouvilleStructure::new(self.space, a, self.d, self.sign)
    }

    fn point(&mut self) -> Vec<f64> {
        (0..self.space.dim()).map(|_| self.rng.random_range(-2.0..=2.0)).collect()
    }

    fn time(&mut self) -> f64 {
        self.rng.random_range(-1.0..=1.0)
    }
}

fn run_trial(kind: Kind, t: &mut Trial<'_>) -> Result<Outcome> {
    match kind {
        Kind::PotentialExact => {
            let l = t.structure()?;
            let ok = exterior_derivative(&l.theta_form()) == TwoForm::symplectic(&t.space);
            Ok(outcome(ok, || json!({ "a": l.a().to_string() })))
        }
        Kind::ContractionIdentity => {
            let l = t.structure()?;
            let ok = TwoForm::symplectic(&t.space).contract(&l.liouville_field())? == l.theta_form();
            Ok(outcome(ok, || json!({ "a": l.a().to_string() })))
        }
        Kind::CanonicalSpInvariance => {
            let gamma = t.gamma();
            let theta0 = LiouvilleStructure::canonical(t.space).theta_form();
            let ok = pullback_oneform(&gamma.to_polymap(), &theta0)? == theta0;
            Ok(outcome(ok, || json!({ "gamma": gamma })))
        }
        Kind::FlowMatchesRk4 => {
            let l = t.flow_structure()?;
            let (z, time) = (t.point(), t.time());
            let closed = flow_closed_form(&l, time, &z)?;
            let numeric = flow_numeric(&l, time, &z, t.config.rk4_steps as usize)?;
            let err = max_abs_diff(&closed, &numeric);
            Ok(outcome(
                err < t.config.float_tol_flow,
                || json!({ "a": l.a().to_string(), "z": z, "t": time, "closed": closed, "numeric": numeric, "err": err }),
            ))
        }
        Kind::FlowGroupLaw => {
            let l = t.flow_structure()?;
            let (z, s, u) = (t.point(), t.time(), t.time());
            let joint = flow_closed_form(&l, s + u, &z)?;
            let stepped = flow_closed_form(&l, s, &flow_closed_form(&l, u, &z)?)?;
            let err = max_abs_diff(&joint, &stepped);
            Ok(outcome(err < GROUP_LAW_TOL, || json!({ "a": l.a().to_string(), "z": z, "s": s, "t": u, "err": err })))
        }
        Kind::FlowGenerator => {
            let l = t.flow_structure()?;
            let z = t.point();
            let moved = flow_closed_form(&l, GENERATOR_STEP, &z)?;
            let quotient: Vec<f64> = moved.iter().zip(&z).map(|(y, x)| (y - x) / GENERATOR_STEP).collect();
            let field = l.liouville_field().components().eval_f64(&z)?;
            let err = max_abs_diff(&quotient, &field);
            Ok(outcome(
                err < GENERATOR_TOL,
                || json!({ "a": l.a().to_string(), "z": z, "quotient": quotient, "field": field, "err": err }),
            ))
        }
        Kind::FlowScalingLaw => {
            let l = t.flow_structure()?;
            let z = t.point();
            let time = SCALING_TIMES[t.trial as usize % SCALING_TIMES.len()];
            let defect = flow_scaling_defect(&l, time, &z, SCALING_STEP)?;
            Ok(outcome(
                defect < t.config.float_tol_scaling,
                || json!({ "a": l.a().to_string(), "z": z, "t": time, "defect": defect }),
            ))
        }
        Kind::CanonicalFlowAtOne => {
            let l = t.flow_structure()?;
            let z = t.point();
            let flowed = flow_closed_form(&l, 1.0, &z)?;
            let expected: Vec<f64> = z.iter().map(|x| 0.5f64.exp() * x).collect();
            let err = max_abs_diff(&flowed, &expected);
            Ok(outcome(err < CANONICAL_TOL, || json!({ "z": z, "flowed": flowed, "err": err })))
        }
        Kind::ZeroVectorDegeneracy => zero_vector_degeneracy(t),
        Kind::PsiParity => {
            let l = t.structure()?;
            let flipped = LiouvilleStructure::new(t.space, -l.a(), t.d, t.sign)?.psi();
            let expected = if t.d % 2 == 0 { l.psi() } else { -&l.psi() };
            Ok(outcome(flipped == expected, || json!({ "a": l.a().to_string() })))
        }
        Kind::OddDegreeSignRedundancy => {
            let l = t.structure()?;
            let other = LiouvilleStructure::new(t.space, -l.a(), t.d, t.sign.flip())?;
            Ok(outcome(l.theta_form() == other.theta_form(), || json!({ "a": l.a().to_string() })))
        }
        Kind::TranslationConjugation => {
            let l = t.structure()?;
            let shift = l.a().scale(&t.sign.as_rational());
            let tau = translation_map(&t.space, &shift)?;
            let theta0 = LiouvilleStructure::canonical(t.space).theta_form();
            let ok = pullback_oneform(&tau, &theta0)? == l.theta_form();
            Ok(outcome(ok, || json!({ "a": l.a().to_string() })))
        }
        Kind::FConjugation => {
            let l = t.structure()?;
            let mut f = f_map(&t.space, l.a(), t.d, t.sign)?;
            if t.config.inject_fault {
                f = perturb(&f);
            }
            let canonical = LiouvilleStructure::canonical(t.space);
            let ok = is_exact_pullback_equal(&f, &canonical, &l);
            Ok(outcome(ok, || {
                let pulled = pullback_theta(&f, &l).ok();
                json!({
                    "a": l.a().to_string(),
                    "map": f,
                    "mismatch": pulled.map(|p| first_mismatch(&p, &canonical.theta_form())),
                })
            }))
        }
        Kind::AutomorphismSoundness => {
            let l = t.structure()?;
            let gamma = sound_witness(t, &l)?;
            let g = make_automorphism(&l, &gamma)?;
            let ok = is_exact_pullback_equal(&g, &l, &l);
            Ok(outcome(ok, || json!({ "a": l.a().to_string(), "gamma": gamma })))
        }
        Kind::DecompositionRoundTrip => {
            let l = t.structure()?;
            let lambda = t.lambda();
            let gamma = sound_witness(t, &l)?;
            let g = make_automorphism(&l, &gamma)?;
            let r = decompose(&l, &g)?;
            let lambda_ok = match CaseTag::of(&l) {
                CaseTag::Quadratic => r.lambda == Some(lambda.as_rational()),
                _ => r.lambda.is_none(),
            };
            Ok(outcome(
                r.gamma == gamma && lambda_ok && r.case_tag == CaseTag::of(&l),
                || json!({ "a": l.a().to_string(), "gamma": gamma, "decomposition": r }),
            ))
        }
        Kind::AutomorphismGroupClosure => {
            let l = t.structure()?;
            let first = sound_witness(t, &l)?;
            let second = sound_witness(t, &l)?;
            let g1 = make_automorphism(&l, &first)?;
            let g2 = make_automorphism(&l, &second)?;
            let composite = compose_automorphisms(&l, &first, &g1, &g2)?;
            let product = first.compose(&second)?;
            let ok = match decompose(&l, &composite) {
                Ok(r) => r.gamma == product,
                Err(Error::NotAnAutomorphism) => false,
                Err(e) => return Err(e),
            };
            Ok(outcome(ok, || json!({ "a": l.a().to_string(), "first": first, "second": second })))
        }
        Kind::LinearFixedPoint => {
            let l = t.structure()?;
            let gamma = t.gamma();
            let g = make_automorphism(&l, &gamma)?;
            let fixed = l.a().scale(&-t.sign.as_rational());
            let image = g.eval(fixed.entries())?;
            Ok(outcome(
                image == fixed.entries(),
                || json!({ "a": l.a().to_string(), "gamma": gamma, "image": Vector::new(image).to_string() }),
            ))
        }
        Kind::QuadraticLinePreservation => {
            let l = t.structure()?;
            let gamma = sound_witness(t, &l)?;
            let g = make_automorphism(&l, &gamma)?;
            let image = Vector::new(g.eval(l.a().entries())?);
            let ok = image == *l.a() || image == -l.a();
            Ok(outcome(ok, || json!({ "a": l.a().to_string(), "gamma": gamma, "image": image.to_string() })))
        }
        Kind::TranslationNotCanonicalAutomorphism => {
            let a = t.nonzero();
            let canonical = LiouvilleStructure::canonical(t.space);
            let tau = translation_map(&t.space, &a)?;
            let ok = !is_exact_pullback_equal(&tau, &canonical, &canonical);
            Ok(outcome(ok, || json!({ "a": a.to_string() })))
        }
        Kind::NonStabilizerRejected => {
            let l = t.structure()?;
            let gamma = (0..REJECTION_LIMIT)
                .map(|_| t.gamma())
                .find(|g| {
                    let image = g.apply(l.a()).expect("dimension");
                    image != *l.a() && image != -l.a()
                })
                .ok_or_else(|| Error::InternalConsistency("every sampled gamma fixed the line of a".into()))?;
            let rejected = !is_exact_pullback_equal(&gamma.to_polymap(), &l, &l);
            let refused = matches!(make_automorphism(&l, &gamma), Err(Error::Precondition(_)));
            Ok(outcome(
                rejected && refused,
                || json!({ "a": l.a().to_string(), "gamma": gamma, "pullback_rejected": rejected, "construction_refused": refused }),
            ))
        }
        Kind::WrongCenterConjugateRejected => {
            let la = t.structure()?;
            let b = loop {
                let b = t.nonzero();
                if b != *la.a() && b != -la.a() {
                    break b;
                }
            };
            let lb = LiouvilleStructure::new(t.space, b, t.d, t.sign)?;
            let mut tried = Vec::new();
            for _ in 0..WRONG_CENTER_ATTEMPTS {
                let gamma = t.gamma();
                let g = make_automorphism(&lb, &gamma)?;
                if !is_exact_pullback_equal(&g, &la, &la) {
                    return Ok(Outcome::Pass);
                }
                tried.push(gamma);
            }
            Ok(Outcome::Fail(json!({ "a": la.a().to_string(), "b": lb.a().to_string(), "gammas": tried })))
        }
        Kind::QuadraticSignObstruction => {
            let l = t.structure()?;
            let lambda = t.lambda();
            let gamma = t.stabilizer(l.a(), lambda)?;
            let other = l.with_sign(t.sign.flip());
            let rejected = !is_exact_pullback_equal(&gamma.to_polymap(), &l, &other);
            let refused = matches!(make_isomorphism(&l, &other, &gamma), Err(Error::Obstruction(_)));
            Ok(outcome(
                rejected && refused,
                || json!({ "a": l.a().to_string(), "gamma": gamma, "pullback_rejected": rejected, "construction_refused": refused }),
            ))
        }
        Kind::IsomorphismCatalogue => isomorphism_catalogue(t),
    }
}

/// A witness meeting the construction precondition: any `γ`, except a
/// stabilizer sample for `d = 2`.
fn sound_witness(t: &mut Trial<'_>, l: &LiouvilleStructure) -> Result<LinearMap> {
    if CaseTag::of(l) == CaseTag::Quadratic {
        let lambda = t.lambda();
        t.stabilizer(l.a(), lambda)
    } else {
        Ok(t.gamma())
    }
}

/// `g1 ∘ g2`. For `d ≥ 3`, `g1 = f ∘ γ1 ∘ f⁻¹` is applied factor by factor so
/// that `f⁻¹ ∘ g2` cancels before anything is expanded.
fn compose_automorphisms(l: &LiouvilleStructure, gamma1: &LinearMap, g1: &PolyMap, g2: &PolyMap) -> Result<PolyMap> {
    if CaseTag::of(l) != CaseTag::Higher {
        return g1.compose(g2);
    }
    let inner = f_after(l, g2, true)?;
    f_after(l, &gamma1.to_polymap().compose(&inner)?, false)
}

fn zero_vector_degeneracy(t: &mut Trial<'_>) -> Result<Outcome> {
    let space = t.space;
    let zero = LiouvilleStructure::new(space, space.zero(), t.d, t.sign)?;
    let canonical = LiouvilleStructure::canonical(space);
    let gamma = t.gamma();
    let z = t.point();
    let time = t.time();
    let mut mismatches: Vec<&str> = Vec::new();
    let mut expect = |ok: bool, what: &'static str| {
        if !ok {
            mismatches.push(what);
        }
    };
    expect(zero.psi() == canonical.psi(), "psi");
    expect(zero.theta_form() == canonical.theta_form(), "theta");
    expect(zero.liouville_field() == canonical.liouville_field(), "liouville_field");
    expect(flow_closed_form(&zero, time, &z)? == flow_closed_form(&canonical, time, &z)?, "flow_closed_form");
    let steps = t.config.rk4_steps as usize;
    expect(flow_numeric(&zero, time, &z, steps)? == flow_numeric(&canonical, time, &z, steps)?, "flow_numeric");
    let g = make_automorphism(&zero, &gamma)?;
    expect(g == make_automorphism(&canonical, &gamma)?, "make_automorphism");
    expect(decompose(&zero, &g)? == decompose(&canonical, &g)?, "decompose");
    expect(pullback_theta(&g, &zero)? == pullback_theta(&g, &canonical)?, "pullback");
    expect(is_exact_pullback_equal(&g, &zero, &canonical), "is_exact_pullback_equal");
    if t.d >= 3 {
        expect(f_map(&space, &space.zero(), t.d, t.sign)? == PolyMap::identity(space.dim()), "f_map");
        expect(f_map_inverse(&space, &space.zero(), t.d, t.sign)? == PolyMap::identity(space.dim()), "f_map_inverse");
    }
    Ok(outcome(mismatches.is_empty(), || json!({ "gamma": gamma, "z": z, "t": time, "mismatches": mismatches })))
}

fn isomorphism_catalogue(t: &mut Trial<'_>) -> Result<Outcome> {
    let space = t.space;
    let la = t.structure()?;
    let b = t.nonzero();
    // Degree 2 isomorphisms need equal signs; elsewhere vary the target sign.
    let sign_b = if t.d == 2 || t.trial % 2 == 0 { t.sign } else { t.sign.flip() };
    let lb = LiouvilleStructure::new(space, b, t.d, sign_b)?;
    let witness = |what: &str| json!({ "case": what, "a": la.a().to_string(), "b": lb.a().to_string(), "sign_b": sign_b.to_string() });
    match t.d {
        1 => {
            let shift_a = la.a().scale(&la.sign().as_rational());
            let shift_b = lb.a().scale(&lb.sign().as_rational());
            let g = translation_map(&space, &-&shift_b)?.compose(&translation_map(&space, &shift_a)?)?;
            if !is_exact_pullback_equal(&g, &la, &lb) {
                return Ok(Outcome::Fail(witness("translation pair")));
            }
            let tau = translation_map(&space, &shift_a)?;
            let canonical = LiouvilleStructure::canonical(space);
            Ok(outcome(is_exact_pullback_equal(&tau, &la, &canonical), || witness("translation to canonical")))
        }
        2 => {
            let gamma = map_vector_to_vector(&space, la.a(), lb.a())?;
            let ok = is_symplectic(&space, &gamma) && is_exact_pullback_equal(&gamma.to_polymap(), &la, &lb);
            Ok(outcome(ok, || witness("transitivity witness")))
        }
        _ => {
            let g = f_after(&lb, &f_map_inverse(&space, la.a(), t.d, la.sign())?, false)?;
            Ok(outcome(is_exact_pullback_equal(&g, &la, &lb), || witness("f_b o f_a^-1")))
        }
    }
}

/// `f` with the coefficient of its first nonlinear term increased by one.
fn perturb(f: &PolyMap) -> PolyMap {
    let mut components = f.components().to_vec();
    if let Some((i, m)) = components
        .iter()
        .enumerate()
        .find_map(|(i, c)| c.terms().find(|(m, _)| m.degree() > 1).map(|(m, _)| (i, m.clone())))
    {
        let bump = Polynomial::monomial(m, Rational::one());
        components[i] = &components[i] + &bump;
    }
    PolyMap::new(components).expect("same shape")
}

fn first_mismatch(got: &OneForm, expected: &OneForm) -> Value {
    for (i, (g, e)) in got.coefficients().iter().zip(expected.coefficients()).enumerate() {
        if g != e {
            return json!({ "coefficient": i, "difference": (g - e).to_string() });
        }
    }
    Value::Null
}

/// CSV of the closed-form and RK4 flows from `z0` for `t = t_min, t_min + t_step, … ≤ t_max`.
///
/// Columns are `t`, the closed-form point, the numeric point, and the
/// largest absolute coordinate difference.
pub fn emit_flow_trace(
    l: &LiouvilleStructure,
    z0: &[f64],
    t_min: f64,
    t_max: f64,
    t_step: f64,
    rk4_steps: usize,
) -> Result<String> {
    Error::check_dim(l.space().dim(), z0.len())?;
    if !(t_step.is_finite() && t_step > 0.0) {
        return Err(Error::invalid("time step must be positive"));
    }
    if !(t_min.is_finite() && t_max.is_finite()) || t_max < t_min {
        return Err(Error::invalid("time range must satisfy min <= max"));
    }
    if rk4_steps == 0 {
        return Err(Error::invalid("rk4 steps must be at least 1"));
    }
    let n = z0.len();
    let mut out = String::from("t");
    for prefix in ["z", "zn"] {
        for i in 1..=n {
            let _ = write!(out, ",{prefix}_{i}");
        }
    }
    out.push_str(",err\n");
    let rows = ((t_max - t_min) / t_step + 1e-9).floor() as u64 + 1;
    for k in 0..rows {
        let t = t_min + k as f64 * t_step;
        let closed = flow_closed_form(l, t, z0)?;
        let numeric = flow_numeric(l, t, z0, rk4_steps)?;
        let _ = write!(out, "{t}");
        for x in closed.iter().chain(&numeric) {
            let _ = write!(out, ",{x}");
        }
        let _ = writeln!(out, ",{}", max_abs_diff(&closed, &numeric));
    }
    Ok(out)
}

/// A sampled element of `Sp` together with its exact membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpSample {
    pub m: usize,
    pub seed: u64,
    pub count: usize,
    pub matrix: LinearMap,
    pub is_symplectic: bool,
}

pub fn sample_sp(m: usize, seed: u64, count: usize) -> Result<SpSample> {
    let space = SymplecticSpace::new(m)?;
    let matrix = random_symplectic_with(&space, &mut seeded_rng(seed), count);
    let is_symplectic = is_symplectic(&space, &matrix);
    Ok(SpSample { m, seed, count, matrix, is_symplectic })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(m: Vec<usize>, degrees: Vec<u32>, trials: u32) -> VerifyConfig {
        VerifyConfig { m_list: m, degrees, trials, ..VerifyConfig::default() }
    }

    #[test]
    fn default_matches_documented_values() {
        let c = VerifyConfig::default();
        assert_eq!(c.m_list, vec![1, 2]);
        assert_eq!(c.degrees, vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(c.trials, 50);
        assert_eq!(c.seed, 42);
        assert_eq!(c.float_tol_flow, 1e-8);
        assert_eq!(c.float_tol_scaling, 1e-5);
        assert_eq!(c.rk4_steps, 2000);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let base = small(vec![1], vec![0], 1);
        let bad = [
            VerifyConfig { trials: 0, ..base.clone() },
            VerifyConfig { m_list: vec![], ..base.clone() },
            VerifyConfig { m_list: vec![0], ..base.clone() },
            VerifyConfig { degrees: vec![1, 1], ..base.clone() },
            VerifyConfig { signs: vec![], ..base.clone() },
            VerifyConfig { float_tol_flow: 0.0, ..base.clone() },
            VerifyConfig { float_tol_scaling: f64::NAN, ..base.clone() },
            VerifyConfig { rk4_steps: 0, ..base.clone() },
            VerifyConfig { inject_fault: true, ..base.clone() },
        ];
        for c in bad {
            assert!(matches!(run_verification_suite(&c), Err(Error::InvalidArgument(_))), "{c:?}");
        }
    }

    #[test]
    fn every_kind_is_planned_somewhere() {
        let plans = plan(&small(vec![1], (0..=4).collect(), 1));
        for k in KINDS {
            assert!(plans.iter().any(|p| p.kind == k), "{:?}", k);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = invariants().iter().map(|i| i.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), KINDS.len());
    }

    #[test]
    fn applicability() {
        assert!(Kind::OddDegreeSignRedundancy.applies(3));
        assert!(!Kind::OddDegreeSignRedundancy.applies(4));
        assert!(!Kind::OddDegreeSignRedundancy.applies(0));
        assert!(Kind::FConjugation.applies(6));
        assert!(!Kind::FConjugation.applies(2));
        assert!(Kind::PotentialExact.applies(0));
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let c = small(vec![1], (0..=3).collect(), 2);
        let r1 = run_verification_suite(&c).unwrap();
        assert!(r1.is_success(), "{}", r1.to_json());
        let r2 = run_verification_suite(&c).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        assert_eq!(r1.summary.total, r1.checks.len());
    }

    #[test]
    fn injected_fault_is_caught_with_witness() {
        let c = VerifyConfig { inject_fault: true, ..small(vec![1], vec![3], 1) };
        let r = run_verification_suite(&c).unwrap();
        assert!(!r.is_success());
        let failed: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Fail).collect();
        assert!(failed.iter().all(|c| c.name == "f_conjugation"));
        assert!(!failed.is_empty());
        assert!(failed[0].witness.as_ref().unwrap()["mismatch"].is_object());
    }

    #[test]
    fn selection_runs_only_named_checks() {
        let r = run_invariants(&small(vec![1], vec![0, 1], 1), &["psi_parity"]).unwrap();
        assert_eq!(r.checks.len(), 2);
        assert!(r.checks.iter().all(|c| c.name == "psi_parity" && c.parameters["d"] == json!(1)));
        assert!(run_invariants(&small(vec![1], vec![0], 1), &["nonsense"]).is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        let a = trial_seed(42, 0, 0);
        assert_ne!(a, trial_seed(42, 0, 1));
        assert_ne!(a, trial_seed(42, 1, 0));
        assert_ne!(a, trial_seed(43, 0, 0));
    }

    #[test]
    fn flow_trace_examples() {
        let s = SymplecticSpace::new(1).unwrap();
        let canonical = LiouvilleStructure::canonical(s);
        let csv = emit_flow_trace(&canonical, &[1.0, 0.0], 0.0, 1.0, 0.5, 2000).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,z_1,z_2,zn_1,zn_2,err");
        assert_eq!(lines.len(), 4);
        let last: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[0], 1.0);
        assert!((last[1] - 1.64872).abs() < 1e-5);

        let single = emit_flow_trace(&canonical, &[1.0, 0.0], 0.0, 0.0, 0.1, 10).unwrap();
        assert_eq!(single.lines().count(), 2);
        assert!(single.lines().nth(1).unwrap().ends_with(",0"));

        let l = LiouvilleStructure::new(s, Vector::from_ints(&[1, 0]), 2, Sign::Plus).unwrap();
        let csv = emit_flow_trace(&l, &[0.0, 1.0], -1.0, 1.0, 0.25, 2000).unwrap();
        for row in csv.lines().skip(1) {
            let err: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert!(err < 1e-8, "{row}");
        }
        assert!(emit_flow_trace(&l, &[0.0, 1.0], 0.0, 1.0, 0.0, 10).is_err());
        assert!(emit_flow_trace(&l, &[0.0], 0.0, 1.0, 0.1, 10).is_err());
    }

    #[test]
    fn sample_sp_examples() {
        let id = sample_sp(2, 1, 0).unwrap();
        assert_eq!(id.matrix, LinearMap::identity(4));
        assert!(id.is_symplectic);
        let s = sample_sp(2, 7, 10).unwrap();
        assert!(s.is_symplectic);
        assert_eq!(s, sample_sp(2, 7, 10).unwrap());
    }
}
