//! Browser bindings for three operations of `liouville-core`.
//!
//! Each export takes plain strings and numbers and returns a CSV or JSON
//! string, so the page needs no glue beyond what `wasm-bindgen` generates.
//! The `*_impl` functions hold the logic and are what the native tests call.

use liouville_core::autgroup::{decompose, is_exact_pullback_equal, make_automorphism, CaseTag};
use liouville_core::liouville::LiouvilleStructure;
use liouville_core::suite;
use liouville_core::symplectic::{random_symplectic, stabilizer_sample, Sign, SymplecticSpace, Vector};
use serde_json::json;
use wasm_bindgen::prelude::*;

const GAMMA_FACTORS: usize = 3;

fn structure(a: &str, degree: u32, sign: &str) -> Result<LiouvilleStructure, String> {
    let a: Vector = a.parse().map_err(|e| format!("a: {e}"))?;
    if a.is_empty() || a.len() % 2 != 0 {
        return Err("a needs an even, nonzero number of coordinates".into());
    }
    let sign: Sign = sign.parse().map_err(|e| format!("sign: {e}"))?;
    let space = SymplecticSpace::new(a.len() / 2).map_err(|e| e.to_string())?;
    LiouvilleStructure::new(space, a, degree, sign).map_err(|e| e.to_string())
}

fn parse_point(z: &str) -> Result<Vec<f64>, String> {
    z.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("z: {x:?}: {e}"))).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn flow_trace_impl(
    a: &str,
    z: &str,
    degree: u32,
    sign: &str,
    t_min: f64,
    t_max: f64,
    t_step: f64,
    rk4_steps: usize,
) -> Result<String, String> {
    let l = structure(a, degree, sign)?;
    let z = parse_point(z)?;
    suite::emit_flow_trace(&l, &z, t_min, t_max, t_step, rk4_steps).map_err(|e| e.to_string())
}

pub fn sample_sp_impl(m: usize, seed: u64, count: usize) -> Result<String, String> {
    let s = suite::sample_sp(m, seed, count).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&s).expect("plain data"))
}

/// Builds the automorphism for a sampled `γ`, checks it exactly and
/// recovers `γ` from it. For `d = 2`, `γ` is drawn from the stabilizer of
/// `a`, with `γa = −a` when `seed` is odd.
pub fn automorphism_impl(a: &str, degree: u32, sign: &str, seed: u64) -> Result<String, String> {
    let l = structure(a, degree, sign)?;
    let space = *l.space();
    let gamma = if CaseTag::of(&l) == CaseTag::Quadratic {
        let lambda = if seed % 2 == 0 { Sign::Plus } else { Sign::Minus };
        stabilizer_sample(&space, l.a(), seed, lambda, GAMMA_FACTORS).map_err(|e| e.to_string())?
    } else {
        random_symplectic(&space, seed, GAMMA_FACTORS)
    };
    let g = make_automorphism(&l, &gamma).map_err(|e| e.to_string())?;
    let exact = is_exact_pullback_equal(&g, &l, &l);
    let recovered = decompose(&l, &g).map_err(|e| e.to_string())?;
    Ok(json!({
        "case": CaseTag::of(&l),
        "gamma": gamma,
        "map": g,
        "map_degree": g.degree(),
        "is_automorphism": exact,
        "decomposition": recovered,
        "round_trip": recovered.gamma == gamma,
    })
    .to_string())
}

/// CSV of the closed-form flow next to RK4, one row per time step.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn flow_trace(
    a: &str,
    z: &str,
    degree: u32,
    sign: &str,
    t_min: f64,
    t_max: f64,
    t_step: f64,
    rk4_steps: usize,
) -> Result<String, JsValue> {
    flow_trace_impl(a, z, degree, sign, t_min, t_max, t_step, rk4_steps).map_err(|e| JsValue::from_str(&e))
}

/// JSON `{m, seed, count, matrix, is_symplectic}`.
#[wasm_bindgen]
pub fn sample_sp(m: usize, seed: u64, count: usize) -> Result<String, JsValue> {
    sample_sp_impl(m, seed, count).map_err(|e| JsValue::from_str(&e))
}

/// JSON describing the automorphism built from a seeded `γ`.
#[wasm_bindgen]
pub fn automorphism(a: &str, degree: u32, sign: &str, seed: u64) -> Result<String, JsValue> {
    automorphism_impl(a, degree, sign, seed).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn flow_trace_has_expected_header() {
        let csv = flow_trace_impl("1,0", "0,1", 2, "+", -1.0, 1.0, 0.5, 2000).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "t,z_1,z_2,zn_1,zn_2,err");
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(flow_trace_impl("1,0,0", "0,1", 2, "+", 0.0, 1.0, 0.5, 10).is_err());
        assert!(flow_trace_impl("1,0", "0,x", 2, "+", 0.0, 1.0, 0.5, 10).is_err());
        assert!(flow_trace_impl("1,0", "0,1", 2, "?", 0.0, 1.0, 0.5, 10).is_err());
        assert!(automorphism_impl("", 1, "+", 0).is_err());
        assert!(sample_sp_impl(0, 0, 1).is_err());
    }

    #[test]
    fn sampled_matrix_is_symplectic() {
        let v: Value = serde_json::from_str(&sample_sp_impl(2, 7, 10).unwrap()).unwrap();
        assert_eq!(v["is_symplectic"], true);
    }

    #[test]
    fn automorphisms_check_out_for_each_case() {
        for (a, d) in [("0,0", 0), ("1,2", 1), ("1,-1/2", 2), ("1,-1/2", 2), ("2,1", 3), ("1,0,0,1", 4)] {
            for seed in [0, 1] {
                let v: Value = serde_json::from_str(&automorphism_impl(a, d, "-", seed).unwrap()).unwrap();
                assert_eq!(v["is_automorphism"], true, "{a} {d}");
                assert_eq!(v["round_trip"], true, "{a} {d}");
            }
        }
    }
}
