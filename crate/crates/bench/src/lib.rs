//! Shared fixtures for the benchmarks.

use kahan_core::casebook::{beam_lagrangian, float_params, quartic_oscillator, BeamParams, QuarticParams};
use kahan_core::poly::{q, qi};
use kahan_core::{BirationalMap, NumericMap};

pub fn quartic_params() -> QuarticParams {
    QuarticParams::new(qi(1), qi(2), qi(3), qi(5), q(1, 10))
}

/// The quartic oscillator map with every parameter bound.
pub fn quartic_map() -> BirationalMap {
    quartic_oscillator(Some(&quartic_params())).expect("quartic map").map
}

pub fn quartic_numeric() -> NumericMap {
    NumericMap::new(&quartic_map(), 0.1, &Default::default()).expect("compiles")
}

/// Normal form with `ε = 1`, `δ = 1/4` and on-site weights.
pub fn beam_params() -> BeamParams {
    BeamParams::on_site(qi(0), qi(0), qi(0), q(1, 10))
        .normal_form(1, q(1, 4))
        .expect("valid normal form")
}

pub fn beam_lagrangian_numeric() -> NumericMap {
    let p = beam_params();
    let map = beam_lagrangian(&p.coefficients()).expect("beam map").map;
    NumericMap::new(&map, 0.1, &float_params(&p.bindings())).expect("compiles")
}

/// A window next to the saddle-center fixed point `√(3/2)`.
pub fn beam_window() -> Vec<f64> {
    let w = 1.5f64.sqrt();
    vec![w + 1e-3, w, w, w]
}
