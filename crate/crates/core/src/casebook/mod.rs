//! Worked examples: Lotka–Volterra, the quartic oscillator, the Weierstrass
//! case under plain Kahan, and two discretizations of a nonlinear beam.

mod beam;
mod fixed_points;
mod lagrangian;
mod lotka_volterra;
mod quartic;
mod weierstrass;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::darboux::DarbouxError;
use crate::dynamics::DynamicsError;
use crate::poly::{PolyError, Polynomial, Rational, Var};
use crate::scheme::SchemeError;

pub use beam::{
    beam_measure_check, beam_symmetric, expected_f2, expected_f4, BeamCoefficients, BeamParams,
    BeamSymmetric, MeasureReport,
};
pub use fixed_points::{
    beam_fixed_point_analysis, exact_fixed_point_residual, rational_sqrt, BeamMapKind,
    FixedPointReport,
};
pub use lagrangian::{
    beam_lagrangian, discrete_euler_lagrange, expected_f2_hat, expected_f4_hat,
    symplecticity_check, BeamLagrangian, DiscreteLagrangian, OstrogradskyState,
    OstrogradskyTransform, SymplecticReport,
};
pub use lotka_volterra::{lotka_volterra, LotkaVolterra};
pub use quartic::{
    is_odd_symmetric, quartic_hamiltonian, quartic_oscillator, QrtCoefficients, QuarticCase,
    QuarticParams,
};
pub use weierstrass::{
    additive_pencil, eliminate_linear, kahan_weierstrass, reduced_qrt_pencil, WeierstrassCase,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("parameter {0} must be nonzero")]
    ZeroParameter(&'static str),
    #[error("{name} coefficients sum to {sum}, expected 1")]
    AffineConstraintViolated { name: &'static str, sum: String },
    #[error("no real fixed point for these parameters")]
    NoRealFixedPoint,
    #[error("epsilon must be 1 or -1")]
    InvalidEpsilon,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn sym(name: &str) -> Polynomial {
    Polynomial::param(name)
}

fn c(r: Rational) -> Polynomial {
    Polynomial::constant(r)
}

/// `x_1^(k)`.
fn w(k: i32) -> Polynomial {
    Polynomial::state(1, k)
}

/// Float values for a set of exact parameter bindings.
pub fn float_params(values: &BTreeMap<Var, Rational>) -> BTreeMap<Var, f64> {
    values
        .iter()
        .map(|(k, v)| (k.clone(), crate::poly::rational_to_f64(v)))
        .collect()
}
