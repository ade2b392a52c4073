//! Kahan-type discretization of polynomial ODEs of any order: exact
//! symbolic schemes, the birational maps they define, numerical orbits and
//! spectra, and Darboux polynomial searches.

pub mod casebook;
pub mod darboux;
pub mod dynamics;
pub mod poly;
pub mod scheme;

pub use darboux::{DarbouxCertificate, DarbouxError, Pencil, PencilComparison};
pub use dynamics::{solve_forward, BirationalMap, DynamicsError, NumericMap, Orbit, OrbitStatus};
pub use poly::{parse_polynomial, Monomial, PolyError, Polynomial, Rational, RationalFunction, Var};
pub use scheme::{discretize, ImplicitScheme, PolyOdeSystem, SchemeError};
