//! Darboux polynomials with the Jacobian determinant as cofactor.
//!
//! A polynomial `P` with `P∘Φ = J·P`, `J = det DΦ`, makes `dx/P` an invariant
//! volume form, and the ratio of two such polynomials is a first integral.
//! The search fixes a degree bound, clears denominators in `P∘Φ − J·P`, and
//! reads off an exact linear system for the coefficients of `P`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::dynamics::{BirationalMap, DynamicsError};
use crate::poly::{
    nullspace_exact, qi, rank_over_polynomials, substitute, MinorWitness, Monomial, PolyError,
    Polynomial, Rational, RationalFunction, Var,
};
use crate::scheme::step_var;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DarbouxError {
    #[error("map has dimension {0}, expected 2")]
    NotPlanar(usize),
    #[error("parameter {0} must be bound before searching")]
    UnboundParameter(String),
    #[error("cofactor identity does not hold")]
    CofactorMismatch,
    #[error("ratio is not invariant under the map")]
    NotInvariant,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A verified solution of `P∘Φ = J·P`.
#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxCertificate {
    p: Polynomial,
    cofactor: RationalFunction,
    maxdeg: u32,
    witness: Polynomial,
}

impl DarbouxCertificate {
    /// Checks `P` against `map` and records the cleared residual.
    pub fn new(map: &BirationalMap, p: Polynomial, maxdeg: u32) -> Result<Self, DarbouxError> {
        let (_, cofactor) = map.jacobian()?;
        let witness = cofactor_witness(map, &p, &cofactor)?;
        Ok(DarbouxCertificate {
            p,
            cofactor,
            maxdeg,
            witness,
        })
    }

    pub fn p(&self) -> &Polynomial {
        &self.p
    }

    pub fn cofactor(&self) -> &RationalFunction {
        &self.cofactor
    }

    pub fn maxdeg(&self) -> u32 {
        self.maxdeg
    }

    /// `num(P∘Φ)·den(J) − num(J)·P·den(P∘Φ)`.
    pub fn witness(&self) -> &Polynomial {
        &self.witness
    }

    pub fn is_verified(&self) -> bool {
        self.witness.is_zero()
    }

    /// `|J·P − P∘Φ| / max(|J·P|, |P∘Φ|)` at a float state.
    pub fn numeric_residual(
        &self,
        map: &BirationalMap,
        state: &[f64],
    ) -> Result<f64, DarbouxError> {
        let fwd = map
            .forward()
            .ok_or(DynamicsError::NoSymbolicForm(map.components()))?;
        let pt: BTreeMap<Var, f64> = map.state_vars().into_iter().zip(state.iter().cloned()).collect();
        let image: BTreeMap<Var, f64> = map
            .state_vars()
            .into_iter()
            .zip(fwd.iter().map(|r| r.eval(&pt)).collect::<Result<Vec<_>, _>>()?)
            .collect();
        let jp = self.cofactor.eval(&pt)? * self.p.eval(&pt)?;
        let pphi = self.p.eval(&image)?;
        let scale = jp.abs().max(pphi.abs());
        Ok(if scale == 0.0 { 0.0 } else { (jp - pphi).abs() / scale })
    }
}

impl fmt::Display for DarbouxCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "P = {}", self.p)?;
        writeln!(f, "cofactor = {}", self.cofactor)?;
        writeln!(f, "maxdeg = {}", self.maxdeg)?;
        write!(
            f,
            "witness = {}",
            if self.witness.is_zero() { "0" } else { "nonzero" }
        )
    }
}

fn cofactor_witness(
    map: &BirationalMap,
    p: &Polynomial,
    cofactor: &RationalFunction,
) -> Result<Polynomial, DarbouxError> {
    let fwd = map
        .forward()
        .ok_or(DynamicsError::NoSymbolicForm(map.components()))?;
    let sigma: BTreeMap<Var, RationalFunction> =
        map.state_vars().into_iter().zip(fwd.iter().cloned()).collect();
    let pphi = substitute(p, &sigma)?;
    let jp = RationalFunction::new(cofactor.num() * p, cofactor.den().clone())?;
    Ok(pphi.cross_difference(&jp))
}

/// `∂(x̃, ỹ)/∂(x, y)` of a planar map.
pub fn jacobian_det_2d(m: &BirationalMap) -> Result<RationalFunction, DarbouxError> {
    if m.dim() != 2 {
        return Err(DarbouxError::NotPlanar(m.dim()));
    }
    Ok(m.jacobian()?.1)
}

/// All monomials in `vars` of total degree at most `maxdeg`, ascending.
pub fn monomials_up_to(vars: &[Var], maxdeg: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![Monomial::one()];
    for _ in 0..maxdeg {
        let mut next = BTreeSet::new();
        for m in &frontier {
            for v in vars {
                next.insert(m.mul(&Monomial::var(v.clone(), 1)));
            }
        }
        frontier = next.into_iter().collect();
        out.extend(frontier.iter().cloned());
    }
    out.sort();
    out
}

/// Basis of the Darboux polynomials of degree at most `maxdeg`.
///
/// Every parameter of the map must be bound. Works in any dimension with a
/// symbolic forward map, but the linear system grows quickly past dimension 2.
pub fn find_darboux(m: &BirationalMap, maxdeg: u32) -> Result<Vec<DarbouxCertificate>, DarbouxError> {
    if let Some(v) = m.parameters().into_iter().next() {
        return Err(DarbouxError::UnboundParameter(v.to_string()));
    }
    let fwd = m
        .forward()
        .ok_or(DynamicsError::NoSymbolicForm(m.components()))?;
    let (_, j) = m.jacobian()?;
    let vars = m.state_vars();

    // numerators and a group index into the distinct denominators
    let mut dens: Vec<Polynomial> = Vec::new();
    let mut parts: Vec<(Polynomial, Option<usize>)> = Vec::new();
    for r in fwd {
        if let Some(poly) = r.as_polynomial() {
            parts.push((poly, None));
            continue;
        }
        let g = match dens.iter().position(|d| d == r.den()) {
            Some(g) => g,
            None => {
                dens.push(r.den().clone());
                dens.len() - 1
            }
        };
        parts.push((r.num().clone(), Some(g)));
    }
    let l: Polynomial = dens.iter().map(|d| d.pow(maxdeg)).product();
    let jl = j.num() * &l;

    let mut num_pows: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
    let mut den_pows: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
    let ansatz = monomials_up_to(&vars, maxdeg);
    let mut columns = Vec::with_capacity(ansatz.len());
    for mono in &ansatz {
        let mut image = Polynomial::one();
        let mut used = vec![0u32; dens.len()];
        for (i, v) in vars.iter().enumerate() {
            let e = mono.degree_in(v);
            if e == 0 {
                continue;
            }
            let pw = num_pows
                .entry((i, e))
                .or_insert_with(|| parts[i].0.pow(e));
            image = &image * &*pw;
            if let Some(g) = parts[i].1 {
                used[g] += e;
            }
        }
        for (g, u) in used.iter().enumerate() {
            let extra = maxdeg - u;
            if extra > 0 {
                let dp = den_pows.entry((g, extra)).or_insert_with(|| dens[g].pow(extra));
                image = &image * &*dp;
            }
        }
        columns.push(j.den() * &image - jl.mul_monomial(mono));
    }

    let ncols = ansatz.len();
    let mut rows: BTreeMap<&Monomial, Vec<Rational>> = BTreeMap::new();
    for (k, col) in columns.iter().enumerate() {
        for (mono, c) in col.terms() {
            rows.entry(mono).or_insert_with(|| vec![qi(0); ncols])[k] = c.clone();
        }
    }
    let matrix: Vec<Vec<Rational>> = rows.into_values().collect();
    nullspace_exact(&matrix, ncols)
        .into_iter()
        .map(|u| {
            let p = Polynomial::from_terms(
                ansatz
                    .iter()
                    .zip(u)
                    .map(|(mono, c)| (mono.clone(), Rational::from_integer(c))),
            )
            .primitive();
            let witness = cofactor_witness(m, &p, &j)?;
            Ok(DarbouxCertificate {
                p,
                cofactor: j.clone(),
                maxdeg,
                witness,
            })
        })
        .collect()
}

/// Whether `target` lies in the rational span of the given polynomials.
pub fn in_span(basis: &[&Polynomial], target: &Polynomial) -> bool {
    let mut monos: BTreeSet<&Monomial> = BTreeSet::new();
    for p in basis.iter().chain(std::iter::once(&target)) {
        monos.extend(p.terms().map(|(m, _)| m));
    }
    let col = |p: &Polynomial| -> Vec<Rational> { monos.iter().map(|m| p.coeff(m)).collect() };
    // columns are the polynomials; solve for a vanishing combination with a
    // nonzero target coefficient
    let ncols = basis.len() + 1;
    let cols: Vec<Vec<Rational>> = basis.iter().map(|p| col(p)).chain(std::iter::once(col(target))).collect();
    let rows: Vec<Vec<Rational>> = (0..monos.len())
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    nullspace_exact(&rows, ncols)
        .iter()
        .any(|v| !num_traits::Zero::is_zero(&v[ncols - 1]))
}

/// The invariant form `dx_1 ∧ ... ∧ dx_d / P`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantMeasure {
    pub vars: Vec<Var>,
    pub density_denominator: Polynomial,
}

impl fmt::Display for InvariantMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = self
            .vars
            .iter()
            .map(|v| format!("d{v}"))
            .collect::<Vec<_>>()
            .join(" ^ ");
        write!(f, "{form} / ({})", self.density_denominator)
    }
}

pub fn invariant_measure(
    map: &BirationalMap,
    cert: &DarbouxCertificate,
) -> Result<InvariantMeasure, DarbouxError> {
    if !cert.is_verified() {
        return Err(DarbouxError::CofactorMismatch);
    }
    Ok(InvariantMeasure {
        vars: map.state_vars(),
        density_denominator: cert.p.clone(),
    })
}

/// `K = P₂/P₁`, checked exactly for `K∘Φ = K`.
pub fn first_integral(
    map: &BirationalMap,
    c1: &DarbouxCertificate,
    c2: &DarbouxCertificate,
) -> Result<RationalFunction, DarbouxError> {
    if !c1.is_verified() || !c2.is_verified() || c1.cofactor != c2.cofactor {
        return Err(DarbouxError::CofactorMismatch);
    }
    let k = RationalFunction::new(c2.p.clone(), c1.p.clone())?;
    let fwd = map
        .forward()
        .ok_or(DynamicsError::NoSymbolicForm(map.components()))?;
    let sigma: BTreeMap<Var, RationalFunction> =
        map.state_vars().into_iter().zip(fwd.iter().cloned()).collect();
    if k.substitute(&sigma)? != k {
        return Err(DarbouxError::NotInvariant);
    }
    Ok(k)
}

/// Coefficients in `h` after the continuum substitution, and the five checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumReport {
    pub p1_coefficients: Vec<Polynomial>,
    pub p2_coefficients: Vec<Polynomial>,
    pub p1_constant_is_one: bool,
    pub p1_linear_vanishes: bool,
    pub p2_constant_vanishes: bool,
    pub p2_linear_vanishes: bool,
    pub p2_quadratic_is_4h: bool,
}

impl ContinuumReport {
    pub fn all_hold(&self) -> bool {
        self.p1_constant_is_one
            && self.p1_linear_vanishes
            && self.p2_constant_vanishes
            && self.p2_linear_vanishes
            && self.p2_quadratic_is_4h
    }
}

/// Momentum symbol used in the continuum substitution `y = x + h p`.
pub const MOMENTUM: &str = "p";

/// Substitutes `x1' = x1 + h·p` into `P₁`, `P₂` (already expressed in the
/// step `h`) and compares the low-order coefficients in `h` with
/// `P₁ = 1 + O(h²)` and `P₂ = 4·H·h² + O(h³)`.
pub fn continuum_limit_check(p1: &Polynomial, p2: &Polynomial, hamiltonian: &Polynomial) -> ContinuumReport {
    let h = step_var();
    let y = Polynomial::state(1, 0) + Polynomial::var(h.clone()) * Polynomial::param(MOMENTUM);
    let sigma = BTreeMap::from([(Var::state(1, 1), y)]);
    let c1 = p1.compose(&sigma).coefficients_in(&h);
    let c2 = p2.compose(&sigma).coefficients_in(&h);
    let at = |c: &Vec<Polynomial>, k: usize| c.get(k).cloned().unwrap_or_else(Polynomial::zero);
    ContinuumReport {
        p1_constant_is_one: at(&c1, 0) == Polynomial::one(),
        p1_linear_vanishes: at(&c1, 1).is_zero(),
        p2_constant_vanishes: at(&c2, 0).is_zero(),
        p2_linear_vanishes: at(&c2, 1).is_zero(),
        p2_quadratic_is_4h: at(&c2, 2) == hamiltonian.scale(&qi(4)),
        p1_coefficients: c1,
        p2_coefficients: c2,
    }
}

/// The family `λ·P₁ + P₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub p1: Polynomial,
    pub p2: Polynomial,
}

impl Pencil {
    pub fn new(p1: Polynomial, p2: Polynomial) -> Self {
        Pencil { p1, p2 }
    }

    /// The level `λ = −P₂/P₁` through a point.
    pub fn level(&self, point: &BTreeMap<Var, f64>) -> Result<f64, PolyError> {
        let a = self.p1.eval(point)?;
        if a == 0.0 {
            return Err(PolyError::DenominatorVanished);
        }
        Ok(-self.p2.eval(point)? / a)
    }
}

impl fmt::Display for Pencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda*({}) + {}", self.p1, self.p2)
    }
}

/// Evidence that one pencil member is outside the other pencil's span: a
/// nonvanishing 3×3 minor of the coefficient matrix of `[A₁; A₂; member]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanWitness {
    /// `true` if the member comes from the second pencil.
    pub from_second: bool,
    /// `0` for `P₁`, `1` for `P₂`.
    pub member: usize,
    /// Monomials indexing the columns of the minor.
    pub monomials: Vec<Monomial>,
    pub minor: MinorWitness,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PencilComparison {
    Equal,
    Different(SpanWitness),
}

/// Compares `span{P₁, P₂}` and `span{Q₁, Q₂}` over the field of rational
/// functions in the parameters, using the state monomials as coordinates.
pub fn pencil_compare(p: &Pencil, q: &Pencil) -> PencilComparison {
    let mut monos: BTreeSet<Monomial> = BTreeSet::new();
    for poly in [&p.p1, &p.p2, &q.p1, &q.p2] {
        monos.extend(poly.coefficients_by(Var::is_state).into_keys());
    }
    let monos: Vec<Monomial> = monos.into_iter().collect();
    let row = |poly: &Polynomial| -> Vec<Polynomial> {
        let c = poly.coefficients_by(Var::is_state);
        monos
            .iter()
            .map(|m| c.get(m).cloned().unwrap_or_else(Polynomial::zero))
            .collect()
    };
    let pr = [row(&p.p1), row(&p.p2)];
    let qr = [row(&q.p1), row(&q.p2)];
    for (from_second, base, candidates) in [(true, &pr, &qr), (false, &qr, &pr)] {
        let base_rank = rank_over_polynomials(base).0;
        for (member, r) in candidates.iter().enumerate() {
            let mut m: Vec<Vec<Polynomial>> = base.to_vec();
            m.push(r.clone());
            let (rank, witness) = rank_over_polynomials(&m);
            if rank > base_rank {
                let minor = witness.expect("positive rank has a witness");
                return PencilComparison::Different(SpanWitness {
                    from_second,
                    member,
                    monomials: minor.cols.iter().map(|&c| monos[c].clone()).collect(),
                    minor,
                });
            }
        }
    }
    PencilComparison::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::solve_forward;
    use crate::poly::{parse_polynomial, q};
    use crate::scheme::{discretize, PolyOdeSystem};

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn bound_map(order: usize, rhs: &[&str], values: &[(&str, Rational)]) -> BirationalMap {
        let sys = PolyOdeSystem::new(order, rhs.iter().map(|s| p(s)).collect()).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        let vals = values.iter().map(|(k, v)| (Var::param(k), v.clone())).collect();
        m.bind(&vals).unwrap()
    }

    #[test]
    fn monomial_enumeration() {
        let vars = [Var::state(1, 0), Var::state(1, 1)];
        assert_eq!(monomials_up_to(&vars, 0).len(), 1);
        assert_eq!(monomials_up_to(&vars, 2).len(), 6);
        assert_eq!(monomials_up_to(&vars, 4).len(), 15);
    }

    #[test]
    fn constant_darboux_iff_unit_jacobian() {
        let free = bound_map(2, &["0"], &[("h", q(1, 10))]);
        let certs = find_darboux(&free, 0).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].p(), &Polynomial::one());
        let lv = bound_map(1, &["x1 - x1*x2", "x1*x2 - x2"], &[("h", q(1, 10))]);
        assert!(find_darboux(&lv, 0).unwrap().is_empty());
    }

    #[test]
    fn lotka_volterra_has_xy() {
        let lv = bound_map(1, &["x1 - x1*x2", "x1*x2 - x2"], &[("h", q(1, 10))]);
        let certs = find_darboux(&lv, 2).unwrap();
        assert!(certs.iter().all(DarbouxCertificate::is_verified));
        let ps: Vec<&Polynomial> = certs.iter().map(DarbouxCertificate::p).collect();
        assert!(in_span(&ps, &p("x1*x2")));
        let m = invariant_measure(&lv, &DarbouxCertificate::new(&lv, p("x1*x2"), 2).unwrap()).unwrap();
        assert_eq!(m.to_string(), "dx1 ^ dx2 / (x1*x2)");
    }

    #[test]
    fn unbound_parameters_rejected() {
        let sys = PolyOdeSystem::new(2, vec![p("-a*x1^3")]).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        assert!(matches!(find_darboux(&m, 2), Err(DarbouxError::UnboundParameter(_))));
    }

    #[test]
    fn identical_certificates_give_unit_integral() {
        let lv = bound_map(1, &["x1 - x1*x2", "x1*x2 - x2"], &[("h", q(1, 10))]);
        let c = DarbouxCertificate::new(&lv, p("x1*x2"), 2).unwrap();
        let k = first_integral(&lv, &c, &c).unwrap();
        assert_eq!(k, RationalFunction::from_poly(Polynomial::one()));
        let bad = DarbouxCertificate::new(&lv, p("x1"), 1).unwrap();
        assert!(!bad.is_verified());
        assert_eq!(invariant_measure(&lv, &bad), Err(DarbouxError::CofactorMismatch));
    }

    #[test]
    fn pencil_self_and_rescaled() {
        let a = Pencil::new(p("1 + b*x1"), p("x1^2*x1'^2 - b*x1*x1'"));
        assert_eq!(pencil_compare(&a, &a), PencilComparison::Equal);
        let scaled = Pencil::new(a.p2.scale(&q(3, 2)), a.p1.scale(&qi(-7)));
        assert_eq!(pencil_compare(&a, &scaled), PencilComparison::Equal);
        let other = Pencil::new(p("1"), a.p2.clone());
        assert!(matches!(pencil_compare(&a, &other), PencilComparison::Different(_)));
    }
}
