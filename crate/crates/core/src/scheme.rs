//! Polynomial ODE systems and their symmetric higher-order Kahan-type
//! discretization.
//!
//! For an order-`n` system `d^n x_i/dt^n = f_i(x)` with `deg f_i <= n+1`, each
//! monomial of `f_i` is padded with the dummy `x_0 = 1` up to `n+1` factors and
//! replaced by the average over all assignments of the shift levels
//! `0, 1, ..., n` to those factors. The `n`-th derivative becomes the `n`-th
//! forward difference, so the scheme for component `i` reads
//!
//! ```text
//! Σ_k (-1)^(n-k) C(n,k) x_i^(k) - h^n · sym(f_i) = 0.
//! ```
//!
//! Each equation is jointly linear in the highest shifts `x^(n)` and in the
//! lowest shifts `x^(0)`, which is what makes the implicit scheme an explicit
//! birational map.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use thiserror::Error;

use crate::poly::{invert_exact, qi, Monomial, Polynomial, Rational, Var};

/// Name of the time-step parameter used in every scheme.
pub const STEP: &str = "h";

pub fn step_var() -> Var {
    Var::param(STEP)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("monomial of state degree {degree} exceeds order + 1 = {limit}")]
    DegreeTooHigh { degree: u32, limit: u32 },
    #[error("order must be at least 1")]
    InvalidOrder,
    #[error("system has no equations")]
    EmptySystem,
    #[error("variable {0} is not allowed here")]
    InvalidVariable(String),
    #[error("the time-step symbol h cannot appear in a right-hand side")]
    StepInRhs,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("equation {equation} is not jointly linear in its {end} shifts")]
    NotJointlyLinear { equation: usize, end: &'static str },
}

/// `d^n x_i/dt^n = f_i(x_1, ..., x_N)` with polynomial right-hand sides.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyOdeSystem {
    order: usize,
    rhs: Vec<Polynomial>,
}

impl PolyOdeSystem {
    pub fn new(order: usize, rhs: Vec<Polynomial>) -> Result<Self, SchemeError> {
        if order == 0 {
            return Err(SchemeError::InvalidOrder);
        }
        if rhs.is_empty() {
            return Err(SchemeError::EmptySystem);
        }
        let dim = rhs.len() as u32;
        for f in &rhs {
            for v in f.vars() {
                match v {
                    Var::State { component, shift } => {
                        if shift != 0 || component > dim {
                            return Err(SchemeError::InvalidVariable(v.to_string()));
                        }
                    }
                    Var::Param(ref name) if &**name == STEP => return Err(SchemeError::StepInRhs),
                    Var::Param(_) => {}
                }
            }
            let degree = f.state_degree();
            let limit = order as u32 + 1;
            if degree > limit {
                return Err(SchemeError::DegreeTooHigh { degree, limit });
            }
        }
        Ok(PolyOdeSystem { order, rhs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn rhs(&self) -> &[Polynomial] {
        &self.rhs
    }

    pub fn parameters(&self) -> BTreeSet<Var> {
        self.rhs
            .iter()
            .flat_map(|f| f.vars())
            .filter(Var::is_param)
            .collect()
    }
}

/// The implicit scheme `E_i = 0`, `i = 1..N`, in variables `x_j^(0..=n)`,
/// parameters, and the step symbol `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitScheme {
    order: usize,
    dim: usize,
    equations: Vec<Polynomial>,
}

impl ImplicitScheme {
    /// Wraps equations in shifts `0..=order`, checking joint linearity in the
    /// highest and in the lowest shifts.
    pub fn from_equations(
        order: usize,
        dim: usize,
        equations: Vec<Polynomial>,
    ) -> Result<Self, SchemeError> {
        if order == 0 {
            return Err(SchemeError::InvalidOrder);
        }
        if equations.len() != dim {
            return Err(SchemeError::DimensionMismatch {
                expected: dim,
                got: equations.len(),
            });
        }
        for e in &equations {
            for v in e.vars() {
                if let Var::State { component, shift } = v {
                    if component == 0 || component as usize > dim || shift < 0 || shift as usize > order {
                        return Err(SchemeError::InvalidVariable(v.to_string()));
                    }
                }
            }
        }
        let s = ImplicitScheme {
            order,
            dim,
            equations,
        };
        for (i, e) in s.equations.iter().enumerate() {
            if e.collect_linear(&s.level_vars(order as i32)).is_err() {
                return Err(SchemeError::NotJointlyLinear {
                    equation: i,
                    end: "highest",
                });
            }
            if e.collect_linear(&s.level_vars(0)).is_err() {
                return Err(SchemeError::NotJointlyLinear {
                    equation: i,
                    end: "lowest",
                });
            }
        }
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    /// `{x_1^(k), ..., x_N^(k)}`.
    pub fn level_vars(&self, shift: i32) -> BTreeSet<Var> {
        (1..=self.dim as u32).map(|j| Var::state(j, shift)).collect()
    }

    /// Equations with every shift moved by `by`; `recentered(-2)` puts a
    /// fourth-order scheme on the window `-2..=2`.
    pub fn recentered(&self, by: i32) -> Vec<Polynomial> {
        self.equations.iter().map(|e| e.shift(by)).collect()
    }

    /// Equations with shift `k` replaced by `order - k`.
    pub fn reversed(&self) -> Vec<Polynomial> {
        let n = self.order as i32;
        self.equations
            .iter()
            .map(|e| {
                e.map_vars(|v| match v {
                    Var::State { component, shift } => Var::state(*component, n - shift),
                    p => p.clone(),
                })
            })
            .collect()
    }

    /// Substitutes `x^(k) = A y^(k) + b` at every level and left-multiplies the
    /// equation vector by `A^{-1}`.
    pub fn affine_pullback(&self, a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Polynomial>, SchemeError> {
        let ainv = check_affine(a, b, self.dim)?;
        let sigma: BTreeMap<Var, Polynomial> = (0..=self.order as i32)
            .flat_map(|k| (1..=self.dim).map(move |j| (j, k)))
            .map(|(j, k)| (Var::state(j as u32, k), affine_image(a, b, j, k)))
            .collect();
        let pulled: Vec<Polynomial> = self.equations.iter().map(|e| e.compose(&sigma)).collect();
        Ok(mix(&ainv, &pulled))
    }
}

fn check_affine(a: &[Vec<Rational>], b: &[Rational], dim: usize) -> Result<Vec<Vec<Rational>>, SchemeError> {
    if a.len() != dim || a.iter().any(|r| r.len() != dim) {
        return Err(SchemeError::DimensionMismatch {
            expected: dim,
            got: a.len(),
        });
    }
    if b.len() != dim {
        return Err(SchemeError::DimensionMismatch {
            expected: dim,
            got: b.len(),
        });
    }
    invert_exact(a).ok_or(SchemeError::SingularMatrix)
}

/// `(A y + b)_j` at shift `k`, with `j` 1-based.
fn affine_image(a: &[Vec<Rational>], b: &[Rational], j: usize, k: i32) -> Polynomial {
    let mut p = Polynomial::constant(b[j - 1].clone());
    for (l, c) in a[j - 1].iter().enumerate() {
        p = p + Polynomial::state(l as u32 + 1, k).scale(c);
    }
    p
}

fn mix(m: &[Vec<Rational>], v: &[Polynomial]) -> Vec<Polynomial> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(c, p)| p.scale(c)).sum())
        .collect()
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// Replaces one monomial by its symmetric shift average of order `n`.
///
/// State factors must be at shift 0; parameter factors pass through.
pub fn symmetrize_monomial(m: &Monomial, order: usize) -> Result<Polynomial, SchemeError> {
    let slots = order + 1;
    let mut comps: Vec<u32> = Vec::with_capacity(slots);
    let (state, params) = m.split(Var::is_state);
    for (v, e) in state.factors() {
        if v.shift() != Some(0) {
            return Err(SchemeError::InvalidVariable(v.to_string()));
        }
        comps.extend(std::iter::repeat_n(v.component().expect("state"), *e as usize));
    }
    let degree = comps.len() as u32;
    if degree as usize > slots {
        return Err(SchemeError::DegreeTooHigh {
            degree,
            limit: slots as u32,
        });
    }
    comps.resize(slots, 0);

    let mut counts: BTreeMap<Monomial, u64> = BTreeMap::new();
    for perm in (0..slots as i32).permutations(slots) {
        let mono = Monomial::from_factors(
            comps
                .iter()
                .zip(perm.iter())
                .filter(|(c, _)| **c != 0)
                .map(|(c, k)| (Var::state(*c, *k), 1)),
        );
        *counts.entry(mono).or_default() += 1;
    }
    let denom = factorial(slots);
    Ok(Polynomial::from_terms(counts.into_iter().map(|(mono, n)| {
        (
            mono.mul(&params),
            Rational::new(BigInt::from(n), denom.clone()),
        )
    })))
}

/// Linear extension of [`symmetrize_monomial`] to a polynomial.
pub fn symmetrize(p: &Polynomial, order: usize) -> Result<Polynomial, SchemeError> {
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        out = out + symmetrize_monomial(m, order)?.scale(c);
    }
    Ok(out)
}

/// `Σ_k (-1)^(n-k) C(n,k) x_j^(k)`: the `n`-th forward difference times `h^n`.
pub fn scaled_difference(component: u32, order: usize) -> Polynomial {
    (0..=order)
        .map(|k| {
            let sign = if (order - k).is_multiple_of(2) { 1 } else { -1 };
            Polynomial::state(component, k as i32).scale(&qi(sign * binomial(order, k)))
        })
        .sum()
}

/// Builds the symmetric implicit scheme on shifts `0..=n`.
pub fn discretize(sys: &PolyOdeSystem) -> Result<ImplicitScheme, SchemeError> {
    let n = sys.order();
    let hn = Polynomial::param(STEP).pow(n as u32);
    let equations = sys
        .rhs()
        .iter()
        .enumerate()
        .map(|(i, f)| Ok(scaled_difference(i as u32 + 1, n) - &hn * &symmetrize(f, n)?))
        .collect::<Result<Vec<_>, SchemeError>>()?;
    ImplicitScheme::from_equations(n, sys.dim(), equations)
}

/// Outcome of comparing the second-order rule with its vector-field form.
#[derive(Clone, Debug, PartialEq)]
pub enum VecfCheck {
    Equal,
    /// A monomial where the two expansions disagree, with the component.
    Differs { component: usize, monomial: Monomial },
}

/// For a second-order system, checks that the symmetrized right-hand side
/// equals
/// `9/2 f(m3) - 4/3 [f(m01) + f(m02) + f(m12)] + 1/6 [f(x^0) + f(x^1) + f(x^2)]`
/// where `m3` is the mean of the three levels and `mkl` the midpoints.
pub fn check_vecf_identity(sys: &PolyOdeSystem) -> Result<VecfCheck, SchemeError> {
    if sys.order() != 2 {
        return Err(SchemeError::InvalidOrder);
    }
    let dim = sys.dim() as u32;
    let combo = |weights: &[(i32, Rational)]| -> BTreeMap<Var, Polynomial> {
        (1..=dim)
            .map(|j| {
                let img = weights
                    .iter()
                    .map(|(k, w)| Polynomial::state(j, *k).scale(w))
                    .sum();
                (Var::state(j, 0), img)
            })
            .collect()
    };
    let third = Rational::new(1.into(), 3.into());
    let half = Rational::new(1.into(), 2.into());
    let mean = combo(&[(0, third.clone()), (1, third.clone()), (2, third)]);
    let mids = [
        combo(&[(0, half.clone()), (1, half.clone())]),
        combo(&[(0, half.clone()), (2, half.clone())]),
        combo(&[(1, half.clone()), (2, half)]),
    ];
    let points = [
        combo(&[(0, qi(1))]),
        combo(&[(1, qi(1))]),
        combo(&[(2, qi(1))]),
    ];
    for (i, f) in sys.rhs().iter().enumerate() {
        let mut rhs = f.compose(&mean).scale(&Rational::new(9.into(), 2.into()));
        for s in &mids {
            rhs = rhs - f.compose(s).scale(&Rational::new(4.into(), 3.into()));
        }
        for s in &points {
            rhs = rhs + f.compose(s).scale(&Rational::new(1.into(), 6.into()));
        }
        let diff = symmetrize(f, 2)? - rhs;
        if let Some((m, _)) = diff.leading_term() {
            return Ok(VecfCheck::Differs {
                component: i + 1,
                monomial: m.clone(),
            });
        }
    }
    Ok(VecfCheck::Equal)
}

/// The system for `y` under `x = A y + b`: right-hand side `A^{-1} f(A y + b)`.
pub fn affine_conjugate(
    sys: &PolyOdeSystem,
    a: &[Vec<Rational>],
    b: &[Rational],
) -> Result<PolyOdeSystem, SchemeError> {
    let ainv = check_affine(a, b, sys.dim())?;
    let sigma: BTreeMap<Var, Polynomial> = (1..=sys.dim())
        .map(|j| (Var::state(j as u32, 0), affine_image(a, b, j, 0)))
        .collect();
    let pulled: Vec<Polynomial> = sys.rhs().iter().map(|f| f.compose(&sigma)).collect();
    PolyOdeSystem::new(sys.order(), mix(&ainv, &pulled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, q};

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    #[test]
    fn kahan_product_rule() {
        let m = Monomial::from_factors([(Var::state(1, 0), 1), (Var::state(2, 0), 1)]);
        let s = symmetrize_monomial(&m, 1).unwrap();
        assert_eq!(s, p("1/2*(x1'*x2 + x1*x2')"));
    }

    #[test]
    fn second_order_linear_rule() {
        let s = symmetrize(&p("x3"), 2).unwrap();
        assert_eq!(s, p("1/3*(x3 + x3' + x3'')"));
    }

    #[test]
    fn constants_pass_through() {
        assert_eq!(symmetrize(&p("c"), 2).unwrap(), p("c"));
        assert_eq!(symmetrize(&p("5"), 4).unwrap(), p("5"));
    }

    #[test]
    fn cubic_rule_is_six_term_average() {
        let s = symmetrize(&p("x1*x2*x3"), 2).unwrap();
        // lattice points -1, 0, 1 shifted up to 0, 1, 2
        let expect = p("1/6*(x1*x2'*x3'' + x1*x2''*x3' + x1'*x2*x3'' + x1'*x2''*x3 + x1''*x2'*x3 + x1''*x2*x3')");
        assert_eq!(s, expect);
    }

    #[test]
    fn quadratic_rule_second_order() {
        let s = symmetrize(&p("x1*x2"), 2).unwrap();
        let expect = p("1/6*(x1*x2' + x1*x2'' + x1'*x2 + x1'*x2'' + x1''*x2' + x1''*x2)");
        assert_eq!(s, expect);
    }

    #[test]
    fn degree_too_high() {
        let err = symmetrize(&p("x1^3"), 1).unwrap_err();
        assert_eq!(err, SchemeError::DegreeTooHigh { degree: 3, limit: 2 });
        assert!(PolyOdeSystem::new(1, vec![p("x1^3")]).is_err());
    }

    #[test]
    fn system_validation() {
        assert_eq!(PolyOdeSystem::new(0, vec![p("x1")]), Err(SchemeError::InvalidOrder));
        assert_eq!(PolyOdeSystem::new(1, vec![]), Err(SchemeError::EmptySystem));
        assert!(matches!(
            PolyOdeSystem::new(1, vec![p("x2")]),
            Err(SchemeError::InvalidVariable(_))
        ));
        assert!(matches!(
            PolyOdeSystem::new(1, vec![p("x1'")]),
            Err(SchemeError::InvalidVariable(_))
        ));
        assert_eq!(PolyOdeSystem::new(1, vec![p("h*x1")]), Err(SchemeError::StepInRhs));
    }

    #[test]
    fn binomial_differences() {
        assert_eq!(scaled_difference(1, 1), p("x1' - x1"));
        assert_eq!(scaled_difference(1, 2), p("x1'' - 2*x1' + x1"));
        assert_eq!(scaled_difference(1, 4), p("x1'''' - 4*x1''' + 6*x1'' - 4*x1' + x1"));
    }

    #[test]
    fn vecf_identity_for_cubic() {
        let sys = PolyOdeSystem::new(2, vec![p("x1^3")]).unwrap();
        assert_eq!(check_vecf_identity(&sys).unwrap(), VecfCheck::Equal);
        let sys = PolyOdeSystem::new(2, vec![p("7/3")]).unwrap();
        assert_eq!(check_vecf_identity(&sys).unwrap(), VecfCheck::Equal);
        let sys = PolyOdeSystem::new(2, vec![p("x1*x2^2"), p("x1^2")]).unwrap();
        assert_eq!(check_vecf_identity(&sys).unwrap(), VecfCheck::Equal);
    }

    #[test]
    fn affine_identity_is_noop() {
        let sys = PolyOdeSystem::new(2, vec![p("x1^3 - a*x2"), p("x1*x2 + 1")]).unwrap();
        let id = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        let out = affine_conjugate(&sys, &id, &[qi(0), qi(0)]).unwrap();
        assert_eq!(out, sys);
    }

    #[test]
    fn affine_scaling_of_cubic() {
        let sys = PolyOdeSystem::new(2, vec![p("x1^3")]).unwrap();
        let out = affine_conjugate(&sys, &[vec![qi(2)]], &[qi(0)]).unwrap();
        assert_eq!(out.rhs()[0], p("4*x1^3"));
        assert_eq!(
            affine_conjugate(&sys, &[vec![qi(0)]], &[qi(0)]),
            Err(SchemeError::SingularMatrix)
        );
    }

    #[test]
    fn scheme_rejects_nonlinear_top_shift() {
        let err = ImplicitScheme::from_equations(1, 1, vec![p("x1'^2 - x1")]).unwrap_err();
        assert!(matches!(err, SchemeError::NotJointlyLinear { end: "highest", .. }));
    }

    #[test]
    fn discretize_free_particle() {
        let sys = PolyOdeSystem::new(2, vec![Polynomial::zero()]).unwrap();
        let s = discretize(&sys).unwrap();
        assert_eq!(s.equations()[0], p("x1'' - 2*x1' + x1"));
        assert_eq!(s.recentered(-1)[0], p("x1' - 2*x1 + _x1"));
        let _ = q(1, 2);
    }
}
