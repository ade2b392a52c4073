//! Explicit birational maps from implicit schemes, with numeric iteration,
//! linearization and spectra.
//!
//! The state of an order-`n`, dimension-`N` scheme is the window
//! `(x_1^(0), ..., x_N^(0), x_1^(1), ..., x_N^(n-1))`. The forward map shifts
//! the window by one and appends the highest shifts `x^(n)`, obtained from the
//! scheme's linearity in `x^(n)`. The backward map uses the linearity in the
//! lowest shifts in the same way.

mod convergence;
mod numeric;
mod spectrum;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::poly::{determinant, PolyError, Polynomial, Rational, RationalFunction, Var};
use crate::scheme::ImplicitScheme;

pub use convergence::{convergence_order, rk4_oracle, ConvergenceReport};
pub use numeric::{float_determinant, NumericMap, Orbit, OrbitStatus};
pub use spectrum::{char_poly_and_roots, RootClass, SpectrumReport};

/// Largest dimension for which the symbolic Cramer solution is built.
pub const SYMBOLIC_DIM_LIMIT: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("scheme equation is not linear in the solved shifts: {0}")]
    NotLinear(String),
    #[error("coefficient determinant is identically zero")]
    ZeroDeterminant,
    #[error("no symbolic form for dimension {0}")]
    NoSymbolicForm(usize),
    #[error("singular step (condition estimate {condition:e})")]
    SingularStep { condition: f64 },
    #[error("point is not fixed: distance {distance:e}")]
    NotFixedPoint { distance: f64 },
    #[error("root iteration did not converge")]
    NoConvergence,
    #[error("parameter {0} has no value")]
    UnboundParameter(String),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `coef · x = rhs` for the solved level.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolve {
    pub coef: Vec<Vec<Polynomial>>,
    pub rhs: Vec<Polynomial>,
}

impl LinearSolve {
    fn from_collected(equations: &[Polynomial], unknowns: &[Var]) -> Result<Self, DynamicsError> {
        let set: BTreeSet<Var> = unknowns.iter().cloned().collect();
        let mut coef = Vec::with_capacity(equations.len());
        let mut rhs = Vec::with_capacity(equations.len());
        for e in equations {
            let (c, rem) = e
                .collect_linear(&set)
                .map_err(|err| DynamicsError::NotLinear(err.to_string()))?;
            coef.push(
                unknowns
                    .iter()
                    .map(|v| c.get(v).cloned().unwrap_or_else(Polynomial::zero))
                    .collect(),
            );
            rhs.push(-rem);
        }
        Ok(LinearSolve { coef, rhs })
    }

    fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        LinearSolve {
            coef: self.coef.iter().map(|r| r.iter().map(&f).collect()).collect(),
            rhs: self.rhs.iter().map(&f).collect(),
        }
    }

    /// Cramer's rule.
    fn solve_symbolic(&self) -> Result<Vec<RationalFunction>, DynamicsError> {
        let n = self.rhs.len();
        let det = determinant(&self.coef);
        if det.is_zero() {
            return Err(DynamicsError::ZeroDeterminant);
        }
        (0..n)
            .map(|j| {
                let replaced: Vec<Vec<Polynomial>> = self
                    .coef
                    .iter()
                    .zip(&self.rhs)
                    .map(|(row, r)| {
                        let mut row = row.clone();
                        row[j] = r.clone();
                        row
                    })
                    .collect();
                Ok(RationalFunction::new(determinant(&replaced), det.clone())?)
            })
            .collect()
    }

    fn vars(&self) -> BTreeSet<Var> {
        self.coef
            .iter()
            .flatten()
            .chain(self.rhs.iter())
            .flat_map(|p| p.vars())
            .collect()
    }
}

/// Forward and backward rational update rules of an implicit scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct BirationalMap {
    order: usize,
    dim: usize,
    equations: Vec<Polynomial>,
    forward_solve: LinearSolve,
    backward_solve: LinearSolve,
    forward: Option<Vec<RationalFunction>>,
    backward: Option<Vec<RationalFunction>>,
}

/// Solves an implicit scheme for its highest and lowest shifts.
pub fn solve_forward(s: &ImplicitScheme) -> Result<BirationalMap, DynamicsError> {
    BirationalMap::from_equations(s.order(), s.dim(), s.equations().to_vec())
}

impl BirationalMap {
    fn from_equations(
        order: usize,
        dim: usize,
        equations: Vec<Polynomial>,
    ) -> Result<Self, DynamicsError> {
        let level = |k: i32| -> Vec<Var> { (1..=dim as u32).map(|j| Var::state(j, k)).collect() };
        let forward_solve = LinearSolve::from_collected(&equations, &level(order as i32))?;
        let backward_solve =
            LinearSolve::from_collected(&equations, &level(0))?.map(|p| p.shift(-1));
        let (forward, backward) = if dim <= SYMBOLIC_DIM_LIMIT {
            (
                Some(assemble_forward(order, dim, forward_solve.solve_symbolic()?)),
                Some(assemble_backward(order, dim, backward_solve.solve_symbolic()?)),
            )
        } else {
            (None, None)
        };
        Ok(BirationalMap {
            order,
            dim,
            equations,
            forward_solve,
            backward_solve,
            forward,
            backward,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of components `N` of the underlying system.
    pub fn components(&self) -> usize {
        self.dim
    }

    /// Dimension `nN` of the state.
    pub fn dim(&self) -> usize {
        self.order * self.dim
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn forward_solve(&self) -> &LinearSolve {
        &self.forward_solve
    }

    pub fn backward_solve(&self) -> &LinearSolve {
        &self.backward_solve
    }

    pub fn forward(&self) -> Option<&[RationalFunction]> {
        self.forward.as_deref()
    }

    pub fn backward(&self) -> Option<&[RationalFunction]> {
        self.backward.as_deref()
    }

    /// State variables in window order.
    pub fn state_vars(&self) -> Vec<Var> {
        (0..self.order as i32)
            .flat_map(|k| (1..=self.dim as u32).map(move |j| Var::state(j, k)))
            .collect()
    }

    /// Position of `x_j^(k)` in the window `x^(0..=n)`.
    pub fn slot(&self, v: &Var) -> Option<usize> {
        match v {
            Var::State { component, shift }
                if *component >= 1
                    && *component as usize <= self.dim
                    && *shift >= 0
                    && *shift as usize <= self.order =>
            {
                Some(*shift as usize * self.dim + *component as usize - 1)
            }
            _ => None,
        }
    }

    /// Free parameters, including the step symbol if still symbolic.
    pub fn parameters(&self) -> BTreeSet<Var> {
        self.forward_solve
            .vars()
            .into_iter()
            .chain(self.backward_solve.vars())
            .filter(Var::is_param)
            .collect()
    }

    /// Binds parameters to exact values.
    pub fn bind(&self, values: &BTreeMap<Var, Rational>) -> Result<Self, DynamicsError> {
        let equations = self.equations.iter().map(|e| e.bind(values)).collect();
        Self::from_equations(self.order, self.dim, equations)
    }

    fn require_forward(&self) -> Result<&[RationalFunction], DynamicsError> {
        self.forward().ok_or(DynamicsError::NoSymbolicForm(self.dim))
    }

    fn require_backward(&self) -> Result<&[RationalFunction], DynamicsError> {
        self.backward().ok_or(DynamicsError::NoSymbolicForm(self.dim))
    }

    fn point(&self, state: &[Rational], params: &BTreeMap<Var, Rational>) -> Result<BTreeMap<Var, Rational>, DynamicsError> {
        if state.len() != self.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.dim(),
                got: state.len(),
            });
        }
        let mut pt = params.clone();
        pt.extend(self.state_vars().into_iter().zip(state.iter().cloned()));
        Ok(pt)
    }

    /// One exact forward step.
    pub fn apply_exact(
        &self,
        state: &[Rational],
        params: &BTreeMap<Var, Rational>,
    ) -> Result<Vec<Rational>, DynamicsError> {
        let pt = self.point(state, params)?;
        self.require_forward()?
            .iter()
            .map(|r| r.eval(&pt).map_err(unbound_or))
            .collect()
    }

    /// One exact backward step.
    pub fn apply_back_exact(
        &self,
        state: &[Rational],
        params: &BTreeMap<Var, Rational>,
    ) -> Result<Vec<Rational>, DynamicsError> {
        let pt = self.point(state, params)?;
        self.require_backward()?
            .iter()
            .map(|r| r.eval(&pt).map_err(unbound_or))
            .collect()
    }

    /// Checks `backward ∘ forward = id` by exact substitution.
    pub fn is_inverse_exact(&self) -> Result<bool, DynamicsError> {
        let fwd = self.require_forward()?;
        let bwd = self.require_backward()?;
        let sigma: BTreeMap<Var, RationalFunction> =
            self.state_vars().into_iter().zip(fwd.iter().cloned()).collect();
        for (b, v) in bwd.iter().zip(self.state_vars()) {
            let composed = b.substitute(&sigma)?;
            if composed != RationalFunction::var(v) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact Jacobian matrix of the forward map and its determinant.
    pub fn jacobian(&self) -> Result<(Vec<Vec<RationalFunction>>, RationalFunction), DynamicsError> {
        let fwd = self.require_forward()?;
        let vars = self.state_vars();
        let m: Vec<Vec<RationalFunction>> = fwd
            .iter()
            .map(|r| vars.iter().map(|v| r.derivative(v)).collect())
            .collect();
        let det = rf_determinant(&m);
        Ok((m, det))
    }
}

fn unbound_or(e: PolyError) -> DynamicsError {
    match e {
        PolyError::UnboundVariable(v) => DynamicsError::UnboundParameter(v),
        PolyError::DenominatorVanished => DynamicsError::SingularStep {
            condition: f64::INFINITY,
        },
        other => DynamicsError::Poly(other),
    }
}

fn assemble_forward(order: usize, dim: usize, solved: Vec<RationalFunction>) -> Vec<RationalFunction> {
    let mut out: Vec<RationalFunction> = (1..order as i32)
        .flat_map(|k| (1..=dim as u32).map(move |j| RationalFunction::var(Var::state(j, k))))
        .collect();
    out.extend(solved);
    out
}

fn assemble_backward(order: usize, dim: usize, solved: Vec<RationalFunction>) -> Vec<RationalFunction> {
    let mut out = solved;
    out.extend(
        (0..order as i32 - 1)
            .flat_map(|k| (1..=dim as u32).map(move |j| RationalFunction::var(Var::state(j, k)))),
    );
    out
}

/// Cofactor expansion over rational functions, skipping zero entries.
pub fn rf_determinant(m: &[Vec<RationalFunction>]) -> RationalFunction {
    let n = m.len();
    match n {
        0 => RationalFunction::from_poly(Polynomial::one()),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = RationalFunction::from_poly(Polynomial::zero());
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<RationalFunction>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &rf_determinant(&minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, q, qi};
    use crate::scheme::{discretize, PolyOdeSystem};

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn rf(num: &str, den: &str) -> RationalFunction {
        RationalFunction::new(p(num), p(den)).unwrap()
    }

    #[test]
    fn trivial_first_order_is_identity() {
        let sys = PolyOdeSystem::new(1, vec![Polynomial::zero()]).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        assert_eq!(m.forward().unwrap(), &[RationalFunction::var(Var::state(1, 0))]);
        let (j, det) = m.jacobian().unwrap();
        assert_eq!(j[0][0], rf("1", "1"));
        assert_eq!(det, rf("1", "1"));
    }

    #[test]
    fn free_particle_shift_structure() {
        let sys = PolyOdeSystem::new(2, vec![Polynomial::zero()]).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        let fwd = m.forward().unwrap();
        assert_eq!(fwd[0], RationalFunction::var(Var::state(1, 1)));
        assert_eq!(fwd[1], rf("2*x1' - x1", "1"));
        let bwd = m.backward().unwrap();
        assert_eq!(bwd[0], rf("2*x1 - x1'", "1"));
        assert_eq!(bwd[1], RationalFunction::var(Var::state(1, 0)));
        assert!(m.is_inverse_exact().unwrap());
    }

    #[test]
    fn exact_step_of_cubic_oscillator() {
        let sys = PolyOdeSystem::new(2, vec![p("-x1^3")]).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        let params = BTreeMap::from([(Var::param("h"), q(1, 10))]);
        let out = m.apply_exact(&[qi(1), qi(1)], &params).unwrap();
        // alpha = 1/100, beta = 0, gamma = 1, delta = 0: (2 - 1)/(1 + 1/100)
        assert_eq!(out, vec![qi(1), q(100, 101)]);
        let back = m.apply_back_exact(&out, &params).unwrap();
        assert_eq!(back, vec![qi(1), qi(1)]);
    }

    #[test]
    fn unbound_parameters_reported() {
        let sys = PolyOdeSystem::new(2, vec![p("-a*x1^3")]).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        let err = m.apply_exact(&[qi(1), qi(1)], &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, DynamicsError::UnboundParameter(_)));
        assert_eq!(
            m.parameters(),
            BTreeSet::from([Var::param("a"), Var::param("h")])
        );
    }

    #[test]
    fn kahan_lv_round_trip_exact() {
        let sys = PolyOdeSystem::new(1, vec![p("alpha*x1 - alpha*x1*x2"), p("x1*x2 - x2")]).unwrap();
        let m = solve_forward(&discretize(&sys).unwrap()).unwrap();
        assert!(m.is_inverse_exact().unwrap());
    }

    #[test]
    fn determinant_of_rational_matrix() {
        let m = vec![
            vec![rf("1", "x1"), rf("1", "1")],
            vec![rf("x2", "1"), rf("x1", "1")],
        ];
        assert_eq!(rf_determinant(&m), rf("1 - x2", "1"));
    }
}
