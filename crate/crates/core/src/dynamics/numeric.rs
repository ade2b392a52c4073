//! Floating-point iteration of a birational map with bound parameters.

use std::collections::BTreeMap;

use crate::poly::{rational_to_f64, Polynomial, Var};

use super::{BirationalMap, DynamicsError, LinearSolve};

/// Pivots smaller than this fraction of the entry scale count as singular.
const PIVOT_TOL: f64 = 1e-14;

/// A polynomial specialised to float parameters, evaluated on a slot vector.
#[derive(Clone, Debug)]
pub(crate) struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub(crate) fn compile(
        p: &Polynomial,
        slot: &dyn Fn(&Var) -> Option<usize>,
        params: &BTreeMap<Var, f64>,
    ) -> Result<Self, DynamicsError> {
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let mut coef = rational_to_f64(c);
            let mut factors = Vec::new();
            for (v, e) in m.factors() {
                if let Some(s) = slot(v) {
                    factors.push((s, *e as i32));
                } else if let Some(x) = params.get(v) {
                    coef *= x.powi(*e as i32);
                } else {
                    return Err(DynamicsError::UnboundParameter(v.to_string()));
                }
            }
            terms.push((coef, factors));
        }
        Ok(CompiledPoly { terms })
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| f.iter().fold(*c, |acc, (s, e)| acc * x[*s].powi(*e)))
            .sum()
    }

    /// Sum of absolute term values, the scale for relative residuals.
    pub(crate) fn eval_abs(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| f.iter().fold(c.abs(), |acc, (s, e)| acc * x[*s].abs().powi(*e)))
            .sum()
    }
}

#[derive(Clone, Debug)]
struct CompiledSolve {
    coef: Vec<Vec<CompiledPoly>>,
    rhs: Vec<CompiledPoly>,
}

impl CompiledSolve {
    fn compile(
        s: &LinearSolve,
        slot: &dyn Fn(&Var) -> Option<usize>,
        params: &BTreeMap<Var, f64>,
    ) -> Result<Self, DynamicsError> {
        Ok(CompiledSolve {
            coef: s
                .coef
                .iter()
                .map(|r| r.iter().map(|p| CompiledPoly::compile(p, slot, params)).collect())
                .collect::<Result<_, _>>()?,
            rhs: s
                .rhs
                .iter()
                .map(|p| CompiledPoly::compile(p, slot, params))
                .collect::<Result<_, _>>()?,
        })
    }

    fn solve(&self, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let a: Vec<Vec<f64>> = self
            .coef
            .iter()
            .map(|r| r.iter().map(|p| p.eval(x)).collect())
            .collect();
        let scale = self
            .coef
            .iter()
            .flatten()
            .map(|p| p.eval_abs(x))
            .fold(0.0, f64::max);
        let b: Vec<f64> = self.rhs.iter().map(|p| p.eval(x)).collect();
        Lu::factor(a, scale)?.solve(&b)
    }
}

/// LU factorization with partial pivoting.
pub(crate) struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    /// `scale` is the magnitude below which cancellation makes a pivot
    /// meaningless; a zero scale uses the largest entry instead.
    pub(crate) fn factor(mut a: Vec<Vec<f64>>, scale: f64) -> Result<Self, DynamicsError> {
        let n = a.len();
        let scale = if scale > 0.0 {
            scale
        } else {
            a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
        };
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pmax = 0.0f64;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .expect("nonempty");
            let pv = a[piv][col].abs();
            if !(pv > PIVOT_TOL * scale) || !pv.is_finite() {
                return Err(DynamicsError::SingularStep {
                    condition: if pv == 0.0 { f64::INFINITY } else { pmax.max(pv) / pv },
                });
            }
            pmax = pmax.max(pv);
            a.swap(col, piv);
            perm.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                a[r][col] = f;
                for c in col + 1..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        Ok(Lu { lu: a, perm })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let n = self.lu.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            for c in 0..r {
                y[r] -= self.lu[r][c] * y[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                y[r] -= self.lu[r][c] * y[c];
            }
            y[r] /= self.lu[r][r];
        }
        if y.iter().all(|v| v.is_finite()) {
            Ok(y)
        } else {
            Err(DynamicsError::SingularStep {
                condition: f64::INFINITY,
            })
        }
    }
}

/// Outcome of an orbit computation.
#[derive(Clone, Debug, PartialEq)]
pub enum OrbitStatus {
    Complete,
    /// The step from point `step` to `step + 1` hit a singularity.
    Singular { step: usize, condition: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub h: f64,
    pub points: Vec<Vec<f64>>,
    pub status: OrbitStatus,
}

/// A birational map with all parameters and the step bound to floats.
#[derive(Clone, Debug)]
pub struct NumericMap {
    order: usize,
    dim: usize,
    h: f64,
    forward: CompiledSolve,
    backward: CompiledSolve,
    equations: Vec<CompiledPoly>,
    partials: Vec<Vec<CompiledPoly>>,
}

impl NumericMap {
    /// `params` must cover every free parameter except the step `h`.
    pub fn new(map: &BirationalMap, h: f64, params: &BTreeMap<Var, f64>) -> Result<Self, DynamicsError> {
        let mut bound = params.clone();
        bound.insert(crate::scheme::step_var(), h);
        let slot = |v: &Var| map.slot(v);
        let window: Vec<Var> = (0..=map.order as i32)
            .flat_map(|k| (1..=map.dim as u32).map(move |j| Var::state(j, k)))
            .collect();
        let equations: Vec<CompiledPoly> = map
            .equations
            .iter()
            .map(|e| CompiledPoly::compile(e, &slot, &bound))
            .collect::<Result<_, _>>()?;
        let partials = map
            .equations
            .iter()
            .map(|e| {
                window
                    .iter()
                    .map(|v| CompiledPoly::compile(&e.derivative(v), &slot, &bound))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(NumericMap {
            order: map.order,
            dim: map.dim,
            h,
            forward: CompiledSolve::compile(&map.forward_solve, &slot, &bound)?,
            backward: CompiledSolve::compile(&map.backward_solve, &slot, &bound)?,
            equations,
            partials,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Dimension `nN` of the state.
    pub fn dim(&self) -> usize {
        self.order * self.dim
    }

    fn check_len(&self, state: &[f64]) -> Result<(), DynamicsError> {
        if state.len() != self.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.dim(),
                got: state.len(),
            });
        }
        Ok(())
    }

    /// Solves for the new highest shifts given the current window.
    fn top(&self, state: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let mut w = state.to_vec();
        w.resize(state.len() + self.dim, 0.0);
        self.forward.solve(&w)
    }

    pub fn step(&self, state: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        self.check_len(state)?;
        let top = self.top(state)?;
        let mut out = state[self.dim..].to_vec();
        out.extend(top);
        Ok(out)
    }

    pub fn step_back(&self, state: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        self.check_len(state)?;
        let mut out = self.backward.solve(state)?;
        out.extend_from_slice(&state[..state.len() - self.dim]);
        Ok(out)
    }

    pub fn iterate(&self, state: &[f64], steps: usize) -> Orbit {
        let mut points = vec![state.to_vec()];
        let mut status = OrbitStatus::Complete;
        for k in 0..steps {
            match self.step(&points[k]) {
                Ok(next) => points.push(next),
                Err(DynamicsError::SingularStep { condition }) => {
                    status = OrbitStatus::Singular { step: k, condition };
                    break;
                }
                Err(_) => {
                    status = OrbitStatus::Singular {
                        step: k,
                        condition: f64::NAN,
                    };
                    break;
                }
            }
        }
        Orbit {
            h: self.h,
            points,
            status,
        }
    }

    /// Largest relative residual of the scheme equations on a full window
    /// `x^(0..=n)` of length `(n+1)N`.
    pub fn residual(&self, window: &[f64]) -> f64 {
        self.equations
            .iter()
            .map(|e| e.eval(window).abs() / e.eval_abs(window).max(1.0))
            .fold(0.0, f64::max)
    }

    /// Residual of the scheme across two consecutive states.
    pub fn step_residual(&self, from: &[f64], to: &[f64]) -> f64 {
        let mut w = from.to_vec();
        w.extend_from_slice(&to[to.len() - self.dim..]);
        self.residual(&w)
    }

    /// Jacobian of the forward map at `state`, from the exact partial
    /// derivatives of the scheme by implicit differentiation.
    pub fn jacobian_at(&self, state: &[f64]) -> Result<Vec<Vec<f64>>, DynamicsError> {
        self.check_len(state)?;
        let n = self.dim();
        let nn = self.dim;
        let mut w = state.to_vec();
        w.extend(self.top(state)?);
        let mut jac = vec![vec![0.0; n]; n];
        for (r, row) in jac.iter_mut().enumerate().take(n - nn) {
            row[r + nn] = 1.0;
        }
        let d: Vec<Vec<f64>> = self
            .partials
            .iter()
            .map(|row| row.iter().map(|p| p.eval(&w)).collect())
            .collect();
        let top: Vec<Vec<f64>> = d.iter().map(|row| row[n..].to_vec()).collect();
        let lu = Lu::factor(top, 0.0)?;
        for c in 0..n {
            let col: Vec<f64> = d.iter().map(|row| -row[c]).collect();
            let x = lu.solve(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                jac[n - nn + i][c] = v;
            }
        }
        Ok(jac)
    }

    /// Jacobian at a fixed point, refusing points with `‖Φ(p) − p‖∞ > 1e−9`.
    pub fn linearize_at(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, DynamicsError> {
        let image = self.step(p)?;
        let distance = image
            .iter()
            .zip(p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !(distance <= 1e-9) {
            return Err(DynamicsError::NotFixedPoint { distance });
        }
        self.jacobian_at(p)
    }
}

/// Determinant by LU with partial pivoting.
pub fn float_determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::solve_forward;
    use crate::poly::parse_polynomial;
    use crate::scheme::{discretize, PolyOdeSystem};

    fn map(order: usize, rhs: &[&str]) -> BirationalMap {
        let sys = PolyOdeSystem::new(order, rhs.iter().map(|s| parse_polynomial(s).unwrap()).collect()).unwrap();
        solve_forward(&discretize(&sys).unwrap()).unwrap()
    }

    #[test]
    fn free_particle_steps() {
        let m = NumericMap::new(&map(2, &["0"]), 0.1, &BTreeMap::new()).unwrap();
        assert_eq!(m.step(&[1.0, 3.0]).unwrap(), vec![3.0, 5.0]);
        assert_eq!(m.step_back(&[3.0, 5.0]).unwrap(), vec![1.0, 3.0]);
        let j = m.jacobian_at(&[0.2, 0.7]).unwrap();
        assert_eq!(j, vec![vec![0.0, 1.0], vec![-1.0, 2.0]]);
    }

    #[test]
    fn zero_steps_gives_one_point() {
        let m = NumericMap::new(&map(2, &["0"]), 0.1, &BTreeMap::new()).unwrap();
        let o = m.iterate(&[0.0, 1.0], 0);
        assert_eq!(o.points.len(), 1);
        assert_eq!(o.status, OrbitStatus::Complete);
    }

    #[test]
    fn singular_denominator_is_reported() {
        // x~ (1 + h^2 x x_) = 2x - x_ with h = 1: singular where x x_ = -1
        let m = NumericMap::new(&map(2, &["-x1^3"]), 1.0, &BTreeMap::new()).unwrap();
        let o = m.iterate(&[-1.0, 1.0], 3);
        assert!(matches!(o.status, OrbitStatus::Singular { step: 0, .. }));
        assert!(matches!(m.step(&[-1.0, 1.0]), Err(DynamicsError::SingularStep { .. })));
    }

    #[test]
    fn unbound_parameter() {
        let err = NumericMap::new(&map(2, &["-a*x1^3"]), 0.1, &BTreeMap::new()).unwrap_err();
        assert_eq!(err, DynamicsError::UnboundParameter("a".into()));
    }

    #[test]
    fn lu_solves_with_pivoting() {
        let lu = Lu::factor(vec![vec![0.0, 2.0], vec![3.0, 1.0]], 0.0).unwrap();
        let x = lu.solve(&[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(Lu::factor(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 0.0).is_err());
        assert_eq!(float_determinant(&[vec![0.0, 2.0], vec![3.0, 1.0]]), -6.0);
    }

    #[test]
    fn residual_vanishes_along_orbit() {
        let m = NumericMap::new(&map(2, &["-x1^3 - x1"]), 0.1, &BTreeMap::new()).unwrap();
        let o = m.iterate(&[0.3, 0.31], 50);
        for w in o.points.windows(2) {
            assert!(m.step_residual(&w[0], &w[1]) < 1e-14);
        }
    }
}
