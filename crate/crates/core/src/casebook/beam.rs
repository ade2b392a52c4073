use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{float_determinant, solve_forward, BirationalMap, NumericMap};
use crate::poly::{q, qi, rational_to_f64, Polynomial, Rational, Var};
use crate::scheme::{discretize, symmetrize, ImplicitScheme, PolyOdeSystem};

use super::{c, float_params, sym, w, CaseError};

/// Exact parameters for `w'''' = a w⁴ + b w² + c` and the weights of the
/// variational discretization.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamParams {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub h: Rational,
    pub alphas: [Rational; 6],
    pub betas: [Rational; 4],
}

fn check_sum(name: &'static str, xs: &[Rational]) -> Result<(), CaseError> {
    let s: Rational = xs.iter().sum();
    if s == qi(1) {
        Ok(())
    } else {
        Err(CaseError::AffineConstraintViolated { name, sum: s.to_string() })
    }
}

impl BeamParams {
    pub fn new(
        a: Rational,
        b: Rational,
        c: Rational,
        h: Rational,
        alphas: [Rational; 6],
        betas: [Rational; 4],
    ) -> Result<Self, CaseError> {
        check_sum("alpha", &alphas)?;
        check_sum("beta", &betas)?;
        Ok(BeamParams { a, b, c, h, alphas, betas })
    }

    /// `α₅ = β₃ = 1`, the others zero.
    pub fn on_site(a: Rational, b: Rational, c: Rational, h: Rational) -> Self {
        let mut alphas: [Rational; 6] = Default::default();
        let mut betas: [Rational; 4] = Default::default();
        alphas[5] = qi(1);
        betas[3] = qi(1);
        BeamParams { a, b, c, h, alphas, betas }
    }

    /// All `αⱼ = 1/6`, all `βⱼ = 1/4`.
    pub fn uniform(a: Rational, b: Rational, c: Rational, h: Rational) -> Self {
        BeamParams {
            a,
            b,
            c,
            h,
            alphas: std::array::from_fn(|_| q(1, 6)),
            betas: std::array::from_fn(|_| q(1, 4)),
        }
    }

    /// `a = 1`, `b = −2ε`, `c = 1 − δ` with `ε = ±1`, keeping the weights.
    pub fn normal_form(self, epsilon: i64, delta: Rational) -> Result<Self, CaseError> {
        if epsilon != 1 && epsilon != -1 {
            return Err(CaseError::InvalidEpsilon);
        }
        Ok(BeamParams {
            a: qi(1),
            b: qi(-2 * epsilon),
            c: qi(1) - delta,
            ..self
        })
    }

    /// Bindings of `a, b, c, h`.
    pub fn bindings(&self) -> BTreeMap<Var, Rational> {
        [("a", &self.a), ("b", &self.b), ("c", &self.c), ("h", &self.h)]
            .into_iter()
            .map(|(k, v)| (Var::param(k), v.clone()))
            .collect()
    }

    pub fn coefficients(&self) -> BeamCoefficients {
        BeamCoefficients {
            a: c(self.a.clone()),
            b: c(self.b.clone()),
            c: c(self.c.clone()),
            alphas: std::array::from_fn(|j| c(self.alphas[j].clone())),
            betas: std::array::from_fn(|j| c(self.betas[j].clone())),
        }
    }
}

/// Beam coefficients as polynomials. `h` always stays the symbol `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamCoefficients {
    pub a: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
    pub alphas: [Polynomial; 6],
    pub betas: [Polynomial; 4],
}

impl BeamCoefficients {
    /// Symbols `a, b, c, alpha0..alpha4, beta0..beta2`, with the last weight
    /// of each family eliminated by the sum constraint.
    pub fn symbolic() -> Self {
        let mut alphas: [Polynomial; 6] = std::array::from_fn(|j| sym(&format!("alpha{j}")));
        let mut betas: [Polynomial; 4] = std::array::from_fn(|j| sym(&format!("beta{j}")));
        alphas[5] = Polynomial::one() - alphas[..5].iter().cloned().sum::<Polynomial>();
        betas[3] = Polynomial::one() - betas[..3].iter().cloned().sum::<Polynomial>();
        BeamCoefficients {
            a: sym("a"),
            b: sym("b"),
            c: sym("c"),
            alphas,
            betas,
        }
    }

    /// `a w⁴ + b w² + c` in `w = x1`.
    pub fn rhs(&self) -> Polynomial {
        let x = w(0);
        &self.a * &x.pow(4) + &self.b * &x.pow(2) + self.c.clone()
    }
}

/// `F₄ = (a/5)·Σ` of the five products of four distinct values among
/// `w^(−2..2)`.
pub fn expected_f4(a: &Polynomial) -> Polynomial {
    let sum: Polynomial = (-2..=2)
        .map(|skip| (-2..=2).filter(|&k| k != skip).map(w).product::<Polynomial>())
        .sum();
    (a * &sum).scale(&q(1, 5))
}

/// `F₂ = (b/10)·Σ_{i<j} w^(i) w^(j)` over `w^(−2..2)`.
pub fn expected_f2(b: &Polynomial) -> Polynomial {
    let mut sum = Polynomial::zero();
    for i in -2..=2 {
        for j in (i + 1)..=2 {
            sum = sum + w(i) * w(j);
        }
    }
    (b * &sum).scale(&q(1, 10))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamSymmetric {
    pub system: PolyOdeSystem,
    pub scheme: ImplicitScheme,
    pub map: BirationalMap,
    /// Symmetrized quartic part over `w^(−2..2)`.
    pub f4: Polynomial,
    /// Symmetrized quadratic part over `w^(−2..2)`.
    pub f2: Polynomial,
}

pub fn beam_symmetric(coeffs: &BeamCoefficients) -> Result<BeamSymmetric, CaseError> {
    let system = PolyOdeSystem::new(4, vec![coeffs.rhs()])?;
    let scheme = discretize(&system)?;
    let map = solve_forward(&scheme)?;
    let x = w(0);
    let f4 = symmetrize(&(&coeffs.a * &x.pow(4)), 4)?.shift(-2);
    let f2 = symmetrize(&(&coeffs.b * &x.pow(2)), 4)?.shift(-2);
    Ok(BeamSymmetric { system, scheme, map, f4, f2 })
}

/// Outcome of the measure check for the symmetric beam map.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport {
    /// `∂F/∂w^(−2)` and `∂F/∂w^(2)` are the same function of their four
    /// arguments.
    pub g_equals_h: bool,
    pub samples: usize,
    /// Largest `|det DΦ / ((1 − h⁴G)/(1 − h⁴H)) − 1|` over the samples.
    pub max_mismatch: f64,
    /// The same with `h²` in place of `h⁴`, kept for comparison.
    pub max_mismatch_h2: f64,
}

/// Compares `det DΦ` with the density ratio at `samples` seeded random
/// states drawn from `[−1/2, 1/2]⁴`.
pub fn beam_measure_check(params: &BeamParams, samples: usize, seed: u64) -> Result<MeasureReport, CaseError> {
    let coeffs = params.coefficients();
    let sym_case = beam_symmetric(&coeffs)?;
    let f = symmetrize(&coeffs.rhs(), 4)?;
    let g = f.derivative(&Var::state(1, 0));
    let hh = f.derivative(&Var::state(1, 4));
    let g_equals_h = g.shift(-1) == hh;

    let h = rational_to_f64(&params.h);
    let fparams = float_params(&params.bindings());
    let num = NumericMap::new(&sym_case.map, h, &fparams)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_mismatch: f64 = 0.0;
    let mut max_mismatch_h2: f64 = 0.0;
    for _ in 0..samples {
        let s: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
        let next = num.step(&s)?;
        let mut window = s.clone();
        window.push(next[3]);
        let lookup = |v: &Var| {
            if v.is_state() {
                v.shift().and_then(|k| window.get(k as usize).copied())
            } else {
                fparams.get(v).copied()
            }
        };
        let gv: f64 = g.eval_with(lookup)?;
        let hv: f64 = hh.eval_with(lookup)?;
        let det = float_determinant(&num.jacobian_at(&s)?);
        let ratio4 = (1.0 - h.powi(4) * gv) / (1.0 - h.powi(4) * hv);
        let ratio2 = (1.0 - h.powi(2) * gv) / (1.0 - h.powi(2) * hv);
        max_mismatch = max_mismatch.max((det / ratio4 - 1.0).abs());
        max_mismatch_h2 = max_mismatch_h2.max((det / ratio2 - 1.0).abs());
    }
    Ok(MeasureReport {
        g_equals_h,
        samples,
        max_mismatch,
        max_mismatch_h2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_must_sum_to_one() {
        let mut alphas: [Rational; 6] = Default::default();
        alphas[0] = q(1, 2);
        let betas: [Rational; 4] = std::array::from_fn(|_| q(1, 4));
        let err = BeamParams::new(qi(1), qi(0), qi(0), q(1, 10), alphas, betas).unwrap_err();
        assert!(matches!(err, CaseError::AffineConstraintViolated { name: "alpha", .. }));
    }

    #[test]
    fn normal_form() {
        let p = BeamParams::uniform(qi(0), qi(0), qi(0), q(1, 10))
            .normal_form(1, q(1, 4))
            .unwrap();
        assert_eq!((p.a, p.b, p.c), (qi(1), qi(-2), q(3, 4)));
        assert!(BeamParams::on_site(qi(1), qi(1), qi(1), qi(1)).normal_form(0, qi(0)).is_err());
    }

    #[test]
    fn symmetrized_parts() {
        let case = beam_symmetric(&BeamCoefficients::symbolic()).unwrap();
        assert_eq!(case.f4, expected_f4(&sym("a")));
        assert_eq!(case.f2, expected_f2(&sym("b")));
    }

    #[test]
    fn measure_density() {
        let p = BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10));
        let r = beam_measure_check(&p, 20, 7).unwrap();
        assert!(r.g_equals_h);
        assert!(r.max_mismatch < 1e-9, "{r:?}");
    }
}
