use std::collections::BTreeMap;

use crate::dynamics::{solve_forward, BirationalMap};
use crate::poly::{q, qi, Polynomial, Rational, RationalFunction, Var};
use crate::scheme::{discretize, PolyOdeSystem};

use super::{c, sym, CaseError};

/// Exact parameters of `ẍ = −a x³ − b x² − c x − d` and the step `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticParams {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    pub h: Rational,
}

impl QuarticParams {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational, h: Rational) -> Self {
        QuarticParams { a, b, c, d, h }
    }

    pub fn alpha(&self) -> Rational {
        &self.a * &self.h * &self.h
    }

    pub fn beta(&self) -> Rational {
        &self.b * &self.h * &self.h / qi(3)
    }

    pub fn gamma(&self) -> Rational {
        qi(1) + &self.c * &self.h * &self.h / qi(3)
    }

    pub fn delta(&self) -> Rational {
        &self.d * &self.h * &self.h
    }

    pub fn bindings(&self) -> BTreeMap<Var, Rational> {
        [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d), ("h", &self.h)]
            .into_iter()
            .map(|(k, v)| (Var::param(k), v.clone()))
            .collect()
    }
}

/// `α, β, γ, δ` as polynomials, either in the symbols `a, b, c, d, h` or as
/// constants.
#[derive(Clone, Debug, PartialEq)]
pub struct QrtCoefficients {
    pub alpha: Polynomial,
    pub beta: Polynomial,
    pub gamma: Polynomial,
    pub delta: Polynomial,
}

impl QrtCoefficients {
    /// `α = a h²`, `β = b h²/3`, `γ = 1 + c h²/3`, `δ = d h²`.
    pub fn symbolic() -> Self {
        let h2 = sym("h").pow(2);
        QrtCoefficients {
            alpha: sym("a") * h2.clone(),
            beta: (sym("b") * h2.clone()).scale(&q(1, 3)),
            gamma: Polynomial::one() + (sym("c") * h2.clone()).scale(&q(1, 3)),
            delta: sym("d") * h2,
        }
    }

    pub fn from_params(p: &QuarticParams) -> Self {
        QrtCoefficients {
            alpha: c(p.alpha()),
            beta: c(p.beta()),
            gamma: c(p.gamma()),
            delta: c(p.delta()),
        }
    }

    /// Each coefficient as its own free symbol.
    pub fn free() -> Self {
        QrtCoefficients {
            alpha: sym("alpha"),
            beta: sym("beta"),
            gamma: sym("gamma"),
            delta: sym("delta"),
        }
    }

    fn three_minus_gamma(&self) -> Polynomial {
        Polynomial::int(3) - &self.gamma
    }

    /// `x̃ = ((3−γ)x − δ − (βx+γ)x̲) / (βx + γ + (αx+β)x̲)` with `x̲ = x1`,
    /// `x = x1'`.
    pub fn map(&self) -> RationalFunction {
        let (xl, x) = (Polynomial::state(1, 0), Polynomial::state(1, 1));
        let num = &self.three_minus_gamma() * &x - &self.delta - &(&self.beta * &x + &self.gamma) * &xl;
        let den = &self.beta * &x + &self.gamma + &(&self.alpha * &x + &self.beta) * &xl;
        RationalFunction::new(num, den).expect("nonzero denominator")
    }

    /// `J(x,y) = [(βy+γ)² + (αy+β)((3−γ)y − δ)] / (αxy + β(x+y) + γ)²` with
    /// `x = x1`, `y = x1'`.
    pub fn jacobian(&self) -> RationalFunction {
        let y = Polynomial::state(1, 1);
        let num = (&self.beta * &y + &self.gamma).pow(2)
            + &(&self.alpha * &y + &self.beta) * &(&self.three_minus_gamma() * &y - &self.delta);
        RationalFunction::new(num, self.p1().pow(2)).expect("nonzero denominator")
    }

    /// `P₁ = αxy + β(x+y) + γ`.
    pub fn p1(&self) -> Polynomial {
        let (x, y) = (Polynomial::state(1, 0), Polynomial::state(1, 1));
        &self.alpha * &(&x * &y) + &self.beta * &(&x + &y) + self.gamma.clone()
    }

    /// `P₂ = (αγ−β²)x²y² + εxy(x+y) + ζ(x²+y²) − (3−γ)²xy + (3−γ)δ(x+y) − δ²`
    /// with `ε = αδ + β(3−γ)`, `ζ = βδ + γ(3−γ)`.
    pub fn p2(&self) -> Polynomial {
        let (x, y) = (Polynomial::state(1, 0), Polynomial::state(1, 1));
        let t = self.three_minus_gamma();
        let eps = &self.alpha * &self.delta + &self.beta * &t;
        let zeta = &self.beta * &self.delta + &self.gamma * &t;
        let xy = &x * &y;
        (&self.alpha * &self.gamma - self.beta.pow(2)) * xy.pow(2)
            + &eps * &(&xy * &(&x + &y))
            + &zeta * &(x.pow(2) + y.pow(2))
            - &t.pow(2) * &xy
            + &(&t * &self.delta) * &(&x + &y)
            - self.delta.pow(2)
    }
}

/// `H = p²/2 + a x⁴/4 + b x³/3 + c x²/2 + d x` in `x = x1` and the symbol `p`.
pub fn quartic_hamiltonian() -> Polynomial {
    let x = Polynomial::state(1, 0);
    sym("p").pow(2).scale(&q(1, 2))
        + (sym("a") * x.pow(4)).scale(&q(1, 4))
        + (sym("b") * x.pow(3)).scale(&q(1, 3))
        + (sym("c") * x.pow(2)).scale(&q(1, 2))
        + sym("d") * x
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuarticCase {
    pub system: PolyOdeSystem,
    pub map: BirationalMap,
    pub coefficients: QrtCoefficients,
    pub p1: Polynomial,
    pub p2: Polynomial,
}

/// `ẍ = −a x³ − b x² − c x − d`, symbolic when `params` is `None` and fully
/// bound (including `h`) otherwise.
pub fn quartic_oscillator(params: Option<&QuarticParams>) -> Result<QuarticCase, CaseError> {
    let x = Polynomial::state(1, 0);
    let rhs = -(sym("a") * x.pow(3)) - sym("b") * x.pow(2) - sym("c") * x - sym("d");
    let symbolic = PolyOdeSystem::new(2, vec![rhs.clone()])?;
    let map = solve_forward(&discretize(&symbolic)?)?;
    Ok(match params {
        None => {
            let coefficients = QrtCoefficients::symbolic();
            QuarticCase {
                system: symbolic,
                map,
                p1: coefficients.p1(),
                p2: coefficients.p2(),
                coefficients,
            }
        }
        Some(p) => {
            let values = p.bindings();
            let coefficients = QrtCoefficients::from_params(p);
            QuarticCase {
                system: PolyOdeSystem::new(2, vec![rhs.bind(&values)])?,
                map: map.bind(&values)?,
                p1: coefficients.p1(),
                p2: coefficients.p2(),
                coefficients,
            }
        }
    })
}

/// Whether the forward map commutes with `x → −x` on every state variable.
pub fn is_odd_symmetric(map: &BirationalMap) -> Result<bool, CaseError> {
    let fwd = map
        .forward()
        .ok_or(crate::dynamics::DynamicsError::NoSymbolicForm(map.components()))?;
    let sigma: BTreeMap<Var, RationalFunction> = map
        .state_vars()
        .into_iter()
        .map(|v| {
            let neg = RationalFunction::from_poly(-Polynomial::var(v.clone()));
            (v, neg)
        })
        .collect();
    for f in fwd {
        if f.substitute(&sigma)? != -f {
            return Ok(false);
        }
    }
    Ok(true)
}
