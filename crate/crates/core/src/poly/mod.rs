//! Exact polynomial and rational-function arithmetic over the rationals.

mod linalg;
mod monomial;
mod polynomial;
mod rational;
mod text;

use std::collections::BTreeMap;

use thiserror::Error;

pub use linalg::{
    determinant, invert_exact, nullspace_exact, rank_exact, rank_over_polynomials, MinorWitness,
};
pub use monomial::{Monomial, Var};
pub use polynomial::{parse_rational, q, qi, rational_to_f64, Polynomial, Rational, Scalar};
pub use rational::RationalFunction;
pub use text::{parse_polynomial, ParsePolyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionUndefined,
    #[error("denominator vanishes at the evaluation point")]
    DenominatorVanished,
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("monomial {0} is not linear in the requested variables")]
    NotLinear(String),
}

/// Substitutes rational functions for variables of `p`.
///
/// The result is formed over the common denominator `∏ den_v^deg_v(p)` and
/// then reduced.
pub fn substitute(
    p: &Polynomial,
    sigma: &BTreeMap<Var, RationalFunction>,
) -> Result<RationalFunction, PolyError> {
    let mut degs: BTreeMap<&Var, u32> = BTreeMap::new();
    for (v, img) in sigma {
        if img.den().is_zero() {
            return Err(PolyError::DivisionUndefined);
        }
        let d = p.degree_in(v);
        if d > 0 {
            degs.insert(v, d);
        }
    }
    let mut num_pows: BTreeMap<(&Var, u32), Polynomial> = BTreeMap::new();
    let mut den_pows: BTreeMap<(Var, u32), Polynomial> = BTreeMap::new();
    let den_pow = |v: &Var, e: u32, cache: &mut BTreeMap<(Var, u32), Polynomial>| -> Polynomial {
        cache
            .entry((v.clone(), e))
            .or_insert_with(|| sigma[v].den().pow(e))
            .clone()
    };

    let mut num = Polynomial::zero();
    for (m, c) in p.terms() {
        let mut acc = Polynomial::constant(c.clone());
        let mut kept = Vec::new();
        let mut touched: Vec<&Var> = Vec::new();
        for (v, e) in m.factors() {
            match sigma.get_key_value(v) {
                Some((key, img)) => {
                    touched.push(key);
                    let np = num_pows
                        .entry((key, *e))
                        .or_insert_with(|| img.num().pow(*e))
                        .clone();
                    acc = &acc * &np;
                    let extra = degs[key] - e;
                    if extra > 0 {
                        acc = &acc * &den_pow(key, extra, &mut den_pows);
                    }
                }
                None => kept.push((v.clone(), *e)),
            }
        }
        for (key, deg) in &degs {
            if touched.contains(key) {
                continue;
            }
            acc = &acc * &den_pow(key, *deg, &mut den_pows);
        }
        num = num + acc.mul_monomial(&Monomial::from_factors(kept));
    }
    let mut den = Polynomial::one();
    for (key, deg) in &degs {
        den = &den * &den_pow(key, *deg, &mut den_pows);
    }
    RationalFunction::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_constant_image() {
        let x = Var::state(1, 0);
        let p = Polynomial::var(x.clone()).pow(2);
        let img = RationalFunction::from_poly(Polynomial::one() + Polynomial::param("h"));
        let r = substitute(&p, &BTreeMap::from([(x, img)])).unwrap();
        let expect = (Polynomial::one() + Polynomial::param("h")).pow(2);
        assert_eq!(r, RationalFunction::from_poly(expect));
    }

    #[test]
    fn identity_substitution() {
        let x = Var::state(1, 0);
        let y = Var::state(2, 0);
        let p = Polynomial::var(x.clone()) * Polynomial::var(y.clone()) + Polynomial::int(3);
        let sigma = BTreeMap::from([
            (x.clone(), RationalFunction::var(x)),
            (y.clone(), RationalFunction::var(y)),
        ]);
        let r = substitute(&p, &sigma).unwrap();
        assert_eq!(r.num(), &p);
        assert_eq!(r.den(), &Polynomial::one());
    }

    #[test]
    fn mixed_denominators() {
        // x^2 + y with x -> 1/t, y -> 1/(t+1): (t+1 + t^2) / (t^2 (t+1))
        let x = Var::state(1, 0);
        let y = Var::state(2, 0);
        let t = Polynomial::param("t");
        let p = Polynomial::var(x.clone()).pow(2) + Polynomial::var(y.clone());
        let sigma = BTreeMap::from([
            (x, RationalFunction::new(Polynomial::one(), t.clone()).unwrap()),
            (y, RationalFunction::new(Polynomial::one(), &t + &Polynomial::one()).unwrap()),
        ]);
        let r = substitute(&p, &sigma).unwrap();
        let expect = RationalFunction::new(
            &t + &Polynomial::one() + t.pow(2),
            t.pow(2) * (&t + &Polynomial::one()),
        )
        .unwrap();
        assert_eq!(r, expect);
    }
}
