//! Rational functions as numerator/denominator polynomial pairs.
//!
//! Reduction removes integer content, common monomial factors, and exact
//! polynomial quotients between numerator and denominator. There is no full
//! multivariate gcd, so two equal rational functions may be stored with
//! different representatives; equality is decided by cross-multiplication.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::Signed;

use super::monomial::Var;
use super::polynomial::{qi, Polynomial, Rational, Scalar};
use super::PolyError;

#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionUndefined);
        }
        Ok(RationalFunction { num, den }.reduced())
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(Polynomial::var(v))
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn into_parts(self) -> (Polynomial, Polynomial) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial value when the denominator is constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        self.den.as_constant().map(|c| self.num.scale(&(qi(1) / c)))
    }

    fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            return RationalFunction::from_poly(Polynomial::zero());
        }
        let common = self.num.monomial_content().gcd(&self.den.monomial_content());
        if !common.is_one() {
            self.num = self.num.div_monomial(&common).expect("common factor");
            self.den = self.den.div_monomial(&common).expect("common factor");
        }
        if !self.den.is_constant() {
            if let Some(quot) = self.num.div_exact(&self.den) {
                return RationalFunction::from_poly(quot);
            }
            if !self.num.is_constant() {
                if let Some(quot) = self.den.div_exact(&self.num) {
                    // num / (num * quot) = 1 / quot
                    self.num = Polynomial::one();
                    self.den = quot;
                }
            }
        }
        let mut cd = self.den.content();
        if self
            .den
            .leading_term()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
        {
            cd = -cd;
        }
        let inv = qi(1) / cd;
        let num = self.num.scale(&inv);
        let den = self.den.scale(&inv);
        RationalFunction { num, den }
    }

    pub fn recip(&self) -> Result<Self, PolyError> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        RationalFunction {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
        .reduced()
    }

    pub fn derivative(&self, v: &Var) -> Self {
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return RationalFunction {
                num: dn,
                den: self.den.clone(),
            }
            .reduced();
        }
        let num = &dn * &self.den - &self.num * &dd;
        RationalFunction {
            num,
            den: self.den.pow(2),
        }
        .reduced()
    }

    pub fn map_vars<F: Fn(&Var) -> Var>(&self, f: F) -> Self {
        RationalFunction {
            num: self.num.map_vars(&f),
            den: self.den.map_vars(&f),
        }
    }

    pub fn shift(&self, by: i32) -> Self {
        RationalFunction {
            num: self.num.shift(by),
            den: self.den.shift(by),
        }
    }

    /// Composition with a rational substitution.
    pub fn substitute(&self, sigma: &BTreeMap<Var, RationalFunction>) -> Result<Self, PolyError> {
        let n = super::substitute(&self.num, sigma)?;
        let d = super::substitute(&self.den, sigma)?;
        n / d
    }

    pub fn bind(&self, values: &BTreeMap<Var, Rational>) -> Result<Self, PolyError> {
        RationalFunction::new(self.num.bind(values), self.den.bind(values))
    }

    pub fn eval<S: Scalar>(&self, point: &BTreeMap<Var, S>) -> Result<S, PolyError> {
        self.eval_with(|v| point.get(v).cloned())
    }

    pub fn eval_with<S: Scalar, F: Fn(&Var) -> Option<S>>(&self, lookup: F) -> Result<S, PolyError> {
        let d = self.den.eval_with(&lookup)?;
        let n = self.num.eval_with(&lookup)?;
        n.div(&d).ok_or(PolyError::DenominatorVanished)
    }

    /// The polynomial `self.num * other.den - other.num * self.den`, which is
    /// zero exactly when the two rational functions are equal.
    pub fn cross_difference(&self, other: &RationalFunction) -> Polynomial {
        &self.num * &other.den - &other.num * &self.den
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        self.cross_difference(other).is_zero()
    }
}

impl From<Polynomial> for RationalFunction {
    fn from(p: Polynomial) -> Self {
        RationalFunction::from_poly(p)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant() == Some(qi(1)) {
            return write!(f, "{}", self.num);
        }
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Add<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        if self.den == o.den {
            return RationalFunction {
                num: &self.num + &o.num,
                den: self.den.clone(),
            }
            .reduced();
        }
        RationalFunction {
            num: &self.num * &o.den + &o.num * &self.den,
            den: &self.den * &o.den,
        }
        .reduced()
    }
}

impl Sub<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl Mul<&RationalFunction> for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        RationalFunction {
            num: &self.num * &o.num,
            den: &self.den * &o.den,
        }
        .reduced()
    }
}

impl Div<RationalFunction> for RationalFunction {
    type Output = Result<RationalFunction, PolyError>;
    fn div(self, o: RationalFunction) -> Self::Output {
        RationalFunction::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Add for RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: RationalFunction) -> RationalFunction {
        &self + &o
    }
}

impl Sub for RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: RationalFunction) -> RationalFunction {
        &self - &o
    }
}

impl Mul for RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: RationalFunction) -> RationalFunction {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::polynomial::q;

    fn x() -> Polynomial {
        Polynomial::state(1, 0)
    }
    fn y() -> Polynomial {
        Polynomial::state(2, 0)
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            RationalFunction::new(x(), Polynomial::zero()),
            Err(PolyError::DivisionUndefined)
        ));
    }

    #[test]
    fn reduces_content_and_monomials() {
        let r = RationalFunction::new(
            (&x() * &x() * &y()).scale(&qi(4)),
            (&x() * &(y() + Polynomial::one())).scale(&qi(6)),
        )
        .unwrap();
        assert_eq!(r.num(), &(&x() * &y()).scale(&q(2, 3)));
        assert_eq!(r.den(), &(y() + Polynomial::one()));
    }

    #[test]
    fn exact_quotients_collapse() {
        let a = x() + y();
        let r = RationalFunction::new(a.pow(3), a.pow(2)).unwrap();
        assert_eq!(r.den(), &Polynomial::one());
        assert_eq!(r.num(), &a);
        let s = RationalFunction::new(a.clone(), a.pow(2)).unwrap();
        assert_eq!(s.num(), &Polynomial::one());
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let a = RationalFunction::new(x(), y()).unwrap();
        let b = RationalFunction {
            num: &x() * &(x() + Polynomial::int(2)),
            den: &y() * &(x() + Polynomial::int(2)),
        };
        assert_eq!(a, b);
    }

    #[test]
    fn quotient_rule() {
        let r = RationalFunction::new(Polynomial::one(), x()).unwrap();
        let d = r.derivative(&Var::state(1, 0));
        assert_eq!(d, RationalFunction::new(Polynomial::int(-1), x().pow(2)).unwrap());
    }

    #[test]
    fn eval_reports_vanishing_denominator() {
        let r = RationalFunction::new(Polynomial::one(), x()).unwrap();
        let pt = BTreeMap::from([(Var::state(1, 0), qi(0))]);
        assert!(matches!(r.eval(&pt), Err(PolyError::DenominatorVanished)));
        let pt = BTreeMap::from([(Var::state(1, 0), 0.0f64)]);
        assert!(matches!(r.eval(&pt), Err(PolyError::DenominatorVanished)));
    }
}
