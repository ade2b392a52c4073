//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::monomial::{Monomial, Var};
use super::PolyError;

pub type Rational = BigRational;

/// Exact rational `num/den`.
pub fn q(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact integer as a rational.
pub fn qi(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Numeric kinds a polynomial can be evaluated in.
pub trait Scalar: Clone {
    fn from_rational(r: &Rational) -> Self;
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// `None` when `o` is zero.
    fn div(&self, o: &Self) -> Option<Self>;
    fn vanishes(&self) -> bool;

    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one_value();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if *o == 0.0 {
            None
        } else {
            Some(self / o)
        }
    }
    fn vanishes(&self) -> bool {
        *self == 0.0
    }
    fn powu(&self, e: u32) -> Self {
        self.powi(e as i32)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerator/denominator: scale down both before dividing.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational parsed from a decimal string such as `0.1`, `-3/2` or `1e-3`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// A polynomial over the rationals in [`Var`]s.
///
/// Terms are kept canonical: no zero coefficients, monomials ordered
/// graded-lexicographically, so equal polynomials compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(qi(1))
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Polynomial::constant(qi(n))
    }

    pub fn var(v: Var) -> Self {
        Polynomial::term(qi(1), Monomial::var(v, 1))
    }

    /// `x_j^(k)`.
    pub fn state(component: u32, shift: i32) -> Self {
        Polynomial::var(Var::state(component, shift))
    }

    pub fn param(name: &str) -> Self {
        Polynomial::var(Var::param(name))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_zero() {
            Some(qi(0))
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(|| qi(0))
    }

    /// Largest term in graded-lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn state_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::state_degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.degree_in(v) > 0)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.mul(mono), k.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact partial derivative.
    pub fn derivative(&self, v: &Var) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            if e == 0 {
                continue;
            }
            let reduced = m.div(&Monomial::var(v.clone(), 1)).expect("exponent is positive");
            out.add_term(reduced, c * qi(e as i64));
        }
        out
    }

    /// Renames variables; colliding images are merged.
    pub fn map_vars<F: Fn(&Var) -> Var>(&self, f: F) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.map_vars(&f), c.clone())))
    }

    /// Moves every state variable by `by` time steps.
    pub fn shift(&self, by: i32) -> Polynomial {
        if by == 0 {
            return self.clone();
        }
        self.map_vars(|v| v.shifted(by))
    }

    /// Substitutes polynomials for variables; unmapped variables stay fixed.
    pub fn compose(&self, sigma: &BTreeMap<Var, Polynomial>) -> Polynomial {
        let mut cache: BTreeMap<(Var, u32), Polynomial> = BTreeMap::new();
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut acc = Polynomial::constant(c.clone());
            let mut kept = Vec::new();
            for (v, e) in m.factors() {
                match sigma.get(v) {
                    Some(img) => {
                        let pw = cache
                            .entry((v.clone(), *e))
                            .or_insert_with(|| img.pow(*e))
                            .clone();
                        acc = &acc * &pw;
                    }
                    None => kept.push((v.clone(), *e)),
                }
            }
            let kept = Monomial::from_factors(kept);
            for (m2, c2) in acc.terms {
                out.add_term(m2.mul(&kept), c2);
            }
        }
        out
    }

    /// Substitutes exact constants for variables.
    pub fn bind(&self, values: &BTreeMap<Var, Rational>) -> Polynomial {
        let sigma = values
            .iter()
            .map(|(v, r)| (v.clone(), Polynomial::constant(r.clone())))
            .collect();
        self.compose(&sigma)
    }

    /// Evaluates with every variable bound.
    pub fn eval<S: Scalar>(&self, point: &BTreeMap<Var, S>) -> Result<S, PolyError> {
        self.eval_with(|v| point.get(v).cloned())
    }

    pub fn eval_with<S: Scalar, F: Fn(&Var) -> Option<S>>(&self, lookup: F) -> Result<S, PolyError> {
        let mut acc = S::zero_value();
        for (m, c) in &self.terms {
            let mut t = S::from_rational(c);
            for (v, e) in m.factors() {
                let x = lookup(v).ok_or_else(|| PolyError::UnboundVariable(v.to_string()))?;
                t = t.mul(&x.powu(*e));
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Groups terms by their monomial in the variables accepted by `pred`;
    /// the map values are the cofactors over the remaining variables.
    pub fn coefficients_by<F: Fn(&Var) -> bool>(&self, pred: F) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (inside, outside) = m.split(&pred);
            out.entry(inside).or_default().add_term(outside, c.clone());
        }
        out
    }

    /// Coefficients of `v^0, v^1, ...` as polynomials free of `v`.
    pub fn coefficients_in(&self, v: &Var) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            let rest = m.div(&Monomial::var(v.clone(), e)).expect("divides");
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    /// Writes `self = Σ coeffs[v]·v + remainder` for `v` in `vars`, requiring
    /// joint degree at most one in `vars`.
    pub fn collect_linear(
        &self,
        vars: &BTreeSet<Var>,
    ) -> Result<(BTreeMap<Var, Polynomial>, Polynomial), PolyError> {
        let mut coeffs: BTreeMap<Var, Polynomial> = BTreeMap::new();
        let mut rem = Polynomial::zero();
        for (m, c) in &self.terms {
            let (inside, outside) = m.split(|v| vars.contains(v));
            match inside.degree() {
                0 => rem.add_term(outside, c.clone()),
                1 => {
                    let v = inside.factors()[0].0.clone();
                    coeffs.entry(v).or_default().add_term(outside, c.clone());
                }
                _ => return Err(PolyError::NotLinear(m.to_string())),
            }
        }
        Ok((coeffs, rem))
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients. Zero for the zero polynomial.
    pub fn content(&self) -> Rational {
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        if g.is_zero() {
            return qi(0);
        }
        BigRational::new(g, l)
    }

    /// Integer-coefficient primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut c = self.content();
        if self.leading_term().map(|(_, k)| k.is_negative()).unwrap_or(false) {
            c = -c;
        }
        self.scale(&(qi(1) / c))
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    pub fn div_monomial(&self, mono: &Monomial) -> Option<Polynomial> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            out.insert(m.div(mono)?, c.clone());
        }
        Some(Polynomial { terms: out })
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        let (lm, lc) = d.leading_term()?;
        if d.len() == 1 {
            return self.div_monomial(lm).map(|p| p.scale(&(qi(1) / lc)));
        }
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((rm, rc)) = rem.leading_term() {
            let m = rm.div(lm)?;
            let c = rc / lc;
            let t = Polynomial::term(c.clone(), m.clone());
            rem = rem - d.mul_monomial(&m).scale(&c);
            quot = quot + t;
        }
        Some(quot)
    }

    /// Canonical text form, largest term first, parseable by [`super::parse_polynomial`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl From<Var> for Polynomial {
    fn from(v: Var) -> Self {
        Polynomial::var(v)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Add<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn add(mut self, o: &Polynomial) -> Polynomial {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
        self
    }
}

impl Add<Polynomial> for Polynomial {
    type Output = Polynomial;
    fn add(mut self, o: Polynomial) -> Polynomial {
        if self.terms.len() < o.terms.len() {
            return o + &self;
        }
        for (m, c) in o.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Add<Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: Polynomial) -> Polynomial {
        o + self
    }
}

impl Sub<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, o: &Polynomial) -> Polynomial {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), -c);
        }
        self
    }
}

impl Sub<Polynomial> for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, o: Polynomial) -> Polynomial {
        for (m, c) in o.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl Sub<Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: Polynomial) -> Polynomial {
        -o + self
    }
}

impl Mul<Polynomial> for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        &self * &o
    }
}

impl Mul<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        &self * o
    }
}

impl Mul<Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        self * &o
    }
}

impl std::iter::Sum for Polynomial {
    fn sum<I: Iterator<Item = Polynomial>>(iter: I) -> Self {
        iter.fold(Polynomial::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Polynomial {
    fn product<I: Iterator<Item = Polynomial>>(iter: I) -> Self {
        iter.fold(Polynomial::one(), |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: u32) -> Polynomial {
        Polynomial::state(j, 0)
    }

    #[test]
    fn additive_inverse_is_zero() {
        let p = x(1) + Polynomial::int(3);
        assert!((&p - &p).is_zero());
        assert!((x(1) + -x(1)).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let lhs = (x(1) + x(2)) * (x(1) - x(2));
        let rhs = x(1).pow(2) - x(2).pow(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn binomial_square_in_shifts() {
        let a = Polynomial::state(1, 0);
        let b = Polynomial::state(1, 1);
        let lhs = (&a + &b).pow(2);
        let rhs = a.pow(2) + (&a * &b).scale(&qi(2)) + b.pow(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation() {
        let p = x(1).pow(2) + Polynomial::one();
        let pt = BTreeMap::from([(Var::state(1, 0), qi(2))]);
        assert_eq!(p.eval(&pt).unwrap(), qi(5));
        let ptf = BTreeMap::from([(Var::state(1, 0), 2.0f64)]);
        assert_eq!(p.eval(&ptf).unwrap(), 5.0);
        let err = p.eval::<f64>(&BTreeMap::new()).unwrap_err();
        assert!(matches!(err, PolyError::UnboundVariable(_)));
    }

    #[test]
    fn collect_linear_splits_coefficients() {
        let xt = Var::state(1, 1);
        let p = Polynomial::param("a") * Polynomial::var(xt.clone()) * Polynomial::state(2, 0)
            + Polynomial::param("b");
        let (coeffs, rem) = p.collect_linear(&BTreeSet::from([xt.clone()])).unwrap();
        assert_eq!(coeffs[&xt], Polynomial::param("a") * Polynomial::state(2, 0));
        assert_eq!(rem, Polynomial::param("b"));
    }

    #[test]
    fn collect_linear_rejects_joint_quadratic() {
        let a = Var::state(1, 1);
        let b = Var::state(2, 1);
        let p = Polynomial::var(a.clone()) * Polynomial::var(b.clone());
        let err = p.collect_linear(&BTreeSet::from([a, b])).unwrap_err();
        assert!(matches!(err, PolyError::NotLinear(_)));
    }

    #[test]
    fn exact_division() {
        let a = x(1) + Polynomial::param("h");
        let b = x(2) - Polynomial::int(2);
        let p = &a * &b;
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!((&p + Polynomial::one()).div_exact(&a).is_none());
    }

    #[test]
    fn content_and_primitive_part() {
        let p = x(1).scale(&q(-3, 2)) + Polynomial::constant(q(9, 4));
        assert_eq!(p.content(), q(3, 4));
        assert_eq!(p.primitive(), x(1).scale(&qi(2)) - Polynomial::int(3));
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("-3/2").unwrap(), q(-3, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("2.5E1").unwrap(), qi(25));
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn display_is_leading_term_first() {
        let p = x(1).pow(2).scale(&q(3, 2)) - x(2) + Polynomial::int(4);
        assert_eq!(p.to_string(), "3/2*x1^2 - x2 + 4");
    }
}
