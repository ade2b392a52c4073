//! Variables and monomials.
//!
//! State variables are indexed by a component `j` and a time shift `k`, so
//! `x_j^(k)` approximates `x_j(t + k h)`. Component 0 is the dummy variable
//! `x_0 = 1` and is never stored. Parameters are named symbols (`a`, `h`, ...).

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// A polynomial variable.
///
/// The derived order is the canonical one: all state variables precede all
/// parameters; state variables compare by component, then by shift;
/// parameters compare by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    State { component: u32, shift: i32 },
    Param(Arc<str>),
}

impl Var {
    pub fn state(component: u32, shift: i32) -> Self {
        Var::State { component, shift }
    }

    pub fn param(name: &str) -> Self {
        Var::Param(Arc::from(name))
    }

    pub fn is_state(&self) -> bool {
        matches!(self, Var::State { .. })
    }

    pub fn is_param(&self) -> bool {
        matches!(self, Var::Param(_))
    }

    pub fn component(&self) -> Option<u32> {
        match self {
            Var::State { component, .. } => Some(*component),
            Var::Param(_) => None,
        }
    }

    pub fn shift(&self) -> Option<i32> {
        match self {
            Var::State { shift, .. } => Some(*shift),
            Var::Param(_) => None,
        }
    }

    /// Moves a state variable by `by` steps; parameters are unchanged.
    pub fn shifted(&self, by: i32) -> Var {
        match self {
            Var::State { component, shift } => Var::State {
                component: *component,
                shift: shift + by,
            },
            p => p.clone(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Var::Param(n) => Some(n),
            Var::State { .. } => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::State { component, shift } => {
                for _ in 0..(-shift).max(0) {
                    f.write_str("_")?;
                }
                write!(f, "x{component}")?;
                for _ in 0..(*shift).max(0) {
                    f.write_str("'")?;
                }
                Ok(())
            }
            Var::Param(name) => f.write_str(name),
        }
    }
}

/// A power product of variables, stored sparsely as `(var, exponent)` pairs
/// sorted by variable with strictly positive exponents.
///
/// Monomials are ordered graded-lexicographically: total degree first, then
/// lexicographically on exponent vectors taken in the canonical [`Var`] order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(Var, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: Vec::new() }
    }

    /// `var^exp`; the dummy state variable `x_0` collapses to the constant.
    pub fn var(var: Var, exp: u32) -> Self {
        if exp == 0 || var.component() == Some(0) {
            return Monomial::one();
        }
        Monomial {
            factors: vec![(var, exp)],
        }
    }

    /// Builds a monomial from arbitrary factors, merging repeats and dropping
    /// zero exponents and the dummy variable.
    pub fn from_factors<I: IntoIterator<Item = (Var, u32)>>(factors: I) -> Self {
        let mut v: Vec<(Var, u32)> = factors
            .into_iter()
            .filter(|(var, e)| *e > 0 && var.component() != Some(0))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(v.len());
        for (var, e) in v {
            match out.last_mut() {
                Some((last, le)) if *last == var => *le += e,
                _ => out.push((var, e)),
            }
        }
        Monomial { factors: out }
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, var: &Var) -> u32 {
        self.factors
            .iter()
            .find(|(v, _)| v == var)
            .map_or(0, |(_, e)| *e)
    }

    /// Total degree over the variables accepted by `pred`.
    pub fn degree_where<F: Fn(&Var) -> bool>(&self, pred: F) -> u32 {
        self.factors
            .iter()
            .filter(|(v, _)| pred(v))
            .map(|(_, e)| e)
            .sum()
    }

    pub fn state_degree(&self) -> u32 {
        self.degree_where(Var::is_state)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { factors: out }
    }

    pub fn pow(&self, exp: u32) -> Monomial {
        if exp == 0 {
            return Monomial::one();
        }
        Monomial {
            factors: self
                .factors
                .iter()
                .map(|(v, e)| (v.clone(), e * exp))
                .collect(),
        }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for (v, e) in &self.factors {
            let mut e = *e;
            if j < other.factors.len() && other.factors[j].0 == *v {
                if other.factors[j].1 > e {
                    return None;
                }
                e -= other.factors[j].1;
                j += 1;
            } else if j < other.factors.len() && other.factors[j].0 < *v {
                return None;
            }
            if e > 0 {
                out.push((v.clone(), e));
            }
        }
        if j < other.factors.len() {
            return None;
        }
        Some(Monomial { factors: out })
    }

    /// Greatest common divisor of two monomials.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (v, e) in &self.factors {
            let f = other.degree_in(v);
            if f > 0 {
                out.push((v.clone(), (*e).min(f)));
            }
        }
        Monomial { factors: out }
    }

    /// Splits into the part over variables accepted by `pred` and the rest.
    pub fn split<F: Fn(&Var) -> bool>(&self, pred: F) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.factors.iter().cloned().partition(|(v, _)| pred(v));
        (Monomial { factors: a }, Monomial { factors: b })
    }

    pub fn map_vars<F: Fn(&Var) -> Var>(&self, f: F) -> Monomial {
        Monomial::from_factors(self.factors.iter().map(|(v, e)| (f(v), *e)))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.factors.iter().map(|(v, _)| v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        for (a, b) in self.factors.iter().zip(other.factors.iter()) {
            match a.0.cmp(&b.0) {
                // `self` has a positive exponent on an earlier variable.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a.1.cmp(&b.1) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
        self.factors.len().cmp(&other.factors.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: u32, k: i32) -> Var {
        Var::state(j, k)
    }

    #[test]
    fn dummy_variable_is_eliminated() {
        assert!(Monomial::var(x(0, 3), 2).is_one());
        let m = Monomial::from_factors([(x(0, 1), 1), (x(1, 0), 2)]);
        assert_eq!(m.factors(), &[(x(1, 0), 2)]);
    }

    #[test]
    fn var_order_is_component_then_shift_then_name() {
        assert!(x(1, 5) < x(2, -3));
        assert!(x(1, -1) < x(1, 0));
        assert!(x(9, 9) < Var::param("a"));
        assert!(Var::param("a") < Var::param("b"));
    }

    #[test]
    fn graded_lex_order() {
        let a = Monomial::var(x(1, 0), 1);
        let b = Monomial::var(x(2, 0), 1);
        let a2 = Monomial::var(x(1, 0), 2);
        let ab = a.mul(&b);
        assert!(Monomial::one() < b);
        assert!(b < a);
        assert!(a < ab);
        assert!(ab < a2);
    }

    #[test]
    fn division_and_gcd() {
        let a = Monomial::from_factors([(x(1, 0), 2), (x(2, 0), 1)]);
        let b = Monomial::from_factors([(x(1, 0), 1)]);
        assert_eq!(a.div(&b).unwrap(), Monomial::from_factors([(x(1, 0), 1), (x(2, 0), 1)]));
        assert!(b.div(&a).is_none());
        assert_eq!(a.gcd(&b), b);
        let c = Monomial::var(x(3, 0), 1);
        assert!(a.div(&c).is_none());
    }

    #[test]
    fn display_uses_shift_marks() {
        assert_eq!(x(1, 2).to_string(), "x1''");
        assert_eq!(x(2, -1).to_string(), "_x2");
        let m = Monomial::from_factors([(x(1, 1), 2), (Var::param("a"), 1)]);
        assert_eq!(m.to_string(), "x1'^2*a");
    }
}
