use std::collections::BTreeSet;

use crate::darboux::Pencil;
use crate::dynamics::{solve_forward, BirationalMap};
use crate::poly::{determinant, q, PolyError, Polynomial, Var};
use crate::scheme::{discretize, ImplicitScheme, PolyOdeSystem};

use super::{sym, CaseError};

/// `ẋ = p`, `ṗ = −b x² − d` under the plain first-order scheme, and the
/// additive map that remains after eliminating `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassCase {
    pub system: PolyOdeSystem,
    /// The map on `(x, p)`.
    pub map: BirationalMap,
    /// Consistency condition of two consecutive steps, `p` eliminated.
    pub relation: Polynomial,
    /// `(x̃ + x̲)(3βx + 2) − (4x − 2δ)` with `β = bh²/3`, `δ = dh²`.
    pub additive_form: Polynomial,
    /// Whether `relation` is a parameter-only multiple of `additive_form`.
    pub additive_form_holds: bool,
    /// The second-order map defined by `additive_form`.
    pub additive_map: BirationalMap,
}

/// Determinant of `[coef | rest]` for `k + 1` equations linear in `k`
/// unknowns. It vanishes exactly when the system is consistent.
pub fn eliminate_linear(equations: &[Polynomial], unknowns: &[Var]) -> Result<Polynomial, PolyError> {
    if equations.len() != unknowns.len() + 1 {
        return Err(PolyError::NotLinear(format!(
            "{} equations for {} unknowns",
            equations.len(),
            unknowns.len()
        )));
    }
    let set: BTreeSet<Var> = unknowns.iter().cloned().collect();
    let mut rows = Vec::with_capacity(equations.len());
    for e in equations {
        let (coeffs, rest) = e.collect_linear(&set)?;
        let mut row: Vec<Polynomial> = unknowns
            .iter()
            .map(|u| coeffs.get(u).cloned().unwrap_or_else(Polynomial::zero))
            .collect();
        row.push(rest);
        rows.push(row);
    }
    Ok(determinant(&rows))
}

pub fn kahan_weierstrass() -> Result<WeierstrassCase, CaseError> {
    let (x, p) = (Polynomial::state(1, 0), Polynomial::state(2, 0));
    let system = PolyOdeSystem::new(1, vec![p, -(sym("b") * x.pow(2)) - sym("d")])?;
    let scheme = discretize(&system)?;
    let map = solve_forward(&scheme)?;

    let mut eqs: Vec<Polynomial> = scheme.equations().to_vec();
    eqs.extend(scheme.equations().iter().map(|e| e.shift(1)));
    let unknowns: Vec<Var> = (0..3).map(|k| Var::state(2, k)).collect();
    // Two steps give four equations in the three momenta.
    let relation = eliminate_linear(&eqs, &unknowns)?;

    let h2 = sym("h").pow(2);
    let three_beta = sym("b") * h2.clone();
    let delta = sym("d") * h2;
    let (x0, x1, x2) = (Polynomial::state(1, 0), Polynomial::state(1, 1), Polynomial::state(1, 2));
    let additive_form = (&x2 + &x0) * (&three_beta * &x1 + Polynomial::int(2))
        - (x1.scale(&q(4, 1)) - delta.scale(&q(2, 1)));
    let additive_form_holds = !relation.is_zero()
        && relation
            .div_exact(&additive_form)
            .is_some_and(|k| !k.vars().iter().any(Var::is_state));
    let additive_map = solve_forward(&ImplicitScheme::from_equations(2, 1, vec![additive_form.clone()])?)?;
    Ok(WeierstrassCase {
        system,
        map,
        relation,
        additive_form,
        additive_form_holds,
        additive_map,
    })
}

/// Invariant pencil of the additive map `x̃ + x̲ = (4x − 2δ)/(3βx + 2)`:
/// `λ − β²x²y² + (4/3)βxy(x+y) + (4/3)(x²+y²) − (2/3)(4+βδ)xy + (4/3)δ(x+y)`.
pub fn additive_pencil(beta: &Polynomial, delta: &Polynomial) -> Pencil {
    let (x, y) = (Polynomial::state(1, 0), Polynomial::state(1, 1));
    let xy = &x * &y;
    let p2 = -(beta.pow(2) * xy.pow(2))
        + (beta * &(&xy * &(&x + &y))).scale(&q(4, 3))
        + (x.pow(2) + y.pow(2)).scale(&q(4, 3))
        - (Polynomial::int(4) + beta * delta).scale(&q(2, 3)) * xy
        + (delta * &(&x + &y)).scale(&q(4, 3));
    Pencil::new(Polynomial::one(), p2)
}

/// The higher-order pencil at `α = 0`, `γ = 1`:
/// `λ(1 + β(x+y)) − β²x²y² + 2βxy(x+y) + (βδ+2)(x²+y²) − 4xy + 2δ(x+y) − δ²`.
pub fn reduced_qrt_pencil(beta: &Polynomial, delta: &Polynomial) -> Pencil {
    let (x, y) = (Polynomial::state(1, 0), Polynomial::state(1, 1));
    let xy = &x * &y;
    let s = &x + &y;
    let p1 = Polynomial::one() + beta * &s;
    let p2 = -(beta.pow(2) * xy.pow(2))
        + (beta * &(&xy * &s)).scale(&q(2, 1))
        + (beta * delta + Polynomial::int(2)) * (x.pow(2) + y.pow(2))
        - xy.scale(&q(4, 1))
        + (delta * &s).scale(&q(2, 1))
        - delta.pow(2);
    Pencil::new(p1, p2)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::casebook::QrtCoefficients;
    use crate::darboux::{find_darboux, in_span, pencil_compare, PencilComparison};
    use crate::poly::{qi, substitute, RationalFunction};

    fn free_symbols() -> (Polynomial, Polynomial) {
        (sym("beta"), sym("delta"))
    }

    #[test]
    fn elimination_gives_additive_form() {
        let case = kahan_weierstrass().unwrap();
        assert!(case.additive_form_holds, "relation = {}", case.relation);
    }

    #[test]
    fn additive_pencil_is_invariant() {
        let case = kahan_weierstrass().unwrap();
        let vals = BTreeMap::from([
            (Var::param("b"), qi(2)),
            (Var::param("d"), qi(5)),
            (Var::param("h"), q(1, 10)),
        ]);
        let m = case.additive_map.bind(&vals).unwrap();
        let beta = Polynomial::constant(q(2, 300));
        let delta = Polynomial::constant(q(5, 100));
        let a = additive_pencil(&beta, &delta);
        let fwd = m.forward().unwrap();
        let sigma = BTreeMap::from([
            (Var::state(1, 0), fwd[0].clone()),
            (Var::state(1, 1), fwd[1].clone()),
        ]);
        let image = substitute(&a.p2, &sigma).unwrap();
        assert_eq!(image, RationalFunction::from_poly(a.p2.clone()));

        let found = find_darboux(&m, 4).unwrap();
        let unit: Vec<&Polynomial> = found
            .iter()
            .filter(|c| c.cofactor() == &RationalFunction::from_poly(Polynomial::one()))
            .map(|c| c.p())
            .collect();
        assert!(in_span(&unit, &a.p2));
    }

    #[test]
    fn reduced_pencil_is_the_specialized_qrt_pencil() {
        let (beta, delta) = free_symbols();
        let qrt = QrtCoefficients {
            alpha: Polynomial::zero(),
            beta: beta.clone(),
            gamma: Polynomial::one(),
            delta: delta.clone(),
        };
        let b = reduced_qrt_pencil(&beta, &delta);
        assert_eq!(b.p1, qrt.p1());
        assert_eq!(b.p2, qrt.p2());
    }

    #[test]
    fn pencils_differ() {
        let (beta, delta) = free_symbols();
        let a = additive_pencil(&beta, &delta);
        let b = reduced_qrt_pencil(&beta, &delta);
        assert!(matches!(pencil_compare(&a, &b), PencilComparison::Different(_)));
        assert_eq!(pencil_compare(&a, &a), PencilComparison::Equal);
    }
}
