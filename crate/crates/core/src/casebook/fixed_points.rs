use num_traits::Signed;

use crate::dynamics::{char_poly_and_roots, BirationalMap, NumericMap, SpectrumReport};
use crate::poly::{qi, rational_to_f64, Polynomial, Rational, Var};

use super::{beam_lagrangian, beam_symmetric, float_params, BeamParams, CaseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeamMapKind {
    /// The symmetric higher-order discretization.
    Symmetric,
    /// The variational discretization.
    Lagrangian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport {
    pub kind: BeamMapKind,
    pub epsilon: i64,
    pub delta: Rational,
    /// All real fixed points `±√(ε ± √δ)`, ascending.
    pub fixed_points: Vec<f64>,
    /// `√(ε + √δ)`, the point analysed.
    pub w_star: f64,
    pub spectrum: SpectrumReport,
    /// `(4 w √δ)^(1/4)` for the differential equation.
    pub continuous_gamma: f64,
    /// `ln λ / h` for the largest real eigenvalue of the map.
    pub discrete_gamma: Option<f64>,
    /// `|λ₁λ₂ − 1|` for the real pair, if there is one.
    pub reciprocal_defect: Option<f64>,
    /// Largest `||μ| − 1|` over the non-real roots, if any.
    pub unit_modulus_defect: Option<f64>,
    /// `Some(true)` when the exact residual at `w*` reduces to zero; `None`
    /// when `√δ` is irrational.
    pub exact_residual_zero: Option<bool>,
}

/// The square root of `r` when it is a perfect rational square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

/// Residual of the bound map equations on a constant window `t`, reduced
/// modulo `t² − s`. Zero exactly when `±√s` is a fixed point.
pub fn exact_fixed_point_residual(map: &BirationalMap, s: &Rational) -> Result<Polynomial, CaseError> {
    let t = Var::param("t");
    let mut out = Polynomial::zero();
    for e in map.equations() {
        let constant = e.map_vars(|v| if v.is_state() { t.clone() } else { v.clone() });
        for (k, coeff) in constant.coefficients_in(&t).into_iter().enumerate() {
            if coeff.vars().iter().any(|v| v != &t) {
                let free = coeff.vars().into_iter().next().expect("nonempty");
                return Err(crate::dynamics::DynamicsError::UnboundParameter(free.to_string()).into());
            }
            let k = k as u32;
            let factor = Polynomial::constant(num_traits::pow(s.clone(), (k / 2) as usize));
            let reduced = if k % 2 == 1 { Polynomial::var(t.clone()) } else { Polynomial::one() };
            out = out + coeff * factor * reduced;
        }
    }
    Ok(out)
}

/// Fixed points of a beam map in normal form (`a = 1`, `b = −2ε`,
/// `c = 1 − δ`) and the spectrum of the linearization at `√(ε + √δ)`.
pub fn beam_fixed_point_analysis(kind: BeamMapKind, params: &BeamParams) -> Result<FixedPointReport, CaseError> {
    if params.a != qi(1) {
        return Err(CaseError::Invalid("normal form requires a = 1".into()));
    }
    let eps2 = -params.b.clone();
    let epsilon = if eps2 == qi(2) {
        1
    } else if eps2 == qi(-2) {
        -1
    } else {
        return Err(CaseError::InvalidEpsilon);
    };
    let delta = qi(1) - params.c.clone();
    if delta.is_negative() {
        return Err(CaseError::NoRealFixedPoint);
    }
    let root_delta = rational_to_f64(&delta).sqrt();
    let eps = epsilon as f64;
    let mut fixed_points = Vec::new();
    for s in [eps + root_delta, eps - root_delta] {
        if s >= 0.0 {
            fixed_points.push(s.sqrt());
            fixed_points.push(-s.sqrt());
        }
    }
    if fixed_points.is_empty() {
        return Err(CaseError::NoRealFixedPoint);
    }
    fixed_points.sort_by(f64::total_cmp);
    fixed_points.dedup();
    let w_star = (eps + root_delta).sqrt();

    let map = match kind {
        BeamMapKind::Symmetric => beam_symmetric(&params.coefficients())?.map,
        BeamMapKind::Lagrangian => beam_lagrangian(&params.coefficients())?.map,
    };
    let exact_residual_zero = match rational_sqrt(&delta) {
        Some(r) => {
            let bound = map.bind(&params.bindings())?;
            Some(exact_fixed_point_residual(&bound, &(qi(epsilon) + r))?.is_zero())
        }
        None => None,
    };
    let h = rational_to_f64(&params.h);
    let num = NumericMap::new(&map, h, &float_params(&params.bindings()))?;
    let p = vec![w_star; 4];
    let mut spectrum = char_poly_and_roots(&num.linearize_at(&p)?)?;
    spectrum.fixed_point = Some(p);

    let real = spectrum.real_roots(1e-8);
    let (discrete_gamma, reciprocal_defect) = if real.len() >= 2 {
        let lo = real.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = real.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (Some(hi.ln() / h), Some((lo * hi - 1.0).abs()))
    } else {
        (None, None)
    };
    let complex: Vec<f64> = spectrum
        .roots
        .iter()
        .filter(|z| z.im.abs() > 1e-8 * z.norm().max(1.0))
        .map(|z| (z.norm() - 1.0).abs())
        .collect();
    let unit_modulus_defect = (!complex.is_empty()).then(|| complex.iter().copied().fold(0.0, f64::max));
    Ok(FixedPointReport {
        kind,
        epsilon,
        continuous_gamma: (4.0 * w_star * root_delta).powf(0.25),
        delta,
        fixed_points,
        w_star,
        spectrum,
        discrete_gamma,
        reciprocal_defect,
        unit_modulus_defect,
        exact_residual_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn params(delta: Rational) -> BeamParams {
        BeamParams::uniform(qi(0), qi(0), qi(0), q(1, 10))
            .normal_form(1, delta)
            .unwrap()
    }

    #[test]
    fn sqrt_of_rationals() {
        assert_eq!(rational_sqrt(&q(9, 4)), Some(q(3, 2)));
        assert_eq!(rational_sqrt(&q(1, 2)), None);
        assert_eq!(rational_sqrt(&q(-1, 4)), None);
    }

    #[test]
    fn fixed_point_structure_both_maps() {
        for kind in [BeamMapKind::Symmetric, BeamMapKind::Lagrangian] {
            let r = beam_fixed_point_analysis(kind, &params(q(1, 4))).unwrap();
            assert_eq!(r.fixed_points.len(), 4);
            assert!((r.w_star - 1.5f64.sqrt()).abs() < 1e-15);
            assert!((r.continuous_gamma - 6f64.powf(0.125)).abs() < 1e-12);
            assert_eq!(r.exact_residual_zero, Some(true));
            assert!(r.spectrum.palindromic_defect < 1e-9, "{r:?}");
            assert!(r.reciprocal_defect.unwrap() < 1e-9);
            assert!(r.unit_modulus_defect.unwrap() < 1e-7);
            assert!((r.discrete_gamma.unwrap() - r.continuous_gamma).abs() < 0.05);
        }
    }

    #[test]
    fn no_real_fixed_point() {
        let p = BeamParams::uniform(qi(0), qi(0), qi(0), q(1, 10))
            .normal_form(-1, q(1, 4))
            .unwrap();
        assert_eq!(
            beam_fixed_point_analysis(BeamMapKind::Symmetric, &p),
            Err(CaseError::NoRealFixedPoint)
        );
    }
}
