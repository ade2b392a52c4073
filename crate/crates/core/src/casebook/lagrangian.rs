use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{solve_forward, BirationalMap, DynamicsError, NumericMap};
use crate::poly::{q, qi, rational_to_f64, Polynomial, Var};
use crate::scheme::ImplicitScheme;

use super::{beam_symmetric, float_params, sym, w, BeamCoefficients, BeamMapKind, BeamParams, CaseError};

/// A three-point discrete Lagrangian in `x1^(0..2)`, stored multiplied by
/// `h⁴` so that it stays polynomial in the symbol `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLagrangian {
    pub cleared: Polynomial,
}

/// `Σ_{i=0}^{2} ∂/∂w^(0) L(w^(−i), w^(1−i), w^(2−i))`, in `w^(−2..2)`.
pub fn discrete_euler_lagrange(l: &Polynomial) -> Polynomial {
    (0..3)
        .map(|i| l.derivative(&Var::state(1, i)).shift(-i))
        .sum()
}

impl DiscreteLagrangian {
    /// `h⁴·(T − V)` for the beam with the given weights.
    pub fn beam(coeffs: &BeamCoefficients) -> Self {
        let (w0, w1, w2) = (w(0), w(1), w(2));
        let kinetic = ((&w0 - &w1).pow(2).scale(&qi(2)) - (&w0 - &w2).pow(2)
            + (&w1 - &w2).pow(2).scale(&qi(2)))
        .scale(&q(1, 2));
        let al = &coeffs.alphas;
        let be = &coeffs.betas;
        let half = q(1, 2);
        let third = q(1, 3);
        let pair = |p: Polynomial, r: Polynomial| (p + r).scale(&half);
        let v5 = &al[0] * &(&w0 * &w1.pow(3) * &w2)
            + &al[1] * &pair(w0.pow(2) * w1.pow(3), w1.pow(2) * w2.pow(3))
            + &al[2] * &pair(w1.pow(2) * w0.pow(3), w2.pow(2) * w1.pow(3))
            + &al[3] * &pair(&w0 * &w1.pow(4), &w1 * &w2.pow(4))
            + &al[4] * &pair(&w1 * &w0.pow(4), &w2 * &w1.pow(4))
            + &al[5] * &(w0.pow(5) + w1.pow(5) + w2.pow(5)).scale(&third);
        let v3 = &be[0] * &(&w0 * &w1 * &w2)
            + &be[1] * &pair(&w0 * &w1.pow(2), &w1 * &w2.pow(2))
            + &be[2] * &pair(&w1 * &w0.pow(2), &w2 * &w1.pow(2))
            + &be[3] * &(w0.pow(3) + w1.pow(3) + w2.pow(3)).scale(&third);
        let potential = (&coeffs.a * &v5).scale(&q(1, 5))
            + (&coeffs.b * &v3).scale(&third)
            + (&coeffs.c * &(&w0 + &w1 + &w2)).scale(&third);
        DiscreteLagrangian {
            cleared: kinetic - sym("h").pow(4) * potential,
        }
    }

    pub fn euler_lagrange(&self) -> Polynomial {
        discrete_euler_lagrange(&self.cleared)
    }
}

/// Quartic part of the variational right-hand side, in `w^(−2..2)`.
pub fn expected_f4_hat(a: &Polynomial, alphas: &[Polynomial; 6]) -> Polynomial {
    let (wm2, wm1, w0, w1, w2) = (w(-2), w(-1), w(0), w(1), w(2));
    let i = |n: i64| Polynomial::int(n);
    let body = &alphas[0] * &(&wm2 * &wm1.pow(3) + i(3) * &wm1 * &w0.pow(2) * &w1 + w1.pow(3) * &w2)
        + &alphas[1] * &(i(3) * wm1.pow(2) * w0.pow(2) + i(2) * &w0 * &w1.pow(3))
        + &alphas[2] * &(i(2) * wm1.pow(3) * &w0 + i(3) * w0.pow(2) * w1.pow(2))
        + &alphas[3] * &(i(4) * &wm1 * &w0.pow(3) + w1.pow(4))
        + &alphas[4] * &(wm1.pow(4) + i(4) * w0.pow(3) * &w1)
        + &alphas[5] * &(i(5) * w0.pow(4));
    (a * &body).scale(&q(1, 5))
}

/// Quadratic part of the variational right-hand side, in `w^(−2..2)`.
pub fn expected_f2_hat(b: &Polynomial, betas: &[Polynomial; 4]) -> Polynomial {
    let (wm2, wm1, w0, w1, w2) = (w(-2), w(-1), w(0), w(1), w(2));
    let i = |n: i64| Polynomial::int(n);
    let body = &betas[0] * &(&wm2 * &wm1 + &wm1 * &w1 + &w1 * &w2)
        + &betas[1] * &(i(2) * &wm1 * &w0 + w1.pow(2))
        + &betas[2] * &(wm1.pow(2) + i(2) * &w0 * &w1)
        + &betas[3] * &(i(3) * w0.pow(2));
    (b * &body).scale(&q(1, 3))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamLagrangian {
    pub lagrangian: DiscreteLagrangian,
    /// Euler–Lagrange expression of the cleared Lagrangian, in `w^(−2..2)`.
    pub euler_lagrange: Polynomial,
    /// `Δ⁴w − h⁴(F̂₄ + F̂₂ + c)` built term by term.
    pub expected: Polynomial,
    pub matches: bool,
    pub map: BirationalMap,
}

pub fn beam_lagrangian(coeffs: &BeamCoefficients) -> Result<BeamLagrangian, CaseError> {
    let lagrangian = DiscreteLagrangian::beam(coeffs);
    let euler_lagrange = lagrangian.euler_lagrange();
    let delta4 = w(-2) - w(-1).scale(&qi(4)) + w(0).scale(&qi(6)) - w(1).scale(&qi(4)) + w(2);
    let rhs = expected_f4_hat(&coeffs.a, &coeffs.alphas)
        + expected_f2_hat(&coeffs.b, &coeffs.betas)
        + coeffs.c.clone();
    let expected = delta4 - sym("h").pow(4) * rhs;
    let matches = euler_lagrange == expected;
    let scheme = ImplicitScheme::from_equations(4, 1, vec![euler_lagrange.shift(2)])?;
    let map = solve_forward(&scheme)?;
    Ok(BeamLagrangian {
        lagrangian,
        euler_lagrange,
        expected,
        matches,
        map,
    })
}

/// Canonical coordinates `q₁ = w^(0)`, `q₂ = w^(1)`, `p₁`, `p₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OstrogradskyState {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl OstrogradskyState {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.q1, self.q2, self.p1, self.p2]
    }
}

/// The discrete Ostrogradsky transform on windows `x1^(0..3) = w^(−2..1)`:
/// `p₂ = L₂(w^(−1), w^(0), w^(1))` and
/// `p₁ = L₁(w^(−1), w^(0), w^(1)) + L₂(w^(−2), w^(−1), w^(0))`, where `Lⱼ`
/// is the partial derivative in the `j`-th slot.
#[derive(Clone, Debug)]
pub struct OstrogradskyTransform {
    /// `(q₁, q₂, h⁴p₁, h⁴p₂)`.
    components: [Polynomial; 4],
    partials: Vec<Vec<Polynomial>>,
    /// `h⁴p₂ = c·x1^(1) + r` with `c, r` free of `x1^(0..1)`.
    p2_linear: (Polynomial, Polynomial),
    /// `h⁴p₁ = c·x1^(0) + r` with `c, r` free of `x1^(0)`.
    p1_linear: (Polynomial, Polynomial),
    params: BTreeMap<Var, f64>,
    h4: f64,
}

fn split_linear(p: &Polynomial, v: Var) -> Result<(Polynomial, Polynomial), CaseError> {
    let (mut coeffs, rest) = p.collect_linear(&BTreeSet::from([v.clone()]))?;
    Ok((coeffs.remove(&v).unwrap_or_else(Polynomial::zero), rest))
}

impl OstrogradskyTransform {
    /// `params` binds every symbol of the Lagrangian except `h`.
    pub fn new(l: &DiscreteLagrangian, h: f64, params: &BTreeMap<Var, f64>) -> Result<Self, CaseError> {
        let l1 = l.cleared.derivative(&Var::state(1, 1));
        let l2 = l.cleared.derivative(&Var::state(1, 2));
        let p2 = l2.shift(1);
        let p1 = l1.shift(1) + l2;
        let components = [w(2), w(3), p1.clone(), p2.clone()];
        let partials = components
            .iter()
            .map(|c| (0..4).map(|k| c.derivative(&Var::state(1, k))).collect())
            .collect();
        let p2_linear = split_linear(&p2, Var::state(1, 1))?;
        let p1_linear = split_linear(&p1, Var::state(1, 0))?;
        if p2_linear.0.contains_var(&Var::state(1, 0)) || p2_linear.1.contains_var(&Var::state(1, 0)) {
            return Err(CaseError::Invalid("p2 depends on the oldest window entry".into()));
        }
        let mut params = params.clone();
        params.insert(Var::param("h"), h);
        Ok(OstrogradskyTransform {
            components,
            partials,
            p2_linear,
            p1_linear,
            params,
            h4: h.powi(4),
        })
    }

    fn eval(&self, p: &Polynomial, window: &[f64]) -> Result<f64, CaseError> {
        Ok(p.eval_with(|v: &Var| {
            if v.is_state() {
                v.shift().and_then(|k| window.get(k as usize).copied())
            } else {
                self.params.get(v).copied()
            }
        })?)
    }

    pub fn forward(&self, window: &[f64]) -> Result<OstrogradskyState, CaseError> {
        let v: Vec<f64> = self
            .components
            .iter()
            .map(|c| self.eval(c, window))
            .collect::<Result<_, _>>()?;
        Ok(OstrogradskyState {
            q1: v[0],
            q2: v[1],
            p1: v[2] / self.h4,
            p2: v[3] / self.h4,
        })
    }

    /// Recovers the window, solving the `p₂` relation for `w^(−1)` and then
    /// the `p₁` relation for `w^(−2)`.
    pub fn inverse(&self, s: &OstrogradskyState) -> Result<Vec<f64>, CaseError> {
        let mut window = vec![0.0, 0.0, s.q1, s.q2];
        let (c2, r2) = &self.p2_linear;
        let c = self.eval(c2, &window)?;
        if c == 0.0 {
            return Err(DynamicsError::SingularStep { condition: 0.0 }.into());
        }
        window[1] = (s.p2 * self.h4 - self.eval(r2, &window)?) / c;
        let (c1, r1) = &self.p1_linear;
        let c = self.eval(c1, &window)?;
        if c == 0.0 {
            return Err(DynamicsError::SingularStep { condition: 0.0 }.into());
        }
        window[0] = (s.p1 * self.h4 - self.eval(r1, &window)?) / c;
        Ok(window)
    }

    /// `∂(q₁, q₂, p₁, p₂)/∂(x1^(0..3))`.
    pub fn jacobian(&self, window: &[f64]) -> Result<Vec<Vec<f64>>, CaseError> {
        let mut out = Vec::with_capacity(4);
        for (i, row) in self.partials.iter().enumerate() {
            let scale = if i < 2 { 1.0 } else { 1.0 / self.h4 };
            out.push(
                row.iter()
                    .map(|p| self.eval(p, window).map(|x| x * scale))
                    .collect::<Result<Vec<f64>, _>>()?,
            );
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticReport {
    pub kind: BeamMapKind,
    pub euler_lagrange_matches: bool,
    pub samples: usize,
    /// Sample points redrawn after a singular step.
    pub resampled: usize,
    /// Largest entry of the pulled-back form difference, relative to the
    /// largest entry of `DT(w)ᵀ Ω DT(w)`.
    pub max_defect: f64,
    /// Largest `|T⁻¹(T(w)) − w|∞`.
    pub max_roundtrip: f64,
}

fn omega() -> [[f64; 4]; 4] {
    [
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
}

/// `Aᵀ Ω A`.
fn pullback(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let om = omega();
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, om_k) in om.iter().enumerate() {
                for (l, &o) in om_k.iter().enumerate() {
                    if o != 0.0 {
                        s += a[k][i] * o * a[l][j];
                    }
                }
            }
            *cell = s;
        }
    }
    out
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Measures how far a beam map is from preserving `dp₁∧dq₁ + dp₂∧dq₂` in
/// the Ostrogradsky coordinates of the variational Lagrangian, at seeded
/// random windows in `[−1/2, 1/2]⁴`. Compares
/// `(DT(Φw)·DΦ)ᵀ Ω (DT(Φw)·DΦ)` with `DT(w)ᵀ Ω DT(w)`, which avoids
/// inverting `DT`.
pub fn symplecticity_check(
    kind: BeamMapKind,
    params: &BeamParams,
    samples: usize,
    seed: u64,
) -> Result<SymplecticReport, CaseError> {
    let coeffs = params.coefficients();
    let case = beam_lagrangian(&coeffs)?;
    let map = match kind {
        BeamMapKind::Lagrangian => case.map.clone(),
        BeamMapKind::Symmetric => beam_symmetric(&coeffs)?.map,
    };
    let h = rational_to_f64(&params.h);
    let fp = float_params(&params.bindings());
    let num = NumericMap::new(&map, h, &fp)?;
    let t = OstrogradskyTransform::new(&case.lagrangian, h, &fp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_defect: f64 = 0.0;
    let mut max_roundtrip: f64 = 0.0;
    let mut resampled = 0;
    let mut done = 0;
    while done < samples {
        let s: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
        let next = match num.step(&s) {
            Ok(next) => next,
            Err(DynamicsError::SingularStep { .. }) if resampled < 10 * samples.max(1) => {
                resampled += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let lhs = pullback(&matmul(&t.jacobian(&next)?, &num.jacobian_at(&s)?));
        let rhs = pullback(&t.jacobian(&s)?);
        let scale = rhs.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
        for (lr, rr) in lhs.iter().zip(&rhs) {
            for (a, b) in lr.iter().zip(rr) {
                max_defect = max_defect.max((a - b).abs() / scale);
            }
        }
        let back = t.inverse(&t.forward(&s)?)?;
        for (a, b) in back.iter().zip(&s) {
            max_roundtrip = max_roundtrip.max((a - b).abs());
        }
        done += 1;
    }
    Ok(SymplecticReport {
        kind,
        euler_lagrange_matches: case.matches,
        samples,
        resampled,
        max_defect,
        max_roundtrip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_lagrange_symbolic_weights() {
        let case = beam_lagrangian(&BeamCoefficients::symbolic()).unwrap();
        assert!(case.matches);
    }

    #[test]
    fn kinetic_term_gives_fourth_difference() {
        let zero = BeamCoefficients {
            a: Polynomial::zero(),
            b: Polynomial::zero(),
            c: Polynomial::zero(),
            alphas: std::array::from_fn(|_| Polynomial::zero()),
            betas: std::array::from_fn(|_| Polynomial::zero()),
        };
        let el = DiscreteLagrangian::beam(&zero).euler_lagrange();
        let d4 = w(-2) - w(-1).scale(&qi(4)) + w(0).scale(&qi(6)) - w(1).scale(&qi(4)) + w(2);
        assert_eq!(el, d4);
    }

    #[test]
    fn symplectic_for_presets() {
        for p in [
            BeamParams::uniform(qi(1), qi(-2), q(3, 4), q(1, 10)),
            BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10)),
        ] {
            let r = symplecticity_check(BeamMapKind::Lagrangian, &p, 20, 11).unwrap();
            assert!(r.euler_lagrange_matches);
            assert!(r.max_defect < 1e-9, "{r:?}");
            assert!(r.max_roundtrip < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn linear_case_is_symplectic() {
        let p = BeamParams::on_site(qi(0), qi(0), q(3, 4), q(1, 10));
        let r = symplecticity_check(BeamMapKind::Lagrangian, &p, 20, 3).unwrap();
        assert!(r.max_defect < 1e-12, "{r:?}");
    }

    #[test]
    fn symmetric_map_defect_is_measurable() {
        let p = BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10));
        let r = symplecticity_check(BeamMapKind::Symmetric, &p, 20, 11).unwrap();
        assert!(r.max_defect.is_finite());
    }

    #[test]
    fn fixed_window_maps_to_fixed_canonical_point() {
        let p = BeamParams::on_site(qi(1), qi(-2), q(3, 4), q(1, 10));
        let case = beam_lagrangian(&p.coefficients()).unwrap();
        let fp = float_params(&p.bindings());
        let t = OstrogradskyTransform::new(&case.lagrangian, 0.1, &fp).unwrap();
        let num = NumericMap::new(&case.map, 0.1, &fp).unwrap();
        let ws = vec![1.5f64.sqrt(); 4];
        let before = t.forward(&ws).unwrap().to_vec();
        let after = t.forward(&num.step(&ws).unwrap()).unwrap().to_vec();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn on_site_weights_reduce_to_powers() {
        let p = BeamParams::on_site(qi(1), qi(1), qi(0), qi(1)).coefficients();
        assert_eq!(expected_f4_hat(&sym("a"), &p.alphas), sym("a") * w(0).pow(4));
        assert_eq!(expected_f2_hat(&sym("b"), &p.betas), sym("b") * w(0).pow(2));
    }
}
