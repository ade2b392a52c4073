//! Empirical convergence order against a classical Runge–Kutta reference.

use std::collections::BTreeMap;

use crate::poly::Var;
use crate::scheme::{discretize, PolyOdeSystem};

use super::numeric::{CompiledPoly, NumericMap, OrbitStatus};
use super::{solve_forward, DynamicsError};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Least-squares slope of `ln(error)` against `ln(h)`; NaN with fewer than
    /// two positive errors.
    pub order: f64,
    /// `(h, max-norm error of x at the horizon)`.
    pub errors: Vec<(f64, f64)>,
    /// Step sizes that could not be used, with the reason.
    pub excluded: Vec<(f64, String)>,
    /// Richardson estimate of the reference solution's own error.
    pub oracle_error: f64,
}

fn compile_rhs(sys: &PolyOdeSystem, params: &BTreeMap<Var, f64>) -> Result<Vec<CompiledPoly>, DynamicsError> {
    let slot = |v: &Var| match v {
        Var::State { component, shift: 0 } => Some(*component as usize - 1),
        _ => None,
    };
    sys.rhs()
        .iter()
        .map(|f| CompiledPoly::compile(f, &slot, params))
        .collect()
}

/// Integrates the first-order form `y = (x, x', ..., x^(n-1))` (derivative
/// major, `N` entries per block) from 0 to `t` with classical RK4 using
/// `ceil(t / step)` equal steps.
pub fn rk4_oracle(
    sys: &PolyOdeSystem,
    params: &BTreeMap<Var, f64>,
    y0: &[f64],
    t: f64,
    step: f64,
) -> Result<Vec<f64>, DynamicsError> {
    let f = compile_rhs(sys, params)?;
    rk4(&f, sys.order(), sys.dim(), y0, t, step)
}

fn rk4(f: &[CompiledPoly], order: usize, dim: usize, y0: &[f64], t: f64, step: f64) -> Result<Vec<f64>, DynamicsError> {
    if y0.len() != order * dim {
        return Err(DynamicsError::DimensionMismatch {
            expected: order * dim,
            got: y0.len(),
        });
    }
    let deriv = |y: &[f64]| -> Vec<f64> {
        let mut d = y[dim..].to_vec();
        d.extend(f.iter().map(|p| p.eval(&y[..dim])));
        d
    };
    let steps = (t / step).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(y0.to_vec());
    }
    let dt = t / steps as f64;
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let mut y = y0.to_vec();
    for _ in 0..steps {
        let k1 = deriv(&y);
        let k2 = deriv(&axpy(&y, &k1, dt / 2.0));
        let k3 = deriv(&axpy(&y, &k2, dt / 2.0));
        let k4 = deriv(&axpy(&y, &k3, dt));
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(y)
}

/// Reference positions at time `t` with a Richardson error estimate.
fn reference(
    f: &[CompiledPoly],
    sys: &PolyOdeSystem,
    y0: &[f64],
    t: f64,
    step: f64,
) -> Result<(Vec<f64>, f64), DynamicsError> {
    let (n, d) = (sys.order(), sys.dim());
    let fine = rk4(f, n, d, y0, t, step)?;
    let coarse = rk4(f, n, d, y0, t, 2.0 * step)?;
    let est = fine[..d]
        .iter()
        .zip(&coarse[..d])
        .map(|(a, b)| (a - b).abs() / 15.0)
        .fold(0.0, f64::max);
    Ok((fine[..d].to_vec(), est))
}

/// Measures the order of the discretized scheme on `[0, horizon]`.
///
/// The initial window `x(0), x(h), ..., x((n-1)h)` is taken from the
/// reference integrator, run at step `min(hs) / 100`.
pub fn convergence_order(
    sys: &PolyOdeSystem,
    params: &BTreeMap<Var, f64>,
    y0: &[f64],
    horizon: f64,
    hs: &[f64],
) -> Result<ConvergenceReport, DynamicsError> {
    let map = solve_forward(&discretize(sys).map_err(|e| DynamicsError::NotLinear(e.to_string()))?)?;
    let f = compile_rhs(sys, params)?;
    let (n, d) = (sys.order(), sys.dim());
    let hmin = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let ref_step = hmin / 100.0;
    let (target, mut oracle_error) = reference(&f, sys, y0, horizon, ref_step)?;

    let mut errors = Vec::new();
    let mut excluded = Vec::new();
    for &h in hs {
        let m = (horizon / h).round() as usize;
        if ((m as f64) * h - horizon).abs() > 1e-9 * horizon.max(1.0) || m + 1 < n {
            excluded.push((h, "horizon is not a multiple of h".to_string()));
            continue;
        }
        let mut window = Vec::with_capacity(n * d);
        for k in 0..n {
            let (x, est) = reference(&f, sys, y0, k as f64 * h, ref_step)?;
            oracle_error = oracle_error.max(est);
            window.extend(x);
        }
        let num = NumericMap::new(&map, h, params)?;
        let orbit = num.iterate(&window, m + 1 - n);
        if let OrbitStatus::Singular { step, .. } = orbit.status {
            excluded.push((h, format!("singular at step {step}")));
            continue;
        }
        let last = orbit.points.last().expect("nonempty");
        let err = last[(n - 1) * d..]
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        errors.push((h, err));
    }
    Ok(ConvergenceReport {
        order: fit_slope(&errors),
        errors,
        excluded,
        oracle_error,
    })
}

fn fit_slope(errors: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    #[test]
    fn slope_of_exact_power_law() {
        let e: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 3.0 * h * h)).collect();
        assert!((fit_slope(&e) - 2.0).abs() < 1e-12);
        assert!(fit_slope(&e[..1]).is_nan());
    }

    #[test]
    fn rk4_harmonic_oscillator() {
        let sys = PolyOdeSystem::new(2, vec![parse_polynomial("-x1").unwrap()]).unwrap();
        let y = rk4_oracle(&sys, &BTreeMap::new(), &[1.0, 0.0], 1.0, 1e-3).unwrap();
        assert!((y[0] - 1f64.cos()).abs() < 1e-12);
        assert!((y[1] + 1f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn free_particle_is_exact() {
        let sys = PolyOdeSystem::new(2, vec![parse_polynomial("0").unwrap()]).unwrap();
        let r = convergence_order(&sys, &BTreeMap::new(), &[0.3, 0.7], 1.0, &[0.1, 0.05]).unwrap();
        for (_, e) in &r.errors {
            assert!(*e < 1e-13);
        }
    }
}
