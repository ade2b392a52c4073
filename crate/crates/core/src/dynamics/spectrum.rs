//! Characteristic polynomials and their roots for small float matrices.

use num_complex::Complex64;

use super::DynamicsError;

const ROOT_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 10_000;
/// Half-width of the band around the unit circle.
pub const UNIT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootClass {
    Inside,
    OnUnitCircle,
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub fixed_point: Option<Vec<f64>>,
    pub matrix: Vec<Vec<f64>>,
    /// Monic coefficients, highest degree first: `λ^d + c_1 λ^(d-1) + ... + c_d`.
    pub coefficients: Vec<f64>,
    pub roots: Vec<Complex64>,
    pub palindromic_defect: f64,
    pub classes: Vec<RootClass>,
}

impl SpectrumReport {
    /// Largest `|p(λ)| / Σ |c_k| |λ|^(d-k)` over the roots.
    pub fn root_residual(&self) -> f64 {
        self.roots
            .iter()
            .map(|z| relative_residual(&self.coefficients, *z))
            .fold(0.0, f64::max)
    }

    /// Roots with imaginary part below `tol·|λ|`, as reals.
    pub fn real_roots(&self, tol: f64) -> Vec<f64> {
        self.roots
            .iter()
            .filter(|z| z.im.abs() <= tol * z.norm().max(1.0))
            .map(|z| z.re)
            .collect()
    }

    pub fn count(&self, class: RootClass) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }
}

/// Faddeev–LeVerrier coefficients, highest degree first.
pub fn faddeev_leverrier(a: &[Vec<f64>]) -> Vec<f64> {
    let d = a.len();
    let mut c = vec![1.0];
    let mut m = vec![vec![0.0; d]; d];
    for k in 1..=d {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[k - 1];
        }
        m = next;
        let am = matmul(a, &m);
        let tr: f64 = (0..d).map(|i| am[i][i]).sum();
        c.push(-tr / k as f64);
    }
    c
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x)
}

fn relative_residual(c: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let scale = c.iter().fold(0.0, |acc, x| acc * r + x.abs());
    if scale == 0.0 {
        0.0
    } else {
        horner(c, z).norm() / scale
    }
}

/// Durand–Kerner iteration on a monic polynomial, starting on a circle of
/// radius `1 + max |c_k|` at fixed angles.
pub fn durand_kerner(c: &[f64]) -> Result<Vec<Complex64>, DynamicsError> {
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let radius = 1.0 + c[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / d as f64))
        .collect();
    for _ in 0..MAX_ITERS {
        let mut moved = 0.0f64;
        for i in 0..d {
            let denom = (0..d)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            if denom.norm() == 0.0 {
                z[i] += Complex64::new(1e-8, 1e-8);
                moved = f64::INFINITY;
                continue;
            }
            let delta = horner(c, z[i]) / denom;
            z[i] -= delta;
            moved = moved.max(delta.norm() / z[i].norm().max(1.0));
        }
        let converged = moved < 1e-15
            || z.iter().all(|&zi| relative_residual(c, zi) <= ROOT_TOL * 1e-3);
        if converged {
            break;
        }
    }
    if z.iter().any(|&zi| !(relative_residual(c, zi) <= ROOT_TOL)) {
        return Err(DynamicsError::NoConvergence);
    }
    Ok(z)
}

pub fn classify(z: Complex64) -> RootClass {
    let r = z.norm();
    if (r - 1.0).abs() <= UNIT_TOL {
        RootClass::OnUnitCircle
    } else if r < 1.0 {
        RootClass::Inside
    } else {
        RootClass::Outside
    }
}

/// Characteristic polynomial, roots, palindromic defect, and classification.
pub fn char_poly_and_roots(m: &[Vec<f64>]) -> Result<SpectrumReport, DynamicsError> {
    let d = m.len();
    if m.iter().any(|r| r.len() != d) {
        return Err(DynamicsError::DimensionMismatch {
            expected: d,
            got: m.first().map_or(0, Vec::len),
        });
    }
    let coefficients = faddeev_leverrier(m);
    let mut roots = durand_kerner(&coefficients)?;
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    let cmax = coefficients.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let palindromic_defect = (0..=d)
        .map(|k| (coefficients[k] - coefficients[d - k]).abs())
        .fold(0.0, f64::max)
        / cmax;
    let classes = roots.iter().map(|z| classify(*z)).collect();
    Ok(SpectrumReport {
        fixed_point: None,
        matrix: m.to_vec(),
        coefficients,
        roots,
        palindromic_defect,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation() {
        let r = char_poly_and_roots(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(r.coefficients, vec![1.0, 0.0, 1.0]);
        assert_eq!(r.palindromic_defect, 0.0);
        for z in &r.roots {
            assert!((z.re).abs() < 1e-12 && (z.im.abs() - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.count(RootClass::OnUnitCircle), 2);
    }

    #[test]
    fn reciprocal_pair() {
        let r = char_poly_and_roots(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(r.coefficients, vec![1.0, -2.5, 1.0]);
        assert_eq!(r.palindromic_defect, 0.0);
        let mut re = r.real_roots(1e-9);
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 0.5).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);
        assert_eq!(r.classes, vec![RootClass::Inside, RootClass::Outside]);
    }

    #[test]
    fn double_root() {
        let r = char_poly_and_roots(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(r.root_residual() <= 1e-12);
        for z in &r.roots {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn companion_four() {
        // roots 1, 2, 3, 4
        let c = [1.0, -10.0, 35.0, -50.0, 24.0];
        let mut m = vec![vec![0.0; 4]; 4];
        for i in 0..3 {
            m[i][i + 1] = 1.0;
        }
        for j in 0..4 {
            m[3][j] = -c[4 - j];
        }
        let r = char_poly_and_roots(&m).unwrap();
        for (a, b) in r.coefficients.iter().zip(c) {
            assert!((a - b).abs() < 1e-9);
        }
        let mut re = r.real_roots(1e-8);
        re.sort_by(f64::total_cmp);
        for (k, x) in re.iter().enumerate() {
            assert!((x - (k + 1) as f64).abs() < 1e-9);
        }
    }
}
