//! Leading eigenpairs of real matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvector residual bound, relative to `max(1, ‖A‖)`.
pub const EIG_RESIDUAL: f64 = 1e-10;

/// Eigenvalues from the real Schur form.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("matrix is {}×{}", a.nrows(), a.ncols())));
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(a.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::NoConvergence("Schur decomposition".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Leading eigenvalue with nonnegative imaginary part, its eigenvector, and
/// whether it is simple (no other eigenvalue of the same modulus apart
/// from its conjugate).
#[derive(Debug, Clone)]
pub struct LeadingEigen {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub simple: bool,
}

impl LeadingEigen {
    pub fn is_real(&self) -> bool {
        self.value.im.abs() <= 1e-9 * self.value.norm()
    }
}

pub fn leading_eigen(a: &DMatrix<f64>) -> Result<LeadingEigen> {
    let eig = eigenvalues(a)?;
    let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rho == 0.0 {
        return Err(Error::Invalid("matrix is nilpotent; spectral radius is zero".into()));
    }
    let top: Vec<Complex64> = eig.iter().copied().filter(|z| z.norm() >= rho * (1.0 - 1e-9)).collect();
    let mut value = *top
        .iter()
        .max_by(|p, q| p.im.total_cmp(&q.im).then(p.re.total_cmp(&q.re)))
        .unwrap();
    let real = value.im.abs() <= 1e-9 * rho;
    if real {
        value.im = 0.0;
    }
    let expected = if real { 1 } else { 2 };
    let simple = top.len() == expected;
    let vector = eigenvector(a, value)?;
    Ok(LeadingEigen { value, vector, simple })
}

/// Unit eigenvector for `mu`, from the smallest singular vector of
/// `A - μI` refined by inverse iteration.
pub fn eigenvector(a: &DMatrix<f64>, mu: Complex64) -> Result<Vec<Complex64>> {
    let d = a.nrows();
    let ac: DMatrix<Complex64> = a.map(|v| Complex64::new(v, 0.0));
    let shifted = &ac - DMatrix::from_diagonal_element(d, d, mu);
    let svd = shifted.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::NoConvergence("singular value decomposition".into()))?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))
        .map(|(i, _)| i)
        .unwrap();
    let mut v: DVector<Complex64> = vt.row(k).transpose().map(|z| z.conj());
    let scale = a.norm().max(1.0);
    let residual = |v: &DVector<Complex64>| (&shifted * v).norm() / v.norm();
    let nudged = &shifted - DMatrix::from_diagonal_element(d, d, Complex64::new(1e-13 * scale, 0.0));
    if let Some(lu) = Some(nudged.lu()).filter(|lu| lu.is_invertible()) {
        for _ in 0..3 {
            if residual(&v) <= 1e-3 * EIG_RESIDUAL * scale {
                break;
            }
            match lu.solve(&v) {
                Some(w) if w.iter().all(|z| z.is_finite()) && w.norm() > 0.0 => {
                    let w = &w / Complex64::new(w.norm(), 0.0);
                    if residual(&w) < residual(&v) {
                        v = w;
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
    }
    let r = residual(&v);
    if r > EIG_RESIDUAL * scale {
        return Err(Error::RootFinding(r));
    }
    let v = &v / Complex64::new(v.norm(), 0.0);
    // phase making the real part as long as possible
    let s: Complex64 = v.iter().map(|z| z * z).sum();
    let phase = Complex64::from_polar(1.0, -0.5 * s.arg());
    Ok(v.iter().map(|z| z * phase).collect())
}
