//! Polyhedral-type Lyapunov functions for one matrix with a complex
//! leading eigenvalue.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigen::{eigenvector, leading_eigen};
use super::invariant::{certify_family, InvariantPolytopeCert, IterationOptions};
use super::MatrixFamily;
use crate::error::{Error, Result};
use crate::geom::Ellipse;

/// Builds `P` with `AP ⊂ ρ(A)(1 + tol)P`, starting from the ellipse of the
/// leading eigenvector and short coordinate segments.
///
/// Each segment `t e_i` is shortened so that its component along the
/// leading eigenspace is at most half of `E(v)`; its images then end up
/// inside `E(v)` and the process stops. If `max_iter` runs out the
/// certificate comes back with `converged = false`.
pub fn lyapunov_single(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<InvariantPolytopeCert> {
    let family = MatrixFamily::new(vec![a.clone()])?;
    let le = leading_eigen(a)?;
    if le.is_real() {
        return Err(Error::Unsupported(format!(
            "the leading eigenvalue {} is real; an ordinary polytope (segments) is needed instead of an ellipse",
            le.value.re
        )));
    }
    if !le.simple {
        return Err(Error::Unsupported("the leading eigenvalue is not simple".into()));
    }
    let seeds = seeds(a, le.value, &le.vector)?;
    let opts = IterationOptions {
        tol,
        max_iter,
        ..IterationOptions::default()
    };
    Ok(certify_family(&family, le.value.norm(), 1.0, seeds, &opts)?.0)
}

/// `E(v)` scaled to unit major semi-axis, followed by the coordinate
/// segments.
pub(super) fn seeds(a: &DMatrix<f64>, mu: Complex64, v: &[Complex64]) -> Result<Vec<Ellipse>> {
    let imag: f64 = v.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    let len: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if imag <= 1e-9 * len {
        return Err(Error::Unsupported("the leading eigenvector is real".into()));
    }
    let ev = Ellipse::from_vertex(v)?;
    let r = ev.max_radius();
    let v: Vec<Complex64> = v.iter().map(|z| z / r).collect();
    // left eigenvector: the leading component of x is 2 Re(c v), c = uᵀx / uᵀv
    let u = eigenvector(&a.transpose(), mu)?;
    let uv: Complex64 = u.iter().zip(&v).map(|(p, q)| p * q).sum();
    let d = a.nrows();
    let mut out = vec![Ellipse::from_vertex(&v)?];
    for i in 0..d {
        let c = (u[i] / uv).norm();
        let t = if c > 0.0 { (0.25 / c).min(1.0) } else { 1.0 };
        let mut x = vec![0.0; d];
        x[i] = t;
        out.push(Ellipse::segment(x)?);
    }
    Ok(out)
}
