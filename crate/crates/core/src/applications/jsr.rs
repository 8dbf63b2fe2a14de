//! Joint spectral radius by the invariant elliptic polytope iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{eigenvalues, leading_eigen};
use super::invariant::{certify_family, image_bound, InvariantPolytopeCert, IterationOptions};
use super::{image, MatrixFamily};
use crate::error::{Error, Result};
use crate::geom::{Ellipse, EllipticPolytope};

/// Relative gap below which two candidate values count as tied.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct JsrOptions {
    /// Longest product word searched for the candidate.
    pub smp_depth: usize,
    pub iteration: IterationOptions,
    /// The family is divided by `λ·inflation` during the iteration.
    pub inflation: f64,
}

impl Default for JsrOptions {
    fn default() -> Self {
        JsrOptions {
            smp_depth: 6,
            iteration: IterationOptions::default(),
            inflation: 1.0 + 1e-10,
        }
    }
}

/// A product word `Π = A_{w_k}⋯A_{w_1}` with `λ = ρ(Π)^{1/k}` and the
/// leading eigenvector of `Π`.
#[derive(Debug, Clone, Serialize)]
pub struct SmpCandidate {
    pub word: Vec<usize>,
    pub len: usize,
    pub lambda: f64,
    #[serde(skip)]
    pub eigvec: Vec<Complex64>,
    pub eigenvalue: (f64, f64),
    pub simple: bool,
}

impl SmpCandidate {
    pub fn from_word(fam: &MatrixFamily, word: &[usize]) -> Result<Self> {
        if word.is_empty() || word.iter().any(|&i| i >= fam.len()) {
            return Err(Error::Invalid(format!("bad word {word:?} for {} matrices", fam.len())));
        }
        let le = leading_eigen(&fam.product(word))?;
        Ok(SmpCandidate {
            word: word.to_vec(),
            len: word.len(),
            lambda: le.value.norm().powf(1.0 / word.len() as f64),
            eigvec: le.vector,
            eigenvalue: (le.value.re, le.value.im),
            simple: le.simple,
        })
    }
}

/// Lyndon words of length `1..=n` over `0..m`: one word per class of
/// primitive words up to cyclic shift.
pub fn lyndon_words(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 || n == 0 {
        return out;
    }
    let mut w = vec![0usize];
    loop {
        out.push(w.clone());
        let k = w.len();
        while w.len() < n {
            w.push(w[w.len() - k]);
        }
        while w.last() == Some(&(m - 1)) {
            w.pop();
        }
        match w.last_mut() {
            Some(x) => *x += 1,
            None => return out,
        }
    }
}

/// All words up to `depth` with their values, largest value first and
/// shorter words first among equal values.
pub fn smp_search(fam: &MatrixFamily, depth: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    if depth == 0 {
        return Err(Error::Invalid("smp_depth must be at least 1".into()));
    }
    let mut out = lyndon_words(fam.len(), depth)
        .into_iter()
        .map(|w| {
            let rho = eigenvalues(&fam.product(&w))?.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lam = rho.powf(1.0 / w.len() as f64);
            Ok((w, lam))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.len().cmp(&y.0.len())));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct JsrReport {
    /// `ρ(𝒜)` when `certificate` is valid, otherwise the best lower bound.
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    pub smp: Option<SmpCandidate>,
    pub certificate: Option<InvariantPolytopeCert>,
    /// Why no certificate was found.
    pub diagnosis: Option<String>,
    /// Polytopes met during the iteration with the images tested against
    /// them.
    #[serde(skip)]
    pub harvested: Vec<(EllipticPolytope, Vec<Ellipse>)>,
}

impl JsrReport {
    pub fn is_exact(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.valid)
    }
}

/// Finds the candidate product of largest normalized spectral radius,
/// then grows the elliptic polytope from its leading eigenvector.
///
/// A nonreal leading eigenvalue starts from the ellipse `E(v)`; a real one
/// from segments spanning its eigenspace. Ties between different words and
/// non-semisimple leading eigenvalues are reported as failures, with
/// bounds `[λ, upper]`.
pub fn jsr_invariant_polytope(fam: &MatrixFamily, opts: &JsrOptions) -> Result<JsrReport> {
    let ranked = smp_search(fam, opts.smp_depth)?;
    let (word, lam) = ranked[0].clone();
    let mut report = JsrReport {
        lambda: lam,
        lower: lam,
        upper: norm_bound(fam),
        smp: None,
        certificate: None,
        diagnosis: None,
        harvested: Vec::new(),
    };
    if lam == 0.0 {
        report.diagnosis = Some("every searched product is nilpotent".into());
        return Ok(report);
    }
    let tied: Vec<&Vec<usize>> = ranked[1..]
        .iter()
        .filter(|(_, l)| (lam - l) <= TIE_TOL * lam)
        .map(|(w, _)| w)
        .collect();
    if !tied.is_empty() {
        report.diagnosis = Some(format!("candidate {word:?} is tied with {tied:?}; the leading product is not unique"));
        return Ok(report);
    }
    let cand = SmpCandidate::from_word(fam, &word)?;
    let seeds = match seeds(fam, &cand)? {
        Ok(s) => s,
        Err(why) => {
            report.diagnosis = Some(why);
            report.smp = Some(cand);
            return Ok(report);
        }
    };
    let (cert, harvested) = certify_family(fam, lam, opts.inflation, seeds, &opts.iteration)?;
    report.harvested = harvested;
    if cert.valid {
        report.upper = lam;
    } else {
        report.diagnosis = Some(if cert.converged {
            "the final norm table has entries above 1 + tol".into()
        } else {
            format!("no invariant polytope after {} iterations", cert.iterations)
        });
        report.upper = report.upper.min(polytope_bound(fam, &cert.polytope, lam * opts.inflation)?);
    }
    report.smp = Some(cand);
    report.certificate = Some(cert);
    Ok(report)
}

/// `max_i ‖A_i‖₂`.
fn norm_bound(fam: &MatrixFamily) -> f64 {
    fam.matrices()
        .iter()
        .map(|m| m.clone().svd(false, false).singular_values.max())
        .fold(0.0, f64::max)
}

/// `s·max ‖s⁻¹ A E‖_P` over matrices and vertices; infinite when `P` is
/// not full-dimensional.
fn polytope_bound(fam: &MatrixFamily, p: &EllipticPolytope, s: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in fam.matrices() {
        let m = m / s;
        for e in p.ellipses() {
            worst = worst.max(image_bound(&image(&m, e), p, f64::INFINITY)?);
        }
    }
    Ok(s * worst)
}

/// Starting ellipses for a candidate, or the reason there are none.
fn seeds(fam: &MatrixFamily, cand: &SmpCandidate) -> Result<std::result::Result<Vec<Ellipse>, String>> {
    let d = fam.dim();
    let (re, im) = cand.eigenvalue;
    let rho = re.hypot(im);
    if im.abs() > 1e-9 * rho {
        if !cand.simple {
            return Ok(Err("the leading eigenvalue of the candidate is not simple".into()));
        }
        let e = Ellipse::from_vertex(&cand.eigvec)?;
        return Ok(Ok(vec![e.scaled(1.0 / e.max_radius())]));
    }
    // real leading eigenvalues ±ρ: segments along each eigenspace
    let pi = fam.product(&cand.word);
    let top = eigenvalues(&pi)?.iter().filter(|z| z.norm() >= rho * (1.0 - 1e-9)).count();
    let mut out = Vec::new();
    for mu in [rho, -rho] {
        let shifted = &pi - DMatrix::identity(d, d) * mu;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::NoConvergence("singular value decomposition".into()))?;
        let scale = pi.norm().max(1e-300);
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s <= 1e-9 * scale {
                out.push(Ellipse::segment(vt.row(k).iter().copied().collect())?);
            }
        }
    }
    if out.len() != top {
        return Ok(Err(format!(
            "the leading eigenvalue of the candidate is not semisimple ({top} eigenvalues of modulus ρ, {} eigenvectors)",
            out.len()
        )));
    }
    Ok(Ok(out))
}

/// The pair `{T₀, T₁}` whose product `T₀T₁` is spectrum maximizing with
/// value 1, for `α ≠ β` in `(-π/2, π/2)`.
pub fn example_pair(alpha: f64, beta: f64) -> Result<MatrixFamily> {
    let half = std::f64::consts::FRAC_PI_2;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v.abs() < half) {
            return Err(Error::Invalid(format!("{name} = {v} must lie in (-π/2, π/2)")));
        }
    }
    if alpha == beta {
        return Err(Error::Invalid("alpha and beta must differ".into()));
    }
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let t0 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, -sa, ca, 0.0, ca, sa, 0.0]);
    let t1 = DMatrix::from_row_slice(3, 3, &[0.0, -sb, cb, 0.0, cb, sb, 0.0, 0.0, 0.0]);
    MatrixFamily::new(vec![t0, t1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyndon_counts() {
        // necklace-primitive counts: 2, 1, 2, 3, 6, 9 for lengths 1..6
        assert_eq!(lyndon_words(2, 6).len(), 23);
        assert_eq!(lyndon_words(2, 3), vec![vec![0], vec![0, 0, 1], vec![0, 1], vec![0, 1, 1], vec![1]]);
        assert_eq!(lyndon_words(3, 2).len(), 6);
    }

    #[test]
    fn example_pair_is_exact() {
        let fam = example_pair(0.3, -0.4).unwrap();
        let r = jsr_invariant_polytope(&fam, &JsrOptions::default()).unwrap();
        assert!(r.is_exact(), "{:?}", r.diagnosis);
        assert!((r.lambda - 1.0).abs() < 1e-8);
        assert_eq!(r.smp.unwrap().word, vec![0, 1]);
    }

    #[test]
    fn scalar_family() {
        let d = 3;
        let fam = MatrixFamily::new(vec![DMatrix::identity(d, d) * 0.5, DMatrix::identity(d, d) * 0.3]).unwrap();
        let r = jsr_invariant_polytope(&fam, &JsrOptions::default()).unwrap();
        assert!(r.is_exact(), "{:?}", r.diagnosis);
        assert!((r.lambda - 0.5).abs() < 1e-12);
        assert_eq!(r.certificate.unwrap().iterations, 1);
    }

    #[test]
    fn ties_fail() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let fam = MatrixFamily::new(vec![a.clone(), a.transpose()]).unwrap();
        let r = jsr_invariant_polytope(&fam, &JsrOptions::default()).unwrap();
        assert!(!r.is_exact());
        assert!(r.diagnosis.unwrap().contains("tied"));
        assert!(r.lower <= 1.0 + 1e-12 && r.upper >= 1.0 - 1e-12);
    }
}
