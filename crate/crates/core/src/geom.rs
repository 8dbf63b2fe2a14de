//! Ellipses, elliptic polytopes and their support functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tolerance for set equality of ellipses.
pub const SAME_SET_TOL: f64 = 1e-9;

/// A centred ellipse `E(a, b) = {a cos t + b sin t}` given by two conjugate
/// radii. `b = 0` is allowed and gives the segment `[-a, a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEllipse")]
pub struct Ellipse {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
struct RawEllipse {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<RawEllipse> for Ellipse {
    type Error = Error;
    fn try_from(r: RawEllipse) -> Result<Self> {
        Ellipse::new(r.a, r.b)
    }
}

impl Ellipse {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "conjugate radii of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::Invalid(format!("dimension {} < 2", a.len())));
        }
        if !a.iter().chain(&b).all(|v| v.is_finite()) {
            return Err(Error::Invalid("non-finite radius entry".into()));
        }
        Ok(Ellipse { a, b })
    }

    /// The segment `[-a, a]`.
    pub fn segment(a: Vec<f64>) -> Result<Self> {
        let b = vec![0.0; a.len()];
        Ellipse::new(a, b)
    }

    /// Circle of radius `r` in the plane of the first two coordinates.
    pub fn disc(d: usize, r: f64) -> Self {
        let mut a = vec![0.0; d];
        let mut b = vec![0.0; d];
        a[0] = r;
        b[1] = r;
        Ellipse { a, b }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `a cos t + b sin t`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        let (s, c) = t.sin_cos();
        self.a.iter().zip(&self.b).map(|(a, b)| a * c + b * s).collect()
    }

    pub fn support(&self, x: &[f64]) -> Result<f64> {
        check_dim("direction", x.len(), self.dim())?;
        Ok(self.support_sq_unchecked(x).sqrt())
    }

    /// `(x,a)² + (x,b)²` without a length check.
    pub(crate) fn support_sq_unchecked(&self, x: &[f64]) -> f64 {
        let xa = dot(x, &self.a);
        let xb = dot(x, &self.b);
        xa * xa + xb * xb
    }

    /// Conjugate radii `(a cos s + b sin s, b cos s - a sin s)`, that is
    /// the vertex `e^{-is}(a + ib)`; the point set is unchanged.
    pub fn rotate(&self, s: f64) -> Ellipse {
        let (sn, cs) = s.sin_cos();
        let a = self.a.iter().zip(&self.b).map(|(a, b)| a * cs + b * sn).collect();
        let b = self.a.iter().zip(&self.b).map(|(a, b)| b * cs - a * sn).collect();
        Ellipse { a, b }
    }

    pub fn scaled(&self, c: f64) -> Ellipse {
        Ellipse {
            a: self.a.iter().map(|v| v * c).collect(),
            b: self.b.iter().map(|v| v * c).collect(),
        }
    }

    /// `E(a, -b)`, the same set with the conjugate complex vertex.
    pub fn conjugate(&self) -> Ellipse {
        Ellipse {
            a: self.a.clone(),
            b: self.b.iter().map(|v| -v).collect(),
        }
    }

    /// Image under a row-major `d×d` matrix.
    pub fn transform(&self, m: &[Vec<f64>]) -> Result<Ellipse> {
        check_dim("matrix", m.len(), self.dim())?;
        let apply = |v: &[f64]| -> Result<Vec<f64>> {
            m.iter()
                .map(|row| {
                    check_dim("matrix row", row.len(), v.len())?;
                    Ok(dot(row, v))
                })
                .collect()
        };
        Ok(Ellipse {
            a: apply(&self.a)?,
            b: apply(&self.b)?,
        })
    }

    /// Entries of the 2×2 Gram matrix `[a·a, a·b; a·b, b·b]`.
    fn gram2(&self) -> (f64, f64, f64) {
        (dot(&self.a, &self.a), dot(&self.a, &self.b), dot(&self.b, &self.b))
    }

    /// Largest Euclidean norm of a point of the ellipse (major semi-axis).
    pub fn max_radius(&self) -> f64 {
        let (p, q, r) = self.gram2();
        let mean = 0.5 * (p + r);
        let dev = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + dev).max(0.0).sqrt()
    }

    /// True when `a` and `b` are linearly dependent (a segment or a point).
    pub fn is_degenerate(&self, tol: f64) -> bool {
        let (p, q, r) = self.gram2();
        (p * r - q * q) <= tol * (p * r).max(f64::MIN_POSITIVE)
    }

    /// Replaces an exactly degenerate pair (`b = λa` or `a = 0`) by
    /// `(r u, 0)`; anything else is returned unchanged.
    pub fn reduced(&self) -> Ellipse {
        let (p, q, r) = self.gram2();
        if p * r - q * q != 0.0 {
            return self.clone();
        }
        let radius = self.max_radius();
        let base = if p >= r { &self.a } else { &self.b };
        let n = dot(base, base).sqrt();
        if n == 0.0 {
            return Ellipse {
                a: vec![0.0; self.dim()],
                b: vec![0.0; self.dim()],
            };
        }
        Ellipse {
            a: base.iter().map(|v| v / n * radius).collect(),
            b: vec![0.0; self.dim()],
        }
    }

    /// `aaᵀ + bbᵀ`, row-major. Two ellipses are the same set exactly when
    /// these matrices agree, since the squared support function is the
    /// quadratic form of this matrix.
    pub fn shape_matrix(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = self.a[i] * self.a[j] + self.b[i] * self.b[j];
            }
        }
        m
    }

    /// Set equality up to `tol` relative to the size of the ellipses.
    pub fn same_set(&self, other: &Ellipse, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let m1 = self.shape_matrix();
        let m2 = other.shape_matrix();
        let scale = m1.iter().chain(&m2).fold(0.0f64, |a, v| a.max(v.abs()));
        m1.iter()
            .zip(&m2)
            .all(|(x, y)| (x - y).abs() <= tol * scale.max(f64::MIN_POSITIVE))
    }

    /// Complex vertex `a + ib`.
    pub fn vertex(&self) -> Vec<Complex64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect()
    }

    pub fn from_vertex(v: &[Complex64]) -> Result<Self> {
        Ellipse::new(v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
    }
}

/// `sqrt((x,a)² + (x,b)²)`.
pub fn support(e: &Ellipse, x: &[f64]) -> Result<f64> {
    e.support(x)
}

/// Conjugate radii after the elliptic rotation by `s`.
pub fn elliptic_rotate(e: &Ellipse, s: f64) -> Ellipse {
    e.rotate(s)
}

/// Convex hull of finitely many centred ellipses of a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolytope", into = "RawPolytope")]
pub struct EllipticPolytope {
    ellipses: Vec<Ellipse>,
}

#[derive(Serialize, Deserialize)]
struct RawPolytope {
    dim: usize,
    ellipses: Vec<Ellipse>,
}

impl TryFrom<RawPolytope> for EllipticPolytope {
    type Error = Error;
    fn try_from(r: RawPolytope) -> Result<Self> {
        let p = EllipticPolytope::new(r.ellipses)?;
        check_dim("ellipse", p.dim(), r.dim)?;
        Ok(p)
    }
}

impl From<EllipticPolytope> for RawPolytope {
    fn from(p: EllipticPolytope) -> Self {
        RawPolytope {
            dim: p.dim(),
            ellipses: p.ellipses,
        }
    }
}

impl EllipticPolytope {
    pub fn new(ellipses: Vec<Ellipse>) -> Result<Self> {
        let Some(first) = ellipses.first() else {
            return Err(Error::Invalid("an elliptic polytope needs at least one ellipse".into()));
        };
        let d = first.dim();
        for e in &ellipses {
            check_dim("ellipse", e.dim(), d)?;
        }
        Ok(EllipticPolytope { ellipses })
    }

    pub fn ellipses(&self) -> &[Ellipse] {
        &self.ellipses
    }

    pub fn into_ellipses(self) -> Vec<Ellipse> {
        self.ellipses
    }

    pub fn len(&self) -> usize {
        self.ellipses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ellipses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ellipses[0].dim()
    }

    /// Support function of the hull: the largest member support.
    pub fn support(&self, x: &[f64]) -> Result<f64> {
        check_dim("direction", x.len(), self.dim())?;
        Ok(self.support_sq_unchecked(x).sqrt())
    }

    pub(crate) fn support_sq_unchecked(&self, x: &[f64]) -> f64 {
        self.ellipses
            .iter()
            .map(|e| e.support_sq_unchecked(x))
            .fold(0.0, f64::max)
    }

    /// Polytope with member `k` removed (`None` if it is the only one).
    pub fn without(&self, k: usize) -> Option<EllipticPolytope> {
        if self.ellipses.len() <= 1 {
            return None;
        }
        let mut ellipses = self.ellipses.clone();
        ellipses.remove(k);
        Some(EllipticPolytope { ellipses })
    }
}

/// `support(e0, x)² - max_k support(E_k, x)²`; positive for some `x`
/// exactly when `e0` is not contained in `p`.
pub fn separation_margin(e0: &Ellipse, p: &EllipticPolytope, x: &[f64]) -> Result<f64> {
    check_dim("ellipse", e0.dim(), p.dim())?;
    check_dim("direction", x.len(), p.dim())?;
    Ok(e0.support_sq_unchecked(x) - p.support_sq_unchecked(x))
}

/// Generating vertices `v_k = a_k + i b_k` of a balanced complex polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVertexSet {
    pub vertices: Vec<Vec<Complex64>>,
    pub self_conjugate: bool,
}

impl ComplexVertexSet {
    pub fn from_polytope(p: &EllipticPolytope) -> Self {
        ComplexVertexSet {
            vertices: p.ellipses().iter().map(Ellipse::vertex).collect(),
            self_conjugate: false,
        }
    }

    /// Real parts of the generated balanced polytope, one ellipse per vertex.
    pub fn real_part(&self) -> Result<EllipticPolytope> {
        EllipticPolytope::new(
            self.vertices
                .iter()
                .map(|v| Ellipse::from_vertex(v))
                .collect::<Result<_>>()?,
        )
    }
}

/// Adds the componentwise conjugate of every vertex not already present.
pub fn conjugate_closure(v: &ComplexVertexSet) -> ComplexVertexSet {
    let mut out = v.vertices.clone();
    for x in &v.vertices {
        let c: Vec<Complex64> = x.iter().map(|z| z.conj()).collect();
        let present = out.iter().any(|y| {
            y.len() == c.len() && y.iter().zip(&c).all(|(p, q)| (p - q).norm() <= 1e-12 * (1.0 + q.norm()))
        });
        if !present {
            out.push(c);
        }
    }
    ComplexVertexSet {
        vertices: out,
        self_conjugate: true,
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: &[f64], b: &[f64]) -> Ellipse {
        Ellipse::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn support_examples() {
        assert!((e(&[1.0, 0.0], &[0.0, 1.0]).support(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(e(&[2.0, 0.0], &[0.0, 0.0]).support(&[0.0, 1.0]).unwrap(), 0.0);
        assert!((e(&[2.0, 0.0], &[0.0, 1.0]).support(&[1.0, 1.0]).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(e(&[1.0, 0.0], &[0.0, 1.0]).support(&[1.0]).is_err());
    }

    #[test]
    fn rotation_examples() {
        let r = e(&[1.0, 0.0], &[0.0, 1.0]).rotate(std::f64::consts::FRAC_PI_2);
        assert!((r.a()[0]).abs() < 1e-15 && (r.a()[1] - 1.0).abs() < 1e-15);
        assert!((r.b()[0] + 1.0).abs() < 1e-15 && r.b()[1].abs() < 1e-15);
        let x = e(&[2.0, 0.0], &[0.0, 1.0]);
        assert_eq!(x.rotate(0.0), x);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Ellipse::new(vec![1.0], vec![0.0]).is_err());
        assert!(Ellipse::new(vec![1.0, 0.0], vec![0.0]).is_err());
        assert!(Ellipse::new(vec![f64::NAN, 0.0], vec![0.0, 0.0]).is_err());
        assert!(EllipticPolytope::new(vec![]).is_err());
        assert!(EllipticPolytope::new(vec![Ellipse::disc(2, 1.0), Ellipse::disc(3, 1.0)]).is_err());
    }

    #[test]
    fn max_radius_and_degeneracy() {
        assert!((e(&[2.0, 0.0], &[0.0, 1.0]).max_radius() - 2.0).abs() < 1e-15);
        let seg = e(&[1.0, 1.0], &[2.0, 2.0]);
        assert!(seg.is_degenerate(1e-12));
        let red = seg.reduced();
        assert!(red.same_set(&seg, 1e-12));
        assert!(red.b().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn conjugate_closure_examples() {
        let z = |re: f64, im: f64| Complex64::new(re, im);
        let v = ComplexVertexSet {
            vertices: vec![vec![z(1.0, 0.0), z(0.0, 1.0)]],
            self_conjugate: false,
        };
        let c = conjugate_closure(&v);
        assert_eq!(c.vertices.len(), 2);
        assert_eq!(c.vertices[1], vec![z(1.0, 0.0), z(0.0, -1.0)]);
        assert_eq!(conjugate_closure(&c).vertices.len(), 2);
        let real = ComplexVertexSet {
            vertices: vec![vec![z(1.0, 0.0), z(2.0, 0.0)]],
            self_conjugate: false,
        };
        assert_eq!(conjugate_closure(&real).vertices.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let p = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0), Ellipse::disc(2, 0.5)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"dim\":2"));
        let q: EllipticPolytope = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"dim": 3, "ellipses": [{"a": [1, 0], "b": [0, 1]}]}"#;
        assert!(serde_json::from_str::<EllipticPolytope>(bad).is_err());
    }
}
