//! Corner cutting.
//!
//! A polygon circumscribed about `E₀` is refined by cutting the corner of
//! largest `P`-norm. With `ν` the largest corner norm, `E₀ ⊂ νP`; a corner
//! over the arc `τ` whose norm exceeds `1/cos(|τ|/2)` exposes a point of
//! `E₀` outside `P`. Only the upper half of the parameter circle is
//! processed since both `E₀` and `P` are symmetric.

use std::f64::consts::PI;

use ellipt_solvers::{Cone, ConeProgram, Triplets};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::backend;
use crate::error::{check_dim, Error, Result};
use crate::geom::{dot, norm, Ellipse, EllipticPolytope};
use crate::verdict::{Certificate, EeVerdict, Method, NormBracket};

pub const DEFAULT_MAX_ITER: usize = 2000;

/// `ν ≤ 1 + INSIDE_TOL` counts as `E₀ ⊂ P`.
pub const INSIDE_TOL: f64 = 1e-7;

/// Solver tolerance for the norm program.
pub const NORM_TOL: f64 = 1e-9;

/// Arc `[start, end]` of the parameter of `E₀`, of length `π / 2^level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
    pub level: u32,
}

impl Arc {
    pub fn new(start: f64, level: u32) -> Self {
        Arc {
            start,
            end: start + PI / 2f64.powi(level as i32),
            level,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    pub fn split(&self) -> (Arc, Arc) {
        (Arc::new(self.start, self.level + 1), Arc::new(self.mid(), self.level + 1))
    }
}

/// Intersection of the tangents to `E₀` at the ends of `arc`.
pub fn corner_point(e0: &Ellipse, arc: &Arc) -> Result<Vec<f64>> {
    let len = arc.len();
    if !(len > 0.0 && len < PI) {
        return Err(Error::Invalid(format!("arc length {len} must lie in (0, π)")));
    }
    let scale = 1.0 / (0.5 * len).cos();
    Ok(e0.point(arc.mid()).into_iter().map(|v| v * scale).collect())
}

/// Orthogonal complement of the span of all conjugate radii of `P`,
/// as an orthonormal list.
pub(crate) fn span_complement(p: &EllipticPolytope) -> Vec<Vec<f64>> {
    let d = p.dim();
    let n = p.len();
    let m = DMatrix::from_fn(d, 2 * n, |i, j| {
        let e = &p.ellipses()[j / 2];
        if j % 2 == 0 {
            e.a()[i]
        } else {
            e.b()[i]
        }
    });
    let scale = m.amax();
    if scale == 0.0 {
        return (0..d).map(|i| (0..d).map(|j| (i == j) as u8 as f64).collect()).collect();
    }
    // left singular vectors with negligible singular value
    let mmt = &m * m.transpose();
    let eig = mmt.symmetric_eigen();
    let tol = 1e-20 * scale * scale * (2 * n) as f64;
    (0..d)
        .filter(|&i| eig.eigenvalues[i] <= tol)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

/// Bracket for `‖w‖_P` by second-order cone programming:
/// `min Σ r_j` subject to `Σ (c_j a_j + s_j b_j) = w`, `‖(c_j, s_j)‖ ≤ r_j`.
pub fn pe_norm_socp(w: &[f64], p: &EllipticPolytope) -> Result<NormBracket> {
    check_dim("w", w.len(), p.dim())?;
    if norm(w) == 0.0 {
        return Ok(NormBracket::exact(0.0));
    }
    let comp = span_complement(p);
    if comp.iter().any(|u| dot(u, w).abs() > 1e-9 * norm(w)) {
        return Ok(NormBracket::out_of_span());
    }
    let d = p.dim();
    let n = p.len();
    let mut a = Triplets::new(d, 3 * n);
    for (j, e) in p.ellipses().iter().enumerate() {
        for i in 0..d {
            if e.a()[i] != 0.0 {
                a.push(i, 3 * j + 1, e.a()[i]);
            }
            if e.b()[i] != 0.0 {
                a.push(i, 3 * j + 2, e.b()[i]);
            }
        }
    }
    let objective = (0..3 * n).map(|k| (k % 3 == 0) as u8 as f64).collect();
    let cp = ConeProgram {
        objective,
        a,
        b: w.to_vec(),
        cones: vec![Cone::Soc(3); n],
    };
    let rep = backend::conic(&cp, NORM_TOL, 100.0, "computing a P-norm")?;
    Ok(certify(w, p, rep.primal_value, &rep.y_eq))
}

/// Turns a primal value and a dual direction `y` into a bracket whose lower
/// end is exact: `wᵀy / max_k support(E_k, y) ≤ ‖w‖_P`.
pub(crate) fn certify(w: &[f64], p: &EllipticPolytope, primal: f64, y: &[f64]) -> NormBracket {
    let h = p.support_sq_unchecked(y).sqrt();
    let (lo, dir) = if h > 0.0 && dot(w, y) > 0.0 {
        (dot(w, y) / h, Some(y.iter().map(|v| v / h).collect()))
    } else {
        (0.0, None)
    };
    NormBracket {
        lo,
        hi: primal.max(lo),
        direction: dir,
    }
}

/// Per-run statistics of the cutting loop.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CutTrace {
    /// `ν_j` after each iteration, starting with the initial two arcs.
    pub nu: Vec<f64>,
    /// Number of corner cuts performed.
    pub iterations: usize,
    /// Iteration at which some arc first reached each level (index = level).
    pub first_at_level: Vec<usize>,
}

impl CutTrace {
    /// `ν_{j+1} ≤ ν_j + tol` for all `j`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.nu.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

#[derive(Debug, Clone)]
struct Piece {
    arc: Arc,
    bracket: NormBracket,
}

/// Corner cutting at target factor `q`, using the conic norm program.
///
/// Stops with `Inside` once every corner has norm at most one, with
/// `Outside` once some point of `E₀` is shown to have norm above one, and
/// with `QInside(1/ν)` once the corner of largest norm sits on an arc `τ`
/// with `cos|τ| ≥ q`, or after `max_iter` cuts.
pub fn cut_decide(e0: &Ellipse, p: &EllipticPolytope, q: f64, max_iter: usize) -> Result<EeVerdict> {
    Ok(cut_decide_with(e0, p, q, max_iter, Method::Cutting, &|w| pe_norm_socp(w, p))?.0)
}

/// Corner cutting with an arbitrary norm oracle.
pub fn cut_decide_with(
    e0: &Ellipse,
    p: &EllipticPolytope,
    q: f64,
    max_iter: usize,
    method: Method,
    oracle: &(dyn Fn(&[f64]) -> Result<NormBracket> + Sync),
) -> Result<(EeVerdict, CutTrace)> {
    check_dim("ellipse", e0.dim(), p.dim())?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Invalid(format!("factor q = {q} must lie in (0, 1)")));
    }
    if max_iter == 0 {
        return Err(Error::Invalid("max_iter must be at least 1".into()));
    }
    let mut trace = CutTrace::default();
    if e0.max_radius() == 0.0 || p.ellipses().iter().any(|e| e.same_set(e0, crate::geom::SAME_SET_TOL)) {
        return Ok((EeVerdict::inside(method, Certificate::None), trace));
    }
    // E₀ sticking out of the span of P
    for u in span_complement(p) {
        if dot(&u, e0.a()).abs().max(dot(&u, e0.b()).abs()) > 1e-9 * e0.max_radius() {
            if let Some(v) = EeVerdict::outside(method, e0, p, u)? {
                return Ok((v, trace));
            }
        }
    }

    let eval = |arc: Arc| -> Result<Piece> {
        let w = corner_point(e0, &arc)?;
        Ok(Piece {
            arc,
            bracket: oracle(&w)?,
        })
    };
    let (l, r) = Arc::new(0.0, 0).split();
    let mut pieces = vec![eval(l)?, eval(r)?];
    trace.first_at_level = vec![0, 0];

    loop {
        if let Some(v) = exposed(e0, p, &pieces, method)? {
            return Ok((v, trace));
        }
        let (idx, nu) = widest(&pieces);
        trace.nu.push(nu);
        if nu <= 1.0 + INSIDE_TOL {
            return Ok((EeVerdict::inside(method, corners(&pieces)), trace));
        }
        // the corner to cut is already as fine as the target factor asks
        if pieces[idx].arc.len().cos() >= q || trace.iterations >= max_iter || pieces[idx].arc.level >= 48 {
            return Ok((EeVerdict::q_inside(method, 1.0 / nu, corners(&pieces)), trace));
        }
        let mother = pieces.remove(idx);
        let (a, b) = mother.arc.split();
        let mut kids = [eval(a)?, eval(b)?];
        for kid in &mut kids {
            // the new corners lie in the old polygon, hence in νP
            kid.bracket.hi = kid.bracket.hi.min(nu);
        }
        trace.iterations += 1;
        let level = a.level as usize;
        if trace.first_at_level.len() <= level {
            trace.first_at_level.push(trace.iterations);
        }
        pieces.splice(idx..idx, kids);
    }
}

/// Largest upper norm bound over the pieces and its first position.
fn widest(pieces: &[Piece]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, pc) in pieces.iter().enumerate() {
        if pc.bracket.hi > best.1 {
            best = (i, pc.bracket.hi);
        }
    }
    best
}

/// `Outside` if some corner proves that the point of `E₀` at its arc
/// midpoint has norm above one.
fn exposed(e0: &Ellipse, p: &EllipticPolytope, pieces: &[Piece], method: Method) -> Result<Option<EeVerdict>> {
    for pc in pieces {
        if pc.bracket.lo * (0.5 * pc.arc.len()).cos() > 1.0 {
            if let Some(y) = &pc.bracket.direction {
                if let Some(v) = EeVerdict::outside(method, e0, p, y.clone())? {
                    return Ok(Some(v));
                }
            }
        }
    }
    Ok(None)
}

fn corners(pieces: &[Piece]) -> Certificate {
    Certificate::CornerNorms {
        corners: pieces.iter().map(|pc| (pc.arc.mid(), pc.bracket.hi)).collect(),
    }
}

/// Bracket `[lo, hi]` for `‖E₀‖_P = max_t ‖a₀ cos t + b₀ sin t‖_P` with
/// `lo ≥ q·hi`, by cutting until the polygon and the arc midpoints agree.
pub fn ellipse_norm_with(
    e0: &Ellipse,
    p: &EllipticPolytope,
    q: f64,
    max_iter: usize,
    oracle: &(dyn Fn(&[f64]) -> Result<NormBracket> + Sync),
) -> Result<(f64, f64)> {
    check_dim("ellipse", e0.dim(), p.dim())?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Invalid(format!("factor q = {q} must lie in (0, 1)")));
    }
    if e0.max_radius() == 0.0 {
        return Ok((0.0, 0.0));
    }
    let eval = |arc: Arc| -> Result<Piece> {
        Ok(Piece {
            arc,
            bracket: oracle(&corner_point(e0, &arc)?)?,
        })
    };
    let (l, r) = Arc::new(0.0, 0).split();
    let mut pieces = vec![eval(l)?, eval(r)?];
    for _ in 0..=max_iter {
        let (idx, hi) = widest(&pieces);
        let lo = pieces
            .iter()
            .map(|pc| pc.bracket.lo * (0.5 * pc.arc.len()).cos())
            .fold(0.0, f64::max);
        if lo.is_infinite() || lo >= q * hi || pieces[idx].arc.level >= 48 {
            return Ok((lo.min(hi), hi));
        }
        let mother = pieces.remove(idx);
        let (a, b) = mother.arc.split();
        let mut kids = [eval(a)?, eval(b)?];
        for kid in &mut kids {
            kid.bracket.hi = kid.bracket.hi.min(hi);
        }
        pieces.splice(idx..idx, kids);
    }
    Err(Error::NoConvergence(format!("ellipse norm not within factor {q} after {max_iter} cuts")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: &[f64], b: &[f64]) -> Ellipse {
        Ellipse::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn corner_examples() {
        let c = corner_point(&e(&[1.0, 0.0], &[0.0, 1.0]), &Arc::new(0.0, 1)).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
        let c = corner_point(&e(&[2.0, 0.0], &[0.0, 1.0]), &Arc::new(0.0, 1)).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
        assert!(corner_point(&Ellipse::disc(2, 1.0), &Arc::new(0.0, 0)).is_err());
    }

    #[test]
    fn norm_examples() {
        let disc = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0)]).unwrap();
        let b = pe_norm_socp(&[0.5, 0.0], &disc).unwrap();
        assert!((b.lo - 0.5).abs() < 1e-7 && (b.hi - 0.5).abs() < 1e-7);
        let b = pe_norm_socp(&[3.0, 4.0], &disc).unwrap();
        assert!((b.mid() - 5.0).abs() < 1e-6);
        let cross = EllipticPolytope::new(vec![
            Ellipse::segment(vec![1.0, 0.0]).unwrap(),
            Ellipse::segment(vec![0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let b = pe_norm_socp(&[1.0, 1.0], &cross).unwrap();
        assert!((b.mid() - 2.0).abs() < 1e-6 && b.lo <= 2.0 + 1e-12);
        let flat = EllipticPolytope::new(vec![e(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0])]).unwrap();
        assert!(pe_norm_socp(&[0.0, 0.0, 1.0], &flat).unwrap().is_out_of_span());
    }

    #[test]
    fn decide_examples() {
        let disc = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0)]).unwrap();
        let (v, trace) =
            cut_decide_with(&Ellipse::disc(2, 0.5), &disc, 0.99, 100, Method::Cutting, &|w| pe_norm_socp(w, &disc))
                .unwrap();
        assert!(v.is_inside());
        assert_eq!(trace.iterations, 0);
        let (v, trace) =
            cut_decide_with(&Ellipse::disc(2, 1.01), &disc, 0.999, 1000, Method::Cutting, &|w| pe_norm_socp(w, &disc))
                .unwrap();
        assert!(v.is_outside());
        assert!(trace.is_monotone(1e-9));
        assert!(cut_decide(&Ellipse::disc(2, 1.0), &disc, 0.99, 100).unwrap().is_inside());
    }

    #[test]
    fn ellipse_norm_of_disc() {
        let disc = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0)]).unwrap();
        let e0 = e(&[2.0, 0.0], &[0.0, 1.0]);
        let (lo, hi) = ellipse_norm_with(&e0, &disc, 0.999, 1000, &|w| pe_norm_socp(w, &disc)).unwrap();
        assert!(lo <= 2.0 + 1e-7 && hi >= 2.0 - 1e-7 && lo >= 0.999 * hi);
    }
}
