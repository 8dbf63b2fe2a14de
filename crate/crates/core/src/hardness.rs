//! Polyhedra with many local maxima of a rank-two quadratic form, and the
//! reduction of rank-two quadratic maximization to ellipse inclusion.
//!
//! The lift of the regular `2ⁿ`-gon is built by `n` reflection doublings.
//! Replacing each reflection by a nearby affine symmetry `(u, w) ↦ (u + a w,
//! -w)` about the same line keeps the system linear (`u' = u + a(w - w')/2`,
//! `|w'| ≤ -w`) and makes the distances of the projected vertices to the
//! origin pairwise different.

use std::f64::consts::PI;

use ellipt_solvers::{Bound, LinearProgram};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::backend;
use crate::error::{Error, Result};
use crate::geom::{Ellipse, EllipticPolytope};

/// Relative gap below which two vertex distances count as equal.
pub const DISTINCT_TOL: f64 = 1e-12;

/// `{x : A_eq x = b_eq, A_ub x ≤ b_ub}` with dense rows.
#[derive(Debug, Clone, Serialize)]
pub struct HRep {
    pub dim: usize,
    pub equalities: Vec<(Vec<f64>, f64)>,
    pub inequalities: Vec<(Vec<f64>, f64)>,
}

impl HRep {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let dot = |g: &[f64]| g.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        self.equalities.iter().all(|(g, b)| (dot(g) - b).abs() <= tol)
            && self.inequalities.iter().all(|(g, b)| dot(g) <= b + tol)
    }

    /// Inequalities that are not implied by the others, found by LP.
    pub fn facet_count(&self) -> Result<usize> {
        let mut count = 0;
        for i in 0..self.inequalities.len() {
            let (gi, bi) = &self.inequalities[i];
            let mut lp = LinearProgram::new(gi.iter().map(|v| -v).collect());
            for v in 0..self.dim {
                lp.set_bound(v, Bound::FREE);
            }
            for (g, b) in &self.equalities {
                lp.add_eq(&sparse(g), *b);
            }
            for (j, (g, b)) in self.inequalities.iter().enumerate() {
                let rhs = if j == i { b + 1.0 } else { *b };
                lp.add_le(&sparse(g), rhs);
            }
            let rep = backend::linear(&lp, 1e-9, "testing a facet")?;
            if -rep.primal_value > bi + 1e-7 {
                count += 1;
            }
        }
        Ok(count)
    }
}

fn sparse(g: &[f64]) -> Vec<(usize, f64)> {
    g.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect()
}

/// The lift `Q_n ⊂ R^{2n+2}` and its projection to the last two
/// coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedLift {
    pub n: u32,
    /// Shear `a_k` of the affine symmetry at doubling `k`.
    pub shears: Vec<f64>,
    /// Tilt of the outer side of the initial triangle, in radians.
    pub tilt: f64,
    pub hrep: HRep,
    /// Vertices of the projected polygon, counter-clockwise.
    pub polygon: Vec<[f64; 2]>,
    /// Hausdorff distance from the regular `2ⁿ`-gon inscribed in the unit
    /// circle.
    pub hausdorff: f64,
    /// Smallest gap between two vertex distances to the origin.
    pub min_gap: f64,
}

/// Angle of the reflection line of doubling `k = 1..=n`.
fn line_angle(n: u32, k: u32) -> f64 {
    PI / 2f64.powi((n - k) as i32)
}

/// The lift with the given shears (one per doubling) and tilt. All zero
/// gives the regular polygon.
pub fn build_lift(n: u32, shears: &[f64], tilt: f64) -> Result<PerturbedLift> {
    if n < 2 {
        return Err(Error::Invalid(format!("level n = {n} must be at least 2")));
    }
    if shears.len() != n as usize {
        return Err(Error::Dimension(format!("{} shears for n = {n}", shears.len())));
    }
    let half = 0.5 * line_angle(n, 1);
    if !(tilt.abs() < half) || !shears.iter().all(|a| a.is_finite()) {
        return Err(Error::Invalid("tilt or shear out of range".into()));
    }
    let dim = 2 * n as usize + 2;
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    let row = |pairs: &[(usize, f64)]| {
        let mut g = vec![0.0; dim];
        for &(i, v) in pairs {
            g[i] += v;
        }
        g
    };
    // triangle O, A = (1, 0), B on the first line
    let (s1, c1) = line_angle(n, 1).sin_cos();
    let (s0, c0) = (half + tilt).sin_cos();
    ineqs.push((row(&[(1, -1.0)]), 0.0));
    ineqs.push((row(&[(0, -s1), (1, c1)]), 0.0));
    ineqs.push((row(&[(0, c0), (1, s0)]), c0));
    let b = c0 / (c0 * c1 + s0 * s1);
    let mut poly = vec![[0.0, 0.0], [1.0, 0.0], [b * c1, b * s1]];

    for k in 1..=n {
        let (s, c) = line_angle(n, k).sin_cos();
        let a = shears[k as usize - 1];
        let (x, y, xn, yn) = (2 * k as usize - 2, 2 * k as usize - 1, 2 * k as usize, 2 * k as usize + 1);
        // u' - u - a w / 2 + a w' / 2 = 0 with u = c x + s y, w = -s x + c y
        eqs.push((
            row(&[
                (xn, c - 0.5 * a * s),
                (yn, s + 0.5 * a * c),
                (x, -c + 0.5 * a * s),
                (y, -s - 0.5 * a * c),
            ]),
            0.0,
        ));
        // ±w' ≤ -w
        ineqs.push((row(&[(xn, -s), (yn, c), (x, -s), (y, c)]), 0.0));
        ineqs.push((row(&[(xn, s), (yn, -c), (x, -s), (y, c)]), 0.0));
        poly = double(&poly, c, s, a);
    }
    let polygon = strip_origin(poly);
    let expected = 1usize << n;
    if polygon.len() != expected {
        return Err(Error::Invalid(format!(
            "projection has {} vertices instead of {expected}; the perturbation is too large",
            polygon.len()
        )));
    }
    let mut dists: Vec<f64> = polygon.iter().map(|p| p[0].hypot(p[1])).collect();
    dists.sort_by(f64::total_cmp);
    let min_gap = dists.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let regular: Vec<[f64; 2]> = (0..expected)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / expected as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    Ok(PerturbedLift {
        n,
        shears: shears.to_vec(),
        tilt,
        hrep: HRep {
            dim,
            equalities: eqs,
            inequalities: ineqs,
        },
        hausdorff: hausdorff(&polygon, &regular),
        polygon,
        min_gap,
    })
}

/// Random positive shears and tilt in `(0, ε/(4n)]`, resampled until the
/// polygon is within `ε` of the regular one and its vertex distances are
/// pairwise different.
pub fn build_perturbed_lift(n: u32, eps: f64, seed: u64) -> Result<PerturbedLift> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("eps = {eps} must be positive")));
    }
    if n < 2 {
        return Err(Error::Invalid(format!("level n = {n} must be at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = eps / (4.0 * n as f64);
    for _ in 0..100 {
        let shears: Vec<f64> = (0..n).map(|_| top * (1.0 - rng.random::<f64>())).collect();
        let tilt = top * (1.0 - rng.random::<f64>());
        let lift = match build_lift(n, &shears, tilt) {
            Ok(l) => l,
            Err(Error::Invalid(_)) => continue,
            Err(e) => return Err(e),
        };
        if lift.hausdorff < eps && lift.min_gap > DISTINCT_TOL {
            return Ok(lift);
        }
    }
    Err(Error::NoConvergence(format!(
        "no admissible perturbation of the level-{n} lift after 100 draws"
    )))
}

/// Vertices that are strict local maxima of `x² + y²` on the polygon, and
/// the sorted distinct values among them.
///
/// A vertex `v` is a strict local maximum when the squared distance
/// decreases along both incident edges, i.e. `v·(u - v) < 0` for both
/// neighbours `u`.
pub fn count_local_maxima(lift: &PerturbedLift) -> (usize, Vec<f64>) {
    let p = &lift.polygon;
    let m = p.len();
    let mut values = Vec::new();
    for i in 0..m {
        let v = p[i];
        let down = |u: [f64; 2]| v[0] * (u[0] - v[0]) + v[1] * (u[1] - v[1]) < 0.0;
        if down(p[(i + m - 1) % m]) && down(p[(i + 1) % m]) {
            values.push(v[0] * v[0] + v[1] * v[1]);
        }
    }
    let count = values.len();
    values.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for v in values {
        if distinct.last().is_none_or(|&w| v - w > DISTINCT_TOL * w.max(1.0)) {
            distinct.push(v);
        }
    }
    (count, distinct)
}

/// Clips the polygon to `w ≤ 0` for the line at angle `(c, s)` and takes
/// the hull with the image under the affine symmetry with shear `a`.
fn double(poly: &[[f64; 2]], c: f64, s: f64, a: f64) -> Vec<[f64; 2]> {
    let to_uw = |p: [f64; 2]| [c * p[0] + s * p[1], -s * p[0] + c * p[1]];
    let from_uw = |q: [f64; 2]| [c * q[0] - s * q[1], s * q[0] + c * q[1]];
    let uw: Vec<[f64; 2]> = poly.iter().map(|&p| to_uw(p)).collect();
    let clipped = clip(&uw);
    let mut pts = clipped.clone();
    for q in &clipped {
        if q[1] < 0.0 {
            pts.push([q[0] + a * q[1], -q[1]]);
        }
    }
    hull(&pts).into_iter().map(from_uw).collect()
}

/// Sutherland–Hodgman against `w ≤ 0`; points within rounding of the line
/// are put on it.
fn clip(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let snap = |q: [f64; 2]| if q[1].abs() <= 1e-14 { [q[0], 0.0] } else { q };
    let poly: Vec<[f64; 2]> = poly.iter().map(|&q| snap(q)).collect();
    let m = poly.len();
    let mut out = Vec::new();
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        if p[1] <= 0.0 {
            out.push(p);
        }
        if (p[1] < 0.0 && q[1] > 0.0) || (p[1] > 0.0 && q[1] < 0.0) {
            let t = p[1] / (p[1] - q[1]);
            out.push([p[0] + t * (q[0] - p[0]), 0.0]);
        }
    }
    out
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull without collinear or repeated points.
fn hull(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup_by(|a, b| (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-13);
    if p.len() < 3 {
        return p;
    }
    let mut h: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    // flat angles left over from rounding
    loop {
        let m = h.len();
        let flat = (0..m).find(|&i| {
            let (p, v, q) = (h[(i + m - 1) % m], h[i], h[(i + 1) % m]);
            let (a, b) = ((v[0] - p[0]).hypot(v[1] - p[1]), (q[0] - v[0]).hypot(q[1] - v[1]));
            cross(p, v, q).abs() <= 1e-12 * a * b
        });
        match flat {
            Some(i) if m > 3 => {
                h.remove(i);
            }
            _ => return h,
        }
    }
}

/// Drops the origin if it survived as a vertex of a flat angle.
fn strip_origin(poly: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    poly.into_iter().filter(|p| p[0].hypot(p[1]) > 1e-12).collect()
}

fn point_to_polygon(x: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    let m = poly.len();
    if (0..m).all(|i| cross(poly[i], poly[(i + 1) % m], x) >= 0.0) {
        return 0.0;
    }
    (0..m)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % m]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let t = (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            (x[0] - a[0] - t * dx).hypot(x[1] - a[1] - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance of two convex polygons, attained at vertices.
pub fn hausdorff(p: &[[f64; 2]], q: &[[f64; 2]]) -> f64 {
    let one = |p: &[[f64; 2]], q: &[[f64; 2]]| p.iter().map(|&x| point_to_polygon(x, q)).fold(0.0, f64::max);
    one(p, q).max(one(q, p))
}

/// The inclusion instance whose cylinder constraints `(x,a_k)² + (x,b_k)² ≤
/// 1` describe `{x : (x,h_k)² ≤ 1}` and whose objective is the rank-two
/// form `F`: `a_k = h_k cos t_k`, `b_k = h_k sin t_k` and `F = a₀a₀ᵀ +
/// b₀b₀ᵀ`. The maximum of the form equals `‖E(a₀, b₀)‖_P²`.
pub fn qp_to_ee_reduction(form: &DMatrix<f64>, h: &[Vec<f64>], t: &[f64]) -> Result<(Ellipse, EllipticPolytope)> {
    let d = form.nrows();
    if !form.is_square() {
        return Err(Error::Dimension(format!("form is {}×{}", form.nrows(), form.ncols())));
    }
    if h.len() != t.len() {
        return Err(Error::Dimension(format!("{} normals and {} angles", h.len(), t.len())));
    }
    if (form - form.transpose()).amax() > 1e-12 * form.amax().max(1.0) {
        return Err(Error::Invalid("the form is not symmetric".into()));
    }
    let eig = nalgebra::SymmetricEigen::new(form.clone());
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
        return Err(Error::Invalid("the form is not positive semidefinite".into()));
    }
    if order.iter().skip(2).any(|&i| eig.eigenvalues[i] > 1e-10 * scale) {
        return Err(Error::Invalid("the form has rank above two".into()));
    }
    let radius = |k: usize| -> Vec<f64> {
        let l = eig.eigenvalues[order[k]].max(0.0).sqrt();
        eig.eigenvectors.column(order[k]).iter().map(|v| v * l).collect()
    };
    let e0 = Ellipse::new(radius(0), radius(1))?;
    let ellipses = h
        .iter()
        .zip(t)
        .map(|(hk, &tk)| {
            if !(tk > 0.0 && tk < 0.5 * PI) {
                return Err(Error::Invalid(format!("angle t = {tk} must lie in (0, π/2)")));
            }
            Ellipse::new(hk.iter().map(|v| v * tk.cos()).collect(), hk.iter().map(|v| v * tk.sin()).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((e0, EllipticPolytope::new(ellipses)?))
}
