//! Exact inclusion tests in the plane and in space.
//!
//! In both cases `E₀ ⊄ P` exactly when some direction `x` has
//! `support(E₀,x)² > support(E_k,x)²` for all `k`. Every such inequality is
//! a homogeneous quadratic one, so in the plane the solution set is a union
//! of arcs of slopes, and in space (after dehomogenisation) a semialgebraic
//! set in the plane whose point closest to the origin can be found among
//! finitely many conic intersections.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::geom::{Ellipse, EllipticPolytope};
use crate::verdict::{Certificate, EeVerdict, Method};

/// Union of disjoint open intervals of direction angles `θ ∈ [0, π)`; the
/// angle `θ` stands for the slope `y/x = tan θ`, with `θ = π/2` the
/// vertical direction (slope `∞`).
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSet {
    intervals: Vec<(f64, f64)>,
}

impl SlopeSet {
    pub fn full() -> Self {
        SlopeSet {
            intervals: vec![(0.0, 2.0 * PI)],
        }
    }

    pub fn empty() -> Self {
        SlopeSet { intervals: Vec::new() }
    }

    /// Directions `(x, y)` with `A y² + 2B xy + C x² > eps`.
    pub fn from_form(a: f64, b: f64, c: f64, eps: f64) -> Self {
        // A sin²θ + 2B sinθ cosθ + C cos²θ = m + r cos(2θ - ψ)
        let m = 0.5 * (a + c);
        let h = 0.5 * (c - a);
        let r = h.hypot(b);
        if r <= 1e-300 {
            return if m > eps { Self::full() } else { Self::empty() };
        }
        let t = (eps - m) / r;
        if t >= 1.0 {
            return Self::empty();
        }
        if t < -1.0 {
            return Self::full();
        }
        let psi = b.atan2(h);
        let half = t.acos();
        let lo = (psi - half) / 2.0;
        let hi = (psi + half) / 2.0;
        Self::wrapped(lo, hi)
    }

    /// Open arc `(lo, hi)` with `hi - lo < π`, reduced modulo `π` so that
    /// `lo ∈ [0, π)`; `hi` may exceed `π` when the arc wraps around.
    fn wrapped(lo: f64, hi: f64) -> Self {
        let shift = (lo / PI).floor() * PI;
        SlopeSet {
            intervals: vec![(lo - shift, hi - shift)],
        }
    }

    pub fn intersect(&self, other: &SlopeSet) -> SlopeSet {
        let mut out = Vec::new();
        for &(l1, u1) in &self.intervals {
            for &(l2, u2) in &other.intervals {
                for shift in [-PI, 0.0, PI] {
                    let (l, u) = (l1.max(l2 + shift), u1.min(u2 + shift));
                    if u > l {
                        let s = (l / PI).floor() * PI;
                        out.push((l - s, u - s));
                    }
                }
            }
        }
        Self::merged(out)
    }

    fn merged(mut arcs: Vec<(f64, f64)>) -> SlopeSet {
        if arcs.iter().any(|(l, u)| u - l >= PI) {
            return Self::full();
        }
        arcs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (l, u) in arcs {
            match out.last_mut() {
                Some(last) if l < last.1 => last.1 = last.1.max(u),
                _ => out.push((l, u)),
            }
        }
        SlopeSet { intervals: out }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Whether the slope `t` (possibly infinite) lies in the set.
    pub fn contains_slope(&self, t: f64) -> bool {
        let theta = if t.is_infinite() {
            PI / 2.0
        } else {
            t.atan().rem_euclid(PI)
        };
        self.intervals
            .iter()
            .any(|&(l, u)| (l < theta && theta < u) || (l < theta + PI && theta + PI < u))
    }

    /// Angle at the midpoint of the widest interval.
    pub fn sample(&self) -> Option<f64> {
        self.intervals
            .iter()
            .max_by(|p, q| (p.1 - p.0).total_cmp(&(q.1 - q.0)))
            .map(|&(l, u)| (0.5 * (l + u)).rem_euclid(PI))
    }
}

fn check_dims(e0: &Ellipse, p: &EllipticPolytope, d: usize) -> Result<()> {
    check_dim("ellipse", e0.dim(), p.dim())?;
    if d != e0.dim() {
        return Err(Error::Unsupported(format!(
            "this exact test needs d = {d}, got d = {}",
            e0.dim()
        )));
    }
    Ok(())
}

/// Exact test in the plane, returning a verdict with a separating
/// direction when `E₀ ⊄ P`.
pub fn exact_2d(e0: &Ellipse, p: &EllipticPolytope) -> Result<EeVerdict> {
    check_dims(e0, p, 2)?;
    let m0 = e0.shape_matrix();
    let eps = 1e-12 * (m0[0] + m0[3]);
    let mut set = SlopeSet::full();
    for e in p.ellipses() {
        let m = e.shape_matrix();
        let a = m0[3] - m[3];
        let b = m0[1] - m[1];
        let c = m0[0] - m[0];
        set = set.intersect(&SlopeSet::from_form(a, b, c, eps));
        if set.is_empty() {
            return Ok(EeVerdict::inside(Method::Exact, Certificate::None));
        }
    }
    let theta = set.sample().expect("nonempty");
    let x = vec![theta.cos(), theta.sin()];
    match EeVerdict::outside(Method::Exact, e0, p, x)? {
        Some(v) => Ok(v),
        // the open set is thinner than rounding; treat as touching
        None => Ok(EeVerdict::inside(Method::Exact, Certificate::None)),
    }
}

/// `true` when `E₀ ⊂ P` (plane).
pub fn decide_ee_2d(e0: &Ellipse, p: &EllipticPolytope) -> Result<bool> {
    Ok(exact_2d(e0, p)?.is_inside())
}

/// `q(x, y) = a x² + b xy + c y² + d x + e y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Conic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Conic {
    fn coeffs(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    fn scale(&self) -> f64 {
        self.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn normalized(&self) -> Conic {
        let s = self.scale();
        if s == 0.0 {
            return *self;
        }
        let [a, b, c, d, e, f] = self.coeffs().map(|v| v / s);
        Conic { a, b, c, d, e, f }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        (
            2.0 * self.a * x + self.b * y + self.d,
            self.b * x + 2.0 * self.c * y + self.e,
        )
    }

    fn quad_part_zero(&self, tol: f64) -> bool {
        self.a.abs() <= tol && self.b.abs() <= tol && self.c.abs() <= tol
    }

    /// Coefficients in coordinates `(u, v)` with `(x, y) = R(θ)(u, v)`.
    fn rotated(&self, theta: f64) -> Conic {
        let (s, c) = theta.sin_cos();
        // x = c u - s v, y = s u + c v
        let (qa, qb, qc) = (self.a, self.b, self.c);
        let a = qa * c * c + qb * c * s + qc * s * s;
        let b = -2.0 * qa * c * s + qb * (c * c - s * s) + 2.0 * qc * s * c;
        let cc = qa * s * s - qb * s * c + qc * c * c;
        let d = self.d * c + self.e * s;
        let e = -self.d * s + self.e * c;
        Conic {
            a,
            b,
            c: cc,
            d,
            e,
            f: self.f,
        }
    }

    /// `x q_y - y q_x`: zero where the gradient is parallel to the position,
    /// i.e. at points of the curve stationary for the distance to the origin.
    fn stationarity(&self) -> Conic {
        Conic {
            a: self.b,
            b: 2.0 * (self.c - self.a),
            c: -self.b,
            d: self.e,
            e: -self.d,
            f: 0.0,
        }
    }
}

// polynomials as coefficient vectors, lowest degree first
fn pmul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            r[i + j] += a * b;
        }
    }
    r
}

fn padd(p: &[f64], q: &[f64], s: f64) -> Vec<f64> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| p.get(i).copied().unwrap_or(0.0) + s * q.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Real roots of a polynomial via companion-matrix eigenvalues.
fn real_roots(p: &[f64]) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = p.len() - 1;
    while deg > 0 && p[deg].abs() <= 1e-13 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let mut comp = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let eig = match nalgebra::Schur::try_new(comp, 1e-15, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => aberth(&p[..=deg]),
    };
    eig.iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

/// Aberth–Ehrlich iteration, used when the Schur iteration stalls.
fn aberth(p: &[f64]) -> Vec<Complex64> {
    let deg = p.len() - 1;
    let eval = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for &c in p.iter().rev() {
            dv = dv * z + v;
            v = v * z + c;
        }
        (v, dv)
    };
    let radius = 1.0 + p[..deg].iter().map(|c| (c / p[deg]).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 0.4 + k as f64 * std::f64::consts::TAU / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let (v, dv) = eval(z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..deg).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let s = a.abs().max(b.abs()).max(c.abs());
    if s == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * s {
        return if b.abs() > 1e-14 * s { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-10 * b.abs().max(4.0 * (a * c).abs()) {
        return Vec::new();
    }
    let sq = disc.max(0.0).sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Newton iteration on the pair `(f, g)`; returns the point if the scaled
/// residual drops below `1e-9`.
fn polish(f: &Conic, g: &Conic, mut x: f64, mut y: f64) -> Option<(f64, f64)> {
    let resid = |x: f64, y: f64| {
        let s = 1.0 + x * x + y * y;
        (f.eval(x, y).abs() / s).max(g.eval(x, y).abs() / s)
    };
    for _ in 0..40 {
        if resid(x, y) <= 1e-15 {
            break;
        }
        let (fx, fy) = f.grad(x, y);
        let (gx, gy) = g.grad(x, y);
        let det = fx * gy - fy * gx;
        if det.abs() <= 1e-300 {
            break;
        }
        let (fv, gv) = (f.eval(x, y), g.eval(x, y));
        let dx = (fv * gy - gv * fy) / det;
        let dy = (fx * gv - gx * fv) / det;
        let (nx, ny) = (x - dx, y - dy);
        if !(nx.is_finite() && ny.is_finite()) || resid(nx, ny) > resid(x, y) {
            break;
        }
        x = nx;
        y = ny;
    }
    (resid(x, y) <= 1e-9).then_some((x, y))
}

/// Intersection points of two conics; `None` when they share a component.
pub(crate) fn conic_intersections(f: &Conic, g: &Conic) -> Option<Vec<(f64, f64)>> {
    let f = f.normalized();
    let g = g.normalized();
    let zero = 1e-13;
    let fl = f.quad_part_zero(zero);
    let gl = g.quad_part_zero(zero);
    let mut pts = Vec::new();
    if fl && gl {
        let det = f.d * g.e - f.e * g.d;
        if det.abs() <= 1e-13 {
            // parallel lines: same line or disjoint
            let same = (f.d * g.f - g.d * f.f).abs() <= 1e-12 && (f.e * g.f - g.e * f.f).abs() <= 1e-12;
            return if same { None } else { Some(Vec::new()) };
        }
        let x = (-f.f * g.e + g.f * f.e) / det;
        let y = (-f.d * g.f + g.d * f.f) / det;
        return Some(vec![(x, y)]);
    }
    if fl || gl {
        let (line, conic) = if fl { (f, g) } else { (g, f) };
        let n2 = line.d * line.d + line.e * line.e;
        if n2 <= 1e-26 {
            return Some(Vec::new());
        }
        let (px, py) = (-line.f * line.d / n2, -line.f * line.e / n2);
        let n = n2.sqrt();
        let (ux, uy) = (-line.e / n, line.d / n);
        let alpha = conic.a * ux * ux + conic.b * ux * uy + conic.c * uy * uy;
        let (gx, gy) = conic.grad(px, py);
        let beta = gx * ux + gy * uy;
        let gamma = conic.eval(px, py);
        if alpha.abs() <= 1e-13 && beta.abs() <= 1e-13 && gamma.abs() <= 1e-13 {
            return None;
        }
        for t in quadratic_roots(alpha, beta, gamma) {
            if let Some(p) = polish(&f, &g, px + t * ux, py + t * uy) {
                pts.push(p);
            }
        }
        return Some(dedupe(pts));
    }

    // generic rotation so that both conics are genuinely quadratic in v
    let angles = [0.0, 0.463_647_6, 1.107_148_7, 0.321_750_5, 1.249_045_8, 0.785_398_2, 0.244_978_7];
    let theta = angles
        .iter()
        .copied()
        .max_by(|&s, &t| {
            let q = |th: f64| f.rotated(th).c.abs().min(g.rotated(th).c.abs());
            q(s).total_cmp(&q(t))
        })
        .unwrap();
    let fr = f.rotated(theta);
    let gr = g.rotated(theta);
    // as polynomials in v: A v² + B(u) v + C(u)
    let (a1, b1, c1) = ([fr.c], [fr.e, fr.b], [fr.f, fr.d, fr.a]);
    let (a2, b2, c2) = ([gr.c], [gr.e, gr.b], [gr.f, gr.d, gr.a]);
    let t1 = padd(&pmul(&a1, &c2), &pmul(&a2, &c1), -1.0);
    let t2 = padd(&pmul(&a1, &b2), &pmul(&a2, &b1), -1.0);
    let t3 = padd(&pmul(&b1, &c2), &pmul(&b2, &c1), -1.0);
    let res = padd(&pmul(&t1, &t1), &pmul(&t2, &t3), -1.0);
    if res.iter().all(|v| v.abs() <= 1e-12) {
        return None;
    }
    let (s, c) = theta.sin_cos();
    for u in real_roots(&res) {
        let mut vs = quadratic_roots(fr.c, fr.b * u + fr.e, fr.a * u * u + fr.d * u + fr.f);
        vs.extend(quadratic_roots(gr.c, gr.b * u + gr.e, gr.a * u * u + gr.d * u + gr.f));
        for v in vs {
            let (x, y) = (c * u - s * v, s * u + c * v);
            if let Some(p) = polish(&f, &g, x, y) {
                pts.push(p);
            }
        }
    }
    Some(dedupe(pts))
}

fn dedupe(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    for p in pts {
        let close = out.iter().any(|q| {
            let s = 1.0 + p.0.abs().max(p.1.abs());
            (p.0 - q.0).abs() <= 1e-9 * s && (p.1 - q.1).abs() <= 1e-9 * s
        });
        if !close {
            out.push(p);
        }
    }
    out
}

/// Exact test in space. Runs the candidate-point exhaustion in each of
/// the three coordinate charts so that no direction is missed.
pub fn exact_3d(e0: &Ellipse, p: &EllipticPolytope, eps: Option<f64>) -> Result<EeVerdict> {
    check_dims(e0, p, 3)?;
    let m0 = e0.shape_matrix();
    let r0 = e0.max_radius();
    if r0 == 0.0 {
        return Ok(EeVerdict::inside(Method::Exact, Certificate::None));
    }
    let eps = eps.unwrap_or(1e-9 * r0 * r0);
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
    }
    let diffs: Vec<[f64; 9]> = p
        .ellipses()
        .iter()
        .map(|e| {
            let m = e.shape_matrix();
            std::array::from_fn(|i| m[i] - m0[i])
        })
        .collect();

    for k in [2usize, 1, 0] {
        let (i, j) = match k {
            2 => (0, 1),
            1 => (0, 2),
            _ => (1, 2),
        };
        if let Some((x, y)) = solve_chart(&diffs, i, j, k, eps) {
            let mut v = vec![0.0; 3];
            v[i] = x;
            v[j] = y;
            v[k] = 1.0;
            if let Some(verdict) = EeVerdict::outside(Method::Exact, e0, p, v)? {
                return Ok(verdict);
            }
        }
    }
    Ok(EeVerdict::inside(Method::Exact, Certificate::None))
}

/// `true` when `E₀ ⊂ P` (space).
pub fn decide_ee_3d(e0: &Ellipse, p: &EllipticPolytope, eps: f64) -> Result<bool> {
    Ok(exact_3d(e0, p, Some(eps))?.is_inside())
}

/// Looks for `(x, y)` with `f_m(x, y) + eps ≤ 0` for all `m`, where
/// `f_m` is the form `D_m` evaluated at the vector with `1` in slot `k`.
fn solve_chart(diffs: &[[f64; 9]], i: usize, j: usize, k: usize, eps: f64) -> Option<(f64, f64)> {
    let at = |m: &[f64; 9], r: usize, c: usize| m[r * 3 + c];
    let forms: Vec<Conic> = diffs
        .iter()
        .map(|m| Conic {
            a: at(m, i, i),
            b: 2.0 * at(m, i, j),
            c: at(m, j, j),
            d: 2.0 * at(m, i, k),
            e: 2.0 * at(m, j, k),
            f: at(m, k, k),
        })
        .collect();
    let feasible = |x: f64, y: f64| forms.iter().all(|q| q.eval(x, y) <= -0.5 * eps);

    // boundary curves f_m + eps = 0, constant ones resolved directly
    let mut curves: Vec<Conic> = Vec::new();
    for q in &forms {
        let g = Conic { f: q.f + eps, ..*q };
        let var = g.a.abs().max(g.b.abs()).max(g.c.abs()).max(g.d.abs()).max(g.e.abs());
        if var <= 1e-14 * (g.f.abs() + eps) {
            if g.f > 0.0 {
                return None;
            }
            continue;
        }
        let n = g.normalized();
        if !curves.iter().any(|c| {
            let c = c.normalized();
            c.coeffs().iter().zip(n.coeffs()).all(|(p, q)| (p - q).abs() <= 1e-12)
        }) {
            curves.push(g);
        }
    }

    if feasible(0.0, 0.0) {
        return Some((0.0, 0.0));
    }
    for (a, g) in curves.iter().enumerate() {
        let st = g.stationarity();
        if st.normalized().scale() == 0.0 || st.scale() <= 1e-14 * g.scale() {
            // circle centred at the origin: every point is equally close
            let r2 = -g.f / g.a;
            if r2 > 0.0 && feasible(r2.sqrt(), 0.0) {
                return Some((r2.sqrt(), 0.0));
            }
        } else if let Some(pts) = conic_intersections(g, &st) {
            if let Some(&p) = pts.iter().find(|p| feasible(p.0, p.1)) {
                return Some(p);
            }
        }
        for h in &curves[a + 1..] {
            if let Some(pts) = conic_intersections(g, h) {
                if let Some(&p) = pts.iter().find(|p| feasible(p.0, p.1)) {
                    return Some(p);
                }
            }
        }
    }
    None
}
