//! The complex polytope method.
//!
//! With `v_k = a_k + i b_k`, the ellipse `E₀` lies in `t·P` as soon as
//! `t v₀` is a balanced complex combination `Σ z_k v_k + Σ z'_k v̄_k` with
//! `Σ |z_k| + Σ |z'_k| ≤ 1`. The largest such `t₀` is one second-order cone
//! program; it satisfies `1/(2t₀) ≤ ‖E₀‖_P ≤ 1/t₀`.

use ellipt_solvers::{Cone, ConeProgram, SolveReport, Triplets};
use num_complex::Complex64;

use crate::backend;
use crate::error::{check_dim, Error, Result};
use crate::geom::{dot, Ellipse, EllipticPolytope};
use crate::verdict::{Certificate, EeVerdict, Method};

/// Solver tolerance for the program.
pub const CPM_TOL: f64 = 1e-9;

/// `t₀` at or above `1 - CPM_INSIDE_TOL` counts as `E₀ ⊂ P`.
pub const CPM_INSIDE_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct CpmResult {
    /// Largest `t₀` with `t₀ v₀` in the balanced hull.
    pub t0_max: f64,
    /// Coefficients of `v_1..v_N`, then (with closure) of `v̄_1..v̄_N`.
    pub z: Vec<Complex64>,
    pub closure: bool,
    pub report: SolveReport,
}

impl CpmResult {
    /// Bracket `[lo, hi]` for `‖E₀‖_P`.
    pub fn norm_bracket(&self) -> (f64, f64) {
        if self.t0_max <= 0.0 {
            return (f64::INFINITY, f64::INFINITY);
        }
        (0.5 / self.t0_max, 1.0 / self.t0_max)
    }

    /// Complex dual vector `y_re + i y_im` of the equality rows.
    fn dual(&self, d: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let y = &self.report.y_eq;
        (y.len() == 1 + 2 * d).then(|| (y[1..1 + d].to_vec(), y[1 + d..].to_vec()))
    }
}

/// Value of the program with the conjugate vertices included.
pub fn cpm_value(e0: &Ellipse, p: &EllipticPolytope) -> Result<CpmResult> {
    cpm_value_with(e0, p, true)
}

/// As [`cpm_value`]; `closure = false` drops the conjugate vertices, which
/// is only useful to show that the factor guarantee is then lost.
pub fn cpm_value_with(e0: &Ellipse, p: &EllipticPolytope, closure: bool) -> Result<CpmResult> {
    check_dim("ellipse", e0.dim(), p.dim())?;
    let d = p.dim();
    let n = p.len();
    let m = if closure { 2 * n } else { n };
    // x = [t0, slack, (r_j, t_j, u_j) for j < m]
    let nv = 2 + 3 * m;
    let mut objective = vec![0.0; nv];
    objective[0] = -1.0;
    let mut a = Triplets::new(1 + 2 * d, nv);
    a.push(0, 1, 1.0);
    for j in 0..m {
        a.push(0, 2 + 3 * j, 1.0);
    }
    for i in 0..d {
        let (re, im) = (1 + i, 1 + d + i);
        a.push(re, 0, -e0.a()[i]);
        a.push(im, 0, -e0.b()[i]);
        for (k, e) in p.ellipses().iter().enumerate() {
            let (ak, bk) = (e.a()[i], e.b()[i]);
            // z v = (t a - u b) + i (u a + t b)
            let (t, u) = (3 + 3 * k, 4 + 3 * k);
            push_nz(&mut a, re, t, ak);
            push_nz(&mut a, re, u, -bk);
            push_nz(&mut a, im, t, bk);
            push_nz(&mut a, im, u, ak);
            if closure {
                // z v̄ = (t a + u b) + i (u a - t b)
                let (t, u) = (3 + 3 * (k + n), 4 + 3 * (k + n));
                push_nz(&mut a, re, t, ak);
                push_nz(&mut a, re, u, bk);
                push_nz(&mut a, im, t, -bk);
                push_nz(&mut a, im, u, ak);
            }
        }
    }
    let mut b = vec![0.0; 1 + 2 * d];
    b[0] = 1.0;
    let mut cones = vec![Cone::NonNeg(2)];
    cones.extend(std::iter::repeat_n(Cone::Soc(3), m));
    let cp = ConeProgram {
        objective,
        a,
        b,
        cones,
    };
    if e0.max_radius() == 0.0 {
        return Err(Error::Invalid("E₀ is a single point; t₀ is unbounded".into()));
    }
    let report = backend::conic(&cp, CPM_TOL, 100.0, "solving the complex polytope program")?;
    let z = (0..m)
        .map(|j| Complex64::new(report.x[3 + 3 * j], report.x[4 + 3 * j]))
        .collect();
    Ok(CpmResult {
        t0_max: report.x[0].max(0.0),
        z,
        closure,
        report,
    })
}

fn push_nz(a: &mut Triplets, r: usize, c: usize, v: f64) {
    if v != 0.0 {
        a.push(r, c, v);
    }
}

/// Real directions `cos s·y_re + sin s·y_im` built from the dual, tried in
/// order of decreasing margin.
pub(crate) fn dual_separator(res: &CpmResult, e0: &Ellipse, p: &EllipticPolytope) -> Option<Vec<f64>> {
    let (yr, yi) = res.dual(p.dim())?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..180 {
        let s = k as f64 * std::f64::consts::PI / 180.0;
        let x: Vec<f64> = yr.iter().zip(&yi).map(|(r, i)| s.cos() * r + s.sin() * i).collect();
        if dot(&x, &x) == 0.0 {
            continue;
        }
        let margin = e0.support_sq_unchecked(&x) - p.support_sq_unchecked(&x);
        if best.as_ref().is_none_or(|(m, _)| margin > *m) {
            best = Some((margin, x));
        }
    }
    best.filter(|(m, _)| *m > 0.0).map(|(_, x)| x)
}

/// Decision at factor ½: `Inside` when `t₀ ≥ 1`, `Outside` when `t₀ < ½`,
/// otherwise `QInside` with factor `t₀`.
pub fn cpm_decide(e0: &Ellipse, p: &EllipticPolytope) -> Result<EeVerdict> {
    check_dim("ellipse", e0.dim(), p.dim())?;
    if e0.max_radius() == 0.0 {
        return Ok(EeVerdict::inside(Method::Cpm, Certificate::None));
    }
    let res = cpm_value(e0, p)?;
    let t0 = res.t0_max;
    let cert = Certificate::Cpm { t0 };
    if t0 >= 1.0 - CPM_INSIDE_TOL {
        return Ok(EeVerdict::inside(Method::Cpm, cert));
    }
    if t0 < 0.5 {
        if let Some(x) = dual_separator(&res, e0, p) {
            if let Some(v) = EeVerdict::outside(Method::Cpm, e0, p, x)? {
                return Ok(v);
            }
        }
        // the dual did not yield a verified direction; find one by cutting
        let v = crate::cutting::cut_decide(e0, p, 0.5, crate::cutting::DEFAULT_MAX_ITER)?;
        if v.is_outside() {
            return Ok(EeVerdict { method: Method::Cpm, ..v });
        }
        log::warn!("t0 = {t0} < 1/2 but no separating direction was found");
    }
    Ok(EeVerdict::q_inside(Method::Cpm, t0, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: &[f64], b: &[f64]) -> Ellipse {
        Ellipse::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn closure_matters() {
        let e0 = e(&[1.0, 0.0], &[0.0, 1.0]);
        let p = EllipticPolytope::new(vec![e(&[0.0, 1.0], &[1.0, 0.0])]).unwrap();
        let open = cpm_value_with(&e0, &p, false).unwrap();
        assert!(open.t0_max <= 1e-7, "{}", open.t0_max);
        let closed = cpm_value(&e0, &p).unwrap();
        assert!((closed.t0_max - 1.0).abs() <= 1e-6);
        // the conjugate of v₁ carries coefficient i
        let z = closed.z[1];
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-5, "{z}");
    }

    #[test]
    fn concentric_discs() {
        let p = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0)]).unwrap();
        let res = cpm_value(&Ellipse::disc(2, 1.5), &p).unwrap();
        assert!((res.t0_max - 1.0 / 1.5).abs() < 1e-6);
        let v = cpm_decide(&Ellipse::disc(2, 3.0), &p).unwrap();
        assert!(v.is_outside());
        assert!(cpm_decide(&Ellipse::disc(2, 0.5), &p).unwrap().is_inside());
    }

    #[test]
    fn member_is_inside() {
        let p = EllipticPolytope::new(vec![
            e(&[1.0, 0.2, 0.0], &[0.0, 0.3, 1.0]),
            e(&[0.0, 1.0, 0.5], &[0.4, 0.0, 0.0]),
        ])
        .unwrap();
        let res = cpm_value(&p.ellipses()[1], &p).unwrap();
        assert!(res.t0_max >= 1.0 - 1e-7);
    }
}
