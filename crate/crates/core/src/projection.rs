//! Polyhedral lifting of the regular `2ⁿ`-gon.
//!
//! Starting from the triangle `0 ≤ x₂ ≤ x₁ tan(2π/2ⁿ)`, `x₁ + x₂ tan(π/2ⁿ) ≤ r`
//! (one sector of the polygon), each of `n` doublings adds two variables
//! and the constraints describing the hull of the current set and its
//! mirror image about the line at angle `α = π/2^m`:
//!
//! ```text
//! p' = p,  |q'| ≤ q   with  p = x cos α + y sin α,  q = x sin α - y cos α,
//!                           p' = x' cos α + y' sin α,  q' = -x' sin α + y' cos α
//! ```
//!
//! After the last doubling (`α = π`) the last two variables range over the
//! regular `2ⁿ`-gon of circumradius `r` with a vertex at angle zero. Using
//! one copy per ellipse turns the norm of `P` into a linear program whose
//! value `r` satisfies `r cos(π/2ⁿ) ≤ ‖w‖_P ≤ r`.

use std::f64::consts::PI;

use ellipt_solvers::{Bound, LinearProgram, Status};
use serde::Serialize;

use crate::backend;
use crate::cutting::{certify, cut_decide_with, ellipse_norm_with, span_complement, CutTrace, DEFAULT_MAX_ITER};
use crate::error::{check_dim, Error, Result};
use crate::geom::{dot, norm, Ellipse, EllipticPolytope};
use crate::verdict::{EeVerdict, Method, NormBracket};

pub const LP_TOL: f64 = 1e-9;

/// Ratio of inradius to circumradius of the regular `2ⁿ`-gon.
pub fn polygon_factor(n: u32) -> f64 {
    (PI / 2f64.powi(n as i32)).cos()
}

/// Smallest level `n ≥ 2` with `cos(π/2ⁿ) ≥ q`.
pub fn level_for(q: f64) -> Result<u32> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Invalid(format!("factor q = {q} must lie in (0, 1)")));
    }
    (2..=40)
        .find(|&n| polygon_factor(n) >= q)
        .ok_or_else(|| Error::Invalid(format!("factor {q} is too close to 1")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    Eq,
    Le,
}

/// One linear constraint `Σ c_i v_i (=|≤) 0` over the local variables
/// `v = (r, x₁, …, x_{2n+2})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftRow {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
}

/// The system `rTₙ`: rows plus the bounds `r ≥ 0`, `x₂ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftedPolygonSystem {
    pub n: u32,
    pub rows: Vec<LiftRow>,
}

impl LiftedPolygonSystem {
    /// `2n + 3`: `r` and `x₁..x_{2n+2}`.
    pub fn num_vars(&self) -> usize {
        2 * self.n as usize + 3
    }

    /// Rows plus the bound `x₂ ≥ 0`; the bound `r ≥ 0` is implied.
    pub fn num_constraints(&self) -> usize {
        self.rows.len() + 1
    }

    /// Local indices of the two output coordinates.
    pub fn output(&self) -> (usize, usize) {
        (2 * self.n as usize + 1, 2 * self.n as usize + 2)
    }

    /// Whether `v` satisfies every constraint within `tol`.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.num_vars() || v[0] < -tol || v[2] < -tol {
            return false;
        }
        self.rows.iter().all(|row| {
            let s: f64 = row.coeffs.iter().map(|&(i, c)| c * v[i]).sum();
            match row.kind {
                RowKind::Eq => s.abs() <= tol,
                RowKind::Le => s <= tol,
            }
        })
    }
}

/// Builds `rTₙ` for `n ≥ 2`.
pub fn build_lifted_polygon(n: u32) -> Result<LiftedPolygonSystem> {
    if n < 2 {
        return Err(Error::Invalid(format!("lifting level must be at least 2, got {n}")));
    }
    if n > 40 {
        return Err(Error::Invalid(format!("lifting level {n} is beyond double precision")));
    }
    let alpha = |m: u32| PI / 2f64.powi(m as i32);
    let mut rows = Vec::new();
    // sector between angles 0 and 2π/2ⁿ, cut by the polygon edge
    let (s1, c1) = alpha(n - 1).sin_cos();
    rows.push(LiftRow {
        coeffs: vec![(1, -s1), (2, c1)],
        kind: RowKind::Le,
    });
    let (s0, c0) = alpha(n).sin_cos();
    rows.push(LiftRow {
        coeffs: vec![(1, c0), (2, s0), (0, -c0)],
        kind: RowKind::Le,
    });
    for k in 1..=n as usize {
        let (s, c) = alpha(n - k as u32).sin_cos();
        let (xo, yo, xn, yn) = (2 * k - 1, 2 * k, 2 * k + 1, 2 * k + 2);
        rows.push(LiftRow {
            coeffs: vec![(xn, c), (yn, s), (xo, -c), (yo, -s)],
            kind: RowKind::Eq,
        });
        for sign in [1.0, -1.0] {
            rows.push(LiftRow {
                coeffs: vec![(xn, -sign * s), (yn, sign * c), (xo, -s), (yo, c)],
                kind: RowKind::Le,
            });
        }
    }
    for row in &mut rows {
        row.coeffs.retain(|&(_, c)| c != 0.0);
    }
    Ok(LiftedPolygonSystem { n, rows })
}

/// `min Σ r_j` over one copy of `rTₙ` per ellipse, with
/// `Σ (x_{2n+1} a_j + x_{2n+2} b_j) = w`. The `d` rows for `w` come first.
pub fn build_norm_lp(w: &[f64], p: &EllipticPolytope, n: u32) -> Result<LinearProgram> {
    check_dim("w", w.len(), p.dim())?;
    let sys = build_lifted_polygon(n)?;
    let nv = sys.num_vars();
    let big_n = p.len();
    let d = p.dim();
    let mut objective = vec![0.0; nv * big_n];
    for j in 0..big_n {
        objective[j * nv] = 1.0;
    }
    let mut lp = LinearProgram::new(objective);
    let (ox, oy) = sys.output();
    for (i, &wi) in w.iter().enumerate() {
        let mut row = Vec::new();
        for (j, e) in p.ellipses().iter().enumerate() {
            if e.a()[i] != 0.0 {
                row.push((j * nv + ox, e.a()[i]));
            }
            if e.b()[i] != 0.0 {
                row.push((j * nv + oy, e.b()[i]));
            }
        }
        lp.add_eq(&row, wi);
    }
    for j in 0..big_n {
        let base = j * nv;
        for v in 1..nv {
            lp.set_bound(base + v, Bound::FREE);
        }
        lp.set_bound(base + 2, Bound::NONNEG);
        for row in &sys.rows {
            let coeffs: Vec<_> = row.coeffs.iter().map(|&(i, c)| (base + i, c)).collect();
            match row.kind {
                RowKind::Eq => lp.add_eq(&coeffs, 0.0),
                RowKind::Le => lp.add_le(&coeffs, 0.0),
            };
        }
    }
    let n = n as usize;
    debug_assert_eq!(lp.num_vars(), (2 * n + 3) * big_n);
    debug_assert_eq!(lp.num_constraints() + 1, (3 * n + 4) * big_n + d + 1);
    debug_assert!(lp.nnz() + lp.b_eq.iter().filter(|v| **v != 0.0).count() <= (12 * n + 2 * d + 7) * big_n + d);
    Ok(lp)
}

/// Bracket `[lo, r]` for `‖w‖_P` from the level-`n` linear program; `lo` is
/// certified by the dual and is at least `r cos(π/2ⁿ)` up to rounding.
pub fn pe_norm_lp(w: &[f64], p: &EllipticPolytope, n: u32) -> Result<NormBracket> {
    check_dim("w", w.len(), p.dim())?;
    build_lifted_polygon(n)?;
    if norm(w) == 0.0 {
        return Ok(NormBracket::exact(0.0));
    }
    if span_complement(p).iter().any(|u| dot(u, w).abs() > 1e-9 * norm(w)) {
        return Ok(NormBracket::out_of_span());
    }
    let lp = build_norm_lp(w, p, n)?;
    let rep = backend::linear(&lp, LP_TOL, "computing a P-norm by the lifted LP")?;
    if rep.status == Status::Infeasible {
        return Ok(NormBracket::out_of_span());
    }
    let y = &rep.y_eq[..p.dim()];
    Ok(certify(w, p, rep.primal_value, y))
}

/// Corner cutting at level `m` driven by the level-`n` LP oracle; the
/// target factor is `cos(π/2ⁿ)·cos(π/2^m)`.
pub fn proj_decide(e0: &Ellipse, p: &EllipticPolytope, n: u32, m: u32) -> Result<EeVerdict> {
    Ok(proj_decide_traced(e0, p, n, m)?.0)
}

pub fn proj_decide_traced(e0: &Ellipse, p: &EllipticPolytope, n: u32, m: u32) -> Result<(EeVerdict, CutTrace)> {
    build_lifted_polygon(n)?;
    if m < 1 {
        return Err(Error::Invalid("cutting level must be at least 1".into()));
    }
    cut_decide_with(e0, p, polygon_factor(m), DEFAULT_MAX_ITER, Method::Projection, &|w| pe_norm_lp(w, p, n))
}

/// Splits `q` evenly between the two levels.
pub fn levels_for(q: f64) -> Result<(u32, u32)> {
    let n = level_for(q.sqrt())?;
    Ok((n, n))
}

/// [`proj_decide`] with levels chosen from the target factor `q`.
pub fn proj_decide_q(e0: &Ellipse, p: &EllipticPolytope, q: f64) -> Result<EeVerdict> {
    let (n, m) = levels_for(q)?;
    proj_decide(e0, p, n, m)
}

/// Bracket `[lo, hi]`, `lo ≥ q·hi`, for `‖E₀‖_P` using the LP oracle.
pub fn ellipse_norm_lp(e0: &Ellipse, p: &EllipticPolytope, q: f64) -> Result<(f64, f64)> {
    let n = level_for(q.sqrt())?;
    ellipse_norm_with(e0, p, q, 100_000, &|w| pe_norm_lp(w, p, n))
}
