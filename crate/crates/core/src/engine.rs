//! Method dispatch, the mixed method and redundancy removal.

use std::cmp::Ordering;

use crate::cpm::{cpm_value, dual_separator, CPM_INSIDE_TOL};
use crate::cutting::{cut_decide, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::exact::{exact_2d, exact_3d};
use crate::geom::{Ellipse, EllipticPolytope};
use crate::projection::proj_decide_q;
use crate::verdict::{Certificate, EeVerdict, Method};

/// Decides `E₀ ⊂ P` with the chosen method at target factor `q`. The
/// complex polytope method ignores `q` (its factor is ½); the exact method
/// needs `d ≤ 3`.
pub fn decide(e0: &Ellipse, p: &EllipticPolytope, method: Method, q: f64) -> Result<EeVerdict> {
    match method {
        Method::Exact => match e0.dim() {
            2 => exact_2d(e0, p),
            3 => exact_3d(e0, p, None),
            d => Err(Error::Unsupported(format!(
                "the exact method handles d = 2 and d = 3 only (got d = {d}); \
                 use cpm, cutting, projection or mixed"
            ))),
        },
        Method::Cpm => crate::cpm::cpm_decide(e0, p),
        Method::Cutting => cut_decide(e0, p, q, DEFAULT_MAX_ITER),
        Method::Projection => proj_decide_q(e0, p, q),
        Method::Mixed => mixed_decide(e0, p, (1.0, 1.0), q),
    }
}

/// Runs the complex polytope method and stops if its bracket
/// `[1/(2t₀), 1/t₀]` for `‖E₀‖_P` lies below `bound.0` or above `bound.1`;
/// otherwise falls back to the projection method at factor `q`.
pub fn mixed_decide(e0: &Ellipse, p: &EllipticPolytope, bound: (f64, f64), q: f64) -> Result<EeVerdict> {
    let (lo, hi) = bound;
    if !(lo <= hi) {
        return Err(Error::Invalid(format!("empty range [{lo}, {hi}]")));
    }
    if e0.max_radius() == 0.0 && e0.dim() == p.dim() {
        return Ok(EeVerdict::inside(Method::Mixed, Certificate::None));
    }
    let res = match cpm_value(e0, p) {
        Ok(res) => res,
        Err(err @ Error::Solver { .. }) => {
            log::warn!("{err}; falling back to the projection method");
            let v = proj_decide_q(e0, p, q)?;
            return Ok(EeVerdict { method: Method::Mixed, ..v });
        }
        Err(err) => return Err(err),
    };
    let t0 = res.t0_max;
    let (nlo, nhi) = res.norm_bracket();
    if nhi * (1.0 - CPM_INSIDE_TOL) <= lo.min(1.0) {
        return Ok(EeVerdict::inside(Method::Mixed, Certificate::Cpm { t0 }));
    }
    if nlo > hi.max(1.0) {
        if let Some(x) = dual_separator(&res, e0, p) {
            if let Some(v) = EeVerdict::outside(Method::Mixed, e0, p, x)? {
                return Ok(v);
            }
        }
    }
    let v = proj_decide_q(e0, p, q)?;
    Ok(EeVerdict { method: Method::Mixed, ..v })
}

/// Indices (in input order) of the ellipses that are not certified to lie
/// in the hull of the others.
///
/// Ellipses are tested by decreasing size against the current survivors
/// together with those not yet tested, so of two equal ellipses the one
/// with the smaller index survives. A `QInside` verdict keeps the ellipse.
pub fn reduce_indices(p: &EllipticPolytope, method: Method, q: f64) -> Result<Vec<usize>> {
    let es = p.ellipses();
    let mut order: Vec<usize> = (0..es.len()).collect();
    let radii: Vec<f64> = es.iter().map(Ellipse::max_radius).collect();
    order.sort_by(|&i, &j| match radii[j].partial_cmp(&radii[i]) {
        Some(Ordering::Equal) | None => j.cmp(&i),
        Some(o) => o,
    });
    let mut alive = vec![true; es.len()];
    for &k in &order {
        let others: Vec<Ellipse> = (0..es.len())
            .filter(|&i| i != k && alive[i])
            .map(|i| es[i].clone())
            .collect();
        if others.is_empty() {
            continue;
        }
        let rest = EllipticPolytope::new(others)?;
        if decide(&es[k], &rest, method, q)?.is_inside() {
            alive[k] = false;
        }
    }
    Ok((0..es.len()).filter(|&i| alive[i]).collect())
}

/// The ellipses of `P` that survive [`reduce_indices`].
pub fn reduce(p: &EllipticPolytope, method: Method, q: f64) -> Result<EllipticPolytope> {
    let keep = reduce_indices(p, method, q)?;
    EllipticPolytope::new(keep.into_iter().map(|i| p.ellipses()[i].clone()).collect())
}
