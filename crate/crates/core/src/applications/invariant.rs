//! The image-and-clean iteration shared by the Lyapunov and JSR builders.

use rayon::prelude::*;
use serde::Serialize;

use super::{image, MatrixFamily};
use crate::cpm::cpm_value;
use crate::engine::{mixed_decide, reduce_indices};
use crate::error::{Error, Result};
use crate::geom::{Ellipse, EllipticPolytope, SAME_SET_TOL};
use crate::projection::proj_decide_q;
use crate::verdict::{Certificate, Method, Outcome};

#[derive(Debug, Clone, Copy)]
pub struct IterationOptions {
    /// Target factor of the mixed method used for image tests and cleaning.
    pub q: f64,
    pub max_iter: usize,
    /// Slack in `AP ⊂ λ(1 + tol)P` for the final norm table.
    pub tol: f64,
    /// Keep every tested image together with the polytope it was tested
    /// against.
    pub harvest: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            q: 0.995,
            max_iter: 200,
            tol: 1e-6,
            harvest: false,
        }
    }
}

/// Upper bound on `‖λ⁻¹ A_matrix E_vertex‖_P`.
#[derive(Debug, Clone, Serialize)]
pub struct ImageBound {
    pub matrix: usize,
    pub vertex: usize,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantPolytopeCert {
    pub polytope: EllipticPolytope,
    pub lambda: f64,
    pub table: Vec<ImageBound>,
    pub iterations: usize,
    /// An iteration produced no new vertex.
    pub converged: bool,
    /// Converged and every table entry is at most `1 + tol`.
    pub valid: bool,
}

impl InvariantPolytopeCert {
    /// Recomputes the norm table for `family` and checks every entry.
    pub fn verify(&self, family: &MatrixFamily, tol: f64) -> Result<bool> {
        let table = norm_table(&family.scaled(1.0 / self.lambda), &self.polytope, tol)?;
        Ok(table.iter().all(|t| t.ok))
    }
}

/// An upper bound on `‖C‖_P`, trying the cheap tests first and stopping as
/// soon as the bound is at most `1 + tol`.
pub fn image_bound(c: &Ellipse, p: &EllipticPolytope, tol: f64) -> Result<f64> {
    let scale = p.ellipses().iter().map(Ellipse::max_radius).fold(0.0, f64::max);
    if c.max_radius() <= 1e-14 * scale {
        return Ok(0.0);
    }
    if p.ellipses().iter().any(|e| e.same_set(c, SAME_SET_TOL)) {
        return Ok(1.0);
    }
    let mut bound = match cpm_value(c, p) {
        Ok(res) if res.t0_max > 0.0 => 1.0 / res.t0_max,
        Ok(_) => f64::INFINITY,
        Err(err @ Error::Solver { .. }) => {
            log::warn!("{err}; bounding by the projection method only");
            f64::INFINITY
        }
        Err(err) => return Err(err),
    };
    if bound <= 1.0 + tol {
        return Ok(bound);
    }
    let v = proj_decide_q(&c.scaled(1.0 / (1.0 + tol)), p, 0.9999)?;
    let from_proj = match (v.outcome, &v.certificate) {
        (Outcome::Inside, Certificate::CornerNorms { corners }) => {
            corners.iter().map(|c| c.1).fold(0.0, f64::max) * (1.0 + tol)
        }
        (Outcome::Inside, _) => 1.0 + tol,
        (Outcome::QInside, _) => (1.0 + tol) / v.factor,
        (Outcome::Outside, _) => f64::INFINITY,
    };
    bound = bound.min(from_proj);
    Ok(bound)
}

pub(super) fn norm_table(scaled: &MatrixFamily, p: &EllipticPolytope, tol: f64) -> Result<Vec<ImageBound>> {
    let pairs: Vec<(usize, usize)> = (0..scaled.len())
        .flat_map(|m| (0..p.len()).map(move |k| (m, k)))
        .collect();
    pairs
        .par_iter()
        .map(|&(m, k)| {
            let c = image(&scaled.matrices()[m], &p.ellipses()[k]);
            let bound = image_bound(&c, p, tol)?;
            Ok(ImageBound {
                matrix: m,
                vertex: k,
                bound,
                ok: bound <= 1.0 + tol,
            })
        })
        .collect()
}

pub(super) struct IterationResult {
    pub polytope: EllipticPolytope,
    pub iterations: usize,
    pub converged: bool,
    pub harvested: Vec<(EllipticPolytope, Vec<Ellipse>)>,
}

/// Starting from the hull of `seeds`, adds the images of the newest
/// vertices under every matrix of `scaled` until none of them leaves the
/// current polytope.
pub(super) fn iterate(scaled: &MatrixFamily, seeds: Vec<Ellipse>, opts: &IterationOptions) -> Result<IterationResult> {
    if opts.max_iter == 0 {
        return Err(Error::Invalid("max_iter must be at least 1".into()));
    }
    let scale = seeds.iter().map(Ellipse::max_radius).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Invalid("all seed ellipses are points".into()));
    }
    let seeds = EllipticPolytope::new(seeds)?;
    let keep = reduce_indices(&seeds, Method::Mixed, opts.q)?;
    let mut p = EllipticPolytope::new(keep.iter().map(|&i| seeds.ellipses()[i].clone()).collect())?;
    let mut frontier: Vec<Ellipse> = p.ellipses().to_vec();
    let mut harvested = Vec::new();
    for it in 1..=opts.max_iter {
        let images: Vec<Ellipse> = frontier
            .iter()
            .flat_map(|e| scaled.matrices().iter().map(move |m| image(m, e)))
            .filter(|c| c.max_radius() > 1e-12 * scale)
            .collect();
        let inside = images
            .par_iter()
            .map(|c| Ok(mixed_decide(c, &p, (1.0, 1.0), opts.q)?.is_inside()))
            .collect::<Result<Vec<bool>>>()?;
        if opts.harvest {
            harvested.push((p.clone(), images.clone()));
        }
        let fresh: Vec<Ellipse> = images.into_iter().zip(inside).filter(|(_, i)| !i).map(|(c, _)| c).collect();
        log::debug!("iteration {it}: {} vertices, {} new images", p.len(), fresh.len());
        if fresh.is_empty() {
            return Ok(IterationResult {
                polytope: p,
                iterations: it,
                converged: true,
                harvested,
            });
        }
        let old = p.len();
        let mut all = p.into_ellipses();
        all.extend(fresh);
        let all = EllipticPolytope::new(all)?;
        let keep = reduce_indices(&all, Method::Mixed, opts.q)?;
        frontier = keep.iter().filter(|&&i| i >= old).map(|&i| all.ellipses()[i].clone()).collect();
        p = EllipticPolytope::new(keep.iter().map(|&i| all.ellipses()[i].clone()).collect())?;
        if frontier.is_empty() {
            return Ok(IterationResult {
                polytope: p,
                iterations: it,
                converged: true,
                harvested,
            });
        }
    }
    Ok(IterationResult {
        polytope: p,
        iterations: opts.max_iter,
        converged: false,
        harvested,
    })
}

/// Runs [`iterate`] and assembles the certificate for scaling `lambda`.
pub(super) fn certify_family(
    family: &MatrixFamily,
    lambda: f64,
    inflation: f64,
    seeds: Vec<Ellipse>,
    opts: &IterationOptions,
) -> Result<(InvariantPolytopeCert, Vec<(EllipticPolytope, Vec<Ellipse>)>)> {
    let run = iterate(&family.scaled(1.0 / (lambda * inflation)), seeds, opts)?;
    let table = if run.converged {
        norm_table(&family.scaled(1.0 / lambda), &run.polytope, opts.tol)?
    } else {
        Vec::new()
    };
    let valid = run.converged && table.iter().all(|t| t.ok);
    Ok((
        InvariantPolytopeCert {
            polytope: run.polytope,
            lambda,
            table,
            iterations: run.iterations,
            converged: run.converged,
            valid,
        },
        run.harvested,
    ))
}
