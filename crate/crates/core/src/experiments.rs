//! Random instances, vertex fractions and accuracy runs.

use std::io::Write;
use std::time::Instant;

use ellipt_solvers::{Bound, LinearProgram};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::applications::{jsr_invariant_polytope, smp_search, JsrOptions, MatrixFamily, SmpCandidate};
use crate::backend;
use crate::cpm::cpm_value_with;
use crate::engine::{decide, reduce_indices};
use crate::error::{Error, Result};
use crate::geom::{Ellipse, EllipticPolytope};
use crate::projection::ellipse_norm_lp;
use crate::verdict::{Method, Outcome};

/// Version written into every [`RunRecord`].
pub const SCHEMA_VERSION: u32 = 1;

/// Factor of the projection method used as ground truth for norms.
pub const TRUTH_Q: f64 = 0.9999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Uniform in the unit ball.
    BallUniform,
    /// Uniform in `[-1, 1]^d`.
    CubeUniform,
    Gaussian,
}

impl std::str::FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball-uniform" | "ball" => Ok(Distribution::BallUniform),
            "cube-uniform" | "cube" => Ok(Distribution::CubeUniform),
            "gaussian" => Ok(Distribution::Gaussian),
            other => Err(Error::Invalid(format!(
                "unknown distribution {other:?} (expected ball-uniform, cube-uniform or gaussian)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleObject {
    Points,
    Ellipses,
}

/// A reproducible random sample: the same spec always gives the same
/// vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub distribution: Distribution,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub object: SampleObject,
}

impl SampleSpec {
    fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Invalid(format!("dimension {} < 2", self.d)));
        }
        if self.n == 0 {
            return Err(Error::Invalid("sample size must be positive".into()));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, dist: Distribution, d: usize) -> Vec<f64> {
    match dist {
        Distribution::Gaussian => (0..d).map(|_| StandardNormal.sample(rng)).collect(),
        Distribution::CubeUniform => (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        Distribution::BallUniform => loop {
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len > 0.0 {
                let r = rng.random::<f64>().powf(1.0 / d as f64);
                break g.into_iter().map(|v| v * r / len).collect();
            }
        },
    }
}

/// `n` points of `R^d`.
pub fn sample_points(spec: &SampleSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.n).map(|_| draw(&mut rng, spec.distribution, spec.d)).collect())
}

/// `n` ellipses whose two radii are drawn independently.
pub fn sample_ellipses(spec: &SampleSpec) -> Result<Vec<Ellipse>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.n)
        .map(|_| {
            let a = draw(&mut rng, spec.distribution, spec.d);
            let b = draw(&mut rng, spec.distribution, spec.d);
            Ellipse::new(a, b)
        })
        .collect()
}

/// An inclusion instance `E₀ ⊂ P?`; the JSON form is what `ee decide`
/// reads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default)]
    pub id: String,
    pub e0: Ellipse,
    pub p: EllipticPolytope,
}

/// Dataset A: `polytopes` polytopes of `n` Gaussian ellipses in dimension
/// `d`, each with `per_polytope` Gaussian test ellipses.
pub fn dataset_a(d: usize, n: usize, polytopes: usize, per_polytope: usize, seed: u64) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for k in 0..polytopes {
        let spec = SampleSpec {
            distribution: Distribution::Gaussian,
            d,
            n: n + per_polytope,
            seed: seed.wrapping_mul(1_000_003).wrapping_add(k as u64),
            object: SampleObject::Ellipses,
        };
        let mut es = sample_ellipses(&spec)?;
        let tests = es.split_off(n);
        let p = EllipticPolytope::new(es)?;
        for (j, e0) in tests.into_iter().enumerate() {
            out.push(Instance {
                id: format!("A-{d}-{n}-{seed}-{k}-{j}"),
                e0,
                p: p.clone(),
            });
        }
    }
    Ok(out)
}

/// Random family of `m` Gaussian `d×d` matrices whose best product up to
/// `depth` has a nonreal simple leading eigenvalue that is not tied.
pub fn random_complex_family(d: usize, m: usize, depth: usize, rng: &mut ChaCha8Rng) -> Result<MatrixFamily> {
    for _ in 0..1000 {
        let ms = (0..m)
            .map(|_| DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng)))
            .collect();
        let fam = MatrixFamily::new(ms)?;
        let ranked = smp_search(&fam, depth)?;
        if ranked.len() > 1 && ranked[1].1 >= ranked[0].1 * (1.0 - 1e-8) {
            continue;
        }
        let cand = SmpCandidate::from_word(&fam, &ranked[0].0)?;
        let (re, im) = cand.eigenvalue;
        if cand.simple && im.abs() > 1e-6 * re.hypot(im) {
            return Ok(fam);
        }
    }
    Err(Error::NoConvergence("no family with a complex leading eigenvalue in 1000 draws".into()))
}

/// Pairs met by the invariant polytope iteration on `family`: the first
/// `per_polytope` tested images for every intermediate polytope.
pub fn harvest(family: &MatrixFamily, max_iter: usize, per_polytope: usize, tag: &str) -> Result<Vec<Instance>> {
    let mut opts = JsrOptions::default();
    opts.iteration.harvest = true;
    opts.iteration.max_iter = max_iter;
    let report = jsr_invariant_polytope(family, &opts)?;
    let mut out = Vec::new();
    for (k, (p, images)) in report.harvested.into_iter().enumerate() {
        for (j, e0) in images.into_iter().take(per_polytope).enumerate() {
            out.push(Instance {
                id: format!("B-{tag}-{k}-{j}"),
                e0,
                p: p.clone(),
            });
        }
    }
    Ok(out)
}

/// Dataset B from `families` random pairs of `d×d` matrices. Families
/// whose iteration fails are skipped.
pub fn dataset_b(d: usize, families: usize, per_polytope: usize, seed: u64) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for f in 0..families {
        let fam = random_complex_family(d, 2, 4, &mut rng)?;
        match harvest(&fam, 20, per_polytope, &format!("{d}-{seed}-{f}")) {
            Ok(mut inst) => out.append(&mut inst),
            Err(e) => log::warn!("dataset B family {f} skipped: {e}"),
        }
    }
    Ok(out)
}

/// `p_k ∈ co{±p_j : j ≠ k}` by linear programming.
fn point_in_balanced_hull(x: &[f64], others: &[&Vec<f64>]) -> Result<bool> {
    let m = others.len();
    if m == 0 {
        return Ok(x.iter().all(|v| *v == 0.0));
    }
    // λ⁺, λ⁻ ≥ 0 with Σ (λ⁺ - λ⁻) p_j = x, minimizing Σ (λ⁺ + λ⁻)
    let mut lp = LinearProgram::new(vec![1.0; 2 * m]);
    for (i, xi) in x.iter().enumerate() {
        let row: Vec<(usize, f64)> = others
            .iter()
            .enumerate()
            .flat_map(|(j, p)| [(j, p[i]), (m + j, -p[i])])
            .filter(|(_, v)| *v != 0.0)
            .collect();
        lp.add_eq(&row, *xi);
    }
    for v in 0..2 * m {
        lp.set_bound(v, Bound::NONNEG);
    }
    let rep = backend::linear(&lp, 1e-9, "testing point membership")?;
    Ok(rep.status == ellipt_solvers::Status::Optimal && rep.primal_value <= 1.0 + 1e-9)
}

/// Indices of the points that are extreme in the balanced hull `co{±p}`.
pub fn extreme_points(points: &[Vec<f64>]) -> Result<Vec<usize>> {
    let mut alive = vec![true; points.len()];
    for k in 0..points.len() {
        let others: Vec<&Vec<f64>> = (0..points.len()).filter(|&j| j != k && alive[j]).map(|j| &points[j]).collect();
        if point_in_balanced_hull(&points[k], &others)? {
            alive[k] = false;
        }
    }
    Ok((0..points.len()).filter(|&k| alive[k]).collect())
}

/// Fraction of the members of `p` that survive redundancy removal.
pub fn vertex_fraction_of(p: &EllipticPolytope, method: Method, q: f64) -> Result<f64> {
    Ok(reduce_indices(p, method, q)?.len() as f64 / p.len() as f64)
}

/// Fraction of sampled points or ellipses that are vertices of their hull.
pub fn vertex_fraction(spec: &SampleSpec, method: Method, q: f64) -> Result<f64> {
    match spec.object {
        SampleObject::Points => {
            let pts = sample_points(spec)?;
            Ok(extreme_points(&pts)?.len() as f64 / pts.len() as f64)
        }
        SampleObject::Ellipses => vertex_fraction_of(&EllipticPolytope::new(sample_ellipses(spec)?)?, method, q),
    }
}

/// `t₀·‖E₀‖_P ∈ [½, 1]`, the factor actually achieved by the complex
/// polytope method, with the norm from the projection method at
/// [`TRUTH_Q`]. `None` when `E₀` is outside the span of `P`.
pub fn cpm_factor(e0: &Ellipse, p: &EllipticPolytope, closure: bool) -> Result<Option<f64>> {
    let (lo, hi) = ellipse_norm_lp(e0, p, TRUTH_Q)?;
    if !hi.is_finite() {
        return Ok(None);
    }
    let t0 = cpm_value_with(e0, p, closure)?.t0_max;
    Ok(Some(t0 * 0.5 * (lo + hi)))
}

/// Histogram of `values` over `[0, 1]` with `bins` equal bins; values
/// outside are clamped into the end bins.
pub fn factor_density(values: &[f64], bins: usize) -> Vec<usize> {
    let mut h = vec![0; bins.max(1)];
    for &v in values {
        let k = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(h.len() - 1);
        h[k] += 1;
    }
    h
}

/// Factors of all instances; instances where the truth oracle fails or
/// `E₀` leaves the span are dropped, and their number is returned.
pub fn factors(instances: &[Instance]) -> (Vec<f64>, usize) {
    let res: Vec<Option<f64>> = instances
        .par_iter()
        .map(|i| match cpm_factor(&i.e0, &i.p, true) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("{}: {e}", i.id);
                None
            }
        })
        .collect();
    let dropped = res.iter().filter(|v| v.is_none()).count();
    (res.into_iter().flatten().collect(), dropped)
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some(0.5 * (v[n / 2 - 1] + v[n / 2])),
    }
}

/// One timed decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub run_id: String,
    pub instance: String,
    pub d: usize,
    pub n_vertices: usize,
    pub method: String,
    pub q: f64,
    pub time_ms: f64,
    pub verdict: String,
    /// Certified factor of the verdict.
    pub value: f64,
}

/// Decides every instance with every method at factor `q`.
pub fn run_methods(run_id: &str, instances: &[Instance], methods: &[Method], q: f64) -> Vec<RunRecord> {
    let jobs: Vec<(&Instance, Method)> = instances
        .iter()
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();
    jobs.par_iter()
        .map(|&(inst, method)| {
            let start = Instant::now();
            let res = decide(&inst.e0, &inst.p, method, q);
            let time_ms = start.elapsed().as_secs_f64() * 1e3;
            let (verdict, value) = match res {
                Ok(v) => (
                    match v.outcome {
                        Outcome::Inside => "Inside",
                        Outcome::Outside => "Outside",
                        Outcome::QInside => "QInside",
                    }
                    .to_string(),
                    v.factor,
                ),
                Err(e) => (format!("error: {e}"), f64::NAN),
            };
            RunRecord {
                schema: SCHEMA_VERSION,
                run_id: run_id.to_string(),
                instance: inst.id.clone(),
                d: inst.p.dim(),
                n_vertices: inst.p.len(),
                method: format!("{method:?}").to_lowercase(),
                q,
                time_ms,
                verdict,
                value,
            }
        })
        .collect()
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Invalid(format!("writing CSV: {e}")))?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("writing CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(distribution: Distribution, d: usize, n: usize, seed: u64) -> SampleSpec {
        SampleSpec {
            distribution,
            d,
            n,
            seed,
            object: SampleObject::Ellipses,
        }
    }

    #[test]
    fn reproducible() {
        let s = spec(Distribution::Gaussian, 3, 12, 1);
        let a = sample_ellipses(&s).unwrap();
        assert_eq!(a.len(), 12);
        assert_eq!(a, sample_ellipses(&s).unwrap());
        assert_ne!(a, sample_ellipses(&SampleSpec { seed: 2, ..s }).unwrap());
        for dist in [Distribution::BallUniform, Distribution::CubeUniform] {
            for p in sample_points(&SampleSpec { distribution: dist, ..s }).unwrap() {
                let inf = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let two = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(if dist == Distribution::BallUniform { two <= 1.0 } else { inf <= 1.0 });
            }
        }
    }

    #[test]
    fn fractions() {
        let s = spec(Distribution::BallUniform, 2, 1, 5);
        assert_eq!(vertex_fraction(&s, Method::Exact, 0.99).unwrap(), 1.0);
        let p = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0), Ellipse::disc(2, 0.5)]).unwrap();
        assert_eq!(vertex_fraction_of(&p, Method::Exact, 0.99).unwrap(), 0.5);
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.4, 0.4], vec![-0.5, -0.6]];
        assert_eq!(extreme_points(&pts).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn histogram() {
        assert_eq!(factor_density(&[0.0, 0.55, 0.99, 1.0, 1.2], 4), vec![1, 0, 1, 3]);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    }

    #[test]
    fn vertex_ellipse_has_factor_one() {
        let p = EllipticPolytope::new(sample_ellipses(&spec(Distribution::Gaussian, 3, 5, 3)).unwrap()).unwrap();
        let f = cpm_factor(&p.ellipses()[2], &p, true).unwrap().unwrap();
        assert!((f - 1.0).abs() < 1e-3, "{f}");
    }

    #[test]
    fn csv_rows() {
        let inst = dataset_a(2, 3, 1, 2, 4).unwrap();
        assert_eq!(inst.len(), 2);
        let rows = run_methods("t", &inst, &[Method::Exact, Method::Cpm], 0.99);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("schema,run_id,instance,d,n_vertices,method,q,time_ms,verdict,value\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
