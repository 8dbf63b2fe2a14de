//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every reference value here is computed by test-side code (direction
//! sampling, direct support functions, Schur eigenvalues) rather than by
//! the routine under test.

use std::f64::consts::PI;
use std::time::Instant;

use ellipt::applications::{example_pair, jsr_invariant_polytope, lyapunov_single, JsrOptions};
use ellipt::cpm::{cpm_value, cpm_value_with};
use ellipt::cutting::{cut_decide_with, pe_norm_socp, DEFAULT_MAX_ITER};
use ellipt::exact::{decide_ee_2d, decide_ee_3d};
use ellipt::experiments::{dataset_a, factors, median};
use ellipt::hardness::{build_perturbed_lift, count_local_maxima};
use ellipt::projection::{build_norm_lp, ellipse_norm_lp, pe_norm_lp, polygon_factor, proj_decide_q};
use ellipt::{Ellipse, EllipticPolytope, Method, Outcome};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gauss(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn ellipse(rng: &mut ChaCha8Rng, d: usize) -> Ellipse {
    Ellipse::new(gauss(rng, d), gauss(rng, d)).unwrap()
}

fn polytope(rng: &mut ChaCha8Rng, d: usize, n: usize) -> EllipticPolytope {
    EllipticPolytope::new((0..n).map(|_| ellipse(rng, d)).collect()).unwrap()
}

fn dotp(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `h_E(x) = |(a·x, b·x)|`, written out here instead of calling the library.
fn h(e: &Ellipse, x: &[f64]) -> f64 {
    dotp(e.a(), x).hypot(dotp(e.b(), x))
}

fn h_poly(p: &EllipticPolytope, x: &[f64]) -> f64 {
    p.ellipses().iter().map(|e| h(e, x)).fold(0.0, f64::max)
}

/// Directions spread over the unit sphere (circle for `d = 2`).
fn directions(d: usize, k: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..k)
            .map(|i| {
                let t = PI * i as f64 / k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => unreachable!(),
    }
}

/// `max_x h_E0(x)/h_P(x)` over sampled directions, a lower bound on `‖E₀‖_P`.
fn sampled_ratio(e0: &Ellipse, p: &EllipticPolytope, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter().map(|x| h(e0, x) / h_poly(p, x)).fold(0.0, f64::max)
}

/// `A E / s` for the ellipse `E`.
fn image(m: &DMatrix<f64>, e: &Ellipse, s: f64) -> Ellipse {
    let d = e.dim();
    let a = m * nalgebra::DVector::from_column_slice(e.a()) / s;
    let b = m * nalgebra::DVector::from_column_slice(e.b()) / s;
    debug_assert_eq!(a.len(), d);
    Ellipse::new(a.as_slice().to_vec(), b.as_slice().to_vec()).unwrap()
}

fn shape(e: &Ellipse) -> DMatrix<f64> {
    let a = nalgebra::DVector::from_column_slice(e.a());
    let b = nalgebra::DVector::from_column_slice(e.b());
    &a * a.transpose() + &b * b.transpose()
}

/// Checks `A V ⊂ s(1 + slack) P` for every vertex `V` of `P`: the image is
/// either a vertex itself (same shape matrix) or `inside` accepts it.
fn reverify(
    fam: &[DMatrix<f64>],
    p: &EllipticPolytope,
    s: f64,
    slack: f64,
    inside: &dyn Fn(&Ellipse, &EllipticPolytope) -> Result<bool, String>,
) -> Result<(), String> {
    for (i, m) in fam.iter().enumerate() {
        for (k, e) in p.ellipses().iter().enumerate() {
            let c = image(m, e, s * (1.0 + slack));
            let sc = shape(&c);
            let scale = sc.norm().max(1e-300);
            let is_vertex = p.ellipses().iter().any(|v| (shape(v) * (1.0 + slack).powi(-2) - &sc).norm() <= 1e-8 * scale);
            if is_vertex || c.max_radius() < 1e-12 {
                continue;
            }
            if !inside(&c, p)? {
                return Err(format!("image of vertex {k} under matrix {i} is not certified inside"));
            }
        }
    }
    Ok(())
}

fn by_projection(c: &Ellipse, p: &EllipticPolytope) -> Result<bool, String> {
    Ok(proj_decide_q(c, p, 0.9999).map_err(|e| e.to_string())?.is_inside())
}

fn by_exact_3d(c: &Ellipse, p: &EllipticPolytope) -> Result<bool, String> {
    decide_ee_3d(c, p, 1e-12).map_err(|e| e.to_string())
}

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.clone().schur().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String, start: Instant) {
        if !ok {
            self.failed += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} {id}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
    }
}

fn closure_example(r: &mut Report) {
    let t = Instant::now();
    let e0 = Ellipse::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
    let p = EllipticPolytope::new(vec![Ellipse::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap()]).unwrap();
    let open = cpm_value_with(&e0, &p, false).unwrap().t0_max;
    let closed = cpm_value(&e0, &p).unwrap().t0_max;
    let secs = t.elapsed().as_secs_f64();
    let ok = open <= 1e-7 && (closed - 1.0).abs() <= 1e-6 && secs < 1.0;
    r.line("closure", ok, format!("t0 without closure {open:.2e}, with closure {closed:.9}, {secs:.3} s"), t);
}

fn cpm_half_factor(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut tested, mut worst, mut bad, mut errors) = (0, f64::INFINITY, 0, 0);
    let mut attempts = 0;
    while tested < 500 && attempts < 5000 {
        attempts += 1;
        let d = if rng.random::<bool>() { 2 } else { 3 };
        let n = rng.random_range(1..=5);
        let p = polytope(&mut rng, d, n);
        let e0 = ellipse(&mut rng, d);
        let ratio = sampled_ratio(&e0, &p, &directions(d, 2000));
        if !ratio.is_finite() || ratio == 0.0 {
            continue;
        }
        let e0 = e0.scaled(rng.random_range(0.3..1.0) / ratio);
        let inside = if d == 2 { decide_ee_2d(&e0, &p) } else { decide_ee_3d(&e0, &p, 1e-12) };
        if !inside.unwrap() {
            continue;
        }
        tested += 1;
        let t0 = match cpm_value(&e0, &p) {
            Ok(res) => res.t0_max,
            Err(e) => {
                eprintln!("{e}: {e0:?} {p:?}");
                errors += 1;
                continue;
            }
        };
        worst = worst.min(t0);
        if t0 < 0.5 - 1e-6 {
            bad += 1;
        }
    }
    r.line(
        "cpm-half",
        tested == 500 && bad == 0 && errors == 0,
        format!("{tested} inside instances, min t0 = {worst:.6}, {bad} below 1/2 - 1e-6, {errors} solver failures"),
        t,
    );
}

fn lp_socp_bracket(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = Vec::new();
    let mut worst_ratio = f64::INFINITY;
    for k in 0..200 {
        let d: usize = rng.random_range(2..=10);
        let n_ell = rng.random_range(d.div_ceil(2) + 1..=50);
        let level = rng.random_range(3..=8u32);
        let p = polytope(&mut rng, d, n_ell);
        let w = gauss(&mut rng, d);
        let lp = pe_norm_lp(&w, &p, level).unwrap().hi;
        let socp = pe_norm_socp(&w, &p).unwrap().mid();
        worst_ratio = worst_ratio.min(socp / lp / (PI / 2f64.powi(level as i32)).cos());
        let lo = lp * (PI / 2f64.powi(level as i32)).cos() - 1e-6;
        if !(socp >= lo && socp <= lp + 1e-6) {
            bad.push(format!("#{k} d={d} N={n_ell} n={level}: socp {socp} lp {lp}"));
        }
    }
    r.line(
        "lp-socp",
        bad.is_empty(),
        format!("200 instances, min socp/(r cos) = {worst_ratio:.6}; {}", summary(&bad)),
        t,
    );
}

fn summary(bad: &[String]) -> String {
    match bad.first() {
        None => "no violations".into(),
        Some(b) => format!("{} violations, first {b}", bad.len()),
    }
}

fn factor_table(r: &mut Report) {
    let t = Instant::now();
    // four decimals, truncated
    let table = [0.9238, 0.9807, 0.9951, 0.9987, 0.9996, 0.9999];
    let mut ok = true;
    let mut got = Vec::new();
    for (i, n) in (3..=8u32).enumerate() {
        let v = polygon_factor(n);
        let direct = (PI / 2f64.powi(n as i32)).cos();
        ok &= (v - direct).abs() < 1e-15 && ((v * 1e4).floor() - table[i] * 1e4).abs() < 1e-6;
        got.push(format!("{v:.6}"));
    }
    r.line("factors", ok, format!("cos(pi/2^n), n = 3..8: {}", got.join(" ")), t);
}

fn exact_agreement(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dirs2 = directions(2, 100_000);
    let (mut compared, mut bad) = (0, Vec::new());
    for k in 0..1000 {
        let n = rng.random_range(1..=6);
        let p = polytope(&mut rng, 2, n);
        let e0 = ellipse(&mut rng, 2);
        let ratio = sampled_ratio(&e0, &p, &dirs2[..2000]);
        let e0 = e0.scaled(rng.random_range(0.8..1.2) / ratio);
        let margin = dirs2.iter().map(|x| h(&e0, x) - h_poly(&p, x)).fold(f64::NEG_INFINITY, f64::max);
        if margin.abs() < 1e-6 {
            continue;
        }
        compared += 1;
        let got = decide_ee_2d(&e0, &p).unwrap();
        if got != (margin < 0.0) {
            bad.push(format!("#{k}: exact {got}, oracle margin {margin:.3e}"));
        }
    }
    let ok2 = bad.is_empty() && compared >= 900;
    let detail2 = format!("d=2: {compared} compared with 1e5 directions, {}", summary(&bad));

    let dirs3 = directions(3, 4000);
    let (mut compared3, mut bad3) = (0, Vec::new());
    for k in 0..200 {
        let n = rng.random_range(1..=5);
        let p = polytope(&mut rng, 3, n);
        let e0 = ellipse(&mut rng, 3);
        let ratio = sampled_ratio(&e0, &p, &dirs3);
        let e0 = e0.scaled(rng.random_range(0.7..1.3) / ratio);
        let (lo, hi) = ellipse_norm_lp(&e0, &p, 0.9999).unwrap();
        let truth = if hi < 1.0 - 1e-4 {
            true
        } else if lo > 1.0 + 1e-4 {
            false
        } else {
            continue;
        };
        let proj = proj_decide_q(&e0, &p, 0.9999).unwrap();
        compared3 += 1;
        let got = decide_ee_3d(&e0, &p, 1e-12).unwrap();
        let proj_inside = match proj.outcome {
            Outcome::Inside => true,
            Outcome::Outside => false,
            Outcome::QInside => truth,
        };
        if got != truth || proj_inside != truth {
            bad3.push(format!("#{k}: exact {got}, projection {:?}, norm in [{lo:.6}, {hi:.6}]", proj.outcome));
        }
    }
    let ok3 = bad3.is_empty() && compared3 >= 150;
    r.line(
        "exact",
        ok2 && ok3,
        format!("{detail2}; d=3: {compared3} compared with projection at 0.9999, {}", summary(&bad3)),
        t,
    );
}

fn cutting_monotone(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut outside, mut bad) = (0, Vec::new());
    for k in 0..300 {
        let d = rng.random_range(2..=6);
        let n = rng.random_range(2..=8);
        let p = polytope(&mut rng, d, n);
        let e0 = ellipse(&mut rng, d);
        let socp = |w: &[f64]| pe_norm_socp(w, &p);
        let (lo, _) = ellipse_norm_lp(&e0, &p, 0.99).unwrap();
        let e0 = e0.scaled(rng.random_range(0.8..1.2) / lo);
        let (v, trace) = cut_decide_with(&e0, &p, 0.995, DEFAULT_MAX_ITER, Method::Cutting, &socp).unwrap();
        if !trace.is_monotone(1e-9) {
            bad.push(format!("#{k}: nu not monotone {:?}", trace.nu));
        }
        if let Some(x) = v.direction() {
            outside += 1;
            let m = h(&e0, x) - h_poly(&p, x);
            if !(m > 0.0) {
                bad.push(format!("#{k}: direction does not separate (margin {m:.3e})"));
            }
        } else if v.is_outside() {
            bad.push(format!("#{k}: Outside without a direction"));
        }
    }
    r.line(
        "cutting",
        bad.is_empty(),
        format!("300 runs, {outside} Outside directions re-verified; {}", summary(&bad)),
        t,
    );
}

const SAMPLES_PER_EDGE: usize = 64;

fn hardness(r: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 2..=6u32 {
        let lift = build_perturbed_lift(n, 1e-2, n as u64).unwrap();
        let (count, distinct) = count_local_maxima(&lift);
        // independent count: strict local maxima of |x|² along the boundary
        // sampled densely on every edge
        let poly = &lift.polygon;
        let m = poly.len();
        let mut trail = Vec::new();
        for i in 0..m {
            let (u, v) = (poly[i], poly[(i + 1) % m]);
            for k in 0..SAMPLES_PER_EDGE {
                let s = k as f64 / SAMPLES_PER_EDGE as f64;
                let x = [u[0] + s * (v[0] - u[0]), u[1] + s * (v[1] - u[1])];
                trail.push(x[0] * x[0] + x[1] * x[1]);
            }
        }
        let len = trail.len();
        let mut peaks: Vec<f64> = (0..len)
            .filter(|&i| trail[i] > trail[(i + 1) % len] && trail[i] > trail[(i + len - 1) % len])
            .map(|i| trail[i])
            .collect();
        peaks.sort_by(f64::total_cmp);
        let distinct_oracle = 1 + peaks.windows(2).filter(|w| w[1] - w[0] > 1e-12 * w[1].max(1.0)).count();
        let facets = lift.hrep.facet_count().unwrap();
        let want = 1usize << n;
        let good = count == want
            && distinct.len() == want
            && peaks.len() == want
            && distinct_oracle == want
            && facets <= 2 * n as usize + 3;
        ok &= good;
        parts.push(format!("n={n}: {count} maxima, {} distinct, {facets} facets", distinct.len()));
    }
    r.line("hardness", ok, parts.join("; "), t);
}

fn jsr_example_pair(r: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, beta) in [(0.3, -0.4), (0.5, 0.1)] {
        let fam = example_pair(alpha, beta).unwrap();
        let rep = jsr_invariant_polytope(&fam, &JsrOptions::default()).unwrap();
        let word = rep.smp.as_ref().map(|s| s.word.clone()).unwrap_or_default();
        let cyclic = word == [0, 1] || word == [1, 0];
        // the product T0T1 has a pair of eigenvalues on the unit circle
        let prod = fam.matrices()[1].clone() * &fam.matrices()[0];
        let rho = spectral_radius(&prod).sqrt();
        let mut detail = format!("({alpha}, {beta}): lambda = {:.12}, word {word:?}, rho(T1T0)^(1/2) = {rho:.12}", rep.lambda);
        let mut good = (rep.lambda - 1.0).abs() <= 1e-8 && cyclic && (rho - 1.0).abs() <= 1e-8;
        match &rep.certificate {
            Some(c) if c.valid => {
                let again = c.verify(&fam, 1e-6).unwrap();
                let check = reverify(fam.matrices(), &c.polytope, rep.lambda, 1e-6, &by_exact_3d);
                detail += &format!(", {} vertices, recheck {again}, exact {}", c.polytope.len(), check.is_ok());
                if let Err(e) = &check {
                    detail += &format!(" ({e})");
                }
                good &= again && check.is_ok();
            }
            _ => {
                detail += &format!(", no certificate: {:?}", rep.diagnosis);
                good = false;
            }
        }
        ok &= good;
        parts.push(detail);
    }
    r.line("jsr", ok, parts.join("; "), t);
}

fn lyapunov(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut done, mut bad, mut most) = (0, Vec::new(), 0);
    while done < 50 {
        let d = 2 + done % 7;
        let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut eig = a.clone().schur().complex_eigenvalues().as_slice().to_vec();
        eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        let rho = eig[0].norm();
        // leading pair nonreal and strictly dominant
        if eig[0].im.abs() < 1e-6 * rho || (d > 2 && eig[2].norm() > rho * (1.0 - 1e-6)) {
            continue;
        }
        done += 1;
        let cert = match lyapunov_single(&a, 1e-6, 200) {
            Ok(c) => c,
            Err(e) => {
                bad.push(format!("d={d}: {e}"));
                continue;
            }
        };
        most = most.max(cert.iterations);
        if !cert.valid || cert.iterations > 200 {
            bad.push(format!("d={d}: valid {}, {} iterations", cert.valid, cert.iterations));
            continue;
        }
        if (cert.lambda - rho).abs() > 1e-9 * rho {
            bad.push(format!("d={d}: lambda {} vs Schur {rho}", cert.lambda));
            continue;
        }
        if let Err(e) = reverify(std::slice::from_ref(&a), &cert.polytope, rho, 1e-6, &by_projection) {
            bad.push(format!("d={d}: {e}"));
        }
    }
    r.line(
        "lyapunov",
        bad.is_empty(),
        format!("50 matrices d=2..8, at most {most} iterations; {}", summary(&bad)),
        t,
    );
}

fn dataset_median(r: &mut Report) {
    let t = Instant::now();
    let mut values = Vec::new();
    let mut dropped = 0;
    for d in 3..=8 {
        let inst = dataset_a(d, 10, 2, 6, 42).unwrap();
        let (f, k) = factors(&inst);
        values.extend(f);
        dropped += k;
    }
    let med = median(&values).unwrap_or(0.0);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = 0.5f64.sqrt() - 0.03;
    r.line(
        "dataset-a",
        med >= bound && !values.is_empty(),
        format!("{} factors ({dropped} dropped), median {med:.4} (bound {bound:.4}), min {min:.4}", values.len()),
        t,
    );
}

fn lp_sizes(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = Vec::new();
    for _ in 0..20 {
        let d = rng.random_range(2..=10);
        let n_ell = rng.random_range(1..=30);
        let level = rng.random_range(2..=10u32);
        let p = polytope(&mut rng, d, n_ell);
        let w = gauss(&mut rng, d);
        let lp = build_norm_lp(&w, &p, level).unwrap();
        let (n, bn) = (level as usize, n_ell);
        let vars = (2 * n + 3) * bn;
        let cons = (3 * n + 4) * bn + d + 1;
        let nnz_bound = (12 * n + 2 * d + 7) * bn + d;
        let nnz = lp.nnz() + lp.b_eq.iter().filter(|v| **v != 0.0).count();
        if lp.num_vars() != vars || lp.num_constraints() + 1 != cons || nnz > nnz_bound {
            bad.push(format!(
                "d={d} N={n_ell} n={level}: vars {} (want {vars}), rows+1 {} (want {cons}), nnz {nnz} (bound {nnz_bound})",
                lp.num_vars(),
                lp.num_constraints() + 1
            ));
        }
    }
    r.line("lp-size", bad.is_empty(), format!("20 shapes; {}", summary(&bad)), t);
}

fn main() {
    let criteria: [(&str, fn(&mut Report)); 11] = [
        ("closure", closure_example),
        ("cpm-half", cpm_half_factor),
        ("lp-socp", lp_socp_bracket),
        ("factors", factor_table),
        ("exact", exact_agreement),
        ("cutting", cutting_monotone),
        ("hardness", hardness),
        ("jsr", jsr_example_pair),
        ("lyapunov", lyapunov),
        ("dataset-a", dataset_median),
        ("lp-size", lp_sizes),
    ];
    // optional filter: `cargo test --test acceptance -- jsr hardness`
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut r = Report { failed: 0 };
    let mut ran = 0;
    for (id, run) in criteria {
        if only.is_empty() || only.iter().any(|o| o == id) {
            run(&mut r);
            ran += 1;
        }
    }
    println!("{} of {ran} criteria failed", r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
