use ellipt::applications::{
    example_pair, image_bound, jsr_invariant_polytope, lyapunov_single, smp_search, JsrOptions, MatrixFamily,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.clone().schur().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random matrix whose leading eigenvalues are a strictly dominant
/// nonreal pair.
fn complex_leading(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut eig = a.clone().schur().complex_eigenvalues().as_slice().to_vec();
        eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        if eig[0].im.abs() > 1e-3 * eig[0].norm() && (d == 2 || eig[2].norm() < 0.95 * eig[0].norm()) {
            return a;
        }
    }
}

fn orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

#[test]
fn jsr_is_scale_equivariant() {
    let fam = example_pair(0.3, -0.4).unwrap();
    for c in [0.25, 3.0] {
        let r = jsr_invariant_polytope(&fam.scaled(c), &JsrOptions::default()).unwrap();
        assert!(r.is_exact(), "{:?}", r.diagnosis);
        assert!((r.lambda - c).abs() < 1e-9 * c);
        assert_eq!(r.smp.unwrap().word, vec![0, 1]);
    }
}

#[test]
fn relabelling_the_family_keeps_the_value() {
    let fam = example_pair(0.5, 0.1).unwrap();
    let swapped = MatrixFamily::new(vec![fam.matrices()[1].clone(), fam.matrices()[0].clone()]).unwrap();
    let a = jsr_invariant_polytope(&fam, &JsrOptions::default()).unwrap();
    let b = jsr_invariant_polytope(&swapped, &JsrOptions::default()).unwrap();
    assert!(a.is_exact() && b.is_exact());
    assert!((a.lambda - b.lambda).abs() < 1e-12);
    // ρ(T₀T₁) from Schur directly
    let p = &fam.matrices()[1] * &fam.matrices()[0];
    assert!((spectral_radius(&p).sqrt() - a.lambda).abs() < 1e-12);
}

#[test]
fn smp_search_values_match_direct_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fam = MatrixFamily::new((0..2).map(|_| complex_leading(&mut rng, 3)).collect()).unwrap();
    for (word, lam) in smp_search(&fam, 4).unwrap() {
        // first letter acts first
        let mut prod = DMatrix::identity(3, 3);
        for &i in &word {
            prod = &fam.matrices()[i] * prod;
        }
        let want = spectral_radius(&prod).powf(1.0 / word.len() as f64);
        assert!((lam - want).abs() < 1e-10 * (1.0 + want), "{word:?}");
    }
}

#[test]
fn lyapunov_is_invariant_under_orthogonal_change_of_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in [2, 3, 4] {
        let a = complex_leading(&mut rng, d);
        let q = orthogonal(&mut rng, d);
        let b = q.transpose() * &a * &q;
        let ca = lyapunov_single(&a, 1e-6, 200).unwrap();
        let cb = lyapunov_single(&b, 1e-6, 200).unwrap();
        assert!(ca.valid && cb.valid);
        assert!((ca.lambda - cb.lambda).abs() < 1e-9 * ca.lambda);
        assert!((ca.lambda - spectral_radius(&a)).abs() < 1e-9 * ca.lambda);
        // A P ⊂ ρ(1 + tol) P, checked vertex by vertex
        let fam = MatrixFamily::new(vec![a.clone()]).unwrap();
        assert!(ca.verify(&fam, 1e-6).unwrap());
        for e in ca.polytope.ellipses() {
            let img = ellipt::applications::image(&(&a / ca.lambda), e);
            assert!(image_bound(&img, &ca.polytope, 1e-6).unwrap() <= 1.0 + 1e-6);
        }
    }
}

#[test]
fn lyapunov_scales_with_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = complex_leading(&mut rng, 3);
    let base = lyapunov_single(&a, 1e-6, 200).unwrap();
    let scaled = lyapunov_single(&(&a * 4.0), 1e-6, 200).unwrap();
    assert!(base.valid && scaled.valid);
    assert!((scaled.lambda - 4.0 * base.lambda).abs() < 1e-9 * scaled.lambda);
    assert_eq!(base.polytope.len(), scaled.polytope.len());
}

#[test]
fn family_json_round_trip() {
    let fam = example_pair(0.3, -0.4).unwrap();
    let s = serde_json::to_string(&fam).unwrap();
    let back: MatrixFamily = serde_json::from_str(&s).unwrap();
    assert_eq!(back.len(), fam.len());
    for (a, b) in back.matrices().iter().zip(fam.matrices()) {
        assert!((a - b).amax() <= 1e-15);
    }
}
