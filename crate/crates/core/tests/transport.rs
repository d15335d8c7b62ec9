use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vipsim_core::physics::exact_escape_fraction;
use vipsim_core::transport::{simulate_escape, simulate_scatter_count};
use vipsim_core::{McConfig, StripGeometry};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn escape_matches_closed_form_at_ten_absorption_lengths() {
    let strip = StripGeometry::new(10.0, 1.0, 1.0).unwrap();
    let est = simulate_escape(&strip, 1.0, &McConfig::new(1_000_000, 11, 10_000).unwrap()).unwrap();
    let exact = 0.1 * (1.0 - (-10.0f64).exp());
    assert!((est.mean - exact).abs() <= 3.0 * est.std_error, "{est:?}");
}

#[test]
fn scatter_count_at_ten_free_paths() {
    let strip = StripGeometry::new(1.0, 10.0, 1.0).unwrap();
    let est = simulate_scatter_count(&strip, &McConfig::new(1_000_000, 12, 10_000).unwrap());
    assert!((est.mean - 10.0).abs() <= 3.0 * est.std_error, "{est:?}");
}

#[test]
fn random_geometries_agree_with_closed_forms() {
    let mut pick = ChaCha8Rng::seed_from_u64(2024);
    let mc_seed_base = 500;
    for case in 0..50u64 {
        let z = 10f64.powf(pick.random_range(-3.0..1.0));
        let lambda = 10f64.powf(pick.random_range(-3.0..1.0));
        let strip = StripGeometry::new(z, 1.0, 1.0).unwrap();
        let mc = McConfig::new(20_000, mc_seed_base + case, 4096).unwrap();
        let est = simulate_escape(&strip, lambda, &mc).unwrap();
        let exact = exact_escape_fraction(&strip, lambda).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.std_error + 1e-12,
            "case {case}: z={z} λ={lambda} {est:?} vs {exact}"
        );

        let d = pick.random_range(0.1..20.0);
        let mu = pick.random_range(0.5..5.0);
        let strip = StripGeometry::new(1.0, d, mu).unwrap();
        let est = simulate_scatter_count(&strip, &mc);
        assert!(
            (est.mean - d / mu).abs() <= 3.0 * est.std_error,
            "case {case}: D={d} μ={mu} {est:?}"
        );
    }
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let strip = StripGeometry::new(3.0, 1.0, 1.0).unwrap();
    let small = simulate_escape(&strip, 1.0, &McConfig::new(2_000, 5, 512).unwrap()).unwrap();
    let large = simulate_escape(&strip, 1.0, &McConfig::new(200_000, 5, 512).unwrap()).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((ratio / 10.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let strip = StripGeometry::new(2.0, 7.0, 1.0).unwrap();
    let mc = McConfig::new(300_001, 99, 1000).unwrap();
    let run = || {
        (
            simulate_escape(&strip, 0.7, &mc).unwrap(),
            simulate_scatter_count(&strip, &mc),
        )
    };
    let one = in_pool(1, run);
    let many = in_pool(8, run);
    assert_eq!(one.0.mean.to_bits(), many.0.mean.to_bits());
    assert_eq!(one.0.std_error.to_bits(), many.0.std_error.to_bits());
    assert_eq!(one.1.mean.to_bits(), many.1.mean.to_bits());
    assert_eq!(one, in_pool(3, run));
}

#[test]
fn different_chunking_changes_streams_not_statistics() {
    let strip = StripGeometry::new(2.0, 1.0, 1.0).unwrap();
    let a = simulate_escape(&strip, 1.0, &McConfig::new(100_000, 1, 1000).unwrap()).unwrap();
    let b = simulate_escape(&strip, 1.0, &McConfig::new(100_000, 1, 777).unwrap()).unwrap();
    assert_ne!(a.mean, b.mean);
    let tol = 4.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < tol);
}
