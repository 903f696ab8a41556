use meterlink_core::field::{chunk_count, chunk_rng, chunk_successes, far_field_mean, Estimate};
use meterlink_core::{
    empirical_psuc, sample_field, sir, success_probability, FarField, LinkParams, SimConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reference() -> LinkParams {
    LinkParams::new(0.25, 4.0, 1.0, 1.0, 1.0).unwrap()
}

#[test]
fn sparse_field_is_almost_always_empty() {
    let p = LinkParams::new(1e-9, 4.0, 1.0, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(10.0, 1, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let empty = (0..10_000)
        .filter(|_| sample_field(&p, &cfg, &mut rng).interferers.is_empty())
        .count();
    assert!(empty >= 9_990);
}

#[test]
fn interferer_count_has_poisson_mean() {
    let p = reference();
    let cfg = SimConfig::new(20.0, 1, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 10_000;
    let mean = 0.25 * std::f64::consts::PI * 400.0;
    let total: usize = (0..draws)
        .map(|_| sample_field(&p, &cfg, &mut rng).interferers.len())
        .sum();
    let avg = total as f64 / draws as f64;
    assert!((avg - mean).abs() < 3.0 * (mean / draws as f64).sqrt(), "{avg} vs {mean}");
}

#[test]
fn field_distances_and_gains() {
    let p = reference();
    let cfg = SimConfig::new(20.0, 1, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut n = 0usize;
    let (mut inner, mut gain_sum) = (0usize, 0.0);
    for _ in 0..200 {
        for i in sample_field(&p, &cfg, &mut rng).interferers {
            assert!(i.distance > 0.0 && i.distance <= 20.0);
            assert!(i.gain >= 0.0);
            inner += (i.distance <= 10.0) as usize;
            gain_sum += i.gain;
            n += 1;
        }
    }
    // uniform on the disk: a quarter of the points fall inside half the radius
    let frac = inner as f64 / n as f64;
    assert!((frac - 0.25).abs() < 3.0 * (0.25 * 0.75 / n as f64).sqrt());
    assert!((gain_sum / n as f64 - 1.0).abs() < 3.0 / (n as f64).sqrt());
}

#[test]
fn same_seed_same_fields() {
    let p = reference();
    let cfg = SimConfig::new(15.0, 1, 0);
    let mut a = ChaCha8Rng::seed_from_u64(42);
    let mut b = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        assert_eq!(sample_field(&p, &cfg, &mut a), sample_field(&p, &cfg, &mut b));
    }
}

#[test]
fn reference_cell_matches_closed_form() {
    let p = reference();
    let cfg = SimConfig::new(40.0, 100_000, 2024);
    let e = empirical_psuc(&p, 1.0, &cfg).unwrap();
    let analytic = success_probability(&p, 1.0);
    assert!((analytic - 0.2912).abs() < 1e-4);
    assert!((e.estimate - analytic).abs() < 3.0 * e.stderr, "{e:?} vs {analytic}");
}

#[test]
fn materialized_fields_agree_with_streaming_estimator() {
    // both sample the same truncated field; compare two independent estimates
    let p = LinkParams::new(0.1, 3.5, 1.0, 1.0, 1.0).unwrap();
    let beta = 0.5;
    let cfg = SimConfig::new(15.0, 40_000, 5).with_far_field(FarField::Truncated);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let hits = (0..cfg.samples)
        .filter(|_| sir(&p, &sample_field(&p, &cfg, &mut rng)).exceeds(beta))
        .count() as u64;
    let materialized = Estimate::from_counts(hits, cfg.samples);
    let streamed = empirical_psuc(&p, beta, &cfg).unwrap();
    let sigma = (materialized.stderr.powi(2) + streamed.stderr.powi(2)).sqrt();
    assert!((materialized.estimate - streamed.estimate).abs() < 3.0 * sigma);
}

#[test]
fn estimates_are_bit_reproducible() {
    let p = reference();
    let cfg = SimConfig::new(40.0, 30_000, 77);
    let a = empirical_psuc(&p, 1.0, &cfg).unwrap();
    let b = empirical_psuc(&p, 1.0, &cfg).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a, b);
    let other = empirical_psuc(&p, 1.0, &SimConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(a.successes, other.successes);
}

#[test]
fn chunk_order_does_not_matter() {
    let p = reference();
    let cfg = SimConfig::new(40.0, 50_000, 13);
    let chunks = chunk_count(cfg.samples);
    let forward: u64 = (0..chunks).map(|c| chunk_successes(&p, 1.0, &cfg, c)).sum();
    let backward: u64 = (0..chunks).rev().map(|c| chunk_successes(&p, 1.0, &cfg, c)).sum();
    assert_eq!(forward, backward);
    assert_eq!(forward, empirical_psuc(&p, 1.0, &cfg).unwrap().successes);
    // streams differ between chunks
    let mut a = chunk_rng(13, 0);
    let mut b = chunk_rng(13, 1);
    assert_ne!(rand::Rng::random::<u64>(&mut a), rand::Rng::random::<u64>(&mut b));
}

#[test]
fn truncation_only_overestimates_success() {
    let p = LinkParams::new(0.25, 3.0, 1.0, 1.0, 1.0).unwrap();
    let beta = 1.0;
    let small = SimConfig::new(20.0, 100_000, 8).with_far_field(FarField::Truncated);
    let large = SimConfig { window_radius: 40.0, ..small };
    let a = empirical_psuc(&p, beta, &small).unwrap();
    let b = empirical_psuc(&p, beta, &large).unwrap();
    assert!(a.estimate >= b.estimate - 3.0 * b.stderr);
    let analytic = success_probability(&p, beta);
    assert!(a.estimate > analytic);
}

#[test]
fn doubling_a_converged_radius_changes_little() {
    let p = reference();
    let beta = 1.0;
    let r = SimConfig::default_radius(&p, beta);
    let a = empirical_psuc(&p, beta, &SimConfig::new(r, 100_000, 21)).unwrap();
    let b = empirical_psuc(&p, beta, &SimConfig::new(2.0 * r, 100_000, 22)).unwrap();
    assert!((a.estimate - b.estimate).abs() < 3.0 * a.stderr.max(b.stderr));
}

#[test]
fn far_field_mean_matches_numeric_integral() {
    // 2 pi lambda int_R^inf r^(1 - alpha) dr by the midpoint rule on u = 1/r
    let p = LinkParams::new(0.3, 3.5, 1.0, 1.0, 1.0).unwrap();
    let radius = 25.0;
    let n = 200_000;
    let h = (1.0 / radius) / n as f64;
    let integral: f64 = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) * h;
            // r = 1/u, dr = du / u^2
            (1.0 / u).powf(1.0 - 3.5) / (u * u) * h
        })
        .sum();
    let numeric = 2.0 * std::f64::consts::PI * 0.3 * integral;
    assert!((far_field_mean(&p, radius) / numeric - 1.0).abs() < 1e-6);
}
