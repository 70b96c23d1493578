use pvarsde::drivers::{empirical_pvar_profile, sample_fbm, stream_rng, DriverError, FbmMethod, FbmSampler, FbmSpec};
use pvarsde::stats::{ks_two_sample, mean};

fn spec(hurst: f64, steps: usize) -> FbmSpec {
    FbmSpec { hurst, horizon: 1.0, steps, seed: 99 }
}

/// Exact `E|B_t - B_s|^2 = |t - s|^{2H}`, checked against the sample mean.
#[test]
fn increment_second_moments() {
    for h in [0.6, 0.75, 0.9] {
        let sampler = FbmSampler::new(spec(h, 512), FbmMethod::Circulant).unwrap();
        let paths: Vec<_> = (0..400).map(|i| sampler.sample(&mut stream_rng(5, i))).collect();
        for (s, t) in [(0.0, 1.0), (0.25, 0.5), (0.5, 0.5 + 1.0 / 64.0)] {
            let sq: Vec<f64> = paths.iter().map(|b| (b.eval(t).unwrap()[0] - b.eval(s).unwrap()[0]).powi(2)).collect();
            let want = (t - s).powf(2.0 * h);
            let got = mean(&sq);
            assert!((got / want - 1.0).abs() < 0.2, "H {h} lag {}: {got} vs {want}", t - s);
        }
    }
}

/// `E[B_1 B_{1/2}] = (1 + 0.5^{2H} - 0.5^{2H}) / 2 = 0.5` for every `H`.
#[test]
fn cross_moment_at_half() {
    for h in [0.6, 0.9] {
        let sampler = FbmSampler::new(spec(h, 256), FbmMethod::Circulant).unwrap();
        let prods: Vec<f64> = (0..2000)
            .map(|i| {
                let b = sampler.sample(&mut stream_rng(8, i));
                b.last()[0] * b.eval(0.5).unwrap()[0]
            })
            .collect();
        assert!((mean(&prods) / 0.5 - 1.0).abs() < 0.15, "H {h}: {}", mean(&prods));
    }
}

#[test]
fn circulant_and_cholesky_agree_in_law() {
    let s = spec(0.7, 256);
    let circ = FbmSampler::new(s, FbmMethod::Circulant).unwrap();
    let chol = FbmSampler::new(s, FbmMethod::Cholesky).unwrap();
    assert_eq!(circ.method(), FbmMethod::Circulant);
    let a: Vec<f64> = (0..500).map(|i| circ.sample(&mut stream_rng(1, i)).last()[0]).collect();
    let b: Vec<f64> = (0..500).map(|i| chol.sample(&mut stream_rng(2, i)).last()[0]).collect();
    assert!(ks_two_sample(&a, &b).p_value > 0.01);
}

#[test]
fn seeded_paths_are_reproducible_and_distinct() {
    let s = spec(0.8, 128);
    assert_eq!(sample_fbm(&s, 3).unwrap(), sample_fbm(&s, 3).unwrap());
    assert_ne!(sample_fbm(&s, 3).unwrap(), sample_fbm(&s, 4).unwrap());
    assert_eq!(sample_fbm(&s, 0).unwrap().first(), &[0.0]);
}

#[test]
fn hurst_out_of_range() {
    for h in [0.4, 0.5, 1.0] {
        assert!(matches!(FbmSampler::new(spec(h, 16), FbmMethod::Circulant), Err(DriverError::InvalidHurst(_))));
    }
}

#[test]
fn variation_profile_regimes() {
    let levels: Vec<u32> = (4..=10).collect();
    let sampler = FbmSampler::new(spec(0.75, 1024), FbmMethod::Circulant).unwrap();
    for seed in 0..5 {
        let b = sampler.sample(&mut stream_rng(seed, 0));
        let rough = empirical_pvar_profile(&b, 1.0, &levels).unwrap();
        assert!(rough.windows(2).all(|w| w[1] > w[0]));
        assert!(rough[rough.len() - 1] / rough[rough.len() - 2] > 1.1);
        let fine = empirical_pvar_profile(&b, 2.0, &levels).unwrap();
        assert!(fine[fine.len() - 1] / fine[fine.len() - 2] < 1.1);
    }
}
