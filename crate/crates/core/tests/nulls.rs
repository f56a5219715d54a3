use ecomplex_core::capability::{derive_matrix, sample_world, ModelParams};
use ecomplex_core::nulls::{null_comparison, NullLevel, NullModelSpec};
use ecomplex_core::BipartiteMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frozen behaviour on a default-parameter capability world: the three
/// partially constrained nulls put the observed correlation far in the lower
/// tail, while preserving both degree sequences reproduces it.
#[test]
fn capability_world_against_each_null_level() {
    let m = derive_matrix(&sample_world(ModelParams::default(), 1).unwrap());
    for level in NullLevel::ALL {
        let c = null_comparison(&m, &NullModelSpec::new(level, 100, 5)).unwrap();
        assert!((c.observed - -0.9543).abs() < 5e-4, "{}", c.observed);
        assert_eq!(c.degenerate_samples, 0);
        let p = c.p_value.unwrap();
        let mean = c.null_mean.unwrap();
        match level {
            NullLevel::DensityOnly => {
                assert!(p == 0.0 && mean > -0.2, "{level}: p {p} mean {mean}")
            }
            NullLevel::PreserveCountryDegrees => {
                assert!(p == 0.0 && mean > -0.45, "{level}: p {p} mean {mean}")
            }
            NullLevel::PreserveProductDegrees => {
                assert!(p == 0.0 && mean > -0.7, "{level}: p {p} mean {mean}")
            }
            NullLevel::PreserveBoth => {
                assert!((0.1..=0.9).contains(&p), "{level}: p {p}");
                assert!((mean - c.observed).abs() < 0.02, "{level}: mean {mean}");
                assert!(!c.no_rewiring_possible);
            }
        }
    }
}

/// A matrix drawn from the density-only null itself should give roughly
/// uniform p-values.
#[test]
fn density_only_p_values_are_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut ps = Vec::new();
    while ps.len() < 60 {
        let dense: Vec<Vec<bool>> = (0..20)
            .map(|_| (0..30).map(|_| rng.random_bool(0.3)).collect())
            .collect();
        let m = BipartiteMatrix::from_dense(&dense).unwrap();
        let spec = NullModelSpec::new(NullLevel::DensityOnly, 99, rng.random());
        if let Ok(c) = null_comparison(&m, &spec) {
            ps.push(c.p_value.unwrap());
        }
    }
    let n = ps.len() as f64;
    let mean = ps.iter().sum::<f64>() / n;
    let low = ps.iter().filter(|&&p| p <= 0.1).count();
    // uniform mean 0.5 with sd 0.29/sqrt(60) ~ 0.037; binomial(60, 0.1) rarely exceeds 14
    assert!((0.38..=0.62).contains(&mean), "mean p {mean}");
    assert!(low <= 14, "{low} of 60 p-values <= 0.1");
}
