//! Property tests over randomly drawn inputs: distribution round
//! trips, probability-calculus identities and information
//! inequalities.

use bayescore::dist::Distribution;
use bayescore::evidence;
use bayescore::prob::{self, DiscretePrior};
use proptest::prelude::*;

fn normalised(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let total: f64 = probs.iter().sum();
    probs[0] += 1.0 - total;
    probs
}

fn prior(probs: Vec<f64>) -> DiscretePrior {
    let labels = (0..probs.len()).map(|i| format!("{i}")).collect();
    DiscretePrior::new(labels, probs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn quantile_inverts_cdf_for_gamma(alpha in 0.3f64..20.0, beta in 0.1f64..5.0, p in 1e-6f64..0.999) {
        let d = Distribution::gamma(alpha, beta).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf_for_t(mu in -5.0f64..5.0, sigma in 0.1f64..4.0, nu in 1.0f64..40.0, p in 1e-4f64..0.9999) {
        let d = Distribution::noncentral_t(mu, sigma, nu).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn grid_posterior_is_scale_free_and_normalised(
        weights in prop::collection::vec(0.01f64..1.0, 2..12),
        lls in prop::collection::vec(-50.0f64..0.0, 12),
        shift in -300.0f64..300.0,
    ) {
        let k = weights.len();
        let p = prior(normalised(weights));
        let lls = &lls[..k];
        let shifted: Vec<f64> = lls.iter().map(|v| v + shift).collect();
        let a = prob::bayes_grid(&p, lls).unwrap();
        let b = prob::bayes_grid(&p, &shifted).unwrap();
        let total: f64 = a.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (x, y) in a.probs.iter().zip(&b.probs) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_divergence_is_non_negative(
        pw in prop::collection::vec(0.01f64..1.0, 2..10),
        qw in prop::collection::vec(0.01f64..1.0, 10),
    ) {
        let k = pw.len();
        let p = prior(normalised(pw));
        let q = prior(normalised(qw[..k].to_vec()));
        let d = evidence::kl_divergence(&p, &q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(evidence::kl_divergence(&p, &p).unwrap() < 1e-12);
    }

    #[test]
    fn entropy_peaks_at_uniform(weights in prop::collection::vec(0.01f64..1.0, 2..10)) {
        let k = weights.len();
        let p = prior(normalised(weights));
        let u = DiscretePrior::uniform(k).unwrap();
        prop_assert!(evidence::shannon_entropy(&p, None) <= evidence::shannon_entropy(&u, None) + 1e-12);
    }
}
