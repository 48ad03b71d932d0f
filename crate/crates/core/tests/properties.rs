//! Property tests for the library's structural invariants.

use npeb_core::classify::{naive_bayes, summarize, threshold_delta, GroupSummary, LabeledDataset};
use npeb_core::density::{
    hellinger_distance, mixture_log_density, normal_log_density, MixingDistribution,
    MixtureDensity,
};
use npeb_core::matrix::Matrix;
use npeb_core::npmle::{solve, ObservationSet, SolveOptions};
use npeb_core::posterior::posterior_law;
use proptest::prelude::*;

const QUAD: usize = 2001;

/// Strictly ascending atoms with simplex weights.
fn mixing(max_atoms: usize) -> impl Strategy<Value = MixingDistribution> {
    proptest::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..=max_atoms).prop_filter_map(
        "atoms too close",
        |pairs| {
            let mut atoms: Vec<f64> = pairs.iter().map(|&(a, _)| a).collect();
            atoms.sort_unstable_by(f64::total_cmp);
            if atoms.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                return None;
            }
            let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
            let weights: Vec<f64> = pairs.iter().map(|&(_, w)| w / total).collect();
            MixingDistribution::new(atoms, weights).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_log_density_symmetry(
        mean_ticks in -5_000_000i64..5_000_000,
        sd in 0.1f64..4.0,
        t_ticks in 0i64..20_000_000,
    ) {
        // Dyadic mean and offset, so the reflected point is exact and the
        // two standardized deviations match bit for bit.
        let tick = (2.0f64).powi(-20);
        let mean = mean_ticks as f64 * tick;
        let t = t_ticks as f64 * tick;
        let f = |x: f64| normal_log_density(x, mean, sd).unwrap();
        prop_assert_eq!(f(mean + t), f(mean - t));
    }

    #[test]
    fn adding_weight_to_nearest_atom_never_decreases_density(
        mix in mixing(5),
        x in -4.0f64..4.0,
        sd in 0.3f64..2.0,
        boost in 0.01f64..0.5,
    ) {
        let base = mixture_log_density(&mix, x, sd).unwrap();
        // Locate the unique nearest atom; skip ties.
        let k = mix.nearest_atom(x);
        let unique = mix
            .atoms()
            .iter()
            .enumerate()
            .all(|(i, a)| i == k || (a - x).abs() > (mix.atoms()[k] - x).abs() + 1e-12);
        prop_assume!(unique);
        let mut weights = mix.weights().to_vec();
        weights[k] += boost;
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let boosted = MixingDistribution::new(mix.atoms().to_vec(), weights).unwrap();
        let after = mixture_log_density(&boosted, x, sd).unwrap();
        prop_assert!(after >= base - 1e-12, "boost lowered density: {base} -> {after}");
    }

    #[test]
    fn hellinger_symmetry_and_triangle(
        p in mixing(2),
        q in mixing(2),
        r in mixing(2),
    ) {
        let dp = MixtureDensity::new(p, 1.0).unwrap();
        let dq = MixtureDensity::new(q, 1.0).unwrap();
        let dr = MixtureDensity::new(r, 1.0).unwrap();
        let pq = hellinger_distance(&dp, &dq, QUAD).unwrap();
        let qp = hellinger_distance(&dq, &dp, QUAD).unwrap();
        prop_assert!((pq - qp).abs() < 1e-12);
        let pr = hellinger_distance(&dp, &dr, QUAD).unwrap();
        let rq = hellinger_distance(&dr, &dq, QUAD).unwrap();
        prop_assert!(pq <= pr + rq + 1e-6, "triangle violated: {pq} > {pr} + {rq}");
    }

    #[test]
    fn posterior_mean_stays_in_atom_range(
        mix in mixing(5),
        xbar in -20.0f64..20.0,
        nk in 1usize..64,
    ) {
        let law = posterior_law(&mix, xbar, nk).unwrap();
        let mean = law.mean();
        let lo = mix.atoms()[0];
        let hi = mix.atoms()[mix.len() - 1];
        prop_assert!(mean >= lo - 1e-12 && mean <= hi + 1e-12, "mean {mean} outside [{lo}, {hi}]");
        // Shrinkage: conditioning values outside the support never pass through.
        if mix.len() >= 2 && (xbar < lo || xbar > hi) {
            prop_assert!((mean - xbar).abs() > 0.0);
        }
        let total: f64 = law.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn threshold_supports_are_nested(
        deltas in proptest::collection::vec(-4.0f64..4.0, 3..40),
        lo in 0.0f64..2.0,
        hi_extra in 0.0f64..2.0,
    ) {
        let p = deltas.len();
        let summary = GroupSummary {
            xbar0: vec![0.0; p],
            xbar1: deltas.clone(),
            delta_hat: deltas,
            n0: 2,
            n1: 2,
        };
        let small = threshold_delta(&summary, lo).unwrap();
        let big = threshold_delta(&summary, lo + hi_extra).unwrap();
        for (s, b) in small.iter().zip(&big) {
            // Support can only shrink as the threshold grows.
            prop_assert!(!(*s == 0.0 && *b != 0.0));
        }
    }

    #[test]
    fn solve_preserves_simplex_on_random_samples(
        raw in proptest::collection::vec(-5.0f64..5.0, 5..40),
        k in 1usize..6,
    ) {
        let obs = ObservationSet::new(raw, 1.0).unwrap();
        let fit = solve(&obs, k, &SolveOptions::default()).unwrap();
        let sum: f64 = fit.mix.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(fit.mix.weights().iter().all(|&w| w >= 0.0));
        for pair in fit.mix.atoms().windows(2) {
            prop_assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn feature_permutation_leaves_decisions_unchanged(
        rows in proptest::collection::vec(
            proptest::collection::vec(-2.0f64..2.0, 6),
            6..14,
        ),
        point in proptest::collection::vec(-2.0f64..2.0, 6),
    ) {
        let n = rows.len();
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 1)).collect();
        let train = LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels.clone()).unwrap();
        let s = summarize(&train);
        let nb = naive_bayes(&s, 0.5).unwrap();
        let d1 = nb.classify(&point).unwrap();

        // Reverse the feature order everywhere.
        let rev_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().rev().copied().collect()).collect();
        let rev_point: Vec<f64> = point.iter().rev().copied().collect();
        let rev_train = LabeledDataset::new(Matrix::from_rows(&rev_rows).unwrap(), labels).unwrap();
        let rs = summarize(&rev_train);
        let rnb = naive_bayes(&rs, 0.5).unwrap();
        let d2 = rnb.classify(&rev_point).unwrap();

        prop_assert!((d1.score - d2.score).abs() <= 1e-9 * d1.score.abs().max(1.0));
        if d1.score.abs() > 1e-8 {
            prop_assert_eq!(d1.label, d2.label);
        }
    }
}
