use std::f64::consts::PI;

use cvqkd_gqi::grid::ThetaGrid;
use cvqkd_gqi::spectral::*;
use proptest::prelude::*;

fn grid() -> ThetaGrid {
    ThetaGrid::new(2049).unwrap()
}

fn sequence(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, len)
}

/// A sequence smoothed by a short random filter, so its lags are not white.
fn colored(len: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(-1.0..1.0f64, len + 3), prop::collection::vec(-0.9..0.9f64, 3)).prop_map(
        move |(e, h)| {
            (0..len)
                .map(|t| e[t + 3] + h[0] * e[t + 2] + h[1] * e[t + 1] + h[2] * e[t])
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_with_all_lags(x in sequence(2..64)) {
        let seq = RealSequence::new(x.clone()).unwrap();
        let lags = autocorr_estimate(&seq, x.len()).unwrap();
        let p = spectrum_from_lags(&lags, &grid());
        let a0 = lags.variance();
        prop_assume!(a0 > 1e-6);
        prop_assert!((p.variance() - a0).abs() <= 1e-9 * a0);
    }

    #[test]
    fn maxent_reproduces_lags(x in colored(256), z in 1usize..5) {
        let lags = autocorr_estimate(&RealSequence::new(x).unwrap(), z).unwrap();
        let p = maxent_spectrum(&lags, &grid()).unwrap();
        for l in 0..z {
            prop_assert!((p.lag(l) - lags.lags()[l]).abs() < 1e-8, "lag {l}");
        }
    }

    #[test]
    fn maxent_beats_matching_perturbations(
        x in colored(256),
        z in 1usize..5,
        b in prop::collection::vec(-1.0..1.0f64, 4),
        frac in 0.05..0.95f64,
    ) {
        let g = grid();
        let lags = autocorr_estimate(&RealSequence::new(x).unwrap(), z).unwrap();
        let p = maxent_spectrum(&lags, &g).unwrap();
        // cosines of order ≥ Z leave the first Z lags untouched
        let h: Vec<f64> = g.thetas().iter()
            .map(|t| b.iter().enumerate().map(|(j, c)| c * ((z + j) as f64 * t).cos()).sum())
            .collect();
        let worst = p.values().iter().zip(&h)
            .filter(|(_, h)| **h < 0.0)
            .map(|(p, h)| p / -h)
            .fold(f64::INFINITY, f64::min);
        prop_assume!(worst.is_finite());
        let eps = frac * worst;
        let q = PowerSpectrum::new(g, p.values().iter().zip(&h).map(|(p, h)| p + eps * h).collect()).unwrap();
        for l in 0..z {
            prop_assert!((q.lag(l) - lags.lags()[l]).abs() < 1e-8);
        }
        prop_assert!(entropy_rate(&q).unwrap() <= entropy_rate(&p).unwrap() + 1e-8);
    }

    #[test]
    fn relative_entropy_is_nonnegative(
        a in prop::collection::vec(0.1..5.0f64, 4),
        b in prop::collection::vec(0.1..5.0f64, 4),
    ) {
        let g = grid();
        fn shape(c: &[f64]) -> impl Fn(f64) -> f64 + '_ {
            move |t| c[0] + c[1] * (1.0 + t.cos()) + c[2] * (1.0 + (2.0 * t).cos()) + c[3] * t * t
        }
        let p1 = PowerSpectrum::from_fn(g, shape(&a)).unwrap();
        let p2 = PowerSpectrum::from_fn(g, shape(&b)).unwrap();
        prop_assert!(spectral_relative_entropy(&p1, &p2).unwrap().value() >= 0.0);
        prop_assert_eq!(spectral_relative_entropy(&p1, &p1).unwrap().value(), 0.0);
    }

    #[test]
    fn unit_variance_identity(c in prop::collection::vec(0.05..3.0f64, 3)) {
        let g = grid();
        let p = PowerSpectrum::from_fn(g, |t| c[0] + c[1] * (1.0 + t.cos()) + c[2] * (t / PI).powi(2))
            .unwrap()
            .unit_variance()
            .unwrap();
        let d = spectral_relative_entropy(&p, &PowerSpectrum::white(g, 1.0).unwrap()).unwrap().value();
        prop_assert!((d - (ENTROPY_CONSTANT - entropy_rate(&p).unwrap())).abs() < 1e-8);
    }

    #[test]
    fn richer_lag_sets_lower_entropy(x in colored(512)) {
        let g = grid();
        let all = autocorr_estimate(&RealSequence::new(x).unwrap(), 6).unwrap();
        let white = PowerSpectrum::white(g, 1.0).unwrap();
        let mut prev_h = f64::INFINITY;
        let mut prev_d = -1.0;
        for z in 1..=6 {
            let p = maxent_spectrum(&all.truncated(z).unwrap(), &g).unwrap();
            let h = entropy_rate(&p).unwrap();
            let d = spectral_relative_entropy(&p.unit_variance().unwrap(), &white).unwrap().value();
            prop_assert!(h <= prev_h + 1e-9, "entropy rose at Z = {z}");
            prop_assert!(d >= prev_d - 1e-9, "divergence fell at Z = {z}");
            prev_h = h;
            prev_d = d;
        }
    }

    #[test]
    fn estimated_lags_pass_wss_check(x in sequence(8..128), z in 1usize..8) {
        let z = z.min(x.len());
        let lags = autocorr_estimate(&RealSequence::new(x).unwrap(), z).unwrap();
        prop_assert!(wss_consistency_check(&lags).passed);
    }
}
