use std::f64::consts::PI;

use cvqkd_gqi::dgqi::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn block(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), m)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 0..4)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn estimator_ignores_window_scale(x in block(32), c in coeffs(), scale in 0.01..100.0f64) {
        let w = WindowSpec::new(c, 32).unwrap();
        prop_assume!(!w.is_degenerate());
        let a = periodogram_estimate(&x, &w).unwrap();
        let b = periodogram_estimate(&x, &w.scaled(scale).unwrap()).unwrap();
        for (p, q) in a.values().iter().zip(b.values()) {
            prop_assert!(close(*p, *q, 1e-12) || (p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn periodogram_equals_convolution_route(x in block(16), c in coeffs()) {
        let w = WindowSpec::new(c, 16).unwrap();
        prop_assume!(!w.is_degenerate());
        let est = periodogram_estimate(&x, &w).unwrap();
        let y: Vec<Complex64> = estimate_via_convolution(&x, &w).unwrap().into_iter().map(|v| v * 4.0).collect();
        let m = 16;
        for (i, e) in est.values().iter().enumerate() {
            let raw = if i == 0 || i == m / 2 { y[i].norm_sqr() } else { y[i].norm_sqr() + y[m - i].norm_sqr() };
            let want = raw / w.alpha();
            prop_assert!(close(*e, want, 1e-10) || (e - want).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_at_zero_is_coherent_gain(c in coeffs(), m in 4usize..64) {
        let w = WindowSpec::new(c, m).unwrap();
        prop_assume!(!w.is_degenerate());
        let sum: f64 = w.beta().iter().sum();
        prop_assert!(close(window_kernel(&w, 0.0), sum * sum / w.alpha(), 1e-12));
    }

    #[test]
    fn rectangular_parseval(x in block(64)) {
        let e = periodogram_estimate(&x, &WindowSpec::rectangular(64).unwrap()).unwrap();
        let mean_power = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        prop_assert!(close(e.total(), mean_power, 1e-12));
    }

    #[test]
    fn mirrored_offsets_agree(delta in 0.0..0.5f64, c in coeffs()) {
        // the kernel is even, so the mirror holds up to leakage from the
        // negative-frequency image and the folded partner bin, both about m/2
        // bins away; their amplitude cross term is of order 1/m of the peak
        let m = 1024;
        let k = m / 4;
        let w = WindowSpec::new(c, m).unwrap();
        prop_assume!(!w.is_degenerate());
        let tone = |f: f64| -> Vec<Complex64> {
            (0..m).map(|z| Complex64::new((2.0 * PI * f * z as f64 / m as f64).cos(), 0.0)).collect()
        };
        let a = periodogram_estimate(&tone(k as f64 + delta), &w).unwrap();
        let b = periodogram_estimate(&tone(k as f64 + 1.0 - delta), &w).unwrap();
        let peak = a.values()[k].max(a.values()[k + 1]);
        prop_assert!((a.values()[k] - b.values()[k + 1]).abs() <= 5e-3 * peak);
        prop_assert!((a.values()[k + 1] - b.values()[k]).abs() <= 5e-3 * peak);
    }
}

#[test]
fn more_coefficients_never_hurt() {
    let offsets = offset_grid(21);
    let eps: Vec<f64> = (1..=4).map(|p| optimize_window(p, 64, &offsets).unwrap().eps_max).collect();
    for w in eps.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{eps:?}");
    }
}

#[test]
fn design_beats_its_coarse_grid() {
    let offsets = offset_grid(21);
    let design = optimize_window(3, 64, &offsets).unwrap();
    for free in coarse_grid(3) {
        let mut c = free.clone();
        c.push(-1.0 - free.iter().sum::<f64>());
        let w = WindowSpec::new(c, 64).unwrap();
        let e = magnitude_error(&w, &offsets).unwrap().eps_max;
        assert!(design.eps_max <= e + 1e-12);
    }
}

#[test]
fn window_design_carries_over_to_other_lengths() {
    let offsets = offset_grid(51);
    let design = optimize_window(4, 1024, &offsets).unwrap();
    for m in [64, 256, 4096] {
        let w = design.window.resample(m).unwrap();
        assert_eq!(w.coeffs(), design.window.coeffs());
        assert!(magnitude_error(&w, &offsets).unwrap().eps_max < 0.05);
    }
}
