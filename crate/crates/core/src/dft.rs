//! Discrete Fourier transforms used across the crate.
//!
//! `forward_unitary`/`inverse_unitary` carry a `1/√n` factor each way.
//! `inverse_sum` is the bare sum `Σ_z x_z e^{+i2πzj/n}` used by the windowed
//! estimator.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn run(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    if buf.is_empty() {
        return buf;
    }
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(&mut buf);
    });
    buf
}

pub fn forward_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    run(x, false).into_iter().map(|v| v * scale).collect()
}

pub fn inverse_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    run(x, true).into_iter().map(|v| v * scale).collect()
}

pub fn inverse_sum(x: &[Complex64]) -> Vec<Complex64> {
    run(x, true)
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}
