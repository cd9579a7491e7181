//! Direct quadrature inference: windowed periodogram estimation over the
//! measured subcarriers, and design of cosine-sum flat-top windows.
//!
//! A window of `P` coefficients has samples
//! `β_i = g · (1 + Σ_{y=1..P} C_y cos(2π y i / m))` and energy
//! `α = m Σ β_i²`. With `Y_j = Σ_z β_z x_z e^{+i2π z j/m}` the folded estimate is
//! `E_0 = |Y_0|²/α`, `E_i = (|Y_i|² + |Y_{m-i}|²)/α`, `E_{m/2} = |Y_{m/2}|²/α`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dft::{inverse_sum, inverse_unitary};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, SimplexOptions};

/// Tolerance on `|1 + Σ C_y|` for a window to count as flat-top.
pub const BOUNDARY_TOL: f64 = 1e-10;
pub const DEFAULT_WINDOW_M: usize = 1024;
pub const DEFAULT_OFFSETS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    coeffs: Vec<f64>,
    m: usize,
    gain: f64,
    beta: Vec<f64>,
    alpha: f64,
}

impl WindowSpec {
    pub fn new(coeffs: Vec<f64>, m: usize) -> Result<Self> {
        Self::with_gain(coeffs, m, 1.0)
    }

    fn with_gain(coeffs: Vec<f64>, m: usize, gain: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Usage("window length must be positive".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !gain.is_finite() {
            return Err(Error::Usage("window coefficients must be finite".into()));
        }
        let beta: Vec<f64> = (0..m)
            .map(|i| {
                let q = 2.0 * PI * i as f64 / m as f64;
                let s: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(y, c)| c * ((y + 1) as f64 * q).cos())
                    .sum();
                gain * (1.0 + s)
            })
            .collect();
        let alpha = m as f64 * beta.iter().map(|b| b * b).sum::<f64>();
        Ok(Self {
            coeffs,
            m,
            gain,
            beta,
            alpha,
        })
    }

    /// `β ≡ 1`.
    pub fn rectangular(m: usize) -> Result<Self> {
        Self::new(Vec::new(), m)
    }

    /// A window whose coefficients satisfy `1 + Σ C_y = 0`.
    pub fn flat_top(coeffs: Vec<f64>, m: usize) -> Result<Self> {
        let w = Self::new(coeffs, m)?;
        if !w.satisfies_boundary() {
            return Err(Error::DegenerateConstraint(format!(
                "1 + ΣC = {} violates the boundary condition",
                w.boundary_residual()
            )));
        }
        Ok(w)
    }

    /// Same coefficients and gain sampled at a different length.
    pub fn resample(&self, m: usize) -> Result<Self> {
        Self::with_gain(self.coeffs.clone(), m, self.gain)
    }

    pub fn p(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn boundary_residual(&self) -> f64 {
        1.0 + self.coeffs.iter().sum::<f64>()
    }

    pub fn satisfies_boundary(&self) -> bool {
        self.boundary_residual().abs() <= BOUNDARY_TOL
    }

    pub fn is_degenerate(&self) -> bool {
        self.beta.iter().all(|b| *b == 0.0)
    }

    /// Every sample multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::with_gain(self.coeffs.clone(), self.m, self.gain * c)
    }

    fn matching(&self, m: usize) -> Result<std::borrow::Cow<'_, Self>> {
        if m == self.m {
            Ok(std::borrow::Cow::Borrowed(self))
        } else {
            Ok(std::borrow::Cow::Owned(self.resample(m)?))
        }
    }
}

/// Frequency bins `A_i = 2σ²_ω i / m`, `i = 0..=m/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    sigma_w_sq: f64,
    m: usize,
}

impl BinGrid {
    pub fn new(sigma_w_sq: f64, m: usize) -> Result<Self> {
        check_even(m)?;
        if !(sigma_w_sq > 0.0) || !sigma_w_sq.is_finite() {
            return Err(Error::Config(format!(
                "subcarrier variance {sigma_w_sq} must be positive"
            )));
        }
        Ok(Self { sigma_w_sq, m })
    }

    pub fn bins(&self) -> Vec<f64> {
        (0..=self.m / 2)
            .map(|i| 2.0 * self.sigma_w_sq * i as f64 / self.m as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeEstimate {
    bins: Vec<f64>,
}

impl MagnitudeEstimate {
    pub fn values(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Sum of all folded bins, which equals the two-sided total.
    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    /// Index of the largest bin; ties go to the lower index.
    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.bins.iter().enumerate() {
            if *v > self.bins[best] {
                best = i;
            }
        }
        best
    }
}

fn check_even(m: usize) -> Result<()> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::Usage(format!(
            "subcarrier count m = {m} must be even and at least 4"
        )));
    }
    Ok(())
}

fn fold(y: &[Complex64], alpha: f64) -> Vec<f64> {
    let m = y.len();
    let h = m / 2;
    (0..=h)
        .map(|i| {
            let e = if i == 0 || i == h {
                y[i].norm_sqr()
            } else {
                y[i].norm_sqr() + y[m - i].norm_sqr()
            };
            e / alpha
        })
        .collect()
}

pub fn periodogram_estimate(measured: &[Complex64], window: &WindowSpec) -> Result<MagnitudeEstimate> {
    let m = measured.len();
    check_even(m)?;
    let w = window.matching(m)?;
    if w.is_degenerate() {
        return Err(Error::DegenerateWindow("every window sample is zero".into()));
    }
    let product: Vec<Complex64> = measured.iter().zip(&w.beta).map(|(x, b)| x * b).collect();
    Ok(MagnitudeEstimate {
        bins: fold(&inverse_sum(&product), w.alpha),
    })
}

/// `f(s) = (1/α) |Σ_i β_i e^{i2π i s/m}|²`; zero for a degenerate window.
pub fn window_kernel(window: &WindowSpec, s: f64) -> f64 {
    if window.alpha == 0.0 {
        return 0.0;
    }
    let m = window.m as f64;
    let sum: Complex64 = window
        .beta
        .iter()
        .enumerate()
        .map(|(i, b)| Complex64::from_polar(*b, 2.0 * PI * i as f64 * s / m))
        .sum();
    sum.norm_sqr() / window.alpha
}

/// Magnitude-error sweep over fractional bin offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub offsets: Vec<f64>,
    pub deviation_db: Vec<f64>,
    pub eps_max: f64,
}

/// `n` evenly spaced offsets covering `[0, 0.5]`.
pub fn offset_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_offsets(offsets: &[f64]) -> Result<()> {
    if offsets.is_empty() {
        return Err(Error::Usage("offset grid is empty".into()));
    }
    if let Some(d) = offsets.iter().find(|d| !(0.0..=0.5).contains(*d)) {
        return Err(Error::Usage(format!("offset {d} lies outside [0, 0.5]")));
    }
    Ok(())
}

fn tone_bin(m: usize) -> usize {
    m / 4
}

/// Deviation in dB of the scored bin from the window's on-bin response, for a
/// unit tone at fractional bin `m/4 + δ`.
fn tone_deviation(window: &WindowSpec, delta: f64) -> Result<f64> {
    let m = window.m;
    let k = tone_bin(m);
    let tone: Vec<Complex64> = (0..m)
        .map(|z| Complex64::from_polar(1.0, -2.0 * PI * (k as f64 + delta) * z as f64 / m as f64))
        .collect();
    let est = periodogram_estimate(&tone, window)?;
    let scored = est.bins[k].max(est.bins[k + 1]);
    Ok(10.0 * (scored / window_kernel(window, 0.0)).log10())
}

fn summarize(offsets: &[f64], deviation_db: Vec<f64>) -> ErrorCurve {
    let eps_max = deviation_db.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    ErrorCurve {
        offsets: offsets.to_vec(),
        deviation_db,
        eps_max,
    }
}

/// Sweeps a unit test tone across `k + δ` for every offset and reports
/// `10 log10(E_peak / f(0))`, plus `ε_max`, the largest absolute deviation.
pub fn magnitude_error(window: &WindowSpec, offsets: &[f64]) -> Result<ErrorCurve> {
    check_offsets(offsets)?;
    check_even(window.m)?;
    if window.is_degenerate() {
        return Err(Error::DegenerateWindow("every window sample is zero".into()));
    }
    let deviation_db = offsets
        .par_iter()
        .map(|d| tone_deviation(window, *d))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(offsets, deviation_db))
}

/// Precomputed `Σ_z cos(2π y z/m) e^{i2π z s/m}` for every offset and every
/// output bin the tone sweep reads, so a window's sweep costs `O(P)` per bin.
struct SweepBasis {
    m: usize,
    p: usize,
    /// Per offset, per scored bin (k, k+1), the folded partner terms, each a
    /// vector over `y = 0..=P`.
    sums: Vec<[Vec<Vec<Complex64>>; 2]>,
    /// `cos(2π y i/m)` for `y = 1..=P`, row-major by `y`.
    cosines: Vec<Vec<f64>>,
}

impl SweepBasis {
    fn new(m: usize, p: usize, offsets: &[f64]) -> Self {
        let k = tone_bin(m);
        let h = m / 2;
        let sums = offsets
            .par_iter()
            .map(|delta| {
                let per_bin = |j: usize| -> Vec<Vec<Complex64>> {
                    let partners: Vec<usize> = if j == 0 || j == h { vec![j] } else { vec![j, m - j] };
                    partners
                        .into_iter()
                        .map(|jj| {
                            let s = jj as f64 - k as f64 - delta;
                            (0..=p)
                                .map(|y| {
                                    (0..m)
                                        .map(|z| {
                                            let c = (2.0 * PI * (y * z) as f64 / m as f64).cos();
                                            Complex64::from_polar(c, 2.0 * PI * z as f64 * s / m as f64)
                                        })
                                        .sum()
                                })
                                .collect()
                        })
                        .collect()
                };
                [per_bin(k), per_bin(k + 1)]
            })
            .collect();
        let cosines = (1..=p)
            .map(|y| {
                (0..m)
                    .map(|i| (2.0 * PI * (y * i) as f64 / m as f64).cos())
                    .collect()
            })
            .collect();
        Self { m, p, sums, cosines }
    }

    /// `(α, f(0))` for unit gain.
    fn energies(&self, coeffs: &[f64]) -> (f64, f64) {
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..self.m {
            let b = 1.0 + coeffs.iter().zip(&self.cosines).map(|(c, row)| c * row[i]).sum::<f64>();
            sum += b;
            sq += b * b;
        }
        let alpha = self.m as f64 * sq;
        (alpha, sum * sum / alpha)
    }

    fn deviations(&self, coeffs: &[f64]) -> Vec<f64> {
        let (alpha, reference) = self.energies(coeffs);
        let c = |y: usize| if y == 0 { 1.0 } else { coeffs[y - 1] };
        self.sums
            .iter()
            .map(|bins| {
                let energy = |parts: &Vec<Vec<Complex64>>| -> f64 {
                    parts
                        .iter()
                        .map(|b| {
                            let y: Complex64 = (0..=self.p).map(|i| b[i] * c(i)).sum();
                            y.norm_sqr()
                        })
                        .sum::<f64>()
                        / alpha
                };
                let scored = energy(&bins[0]).max(energy(&bins[1]));
                10.0 * (scored / reference).log10()
            })
            .collect()
    }

    fn eps_max(&self, coeffs: &[f64]) -> f64 {
        self.deviations(coeffs)
            .iter()
            .fold(0.0f64, |acc, d| acc.max(d.abs()))
    }
}

/// Outcome of a window design run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDesign {
    pub window: WindowSpec,
    pub eps_max: f64,
    /// False when the simplex search hit its evaluation cap without meeting
    /// its tolerances; the window is still the best one found.
    pub optimal: bool,
}

const GRID_HALF_WIDTH: f64 = 2.5;
const RESTARTS: usize = 8;

fn grid_points_per_axis(dims: usize) -> usize {
    match dims {
        0 => 1,
        1..=3 => 11,
        4..=5 => 7,
        _ => 3,
    }
}

/// The coarse grid searched before refinement: every free coefficient
/// `C_1..C_{P-1}` on an evenly spaced axis over `[-2.5, 2.5]` (11 points for
/// up to three free coefficients, 7 for four or five, 3 beyond).
pub fn coarse_grid(p: usize) -> Vec<Vec<f64>> {
    let dims = p.saturating_sub(1);
    let n = grid_points_per_axis(dims);
    let axis: Vec<f64> = (0..n)
        .map(|i| -GRID_HALF_WIDTH + 2.0 * GRID_HALF_WIDTH * i as f64 / (n - 1).max(1) as f64)
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |a| {
                    let mut v = prefix.clone();
                    v.push(*a);
                    v
                })
            })
            .collect();
    }
    out
}

fn complete(free: &[f64]) -> Vec<f64> {
    let mut c = free.to_vec();
    c.push(-1.0 - free.iter().sum::<f64>());
    c
}

/// Minimizes `ε_max` over `C_1..C_P` subject to `1 + Σ C_y = 0`.
///
/// `C_P` is eliminated through the constraint. The search evaluates the
/// [`coarse_grid`], then runs simplex descent from the eight best grid points
/// and from the optimum for `P - 1` (embedded with `C_P = 0`), so the result
/// never loses to the grid or to a smaller `P`.
pub fn optimize_window(p: usize, m: usize, offsets: &[f64]) -> Result<WindowDesign> {
    if p == 0 {
        return Err(Error::Usage("window design needs P ≥ 1".into()));
    }
    check_offsets(offsets)?;
    check_even(m)?;
    let basis = SweepBasis::new(m, p, offsets);
    let (free, optimal) = search(&basis, p)?;
    let window = WindowSpec::flat_top(complete(&free), m)?;
    let eps_max = magnitude_error(&window, offsets)?.eps_max;
    Ok(WindowDesign {
        window,
        eps_max,
        optimal,
    })
}

fn search(basis: &SweepBasis, p: usize) -> Result<(Vec<f64>, bool)> {
    if p == 1 {
        return Ok((Vec::new(), true));
    }
    let objective = |free: &[f64]| {
        // coefficients P..=basis.p are zero for lower-order searches
        let mut c = complete(free);
        c.resize(basis.p, 0.0);
        basis.eps_max(&c)
    };

    let (lower, _) = search(basis, p - 1)?;
    let mut embedded = complete(&lower);
    embedded.truncate(p - 1);

    let mut scored: Vec<(f64, Vec<f64>)> = coarse_grid(p)
        .into_par_iter()
        .map(|x| (objective(&x), x))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut starts: Vec<Vec<f64>> = scored.into_iter().take(RESTARTS).map(|s| s.1).collect();
    starts.push(embedded);

    let opts = SimplexOptions {
        max_evals: 2000,
        initial_step: 0.1,
        f_tol: 1e-13,
        x_tol: 1e-10,
    };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|s| nelder_mead(objective, s, opts))
        .collect();
    let mut best = runs
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one start");

    // a max over a grid is not smooth, so the simplex can collapse early;
    // restarting from the incumbent with a fresh simplex escapes most stalls
    for _ in 0..6 {
        let again = nelder_mead(
            objective,
            &best.x,
            SimplexOptions {
                initial_step: 0.02,
                ..opts
            },
        );
        let improved = again.value < best.value - 1e-12;
        best = if again.value <= best.value { again } else { best };
        if !improved {
            break;
        }
    }
    Ok((best.x, best.converged))
}

/// `N(β_i) = β_i · m / Σβ`.
pub fn normalize_window(window: &WindowSpec) -> Result<WindowSpec> {
    let sum: f64 = window.beta.iter().sum();
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateWindow("window samples sum to zero".into()));
    }
    window.scaled(window.m as f64 / sum)
}

/// Unitary inverse DFT of `β ⊙ measured`.
pub fn estimate_via_convolution(measured: &[Complex64], window: &WindowSpec) -> Result<Vec<Complex64>> {
    if measured.is_empty() {
        return Err(Error::Usage("measured block is empty".into()));
    }
    let w = window.matching(measured.len())?;
    let product: Vec<Complex64> = measured.iter().zip(&w.beta).map(|(x, b)| x * b).collect();
    Ok(inverse_unitary(&product))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(m: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    /// `(1/m²)(sin πs / sin(πs/m))²`.
    fn dirichlet(m: usize, s: f64) -> f64 {
        let m = m as f64;
        if (s / m).fract() == 0.0 {
            return 1.0;
        }
        let r = (PI * s).sin() / (PI * s / m).sin();
        r * r / (m * m)
    }

    #[test]
    fn rectangular_window_samples() {
        let w = WindowSpec::rectangular(16).unwrap();
        assert!(w.beta().iter().all(|b| *b == 1.0));
        assert_eq!(w.alpha(), 256.0);
        assert!(!w.satisfies_boundary());
        let hann = WindowSpec::flat_top(vec![-1.0], 16).unwrap();
        assert_eq!(hann.beta()[0], 0.0);
        assert!(WindowSpec::flat_top(vec![-0.5], 16).is_err());
    }

    #[test]
    fn bin_grid_is_increasing() {
        let b = BinGrid::new(0.5, 8).unwrap().bins();
        assert_eq!(b.len(), 5);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert_abs_diff_eq!(b[4], 0.5, epsilon = 1e-15);
        assert!(BinGrid::new(0.5, 7).is_err());
    }

    #[test]
    fn tone_recovers_squared_amplitude() {
        let m = 32;
        let a = 1.7;
        let w = WindowSpec::rectangular(m).unwrap();
        for k in [0usize, 3, 16] {
            let tone: Vec<Complex64> = (0..m)
                .map(|z| Complex64::from_polar(a, -2.0 * PI * (k * z) as f64 / m as f64))
                .collect();
            let e = periodogram_estimate(&tone, &w).unwrap();
            for (i, v) in e.values().iter().enumerate() {
                let want = if i == k { a * a } else { 0.0 };
                assert_abs_diff_eq!(*v, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zeros_and_errors() {
        let w = WindowSpec::rectangular(8).unwrap();
        let e = periodogram_estimate(&[Complex64::new(0.0, 0.0); 8], &w).unwrap();
        assert!(e.values().iter().all(|v| *v == 0.0));
        assert!(matches!(
            periodogram_estimate(&[Complex64::new(1.0, 0.0); 7], &w),
            Err(Error::Usage(_))
        ));
        let zero = WindowSpec::rectangular(8).unwrap().scaled(0.0).unwrap();
        assert!(matches!(
            periodogram_estimate(&[Complex64::new(1.0, 0.0); 8], &zero),
            Err(Error::DegenerateWindow(_))
        ));
    }

    #[test]
    fn parseval_for_rectangular_window() {
        let m = 64;
        let x = random_block(m, 5);
        let e = periodogram_estimate(&x, &WindowSpec::rectangular(m).unwrap()).unwrap();
        let mean_power = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64;
        assert_abs_diff_eq!(e.total(), mean_power, epsilon = 1e-12);
    }

    #[test]
    fn kernel_matches_dirichlet_form() {
        let w = WindowSpec::rectangular(1024).unwrap();
        assert_abs_diff_eq!(window_kernel(&w, 0.0), 1.0, epsilon = 1e-12);
        for s in [1.0, 2.0, 37.0, 511.0] {
            assert_abs_diff_eq!(window_kernel(&w, s), 0.0, epsilon = 1e-12);
        }
        for s in [0.25, 0.5, 1.5, 3.3] {
            assert_abs_diff_eq!(window_kernel(&w, s), dirichlet(1024, s), epsilon = 1e-10);
        }
        let half = window_kernel(&w, 0.5);
        assert_abs_diff_eq!(half, 0.4053, epsilon = 1e-4);
        assert_abs_diff_eq!(10.0 * half.log10(), -3.92, epsilon = 0.005);

        let hann = WindowSpec::flat_top(vec![-1.0], 64).unwrap();
        let sum: f64 = hann.beta().iter().sum();
        assert_abs_diff_eq!(window_kernel(&hann, 0.0), sum * sum / hann.alpha(), epsilon = 1e-12);
    }

    #[test]
    fn scalloping_of_classic_windows() {
        let offsets = offset_grid(DEFAULT_OFFSETS);
        let rect = magnitude_error(&WindowSpec::rectangular(1024).unwrap(), &offsets).unwrap();
        let oracle = -10.0 * dirichlet(1024, 0.5).log10();
        assert_abs_diff_eq!(rect.eps_max, oracle, epsilon = 0.02);
        // the folded partner bin adds leakage of order 1e-5 dB
        assert_abs_diff_eq!(*rect.deviation_db.last().unwrap(), -oracle, epsilon = 1e-4);

        let hann = magnitude_error(&WindowSpec::flat_top(vec![-1.0], 1024).unwrap(), &offsets).unwrap();
        assert_abs_diff_eq!(hann.eps_max, 1.42, epsilon = 0.01);
        assert!(matches!(magnitude_error(&WindowSpec::rectangular(8).unwrap(), &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn fast_sweep_matches_periodogram_route() {
        let offsets = offset_grid(11);
        let coeffs = vec![-1.9, 1.3, -0.4];
        let basis = SweepBasis::new(64, 3, &offsets);
        let fast = basis.deviations(&coeffs);
        let slow = magnitude_error(&WindowSpec::new(coeffs, 64).unwrap(), &offsets).unwrap();
        for (a, b) in fast.iter().zip(&slow.deviation_db) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn design_p1_is_forced() {
        let d = optimize_window(1, 64, &offset_grid(21)).unwrap();
        assert_eq!(d.window.coeffs(), &[-1.0]);
        assert!(d.optimal);
    }

    #[test]
    fn design_improves_with_p() {
        let offsets = offset_grid(21);
        let d1 = optimize_window(1, 64, &offsets).unwrap();
        let d2 = optimize_window(2, 64, &offsets).unwrap();
        assert!(d2.eps_max < d1.eps_max);
        assert!(d2.window.satisfies_boundary());
    }

    #[test]
    fn normalization() {
        let w = normalize_window(&WindowSpec::rectangular(16).unwrap()).unwrap();
        assert!(w.beta().iter().all(|b| (b - 1.0).abs() < 1e-12));
        let h = WindowSpec::new(vec![-0.7, 0.2], 32).unwrap().scaled(3.0).unwrap();
        let once = normalize_window(&h).unwrap();
        let twice = normalize_window(&once).unwrap();
        for (a, b) in once.beta().iter().zip(twice.beta()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(once.beta().iter().sum::<f64>(), 32.0, epsilon = 1e-12);
        let offsets = offset_grid(11);
        let e0 = magnitude_error(&h, &offsets).unwrap();
        let e1 = magnitude_error(&once, &offsets).unwrap();
        assert_abs_diff_eq!(e0.eps_max, e1.eps_max, epsilon = 1e-12);
        let zero = h.scaled(0.0).unwrap();
        assert!(matches!(normalize_window(&zero), Err(Error::DegenerateWindow(_))));
    }

    #[test]
    fn convolution_paths_agree() {
        let m = 16;
        let x = random_block(m, 9);
        let rect = WindowSpec::rectangular(m).unwrap();
        let plain = inverse_unitary(&x);
        for (a, b) in estimate_via_convolution(&x, &rect).unwrap().iter().zip(&plain) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }

        let w = WindowSpec::new(vec![-0.8, 0.3], m).unwrap();
        let direct = estimate_via_convolution(&x, &w).unwrap();
        let xt = inverse_unitary(&x);
        let bt: Vec<Complex64> =
            inverse_unitary(&w.beta().iter().map(|b| Complex64::new(*b, 0.0)).collect::<Vec<_>>());
        for n in 0..m {
            let conv: Complex64 =
                (0..m).map(|k| xt[k] * bt[(n + m - k) % m]).sum::<Complex64>() / (m as f64).sqrt();
            assert_abs_diff_eq!((direct[n] - conv).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn impulse_window_gives_constant_block() {
        let m = 8;
        let x = random_block(m, 3);
        let mut w = WindowSpec::rectangular(m).unwrap();
        w.beta = (0..m).map(|i| if i == 0 { m as f64 } else { 0.0 }).collect();
        let out = estimate_via_convolution(&x, &w).unwrap();
        let want = x[0] * (m as f64).sqrt();
        for v in out {
            assert_abs_diff_eq!((v - want).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn periodogram_matches_convolution_spectrum() {
        let m = 32;
        let x = random_block(m, 11);
        let w = WindowSpec::new(vec![-1.2, 0.2], m).unwrap();
        let est = periodogram_estimate(&x, &w).unwrap();
        let y: Vec<Complex64> = estimate_via_convolution(&x, &w)
            .unwrap()
            .into_iter()
            .map(|v| v * (m as f64).sqrt())
            .collect();
        for (a, b) in est.values().iter().zip(fold(&y, w.alpha())) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
        }
    }
}
