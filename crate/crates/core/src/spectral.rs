//! Wide-sense-stationary statistics on a uniform angular grid.
//!
//! Autocorrelation estimation, truncated and maximum-entropy power spectra,
//! Gaussian entropy rate, spectral relative entropy and the Burg entropy.
//! All logarithms are natural; entropies are in nats.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ThetaGrid, SPECTRUM_FLOOR};

/// `½ ln 2π + ½`, the entropy rate of a white unit-variance Gaussian process.
pub const ENTROPY_CONSTANT: f64 = 1.418_938_533_204_672_7;

/// Relative tolerance of the even-symmetry check on spectra.
const EVEN_TOLERANCE: f64 = 1e-9;

/// A finite, non-empty sequence of real quadrature samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSequence(Vec<f64>);

impl RealSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("sequence is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("sample {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Autocorrelation lags `A(0..Z)`.
///
/// Construction only checks finiteness; use [`wss_consistency_check`] or
/// [`AutocorrSet::validated`] for the stationarity invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSet {
    lags: Vec<f64>,
}

impl AutocorrSet {
    pub fn from_lags(lags: Vec<f64>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::Precondition("need at least one lag".into()));
        }
        if lags.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("lags must be finite".into()));
        }
        Ok(Self { lags })
    }

    /// Like [`AutocorrSet::from_lags`] but rejects lag sets that fail the
    /// consistency check.
    pub fn validated(lags: Vec<f64>) -> Result<Self> {
        let set = Self::from_lags(lags)?;
        let report = wss_consistency_check(&set);
        match report.violation {
            None => Ok(set),
            Some(v) => Err(Error::Precondition(format!("inconsistent lags: {v:?}"))),
        }
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    /// Number of lags `Z`.
    pub fn count(&self) -> usize {
        self.lags.len()
    }

    pub fn variance(&self) -> f64 {
        self.lags[0]
    }

    /// The first `z` lags.
    pub fn truncated(&self, z: usize) -> Result<Self> {
        if z == 0 || z > self.lags.len() {
            return Err(Error::Precondition(format!(
                "requested {z} lags but only {} available",
                self.lags.len()
            )));
        }
        Ok(Self {
            lags: self.lags[..z].to_vec(),
        })
    }

    /// Symmetric Toeplitz matrix `[A(|i-j|)]`.
    pub fn toeplitz(&self) -> DMatrix<f64> {
        let z = self.lags.len();
        DMatrix::from_fn(z, z, |i, j| self.lags[i.abs_diff(j)])
    }
}

/// A nonnegative, even power spectrum sampled on a [`ThetaGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    grid: ThetaGrid,
    values: Vec<f64>,
}

impl PowerSpectrum {
    pub fn new(grid: ThetaGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "spectrum has {} samples for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!(
                "spectrum value {} at grid point {k} is negative or not finite",
                values[k]
            )));
        }
        let scale = 1.0 + values.iter().cloned().fold(0.0, f64::max);
        for k in 0..grid.len() / 2 {
            let diff = (values[k] - values[grid.mirror(k)]).abs();
            if diff > EVEN_TOLERANCE * scale {
                return Err(Error::Domain(format!(
                    "spectrum is not even: points {k} and {} differ by {diff:e}",
                    grid.mirror(k)
                )));
            }
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: ThetaGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.thetas().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn white(grid: ThetaGrid, level: f64) -> Result<Self> {
        Self::new(grid, vec![level; grid.len()])
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `(1/2π) ∫ P dθ`, the variance of the process.
    pub fn variance(&self) -> f64 {
        self.grid.integrate(&self.values) / (2.0 * PI)
    }

    /// `(1/2π) ∫ P(θ) cos(lθ) dθ`, the lag-`l` autocorrelation.
    pub fn lag(&self, l: usize) -> f64 {
        let lf = l as f64;
        self.grid
            .integrate_fn(|t, k| self.values[k] * (lf * t).cos())
            / (2.0 * PI)
    }

    /// First `z` autocorrelation lags of the spectrum.
    pub fn lags(&self, z: usize) -> Result<AutocorrSet> {
        AutocorrSet::from_lags((0..z).map(|l| self.lag(l)).collect())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Rescaled so that `(1/2π) ∫ P dθ = 1`.
    pub fn unit_variance(&self) -> Result<Self> {
        let var = self.variance();
        if !(var > 0.0) {
            return Err(Error::Domain("spectrum has zero variance".into()));
        }
        self.scaled(1.0 / var)
    }
}

/// Relative entropy between two spectra, in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SpectralDivergence(f64);

impl SpectralDivergence {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Biased autocorrelation estimate `A(k) = (1/n) Σ x[t+k] x[t]`, `k < z`.
///
/// The sequence mean is taken to be zero. Dividing by `n` rather than `n-k`
/// keeps the Toeplitz matrix positive semidefinite.
pub fn autocorr_estimate(seq: &RealSequence, z: usize) -> Result<AutocorrSet> {
    let x = seq.values();
    let n = x.len();
    if z == 0 || z > n {
        return Err(Error::Precondition(format!(
            "lag count {z} must be in 1..={n}"
        )));
    }
    let lags = (0..z)
        .map(|k| {
            let s: f64 = x[k..].iter().zip(x).map(|(a, b)| a * b).sum();
            s / n as f64
        })
        .collect();
    AutocorrSet::from_lags(lags)
}

/// Truncated spectrum `P(θ) = A(0) + 2 Σ_{l≥1} A(l) cos(lθ)`.
///
/// Values below [`SPECTRUM_FLOOR`] are clamped to it.
pub fn spectrum_from_lags(lags: &AutocorrSet, grid: &ThetaGrid) -> PowerSpectrum {
    let a = lags.lags();
    let values = grid
        .thetas()
        .into_iter()
        .map(|t| {
            let tail: f64 = a[1..]
                .iter()
                .enumerate()
                .map(|(i, al)| al * ((i + 1) as f64 * t).cos())
                .sum();
            (a[0] + 2.0 * tail).max(SPECTRUM_FLOOR)
        })
        .collect();
    PowerSpectrum { grid: *grid, values }
}

/// Autoregressive model `x_t + Σ a_k x_{t-k} = e_t`, `var(e) = innovation_variance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub coeffs: Vec<f64>,
    pub innovation_variance: f64,
    pub reflection: Vec<f64>,
}

impl ArModel {
    /// `σ² / |1 + Σ a_k e^{-ikθ}|²` on the grid.
    pub fn spectrum(&self, grid: &ThetaGrid) -> PowerSpectrum {
        let values = grid
            .thetas()
            .into_iter()
            .map(|t| {
                let mut poly = Complex64::new(1.0, 0.0);
                for (k, a) in self.coeffs.iter().enumerate() {
                    poly += Complex64::from_polar(*a, -((k + 1) as f64) * t);
                }
                (self.innovation_variance / poly.norm_sqr()).max(SPECTRUM_FLOOR)
            })
            .collect();
        PowerSpectrum { grid: *grid, values }
    }
}

/// Levinson-Durbin recursion over all `Z` lags.
pub fn levinson_durbin(lags: &AutocorrSet) -> Result<ArModel> {
    let r = lags.lags();
    if !(r[0] > 0.0) {
        return Err(Error::DegenerateConstraint(format!(
            "lag-0 value {} is not positive",
            r[0]
        )));
    }
    let mut a: Vec<f64> = Vec::with_capacity(r.len() - 1);
    let mut reflection = Vec::with_capacity(r.len() - 1);
    let mut err = r[0];
    for k in 1..r.len() {
        let acc = r[k] + a.iter().enumerate().map(|(j, aj)| aj * r[k - 1 - j]).sum::<f64>();
        let kappa = -acc / err;
        if !(kappa.abs() < 1.0) {
            return Err(Error::DegenerateConstraint(format!(
                "reflection coefficient {kappa} at order {k} is outside (-1, 1)"
            )));
        }
        let prev = a.clone();
        for j in 0..prev.len() {
            a[j] = prev[j] + kappa * prev[prev.len() - 1 - j];
        }
        a.push(kappa);
        reflection.push(kappa);
        err *= 1.0 - kappa * kappa;
        if !(err > r[0] * 1e-14) {
            return Err(Error::DegenerateConstraint(format!(
                "prediction error vanished at order {k}; reduce Z"
            )));
        }
    }
    Ok(ArModel {
        coeffs: a,
        innovation_variance: err,
        reflection,
    })
}

/// Maximum-entropy spectrum consistent with the given lags.
///
/// This is the autoregressive spectrum whose first `Z` autocorrelations equal
/// the input lags.
pub fn maxent_spectrum(lags: &AutocorrSet, grid: &ThetaGrid) -> Result<PowerSpectrum> {
    Ok(levinson_durbin(lags)?.spectrum(grid))
}

/// Gaussian entropy rate `½ ln 2π + ½ + (1/4π) ∫ ln P dθ`.
pub fn entropy_rate(p: &PowerSpectrum) -> Result<f64> {
    if let Some(k) = p.values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "entropy rate needs a positive spectrum; value {} at point {k}",
            p.values[k]
        )));
    }
    let int = p
        .grid
        .integrate_fn(|_, k| p.values[k].max(SPECTRUM_FLOOR).ln());
    Ok(ENTROPY_CONSTANT + int / (4.0 * PI))
}

/// `(1/4π) ∫ (P1/P2 - ln(P1/P2) - 1) dθ`.
pub fn spectral_relative_entropy(
    p1: &PowerSpectrum,
    p2: &PowerSpectrum,
) -> Result<SpectralDivergence> {
    if p1.grid != p2.grid {
        return Err(Error::Usage(format!(
            "grid mismatch: {} vs {} points",
            p1.grid.len(),
            p2.grid.len()
        )));
    }
    if let Some(k) = p2.values.iter().position(|v| *v < SPECTRUM_FLOOR) {
        return Err(Error::Domain(format!(
            "reference spectrum {} at point {k} is below the floor",
            p2.values[k]
        )));
    }
    let int = p1.grid.integrate_fn(|_, k| {
        let r = p1.values[k].max(SPECTRUM_FLOOR) / p2.values[k];
        r - r.ln() - 1.0
    });
    Ok(SpectralDivergence((int / (4.0 * PI)).max(0.0)))
}

/// Burg entropy `Σ ln v`.
pub fn burg_entropy(values: &[f64]) -> Result<f64> {
    if let Some(i) = values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "Burg entropy needs positive values; got {} at {i}",
            values[i]
        )));
    }
    Ok(values.iter().map(|v| v.ln()).sum())
}

/// The clause of the stationarity conditions a lag set violates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WssViolation {
    NegativeVariance { value: f64 },
    LagExceedsVariance { lag: usize, value: f64 },
    NotPositiveSemidefinite { min_eigenvalue: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WssReport {
    pub passed: bool,
    pub violation: Option<WssViolation>,
    pub min_eigenvalue: f64,
}

/// Checks `A(0) ≥ 0`, `|A(k)| ≤ A(0)` and positive semidefiniteness of the
/// Toeplitz matrix (smallest eigenvalue ≥ `-1e-10·max(1, A(0))`).
pub fn wss_consistency_check(lags: &AutocorrSet) -> WssReport {
    let a = lags.lags();
    let min_eigenvalue = lags
        .toeplitz()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let violation = if a[0] < 0.0 {
        Some(WssViolation::NegativeVariance { value: a[0] })
    } else if let Some(k) = (1..a.len()).find(|&k| a[k].abs() > a[0]) {
        Some(WssViolation::LagExceedsVariance { lag: k, value: a[k] })
    } else if min_eigenvalue < -1e-10 * a[0].max(1.0) {
        Some(WssViolation::NotPositiveSemidefinite { min_eigenvalue })
    } else {
        None
    };
    WssReport {
        passed: violation.is_none(),
        violation,
        min_eigenvalue,
    }
}
