//! Uniform angular grid on `[-π, π]` with trapezoid quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectrum values below this are clamped before logs and divisions.
pub const SPECTRUM_FLOOR: f64 = 1e-12;

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Smallest grid accepted by [`ThetaGrid::new`].
pub const MIN_GRID_POINTS: usize = 16;

/// `M` uniform points spanning `[-π, π]`, both endpoints included.
///
/// Points are built from an integer numerator so that `θ(M-1-k) == -θ(k)`
/// holds bit-for-bit, which keeps even spectra exactly even on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaGrid {
    points: usize,
}

impl ThetaGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < MIN_GRID_POINTS {
            return Err(Error::Precondition(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {points}"
            )));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing between neighbouring points.
    pub fn step(&self) -> f64 {
        2.0 * PI / (self.points - 1) as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        let span = (self.points - 1) as f64;
        let numer = 2.0 * k as f64 - span;
        PI * numer / span
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.theta(k)).collect()
    }

    /// Index of the point mirrored through `θ = 0`.
    pub fn mirror(&self, k: usize) -> usize {
        self.points - 1 - k
    }

    /// Trapezoid weight of point `k`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.points {
            0.5 * self.step()
        } else {
            self.step()
        }
    }

    /// Trapezoid integral of grid samples over `[-π, π]`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.points);
        let interior: f64 = values.iter().sum();
        let ends = 0.5 * (values[0] + values[self.points - 1]);
        self.step() * (interior - ends)
    }

    /// Trapezoid integral of `f(θ_k, k)`.
    pub fn integrate_fn(&self, mut f: impl FnMut(f64, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.points {
            acc += self.weight(k) * f(self.theta(k), k);
        }
        acc
    }
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self {
            points: DEFAULT_GRID_POINTS,
        }
    }
}
