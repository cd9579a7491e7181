//! Statistical secret key rate from maximum-entropy spectra.
//!
//! Each party's lags give an autoregressive maximum-entropy spectrum. After
//! rescaling to unit variance, its relative entropy against a white
//! unit-variance reference is `D = -(1/4π) ∫ ln P dθ`, and the per-carrier
//! rate is `D_AB - D_BE`. Only the spectral shape enters, so white inputs
//! through flat channels give a rate of zero in expectation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    apply_variance_ratio, draw_block, eve_tap, measure, segmented_inverse, transmit, Detector,
    LogicalChannel, SubChannel,
};
use crate::dgqi::{estimate_via_convolution, WindowSpec};
use crate::error::{Error, Result};
use crate::gqi::{inferred_spectrum, solve_lagrangians, ConstraintSet, GainProfile};
use crate::grid::{ThetaGrid, DEFAULT_GRID_POINTS};
use crate::rng::{RngStream, StreamPurpose};
use crate::spectral::{
    autocorr_estimate, maxent_spectrum, spectral_relative_entropy, AutocorrSet, PowerSpectrum,
    RealSequence, SpectralDivergence,
};

/// Relative entropy of `P`, rescaled to unit variance, against white noise of
/// unit variance.
pub fn divergence_from_reference(p: &PowerSpectrum) -> Result<SpectralDivergence> {
    if let Some(k) = p.values().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "divergence needs a positive spectrum; value {} at point {k}",
            p.values()[k]
        )));
    }
    let unit = p.unit_variance()?;
    spectral_relative_entropy(&unit, &PowerSpectrum::white(*p.grid(), 1.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub d_ab: f64,
    pub d_be: f64,
    /// `d_ab - d_be`, nats per carrier use.
    pub rate_per_carrier: f64,
    pub z: usize,
    /// Subcarrier count, when the report comes from a channel simulation.
    pub m: Option<usize>,
}

impl KeyRateReport {
    fn new(d_ab: f64, d_be: f64, z: usize, m: Option<usize>) -> Self {
        Self {
            d_ab,
            d_be,
            rate_per_carrier: d_ab - d_be,
            z,
            m,
        }
    }
}

/// Key rate from the first `z` lags of each party on the default grid.
pub fn statistical_key_rate(bob: &AutocorrSet, eve: &AutocorrSet, z: usize) -> Result<KeyRateReport> {
    statistical_key_rate_on(bob, eve, z, &ThetaGrid::new(DEFAULT_GRID_POINTS)?)
}

pub fn statistical_key_rate_on(
    bob: &AutocorrSet,
    eve: &AutocorrSet,
    z: usize,
    grid: &ThetaGrid,
) -> Result<KeyRateReport> {
    let d_ab = lag_divergence(bob, z, grid)?;
    let d_be = lag_divergence(eve, z, grid)?;
    Ok(KeyRateReport::new(d_ab, d_be, z, None))
}

fn lag_divergence(lags: &AutocorrSet, z: usize, grid: &ThetaGrid) -> Result<f64> {
    if z == 0 || z > lags.count() {
        return Err(Error::Precondition(format!(
            "lag count {z} must be in 1..={}",
            lags.count()
        )));
    }
    let spectrum = maxent_spectrum(&lags.truncated(z)?, grid)?;
    Ok(divergence_from_reference(&spectrum)?.value())
}

/// A step where a curve decreased by more than its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub series: Series,
    pub from: usize,
    pub to: usize,
    pub drop: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    DAb,
    DBe,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Z,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub axis: Axis,
    pub points: Vec<KeyRateReport>,
    /// Standard error of each point's rate; empty for deterministic curves.
    pub stderr: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl RateCurve {
    pub fn non_decreasing(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance for the deterministic Z-curve.
pub const Z_TOLERANCE: f64 = 1e-9;

/// Key rate for `Z = 1..=z_max` from one fixed pair of sequences.
///
/// Lags are estimated once and truncated per `Z`, so the curve is
/// deterministic; any step where `d_ab` or `d_be` falls by more than
/// [`Z_TOLERANCE`] is recorded as a violation.
pub fn rate_vs_z(
    bob: &RealSequence,
    eve: &RealSequence,
    z_max: usize,
    grid: &ThetaGrid,
) -> Result<RateCurve> {
    let bob_lags = autocorr_estimate(bob, z_max)?;
    let eve_lags = autocorr_estimate(eve, z_max)?;
    rate_vs_z_from_lags(&bob_lags, &eve_lags, z_max, grid)
}

pub fn rate_vs_z_from_lags(
    bob: &AutocorrSet,
    eve: &AutocorrSet,
    z_max: usize,
    grid: &ThetaGrid,
) -> Result<RateCurve> {
    let points = (1..=z_max)
        .into_par_iter()
        .map(|z| statistical_key_rate_on(bob, eve, z, grid))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for (i, w) in points.windows(2).enumerate() {
        for (series, a, b) in [(Series::DAb, w[0].d_ab, w[1].d_ab), (Series::DBe, w[0].d_be, w[1].d_be)] {
            if b < a - Z_TOLERANCE {
                violations.push(Violation {
                    series,
                    from: i + 1,
                    to: i + 2,
                    drop: a - b,
                    tolerance: Z_TOLERANCE,
                });
            }
        }
    }
    Ok(RateCurve {
        axis: Axis::Z,
        points,
        stderr: Vec::new(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMethod {
    Gqi,
    Dgqi,
}

/// End-to-end simulation settings shared by every point of an m-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Single carriers per trial.
    pub n: usize,
    pub sigma_w0_sq: f64,
    pub sigma_w_sq: f64,
    /// Sub-channel `i` of an `m`-channel uses entry `i mod len`.
    pub subchannels: Vec<SubChannel>,
    pub eve_noise_variance: f64,
    pub detector: Detector,
    pub method: InferenceMethod,
    /// Coefficients of the DGQI window; `None` means `β ≡ 1`.
    pub window: Option<Vec<f64>>,
    pub z: usize,
    pub grid_points: usize,
    pub trials: usize,
    pub seed: u64,
    /// Monotonicity tolerance in standard errors.
    pub tolerance_se: f64,
}

impl Scenario {
    pub fn omega(&self) -> f64 {
        self.sigma_w0_sq / self.sigma_w_sq
    }

    fn validate(&self) -> Result<()> {
        if self.subchannels.is_empty() {
            return Err(Error::Config("subchannels: list is empty".into()));
        }
        if !(self.sigma_w_sq > 0.0) || !(self.omega() >= 1.0) {
            return Err(Error::Config(format!(
                "sigma_w_sq: Ω = {} must be ≥ 1",
                self.omega()
            )));
        }
        if self.trials < 2 {
            return Err(Error::Config("trials: at least 2 are needed for a standard error".into()));
        }
        if self.z == 0 {
            return Err(Error::Config("Z: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn channel(&self, m: usize) -> Result<LogicalChannel> {
        let subs = (0..m)
            .map(|i| self.subchannels[i % self.subchannels.len()])
            .collect();
        LogicalChannel::new(0, subs)
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || !self.n.is_multiple_of(m) {
            return Err(Error::Config(format!("m = {m} must divide n = {}", self.n)));
        }
        if self.n / m < self.z {
            return Err(Error::Config(format!(
                "n/m = {} values per subcarrier is fewer than Z = {}",
                self.n / m,
                self.z
            )));
        }
        Ok(())
    }
}

/// Received subcarriers of one trial.
pub struct TrialSignals {
    pub bob: Vec<num_complex::Complex64>,
    pub eve: Vec<num_complex::Complex64>,
    pub channel: LogicalChannel,
}

/// Input draw, segmented inverse transform, variance scaling, Bob's
/// channel and Eve's tap for trial `trial` with `m` subcarriers.
///
/// Every stream is indexed by trial and by global subcarrier position, so
/// different `m` reuse the same random numbers.
pub fn simulate_trial(s: &Scenario, m: usize, trial: u64) -> Result<TrialSignals> {
    let channel = s.channel(m)?;
    let block = draw_block(s.n, s.sigma_w0_sq, &RngStream::new(s.seed, StreamPurpose::Input, trial))?;
    let mut d = segmented_inverse(block.carriers(), m)?;
    apply_variance_ratio(&mut d, s.omega())?;
    let bob = transmit(&d, &channel, &RngStream::new(s.seed, StreamPurpose::BobNoise, trial))?;
    let eve = eve_tap(
        &d,
        &channel,
        s.eve_noise_variance,
        &RngStream::new(s.seed, StreamPurpose::EveNoise, trial),
    )?;
    Ok(TrialSignals { bob, eve, channel })
}

#[derive(Clone, Copy)]
enum Party {
    Bob,
    Eve,
}

impl Party {
    fn penalty(self, seed: u64, trial: u64) -> RngStream {
        match self {
            Party::Bob => RngStream::new(seed, StreamPurpose::MeasurementPenalty, trial),
            Party::Eve => RngStream::new(seed, StreamPurpose::Auxiliary(1), trial),
        }
    }

    fn power_gain(self, sub: &SubChannel) -> f64 {
        match self {
            Party::Bob => sub.power_gain(),
            Party::Eve => sub.eve_gain().norm_sqr(),
        }
    }
}

/// Divergence of one party's data; zero when the gains carry no information,
/// since the maximum-entropy spectrum is then the white reference itself.
#[allow(clippy::too_many_arguments)]
fn party_divergence(
    s: &Scenario,
    received: &[num_complex::Complex64],
    channel: &LogicalChannel,
    party: Party,
    m: usize,
    subcarriers: usize,
    trial: u64,
    grid: &ThetaGrid,
) -> Result<f64> {
    let penalty = party.penalty(s.seed, trial);
    let keep = |j: usize| j % m < subcarriers;
    match s.method {
        InferenceMethod::Gqi => {
            let values = measure(received, s.detector, &penalty);
            let per_sub: Vec<Vec<f64>> = (0..subcarriers)
                .map(|i| values.primary().iter().skip(i).step_by(m).copied().collect())
                .collect();
            let targets = ConstraintSet::from_measurements(&per_sub)?;
            let gains: Vec<f64> = channel.subchannels()[..subcarriers]
                .iter()
                .map(|sub| party.power_gain(sub))
                .collect();
            let profile = GainProfile::from_fn(*grid, s.omega(), subcarriers, |i, _| gains[i])?;
            let solution = match solve_lagrangians(&targets, &profile) {
                Ok(sol) => sol,
                Err(Error::NoInformation) => return Ok(0.0),
                Err(e) => return Err(e),
            };
            if !solution.converged {
                log::warn!(
                    "trial {trial}: multiplier search stopped at Θ = {:e}",
                    solution.residual
                );
            }
            let lags = inferred_spectrum(&solution.lambdas, &profile)?.lags(s.z)?;
            lag_divergence(&lags, s.z, grid)
        }
        InferenceMethod::Dgqi => {
            let estimate = if subcarriers < m {
                received.to_vec()
            } else {
                let window = match &s.window {
                    Some(c) => WindowSpec::new(c.clone(), m)?,
                    None => WindowSpec::rectangular(m)?,
                };
                dgqi_block(received, &window, m)?
            };
            let values = measure(&estimate, s.detector, &penalty);
            let seq: Vec<f64> = values
                .primary()
                .iter()
                .enumerate()
                .filter(|(j, _)| subcarriers == m || keep(*j))
                .map(|(_, v)| *v)
                .collect();
            let lags = autocorr_estimate(&RealSequence::new(seq)?, s.z)?;
            lag_divergence(&lags, s.z, grid)
        }
    }
}

/// Per-segment windowed inverse transform, re-indexed `j → -j mod m` so the
/// estimate lines up with the transmitted carriers.
fn dgqi_block(
    received: &[num_complex::Complex64],
    window: &WindowSpec,
    m: usize,
) -> Result<Vec<num_complex::Complex64>> {
    let mut out = Vec::with_capacity(received.len());
    for seg in received.chunks(m) {
        let est = estimate_via_convolution(seg, window)?;
        out.extend((0..m).map(|j| est[(m - j) % m]));
    }
    Ok(out)
}

/// `(d_ab, d_be)` of one trial using sub-channels `0..subcarriers`.
fn trial_divergences(
    s: &Scenario,
    m: usize,
    subcarriers: usize,
    trial: u64,
    grid: &ThetaGrid,
) -> Result<(f64, f64)> {
    let sig = simulate_trial(s, m, trial)?;
    let d_ab = party_divergence(s, &sig.bob, &sig.channel, Party::Bob, m, subcarriers, trial, grid)?;
    let d_be = party_divergence(s, &sig.eve, &sig.channel, Party::Eve, m, subcarriers, trial, grid)?;
    Ok((d_ab, d_be))
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn run_trials(s: &Scenario, m: usize, subcarriers: usize, grid: &ThetaGrid) -> Result<Vec<(f64, f64)>> {
    (0..s.trials as u64)
        .into_par_iter()
        .map(|t| trial_divergences(s, m, subcarriers, t, grid))
        .collect()
}

/// Monte-Carlo key rate for every `m` in `m_list` with common random numbers.
///
/// A step between consecutive entries of `m_list` is a violation when the
/// mean paired rate difference is below `-tolerance_se` standard errors of
/// that difference.
pub fn rate_vs_m(s: &Scenario, m_list: &[usize]) -> Result<RateCurve> {
    s.validate()?;
    if m_list.is_empty() {
        return Err(Error::Config("m_list: empty".into()));
    }
    for &m in m_list {
        s.check_m(m)?;
    }
    let grid = ThetaGrid::new(s.grid_points)?;
    let runs = m_list
        .iter()
        .map(|&m| run_trials(s, m, m, &grid))
        .collect::<Result<Vec<_>>>()?;

    let rates: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| r.iter().map(|(a, b)| a - b).collect())
        .collect();
    let mut points = Vec::new();
    let mut stderr = Vec::new();
    for (run, &m) in runs.iter().zip(m_list) {
        let ab: Vec<f64> = run.iter().map(|r| r.0).collect();
        let be: Vec<f64> = run.iter().map(|r| r.1).collect();
        let (d_ab, _) = mean_se(&ab);
        let (d_be, _) = mean_se(&be);
        let mut report = KeyRateReport::new(d_ab, d_be, s.z, Some(m));
        let (rate, se) = mean_se(&rates[points.len()]);
        report.rate_per_carrier = rate;
        points.push(report);
        stderr.push(se);
    }

    let mut violations = Vec::new();
    for k in 1..m_list.len() {
        let diff: Vec<f64> = rates[k].iter().zip(&rates[k - 1]).map(|(b, a)| b - a).collect();
        let (mean, se) = mean_se(&diff);
        let tolerance = s.tolerance_se * se;
        if mean < -tolerance - 1e-12 {
            log::warn!(
                "rate fell from m = {} to m = {} by {:e} (tolerance {:e})",
                m_list[k - 1],
                m_list[k],
                -mean,
                tolerance
            );
            violations.push(Violation {
                series: Series::Rate,
                from: m_list[k - 1],
                to: m_list[k],
                drop: -mean,
                tolerance,
            });
        }
        // the divergence-increment ordering is a modeling claim; it is logged only
        let d_ab_step = points[k].d_ab - points[k - 1].d_ab;
        let d_be_step = points[k].d_be - points[k - 1].d_be;
        if d_ab_step < d_be_step - tolerance {
            log::info!(
                "d_ab grew less than d_be from m = {} to m = {}",
                m_list[k - 1],
                m_list[k]
            );
        }
    }
    Ok(RateCurve {
        axis: Axis::M,
        points,
        stderr,
        violations,
    })
}

/// Monte-Carlo rate using only sub-channels `0..=i`, for every `i < m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeRates {
    pub m: usize,
    pub rates: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// `s[i]` is the mean rate computed from sub-channels `0..=i` alone.
///
/// For GQI the constraint system is restricted to the prefix. For DGQI the
/// prefix subcarriers' measured values are concatenated segment by segment;
/// the full prefix `i = m-1` runs the ordinary windowed estimate.
pub fn cumulative_rate_vector(s: &Scenario, m: usize) -> Result<CumulativeRates> {
    s.validate()?;
    s.check_m(m)?;
    let grid = ThetaGrid::new(s.grid_points)?;
    let mut rates = Vec::with_capacity(m);
    let mut stderr = Vec::with_capacity(m);
    for i in 0..m {
        let subcarriers = i + 1;
        if s.method == InferenceMethod::Dgqi && subcarriers < m && (s.n / m) * subcarriers < s.z {
            return Err(Error::Config(format!(
                "prefix {i} has fewer than Z = {} values",
                s.z
            )));
        }
        let run = run_trials(s, m, subcarriers, &grid)?;
        let r: Vec<f64> = run.iter().map(|(a, b)| a - b).collect();
        let (mean, se) = mean_se(&r);
        rates.push(mean);
        stderr.push(se);
    }
    Ok(CumulativeRates { m, rates, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{entropy_rate, levinson_durbin, ENTROPY_CONSTANT};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid() -> ThetaGrid {
        ThetaGrid::new(4097).unwrap()
    }

    fn ar1_lags(a: f64, count: usize) -> AutocorrSet {
        let var = 1.0 / (1.0 - a * a);
        AutocorrSet::from_lags((0..count).map(|l| var * a.powi(l as i32)).collect()).unwrap()
    }

    fn white_lags(count: usize) -> AutocorrSet {
        AutocorrSet::from_lags((0..count).map(|l| if l == 0 { 1.0 } else { 0.0 }).collect()).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let g = grid();
        assert_abs_diff_eq!(
            divergence_from_reference(&PowerSpectrum::white(g, 1.0).unwrap()).unwrap().value(),
            0.0,
            epsilon = 1e-15
        );
        let p = PowerSpectrum::from_fn(g, |t| 0.75 / (1.0 + 0.25 - t.cos())).unwrap();
        let unit = p.unit_variance().unwrap();
        let d = divergence_from_reference(&p).unwrap().value();
        assert_abs_diff_eq!(d, ENTROPY_CONSTANT - entropy_rate(&unit).unwrap(), epsilon = 1e-8);

        let bad = PowerSpectrum::new(g, vec![0.0; g.len()]).unwrap();
        assert!(matches!(divergence_from_reference(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn two_level_spectrum_matches_dense_quadrature() {
        let level = |t: f64| if t.abs() <= PI / 2.0 { 2.0 } else { 1.0 };
        let d = divergence_from_reference(&PowerSpectrum::from_fn(grid(), level).unwrap())
            .unwrap()
            .value();
        // oracle: midpoint rule at four times the density on the unit-variance spectrum
        let n = 4 * 4096;
        let h = 2.0 * PI / n as f64;
        let mids: Vec<f64> = (0..n).map(|k| -PI + (k as f64 + 0.5) * h).collect();
        let var: f64 = mids.iter().map(|t| level(*t)).sum::<f64>() * h / (2.0 * PI);
        let oracle: f64 = mids
            .iter()
            .map(|t| {
                let r = level(*t) / var;
                r - r.ln() - 1.0
            })
            .sum::<f64>()
            * h
            / (4.0 * PI);
        // the jump sits on a grid node, so agreement is first order in the step
        assert_abs_diff_eq!(d, oracle, epsilon = 5e-4);
    }

    #[test]
    fn identical_parties_give_zero_rate() {
        let l = ar1_lags(0.4, 4);
        let r = statistical_key_rate_on(&l, &l, 4, &grid()).unwrap();
        assert_eq!(r.rate_per_carrier, 0.0);
    }

    #[test]
    fn flat_scale_is_irrelevant() {
        let bob = AutocorrSet::from_lags(vec![2.0, 0.0, 0.0]).unwrap();
        let r = statistical_key_rate_on(&bob, &white_lags(3), 3, &grid()).unwrap();
        assert_abs_diff_eq!(r.rate_per_carrier, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn ar1_rate_matches_closed_form() {
        let r = statistical_key_rate_on(&ar1_lags(0.5, 2), &white_lags(2), 2, &grid()).unwrap();
        // -(1/4π)∫ ln(P/σ²) for an AR(1) model with reflection coefficient a
        let want = -0.5 * (1.0f64 - 0.25).ln();
        assert!(r.rate_per_carrier > 0.0);
        assert_abs_diff_eq!(r.rate_per_carrier, want, epsilon = 1e-10);
        assert_abs_diff_eq!(r.d_ab, want, epsilon = 1e-10);
        assert!(r.d_be.abs() < 1e-14);
    }

    #[test]
    fn swapping_parties_negates_rate() {
        let a = ar1_lags(0.3, 3);
        let b = ar1_lags(-0.6, 3);
        let r1 = statistical_key_rate_on(&a, &b, 3, &grid()).unwrap();
        let r2 = statistical_key_rate_on(&b, &a, 3, &grid()).unwrap();
        assert_eq!(r1.rate_per_carrier, -r2.rate_per_carrier);
    }

    #[test]
    fn lag_count_is_checked() {
        let a = ar1_lags(0.3, 3);
        assert!(matches!(
            statistical_key_rate_on(&a, &a, 4, &grid()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn z_curve_of_ar1_input() {
        let l = ar1_lags(0.5, 4);
        let c = rate_vs_z_from_lags(&l, &white_lags(4), 4, &grid()).unwrap();
        assert!(c.non_decreasing());
        assert_abs_diff_eq!(c.points[0].d_ab, 0.0, epsilon = 1e-12);
        assert!(c.points[1].d_ab > c.points[0].d_ab);
        let model = levinson_durbin(&l).unwrap();
        let closed: f64 = -0.5 * model.reflection.iter().map(|k| (1.0 - k * k).ln()).sum::<f64>();
        assert_abs_diff_eq!(c.points[3].d_ab, closed, epsilon = 1e-10);
    }

    pub(crate) fn scenario(method: InferenceMethod) -> Scenario {
        Scenario {
            n: 256,
            sigma_w0_sq: 1.0,
            sigma_w_sq: 1.0,
            subchannels: vec![SubChannel::with_power_gain(0.9, 0.1).unwrap()],
            eve_noise_variance: 0.1,
            detector: Detector::homodyne_x(),
            method,
            window: None,
            z: 3,
            grid_points: 1025,
            trials: 8,
            seed: 7,
            tolerance_se: 3.0,
        }
    }

    #[test]
    fn m_curve_is_deterministic() {
        let s = scenario(InferenceMethod::Dgqi);
        let a = rate_vs_m(&s, &[1, 2, 4]).unwrap();
        let b = rate_vs_m(&s, &[1, 2, 4]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 3);
        assert!(a.stderr.iter().all(|e| *e > 0.0));
    }

    #[test]
    fn gqi_flat_channels_give_zero_rate() {
        let s = scenario(InferenceMethod::Gqi);
        let c = rate_vs_m(&s, &[1, 2, 4]).unwrap();
        for p in &c.points {
            assert_abs_diff_eq!(p.rate_per_carrier, 0.0, epsilon = 1e-9);
        }
        assert!(c.non_decreasing());
    }

    #[test]
    fn m_must_divide_n() {
        let s = scenario(InferenceMethod::Dgqi);
        assert!(matches!(rate_vs_m(&s, &[3]), Err(Error::Config(_))));
    }

    #[test]
    fn cumulative_single_entry_matches_full_rate() {
        let s = scenario(InferenceMethod::Dgqi);
        let c = cumulative_rate_vector(&s, 1).unwrap();
        let full = rate_vs_m(&s, &[1]).unwrap();
        assert_eq!(c.rates.len(), 1);
        assert_eq!(c.rates[0], full.points[0].rate_per_carrier);
    }

    #[test]
    fn zero_transmittance_prefix_is_not_positive() {
        for method in [InferenceMethod::Gqi, InferenceMethod::Dgqi] {
            let mut s = scenario(method);
            s.subchannels = vec![
                SubChannel::symmetric(0.0, 0.1).unwrap(),
                SubChannel::with_power_gain(0.9, 0.1).unwrap(),
            ];
            s.trials = 16;
            let c = cumulative_rate_vector(&s, 2).unwrap();
            assert!(c.rates[0] <= 3.0 * c.stderr[0] + 1e-12, "{method:?}: {:?}", c);
        }
    }
}
