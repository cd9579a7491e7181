//! Multicarrier Gaussian channel: single-carrier draws, unitary transforms,
//! transmittance plus additive noise per sub-channel, quadrature measurement
//! and the complementary eavesdropper tap.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Gaussian single-carrier block `z_j = x_j + i p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureBlock {
    carriers: Vec<Complex64>,
    modulation_variance: f64,
}

impl QuadratureBlock {
    pub fn new(carriers: Vec<Complex64>, modulation_variance: f64) -> Result<Self> {
        if carriers.is_empty() {
            return Err(Error::Precondition("block must hold at least one carrier".into()));
        }
        if carriers.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Precondition("carrier values must be finite".into()));
        }
        if !(modulation_variance >= 0.0) {
            return Err(Error::Config("modulation variance must be nonnegative".into()));
        }
        Ok(Self {
            carriers,
            modulation_variance,
        })
    }

    pub fn carriers(&self) -> &[Complex64] {
        &self.carriers
    }

    pub fn modulation_variance(&self) -> f64 {
        self.modulation_variance
    }

    pub fn len(&self) -> usize {
        self.carriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carriers.is_empty()
    }
}

/// One Gaussian sub-channel: complex transmittance and per-quadrature noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubChannel {
    t_re: f64,
    t_im: f64,
    noise_variance: f64,
}

impl SubChannel {
    /// Transmittance with `Re T = Im T = t`, `0 ≤ t ≤ 1/√2`.
    pub fn symmetric(t: f64, noise_variance: f64) -> Result<Self> {
        Self::new(t, t, noise_variance)
    }

    /// Symmetric sub-channel with power gain `|T|² = gain`.
    pub fn with_power_gain(gain: f64, noise_variance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gain) {
            return Err(Error::Config(format!("power gain {gain} outside [0, 1]")));
        }
        Self::symmetric((gain / 2.0).sqrt().min(FRAC_1_SQRT_2), noise_variance)
    }

    pub fn new(t_re: f64, t_im: f64, noise_variance: f64) -> Result<Self> {
        for (name, t) in [("t_re", t_re), ("t_im", t_im)] {
            if !(0.0..=FRAC_1_SQRT_2).contains(&t) {
                return Err(Error::Config(format!(
                    "{name} = {t} outside [0, 1/√2]"
                )));
            }
        }
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::Config(format!(
                "noise variance {noise_variance} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            t_re,
            t_im,
            noise_variance,
        })
    }

    pub fn transmittance(&self) -> Complex64 {
        Complex64::new(self.t_re, self.t_im)
    }

    /// `|T|²`.
    pub fn power_gain(&self) -> f64 {
        self.t_re * self.t_re + self.t_im * self.t_im
    }

    /// Per-quadrature noise variance; the complex noise variance is twice this.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Gain seen by the eavesdropper: magnitude `√(1-|T|²)`, real part equal
    /// to imaginary part.
    pub fn eve_gain(&self) -> Complex64 {
        let g = ((1.0 - self.power_gain()).max(0.0) / 2.0).sqrt();
        Complex64::new(g, g)
    }
}

/// A user's ordered set of sub-channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalChannel {
    user_id: usize,
    subchannels: Vec<SubChannel>,
}

impl LogicalChannel {
    pub fn new(user_id: usize, subchannels: Vec<SubChannel>) -> Result<Self> {
        if subchannels.is_empty() {
            return Err(Error::Usage("logical channel needs at least one sub-channel".into()));
        }
        Ok(Self {
            user_id,
            subchannels,
        })
    }

    /// `m` copies of the same sub-channel.
    pub fn uniform(user_id: usize, sub: SubChannel, m: usize) -> Result<Self> {
        Self::new(user_id, vec![sub; m])
    }

    pub fn user_id(&self) -> usize {
        self.user_id
    }

    pub fn subchannels(&self) -> &[SubChannel] {
        &self.subchannels
    }

    pub fn len(&self) -> usize {
        self.subchannels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subchannels.is_empty()
    }

    /// The first `count` sub-channels.
    pub fn prefix(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::Usage(format!(
                "prefix of {count} from a {}-sub-channel logical channel",
                self.len()
            )));
        }
        Self::new(self.user_id, self.subchannels[..count].to_vec())
    }

    fn check_length(&self, len: usize) -> Result<()> {
        if len == 0 || !len.is_multiple_of(self.len()) {
            return Err(Error::Usage(format!(
                "block of {len} subcarriers does not match {} sub-channels",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Splits `subchannels` into `users` contiguous logical channels of equal size.
pub fn allocate_users(subchannels: &[SubChannel], users: usize) -> Result<Vec<LogicalChannel>> {
    if users == 0 || subchannels.is_empty() || !subchannels.len().is_multiple_of(users) {
        return Err(Error::Usage(format!(
            "{} sub-channels cannot be split evenly between {users} users",
            subchannels.len()
        )));
    }
    let per_user = subchannels.len() / users;
    subchannels
        .chunks(per_user)
        .enumerate()
        .map(|(k, chunk)| LogicalChannel::new(k, chunk.to_vec()))
        .collect()
}

/// Draws `n` i.i.d. carriers with `Re z, Im z ~ N(0, σ²)`.
///
/// Carrier `j` uses stream elements `2j` (position) and `2j+1` (momentum).
pub fn draw_block(n: usize, sigma_w0_sq: f64, stream: &RngStream) -> Result<QuadratureBlock> {
    if n == 0 {
        return Err(Error::Precondition("block length must be at least 1".into()));
    }
    if !(sigma_w0_sq > 0.0) || !sigma_w0_sq.is_finite() {
        return Err(Error::Config(format!(
            "modulation variance {sigma_w0_sq} must be positive"
        )));
    }
    let sd = sigma_w0_sq.sqrt();
    let normals = stream.standard_normals(2 * n);
    let carriers = normals
        .chunks_exact(2)
        .map(|q| Complex64::new(sd * q[0], sd * q[1]))
        .collect();
    QuadratureBlock::new(carriers, sigma_w0_sq)
}

/// Unitary inverse DFT of the single-carrier block.
pub fn inverse_transform(block: &QuadratureBlock) -> Vec<Complex64> {
    dft::inverse_unitary(block.carriers())
}

/// Unitary forward DFT of a subcarrier block.
pub fn forward_transform(y: &[Complex64]) -> Vec<Complex64> {
    dft::forward_unitary(y)
}

/// Independent unitary inverse transforms over consecutive segments of `m`.
pub fn segmented_inverse(z: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    check_segments(z.len(), m)?;
    Ok(z.chunks(m).flat_map(dft::inverse_unitary).collect())
}

/// Independent unitary forward transforms over consecutive segments of `m`.
pub fn segmented_forward(y: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    check_segments(y.len(), m)?;
    Ok(y.chunks(m).flat_map(dft::forward_unitary).collect())
}

fn check_segments(len: usize, m: usize) -> Result<()> {
    if m == 0 || !len.is_multiple_of(m) {
        return Err(Error::Usage(format!(
            "segment length {m} does not divide block length {len}"
        )));
    }
    Ok(())
}

/// Scales subcarriers by `1/√Ω` so their variance becomes `σ²_ω0 / Ω`.
pub fn apply_variance_ratio(d: &mut [Complex64], omega: f64) -> Result<()> {
    if !(omega >= 1.0) || !omega.is_finite() {
        return Err(Error::Config(format!("variance ratio Ω = {omega} must be ≥ 1")));
    }
    let s = 1.0 / omega.sqrt();
    d.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

fn apply_gain_and_noise(
    d: &[Complex64],
    channel: &LogicalChannel,
    stream: &RngStream,
    gain: impl Fn(&SubChannel) -> Complex64,
    noise: impl Fn(&SubChannel) -> f64,
) -> Result<Vec<Complex64>> {
    channel.check_length(d.len())?;
    let m = channel.len();
    let normals = stream.standard_normals(2 * d.len());
    Ok(d.iter()
        .enumerate()
        .map(|(i, di)| {
            let sub = &channel.subchannels()[i % m];
            let sd = noise(sub).sqrt();
            gain(sub) * di + Complex64::new(sd * normals[2 * i], sd * normals[2 * i + 1])
        })
        .collect())
}

/// `y_i = T_i d_i + Δ_i` with `Δ` quadratures i.i.d. `N(0, σ²_N)`.
///
/// A block longer than the channel maps subcarrier `i` to sub-channel `i mod m`.
pub fn transmit(
    d: &[Complex64],
    channel: &LogicalChannel,
    stream: &RngStream,
) -> Result<Vec<Complex64>> {
    apply_gain_and_noise(d, channel, stream, SubChannel::transmittance, |s| {
        s.noise_variance()
    })
}

/// The eavesdropper's copy: gain of squared magnitude `1-|T_i|²` plus
/// independent noise of variance `eve_noise_variance` per quadrature.
pub fn eve_tap(
    d: &[Complex64],
    channel: &LogicalChannel,
    eve_noise_variance: f64,
    stream: &RngStream,
) -> Result<Vec<Complex64>> {
    if !(eve_noise_variance >= 0.0) {
        return Err(Error::Config("eavesdropper noise variance must be nonnegative".into()));
    }
    apply_gain_and_noise(d, channel, stream, SubChannel::eve_gain, |_| eve_noise_variance)
}

/// Single-carrier coefficient `(1/l) Σ_k F(T)_k`.
///
/// `F(T)` is the DFT of the transmittance profile scaled so that a flat
/// channel with every `T_i = T` yields `T`. With that scaling the sum
/// evaluates to `T_0` (the inverse transform at index 0).
pub fn single_carrier_coefficient(channel: &LogicalChannel) -> Result<Complex64> {
    let t: Vec<Complex64> = channel
        .subchannels()
        .iter()
        .map(SubChannel::transmittance)
        .collect();
    let l = t.len() as f64;
    let spectrum = dft::forward_unitary(&t);
    Ok(spectrum.iter().sum::<Complex64>() / l.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementMode {
    HomodyneX,
    HomodyneP,
    Heterodyne,
}

impl MeasurementMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementMode::HomodyneX => "homodyne-x",
            MeasurementMode::HomodyneP => "homodyne-p",
            MeasurementMode::Heterodyne => "heterodyne",
        }
    }
}

impl std::str::FromStr for MeasurementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homodyne-x" => Ok(Self::HomodyneX),
            "homodyne-p" => Ok(Self::HomodyneP),
            "heterodyne" => Ok(Self::Heterodyne),
            other => Err(Error::Config(format!("unknown measurement mode '{other}'"))),
        }
    }
}

/// Measurement settings. The heterodyne penalty adds unit vacuum noise per
/// quadrature and is off by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub mode: MeasurementMode,
    pub heterodyne_penalty: bool,
}

impl Detector {
    pub fn homodyne_x() -> Self {
        Self {
            mode: MeasurementMode::HomodyneX,
            heterodyne_penalty: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasurementRecord {
    /// One real value per subcarrier.
    Homodyne {
        mode: MeasurementMode,
        values: Vec<f64>,
    },
    /// Position and momentum per subcarrier.
    Heterodyne { x: Vec<f64>, p: Vec<f64> },
}

impl MeasurementRecord {
    pub fn mode(&self) -> MeasurementMode {
        match self {
            MeasurementRecord::Homodyne { mode, .. } => *mode,
            MeasurementRecord::Heterodyne { .. } => MeasurementMode::Heterodyne,
        }
    }

    /// The homodyne values, or the position quadrature for heterodyne.
    pub fn primary(&self) -> &[f64] {
        match self {
            MeasurementRecord::Homodyne { values, .. } => values,
            MeasurementRecord::Heterodyne { x, .. } => x,
        }
    }

    pub fn len(&self) -> usize {
        self.primary().len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary().is_empty()
    }
}

/// Quadrature measurement of each subcarrier.
///
/// The penalty stream is read only for heterodyne with the penalty enabled
/// (elements `2i` and `2i+1` for subcarrier `i`).
pub fn measure(y: &[Complex64], detector: Detector, penalty: &RngStream) -> MeasurementRecord {
    match detector.mode {
        MeasurementMode::HomodyneX => MeasurementRecord::Homodyne {
            mode: detector.mode,
            values: y.iter().map(|v| v.re).collect(),
        },
        MeasurementMode::HomodyneP => MeasurementRecord::Homodyne {
            mode: detector.mode,
            values: y.iter().map(|v| v.im).collect(),
        },
        MeasurementMode::Heterodyne => {
            let mut x: Vec<f64> = y.iter().map(|v| v.re).collect();
            let mut p: Vec<f64> = y.iter().map(|v| v.im).collect();
            if detector.heterodyne_penalty {
                let n = penalty.standard_normals(2 * y.len());
                for i in 0..y.len() {
                    x[i] += n[2 * i];
                    p[i] += n[2 * i + 1];
                }
            }
            MeasurementRecord::Heterodyne { x, p }
        }
    }
}
