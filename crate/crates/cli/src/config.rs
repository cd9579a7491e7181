//! Run configuration: TOML in, resolved JSON out.

use std::path::{Path, PathBuf};

use cvqkd_gqi::channel::{allocate_users, Detector, LogicalChannel, MeasurementMode, SubChannel};
use cvqkd_gqi::keyrate::{InferenceMethod, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One sub-channel entry; `t` is the transmittance magnitude `|T|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubchannelEntry {
    pub t: f64,
    pub noise_variance: f64,
}

/// Either one entry applied to every sub-channel or an explicit list of
/// length 1, `m` or `K·m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subchannels {
    Constant(SubchannelEntry),
    List(Vec<SubchannelEntry>),
}

impl Default for Subchannels {
    fn default() -> Self {
        Subchannels::Constant(SubchannelEntry {
            t: 1.0,
            noise_variance: 0.0,
        })
    }
}

impl Subchannels {
    fn entries(&self) -> &[SubchannelEntry] {
        match self {
            Subchannels::Constant(e) => std::slice::from_ref(e),
            Subchannels::List(v) => v,
        }
    }
}

fn d_n() -> usize {
    1024
}
fn d_m() -> usize {
    8
}
fn d_one() -> usize {
    1
}
fn d_unit() -> f64 {
    1.0
}
fn d_mode() -> MeasurementMode {
    MeasurementMode::HomodyneX
}
fn d_z() -> usize {
    4
}
fn d_z_max() -> usize {
    6
}
fn d_p() -> usize {
    4
}
fn d_grid() -> usize {
    4096
}
fn d_offsets() -> usize {
    101
}
fn d_trials() -> usize {
    200
}
fn d_m_list() -> Vec<usize> {
    vec![1, 2, 4, 8]
}
fn d_method() -> InferenceMethod {
    InferenceMethod::Gqi
}
fn d_window_m() -> usize {
    1024
}
fn d_tolerance() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Single carriers per user and trial.
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_m")]
    pub m: usize,
    /// Users sharing the sub-channel list.
    #[serde(rename = "K", default = "d_one")]
    pub k: usize,
    #[serde(default = "d_unit")]
    pub sigma_w0_sq: f64,
    #[serde(default = "d_unit")]
    pub sigma_w_sq: f64,
    #[serde(default)]
    pub subchannels: Subchannels,
    /// Eve is simulated only when this is set.
    #[serde(default)]
    pub eve_noise_variance: Option<f64>,
    #[serde(default = "d_mode")]
    pub mode: MeasurementMode,
    #[serde(default)]
    pub heterodyne_penalty: bool,
    #[serde(rename = "Z", default = "d_z")]
    pub z: usize,
    #[serde(rename = "Z_max", default = "d_z_max")]
    pub z_max: usize,
    #[serde(rename = "P", default = "d_p")]
    pub p: usize,
    #[serde(default = "d_grid")]
    pub grid_points: usize,
    #[serde(default = "d_offsets")]
    pub offsets: usize,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "d_m_list")]
    pub m_list: Vec<usize>,
    #[serde(default = "d_method")]
    pub method: InferenceMethod,
    /// Length at which windows are designed and swept.
    #[serde(default = "d_window_m")]
    pub window_m: usize,
    /// DGQI window; absent means `β ≡ 1`.
    #[serde(default)]
    pub window_coeffs: Option<Vec<f64>>,
    /// Monte-Carlo monotonicity tolerance in standard errors.
    #[serde(default = "d_tolerance")]
    pub tolerance_se: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("every key has a default")
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {msg}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// TOML, or JSON when the extension is `.json` (a `config.json` echo
    /// reruns as is).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| invalid("seed", "missing; pass --seed or set it in the config"))
    }

    pub fn omega(&self) -> f64 {
        self.sigma_w0_sq / self.sigma_w_sq
    }

    pub fn detector(&self) -> Detector {
        Detector {
            mode: self.mode,
            heterodyne_penalty: self.heterodyne_penalty,
        }
    }

    /// Checks every invariant shared by all commands.
    pub fn validate(&self) -> Result<(), CliError> {
        self.seed()?;
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.m == 0 || !self.n.is_multiple_of(self.m) {
            return Err(invalid("m", format!("{} must divide n = {}", self.m, self.n)));
        }
        if self.k == 0 {
            return Err(invalid("K", "must be at least 1"));
        }
        for (key, v) in [("sigma_w0_sq", self.sigma_w0_sq), ("sigma_w_sq", self.sigma_w_sq)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid(key, format!("{v} must be positive")));
            }
        }
        if self.omega().is_nan() || self.omega() < 1.0 {
            return Err(invalid(
                "sigma_w_sq",
                format!("Ω = sigma_w0_sq/sigma_w_sq = {} must be ≥ 1", self.omega()),
            ));
        }
        let entries = self.subchannels.entries();
        let len = entries.len();
        if len != 1 && len != self.m && len != self.k * self.m {
            return Err(invalid(
                "subchannels",
                format!("{len} entries; expected 1, m = {} or K·m = {}", self.m, self.k * self.m),
            ));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&e.t) {
                return Err(invalid("subchannels", format!("entry {i}: t = {} outside [0, 1]", e.t)));
            }
            if !e.noise_variance.is_finite() || e.noise_variance < 0.0 {
                return Err(invalid(
                    "subchannels",
                    format!("entry {i}: noise_variance = {} must be ≥ 0", e.noise_variance),
                ));
            }
        }
        if let Some(v) = self.eve_noise_variance {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid("eve_noise_variance", format!("{v} must be ≥ 0")));
            }
        }
        for (key, v) in [
            ("Z", self.z),
            ("Z_max", self.z_max),
            ("P", self.p),
            ("offsets", self.offsets),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return Err(invalid(key, "must be at least 1"));
            }
        }
        if self.grid_points < cvqkd_gqi::grid::MIN_GRID_POINTS {
            return Err(invalid(
                "grid_points",
                format!("must be at least {}", cvqkd_gqi::grid::MIN_GRID_POINTS),
            ));
        }
        if self.window_m < 4 || !self.window_m.is_multiple_of(2) {
            return Err(invalid("window_m", format!("{} must be even and at least 4", self.window_m)));
        }
        if let Some(c) = &self.window_coeffs {
            if c.iter().any(|v| !v.is_finite()) {
                return Err(invalid("window_coeffs", "coefficients must be finite"));
            }
        }
        if self.tolerance_se.is_nan() || self.tolerance_se < 0.0 {
            return Err(invalid("tolerance_se", "must be ≥ 0"));
        }
        if self.m_list.contains(&0) {
            return Err(invalid("m_list", "entries must be at least 1"));
        }
        Ok(())
    }

    /// The windowed estimator folds bins, so it needs an even block of at least 4.
    pub fn validate_dgqi(&self) -> Result<(), CliError> {
        if self.m < 4 || !self.m.is_multiple_of(2) {
            return Err(invalid("m", format!("{} must be even and at least 4 for DGQI", self.m)));
        }
        Ok(())
    }

    fn subchannel(e: &SubchannelEntry) -> Result<SubChannel, CliError> {
        SubChannel::with_power_gain(e.t * e.t, e.noise_variance)
            .map_err(|err| invalid("subchannels", err))
    }

    /// Logical channel of every user, `m` sub-channels each.
    pub fn logical_channels(&self) -> Result<Vec<LogicalChannel>, CliError> {
        let entries = self.subchannels.entries();
        let subs = (0..self.k * self.m)
            .map(|i| {
                let idx = if entries.len() == self.k * self.m { i } else { i % entries.len() };
                Self::subchannel(&entries[idx])
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(allocate_users(&subs, self.k)?)
    }

    /// Key-rate scenario for user 0.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let entries = self.subchannels.entries();
        let count = if entries.len() == self.k * self.m { self.m } else { entries.len() };
        let subchannels = entries[..count]
            .iter()
            .map(Self::subchannel)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Scenario {
            n: self.n,
            sigma_w0_sq: self.sigma_w0_sq,
            sigma_w_sq: self.sigma_w_sq,
            subchannels,
            eve_noise_variance: self.eve_noise_variance.unwrap_or(0.0),
            detector: self.detector(),
            method: self.method,
            window: self.window_coeffs.clone(),
            z: self.z,
            grid_points: self.grid_points,
            trials: self.trials,
            seed: self.seed()?,
            tolerance_se: self.tolerance_se,
        })
    }
}
