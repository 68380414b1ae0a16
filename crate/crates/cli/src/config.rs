//! TOML experiment files.
//!
//! ```toml
//! name = "reference-parameters"
//! repetitions = 20
//!
//! [session]
//! r = 3.35
//! gamma_t = 0.0
//! n_rounds = 20000
//!
//! [session.binning]
//! delta = 0.125
//!
//! [session.eve]
//! kind = "intercept-resend-squeezed"
//!
//! [sweep]
//! parameter = "gamma_t"
//! values = [1e-4, 1e-3, 1e-2]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sqkd_core::channel::{DEFAULT_DOMINANCE_FACTOR, DEFAULT_S_MARGIN};
use sqkd_core::protocol::{
    Alphabet, AmplifierSetting, BinningScheme, DetectionSettings, EveStrategy, SessionConfig, ShiftModel, TapScan,
};

pub const DEFAULT_R: f64 = 3.35;
pub const DEFAULT_DELTA: f64 = 0.125;
pub const DEFAULT_ROUNDS: usize = 10_000;
pub const DEFAULT_CHECK_FRACTION: f64 = 0.3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinningSpec {
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Defaults to `e^r/4`.
    pub half_range: Option<f64>,
    #[serde(default)]
    pub alphabet: Alphabet,
    /// Permit `delta >= 1/2`.
    #[serde(default)]
    pub insecure: bool,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec {
            delta: DEFAULT_DELTA,
            half_range: None,
            alphabet: Alphabet::Identity,
            insecure: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    pub baseline_error: Option<f64>,
    #[serde(default = "default_multiplier")]
    pub threshold_multiplier: f64,
    #[serde(default = "default_significance")]
    pub significance: f64,
}

fn default_multiplier() -> f64 {
    DetectionSettings::default().threshold_multiplier
}

fn default_significance() -> f64 {
    DetectionSettings::default().significance
}

impl Default for DetectionSpec {
    fn default() -> Self {
        DetectionSpec {
            baseline_error: None,
            threshold_multiplier: default_multiplier(),
            significance: default_significance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSpec {
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default)]
    pub gamma_t: f64,
    #[serde(default = "default_rounds")]
    pub n_rounds: usize,
    #[serde(default = "default_check_fraction")]
    pub check_fraction: f64,
    #[serde(default)]
    pub binning: BinningSpec,
    pub amplifier: Option<AmplifierSetting>,
    #[serde(default)]
    pub detection: DetectionSpec,
    #[serde(default)]
    pub eve: EveStrategy,
    /// Used when no seed is given on the command line.
    pub seed: Option<u64>,
}

fn default_r() -> f64 {
    DEFAULT_R
}

fn default_rounds() -> usize {
    DEFAULT_ROUNDS
}

fn default_check_fraction() -> f64 {
    DEFAULT_CHECK_FRACTION
}

impl Default for SessionSpec {
    fn default() -> Self {
        SessionSpec {
            r: DEFAULT_R,
            gamma_t: 0.0,
            n_rounds: DEFAULT_ROUNDS,
            check_fraction: DEFAULT_CHECK_FRACTION,
            binning: BinningSpec::default(),
            amplifier: None,
            detection: DetectionSpec::default(),
            eve: EveStrategy::None,
            seed: None,
        }
    }
}

/// Numeric session fields a sweep may vary.
pub const SWEEP_PARAMETERS: &[&str] = &[
    "r",
    "gamma_t",
    "n_rounds",
    "check_fraction",
    "binning.delta",
    "binning.half_range",
    "amplifier.gain",
    "detection.baseline_error",
    "detection.threshold_multiplier",
    "eve.reflection",
    "eve.r_eve",
];

impl SessionSpec {
    pub fn build(&self, seed: u64) -> Result<SessionConfig, ConfigError> {
        let b = &self.binning;
        if !b.insecure && !(b.delta < 0.5) {
            return invalid(format!("delta must be < 1/2 (got {}); set binning.insecure = true for attack studies", b.delta));
        }
        let half_range = b.half_range.unwrap_or_else(|| BinningScheme::default_half_range(self.r));
        let binning = BinningScheme::insecure(b.delta, half_range)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .with_alphabet(b.alphabet);
        let config = SessionConfig {
            r: self.r,
            binning,
            gamma_t: self.gamma_t,
            amplifier: self.amplifier,
            n_rounds: self.n_rounds,
            check_fraction: self.check_fraction,
            detection: DetectionSettings {
                baseline_error: self.detection.baseline_error,
                threshold_multiplier: self.detection.threshold_multiplier,
                significance: self.detection.significance,
            },
            eve: self.eve,
            seed,
        };
        config.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }

    /// Copy with the numeric field at `path` set to `value`.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<SessionSpec, ConfigError> {
        let mut s = self.clone();
        match path {
            "r" => s.r = value,
            "gamma_t" => s.gamma_t = value,
            "n_rounds" => s.n_rounds = as_count(path, value)?,
            "check_fraction" => s.check_fraction = value,
            "binning.delta" => s.binning.delta = value,
            "binning.half_range" => s.binning.half_range = Some(value),
            "amplifier.gain" => match s.amplifier.as_mut() {
                Some(a) => a.gain = value,
                None => return invalid("sweep over amplifier.gain needs a [session.amplifier] table"),
            },
            "detection.baseline_error" => s.detection.baseline_error = Some(value),
            "detection.threshold_multiplier" => s.detection.threshold_multiplier = value,
            "eve.reflection" => match s.eve {
                EveStrategy::BeamSplitterTap { .. } => s.eve = EveStrategy::BeamSplitterTap { reflection: value },
                _ => return invalid("sweep over eve.reflection needs eve.kind = \"beam-splitter-tap\""),
            },
            "eve.r_eve" => match s.eve {
                EveStrategy::InterceptResendSqueezed { .. } => {
                    s.eve = EveStrategy::InterceptResendSqueezed { r_eve: Some(value) }
                }
                _ => return invalid("sweep over eve.r_eve needs eve.kind = \"intercept-resend-squeezed\""),
            },
            other => {
                return invalid(format!(
                    "sweep parameter '{other}' is not a numeric session field; expected one of {}",
                    SWEEP_PARAMETERS.join(", ")
                ))
            }
        }
        Ok(s)
    }
}

fn as_count(path: &str, value: f64) -> Result<usize, ConfigError> {
    if value >= 1.0 && value.fract() == 0.0 && value.is_finite() {
        Ok(value as usize)
    } else {
        invalid(format!("{path} must be a positive integer, got {value}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    /// Explicit values, or a range given by `from`, `to`, `points`, `scale`.
    pub values: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub scale: Option<SweepScale>,
}

impl SweepSpec {
    pub fn resolved_values(&self) -> Result<Vec<f64>, ConfigError> {
        let values = match (&self.values, self.from, self.to, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => {
                let scale = self.scale.clone().unwrap_or(SweepScale::Linear);
                if scale == SweepScale::Log && !(a > 0.0 && b > 0.0) {
                    return invalid("log sweep needs from > 0 and to > 0");
                }
                (0..n)
                    .map(|k| {
                        let f = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                        match scale {
                            SweepScale::Linear => a + f * (b - a),
                            SweepScale::Log => (a.ln() + f * (b.ln() - a.ln())).exp(),
                        }
                    })
                    .collect()
            }
            _ => return invalid("sweep needs either 'values' or all of 'from', 'to', 'points' (>= 1)"),
        };
        if values.is_empty() {
            return invalid("sweep values must be non-empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("sweep values must be finite");
        }
        Ok(values)
    }
}

/// Loss-budget settings reported alongside each session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    #[serde(default = "default_s_margin")]
    pub s_margin: f64,
    #[serde(default = "default_dominance")]
    pub dominance_factor: f64,
    /// Refuse to run sessions whose `gamma_t` exceeds the loss budget.
    #[serde(default)]
    pub enforce_budget: bool,
}

fn default_s_margin() -> f64 {
    DEFAULT_S_MARGIN
}

fn default_dominance() -> f64 {
    DEFAULT_DOMINANCE_FACTOR
}

impl Default for LinkSpec {
    fn default() -> Self {
        LinkSpec {
            s_margin: DEFAULT_S_MARGIN,
            dominance_factor: DEFAULT_DOMINANCE_FACTOR,
            enforce_budget: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SMax {
    /// `1/σ = e^{r}`.
    InverseSigma,
    /// The binning half-range.
    HalfRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapScanSpec {
    #[serde(default = "default_tap_points")]
    pub points: usize,
    #[serde(default = "default_r_min")]
    pub reflection_min: f64,
    #[serde(default = "default_r_max")]
    pub reflection_max: f64,
    #[serde(default = "default_s_max")]
    pub s_max: SMax,
    #[serde(default)]
    pub shift_model: ShiftModel,
}

fn default_tap_points() -> usize {
    100
}

fn default_r_min() -> f64 {
    1e-6
}

fn default_r_max() -> f64 {
    1.0 - 1e-6
}

fn default_s_max() -> SMax {
    SMax::InverseSigma
}

impl Default for TapScanSpec {
    fn default() -> Self {
        TapScanSpec {
            points: default_tap_points(),
            reflection_min: default_r_min(),
            reflection_max: default_r_max(),
            s_max: default_s_max(),
            shift_model: ShiftModel::default(),
        }
    }
}

impl TapScanSpec {
    pub fn build(&self, session: &SessionSpec) -> Result<TapScan, ConfigError> {
        if !(self.reflection_min > 0.0 && self.reflection_min < self.reflection_max && self.reflection_max < 1.0) {
            return invalid("tap scan needs 0 < reflection_min < reflection_max < 1");
        }
        if self.points == 0 {
            return invalid("tap scan needs points >= 1");
        }
        let s_max = match self.s_max {
            SMax::InverseSigma => session.r.exp(),
            SMax::HalfRange => session
                .binning
                .half_range
                .unwrap_or_else(|| BinningScheme::default_half_range(session.r)),
        };
        Ok(TapScan {
            delta: session.binning.delta,
            r: session.r,
            s_max,
            points: self.points,
            reflection_min: self.reflection_min,
            reflection_max: self.reflection_max,
            shift_model: self.shift_model,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub session: SessionSpec,
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub link: LinkSpec,
    #[serde(default)]
    pub tap_scan: TapScanSpec,
    /// Output directory; `--out` takes precedence.
    pub output: Option<PathBuf>,
}

fn default_repetitions() -> usize {
    1
}

impl ExperimentSpec {
    /// Checks every invariant that can be checked without running anything.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return invalid("name must be non-empty");
        }
        if self.repetitions == 0 {
            return invalid("repetitions must be >= 1");
        }
        if !(self.link.s_margin > 0.0 && self.link.s_margin < 1.0) {
            return invalid(format!("link.s_margin must be in (0, 1), got {}", self.link.s_margin));
        }
        if !(self.link.dominance_factor > 0.0) {
            return invalid("link.dominance_factor must be > 0");
        }
        self.session.build(0)?;
        if let Some(sweep) = &self.sweep {
            for v in sweep.resolved_values()? {
                self.session.with_parameter(&sweep.parameter, v)?.build(0)?;
            }
        }
        self.tap_scan.build(&self.session)?;
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }
}

pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentSpec, ConfigError> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_path_buf(),
        message: with_line_number(text, &e),
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

fn with_line_number(text: &str, err: &toml::de::Error) -> String {
    let message = err.message().trim().to_string();
    match err.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {message}")
        }
        None => message,
    }
}
