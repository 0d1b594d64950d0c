//! Experiment configuration documents.
//!
//! Every block and key has a default; unknown keys are rejected. Parsing
//! validates the whole document, including the sweep plan it describes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::table::Format;
use crate::chain::{ImpurityKind, ImpuritySpec};
use crate::error::Error;
use crate::fidelity::{AmplitudeGauge, Omega2Convention, StateTag};
use crate::propagator::{KickSchedule, U0Convention};
use crate::sweep::{regular_grid, SweepAxis};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}{}: {message}", key.as_deref().map(|k| format!(" (key `{k}`)")).unwrap_or_default())]
    Parse {
        line: usize,
        column: usize,
        key: Option<String>,
        message: String,
    },

    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error(transparent)]
    Core(#[from] Error),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_owned(),
            message: message.into(),
        }
    }

    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "parse",
            ConfigError::Invalid { .. } => "invalid",
            ConfigError::Core(_) => "simulation",
            ConfigError::Io { .. } => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Evolve,
    Sweep,
    Periodogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainBlock {
    pub n_sites: usize,
    pub j1: f64,
    pub j2: f64,
    pub b_field: f64,
}

impl Default for ChainBlock {
    fn default() -> Self {
        Self {
            n_sites: 10,
            j1: 1.0,
            j2: -1.0,
            b_field: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveBlock {
    pub e0: f64,
    pub e1: f64,
    pub tau: f64,
    pub n_kicks: usize,
    pub u0_convention: U0Convention,
    pub omega2_convention: Omega2Convention,
    pub amplitude_gauge: AmplitudeGauge,
}

impl Default for DriveBlock {
    fn default() -> Self {
        Self {
            e0: 0.1,
            e1: 1.0,
            tau: 2.0,
            n_kicks: 500,
            u0_convention: U0Convention::default(),
            omega2_convention: Omega2Convention::default(),
            amplitude_gauge: AmplitudeGauge::default(),
        }
    }
}

/// Impurity given either by a strength on the ratio ramp or by explicit
/// ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpurityBlock {
    pub kind: ImpurityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_nn: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_nnn_strong: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_nnn_weak: Option<f64>,
    /// Slope of the weakened ratios along the strength ramp.
    #[serde(default = "default_slope")]
    pub slope: f64,
}

fn default_slope() -> f64 {
    0.25
}

impl ImpurityBlock {
    pub fn site_for(&self, n_sites: usize) -> usize {
        self.site.unwrap_or_else(|| ImpuritySpec::default_site(n_sites))
    }

    /// Spec at `strength` on the ramp, ignoring explicit ratios.
    pub fn at_strength(&self, n_sites: usize, strength: f64) -> ImpuritySpec {
        ImpuritySpec::from_strength(self.kind, self.site_for(n_sites), strength, self.slope)
    }

    pub fn resolve(&self, n_sites: usize) -> Result<ImpuritySpec, ConfigError> {
        let ratios = [self.ratio_nn, self.ratio_nnn_strong, self.ratio_nnn_weak];
        let spec = match (self.strength, ratios) {
            (Some(s), [None, None, None]) => self.at_strength(n_sites, s),
            (None, [Some(nn), Some(strong), Some(weak)]) => ImpuritySpec {
                kind: self.kind,
                site: self.site_for(n_sites),
                ratio_nn: nn,
                ratio_nnn_strong: strong,
                ratio_nnn_weak: weak,
            },
            (None, [None, None, None]) => self.at_strength(n_sites, 1.0),
            _ => {
                return Err(ConfigError::invalid(
                    "impurity",
                    "give either `strength` or all three ratios",
                ))
            }
        };
        spec.validate(n_sites)?;
        Ok(spec)
    }
}

/// Inclusive range `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    pub fn values(&self) -> Result<Vec<f64>, Error> {
        regular_grid(self.start, self.stop, self.step)
    }
}

/// One curve of a sweep: overrides applied to the chain template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impurity_strength: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunBlock {
    pub mode: RunMode,
    pub states: Vec<StateTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<SweepAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_range: Option<GridRange>,
    pub tau_range: GridRange,
    pub m_max: usize,
    pub continuous_t_max: usize,
    /// Unkicked sweep points evolve continuously over integer times.
    pub continuous_when_unkicked: bool,
    pub seed: u64,
    pub workers: usize,
    /// Monte Carlo samples per point for the conformance report.
    pub samples: usize,
    pub curves: Vec<Curve>,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            mode: RunMode::default(),
            states: vec![StateTag::Omega0],
            axis: None,
            grid: None,
            grid_range: None,
            tau_range: GridRange {
                start: 0.1,
                stop: 10.0,
                step: 0.1,
            },
            m_max: 500,
            continuous_t_max: 5000,
            continuous_when_unkicked: true,
            seed: 0,
            workers: 1,
            samples: 4000,
            curves: Vec::new(),
        }
    }
}

impl RunBlock {
    pub fn grid_values(&self) -> Result<Option<Vec<f64>>, ConfigError> {
        match (&self.grid, &self.grid_range) {
            (Some(_), Some(_)) => Err(ConfigError::invalid("run.grid", "give `grid` or `grid_range`, not both")),
            (Some(g), None) => Ok(Some(g.clone())),
            (None, Some(r)) => Ok(Some(r.values()?)),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub format: Format,
    pub physical_time_column: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            physical_time_column: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub chain: ChainBlock,
    pub drive: DriveBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impurity: Option<ImpurityBlock>,
    pub run: RunBlock,
    pub output: OutputBlock,
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_and_column(text, span.start))
            .unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            key: key_at(text, line),
            message: e.message().to_owned(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// TOML rendering that [`parse_config`] reads back unchanged.
pub fn serialize_config(config: &ExperimentConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

fn line_and_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn key_at(text: &str, line: usize) -> Option<String> {
    let l = text.lines().nth(line.checked_sub(1)?)?;
    let (key, _) = l.split_once('=')?;
    let key = key.trim();
    (!key.is_empty()).then(|| key.to_owned())
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, "must be finite"))
    }
}

impl ExperimentConfig {
    /// Re-checks every numerical constraint of the core types.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.chain;
        crate::basis::ExcitationBasis::new(c.n_sites, 0)?;
        if c.n_sites > crate::basis::MAX_SITES {
            return Err(Error::TooManySites(c.n_sites).into());
        }
        finite("chain.j1", c.j1)?;
        finite("chain.j2", c.j2)?;
        finite("chain.b_field", c.b_field)?;

        let d = &self.drive;
        finite("drive.e0", d.e0)?;
        finite("drive.e1", d.e1)?;
        KickSchedule::new(d.tau, d.e0, d.e1, d.n_kicks)?;

        if let Some(imp) = &self.impurity {
            imp.resolve(c.n_sites)?;
        }

        let r = &self.run;
        if r.states.is_empty() {
            return Err(ConfigError::invalid("run.states", "at least one state is required"));
        }
        for (i, s) in r.states.iter().enumerate() {
            if r.states[..i].contains(s) {
                return Err(ConfigError::invalid("run.states", format!("{s} listed twice")));
            }
        }
        if r.states.iter().any(|&s| s != StateTag::Omega0) && c.n_sites < 4 {
            return Err(Error::ChainTooShortForPairs(c.n_sites).into());
        }
        if r.workers == 0 {
            return Err(ConfigError::invalid("run.workers", "must be at least 1"));
        }
        if r.samples == 0 {
            return Err(ConfigError::invalid("run.samples", "must be at least 1"));
        }
        for (i, curve) in r.curves.iter().enumerate() {
            if r.curves[..i].iter().any(|o| o.label == curve.label) {
                return Err(ConfigError::invalid("run.curves", format!("label `{}` repeated", curve.label)));
            }
            if let Some(e1) = curve.e1 {
                finite("run.curves.e1", e1)?;
            }
            if let Some(s) = curve.impurity_strength {
                let imp = self.impurity.as_ref().ok_or_else(|| {
                    ConfigError::invalid("run.curves.impurity_strength", "needs an [impurity] block")
                })?;
                imp.at_strength(c.n_sites, s).validate(c.n_sites)?;
            }
        }

        match r.mode {
            RunMode::Evolve => {}
            RunMode::Periodogram => {
                if d.n_kicks + 1 < 4 {
                    return Err(Error::SeriesTooShort(d.n_kicks + 1).into());
                }
            }
            RunMode::Sweep => {
                for plan in super::sweep_plans(self)? {
                    plan.1.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Impurity spec of the base chain, if any.
    pub fn impurity_spec(&self) -> Result<Option<ImpuritySpec>, ConfigError> {
        self.impurity
            .as_ref()
            .map(|b| b.resolve(self.chain.n_sites))
            .transpose()
    }

    pub fn require_axis(&self) -> Result<SweepAxis, ConfigError> {
        self.run
            .axis
            .ok_or_else(|| ConfigError::invalid("run.axis", "sweep mode needs an axis"))
    }
}
