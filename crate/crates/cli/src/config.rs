//! TOML run configuration: schema, parsing and validation.
//!
//! All rates and frequencies are dimensionless ratios to the reference
//! damping rate γ unless the physical-units spectrum mode is selected.
//! Unknown keys are rejected with the parser's line/column diagnostics.

use qdsld_core::{
    CooperativityKind, DotParams, GaussianProfile, ModeSet, PumpParams, WaveguideParams,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SingleSteady,
    Threshold,
    MultiSteady,
    Sweep,
    Spectrum,
    Passive,
    Fit,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Scenario::SingleSteady => "single-steady",
            Scenario::Threshold => "threshold",
            Scenario::MultiSteady => "multi-steady",
            Scenario::Sweep => "sweep",
            Scenario::Spectrum => "spectrum",
            Scenario::Passive => "passive",
            Scenario::Fit => "fit",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotSection {
    pub gamma21: f64,
    pub gamma10: f64,
    #[serde(default)]
    pub gamma20: f64,
    #[serde(default)]
    pub n21: f64,
    #[serde(default)]
    pub n10: f64,
    #[serde(default)]
    pub delta_omega12: f64,
}

impl DotSection {
    pub fn to_params(&self) -> DotParams {
        DotParams {
            gamma21: self.gamma21,
            gamma10: self.gamma10,
            gamma20: self.gamma20,
            n21: self.n21,
            n10: self.n10,
            delta_omega12: self.delta_omega12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub m: u64,
    #[serde(default)]
    pub r: Option<f64>,
}

fn default_one() -> f64 {
    1.0
}

fn default_phases() -> [f64; 6] {
    [0.0; 6]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideSection {
    #[serde(default = "default_one")]
    pub gamma_l: f64,
    #[serde(default = "default_one")]
    pub gamma_r: f64,
    #[serde(default)]
    pub n_l: f64,
    #[serde(default)]
    pub n_r: f64,
    #[serde(default = "default_one")]
    pub length: f64,
    #[serde(default = "default_one")]
    pub mode_spacing: f64,
    #[serde(default)]
    pub omega_bar: f64,
    #[serde(default = "default_phases")]
    pub phases: [f64; 6],
}

impl Default for WaveguideSection {
    fn default() -> Self {
        Self {
            gamma_l: 1.0,
            gamma_r: 1.0,
            n_l: 0.0,
            n_r: 0.0,
            length: 1.0,
            mode_spacing: 1.0,
            omega_bar: 0.0,
            phases: [0.0; 6],
        }
    }
}

impl WaveguideSection {
    pub fn to_params(&self) -> WaveguideParams {
        WaveguideParams {
            gamma_l: self.gamma_l,
            gamma_r: self.gamma_r,
            n_l: self.n_l,
            n_r: self.n_r,
            length: self.length,
            mode_spacing: self.mode_spacing,
            omega_bar: self.omega_bar,
            phases: self.phases,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleMode {
    pub g: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl ProfileSection {
    pub fn to_profile(self) -> Result<GaussianProfile, CliError> {
        GaussianProfile::new(self.amplitude, self.center, self.width)
            .map_err(|e| CliError::config(format!("modes.profile: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CooperativityChoice {
    #[default]
    Detuned,
    Resonant,
}

impl From<CooperativityChoice> for CooperativityKind {
    fn from(c: CooperativityChoice) -> Self {
        match c {
            CooperativityChoice::Detuned => CooperativityKind::Detuned,
            CooperativityChoice::Resonant => CooperativityKind::Resonant,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    /// Explicit detunings, mutually exclusive with `count`/`start`/`step`.
    #[serde(default)]
    pub detunings: Option<Vec<f64>>,
    /// Explicit couplings; requires `detunings`.
    #[serde(default)]
    pub couplings: Option<Vec<f64>>,
    /// Uniform detuning grid: `count` modes from `start` with `step`.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    /// Gaussian coupling profile evaluated on the detuning grid.
    #[serde(default)]
    pub profile: Option<ProfileSection>,
    #[serde(default)]
    pub cooperativity: CooperativityChoice,
}

impl ModesSection {
    pub fn to_modes(&self) -> Result<ModeSet, CliError> {
        let detunings: Vec<f64> =
            match (&self.detunings, self.count) {
                (Some(d), None) => d.clone(),
                (None, Some(count)) => {
                    let start = self
                        .start
                        .ok_or_else(|| CliError::config("modes.start required with modes.count"))?;
                    let step = self
                        .step
                        .ok_or_else(|| CliError::config("modes.step required with modes.count"))?;
                    if count == 0 {
                        return Err(CliError::config("modes.count must be >= 1"));
                    }
                    (0..count).map(|i| start + step * i as f64).collect()
                }
                (Some(_), Some(_)) => return Err(CliError::config(
                    "modes: give either explicit detunings or a count/start/step grid, not both",
                )),
                (None, None) => {
                    return Err(CliError::config(
                        "modes: missing detunings (explicit list or count/start/step grid)",
                    ))
                }
            };
        match (&self.couplings, &self.profile) {
            (Some(c), None) => ModeSet::new(detunings, c.clone())
                .map_err(|e| CliError::config(format!("modes: {e}"))),
            (None, Some(p)) => ModeSet::gaussian(detunings, &p.to_profile()?)
                .map_err(|e| CliError::config(format!("modes: {e}"))),
            (Some(_), Some(_)) => Err(CliError::config(
                "modes: give either couplings or a profile, not both",
            )),
            (None, None) => Err(CliError::config("modes: missing couplings or profile")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub cases: Vec<SingleMode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiSteadySection {
    pub r_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSection {
    pub fn to_grid(self, name: &str) -> Result<Vec<f64>, CliError> {
        if self.points < 2 || !(self.min < self.max) {
            return Err(CliError::config(format!(
                "{name}: need points >= 2 and min < max"
            )));
        }
        Ok((0..self.points)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitsChoice {
    #[default]
    Arbitrary,
    Physical,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinewidthChoice {
    /// Per-mode gain-narrowed linewidths from the stationary inversion.
    #[default]
    Computed,
    /// One fixed width parameter for all modes (units of γ).
    Fixed(f64),
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub grid: GridSection,
    #[serde(default)]
    pub units: UnitsChoice,
    #[serde(default)]
    pub linewidth: LinewidthChoice,
    /// Also emit the continuum convolution of the photon-number profile.
    #[serde(default = "default_true")]
    pub continuum: bool,
}

fn default_draws() -> usize {
    100
}

fn default_seed() -> u64 {
    20190516
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassiveSection {
    pub grid: GridSection,
    pub occupation: f64,
    #[serde(default)]
    pub units: UnitsChoice,
    /// Number of random (ω, γ^α, φ^α) draws for the unitarity check.
    #[serde(default = "default_draws")]
    pub unitarity_draws: usize,
    /// Seed of the deterministic draw sequence.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSource {
    Csv,
    SyntheticGaussian,
    SyntheticModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub source: FitSource,
    #[serde(default)]
    pub csv_path: Option<String>,
    /// Grid for synthetic sources.
    #[serde(default)]
    pub grid: Option<GridSection>,
    /// Seed profile of a synthetic source (S0/G0, ω̄, σ).
    #[serde(default)]
    pub seed_profile: Option<ProfileSection>,
    /// Amplitude scale applied to synthetic model data.
    #[serde(default = "default_one")]
    pub scale: f64,
    /// Run the direct Gaussian fit.
    #[serde(default = "default_true")]
    pub gaussian: bool,
    /// Run the forward-model cooperativity fit.
    #[serde(default = "default_true")]
    pub model: bool,
    /// Initial guess for the model fit; defaults to the Gaussian-fit
    /// parameters (or the seed profile for synthetic sources).
    #[serde(default)]
    pub model_init: Option<ProfileSection>,
    #[serde(default)]
    pub model_init_scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub dot: DotSection,
    pub pump: PumpSection,
    #[serde(default)]
    pub waveguide: Option<WaveguideSection>,
    #[serde(default)]
    pub mode: Option<SingleMode>,
    #[serde(default)]
    pub modes: Option<ModesSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub threshold: Option<ThresholdSection>,
    #[serde(default)]
    pub multi_steady: Option<MultiSteadySection>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default)]
    pub passive: Option<PassiveSection>,
    #[serde(default)]
    pub fit: Option<FitSection>,
}

impl RunConfig {
    pub fn waveguide_params(&self) -> WaveguideParams {
        self.waveguide.clone().unwrap_or_default().to_params()
    }

    pub fn pump_params(&self, scenario_needs_r: bool) -> Result<PumpParams, CliError> {
        let r = match (self.pump.r, scenario_needs_r) {
            (Some(r), _) => r,
            (None, false) => 0.0,
            (None, true) => {
                return Err(CliError::config(
                    "pump.r is required for this scenario".to_string(),
                ))
            }
        };
        Ok(PumpParams::new(r, self.pump.m))
    }

    fn require<'a, T>(
        field: &'a Option<T>,
        name: &str,
        scenario: Scenario,
    ) -> Result<&'a T, CliError> {
        field.as_ref().ok_or_else(|| {
            CliError::config(format!(
                "missing required section [{name}] for scenario {scenario}"
            ))
        })
    }

    /// Scenario-specific presence checks and basic invariants.
    pub fn validate(&self) -> Result<(), CliError> {
        self.dot
            .to_params()
            .validate()
            .map_err(|e| CliError::config(format!("dot: {e}")))?;
        self.waveguide_params()
            .validate()
            .map_err(|e| CliError::config(format!("waveguide: {e}")))?;
        if self.pump.m < 1 {
            return Err(CliError::config("pump.m must be >= 1"));
        }
        if let Some(r) = self.pump.r {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(CliError::config("pump.r must be finite and >= 0"));
            }
        }
        match self.scenario {
            Scenario::SingleSteady => {
                Self::require(&self.mode, "mode", self.scenario)?;
                self.pump_params(true)?;
            }
            Scenario::Threshold => {
                let t = Self::require(&self.threshold, "threshold", self.scenario)?;
                if t.cases.is_empty() {
                    return Err(CliError::config("threshold.cases must not be empty"));
                }
            }
            Scenario::Sweep => {
                let s = Self::require(&self.sweep, "sweep", self.scenario)?;
                if s.points < 2 || !(s.r_min < s.r_max) || s.r_min < 0.0 {
                    return Err(CliError::config(
                        "sweep: need points >= 2 and 0 <= r_min < r_max",
                    ));
                }
                if self.mode.is_none() && self.modes.is_none() {
                    return Err(CliError::config(
                        "sweep: need [mode] (single mode) or [modes] (multimode)",
                    ));
                }
                if let Some(m) = &self.modes {
                    m.to_modes()?;
                }
            }
            Scenario::MultiSteady => {
                let ms = Self::require(&self.multi_steady, "multi_steady", self.scenario)?;
                if ms.r_values.is_empty() {
                    return Err(CliError::config("multi_steady.r_values must not be empty"));
                }
                Self::require(&self.modes, "modes", self.scenario)?.to_modes()?;
            }
            Scenario::Spectrum => {
                let s = Self::require(&self.spectrum, "spectrum", self.scenario)?;
                s.grid.to_grid("spectrum.grid")?;
                if let LinewidthChoice::Fixed(v) = s.linewidth {
                    if !(v > 0.0) {
                        return Err(CliError::config(
                            "spectrum.linewidth fixed value must be > 0",
                        ));
                    }
                }
                Self::require(&self.modes, "modes", self.scenario)?.to_modes()?;
                self.pump_params(true)?;
            }
            Scenario::Passive => {
                let p = Self::require(&self.passive, "passive", self.scenario)?;
                p.grid.to_grid("passive.grid")?;
                if p.occupation < 0.0 {
                    return Err(CliError::config("passive.occupation must be >= 0"));
                }
                Self::require(&self.modes, "modes", self.scenario)?.to_modes()?;
            }
            Scenario::Fit => {
                let f = Self::require(&self.fit, "fit", self.scenario)?;
                match f.source {
                    FitSource::Csv => {
                        if f.csv_path.is_none() {
                            return Err(CliError::config(
                                "fit.csv_path required for source = \"csv\"",
                            ));
                        }
                    }
                    FitSource::SyntheticGaussian | FitSource::SyntheticModel => {
                        if f.grid.is_none() || f.seed_profile.is_none() {
                            return Err(CliError::config(
                                "fit.grid and fit.seed_profile required for synthetic sources",
                            ));
                        }
                    }
                }
                if !f.gaussian && !f.model {
                    return Err(CliError::config(
                        "fit: enable at least one of gaussian/model",
                    ));
                }
                if f.model {
                    self.pump_params(true)?;
                }
            }
        }
        Ok(())
    }
}

/// Parse and validate a config file. Parse errors carry the TOML
/// line/column; validation errors name the offending field.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::config(format!(
            "{}: empty config; required keys: scenario, [dot] (gamma21, gamma10), [pump] (m), \
             plus the scenario section",
            path.display()
        )));
    }
    let config: RunConfig =
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
