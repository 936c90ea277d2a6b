//! Parameter containers and the derived quantities shared by all solvers:
//! level decay rates, cooperativity strength, Gaussian coupling profiles
//! and gain thresholds.
//!
//! All rates are expressed in units of a single reference rate `γ` (the
//! external damping scale); callers that work with dimensionless ratios
//! simply pass `gamma_ref = 1`.

use crate::error::{Error, Result};

/// Per-quantum-dot decay rates, bath occupations and the deviation of the
/// dot transition frequency from the ensemble mean.
///
/// `gamma21` is the decay rate of the lasing transition, `gamma10` feeds
/// the upper lasing level, `gamma20` is the back-leak of the pump
/// transition. `n21`/`n10` are the thermal occupations of the respective
/// baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotParams {
    pub gamma21: f64,
    pub gamma10: f64,
    pub gamma20: f64,
    pub n21: f64,
    pub n10: f64,
    pub delta_omega12: f64,
}

impl DotParams {
    /// Dot with bare decay rates, vacuum baths and no frequency deviation.
    pub fn bare(gamma21: f64, gamma10: f64) -> Self {
        Self {
            gamma21,
            gamma10,
            gamma20: 0.0,
            n21: 0.0,
            n10: 0.0,
            delta_omega12: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma21", self.gamma21),
            ("gamma10", self.gamma10),
            ("gamma20", self.gamma20),
            ("n21", self.n21),
            ("n10", self.n10),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "dot.{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !self.delta_omega12.is_finite() {
            return Err(Error::InvalidParameter(
                "dot.delta_omega12 must be finite".into(),
            ));
        }
        Ok(())
    }

    /// True when the simplifications behind the closed-form solutions hold:
    /// vacuum baths and no pump back-leak.
    pub fn is_simplified(&self) -> bool {
        self.n21 == 0.0 && self.n10 == 0.0 && self.gamma20 == 0.0
    }
}

/// External damping rates, input occupations and waveguide geometry.
///
/// `phases` are the six channel phases of the facet beam splitters; only
/// channels 1, 2, 4 and 6 couple to the waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideParams {
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub n_l: f64,
    pub n_r: f64,
    pub length: f64,
    pub mode_spacing: f64,
    pub omega_bar: f64,
    pub phases: [f64; 6],
}

impl WaveguideParams {
    /// Symmetric vacuum-input waveguide with equal external damping `gamma`
    /// and unit geometry.
    pub fn symmetric(gamma: f64) -> Self {
        Self {
            gamma_l: gamma,
            gamma_r: gamma,
            n_l: 0.0,
            n_r: 0.0,
            length: 1.0,
            mode_spacing: 1.0,
            omega_bar: 0.0,
            phases: [0.0; 6],
        }
    }

    /// Mean external damping rate `γ^lr = (γ^l + γ^r)/2`.
    pub fn gamma_lr(&self) -> f64 {
        0.5 * (self.gamma_l + self.gamma_r)
    }

    /// Thermal photon inflow `n^l γ^l + n^r γ^r`.
    pub fn input_flux(&self) -> f64 {
        self.n_l * self.gamma_l + self.n_r * self.gamma_r
    }

    pub fn is_vacuum_input(&self) -> bool {
        self.n_l == 0.0 && self.n_r == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_l", self.gamma_l),
            ("gamma_r", self.gamma_r),
            ("n_l", self.n_l),
            ("n_r", self.n_r),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "waveguide.{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.mode_spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waveguide.mode_spacing must be > 0, got {}",
                self.mode_spacing
            )));
        }
        if !(self.length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waveguide.length must be > 0, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

/// Incoherent pump rate and number of quantum dots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpParams {
    pub r: f64,
    pub m: u64,
}

impl PumpParams {
    pub fn new(r: f64, m: u64) -> Self {
        Self { r, m }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pump.r must be finite and >= 0, got {}",
                self.r
            )));
        }
        if self.m < 1 {
            return Err(Error::InvalidParameter("pump.m must be >= 1".into()));
        }
        Ok(())
    }
}

/// `N` field modes with strictly increasing detunings and real,
/// non-negative couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    detunings: Vec<f64>,
    couplings: Vec<f64>,
}

impl ModeSet {
    pub fn new(detunings: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if detunings.is_empty() {
            return Err(Error::InvalidParameter("modes: need N >= 1".into()));
        }
        if detunings.len() != couplings.len() {
            return Err(Error::DimensionMismatch(format!(
                "modes: {} detunings vs {} couplings",
                detunings.len(),
                couplings.len()
            )));
        }
        if detunings.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "modes: detunings must be strictly increasing".into(),
            ));
        }
        if couplings.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidParameter(
                "modes: couplings must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            detunings,
            couplings,
        })
    }

    /// Single mode at detuning `delta` with coupling `g`.
    pub fn single(g: f64, delta: f64) -> Result<Self> {
        Self::new(vec![delta], vec![g])
    }

    /// Modes on the given detuning grid with couplings drawn from a
    /// Gaussian profile.
    pub fn gaussian(detunings: Vec<f64>, profile: &GaussianProfile) -> Result<Self> {
        profile.validate()?;
        let couplings = detunings
            .iter()
            .map(|&d| gaussian_coupling(d, profile))
            .collect();
        Self::new(detunings, couplings)
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }
}

/// One Gaussian profile `amplitude * exp(-(x - center)^2 / (2 width^2))`
/// used for couplings, cooperativity strengths and spectra alike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianProfile {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        let p = Self {
            amplitude,
            center,
            width,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian width must be > 0, got {}",
                self.width
            )));
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidParameter(
                "gaussian center must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Profile value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

/// Level depopulation rates `Γ_m`, coherence decay rates `Γ_mn` and the
/// total transverse rate `Γ = Γ_21 + γ^lr`.
///
/// Underscored fields are the derived `Γ` rates; the bare dot rates live
/// in [`DotParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma_0: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub gamma_21: f64,
    pub gamma_20: f64,
    pub gamma_10: f64,
    pub gamma_lr: f64,
    pub total: f64,
}

/// Assemble the derived decay rates:
/// `Γ_0 = γ_10(n_10+1) + γ_20 + R`, `Γ_1 = γ_21(n_21+1) + γ_10 n_10`,
/// `Γ_2 = γ_21 n_21 + R`, `Γ_mn = (Γ_m + Γ_n)/2`, `Γ = Γ_21 + γ^lr`.
pub fn decay_rates(dot: &DotParams, pump: &PumpParams, wg: &WaveguideParams) -> DecayRates {
    let gamma_0 = dot.gamma10 * (dot.n10 + 1.0) + dot.gamma20 + pump.r;
    let gamma_1 = dot.gamma21 * (dot.n21 + 1.0) + dot.gamma10 * dot.n10;
    let gamma_2 = dot.gamma21 * dot.n21 + pump.r;
    let gamma_lr = wg.gamma_lr();
    let gamma_21 = 0.5 * (gamma_2 + gamma_1);
    DecayRates {
        gamma_0,
        gamma_1,
        gamma_2,
        gamma_21,
        gamma_20: 0.5 * (gamma_2 + gamma_0),
        gamma_10: 0.5 * (gamma_1 + gamma_0),
        gamma_lr,
        total: gamma_21 + gamma_lr,
    }
}

/// Cooperativity strength `G = 2 g² Γ / (γ (Δ² + Γ²))`.
///
/// The grouping puts `Δ² + Γ²` jointly in the denominator, which is the
/// only reading consistent with the bound `G <= 2g²/(γΓ)` saturated at
/// `Δ = 0`.
pub fn cooperativity(g: f64, delta: f64, rates: &DecayRates, gamma_ref: f64) -> Result<f64> {
    if !(gamma_ref > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma_ref must be > 0, got {gamma_ref}"
        )));
    }
    if rates.total == 0.0 && delta == 0.0 {
        return Err(Error::Domain(
            "cooperativity undefined for Γ = 0 and Δ = 0 (lossless dot)".into(),
        ));
    }
    Ok(gain_rate(g, delta, rates.total) / gamma_ref)
}

/// The γ-free product `γ G = 2 g² Γ / (Δ² + Γ²)`, a rate. Every rate
/// equation depends on the cooperativity only through this combination.
pub fn gain_rate(g: f64, delta: f64, gamma_total: f64) -> f64 {
    if g == 0.0 {
        return 0.0;
    }
    2.0 * g * g * gamma_total / (delta * delta + gamma_total * gamma_total)
}

/// How per-mode cooperativity strengths are evaluated from the couplings.
///
/// `Detuned` keeps the full dependence `G ∝ Γ/(Δ_i² + Γ²)`. `Resonant`
/// uses the on-resonance bound `G = 2g²/(γΓ)` for every mode; the
/// multimode reference curves (Gaussian coupling profiles, `G_max`
/// evaluated as a function of the coupling alone, and the directly
/// Gaussian cooperativity of the spectral fits) are all stated in this
/// convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CooperativityKind {
    Detuned,
    Resonant,
}

impl CooperativityKind {
    /// Gain rate `γ G_i` of a mode at `delta` with coupling `g`.
    pub fn gain_rate(self, g: f64, delta: f64, gamma_total: f64) -> f64 {
        match self {
            Self::Detuned => gain_rate(g, delta, gamma_total),
            Self::Resonant => gain_rate(g, 0.0, gamma_total),
        }
    }
}

/// Gaussian coupling `g(Δ_i) = g0 exp(-(Δ_i - Δ̄)²/(2σ²))`.
pub fn gaussian_coupling(delta_i: f64, profile: &GaussianProfile) -> f64 {
    profile.eval(delta_i)
}

/// Standard gain threshold `w_c = 2/(M G)`.
pub fn gain_threshold(m: u64, cooperativity: f64) -> Result<f64> {
    if cooperativity <= 0.0 {
        return Err(Error::Domain(format!(
            "gain threshold undefined for G = {cooperativity}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    Ok(2.0 / (m as f64 * cooperativity))
}

/// One class of identical dots carrying a fraction of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct DotClass {
    pub dot: DotParams,
    /// Fraction of the `M` dots in this class; fractions sum to 1.
    pub weight: f64,
}

/// Ensemble of quantum dots binned into classes of identical dots.
/// The homogeneous case is a single class with weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    classes: Vec<DotClass>,
}

impl Ensemble {
    pub fn homogeneous(dot: DotParams) -> Self {
        Self {
            classes: vec![DotClass { dot, weight: 1.0 }],
        }
    }

    pub fn from_classes(classes: Vec<DotClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidParameter("ensemble: need >= 1 class".into()));
        }
        let total: f64 = classes.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "ensemble: class weights must sum to 1, got {total}"
            )));
        }
        for c in &classes {
            c.dot.validate()?;
            if !(c.weight > 0.0) {
                return Err(Error::InvalidParameter(
                    "ensemble: class weights must be > 0".into(),
                ));
            }
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[DotClass] {
        &self.classes
    }

    pub fn is_homogeneous(&self) -> bool {
        self.classes.len() == 1
    }
}
