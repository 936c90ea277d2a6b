// Validation guards use `!(x > 0.0)` so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Deterministic simulator for broadband quantum-dot superluminescent
//! diodes: stationary multimode photon numbers from three-level rate
//! equations, amplification thresholds, emitted power spectra via
//! Lorentzian convolution, the passive-waveguide transmission spectrum,
//! and Gaussian / cooperativity-model spectral fits.
//!
//! All rates are dimensionless ratios to a reference damping rate `γ`
//! unless a physical-units mode is selected explicitly.

pub mod error;
pub mod fit;
pub mod multi;
pub mod ode;
pub mod params;
pub mod rootfind;
pub mod single;
pub mod spectrum;

pub use error::{Error, Result};
pub use fit::{fit_gaussian, fit_model, residual_norm, FitResult, ModelFitContext};
pub use multi::{no_se_threshold, RateModel, SteadyOptions, SteadyState, SystemState};
pub use ode::OdeOptions;
pub use params::{
    cooperativity, decay_rates, gain_rate, gain_threshold, gaussian_coupling, CooperativityKind,
    DecayRates, DotClass, DotParams, Ensemble, GaussianProfile, ModeSet, PumpParams,
    WaveguideParams,
};
pub use single::{critical_pump_rate, no_se_branch, single_mode_steady, SingleModeSolution};
pub use spectrum::{
    continuum_spectrum, discrete_spectrum, g1, linewidth, lorentzian, passive_transmission,
    passive_transmission_channels, passive_white_noise_spectrum, Provenance, Spectrum,
    TransmissionMatrix, Units,
};
