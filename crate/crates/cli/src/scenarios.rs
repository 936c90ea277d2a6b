//! Scenario runners: each consumes a validated config and writes
//! `result.json` plus (where a grid exists) `curve.tsv`.

use std::path::Path;

use qdsld_core as core;
use qdsld_core::{
    continuum_spectrum, cooperativity, critical_pump_rate, decay_rates, discrete_spectrum,
    fit_gaussian, fit_model, gain_threshold, linewidth, no_se_branch, no_se_threshold,
    passive_transmission_channels, passive_white_noise_spectrum, single_mode_steady,
    CooperativityKind, GaussianProfile, ModelFitContext, Provenance, RateModel, Spectrum,
    SteadyOptions, Units,
};
use serde::Serialize;

use crate::config::{FitSource, LinewidthChoice, ProfileSection, RunConfig, Scenario, UnitsChoice};
use crate::ingest::ingest_spectrum;
use crate::output::{write_json, CurveWriter};
use crate::CliError;

#[derive(Serialize)]
struct ResultDocument<'a, T: Serialize> {
    scenario: String,
    config: &'a RunConfig,
    results: T,
}

fn emit<T: Serialize>(
    dir: &Path,
    config: &RunConfig,
    results: T,
    curve: Option<&CurveWriter>,
) -> Result<(), CliError> {
    let doc = ResultDocument {
        scenario: config.scenario.to_string(),
        config,
        results,
    };
    let json_path = write_json(dir, &doc)?;
    println!("wrote {}", json_path.display());
    if let Some(c) = curve {
        let tsv_path = c.write(dir)?;
        println!("wrote {}", tsv_path.display());
    }
    Ok(())
}

fn units_of(choice: UnitsChoice) -> Units {
    match choice {
        UnitsChoice::Arbitrary => Units::Arbitrary,
        UnitsChoice::Physical => Units::Physical,
    }
}

pub fn run(config: &RunConfig, out_dir: &Path, threads: Option<usize>) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::io(format!("{}: {e}", out_dir.display())))?;
    let body = || -> Result<(), CliError> {
        match config.scenario {
            Scenario::SingleSteady => single_steady(config, out_dir),
            Scenario::Threshold => threshold(config, out_dir),
            Scenario::Sweep => sweep(config, out_dir),
            Scenario::MultiSteady => multi_steady(config, out_dir),
            Scenario::Spectrum => spectrum(config, out_dir),
            Scenario::Passive => passive(config, out_dir),
            Scenario::Fit => fit(config, out_dir),
        }
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?
            .install(body),
        None => body(),
    }
}

#[derive(Serialize)]
struct SingleSteadyResults {
    gamma_total: f64,
    cooperativity: f64,
    gain_threshold_w_c: f64,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    n_s: f64,
    n_no_se: f64,
}

fn single_steady(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let mode = config.mode.as_ref().expect("validated");
    let dot = config.dot.to_params();
    let pump = config.pump_params(true)?;
    let wg = config.waveguide_params();
    let rates = decay_rates(&dot, &pump, &wg);
    let g_coop = cooperativity(mode.g, mode.delta, &rates, 1.0)?;
    let sol = single_mode_steady(mode.g, mode.delta, &dot, &pump, &wg)?;
    let results = SingleSteadyResults {
        gamma_total: rates.total,
        cooperativity: g_coop,
        gain_threshold_w_c: gain_threshold(pump.m, g_coop)?,
        alpha: sol.alpha,
        beta: sol.beta,
        a: sol.a,
        b: sol.b,
        n_s: sol.n_s,
        n_no_se: no_se_branch(mode.g, mode.delta, &dot, &pump, &wg)?,
    };
    emit(out_dir, config, results, None)
}

#[derive(Serialize)]
struct ThresholdCase {
    g: f64,
    delta: f64,
    r_c: f64,
    /// Algebraic M -> infinity limit γ21 γ10/(γ10 − γ21), independent of
    /// the mode.
    r_c_infinite_m: f64,
}

fn threshold(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let section = config.threshold.as_ref().expect("validated");
    let dot = config.dot.to_params();
    let wg = config.waveguide_params();
    let limit = if dot.gamma10 > dot.gamma21 {
        dot.gamma21 * dot.gamma10 / (dot.gamma10 - dot.gamma21)
    } else {
        f64::NAN
    };
    let mut curve = CurveWriter::new(&["g_over_gamma", "delta_over_gamma", "r_c_over_gamma"]);
    let mut cases = Vec::new();
    for mode in &section.cases {
        let r_c = critical_pump_rate(mode.g, mode.delta, &dot, &wg, config.pump.m)?;
        curve.row(&[mode.g, mode.delta, r_c]);
        cases.push(ThresholdCase {
            g: mode.g,
            delta: mode.delta,
            r_c,
            r_c_infinite_m: limit,
        });
    }
    emit(out_dir, config, cases, Some(&curve))
}

#[derive(Serialize)]
struct SweepResults {
    r_c: f64,
    n_s_max: f64,
}

fn sweep(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    use rayon::prelude::*;
    let section = config.sweep.as_ref().expect("validated");
    let dot = config.dot.to_params();
    let wg = config.waveguide_params();
    let m = config.pump.m;
    let grid: Vec<f64> = (0..section.points)
        .map(|k| {
            section.r_min + (section.r_max - section.r_min) * k as f64 / (section.points - 1) as f64
        })
        .collect();

    if let Some(mode) = &config.mode {
        // single-mode sweep: closed form plus the no-SE branch
        let rows: Vec<(f64, f64, f64)> = grid
            .par_iter()
            .map(|&r| {
                let pump = core::PumpParams::new(r, m);
                let sol = single_mode_steady(mode.g, mode.delta, &dot, &pump, &wg)?;
                let nose = no_se_branch(mode.g, mode.delta, &dot, &pump, &wg)?;
                Ok((r, sol.n_s, nose))
            })
            .collect::<Result<_, CliError>>()?;
        let mut curve = CurveWriter::new(&["R_over_gamma", "n_s", "n_no_se"]);
        for (r, n, nose) in &rows {
            curve.row(&[*r, *n, *nose]);
        }
        let results = SweepResults {
            r_c: critical_pump_rate(mode.g, mode.delta, &dot, &wg, m)?,
            n_s_max: rows.last().map(|r| r.1).unwrap_or(0.0),
        };
        return emit(out_dir, config, results, Some(&curve));
    }

    // multimode sweep: order-parameter exact, its closed-form
    // approximation and the no-SE branch
    let modes_section = config.modes.as_ref().expect("validated");
    let modes = modes_section.to_modes()?;
    let kind: CooperativityKind = modes_section.cooperativity.into();
    let rows: Vec<(f64, f64, f64, f64)> = grid
        .par_iter()
        .map(|&r| {
            let pump = core::PumpParams::new(r, m);
            let model = RateModel::homogeneous(&modes, dot, &pump, &wg, kind)?;
            let exact: f64 = model.order_parameter_exact()?.state.n.iter().sum();
            let approx: f64 = model.order_parameter_approx()?.state.n.iter().sum();
            let nose = model.no_se_total()?;
            Ok((r, exact, approx, nose))
        })
        .collect::<Result<_, CliError>>()?;
    let mut curve = CurveWriter::new(&["R_over_gamma", "n_s", "n_s_approx", "n_no_se"]);
    for (r, e, a, nose) in &rows {
        curve.row(&[*r, *e, *a, *nose]);
    }
    let results = SweepResults {
        r_c: no_se_threshold(&modes, &dot, &wg, m, kind)?,
        n_s_max: rows.last().map(|r| r.1).unwrap_or(0.0),
    };
    emit(out_dir, config, results, Some(&curve))
}

#[derive(Serialize)]
struct MultiSteadyRow {
    r: f64,
    n_total: f64,
    n_total_newton: f64,
    n_peak: f64,
    peak_delta: f64,
    w_s: f64,
    phi: f64,
    residual_norm: f64,
}

fn multi_steady(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let section = config.multi_steady.as_ref().expect("validated");
    let modes_section = config.modes.as_ref().expect("validated");
    let modes = modes_section.to_modes()?;
    let kind: CooperativityKind = modes_section.cooperativity.into();
    let dot = config.dot.to_params();
    let wg = config.waveguide_params();
    let mut curve = CurveWriter::new(&[
        "R_over_gamma",
        "delta_over_gamma",
        "coupling_over_gamma",
        "gain_rate",
        "n_i",
    ]);
    let mut rows = Vec::new();
    for &r in &section.r_values {
        let pump = core::PumpParams::new(r, config.pump.m);
        let model = RateModel::homogeneous(&modes, dot, &pump, &wg, kind)?;
        let steady = model.order_parameter_exact()?;
        let newton = model.newton_steady(&steady.state, 1e-10)?;
        let (peak_idx, peak) = steady
            .state
            .n
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, 0.0));
        for i in 0..modes.len() {
            curve.row(&[
                r,
                modes.detunings()[i],
                modes.couplings()[i],
                model.gain_rates(0)[i],
                steady.state.n[i],
            ]);
        }
        rows.push(MultiSteadyRow {
            r,
            n_total: steady.state.n.iter().sum(),
            n_total_newton: newton.state.n.iter().sum(),
            n_peak: peak,
            peak_delta: modes.detunings()[peak_idx],
            w_s: steady.w_s,
            phi: steady.phi,
            residual_norm: steady.residual_norm,
        });
    }
    emit(out_dir, config, rows, Some(&curve))
}

#[derive(Serialize)]
struct SpectrumResults {
    w_s: f64,
    phi: f64,
    n_total: f64,
    linewidths: Vec<f64>,
}

fn spectrum(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let section = config.spectrum.as_ref().expect("validated");
    let modes_section = config.modes.as_ref().expect("validated");
    let modes = modes_section.to_modes()?;
    let kind: CooperativityKind = modes_section.cooperativity.into();
    let dot = config.dot.to_params();
    let pump = config.pump_params(true)?;
    let wg = config.waveguide_params();
    let model = RateModel::homogeneous(&modes, dot, &pump, &wg, kind)?;
    // order-parameter solve in the simplified regime, time integration
    // otherwise
    let steady = match model.order_parameter_exact() {
        Ok(s) => s,
        Err(core::Error::Precondition(_)) => {
            model.integrate_to_steady(&model.cold_start(), &SteadyOptions::default())?
        }
        Err(e) => return Err(e.into()),
    };
    let gammas = match section.linewidth {
        LinewidthChoice::Computed => linewidth(&modes, &dot, &pump, &wg, steady.w_s)?,
        LinewidthChoice::Fixed(v) => vec![v; modes.len()],
    };
    let grid = section.grid.to_grid("spectrum.grid")?;
    let units = units_of(section.units);
    let discrete = discrete_spectrum(&steady.state.n, &modes, &gammas, &wg, &grid, units)?;
    let continuum = if section.continuum {
        let omega_modes: Vec<f64> = modes.detunings().iter().map(|d| wg.omega_bar + d).collect();
        let gamma_mean = gammas.iter().sum::<f64>() / gammas.len() as f64;
        let prefactor = match units {
            Units::Arbitrary => 1.0,
            Units::Physical => {
                core::spectrum::HBAR * wg.omega_bar * core::spectrum::SPEED_OF_LIGHT * wg.gamma_r
                    / (wg.length * wg.mode_spacing)
                    / wg.mode_spacing
            }
        };
        if omega_modes.len() < 2 {
            None
        } else {
            Some(continuum_spectrum(
                &omega_modes,
                &steady.state.n,
                gamma_mean,
                prefactor,
                &grid,
            )?)
        }
    } else {
        None
    };
    let mut curve = match &continuum {
        Some(_) => CurveWriter::new(&["omega", "s_discrete", "s_continuum"]),
        None => CurveWriter::new(&["omega", "s_discrete"]),
    };
    for (i, &w) in grid.iter().enumerate() {
        match &continuum {
            Some(c) => curve.row(&[w, discrete.power[i], c.power[i]]),
            None => curve.row(&[w, discrete.power[i]]),
        }
    }
    let results = SpectrumResults {
        w_s: steady.w_s,
        phi: steady.phi,
        n_total: steady.state.n.iter().sum(),
        linewidths: gammas,
    };
    emit(out_dir, config, results, Some(&curve))
}

/// splitmix64: deterministic, seedable draw sequence for the unitarity
/// check (no global RNG state).
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

#[derive(Serialize)]
struct PassiveResults {
    unitarity_draws: usize,
    worst_unitarity_defect: f64,
    width_parameter: f64,
}

fn passive(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let section = config.passive.as_ref().expect("validated");
    let modes = config.modes.as_ref().expect("validated").to_modes()?;
    let wg = config.waveguide_params();
    if wg.gamma_l != wg.gamma_r {
        return Err(CliError::config(
            "passive: white-noise spectrum assumes gamma_l = gamma_r",
        ));
    }
    let grid = section.grid.to_grid("passive.grid")?;
    let spectrum = passive_white_noise_spectrum(
        &modes,
        &wg,
        section.occupation,
        &grid,
        units_of(section.units),
    )?;
    let mut curve = CurveWriter::new(&["omega", "s"]);
    for (w, s) in grid.iter().zip(&spectrum.power) {
        curve.row(&[*w, *s]);
    }
    let mut rng = SplitMix64(section.seed);
    let mut worst = 0.0f64;
    for _ in 0..section.unitarity_draws {
        let mut gammas = [0.0; 6];
        let mut phases = [0.0; 6];
        for a in [0usize, 1, 3, 5] {
            gammas[a] = rng.uniform(0.0, 4.0);
            phases[a] = rng.uniform(0.0, std::f64::consts::TAU);
        }
        let omega = rng.uniform(-10.0, 10.0);
        let omega_i = rng.uniform(-2.0, 2.0);
        let t = passive_transmission_channels(omega, omega_i, &gammas, &phases)?;
        worst = worst.max(t.unitarity_defect());
    }
    let results = PassiveResults {
        unitarity_draws: section.unitarity_draws,
        worst_unitarity_defect: worst,
        width_parameter: 2.0 * wg.gamma_lr(),
    };
    emit(out_dir, config, results, Some(&curve))
}

#[derive(Serialize)]
struct FitReport {
    amplitude: f64,
    center: f64,
    width: f64,
    scale: Option<f64>,
    residual_per_point: f64,
    iterations: usize,
    converged: bool,
}

impl From<core::FitResult> for FitReport {
    fn from(f: core::FitResult) -> Self {
        Self {
            amplitude: f.profile.amplitude,
            center: f.profile.center,
            width: f.profile.width,
            scale: f.scale,
            residual_per_point: f.residual_per_point,
            iterations: f.iterations,
            converged: f.converged,
        }
    }
}

#[derive(Serialize)]
struct FitResults {
    source: String,
    gaussian: Option<FitReport>,
    model: Option<FitReport>,
}

fn profile_of(section: &ProfileSection) -> Result<GaussianProfile, CliError> {
    GaussianProfile::new(section.amplitude, section.center, section.width)
        .map_err(|e| CliError::config(format!("fit profile: {e}")))
}

fn fit(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let section = config.fit.as_ref().expect("validated");
    let dot = config.dot.to_params();
    let wg = config.waveguide_params();

    let (data, source_label) = match section.source {
        FitSource::Csv => {
            let path = section.csv_path.as_ref().expect("validated");
            (ingest_spectrum(Path::new(path))?, path.clone())
        }
        FitSource::SyntheticGaussian => {
            let grid = section
                .grid
                .as_ref()
                .expect("validated")
                .to_grid("fit.grid")?;
            let profile = profile_of(section.seed_profile.as_ref().expect("validated"))?;
            let power = core::fit::gaussian_spectrum_samples(&profile, &grid);
            (
                Spectrum::new(
                    grid,
                    power,
                    Provenance::Synthetic {
                        label: "gaussian".into(),
                    },
                )?,
                "synthetic-gaussian".into(),
            )
        }
        FitSource::SyntheticModel => {
            let grid = section
                .grid
                .as_ref()
                .expect("validated")
                .to_grid("fit.grid")?;
            let profile = profile_of(section.seed_profile.as_ref().expect("validated"))?;
            let ctx = ModelFitContext {
                dot,
                pump: config.pump_params(true)?,
                wg: wg.clone(),
            };
            let n_s = ctx.forward(&grid, &profile)?;
            (
                Spectrum::new(
                    grid,
                    n_s.iter().map(|v| section.scale * v).collect(),
                    Provenance::Synthetic {
                        label: "model".into(),
                    },
                )?,
                "synthetic-model".into(),
            )
        }
    };

    let gaussian = if section.gaussian {
        Some(fit_gaussian(&data)?)
    } else {
        None
    };
    let model = if section.model {
        let ctx = ModelFitContext {
            dot,
            pump: config.pump_params(true)?,
            wg: wg.clone(),
        };
        let init = match (&section.model_init, section.source) {
            (Some(p), _) => profile_of(p)?,
            (None, FitSource::SyntheticModel) => {
                profile_of(section.seed_profile.as_ref().expect("validated"))?
            }
            (None, _) => {
                return Err(CliError::config(
                    "fit.model_init required for the model fit on this source",
                ))
            }
        };
        let init_scale =
            section
                .model_init_scale
                .unwrap_or(if section.source == FitSource::SyntheticModel {
                    section.scale
                } else {
                    1.0
                });
        Some(fit_model(&data, &ctx, &init, init_scale)?)
    } else {
        None
    };

    // curve: data plus the fitted curves on the same grid
    let mut header = vec!["omega", "s_data"];
    if gaussian.is_some() {
        header.push("s_gaussian_fit");
    }
    if model.is_some() {
        header.push("s_model_fit");
    }
    let mut curve = CurveWriter::new(&header);
    let gaussian_curve = gaussian
        .as_ref()
        .map(|f| core::fit::gaussian_spectrum_samples(&f.profile, &data.omega));
    let model_curve = match &model {
        Some(f) => {
            let ctx = ModelFitContext {
                dot,
                pump: config.pump_params(true)?,
                wg: wg.clone(),
            };
            let n_s = ctx.forward(&data.omega, &f.profile)?;
            let scale = f.scale.unwrap_or(1.0);
            Some(n_s.iter().map(|v| scale * v).collect::<Vec<f64>>())
        }
        None => None,
    };
    for i in 0..data.len() {
        let mut row = vec![data.omega[i], data.power[i]];
        if let Some(g) = &gaussian_curve {
            row.push(g[i]);
        }
        if let Some(m) = &model_curve {
            row.push(m[i]);
        }
        curve.row(&row);
    }
    let results = FitResults {
        source: source_label,
        gaussian: gaussian.map(Into::into),
        model: model.map(Into::into),
    };
    emit(out_dir, config, results, Some(&curve))
}
