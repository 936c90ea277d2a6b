//! Python bindings: the parameter containers and the main operations of
//! the QDSLD simulator, exposed with plain floats, lists and dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qdsld_core as core;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen)]
#[derive(Clone)]
struct DotParams {
    inner: core::DotParams,
}

#[pymethods]
impl DotParams {
    #[new]
    #[pyo3(signature = (gamma21, gamma10, gamma20 = 0.0, n21 = 0.0, n10 = 0.0, delta_omega12 = 0.0))]
    fn new(
        gamma21: f64,
        gamma10: f64,
        gamma20: f64,
        n21: f64,
        n10: f64,
        delta_omega12: f64,
    ) -> PyResult<Self> {
        let inner = core::DotParams {
            gamma21,
            gamma10,
            gamma20,
            n21,
            n10,
            delta_omega12,
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gamma21(&self) -> f64 {
        self.inner.gamma21
    }

    #[getter]
    fn gamma10(&self) -> f64 {
        self.inner.gamma10
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct WaveguideParams {
    inner: core::WaveguideParams,
}

#[pymethods]
impl WaveguideParams {
    /// Symmetric vacuum-input waveguide with equal external damping.
    #[staticmethod]
    fn symmetric(gamma: f64) -> PyResult<Self> {
        let inner = core::WaveguideParams::symmetric(gamma);
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[new]
    #[pyo3(signature = (gamma_l, gamma_r, n_l = 0.0, n_r = 0.0, length = 1.0,
                        mode_spacing = 1.0, omega_bar = 0.0))]
    fn new(
        gamma_l: f64,
        gamma_r: f64,
        n_l: f64,
        n_r: f64,
        length: f64,
        mode_spacing: f64,
        omega_bar: f64,
    ) -> PyResult<Self> {
        let inner = core::WaveguideParams {
            gamma_l,
            gamma_r,
            n_l,
            n_r,
            length,
            mode_spacing,
            omega_bar,
            phases: [0.0; 6],
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gamma_lr(&self) -> f64 {
        self.inner.gamma_lr()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct ModeSet {
    inner: core::ModeSet,
}

#[pymethods]
impl ModeSet {
    #[new]
    fn new(detunings: Vec<f64>, couplings: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: core::ModeSet::new(detunings, couplings).map_err(err)?,
        })
    }

    /// Modes on a detuning grid with a Gaussian coupling profile.
    #[staticmethod]
    fn gaussian(detunings: Vec<f64>, amplitude: f64, center: f64, width: f64) -> PyResult<Self> {
        let profile = core::GaussianProfile::new(amplitude, center, width).map_err(err)?;
        Ok(Self {
            inner: core::ModeSet::gaussian(detunings, &profile).map_err(err)?,
        })
    }

    #[getter]
    fn detunings(&self) -> Vec<f64> {
        self.inner.detunings().to_vec()
    }

    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.inner.couplings().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn kind_from_str(kind: &str) -> PyResult<core::CooperativityKind> {
    match kind {
        "detuned" => Ok(core::CooperativityKind::Detuned),
        "resonant" => Ok(core::CooperativityKind::Resonant),
        other => Err(PyValueError::new_err(format!(
            "cooperativity must be 'detuned' or 'resonant', got '{other}'"
        ))),
    }
}

/// Derived decay rates as a dict: Γ_0, Γ_1, Γ_2, Γ_21, Γ_20, Γ_10,
/// γ^lr and the total Γ = Γ_21 + γ^lr.
#[pyfunction]
fn decay_rates<'py>(
    py: Python<'py>,
    dot: &DotParams,
    r: f64,
    m: u64,
    wg: &WaveguideParams,
) -> PyResult<Bound<'py, PyDict>> {
    let rates = core::decay_rates(&dot.inner, &core::PumpParams::new(r, m), &wg.inner);
    let d = PyDict::new(py);
    d.set_item("gamma_0", rates.gamma_0)?;
    d.set_item("gamma_1", rates.gamma_1)?;
    d.set_item("gamma_2", rates.gamma_2)?;
    d.set_item("gamma_21", rates.gamma_21)?;
    d.set_item("gamma_20", rates.gamma_20)?;
    d.set_item("gamma_10", rates.gamma_10)?;
    d.set_item("gamma_lr", rates.gamma_lr)?;
    d.set_item("total", rates.total)?;
    Ok(d)
}

/// Cooperativity strength G = 2 g² Γ / (γ_ref (Δ² + Γ²)).
#[pyfunction]
#[pyo3(signature = (g, delta, dot, r, m, wg, gamma_ref = 1.0))]
fn cooperativity(
    g: f64,
    delta: f64,
    dot: &DotParams,
    r: f64,
    m: u64,
    wg: &WaveguideParams,
    gamma_ref: f64,
) -> PyResult<f64> {
    let rates = core::decay_rates(&dot.inner, &core::PumpParams::new(r, m), &wg.inner);
    core::cooperativity(g, delta, &rates, gamma_ref).map_err(err)
}

/// Gaussian coupling g0 exp(-(Δ - Δ̄)²/(2σ²)).
#[pyfunction]
fn gaussian_coupling(delta: f64, amplitude: f64, center: f64, width: f64) -> PyResult<f64> {
    let profile = core::GaussianProfile::new(amplitude, center, width).map_err(err)?;
    Ok(core::gaussian_coupling(delta, &profile))
}

/// Standard gain threshold w_c = 2/(M G).
#[pyfunction]
fn gain_threshold(m: u64, cooperativity: f64) -> PyResult<f64> {
    core::gain_threshold(m, cooperativity).map_err(err)
}

/// Closed-form stationary single-mode photon number; returns a dict with
/// n_s, the no-spontaneous-emission branch and the coefficients.
#[pyfunction]
fn single_mode_steady<'py>(
    py: Python<'py>,
    g: f64,
    delta: f64,
    dot: &DotParams,
    r: f64,
    m: u64,
    wg: &WaveguideParams,
) -> PyResult<Bound<'py, PyDict>> {
    let pump = core::PumpParams::new(r, m);
    let sol = core::single_mode_steady(g, delta, &dot.inner, &pump, &wg.inner).map_err(err)?;
    let no_se = core::no_se_branch(g, delta, &dot.inner, &pump, &wg.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n_s", sol.n_s)?;
    d.set_item("n_no_se", no_se)?;
    d.set_item("a", sol.a)?;
    d.set_item("b", sol.b)?;
    d.set_item("alpha", sol.alpha)?;
    d.set_item("beta", sol.beta)?;
    d.set_item("w_c", sol.w_c)?;
    Ok(d)
}

/// Critical pump rate R_c of the no-spontaneous-emission bifurcation.
#[pyfunction]
fn critical_pump_rate(
    g: f64,
    delta: f64,
    dot: &DotParams,
    wg: &WaveguideParams,
    m: u64,
) -> PyResult<f64> {
    core::critical_pump_rate(g, delta, &dot.inner, &wg.inner, m).map_err(err)
}

fn steady_dict<'py>(py: Python<'py>, s: &core::SteadyState) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", s.state.n.clone())?;
    d.set_item("n_total", s.state.n.iter().sum::<f64>())?;
    d.set_item("sigma00", s.state.sigma00.clone())?;
    d.set_item("sigma11", s.state.sigma11.clone())?;
    d.set_item("sigma22", s.state.sigma22.clone())?;
    d.set_item("w_s", s.w_s)?;
    d.set_item("phi", s.phi)?;
    d.set_item("residual_norm", s.residual_norm)?;
    Ok(d)
}

/// Stationary multimode solution. `method` is one of
/// "order-parameter", "order-parameter-approx", "newton", "integrate".
#[pyfunction]
#[pyo3(signature = (modes, dot, r, m, wg, method = "order-parameter", cooperativity = "detuned"))]
#[allow(clippy::too_many_arguments)]
fn solve_steady<'py>(
    py: Python<'py>,
    modes: &ModeSet,
    dot: &DotParams,
    r: f64,
    m: u64,
    wg: &WaveguideParams,
    method: &str,
    cooperativity: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let pump = core::PumpParams::new(r, m);
    let kind = kind_from_str(cooperativity)?;
    let model = core::RateModel::homogeneous(&modes.inner, dot.inner, &pump, &wg.inner, kind)
        .map_err(err)?;
    let steady = match method {
        "order-parameter" => model.order_parameter_exact(),
        "order-parameter-approx" => model.order_parameter_approx(),
        "integrate" => {
            model.integrate_to_steady(&model.cold_start(), &core::SteadyOptions::default())
        }
        "newton" => model
            .integrate_to_steady(
                &model.cold_start(),
                &core::SteadyOptions {
                    tol: 1e-3,
                    ..core::SteadyOptions::default()
                },
            )
            .and_then(|rough| model.newton_steady(&rough.state, 1e-12)),
        other => {
            return Err(PyValueError::new_err(format!(
            "unknown method '{other}' (order-parameter, order-parameter-approx, newton, integrate)"
        )))
        }
    }
    .map_err(err)?;
    steady_dict(py, &steady)
}

/// Per-mode emission linewidths Γ_i = 2(γ^lr − 2 M g_i² w^s/Γ_21).
#[pyfunction]
fn linewidth(
    modes: &ModeSet,
    dot: &DotParams,
    r: f64,
    m: u64,
    wg: &WaveguideParams,
    w_s: f64,
) -> PyResult<Vec<f64>> {
    core::linewidth(
        &modes.inner,
        &dot.inner,
        &core::PumpParams::new(r, m),
        &wg.inner,
        w_s,
    )
    .map_err(err)
}

/// Discrete emission spectrum on `grid`; returns the power samples.
#[pyfunction]
#[pyo3(signature = (n_s, modes, linewidths, wg, grid, physical_units = false))]
fn discrete_spectrum(
    n_s: Vec<f64>,
    modes: &ModeSet,
    linewidths: Vec<f64>,
    wg: &WaveguideParams,
    grid: Vec<f64>,
    physical_units: bool,
) -> PyResult<Vec<f64>> {
    let units = if physical_units {
        core::Units::Physical
    } else {
        core::Units::Arbitrary
    };
    Ok(
        core::discrete_spectrum(&n_s, &modes.inner, &linewidths, &wg.inner, &grid, units)
            .map_err(err)?
            .power,
    )
}

/// Lorentzian convolution of a sampled photon-number profile.
#[pyfunction]
fn continuum_spectrum(
    omega: Vec<f64>,
    n_s: Vec<f64>,
    gamma: f64,
    prefactor: f64,
    grid: Vec<f64>,
) -> PyResult<Vec<f64>> {
    Ok(
        core::continuum_spectrum(&omega, &n_s, gamma, prefactor, &grid)
            .map_err(err)?
            .power,
    )
}

/// Worst unitarity defect ‖M†M − 1‖_max of the passive transmission
/// matrix at the given frequency.
#[pyfunction]
fn transmission_unitarity_defect(omega: f64, omega_i: f64, wg: &WaveguideParams) -> PyResult<f64> {
    Ok(core::passive_transmission(omega, omega_i, &wg.inner)
        .map_err(err)?
        .unitarity_defect())
}

/// White-noise transmission spectrum of the passive waveguide.
#[pyfunction]
#[pyo3(signature = (modes, wg, occupation, grid, physical_units = false))]
fn passive_white_noise_spectrum(
    modes: &ModeSet,
    wg: &WaveguideParams,
    occupation: f64,
    grid: Vec<f64>,
    physical_units: bool,
) -> PyResult<Vec<f64>> {
    let units = if physical_units {
        core::Units::Physical
    } else {
        core::Units::Arbitrary
    };
    Ok(
        core::passive_white_noise_spectrum(&modes.inner, &wg.inner, occupation, &grid, units)
            .map_err(err)?
            .power,
    )
}

fn fit_dict<'py>(py: Python<'py>, fit: &core::FitResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("amplitude", fit.profile.amplitude)?;
    d.set_item("center", fit.profile.center)?;
    d.set_item("width", fit.profile.width)?;
    d.set_item("scale", fit.scale)?;
    d.set_item("residual_per_point", fit.residual_per_point)?;
    d.set_item("iterations", fit.iterations)?;
    d.set_item("converged", fit.converged)?;
    Ok(d)
}

/// Least-squares Gaussian fit of a sampled spectrum.
#[pyfunction]
fn fit_gaussian<'py>(
    py: Python<'py>,
    omega: Vec<f64>,
    power: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let data = core::Spectrum::new(
        omega,
        power,
        core::Provenance::Synthetic {
            label: "python".into(),
        },
    )
    .map_err(err)?;
    fit_dict(py, &core::fit_gaussian(&data).map_err(err)?)
}

/// Forward-model fit of a Gaussian cooperativity profile
/// (G0, ω̄, σ) plus an amplitude scale.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (omega, power, dot, r, m, wg, init_amplitude, init_center, init_width, init_scale = 1.0))]
fn fit_model<'py>(
    py: Python<'py>,
    omega: Vec<f64>,
    power: Vec<f64>,
    dot: &DotParams,
    r: f64,
    m: u64,
    wg: &WaveguideParams,
    init_amplitude: f64,
    init_center: f64,
    init_width: f64,
    init_scale: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let data = core::Spectrum::new(
        omega,
        power,
        core::Provenance::Synthetic {
            label: "python".into(),
        },
    )
    .map_err(err)?;
    let ctx = core::ModelFitContext {
        dot: dot.inner,
        pump: core::PumpParams::new(r, m),
        wg: wg.inner.clone(),
    };
    let init = core::GaussianProfile::new(init_amplitude, init_center, init_width).map_err(err)?;
    fit_dict(
        py,
        &core::fit_model(&data, &ctx, &init, init_scale).map_err(err)?,
    )
}

#[pymodule]
fn qdsld(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<DotParams>()?;
    m.add_class::<WaveguideParams>()?;
    m.add_class::<ModeSet>()?;
    m.add_function(wrap_pyfunction!(decay_rates, m)?)?;
    m.add_function(wrap_pyfunction!(cooperativity, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(gain_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(single_mode_steady, m)?)?;
    m.add_function(wrap_pyfunction!(critical_pump_rate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_steady, m)?)?;
    m.add_function(wrap_pyfunction!(linewidth, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(continuum_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(transmission_unitarity_defect, m)?)?;
    m.add_function(wrap_pyfunction!(passive_white_noise_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fit_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    Ok(())
}
