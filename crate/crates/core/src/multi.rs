//! Multimode rate equations: time integration to the stationary state,
//! a damped Newton fixed-point solve with analytic Jacobian, and the
//! order-parameter reduction with its closed-form approximation.
//!
//! Photon damping is `−2γ^lr n_i` throughout; the populations form a
//! closed three-level cycle whose trace is conserved analytically.

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::params::{
    decay_rates, CooperativityKind, DecayRates, DotParams, Ensemble, ModeSet, PumpParams,
    WaveguideParams,
};
use crate::rootfind::first_root;
use nalgebra::{DMatrix, DVector};

/// Photon numbers and per-class level populations.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub n: Vec<f64>,
    pub sigma00: Vec<f64>,
    pub sigma11: Vec<f64>,
    pub sigma22: Vec<f64>,
}

impl SystemState {
    /// Cold start: every dot in the pump-fed top level, no photons.
    pub fn cold_start(n_modes: usize, n_classes: usize) -> Self {
        Self {
            n: vec![0.0; n_modes],
            sigma00: vec![1.0; n_classes],
            sigma11: vec![0.0; n_classes],
            sigma22: vec![0.0; n_classes],
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.n
            .iter()
            .chain(&self.sigma00)
            .chain(&self.sigma11)
            .chain(&self.sigma22)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Worst trace deviation `|σ00 + σ11 + σ22 − 1|` over the classes.
    pub fn trace_defect(&self) -> f64 {
        (0..self.sigma00.len())
            .map(|c| (self.sigma00[c] + self.sigma11[c] + self.sigma22[c] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.n.len() + 3 * self.sigma00.len());
        x.extend_from_slice(&self.n);
        for c in 0..self.sigma00.len() {
            x.push(self.sigma00[c]);
            x.push(self.sigma11[c]);
            x.push(self.sigma22[c]);
        }
        x
    }

    fn from_flat(x: &[f64], n_modes: usize, n_classes: usize) -> Self {
        let mut s = Self {
            n: x[..n_modes].to_vec(),
            sigma00: Vec::with_capacity(n_classes),
            sigma11: Vec::with_capacity(n_classes),
            sigma22: Vec::with_capacity(n_classes),
        };
        for c in 0..n_classes {
            s.sigma00.push(x[n_modes + 3 * c]);
            s.sigma11.push(x[n_modes + 3 * c + 1]);
            s.sigma22.push(x[n_modes + 3 * c + 2]);
        }
        s
    }
}

/// A stationary solution together with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: SystemState,
    /// Ensemble-averaged stationary inversion `σ11 − σ22`.
    pub w_s: f64,
    /// Order parameter `φ = γ Σ_i G_i n_i^s` (ensemble-averaged gain rate).
    pub phi: f64,
    /// Max-norm of the rate-equation right-hand side at the solution.
    pub residual_norm: f64,
}

/// Controls for [`RateModel::integrate_to_steady`].
#[derive(Debug, Clone, Copy)]
pub struct SteadyOptions {
    pub t_max: f64,
    /// Residual criterion: stop once `‖rhs‖_max <= tol (1 + ‖state‖_max)`.
    pub tol: f64,
    pub ode: OdeOptions,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            t_max: 1e6,
            // the reachable residual floor scales with the Jacobian norm
            // times the local integration error; 1e-8 leaves headroom for
            // strongly amplifying systems (M K n ~ 1e5)
            tol: 1e-8,
            ode: OdeOptions {
                rtol: 1e-12,
                atol: 1e-14,
                ..OdeOptions::default()
            },
        }
    }
}

/// The assembled rate-equation system: per-class gain rates `γ G_i^j`,
/// class decay rates and external damping.
#[derive(Debug, Clone)]
pub struct RateModel {
    /// `gains[c][i] = γ G_i^c = 2 g_i² Γ^c / ((Δ_i − δω12^c)² + Γ^c²)`.
    gains: Vec<Vec<f64>>,
    /// Dots per class.
    class_m: Vec<f64>,
    dots: Vec<DotParams>,
    rates: Vec<DecayRates>,
    r: f64,
    gamma_lr: f64,
    input_flux: f64,
    n_modes: usize,
}

impl RateModel {
    /// Build the model for an inhomogeneous ensemble.
    pub fn new(
        modes: &ModeSet,
        ensemble: &Ensemble,
        pump: &PumpParams,
        wg: &WaveguideParams,
        kind: CooperativityKind,
    ) -> Result<Self> {
        pump.validate()?;
        wg.validate()?;
        let m_total = pump.m as f64;
        let mut gains = Vec::new();
        let mut class_m = Vec::new();
        let mut dots = Vec::new();
        let mut rates = Vec::new();
        for class in ensemble.classes() {
            let rc = decay_rates(&class.dot, pump, wg);
            let k: Vec<f64> = modes
                .detunings()
                .iter()
                .zip(modes.couplings())
                .map(|(&d, &g)| kind.gain_rate(g, d - class.dot.delta_omega12, rc.total))
                .collect();
            gains.push(k);
            class_m.push(class.weight * m_total);
            dots.push(class.dot);
            rates.push(rc);
        }
        Ok(Self {
            gains,
            class_m,
            dots,
            rates,
            r: pump.r,
            gamma_lr: wg.gamma_lr(),
            input_flux: wg.input_flux(),
            n_modes: modes.len(),
        })
    }

    /// Homogeneous ensemble of `M` identical dots.
    pub fn homogeneous(
        modes: &ModeSet,
        dot: DotParams,
        pump: &PumpParams,
        wg: &WaveguideParams,
        kind: CooperativityKind,
    ) -> Result<Self> {
        Self::new(modes, &Ensemble::homogeneous(dot), pump, wg, kind)
    }

    /// Homogeneous model with the per-mode gain rates `γ G_i` supplied
    /// directly (e.g. from a cooperativity profile fitted to a spectrum).
    pub fn from_gain_rates(
        gains: Vec<f64>,
        dot: DotParams,
        pump: &PumpParams,
        wg: &WaveguideParams,
    ) -> Result<Self> {
        pump.validate()?;
        wg.validate()?;
        dot.validate()?;
        if gains.is_empty() {
            return Err(Error::InvalidParameter("need >= 1 gain rate".into()));
        }
        if gains.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::InvalidParameter(
                "gain rates must be finite and >= 0".into(),
            ));
        }
        let rc = decay_rates(&dot, pump, wg);
        let n_modes = gains.len();
        Ok(Self {
            gains: vec![gains],
            class_m: vec![pump.m as f64],
            dots: vec![dot],
            rates: vec![rc],
            r: pump.r,
            gamma_lr: wg.gamma_lr(),
            input_flux: wg.input_flux(),
            n_modes,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_classes(&self) -> usize {
        self.class_m.len()
    }

    pub fn pump_rate(&self) -> f64 {
        self.r
    }

    pub fn gain_rates(&self, class: usize) -> &[f64] {
        &self.gains[class]
    }

    pub fn cold_start(&self) -> SystemState {
        SystemState::cold_start(self.n_modes, self.n_classes())
    }

    fn check_state(&self, state: &SystemState) -> Result<()> {
        if state.n.len() != self.n_modes {
            return Err(Error::DimensionMismatch(format!(
                "state has {} photon modes, model has {}",
                state.n.len(),
                self.n_modes
            )));
        }
        let k = self.n_classes();
        if state.sigma00.len() != k || state.sigma11.len() != k || state.sigma22.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "state has {} population classes, model has {k}",
                state.sigma00.len()
            )));
        }
        Ok(())
    }

    /// Right-hand side of the rate equations.
    pub fn rhs(&self, state: &SystemState) -> Result<SystemState> {
        self.check_state(state)?;
        let x = state.to_flat();
        let mut dx = vec![0.0; x.len()];
        self.rhs_flat(&x, &mut dx);
        Ok(SystemState::from_flat(&dx, self.n_modes, self.n_classes()))
    }

    fn rhs_flat(&self, x: &[f64], dx: &mut [f64]) {
        let nm = self.n_modes;
        for d in dx.iter_mut() {
            *d = 0.0;
        }
        for (c, k) in self.gains.iter().enumerate() {
            let base = nm + 3 * c;
            let (s00, s11, s22) = (x[base], x[base + 1], x[base + 2]);
            let w = s11 - s22;
            let dot = &self.dots[c];
            let rc = &self.rates[c];
            let mc = self.class_m[c];
            let mut stim_sum = 0.0;
            for i in 0..nm {
                if k[i] == 0.0 {
                    continue;
                }
                let stim = k[i] * (x[i] * w + s11);
                dx[i] += mc * stim;
                stim_sum += stim;
            }
            dx[base] = -rc.gamma_0 * s00 + dot.gamma10 * dot.n10 * s11 + self.r * s22;
            dx[base + 1] = -stim_sum - rc.gamma_1 * s11
                + dot.gamma21 * dot.n21 * s22
                + dot.gamma10 * (dot.n10 + 1.0) * s00;
            dx[base + 2] = stim_sum - rc.gamma_2 * s22
                + (self.r + dot.gamma20) * s00
                + dot.gamma21 * (dot.n21 + 1.0) * s11;
        }
        for i in 0..nm {
            dx[i] += -2.0 * self.gamma_lr * x[i] + self.input_flux;
        }
    }

    /// Max-norm of the right-hand side at `state`.
    pub fn residual(&self, state: &SystemState) -> Result<f64> {
        let d = self.rhs(state)?;
        Ok(d.max_norm())
    }

    fn diagnostics(&self, state: SystemState) -> Result<SteadyState> {
        let residual_norm = self.residual(&state)?;
        let m_total: f64 = self.class_m.iter().sum();
        let mut w_s = 0.0;
        for c in 0..self.n_classes() {
            w_s += self.class_m[c] / m_total * (state.sigma11[c] - state.sigma22[c]);
        }
        let mut phi = 0.0;
        for i in 0..self.n_modes {
            let mut k_mean = 0.0;
            for c in 0..self.n_classes() {
                k_mean += self.class_m[c] / m_total * self.gains[c][i];
            }
            phi += k_mean * state.n[i];
        }
        Ok(SteadyState {
            state,
            w_s,
            phi,
            residual_norm,
        })
    }

    /// Integrate the equations observing every accepted step; used for
    /// conservation checks along trajectories.
    pub fn integrate_trajectory<O: FnMut(f64, &SystemState)>(
        &self,
        init: &SystemState,
        t_end: f64,
        ode: &OdeOptions,
        mut observe: O,
    ) -> Result<SystemState> {
        self.check_state(init)?;
        let mut x = init.to_flat();
        let nm = self.n_modes;
        let nc = self.n_classes();
        integrate(
            |_, y, dy| self.rhs_flat(y, dy),
            &mut x,
            0.0,
            t_end,
            ode,
            |t, y| observe(t, &SystemState::from_flat(y, nm, nc)),
        )?;
        Ok(SystemState::from_flat(&x, nm, nc))
    }

    /// Adaptive integration until the right-hand side satisfies
    /// `‖rhs‖_max <= tol (1 + ‖state‖_max)`, or error at `t_max`.
    pub fn integrate_to_steady(
        &self,
        init: &SystemState,
        opts: &SteadyOptions,
    ) -> Result<SteadyState> {
        self.check_state(init)?;
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter("steady tol must be > 0".into()));
        }
        let mut x = init.to_flat();
        let mut dx = vec![0.0; x.len()];
        let mut t = 0.0f64;
        let mut chunk = 1.0;
        loop {
            let t_next = (t + chunk).min(opts.t_max);
            integrate(
                |_, y, dy| self.rhs_flat(y, dy),
                &mut x,
                t,
                t_next,
                &opts.ode,
                |_, _| {},
            )?;
            t = t_next;
            self.rhs_flat(&x, &mut dx);
            let res = dx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if res <= opts.tol * scale {
                return self.diagnostics(SystemState::from_flat(
                    &x,
                    self.n_modes,
                    self.n_classes(),
                ));
            }
            if t >= opts.t_max {
                return Err(Error::NonConvergence(format!(
                    "residual {res:.3e} above tolerance at t_max = {}",
                    opts.t_max
                )));
            }
            chunk *= 1.5;
        }
    }

    /// Analytic Jacobian of the right-hand side, with the `σ00` rows
    /// replaced by the per-class trace constraint for the Newton solve.
    fn newton_system(&self, x: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let nm = self.n_modes;
        let nc = self.n_classes();
        let dim = nm + 3 * nc;
        let mut jac = DMatrix::zeros(dim, dim);
        let mut f = DVector::zeros(dim);
        let mut dx = vec![0.0; dim];
        self.rhs_flat(x, &mut dx);
        for i in 0..nm {
            f[i] = dx[i];
        }
        for c in 0..nc {
            let base = nm + 3 * c;
            // row order per class: trace constraint, σ̇11, σ̇22
            f[base] = x[base] + x[base + 1] + x[base + 2] - 1.0;
            f[base + 1] = dx[base + 1];
            f[base + 2] = dx[base + 2];
        }
        // photon rows
        for i in 0..nm {
            let mut diag = -2.0 * self.gamma_lr;
            for c in 0..nc {
                diag +=
                    self.class_m[c] * self.gains[c][i] * (x[nm + 3 * c + 1] - x[nm + 3 * c + 2]);
            }
            jac[(i, i)] = diag;
            for c in 0..nc {
                let k = self.gains[c][i];
                if k == 0.0 {
                    continue;
                }
                let base = nm + 3 * c;
                let mc = self.class_m[c];
                jac[(i, base + 1)] = mc * k * (x[i] + 1.0);
                jac[(i, base + 2)] = -mc * k * x[i];
            }
        }
        for c in 0..nc {
            let base = nm + 3 * c;
            let dot = &self.dots[c];
            let rc = &self.rates[c];
            let k = &self.gains[c];
            let w = x[base + 1] - x[base + 2];
            let mut k_dot_n = 0.0;
            let mut k_sum = 0.0;
            for i in 0..nm {
                k_dot_n += k[i] * x[i];
                k_sum += k[i];
            }
            // trace constraint row
            jac[(base, base)] = 1.0;
            jac[(base, base + 1)] = 1.0;
            jac[(base, base + 2)] = 1.0;
            // σ̇11 row
            for i in 0..nm {
                jac[(base + 1, i)] = -k[i] * w;
            }
            jac[(base + 1, base)] = dot.gamma10 * (dot.n10 + 1.0);
            jac[(base + 1, base + 1)] = -k_dot_n - k_sum - rc.gamma_1;
            jac[(base + 1, base + 2)] = k_dot_n + dot.gamma21 * dot.n21;
            // σ̇22 row
            for i in 0..nm {
                jac[(base + 2, i)] = k[i] * w;
            }
            jac[(base + 2, base)] = self.r + dot.gamma20;
            jac[(base + 2, base + 1)] = k_dot_n + k_sum + dot.gamma21 * (dot.n21 + 1.0);
            jac[(base + 2, base + 2)] = -k_dot_n - rc.gamma_2;
        }
        (jac, f)
    }

    /// Damped Newton iteration on the stationary conditions, seeded from
    /// `init` (use the output of [`Self::integrate_to_steady`] or of
    /// [`Self::order_parameter_approx`]). Steps are halved up to 30 times
    /// whenever the residual fails to decrease.
    pub fn newton_steady(&self, init: &SystemState, tol: f64) -> Result<SteadyState> {
        self.check_state(init)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("newton tol must be > 0".into()));
        }
        const MAX_ITER: usize = 200;
        let mut x = init.to_flat();
        let mut res_old = {
            let (_, f) = self.newton_system(&x);
            f.amax()
        };
        for iteration in 0..MAX_ITER {
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if res_old <= tol * scale {
                return self.diagnostics(SystemState::from_flat(
                    &x,
                    self.n_modes,
                    self.n_classes(),
                ));
            }
            let (jac, f) = self.newton_system(&x);
            let step = jac
                .lu()
                .solve(&f)
                .ok_or(Error::SingularJacobian { iteration })?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(xi, si)| xi - lambda * si)
                    .collect();
                let (_, f_trial) = self.newton_system(&trial);
                let res_new = f_trial.amax();
                if res_new < res_old || res_new <= tol * scale {
                    x = trial;
                    res_old = res_new;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::NonConvergence(format!(
                    "Newton stalled at residual {res_old:.3e} (iteration {iteration})"
                )));
            }
        }
        Err(Error::NonConvergence(format!(
            "Newton residual {res_old:.3e} after {MAX_ITER} iterations"
        )))
    }

    fn require_order_parameter_regime(&self) -> Result<()> {
        if self.n_classes() != 1 {
            return Err(Error::Precondition(
                "order-parameter solve requires a homogeneous ensemble".into(),
            ));
        }
        if !self.dots[0].is_simplified() {
            return Err(Error::Precondition(
                "order-parameter solve requires n21 = n10 = 0 and gamma20 = 0".into(),
            ));
        }
        if self.input_flux != 0.0 {
            return Err(Error::Precondition(
                "order-parameter solve requires vacuum inputs".into(),
            ));
        }
        if !(self.gamma_lr > 0.0) {
            return Err(Error::Precondition("external damping must be > 0".into()));
        }
        Ok(())
    }

    /// `α`, `β` and the inversion/excitation numerators of the reduced
    /// scalar problem.
    fn order_parameter_coefficients(&self) -> (f64, f64, f64, f64) {
        let dot = &self.dots[0];
        let k_bar: f64 = self.gains[0].iter().sum();
        let alpha = 3.0 * self.r + 2.0 * dot.gamma10;
        let beta = (k_bar + dot.gamma21) * (dot.gamma10 + 2.0 * self.r) + dot.gamma10 * self.r;
        // numerator of w^s(φ)
        let w_num = dot.gamma10 * self.r - (k_bar + dot.gamma21) * (dot.gamma10 + self.r);
        (alpha, beta, w_num, k_bar)
    }

    fn reconstruct(&self, phi: f64) -> Result<SteadyState> {
        let dot = &self.dots[0];
        let m = self.class_m[0];
        let (alpha, beta, w_num, _) = self.order_parameter_coefficients();
        let denom = alpha * phi + beta;
        let sigma11 = (phi * (dot.gamma10 + self.r) + dot.gamma10 * self.r) / denom;
        let w = w_num / denom;
        let sigma00 = self.r * (1.0 - sigma11) / (dot.gamma10 + 2.0 * self.r);
        let sigma22 = 1.0 - sigma00 - sigma11;
        let mut n = vec![0.0; self.n_modes];
        for (i, &k) in self.gains[0].iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            let w_c = 2.0 * self.gamma_lr / (m * k);
            if w >= w_c {
                return Err(Error::ClampingViolation(format!(
                    "stationary inversion {w:.6e} reaches the gain threshold {w_c:.6e} of mode {i}"
                )));
            }
            n[i] = sigma11 / (w_c - w);
        }
        self.diagnostics(SystemState {
            n,
            sigma00: vec![sigma00],
            sigma11: vec![sigma11],
            sigma22: vec![sigma22],
        })
    }

    fn zero_pump_state(&self) -> Result<SteadyState> {
        self.diagnostics(SystemState {
            n: vec![0.0; self.n_modes],
            sigma00: vec![0.0],
            sigma11: vec![0.0],
            sigma22: vec![1.0],
        })
    }

    /// Exact stationary solution of the homogeneous multimode equations:
    /// solves the scalar fixed-point relation for the order parameter `φ`
    /// by bracketed root search, then reconstructs populations and
    /// per-mode photon numbers `n_i^s = σ11^s/(w_i^c − w^s)`.
    pub fn order_parameter_exact(&self) -> Result<SteadyState> {
        self.require_order_parameter_regime()?;
        if self.r == 0.0 {
            return self.zero_pump_state();
        }
        let dot = self.dots[0];
        let m = self.class_m[0];
        let (alpha, beta, w_num, _) = self.order_parameter_coefficients();
        let gains = self.gains[0].clone();
        let gamma_lr = self.gamma_lr;
        let r = self.r;
        let w_c: Vec<f64> = gains
            .iter()
            .map(|&k| {
                if k > 0.0 {
                    2.0 * gamma_lr / (m * k)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let w_c_min = w_c.iter().cloned().fold(f64::INFINITY, f64::min);
        if !w_c_min.is_finite() {
            // no coupled mode at all
            return Err(Error::Precondition(
                "all gain rates vanish; no photon mode couples".into(),
            ));
        }
        let h = |phi: f64| -> f64 {
            let denom = alpha * phi + beta;
            let sigma11 = (phi * (dot.gamma10 + r) + dot.gamma10 * r) / denom;
            let w = w_num / denom;
            let mut sum = 0.0;
            for (k, wc) in gains.iter().zip(&w_c) {
                if *k > 0.0 {
                    sum += k * sigma11 / (wc - w);
                }
            }
            sum - phi
        };
        // lower edge of the valid branch: w(φ) < min_i w_i^c
        let phi_lo = if w_num > 0.0 && w_num / beta >= w_c_min {
            let edge = (w_num / w_c_min - beta) / alpha;
            edge * (1.0 + 1e-9) + 1e-300
        } else {
            0.0
        };
        let mut phi_hi = (2.0 * phi_lo).max(1.0);
        let mut expansions = 0;
        while h(phi_hi) > 0.0 {
            phi_hi *= 2.0;
            expansions += 1;
            if expansions > 300 {
                return Err(Error::Bracketing(
                    "order parameter: no upper bracket found".into(),
                ));
            }
        }
        let phi = first_root(h, phi_lo, phi_hi, 256, 0, 1e-10)?;
        self.reconstruct(phi)
    }

    /// Effective threshold of the closed-form approximation,
    /// `w_min^c = 2γ^lr/(M γG_eff)` with `G_eff` the cooperativity at
    /// coupling `(2/3) g_max`, i.e. `γG_eff = (4/9) max_i γG_i`, floored
    /// at the smallest coupled mode's gain so that flat (rectangular)
    /// profiles keep their exact common threshold.
    fn approx_threshold(&self) -> Result<f64> {
        let k_max = self.gains[0].iter().cloned().fold(0.0f64, f64::max);
        if k_max <= 0.0 {
            return Err(Error::Precondition(
                "all gain rates vanish; no photon mode couples".into(),
            ));
        }
        let k_min = self.gains[0]
            .iter()
            .cloned()
            .filter(|k| *k > 0.0)
            .fold(f64::INFINITY, f64::min);
        let k_eff = (4.0 / 9.0 * k_max).max(k_min);
        Ok(2.0 * self.gamma_lr / (self.class_m[0] * k_eff))
    }

    /// Closed-form approximation of the order parameter,
    /// `φ ≈ A + sqrt(A² + γḠ γ10 R/(w_min^c α))` with
    /// `A = (γ10 R − γ21(γ10 + R) − w_min^c β)/(2 w_min^c α)` and the
    /// effective minimum threshold of [`Self::approx_threshold`];
    /// reconstructed with the per-mode thresholds.
    pub fn order_parameter_approx(&self) -> Result<SteadyState> {
        self.require_order_parameter_regime()?;
        if self.r == 0.0 {
            return self.zero_pump_state();
        }
        let dot = &self.dots[0];
        let (alpha, beta, _, k_bar) = self.order_parameter_coefficients();
        let w_min = self.approx_threshold()?;
        let a = (dot.gamma10 * self.r - dot.gamma21 * (dot.gamma10 + self.r) - w_min * beta)
            / (2.0 * w_min * alpha);
        let phi = a + (a * a + k_bar * dot.gamma10 * self.r / (w_min * alpha)).sqrt();
        self.reconstruct(phi)
    }

    /// Total stationary photon number on the branch without spontaneous
    /// emission, `2 max(A, 0)/γG_max`, which bifurcates at
    /// [`no_se_threshold`].
    pub fn no_se_total(&self) -> Result<f64> {
        self.require_order_parameter_regime()?;
        let dot = &self.dots[0];
        let (alpha, beta, _, _) = self.order_parameter_coefficients();
        let w_min = self.approx_threshold()?;
        let k_eff = 2.0 * self.gamma_lr / (self.class_m[0] * w_min);
        let a = (dot.gamma10 * self.r - dot.gamma21 * (dot.gamma10 + self.r) - w_min * beta)
            / (2.0 * w_min * alpha);
        Ok(2.0 * a.max(0.0) / k_eff)
    }
}

/// Critical pump rate of the multimode no-spontaneous-emission branch:
/// first positive root of `γ10 R − γ21(γ10 + R) − w_min^c(R) β(R) = 0`
/// with the full `R`-dependence of the gain rates retained.
pub fn no_se_threshold(
    modes: &ModeSet,
    dot: &DotParams,
    wg: &WaveguideParams,
    m: u64,
    kind: CooperativityKind,
) -> Result<f64> {
    dot.validate()?;
    wg.validate()?;
    if dot.gamma21 >= dot.gamma10 {
        return Err(Error::NoThreshold(format!(
            "gamma21 = {} >= gamma10 = {}: inversion impossible",
            dot.gamma21, dot.gamma10
        )));
    }
    let gamma_lr = wg.gamma_lr();
    if !(gamma_lr > 0.0) {
        return Err(Error::Precondition("external damping must be > 0".into()));
    }
    let m = m as f64;
    let a_num = |r: f64| {
        let pump = PumpParams { r, m: 1 };
        let rc = decay_rates(dot, &pump, wg);
        let mut k_max = 0.0f64;
        let mut k_min = f64::INFINITY;
        let mut k_bar = 0.0;
        for (&d, &g) in modes.detunings().iter().zip(modes.couplings()) {
            let k = kind.gain_rate(g, d - dot.delta_omega12, rc.total);
            k_max = k_max.max(k);
            if k > 0.0 {
                k_min = k_min.min(k);
            }
            k_bar += k;
        }
        if k_max == 0.0 {
            return -1.0;
        }
        let k_eff = (4.0 / 9.0 * k_max).max(k_min);
        let w_min = 2.0 * gamma_lr / (m * k_eff);
        let beta = (k_bar + dot.gamma21) * (dot.gamma10 + 2.0 * r) + dot.gamma10 * r;
        dot.gamma10 * r - dot.gamma21 * (dot.gamma10 + r) - w_min * beta
    };
    first_root(a_num, 1e-6 * gamma_lr, 10.0 * gamma_lr, 512, 4, 1e-10)
}
