//! Nonlinear least-squares fits of power spectra: a direct Gaussian
//! profile and the full forward model with a Gaussian cooperativity
//! strength, reporting normalized squared residuals.

use crate::error::{Error, Result};
use crate::multi::RateModel;
use crate::params::{DotParams, GaussianProfile, PumpParams, WaveguideParams};
use crate::spectrum::{trapezoid, Spectrum};
use nalgebra::{DMatrix, DVector};

/// Result of a spectral fit. For the forward-model fit the profile holds
/// the cooperativity parameters `(G0, ω̄, σ)` and `scale` the overall
/// amplitude mapping photon numbers to the data units.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub profile: GaussianProfile,
    pub scale: Option<f64>,
    /// Normalized sum of squared residuals `Σ r_i² / N`.
    pub residual_per_point: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `Σ (data_i − model_i)² / N` on identical grids.
pub fn residual_norm(data: &Spectrum, model: &Spectrum) -> Result<f64> {
    if data.omega != model.omega {
        return Err(Error::Grid("residual norm requires identical grids".into()));
    }
    let n = data.len() as f64;
    Ok(data
        .power
        .iter()
        .zip(&model.power)
        .map(|(d, m)| (d - m) * (d - m))
        .sum::<f64>()
        / n)
}

fn check_fit_data(data: &Spectrum) -> Result<()> {
    if data.len() < 4 {
        return Err(Error::DegenerateData(format!(
            "need at least 4 samples, got {}",
            data.len()
        )));
    }
    if data.power.iter().any(|&s| s < 0.0) {
        return Err(Error::DegenerateData("negative power samples".into()));
    }
    let first = data.power[0];
    if data.power.iter().all(|&s| s == first) {
        return Err(Error::DegenerateData("all power samples equal".into()));
    }
    Ok(())
}

/// Damped Gauss-Newton driver on a residual/Jacobian closure, minimizing
/// `‖r(p)‖²`. Converges on the relative parameter change.
fn gauss_newton<F>(
    mut eval: F,
    p0: Vec<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64, usize, bool)>
where
    F: FnMut(&[f64]) -> Result<(DVector<f64>, DMatrix<f64>)>,
{
    let mut p = p0;
    let (mut r, mut jac) = eval(&p)?;
    let mut ssr = r.norm_squared();
    for iter in 0..max_iter {
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let rhs = &jt * &r;
        let step = match normal.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => normal
                .lu()
                .solve(&rhs)
                .ok_or(Error::SingularJacobian { iteration: iter })?,
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..25 {
            let trial: Vec<f64> = p
                .iter()
                .zip(step.iter())
                .map(|(pi, si)| pi - lambda * si)
                .collect();
            match eval(&trial) {
                Ok((r_new, j_new)) => {
                    let ssr_new = r_new.norm_squared();
                    if ssr_new <= ssr {
                        let rel_change = p
                            .iter()
                            .zip(&trial)
                            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-30))
                            .fold(0.0f64, f64::max);
                        let ssr_gain = ssr - ssr_new;
                        p = trial;
                        r = r_new;
                        jac = j_new;
                        ssr = ssr_new;
                        improved = true;
                        if rel_change <= rel_tol || ssr_gain <= 1e-12 * ssr.max(1e-300) {
                            return Ok((p, ssr, iter + 1, true));
                        }
                        break;
                    }
                }
                Err(Error::ClampingViolation(_)) | Err(Error::Precondition(_)) => {}
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
        }
        if !improved {
            // stuck: treat a tiny gradient as converged
            let grad = (jac.transpose() * &r).amax();
            return Ok((p, ssr, iter + 1, grad <= 1e-12 * (1.0 + ssr)));
        }
    }
    Ok((p, ssr, max_iter, false))
}

/// Least-squares fit of `S(ω) = S0/(sqrt(2π)σ) exp(−(ω−ω̄)²/(2σ²))`,
/// initialized from sample moments. Returns amplitude `S0`, center and
/// width; `residual_per_point = Σ r²/N`.
pub fn fit_gaussian(data: &Spectrum) -> Result<FitResult> {
    check_fit_data(data)?;
    // standardize the frequency axis for conditioning
    let n = data.len();
    let mean: f64 = data.omega.iter().sum::<f64>() / n as f64;
    let spread = (data
        .omega
        .iter()
        .map(|w| (w - mean) * (w - mean))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let x: Vec<f64> = data.omega.iter().map(|w| (w - mean) / spread).collect();

    // moment initialization in standardized coordinates
    let total: f64 = data.power.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateData("spectrum carries no power".into()));
    }
    let x_mean: f64 = x.iter().zip(&data.power).map(|(xi, s)| xi * s).sum::<f64>() / total;
    let x_var: f64 = x
        .iter()
        .zip(&data.power)
        .map(|(xi, s)| (xi - x_mean) * (xi - x_mean) * s)
        .sum::<f64>()
        / total;
    let sigma0 = x_var.sqrt().max(1e-3);
    let area0 = trapezoid(&x, &data.power).max(1e-30);

    let sqrt_tau = (2.0 * std::f64::consts::PI).sqrt();
    let eval = |p: &[f64]| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (s0, c, sig) = (p[0], p[1], p[2]);
        if !(sig > 0.0) {
            return Err(Error::Precondition("width collapsed".into()));
        }
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, 3);
        for i in 0..n {
            let z = (x[i] - c) / sig;
            let m = s0 / (sqrt_tau * sig) * (-0.5 * z * z).exp();
            r[i] = m - data.power[i];
            jac[(i, 0)] = m / s0.max(1e-300);
            jac[(i, 1)] = m * z / sig;
            jac[(i, 2)] = m * (z * z - 1.0) / sig;
        }
        Ok((r, jac))
    };
    let (p, ssr, iterations, converged) =
        gauss_newton(eval, vec![area0, x_mean, sigma0], 1e-12, 100)?;
    if !converged && ssr / (n as f64) > 1e-6 * data.power.iter().fold(0.0f64, |m, v| m.max(v * v)) {
        return Err(Error::NonConvergence(format!(
            "Gaussian fit stalled after {iterations} iterations"
        )));
    }
    Ok(FitResult {
        profile: GaussianProfile::new(p[0] * spread, mean + p[1] * spread, p[2] * spread)?,
        scale: None,
        residual_per_point: ssr / n as f64,
        iterations,
        converged,
    })
}

/// Fixed system parameters of the forward-model fit.
#[derive(Debug, Clone)]
pub struct ModelFitContext {
    pub dot: DotParams,
    pub pump: PumpParams,
    pub wg: WaveguideParams,
}

impl ModelFitContext {
    /// Stationary photon numbers on the data grid for a Gaussian
    /// cooperativity profile `G(ω)`; the grid points are the modes.
    pub fn forward(&self, omega: &[f64], profile: &GaussianProfile) -> Result<Vec<f64>> {
        profile.validate()?;
        let gains: Vec<f64> = omega.iter().map(|&w| profile.eval(w)).collect();
        let model = RateModel::from_gain_rates(gains, self.dot, &self.pump, &self.wg)?;
        Ok(model.order_parameter_exact()?.state.n)
    }
}

/// Forward-model fit: minimizes the residuals between the data and
/// `scale · n^s(ω)` where `n^s` is the stationary photon number for a
/// Gaussian cooperativity strength `G(ω) = G0 exp(−(ω−ω̄)²/(2σ²))`.
///
/// Optimizes `(G0, ω̄, σ, scale)` by damped Gauss-Newton with a
/// finite-difference Jacobian in log-space for the positive parameters;
/// `init` seeds `(G0, ω̄, σ)` and `init_scale` the amplitude.
pub fn fit_model(
    data: &Spectrum,
    ctx: &ModelFitContext,
    init: &GaussianProfile,
    init_scale: f64,
) -> Result<FitResult> {
    check_fit_data(data)?;
    init.validate()?;
    if !(init_scale > 0.0) {
        return Err(Error::InvalidParameter("init_scale must be > 0".into()));
    }
    if data.power.iter().all(|&s| s == 0.0) {
        return Err(Error::DegenerateData("flat zero spectrum".into()));
    }
    let n = data.len();
    let omega = data.omega.clone();
    let mean: f64 = omega.iter().sum::<f64>() / n as f64;
    let spread = (omega.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n as f64).sqrt();

    // parameters: [ln G0, (ω̄ − mean)/spread, ln(σ/spread), ln scale]
    let model_at = |p: &[f64]| -> Result<Vec<f64>> {
        let profile = GaussianProfile::new(p[0].exp(), mean + p[1] * spread, p[2].exp() * spread)?;
        let n_s = ctx.forward(&omega, &profile)?;
        let scale = p[3].exp();
        Ok(n_s.iter().map(|v| scale * v).collect())
    };
    let eval = |p: &[f64]| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let m0 = model_at(p)?;
        let mut r = DVector::zeros(n);
        for i in 0..n {
            r[i] = m0[i] - data.power[i];
        }
        let mut jac = DMatrix::zeros(n, 4);
        for k in 0..4 {
            let h = 1e-6 * p[k].abs().max(1e-3);
            let mut p_hi = p.to_vec();
            p_hi[k] += h;
            let mut p_lo = p.to_vec();
            p_lo[k] -= h;
            let (m_hi, m_lo) = (model_at(&p_hi)?, model_at(&p_lo)?);
            for i in 0..n {
                jac[(i, k)] = (m_hi[i] - m_lo[i]) / (2.0 * h);
            }
        }
        Ok((r, jac))
    };

    let p0 = vec![
        init.amplitude.ln(),
        (init.center - mean) / spread,
        (init.width / spread).ln(),
        init_scale.ln(),
    ];
    // reject seeds the forward model cannot evaluate at all
    if let Err(e) = model_at(&p0) {
        return Err(match e {
            Error::ClampingViolation(m) => Error::FitInfeasible(format!(
                "forward model diverges at the initial parameters: {m}"
            )),
            other => other,
        });
    }
    let (p, ssr, iterations, converged) = gauss_newton(eval, p0, 1e-8, 200)?;
    if !converged {
        return Err(Error::NonConvergence(format!(
            "model fit stalled after {iterations} iterations, Σr²/N = {:.3e}",
            ssr / n as f64
        )));
    }
    Ok(FitResult {
        profile: GaussianProfile::new(p[0].exp(), mean + p[1] * spread, p[2].exp() * spread)?,
        scale: Some(p[3].exp()),
        residual_per_point: ssr / n as f64,
        iterations,
        converged,
    })
}

/// Sample the normalized Gaussian `S0/(sqrt(2π)σ) e^{-(ω-ω̄)²/(2σ²)}`.
pub fn gaussian_spectrum_samples(profile: &GaussianProfile, omega: &[f64]) -> Vec<f64> {
    let norm = profile.amplitude / ((2.0 * std::f64::consts::PI).sqrt() * profile.width);
    omega
        .iter()
        .map(|&w| {
            let z = (w - profile.center) / profile.width;
            norm * (-0.5 * z * z).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Provenance;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_gaussian() -> GaussianProfile {
        GaussianProfile::new(0.117, 1.506e15, 7.286e12).unwrap()
    }

    fn synth(profile: &GaussianProfile, n: usize, half_width: f64) -> Spectrum {
        let omega: Vec<f64> = (0..n)
            .map(|k| {
                profile.center
                    + profile.width * (-half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
            })
            .collect();
        let power = gaussian_spectrum_samples(profile, &omega);
        Spectrum::new(
            omega,
            power,
            Provenance::Synthetic {
                label: "gaussian".into(),
            },
        )
        .unwrap()
    }

    #[test]
    fn gaussian_roundtrip_reference_row() {
        let truth = reference_gaussian();
        let data = synth(&truth, 200, 4.0);
        let fit = fit_gaussian(&data).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.profile.amplitude, truth.amplitude, max_relative = 1e-6);
        assert_relative_eq!(fit.profile.center, truth.center, max_relative = 1e-6);
        assert_relative_eq!(fit.profile.width, truth.width, max_relative = 1e-6);
        assert!(fit.residual_per_point < 1e-20);
    }

    #[test]
    fn gaussian_rejects_degenerate_data() {
        let omega: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let data = Spectrum::new(
            omega.clone(),
            vec![0.0; 10],
            Provenance::Synthetic {
                label: "zero".into(),
            },
        )
        .unwrap();
        assert!(matches!(fit_gaussian(&data), Err(Error::DegenerateData(_))));
        let data = Spectrum::new(
            omega,
            vec![1.0; 10],
            Provenance::Synthetic {
                label: "flat".into(),
            },
        )
        .unwrap();
        assert!(matches!(fit_gaussian(&data), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn gaussian_fit_with_noise_recovers_parameters() {
        // 1% additive noise: parameters within 1%, residual near the noise
        // variance; oracle on one seed is a brute-force grid refinement.
        let truth = reference_gaussian();
        let clean = synth(&truth, 200, 4.0);
        let peak = clean.power.iter().cloned().fold(0.0f64, f64::max);
        let noise_sd = 0.01 * peak;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut residuals = Vec::new();
        for seed in 0..100 {
            let _ = seed;
            let noisy: Vec<f64> = clean
                .power
                .iter()
                .map(|&s| {
                    // Box-Muller
                    let u1: f64 = rng.gen_range(1e-12..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                    (s + noise_sd * z).max(0.0)
                })
                .collect();
            let data = Spectrum::new(
                clean.omega.clone(),
                noisy,
                Provenance::Synthetic {
                    label: "noisy".into(),
                },
            )
            .unwrap();
            let fit = fit_gaussian(&data).unwrap();
            assert_relative_eq!(fit.profile.center, truth.center, max_relative = 0.01);
            assert_relative_eq!(fit.profile.width, truth.width, max_relative = 0.01);
            assert_relative_eq!(fit.profile.amplitude, truth.amplitude, max_relative = 0.01);
            residuals.push(fit.residual_per_point);
        }
        let mean_residual: f64 = residuals.iter().sum::<f64>() / residuals.len() as f64;
        assert_relative_eq!(mean_residual, noise_sd * noise_sd, max_relative = 0.25);
    }

    #[test]
    fn gaussian_fit_beats_coarse_grid_oracle_on_one_seed() {
        let truth = reference_gaussian();
        let clean = synth(&truth, 120, 4.0);
        let peak = clean.power.iter().cloned().fold(0.0f64, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<f64> = clean
            .power
            .iter()
            .map(|&s| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                (s + 0.01 * peak * z).max(0.0)
            })
            .collect();
        let data = Spectrum::new(
            clean.omega.clone(),
            noisy,
            Provenance::Synthetic {
                label: "noisy".into(),
            },
        )
        .unwrap();
        let fit = fit_gaussian(&data).unwrap();
        // brute-force refinement around wide bounds
        let mut best = f64::INFINITY;
        let (mut c_lo, mut c_hi) = (truth.center - truth.width, truth.center + truth.width);
        let (mut s_lo, mut s_hi) = (0.5 * truth.width, 2.0 * truth.width);
        let (mut a_lo, mut a_hi) = (0.5 * truth.amplitude, 2.0 * truth.amplitude);
        for _ in 0..6 {
            let mut arg = (0.0, 0.0, 0.0);
            best = f64::INFINITY;
            for ic in 0..=8 {
                for is in 0..=8 {
                    for ia in 0..=8 {
                        let c = c_lo + (c_hi - c_lo) * ic as f64 / 8.0;
                        let s = s_lo + (s_hi - s_lo) * is as f64 / 8.0;
                        let a = a_lo + (a_hi - a_lo) * ia as f64 / 8.0;
                        let p = GaussianProfile::new(a, c, s).unwrap();
                        let m = gaussian_spectrum_samples(&p, &data.omega);
                        let ssr: f64 = m
                            .iter()
                            .zip(&data.power)
                            .map(|(mi, di)| (mi - di) * (mi - di))
                            .sum();
                        if ssr < best {
                            best = ssr;
                            arg = (a, c, s);
                        }
                    }
                }
            }
            let (a, c, s) = arg;
            let (dc, ds, da) = (
                (c_hi - c_lo) / 8.0,
                (s_hi - s_lo) / 8.0,
                (a_hi - a_lo) / 8.0,
            );
            c_lo = c - dc;
            c_hi = c + dc;
            s_lo = s - ds;
            s_hi = s + ds;
            a_lo = a - da;
            a_hi = a + da;
        }
        let oracle = best / data.len() as f64;
        assert!(
            fit.residual_per_point <= oracle * (1.0 + 1e-6),
            "Gauss-Newton {} vs grid oracle {}",
            fit.residual_per_point,
            oracle
        );
    }

    #[test]
    fn gaussian_fit_equivariances() {
        let truth = reference_gaussian();
        let data = synth(&truth, 150, 4.0);
        let base = fit_gaussian(&data).unwrap();
        // scale by c > 0
        let scaled = Spectrum::new(
            data.omega.clone(),
            data.power.iter().map(|s| 3.5 * s).collect(),
            Provenance::Synthetic {
                label: "scaled".into(),
            },
        )
        .unwrap();
        let fs = fit_gaussian(&scaled).unwrap();
        assert_relative_eq!(
            fs.profile.amplitude,
            3.5 * base.profile.amplitude,
            max_relative = 1e-8
        );
        assert_relative_eq!(fs.profile.center, base.profile.center, max_relative = 1e-10);
        assert_relative_eq!(fs.profile.width, base.profile.width, max_relative = 1e-8);
        // shift the grid by δ
        let delta = 3.0e13;
        let shifted = Spectrum::new(
            data.omega.iter().map(|w| w + delta).collect(),
            data.power.clone(),
            Provenance::Synthetic {
                label: "shifted".into(),
            },
        )
        .unwrap();
        let fsh = fit_gaussian(&shifted).unwrap();
        assert_relative_eq!(
            fsh.profile.center,
            base.profile.center + delta,
            max_relative = 1e-10
        );
        assert_relative_eq!(fsh.profile.width, base.profile.width, max_relative = 1e-8);
        assert_relative_eq!(
            fsh.profile.amplitude,
            base.profile.amplitude,
            max_relative = 1e-8
        );
    }

    fn reference_model_profile() -> GaussianProfile {
        GaussianProfile::new(2.467e-4, 1.506e15, 7.962e12).unwrap()
    }

    fn fig10_context() -> ModelFitContext {
        ModelFitContext {
            dot: DotParams::bare(0.1, 1.0),
            pump: PumpParams::new(0.5, 10_000),
            wg: WaveguideParams::symmetric(1.0),
        }
    }

    fn model_data(profile: &GaussianProfile, scale: f64, n: usize) -> Spectrum {
        let ctx = fig10_context();
        let omega: Vec<f64> = (0..n)
            .map(|k| profile.center + profile.width * (-4.0 + 8.0 * k as f64 / (n - 1) as f64))
            .collect();
        let n_s = ctx.forward(&omega, profile).unwrap();
        Spectrum::new(
            omega,
            n_s.iter().map(|v| scale * v).collect(),
            Provenance::Synthetic {
                label: "model".into(),
            },
        )
        .unwrap()
    }

    #[test]
    fn model_roundtrip_reference_row() {
        let truth = reference_model_profile();
        let data = model_data(&truth, 0.05, 161);
        let ctx = fig10_context();
        // seed within ±50% of the truth
        let init = GaussianProfile::new(
            1.4 * truth.amplitude,
            truth.center + 0.3 * truth.width,
            0.7 * truth.width,
        )
        .unwrap();
        let fit = fit_model(&data, &ctx, &init, 0.08).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.profile.amplitude, truth.amplitude, max_relative = 1e-3);
        assert_relative_eq!(fit.profile.center, truth.center, max_relative = 1e-3);
        assert_relative_eq!(fit.profile.width, truth.width, max_relative = 1e-3);
        assert_relative_eq!(fit.scale.unwrap(), 0.05, max_relative = 1e-3);
    }

    #[test]
    fn model_fit_rejects_flat_zero_data() {
        let omega: Vec<f64> = (0..20).map(|k| 1.0e15 + k as f64 * 1e12).collect();
        let data = Spectrum::new(
            omega,
            vec![0.0; 20],
            Provenance::Synthetic {
                label: "zero".into(),
            },
        )
        .unwrap();
        let ctx = fig10_context();
        assert!(matches!(
            fit_model(&data, &ctx, &reference_model_profile(), 1.0),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn model_fit_beats_gaussian_fit_on_model_data() {
        // the forward model is Gaussian-like with nonlinear corrections;
        // its own fit must sit below the best pure Gaussian
        let truth = reference_model_profile();
        let data = model_data(&truth, 0.05, 161);
        let gauss = fit_gaussian(&data).unwrap();
        let model = fit_model(&data, &fig10_context(), &truth, 0.05).unwrap();
        assert!(
            model.residual_per_point < gauss.residual_per_point,
            "model {} !< gauss {}",
            model.residual_per_point,
            gauss.residual_per_point
        );
        assert!(gauss.residual_per_point > 0.0);
    }

    #[test]
    fn residual_norm_basics() {
        let omega: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let a = Spectrum::new(
            omega.clone(),
            vec![1.0, 2.0, 3.0, 2.0, 1.0],
            Provenance::Synthetic { label: "a".into() },
        )
        .unwrap();
        assert_eq!(residual_norm(&a, &a).unwrap(), 0.0);
        let b = Spectrum::new(
            omega.clone(),
            a.power.iter().map(|v| v + 0.25).collect(),
            Provenance::Synthetic { label: "b".into() },
        )
        .unwrap();
        assert_relative_eq!(residual_norm(&a, &b).unwrap(), 0.0625);
        let c = Spectrum::new(
            omega.iter().map(|w| w + 1.0).collect(),
            a.power.clone(),
            Provenance::Synthetic { label: "c".into() },
        )
        .unwrap();
        assert!(residual_norm(&a, &c).is_err());
    }

    #[test]
    fn frequency_crosscheck_2pi_024_phz() {
        let omega_bar = 2.0 * std::f64::consts::PI * 0.24e15;
        assert_relative_eq!(omega_bar, 1.506e15, max_relative = 2e-3);
    }
}
