//! Closed-form stationary photon number of a single mode coupled to `M`
//! identical dots, the branch without spontaneous emission and the
//! critical pump rate where that branch bifurcates.
//!
//! Valid in the simplified regime: vacuum baths (`n21 = n10 = 0`,
//! `γ20 = 0`), vacuum inputs and equal external damping `γ^l = γ^r`.

use crate::error::{Error, Result};
use crate::params::{decay_rates, gain_rate, DotParams, PumpParams, WaveguideParams};
use crate::rootfind::first_root;

/// Stationary single-mode solution `n^s = a + sqrt(a² + b)` together with
/// the coefficients entering it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeSolution {
    pub n_s: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub w_c: f64,
}

fn check_regime(dot: &DotParams, wg: &WaveguideParams) -> Result<()> {
    dot.validate()?;
    wg.validate()?;
    if !dot.is_simplified() {
        return Err(Error::Precondition(
            "closed form requires n21 = n10 = 0 and gamma20 = 0; use the multimode solvers".into(),
        ));
    }
    if !wg.is_vacuum_input() {
        return Err(Error::Precondition(
            "closed form requires vacuum inputs n_l = n_r = 0".into(),
        ));
    }
    if wg.gamma_l != wg.gamma_r {
        return Err(Error::Precondition(
            "closed form requires equal external damping gamma_l = gamma_r".into(),
        ));
    }
    if !(wg.gamma_lr() > 0.0) {
        return Err(Error::Precondition("external damping must be > 0".into()));
    }
    Ok(())
}

/// Coefficients of the stationary quadratic for a single mode:
/// `alpha = 3R + 2γ10`, `beta = (γḠ + γ21)(γ10 + 2R) + γ10 R`,
/// `a = (γ10 R − γ21(γ10 + R) − w_c β)/(2 w_c γG α)`,
/// `b = γ10 R/(w_c γG α)` with the gain rate `γG` and threshold
/// `w_c = 2γ^lr/(M γG)`.
fn coefficients(
    g: f64,
    delta: f64,
    dot: &DotParams,
    pump: &PumpParams,
    wg: &WaveguideParams,
) -> Result<SingleModeSolution> {
    check_regime(dot, wg)?;
    pump.validate()?;
    let rates = decay_rates(dot, pump, wg);
    let k = gain_rate(g, delta, rates.total);
    if k <= 0.0 {
        return Err(Error::Domain(format!(
            "vanishing cooperativity for g = {g}: stationary quadratic degenerates"
        )));
    }
    let r = pump.r;
    let m = pump.m as f64;
    let w_c = 2.0 * wg.gamma_lr() / (m * k);
    let alpha = 3.0 * r + 2.0 * dot.gamma10;
    let beta = (k + dot.gamma21) * (dot.gamma10 + 2.0 * r) + dot.gamma10 * r;
    let scale = w_c * k * alpha;
    let a = (dot.gamma10 * r - dot.gamma21 * (dot.gamma10 + r) - w_c * beta) / (2.0 * scale);
    let b = dot.gamma10 * r / scale;
    Ok(SingleModeSolution {
        n_s: a + (a * a + b).sqrt(),
        a,
        b,
        alpha,
        beta,
        w_c,
    })
}

/// Stationary photon number of one mode `(g, Δ)` coupled to `M` identical
/// dots: the non-negative root `n^s = a + sqrt(a² + b)`.
pub fn single_mode_steady(
    g: f64,
    delta: f64,
    dot: &DotParams,
    pump: &PumpParams,
    wg: &WaveguideParams,
) -> Result<SingleModeSolution> {
    coefficients(g, delta, dot, pump, wg)
}

/// Photon number with the spontaneous-emission source removed:
/// `n = 2 max(a, 0)`, bifurcating where `a(R)` changes sign.
pub fn no_se_branch(
    g: f64,
    delta: f64,
    dot: &DotParams,
    pump: &PumpParams,
    wg: &WaveguideParams,
) -> Result<f64> {
    Ok(2.0 * coefficients(g, delta, dot, pump, wg)?.a.max(0.0))
}

/// Critical pump rate `R_c`: the first positive root of `a(R) = 0`, i.e.
/// `γ10 R − γ21(γ10 + R) − w_c(R) β(R) = 0` with the full `R`-dependence
/// of `Γ`, the gain rate and the threshold retained.
///
/// Bracketed on `[1e-6, 10] γ^lr` (expanded geometrically if needed), then
/// polished to a relative tolerance of 1e-10.
pub fn critical_pump_rate(
    g: f64,
    delta: f64,
    dot: &DotParams,
    wg: &WaveguideParams,
    m: u64,
) -> Result<f64> {
    check_regime(dot, wg)?;
    if m < 1 {
        return Err(Error::InvalidParameter("M must be >= 1".into()));
    }
    if dot.gamma21 >= dot.gamma10 {
        return Err(Error::NoThreshold(format!(
            "gamma21 = {} >= gamma10 = {}: inversion impossible, a(R) < 0 for all R",
            dot.gamma21, dot.gamma10
        )));
    }
    if !(g > 0.0) {
        return Err(Error::NoThreshold("zero coupling never amplifies".into()));
    }
    let gamma_lr = wg.gamma_lr();
    let m = m as f64;
    // numerator of a(R); positive root of this is R_c
    let a_num = |r: f64| {
        let pump = PumpParams { r, m: 1 };
        let rates = decay_rates(dot, &pump, wg);
        let k = gain_rate(g, delta, rates.total);
        let w_c = 2.0 * gamma_lr / (m * k);
        let beta = (k + dot.gamma21) * (dot.gamma10 + 2.0 * r) + dot.gamma10 * r;
        dot.gamma10 * r - dot.gamma21 * (dot.gamma10 + r) - w_c * beta
    };
    first_root(a_num, 1e-6 * gamma_lr, 10.0 * gamma_lr, 512, 4, 1e-10)
}
