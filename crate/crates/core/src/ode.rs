//! Adaptive Dormand-Prince 5(4) integrator.
//!
//! Runge-Kutta steps preserve linear invariants of the right-hand side
//! exactly (up to rounding), so population traces are conserved along
//! trajectories without projection.

use crate::error::{Error, Result};

/// Integration controls.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 50_000_000,
            initial_step: None,
        }
    }
}

// Dormand-Prince coefficients (RK5(4)7M).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end`, invoking `observe`
/// after every accepted step. The state is advanced in place.
pub fn integrate<F, O>(
    f: F,
    y: &mut [f64],
    t0: f64,
    t_end: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<()>
where
    F: Fn(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
{
    let n = y.len();
    let mut t = t0;
    let mut k = vec![vec![0.0; n]; 7];
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    f(t, y, &mut k[0]);
    let mut h = match opts.initial_step {
        Some(h0) => h0,
        None => {
            // starting step from the local timescale ‖y‖/‖f‖ with an Euler
            // probe of the curvature
            let sc: Vec<f64> = y
                .iter()
                .map(|v| (opts.atol + opts.rtol * v.abs()).max(1e-300))
                .collect();
            let rms = |v: &[f64]| {
                (v.iter()
                    .zip(&sc)
                    .map(|(a, s)| (a / s) * (a / s))
                    .sum::<f64>()
                    / n as f64)
                    .sqrt()
            };
            let d0 = rms(y);
            let d1 = rms(&k[0]);
            let h0 = if d0 > 1e-5 && d1 > 1e-5 {
                0.01 * d0 / d1
            } else {
                1e-6 * (t_end - t0)
            };
            let y1: Vec<f64> = y.iter().zip(&k[0]).map(|(v, d)| v + h0 * d).collect();
            let mut f1 = vec![0.0; n];
            f(t + h0, &y1, &mut f1);
            let d2 = {
                let diff: Vec<f64> = f1.iter().zip(&k[0]).map(|(a, b)| a - b).collect();
                rms(&diff) / h0
            };
            let d_max = d1.max(d2);
            let h1 = if d_max > 1e-15 {
                (0.01 / d_max).powf(0.2)
            } else {
                (h0 * 1e3).max(1e-6)
            };
            (100.0 * h0).min(h1)
        }
    };
    h = h.min(t_end - t0).max(1e-300);

    let mut first_same_as_last = true; // k[0] already holds f(t, y)
    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(());
        }
        h = h.min(t_end - t);
        if !first_same_as_last {
            f(t, y, &mut k[0]);
        }
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (s, ks) in k.iter().enumerate().take(stage) {
                    acc += A[stage][s] * ks[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            f(t + C[stage] * h, &y_stage, &mut tail[0]);
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut y5 = 0.0;
            let mut y4 = 0.0;
            for s in 0..7 {
                y5 += B5[s] * k[s][i];
                y4 += B4[s] * k[s][i];
            }
            y_new[i] = y[i] + h * y5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let e = h * (y5 - y4) / sc;
            err += e * e;
        }
        err = (err / n as f64).sqrt();

        if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
            t += h;
            y.copy_from_slice(&y_new);
            // stage 7 was evaluated at (t + h, y_new): reuse as next k[0]
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            first_same_as_last = true;
            observe(t, y);
        } else {
            first_same_as_last = false;
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-300 {
                    return Err(Error::NonConvergence(
                        "step size underflow in integrator".into(),
                    ));
                }
                continue;
            }
        }
        let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= factor;
        if h <= 16.0 * f64::EPSILON * t.abs() {
            return Err(Error::NonConvergence(format!(
                "step size underflow at t = {t}"
            )));
        }
    }
    Err(Error::NonConvergence(format!(
        "integrator exhausted {} steps at t = {t}",
        opts.max_steps
    )))
}
