//! Dormand–Prince 5(4) embedded Runge–Kutta integrator for complex systems.
//!
//! Steps are clipped so the integrator lands exactly on every requested
//! output time, which keeps sampled values at full fifth-order accuracy.

use crate::error::{Error, Result};
use crate::operators::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step (0 means unbounded).
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        StepControl { rtol: tol, atol: tol, h_max: 0.0, max_steps: 50_000_000 }
    }
}

/// Counters reported after an integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrate `y' = f(t, y)` from `t0`, calling `observe(k, t_k, y)` at each
/// time in `t_out` (which must be non-decreasing and `>= t0`).
///
/// `y` holds the initial state on entry and the state at the last output
/// time on return.
pub fn integrate<F, O>(mut f: F, t0: f64, y: &mut [C64], t_out: &[f64], ctl: StepControl, mut observe: O) -> Result<Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]),
{
    let n = y.len();
    let mut stats = Stats::default();
    if let Some(w) = t_out.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(format!("output times must be non-decreasing ({} then {})", w[0], w[1])));
    }
    if t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter("output time precedes start time".into()));
    }
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut t = t0;
    let mut h = 0.0;
    let mut fsal = false;

    for (idx, &target) in t_out.iter().enumerate() {
        while t < target {
            if !fsal {
                f(t, y, &mut k[0]);
                stats.evaluations += 1;
                fsal = true;
            }
            if h == 0.0 {
                h = initial_step(&mut f, t, y, &k[0], ctl, target - t, &mut tmp, &mut y_new);
                stats.evaluations += 1;
            }
            if ctl.h_max > 0.0 {
                h = h.min(ctl.h_max);
            }
            let remaining = target - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let h_step = if last { remaining } else { h };
            if h_step <= t.abs().max(remaining) * 1e-14 {
                return Err(Error::Integrator(format!("step size underflow at t = {t:e}")));
            }
            let err = step(&mut f, t, h_step, y, &mut k, &mut tmp, &mut y_new, ctl);
            stats.evaluations += 6;
            if !err.is_finite() {
                return Err(Error::Integrator(format!("non-finite state at t = {t:e}")));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + h_step };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                if !last || h_step >= h {
                    h = h_step * fac;
                }
            } else {
                stats.rejected += 1;
                h = h_step * fac.min(1.0);
            }
            if stats.accepted + stats.rejected > ctl.max_steps {
                return Err(Error::Integrator(format!("step budget of {} exhausted at t = {t:e}", ctl.max_steps)));
            }
        }
        observe(idx, target, y);
    }
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn step<F>(f: &mut F, t: f64, h: f64, y: &[C64], k: &mut [Vec<C64>], tmp: &mut [C64], y_new: &mut [C64], ctl: StepControl) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    for i in 0..n {
        tmp[i] = y[i] + k[0][i] * (h * A21);
    }
    f(t + C2 * h, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + (k[0][i] * A31 + k[1][i] * A32) * h;
    }
    f(t + C3 * h, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + (k[0][i] * A41 + k[1][i] * A42 + k[2][i] * A43) * h;
    }
    f(t + C4 * h, tmp, &mut k[3]);
    for i in 0..n {
        tmp[i] = y[i] + (k[0][i] * A51 + k[1][i] * A52 + k[2][i] * A53 + k[3][i] * A54) * h;
    }
    f(t + C5 * h, tmp, &mut k[4]);
    for i in 0..n {
        tmp[i] = y[i] + (k[0][i] * A61 + k[1][i] * A62 + k[2][i] * A63 + k[3][i] * A64 + k[4][i] * A65) * h;
    }
    f(t + h, tmp, &mut k[5]);
    for i in 0..n {
        y_new[i] = y[i] + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
    }
    f(t + h, y_new, &mut k[6]);
    let mut acc = 0.0;
    for i in 0..n {
        let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
        let sc = ctl.atol + ctl.rtol * y[i].norm().max(y_new[i].norm());
        acc += e.norm_sqr() / (sc * sc);
    }
    (acc / n as f64).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(f: &mut F, t: f64, y: &[C64], f0: &[C64], ctl: StepControl, span: f64, tmp: &mut [C64], f1: &mut [C64]) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..y.len() {
        let sc = ctl.atol + ctl.rtol * y[i].norm();
        d0 += (y[i].norm() / sc).powi(2);
        d1 += (f0[i].norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    // the first trial step stays inside the current output interval
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-3 * span } else { (0.01 * d0 / d1).min(span) };
    for i in 0..y.len() {
        tmp[i] = y[i] + f0[i] * h0;
    }
    f(t + h0, tmp, f1);
    let mut d2 = 0.0;
    for i in 0..y.len() {
        let sc = ctl.atol + ctl.rtol * y[i].norm();
        d2 += ((f1[i] - f0[i]).norm() / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { h0 * 1e-3 } else { (0.01 / d1.max(d2)).powf(0.2) };
    let h = (100.0 * h0).min(h1).min(span);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        h0
    }
}
