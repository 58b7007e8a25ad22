//! f-state leakage of a sub-harmonic π pulse with and without the DRAG quadrature.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::device::carrier_reference;
use super::tuneup::area_theorem_length;
use crate::engine::propagate_schrodinger;
use crate::error::{Error, Result};
use crate::fit::bisect;
use crate::model::{drag_detuning, rwa_pulse_hamiltonian, TransmonParams};
use crate::operators::{basis, C64};
use crate::pulses::{drag_correct, Envelope, FlatTop, DEFAULT_SAMPLE_RATE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub duration: f64,
    /// Peak drive strength giving a π rotation by the area theorem.
    pub eta: f64,
    pub p_f_plain: f64,
    pub p_f_drag: f64,
    pub p_e_plain: f64,
    pub p_e_drag: f64,
    /// Normalised ODE residual of the generated quadrature.
    pub drag_residual: f64,
    pub max_eps_y: f64,
}

impl LeakageReport {
    pub fn suppression(&self) -> f64 {
        self.p_f_plain / self.p_f_drag
    }
}

/// Simulate one π pulse of total length `duration` with default flat-top
/// edges, once with the plain envelope and once with the DRAG quadrature,
/// and report the end-of-pulse populations. Each pulse runs at the generator
/// detuning that keeps its plateau resonant.
pub fn drag_leakage(params: &TransmonParams, duration: f64, ramp_rate: f64, ramp_offset: f64, tol: f64) -> Result<LeakageReport> {
    if params.dim < 3 {
        return Err(Error::InvalidDimension("leakage needs at least three levels".into()));
    }
    // peak η whose area gives π in the requested duration
    let eta = bisect(
        |eta| Ok(area_theorem_length(params.alpha, eta, ramp_rate, ramp_offset, PI)? - duration),
        0.05,
        2.0,
        1e-12,
    )
    .map_err(|e| Error::Calibration(format!("no drive strength gives a π pulse in {duration:e} s: {e}")))?;
    let env = FlatTop::new(eta, ramp_rate, ramp_offset, duration)?;
    let sol = drag_correct(&env, params.alpha, DEFAULT_SAMPLE_RATE)?;
    let rot = C64::from_polar(1.0, carrier_reference(params.alpha));
    let g = basis(params.dim, 0);

    let plain_env = env;
    let plain = rwa_pulse_hamiltonian(params, Arc::new(move |t| rot * plain_env.value(t)), 2.0 / 3.0 * params.alpha * eta * eta, true)?;
    let end_plain = propagate_schrodinger(&plain, &g, 0.0, &[duration], tol)?.states.remove(0);

    let drag_sol = sol.clone();
    let delta = drag_detuning(params.alpha, eta, eta.powi(3));
    let drag = rwa_pulse_hamiltonian(
        params,
        Arc::new(move |t| {
            let (x, y) = drag_sol.eval(t);
            rot * C64::new(x, y)
        }),
        delta,
        true,
    )?;
    let end_drag = propagate_schrodinger(&drag, &g, 0.0, &[duration], tol)?.states.remove(0);

    Ok(LeakageReport {
        duration,
        eta,
        p_f_plain: end_plain[2].norm_sqr(),
        p_f_drag: end_drag[2].norm_sqr(),
        p_e_plain: end_plain[1].norm_sqr(),
        p_e_drag: end_drag[1].norm_sqr(),
        drag_residual: sol.residual(),
        max_eps_y: sol.max_abs_y(),
    })
}
