//! Rabi rate and AC-Stark shift of the three-photon transition extracted from
//! the full lab-frame Hamiltonian, without any rotating-wave approximation.
//!
//! Under a continuous drive the one-period propagator `U_T` has two Floquet
//! states built mostly from `|g⟩` and `|e⟩`. Their quasienergy splitting is
//! smallest at the three-photon resonance, where it equals the Rabi rate, and
//! the resonant generator frequency gives the Stark shift `3ω_d - ω_ge`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::unitary_of;
use crate::error::{ensure_finite, Error, Result};
use crate::fit::golden;
use crate::model::{drive_from_eta, lab_frame_hamiltonian, lab_levels, rwa_hamiltonian, DriveParams, TransmonParams};
use crate::operators::{basis, hermitian_eigen, unitary_eigen, Ket};

/// Integration tolerance for one-period propagators.
pub const FLOQUET_TOL: f64 = 1e-12;

/// Coarse generator-frequency samples used to bracket the resonance.
const COARSE_POINTS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetResonance {
    pub eta: f64,
    /// Lab drive amplitude `ε` (rad/s), held fixed during the search.
    pub epsilon: f64,
    /// Resonant generator angular frequency.
    pub omega_d: f64,
    /// Undriven `g↔e` frequency of the lab Hamiltonian.
    pub omega_ge: f64,
    /// Rabi rate (rad/s), the minimum quasienergy splitting.
    pub rabi: f64,
    /// AC-Stark shift `3ω_d - ω_ge` (rad/s).
    pub stark: f64,
}

struct Problem {
    params: TransmonParams,
    epsilon: f64,
    g: Ket,
    e: Ket,
    tol: f64,
}

impl Problem {
    /// Quasienergy difference `q_g - q_e` of the g-like and e-like Floquet
    /// states, wrapped into one Brillouin zone. Its magnitude is `√(Δ² + Ω²)`.
    fn splitting(&self, omega_d: f64) -> Result<f64> {
        let drive = DriveParams { amplitude: self.epsilon, omega_d, phase: 0.0 };
        let h = lab_frame_hamiltonian(&self.params, &drive, None)?;
        let period = TAU / omega_d;
        let u = unitary_of(&h, 0.0, period, self.tol)?;
        let (phases, vecs) = unitary_eigen(&u);
        let weight = |k: usize, v: &Ket| vecs.column(k).dotc(v).norm_sqr();
        let mut idx: Vec<usize> = (0..phases.len()).collect();
        idx.sort_by(|&a, &b| (weight(b, &self.g) + weight(b, &self.e)).total_cmp(&(weight(a, &self.g) + weight(a, &self.e))));
        let (a, b) = (idx[0], idx[1]);
        let (ig, ie) = if weight(a, &self.g) >= weight(b, &self.g) { (a, b) } else { (b, a) };
        // eigenvalue e^{-i q T}
        let q = |k: usize| -phases[k] / period;
        let d = (q(ig) - q(ie)).rem_euclid(omega_d);
        Ok(if d > omega_d / 2.0 { d - omega_d } else { d })
    }
}

/// Locate the three-photon resonance of the lab Hamiltonian at drive strength `eta`.
///
/// The drive amplitude is fixed from `eta` at the analytically expected
/// resonance and the generator frequency is then scanned.
pub fn lab_resonance(params: &TransmonParams, eta: f64, tol: f64) -> Result<FloquetResonance> {
    ensure_finite("eta", eta)?;
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let (levels, vecs) = lab_levels(params)?;
    let omega_ge = levels[1];
    let stark_guess = 2.0 * params.alpha * eta * eta;
    let rabi_guess = 2.0 / 3.0 * params.alpha.abs() * eta.powi(3);
    let wd0 = (omega_ge + stark_guess) / 3.0;
    let epsilon = drive_from_eta(eta.into(), wd0, params)?.re;
    let p = Problem { params: *params, epsilon, g: vecs.column(0).into_owned(), e: vecs.column(1).into_owned(), tol };

    // search window in generator frequency, generous on the Stark side
    let span = (stark_guess.abs() + 20.0 * rabi_guess) / 3.0;
    let (lo, hi) = if params.alpha < 0.0 { (wd0 - 1.5 * span, wd0 + span) } else { (wd0 - span, wd0 + 1.5 * span) };
    let grid: Vec<f64> = (0..COARSE_POINTS).map(|k| lo + (hi - lo) * k as f64 / (COARSE_POINTS - 1) as f64).collect();
    let vals = grid.iter().map(|&w| p.splitting(w).map(f64::abs)).collect::<Result<Vec<_>>>()?;
    let k = (0..COARSE_POINTS).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty grid");
    if k == 0 || k == COARSE_POINTS - 1 {
        return Err(Error::Calibration(format!("no three-photon resonance inside the search window near {wd0:.6e} rad/s (eta = {eta})")));
    }
    let gap = |w: f64| p.splitting(w).map(f64::abs).unwrap_or(f64::INFINITY);
    let omega_d = golden(gap, grid[k - 1], grid[k + 1], 1e-6 * rabi_guess / 3.0)?;
    let rabi = p.splitting(omega_d)?.abs();
    Ok(FloquetResonance { eta, epsilon, omega_d, omega_ge, rabi, stark: 3.0 * omega_d - omega_ge })
}

/// [`lab_resonance`] over many drive strengths, in parallel, in input order.
pub fn lab_scaling_sweep(params: &TransmonParams, etas: &[f64], tol: f64) -> Result<Vec<FloquetResonance>> {
    etas.par_iter().map(|&eta| lab_resonance(params, eta, tol)).collect()
}

/// Same search on the rotating-frame Hamiltonian, which is static: the
/// splitting of the two eigenstates closest to `|g⟩, |e⟩` is minimised over
/// the generator detuning. Level `f` and above still enter through the Kerr
/// term, so at `dim > 2` this is not just the analytic law.
pub fn rwa_resonance(params: &TransmonParams, eta: f64) -> Result<FloquetResonance> {
    ensure_finite("eta", eta)?;
    if eta <= 0.0 {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let g = basis(params.dim, 0);
    let e = basis(params.dim, 1);
    let splitting = |delta: f64| -> Result<f64> {
        let (vals, vecs) = hermitian_eigen(&rwa_hamiltonian(params, eta.into(), delta)?);
        let w = |k: usize| vecs.column(k).dotc(&g).norm_sqr() + vecs.column(k).dotc(&e).norm_sqr();
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| w(b).total_cmp(&w(a)));
        Ok((vals[idx[0]] - vals[idx[1]]).abs())
    };
    let stark_guess = 2.0 * params.alpha * eta * eta;
    let rabi_guess = 2.0 / 3.0 * params.alpha.abs() * eta.powi(3);
    let d0 = stark_guess / 3.0;
    let span = (stark_guess.abs() + 20.0 * rabi_guess) / 3.0;
    let grid: Vec<f64> = (0..COARSE_POINTS).map(|k| d0 - span + 2.0 * span * k as f64 / (COARSE_POINTS - 1) as f64).collect();
    let vals = grid.iter().map(|&d| splitting(d)).collect::<Result<Vec<_>>>()?;
    let k = (1..COARSE_POINTS - 1).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty grid");
    let delta = golden(|d| splitting(d).unwrap_or(f64::INFINITY), grid[k - 1], grid[k + 1], 1e-9 * rabi_guess)?;
    let omega_d = params.omega_q / 3.0 + delta;
    Ok(FloquetResonance {
        eta,
        epsilon: drive_from_eta(eta.into(), omega_d, params)?.re,
        omega_d,
        omega_ge: params.omega_q,
        rabi: splitting(delta)?,
        stark: 3.0 * delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::analytic_rabi_rate;
    use approx::assert_relative_eq;

    #[test]
    fn weak_anharmonicity_matches_rotating_frame() {
        // the counter-rotating corrections shrink with |α|/ω_q
        let mut errs = Vec::new();
        for alpha_mhz in [-10.0, -2.0] {
            let p = TransmonParams::from_lab_units(3.96, alpha_mhz, 6, 0.0, 0.0).unwrap();
            let r = lab_resonance(&p, 0.3, FLOQUET_TOL).unwrap();
            assert_relative_eq!(r.rabi, analytic_rabi_rate(&p, 0.3), max_relative = 0.03);
            assert_relative_eq!(r.stark, 2.0 * p.alpha * 0.09, max_relative = 0.03);
            errs.push((r.rabi / analytic_rabi_rate(&p, 0.3) - 1.0).abs());
        }
        assert!(errs[1] < errs[0]);
    }

    #[test]
    fn rotating_frame_search_reproduces_the_two_level_law() {
        let p = TransmonParams::reference_device().with_dim(2);
        let r = rwa_resonance(&p, 0.4549).unwrap();
        assert_relative_eq!(r.rabi, analytic_rabi_rate(&p, 0.4549), max_relative = 1e-6);
        assert_relative_eq!(r.stark, 2.0 * p.alpha * 0.4549f64.powi(2), max_relative = 1e-6);
        let r3 = rwa_resonance(&p.with_dim(4), 0.4549).unwrap();
        assert_relative_eq!(r3.rabi, r.rabi, max_relative = 0.1);
    }
}
