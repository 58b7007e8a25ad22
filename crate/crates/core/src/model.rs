//! Transmon model: lab-frame Hamiltonian with the quartic nonlinearity, the
//! displaced-frame drive parameter η, and the effective rotating-frame
//! Hamiltonian for a drive near one third of the qubit frequency.
//!
//! Angular frequencies are in rad/s, times in seconds.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::Driven;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::operators::{hermitian_eigen, ladder_set, position_power, Operator, C64};

/// Qubit parameters. `alpha` is the anharmonicity (negative for a transmon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub omega_q: f64,
    pub alpha: f64,
    pub dim: usize,
    pub t1: f64,
    pub t2: f64,
}

impl TransmonParams {
    pub fn new(omega_q: f64, alpha: f64, dim: usize, t1: f64, t2: f64) -> Result<Self> {
        let p = TransmonParams { omega_q, alpha, dim, t1, t2 };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor taking frequencies in GHz/MHz and times in µs.
    pub fn from_lab_units(freq_ghz: f64, alpha_mhz: f64, dim: usize, t1_us: f64, t2_us: f64) -> Result<Self> {
        Self::new(TAU * freq_ghz * 1e9, TAU * alpha_mhz * 1e6, dim, t1_us * 1e-6, t2_us * 1e-6)
    }

    /// The measured device: 3.96 GHz, -208 MHz, T1 = 42 µs, echo T2 = 23 µs.
    pub fn reference_device() -> Self {
        Self::from_lab_units(3.96, -208.0, 5, 42.0, 23.0).expect("valid reference parameters")
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(format!("dim must be >= 2, got {}", self.dim)));
        }
        ensure_positive("omega_q", self.omega_q)?;
        ensure_finite("alpha", self.alpha)?;
        ensure_finite("t1", self.t1)?;
        ensure_finite("t2", self.t2)?;
        if self.t1 < 0.0 || self.t2 < 0.0 {
            return Err(Error::InvalidParameter("coherence times must be non-negative".into()));
        }
        Ok(())
    }

    /// `ω_q - α`, the frequency that sets the displacement of the driven oscillator.
    pub fn shifted_frequency(&self) -> f64 {
        self.omega_q - self.alpha
    }
}

/// Continuous drive `ε(t) = 2|ε| cos(ω_d t + φ)` in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// `|ε|` in rad/s.
    pub amplitude: f64,
    pub omega_d: f64,
    pub phase: f64,
}

/// Drive parameter of the displaced frame, `η = 2ε ω'/(ω_d² - ω'²)` with `ω' = ω_q - α`.
pub fn eta_from_drive(epsilon: C64, omega_d: f64, params: &TransmonParams) -> Result<C64> {
    let denom = drive_denominator(omega_d, params)?;
    Ok(epsilon * (2.0 * params.shifted_frequency() / denom))
}

/// Inverse of [`eta_from_drive`].
pub fn drive_from_eta(eta: C64, omega_d: f64, params: &TransmonParams) -> Result<C64> {
    let denom = drive_denominator(omega_d, params)?;
    Ok(eta * (denom / (2.0 * params.shifted_frequency())))
}

fn drive_denominator(omega_d: f64, params: &TransmonParams) -> Result<f64> {
    ensure_finite("omega_d", omega_d)?;
    let wp = params.shifted_frequency();
    let denom = omega_d * omega_d - wp * wp;
    if denom.abs() < 1e-6 * wp * wp {
        return Err(Error::InvalidParameter(format!("drive at {omega_d:e} rad/s is resonant with omega_q - alpha")));
    }
    Ok(denom)
}

/// Static part of the lab-frame Hamiltonian, `(ω_q-α) q†q + (α/12)(q+q†)^4`.
pub fn lab_static_hamiltonian(params: &TransmonParams) -> Result<Operator> {
    params.validate()?;
    let l = ladder_set(params.dim)?;
    Ok(&l.n * C64::new(params.shifted_frequency(), 0.0) + position_power(params.dim, 4) * C64::new(params.alpha / 12.0, 0.0))
}

/// Lab-frame Hamiltonian under a continuous drive, optionally modulated by
/// a real envelope `s(t)` (so `ε(t) = 2|ε| s(t) cos(ω_d t + φ)`).
pub fn lab_frame_hamiltonian(params: &TransmonParams, drive: &DriveParams, envelope: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>) -> Result<Driven> {
    ensure_finite("drive amplitude", drive.amplitude)?;
    ensure_finite("drive phase", drive.phase)?;
    ensure_finite("omega_d", drive.omega_d)?;
    let h0 = lab_static_hamiltonian(params)?;
    let l = ladder_set(params.dim)?;
    let x = &l.a + &l.adag;
    let DriveParams { amplitude, omega_d, phase } = *drive;
    let h = match envelope {
        None => Driven::new(h0).term(x, move |t| C64::new(2.0 * amplitude * (omega_d * t + phase).cos(), 0.0)),
        Some(s) => Driven::new(h0).term(x, move |t| C64::new(2.0 * amplitude * s(t) * (omega_d * t + phase).cos(), 0.0)),
    };
    Ok(h)
}

/// Energies (relative to the ground state, ascending) and eigenvectors of the
/// undriven lab-frame Hamiltonian.
pub fn lab_levels(params: &TransmonParams) -> Result<(Vec<f64>, Operator)> {
    let h0 = lab_static_hamiltonian(params)?;
    let (vals, vecs) = hermitian_eigen(&h0);
    let e0 = vals[0];
    Ok((vals.iter().map(|e| e - e0).collect(), vecs))
}

/// Kerr operator `q†q†qq`.
fn kerr(dim: usize) -> Result<Operator> {
    let l = ladder_set(dim)?;
    Ok(&l.adag * &l.adag * &l.a * &l.a)
}

/// Effective Hamiltonian in the frame rotating at `3ω_d`:
/// `(2α|η|² - 3δ) q†q + (α/2) q†q†qq + (α/3)(η³ q† + η*³ q)`, with `δ = ω_d - ω_q/3`.
pub fn rwa_hamiltonian(params: &TransmonParams, eta: C64, delta: f64) -> Result<Operator> {
    params.validate()?;
    ensure_finite("delta", delta)?;
    if !eta.re.is_finite() || !eta.im.is_finite() {
        return Err(Error::NonFinite(format!("eta = {eta}")));
    }
    let l = ladder_set(params.dim)?;
    let a = params.alpha;
    let eta3 = eta.powu(3);
    Ok(&l.n * C64::new(2.0 * a * eta.norm_sqr() - 3.0 * delta, 0.0)
        + kerr(params.dim)? * C64::new(a / 2.0, 0.0)
        + &l.adag * (eta3 * (a / 3.0))
        + &l.a * (eta3.conj() * (a / 3.0)))
}

/// Time-dependent form of [`rwa_hamiltonian`] for a shaped drive `η(t)`.
///
/// With `stark = false` the `2α|η|²` term is dropped, which models a device
/// whose drive produces no AC-Stark shift.
pub fn rwa_pulse_hamiltonian(params: &TransmonParams, eta: Arc<dyn Fn(f64) -> C64 + Send + Sync>, delta: f64, stark: bool) -> Result<Driven> {
    params.validate()?;
    ensure_finite("delta", delta)?;
    let l = ladder_set(params.dim)?;
    let a = params.alpha;
    let h0 = &l.n * C64::new(-3.0 * delta, 0.0) + kerr(params.dim)? * C64::new(a / 2.0, 0.0);
    let (e1, e2, e3) = (eta.clone(), eta.clone(), eta);
    let mut h = Driven::new(h0)
        .term(l.adag.clone(), move |t| e1(t).powu(3) * (a / 3.0))
        .term(l.a.clone(), move |t| e2(t).powu(3).conj() * (a / 3.0));
    if stark {
        h = h.term(l.n.clone(), move |t| C64::new(2.0 * a * e3(t).norm_sqr(), 0.0));
    }
    Ok(h)
}

/// Rabi rate of the three-photon transition, `(2/3)|α||η|³` (rad/s).
pub fn analytic_rabi_rate(params: &TransmonParams, eta: f64) -> f64 {
    2.0 / 3.0 * params.alpha.abs() * eta.abs().powi(3)
}

/// AC-Stark shift of the qubit, `2α|η|²` (rad/s).
pub fn analytic_stark_shift(params: &TransmonParams, eta: f64) -> f64 {
    2.0 * params.alpha * eta * eta
}

/// Generator detuning `δ` that keeps a DRAG pulse resonant,
/// `(2/3)α|η|² - (2/27)α ζ_x²` with `ζ_x = Re η³`.
pub fn drag_detuning(alpha: f64, eta: f64, zeta_x: f64) -> f64 {
    2.0 / 3.0 * alpha * eta * eta - 2.0 / 27.0 * alpha * zeta_x * zeta_x
}

/// Energy relaxation `√(1/T1) q` and pure dephasing `√(2Γ_φ) q†q`, with
/// `Γ_φ = 1/T2 - 1/(2T1)`. A zero time disables the corresponding channel.
pub fn collapse_operators(params: &TransmonParams) -> Result<Vec<Operator>> {
    params.validate()?;
    let l = ladder_set(params.dim)?;
    let mut ops = Vec::new();
    let gamma1 = if params.t1 > 0.0 { 1.0 / params.t1 } else { 0.0 };
    if gamma1 > 0.0 {
        ops.push(&l.a * C64::new(gamma1.sqrt(), 0.0));
    }
    if params.t2 > 0.0 {
        let gphi = 1.0 / params.t2 - gamma1 / 2.0;
        if gphi < -1e-12 * gamma1 {
            return Err(Error::InvalidParameter(format!("T2 = {:e} s exceeds 2 T1 = {:e} s", params.t2, 2.0 * params.t1)));
        }
        if gphi > 0.0 {
            ops.push(&l.n * C64::new((2.0 * gphi).sqrt(), 0.0));
        }
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{hermiticity_error, ladder_set};
    use approx::assert_relative_eq;

    fn dev() -> TransmonParams {
        TransmonParams::reference_device()
    }

    #[test]
    fn rwa_two_level_matrix() {
        // dim 2: diag(0, 2α|η|² - 3δ) plus off-diagonal (α/3)η³
        let p = dev().with_dim(2);
        let eta = C64::new(0.3, 0.0);
        let h = rwa_hamiltonian(&p, eta, 0.0).unwrap();
        assert_relative_eq!(h[(0, 0)].re, 0.0);
        assert_relative_eq!(h[(1, 1)].re, 2.0 * p.alpha * 0.09, epsilon = 1e-3);
        assert_relative_eq!(h[(1, 0)].re, p.alpha / 3.0 * 0.027, epsilon = 1e-3);
        assert_relative_eq!(h[(0, 1)].re, p.alpha / 3.0 * 0.027, epsilon = 1e-3);
    }

    #[test]
    fn rwa_is_hermitian_for_complex_eta() {
        let h = rwa_hamiltonian(&dev(), C64::from_polar(0.4, 0.9), 1e7).unwrap();
        assert!(hermiticity_error(&h) < 1e-6 * h.norm());
    }

    #[test]
    fn eta_is_linear_in_drive_and_inverts() {
        let p = dev();
        let wd = p.omega_q / 3.0;
        let e1 = eta_from_drive(C64::new(1e8, 0.0), wd, &p).unwrap();
        let e2 = eta_from_drive(C64::new(2e8, 0.0), wd, &p).unwrap();
        assert_relative_eq!(e2.re, 2.0 * e1.re, max_relative = 1e-14);
        let back = drive_from_eta(e1, wd, &p).unwrap();
        assert_relative_eq!(back.re, 1e8, max_relative = 1e-14);
        // below ω' the displacement is opposite in sign to the drive
        assert!(e1.re < 0.0);
    }

    #[test]
    fn eta_pole_rejected() {
        let p = dev();
        assert!(eta_from_drive(C64::new(1.0, 0.0), p.shifted_frequency(), &p).is_err());
    }

    #[test]
    fn analytic_rates_at_reference_drive() {
        let p = dev();
        let eta = 0.4549;
        assert_relative_eq!(analytic_rabi_rate(&p, eta) / TAU / 1e6, 13.05, epsilon = 0.02);
        assert_relative_eq!(analytic_stark_shift(&p, eta) / TAU / 1e6, -86.08, epsilon = 0.02);
    }

    #[test]
    fn drag_detuning_reduces_to_stark_third() {
        let a = dev().alpha;
        assert_relative_eq!(drag_detuning(a, 0.3, 0.0), analytic_stark_shift(&dev(), 0.3) / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn undriven_lab_two_level() {
        let p = dev().with_dim(2);
        let h = lab_static_hamiltonian(&p).unwrap();
        let x4 = position_power(2, 4);
        let expect = Operator::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(p.shifted_frequency(), 0.0)])) + x4 * C64::new(p.alpha / 12.0, 0.0);
        assert!((h - expect).norm() < 1e-3);
    }

    #[test]
    fn lab_spectrum_matches_kerr_oscillator_for_weak_nonlinearity() {
        // the quartic term reduces to ω_q q†q + (α/2) q†q†qq up to O(α²/ω_q)
        for alpha_mhz in [-10.0, -1.0] {
            let p = TransmonParams::from_lab_units(3.96, alpha_mhz, 10, 0.0, 0.0).unwrap();
            let (e, _) = lab_levels(&p).unwrap();
            let ge = e[1];
            let anh = e[2] - 2.0 * e[1];
            assert_relative_eq!(ge, p.omega_q, max_relative = 5.0 * (p.alpha / p.omega_q).powi(2) + 1e-9);
            assert_relative_eq!(anh, p.alpha, max_relative = 20.0 * (p.alpha / p.omega_q).abs());
        }
    }

    #[test]
    fn collapse_rates() {
        let p = dev().with_dim(3);
        let ops = collapse_operators(&p).unwrap();
        assert_eq!(ops.len(), 2);
        let l = ladder_set(3).unwrap();
        assert_relative_eq!((ops[0].adjoint() * &ops[0])[(1, 1)].re, 1.0 / p.t1, max_relative = 1e-12);
        let gphi = 1.0 / p.t2 - 0.5 / p.t1;
        assert!((ops[1].clone() - &l.n * C64::new((2.0 * gphi).sqrt(), 0.0)).norm() < 1e-9);
        let bad = TransmonParams { t2: 3.0 * p.t1, ..p };
        assert!(collapse_operators(&bad).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(TransmonParams::from_lab_units(3.96, -208.0, 1, 1.0, 1.0).is_err());
        assert!(TransmonParams::from_lab_units(f64::NAN, -208.0, 5, 1.0, 1.0).is_err());
    }
}
