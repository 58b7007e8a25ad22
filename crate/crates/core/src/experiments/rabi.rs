//! Rabi chevrons, trace fitting and the single-parameter drive-scale fit.

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{propagate_schrodinger, DEFAULT_TOL};
use crate::error::{ensure_finite, Error, Result};
use crate::fit::{fit_sinusoid, levenberg_marquardt};
use crate::model::{drive_from_eta, lab_frame_hamiltonian, lab_levels, rwa_pulse_hamiltonian, DriveParams, TransmonParams};
use crate::operators::{basis, Ket, C64};
use crate::pulses::{Envelope, FlatTop, DEFAULT_RAMP_OFFSET, DEFAULT_RAMP_RATE};

/// Value of a fitted quantity with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub value: f64,
    pub uncertainty: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rwa,
}

/// Pulse and integration settings shared by the scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub ramp_rate: f64,
    pub ramp_offset: f64,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { ramp_rate: DEFAULT_RAMP_RATE, ramp_offset: DEFAULT_RAMP_OFFSET, tol: DEFAULT_TOL }
    }
}

/// `p_excited[i][j]` is the excited population at drive frequency `i` and duration `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiScanResult {
    /// Generator frequencies (Hz).
    pub drive_freq_axis: Vec<f64>,
    /// Pulse lengths (s).
    pub duration_axis: Vec<f64>,
    pub p_excited: Vec<Vec<f64>>,
    /// AWG-referred amplitude (V).
    pub drive_amplitude: f64,
    /// Drive scale `k` (1/V); the drive strength is `η = k·V`.
    pub k_scale: f64,
    pub frame: Frame,
}

impl RabiScanResult {
    /// Excited population versus duration at one frequency index.
    pub fn trace(&self, freq_index: usize) -> (&[f64], &[f64]) {
        (&self.duration_axis, &self.p_excited[freq_index])
    }
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    for &x in g {
        ensure_finite(name, x)?;
    }
    if g.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(format!("{name} grid is not sorted")));
    }
    Ok(())
}

/// Excited population after one flat-top pulse.
pub fn simulate_pulse(params: &TransmonParams, eta: f64, freq_hz: f64, duration: f64, frame: Frame, opts: &ScanOptions) -> Result<f64> {
    let omega_d = TAU * freq_hz;
    if duration <= 0.0 || eta == 0.0 {
        return Ok(0.0);
    }
    let env = FlatTop::new(1.0, opts.ramp_rate, opts.ramp_offset, duration)?;
    match frame {
        Frame::Rwa => {
            let rot = C64::from_polar(1.0, crate::experiments::carrier_reference(params.alpha));
            let shape = Arc::new(move |t: f64| rot * (eta * env.value(t)));
            let h = rwa_pulse_hamiltonian(params, shape, omega_d - params.omega_q / 3.0, true)?;
            let tr = propagate_schrodinger(&h, &basis(params.dim, 0), 0.0, &[duration], opts.tol)?;
            Ok(tr.states[0][1].norm_sqr())
        }
        Frame::Lab => {
            let (_, vecs) = lab_levels(params)?;
            let g: Ket = vecs.column(0).into_owned();
            let e: Ket = vecs.column(1).into_owned();
            let eps = drive_from_eta(eta.into(), omega_d, params)?.re;
            let drive = DriveParams { amplitude: eps, omega_d, phase: 0.0 };
            let h = lab_frame_hamiltonian(params, &drive, Some(Arc::new(move |t| env.value(t))))?;
            let tr = propagate_schrodinger(&h, &g, 0.0, &[duration], opts.tol)?;
            Ok(e.dotc(&tr.states[0]).norm_sqr())
        }
    }
}

/// Excited population on a frequency × duration grid, from full propagation
/// at every point. Points run in parallel; the result is in grid order.
pub fn rabi_scan(
    params: &TransmonParams,
    amp: f64,
    k_scale: f64,
    freq_grid: &[f64],
    dur_grid: &[f64],
    frame: Frame,
    opts: &ScanOptions,
) -> Result<RabiScanResult> {
    params.validate()?;
    ensure_finite("amp", amp)?;
    ensure_finite("k_scale", k_scale)?;
    check_grid("frequency", freq_grid)?;
    check_grid("duration", dur_grid)?;
    let eta = (k_scale * amp).abs();
    let nd = dur_grid.len();
    let points: Vec<Result<f64>> = (0..freq_grid.len() * nd)
        .into_par_iter()
        .map(|k| simulate_pulse(params, eta, freq_grid[k / nd], dur_grid[k % nd], frame, opts).map(|p| p.clamp(0.0, 1.0)))
        .collect();
    let failed: Vec<usize> = points.iter().enumerate().filter(|(_, r)| r.is_err()).map(|(k, _)| k).collect();
    if let Some(k) = failed.first() {
        let first = points[*k].as_ref().err().map(|e| e.to_string()).unwrap_or_default();
        return Err(Error::Partial { message: format!("rabi scan propagation failed: {first}"), failed });
    }
    let flat: Vec<f64> = points.into_iter().map(|r| r.expect("checked")).collect();
    Ok(RabiScanResult {
        drive_freq_axis: freq_grid.to_vec(),
        duration_axis: dur_grid.to_vec(),
        p_excited: flat.chunks(nd).map(|c| c.to_vec()).collect(),
        drive_amplitude: amp,
        k_scale,
        frame,
    })
}

/// Fitted Rabi oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    /// Rabi frequency `Ω/2π` (Hz).
    pub rate: FitResult,
    /// Peak-to-peak contrast of the oscillation.
    pub contrast: f64,
    pub offset: f64,
    pub phase: f64,
    pub decay: f64,
}

/// Damped-sinusoid fit of a population trace sampled on a uniform time grid.
pub fn fit_rabi_trace(times: &[f64], populations: &[f64]) -> Result<RabiFit> {
    if times.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 samples, got {}", times.len())));
    }
    let f = fit_sinusoid(times, populations, true)?;
    let span = times[times.len() - 1] - times[0];
    if f.omega * span < TAU * 0.999 {
        return Err(Error::Fit("trace spans less than one oscillation".into()));
    }
    Ok(RabiFit {
        rate: FitResult {
            value: f.omega / TAU,
            uncertainty: f.omega_uncertainty / TAU,
            residual_norm: f.rms_residual * (populations.len() as f64).sqrt(),
        },
        contrast: 2.0 * f.amplitude,
        offset: f.offset,
        phase: f.phase,
        decay: f.decay,
    })
}

/// Rabi rate `(2/3)α(kV)³` in Hz for an anharmonicity `alpha_hz` in Hz.
pub fn rabi_law(alpha_hz: f64, k: f64, v: f64) -> f64 {
    2.0 / 3.0 * alpha_hz * (k * v).powi(3)
}

/// AC-Stark shift `2α(kV)²` in Hz.
pub fn stark_law(alpha_hz: f64, k: f64, v: f64) -> f64 {
    2.0 * alpha_hz * (k * v).powi(2)
}

/// Least-squares drive scale `k` (1/V) shared by the Rabi and Stark laws.
///
/// Residuals are weighted by `sigmas` when given (one per point and law, Rabi
/// first), and otherwise by each measured value, i.e. relative errors.
/// Zero-amplitude points are dropped.
pub fn joint_fit_k(amps: &[f64], omegas: &[f64], starks: &[f64], alpha_hz: f64, sigmas: Option<(&[f64], &[f64])>) -> Result<FitResult> {
    if amps.len() != omegas.len() || amps.len() != starks.len() {
        return Err(Error::InvalidParameter("amplitude, Rabi and Stark arrays differ in length".into()));
    }
    if let Some((so, ss)) = sigmas {
        if so.len() != amps.len() || ss.len() != amps.len() {
            return Err(Error::InvalidParameter("uncertainty arrays differ in length".into()));
        }
    }
    ensure_finite("alpha", alpha_hz)?;
    if alpha_hz == 0.0 {
        return Err(Error::InvalidParameter("anharmonicity must be nonzero".into()));
    }
    let keep: Vec<usize> = (0..amps.len()).filter(|&i| amps[i] != 0.0).collect();
    if keep.is_empty() {
        return Err(Error::Fit("no nonzero-amplitude points".into()));
    }
    if keep.len() > 1 && keep.iter().all(|&i| amps[i] == amps[keep[0]]) {
        return Err(Error::Fit("rank deficient: all drive amplitudes are equal".into()));
    }
    for &i in &keep {
        ensure_finite("amplitude", amps[i])?;
        ensure_finite("rabi", omegas[i])?;
        ensure_finite("stark", starks[i])?;
    }
    let weight = |x: f64, s: Option<f64>| -> f64 {
        let w = s.unwrap_or(x.abs());
        if w > 0.0 {
            1.0 / w
        } else {
            1.0
        }
    };
    let wo: Vec<f64> = keep.iter().map(|&i| weight(omegas[i], sigmas.map(|s| s.0[i]))).collect();
    let ws: Vec<f64> = keep.iter().map(|&i| weight(starks[i], sigmas.map(|s| s.1[i]))).collect();
    let residuals = |p: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(2 * keep.len());
        for (n, &i) in keep.iter().enumerate() {
            r.push((rabi_law(alpha_hz, p[0], amps[i]) - omegas[i]) * wo[n]);
            r.push((stark_law(alpha_hz, p[0], amps[i]) - starks[i]) * ws[n]);
        }
        r
    };
    // the sign of k follows from the Rabi law, its size from the median cube root
    let mut seeds: Vec<f64> = keep.iter().map(|&i| (1.5 * omegas[i] / alpha_hz).cbrt() / amps[i]).filter(|x| x.is_finite() && *x != 0.0).collect();
    if seeds.is_empty() {
        seeds = keep.iter().map(|&i| (starks[i] / (2.0 * alpha_hz)).abs().sqrt() / amps[i].abs()).collect();
    }
    seeds.sort_by(f64::total_cmp);
    let k0 = seeds[seeds.len() / 2];
    if !k0.is_finite() || k0 == 0.0 {
        return Err(Error::Fit("cannot seed the drive scale".into()));
    }
    let (p, cost) = levenberg_marquardt(&residuals, &[k0], &[(f64::NEG_INFINITY, f64::INFINITY)])?;
    let k = p[0];
    // linearised uncertainty from the analytic derivative
    let mut jtj = 0.0;
    for (n, &i) in keep.iter().enumerate() {
        let v = amps[i];
        jtj += (2.0 * alpha_hz * k * k * v.powi(3) * wo[n]).powi(2) + (4.0 * alpha_hz * k * v * v * ws[n]).powi(2);
    }
    let dof = (2 * keep.len()).saturating_sub(1).max(1) as f64;
    let uncertainty = if jtj > 0.0 { (cost / dof / jtj).sqrt() } else { f64::INFINITY };
    Ok(FitResult { value: k, uncertainty, residual_norm: cost.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_amplitude_scan_is_dark() {
        let p = TransmonParams::reference_device().with_dim(3);
        for frame in [Frame::Rwa, Frame::Lab] {
            let s = rabi_scan(&p, 0.0, -1.197, &[1.32e9, 1.33e9], &[20e-9, 40e-9], frame, &ScanOptions::default()).unwrap();
            assert!(s.p_excited.iter().flatten().all(|&x| x < 1e-12));
        }
    }

    #[test]
    fn unsorted_grid_rejected() {
        let p = TransmonParams::reference_device();
        assert!(rabi_scan(&p, 0.1, 1.0, &[2.0, 1.0], &[1e-9], Frame::Rwa, &ScanOptions::default()).is_err());
    }

    #[test]
    fn rwa_scan_shows_resonant_oscillation() {
        let p = TransmonParams::reference_device().with_dim(4);
        let eta: f64 = 0.4549;
        let fd = (p.omega_q + 2.0 * p.alpha * eta * eta) / 3.0 / TAU;
        let durs: Vec<f64> = (0..60).map(|k| 20e-9 + k as f64 * 4e-9).collect();
        let s = rabi_scan(&p, 0.38, -1.197, &[fd], &durs, Frame::Rwa, &ScanOptions::default()).unwrap();
        let (t, y) = s.trace(0);
        let f = fit_rabi_trace(t, y).unwrap();
        assert_relative_eq!(f.rate.value, 13.05e6, max_relative = 0.03);
        assert!(f.contrast > 0.9);
    }

    #[test]
    fn fit_recovers_clean_and_noisy_traces() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 1e-9).collect();
        let w = TAU * 12.1e6;
        let y: Vec<f64> = t.iter().map(|s| 0.5 - 0.5 * (w * s).cos()).collect();
        let f = fit_rabi_trace(&t, &y).unwrap();
        assert_relative_eq!(f.rate.value, 12.1e6, max_relative = 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<f64> = y.iter().map(|v| v + 0.01 * (2.0 * rng.gen::<f64>() - 1.0) * 0.5).collect();
        let f = fit_rabi_trace(&t, &noisy).unwrap();
        assert_relative_eq!(f.rate.value, 12.1e6, max_relative = 1e-2);
        assert!(f.rate.uncertainty > 0.0);
        assert!(fit_rabi_trace(&t, &vec![0.2; 200]).is_err());
    }

    #[test]
    fn joint_fit_recovers_generating_scale() {
        let alpha = -208e6;
        let k = -1.197;
        let v = [0.1, 0.2, 0.3, 0.38, 0.0];
        let om: Vec<f64> = v.iter().map(|x| rabi_law(alpha, k, *x)).collect();
        let st: Vec<f64> = v.iter().map(|x| stark_law(alpha, k, *x)).collect();
        let f = joint_fit_k(&v, &om, &st, alpha, None).unwrap();
        assert_relative_eq!(f.value, k, max_relative = 1e-6);
        let one = joint_fit_k(&[0.38], &[12.1e6], &[-81e6], alpha, None).unwrap();
        assert!((one.value + 1.197).abs() < 0.05, "k = {}", one.value);
        assert!(joint_fit_k(&[0.2, 0.2, 0.2], &om[..3], &st[..3], alpha, None).is_err());
    }
}
