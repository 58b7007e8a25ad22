//! Tune-up of flat-top sub-harmonic gates at fixed drive amplitude: π length,
//! edge phase `φ_ramp`, gap precession `δω` and π/2 length.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::device::{DeviceOp, SimDevice};
use crate::error::{Error, Result};
use crate::fit::{bisect, fit_complex_exponential, fit_harmonic, parabola_fit};
use crate::operators::{wrap_phase, C64};
use crate::pulses::{Envelope, FlatTop};

/// Oscillation amplitude below which a phase sweep counts as flat.
const FLAT_RESPONSE: f64 = 1e-4;

/// Ramsey signal swing below which the gap precession is reported as zero.
const RAMSEY_FLOOR: f64 = 1e-2;

fn check_phase_grid(g: &[f64]) -> Result<()> {
    if g.len() < 4 {
        return Err(Error::InvalidParameter("phase grid needs at least 4 points".into()));
    }
    let span = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - g.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < PI {
        return Err(Error::InvalidParameter(format!("phase grid spans only {span:.3} rad")));
    }
    Ok(())
}

/// Pulse length giving a rotation of `angle` by the area theorem: the
/// integral of `(2/3)|α| η(t)³` over a flat-top envelope of peak `eta`.
/// Valid for a drive without AC-Stark shift.
pub fn area_theorem_length(alpha: f64, eta: f64, ramp_rate: f64, ramp_offset: f64, angle: f64) -> Result<f64> {
    let area = |t0: f64| -> Result<f64> {
        let env = FlatTop::new(eta, ramp_rate, ramp_offset, t0)?;
        // Simpson on a 1 ps grid, at most 2e5 intervals for very long pulses
        let n = ((t0 / 1e-12).ceil() as usize).clamp(2, 200_000) & !1usize;
        let h = t0 / n as f64;
        let f = |t: f64| env.value(t).powi(3);
        let mut s = f(0.0) + f(t0);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        Ok(2.0 / 3.0 * alpha.abs() * s * h / 3.0 - angle)
    };
    let rate = 2.0 / 3.0 * alpha.abs() * eta.abs().powi(3);
    if rate <= 0.0 {
        return Err(Error::InvalidParameter("drive produces no rotation".into()));
    }
    let hi = angle / rate + 4.0 * ramp_offset / ramp_rate + 10e-9;
    bisect(area, 1e-12, hi, 1e-15)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiLengthCalibration {
    pub length: f64,
    pub lengths: Vec<f64>,
    /// Fitted oscillation amplitude of `P_g` versus phase, per length.
    pub amplitudes: Vec<f64>,
    pub prep_length: f64,
}

/// Oscillation amplitude of `P_g` after `X(prep)` followed by a candidate
/// pulse of `length` whose phase sweeps `phase_grid`. A perfect π pulse maps
/// `z → -z` whatever its axis, so the amplitude vanishes at the π length.
pub fn pi_sweep_amplitude(dev: &SimDevice, prep: f64, length: f64, phase_grid: &[f64]) -> Result<f64> {
    let pg = phase_grid
        .iter()
        .map(|&psi| dev.ground_population(&[DeviceOp::Pulse { duration: prep, gate_phase: 0.0 }, DeviceOp::Pulse { duration: length, gate_phase: psi }]))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_harmonic(phase_grid, &pg)?.1)
}

/// Find the π length that minimises the phase-sweep oscillation amplitude.
///
/// The preparation pulse uses half the mid-grid length; it only needs to
/// create some coherence.
pub fn calibrate_pi_length(dev: &SimDevice, length_grid: &[f64], phase_grid: &[f64]) -> Result<PiLengthCalibration> {
    check_phase_grid(phase_grid)?;
    if length_grid.len() < 3 || length_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("length grid needs at least 3 increasing points".into()));
    }
    let prep = 0.5 * length_grid[length_grid.len() / 2];
    let amps = length_grid.par_iter().map(|&l| pi_sweep_amplitude(dev, prep, l, phase_grid)).collect::<Result<Vec<_>>>()?;
    let k = (0..amps.len()).min_by(|&a, &b| amps[a].total_cmp(&amps[b])).expect("non-empty");
    if k == 0 || k == amps.len() - 1 {
        return Err(Error::Calibration(format!("π-length minimum at the grid boundary ({:.3e} s); widen the grid", length_grid[k])));
    }
    let xs = &length_grid[k - 1..=k + 1];
    let ys: Vec<f64> = amps[k - 1..=k + 1].iter().map(|a| a * a).collect();
    // centred, step-scaled abscissae keep the normal equations well conditioned
    let h = 0.5 * (xs[2] - xs[0]);
    let u: Vec<f64> = xs.iter().map(|x| (x - xs[1]) / h).collect();
    let c = parabola_fit(&u, &ys)?;
    let length = if c[2] > 0.0 { (xs[1] - h * c[1] / (2.0 * c[2])).clamp(xs[0], xs[2]) } else { length_grid[k] };
    Ok(PiLengthCalibration { length, lengths: length_grid.to_vec(), amplitudes: amps, prep_length: prep })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampPhaseCalibration {
    pub phi_ramp: f64,
    /// Oscillation amplitude of the phase sweep.
    pub amplitude: f64,
    pub phases: Vec<f64>,
    pub p_ground: Vec<f64>,
}

/// Two π/2 pulses separated by `gap`, the second with swept phase `ψ`.
/// `P_g` is lowest when the second pulse's axis matches the first, which
/// happens at `ψ = -φ_ramp` once the gap precession is compensated with the
/// supplied `delta_omega`.
pub fn calibrate_ramp_phase(dev: &SimDevice, phase_grid: &[f64], pi2_length: f64, gap: f64, delta_omega: f64) -> Result<RampPhaseCalibration> {
    check_phase_grid(phase_grid)?;
    let p_ground = phase_grid
        .par_iter()
        .map(|&psi| {
            let mut ops = vec![DeviceOp::Pulse { duration: pi2_length, gate_phase: 0.0 }];
            if gap > 0.0 {
                ops.push(DeviceOp::Gap { duration: gap });
            }
            ops.push(DeviceOp::Pulse { duration: pi2_length, gate_phase: psi - delta_omega * gap });
            dev.ground_population(&ops)
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, amplitude, psi_min) = fit_harmonic(phase_grid, &p_ground)?;
    if amplitude < FLAT_RESPONSE {
        return Err(Error::Calibration("ramp-phase sweep shows no phase dependence".into()));
    }
    Ok(RampPhaseCalibration { phi_ramp: wrap_phase(-psi_min), amplitude, phases: phase_grid.to_vec(), p_ground })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaOmegaCalibration {
    /// `ω_q - 3ω_d` (rad/s).
    pub delta_omega: f64,
    pub gaps: Vec<f64>,
    /// Ramsey signals for second-pulse phases 0 and π/2.
    pub p_ground_x: Vec<f64>,
    pub p_ground_y: Vec<f64>,
    pub rms_residual: f64,
}

/// Ramsey sequence `X/2 – gap – X/2(ψ)` for `ψ ∈ {0, π/2}` (edge phase
/// compensated). The complex signal `(1 - 2P_g(0)) + i(2P_g(π/2) - 1)`
/// rotates as `e^{iδω t}`, which fixes the sign of `δω`.
pub fn calibrate_delta_omega(dev: &SimDevice, gap_grid: &[f64], pi2_length: f64, phi_ramp: f64) -> Result<DeltaOmegaCalibration> {
    if gap_grid.len() < 8 {
        return Err(Error::InvalidParameter("gap grid needs at least 8 points".into()));
    }
    let run = |gap: f64, psi: f64| {
        let mut ops = vec![DeviceOp::Pulse { duration: pi2_length, gate_phase: 0.0 }];
        if gap > 0.0 {
            ops.push(DeviceOp::Gap { duration: gap });
        }
        ops.push(DeviceOp::Pulse { duration: pi2_length, gate_phase: psi - phi_ramp });
        dev.ground_population(&ops)
    };
    let px = gap_grid.par_iter().map(|&g| run(g, 0.0)).collect::<Result<Vec<_>>>()?;
    let py = gap_grid.par_iter().map(|&g| run(g, FRAC_PI_2)).collect::<Result<Vec<_>>>()?;
    let z: Vec<C64> = px.iter().zip(&py).map(|(a, b)| C64::new(1.0 - 2.0 * a, 2.0 * b - 1.0)).collect();
    let mean = z.iter().sum::<C64>() / z.len() as f64;
    let swing = z.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    // a Ramsey signal without visible rotation means no precession
    let (omega, rms) = if swing < RAMSEY_FLOOR {
        (0.0, swing)
    } else {
        let f = fit_complex_exponential(gap_grid, &z, true)?;
        (f.omega, f.rms_residual)
    };
    Ok(DeltaOmegaCalibration { delta_omega: omega, gaps: gap_grid.to_vec(), p_ground_x: px, p_ground_y: py, rms_residual: rms })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pi2Calibration {
    pub length: f64,
    /// `(number of pulses, length found)` for each refinement stage.
    pub stages: Vec<(usize, f64)>,
}

/// Ground population after `count` phase-compensated pulses of `length`.
pub fn repeated_pulse_ground(dev: &SimDevice, length: f64, count: usize, phi_ramp: f64) -> Result<f64> {
    let ops: Vec<DeviceOp> = (0..count).map(|j| DeviceOp::Pulse { duration: length, gate_phase: -(j as f64) * phi_ramp }).collect();
    dev.ground_population(&ops)
}

/// π/2 length from `n_reps + 1` repetitions: an odd multiple of π/2 leaves
/// the qubit on the equator, so `P_g = 1/2`, and a length error shows up
/// `n_reps + 1` times amplified. The bracket is narrowed stage by stage
/// (1, 3, 5, 9, 17, … pulses) so that each stage isolates a single root.
pub fn calibrate_pi2_length(dev: &SimDevice, n_reps: usize, pi_length: f64, phi_ramp: f64) -> Result<Pi2Calibration> {
    if n_reps < 8 || !n_reps.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("n_reps must be even and at least 8, got {n_reps}")));
    }
    let cfg = dev.config();
    let min_len = 2.0 * cfg.ramp_offset / cfg.ramp_rate;
    if pi_length <= min_len {
        return Err(Error::InvalidParameter("π length is shorter than the pulse edges".into()));
    }
    let tol = 1e-15;
    let f = |count: usize| move |l: f64| repeated_pulse_ground(dev, l, count, phi_ramp).map(|p| p - 0.5);
    let mut length = bisect(f(1), min_len, pi_length, tol).map_err(|e| Error::Calibration(format!("single-pulse stage: {e}")))?;
    let mut stages = vec![(1, length)];
    let mut count = 1;
    while count < n_reps + 1 {
        count = if count == 1 { 3 } else { (2 * count - 1).min(n_reps + 1) };
        // rotation per unit length between the π/2 and π points
        let slope = FRAC_PI_2 / (pi_length - length);
        let half = 0.45 * PI / (count as f64 * slope);
        length = bisect(f(count), length - half, length + half, tol)
            .map_err(|e| Error::Calibration(format!("stage with {count} pulses did not converge: {e}")))?;
        stages.push((count, length));
    }
    Ok(Pi2Calibration { length, stages })
}

/// Calibrated gate set at fixed amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneUp {
    pub pi_length: f64,
    pub pi2_length: f64,
    pub phi_ramp: f64,
    pub delta_omega: f64,
}

/// Settings of the full tune-up sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneUpPlan {
    pub length_grid: Vec<f64>,
    pub phase_grid: Vec<f64>,
    pub gap_grid: Vec<f64>,
    pub n_reps: usize,
}

impl TuneUpPlan {
    /// Grids centred on the area-theorem π length of the device.
    pub fn around_estimate(dev: &SimDevice) -> Result<Self> {
        let c = dev.config();
        let est = area_theorem_length(c.params.alpha, c.eta, c.ramp_rate, c.ramp_offset, PI)?;
        let length_grid = (0..21).map(|k| est - 10e-9 + k as f64 * 1e-9).collect();
        let phase_grid = (0..16).map(|k| k as f64 * TAU / 16.0).collect();
        // resolve the expected gap precession with about four samples per period
        let dw = dev.config().delta_omega().abs().max(TAU * 1e6);
        let step = (TAU / dw / 8.0).min(20e-9);
        let gap_grid = (0..64).map(|k| k as f64 * step).collect();
        Ok(TuneUpPlan { length_grid, phase_grid, gap_grid, n_reps: 8 })
    }
}

/// Run the four calibrations in order: π length, edge phase, gap precession
/// and π/2 length. The π/2 length used by the phase steps starts at half the
/// π length and is refined once at the end.
pub fn tune_up(dev: &SimDevice, plan: &TuneUpPlan) -> Result<TuneUp> {
    let pi = calibrate_pi_length(dev, &plan.length_grid, &plan.phase_grid)?;
    let half = 0.5 * pi.length;
    let ramp = calibrate_ramp_phase(dev, &plan.phase_grid, half, 0.0, 0.0)?;
    let dw = calibrate_delta_omega(dev, &plan.gap_grid, half, ramp.phi_ramp)?;
    let pi2 = calibrate_pi2_length(dev, plan.n_reps, pi.length, ramp.phi_ramp)?;
    let ramp = calibrate_ramp_phase(dev, &plan.phase_grid, pi2.length, 0.0, 0.0)?;
    Ok(TuneUp { pi_length: pi.length, pi2_length: pi2.length, phi_ramp: ramp.phi_ramp, delta_omega: dw.delta_omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::device::DeviceConfig;
    use crate::model::TransmonParams;
    use crate::operators::average_gate_fidelity;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn stark_free(eta: f64) -> SimDevice {
        SimDevice::new(DeviceConfig::stark_free(TransmonParams::reference_device().with_dim(3), eta)).unwrap()
    }

    fn phases() -> Vec<f64> {
        (0..12).map(|k| k as f64 * TAU / 12.0).collect()
    }

    #[test]
    fn pi_length_matches_area_theorem() {
        let dev = stark_free(0.4549);
        let c = dev.config();
        let est = area_theorem_length(c.params.alpha, c.eta, c.ramp_rate, c.ramp_offset, PI).unwrap();
        let grid: Vec<f64> = (0..9).map(|k| est.round_to_ns() - 4e-9 + k as f64 * 1e-9).collect();
        let cal = calibrate_pi_length(&dev, &grid, &phases()).unwrap();
        assert!((cal.length - est).abs() < 1e-9, "{} vs {}", cal.length, est);
        let off = pi_sweep_amplitude(&dev, cal.prep_length, cal.length + 2e-9, &phases()).unwrap();
        let at = pi_sweep_amplitude(&dev, cal.prep_length, cal.length, &phases()).unwrap();
        assert!(off > at && off > 0.0);
        let shifted: Vec<f64> = grid.iter().map(|l| l + 6e-9).collect();
        assert!(matches!(calibrate_pi_length(&dev, &shifted, &phases()), Err(Error::Calibration(_))));
    }

    trait RoundNs {
        fn round_to_ns(self) -> f64;
    }
    impl RoundNs for f64 {
        fn round_to_ns(self) -> f64 {
            (self * 1e9).round() * 1e-9
        }
    }

    #[test]
    fn ramp_phase_round_trip_and_gap_independence() {
        let two = DeviceConfig::stark_free(TransmonParams::reference_device().with_dim(2), 0.4549);
        let pi2 = area_theorem_length(two.params.alpha, two.eta, two.ramp_rate, two.ramp_offset, FRAC_PI_2).unwrap();
        let zero = calibrate_ramp_phase(&SimDevice::new(two).unwrap(), &phases(), pi2, 0.0, 0.0).unwrap();
        assert!(wrap_phase(zero.phi_ramp).abs() < 1e-3, "{}", zero.phi_ramp);
        // with the f level the pulse leaves a dynamic phase of its own; injection adds to it
        let mut cfg = DeviceConfig { params: two.params.with_dim(3), ..two };
        let base = calibrate_ramp_phase(&SimDevice::new(cfg).unwrap(), &phases(), pi2, 0.0, 0.0).unwrap();
        cfg.injected_ramp_phase = 0.3;
        cfg.injected_gap_detuning = TAU * 2e6;
        let dev = SimDevice::new(cfg).unwrap();
        let a = calibrate_ramp_phase(&dev, &phases(), pi2, 0.0, cfg.delta_omega()).unwrap();
        let b = calibrate_ramp_phase(&dev, &phases(), pi2, 37e-9, cfg.delta_omega()).unwrap();
        assert_relative_eq!(wrap_phase(a.phi_ramp - base.phi_ramp), 0.3, epsilon = 1e-3);
        assert_relative_eq!(b.phi_ramp, a.phi_ramp, epsilon = 1e-3);
    }

    #[test]
    fn delta_omega_recovers_stark_shift_and_injection() {
        let p = TransmonParams::reference_device().with_dim(3);
        let eta = 0.4549;
        let dev = SimDevice::new(DeviceConfig::stark_shifted(p, eta)).unwrap();
        let plan = TuneUpPlan::around_estimate(&dev).unwrap();
        let pi2 = 0.5 * area_theorem_length(p.alpha, eta, dev.config().ramp_rate, dev.config().ramp_offset, PI).unwrap();
        let ramp = calibrate_ramp_phase(&dev, &plan.phase_grid, pi2, 0.0, 0.0).unwrap();
        let cal = calibrate_delta_omega(&dev, &plan.gap_grid, pi2, ramp.phi_ramp).unwrap();
        assert_relative_eq!(cal.delta_omega, (2.0 * p.alpha * eta * eta).abs(), max_relative = 0.01);

        let mut cfg = DeviceConfig::stark_free(p, eta);
        cfg.injected_gap_detuning = TAU * 1e6;
        let dev = SimDevice::new(cfg).unwrap();
        let gaps: Vec<f64> = (0..64).map(|k| k as f64 * 50e-9).collect();
        let cal = calibrate_delta_omega(&dev, &gaps, pi2, 0.0).unwrap();
        assert_relative_eq!(cal.delta_omega, TAU * 1e6, max_relative = 1e-3);
        let flat = SimDevice::new(DeviceConfig::stark_free(p, eta)).unwrap();
        assert!(calibrate_delta_omega(&flat, &gaps, pi2, 0.0).unwrap().delta_omega.abs() < 1e-3);
    }

    #[test]
    fn pi2_length_composes_to_identity() {
        let dev = stark_free(0.4549);
        let c = *dev.config();
        let pi = area_theorem_length(c.params.alpha, c.eta, c.ramp_rate, c.ramp_offset, PI).unwrap();
        let cal = calibrate_pi2_length(&dev, 8, pi, 0.0).unwrap();
        let u = dev.schedule_unitary(&[DeviceOp::Pulse { duration: cal.length, gate_phase: 0.0 }; 4]).unwrap();
        let q = DMatrix::from_fn(2, 2, |i, j| u[(i, j)]);
        let infid = 1.0 - average_gate_fidelity(&q, &DMatrix::identity(2, 2));
        assert!(infid < 1e-4, "{infid}");
        // half the π length plus half the edge overhead, as the pulse area dictates
        let area_half = area_theorem_length(c.params.alpha, c.eta, c.ramp_rate, c.ramp_offset, FRAC_PI_2).unwrap();
        assert!((cal.length - area_half).abs() < 0.2e-9, "{} vs {}", cal.length, area_half);
        assert!(cal.length > 0.5 * pi);
        // a 1% length error grows with the number of repetitions
        let dev_pg = |n: usize| (repeated_pulse_ground(&dev, 1.01 * cal.length, n + 1, 0.0).unwrap() - 0.5).abs();
        let (d8, d16) = (dev_pg(8), dev_pg(16));
        assert!(d16 > 1.6 * d8 && d16 < 2.4 * d8, "{d8} {d16}");
        assert!(calibrate_pi2_length(&dev, 7, pi, 0.0).is_err());
    }
}
