//! Simulated device for tune-up and benchmarking, modelled in the frame
//! rotating at three times the generator frequency.
//!
//! A gate with phase `ψ` is a flat-top pulse whose carrier phase is `ψ/3`
//! plus a fixed reference (`π/3` for negative anharmonicity), so that `ψ = 0`
//! rotates about `+x`. Between pulses the qubit precesses at
//! `δω = ω_q - 3ω_d`. The device can be given an extra, artificial frame
//! phase after each pulse and an extra gap detuning, which the calibration
//! routines must then recover.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::engine::{self, apply_channel, channel_of, unitary_channel, unitary_of, Static};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::model::{collapse_operators, rwa_pulse_hamiltonian, TransmonParams};
use crate::operators::{ladder_set, number_phase, projector, Operator, C64};
use crate::pulses::{drag_correct, Envelope, FlatTop, DEFAULT_RAMP_OFFSET, DEFAULT_RAMP_RATE, DEFAULT_SAMPLE_RATE};

/// Device settings. `eta` is the peak drive strength `|k·V|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub params: TransmonParams,
    pub eta: f64,
    /// Generator angular frequency.
    pub omega_d: f64,
    /// Include the drive-induced AC-Stark term.
    pub stark: bool,
    /// Use the DRAG-corrected quadrature.
    pub drag: bool,
    /// Simulate with the Lindblad channels of `params.t1`, `params.t2`.
    pub dissipation: bool,
    /// Artificial frame phase added after every pulse (rad).
    pub injected_ramp_phase: f64,
    /// Artificial extra precession during gaps (rad/s).
    pub injected_gap_detuning: f64,
    pub ramp_rate: f64,
    pub ramp_offset: f64,
    pub tol: f64,
}

impl DeviceConfig {
    /// Generator at the Stark-shifted three-photon resonance `(ω_q + 2αη²)/3`.
    pub fn stark_shifted(params: TransmonParams, eta: f64) -> Self {
        let omega_d = (params.omega_q + 2.0 * params.alpha * eta * eta) / 3.0;
        DeviceConfig {
            params,
            eta,
            omega_d,
            stark: true,
            drag: false,
            dissipation: false,
            injected_ramp_phase: 0.0,
            injected_gap_detuning: 0.0,
            ramp_rate: DEFAULT_RAMP_RATE,
            ramp_offset: DEFAULT_RAMP_OFFSET,
            tol: 1e-10,
        }
    }

    /// A device without AC-Stark shift, driven at exactly `ω_q/3`. Its pulses
    /// leave no frame phase of their own, which makes injected errors exact.
    pub fn stark_free(params: TransmonParams, eta: f64) -> Self {
        DeviceConfig { stark: false, omega_d: params.omega_q / 3.0, ..Self::stark_shifted(params, eta) }
    }

    /// Generator detuning `δ = ω_d - ω_q/3`.
    pub fn delta(&self) -> f64 {
        self.omega_d - self.params.omega_q / 3.0
    }

    /// True gap precession rate, `ω_q - 3ω_d` plus any injected detuning.
    pub fn delta_omega(&self) -> f64 {
        -3.0 * self.delta() + self.injected_gap_detuning
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        ensure_finite("eta", self.eta)?;
        ensure_positive("omega_d", self.omega_d)?;
        ensure_finite("injected_ramp_phase", self.injected_ramp_phase)?;
        ensure_finite("injected_gap_detuning", self.injected_gap_detuning)?;
        ensure_positive("ramp_rate", self.ramp_rate)?;
        ensure_positive("tol", self.tol)?;
        if self.drag && self.params.alpha == 0.0 {
            return Err(Error::InvalidParameter("DRAG needs a nonzero anharmonicity".into()));
        }
        Ok(())
    }
}

/// Carrier phase offset that makes gate phase 0 a rotation about `+x`.
pub fn carrier_reference(alpha: f64) -> f64 {
    if alpha < 0.0 {
        PI / 3.0
    } else {
        0.0
    }
}

/// One element of a simulated schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DeviceOp {
    /// Flat-top pulse of total length `duration` with the given gate phase.
    Pulse { duration: f64, gate_phase: f64 },
    Gap { duration: f64 },
}

/// Simulated device with cached per-duration propagators.
pub struct SimDevice {
    cfg: DeviceConfig,
    collapse: Vec<Operator>,
    unitaries: Mutex<HashMap<u64, Arc<Operator>>>,
    channels: Mutex<HashMap<u64, Arc<Operator>>>,
    gap_channels: Mutex<HashMap<u64, Arc<Operator>>>,
}

/// `ρ_ij → e^{iθ(i-j)} ρ_ij`, i.e. `e^{iθn} ρ e^{-iθn}`.
fn phase_rotate(rho: &mut Operator, theta: f64) {
    if theta == 0.0 {
        return;
    }
    let d = rho.nrows();
    for j in 0..d {
        for i in 0..d {
            if i != j {
                rho[(i, j)] *= C64::from_polar(1.0, theta * (i as f64 - j as f64));
            }
        }
    }
}

impl SimDevice {
    pub fn new(cfg: DeviceConfig) -> Result<Self> {
        cfg.validate()?;
        let collapse = if cfg.dissipation { collapse_operators(&cfg.params)? } else { Vec::new() };
        Ok(SimDevice {
            cfg,
            collapse,
            unitaries: Mutex::new(HashMap::new()),
            channels: Mutex::new(HashMap::new()),
            gap_channels: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.params.dim
    }

    /// Drive envelope of a pulse of total length `duration`, peak `eta`.
    pub fn envelope(&self, duration: f64) -> Result<FlatTop> {
        FlatTop::new(self.cfg.eta, self.cfg.ramp_rate, self.cfg.ramp_offset, duration)
    }

    /// Rotating-frame Hamiltonian of a zero-phase pulse.
    pub fn pulse_hamiltonian(&self, duration: f64) -> Result<engine::Driven> {
        let env = self.envelope(duration)?;
        let rot = C64::from_polar(1.0, carrier_reference(self.cfg.params.alpha));
        let eta: Arc<dyn Fn(f64) -> C64 + Send + Sync> = if self.cfg.drag && self.cfg.eta != 0.0 && duration > 0.0 {
            let sol = drag_correct(&env, self.cfg.params.alpha, DEFAULT_SAMPLE_RATE)?;
            Arc::new(move |t| {
                let (x, y) = sol.eval(t);
                C64::new(x, y) * rot
            })
        } else {
            Arc::new(move |t| rot * env.value(t))
        };
        rwa_pulse_hamiltonian(&self.cfg.params, eta, self.cfg.delta(), self.cfg.stark)
    }

    /// Hamiltonian during idle time.
    pub fn gap_hamiltonian(&self) -> Result<Operator> {
        let l = ladder_set(self.dim())?;
        let kerr = &l.adag * &l.adag * &l.a * &l.a;
        Ok(&l.n * C64::new(self.cfg.delta_omega(), 0.0) + kerr * C64::new(self.cfg.params.alpha / 2.0, 0.0))
    }

    fn frame(&self, gate_phase: f64) -> Operator {
        // conjugation by e^{iψn} multiplies the q† drive term by e^{iψ}
        number_phase(self.dim(), -gate_phase)
    }

    fn injected(&self) -> Operator {
        number_phase(self.dim(), self.cfg.injected_ramp_phase)
    }

    fn cached(&self, store: &Mutex<HashMap<u64, Arc<Operator>>>, duration: f64, make: impl FnOnce() -> Result<Operator>) -> Result<Arc<Operator>> {
        if let Some(u) = store.lock().expect("cache poisoned").get(&duration.to_bits()) {
            return Ok(u.clone());
        }
        let u = Arc::new(make()?);
        store.lock().expect("cache poisoned").insert(duration.to_bits(), u.clone());
        Ok(u)
    }

    /// Unitary of one pulse including the injected frame phase.
    pub fn pulse_unitary(&self, duration: f64, gate_phase: f64) -> Result<Operator> {
        ensure_finite("gate phase", gate_phase)?;
        let u0 = self.cached(&self.unitaries, duration, || {
            let h = self.pulse_hamiltonian(duration)?;
            unitary_of(&h, 0.0, duration, self.cfg.tol)
        })?;
        let r = self.frame(gate_phase);
        Ok(self.injected() * &r * u0.as_ref() * r.adjoint())
    }

    /// Superoperator of one pulse (column-stacked `vec(ρ)`).
    pub fn pulse_channel(&self, duration: f64, gate_phase: f64) -> Result<Operator> {
        ensure_finite("gate phase", gate_phase)?;
        let s0 = self.cached(&self.channels, duration, || {
            let h = self.pulse_hamiltonian(duration)?;
            channel_of(&h, &self.collapse, 0.0, duration, self.cfg.tol)
        })?;
        let r = unitary_channel(&(self.injected() * self.frame(gate_phase)));
        let ri = unitary_channel(&self.frame(-gate_phase));
        Ok(r * s0.as_ref() * ri)
    }

    pub fn gap_unitary(&self, duration: f64) -> Result<Operator> {
        ensure_finite("gap", duration)?;
        Ok(crate::operators::evolve_constant(&self.gap_hamiltonian()?, duration))
    }

    pub fn gap_channel(&self, duration: f64) -> Result<Operator> {
        let h = Static(self.gap_hamiltonian()?);
        channel_of(&h, &self.collapse, 0.0, duration, self.cfg.tol)
    }

    /// Apply one operation to a density matrix in place. Phase conjugation is
    /// done elementwise, so only the zero-phase propagator is ever integrated.
    pub fn apply(&self, rho: &mut Operator, op: DeviceOp) -> Result<()> {
        match op {
            DeviceOp::Pulse { duration, gate_phase } => {
                ensure_finite("gate phase", gate_phase)?;
                // R† ρ R with R = e^{iψn}
                phase_rotate(rho, -gate_phase);
                if self.cfg.dissipation {
                    let s = self.cached(&self.channels, duration, || {
                        let h = self.pulse_hamiltonian(duration)?;
                        channel_of(&h, &self.collapse, 0.0, duration, self.cfg.tol)
                    })?;
                    *rho = apply_channel(&s, rho);
                } else {
                    let u = self.cached(&self.unitaries, duration, || {
                        let h = self.pulse_hamiltonian(duration)?;
                        unitary_of(&h, 0.0, duration, self.cfg.tol)
                    })?;
                    *rho = u.as_ref() * &*rho * u.adjoint();
                }
                phase_rotate(rho, gate_phase - self.cfg.injected_ramp_phase);
            }
            DeviceOp::Gap { duration } => {
                if self.cfg.dissipation {
                    let s = self.cached(&self.gap_channels, duration, || self.gap_channel(duration))?;
                    *rho = apply_channel(&s, rho);
                } else {
                    let u = self.gap_unitary(duration)?;
                    *rho = &u * &*rho * u.adjoint();
                }
            }
        }
        Ok(())
    }

    /// Unitary of a whole schedule (closed system only).
    pub fn schedule_unitary(&self, ops: &[DeviceOp]) -> Result<Operator> {
        let mut u = Operator::identity(self.dim(), self.dim());
        for op in ops {
            u = match *op {
                DeviceOp::Pulse { duration, gate_phase } => self.pulse_unitary(duration, gate_phase)? * u,
                DeviceOp::Gap { duration } => self.gap_unitary(duration)? * u,
            };
        }
        Ok(u)
    }

    /// Final density matrix after running `ops` from the ground state.
    pub fn run(&self, ops: &[DeviceOp]) -> Result<Operator> {
        let d = self.dim();
        let rho0 = projector(d, 0);
        if !self.cfg.dissipation {
            let u = self.schedule_unitary(ops)?;
            return Ok(&u * rho0 * u.adjoint());
        }
        let mut rho = rho0;
        for op in ops {
            self.apply(&mut rho, *op)?;
        }
        Ok(rho)
    }

    /// Ground-state population after `ops`, the simulated readout.
    pub fn ground_population(&self, ops: &[DeviceOp]) -> Result<f64> {
        Ok(self.run(ops)?[(0, 0)].re.clamp(0.0, 1.0))
    }
}
