//! Bookkeeping of the qubit-frame phase accumulated between pulses.
//!
//! A pulse leaves a phase lag `φ_ramp` (from its edges) and an idle gap of
//! length `t` adds `δω t` with `δω = ω_q - 3ω_d`; flat segments add nothing
//! because the drive is resonant with the Stark-shifted qubit there. Virtual
//! Z rotations are recorded the same way. Later pulses compensate by
//! subtracting the running total from their intended gate phase.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "segment", rename_all = "snake_case")]
pub enum Segment {
    /// Both edges of one pulse.
    Ramp,
    Flat { duration: f64 },
    Gap { duration: f64 },
    VirtualZ { angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    #[serde(flatten)]
    pub segment: Segment,
    pub accumulated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLedger {
    pub phi_ramp: f64,
    pub delta_omega: f64,
    pub accumulated: f64,
    pub trace: Vec<LedgerEntry>,
}

impl PhaseLedger {
    pub fn new(phi_ramp: f64, delta_omega: f64) -> Result<Self> {
        ensure_finite("phi_ramp", phi_ramp)?;
        ensure_finite("delta_omega", delta_omega)?;
        Ok(PhaseLedger { phi_ramp, delta_omega, accumulated: 0.0, trace: Vec::new() })
    }

    /// Phase a segment adds to the frame.
    pub fn phase_of(&self, seg: &Segment) -> f64 {
        match *seg {
            Segment::Ramp => self.phi_ramp,
            Segment::Flat { .. } => 0.0,
            Segment::Gap { duration } => self.delta_omega * duration,
            Segment::VirtualZ { angle } => angle,
        }
    }

    /// Record a segment and return the updated accumulated phase.
    pub fn advance(&mut self, seg: Segment) -> f64 {
        self.accumulated += self.phase_of(&seg);
        self.trace.push(LedgerEntry { segment: seg, accumulated: self.accumulated });
        self.accumulated
    }

    /// Record one pulse (its edges and a flat part of length `flat`).
    pub fn advance_pulse(&mut self, flat: f64) -> f64 {
        self.advance(Segment::Ramp);
        self.advance(Segment::Flat { duration: flat })
    }

    /// Gate phase to program for a rotation intended about the axis at `intended`.
    pub fn gate_phase(&self, intended: f64) -> f64 {
        intended - self.accumulated
    }
}

/// Carrier phase that produces a given gate phase (the three-photon
/// transition triples the carrier phase).
pub fn gate_phase_to_drive_phase(gate_phase: f64) -> f64 {
    gate_phase / 3.0
}

/// Gate phases `φ` in `[0, 2π)` with `φ ≡ -3φ (mod 2π)`, i.e. the multiples of π/2.
pub fn phase_trick_solutions() -> [f64; 4] {
    [0.0, FRAC_PI_2, 2.0 * FRAC_PI_2, 3.0 * FRAC_PI_2]
}

/// For a gate phase that is a multiple of π/2, the carrier phase `-φ` gives
/// the same gate as `φ/3`. Returns `None` for other phases.
pub fn phase_trick_drive_phase(gate_phase: f64) -> Option<f64> {
    let q = gate_phase / FRAC_PI_2;
    if (q - q.round()).abs() < 1e-9 {
        Some((-gate_phase).rem_euclid(TAU))
    } else {
        None
    }
}

/// Estimate `δω = ω_q - 3ω_d` from a generator detuning `δ = ω_d - ω_q/3`.
pub fn delta_omega_from_detuning(delta: f64) -> f64 {
    -3.0 * delta
}
