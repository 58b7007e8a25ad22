//! Run configuration. Every physical quantity carries its unit in the key
//! name; unknown keys are rejected.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::budget::{DriveMethod, LineConfig};
use crate::error::{Error, Result};
use crate::model::TransmonParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub out_dir: String,
    pub transmon: TransmonSection,
    pub drive: DriveSection,
    pub pulse: PulseSection,
    pub rabi: RabiSection,
    pub tuneup: TuneupSection,
    pub rb: RbSection,
    pub drag: DragSection,
    pub budget: BudgetSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            workers: 0,
            out_dir: "subharm-out".into(),
            transmon: TransmonSection::default(),
            drive: DriveSection::default(),
            pulse: PulseSection::default(),
            rabi: RabiSection::default(),
            tuneup: TuneupSection::default(),
            rb: RbSection::default(),
            drag: DragSection::default(),
            budget: BudgetSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmonSection {
    pub freq_ghz: f64,
    pub alpha_mhz: f64,
    pub dim: usize,
    pub t1_us: f64,
    pub t2_us: f64,
}

impl Default for TransmonSection {
    fn default() -> Self {
        TransmonSection { freq_ghz: 3.96, alpha_mhz: -208.0, dim: 3, t1_us: 42.0, t2_us: 23.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    /// AWG amplitude.
    pub amplitude_v: f64,
    /// Scale between AWG amplitude and drive strength, `η = k·V`.
    pub k_per_v: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection { amplitude_v: 0.38, k_per_v: -1.197 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub ramp_rate_per_ns: f64,
    /// Edge offset in units of the ramp time, dimensionless.
    pub ramp_offset: f64,
    /// Integrator tolerance, dimensionless.
    pub tol: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection { ramp_rate_per_ns: 0.5, ramp_offset: 2.0, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameName {
    Rwa,
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiSection {
    pub frame: FrameName,
    /// Centre of the generator sweep; defaults to the Stark-shifted resonance.
    pub freq_center_ghz: Option<f64>,
    pub freq_span_mhz: f64,
    pub freq_points: usize,
    pub duration_max_ns: f64,
    pub duration_points: usize,
}

impl Default for RabiSection {
    fn default() -> Self {
        RabiSection { frame: FrameName::Rwa, freq_center_ghz: None, freq_span_mhz: 40.0, freq_points: 21, duration_max_ns: 300.0, duration_points: 121 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuneupSection {
    pub inject_ramp_phase_rad: f64,
    pub inject_gap_detuning_mhz: f64,
    pub n_reps: usize,
    /// Include the AC-Stark shift (generator at the shifted resonance).
    pub stark: bool,
}

impl Default for TuneupSection {
    fn default() -> Self {
        TuneupSection { inject_ramp_phase_rad: 0.0, inject_gap_detuning_mhz: 0.0, n_reps: 8, stark: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableName {
    Standard,
    VirtualZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbSection {
    pub lengths: Vec<usize>,
    pub n_seq: usize,
    /// Interleaved gate: one of X180, X90, Xm90, Y180, Y90, Ym90.
    pub interleaved: Option<String>,
    pub table: TableName,
    pub dissipation: bool,
    pub gap_ns: f64,
    /// Pick the drive strength whose area-theorem π pulse has this length,
    /// instead of the configured amplitude.
    pub pi_length_ns: Option<f64>,
    /// Extra depolarizing probability per Clifford.
    pub depolarizing: f64,
}

impl Default for RbSection {
    fn default() -> Self {
        RbSection {
            lengths: (0..10).map(|k| 1 << k).collect(),
            n_seq: 30,
            interleaved: Some("X90".into()),
            table: TableName::Standard,
            dissipation: true,
            gap_ns: 0.0,
            pi_length_ns: Some(55.5),
            depolarizing: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DragSection {
    pub duration_ns: f64,
    pub dim: usize,
}

impl Default for DragSection {
    fn default() -> Self {
        DragSection { duration_ns: 30.0, dim: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSection {
    pub label: String,
    pub base_attenuation_db: f64,
    pub method: DriveMethod,
    #[serde(default)]
    pub description: String,
}

impl LineSection {
    pub fn to_line(&self) -> LineConfig {
        LineConfig { label: self.label.clone(), base_attenuation_db: self.base_attenuation_db, description: self.description.clone(), method: self.method, reference: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub rabi_min_mhz: f64,
    pub rabi_max_mhz: f64,
    pub points: usize,
    /// Rabi rate of the reported comparison row.
    pub report_rabi_mhz: f64,
    pub q_factor: f64,
    /// Qubit-decay suppression of the filter; defaults to the measured 4.7 kHz / 159 Hz.
    pub filter_suppression: Option<f64>,
    /// Two-column impedance CSV; defaults to the single measured point.
    pub impedance_csv: Option<String>,
    /// Unfiltered decay rate into 50 Ω, used to calibrate C_c.
    pub direct_decay_khz: f64,
    pub theta_mhz: f64,
    /// Rate γ entering the three-photon formula.
    pub gamma3_gamma_khz: f64,
    /// Frequency ω₀ entering the three-photon formula.
    pub gamma3_omega0_ghz: f64,
    pub configs: Vec<LineSection>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let line = |label: &str, db: f64, method, description: &str| LineSection { label: label.into(), base_attenuation_db: db, method, description: description.into() };
        BudgetSection {
            rabi_min_mhz: 1.0,
            rabi_max_mhz: 100.0,
            points: 41,
            report_rabi_mhz: 50.0,
            q_factor: crate::budget::MATCHED_Q,
            filter_suppression: None,
            impedance_csv: None,
            direct_decay_khz: 4.7,
            theta_mhz: 200.0,
            gamma3_gamma_khz: 4.7,
            gamma3_omega0_ghz: 1.32,
            configs: vec![
                line("config-1", 40.0, DriveMethod::Resonant, "high-attenuation conventional line, resonant drive"),
                line("config-2", 20.0, DriveMethod::Subharmonic, "20 dB at base plus LPF, sub-harmonic drive"),
                line("config-3", 3.0, DriveMethod::Subharmonic, "LPF with 3 dB residual loss, sub-harmonic drive"),
            ],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.transmon_params()?;
        let bad = |key: &str, why: &str| Err(Error::Config(format!("{key}: {why}")));
        if !(self.pulse.ramp_rate_per_ns > 0.0) {
            return bad("pulse.ramp_rate_per_ns", "must be positive");
        }
        if !(self.pulse.tol > 0.0 && self.pulse.tol < 1e-2) {
            return bad("pulse.tol", "must lie in (0, 1e-2)");
        }
        if self.rabi.freq_points == 0 || self.rabi.duration_points < 2 || !(self.rabi.duration_max_ns > 0.0) {
            return bad("rabi", "needs ≥ 1 frequency, ≥ 2 durations and a positive duration_max_ns");
        }
        if self.rb.n_seq == 0 {
            return bad("rb.n_seq", "must be at least 1");
        }
        if self.rb.lengths.windows(2).any(|w| w[1] < w[0]) {
            return bad("rb.lengths", "must be sorted ascending");
        }
        let mut distinct = self.rb.lengths.clone();
        distinct.dedup();
        if distinct.len() < 3 {
            return bad("rb.lengths", "the decay fit needs at least three distinct lengths");
        }
        if let Some(g) = &self.rb.interleaved {
            if crate::cli::commands::gate_by_name(g).is_none() {
                return bad("rb.interleaved", "unknown gate name");
            }
        }
        if self.drag.dim < 3 {
            return bad("drag.dim", "leakage needs at least 3 levels");
        }
        if self.budget.points < 2 || !(self.budget.rabi_min_mhz > 0.0 && self.budget.rabi_max_mhz > self.budget.rabi_min_mhz) {
            return bad("budget", "needs ≥ 2 points and 0 < rabi_min_mhz < rabi_max_mhz");
        }
        Ok(())
    }

    pub fn transmon_params(&self) -> Result<TransmonParams> {
        let t = &self.transmon;
        TransmonParams::from_lab_units(t.freq_ghz, t.alpha_mhz, t.dim, t.t1_us, t.t2_us).map_err(|e| Error::Config(format!("transmon: {e}")))
    }

    pub fn eta(&self) -> f64 {
        (self.drive.k_per_v * self.drive.amplitude_v).abs()
    }

    pub fn ramp_rate(&self) -> f64 {
        self.pulse.ramp_rate_per_ns * 1e9
    }

    /// Stark-shifted three-photon resonance of the configured drive (Hz).
    pub fn resonance_hz(&self) -> Result<f64> {
        let p = self.transmon_params()?;
        let eta = self.eta();
        Ok((p.omega_q + 2.0 * p.alpha * eta * eta) / 3.0 / TAU)
    }
}
