//! Drive power against Rabi rate and heat dissipated at the base stage.

use serde::{Deserialize, Serialize};

use super::HBAR;
use crate::error::{ensure_positive, Error, Result};

/// Quality factor every configuration is matched to (T₁ limit near 1 ms).
pub const MATCHED_Q: f64 = 2.5e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMethod {
    Resonant,
    Subharmonic,
}

/// Port power that produces a given Rabi rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    /// rad/s
    pub omega_rabi: f64,
    /// W at the qubit port
    pub power: f64,
}

/// Power needed for `omega_rabi`, scaled from the reference point:
/// `P ∝ Ω²` for resonant drive, `P ∝ Ω^{2/3}` for sub-harmonic drive.
pub fn power_for_rabi(omega_rabi: f64, method: DriveMethod, cal: &ReferencePoint) -> Result<f64> {
    if !(omega_rabi > 0.0) {
        return Err(Error::InvalidParameter(format!("Rabi rate must be positive, got {omega_rabi}")));
    }
    ensure_positive("reference Rabi rate", cal.omega_rabi)?;
    ensure_positive("reference power", cal.power)?;
    let exponent = match method {
        DriveMethod::Resonant => 2.0,
        DriveMethod::Subharmonic => 2.0 / 3.0,
    };
    Ok(cal.power * (omega_rabi / cal.omega_rabi).powf(exponent))
}

/// One input-line configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineConfig {
    pub label: String,
    /// Attenuation at the base stage, dB.
    pub base_attenuation_db: f64,
    pub description: String,
    pub method: DriveMethod,
    pub reference: Option<ReferencePoint>,
}

impl LineConfig {
    /// Power transmission `T_B²` of the base attenuation.
    pub fn transmission(&self) -> Result<f64> {
        if !(self.base_attenuation_db >= 0.0) || !self.base_attenuation_db.is_finite() {
            return Err(Error::InvalidParameter(format!("{}: attenuation must be ≥ 0 dB", self.label)));
        }
        Ok(10f64.powf(-self.base_attenuation_db / 10.0))
    }
}

/// Heat dissipated at base for input power `p_in`: `P_B (1 - T_B²)`.
pub fn heat_at_base(p_in: f64, config: &LineConfig) -> Result<f64> {
    if !(p_in >= 0.0) {
        return Err(Error::InvalidParameter(format!("input power must be ≥ 0, got {p_in}")));
    }
    Ok(p_in * (1.0 - config.transmission()?))
}

/// Resonant-equivalent Rabi rate `2ε` of the port voltage that drives a
/// sub-harmonic Rabi rate `omega_sub` at `ω_d = ω_q/3`:
/// `Ω_sub = (2/3)|α|η³` with `η = 2ε ω′/(ω′² - ω_d²)`.
pub fn resonant_equivalent_rabi(omega_sub: f64, omega_q: f64, alpha: f64) -> Result<f64> {
    ensure_positive("omega_sub", omega_sub)?;
    ensure_positive("|alpha|", alpha.abs())?;
    let wp = omega_q - alpha;
    let wd = omega_q / 3.0;
    let eta = (1.5 * omega_sub / alpha.abs()).cbrt();
    Ok(eta * (wp * wp - wd * wd) / wp)
}

/// Reference point for a port whose decay rate at `ω_q` equals `ω_q/q`.
/// A resonant drive needs `P = ħω_qΩ²/(4κ)` at the port, with `κ` the
/// unfiltered coupling rate. Behind a filter suppressing qubit decay by
/// `suppression`, the coupling can be that much stronger at equal `Q`.
pub fn matched_q_reference(method: DriveMethod, omega_rabi: f64, omega_q: f64, alpha: f64, q: f64, suppression: f64) -> Result<ReferencePoint> {
    ensure_positive("omega_rabi", omega_rabi)?;
    ensure_positive("q", q)?;
    ensure_positive("suppression", suppression)?;
    let kappa = omega_q / q * suppression;
    let drive = match method {
        DriveMethod::Resonant => omega_rabi,
        DriveMethod::Subharmonic => resonant_equivalent_rabi(omega_rabi, omega_q, alpha)?,
    };
    Ok(ReferencePoint { omega_rabi, power: HBAR * omega_q * drive * drive / (4.0 * kappa) })
}

/// Heat at base for a configuration at one Rabi rate.
pub fn heat_for(config: &LineConfig, omega_rabi: f64) -> Result<f64> {
    let cal = config.reference.as_ref().ok_or_else(|| Error::Calibration(format!("missing calibration for config {}", config.label)))?;
    let port = power_for_rabi(omega_rabi, config.method, cal)?;
    heat_at_base(port / config.transmission()?, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigCurve {
    pub label: String,
    pub method: DriveMethod,
    pub base_attenuation_db: f64,
    /// W, one per Rabi rate
    pub heat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTable {
    /// rad/s
    pub rabi_axis: Vec<f64>,
    pub curves: Vec<ConfigCurve>,
}

impl HeatTable {
    pub fn curve(&self, label: &str) -> Option<&ConfigCurve> {
        self.curves.iter().find(|c| c.label == label)
    }

    /// Columns `rabi_hz` then `<label>_heat_w` per configuration.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["rabi_hz".to_string()];
        header.extend(self.curves.iter().map(|c| format!("{}_heat_w", c.label)));
        w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
        for (i, om) in self.rabi_axis.iter().enumerate() {
            let mut row = vec![(om / (2.0 * std::f64::consts::PI)).to_string()];
            row.extend(self.curves.iter().map(|c| c.heat[i].to_string()));
            w.write_record(&row).map_err(|e| Error::Format(e.to_string()))?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Heat per configuration along the Rabi axis.
pub fn compare_configs(rabi_axis: &[f64], configs: &[LineConfig]) -> Result<HeatTable> {
    let missing: Vec<&str> = configs.iter().filter(|c| c.reference.is_none()).map(|c| c.label.as_str()).collect();
    if !missing.is_empty() {
        return Err(Error::Calibration(format!("missing calibration for configs: {}", missing.join(", "))));
    }
    let curves = configs
        .iter()
        .map(|c| {
            let heat = rabi_axis.iter().map(|&om| heat_for(c, om)).collect::<Result<Vec<_>>>()?;
            Ok(ConfigCurve { label: c.label.clone(), method: c.method, base_attenuation_db: c.base_attenuation_db, heat })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeatTable { rabi_axis: rabi_axis.to_vec(), curves })
}

/// Rabi rate at which a resonant and a sub-harmonic power law meet.
pub fn crossover_rabi(resonant: &ReferencePoint, subharmonic: &ReferencePoint) -> Result<f64> {
    // a Ω² = b Ω^{2/3}
    let a = resonant.power / resonant.omega_rabi.powi(2);
    let b = subharmonic.power / subharmonic.omega_rabi.powf(2.0 / 3.0);
    ensure_positive("resonant coefficient", a)?;
    ensure_positive("sub-harmonic coefficient", b)?;
    Ok((b / a).powf(0.75))
}

pub fn dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}
