//! Drive-port load impedance: tabulated filter data and the filter model.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::C64;

/// Measured filter impedance at the qubit frequency, ohms.
pub const MEASURED_POINT_OHMS: (f64, f64) = (27.1, -253.7);
/// Frequency of that measurement, Hz.
pub const MEASURED_POINT_HZ: f64 = 3.96e9;

/// Impedance samples sorted by frequency. Between samples the real and
/// imaginary parts are interpolated linearly; outside the range the nearest
/// sample is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceTable {
    pub label: String,
    /// `(frequency Hz, impedance ohms)`.
    pub points: Vec<(f64, C64)>,
}

#[derive(Debug, Deserialize)]
struct Row {
    freq_hz: f64,
    re_ohm: f64,
    im_ohm: f64,
}

impl ImpedanceTable {
    pub fn new(label: impl Into<String>, points: Vec<(f64, C64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("impedance table is empty".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter("impedance table frequencies must be strictly increasing".into()));
        }
        if points.iter().any(|(f, z)| !f.is_finite() || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("impedance table entry".into()));
        }
        Ok(ImpedanceTable { label: label.into(), points })
    }

    /// The single printed room-temperature point of the low-pass filter.
    pub fn measured_point() -> Self {
        Self::new("measured LPF impedance at the qubit frequency (single point)", vec![(MEASURED_POINT_HZ, C64::new(MEASURED_POINT_OHMS.0, MEASURED_POINT_OHMS.1))])
            .expect("valid point")
    }

    /// Read a CSV with header `freq_hz,re_ohm,im_ohm`.
    pub fn from_csv(label: impl Into<String>, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let r = row.map_err(|e| Error::Format(format!("impedance table: {e}")))?;
            points.push((r.freq_hz, C64::new(r.re_ohm, r.im_ohm)));
        }
        Self::new(label, points)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["freq_hz", "re_ohm", "im_ohm"]).map_err(|e| Error::Format(e.to_string()))?;
        for (f, z) in &self.points {
            w.write_record([f.to_string(), z.re.to_string(), z.im.to_string()]).map_err(|e| Error::Format(e.to_string()))?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn at(&self, freq_hz: f64) -> C64 {
        let p = &self.points;
        if freq_hz <= p[0].0 {
            return p[0].1;
        }
        if freq_hz >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|(f, _)| *f <= freq_hz);
        let (f0, z0) = p[k - 1];
        let (f1, z1) = p[k];
        let s = (freq_hz - f0) / (f1 - f0);
        z0 + (z1 - z0) * s
    }
}

/// Idealized reflective low-pass filter: matched 50 Ω up to the pass-band
/// edge `ω_q/3 + ϑ`, the tabulated impedance above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterModel {
    /// Pass-band edge, rad/s.
    pub cutoff: f64,
    /// Margin above the drive frequency, rad/s.
    pub theta: f64,
    pub table: ImpedanceTable,
}

impl FilterModel {
    pub fn new(omega_q: f64, theta: f64, table: ImpedanceTable) -> Result<Self> {
        if !(theta >= 0.0) || !omega_q.is_finite() || omega_q <= 0.0 {
            return Err(Error::InvalidParameter(format!("filter needs ω_q > 0 and ϑ ≥ 0, got {omega_q}, {theta}")));
        }
        Ok(FilterModel { cutoff: omega_q / 3.0 + theta, theta, table })
    }

    /// Θ(ν): 1 in the pass band, 0 above it.
    pub fn passes(&self, nu: f64) -> bool {
        nu <= self.cutoff
    }

    /// Load seen by the qubit port at angular frequency `omega`.
    pub fn impedance(&self, omega: f64) -> C64 {
        if self.passes(omega) {
            C64::new(50.0, 0.0)
        } else {
            self.table.at(omega / (2.0 * std::f64::consts::PI))
        }
    }
}
