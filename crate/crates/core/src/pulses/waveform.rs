use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{ensure_positive, Error, Result};

/// Baseband I/Q samples on a uniform AWG grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IQWaveform {
    pub sample_rate: f64,
    pub i: Vec<f64>,
    pub q: Vec<f64>,
}

/// Default AWG rate, 1 GS/s.
pub const DEFAULT_SAMPLE_RATE: f64 = 1e9;

impl IQWaveform {
    pub fn new(sample_rate: f64, i: Vec<f64>, q: Vec<f64>) -> Self {
        assert_eq!(i.len(), q.len(), "I and Q lengths differ");
        IQWaveform { sample_rate, i, q }
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 / self.sample_rate).collect()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Append another waveform sampled at the same rate.
    pub fn extend(&mut self, other: &IQWaveform) -> Result<()> {
        if other.sample_rate != self.sample_rate {
            return Err(Error::InvalidParameter("sample rates differ".into()));
        }
        self.i.extend_from_slice(&other.i);
        self.q.extend_from_slice(&other.q);
        Ok(())
    }

    /// Write `<stem>.csv` with columns `time_s,i,q` and a `<stem>.json` sidecar.
    pub fn write(&self, dir: &Path, stem: &str, sidecar: Value) -> Result<(PathBuf, PathBuf)> {
        ensure_positive("sample_rate", self.sample_rate)?;
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Format(e.to_string()))?;
        w.write_record(["time_s", "i", "q"]).map_err(|e| Error::Format(e.to_string()))?;
        for (t, (i, q)) in self.times().iter().zip(self.i.iter().zip(&self.q)) {
            w.write_record([t.to_string(), i.to_string(), q.to_string()]).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        let json_path = dir.join(format!("{stem}.json"));
        let meta = json!({ "sample_rate": self.sample_rate, "samples": self.len(), "metadata": sidecar });
        fs::write(&json_path, serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?)?;
        Ok((csv_path, json_path))
    }

    /// Read a waveform written by [`IQWaveform::write`]; returns it with the sidecar metadata.
    pub fn read(csv_path: &Path, json_path: &Path) -> Result<(Self, Value)> {
        let meta: Value = serde_json::from_str(&fs::read_to_string(json_path)?).map_err(|e| Error::Format(e.to_string()))?;
        let rate = meta["sample_rate"].as_f64().ok_or_else(|| Error::Format("sidecar lacks sample_rate".into()))?;
        let mut r = csv::Reader::from_path(csv_path).map_err(|e| Error::Format(e.to_string()))?;
        let headers = r.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["time_s", "i", "q"] {
            return Err(Error::Format(format!("unexpected waveform header {headers:?}")));
        }
        let (mut i, mut q) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            let parse = |k: usize| rec[k].parse::<f64>().map_err(|e| Error::Format(format!("{}: {e}", &rec[k])));
            i.push(parse(1)?);
            q.push(parse(2)?);
        }
        let expected = meta["samples"].as_u64().unwrap_or(i.len() as u64) as usize;
        if expected != i.len() {
            return Err(Error::Format(format!("sidecar lists {expected} samples, CSV has {}", i.len())));
        }
        Ok((IQWaveform::new(rate, i, q), meta["metadata"].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let i: Vec<f64> = (0..50).map(|k| (k as f64 * 0.1).sin() * 0.38 + 1e-17 * k as f64).collect();
        let q: Vec<f64> = (0..50).map(|k| -(k as f64 * 0.37).cos() / 3.0).collect();
        let wf = IQWaveform::new(1e9, i, q);
        let (c, j) = wf.write(dir.path(), "pulse", json!({"note": "x"})).unwrap();
        let (back, meta) = IQWaveform::read(&c, &j).unwrap();
        assert_eq!(back, wf);
        for (a, b) in back.i.iter().zip(&wf.i) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(meta["note"], "x");
    }
}
