use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::operators::{Ket, Operator};

/// Sampled states at increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

/// States that can report level populations.
pub trait Populations {
    fn populations(&self) -> Vec<f64>;
}

impl Populations for Ket {
    fn populations(&self) -> Vec<f64> {
        self.iter().map(|c| c.norm_sqr()).collect()
    }
}

impl Populations for Operator {
    fn populations(&self) -> Vec<f64> {
        (0..self.nrows()).map(|k| self[(k, k)].re).collect()
    }
}

impl<S: Populations> Trajectory<S> {
    pub fn populations(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.populations()).collect()
    }

    pub fn population_of(&self, level: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.populations()[level]).collect()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }
}

/// Write `<stem>.csv` (columns `time, P0, ..., P{N-1}`) and `<stem>.json`
/// (metadata) into `dir`. Returns the two paths.
pub fn write_trajectory(dir: &Path, stem: &str, times: &[f64], populations: &[Vec<f64>], metadata: Value) -> Result<(PathBuf, PathBuf)> {
    if times.len() != populations.len() {
        return Err(Error::InvalidParameter("times and populations differ in length".into()));
    }
    let dim = populations.first().map_or(0, |p| p.len());
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Format(e.to_string()))?;
    let mut header = vec!["time".to_string()];
    header.extend((0..dim).map(|k| format!("P{k}")));
    w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
    for (t, p) in times.iter().zip(populations) {
        let mut row = vec![t.to_string()];
        row.extend(p.iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    let json_path = dir.join(format!("{stem}.json"));
    let meta = json!({ "dim": dim, "samples": times.len(), "columns": header, "metadata": metadata });
    fs::write(&json_path, serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?)?;
    Ok((csv_path, json_path))
}

/// Read back a trajectory CSV written by [`write_trajectory`].
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    let mut times = Vec::new();
    let mut pops = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}"))))
            .collect::<Result<_>>()?;
        times.push(vals[0]);
        pops.push(vals[1..].to_vec());
    }
    Ok((times, pops))
}
