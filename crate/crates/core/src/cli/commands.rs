//! The five subcommands. Each writes its artifacts into `out` and returns
//! the file names it produced.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use super::config::{FrameName, RunConfig, TableName};
use crate::benchmarking::{clifford_group, fit_rb, interleaved_fidelity, run_rb, sequence_seed, DecompositionTable, Gate, GateSet, RBResult, RbConfig, RbFit};
use crate::budget::{
    calibrate_c_c, compare_configs, dbm, gamma3, heat_for, matched_q_reference, power_for_rabi, purcell_rate, transmon_capacitance, FilterModel, ImpedanceTable, Load,
};
use crate::error::{Error, Result};
use crate::experiments::{
    area_theorem_length, drag_leakage, fit_rabi_trace, rabi_scan, tune_up, DeviceConfig, Frame, ScanOptions, SimDevice, TuneUp, TuneUpPlan,
};
use crate::fit::bisect;
use crate::model::{analytic_rabi_rate, analytic_stark_shift};
use crate::pulses::{drag_correct, FlatTop, PhaseLedger, DEFAULT_SAMPLE_RATE};

pub fn gate_by_name(name: &str) -> Option<Gate> {
    Some(match name {
        "X180" => Gate::X180,
        "X90" => Gate::X90,
        "Xm90" => Gate::Xm90,
        "Y180" => Gate::Y180,
        "Y90" => Gate::Y90,
        "Ym90" => Gate::Ym90,
        _ => return None,
    })
}

fn write_json(out: &Path, name: &str, value: &impl Serialize) -> Result<String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(out.join(name), text + "\n")?;
    Ok(name.to_string())
}

fn write_text(out: &Path, name: &str, text: &str) -> Result<String> {
    fs::write(out.join(name), text)?;
    Ok(name.to_string())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn scan_options(cfg: &RunConfig) -> ScanOptions {
    ScanOptions { ramp_rate: cfg.ramp_rate(), ramp_offset: cfg.pulse.ramp_offset, tol: cfg.pulse.tol }
}

fn with_pulse_settings(mut dc: DeviceConfig, cfg: &RunConfig) -> DeviceConfig {
    dc.ramp_rate = cfg.ramp_rate();
    dc.ramp_offset = cfg.pulse.ramp_offset;
    dc.tol = cfg.pulse.tol;
    dc
}

pub fn cmd_rabi(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let params = cfg.transmon_params()?;
    let r = &cfg.rabi;
    let center = match r.freq_center_ghz {
        Some(g) => g * 1e9,
        None => cfg.resonance_hz()?,
    };
    let half = 0.5 * r.freq_span_mhz * 1e6;
    let freqs = linspace(center - half, center + half, r.freq_points);
    let durs = linspace(0.0, r.duration_max_ns * 1e-9, r.duration_points);
    let frame = match r.frame {
        FrameName::Rwa => Frame::Rwa,
        FrameName::Lab => Frame::Lab,
    };
    info!("rabi scan: {} x {} points, frame {:?}", freqs.len(), durs.len(), frame);
    let scan = rabi_scan(&params, cfg.drive.amplitude_v, cfg.drive.k_per_v, &freqs, &durs, frame, &scan_options(cfg))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["freq_hz", "duration_s", "p_excited"]).map_err(|e| Error::Format(e.to_string()))?;
    for (i, f) in scan.drive_freq_axis.iter().enumerate() {
        for (j, d) in scan.duration_axis.iter().enumerate() {
            w.write_record([f.to_string(), d.to_string(), scan.p_excited[i][j].to_string()]).map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    let csv_text = String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).map_err(|e| Error::Format(e.to_string()))?;

    let mid = freqs.len() / 2;
    let (t, p) = scan.trace(mid);
    let center_fit = if cfg.eta() > 0.0 {
        fit_rabi_trace(t, p).map_err(|e| warn!("centre trace fit failed: {e}")).ok()
    } else {
        None
    };
    let eta = cfg.eta();
    let result = json!({
        "scan": scan,
        "eta": eta,
        "center_freq_hz": freqs[mid],
        "center_fit": center_fit,
        "analytic_rabi_hz": analytic_rabi_rate(&params, eta) / TAU,
        "analytic_stark_hz": analytic_stark_shift(&params, eta) / TAU,
    });
    Ok(vec![write_text(out, "rabi_scan.csv", &csv_text)?, write_json(out, "rabi_result.json", &result)?])
}

fn tuneup_device(cfg: &RunConfig, eta: f64, dissipation: bool) -> Result<SimDevice> {
    let params = cfg.transmon_params()?;
    let base = if cfg.tuneup.stark { DeviceConfig::stark_shifted(params, eta) } else { DeviceConfig::stark_free(params, eta) };
    let mut dc = with_pulse_settings(base, cfg);
    dc.injected_ramp_phase = cfg.tuneup.inject_ramp_phase_rad;
    dc.injected_gap_detuning = TAU * 1e6 * cfg.tuneup.inject_gap_detuning_mhz;
    dc.dissipation = dissipation;
    SimDevice::new(dc)
}

fn run_tuneup(dev: &SimDevice, n_reps: usize) -> Result<(TuneUp, TuneUpPlan)> {
    let mut plan = TuneUpPlan::around_estimate(dev)?;
    plan.n_reps = n_reps;
    Ok((tune_up(dev, &plan)?, plan))
}

pub fn cmd_tuneup(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let eta = cfg.eta();
    let dev = tuneup_device(cfg, eta, false)?;
    let (tu, plan) = run_tuneup(&dev, cfg.tuneup.n_reps)?;
    let c = dev.config();
    let result = json!({
        "eta": eta,
        "omega_d": c.omega_d,
        "stark": c.stark,
        "area_theorem_pi_length_s": area_theorem_length(c.params.alpha, eta, c.ramp_rate, c.ramp_offset, PI)?,
        "injected": { "ramp_phase_rad": c.injected_ramp_phase, "gap_detuning_rad_per_s": c.injected_gap_detuning },
        "tuneup": tu,
        "plan": plan,
    });
    Ok(vec![write_json(out, "tuneup.json", &result)?])
}

fn rb_summary(r: &RBResult, fit: &RbFit) -> serde_json::Value {
    json!({
        "sequence_lengths": r.sequence_lengths,
        "survival": r.survival,
        "std_error": r.std_error,
        "n_sequences": r.n_sequences,
        "seed": r.seed,
        "interleaved": r.interleaved,
        "fit": fit,
        "clifford_fidelity": fit.clifford_fidelity(),
    })
}

/// Drive strength whose area-theorem π pulse lasts `length`.
pub fn eta_for_pi_length(cfg: &RunConfig, length: f64) -> Result<f64> {
    let p = cfg.transmon_params()?;
    bisect(|e| Ok(area_theorem_length(p.alpha, e, cfg.ramp_rate(), cfg.pulse.ramp_offset, PI)? - length), 0.05, 2.0, 1e-12)
        .map_err(|e| Error::Calibration(format!("no drive strength gives a {length:e} s π pulse: {e}")))
}

pub fn cmd_rb(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let rb = &cfg.rb;
    let eta = match rb.pi_length_ns {
        Some(l) => eta_for_pi_length(cfg, l * 1e-9)?,
        None => cfg.eta(),
    };
    let (tu, _) = run_tuneup(&tuneup_device(cfg, eta, false)?, cfg.tuneup.n_reps)?;
    info!("gate set: π {:.3} ns, π/2 {:.3} ns", tu.pi_length * 1e9, tu.pi2_length * 1e9);
    let dev = tuneup_device(cfg, eta, rb.dissipation)?;
    let table = match rb.table {
        TableName::Standard => DecompositionTable::Standard,
        TableName::VirtualZ => DecompositionTable::VirtualZ,
    };
    let group = clifford_group(table);
    let mut gates = GateSet::from_tuneup(&tu);
    gates.gap = rb.gap_ns * 1e-9;
    let ledger = PhaseLedger::new(tu.phi_ramp, tu.delta_omega)?;
    let base = RbConfig { lengths: rb.lengths.clone(), n_seq: rb.n_seq, seed: cfg.seed, interleaved: None, depolarizing: rb.depolarizing };
    let reference = run_rb(&dev, &group, &gates, &ledger, &base)?;
    let ref_fit = fit_rb(&reference)?;

    let mut runs = vec![("reference", &reference)];
    let mut result = json!({
        "eta": eta,
        "gates": tu,
        "gap_s": gates.gap,
        "table": rb.table,
        "average_pulses_per_clifford": group.average_pulses(),
        "reference": rb_summary(&reference, &ref_fit),
    });
    let interleaved;
    if let Some(name) = &rb.interleaved {
        let gate = gate_by_name(name).ok_or_else(|| Error::Config(format!("rb.interleaved: unknown gate {name}")))?;
        let idx = group.find(&gate.unitary()).expect("physical gates are Cliffords");
        interleaved = run_rb(&dev, &group, &gates, &ledger, &RbConfig { interleaved: Some(idx), ..base.clone() })?;
        let fit = fit_rb(&interleaved)?;
        let f = interleaved_fidelity(fit.p, ref_fit.p)?;
        result["interleaved"] = rb_summary(&interleaved, &fit);
        result["interleaved_gate"] = json!(name);
        result["interleaved_fidelity"] = json!(f);
        runs.push(("interleaved", &interleaved));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["run", "length", "sequence", "sequence_seed", "survival"]).map_err(|e| Error::Format(e.to_string()))?;
    for (name, r) in runs {
        for (i, m) in r.sequence_lengths.iter().enumerate() {
            for (s, v) in r.raw[i].iter().enumerate() {
                w.write_record([name.to_string(), m.to_string(), s.to_string(), sequence_seed(r.seed, i, s).to_string(), v.to_string()])
                    .map_err(|e| Error::Format(e.to_string()))?;
            }
        }
    }
    let csv_text = String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).map_err(|e| Error::Format(e.to_string()))?;
    Ok(vec![write_json(out, "rb_result.json", &result)?, write_text(out, "rb_raw.csv", &csv_text)?])
}

pub fn cmd_drag(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let params = cfg.transmon_params()?.with_dim(cfg.drag.dim);
    let duration = cfg.drag.duration_ns * 1e-9;
    let report = drag_leakage(&params, duration, cfg.ramp_rate(), cfg.pulse.ramp_offset, cfg.pulse.tol)?;
    let env = FlatTop::new(report.eta, cfg.ramp_rate(), cfg.pulse.ramp_offset, duration)?;
    let sol = drag_correct(&env, params.alpha, DEFAULT_SAMPLE_RATE)?;
    let (csv_path, side) = sol.waveform().write(out, "drag_waveform", json!({ "eta": report.eta, "alpha": params.alpha, "duration_s": duration }))?;
    let result = json!({ "report": report, "suppression": report.suppression() });
    let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(vec![write_json(out, "drag_report.json", &result)?, name(&csv_path), name(&side)])
}

pub fn cmd_budget(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let b = &cfg.budget;
    let params = cfg.transmon_params()?;
    let table = match &b.impedance_csv {
        Some(path) => ImpedanceTable::from_csv(path.clone(), fs::File::open(path)?)?,
        None => ImpedanceTable::measured_point(),
    };
    let filter = FilterModel::new(params.omega_q, TAU * 1e6 * b.theta_mhz, table.clone())?;
    let c_q = transmon_capacitance(params.alpha)?;
    let matched = Load::Impedance(crate::operators::C64::new(50.0, 0.0));
    let c_c = calibrate_c_c(TAU * 1e3 * b.direct_decay_khz, c_q, params.omega_q, matched)?;
    let g50 = purcell_rate(c_c, c_q, params.omega_q, matched)?;
    let gf = purcell_rate(c_c, c_q, params.omega_q, Load::Impedance(filter.impedance(params.omega_q)))?;
    let suppression = b.filter_suppression.unwrap_or(4.7e3 / 159.0);

    let lines = b
        .configs
        .iter()
        .map(|s| {
            let mut l = s.to_line();
            let s_cfg = if matches!(s.method, crate::budget::DriveMethod::Subharmonic) { suppression } else { 1.0 };
            l.reference = Some(matched_q_reference(s.method, TAU * 1e6 * b.report_rabi_mhz, params.omega_q, params.alpha, b.q_factor, s_cfg)?);
            Ok(l)
        })
        .collect::<Result<Vec<_>>>()?;
    let axis: Vec<f64> = (0..b.points).map(|k| TAU * 1e6 * b.rabi_min_mhz * (b.rabi_max_mhz / b.rabi_min_mhz).powf(k as f64 / (b.points - 1) as f64)).collect();
    let heat = compare_configs(&axis, &lines)?;

    let report = TAU * 1e6 * b.report_rabi_mhz;
    let rows = lines
        .iter()
        .map(|l| {
            let h = heat_for(l, report)?;
            let r = l.reference.as_ref().expect("set above");
            Ok(json!({
                "label": l.label,
                "method": l.method,
                "base_attenuation_db": l.base_attenuation_db,
                "heat_w": h,
                "heat_dbm": dbm(h),
                "advantage_db_vs_first": match lines.first() { Some(f) => 10.0 * (heat_for(f, report)? / h).log10(), None => 0.0 },
                "triple_speed_power_ratio": power_for_rabi(3.0 * report, l.method, r)? / power_for_rabi(report, l.method, r)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let result = json!({
        "assumptions": {
            "q_factor": b.q_factor,
            "filter_suppression": suppression,
            "filter_suppression_source": if b.filter_suppression.is_some() { "config" } else { "measured 4.7 kHz / 159 Hz" },
            "impedance_table": table.label,
            "qubit_capacitance_f": c_q,
            "drive_frequency": "omega_q / 3",
        },
        "purcell": {
            "c_c_f": c_c,
            "rate_50_ohm_per_s": g50,
            "rate_filtered_per_s": gf,
            "model_suppression": g50 / gf,
        },
        "gamma3_per_s": gamma3(TAU * 1e3 * b.gamma3_gamma_khz, params.alpha.abs(), TAU * 1e9 * b.gamma3_omega0_ghz, TAU * 1e6 * b.theta_mhz)?,
        "report_rabi_hz": b.report_rabi_mhz * 1e6,
        "rows": rows,
        "heat": heat,
    });
    Ok(vec![
        write_json(out, "budget_result.json", &result)?,
        write_text(out, "budget_heat.csv", &heat.to_csv()?)?,
        write_text(out, "budget_impedance.csv", &table.to_csv()?)?,
    ])
}
