//! Reference and interleaved randomized benchmarking of tuned-up gates on a
//! three-level device with T1 and T2.
//!
//! ```bash
//! cargo run --release --example randomized_benchmarking
//! ```

use subharm::benchmarking::{clifford_group, fit_rb, interleaved_fidelity, run_rb, DecompositionTable, Gate, GateSet, RbConfig};
use subharm::experiments::{tune_up, DeviceConfig, SimDevice, TuneUpPlan};
use subharm::model::TransmonParams;
use subharm::pulses::PhaseLedger;

fn main() -> subharm::Result<()> {
    let params = TransmonParams::reference_device().with_dim(3);
    let clean = SimDevice::new(DeviceConfig::stark_shifted(params, 0.4549))?;
    let tu = tune_up(&clean, &TuneUpPlan::around_estimate(&clean)?)?;
    let dev = SimDevice::new(DeviceConfig { dissipation: true, ..*clean.config() })?;

    let group = clifford_group(DecompositionTable::Standard);
    let gates = GateSet::from_tuneup(&tu);
    let ledger = PhaseLedger::new(tu.phi_ramp, tu.delta_omega)?;
    let cfg = RbConfig { lengths: vec![1, 2, 4, 8, 16, 32, 64, 128, 256], n_seq: 20, seed: 7, interleaved: None, depolarizing: 0.0 };

    let reference = run_rb(&dev, &group, &gates, &ledger, &cfg)?;
    let x90 = group.find(&Gate::X90.unitary()).expect("X90 is a Clifford");
    let inter = run_rb(&dev, &group, &gates, &ledger, &RbConfig { interleaved: Some(x90), ..cfg.clone() })?;
    let (fr, fi) = (fit_rb(&reference)?, fit_rb(&inter)?);

    println!("{:>6} {:>10} {:>12}", "m", "reference", "interleaved");
    for (i, m) in reference.sequence_lengths.iter().enumerate() {
        println!("{m:>6} {:>10.5} {:>12.5}", reference.survival[i], inter.survival[i]);
    }
    println!("{:.3} physical pulses per Clifford", group.average_pulses());
    println!("Clifford fidelity {:.4}%", 100.0 * fr.clifford_fidelity());
    println!("X90 fidelity {:.4}%", 100.0 * interleaved_fidelity(fi.p, fr.p)?.fidelity);
    Ok(())
}
