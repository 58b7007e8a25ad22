//! Full tune-up on a simulated device with an artificial frame phase and gap
//! detuning injected, showing that the calibrations pick both up.
//!
//! ```bash
//! cargo run --release --example tuneup
//! ```

use std::f64::consts::TAU;

use subharm::experiments::{tune_up, DeviceConfig, SimDevice, TuneUpPlan};
use subharm::model::TransmonParams;

fn run(label: &str, cfg: DeviceConfig) -> subharm::Result<()> {
    let dev = SimDevice::new(cfg)?;
    let tu = tune_up(&dev, &TuneUpPlan::around_estimate(&dev)?)?;
    println!(
        "{label:<10} pi {:7.3} ns  pi/2 {:7.3} ns  phi_ramp {:+.4} rad  delta_omega/2pi {:+8.4} MHz",
        tu.pi_length * 1e9,
        tu.pi2_length * 1e9,
        tu.phi_ramp,
        tu.delta_omega / TAU / 1e6
    );
    Ok(())
}

fn main() -> subharm::Result<()> {
    let params = TransmonParams::reference_device().with_dim(3);
    let clean = DeviceConfig::stark_shifted(params, 0.4549);
    run("clean", clean)?;
    run("injected", DeviceConfig { injected_ramp_phase: 0.5, injected_gap_detuning: TAU * 2e6, ..clean })?;
    println!("expected shift: phi_ramp +0.5 rad, delta_omega +2 MHz");
    Ok(())
}
