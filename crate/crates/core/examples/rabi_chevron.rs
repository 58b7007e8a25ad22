//! Rabi chevron of the three-photon transition in the rotating frame.
//!
//! Scans generator frequency around the Stark-shifted resonance and pulse
//! length, prints a coarse text map of the excited population and fits the
//! oscillation on the centre line.
//!
//! ```bash
//! cargo run --release --example rabi_chevron
//! ```

use std::f64::consts::TAU;

use subharm::experiments::{fit_rabi_trace, rabi_scan, Frame, ScanOptions};
use subharm::model::{analytic_rabi_rate, analytic_stark_shift, TransmonParams};

fn main() -> subharm::Result<()> {
    let params = TransmonParams::reference_device().with_dim(3);
    let (amp, k): (f64, f64) = (0.38, -1.197);
    let eta = (amp * k).abs();
    let center = (params.omega_q + analytic_stark_shift(&params, eta)) / 3.0 / TAU;

    let freqs: Vec<f64> = (0..15).map(|i| center + (i as f64 - 7.0) * 1e6).collect();
    let durs: Vec<f64> = (0..121).map(|j| j as f64 * 2.5e-9).collect();
    let scan = rabi_scan(&params, amp, k, &freqs, &durs, Frame::Rwa, &ScanOptions::default())?;

    println!("P_e, rows = generator detuning (MHz), columns = pulse length 0..300 ns");
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for (i, row) in scan.p_excited.iter().enumerate() {
        let line: String = row.iter().step_by(2).map(|p| shades[((p * 9.0).round() as usize).min(9)]).collect();
        println!("{:+5.1} |{line}|", (freqs[i] - center) / 1e6);
    }

    let (t, p) = scan.trace(7);
    let fit = fit_rabi_trace(t, p)?;
    println!("eta = {eta:.4}");
    println!("centre-line Rabi rate {:.3} MHz (analytic {:.3} MHz), contrast {:.3}", fit.rate.value / 1e6, analytic_rabi_rate(&params, eta) / TAU / 1e6, fit.contrast);
    Ok(())
}
