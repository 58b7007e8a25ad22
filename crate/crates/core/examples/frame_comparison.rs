//! The same flat-top pulse simulated with the full lab Hamiltonian and in the
//! rotating frame, at two drive strengths. Each frame is driven at its own
//! three-photon resonance and with its own π length, then at the other's.
//!
//! ```bash
//! cargo run --release --example frame_comparison
//! ```

use std::f64::consts::{PI, TAU};

use subharm::experiments::{area_theorem_length, lab_resonance, rwa_resonance, simulate_pulse, Frame, ScanOptions, FLOQUET_TOL};
use subharm::model::{lab_levels, TransmonParams};

fn main() -> subharm::Result<()> {
    let p = TransmonParams::reference_device().with_dim(6);
    let opts = ScanOptions { tol: 1e-9, ..ScanOptions::default() };
    println!("lab g-e frequency {:.3} MHz, nominal {:.3} MHz", lab_levels(&p)?.0[1] / TAU / 1e6, p.omega_q / TAU / 1e6);
    for eta in [0.15, 0.3] {
        let rot = rwa_resonance(&p, eta)?;
        let lab = lab_resonance(&p, eta, FLOQUET_TOL)?;
        let pi = area_theorem_length(p.alpha, eta, opts.ramp_rate, opts.ramp_offset, PI)?;
        println!("eta {eta}: resonance at {:.4} MHz (rotating) vs {:.4} MHz (lab)", rot.omega_d / TAU / 1e6, lab.omega_d / TAU / 1e6);
        // the lab Rabi rate is faster, so its π pulse is shorter by about the rate ratio
        let pi_lab = pi * rot.rabi / lab.rabi;
        for (name, w, len) in [("rotating", rot.omega_d, pi), ("lab", lab.omega_d, pi_lab)] {
            let a = simulate_pulse(&p, eta, w / TAU, len, Frame::Rwa, &opts)?;
            let b = simulate_pulse(&p, eta, w / TAU, len, Frame::Lab, &opts)?;
            println!("  {:.1} ns pulse at the {name} resonance: P_e rotating {a:.4}, lab {b:.4}", len * 1e9);
        }
    }
    Ok(())
}
