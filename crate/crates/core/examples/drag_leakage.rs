//! DRAG quadrature for a 30 ns sub-harmonic π pulse and the f-state leakage
//! it removes. Writes the I/Q waveform to the working directory.
//!
//! ```bash
//! cargo run --release --example drag_leakage
//! ```

use serde_json::json;

use subharm::experiments::drag_leakage;
use subharm::model::TransmonParams;
use subharm::pulses::{drag_correct, FlatTop, DEFAULT_RAMP_OFFSET, DEFAULT_RAMP_RATE, DEFAULT_SAMPLE_RATE};

fn main() -> subharm::Result<()> {
    let params = TransmonParams::reference_device().with_dim(5);
    let r = drag_leakage(&params, 30e-9, DEFAULT_RAMP_RATE, DEFAULT_RAMP_OFFSET, 1e-10)?;
    println!("eta {:.4}", r.eta);
    println!("P_f without DRAG {:.3e}, with DRAG {:.3e} ({:.1}x lower)", r.p_f_plain, r.p_f_drag, r.suppression());
    println!("P_e without DRAG {:.5}, with DRAG {:.5}", r.p_e_plain, r.p_e_drag);
    println!("ODE residual {:.2e}, max |eps_y| {:.4}", r.drag_residual, r.max_eps_y);

    let env = FlatTop::new(r.eta, DEFAULT_RAMP_RATE, DEFAULT_RAMP_OFFSET, 30e-9)?;
    let sol = drag_correct(&env, params.alpha, DEFAULT_SAMPLE_RATE)?;
    let (csv, side) = sol.waveform().write(std::path::Path::new("."), "drag_pi_30ns", json!({ "eta": r.eta }))?;
    println!("wrote {} and {}", csv.display(), side.display());
    Ok(())
}
