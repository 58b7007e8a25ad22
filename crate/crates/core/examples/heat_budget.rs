//! Heat at the base stage for resonant and sub-harmonic drive of three
//! input-line configurations, plus the drive-port decay rates.
//!
//! ```bash
//! cargo run --release --example heat_budget
//! ```

use std::f64::consts::TAU;

use subharm::budget::{
    calibrate_c_c, compare_configs, dbm, gamma3, matched_q_reference, purcell_rate, transmon_capacitance, DriveMethod, FilterModel, ImpedanceTable, LineConfig,
    Load, MATCHED_Q,
};
use subharm::model::TransmonParams;
use subharm::operators::C64;

fn main() -> subharm::Result<()> {
    let p = TransmonParams::reference_device();
    let report = TAU * 50e6;
    let suppression = 4.7e3 / 159.0;
    let lines = [("config-1", 40.0, DriveMethod::Resonant), ("config-2", 20.0, DriveMethod::Subharmonic), ("config-3", 3.0, DriveMethod::Subharmonic)]
        .into_iter()
        .map(|(label, db, method)| {
            let s = if method == DriveMethod::Subharmonic { suppression } else { 1.0 };
            Ok(LineConfig {
                label: label.into(),
                base_attenuation_db: db,
                description: String::new(),
                method,
                reference: Some(matched_q_reference(method, report, p.omega_q, p.alpha, MATCHED_Q, s)?),
            })
        })
        .collect::<subharm::Result<Vec<_>>>()?;

    let axis: Vec<f64> = [1.0, 3.0, 10.0, 30.0, 50.0, 100.0].iter().map(|f| TAU * f * 1e6).collect();
    let table = compare_configs(&axis, &lines)?;
    print!("{:>10}", "Rabi MHz");
    for c in &table.curves {
        print!("{:>14}", c.label);
    }
    println!("   (heat at base, dBm)");
    for (i, w) in axis.iter().enumerate() {
        print!("{:>10.0}", w / TAU / 1e6);
        for c in &table.curves {
            print!("{:>14.2}", dbm(c.heat[i]));
        }
        println!();
    }

    let c_q = transmon_capacitance(p.alpha)?;
    let z50 = Load::Impedance(C64::new(50.0, 0.0));
    let c_c = calibrate_c_c(TAU * 4.7e3, c_q, p.omega_q, z50)?;
    let filter = FilterModel::new(p.omega_q, TAU * 200e6, ImpedanceTable::measured_point())?;
    let filtered = purcell_rate(c_c, c_q, p.omega_q, Load::Impedance(filter.impedance(p.omega_q)))?;
    println!("C_c {:.3} fF: decay {:.3e} /s into 50 Ohm, {:.3e} /s behind the filter", c_c * 1e15, purcell_rate(c_c, c_q, p.omega_q, z50)?, filtered);
    println!("three-photon decay {:.3e} /s", gamma3(TAU * 4.7e3, p.alpha.abs(), TAU * 1.32e9, TAU * 200e6)?);
    Ok(())
}
