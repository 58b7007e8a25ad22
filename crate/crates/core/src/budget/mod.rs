//! Drive-line physics: filtered system-bath coupling, three-photon decay,
//! decay through the drive port load, and base-stage heating of resonant and
//! sub-harmonic drives.

pub mod heat;
pub mod impedance;

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::fit::bisect;
use crate::operators::C64;

pub use heat::{
    compare_configs, crossover_rabi, dbm, heat_at_base, heat_for, matched_q_reference, power_for_rabi, resonant_equivalent_rabi, ConfigCurve, DriveMethod,
    HeatTable, LineConfig, ReferencePoint, MATCHED_Q,
};
pub use impedance::{FilterModel, ImpedanceTable, MEASURED_POINT_HZ, MEASURED_POINT_OHMS};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Circuit parameters of the drive-port coupling.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CouplingParams {
    /// Coupling capacitance, F.
    pub c_c: f64,
    /// Qubit capacitance, F.
    pub c_r: f64,
    /// Line capacitance per length, F/m.
    pub c_line: f64,
    /// Phase velocity of the line, m/s.
    pub v_line: f64,
    /// Qubit frequency, rad/s.
    pub omega_q: f64,
}

impl CouplingParams {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("c_c", self.c_c), ("c_r", self.c_r), ("c_line", self.c_line), ("v_line", self.v_line), ("omega_q", self.omega_q)] {
            ensure_positive(n, v)?;
        }
        Ok(())
    }
}

/// System-bath coupling `λ(ν) = Θ(ν) C_c/√(C_r c) √(ω_q ν / 2πv)`.
pub fn coupling_lambda(nu: f64, cp: &CouplingParams, filter: &FilterModel) -> Result<f64> {
    ensure_positive("nu", nu)?;
    cp.validate()?;
    if !filter.passes(nu) {
        return Ok(0.0);
    }
    Ok(cp.c_c / (cp.c_r * cp.c_line).sqrt() * (cp.omega_q * nu / (2.0 * PI * cp.v_line)).sqrt())
}

/// Three-photon decay rate `(243/32π²) γ³ |α|² / ω₀⁴ (ϑ/ω₀)²`, exactly as
/// printed. `gamma` and `omega0` are explicit because the source leaves
/// their identification open.
pub fn gamma3(gamma: f64, alpha: f64, omega0: f64, theta: f64) -> Result<f64> {
    for (n, v) in [("gamma", gamma), ("alpha", alpha), ("omega0", omega0), ("theta", theta)] {
        ensure_finite(n, v)?;
    }
    if gamma < 0.0 || theta < 0.0 || omega0 < 0.0 {
        return Err(Error::InvalidParameter("gamma3 inputs must be non-negative".into()));
    }
    if omega0 == 0.0 {
        return Err(Error::InvalidParameter("gamma3: division by ω₀ = 0".into()));
    }
    Ok(243.0 / (32.0 * PI * PI) * gamma.powi(3) * alpha * alpha / omega0.powi(4) * (theta / omega0).powi(2))
}

/// Load on the drive port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Open,
    Impedance(C64),
}

/// Single-photon decay rate into the load, `Re[Y_ext(ω)]/C_Σ`, where `Y_ext`
/// is the coupling capacitor in series with the load and `C_Σ = C_q + C_c`.
pub fn purcell_rate(c_c: f64, c_q: f64, omega: f64, load: Load) -> Result<f64> {
    ensure_positive("c_c", c_c)?;
    ensure_positive("c_q", c_q)?;
    ensure_positive("omega", omega)?;
    let z = match load {
        Load::Open => return Ok(0.0),
        Load::Impedance(z) => z,
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Ok(0.0);
    }
    let zc = C64::new(0.0, -1.0 / (omega * c_c));
    let y = (z + zc).inv();
    Ok(y.re / (c_q + c_c))
}

/// Qubit capacitance from the charging energy, taking `E_C ≈ |α|`.
pub fn transmon_capacitance(alpha: f64) -> Result<f64> {
    ensure_positive("|alpha|", alpha.abs())?;
    Ok(ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * HBAR * alpha.abs()))
}

/// Coupling capacitance giving the target decay rate into `load` at `omega`.
pub fn calibrate_c_c(target_rate: f64, c_q: f64, omega: f64, load: Load) -> Result<f64> {
    ensure_positive("target_rate", target_rate)?;
    let f = |log_c: f64| -> Result<f64> { Ok((purcell_rate(log_c.exp(), c_q, omega, load)? / target_rate).ln()) };
    let (lo, hi) = ((c_q * 1e-9).ln(), c_q.ln());
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::Calibration(format!("decay rate {target_rate} s⁻¹ not reachable with C_c ≤ C_q")));
    }
    Ok(bisect(f, lo, hi, 1e-13)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn w_q() -> f64 {
        2.0 * PI * 3.96e9
    }

    fn cp() -> CouplingParams {
        CouplingParams { c_c: 0.3e-15, c_r: 90e-15, c_line: 1.6e-10, v_line: 1.2e8, omega_q: w_q() }
    }

    #[test]
    fn lambda_laws() {
        let filt = FilterModel::new(w_q(), 2.0 * PI * 0.2e9, ImpedanceTable::measured_point()).unwrap();
        let nu = 2.0 * PI * 0.3e9;
        assert_eq!(coupling_lambda(filt.cutoff * 1.01, &cp(), &filt).unwrap(), 0.0);
        let l = coupling_lambda(nu, &cp(), &filt).unwrap();
        assert_relative_eq!(coupling_lambda(4.0 * nu, &cp(), &filt).unwrap(), 2.0 * l, max_relative = 1e-14);
        let mut c2 = cp();
        c2.c_c *= 2.0;
        assert_relative_eq!(coupling_lambda(nu, &c2, &filt).unwrap(), 2.0 * l, max_relative = 1e-14);
        assert!(coupling_lambda(0.0, &cp(), &filt).is_err());
    }

    #[test]
    fn gamma3_laws() {
        let (g, a, w0, th) = (1e4, 1.3e9, 8.3e9, 6e8);
        let base = gamma3(g, a, w0, th).unwrap();
        assert_eq!(gamma3(g, a, w0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(gamma3(g, a, w0, 2.0 * th).unwrap(), 4.0 * base, max_relative = 1e-14);
        assert_relative_eq!(gamma3(2.0 * g, a, w0, th).unwrap(), 8.0 * base, max_relative = 1e-14);
        assert!(gamma3(g, a, 0.0, th).is_err());
    }

    #[test]
    fn open_circuit_does_not_decay() {
        assert_eq!(purcell_rate(1e-15, 90e-15, w_q(), Load::Open).unwrap(), 0.0);
    }

    #[test]
    fn calibration_hits_the_target() {
        let c_q = transmon_capacitance(2.0 * PI * 208e6).unwrap();
        let target = 2.0 * PI * 4.7e3;
        let c_c = calibrate_c_c(target, c_q, w_q(), Load::Impedance(C64::new(50.0, 0.0))).unwrap();
        assert_relative_eq!(purcell_rate(c_c, c_q, w_q(), Load::Impedance(C64::new(50.0, 0.0))).unwrap(), target, max_relative = 1e-9);
        assert!(c_c < 1e-15);
    }

    proptest! {
        #[test]
        fn gamma3_matches_closed_form(g in 1e-3f64..1e6, a in 1e6f64..1e10, w0 in 1e8f64..1e11, th in 0.0f64..1e10) {
            let want = 243.0 / (32.0 * PI * PI) * g.powi(3) * a * a * th * th / w0.powi(6);
            let got = gamma3(g, a, w0, th).unwrap();
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn weak_coupling_ratio_is_capacitance_independent(c_c in 1e-17f64..5e-16) {
            let c_q = 90e-15;
            let r = |c: f64| purcell_rate(c, c_q, w_q(), Load::Impedance(C64::new(50.0, 0.0))).unwrap()
                / purcell_rate(c, c_q, w_q(), Load::Impedance(C64::new(27.1, -253.7))).unwrap();
            prop_assert!((r(c_c) / r(c_c / 10.0) - 1.0).abs() < 0.01);
        }
    }
}
