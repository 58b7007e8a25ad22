//! Simulated experiments: Rabi scans, lab-frame resonance search, the
//! single-parameter drive-scale fit, tune-up calibrations and leakage.

pub mod device;
pub mod floquet;
pub mod leakage;
pub mod rabi;
pub mod tuneup;

pub use device::{carrier_reference, DeviceConfig, DeviceOp, SimDevice};
pub use floquet::{lab_resonance, lab_scaling_sweep, rwa_resonance, FloquetResonance, FLOQUET_TOL};
pub use rabi::{fit_rabi_trace, joint_fit_k, rabi_law, rabi_scan, simulate_pulse, stark_law, FitResult, Frame, RabiFit, RabiScanResult, ScanOptions};
pub use tuneup::{
    area_theorem_length, calibrate_delta_omega, calibrate_pi2_length, calibrate_pi_length, calibrate_ramp_phase, tune_up, DeltaOmegaCalibration, Pi2Calibration,
    PiLengthCalibration, RampPhaseCalibration, TuneUp, TuneUpPlan,
};
pub use leakage::{drag_leakage, LeakageReport};
