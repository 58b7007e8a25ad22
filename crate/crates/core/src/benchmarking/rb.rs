//! Sequence compilation with frame tracking, standard and interleaved
//! randomized benchmarking, and the decay fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clifford::{trace_overlap, CliffordElement, CliffordGroup};
use crate::error::{Error, Result};
use crate::experiments::{DeviceOp, SimDevice, TuneUp};
use crate::fit::{levenberg_marquardt, linear_fit};
use crate::operators::{projector, Operator};
use crate::pulses::{PhaseLedger, Segment};

/// Calibrated pulse lengths. Missing entries make compilation fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSet {
    pub pi_length: Option<f64>,
    pub pi2_length: Option<f64>,
    /// Idle time inserted after every pulse.
    pub gap: f64,
}

impl GateSet {
    pub fn new(pi_length: f64, pi2_length: f64) -> Self {
        GateSet { pi_length: Some(pi_length), pi2_length: Some(pi2_length), gap: 0.0 }
    }

    pub fn from_tuneup(t: &TuneUp) -> Self {
        Self::new(t.pi_length, t.pi2_length)
    }

    fn length(&self, angle: f64) -> Result<f64> {
        let (name, l) = if (angle - std::f64::consts::PI).abs() < 1e-12 { ("π", self.pi_length) } else { ("π/2", self.pi2_length) };
        l.ok_or_else(|| Error::Calibration(format!("missing calibration: {name} pulse length")))
    }
}

/// Turn Clifford elements into a pulse schedule. Each pulse is programmed
/// at its intended axis minus the phase the ledger has accumulated (edges,
/// gaps and virtual Z rotations); the ledger is advanced as the schedule grows.
pub fn compile_sequence<'a>(elements: impl IntoIterator<Item = &'a CliffordElement>, gates: &GateSet, ledger: &mut PhaseLedger) -> Result<Vec<DeviceOp>> {
    let mut ops = Vec::new();
    for el in elements {
        for g in &el.decomposition {
            match g.rotation() {
                None => {
                    if let super::Gate::VirtualZ(theta) = g {
                        ledger.advance(Segment::VirtualZ { angle: *theta });
                    }
                }
                Some((angle, axis)) => {
                    let duration = gates.length(angle)?;
                    ops.push(DeviceOp::Pulse { duration, gate_phase: ledger.gate_phase(axis) });
                    ledger.advance_pulse(duration);
                    if gates.gap > 0.0 {
                        ops.push(DeviceOp::Gap { duration: gates.gap });
                        ledger.advance(Segment::Gap { duration: gates.gap });
                    }
                }
            }
        }
    }
    Ok(ops)
}

/// Settings of one benchmarking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbConfig {
    pub lengths: Vec<usize>,
    pub n_seq: usize,
    pub seed: u64,
    /// Element interleaved after every random Clifford.
    pub interleaved: Option<usize>,
    /// Depolarizing probability applied after every Clifford (0 disables).
    pub depolarizing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RBResult {
    pub sequence_lengths: Vec<usize>,
    /// Mean ground-state survival per length.
    pub survival: Vec<f64>,
    pub std_error: Vec<f64>,
    /// `raw[i][s]`: survival of sequence `s` at length index `i`.
    pub raw: Vec<Vec<f64>>,
    pub n_sequences: usize,
    pub seed: u64,
    pub interleaved: Option<usize>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sequence `sequence` at length index `length_index`: SplitMix64
/// applied to the run seed, then folded with each index in turn. Sequences
/// are reproducible individually, whatever the worker count.
pub fn sequence_seed(seed: u64, length_index: usize, sequence: usize) -> u64 {
    let a = splitmix64(seed);
    let b = splitmix64(a ^ (length_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(b ^ (sequence as u64).wrapping_mul(0xABC9_8388_FB8F_AC03))
}

/// Random Clifford string of length `m` with its recovery element appended
/// (and the interleaved element after every random one).
pub fn random_sequence(group: &CliffordGroup, m: usize, interleaved: Option<usize>, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq = Vec::with_capacity(2 * m + 1);
    for _ in 0..m {
        seq.push(rng.gen_range(0..group.len()));
        if let Some(g) = interleaved {
            seq.push(g);
        }
    }
    seq.push(group.recovery(&seq));
    seq
}

/// Check on the 2×2 representatives that a full string multiplies to the identity.
pub fn check_recovery(group: &CliffordGroup, seq: &[usize]) -> Result<()> {
    let u = seq.iter().fold(Operator::identity(2, 2), |u, &c| &group.elements[c].unitary * u);
    if trace_overlap(&u, &Operator::identity(2, 2)) < 1.0 - 1e-9 {
        return Err(Error::InvalidParameter("recovery element does not invert the sequence".into()));
    }
    Ok(())
}

/// Depolarize the qubit block: `ρ_q → (1-λ)ρ_q + λ tr(ρ_q) I/2`; coherences
/// with leaked levels shrink by `1-λ`.
fn depolarize(rho: &mut Operator, lambda: f64) {
    let d = rho.nrows();
    let tr = rho[(0, 0)] + rho[(1, 1)];
    for j in 0..d {
        for i in 0..d {
            if i < 2 || j < 2 {
                rho[(i, j)] *= 1.0 - lambda;
            }
        }
    }
    rho[(0, 0)] += tr * (lambda / 2.0);
    rho[(1, 1)] += tr * (lambda / 2.0);
}

/// Survival of one Clifford string on the device.
pub fn sequence_survival(dev: &SimDevice, group: &CliffordGroup, gates: &GateSet, ledger0: &PhaseLedger, seq: &[usize], depolarizing: f64) -> Result<f64> {
    let mut ledger = PhaseLedger::new(ledger0.phi_ramp, ledger0.delta_omega)?;
    let mut rho = projector(dev.dim(), 0);
    for &c in seq {
        for op in compile_sequence([&group.elements[c]], gates, &mut ledger)? {
            dev.apply(&mut rho, op)?;
        }
        if depolarizing > 0.0 {
            depolarize(&mut rho, depolarizing);
        }
    }
    Ok(rho[(0, 0)].re.clamp(0.0, 1.0))
}

/// Run (interleaved) randomized benchmarking on the simulated device.
/// Sequences run in parallel and are aggregated in sequence order.
pub fn run_rb(dev: &SimDevice, group: &CliffordGroup, gates: &GateSet, ledger: &PhaseLedger, cfg: &RbConfig) -> Result<RBResult> {
    if cfg.n_seq == 0 {
        return Err(Error::InvalidParameter("n_seq must be at least 1".into()));
    }
    if cfg.lengths.is_empty() || cfg.lengths.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sequence lengths must be non-empty and sorted".into()));
    }
    if !(0.0..=1.0).contains(&cfg.depolarizing) {
        return Err(Error::InvalidParameter(format!("depolarizing probability {} outside [0, 1]", cfg.depolarizing)));
    }
    if let Some(g) = cfg.interleaved {
        if g >= group.len() {
            return Err(Error::InvalidParameter(format!("no Clifford element {g}")));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.lengths.len()).flat_map(|i| (0..cfg.n_seq).map(move |s| (i, s))).collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let seq = random_sequence(group, cfg.lengths[i], cfg.interleaved, sequence_seed(cfg.seed, i, s));
            check_recovery(group, &seq)?;
            sequence_survival(dev, group, gates, ledger, &seq, cfg.depolarizing)
        })
        .collect();
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| r.is_err()).map(|(k, _)| k).collect();
    if let Some(&k) = failed.first() {
        let msg = results[k].as_ref().err().map(|e| e.to_string()).unwrap_or_default();
        return Err(Error::Partial { message: format!("benchmarking sequence failed: {msg}"), failed });
    }
    let flat: Vec<f64> = results.into_iter().map(|r| r.expect("checked")).collect();
    let raw: Vec<Vec<f64>> = flat.chunks(cfg.n_seq).map(|c| c.to_vec()).collect();
    let n = cfg.n_seq as f64;
    let survival: Vec<f64> = raw.iter().map(|r| r.iter().sum::<f64>() / n).collect();
    let std_error = raw
        .iter()
        .zip(&survival)
        .map(|(r, m)| if r.len() > 1 { (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt() } else { 0.0 })
        .collect();
    Ok(RBResult { sequence_lengths: cfg.lengths.clone(), survival, std_error, raw, n_sequences: cfg.n_seq, seed: cfg.seed, interleaved: cfg.interleaved })
}

/// Fit of `A pᵐ + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbFit {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    /// Set when the data do not decay; `p` is then 1.
    pub degenerate: bool,
}

impl RbFit {
    /// Average gate fidelity per Clifford, `1 - (1-p)/2`.
    pub fn clifford_fidelity(&self) -> f64 {
        clifford_fidelity(self.p)
    }
}

pub fn clifford_fidelity(p: f64) -> f64 {
    1.0 - (1.0 - p) / 2.0
}

/// Depolarizing parameter belonging to an average fidelity.
pub fn p_from_fidelity(f: f64) -> f64 {
    1.0 - 2.0 * (1.0 - f)
}

/// Least-squares fit with `p ∈ (0, 1]` and `A, B ∈ [-1, 1]`.
pub fn fit_rb_curve(lengths: &[usize], survival: &[f64]) -> Result<RbFit> {
    let mut distinct: Vec<usize> = lengths.to_vec();
    distinct.dedup();
    if distinct.len() < 3 || lengths.len() != survival.len() {
        return Err(Error::Fit("RB fit needs at least three distinct lengths".into()));
    }
    let mean = survival.iter().sum::<f64>() / survival.len() as f64;
    let spread = survival.iter().fold(0.0f64, |m, s| m.max((s - mean).abs()));
    if spread < 1e-9 {
        return Ok(RbFit { p: 1.0, a: 0.0, b: mean, degenerate: true });
    }
    let m: Vec<f64> = lengths.iter().map(|&x| x as f64).collect();
    // A and B are linear for fixed p: profile p on a log grid of 1 - p to seed LM
    let linear = |p: f64| -> Option<(f64, f64, f64)> {
        let xs: Vec<f64> = m.iter().map(|x| p.powf(*x)).collect();
        let (b, a) = linear_fit(&xs, survival).ok()?;
        let cost = xs.iter().zip(survival).map(|(x, s)| (a * x + b - s).powi(2)).sum::<f64>();
        cost.is_finite().then_some((cost, a, b))
    };
    let mut seed = (f64::INFINITY, 0.99, survival[0] - 0.5, 0.5);
    for k in 0..=240 {
        let p = 1.0 - 10f64.powf(-6.0 + 6.0 * k as f64 / 240.0);
        if let Some((c, a, b)) = linear(p.max(1e-6)) {
            if c < seed.0 {
                seed = (c, p.max(1e-6), a, b);
            }
        }
    }
    let (_, p0, a0, b0) = seed;
    let (a0, b0) = (a0.clamp(-1.0, 1.0), b0.clamp(-1.0, 1.0));
    let res = |q: &[f64]| m.iter().zip(survival).map(|(x, s)| q[0] * q[1].powf(*x) + q[2] - s).collect::<Vec<_>>();
    let (q, _) = levenberg_marquardt(&res, &[a0, p0, b0], &[(-1.0, 1.0), (1e-9, 1.0), (-1.0, 1.0)])?;
    Ok(RbFit { p: q[1], a: q[0], b: q[2], degenerate: false })
}

pub fn fit_rb(result: &RBResult) -> Result<RbFit> {
    fit_rb_curve(&result.sequence_lengths, &result.survival)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterleavedFidelity {
    pub fidelity: f64,
    /// Set when the inputs violate `0 < p_gate ≤ p_ref ≤ 1`.
    pub flagged: bool,
}

/// Fidelity of the interleaved gate, `1 - (1 - p_gate/p_ref)/2`.
pub fn interleaved_fidelity(p_gate: f64, p_ref: f64) -> Result<InterleavedFidelity> {
    if p_ref == 0.0 || !p_ref.is_finite() || !p_gate.is_finite() {
        return Err(Error::InvalidParameter(format!("cannot divide by p_ref = {p_ref}")));
    }
    let flagged = !(0.0 < p_gate && p_gate <= p_ref && p_ref <= 1.0);
    Ok(InterleavedFidelity { fidelity: 1.0 - (1.0 - p_gate / p_ref) / 2.0, flagged })
}

/// Upper-left 2×2 block of a propagator.
pub fn qubit_block(u: &Operator) -> Operator {
    Operator::from_fn(2, 2, |i, j| u[(i, j)])
}

#[cfg(test)]
mod tests {
    use super::super::clifford::{clifford_group, sequence_unitary, DecompositionTable, Gate};
    use super::*;
    use crate::experiments::{area_theorem_length, calibrate_pi2_length, DeviceConfig};
    use crate::model::TransmonParams;
    use crate::operators::number_phase;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn two_level(inject: f64, gap_detuning: f64) -> (SimDevice, GateSet) {
        let mut cfg = DeviceConfig::stark_free(TransmonParams::reference_device().with_dim(2), 0.4549);
        cfg.injected_ramp_phase = inject;
        cfg.injected_gap_detuning = gap_detuning;
        let dev = SimDevice::new(cfg).unwrap();
        let pi = area_theorem_length(cfg.params.alpha, cfg.eta, cfg.ramp_rate, cfg.ramp_offset, PI).unwrap();
        let pi2 = calibrate_pi2_length(&dev, 8, pi, inject).unwrap().length;
        (dev, GateSet::new(pi, pi2))
    }

    #[test]
    fn identity_compiles_to_nothing() {
        let g = clifford_group(DecompositionTable::Standard);
        let mut l = PhaseLedger::new(0.3, 0.0).unwrap();
        assert!(compile_sequence([&g.elements[0]], &GateSet::new(50e-9, 30e-9), &mut l).unwrap().is_empty());
        let missing = GateSet { pi_length: None, pi2_length: Some(30e-9), gap: 0.0 };
        let x = g.find(&Gate::X180.unitary()).unwrap();
        assert!(matches!(compile_sequence([&g.elements[x]], &missing, &mut l), Err(Error::Calibration(_))));
    }

    #[test]
    fn two_half_pulses_make_a_pi_pulse() {
        let (dev, gates) = two_level(0.3, 0.0);
        let g = clifford_group(DecompositionTable::Standard);
        let x90 = g.find(&Gate::X90.unitary()).unwrap();
        let mut l = PhaseLedger::new(0.3, 0.0).unwrap();
        let ops = compile_sequence([&g.elements[x90], &g.elements[x90]], &gates, &mut l).unwrap();
        let u = dev.schedule_unitary(&ops).unwrap();
        // the final frame is left as a known Z rotation
        let u = number_phase(2, -l.accumulated) * u;
        assert!(1.0 - trace_overlap(&u, &Gate::X180.unitary()) < 1e-6);
    }

    #[test]
    fn uncompensated_gap_shows_as_z_rotation() {
        let dw = 2.0 * PI * 3e6;
        let (dev, mut gates) = two_level(0.0, dw);
        gates.gap = 20e-9;
        let g = clifford_group(DecompositionTable::Standard);
        let x90 = g.find(&Gate::X90.unitary()).unwrap();
        let mut l = PhaseLedger::new(0.0, 0.0).unwrap();
        let ops = compile_sequence([&g.elements[x90], &g.elements[x90]], &gates, &mut l).unwrap();
        let u = dev.schedule_unitary(&ops).unwrap();
        let p = dev.pulse_unitary(gates.pi2_length.unwrap(), 0.0).unwrap();
        let z = number_phase(2, dw * gates.gap);
        let want = &z * &p * &z * &p;
        assert!(1.0 - trace_overlap(&u, &want) < 1e-9);
        assert!(1.0 - trace_overlap(&u, &Gate::X180.unitary()) > 1e-3);
    }

    #[test]
    fn noiseless_rb_survives_and_is_deterministic() {
        let (dev, gates) = two_level(0.2, 0.0);
        let g = clifford_group(DecompositionTable::Standard);
        let ledger = PhaseLedger::new(0.2, 0.0).unwrap();
        let cfg = RbConfig { lengths: vec![1, 4, 16], n_seq: 3, seed: 11, interleaved: None, depolarizing: 0.0 };
        let r = run_rb(&dev, &g, &gates, &ledger, &cfg).unwrap();
        assert!(r.survival.iter().all(|s| (s - 1.0).abs() < 1e-5), "{:?}", r.survival);
        assert_eq!(r, run_rb(&dev, &g, &gates, &ledger, &cfg).unwrap());
        let f = fit_rb(&r).unwrap();
        assert!(f.degenerate || f.p > 1.0 - 1e-6);
    }

    #[test]
    fn virtual_z_table_gives_same_survival() {
        let (dev, gates) = two_level(0.0, 0.0);
        let ledger = PhaseLedger::new(0.0, 0.0).unwrap();
        let std = clifford_group(DecompositionTable::Standard);
        let vz = clifford_group(DecompositionTable::VirtualZ);
        for c in 0..24 {
            let s = sequence_survival(&dev, &std, &gates, &ledger, &[c], 0.0).unwrap();
            let v = sequence_survival(&dev, &vz, &gates, &ledger, &[c], 0.0).unwrap();
            assert!((s - v).abs() < 1e-6);
            let want = (sequence_unitary(&std.elements[c].decomposition)[(0, 0)]).norm_sqr();
            assert!((s - want).abs() < 1e-6);
        }
    }

    #[test]
    fn depolarizing_noise_sets_the_decay() {
        let (dev, gates) = two_level(0.0, 0.0);
        let g = clifford_group(DecompositionTable::Standard);
        let ledger = PhaseLedger::new(0.0, 0.0).unwrap();
        let lambda = 0.01;
        let cfg = RbConfig { lengths: vec![1, 2, 4, 8, 16, 32, 64, 128], n_seq: 4, seed: 3, interleaved: None, depolarizing: lambda };
        let r = run_rb(&dev, &g, &gates, &ledger, &cfg).unwrap();
        let f = fit_rb(&r).unwrap();
        assert_relative_eq!((1.0 - f.p) / 2.0, lambda / 2.0, max_relative = 0.05);
    }

    #[test]
    fn fit_recovers_synthetic_decays() {
        let m: Vec<usize> = (0..10).map(|k| 1 << k).collect();
        let s: Vec<f64> = m.iter().map(|&x| 0.5 * 0.99f64.powi(x as i32) + 0.5).collect();
        let f = fit_rb_curve(&m, &s).unwrap();
        assert_relative_eq!(f.p, 0.99, max_relative = 1e-6);
        assert_relative_eq!(f.a, 0.5, max_relative = 1e-6);
        assert!(fit_rb_curve(&m, &[1.0; 10]).unwrap().degenerate);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let noisy: Vec<f64> = s.iter().map(|v| v + noise.sample(&mut rng)).collect();
        assert_relative_eq!(fit_rb_curve(&m, &noisy).unwrap().p, 0.99, max_relative = 0.01);
    }

    #[test]
    fn interleaved_formula() {
        assert_eq!(interleaved_fidelity(0.97, 0.97).unwrap().fidelity, 1.0);
        assert_relative_eq!(interleaved_fidelity(0.994, 1.0).unwrap().fidelity, 0.997, epsilon = 1e-12);
        assert!(interleaved_fidelity(0.99, 0.98).unwrap().flagged);
        assert!(interleaved_fidelity(0.9, 0.0).is_err());
        assert_relative_eq!(p_from_fidelity(0.986), 0.972, epsilon = 1e-12);
    }

    #[test]
    fn seeds_differ_per_sequence() {
        assert_ne!(sequence_seed(1, 0, 0), sequence_seed(1, 0, 1));
        assert_ne!(sequence_seed(1, 0, 1), sequence_seed(1, 1, 0));
        let g = clifford_group(DecompositionTable::Standard);
        let s = random_sequence(&g, 50, Some(3), 9);
        assert_eq!(g.compose(&s), g.identity());
        check_recovery(&g, &s).unwrap();
    }
}
