//! Property checks across module boundaries.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use subharm::benchmarking::{check_recovery, clifford_group, fit_rb_curve, random_sequence, sequence_unitary, trace_overlap, DecompositionTable, Gate};
use subharm::budget::{power_for_rabi, DriveMethod, ImpedanceTable, ReferencePoint};
use subharm::engine::{propagate_lindblad, propagate_schrodinger, unitary_of, Static};
use subharm::experiments::{joint_fit_k, rabi_law, stark_law};
use subharm::operators::{evolve_constant, hermitian_eigen, unitarity_error, wrap_phase, Ket, Operator, C64};
use subharm::pulses::{Envelope, FlatTop, PhaseLedger};

fn hermitian(d: usize, re: &[f64], im: &[f64], scale: f64) -> Operator {
    let m = Operator::from_fn(d, d, |i, j| C64::new(re[i * d + j], im[i * d + j]));
    (&m + m.adjoint()) * C64::new(0.5 * scale, 0.0)
}

fn matrix_entries() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (2usize..=5).prop_flat_map(|d| (Just(d), prop::collection::vec(-1.0..1.0f64, d * d), prop::collection::vec(-1.0..1.0f64, d * d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn static_propagator_matches_exponential((d, re, im) in matrix_entries(), t in 1e-9..1e-7f64) {
        let h = hermitian(d, &re, &im, TAU * 30e6);
        let u = unitary_of(&Static(h.clone()), 0.0, t, 1e-11).unwrap();
        let exact = evolve_constant(&h, t);
        prop_assert!((&u - &exact).norm() < 1e-7);
        prop_assert!(unitarity_error(&u) < 1e-8);
    }

    #[test]
    fn schrodinger_keeps_norm((d, re, im) in matrix_entries(), t in 1e-9..1e-7f64) {
        let h = hermitian(d, &re, &im, TAU * 30e6);
        let psi = Ket::from_fn(d, |i, _| C64::new(re[i], im[i] + 0.1));
        let psi = &psi / C64::new(psi.norm(), 0.0);
        let out = propagate_schrodinger(&Static(h), &psi, 0.0, &[t / 2.0, t], 1e-11).unwrap();
        for s in &out.states {
            prop_assert!((s.norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lindblad_keeps_trace_and_positivity((d, re, im) in matrix_entries(), rate in 1e4..1e6f64) {
        let h = hermitian(d, &re, &im, TAU * 10e6);
        let l = Operator::from_fn(d, d, |i, j| C64::new(im[i * d + j], re[j * d + i])) * C64::new(rate.sqrt(), 0.0);
        let mut rho0 = Operator::zeros(d, d);
        rho0[(0, 0)] = C64::new(1.0, 0.0);
        let out = propagate_lindblad(&Static(h), &[l], &rho0, 0.0, &[1e-7, 1e-6], 1e-10).unwrap();
        for rho in &out.states {
            prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
            prop_assert!(hermitian_eigen(rho).0[0] > -1e-8);
        }
    }

    #[test]
    fn random_clifford_strings_invert(m in 1usize..64, seed in any::<u64>(), interleave in prop::option::of(0usize..24)) {
        let g = clifford_group(DecompositionTable::Standard);
        let seq = random_sequence(&g, m, interleave, seed);
        prop_assert!(check_recovery(&g, &seq).is_ok());
        let gates: Vec<Gate> = seq.iter().flat_map(|&c| g.elements[c].decomposition.clone()).collect();
        prop_assert!(trace_overlap(&sequence_unitary(&gates), &Operator::identity(2, 2)) > 1.0 - 1e-9);
    }

    #[test]
    fn rb_fit_recovers_clean_decays(p in 0.9..0.999f64, a in 0.3..0.6f64, b in 0.4..0.6f64) {
        let lengths: Vec<usize> = (0..10).map(|k| 1 << k).collect();
        let surv: Vec<f64> = lengths.iter().map(|&m| a * p.powi(m as i32) + b).collect();
        let f = fit_rb_curve(&lengths, &surv).unwrap();
        prop_assert!((f.p - p).abs() < 1e-6, "{} vs {}", f.p, p);
    }

    #[test]
    fn joint_fit_recovers_generating_scale(k in -3.0..-0.2f64, alpha_mhz in -400.0..-50.0f64) {
        let alpha = alpha_mhz * 1e6;
        let v: Vec<f64> = (1..=6).map(|i| 0.05 * i as f64 / k.abs()).collect();
        let o: Vec<f64> = v.iter().map(|&x| rabi_law(alpha, k, x)).collect();
        let s: Vec<f64> = v.iter().map(|&x| stark_law(alpha, k, x)).collect();
        let fit = joint_fit_k(&v, &o, &s, alpha, None).unwrap();
        prop_assert!((fit.value / k - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_laws(w in 1e6..1e9f64, x in 0.1..10.0f64) {
        let cal = ReferencePoint { omega_rabi: w, power: 1e-9 };
        let res = power_for_rabi(w * x, DriveMethod::Resonant, &cal).unwrap() / cal.power;
        let sub = power_for_rabi(w * x, DriveMethod::Subharmonic, &cal).unwrap() / cal.power;
        prop_assert!((res / (x * x) - 1.0).abs() < 1e-12);
        prop_assert!((sub / x.powf(2.0 / 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ledger_gate_phase_undoes_accumulated(phi in -PI..PI, dw in -1e8..1e8f64, gaps in prop::collection::vec(0.0..1e-7f64, 0..6)) {
        let mut l = PhaseLedger::new(phi, dw).unwrap();
        for &g in &gaps {
            l.advance_pulse(20e-9);
            l.advance(subharm::pulses::Segment::Gap { duration: g });
        }
        let want = gaps.len() as f64 * phi + dw * gaps.iter().sum::<f64>();
        prop_assert!((l.accumulated - want).abs() < 1e-9 * (1.0 + want.abs()));
        prop_assert!(wrap_phase(l.gate_phase(0.3) + l.accumulated - 0.3).abs() < 1e-9);
    }

    #[test]
    fn flat_top_is_bounded_and_reaches_peak(a0 in 0.05..1.0f64, dur in 20e-9..500e-9) {
        let env = FlatTop::with_defaults(a0, dur).unwrap();
        let n = 400;
        let mut peak = 0.0f64;
        for i in 0..=n {
            let v = env.value(env.duration() * i as f64 / n as f64);
            prop_assert!((0.0..=a0 * (1.0 + 1e-12)).contains(&v));
            peak = peak.max(v);
        }
        prop_assert!(peak > 0.5 * a0);
    }

    #[test]
    fn impedance_csv_round_trips(points in prop::collection::vec((1e9..1e10f64, -1e3..1e3f64, -1e3..1e3f64), 1..8)) {
        let mut pts: Vec<(f64, C64)> = points.iter().map(|&(f, r, i)| (f, C64::new(r, i))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let t = ImpedanceTable::new("t", pts).unwrap();
        let back = ImpedanceTable::from_csv("t", t.to_csv().unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back.points, t.points);
    }
}
