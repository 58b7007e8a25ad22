//! Time propagation of closed (Schrödinger) and open (Lindblad) systems.
//!
//! All propagation goes through the adaptive integrator in [`rk`]. Times are
//! in seconds and Hamiltonians in rad/s.

pub mod hamiltonian;
pub mod rk;
mod trajectory;

use nalgebra::{DMatrixView, DMatrixViewMut};

pub use hamiltonian::{Driven, FromFn, Hamiltonian, Static};
pub use trajectory::{read_trajectory_csv, write_trajectory, Trajectory};

use crate::error::{Error, Result};
use crate::operators::{hermitian_eigen, Ket, Operator, C64};
use rk::StepControl;

/// Local error tolerance used when callers have no specific requirement.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerated negative eigenvalue of a propagated density matrix.
pub const POSITIVITY_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_times(times: &[f64], t0: f64) -> Result<()> {
    for &t in times {
        crate::error::ensure_finite("time", t)?;
    }
    if times.is_empty() {
        return Err(Error::InvalidParameter("no output times requested".into()));
    }
    if times[0] < t0 {
        return Err(Error::InvalidParameter("output time precedes the initial time".into()));
    }
    Ok(())
}

/// Solve `i dψ/dt = H(t) ψ` starting at `t0`, sampling at `times`.
pub fn propagate_schrodinger(h: &dyn Hamiltonian, psi0: &Ket, t0: f64, times: &[f64], tol: f64) -> Result<Trajectory<Ket>> {
    let d = h.dim();
    if psi0.len() != d {
        return Err(Error::InvalidDimension(format!("state has length {} but Hamiltonian is {d}x{d}", psi0.len())));
    }
    check_tol(tol)?;
    check_times(times, t0)?;
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("initial state norm is {norm}, expected 1")));
    }
    let mut y: Vec<C64> = psi0.iter().copied().collect();
    let mut states = Vec::with_capacity(times.len());
    rk::integrate(
        |t, x, dx| h.apply(t, x, 1, dx),
        t0,
        &mut y,
        times,
        StepControl::with_tol(tol),
        |_, _, x| states.push(Ket::from_column_slice(x)),
    )?;
    Ok(Trajectory { times: times.to_vec(), states })
}

/// Propagator `U(t1, t0)` of a closed system.
pub fn unitary_of(h: &dyn Hamiltonian, t0: f64, t1: f64, tol: f64) -> Result<Operator> {
    let d = h.dim();
    check_tol(tol)?;
    if t1 < t0 {
        return Err(Error::InvalidParameter(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    let mut y: Vec<C64> = Operator::identity(d, d).as_slice().to_vec();
    rk::integrate(|t, x, dx| h.apply(t, x, d, dx), t0, &mut y, &[t1], StepControl::with_tol(tol), |_, _, _| {})?;
    Ok(Operator::from_column_slice(d, d, &y))
}

/// Collapse operators of a Lindblad master equation, with `Σ L†L` cached.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub ops: Vec<Operator>,
    ops_dag: Vec<Operator>,
    half_k: Operator,
}

impl Dissipator {
    pub fn new(dim: usize, ops: Vec<Operator>) -> Result<Self> {
        if let Some(bad) = ops.iter().find(|l| l.nrows() != dim || l.ncols() != dim) {
            return Err(Error::InvalidDimension(format!("collapse operator is {}x{}, expected {dim}x{dim}", bad.nrows(), bad.ncols())));
        }
        let mut k = Operator::zeros(dim, dim);
        for l in &ops {
            k += l.adjoint() * l;
        }
        let ops_dag = ops.iter().map(|l| l.adjoint()).collect();
        Ok(Dissipator { ops, ops_dag, half_k: k * C64::new(0.5, 0.0) })
    }

    /// `out = L(ρ)` for `m` density matrices stacked side by side in `x`.
    fn rhs(&self, h: &dyn Hamiltonian, t: f64, x: &[C64], m: usize, out: &mut [C64], scratch: &mut [C64]) {
        let d = h.dim();
        h.apply(t, x, d * m, out);
        let ht = h.at(t);
        let i = C64::new(0.0, 1.0);
        for b in 0..m {
            let rho = DMatrixView::from_slice(&x[b * d * d..(b + 1) * d * d], d, d);
            let mut o = DMatrixViewMut::from_slice(&mut out[b * d * d..(b + 1) * d * d], d, d);
            o.gemm(i, &rho, &ht, ONE);
            o.gemm(-ONE, &self.half_k, &rho, ONE);
            o.gemm(-ONE, &rho, &self.half_k, ONE);
            for (l, ld) in self.ops.iter().zip(&self.ops_dag) {
                let mut s = DMatrixViewMut::from_slice(&mut scratch[..d * d], d, d);
                s.gemm(ONE, l, &rho, ZERO);
                o.gemm(ONE, &s, ld, ONE);
            }
        }
    }
}

fn check_density(rho: &Operator, t: f64) -> Result<()> {
    let (vals, _) = hermitian_eigen(rho);
    if vals[0] < -POSITIVITY_TOL {
        return Err(Error::Integrator(format!("density matrix lost positivity at t = {t:e} (eigenvalue {:e})", vals[0])));
    }
    Ok(())
}

/// Solve the Lindblad master equation, sampling the density matrix at `times`.
///
/// Fails if a sampled state has an eigenvalue below `-POSITIVITY_TOL`.
pub fn propagate_lindblad(
    h: &dyn Hamiltonian,
    collapse: &[Operator],
    rho0: &Operator,
    t0: f64,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory<Operator>> {
    let d = h.dim();
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::InvalidDimension(format!("density matrix is {}x{}, expected {d}x{d}", rho0.nrows(), rho0.ncols())));
    }
    check_tol(tol)?;
    check_times(times, t0)?;
    let diss = Dissipator::new(d, collapse.to_vec())?;
    let mut y: Vec<C64> = rho0.as_slice().to_vec();
    let mut scratch = vec![ZERO; d * d];
    let mut states = Vec::with_capacity(times.len());
    rk::integrate(
        |t, x, dx| diss.rhs(h, t, x, 1, dx, &mut scratch),
        t0,
        &mut y,
        times,
        StepControl::with_tol(tol),
        |_, _, x| states.push(Operator::from_column_slice(d, d, x)),
    )?;
    for (rho, &t) in states.iter().zip(times) {
        check_density(rho, t)?;
    }
    Ok(Trajectory { times: times.to_vec(), states })
}

/// Superoperator of the Lindblad evolution from `t0` to `t1`, acting on
/// column-major vectorised density matrices.
pub fn channel_of(h: &dyn Hamiltonian, collapse: &[Operator], t0: f64, t1: f64, tol: f64) -> Result<Operator> {
    let d = h.dim();
    check_tol(tol)?;
    if t1 < t0 {
        return Err(Error::InvalidParameter(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    let diss = Dissipator::new(d, collapse.to_vec())?;
    let dd = d * d;
    // column k of the identity superoperator is vec(E_k)
    let mut y: Vec<C64> = Operator::identity(dd, dd).as_slice().to_vec();
    let mut scratch = vec![ZERO; dd];
    rk::integrate(
        |t, x, dx| diss.rhs(h, t, x, dd, dx, &mut scratch),
        t0,
        &mut y,
        &[t1],
        StepControl::with_tol(tol),
        |_, _, _| {},
    )?;
    Ok(Operator::from_column_slice(dd, dd, &y))
}

/// Superoperator of the unitary map `ρ -> U ρ U†`.
pub fn unitary_channel(u: &Operator) -> Operator {
    u.conjugate().kronecker(u)
}

/// Apply a superoperator to a density matrix.
pub fn apply_channel(s: &Operator, rho: &Operator) -> Operator {
    let d = rho.nrows();
    let v = s * nalgebra::DVector::from_column_slice(rho.as_slice());
    Operator::from_column_slice(d, d, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{basis, evolve_constant, ladder_set, projector, unitarity_error};
    use approx::assert_relative_eq;

    #[test]
    fn static_evolution_matches_exponential() {
        let l = ladder_set(4).unwrap();
        let h = &l.n * C64::new(2.0, 0.0) + (&l.a + &l.adag) * C64::new(0.7, 0.0);
        let u = unitary_of(&Static(h.clone()), 0.0, 3.0, 1e-11).unwrap();
        assert!((&u - evolve_constant(&h, 3.0)).norm() < 1e-8);
        assert!(unitarity_error(&u) < 1e-9);
    }

    #[test]
    fn rabi_flop_population() {
        // H = (w/2) σx gives P1 = sin^2(w t / 2)
        let l = ladder_set(2).unwrap();
        let w = 1.3;
        let h = Static((&l.a + &l.adag) * C64::new(w / 2.0, 0.0));
        let times: Vec<f64> = (0..30).map(|k| 0.2 * k as f64).collect();
        let tr = propagate_schrodinger(&h, &basis(2, 0), 0.0, &times, 1e-11).unwrap();
        for (t, p) in tr.times.iter().zip(tr.populations()) {
            assert_relative_eq!(p[1], (w * t / 2.0).sin().powi(2), epsilon = 1e-8);
        }
    }

    #[test]
    fn time_dependent_driven_term_matches_closure_form() {
        let l = ladder_set(3).unwrap();
        let x = &l.a + &l.adag;
        let h1 = Driven::new(l.n.clone()).term(x.clone(), |t| C64::new(0.3 * t.cos(), 0.0));
        let (n, xx) = (l.n.clone(), x.clone());
        let h2 = FromFn::new(3, move |t| &n + &xx * C64::new(0.3 * t.cos(), 0.0));
        let u1 = unitary_of(&h1, 0.0, 4.0, 1e-11).unwrap();
        let u2 = unitary_of(&h2, 0.0, 4.0, 1e-11).unwrap();
        assert!((u1 - u2).norm() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let h = Static(Operator::identity(3, 3));
        assert!(matches!(propagate_schrodinger(&h, &basis(2, 0), 0.0, &[1.0], 1e-8), Err(Error::InvalidDimension(_))));
        let rho = projector(2, 0);
        assert!(matches!(propagate_lindblad(&h, &[], &rho, 0.0, &[1.0], 1e-8), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn amplitude_damping_decays_exponentially() {
        let l = ladder_set(2).unwrap();
        let gamma: f64 = 0.25;
        let h = Static(&l.n * C64::new(1.0, 0.0));
        let c = vec![&l.a * C64::new(gamma.sqrt(), 0.0)];
        let times: Vec<f64> = (1..10).map(|k| k as f64).collect();
        let tr = propagate_lindblad(&h, &c, &projector(2, 1), 0.0, &times, 1e-10).unwrap();
        for (t, rho) in tr.times.iter().zip(&tr.states) {
            assert_relative_eq!(rho[(1, 1)].re, (-gamma * t).exp(), epsilon = 1e-8);
            assert_relative_eq!(rho.trace().re, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn pure_dephasing_decays_coherence() {
        let l = ladder_set(2).unwrap();
        let gphi: f64 = 0.1;
        let h = Static(Operator::zeros(2, 2));
        let c = vec![&l.n * C64::new((2.0 * gphi).sqrt(), 0.0)];
        let plus = Operator::from_element(2, 2, C64::new(0.5, 0.0));
        let tr = propagate_lindblad(&h, &c, &plus, 0.0, &[5.0], 1e-10).unwrap();
        assert_relative_eq!(tr.states[0][(0, 1)].re, 0.5 * (-gphi * 5.0).exp(), epsilon = 1e-9);
    }

    #[test]
    fn channel_agrees_with_direct_propagation() {
        let l = ladder_set(3).unwrap();
        let h = Driven::new(&l.n * C64::new(0.4, 0.0)).term(&l.a + &l.adag, |t| C64::new((2.0 * t).sin() * 0.2, 0.0));
        let c = vec![&l.a * C64::new(0.1, 0.0), &l.n * C64::new(0.05, 0.0)];
        let mut rho0 = Operator::from_element(3, 3, C64::new(0.2, 0.05));
        rho0.fill_diagonal(C64::new(1.0 / 3.0, 0.0));
        let rho0 = (&rho0 + rho0.adjoint()) * C64::new(0.5, 0.0);
        let s = channel_of(&h, &c, 0.0, 2.5, 1e-11).unwrap();
        let direct = propagate_lindblad(&h, &c, &rho0, 0.0, &[2.5], 1e-11).unwrap();
        assert!((apply_channel(&s, &rho0) - &direct.states[0]).norm() < 1e-8);
    }

    #[test]
    fn unitary_channel_matches_conjugation() {
        let l = ladder_set(3).unwrap();
        let u = evolve_constant(&(&l.a + &l.adag), 0.8);
        let rho = projector(3, 1);
        assert!((apply_channel(&unitary_channel(&u), &rho) - &u * &rho * u.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn non_normalized_state_rejected() {
        let h = Static(Operator::identity(2, 2));
        let psi = basis(2, 0) * C64::new(2.0, 0.0);
        assert!(propagate_schrodinger(&h, &psi, 0.0, &[1.0], 1e-8).is_err());
    }
}
