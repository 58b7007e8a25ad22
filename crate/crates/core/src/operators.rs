//! Truncated-oscillator operators and small dense linear-algebra helpers.
//!
//! Operators are plain `nalgebra` complex matrices. Everything here is
//! dimension-generic; the physical models decide the truncation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Operator = DMatrix<C64>;
pub type Ket = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Annihilation, creation and number operators of a truncated oscillator.
#[derive(Debug, Clone)]
pub struct LadderSet {
    pub dim: usize,
    pub a: Operator,
    pub adag: Operator,
    pub n: Operator,
}

pub fn ladder_set(dim: usize) -> Result<LadderSet> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("ladder operators need dim >= 2, got {dim}")));
    }
    let a = annihilation(dim);
    let adag = a.adjoint();
    let n = Operator::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
    Ok(LadderSet { dim, a, adag, n })
}

fn annihilation(dim: usize) -> Operator {
    Operator::from_fn(dim, dim, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

/// `(a + a†)^p` with exact matrix elements, restricted to the lowest `dim` levels.
///
/// Raising the truncated position operator to a power loses the
/// contributions that pass through levels above the cutoff; building the
/// power in an enlarged space and then truncating keeps every element exact.
pub fn position_power(dim: usize, p: usize) -> Operator {
    let big = dim + p;
    let a = annihilation(big);
    let x = &a + a.adjoint();
    let mut acc = Operator::identity(big, big);
    for _ in 0..p {
        acc = &acc * &x;
    }
    acc.view((0, 0), (dim, dim)).into_owned()
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn basis(dim: usize, k: usize) -> Ket {
    let mut v = Ket::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

pub fn projector(dim: usize, k: usize) -> Operator {
    let mut p = Operator::zeros(dim, dim);
    p[(k, k)] = C64::new(1.0, 0.0);
    p
}

/// Diagonal operator `exp(-i θ n)` for the number operator of dimension `dim`.
pub fn number_phase(dim: usize, theta: f64) -> Operator {
    Operator::from_diagonal(&Ket::from_fn(dim, |k, _| C64::from_polar(1.0, -theta * k as f64)))
}

pub fn matrix_exponential(m: &Operator) -> Operator {
    m.clone().exp()
}

/// `exp(-i H t)` for a time-independent Hamiltonian.
pub fn evolve_constant(h: &Operator, t: f64) -> Operator {
    matrix_exponential(&(h * C64::new(0.0, -t)))
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn hermiticity_error(h: &Operator) -> f64 {
    (h - h.adjoint()).norm()
}

pub fn unitarity_error(u: &Operator) -> f64 {
    (u.adjoint() * u - Operator::identity(u.nrows(), u.ncols())).norm()
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian operator.
pub fn hermitian_eigen(h: &Operator) -> (Vec<f64>, Operator) {
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Operator::from_fn(h.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Eigen-decomposition of a unitary via its complex Schur form.
///
/// Returns the eigenphases `θ_k` (with `U v_k = e^{iθ_k} v_k`, in `(-π, π]`)
/// and the eigenvectors as columns.
pub fn unitary_eigen(u: &Operator) -> (Vec<f64>, Operator) {
    let (q, t) = nalgebra::Schur::new(u.clone()).unpack();
    let phases = (0..t.nrows()).map(|k| t[(k, k)].arg()).collect();
    (phases, q)
}

/// Trace distance-like measure insensitive to a global phase: `1 - |tr(U†V)|/d`.
pub fn phase_insensitive_infidelity(u: &Operator, v: &Operator) -> f64 {
    let d = u.nrows() as f64;
    1.0 - (u.adjoint() * v).trace().norm() / d
}

/// Average gate fidelity between a unitary `u` (possibly leaky, restricted to
/// a subspace) and an ideal unitary `v` of the same dimension.
pub fn average_gate_fidelity(u: &Operator, v: &Operator) -> f64 {
    let d = v.nrows() as f64;
    let m = v.adjoint() * u;
    let tr = m.trace().norm_sqr();
    let norm = (m.adjoint() * &m).trace().re;
    (norm + tr) / (d * (d + 1.0))
}

/// Expectation value `<ψ|A|ψ>`.
pub fn expectation(a: &Operator, psi: &Ket) -> C64 {
    (psi.adjoint() * a * psi)[(0, 0)]
}

pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}
