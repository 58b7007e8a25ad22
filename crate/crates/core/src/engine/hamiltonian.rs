use nalgebra::{DMatrixView, DMatrixViewMut};

use crate::operators::{Operator, C64};

/// A (possibly time-dependent) Hamiltonian in angular-frequency units.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    fn at(&self, t: f64) -> Operator;

    /// `out = -i H(t) x`, where `x` is a column-major `dim x cols` block.
    fn apply(&self, t: f64, x: &[C64], cols: usize, out: &mut [C64]) {
        let d = self.dim();
        let h = self.at(t);
        let xv = DMatrixView::from_slice(x, d, cols);
        let mut ov = DMatrixViewMut::from_slice(out, d, cols);
        ov.gemm(C64::new(0.0, -1.0), &h, &xv, C64::new(0.0, 0.0));
    }
}

/// Time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct Static(pub Operator);

impl Hamiltonian for Static {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn at(&self, _t: f64) -> Operator {
        self.0.clone()
    }

    fn apply(&self, _t: f64, x: &[C64], cols: usize, out: &mut [C64]) {
        let d = self.dim();
        let xv = DMatrixView::from_slice(x, d, cols);
        let mut ov = DMatrixViewMut::from_slice(out, d, cols);
        ov.gemm(C64::new(0.0, -1.0), &self.0, &xv, C64::new(0.0, 0.0));
    }
}

type Coefficient = Box<dyn Fn(f64) -> C64 + Send + Sync>;

/// `H(t) = H0 + Σ_k f_k(t) A_k`.
pub struct Driven {
    pub h0: Operator,
    terms: Vec<(Operator, Coefficient)>,
}

impl Driven {
    pub fn new(h0: Operator) -> Self {
        Driven { h0, terms: Vec::new() }
    }

    pub fn term(mut self, op: Operator, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        assert_eq!(op.nrows(), self.h0.nrows(), "term dimension mismatch");
        self.terms.push((op, Box::new(f)));
        self
    }
}

impl Hamiltonian for Driven {
    fn dim(&self) -> usize {
        self.h0.nrows()
    }

    fn at(&self, t: f64) -> Operator {
        let mut h = self.h0.clone();
        for (op, f) in &self.terms {
            h += op * f(t);
        }
        h
    }

    fn apply(&self, t: f64, x: &[C64], cols: usize, out: &mut [C64]) {
        let d = self.dim();
        let xv = DMatrixView::from_slice(x, d, cols);
        let mut ov = DMatrixViewMut::from_slice(out, d, cols);
        let mi = C64::new(0.0, -1.0);
        ov.gemm(mi, &self.h0, &xv, C64::new(0.0, 0.0));
        for (op, f) in &self.terms {
            let c = f(t);
            if c != C64::new(0.0, 0.0) {
                ov.gemm(mi * c, op, &xv, C64::new(1.0, 0.0));
            }
        }
    }
}

/// Adapter for an arbitrary closure `t -> H(t)`.
pub struct FromFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> Operator + Sync> FromFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FromFn { dim, f }
    }
}

impl<F: Fn(f64) -> Operator + Sync> Hamiltonian for FromFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> Operator {
        (self.f)(t)
    }
}
