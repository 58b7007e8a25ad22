//! Quadrature correction that suppresses leakage to the second excited state
//! for sub-harmonic pulses.
//!
//! With `η ∝ ε_x + iε_y`, the condition `Im η³ = -(1/α) d/dt Re η³` becomes
//! `c ε̇_x(ε_x² - ε_y²) - 6 ε_x ε_y ε̇_y + α(3ε_x² ε_y - ε_y³) = 0` with `c = 3`.
//! The equation is singular where `ε_y → 0`; its bounded solution follows a
//! slow manifold `ε_y ≈ -c ε̇_x/(3α)`. That manifold attracts forward in time
//! while `|ε_x|` grows and backward in time while it shrinks, so the solver
//! integrates from both pulse ends toward the peak, and falls back to the
//! asymptotic expansion where the equation becomes too stiff to integrate.

use crate::engine::rk::{integrate, StepControl};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::operators::C64;
use crate::pulses::envelope::{sample_times, Envelope};
use crate::pulses::waveform::IQWaveform;

#[derive(Debug, Clone, Copy)]
pub struct DragOptions {
    /// Coefficient `c` of the `ε̇_x(ε_x² - ε_y²)` term; 3 is the value implied by
    /// the zero-leakage condition.
    pub first_term_coefficient: f64,
    /// Internal grid points per output sample.
    pub oversample: usize,
    pub tol: f64,
    /// Stiffness (in units of `|α|`) above which the asymptotic branch is used.
    pub stiffness_limit: f64,
}

impl Default for DragOptions {
    fn default() -> Self {
        DragOptions { first_term_coefficient: 3.0, oversample: 1000, tol: 1e-12, stiffness_limit: 1e4 }
    }
}

/// Relative threshold on `|ε_x|` below which the asymptotic branch is used.
pub const SMALL_ENVELOPE: f64 = 1e-6;

/// Fine-grid points next to each pulse edge left out of the residual: the
/// solution grows like `√t` from an edge and finite differences are not
/// consistent there.
pub const EDGE_POINTS: usize = 10;

/// DRAG solution on a fine grid whose every `oversample`-th point is an AWG sample.
#[derive(Debug, Clone)]
pub struct DragSolution {
    pub times: Vec<f64>,
    pub eps_x: Vec<f64>,
    pub eps_y: Vec<f64>,
    pub alpha: f64,
    pub coefficient: f64,
    pub sample_rate: f64,
    pub oversample: usize,
    /// Number of fine-grid points taken from the asymptotic branch.
    pub asymptotic_points: usize,
}

struct Problem<'a> {
    env: &'a dyn Envelope,
    alpha: f64,
    c: f64,
}

impl Problem<'_> {
    /// Right-hand side for `u = ε_y²` on a branch with `sign(ε_y) = s`.
    ///
    /// Writing the equation for `u` removes the `1/ε_y` singularity, so a run
    /// can start exactly from `ε_y = 0`.
    fn rhs_u(&self, t: f64, u: f64, s: f64) -> f64 {
        let (e, de) = (self.env.value(t), self.env.derivative(t));
        let w = s * u.max(0.0).sqrt();
        (self.c * de * (e * e - u) + self.alpha * w * (3.0 * e * e - u)) / (3.0 * e)
    }

    /// Branch sign of the bounded solution at `t`.
    fn branch(&self, t: f64) -> f64 {
        let v = -self.c * self.env.derivative(t) / self.alpha;
        if v < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Slow-manifold value with one correction step.
    fn asymptotic(&self, t: f64) -> f64 {
        let (e, de, dde) = (self.env.value(t), self.env.derivative(t), self.env.second_derivative(t));
        if e == 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let w0 = -self.c * de / (3.0 * a);
        let dw0 = -self.c * dde / (3.0 * a);
        (-self.c * de * (e * e - w0 * w0) + 6.0 * e * w0 * dw0) / (a * (3.0 * e * e - w0 * w0))
    }

    fn small(&self, t: f64, a0: f64) -> bool {
        self.env.value(t).abs() < SMALL_ENVELOPE * a0.abs()
    }

    fn stiff(&self, t: f64, limit: f64) -> bool {
        let (e, de) = (self.env.value(t), self.env.derivative(t));
        if de == 0.0 {
            return true;
        }
        let lambda = 3.0 * self.alpha * self.alpha * e.abs() / (2.0 * self.c * de.abs());
        lambda > limit * self.alpha.abs()
    }
}

/// Solve for the DRAG quadrature of `env` and sample both quadratures at `sample_rate`.
pub fn drag_correct(env: &dyn Envelope, alpha: f64, sample_rate: f64) -> Result<DragSolution> {
    drag_correct_with(env, alpha, sample_rate, DragOptions::default())
}

pub fn drag_correct_with(env: &dyn Envelope, alpha: f64, sample_rate: f64, opts: DragOptions) -> Result<DragSolution> {
    ensure_finite("alpha", alpha)?;
    if alpha == 0.0 {
        return Err(Error::InvalidParameter("DRAG correction needs a non-zero anharmonicity".into()));
    }
    ensure_positive("sample_rate", sample_rate)?;
    ensure_positive("first_term_coefficient", opts.first_term_coefficient)?;
    if opts.oversample == 0 {
        return Err(Error::InvalidParameter("oversample must be at least 1".into()));
    }
    let n_samples = sample_times(env.duration(), sample_rate)?.len();
    let h = 1.0 / (sample_rate * opts.oversample as f64);
    let n_fine = n_samples * opts.oversample + 1;
    let times: Vec<f64> = (0..n_fine).map(|j| j as f64 * h).collect();
    let eps_x: Vec<f64> = times.iter().map(|&t| env.value(t)).collect();
    let mut eps_y = vec![0.0; n_fine];
    let a0 = env.amplitude();
    let mut asymptotic_points = 0;

    if a0 != 0.0 && env.duration() > 0.0 {
        let prob = Problem { env, alpha, c: opts.first_term_coefficient };
        let inside = |t: f64| t > 0.0 && t < env.duration();
        let t_peak = env.peak_time();
        let rising: Vec<usize> = (0..n_fine).filter(|&j| inside(times[j]) && times[j] <= t_peak).collect();
        let falling: Vec<usize> = (0..n_fine).rev().filter(|&j| inside(times[j]) && times[j] > t_peak).collect();
        for (indices, sign) in [(rising, 1.0), (falling, -1.0)] {
            asymptotic_points += sweep(&prob, &indices, &times, sign, a0, opts, &mut eps_y)?;
        }
    }
    Ok(DragSolution { times, eps_x, eps_y, alpha, coefficient: opts.first_term_coefficient, sample_rate, oversample: opts.oversample, asymptotic_points })
}

/// Fill `out` along `indices` (ordered in the stable direction, `sign` = +1
/// forward in time, -1 backward). Returns the number of asymptotic points.
///
/// A run of integrable points that follows the pulse edge or a negligible
/// envelope starts from `ε_y = 0`; a run that follows a stiff stretch starts
/// on the slow manifold.
fn sweep(prob: &Problem, indices: &[usize], times: &[f64], sign: f64, a0: f64, opts: DragOptions, out: &mut [f64]) -> Result<usize> {
    let mut n_asym = 0;
    let mut pos = 0;
    let mut after_stiff = false;
    let ctl = StepControl { rtol: opts.tol, atol: opts.tol * a0 * a0, h_max: 0.0, max_steps: 10_000_000 };
    while pos < indices.len() {
        let j = indices[pos];
        let small = prob.small(times[j], a0);
        if small || prob.stiff(times[j], opts.stiffness_limit) {
            out[j] = if small { -prob.c * prob.env.derivative(times[j]) / (3.0 * prob.alpha) } else { prob.asymptotic(times[j]) };
            after_stiff = !small;
            n_asym += 1;
            pos += 1;
            continue;
        }
        let mut end = pos;
        while end + 1 < indices.len() {
            let t = times[indices[end + 1]];
            if prob.small(t, a0) || prob.stiff(t, opts.stiffness_limit) {
                break;
            }
            end += 1;
        }
        let run = &indices[pos..=end];
        let s = prob.branch(times[run[0]]);
        let w_start = if after_stiff { prob.asymptotic(times[run[0]]) } else { 0.0 };
        out[run[0]] = w_start;
        let mut y = [C64::new(w_start * w_start, 0.0)];
        let s_out: Vec<f64> = run[1..].iter().map(|&k| sign * times[k]).collect();
        if !s_out.is_empty() {
            integrate(
                |tau, u, du| du[0] = C64::new(sign * prob.rhs_u(sign * tau, u[0].re, s), 0.0),
                sign * times[run[0]],
                &mut y,
                &s_out,
                ctl,
                |k, _, u| out[run[k + 1]] = s * u[0].re.max(0.0).sqrt(),
            )?;
        }
        pos = end + 1;
    }
    Ok(n_asym)
}

/// Centred five-point derivative on a uniform grid; `None` near the ends.
fn five_point(f: &[f64], j: usize, h: f64) -> Option<f64> {
    if j < 2 || j + 2 >= f.len() {
        return None;
    }
    Some((f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h))
}

impl DragSolution {
    /// Largest DRAG-equation residual on the internal grid, evaluated with
    /// finite differences and normalised by `max|ε_x|³ |α|`. Points whose
    /// stencil comes within [`EDGE_POINTS`] of a pulse edge are skipped.
    pub fn residual(&self) -> f64 {
        let h = self.times.get(1).map_or(1.0, |t| t - self.times[0]);
        let scale = self.eps_x.iter().fold(0.0f64, |m, x| m.max(x.abs())).powi(3) * self.alpha.abs();
        if scale == 0.0 {
            return 0.0;
        }
        let duration = self.times.last().copied().unwrap_or(0.0);
        let mut worst: f64 = 0.0;
        for j in 0..self.times.len() {
            let t = self.times[j];
            let margin = (EDGE_POINTS + 2) as f64 * h;
            if t - margin <= 0.0 || t + margin >= duration || self.eps_x[j] == 0.0 {
                continue;
            }
            let (Some(dx), Some(dy)) = (five_point(&self.eps_x, j, h), five_point(&self.eps_y, j, h)) else { continue };
            let (x, y) = (self.eps_x[j], self.eps_y[j]);
            let r = self.coefficient * dx * (x * x - y * y) - 6.0 * x * y * dy + self.alpha * (3.0 * x * x * y - y * y * y);
            worst = worst.max(r.abs());
        }
        worst / scale
    }

    /// Linear interpolation of `(ε_x, ε_y)` at time `t` (zero outside the grid).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let h = self.times.get(1).map_or(1.0, |t1| t1 - self.times[0]);
        if t < 0.0 || self.times.len() < 2 || t > *self.times.last().unwrap() {
            return (0.0, 0.0);
        }
        let x = t / h;
        let j = (x.floor() as usize).min(self.times.len() - 2);
        let f = x - j as f64;
        ((1.0 - f) * self.eps_x[j] + f * self.eps_x[j + 1], (1.0 - f) * self.eps_y[j] + f * self.eps_y[j + 1])
    }

    /// Both quadratures on the AWG grid.
    pub fn waveform(&self) -> IQWaveform {
        let n = (self.times.len() - 1) / self.oversample;
        let pick = |v: &[f64]| (0..n).map(|k| v[k * self.oversample]).collect::<Vec<_>>();
        IQWaveform::new(self.sample_rate, pick(&self.eps_x), pick(&self.eps_y))
    }

    pub fn max_abs_y(&self) -> f64 {
        self.eps_y.iter().fold(0.0f64, |m, y| m.max(y.abs()))
    }
}

/// Rotate a DRAG pair so the resulting gate rotates about the axis at
/// `gate_phase`: the carrier turns by `gate_phase / 3`.
pub fn rotate_iq(eps_x: f64, eps_y: f64, gate_phase: f64) -> (f64, f64) {
    let (s, c) = (gate_phase / 3.0).sin_cos();
    (eps_x * c - eps_y * s, eps_x * s + eps_y * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::envelope::{FlatTop, Gaussian};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    const ALPHA: f64 = -TAU * 208e6;

    #[test]
    fn residual_below_tolerance_for_flat_top() {
        let env = FlatTop::with_defaults(0.3, 30e-9).unwrap();
        let sol = drag_correct(&env, ALPHA, 1e9).unwrap();
        assert!(sol.residual() < 1e-6, "residual {:e}", sol.residual());
        assert!(sol.max_abs_y() > 0.0);
    }

    #[test]
    fn residual_below_tolerance_for_gaussian() {
        let env = Gaussian::new(0.3, 6e-9, 3.0).unwrap();
        let sol = drag_correct(&env, ALPHA, 1e9).unwrap();
        assert!(sol.residual() < 1e-6, "residual {:e}", sol.residual());
    }

    #[test]
    fn quadrature_is_antisymmetric_for_symmetric_envelope() {
        let env = FlatTop::with_defaults(0.3, 30e-9).unwrap();
        let sol = drag_correct(&env, ALPHA, 1e9).unwrap();
        let n = sol.times.len() - 1;
        let peak = sol.max_abs_y();
        for j in (1..n).step_by(997) {
            assert_relative_eq!(sol.eps_y[j], -sol.eps_y[n - j], epsilon = 1e-6 * peak);
        }
    }

    #[test]
    fn leading_order_matches_derivative_over_alpha() {
        let env = FlatTop::with_defaults(0.3, 30e-9).unwrap();
        let sol = drag_correct(&env, ALPHA, 1e9).unwrap();
        // on the rising edge the correction is close to -ε̇_x/α
        let j = sol.times.iter().position(|&t| t >= 4e-9).unwrap();
        let lead = -env.derivative(sol.times[j]) / ALPHA;
        assert_relative_eq!(sol.eps_y[j], lead, max_relative = 0.2);
    }

    #[test]
    fn huge_anharmonicity_shrinks_correction() {
        let env = FlatTop::with_defaults(0.3, 30e-9).unwrap();
        let a = drag_correct(&env, ALPHA, 1e9).unwrap().max_abs_y();
        let b = drag_correct(&env, ALPHA * 1e6, 1e9).unwrap().max_abs_y();
        // nonlinear terms matter at the physical anharmonicity
        assert_relative_eq!(a / b, 1e6, max_relative = 0.15);
        // and vanish once the correction is small against the envelope
        let c = drag_correct(&env, ALPHA * 1e3, 1e9).unwrap().max_abs_y();
        let d = drag_correct(&env, ALPHA * 1e9, 1e9).unwrap().max_abs_y();
        assert_relative_eq!(c / d, 1e6, max_relative = 1e-3);
    }

    #[test]
    fn zero_envelope_gives_zero_quadrature() {
        let env = FlatTop::with_defaults(0.0, 30e-9).unwrap();
        let sol = drag_correct(&env, ALPHA, 1e9).unwrap();
        assert!(sol.eps_y.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn zero_alpha_rejected() {
        let env = FlatTop::with_defaults(0.3, 30e-9).unwrap();
        assert!(drag_correct(&env, 0.0, 1e9).is_err());
    }

    #[test]
    fn waveform_samples_align_with_awg_grid() {
        let env = FlatTop::with_defaults(0.3, 30e-9).unwrap();
        let sol = drag_correct(&env, ALPHA, 1e9).unwrap();
        let wf = sol.waveform();
        assert_eq!(wf.len(), 30);
        assert_relative_eq!(wf.i[7], env.value(7e-9), max_relative = 1e-12);
    }

    #[test]
    fn rotation_by_gate_phase_turns_carrier_by_a_third() {
        let (x, y) = rotate_iq(1.0, 0.0, std::f64::consts::PI);
        assert_relative_eq!(x, 0.5, epsilon = 1e-12);
        assert_relative_eq!(y, 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }
}
