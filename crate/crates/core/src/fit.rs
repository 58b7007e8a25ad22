//! Curve fits used by the experiments: FFT-seeded sinusoid and complex
//! exponential fits, a small Levenberg–Marquardt solver, and linear helpers.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::operators::C64;

/// Result of fitting `offset + e^{-γt}(A cos(ω t + φ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    /// Angular frequency (rad per unit of `t`).
    pub omega: f64,
    pub phase: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub decay: f64,
    pub rms_residual: f64,
    /// One-sigma uncertainty of `omega` from the linearised least-squares covariance.
    pub omega_uncertainty: f64,
}

impl SinusoidFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-self.decay * t).exp() * (self.omega * t + self.phase).cos()
    }
}

fn check_samples(t: &[f64], y: &[f64]) -> Result<()> {
    if t.len() != y.len() {
        return Err(Error::InvalidParameter(format!("{} times but {} values", t.len(), y.len())));
    }
    if t.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 samples, got {}", t.len())));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit input contains non-finite values".into()));
    }
    Ok(())
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if dt <= 0.0 || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::Fit("spectral seeding needs uniformly spaced samples".into()));
    }
    Ok(dt)
}

/// Zero-padding factor of the seeding FFT.
const PAD: usize = 8;

/// Relative power difference below which two spectral peaks count as a tie.
const TIE: f64 = 1e-9;

/// Dominant angular frequency of a uniformly sampled complex signal, signed.
/// Ties go to the lower `|ω|`.
fn spectral_peak(t: &[f64], z: &[C64], allow_dc: bool) -> Result<f64> {
    let dt = uniform_step(t)?;
    let n = z.len() * PAD;
    let mut buf: Vec<C64> = z.to_vec();
    buf.resize(n, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();
    let freq = |k: usize| {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        // forward FFT picks e^{-iωt}; a signal e^{iωt} peaks at +ω
        TAU * kk / (n as f64 * dt)
    };
    let total: f64 = power.iter().sum();
    if total <= 0.0 {
        return Err(Error::Fit("signal has no spectral content".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for k in 0..n {
        if !allow_dc && (k < PAD || k > n - PAD) {
            continue;
        }
        let p = power[k];
        best = match best {
            None => Some((k, p)),
            Some((kb, pb)) => {
                if p > pb * (1.0 + TIE) || ((p - pb).abs() <= pb * TIE && freq(k).abs() < freq(kb).abs()) {
                    Some((k, p))
                } else {
                    Some((kb, pb))
                }
            }
        };
    }
    let (k, p) = best.ok_or_else(|| Error::Fit("empty spectrum".into()))?;
    if !allow_dc && p < 1e-12 * total * PAD as f64 {
        return Err(Error::Fit("no dominant spectral peak".into()));
    }
    Ok(freq(k))
}

/// Linear least squares `min |A x - b|`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-13).map_err(|e| Error::Fit(e.to_string()))
}

/// For fixed `ω, γ`, the best linear parameters and the residual norm².
fn sinusoid_projection(t: &[f64], y: &[f64], omega: f64, decay: f64) -> Result<(DVector<f64>, f64)> {
    let a = DMatrix::from_fn(t.len(), 3, |i, j| {
        let e = (-decay * t[i]).exp();
        match j {
            0 => 1.0,
            1 => e * (omega * t[i]).cos(),
            _ => e * (omega * t[i]).sin(),
        }
    });
    let b = DVector::from_column_slice(y);
    let x = lstsq(&a, &b)?;
    let r = (&a * &x - b).norm_squared();
    Ok((x, r))
}

/// Fit `offset + A e^{-γt} cos(ω t + φ)` (with `γ = 0` unless `damped`).
///
/// The frequency is seeded from the largest non-DC FFT peak (ties go to the
/// lower frequency) and refined by least squares. Fails if the trace has no
/// oscillating component.
pub fn fit_sinusoid(t: &[f64], y: &[f64], damped: bool) -> Result<SinusoidFit> {
    check_samples(t, y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if var <= 1e-24 * scale * scale {
        return Err(Error::Fit("trace is constant; no oscillation to fit".into()));
    }
    let t0 = t[0];
    let tt: Vec<f64> = t.iter().map(|v| v - t0).collect();
    let z: Vec<C64> = y.iter().map(|v| C64::new(v - mean, 0.0)).collect();
    let w_seed = spectral_peak(&tt, &z, false)?.abs();
    let span = tt[tt.len() - 1];
    let cost = |p: &[f64]| -> f64 {
        let g = if damped { p[1] } else { 0.0 };
        sinusoid_projection(&tt, y, p[0], g).map(|(_, r)| r).unwrap_or(f64::INFINITY)
    };
    // golden refinement within one coarse FFT bin, then joint polish
    let bin = TAU / (span * PAD as f64 / 2.0).max(1e-300);
    let w_gold = golden(|w| cost(&[w, 0.0]), (w_seed - bin).max(0.0), w_seed + bin, 1e-13 * w_seed.max(bin))?;
    let p0 = if damped { vec![w_gold, 0.0] } else { vec![w_gold] };
    let p = minimize_nm(&cost, &p0, &[bin * 0.05, 0.05 / span])?;
    let (omega, decay) = (p[0], if damped { p[1] } else { 0.0 });
    let (x, r) = sinusoid_projection(&tt, y, omega, decay)?;
    let amplitude = (x[1] * x[1] + x[2] * x[2]).sqrt();
    // a cos + b sin = A cos(ωt - atan2(b, a)); shift the phase back to the original time origin
    let phase = crate::operators::wrap_phase(-x[2].atan2(x[1]) - omega * t0);
    let omega_uncertainty = frequency_sigma(&tt, omega, decay, &x, r, damped);
    Ok(SinusoidFit {
        omega,
        phase,
        amplitude: amplitude * (decay * t0).exp(),
        offset: x[0],
        decay,
        rms_residual: (r / y.len() as f64).sqrt(),
        omega_uncertainty,
    })
}

/// Standard error of `ω` from `s² (JᵀJ)⁻¹` with the analytic model Jacobian.
fn frequency_sigma(t: &[f64], omega: f64, decay: f64, x: &DVector<f64>, rss: f64, damped: bool) -> f64 {
    let np = if damped { 5 } else { 4 };
    if t.len() <= np {
        return f64::INFINITY;
    }
    let jac = DMatrix::from_fn(t.len(), np, |i, j| {
        let (s, e) = (t[i], (-decay * t[i]).exp());
        let (c, sn) = ((omega * s).cos(), (omega * s).sin());
        match j {
            0 => 1.0,
            1 => e * c,
            2 => e * sn,
            3 => e * s * (-x[1] * sn + x[2] * c),
            _ => -s * e * (x[1] * c + x[2] * sn),
        }
    });
    let s2 = rss / (t.len() - np) as f64;
    match (jac.transpose() * &jac).try_inverse() {
        Some(cov) => (s2 * cov[(3, 3)]).max(0.0).sqrt(),
        None => f64::INFINITY,
    }
}

/// Result of fitting `c0 + c e^{iωt}` to a complex signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexExpFit {
    pub omega: f64,
    pub coefficient: C64,
    pub offset: C64,
    pub rms_residual: f64,
}

fn complex_projection(t: &[f64], z: &[C64], omega: f64, with_offset: bool) -> (C64, C64, f64) {
    let n = t.len() as f64;
    let e: Vec<C64> = t.iter().map(|&s| C64::from_polar(1.0, omega * s)).collect();
    let (c, c0) = if with_offset {
        let se: C64 = e.iter().sum();
        let sz: C64 = z.iter().sum();
        let sez: C64 = e.iter().zip(z).map(|(a, b)| a.conj() * b).sum();
        let det = n * n - se.norm_sqr();
        if det.abs() < 1e-12 * n * n {
            (C64::new(0.0, 0.0), sz / n)
        } else {
            let c = (n * sez - se.conj() * sz) / det;
            (c, (sz - c * se) / n)
        }
    } else {
        let sez: C64 = e.iter().zip(z).map(|(a, b)| a.conj() * b).sum();
        (sez / n, C64::new(0.0, 0.0))
    };
    let r: f64 = e.iter().zip(z).map(|(ei, zi)| (zi - c0 - c * ei).norm_sqr()).sum();
    (c, c0, r)
}

/// Fit `c0 + c e^{iωt}` to a uniformly sampled complex signal; `ω` is signed.
/// A constant signal gives `ω = 0`.
pub fn fit_complex_exponential(t: &[f64], z: &[C64], with_offset: bool) -> Result<ComplexExpFit> {
    if t.len() != z.len() || t.len() < 5 {
        return Err(Error::Fit("need at least 5 matching samples".into()));
    }
    let t0 = t[0];
    let tt: Vec<f64> = t.iter().map(|v| v - t0).collect();
    let n = z.len() as f64;
    let mean = z.iter().sum::<C64>() / n;
    let scale = z.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(1e-300);
    if with_offset && z.iter().all(|v| (v - mean).norm() <= 1e-12 * scale) {
        return Ok(ComplexExpFit { omega: 0.0, coefficient: C64::new(0.0, 0.0), offset: mean, rms_residual: 0.0 });
    }
    // with an offset term the constant part is modelled separately, so seed from the rest
    let centred: Vec<C64> = if with_offset { z.iter().map(|v| v - mean).collect() } else { z.to_vec() };
    let w_seed = spectral_peak(&tt, &centred, !with_offset)?;
    let span = tt[tt.len() - 1];
    let bin = TAU / (span * PAD as f64 / 2.0);
    let cost = |w: f64| complex_projection(&tt, z, w, with_offset).2;
    let omega = golden(cost, w_seed - bin, w_seed + bin, 1e-13 * w_seed.abs().max(bin))?;
    let omega = if omega.abs() < 1e-9 * bin { 0.0 } else { omega };
    let (c, c0, r) = complex_projection(&tt, z, omega, with_offset);
    Ok(ComplexExpFit { omega, coefficient: c * C64::from_polar(1.0, -omega * t0), offset: c0, rms_residual: (r / n).sqrt() })
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Fit(format!("invalid bracket [{a}, {b}]")));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// Root of `f` on `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Fit(format!("root not bracketed on [{a:e}, {b:e}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Nelder–Mead simplex minimisation; `steps` gives the initial simplex size per coordinate.
pub fn minimize_nm(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64]) -> Result<Vec<f64>> {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i.min(steps.len() - 1)];
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    for _ in 0..4000 {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = (vals[n] - vals[0]).abs();
        if spread <= 1e-15 * vals[0].abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|x| x[k]).sum::<f64>() / n as f64).collect();
        let point = |s: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + s * (simplex[n][k] - centroid[k])).collect() };
        let xr = point(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = point(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { point(-0.5) } else { point(0.5) };
            let fc = f(&xc);
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n).map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k])).collect();
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    if !vals[best].is_finite() {
        return Err(Error::Fit("objective is not finite at the optimum".into()));
    }
    Ok(simplex[best].clone())
}

/// Levenberg–Marquardt for `min Σ r_i(p)²` with a forward-difference Jacobian.
/// `bounds` clamps each parameter after every step.
pub fn levenberg_marquardt(residuals: &dyn Fn(&[f64]) -> Vec<f64>, p0: &[f64], bounds: &[(f64, f64)]) -> Result<(Vec<f64>, f64)> {
    let clamp = |p: &mut [f64]| {
        for (x, (lo, hi)) in p.iter_mut().zip(bounds) {
            *x = x.clamp(*lo, *hi);
        }
    };
    let mut p = p0.to_vec();
    clamp(&mut p);
    let mut r = residuals(&p);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    if !cost.is_finite() {
        return Err(Error::Fit("residuals not finite at the starting point".into()));
    }
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let m = r.len();
        let n = p.len();
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = 1e-7 * p[k].abs().max(1e-7);
            let mut q = p.clone();
            q[k] += h;
            let rq = residuals(&q);
            for i in 0..m {
                jac[(i, k)] = (rq[i] - r[i]) / h;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut q: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            clamp(&mut q);
            let rq = residuals(&q);
            let cq: f64 = rq.iter().map(|v| v * v).sum();
            if cq.is_finite() && cq < cost {
                let rel = (cost - cq) / cost.max(1e-300);
                p = q;
                r = rq;
                cost = cq;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Ok((p, cost))
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("linear fit needs at least two matching points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Slope of `log|y|` against `log|x|`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = x.iter().map(|v| v.abs().ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    Ok(linear_fit(&lx, &ly)?.1)
}

/// Least-squares parabola `c0 + c1 x + c2 x²`.
pub fn parabola_fit(x: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Fit("parabola fit needs at least three points".into()));
    }
    let xm = x.iter().sum::<f64>() / x.len() as f64;
    let a = DMatrix::from_fn(x.len(), 3, |i, j| (x[i] - xm).powi(j as i32));
    let c = lstsq(&a, &DVector::from_column_slice(y))?;
    // expand back from the centred variable
    Ok([c[0] - c[1] * xm + c[2] * xm * xm, c[1] - 2.0 * c[2] * xm, c[2]])
}

/// Fit `a + b cos θ + c sin θ`; returns `(a, amplitude, θ at the minimum)`.
pub fn fit_harmonic(theta: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if theta.len() != y.len() || theta.len() < 3 {
        return Err(Error::Fit("harmonic fit needs at least three points".into()));
    }
    let a = DMatrix::from_fn(theta.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => theta[i].cos(),
        _ => theta[i].sin(),
    });
    let x = lstsq(&a, &DVector::from_column_slice(y))?;
    let amp = (x[1] * x[1] + x[2] * x[2]).sqrt();
    // b cos θ + c sin θ = amp cos(θ - θmax); minimum at θmax + π
    let theta_min = crate::operators::wrap_phase(x[2].atan2(x[1]) + std::f64::consts::PI);
    Ok((x[0], amp, theta_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn recovers_noiseless_sinusoid() {
        let t = grid(200, 1e-9);
        let w = TAU * 12.1e6;
        let y: Vec<f64> = t.iter().map(|s| 0.5 - 0.5 * (w * s).cos()).collect();
        let f = fit_sinusoid(&t, &y, false).unwrap();
        assert_relative_eq!(f.omega, w, max_relative = 1e-8);
        assert_relative_eq!(f.amplitude, 0.5, max_relative = 1e-8);
        assert_relative_eq!(f.offset, 0.5, max_relative = 1e-8);
    }

    #[test]
    fn recovers_damped_sinusoid_with_offset_start() {
        let t: Vec<f64> = (0..300).map(|k| 5e-9 + k as f64 * 2e-9).collect();
        let (w, g) = (TAU * 7.3e6, 2.0e6);
        let y: Vec<f64> = t.iter().map(|s| 0.4 + 0.3 * (-g * s).exp() * (w * s + 0.4).cos()).collect();
        let f = fit_sinusoid(&t, &y, true).unwrap();
        assert_relative_eq!(f.omega, w, max_relative = 1e-6);
        assert_relative_eq!(f.decay, g, max_relative = 1e-4);
        assert_relative_eq!(f.phase, 0.4, epsilon = 1e-5);
        assert_relative_eq!(f.amplitude, 0.3, max_relative = 1e-5);
        assert_relative_eq!(f.eval(t[17]), y[17], epsilon = 1e-8);
    }

    #[test]
    fn constant_trace_fails() {
        let t = grid(50, 1.0);
        let y = vec![0.3; 50];
        assert!(matches!(fit_sinusoid(&t, &y, false), Err(Error::Fit(_))));
    }

    #[test]
    fn equal_peaks_pick_lower_frequency() {
        // two complex tones of equal weight: the padded spectrum is mirror-symmetric
        let n = 64;
        let t = grid(n, 1.0);
        let (w1, w2) = (TAU * 4.0 / n as f64, TAU * 10.0 / n as f64);
        let z: Vec<C64> = t.iter().map(|s| C64::from_polar(1.0, w1 * s) + C64::from_polar(1.0, w2 * s)).collect();
        let w = spectral_peak(&t, &z, false).unwrap().abs();
        assert_relative_eq!(w, w1, max_relative = 1e-12);
    }

    #[test]
    fn complex_exponential_sign_and_zero() {
        let t = grid(100, 1e-8);
        let w = -TAU * 3.3e6;
        let z: Vec<C64> = t.iter().map(|s| C64::from_polar(0.5, w * s + 1.0)).collect();
        let f = fit_complex_exponential(&t, &z, false).unwrap();
        assert_relative_eq!(f.omega, w, max_relative = 1e-9);
        let flat = vec![C64::new(0.2, -0.1); 100];
        assert_eq!(fit_complex_exponential(&t, &flat, false).unwrap().omega, 0.0);
    }

    #[test]
    fn lm_fits_exponential_decay() {
        let m: Vec<f64> = (0..10).map(|k| 2f64.powi(k)).collect();
        let y: Vec<f64> = m.iter().map(|x| 0.5 * 0.99f64.powf(*x) + 0.5).collect();
        let res = |p: &[f64]| m.iter().zip(&y).map(|(x, v)| p[0] * p[1].powf(*x) + p[2] - v).collect::<Vec<_>>();
        let (p, cost) = levenberg_marquardt(&res, &[0.4, 0.95, 0.4], &[(-1.0, 1.0), (0.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert!(cost < 1e-20);
        assert_relative_eq!(p[1], 0.99, max_relative = 1e-8);
    }

    #[test]
    fn line_parabola_and_harmonic() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let (a, b) = linear_fit(&x, &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b, 2.0, epsilon = 1e-12);
        let c = parabola_fit(&x, &x.map(|v| 2.0 - 3.0 * v + 0.5 * v * v)).unwrap();
        assert_relative_eq!(c[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(c[1], -3.0, epsilon = 1e-10);
        assert_relative_eq!(c[2], 0.5, epsilon = 1e-10);
        let th: Vec<f64> = (0..12).map(|k| k as f64 * TAU / 12.0).collect();
        let y: Vec<f64> = th.iter().map(|t| 0.5 + 0.4 * (t - 1.1).cos()).collect();
        let (off, amp, tmin) = fit_harmonic(&th, &y).unwrap();
        assert_relative_eq!(off, 0.5, epsilon = 1e-12);
        assert_relative_eq!(amp, 0.4, epsilon = 1e-12);
        assert_relative_eq!(tmin, crate::operators::wrap_phase(1.1 + std::f64::consts::PI), epsilon = 1e-12);
        assert_relative_eq!(log_log_slope(&[1.0, 2.0, 4.0], &[3.0, 24.0, 192.0]).unwrap(), 3.0, epsilon = 1e-12);
    }
}
