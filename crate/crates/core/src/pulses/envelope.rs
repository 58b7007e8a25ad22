use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// A real pulse envelope supported on `[0, duration]`, with analytic derivatives.
pub trait Envelope: Send + Sync + std::fmt::Debug {
    fn duration(&self) -> f64;
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn second_derivative(&self, t: f64) -> f64;
    /// Time of maximum `|value|`.
    fn peak_time(&self) -> f64;
    /// Nominal plateau or peak amplitude.
    fn amplitude(&self) -> f64;
    fn describe(&self) -> EnvelopeSpec;
}

/// Serializable description of the built-in envelope families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeSpec {
    /// `(a0/2)[tanh(k t - t1) - tanh(k (t - t0) + t1)]`; `k` in 1/s, `t1` dimensionless.
    FlatTop { a0: f64, k: f64, t1: f64, t0: f64 },
    /// Gaussian of width `sigma` centred at `n_sigma * sigma`, truncated at `±n_sigma * sigma`.
    Gaussian { a0: f64, sigma: f64, n_sigma: f64 },
}

impl EnvelopeSpec {
    pub fn build(&self) -> Result<Box<dyn Envelope>> {
        Ok(match *self {
            EnvelopeSpec::FlatTop { a0, k, t1, t0 } => Box::new(FlatTop::new(a0, k, t1, t0)?),
            EnvelopeSpec::Gaussian { a0, sigma, n_sigma } => Box::new(Gaussian::new(a0, sigma, n_sigma)?),
        })
    }
}

/// Flat-top pulse with hyperbolic-tangent edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatTop {
    pub a0: f64,
    pub k: f64,
    pub t1: f64,
    pub t0: f64,
}

/// Default edge steepness, 0.5 per ns.
pub const DEFAULT_RAMP_RATE: f64 = 0.5e9;
/// Default edge offset (dimensionless), placing the half-amplitude points at `t1/k` from each end.
pub const DEFAULT_RAMP_OFFSET: f64 = 2.0;

impl FlatTop {
    pub fn new(a0: f64, k: f64, t1: f64, t0: f64) -> Result<Self> {
        ensure_finite("a0", a0)?;
        ensure_positive("k", k)?;
        ensure_finite("t1", t1)?;
        ensure_finite("t0", t0)?;
        if t0 < 0.0 {
            return Err(Error::InvalidParameter(format!("pulse duration must be non-negative, got {t0}")));
        }
        Ok(FlatTop { a0, k, t1, t0 })
    }

    pub fn with_defaults(a0: f64, t0: f64) -> Result<Self> {
        Self::new(a0, DEFAULT_RAMP_RATE, DEFAULT_RAMP_OFFSET, t0)
    }

    fn args(&self, t: f64) -> (f64, f64) {
        (self.k * t - self.t1, self.k * (t - self.t0) + self.t1)
    }

    fn inside(&self, t: f64) -> bool {
        t > 0.0 && t < self.t0
    }
}

fn sech2(u: f64) -> f64 {
    let c = u.cosh();
    if c.is_finite() {
        1.0 / (c * c)
    } else {
        0.0
    }
}

impl Envelope for FlatTop {
    fn duration(&self) -> f64 {
        self.t0
    }

    fn value(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let (u, v) = self.args(t);
        0.5 * self.a0 * (u.tanh() - v.tanh())
    }

    fn derivative(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let (u, v) = self.args(t);
        0.5 * self.a0 * self.k * (sech2(u) - sech2(v))
    }

    fn second_derivative(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let (u, v) = self.args(t);
        -self.a0 * self.k * self.k * (u.tanh() * sech2(u) - v.tanh() * sech2(v))
    }

    fn peak_time(&self) -> f64 {
        0.5 * self.t0
    }

    fn amplitude(&self) -> f64 {
        self.a0
    }

    fn describe(&self) -> EnvelopeSpec {
        EnvelopeSpec::FlatTop { a0: self.a0, k: self.k, t1: self.t1, t0: self.t0 }
    }
}

/// Truncated Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub a0: f64,
    pub sigma: f64,
    pub n_sigma: f64,
}

impl Gaussian {
    pub fn new(a0: f64, sigma: f64, n_sigma: f64) -> Result<Self> {
        ensure_finite("a0", a0)?;
        ensure_positive("sigma", sigma)?;
        ensure_positive("n_sigma", n_sigma)?;
        Ok(Gaussian { a0, sigma, n_sigma })
    }

    fn centre(&self) -> f64 {
        self.n_sigma * self.sigma
    }

    fn inside(&self, t: f64) -> bool {
        t >= 0.0 && t <= self.duration()
    }
}

impl Envelope for Gaussian {
    fn duration(&self) -> f64 {
        2.0 * self.n_sigma * self.sigma
    }

    fn value(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        let x = (t - self.centre()) / self.sigma;
        self.a0 * (-0.5 * x * x).exp()
    }

    fn derivative(&self, t: f64) -> f64 {
        let x = (t - self.centre()) / self.sigma;
        -x / self.sigma * self.value(t)
    }

    fn second_derivative(&self, t: f64) -> f64 {
        let x = (t - self.centre()) / self.sigma;
        (x * x - 1.0) / (self.sigma * self.sigma) * self.value(t)
    }

    fn peak_time(&self) -> f64 {
        self.centre()
    }

    fn amplitude(&self) -> f64 {
        self.a0
    }

    fn describe(&self) -> EnvelopeSpec {
        EnvelopeSpec::Gaussian { a0: self.a0, sigma: self.sigma, n_sigma: self.n_sigma }
    }
}

/// Sample times `k / rate` for `k = 0..ceil(duration * rate)`.
pub fn sample_times(duration: f64, sample_rate: f64) -> Result<Vec<f64>> {
    ensure_positive("sample_rate", sample_rate)?;
    ensure_finite("duration", duration)?;
    let n = (duration * sample_rate - 1e-9).ceil().max(0.0) as usize;
    Ok((0..n).map(|k| k as f64 / sample_rate).collect())
}

/// Sample an envelope on the AWG grid.
pub fn sample(env: &dyn Envelope, sample_rate: f64) -> Result<Vec<f64>> {
    Ok(sample_times(env.duration(), sample_rate)?.into_iter().map(|t| env.value(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_length_pulse_is_empty_or_zero() {
        let p = FlatTop::with_defaults(1.0, 0.0).unwrap();
        assert!(sample(&p, 1e9).unwrap().iter().all(|&x| x == 0.0));
        assert_eq!(p.value(0.0), 0.0);
    }

    #[test]
    fn flat_top_is_symmetric_and_reaches_plateau() {
        let p = FlatTop::with_defaults(0.38, 60e-9).unwrap();
        for t in [1e-9, 3.3e-9, 7e-9, 20e-9] {
            assert_relative_eq!(p.value(t), p.value(60e-9 - t), max_relative = 1e-12);
        }
        assert_relative_eq!(p.value(30e-9), 0.38, max_relative = 1e-10);
        // half amplitude near t1/k from the start for a long pulse
        assert_relative_eq!(p.value(DEFAULT_RAMP_OFFSET / DEFAULT_RAMP_RATE), 0.19, max_relative = 1e-6);
    }

    #[test]
    fn steep_edges_approach_rectangle() {
        let p = FlatTop::new(1.0, 1e13, 2.0, 10e-9).unwrap();
        let s = sample(&p, 1e9).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s[1..].iter().all(|&x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let envs: Vec<Box<dyn Envelope>> = vec![
            Box::new(FlatTop::with_defaults(0.7, 30e-9).unwrap()),
            Box::new(Gaussian::new(0.5, 5e-9, 3.0).unwrap()),
        ];
        for e in envs {
            for t in [2.1e-9, 6.3e-9, 13.7e-9, 25.2e-9] {
                let h = 1e-13;
                let fd1 = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
                let fd2 = (e.derivative(t + h) - e.derivative(t - h)) / (2.0 * h);
                assert_relative_eq!(e.derivative(t), fd1, max_relative = 1e-5, epsilon = 1e-3);
                assert_relative_eq!(e.second_derivative(t), fd2, max_relative = 1e-5, epsilon = 1e6);
            }
        }
    }

    #[test]
    fn invalid_envelopes_rejected() {
        assert!(FlatTop::new(1.0, 0.0, 2.0, 1e-8).is_err());
        assert!(FlatTop::new(1.0, 1e9, 2.0, -1e-8).is_err());
        assert!(Gaussian::new(f64::NAN, 1e-9, 2.0).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let s = EnvelopeSpec::FlatTop { a0: 0.2, k: 5e8, t1: 2.0, t0: 4e-8 };
        let e = s.build().unwrap();
        assert_eq!(e.describe(), s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<EnvelopeSpec>(&json).unwrap(), s);
    }
}
