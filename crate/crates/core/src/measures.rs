//! The family of stochastic measures / weighting functions `W(t - t')`.
//!
//! Every kernel is a positive amplitude times a normalized decaying shape in
//! the lag `u = t - t'`:
//!
//! * exponential / Ornstein-Uhlenbeck: `exp(-u/tau)`
//! * gaussian: `exp(-(u/tau)^2)`
//! * lorentzian: `1 / (1 + (u/tau)^2)`
//! * delta: a unit atom at `u = 0`, weight only under integrals
//!
//! The asymptotic amplitude `kappa = int_0^inf exp(n u) W(u) du` drives the
//! long-time factorization of the correlation module; for the unit
//! Ornstein-Uhlenbeck kernel it equals `1/(1 - n)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad;

/// Tail-bound target relative to the running integral when extending the
/// quadrature window of an improper integral.
const TAIL_REL: f64 = 1e-12;
/// Absolute fallback tolerance for the improper integrals.
const TAIL_ABS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Delta,
    Exponential,
    OrnsteinUhlenbeck,
    Gaussian,
    Lorentzian,
}

impl KernelKind {
    pub fn label(&self) -> &'static str {
        match self {
            KernelKind::Delta => "delta",
            KernelKind::Exponential => "exp",
            KernelKind::OrnsteinUhlenbeck => "ou",
            KernelKind::Gaussian => "gauss",
            KernelKind::Lorentzian => "lorentz",
        }
    }
}

/// A parameterized weighting function `W(u) = amplitude * w(u / stochastic_time)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryKernel {
    kind: KernelKind,
    amplitude: f64,
    stochastic_time: f64,
}

impl MemoryKernel {
    pub fn new(kind: KernelKind, amplitude: f64, stochastic_time: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude <= 0.0 {
            return Err(Error::Validation(format!(
                "kernel amplitude must be positive and finite, got {amplitude}"
            )));
        }
        match kind {
            KernelKind::Delta => {
                if stochastic_time != 0.0 {
                    return Err(Error::Validation(format!(
                        "delta kernel has stochastic_time 0 by convention, got {stochastic_time}"
                    )));
                }
            }
            _ => {
                if !stochastic_time.is_finite() || stochastic_time <= 0.0 {
                    return Err(Error::Validation(format!(
                        "stochastic_time must be positive and finite, got {stochastic_time}"
                    )));
                }
            }
        }
        Ok(Self { kind, amplitude, stochastic_time })
    }

    /// Instantaneous (delta) measure with the given atom weight.
    pub fn delta(amplitude: f64) -> Result<Self> {
        Self::new(KernelKind::Delta, amplitude, 0.0)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Characteristic decay time of the measure; 0 for the delta kernel.
    pub fn stochastic_time(&self) -> f64 {
        self.stochastic_time
    }

    /// Pointwise kernel weight at non-negative lag `u`.
    ///
    /// The delta kernel returns 0 for every `u`: its atom is only visible to
    /// the integral operations (response convolution, `kappa`, sifting).
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Validation(format!("lag must be finite, got {u}")));
        }
        if u < 0.0 {
            return Err(Error::Domain(format!("kernel lag must be non-negative, got {u}")));
        }
        Ok(self.amplitude * self.shape(u))
    }

    /// Normalized shape `w(u/tau)`, 1 at zero lag for all non-delta kinds.
    fn shape(&self, u: f64) -> f64 {
        let s = u / self.stochastic_time;
        match self.kind {
            KernelKind::Delta => 0.0,
            KernelKind::Exponential | KernelKind::OrnsteinUhlenbeck => (-s).exp(),
            KernelKind::Gaussian => (-s * s).exp(),
            KernelKind::Lorentzian => 1.0 / (1.0 + s * s),
        }
    }

    /// `int_0^a W(u) du` in closed form. The delta atom at the boundary
    /// counts fully, so the value jumps to `amplitude` at any `a >= 0`.
    pub fn integral_to(&self, a: f64) -> f64 {
        debug_assert!(a >= 0.0);
        let tau = self.stochastic_time;
        match self.kind {
            KernelKind::Delta => self.amplitude,
            KernelKind::Exponential | KernelKind::OrnsteinUhlenbeck => {
                self.amplitude * tau * (1.0 - (-a / tau).exp())
            }
            KernelKind::Gaussian => {
                self.amplitude * tau * 0.5 * core::f64::consts::PI.sqrt() * libm::erf(a / tau)
            }
            KernelKind::Lorentzian => self.amplitude * tau * (a / tau).atan(),
        }
    }

    /// `int_0^inf W(u) du` in closed form; finite for every kind.
    pub fn total_integral(&self) -> f64 {
        let tau = self.stochastic_time;
        match self.kind {
            KernelKind::Delta => self.amplitude,
            KernelKind::Exponential | KernelKind::OrnsteinUhlenbeck => self.amplitude * tau,
            KernelKind::Gaussian => self.amplitude * tau * 0.5 * core::f64::consts::PI.sqrt(),
            KernelKind::Lorentzian => self.amplitude * tau * 0.5 * core::f64::consts::PI,
        }
    }

    /// Upper window `U` and analytic tail bound for `int_0^inf e^{n u} W(u) du`,
    /// such that the neglected tail is below `TAIL_REL` of the integral (with
    /// `TAIL_ABS` as absolute fallback). Errors when the integral diverges.
    pub(crate) fn kappa_window(&self, n: f64) -> Result<f64> {
        let tau = self.stochastic_time;
        match self.kind {
            KernelKind::Delta => Ok(0.0),
            KernelKind::Lorentzian => Err(Error::Divergence(format!(
                "lorentzian kernel: int_0^inf e^(n u)/(1+(u/tau)^2) du diverges for every n > 0 \
                 (exponential growth beats power-law decay); got n = {n}"
            ))),
            KernelKind::Exponential | KernelKind::OrnsteinUhlenbeck => {
                let rate = 1.0 / tau - n;
                if rate <= 0.0 {
                    return Err(Error::Divergence(format!(
                        "exponential-family kernel requires n < 1/tau for a finite asymptotic \
                         amplitude; got n*tau = {:.6} >= 1",
                        n * tau
                    )));
                }
                // tail(U) = A e^{-rate U} / rate; scale of the integral is A/rate
                let mut upper = 5.0 / rate;
                loop {
                    let tail = self.amplitude * (-rate * upper).exp() / rate;
                    let scale = self.amplitude / rate;
                    if tail <= TAIL_REL * scale || tail <= TAIL_ABS {
                        return Ok(upper);
                    }
                    upper *= 2.0;
                }
            }
            KernelKind::Gaussian => {
                // integrand A e^{n u - (u/tau)^2}, peak at u* = n tau^2 / 2;
                // for U > u*: tail(U) <= g(U) / (2U/tau^2 - n)
                let peak = 0.5 * n * tau * tau;
                let mut upper = peak + 8.0 * tau;
                loop {
                    let g = self.amplitude * (n * upper - (upper / tau).powi(2)).exp();
                    let tail = g / (2.0 * upper / (tau * tau) - n);
                    let scale = self.amplitude * tau * (0.25 * (n * tau).powi(2)).exp();
                    if tail <= TAIL_REL * scale || tail <= TAIL_ABS {
                        return Ok(upper);
                    }
                    upper += 4.0 * tau;
                }
            }
        }
    }

    /// Asymptotic amplitude `kappa(n) = int_0^inf e^{n u} W(u) du`, computed
    /// by adaptive quadrature over a window with a negligible analytic tail.
    ///
    /// For the unit Ornstein-Uhlenbeck kernel this equals `1/(1-n)`; for the
    /// delta kernel the boundary atom counts fully, giving `amplitude`.
    pub fn asymptotic_amplitude(&self, n: f64) -> Result<f64> {
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::Domain(format!("decay rate n must be positive, got {n}")));
        }
        if self.kind == KernelKind::Delta {
            // sifting at the boundary: e^{n*0} * amplitude
            return Ok(self.amplitude);
        }
        let upper = self.kappa_window(n)?;
        let f = |u: f64| (n * u).exp() * self.amplitude * self.shape(u);
        let q = quad::integrate(&f, 0.0, upper, TAIL_ABS, TAIL_REL, 4096)?;
        Ok(q.value)
    }
}

impl fmt::Display for MemoryKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            KernelKind::Delta => write!(f, "delta:{}", self.amplitude),
            _ => write!(f, "{}:{}:{}", self.kind.label(), self.amplitude, self.stochastic_time),
        }
    }
}

/// Grammar: `kind:amplitude:tau` with kinds `exp|ou|gauss|lorentz`, or
/// `delta[:amplitude]`. Examples: `ou:1.0:1.0`, `exp:2.0:0.5`, `delta`.
impl FromStr for MemoryKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let kind = match parts[0].to_ascii_lowercase().as_str() {
            "delta" => KernelKind::Delta,
            "exp" | "exponential" => KernelKind::Exponential,
            "ou" | "ornstein-uhlenbeck" => KernelKind::OrnsteinUhlenbeck,
            "gauss" | "gaussian" => KernelKind::Gaussian,
            "lorentz" | "lorentzian" => KernelKind::Lorentzian,
            other => {
                return Err(Error::Validation(format!(
                    "unknown kernel kind '{other}' (expected delta|exp|ou|gauss|lorentz)"
                )))
            }
        };
        let parse = |p: &str, what: &str| -> Result<f64> {
            p.parse::<f64>()
                .map_err(|_| Error::Validation(format!("cannot parse kernel {what} '{p}'")))
        };
        match (kind, parts.len()) {
            (KernelKind::Delta, 1) => MemoryKernel::delta(1.0),
            (KernelKind::Delta, 2) => MemoryKernel::delta(parse(parts[1], "amplitude")?),
            (KernelKind::Delta, _) => Err(Error::Validation(
                "delta kernel spec takes at most one parameter: delta[:amplitude]".into(),
            )),
            (_, 3) => {
                MemoryKernel::new(kind, parse(parts[1], "amplitude")?, parse(parts[2], "tau")?)
            }
            (_, _) => Err(Error::Validation(format!(
                "kernel spec must be kind:amplitude:tau, got '{s}'"
            ))),
        }
    }
}
