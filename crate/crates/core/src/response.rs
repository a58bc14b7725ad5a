//! Linear response with memory: convolution of a driving field with a memory
//! kernel, the instantaneous (delta) limit, and the residual of the
//! hyperbolic Maxwell-Cattaneo-Vernotte differential form.

use crate::error::{Error, Result};
use crate::measures::{KernelKind, MemoryKernel};
use crate::stochastic::SampledPath;

/// How the drive is extended to times before the first sample. The
/// convolution integrates from `t' = -infinity`, so some assumption about
/// the unobserved past is always in play.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prehistory {
    /// The first sample held constant backwards (default).
    Hold,
    /// No drive before the first sample.
    Zero,
    /// An eternal sinusoid `amplitude * sin(omega * t)`; the drive samples
    /// must continue this signal. Used by the hysteresis cycle runner so the
    /// steady cycle carries no start-up transient. Exponential-family
    /// kernels only.
    Sinusoid { amplitude: f64, omega: f64 },
}

/// Susceptibility plus memory kernel. The non-equilibrium susceptibility is
/// the equilibrium one scaled by the kernel amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseModel {
    chi0: f64,
    kernel: MemoryKernel,
}

impl ResponseModel {
    pub fn new(chi0: f64, kernel: MemoryKernel) -> Result<Self> {
        if !chi0.is_finite() {
            return Err(Error::Validation(format!("chi0 must be finite, got {chi0}")));
        }
        Ok(Self { chi0, kernel })
    }

    pub fn chi0(&self) -> f64 {
        self.chi0
    }

    pub fn kernel(&self) -> &MemoryKernel {
        &self.kernel
    }

    /// `chi_ne = chi0 * amplitude`.
    pub fn chi_ne(&self) -> f64 {
        self.chi0 * self.kernel.amplitude()
    }
}

fn is_exponential_family(kind: KernelKind) -> bool {
    matches!(kind, KernelKind::Exponential | KernelKind::OrnsteinUhlenbeck)
}

/// Memory response `M(t) = chi0 * int_{-inf}^{t} W(t - t') H(t') dt'`.
///
/// The sampled part uses trapezoidal weights rescaled so that the discrete
/// kernel mass over `[0, t - t0]` equals the analytic one; constants are
/// then reproduced exactly and the result stays second-order accurate. The
/// pre-history part is handled by the closed-form kernel tail.
///
/// The delta kernel short-circuits to the instantaneous response
/// `chi0 * amplitude * H(t)`.
pub fn respond(
    model: &ResponseModel,
    drive: &SampledPath,
    prehistory: Prehistory,
) -> Result<SampledPath> {
    let kernel = model.kernel();
    if kernel.kind() == KernelKind::Delta {
        let values = drive.values().iter().map(|h| model.chi_ne() * h).collect();
        return SampledPath::new(drive.t0(), drive.dt(), values);
    }

    let dt = drive.dt();
    let tau = kernel.stochastic_time();
    if dt > tau / 10.0 {
        return Err(Error::Accuracy(format!(
            "step {dt} too coarse for kernel time {tau}; need dt <= tau/10"
        )));
    }
    if matches!(prehistory, Prehistory::Sinusoid { .. }) && !is_exponential_family(kernel.kind()) {
        return Err(Error::Domain(
            "sinusoidal pre-history has a closed tail only for exponential-family kernels".into(),
        ));
    }

    let n = drive.len();
    let h = drive.values();

    // kernel samples on the lag grid, amplitude included
    let weights: Vec<f64> = (0..n).map(|j| kernel.eval(j as f64 * dt).expect("lag >= 0")).collect();

    // discrete trapezoid mass over [0, i dt], and its analytic counterpart
    let mut discrete_mass = vec![0.0; n];
    for i in 1..n {
        discrete_mass[i] = discrete_mass[i - 1] + 0.5 * dt * (weights[i - 1] + weights[i]);
    }
    let total_mass = kernel.total_integral();

    // trapezoid lag sums S_i = dt (w_0 h_i / 2 + sum_{0<j<i} w_j h_{i-j}
    //                            + w_i h_0 / 2)
    let sampled_sums = if is_exponential_family(kernel.kind()) {
        // w_j = A q^j: the running sum R_i = h_i + q R_{i-1} makes each lag
        // sum an O(1) update of the previous one
        let q = (-dt / tau).exp();
        let amp = kernel.amplitude();
        let mut sums = Vec::with_capacity(n);
        sums.push(0.0);
        let mut running = h[0];
        let mut q_pow = 1.0;
        for i in 1..n {
            running = h[i] + q * running;
            q_pow *= q;
            sums.push(amp * dt * (running - 0.5 * h[i] - 0.5 * q_pow * h[0]));
        }
        sums
    } else {
        let mut sums = Vec::with_capacity(n);
        sums.push(0.0);
        for i in 1..n {
            let mut s = 0.5 * (weights[0] * h[i] + weights[i] * h[0]);
            for j in 1..i {
                s += weights[j] * h[i - j];
            }
            sums.push(s * dt);
        }
        sums
    };

    let mut out = Vec::with_capacity(n);
    for (i, &lag_sum) in sampled_sums.iter().enumerate() {
        let sampled = if i == 0 {
            0.0
        } else {
            // rescale so the discrete kernel mass matches the analytic one;
            // constants are then reproduced exactly
            lag_sum * (kernel.integral_to(i as f64 * dt) / discrete_mass[i])
        };
        let tail = match prehistory {
            Prehistory::Zero => 0.0,
            Prehistory::Hold => h[0] * (total_mass - kernel.integral_to(i as f64 * dt)),
            Prehistory::Sinusoid { amplitude, omega } => {
                sinusoid_tail(kernel, amplitude, omega, drive.t0(), i as f64 * dt)
            }
        };
        out.push(model.chi0() * (sampled + tail));
    }
    SampledPath::new(drive.t0(), dt, out)
}

/// `int_a^inf W(u) A sin(omega (t - u)) du` for the exponential family,
/// where `t = t0 + a` is the output time. Evaluates to a closed form with
/// the constant phase `omega * t0`.
fn sinusoid_tail(kernel: &MemoryKernel, amplitude: f64, omega: f64, t0: f64, a: f64) -> f64 {
    let tau = kernel.stochastic_time();
    let p = 1.0 / tau;
    let theta = omega * t0;
    kernel.amplitude() * amplitude * (-p * a).exp() * (p * theta.sin() - omega * theta.cos())
        / (p * p + omega * omega)
}

/// Maximum residual of the hyperbolic transport form
/// `tau dM/dt + M - chi_ne tau H(t)` over the interior samples, with
/// `M = respond(...)` and centered differences for the derivative.
/// Only exponential-family kernels admit this differential form.
pub fn mcv_residual(
    model: &ResponseModel,
    drive: &SampledPath,
    prehistory: Prehistory,
) -> Result<f64> {
    let kernel = model.kernel();
    if !is_exponential_family(kernel.kind()) {
        return Err(Error::Domain(format!(
            "the MCV differential form holds only for exponential memory; kernel is {}",
            kernel.kind().label()
        )));
    }
    let tau = kernel.stochastic_time();
    let dt = drive.dt();
    if dt > tau / 100.0 {
        return Err(Error::Accuracy(format!(
            "MCV residual needs dt <= tau/100; got dt = {dt}, tau = {tau}"
        )));
    }

    let response = respond(model, drive, prehistory)?;
    let m = response.values();
    let h = drive.values();
    let chi_ne = model.chi_ne();
    let mut worst = 0.0f64;
    for i in 1..m.len() - 1 {
        let dm = (m[i + 1] - m[i - 1]) / (2.0 * dt);
        let r = tau * dm + m[i] - chi_ne * tau * h[i];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Sup-distance between the normalized exponential-memory response and the
/// instantaneous response `chi0 H(t)`, for each relaxation time in `taus`.
/// Each kernel carries amplitude `1/tau` so its mass is 1 and the family
/// tends to a delta.
pub fn markovian_limit_scan(
    chi0: f64,
    drive: &SampledPath,
    taus: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if taus.is_empty() {
        return Err(Error::Domain("empty tau list".into()));
    }
    if taus.iter().any(|t| !(t > &0.0) || !t.is_finite()) {
        return Err(Error::Domain("all taus must be positive and finite".into()));
    }
    if taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("taus must be strictly decreasing".into()));
    }
    let dt = drive.dt();
    if let Some(&smallest) = taus.last() {
        if smallest < 10.0 * dt {
            return Err(Error::Resolution(format!(
                "smallest tau {smallest} is under 10 dt = {}; the grid cannot resolve the kernel",
                10.0 * dt
            )));
        }
    }

    let mut scan = Vec::with_capacity(taus.len());
    for &tau in taus {
        let kernel = MemoryKernel::new(KernelKind::Exponential, 1.0 / tau, tau)?;
        let model = ResponseModel::new(chi0, kernel)?;
        let out = respond(&model, drive, Prehistory::Hold)?;
        let dist = out
            .values()
            .iter()
            .zip(drive.values())
            .map(|(m, h)| (m - chi0 * h).abs())
            .fold(0.0f64, f64::max);
        scan.push((tau, dist));
    }
    Ok(scan)
}
