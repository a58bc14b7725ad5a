//! Hysteresis as dissipation in the memory response: loop areas under
//! sinusoidal driving and the relaxation-time / stochastic-time coupling
//! classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{KernelKind, MemoryKernel};
use crate::response::{respond, Prehistory, ResponseModel};
use crate::stochastic::SampledPath;

/// Sinusoidal drive `amplitude * sin(omega t)` over a whole number of
/// periods. `dt` is a cap; the actual step divides the period exactly so
/// steady windows close on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveCycle {
    pub amplitude: f64,
    pub omega: f64,
    pub periods: usize,
    pub dt: f64,
}

impl DriveCycle {
    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::Validation(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.amplitude.is_finite() || self.amplitude <= 0.0 {
            return Err(Error::Validation(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if self.periods < 2 {
            return Err(Error::Validation(format!(
                "need at least 2 periods (transient + steady), got {}",
                self.periods
            )));
        }
        let period = 2.0 * std::f64::consts::PI / self.omega;
        if !(self.dt > 0.0) || self.dt > period / 200.0 {
            return Err(Error::Validation(format!(
                "dt = {} undersamples the cycle; need at least 200 samples per period \
                 (dt <= {:.6e})",
                self.dt,
                period / 200.0
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// Samples per period after snapping `dt` down onto the period.
    pub fn samples_per_period(&self) -> usize {
        (self.period() / self.dt).ceil() as usize
    }
}

/// Steady-cycle extraction from a driven response.
#[derive(Debug, Clone)]
pub struct CycleResult {
    pub drive: SampledPath,
    pub response: SampledPath,
    /// Index range (inclusive start, inclusive end) of the final full
    /// period; the endpoints sit on the same drive phase.
    pub window: (usize, usize),
    pub periods_used: usize,
    /// Largest period-to-period response change, relative to the response
    /// scale, over the final two periods.
    pub period_change: f64,
    /// True when `period_change` fell below 1e-6.
    pub steady: bool,
}

const STEADY_REL: f64 = 1e-6;
const MAX_PERIODS: usize = 10;

/// Drive the model with `amplitude * sin(omega t)` and return the steady
/// cycle. The first period is discarded as transient and periods are added
/// (up to 10) until the period-to-period change is below 1e-6 relative.
///
/// Supported kernels are the delta (instantaneous, degenerate loop) and the
/// exponential family; the eternal-sinusoid pre-history keeps the cycle free
/// of start-up transients so the window is steady to discretization error.
pub fn run_cycle(model: &ResponseModel, cycle: &DriveCycle) -> Result<CycleResult> {
    cycle.validate()?;
    let kind = model.kernel().kind();
    if !matches!(
        kind,
        KernelKind::Delta | KernelKind::Exponential | KernelKind::OrnsteinUhlenbeck
    ) {
        return Err(Error::Domain(format!(
            "cycle analysis covers the delta and exponential-family kernels; got {}",
            kind.label()
        )));
    }

    let spp = cycle.samples_per_period();
    let dt = cycle.period() / spp as f64;
    let prehistory = if kind == KernelKind::Delta {
        Prehistory::Zero // unused by the instantaneous response
    } else {
        Prehistory::Sinusoid { amplitude: cycle.amplitude, omega: cycle.omega }
    };

    let mut periods = cycle.periods.max(2);
    loop {
        let n = periods * spp + 1;
        let drive = SampledPath::from_fn(0.0, dt, n, |t| {
            cycle.amplitude * (cycle.omega * t).sin()
        })?;
        let response = respond(model, &drive, prehistory)?;

        let scale = response.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let last = n - 1 - spp;
        let prev = last - spp;
        let mut change = 0.0f64;
        for i in 0..=spp {
            change = change.max((response.values()[last + i] - response.values()[prev + i]).abs());
        }
        let period_change = change / scale;
        let steady = period_change < STEADY_REL;

        if steady || periods >= MAX_PERIODS {
            return Ok(CycleResult {
                drive,
                response,
                window: (last, n - 1),
                periods_used: periods,
                period_change,
                steady,
            });
        }
        periods += 1;
    }
}

/// Signed loop area `oint M dH` over one steady period by the trapezoid
/// (shoelace) rule. Its magnitude is the dissipated work per cycle; the
/// sign tracks the traversal orientation.
pub fn loop_area(drive: &SampledPath, response: &SampledPath, window: (usize, usize)) -> Result<f64> {
    let (start, end) = window;
    if drive.len() != response.len()
        || (drive.t0() - response.t0()).abs() > 1e-12
        || (drive.dt() - response.dt()).abs() > 1e-15
    {
        return Err(Error::Domain("drive and response paths are not aligned".into()));
    }
    if end <= start || end >= drive.len() {
        return Err(Error::Domain(format!(
            "window ({start}, {end}) is not a valid index range for {} samples",
            drive.len()
        )));
    }
    let h = drive.values();
    let m = response.values();
    let swing = h[start..=end]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let closure = (h[end] - h[start]).abs();
    if closure > 0.01 * (swing.1 - swing.0) {
        return Err(Error::Domain(format!(
            "window endpoints differ by {closure:.3e} in drive value (over 1% of the swing); \
             not a whole period"
        )));
    }
    let mut area = 0.0;
    for i in start..end {
        area += 0.5 * (m[i + 1] + m[i]) * (h[i + 1] - h[i]);
    }
    Ok(area)
}

/// Phase lag of the steady response behind the drive, from quadrature
/// projections onto `sin(omega t)` and `cos(omega t)` over the window.
pub fn phase_lag(response: &SampledPath, window: (usize, usize), omega: f64) -> f64 {
    let (start, end) = window;
    let mut in_phase = 0.0;
    let mut quadrature = 0.0;
    for i in start..end {
        let t = response.time(i);
        let m = response.values()[i];
        in_phase += m * (omega * t).sin();
        quadrature += m * (omega * t).cos();
    }
    // M = R sin(wt - phi): <M sin> ~ cos(phi), <M cos> ~ -sin(phi)
    (-quadrature).atan2(in_phase)
}

/// Dynamic-coupling classification of a process against a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingClass {
    /// Relaxation and stochastic times of the same order.
    Coupled,
    /// Much slower than the measure; driven by it.
    Enslaved,
    /// Much faster than the measure.
    Decoupled,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProcessCoupling {
    pub relaxation_time: f64,
    /// `tau / stochastic_time`; absent for the instantaneous measure.
    pub ratio: Option<f64>,
    pub class: CouplingClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    /// Processes sorted ascending by relaxation time.
    pub hierarchy: Vec<ProcessCoupling>,
    pub note: Option<String>,
}

/// Classify each process by the ratio of its relaxation time to the
/// measure's stochastic time. `same_order_window` is the width of the
/// "same order" band (default decade: 10).
pub fn coupling_criterion(
    relaxation_times: &[f64],
    kernel: &MemoryKernel,
    same_order_window: f64,
) -> Result<CouplingReport> {
    if relaxation_times.is_empty() {
        return Err(Error::Domain("no processes to classify".into()));
    }
    if relaxation_times.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::Domain("relaxation times must be positive and finite".into()));
    }
    if !(same_order_window > 1.0) || !same_order_window.is_finite() {
        return Err(Error::Domain(format!(
            "same-order window must exceed 1, got {same_order_window}"
        )));
    }

    let mut taus = relaxation_times.to_vec();
    taus.sort_by(f64::total_cmp);
    let stochastic_time = kernel.stochastic_time();

    if stochastic_time == 0.0 {
        return Ok(CouplingReport {
            hierarchy: taus
                .iter()
                .map(|&t| ProcessCoupling {
                    relaxation_time: t,
                    ratio: None,
                    class: CouplingClass::Decoupled,
                })
                .collect(),
            note: Some(
                "instantaneous (delta) measure: every finite relaxation time decouples".into(),
            ),
        });
    }

    let hierarchy = taus
        .iter()
        .map(|&t| {
            let ratio = t / stochastic_time;
            let class = if ratio > same_order_window {
                CouplingClass::Enslaved
            } else if ratio < 1.0 / same_order_window {
                CouplingClass::Decoupled
            } else {
                CouplingClass::Coupled
            };
            ProcessCoupling { relaxation_time: t, ratio: Some(ratio), class }
        })
        .collect();
    Ok(CouplingReport { hierarchy, note: None })
}

/// Phasor closed form for the loop-area magnitude of the exponential-memory
/// response: `pi A^2 chi omega tau^2 / (1 + (omega tau)^2)`.
pub fn phasor_loop_area(chi0: f64, amplitude: f64, omega: f64, tau: f64) -> f64 {
    std::f64::consts::PI * amplitude * amplitude * chi0 * omega * tau * tau
        / (1.0 + omega * omega * tau * tau)
}
