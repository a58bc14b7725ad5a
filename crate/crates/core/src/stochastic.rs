//! Stochastic processes realizing the non-equilibrium measures: seeded
//! Ornstein-Uhlenbeck paths, empirical autocorrelation, window-to-window
//! convergence diagnostics and the coupled constitutive solver.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::correlations::EitParameters;
use crate::error::{Error, Result};
use crate::numeric::stats;

/// A uniformly sampled scalar time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !t0.is_finite() || !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Validation(format!("invalid path grid: t0={t0}, dt={dt}")));
        }
        if values.len() < 2 {
            return Err(Error::Validation(format!(
                "a sampled path needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite sample {bad} in path")));
        }
        Ok(Self { t0, dt, values })
    }

    /// Sample `f` on the uniform grid `t0 + i dt`, `i = 0..n`.
    pub fn from_fn<F: Fn(f64) -> f64>(t0: f64, dt: f64, n: usize, f: F) -> Result<Self> {
        let values = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::new(t0, dt, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least 2 samples by construction
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Index of the grid point nearest to `t`; errors outside the range.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let last = self.time(self.len() - 1);
        if t < self.t0 - 0.5 * self.dt || t > last + 0.5 * self.dt {
            return Err(Error::Domain(format!(
                "time {t} outside the sampled range [{}, {last}]",
                self.t0
            )));
        }
        let i = ((t - self.t0) / self.dt).round() as usize;
        Ok(i.min(self.len() - 1))
    }
}

/// Parameters for the Ornstein-Uhlenbeck process
/// `dX = -theta X dt + sigma dW` under Euler-Maruyama.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSpec {
    pub theta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta <= 0.0 {
            return Err(Error::Validation(format!("theta must be positive, got {}", self.theta)));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::Validation(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt * self.theta >= 0.1 {
            return Err(Error::Validation(format!(
                "dt * theta = {:.4} violates the stability bound dt * theta < 0.1",
                self.dt * self.theta
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::Validation("x0 must be finite".into()));
        }
        if self.steps < 1 {
            return Err(Error::Validation("need at least one step".into()));
        }
        Ok(())
    }
}

/// Euler-Maruyama path of the mean-reverting process. Deterministic for a
/// given seed; the returned path has `steps + 1` samples starting at `x0`.
pub fn simulate_ou(spec: &ProcessSpec) -> Result<SampledPath> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sqrt_dt = spec.dt.sqrt();
    let mut values = Vec::with_capacity(spec.steps + 1);
    let mut x = spec.x0;
    values.push(x);
    for _ in 0..spec.steps {
        let z: f64 = rng.sample(StandardNormal);
        x += -spec.theta * x * spec.dt + spec.sigma * sqrt_dt * z;
        values.push(x);
    }
    SampledPath::new(0.0, spec.dt, values)
}

/// Normalized empirical autocovariance of a path.
#[derive(Debug, Clone)]
pub struct Autocorrelation {
    /// `(lag time, normalized autocorrelation)`, lag 0 first (exactly 1).
    pub lags: Vec<(f64, f64)>,
    /// Samples that survived the burn-in.
    pub n_used: usize,
    /// Mean-reversion rate used for the burn-in (user hint or AR(1) fit).
    pub theta: f64,
}

impl Autocorrelation {
    /// Bartlett standard error for the autocorrelation at `lag_index`.
    pub fn standard_error(&self, lag_index: usize) -> f64 {
        let sum_sq: f64 = self.lags[1..=lag_index.min(self.lags.len() - 1)]
            .iter()
            .map(|(_, r)| r * r)
            .sum();
        ((1.0 + 2.0 * sum_sq) / self.n_used as f64).sqrt()
    }
}

/// Unbiased lag-product estimator of the normalized autocovariance, after a
/// burn-in of `10 / theta`. If no `theta_hint` is given the rate is fitted
/// from the lag-1 autocorrelation.
pub fn empirical_autocorrelation(
    path: &SampledPath,
    max_lag: f64,
    theta_hint: Option<f64>,
) -> Result<Autocorrelation> {
    if path.len() < 1000 {
        return Err(Error::Domain(format!(
            "autocorrelation needs at least 1000 samples, got {}",
            path.len()
        )));
    }
    if !(max_lag > 0.0) || max_lag >= path.duration() / 4.0 {
        return Err(Error::Domain(format!(
            "max_lag must lie in (0, duration/4) = (0, {})",
            path.duration() / 4.0
        )));
    }

    let theta = match theta_hint {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::Domain(format!("theta hint must be positive, got {t}"))),
        None => fit_ar1_rate(path.values(), path.dt()),
    };
    let burn = ((10.0 / theta / path.dt()).ceil() as usize).min(path.len());
    let data = &path.values()[burn..];
    if data.len() < 1000 {
        return Err(Error::Domain(format!(
            "only {} samples remain after the 10/theta burn-in; need 1000",
            data.len()
        )));
    }

    let n = data.len();
    let mean = stats::mean(data);
    let max_steps = (max_lag / path.dt()).floor() as usize;
    let c0: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return Err(Error::Domain("path is constant; autocorrelation undefined".into()));
    }
    let mut lags = Vec::with_capacity(max_steps + 1);
    for l in 0..=max_steps {
        let c: f64 = data[..n - l]
            .iter()
            .zip(&data[l..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / (n - l) as f64;
        lags.push((l as f64 * path.dt(), c / c0));
    }
    Ok(Autocorrelation { lags, n_used: n, theta })
}

/// AR(1) fit of the mean-reversion rate from the lag-1 autocorrelation.
fn fit_ar1_rate(values: &[f64], dt: f64) -> f64 {
    let mean = stats::mean(values);
    let c0: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    let c1: f64 = values[..values.len() - 1]
        .iter()
        .zip(&values[1..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    if c0 <= 0.0 {
        return f64::INFINITY; // constant path: no burn-in needed
    }
    let r1 = (c1 / c0).clamp(-0.999_999, 0.999_999);
    if r1 <= 0.0 {
        f64::INFINITY // uncorrelated already
    } else {
        -r1.ln() / dt
    }
}

/// Distances of each window's empirical distribution to the final window's.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// `(window index, energy distance to the last window)`.
    pub distances: Vec<(usize, f64)>,
    /// Kendall trend of the distances over the non-final windows:
    /// near -1 for a relaxing transient, near 0 at the noise floor.
    pub trend: f64,
}

/// Energy distance of each equal-length window to the final one (Cauchy-style
/// convergence diagnostic for the path's distribution sequence).
pub fn convergence_distance(path: &SampledPath, windows: usize) -> Result<ConvergenceReport> {
    if windows < 2 {
        return Err(Error::Domain("need at least 2 windows".into()));
    }
    let width = path.len() / windows;
    if width < 1000 {
        return Err(Error::Domain(format!(
            "each of the {windows} windows must hold at least 1000 samples, got {width}"
        )));
    }
    let window = |i: usize| &path.values()[i * width..(i + 1) * width];
    let last = window(windows - 1);
    let distances: Vec<(usize, f64)> = (0..windows)
        .map(|i| (i, stats::energy_distance(window(i), last)))
        .collect();
    let head: Vec<f64> = distances[..windows - 1].iter().map(|(_, d)| *d).collect();
    let trend = stats::kendall_trend(&head);
    Ok(ConvergenceReport { distances, trend })
}

/// Initial condition for the coupled constitutive solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupledInit {
    /// Start from `J = X = 0`.
    Rest,
    /// Start on the fixed point of the drive's initial value, as if the
    /// drive had been constant since `t = -infinity`.
    FixedPoint,
}

/// Solve the coupled relaxation system
///
/// ```text
/// tau1 dJ/dt + J = lambda1 tau1 u(t)
/// tau2 dX/dt + X = lambda2 tau2 J(t)
/// ```
///
/// (the differential form of the exponential-memory constitutive
/// convolutions) with the implicit trapezoidal scheme, which is
/// unconditionally stable and second-order accurate.
pub fn solve_coupled_constitutive(
    params: &EitParameters,
    drive: &SampledPath,
    init: CoupledInit,
) -> Result<(SampledPath, SampledPath)> {
    let (tau1, tau2) = (params.tau1, params.tau2);
    let (lambda1, lambda2) = (params.lambda1, params.lambda2);
    let dt = drive.dt();
    let tau_min = tau1.min(tau2);
    if dt > tau_min / 10.0 {
        return Err(Error::Accuracy(format!(
            "step {dt} exceeds min(tau1, tau2)/10 = {}",
            tau_min / 10.0
        )));
    }

    let u = drive.values();
    let (j0, x0) = match init {
        CoupledInit::Rest => (0.0, 0.0),
        CoupledInit::FixedPoint => {
            let j = lambda1 * tau1 * u[0];
            (j, lambda2 * tau2 * j)
        }
    };

    let step = |tau: f64, gain: f64, prev: f64, in_prev: f64, in_next: f64| -> f64 {
        let a = tau / dt;
        (prev * (a - 0.5) + 0.5 * gain * tau * (in_prev + in_next)) / (a + 0.5)
    };

    let mut flux = Vec::with_capacity(u.len());
    let mut force = Vec::with_capacity(u.len());
    flux.push(j0);
    force.push(x0);
    for k in 1..u.len() {
        let j = step(tau1, lambda1, flux[k - 1], u[k - 1], u[k]);
        flux.push(j);
        let x = step(tau2, lambda2, force[k - 1], flux[k - 1], j);
        force.push(x);
    }

    Ok((
        SampledPath::new(drive.t0(), dt, flux)?,
        SampledPath::new(drive.t0(), dt, force)?,
    ))
}
