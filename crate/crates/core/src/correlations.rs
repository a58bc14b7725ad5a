//! Two-time correlation functions of the stochastic-measure formalism: the
//! general correlation map over a sampled field, the binary-mixture
//! amplitudes `A`, `B`, `Xi = AB + B^2`, the full correlation integral and
//! its long-time (van Hove) factorization `kappa * Xi * exp(-2 n t)`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::measures::{KernelKind, MemoryKernel};
use crate::numeric::quad;
use crate::response::{respond, Prehistory, ResponseModel};
use crate::stochastic::SampledPath;

/// Guard band below which a `B` denominator counts as singular.
const DENOM_GUARD: f64 = 1e-8;

/// Parameter set of the binary-mixture correlation functions.
///
/// `lambda1`, `lambda2` are transport amplitudes; `tau1`, `tau2` the
/// relaxation times of the coupled constitutive pair; `n` the decay rate of
/// the composition field; `h_field`/`t_field` the chemical-potential and
/// temperature amplitude profiles; `cp` the heat capacity as a function of
/// temperature, integrated as `Cp(T)/T` over `[eps_t, t_upper]`.
#[derive(Debug, Clone)]
pub struct EitParameters {
    pub lambda1: f64,
    pub lambda2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub n: f64,
    pub h_field: Field,
    pub t_field: Field,
    pub cp: Field,
    pub t_upper: f64,
    pub eps_t: f64,
}

impl EitParameters {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("n", self.n),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if self.tau1 <= 0.0 || self.tau2 <= 0.0 {
            return Err(Error::Validation(format!(
                "relaxation times must be positive, got tau1 = {}, tau2 = {}",
                self.tau1, self.tau2
            )));
        }
        if self.n <= 0.0 {
            return Err(Error::Validation(format!("decay rate n must be positive, got {}", self.n)));
        }
        if !(self.eps_t > 0.0 && self.t_upper > self.eps_t) {
            return Err(Error::Validation(format!(
                "need 0 < eps_t < t_upper, got eps_t = {}, t_upper = {}",
                self.eps_t, self.t_upper
            )));
        }
        Ok(())
    }

    /// Singularity guard on the `B` denominators, naming the offender.
    fn guard_denominators(&self) -> Result<()> {
        if self.n.abs() < DENOM_GUARD {
            return Err(Error::Singularity(format!("n = {} is within 1e-8 of zero", self.n)));
        }
        let d1 = 1.0 - self.n * self.tau1;
        if d1.abs() < DENOM_GUARD {
            return Err(Error::Singularity(format!(
                "1 - n*tau1 = {d1:e} is within 1e-8 of zero (n*tau1 = {})",
                self.n * self.tau1
            )));
        }
        let d2 = 1.0 - self.n * self.tau2;
        if d2.abs() < DENOM_GUARD {
            return Err(Error::Singularity(format!(
                "1 - n*tau2 = {d2:e} is within 1e-8 of zero (n*tau2 = {})",
                self.n * self.tau2
            )));
        }
        Ok(())
    }

    /// Warns when the heat capacity does not decay toward zero at the lower
    /// cutoff, in which case the `Cp/T` integral hides a divergence and its
    /// value depends on `eps_t`. Detected by comparing `Cp` at the cutoff
    /// and at half the cutoff: a decay slower than `T^0.4` is flagged.
    pub fn cutoff_warning(&self) -> Option<String> {
        let at_cutoff = self.cp.eval_1d(self.eps_t).abs();
        let at_half = self.cp.eval_1d(0.5 * self.eps_t).abs();
        if at_cutoff > 1e-9 && at_half >= 0.75 * at_cutoff {
            Some(format!(
                "Cp does not vanish toward T = 0 (Cp({:.3e}) = {at_cutoff:.3e}); the Cp/T \
                 integral depends on the cutoff eps_t (third-law-consistent Cp -> 0 expected)",
                self.eps_t
            ))
        } else {
            None
        }
    }
}

/// Builder with the conventional defaults: unit fields, `t_upper = 1`,
/// `eps_t = 1e-6 * t_upper`, `Cp(T) = T`.
#[derive(Debug, Clone)]
pub struct EitParametersBuilder {
    params: EitParameters,
}

impl EitParametersBuilder {
    pub fn new(lambda1: f64, lambda2: f64, tau1: f64, tau2: f64, n: f64) -> Self {
        Self {
            params: EitParameters {
                lambda1,
                lambda2,
                tau1,
                tau2,
                n,
                h_field: Field::constant(1.0),
                t_field: Field::constant(1.0),
                cp: Field::linear_1d(0.0, 1.0),
                t_upper: 1.0,
                eps_t: 1e-6,
            },
        }
    }

    pub fn h_field(mut self, f: Field) -> Self {
        self.params.h_field = f;
        self
    }

    pub fn t_field(mut self, f: Field) -> Self {
        self.params.t_field = f;
        self
    }

    pub fn cp(mut self, f: Field) -> Self {
        self.params.cp = f;
        self
    }

    pub fn cp_integral_limits(mut self, eps_t: f64, t_upper: f64) -> Self {
        self.params.eps_t = eps_t;
        self.params.t_upper = t_upper;
        self
    }

    /// Sets `t_upper` and the default cutoff `eps_t = 1e-6 * t_upper`.
    pub fn t_upper(mut self, t_upper: f64) -> Self {
        self.params.t_upper = t_upper;
        self.params.eps_t = 1e-6 * t_upper;
        self
    }

    pub fn build(self) -> Result<EitParameters> {
        self.params.validate()?;
        Ok(self.params)
    }
}

/// `A(r) = [int_{eps_t}^{t_upper} Cp(T)/T dT] / H(r)`.
pub fn amplitude_a(params: &EitParameters, r: f64) -> Result<f64> {
    params.validate()?;
    let h = params.h_field.eval_1d(r);
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "chemical-potential amplitude H({r}) = {h} must be positive"
        )));
    }
    let integrand = |t: f64| params.cp.eval_1d(t) / t;
    let q = quad::integrate(&integrand, params.eps_t, params.t_upper, 1e-12, 1e-12, 4096)?;
    Ok(q.value / h)
}

/// The transport bracket
/// `B = [l1 l2 t1 H T / (n (1 - n t1)^2)] *
///      [l1 t1^2 - t2 (l1 t1/(1 - n t1) + (l1 (1 - n t1) - 1)/(1 - n t2))]`,
/// with all denominators guarded.
pub fn amplitude_b(params: &EitParameters, r: f64) -> Result<f64> {
    params.validate()?;
    params.guard_denominators()?;
    let EitParameters { lambda1, lambda2, tau1, tau2, n, .. } = *params;
    let h = params.h_field.eval_1d(r);
    let t = params.t_field.eval_1d(r);
    let d1 = 1.0 - n * tau1;
    let d2 = 1.0 - n * tau2;

    let prefactor = lambda1 * lambda2 * tau1 * h * t / (n * d1 * d1);
    let bracket = lambda1 * tau1 * tau1 - tau2 * (lambda1 * tau1 / d1 + (lambda1 * d1 - 1.0) / d2);
    Ok(prefactor * bracket)
}

/// `Xi(r) = A B + B^2`.
pub fn amplitude_xi(params: &EitParameters, r: f64) -> Result<f64> {
    let a = amplitude_a(params, r)?;
    let b = amplitude_b(params, r)?;
    Ok(xi_from(a, b))
}

pub(crate) fn xi_from(a: f64, b: f64) -> f64 {
    a * b + b * b
}

/// Two-time correlation of a sampled field under a stochastic measure:
/// `<Z(t), Z(t')> = Z(t) * int_{-inf}^{t} W(t - t') Z(t') dt'`,
/// with the pre-history handled as in the response module.
pub fn correlate_2time(
    z: &SampledPath,
    kernel: &MemoryKernel,
    t: f64,
    prehistory: Prehistory,
) -> Result<f64> {
    let i = z.index_of(t)?;
    let model = ResponseModel::new(1.0, *kernel)?;
    let filtered = respond(&model, z, prehistory)?;
    Ok(z.values()[i] * filtered.values()[i])
}

/// The correlation integral with an explicit overall amplitude:
/// `C(t) = xi * int_{-inf}^{t} e^{-n (t + t')} W(t - t') dt'`, evaluated by
/// adaptive quadrature in the lag variable.
pub fn eit_correlation_with_xi(
    xi: f64,
    n: f64,
    kernel: &MemoryKernel,
    t: f64,
) -> Result<f64> {
    if !n.is_finite() || n <= 0.0 {
        return Err(Error::Domain(format!("decay rate n must be positive, got {n}")));
    }
    if kernel.kind() == KernelKind::Delta {
        // sifting at the boundary atom: integrand at lag 0
        return Ok(xi * kernel.amplitude() * (-2.0 * n * t).exp());
    }
    let upper = kernel.kappa_window(n)?;
    let f = |u: f64| (-n * (2.0 * t - u)).exp() * kernel.eval(u).expect("lag >= 0");
    let q = quad::integrate(&f, 0.0, upper, 1e-300, 1e-12, 4096)?;
    Ok(xi * q.value)
}

/// `C(t)` for the full parameter set at position `r`.
pub fn eit_correlation(
    params: &EitParameters,
    r: f64,
    kernel: &MemoryKernel,
    t: f64,
) -> Result<f64> {
    let xi = amplitude_xi(params, r)?;
    eit_correlation_with_xi(xi, params.n, kernel, t)
}

/// Long-time factorized form `kappa * xi * e^{-2 n t}` with
/// `kappa = int_0^inf e^{n u} W(u) du` from the measure family.
pub fn van_hove_asymptote_with_xi(
    xi: f64,
    n: f64,
    kernel: &MemoryKernel,
    t: f64,
) -> Result<f64> {
    let kappa = kernel.asymptotic_amplitude(n)?;
    Ok(kappa * xi * (-2.0 * n * t).exp())
}

/// Van Hove asymptote (dynamic structure factor) for the full parameter set.
pub fn van_hove_asymptote(
    params: &EitParameters,
    r: f64,
    kernel: &MemoryKernel,
    t: f64,
) -> Result<f64> {
    let xi = amplitude_xi(params, r)?;
    van_hove_asymptote_with_xi(xi, params.n, kernel, t)
}

/// Short-lag shape of the correlation profile with the history pinned at
/// `t' = 0`, i.e. the normalized profile `e^{-n s} w(s) / w(0)` over the lag
/// `s = t - t'`.
#[derive(Debug, Clone, Copy)]
pub struct PlateauMetric {
    /// One-sided first derivative at zero lag.
    pub slope: f64,
    /// One-sided second derivative at zero lag.
    pub curvature: f64,
    /// `|curvature| / |slope|` — large for flat-start (plateau) profiles.
    pub ratio: f64,
}

/// Small-lag curvature ratio of the finite-history correlation profile. The
/// profile keeps the measure's lag structure visible (with infinite history
/// everything factorizes to a pure exponential in `t`), so colored and
/// gaussian measures separate cleanly: the unit Ornstein-Uhlenbeck profile
/// starts with slope `-(1 + n)` while the gaussian starts with slope `-n`.
pub fn plateau_metric(
    params: &EitParameters,
    kernel: &MemoryKernel,
    lag_grid: &[f64],
) -> Result<PlateauMetric> {
    params.validate()?;
    if kernel.kind() == KernelKind::Delta {
        return Err(Error::Domain(
            "delta measure has no finite-lag structure; plateau metric undefined".into(),
        ));
    }
    if lag_grid.len() < 4 {
        return Err(Error::Domain("lag grid needs at least 4 points".into()));
    }
    if lag_grid[0] != 0.0 {
        return Err(Error::Domain(format!("lag grid must start at 0, got {}", lag_grid[0])));
    }
    let h = lag_grid[1] - lag_grid[0];
    if !(h > 0.0) {
        return Err(Error::Domain("lag grid must be strictly increasing".into()));
    }
    for w in lag_grid.windows(2) {
        let step = w[1] - w[0];
        if (step - h).abs() > 1e-9 * h {
            return Err(Error::Domain("lag grid must be uniform".into()));
        }
    }

    let amplitude = kernel.amplitude();
    let profile: Vec<f64> = lag_grid
        .iter()
        .map(|&s| (-params.n * s).exp() * kernel.eval(s).expect("lag >= 0") / amplitude)
        .collect();
    let c = &profile;
    let slope = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h);
    let curvature = (2.0 * c[0] - 5.0 * c[1] + 4.0 * c[2] - c[3]) / (h * h);
    let ratio = if slope == 0.0 { f64::INFINITY } else { (curvature / slope).abs() };
    Ok(PlateauMetric { slope, curvature, ratio })
}
