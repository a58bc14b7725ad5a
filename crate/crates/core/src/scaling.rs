//! Uniparametric state-space scaling: the affine contraction of a point
//! configuration toward an equilibrium point-cell, the rescaled n-point
//! observable, and the coarse-graining iteration with its weak-convergence
//! diagnostics.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::numeric::stats;

/// A configuration of points in 1- or 2-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    nu: usize,
    points: Vec<Vec<f64>>,
}

impl Configuration {
    pub fn new(nu: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if !(1..=2).contains(&nu) {
            return Err(Error::Validation(format!("spatial dimension must be 1 or 2, got {nu}")));
        }
        if points.is_empty() {
            return Err(Error::Validation("configuration needs at least one point".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != nu {
                return Err(Error::Validation(format!(
                    "point {i} has {} coordinates, expected {nu}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("point {i} has non-finite coordinates")));
            }
        }
        Ok(Self { nu, points })
    }

    pub fn one_dim(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one point by construction
    }
}

/// The scaling map parameters: contraction ratio `xi` in [0, 1], the
/// equilibrium point `x_star`, the scaling-function exponent `Delta` in
/// `Sigma(xi) = xi^{-Delta}`, and the field the observable is built from.
#[derive(Debug, Clone)]
pub struct ScalingSpec {
    pub xi: f64,
    pub x_star: Vec<f64>,
    pub sigma_exponent: f64,
    pub field: Field,
}

impl ScalingSpec {
    pub fn new(xi: f64, x_star: Vec<f64>, sigma_exponent: f64, field: Field) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::Validation(format!("xi must lie in [0, 1], got {xi}")));
        }
        if x_star.is_empty() || x_star.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("x_star must be finite and non-empty".into()));
        }
        if !sigma_exponent.is_finite() {
            return Err(Error::Validation("sigma exponent must be finite".into()));
        }
        Ok(Self { xi, x_star, sigma_exponent, field })
    }

    fn check_dim(&self, c: &Configuration) -> Result<()> {
        if self.x_star.len() != c.nu() {
            return Err(Error::Domain(format!(
                "x_star has {} coordinates but the configuration lives in {} dimensions",
                self.x_star.len(),
                c.nu()
            )));
        }
        Ok(())
    }
}

/// `chi_xi(x) = x_star + xi (x - x_star)` applied to every point.
/// `xi = 1` is exactly the identity and `xi = 0` lands exactly on `x_star`.
pub fn scale_points(c: &Configuration, s: &ScalingSpec) -> Result<Configuration> {
    s.check_dim(c)?;
    if s.xi == 1.0 {
        return Ok(c.clone());
    }
    let points = c
        .points()
        .iter()
        .map(|p| {
            p.iter()
                .zip(&s.x_star)
                .map(|(x, star)| star + s.xi * (x - star))
                .collect()
        })
        .collect();
    Configuration::new(c.nu(), points)
}

/// The scaled n-point observable
/// `Lambda_xi A = xi^{-Delta n} * prod_i phi(chi_xi(x_i))`.
pub fn scale_observable(c: &Configuration, s: &ScalingSpec) -> Result<f64> {
    s.check_dim(c)?;
    if s.xi == 0.0 && s.sigma_exponent > 0.0 {
        return Err(Error::Domain(
            "xi = 0 with a positive scaling exponent makes Sigma(xi) singular".into(),
        ));
    }
    let n = c.len() as f64;
    let scaled = scale_points(c, s)?;
    let prefactor = if s.sigma_exponent == 0.0 {
        1.0
    } else {
        s.xi.powf(-s.sigma_exponent * n)
    };
    let product: f64 = scaled.points().iter().map(|p| s.field.eval(p)).product();
    Ok(prefactor * product)
}

/// One step of the coarse-graining iteration.
#[derive(Debug, Clone)]
pub struct CoarseGrainStep {
    pub step: usize,
    pub configuration: Configuration,
    /// Largest distance of any point from `x_star`.
    pub max_distance: f64,
    /// Energy distance of the empirical point distribution to the
    /// degenerate distribution at `x_star`.
    pub energy_distance: f64,
}

/// Iterate the scaling map `k` times and report, after each application, the
/// contraction diagnostics. For `xi < 1` both distances shrink geometrically
/// with ratio `xi`.
pub fn coarse_grain_sequence(
    c: &Configuration,
    s: &ScalingSpec,
    k: usize,
) -> Result<Vec<CoarseGrainStep>> {
    if k < 1 {
        return Err(Error::Domain("need at least one iteration".into()));
    }
    s.check_dim(c)?;
    let mut current = c.clone();
    let mut sequence = Vec::with_capacity(k);
    for step in 1..=k {
        current = scale_points(&current, s)?;
        let max_distance = current
            .points()
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&s.x_star)
                    .map(|(x, star)| (x - star) * (x - star))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let energy_distance = stats::energy_distance_to_point(current.points(), &s.x_star);
        sequence.push(CoarseGrainStep {
            step,
            configuration: current.clone(),
            max_distance,
            energy_distance,
        });
    }
    Ok(sequence)
}
