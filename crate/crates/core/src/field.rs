//! Scalar fields over position (or temperature), used by the scaling
//! observable and the correlation amplitudes.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A scalar function of a point. The named variants cover the CLI presets
/// (`const:c`, `linear:a,b` meaning `a + b . x`); `Custom` is for library and
/// test use.
#[derive(Clone)]
pub enum Field {
    Const(f64),
    /// `intercept + slope . x` (dot product over however many coordinates
    /// the point has; extra slopes are an error at evaluation).
    Linear { intercept: f64, slope: Vec<f64> },
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Field {
    pub fn constant(c: f64) -> Self {
        Field::Const(c)
    }

    pub fn linear_1d(intercept: f64, slope: f64) -> Self {
        Field::Linear { intercept, slope: vec![slope] }
    }

    pub fn custom<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Field::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Field::Const(c) => *c,
            Field::Linear { intercept, slope } => {
                intercept + slope.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>()
            }
            Field::Custom(f) => f(x),
        }
    }

    /// Evaluate at a scalar position.
    pub fn eval_1d(&self, x: f64) -> f64 {
        self.eval(&[x])
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Const(c) => write!(f, "const:{c}"),
            Field::Linear { intercept, slope } => write!(f, "linear:{intercept},{slope:?}"),
            Field::Custom(_) => write!(f, "custom"),
        }
    }
}

/// Preset grammar: `const:c` or `linear:a,b[,b2,...]`.
impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Validation(format!("field preset needs parameters: '{s}'")))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Validation(format!("cannot parse field parameter '{p}'")))
            })
            .collect::<Result<_>>()?;
        match head.to_ascii_lowercase().as_str() {
            "const" if nums.len() == 1 => Ok(Field::Const(nums[0])),
            "const" => Err(Error::Validation("const field takes exactly one parameter".into())),
            "linear" if nums.len() >= 2 => {
                Ok(Field::Linear { intercept: nums[0], slope: nums[1..].to_vec() })
            }
            "linear" => {
                Err(Error::Validation("linear field needs intercept and slope: linear:a,b".into()))
            }
            other => Err(Error::Validation(format!(
                "unknown field preset '{other}' (expected const|linear)"
            ))),
        }
    }
}
