//! Adaptive Gauss-Kronrod quadrature on finite intervals.
//!
//! A single 7-15 pair per panel with bisection of the worst panel until the
//! summed error estimate meets the requested tolerance. Semi-infinite
//! integrals are handled by the callers, which supply an analytic tail bound
//! for their integrand family and keep extending the finite window until the
//! bound is negligible.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights. Standard QUADPACK constants.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One G7-K15 evaluation over `[a, b]`: returns the Kronrod value and an
/// error estimate from the Gauss/Kronrod difference.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            // odd Kronrod indices are the embedded Gauss nodes
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptively integrate `f` over `[a, b]` to `abs_tol` or `rel_tol`,
/// whichever is met first.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("invalid integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, panels: 0 });
    }

    let (value, err) = gk15(f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol || total_err <= rel_tol * total.abs() {
            return Ok(Quadrature { value: total, error: total_err, panels: panels.len() });
        }
        if panels.len() >= max_panels {
            return Err(Error::NonConvergence(format!(
                "quadrature error {total_err:.3e} above tolerance after {} panels on [{a}, {b}]",
                panels.len()
            )));
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .expect("non-empty panel list");
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(f, pa, mid);
        let (v2, e2) = gk15(f, mid, pb);
        panels.push(Panel { a: pa, b: mid, value: v1, err: e1 });
        panels.push(Panel { a: mid, b: pb, value: v2, err: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        // K15 is exact for polynomials far beyond cubics
        let q = integrate(&|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 1e-12, 64).unwrap();
        // antiderivative x^4/4 - x^2 + x evaluated on [-1, 3]
        assert_relative_eq!(q.value, (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0), epsilon = 1e-12);
    }

    #[test]
    fn decaying_exponential() {
        let q = integrate(&|x: f64| (-x).exp(), 0.0, 40.0, 1e-12, 1e-12, 256).unwrap();
        assert_relative_eq!(q.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_needs_subdivision() {
        let q = integrate(&|x: f64| (20.0 * x).sin(), 0.0, 1.0, 1e-12, 1e-12, 512).unwrap();
        let exact = (1.0 - (20.0_f64).cos()) / 20.0;
        assert_relative_eq!(q.value, exact, epsilon = 1e-10);
        assert!(q.panels > 1);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(integrate(&|x: f64| x, 1.0, 0.0, 1e-8, 1e-8, 16).is_err());
        assert!(integrate(&|x: f64| x, 0.0, f64::INFINITY, 1e-8, 1e-8, 16).is_err());
    }
}
