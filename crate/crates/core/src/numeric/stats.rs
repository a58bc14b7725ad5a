//! Small statistical helpers shared by the scaling and process modules.

/// Mean of `2 E|X - Y| - E|X - X'| - E|Y - Y'|` between two empirical
/// samples: the energy distance. Zero iff the empirical distributions agree;
/// it scales linearly under a common dilation of both samples, which is what
/// the coarse-graining diagnostics rely on.
pub fn energy_distance(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty(), "energy distance needs non-empty samples");
    let mut sx = xs.to_vec();
    let mut sy = ys.to_vec();
    sx.sort_by(f64::total_cmp);
    sy.sort_by(f64::total_cmp);

    let cross = mean_abs_cross(&sx, &sy);
    let within_x = mean_abs_within(&sx);
    let within_y = mean_abs_within(&sy);
    // non-negative by theory; clamp away cancellation roundoff
    (2.0 * cross - within_x - within_y).max(0.0)
}

/// Energy distance between an empirical sample of points in `R^nu` and the
/// degenerate distribution at `target`. The within-target term vanishes.
pub fn energy_distance_to_point(points: &[Vec<f64>], target: &[f64]) -> f64 {
    assert!(!points.is_empty());
    let n = points.len() as f64;
    let cross: f64 = points.iter().map(|p| euclidean(p, target)).sum::<f64>() / n;
    let mut within = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            within += euclidean(p, q);
        }
    }
    within *= 2.0 / (n * n);
    (2.0 * cross - within).max(0.0)
}

fn euclidean(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `mean_{i,j} |x_i - y_j|` for pre-sorted inputs, via prefix sums.
fn mean_abs_cross(sx: &[f64], sy: &[f64]) -> f64 {
    let mut prefix = Vec::with_capacity(sx.len() + 1);
    prefix.push(0.0);
    for &x in sx {
        prefix.push(prefix.last().unwrap() + x);
    }
    let m = sx.len();
    let total_x = prefix[m];

    let mut sum = 0.0;
    for &y in sy {
        // number of x at or below y
        let k = sx.partition_point(|&x| x <= y);
        let below = prefix[k];
        sum += y * k as f64 - below + (total_x - below) - y * (m - k) as f64;
    }
    sum / (m as f64 * sy.len() as f64)
}

/// `mean_{i,j} |x_i - x_j|` for a pre-sorted input.
fn mean_abs_within(sx: &[f64]) -> f64 {
    let n = sx.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut running = 0.0;
    for (i, &x) in sx.iter().enumerate() {
        // x exceeds each of the i earlier values
        sum += x * i as f64 - running;
        running += x;
    }
    2.0 * sum / (n as f64 * n as f64)
}

/// Kendall rank correlation between `values` and their index order.
/// -1 for a strictly decreasing sequence, +1 for strictly increasing,
/// near 0 for exchangeable noise.
pub fn kendall_trend(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let d = values[j] - values[i];
            if d > 0.0 {
                concordant += 1;
            } else if d < 0.0 {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    (concordant - discordant) as f64 / pairs
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Monte-Carlo standard error of the sample mean of `xs` by batch means,
/// which stays honest for autocorrelated series.
pub fn batch_mean_standard_error(xs: &[f64], batches: usize) -> f64 {
    assert!(batches >= 2 && xs.len() >= 2 * batches);
    let width = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&xs[b * width..(b + 1) * width]))
        .collect();
    (variance(&means) / batches as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn energy_distance_brute(xs: &[f64], ys: &[f64]) -> f64 {
        let cross: f64 = xs
            .iter()
            .flat_map(|x| ys.iter().map(move |y| (x - y).abs()))
            .sum::<f64>()
            / (xs.len() * ys.len()) as f64;
        let wx: f64 = xs
            .iter()
            .flat_map(|a| xs.iter().map(move |b| (a - b).abs()))
            .sum::<f64>()
            / (xs.len() * xs.len()) as f64;
        let wy: f64 = ys
            .iter()
            .flat_map(|a| ys.iter().map(move |b| (a - b).abs()))
            .sum::<f64>()
            / (ys.len() * ys.len()) as f64;
        2.0 * cross - wx - wy
    }

    #[test]
    fn matches_brute_force() {
        let xs = [0.3, -1.2, 4.0, 0.7, 2.2, -0.1];
        let ys = [1.0, 0.0, -2.5, 3.3];
        assert_relative_eq!(
            energy_distance(&xs, &ys),
            energy_distance_brute(&xs, &ys),
            epsilon = 1e-12
        );
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let xs = [1.0, 2.0, 3.0, -1.0];
        assert_relative_eq!(energy_distance(&xs, &xs), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn point_distance_scales_linearly() {
        let pts: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, -1.0]];
        let half: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] * 0.5, p[1] * 0.5]).collect();
        let d0 = energy_distance_to_point(&pts, &[0.0, 0.0]);
        let d1 = energy_distance_to_point(&half, &[0.0, 0.0]);
        assert_relative_eq!(d1, 0.5 * d0, epsilon = 1e-12);
    }

    #[test]
    fn kendall_detects_monotone_trends() {
        assert_relative_eq!(kendall_trend(&[5.0, 4.0, 3.0, 2.0]), -1.0);
        assert_relative_eq!(kendall_trend(&[1.0, 2.0, 3.0]), 1.0);
    }
}
