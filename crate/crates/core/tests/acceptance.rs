//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its runtime. Tolerances are pinned in the assertions.

use std::time::Instant;

use noneq_core::correlations::{eit_correlation_with_xi, van_hove_asymptote_with_xi};
use noneq_core::hysteresis::{loop_area, phasor_loop_area, run_cycle, DriveCycle};
use noneq_core::measures::{KernelKind, MemoryKernel};
use noneq_core::modular::{
    gibbs_state, kms_residual, modular_evolve, sample, series_evolve, DensityMatrix, Observable,
    QuantumSystem,
};
use noneq_core::numeric::stats;
use noneq_core::response::{markovian_limit_scan, mcv_residual, Prehistory, ResponseModel};
use noneq_core::scaling::{coarse_grain_sequence, scale_points, Configuration, ScalingSpec};
use noneq_core::sdd::{
    correlation_from_sdd, correlation_table, poisson_sdd, sdd_from_correlation, validate_sdd,
    Volume,
};
use noneq_core::stochastic::{empirical_autocorrelation, simulate_ou, ProcessSpec, SampledPath};
use noneq_core::Field;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("acceptance {id} ({name}): PASS in {elapsed:.2}s (limit {limit_s}s)");
    assert!(elapsed < limit_s, "criterion {id} exceeded its {limit_s}s runtime limit: {elapsed:.2}s");
}

fn ou_unit() -> MemoryKernel {
    MemoryKernel::new(KernelKind::OrnsteinUhlenbeck, 1.0, 1.0).unwrap()
}

#[test]
fn criterion_1_kappa_identity() {
    let t0 = Instant::now();
    for i in 1..=9 {
        let n = 0.1 * i as f64;
        let kappa = ou_unit().asymptotic_amplitude(n).unwrap();
        assert!(
            (kappa - 1.0 / (1.0 - n)).abs() < 1e-8,
            "kappa({n}) = {kappa} misses 1/(1-n) = {}",
            1.0 / (1.0 - n)
        );
    }
    let n = 0.5;
    let xi = 1.0;
    for k in 0..=100 {
        let t = 0.1 * k as f64;
        let direct = eit_correlation_with_xi(xi, n, &ou_unit(), t).unwrap();
        let factored = van_hove_asymptote_with_xi(xi, n, &ou_unit(), t).unwrap();
        assert!(
            (direct - factored).abs() <= 1e-8 * factored.abs(),
            "t = {t}: correlation {direct} vs asymptote {factored}"
        );
    }
    report(1, "kappa identity", t0, 1.0);
}

#[test]
fn criterion_2_markovian_limit() {
    let t0 = Instant::now();
    let dt = 1e-3;
    let drive = SampledPath::from_fn(0.0, dt, 4001, |t| (-((t - 2.0) / 0.5).powi(2)).exp())
        .unwrap();
    let scan = markovian_limit_scan(1.0, &drive, &[1.0, 0.1, 0.01]).unwrap();
    for w in scan.windows(2) {
        assert!(
            w[1].1 < w[0].1,
            "sup distance must decrease with tau: {:?} then {:?}",
            w[0],
            w[1]
        );
    }
    report(2, "markovian limit", t0, 1.0);
}

#[test]
fn criterion_3_mcv_order() {
    let t0 = Instant::now();
    let kernel = MemoryKernel::new(KernelKind::Exponential, 1.0, 1.0).unwrap();
    let model = ResponseModel::new(1.0, kernel).unwrap();
    let dts = [1e-2, 5e-3, 2.5e-3];
    let residuals: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let n = (4.0 / dt) as usize + 1;
            let drive = SampledPath::from_fn(0.0, dt, n, |t| (2.0 * t).sin()).unwrap();
            mcv_residual(&model, &drive, Prehistory::Hold).unwrap()
        })
        .collect();
    let slope = (residuals[0] / residuals[2]).ln() / (dts[0] / dts[2]).ln();
    assert!(
        (slope - 2.0).abs() <= 0.2,
        "log-log slope {slope} outside 2.0 +- 0.2 (residuals {residuals:?})"
    );
    report(3, "MCV differential form", t0, 5.0);
}

#[test]
fn criterion_4_kms_condition() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut flagged = 0usize;
    for draw in 0..100 {
        let dim = 2 + draw % 5; // dims 2..=6
        let beta = 0.3 + rng.random::<f64>() * 1.4;
        let tau = -1.0 + rng.random::<f64>() * 2.0;
        let sys = QuantumSystem::new(sample::random_hermitian(dim, &mut rng), beta).unwrap();
        let n = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
        let m = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();

        let gibbs = gibbs_state(&sys).unwrap();
        let r = kms_residual(&sys, &gibbs, &n, &m, tau).unwrap();
        assert!(r < 1e-10, "draw {draw} (dim {dim}): Gibbs KMS residual {r}");

        // perturbed non-Gibbs state: blend the Gibbs state with a random one
        let perturbed = DensityMatrix::new(
            gibbs.matrix() * nalgebra::Complex::new(0.5, 0.0)
                + sample::random_density(dim, &mut rng) * nalgebra::Complex::new(0.5, 0.0),
        )
        .unwrap();
        if kms_residual(&sys, &perturbed, &n, &m, tau).unwrap() > 1e-3 {
            flagged += 1;
        }
    }
    assert!(flagged >= 95, "only {flagged}/100 perturbed states exceeded the 1e-3 residual");
    report(4, "KMS condition", t0, 5.0);
}

#[test]
fn criterion_5_modular_series() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tau = 0.1;
    for dim in 2..=4 {
        let h = sample::random_hermitian(dim, &mut rng);
        let sys = QuantumSystem::new(h, 1.0).unwrap();
        let a = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
        let exact = modular_evolve(&sys, &a, tau).unwrap();
        let series = series_evolve(&sys, &a, tau, 12).unwrap();
        let defect = (series.matrix() - exact.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(defect < 1e-12, "dim {dim}: series defect {defect} at N = 12");

        // factorial decay: each added order shrinks the residual
        let mut prev = f64::INFINITY;
        let mut shrinking = 0;
        for n in 0..=8 {
            let s = series_evolve(&sys, &a, tau, n).unwrap();
            let r = (s.matrix() - exact.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            if r < prev {
                shrinking += 1;
            }
            prev = r;
        }
        assert!(shrinking >= 8, "dim {dim}: residuals not contracting order over order");
    }
    report(5, "modular series", t0, 1.0);
}

#[test]
fn criterion_6_sdd_identities() {
    let t0 = Instant::now();

    // Poisson oracle passes the defining conditions
    let volume = Volume::uniform(1.0, 4).unwrap();
    let sub = Volume::new(vec!["c0".into(), "c1".into()], vec![0.25, 0.25]).unwrap();
    let system = poisson_sdd(1.0, &volume, 20).unwrap();
    let report_sdd = validate_sdd(&system, &sub, 1e-8).unwrap();
    assert!(report_sdd.pass, "Poisson oracle failed validation: {report_sdd:?}");

    // correlation -> inversion round trip at max order 20
    let v2 = Volume::uniform(1.0, 2).unwrap();
    let d2 = poisson_sdd(1.0, &v2, 20).unwrap();
    let corr = correlation_table(&d2).unwrap();
    for n in 0..=6 {
        let inv = sdd_from_correlation(&corr, n, 1e-6).unwrap();
        for (a, b) in inv.table.values().iter().zip(d2.density(n).values()) {
            assert!((a - b).abs() < 1e-8, "order {n}: round trip {a} vs {b}");
        }
    }

    // brute-force occupation enumeration on a 3-cell volume, occupancy <= 6;
    // the identity is algebraic, so the capped system is built directly
    let v3 = Volume::new(vec!["a".into(), "b".into(), "c".into()], vec![0.2, 0.35, 0.45])
        .unwrap();
    let z3 = 0.35f64;
    let cap = 6usize;
    let prefactor = (-z3 * v3.total_measure()).exp();
    let tables = (0..=cap)
        .map(|n| {
            let fact: f64 = (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
            noneq_core::sdd::table::SymmetricTable::constant(
                v3.len(),
                n,
                prefactor * z3.powi(n as i32) / fact,
            )
        })
        .collect();
    let d3 = noneq_core::sdd::DensitySystem::new(v3.clone(), tables).unwrap();
    for n in 0..=3 {
        let rho = correlation_from_sdd(&d3, n).unwrap();
        for (idx, x) in noneq_core::sdd::table::multisets(3, n).enumerate() {
            let brute = occupation_oracle(&d3, &x);
            let series = rho.values()[idx];
            assert!(
                (series - brute).abs() < 1e-12,
                "order {n} tuple {x:?}: series {series} vs enumeration {brute}"
            );
        }
    }
    report(6, "SDD identities", t0, 5.0);
}

/// Factorial-moment oracle: enumerate all occupation configurations.
fn occupation_oracle(d: &noneq_core::sdd::DensitySystem, x: &[usize]) -> f64 {
    use noneq_core::sdd::table::{multisets, ordered_multiplicity};
    let cells = d.volume().len();
    let counts = |tuple: &[usize]| {
        let mut k = vec![0usize; cells];
        for &c in tuple {
            k[c] += 1;
        }
        k
    };
    let falling = |a: usize, b: usize| -> f64 {
        if a < b {
            0.0
        } else {
            ((a - b + 1)..=a).map(|v| v as f64).product::<f64>().max(1.0)
        }
    };
    let x_counts = counts(x);
    let mut acc = 0.0;
    for q in 0..=d.max_order() {
        for k_tuple in multisets(cells, q) {
            let measure: f64 = k_tuple.iter().map(|&i| d.volume().measures()[i]).product();
            let prob = ordered_multiplicity(&k_tuple) * measure * d.density(q).get_sorted(&k_tuple);
            let k = counts(&k_tuple);
            let weight: f64 = (0..cells).map(|c| falling(k[c], x_counts[c])).product();
            acc += prob * weight;
        }
    }
    let x_measure: f64 = x.iter().map(|&i| d.volume().measures()[i]).product();
    acc / x_measure
}

#[test]
fn criterion_7_ou_stationarity() {
    let t0 = Instant::now();
    let theta = 1.0;
    let sigma = 2.0f64.sqrt(); // stationary variance 1
    let dt = 1e-2;
    let mut seed_failures = 0usize;
    for seed in 0..20u64 {
        let path = simulate_ou(&ProcessSpec { theta, sigma, x0: 0.0, dt, steps: 200_000, seed })
            .unwrap();
        let burn = (10.0 / theta / dt) as usize;
        let tail = &path.values()[burn..];
        let sq: Vec<f64> = tail.iter().map(|x| x * x).collect();
        let var = stats::mean(&sq);
        let var_se = stats::batch_mean_standard_error(&sq, 50);
        let mut ok = (var - sigma * sigma / (2.0 * theta)).abs() < 3.0 * var_se;

        let ac = empirical_autocorrelation(&path, 3.0 / theta, Some(theta)).unwrap();
        for idx in (30..=300).step_by(30) {
            let (u, r) = ac.lags[idx];
            let se = ac.standard_error(idx);
            if (r - (-theta * u).exp()).abs() >= 3.0 * se {
                ok = false;
            }
        }
        if !ok {
            seed_failures += 1;
        }
    }
    assert!(seed_failures <= 1, "{seed_failures}/20 seeds failed the 3-sigma checks");
    report(7, "OU stationarity", t0, 30.0);
}

#[test]
fn criterion_8_scaling_convergence() {
    let t0 = Instant::now();

    // geometric contraction, ratio exact to 1e-12
    let config = Configuration::new(
        2,
        vec![vec![1.0, 0.3], vec![-0.8, 1.2], vec![0.05, -0.6], vec![2.0, 2.0]],
    )
    .unwrap();
    let spec = ScalingSpec::new(0.7, vec![0.1, 0.2], 0.0, Field::constant(1.0)).unwrap();
    let seq = coarse_grain_sequence(&config, &spec, 12).unwrap();
    for w in seq.windows(2) {
        let ratio = w[1].max_distance / w[0].max_distance;
        assert!((ratio - 0.7).abs() < 1e-12, "contraction ratio {ratio} != xi");
        assert!(w[1].energy_distance < w[0].energy_distance, "distance must decrease");
    }

    // composition law
    let spec_a = ScalingSpec::new(0.8, vec![0.1, 0.2], 0.0, Field::constant(1.0)).unwrap();
    let spec_b = ScalingSpec::new(0.45, vec![0.1, 0.2], 0.0, Field::constant(1.0)).unwrap();
    let spec_ab = ScalingSpec::new(0.8 * 0.45, vec![0.1, 0.2], 0.0, Field::constant(1.0)).unwrap();
    let chained = scale_points(&scale_points(&config, &spec_a).unwrap(), &spec_b).unwrap();
    let direct = scale_points(&config, &spec_ab).unwrap();
    for (p, q) in chained.points().iter().zip(direct.points()) {
        for (a, b) in p.iter().zip(q) {
            assert!((a - b).abs() < 1e-12, "composition law violated: {a} vs {b}");
        }
    }
    report(8, "scaling convergence", t0, 1.0);
}

#[test]
fn criterion_9_hysteresis() {
    let t0 = Instant::now();
    let tau = 1.0;
    let chi0 = 1.0;
    let amplitude = 1.0;
    let kernel = MemoryKernel::new(KernelKind::Exponential, 1.0, tau).unwrap();
    let model = ResponseModel::new(chi0, kernel).unwrap();

    let run_at = |omega: f64| -> f64 {
        let period = 2.0 * std::f64::consts::PI / omega;
        let cycle = DriveCycle {
            amplitude,
            omega,
            periods: 2,
            dt: (period / 400.0).min(tau / 20.0),
        };
        let result = run_cycle(&model, &cycle).unwrap();
        loop_area(&result.drive, &result.response, result.window).unwrap()
    };

    // area matches the phasor closed form across two decades of omega tau
    let mut areas = Vec::new();
    let points = 25usize;
    for k in 0..points {
        let omega = 0.1 * 100.0f64.powf(k as f64 / (points - 1) as f64);
        let area = run_at(omega).abs();
        let expected = phasor_loop_area(chi0, amplitude, omega, tau);
        assert!(
            (area - expected).abs() <= 1e-3 * expected,
            "omega tau = {omega}: area {area} vs phasor {expected}"
        );
        areas.push((omega, area));
    }

    // argmax of the scan sits within a factor 1.5 of omega tau = 1
    let (omega_max, _) = areas
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!(
        (2.0 / 3.0..=1.5).contains(&(omega_max * tau)),
        "loop area peaks at omega tau = {omega_max}, expected near 1"
    );

    // quasi-static limit: areas shrink as the drive slows
    let slow: Vec<f64> = [1.0, 0.1, 0.01].iter().map(|&w| run_at(w).abs()).collect();
    assert!(slow[0] > slow[1] && slow[1] > slow[2], "areas must vanish quasi-statically: {slow:?}");

    report(9, "hysteresis loop area", t0, 10.0);
}
