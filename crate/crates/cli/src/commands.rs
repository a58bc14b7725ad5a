//! Scenario implementations behind the subcommands. Each takes fully
//! resolved parameters, writes its primary output plus a run manifest next
//! to it, and leaves no other files behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noneq_core::correlations::{
    eit_correlation_with_xi, van_hove_asymptote_with_xi, EitParameters,
};
use noneq_core::hysteresis::{loop_area, phase_lag, run_cycle, DriveCycle};
use noneq_core::measures::{KernelKind, MemoryKernel};
use noneq_core::modular::{
    gibbs_state, kms_residual, sample, CMatrix, DensityMatrix, Observable, QuantumSystem, C64,
};
use noneq_core::response::{respond, Prehistory, ResponseModel};
use noneq_core::scaling::{coarse_grain_sequence, Configuration, ScalingSpec};
use noneq_core::sdd::{poisson_sdd, validate_sdd, DensitySystem, Volume};
use noneq_core::stochastic::{simulate_ou, ProcessSpec};
use noneq_core::Field;

use crate::config::Section;
use crate::{fail_input, io, CliError};

/// Write the run manifest next to the primary output
/// (`<output>.manifest.json`).
pub fn write_manifest(
    command: &str,
    out: &Path,
    params: &Section,
    seed: u64,
    started: Instant,
) -> Result<PathBuf, CliError> {
    let manifest = serde_json::json!({
        "command": command,
        "parameters": params,
        "seed": seed,
        "library_version": noneq_core::VERSION,
        "wall_time_ms": started.elapsed().as_millis() as u64,
        "output": out.display().to_string(),
    });
    let path = PathBuf::from(format!("{}.manifest.json", out.display()));
    std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()))
        .map_err(|e| crate::fail_compute(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// `a:b:step` inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(fail_input(format!("grid must be start:stop:step, got '{spec}'")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| fail_input(format!("bad grid number '{p}'"))))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || stop < start {
        return Err(fail_input(format!("grid '{spec}' must have stop >= start and step > 0")));
    }
    let count = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// `lo:hi:logN` — N log-spaced points from lo to hi inclusive.
pub fn parse_log_scan(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 || !parts[2].starts_with("log") {
        return Err(fail_input(format!("scan must be lo:hi:logN, got '{spec}'")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| fail_input(format!("bad scan bound '{}'", parts[0])))?;
    let hi: f64 = parts[1].parse().map_err(|_| fail_input(format!("bad scan bound '{}'", parts[1])))?;
    let n: usize = parts[2][3..]
        .parse()
        .map_err(|_| fail_input(format!("bad scan count '{}'", parts[2])))?;
    if !(lo > 0.0) || hi <= lo || n < 2 {
        return Err(fail_input(format!("scan '{spec}' needs 0 < lo < hi and at least 2 points")));
    }
    let ratio = hi / lo;
    Ok((0..n).map(|k| lo * ratio.powf(k as f64 / (n - 1) as f64)).collect())
}

pub fn parse_prehistory(s: &str) -> Result<Prehistory, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "hold" => Ok(Prehistory::Hold),
        "zero" => Ok(Prehistory::Zero),
        other => Err(fail_input(format!("prehistory must be hold|zero, got '{other}'"))),
    }
}

/// Build the binary-mixture parameters from an anonymous-section params file
/// plus overrides already merged by the caller.
pub fn eit_from_section(mut section: Section) -> Result<EitParameters, CliError> {
    let mut need = |key: &str| -> Result<f64, CliError> {
        section
            .remove(key)
            .ok_or_else(|| fail_input(format!("params file is missing '{key}'")))?
            .parse::<f64>()
            .map_err(|_| fail_input(format!("params key '{key}' is not a number")))
    };
    let lambda1 = need("lambda1")?;
    let lambda2 = need("lambda2")?;
    let tau1 = need("tau1")?;
    let tau2 = need("tau2")?;
    let n = need("n")?;

    let mut field = |key: &str, default: &str| -> Result<Field, CliError> {
        section
            .remove(key)
            .unwrap_or_else(|| default.to_string())
            .parse::<Field>()
            .map_err(CliError::from)
    };
    let h_field = field("h_field", "const:1")?;
    let t_field = field("t_field", "const:1")?;
    let cp = field("cp", "linear:0,1")?;

    let t_upper = section
        .remove("t_upper")
        .map(|v| v.parse::<f64>().map_err(|_| fail_input("t_upper is not a number")))
        .transpose()?
        .unwrap_or(1.0);
    let eps_t = section
        .remove("eps_t")
        .map(|v| v.parse::<f64>().map_err(|_| fail_input("eps_t is not a number")))
        .transpose()?
        .unwrap_or(1e-6 * t_upper);

    if let Some(key) = section.keys().next() {
        return Err(fail_input(format!("unknown params key '{key}'")));
    }
    let params = EitParameters { lambda1, lambda2, tau1, tau2, n, h_field, t_field, cp, t_upper, eps_t };
    params.validate()?;
    Ok(params)
}

pub struct RespondRun {
    pub kernel: MemoryKernel,
    pub chi0: f64,
    pub drive: PathBuf,
    pub prehistory: Prehistory,
    pub out: PathBuf,
}

pub fn respond_cmd(run: &RespondRun) -> Result<(), CliError> {
    let drive = io::read_path_csv(&run.drive)?;
    let model = ResponseModel::new(run.chi0, run.kernel)?;
    let response = respond(&model, &drive, run.prehistory)?;
    io::write_path_csv(&run.out, &response, "response")
}

pub struct CorrelateRun {
    pub params: Option<EitParameters>,
    pub xi_override: Option<f64>,
    pub kernel: MemoryKernel,
    pub t_grid: Vec<f64>,
    pub r: f64,
    pub out: PathBuf,
    /// true: the factored van Hove asymptote; false: the direct integral.
    pub asymptote: bool,
}

pub fn correlate_cmd(run: &CorrelateRun) -> Result<(), CliError> {
    let (xi, n) = match (&run.params, run.xi_override) {
        (Some(p), Some(xi)) => (xi, p.n),
        (Some(p), None) => {
            if let Some(w) = p.cutoff_warning() {
                eprintln!("warning: {w}");
            }
            (noneq_core::correlations::amplitude_xi(p, run.r)?, p.n)
        }
        (None, Some(_)) => {
            return Err(fail_input(
                "an explicit --xi still needs the decay rate n from a params file".into(),
            ))
        }
        (None, None) => return Err(fail_input("need --params (and optionally --xi)")),
    };
    let rows: Vec<Vec<f64>> = run
        .t_grid
        .iter()
        .map(|&t| {
            let v = if run.asymptote {
                van_hove_asymptote_with_xi(xi, n, &run.kernel, t)
            } else {
                eit_correlation_with_xi(xi, n, &run.kernel, t)
            };
            v.map(|value| vec![t, value])
        })
        .collect::<Result<_, _>>()?;
    io::write_table_csv(&run.out, "t,correlation", &rows)
}

pub struct KmsRun {
    pub dim: usize,
    pub beta: f64,
    pub tau: f64,
    pub samples: usize,
    pub seed: u64,
    pub hamiltonian: Option<CMatrix>,
    pub out: PathBuf,
}

pub fn kms_cmd(run: &KmsRun) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut rows = Vec::with_capacity(run.samples);
    for index in 0..run.samples {
        let h = match &run.hamiltonian {
            Some(m) => m.clone(),
            None => sample::random_hermitian(run.dim, &mut rng),
        };
        let sys = QuantumSystem::new(h, run.beta)?;
        let obs_n = Observable::new(sample::random_hermitian(run.dim, &mut rng))?;
        let obs_m = Observable::new(sample::random_hermitian(run.dim, &mut rng))?;

        let gibbs = gibbs_state(&sys)?;
        let gibbs_residual = kms_residual(&sys, &gibbs, &obs_n, &obs_m, run.tau)?;

        let perturbed = DensityMatrix::new(
            gibbs.matrix() * C64::new(0.5, 0.0)
                + sample::random_density(run.dim, &mut rng) * C64::new(0.5, 0.0),
        )?;
        let perturbed_residual = kms_residual(&sys, &perturbed, &obs_n, &obs_m, run.tau)?;
        rows.push(vec![index as f64, gibbs_residual, perturbed_residual]);
    }
    io::write_table_csv(&run.out, "sample,gibbs_residual,perturbed_residual", &rows)
}

pub enum SddSource {
    File(PathBuf),
    Poisson { z: f64, cells: usize, max_order: usize },
}

pub struct SddCheckRun {
    pub source: SddSource,
    pub sub_cells: Vec<String>,
    pub tol: f64,
    pub out: PathBuf,
}

pub fn sdd_check_cmd(run: &SddCheckRun) -> Result<bool, CliError> {
    let system = match &run.source {
        SddSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| fail_input(format!("cannot read {}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| fail_input(format!("{} is not JSON: {e}", path.display())))?;
            DensitySystem::from_json(&value)?
        }
        SddSource::Poisson { z, cells, max_order } => {
            poisson_sdd(*z, &Volume::uniform(1.0, *cells)?, *max_order)?
        }
    };
    let parent = system.volume();
    let sub_measures: Vec<f64> = run
        .sub_cells
        .iter()
        .map(|name| {
            parent
                .cells()
                .iter()
                .position(|c| c == name)
                .map(|i| parent.measures()[i])
                .ok_or_else(|| fail_input(format!("sub-volume cell '{name}' not in the system")))
        })
        .collect::<Result<_, _>>()?;
    let sub = Volume::new(run.sub_cells.clone(), sub_measures)?;
    let report = validate_sdd(&system, &sub, run.tol)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let json = serde_json::to_string_pretty(&report).unwrap();
    std::fs::write(&run.out, format!("{json}\n"))
        .map_err(|e| crate::fail_compute(format!("cannot write {}: {e}", run.out.display())))?;
    println!(
        "sdd-check: {} (eq1 {:.3e}, eq2 {:.3e}, eq3 {:.3e})",
        if report.pass { "pass" } else { "FAIL" },
        report.eq1_residual,
        report.eq2_residual,
        report.eq3_residual
    );
    Ok(report.pass)
}

pub struct OuSimRun {
    pub spec: ProcessSpec,
    pub out: PathBuf,
}

pub fn ou_sim_cmd(run: &OuSimRun) -> Result<(), CliError> {
    let path = simulate_ou(&run.spec)?;
    io::write_path_csv(&run.out, &path, "value")
}

pub struct ScalingRun {
    pub points: PathBuf,
    pub xi: f64,
    pub x_star: Vec<f64>,
    pub sigma_exponent: f64,
    pub steps: usize,
    pub out: PathBuf,
}

pub fn scaling_cmd(run: &ScalingRun) -> Result<(), CliError> {
    let config = io::read_points_csv(&run.points)?;
    let spec = ScalingSpec::new(run.xi, run.x_star.clone(), run.sigma_exponent, Field::constant(1.0))?;
    let sequence = coarse_grain_sequence(&config, &spec, run.steps)?;
    let rows: Vec<Vec<f64>> = sequence
        .iter()
        .map(|s| vec![s.step as f64, s.max_distance, s.energy_distance])
        .collect();
    io::write_table_csv(&run.out, "step,max_distance,energy_distance", &rows)
}

pub struct HysteresisRun {
    pub kernel: MemoryKernel,
    pub chi0: f64,
    pub amplitude: f64,
    pub omegas: Vec<f64>,
    pub periods: usize,
    pub samples_per_period: usize,
    pub out: PathBuf,
}

pub fn hysteresis_cmd(run: &HysteresisRun) -> Result<(), CliError> {
    let tau = run.kernel.stochastic_time();
    let mut rows = Vec::with_capacity(run.omegas.len());
    for &omega in &run.omegas {
        let period = 2.0 * std::f64::consts::PI / omega;
        let mut dt = period / run.samples_per_period as f64;
        if run.kernel.kind() != KernelKind::Delta {
            dt = dt.min(tau / 20.0);
        }
        let cycle = DriveCycle { amplitude: run.amplitude, omega, periods: run.periods, dt };
        let model = ResponseModel::new(run.chi0, run.kernel)?;
        let result = run_cycle(&model, &cycle)?;
        let area = loop_area(&result.drive, &result.response, result.window)?;
        let lag = phase_lag(&result.response, result.window, omega);
        rows.push(vec![omega, area, lag]);
    }
    io::write_table_csv(&run.out, "omega,area,phase_lag", &rows)
}

/// Parse the log-scan `lo:hi:logN` or a plain comma list of omegas.
pub fn parse_omegas(scan: Option<&str>, single: Option<f64>) -> Result<Vec<f64>, CliError> {
    match (scan, single) {
        (Some(_), Some(_)) => Err(fail_input("give either --omega or --omega-scan, not both")),
        (Some(s), None) => parse_log_scan(s),
        (None, Some(w)) if w > 0.0 => Ok(vec![w]),
        (None, Some(w)) => Err(fail_input(format!("omega must be positive, got {w}"))),
        (None, None) => Err(fail_input("need --omega or --omega-scan")),
    }
}

/// Load a matrix from a preset name or an `@file.json` reference.
pub fn parse_matrix_arg(spec: &str) -> Result<CMatrix, CliError> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| fail_input(format!("cannot read matrix file {path}: {e}")))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| fail_input(format!("{path}: {e}")))?;
        return noneq_core::modular::matrix_from_json(&value).map_err(CliError::from);
    }
    noneq_core::modular::parse_matrix_spec(spec).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:1:0.25").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn log_scan_parsing() {
        let s = parse_log_scan("0.01:100:log25").unwrap();
        assert_eq!(s.len(), 25);
        assert!((s[0] - 0.01).abs() < 1e-12);
        assert!((s[24] - 100.0).abs() < 1e-9);
        assert!(parse_log_scan("0.01:100:25").is_err());
        assert!(parse_log_scan("-1:10:log5").is_err());
    }

    #[test]
    fn eit_section_parsing() {
        let mut s = Section::new();
        for (k, v) in [
            ("lambda1", "1.0"),
            ("lambda2", "1.0"),
            ("tau1", "0.5"),
            ("tau2", "0.5"),
            ("n", "0.5"),
            ("h_field", "const:1"),
            ("t_upper", "2.0"),
        ] {
            s.insert(k.into(), v.into());
        }
        let p = eit_from_section(s.clone()).unwrap();
        assert_eq!(p.tau1, 0.5);
        assert_eq!(p.t_upper, 2.0);
        assert!((p.eps_t - 2e-6).abs() < 1e-18);

        s.insert("mystery".into(), "1".into());
        assert!(eit_from_section(s).is_err());
    }

    #[test]
    fn omega_selection() {
        assert_eq!(parse_omegas(None, Some(2.0)).unwrap(), vec![2.0]);
        assert!(parse_omegas(None, None).is_err());
        assert!(parse_omegas(Some("0.1:1:log5"), Some(1.0)).is_err());
    }
}
