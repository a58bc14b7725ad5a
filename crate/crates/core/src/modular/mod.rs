//! Finite-dimensional modular machinery: Gibbs states, von Neumann entropy,
//! expectation values, Heisenberg evolution by spectral conjugation and by
//! the nested-commutator series, and a numerical KMS residual.
//!
//! Everything runs on dense Hermitian matrices at desk scale (dim <= 64);
//! matrix exponentials go through the eigendecomposition, which keeps the
//! group law exact and never overflows after spectral shifting.

pub mod sample;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Absolute hermiticity tolerance for inputs.
const HERM_TOL: f64 = 1e-12;
/// Most negative admissible density-matrix eigenvalue.
const PSD_TOL: f64 = -1e-12;
/// Largest supported dimension.
const MAX_DIM: usize = 64;

fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_entry(&(m - m.adjoint()))
}

fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Validation(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    let defect = hermiticity_defect(m);
    if !defect.is_finite() || defect > HERM_TOL {
        return Err(Error::Validation(format!(
            "{what} is not Hermitian: max |M - M^dagger| entry = {defect:.3e}"
        )));
    }
    Ok(())
}

fn eigh(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let se = m.clone().symmetric_eigen();
    (se.eigenvalues, se.eigenvectors)
}

fn hermitize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

/// Hamiltonian plus inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem {
    hamiltonian: CMatrix,
    beta: f64,
}

impl QuantumSystem {
    pub fn new(hamiltonian: CMatrix, beta: f64) -> Result<Self> {
        let dim = check_square(&hamiltonian, "hamiltonian")?;
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::Validation(format!(
                "dimension must lie in [2, {MAX_DIM}], got {dim}"
            )));
        }
        check_hermitian(&hamiltonian, "hamiltonian")?;
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Validation(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { hamiltonian, beta })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, "density matrix")?;
        check_hermitian(&matrix, "density matrix")?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > HERM_TOL || trace.im.abs() > HERM_TOL {
            return Err(Error::Validation(format!(
                "density matrix trace must be 1, got {} + {}i",
                trace.re, trace.im
            )));
        }
        let (vals, _) = eigh(&matrix);
        if let Some(bad) = vals.iter().find(|&&l| l < PSD_TOL) {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {bad:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        let m = CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// A Hermitian observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, "observable")?;
        check_hermitian(&matrix, "observable")?;
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Gibbs state `e^{-beta H} / Tr e^{-beta H}`, computed in the eigenbasis
/// with the spectrum shifted by its minimum so the weights never overflow.
pub fn gibbs_state(sys: &QuantumSystem) -> Result<DensityMatrix> {
    let (vals, vecs) = eigh(sys.hamiltonian());
    let min = vals.min();
    let weights: Vec<f64> = vals.iter().map(|l| (-sys.beta() * (l - min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag = CMatrix::from_diagonal(&DVector::from_iterator(
        weights.len(),
        weights.iter().map(|w| C64::new(w / z, 0.0)),
    ));
    let rho = hermitize(&vecs * diag * vecs.adjoint());
    DensityMatrix::new(rho)
}

/// Von Neumann entropy `-sum lambda ln lambda` in nats, with `0 ln 0 = 0`.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    let (vals, _) = eigh(rho.matrix());
    let mut s = 0.0;
    for &l in vals.iter() {
        if l < -1e-8 {
            return Err(Error::InvalidState(format!(
                "density matrix eigenvalue {l:.3e} below -1e-8"
            )));
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

/// `Tr(rho A) / Tr(rho)`; the result must be real to 1e-10.
pub fn expectation(rho: &DensityMatrix, a: &Observable) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: state is {}, observable is {}",
            rho.dim(),
            a.dim()
        )));
    }
    let num = (rho.matrix() * a.matrix()).trace();
    let den = rho.matrix().trace();
    let value = num / den;
    if value.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "expectation has imaginary residual {:.3e} (limit 1e-10)",
            value.im
        )));
    }
    Ok(value.re)
}

/// Heisenberg evolution `Gamma_tau(A) = e^{i H tau} A e^{-i H tau}` by
/// spectral conjugation. Hermitian and spectrum-preserving by construction.
pub fn modular_evolve(sys: &QuantumSystem, a: &Observable, tau: f64) -> Result<Observable> {
    if sys.dim() != a.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: system is {}, observable is {}",
            sys.dim(),
            a.dim()
        )));
    }
    if !tau.is_finite() {
        return Err(Error::Validation(format!("tau must be finite, got {tau}")));
    }
    let (vals, vecs) = eigh(sys.hamiltonian());
    let a_eig = vecs.adjoint() * a.matrix() * &vecs;
    let dim = sys.dim();
    let evolved_eig = CMatrix::from_fn(dim, dim, |r, c| {
        let phase = C64::new(0.0, (vals[r] - vals[c]) * tau).exp();
        phase * a_eig[(r, c)]
    });
    Observable::new(hermitize(&vecs * evolved_eig * vecs.adjoint()))
}

/// Truncated power-series evolution
/// `sum_{k<=N} i^k tau^k / k! [H, A]^k` with nested commutators
/// (`[H, A]^0 = A`). Cross-check for [`modular_evolve`]; the error decays
/// factorially in `N`.
pub fn series_evolve(sys: &QuantumSystem, a: &Observable, tau: f64, n: usize) -> Result<Observable> {
    if sys.dim() != a.dim() {
        return Err(Error::Domain("dimension mismatch".into()));
    }
    let h = sys.hamiltonian();
    let mut nested = a.matrix().clone();
    let mut acc = a.matrix().clone();
    let mut coeff = C64::new(1.0, 0.0);
    for k in 1..=n {
        nested = h * &nested - &nested * h;
        coeff *= C64::new(0.0, tau) / C64::new(k as f64, 0.0);
        acc += &nested * coeff;
    }
    Observable::new(hermitize(acc))
}

/// KMS residual `|<Gamma_tau(N) M> - <M Gamma_{tau + i beta}(N)>|` in the
/// state `rho`, with the analytic continuation evaluated spectrally through
/// `e^{i H (tau + i beta)} = e^{i H tau} e^{-beta H}`. Zero (to roundoff)
/// exactly when `rho` is the Gibbs state of the system.
pub fn kms_residual(
    sys: &QuantumSystem,
    rho: &DensityMatrix,
    obs_n: &Observable,
    obs_m: &Observable,
    tau: f64,
) -> Result<f64> {
    let dim = sys.dim();
    if rho.dim() != dim || obs_n.dim() != dim || obs_m.dim() != dim {
        return Err(Error::Domain("dimension mismatch between system, state and observables".into()));
    }
    let (vals, vecs) = eigh(sys.hamiltonian());
    let n_eig = vecs.adjoint() * obs_n.matrix() * &vecs;

    // conjugation by e^{z H} multiplies the (r, c) eigenbasis entry by
    // e^{z (lambda_r - lambda_c)}; only spectral gaps enter
    let conjugate = |z: C64| -> CMatrix {
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            (z * (vals[r] - vals[c])).exp() * n_eig[(r, c)]
        });
        &vecs * m * vecs.adjoint()
    };

    let evolved_real = conjugate(C64::new(0.0, tau));
    let evolved_continued = conjugate(C64::new(-sys.beta(), tau));

    let tr_rho = rho.matrix().trace();
    let lhs = (rho.matrix() * &evolved_real * obs_m.matrix()).trace() / tr_rho;
    let rhs = (rho.matrix() * obs_m.matrix() * &evolved_continued).trace() / tr_rho;
    Ok((lhs - rhs).norm())
}

/// Result of the constrained-entropy sampling check.
#[derive(Debug, Clone)]
pub struct MaxEntropyReport {
    pub gibbs_entropy: f64,
    pub max_sampled_entropy: f64,
    /// `max_sampled_entropy - gibbs_entropy`; at most ~0 when the Gibbs
    /// state maximizes entropy on its energy shell.
    pub entropy_excess: f64,
    pub samples: usize,
    /// Worst `|<H> - <H>_Gibbs|` over the accepted samples.
    pub max_energy_mismatch: f64,
}

/// Samples random density matrices constrained to the Gibbs energy shell
/// (`|<H> - <H>_Gibbs| <= 1e-6`) and reports the largest entropy found.
///
/// Random states rarely land on the shell (and mixing a single draw with
/// the Gibbs state cannot reach it at a nonzero weight, since the energy
/// moves linearly away from the target), so each rejected draw is energy
/// matched by mixing it with a spectral-edge projector of the Hamiltonian:
/// the Gibbs energy always lies between any state's energy and the nearest
/// spectral edge, so the mixture weight solves the constraint exactly.
pub fn max_entropy_check(
    sys: &QuantumSystem,
    samples: usize,
    seed: u64,
) -> Result<MaxEntropyReport> {
    use rand::SeedableRng;

    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let gibbs = gibbs_state(sys)?;
    let h_obs = Observable::new(sys.hamiltonian().clone())?;
    let target = expectation(&gibbs, &h_obs)?;
    let gibbs_entropy = entropy(&gibbs)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = sys.dim();
    let energy = |m: &CMatrix| (sys.hamiltonian() * m).trace().re;

    // spectral-edge projectors: the energy extremes over all states
    let (vals, vecs) = eigh(sys.hamiltonian());
    let edge_projector = |idx: usize| -> CMatrix {
        let v = vecs.column(idx);
        &v * v.adjoint()
    };
    let (mut lo, mut hi) = (0usize, 0usize);
    for i in 1..dim {
        if vals[i] < vals[lo] {
            lo = i;
        }
        if vals[i] > vals[hi] {
            hi = i;
        }
    }

    let mut max_sampled = f64::NEG_INFINITY;
    let mut max_mismatch = 0.0f64;
    const TOL: f64 = 1e-6;
    const MAX_TRIES: usize = 50;

    for _ in 0..samples {
        let mut accepted: Option<CMatrix> = None;
        for _ in 0..MAX_TRIES {
            let candidate = sample::random_density(dim, &mut rng);
            let e = energy(&candidate);
            if (e - target).abs() <= TOL {
                accepted = Some(candidate);
                break;
            }
            // mix toward the spectral edge on the far side of the target
            let edge = if e > target { edge_projector(lo) } else { edge_projector(hi) };
            let e_edge = energy(&edge);
            if (e_edge - e).abs() < TOL {
                continue; // degenerate draw, retry
            }
            let alpha = (e_edge - target) / (e_edge - e);
            if !(0.0..=1.0).contains(&alpha) {
                continue;
            }
            accepted =
                Some(candidate * C64::new(alpha, 0.0) + edge * C64::new(1.0 - alpha, 0.0));
            break;
        }
        let state = accepted.ok_or_else(|| {
            Error::Sampling(format!(
                "failed to match <H> = {target:.6} within {TOL:e} after {MAX_TRIES} draws"
            ))
        })?;
        max_mismatch = max_mismatch.max((energy(&state) - target).abs());
        let rho = DensityMatrix::new(hermitize(state))?;
        max_sampled = max_sampled.max(entropy(&rho)?);
    }

    Ok(MaxEntropyReport {
        gibbs_entropy,
        max_sampled_entropy: max_sampled,
        entropy_excess: max_sampled - gibbs_entropy,
        samples,
        max_energy_mismatch: max_mismatch,
    })
}

/// 2x2 Pauli matrices and the diagonal preset used by the CLI.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])
}

/// Parse a matrix preset: `pauli-x|pauli-y|pauli-z` or `diag:a,b,...`.
pub fn parse_matrix_spec(s: &str) -> Result<CMatrix> {
    match s.trim().to_ascii_lowercase().as_str() {
        "pauli-x" => return Ok(pauli_x()),
        "pauli-y" => return Ok(pauli_y()),
        "pauli-z" => return Ok(pauli_z()),
        _ => {}
    }
    if let Some(rest) = s.trim().strip_prefix("diag:") {
        let entries: Vec<f64> = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Validation(format!("cannot parse diagonal entry '{p}'")))
            })
            .collect::<Result<_>>()?;
        if entries.len() < 2 {
            return Err(Error::Validation("diag: needs at least two entries".into()));
        }
        let n = entries.len();
        return Ok(CMatrix::from_fn(n, n, |r, c| {
            if r == c { C64::new(entries[r], 0.0) } else { C64::new(0.0, 0.0) }
        }));
    }
    Err(Error::Validation(format!(
        "unknown matrix spec '{s}' (expected pauli-x|pauli-y|pauli-z or diag:a,b,...)"
    )))
}

/// Serialize a matrix as row-major JSON `[[re, im], ...]` rows.
pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    serde_json::json!(rows)
}

/// Parse a matrix from the row-major `[[re, im], ...]` JSON layout.
pub fn matrix_from_json(v: &serde_json::Value) -> Result<CMatrix> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::Validation(format!("matrix JSON must be rows of [re, im]: {e}")))?;
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Validation("matrix JSON has no rows".into()));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Validation("matrix JSON rows have unequal lengths".into()));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_level(beta: f64) -> QuantumSystem {
        QuantumSystem::new(parse_matrix_spec("diag:1,-1").unwrap(), beta).unwrap()
    }

    #[test]
    fn gibbs_two_level_boltzmann_weights() {
        let rho = gibbs_state(&two_level(1.0)).unwrap();
        let z = (-1.0f64).exp() + 1.0f64.exp();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, (-1.0f64).exp() / z, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 1.0f64.exp() / z, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 0.11920, epsilon = 1e-5);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 0.88080, epsilon = 1e-5);
    }

    #[test]
    fn gibbs_infinite_temperature_limit() {
        let rho = gibbs_state(&two_level(1e-12)).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(rho.matrix()[(i, i)].re, 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn gibbs_degenerate_spectrum_is_maximally_mixed() {
        let h = CMatrix::identity(3, 3) * C64::new(4.0, 0.0);
        let sys = QuantumSystem::new(h, 2.5).unwrap();
        let rho = gibbs_state(&sys).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(rho.matrix()[(i, i)].re, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gibbs_survives_extreme_beta() {
        let sys = QuantumSystem::new(parse_matrix_spec("diag:1000,-1000").unwrap(), 5.0).unwrap();
        let rho = gibbs_state(&sys).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_landmarks() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_abs_diff_eq!(entropy(&mixed).unwrap(), 2.0f64.ln(), epsilon = 1e-12);

        let pure = DensityMatrix::new(parse_matrix_spec("diag:1,0").unwrap()).unwrap();
        assert_abs_diff_eq!(entropy(&pure).unwrap(), 0.0, epsilon = 1e-12);

        let gibbs = gibbs_state(&two_level(1.0)).unwrap();
        assert_abs_diff_eq!(entropy(&gibbs).unwrap(), 0.36533, epsilon = 1e-5);
    }

    #[test]
    fn entropy_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 2..=5 {
            let rho = DensityMatrix::new(sample::random_density(dim, &mut rng)).unwrap();
            let herm = sample::random_hermitian(dim, &mut rng);
            let (_, u) = eigh(&herm); // eigenvector matrix is unitary
            let rotated = DensityMatrix::new(hermitize(&u * rho.matrix() * u.adjoint())).unwrap();
            assert_abs_diff_eq!(
                entropy(&rho).unwrap(),
                entropy(&rotated).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn expectation_landmarks() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let sz = Observable::new(pauli_z()).unwrap();
        assert_abs_diff_eq!(expectation(&mixed, &sz).unwrap(), 0.0, epsilon = 1e-12);

        let up = DensityMatrix::new(parse_matrix_spec("diag:1,0").unwrap()).unwrap();
        assert_abs_diff_eq!(expectation(&up, &sz).unwrap(), 1.0, epsilon = 1e-12);

        let sys = QuantumSystem::new(pauli_z(), 1.0).unwrap();
        let gibbs = gibbs_state(&sys).unwrap();
        assert_abs_diff_eq!(expectation(&gibbs, &sz).unwrap(), -(1.0f64.tanh()), epsilon = 1e-12);
        assert_abs_diff_eq!(expectation(&gibbs, &sz).unwrap(), -0.76159, epsilon = 1e-5);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let sz = Observable::new(pauli_z()).unwrap();
        assert!(matches!(expectation(&mixed, &sz), Err(Error::Domain(_))));
    }

    #[test]
    fn hamiltonian_is_invariant_under_its_own_evolution() {
        let sys = two_level(1.0);
        let h_obs = Observable::new(sys.hamiltonian().clone()).unwrap();
        for tau in [0.0, 0.3, 2.0, -1.7] {
            let evolved = modular_evolve(&sys, &h_obs, tau).unwrap();
            assert!(max_abs_entry(&(evolved.matrix() - h_obs.matrix())) < 1e-12);
        }
    }

    #[test]
    fn pauli_rotation_half_period() {
        // H = sigma_z: Gamma_{pi/2}(sigma_x) = -sigma_x
        let sys = QuantumSystem::new(pauli_z(), 1.0).unwrap();
        let sx = Observable::new(pauli_x()).unwrap();
        let evolved = modular_evolve(&sys, &sx, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(max_abs_entry(&(evolved.matrix() + sx.matrix())) < 1e-12);
    }

    #[test]
    fn tau_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = QuantumSystem::new(sample::random_hermitian(4, &mut rng), 1.0).unwrap();
        let a = Observable::new(sample::random_hermitian(4, &mut rng)).unwrap();
        let evolved = modular_evolve(&sys, &a, 0.0).unwrap();
        assert!(max_abs_entry(&(evolved.matrix() - a.matrix())) < 1e-12);
    }

    #[test]
    fn evolution_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2usize, 4, 6] {
            let sys = QuantumSystem::new(sample::random_hermitian(dim, &mut rng), 0.7).unwrap();
            let a = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
            let evolved = modular_evolve(&sys, &a, 1.3).unwrap();
            let mut before = eigh(a.matrix()).0.iter().copied().collect::<Vec<_>>();
            let mut after = eigh(evolved.matrix()).0.iter().copied().collect::<Vec<_>>();
            before.sort_by(f64::total_cmp);
            after.sort_by(f64::total_cmp);
            for (b, a) in before.iter().zip(&after) {
                assert_abs_diff_eq!(b, a, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn evolution_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = QuantumSystem::new(sample::random_hermitian(5, &mut rng), 1.0).unwrap();
        let a = Observable::new(sample::random_hermitian(5, &mut rng)).unwrap();
        let (t1, t2) = (0.37, -1.82);
        let one = modular_evolve(&sys, &modular_evolve(&sys, &a, t2).unwrap(), t1).unwrap();
        let both = modular_evolve(&sys, &a, t1 + t2).unwrap();
        assert!(max_abs_entry(&(one.matrix() - both.matrix())) < 1e-10);
    }

    #[test]
    fn series_order_zero_is_identity() {
        let sys = two_level(1.0);
        let sx = Observable::new(pauli_x()).unwrap();
        let out = series_evolve(&sys, &sx, 0.8, 0).unwrap();
        assert!(max_abs_entry(&(out.matrix() - sx.matrix())) < 1e-15);
    }

    #[test]
    fn series_matches_exact_conjugation() {
        let sys = QuantumSystem::new(pauli_z(), 1.0).unwrap();
        let sx = Observable::new(pauli_x()).unwrap();
        let tau = 0.1;
        let exact = modular_evolve(&sys, &sx, tau).unwrap();
        let series = series_evolve(&sys, &sx, tau, 12).unwrap();
        assert!(max_abs_entry(&(series.matrix() - exact.matrix())) < 1e-12);
    }

    #[test]
    fn series_commuting_observable_is_fixed() {
        let sys = two_level(1.0);
        let diag = Observable::new(parse_matrix_spec("diag:3,7").unwrap()).unwrap();
        let out = series_evolve(&sys, &diag, 2.0, 9).unwrap();
        assert!(max_abs_entry(&(out.matrix() - diag.matrix())) < 1e-12);
    }

    #[test]
    fn series_error_decays_factorially() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for dim in [2usize, 4, 6] {
            let h = sample::random_hermitian(dim, &mut rng);
            let spectral_norm = eigh(&h).0.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            let sys = QuantumSystem::new(h, 1.0).unwrap();
            let a = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
            let tau = 0.1;
            let exact = modular_evolve(&sys, &a, tau).unwrap();
            let residual = |n: usize| {
                let s = series_evolve(&sys, &a, tau, n).unwrap();
                max_abs_entry(&(s.matrix() - exact.matrix()))
            };
            let mut prev = residual(0);
            for n in 0..8 {
                let next = residual(n + 1);
                if prev < 1e-12 {
                    break; // roundoff floor
                }
                let bound = tau * 2.0 * spectral_norm / (n as f64 + 1.0);
                assert!(
                    next / prev <= bound * 1.1,
                    "dim {dim}, N {n}: ratio {} above factorial bound {bound}",
                    next / prev
                );
                prev = next;
            }
        }
    }

    #[test]
    fn kms_residual_vanishes_on_gibbs_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=6 {
            let sys = QuantumSystem::new(sample::random_hermitian(dim, &mut rng), 0.9).unwrap();
            let rho = gibbs_state(&sys).unwrap();
            let n = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
            let m = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
            for tau in [0.0, 0.7] {
                let r = kms_residual(&sys, &rho, &n, &m, tau).unwrap();
                assert!(r < 1e-10, "dim {dim}, tau {tau}: KMS residual {r}");
            }
        }
    }

    #[test]
    fn kms_residual_flags_non_gibbs_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut big = 0usize;
        let total = 20;
        for _ in 0..total {
            let dim = 3;
            let sys = QuantumSystem::new(sample::random_hermitian(dim, &mut rng), 1.0).unwrap();
            let rho = DensityMatrix::maximally_mixed(dim).unwrap();
            let n = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
            let m = Observable::new(sample::random_hermitian(dim, &mut rng)).unwrap();
            if kms_residual(&sys, &rho, &n, &m, 0.4).unwrap() > 1e-3 {
                big += 1;
            }
        }
        assert!(big >= total - 1, "only {big}/{total} non-Gibbs states flagged");
    }

    #[test]
    fn kms_residual_zero_for_identity_observable() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = QuantumSystem::new(sample::random_hermitian(4, &mut rng), 1.0).unwrap();
        let rho = DensityMatrix::new(sample::random_density(4, &mut rng)).unwrap();
        let id = Observable::new(CMatrix::identity(4, 4)).unwrap();
        let m = Observable::new(sample::random_hermitian(4, &mut rng)).unwrap();
        let r = kms_residual(&sys, &rho, &id, &m, 0.9).unwrap();
        assert!(r < 1e-12, "identity evolves trivially on both sides, got {r}");
    }

    #[test]
    fn max_entropy_gibbs_wins() {
        for (dim, beta) in [(2usize, 1.0), (3, 0.5)] {
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            let sys = QuantumSystem::new(sample::random_hermitian(dim, &mut rng), beta).unwrap();
            let report = max_entropy_check(&sys, 200, 11).unwrap();
            assert!(
                report.entropy_excess <= 1e-6,
                "sampled entropy beat Gibbs by {}",
                report.entropy_excess
            );
            assert!(report.max_energy_mismatch <= 1e-6);
        }
    }

    #[test]
    fn max_entropy_gibbs_attains_its_own_bound() {
        let sys = two_level(1.0);
        let gibbs = gibbs_state(&sys).unwrap();
        let s = entropy(&gibbs).unwrap();
        let report = max_entropy_check(&sys, 50, 3).unwrap();
        assert!(report.gibbs_entropy >= s - 1e-12);
        assert!(report.max_sampled_entropy <= s + 1e-9);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        // non-Hermitian hamiltonian
        let bad = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert!(QuantumSystem::new(bad, 1.0).is_err());
        assert!(QuantumSystem::new(pauli_z(), -1.0).is_err());
        assert!(QuantumSystem::new(CMatrix::identity(1, 1), 1.0).is_err());
        assert!(QuantumSystem::new(CMatrix::identity(65, 65), 1.0).is_err());

        // trace != 1
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        // negative eigenvalue
        assert!(DensityMatrix::new(parse_matrix_spec("diag:1.5,-0.5").unwrap()).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = pauli_y();
        let v = matrix_to_json(&m);
        let back = matrix_from_json(&v).unwrap();
        assert_eq!(m, back);
        assert!(matrix_from_json(&serde_json::json!([[1.0, 2.0]])).is_err());
    }

    #[test]
    fn matrix_spec_presets() {
        assert_eq!(parse_matrix_spec("pauli-x").unwrap(), pauli_x());
        let d = parse_matrix_spec("diag:1,-1,0.5").unwrap();
        assert_eq!(d[(2, 2)], C64::new(0.5, 0.0));
        assert!(parse_matrix_spec("diag:1").is_err());
        assert!(parse_matrix_spec("hadamard").is_err());
    }
}
