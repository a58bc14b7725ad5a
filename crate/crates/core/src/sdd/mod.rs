//! Discretized systems of density distributions over a bounded volume.
//!
//! Continuous integrals over `Lambda^n` become sums over cell tuples
//! weighted by products of cell measures, so the defining conditions and
//! both directions of the density/correlation transform can be checked
//! against exact combinatorial oracles. Densities are symmetric in their
//! arguments and stored on sorted index tuples (see [`table`]).

pub mod table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use table::{factorial, multisets, ordered_multiplicity, SymmetricTable};

/// Guard on table sizes so mistyped orders fail fast instead of allocating.
const MAX_TABLE_ENTRIES: usize = 4_000_000;

/// A bounded volume split into named cells with positive measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    cells: Vec<String>,
    measures: Vec<f64>,
}

impl Volume {
    pub fn new(cells: Vec<String>, measures: Vec<f64>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Validation("a volume needs at least one cell".into()));
        }
        if cells.len() != measures.len() {
            return Err(Error::Validation(format!(
                "{} cells but {} measures",
                cells.len(),
                measures.len()
            )));
        }
        if measures.iter().any(|m| !m.is_finite() || *m <= 0.0) {
            return Err(Error::Validation("all cell measures must be positive and finite".into()));
        }
        for (i, c) in cells.iter().enumerate() {
            if cells[..i].contains(c) {
                return Err(Error::Validation(format!("duplicate cell name '{c}'")));
            }
        }
        Ok(Self { cells, measures })
    }

    /// Equal split of a total measure into `k` cells named `c0..`.
    pub fn uniform(total: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation("need at least one cell".into()));
        }
        Self::new(
            (0..k).map(|i| format!("c{i}")).collect(),
            vec![total / k as f64; k],
        )
    }

    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one cell by construction
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Indices of `sub`'s cells inside this volume; errors unless `sub` is a
    /// genuine sub-volume (same names, same measures).
    pub fn subset_indices(&self, sub: &Volume) -> Result<Vec<usize>> {
        sub.cells
            .iter()
            .zip(&sub.measures)
            .map(|(name, &m)| {
                let idx = self
                    .cells
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::Domain(format!("cell '{name}' not in the volume")))?;
                if (self.measures[idx] - m).abs() > 1e-12 * self.measures[idx].abs() {
                    return Err(Error::Domain(format!(
                        "cell '{name}' has measure {m} in the sub-volume but {} in the parent",
                        self.measures[idx]
                    )));
                }
                Ok(idx)
            })
            .collect()
    }

    fn measure_product(&self, sorted: &[usize]) -> f64 {
        sorted.iter().map(|&i| self.measures[i]).product()
    }
}

/// The discretized density distributions `mu^n`, `n = 0..=max_order`, over a
/// volume.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySystem {
    volume: Volume,
    densities: Vec<SymmetricTable>,
}

impl DensitySystem {
    pub fn new(volume: Volume, densities: Vec<SymmetricTable>) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::Validation("need at least the order-0 density".into()));
        }
        for (n, t) in densities.iter().enumerate() {
            if t.order() != n || t.n_cells() != volume.len() {
                return Err(Error::Validation(format!(
                    "table {n} has order {} over {} cells; expected order {n} over {}",
                    t.order(),
                    t.n_cells(),
                    volume.len()
                )));
            }
            if t.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Validation(format!(
                    "order-{n} density has negative or non-finite entries"
                )));
            }
        }
        let top = densities.len() - 1;
        if SymmetricTable::size(volume.len(), top) > MAX_TABLE_ENTRIES {
            return Err(Error::Validation(format!(
                "order {top} over {} cells is beyond desk scale",
                volume.len()
            )));
        }
        Ok(Self { volume, densities })
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn max_order(&self) -> usize {
        self.densities.len() - 1
    }

    pub fn density(&self, n: usize) -> &SymmetricTable {
        &self.densities[n]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DensitySystemJson {
            volume: self.volume.clone(),
            max_order: self.max_order(),
            densities: self.densities.iter().map(|t| t.values().to_vec()).collect(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: DensitySystemJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::Validation(format!("malformed density-system JSON: {e}")))?;
        if raw.densities.len() != raw.max_order + 1 {
            return Err(Error::Validation(format!(
                "max_order {} but {} density tables",
                raw.max_order,
                raw.densities.len()
            )));
        }
        let n_cells = raw.volume.cells.len();
        let densities = raw
            .densities
            .into_iter()
            .enumerate()
            .map(|(n, values)| SymmetricTable::from_values(n_cells, n, values))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Volume::new(raw.volume.cells, raw.volume.measures)?, densities)
    }
}

/// Flattened JSON layout: per order, the symmetric table values listed over
/// lexicographically non-decreasing cell-index tuples.
#[derive(Serialize, Deserialize)]
struct DensitySystemJson {
    volume: Volume,
    max_order: usize,
    densities: Vec<Vec<f64>>,
}

/// Statistical correlation functions `rho^n` of a density system.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    volume: Volume,
    tables: Vec<SymmetricTable>,
}

impl CorrelationTable {
    pub fn new(volume: Volume, tables: Vec<SymmetricTable>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::Validation("need at least the order-0 entry".into()));
        }
        for (n, t) in tables.iter().enumerate() {
            if t.order() != n || t.n_cells() != volume.len() {
                return Err(Error::Validation(format!("table {n} has the wrong shape")));
            }
            if t.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Validation(format!(
                    "order-{n} correlation has negative or non-finite entries"
                )));
            }
        }
        Ok(Self { volume, tables })
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn max_order(&self) -> usize {
        self.tables.len() - 1
    }

    pub fn table(&self, n: usize) -> &SymmetricTable {
        &self.tables[n]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DensitySystemJson {
            volume: self.volume.clone(),
            max_order: self.max_order(),
            densities: self.tables.iter().map(|t| t.values().to_vec()).collect(),
        })
        .expect("plain data serializes")
    }
}

/// One marginalized order: for each sorted tuple `x` over the kept cells,
///
/// `mu_keep^n(x) = sum_p C(n+p, n) sum_{|j| = p, j in comp} (ordered j) *
///                 prod h_j * mu^{n+p}(x ++ j)`
///
/// truncated at `n + p <= max_order`. Returns the table (indexed over the
/// kept cells) and the largest magnitude of the final retained `p` term.
fn marginal_order(
    d: &DensitySystem,
    keep: &[usize],
    comp: &[usize],
    n: usize,
) -> (SymmetricTable, f64) {
    let p_max = d.max_order() - n;
    let mut worst_last = 0.0f64;
    let mut values = Vec::with_capacity(SymmetricTable::size(keep.len(), n));

    // multisets iterate in the table's storage order, so a plain push lands
    // each entry at its rank
    for x_local in multisets(keep.len(), n) {
        let x_parent: Vec<usize> = x_local.iter().map(|&i| keep[i]).collect();
        let mut acc = 0.0;
        let mut last = 0.0;
        for p in 0..=p_max {
            let coeff = table::binomial(n + p, n);
            let mut term = 0.0;
            if comp.is_empty() {
                if p == 0 {
                    term = d.density(n).get(&x_parent);
                }
            } else {
                for j_local in multisets(comp.len(), p) {
                    let j_parent: Vec<usize> = j_local.iter().map(|&i| comp[i]).collect();
                    let weight = ordered_multiplicity(&j_parent)
                        * d.volume().measure_product(&j_parent);
                    let mut merged = x_parent.clone();
                    merged.extend_from_slice(&j_parent);
                    merged.sort_unstable();
                    term += weight * d.density(n + p).get_sorted(&merged);
                }
            }
            last = coeff * term;
            acc += last;
        }
        worst_last = worst_last.max(last.abs());
        values.push(acc);
    }
    let out = SymmetricTable::from_values(keep.len(), n, values)
        .expect("value count matches the multiset count");
    (out, worst_last)
}

/// Restriction of a density system to a sub-volume via the consistency
/// condition (one marginalization step per order).
pub fn restrict(d: &DensitySystem, sub: &Volume) -> Result<DensitySystem> {
    let keep = d.volume().subset_indices(sub)?;
    let comp: Vec<usize> = (0..d.volume().len()).filter(|i| !keep.contains(i)).collect();
    let tables = (0..=d.max_order())
        .map(|n| marginal_order(d, &keep, &comp, n).0)
        .collect();
    DensitySystem::new(sub.clone(), tables)
}

/// Per-condition residuals of the defining conditions.
#[derive(Debug, Clone, Serialize)]
pub struct SddReport {
    /// Marginalizing every cell out must leave the unit weight of the empty
    /// configuration.
    pub eq1_residual: f64,
    /// Consistency of the marginalization: the restricted system must again
    /// be normalized, and restricting in one step must agree with removing
    /// one cell at a time.
    pub eq2_residual: f64,
    /// Direct normalization of the input system.
    pub eq3_residual: f64,
    /// Largest final retained term of the truncated marginalization sums.
    pub truncation_estimate: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Normalization sum `sum_n int mu^n` over ordered tuples.
fn normalization_sum(d: &DensitySystem) -> f64 {
    let mut acc = 0.0;
    for n in 0..=d.max_order() {
        for x in multisets(d.volume().len(), n) {
            acc += ordered_multiplicity(&x)
                * d.volume().measure_product(&x)
                * d.density(n).get_sorted(&x);
        }
    }
    acc
}

/// Check the defining conditions of a density system against a sub-volume.
pub fn validate_sdd(d: &DensitySystem, sub: &Volume, tol: f64) -> Result<SddReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let keep = d.volume().subset_indices(sub)?;
    let all: Vec<usize> = (0..d.volume().len()).collect();

    // marginalize everything out: the empty configuration carries weight 1
    let (empty_table, trunc_eq1) = marginal_order(d, &[], &all, 0);
    let eq1_residual = (empty_table.values()[0] - 1.0).abs();

    // one-step restriction to the sub-volume
    let restricted = restrict(d, sub)?;
    let restricted_norm = (normalization_sum(&restricted) - 1.0).abs();

    // chained restriction: remove complement cells one at a time
    let mut chained = d.clone();
    let comp_names: Vec<String> = d
        .volume()
        .cells()
        .iter()
        .enumerate()
        .filter(|(i, _)| !keep.contains(i))
        .map(|(_, c)| c.clone())
        .collect();
    for name in &comp_names {
        let next_cells: Vec<String> =
            chained.volume().cells().iter().filter(|c| *c != name).cloned().collect();
        let next_measures: Vec<f64> = chained
            .volume()
            .cells()
            .iter()
            .zip(chained.volume().measures())
            .filter(|(c, _)| *c != name)
            .map(|(_, &m)| m)
            .collect();
        chained = restrict(&chained, &Volume::new(next_cells, next_measures)?)?;
    }
    // align the chained result with the sub-volume's cell order
    chained = restrict(&chained, sub)?;
    let mut transitivity = 0.0f64;
    for n in 0..=d.max_order() {
        for (a, b) in restricted.density(n).values().iter().zip(chained.density(n).values()) {
            transitivity = transitivity.max((a - b).abs());
        }
    }
    let eq2_residual = restricted_norm.max(transitivity);

    let eq3_residual = (normalization_sum(d) - 1.0).abs();

    // largest final retained term across the marginalizations used
    let mut truncation_estimate = trunc_eq1;
    let comp: Vec<usize> = (0..d.volume().len()).filter(|i| !keep.contains(i)).collect();
    for n in 0..=d.max_order() {
        truncation_estimate = truncation_estimate.max(marginal_order(d, &keep, &comp, n).1);
    }

    let mut warnings = Vec::new();
    if truncation_estimate > tol {
        warnings.push(format!(
            "truncation estimate {truncation_estimate:.3e} above tolerance {tol:.3e}; \
             raise max_order"
        ));
    }
    let pass = eq1_residual <= tol && eq2_residual <= tol && eq3_residual <= tol;
    Ok(SddReport {
        eq1_residual,
        eq2_residual,
        eq3_residual,
        truncation_estimate,
        tolerance: tol,
        pass,
        warnings,
    })
}

/// Statistical correlation function of order `n`:
///
/// `rho^n(x) = sum_p (n+p)!/p! int_{Lambda^p} mu^{n+p}(x, y) dy`,
/// truncated at `n + p <= max_order`.
pub fn correlation_from_sdd(d: &DensitySystem, n: usize) -> Result<SymmetricTable> {
    if n > d.max_order() {
        return Err(Error::Domain(format!(
            "order {n} above the system's max_order {}",
            d.max_order()
        )));
    }
    let cells = d.volume().len();
    let mut values = vec![0.0f64; SymmetricTable::size(cells, n)];
    for (idx, x) in multisets(cells, n).enumerate() {
        let mut acc = 0.0;
        for p in 0..=d.max_order() - n {
            let base = factorial(n + p) / factorial(p);
            for j in multisets(cells, p) {
                let weight = ordered_multiplicity(&j) * d.volume().measure_product(&j);
                let mut merged = x.clone();
                merged.extend_from_slice(&j);
                merged.sort_unstable();
                acc += base * weight * d.density(n + p).get_sorted(&merged);
            }
        }
        values[idx] = acc;
    }
    SymmetricTable::from_values(cells, n, values)
}

/// All correlation orders of a system.
pub fn correlation_table(d: &DensitySystem) -> Result<CorrelationTable> {
    let tables = (0..=d.max_order())
        .map(|n| correlation_from_sdd(d, n))
        .collect::<Result<Vec<_>>>()?;
    CorrelationTable::new(d.volume().clone(), tables)
}

/// Result of inverting the correlation functions at one order.
#[derive(Debug, Clone)]
pub struct SddInversion {
    pub table: SymmetricTable,
    /// Magnitude of the last retained term of the alternating series — the
    /// truncation estimate.
    pub last_term: f64,
}

/// Formal inversion
/// `mu^n(x) = (1/n!) sum_p (-1)^p/p! int_{Lambda^p} rho^{n+p}(x, y) dy`,
/// truncated at the table's max order. The series may not converge; the
/// last retained term is checked against `tol`.
pub fn sdd_from_correlation(c: &CorrelationTable, n: usize, tol: f64) -> Result<SddInversion> {
    if n > c.max_order() {
        return Err(Error::Domain(format!(
            "order {n} above the table's max_order {}",
            c.max_order()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let cells = c.volume().len();
    let inv_nfact = 1.0 / factorial(n);
    let mut values = vec![0.0f64; SymmetricTable::size(cells, n)];
    let mut worst_last = 0.0f64;
    for (idx, x) in multisets(cells, n).enumerate() {
        let mut acc = 0.0;
        let mut last = 0.0;
        for p in 0..=c.max_order() - n {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let mut term = 0.0;
            for j in multisets(cells, p) {
                let weight = ordered_multiplicity(&j) * c.volume().measure_product(&j);
                let mut merged = x.clone();
                merged.extend_from_slice(&j);
                merged.sort_unstable();
                term += weight * c.table(n + p).get_sorted(&merged);
            }
            last = inv_nfact * sign / factorial(p) * term;
            acc += last;
        }
        worst_last = worst_last.max(last.abs());
        values[idx] = acc;
    }
    if worst_last > tol {
        return Err(Error::NonConvergence(format!(
            "inverse series last term {worst_last:.3e} above tolerance {tol:.3e}; the series \
             may be non-convergent at this truncation"
        )));
    }
    Ok(SddInversion {
        table: SymmetricTable::from_values(cells, n, values)?,
        last_term: worst_last,
    })
}

/// Analytic Poisson system: `mu^n = e^{-z |Lambda|} z^n / n!`, constant in
/// positions. The neglected tail of the normalization series must stay
/// below 1e-10.
pub fn poisson_sdd(z: f64, volume: &Volume, max_order: usize) -> Result<DensitySystem> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Validation(format!("intensity z must be positive, got {z}")));
    }
    let lam = z * volume.total_measure();
    // tail bound: first neglected term times a geometric factor
    let geometric_ok = lam < (max_order + 2) as f64;
    let mut first_neglected = (-lam).exp();
    for k in 1..=max_order + 1 {
        first_neglected *= lam / k as f64;
    }
    let tail = if geometric_ok {
        first_neglected / (1.0 - lam / (max_order + 2) as f64)
    } else {
        f64::INFINITY
    };
    if !(tail < 1e-10) {
        return Err(Error::Domain(format!(
            "Poisson tail bound {tail:.3e} at max_order {max_order} exceeds 1e-10; \
             increase max_order for z |Lambda| = {lam}"
        )));
    }

    let prefactor = (-lam).exp();
    let mut zn = 1.0;
    let mut tables = Vec::with_capacity(max_order + 1);
    for n in 0..=max_order {
        if n > 0 {
            zn *= z;
        }
        tables.push(SymmetricTable::constant(
            volume.len(),
            n,
            prefactor * zn / factorial(n),
        ));
    }
    DensitySystem::new(volume.clone(), tables)
}
