//! Seeded random Hermitian matrices and density matrices for the KMS and
//! maximal-entropy checks. Gaussian entries, symmetrized; density matrices
//! through the Ginibre construction `G G^dagger / Tr`.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{C64, CMatrix};

/// `(G + G^dagger) / 2` with independent standard-normal entries.
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let adj = g.adjoint();
    (g + adj) * C64::new(0.5, 0.0)
}

/// Hilbert-Schmidt-distributed density matrix `G G^dagger / Tr(G G^dagger)`.
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let product = &g * g.adjoint();
    let trace = product.trace();
    product * (C64::new(1.0, 0.0) / trace)
}
