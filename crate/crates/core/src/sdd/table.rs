//! Dense storage for symmetric functions on n-tuples of cells.
//!
//! A symmetric function is determined by its values on non-decreasing index
//! tuples (multisets). Entries are stored in lexicographic order of those
//! tuples — the same convention the JSON schema uses — and ranked through
//! the bijection with strictly increasing combinations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(n, k)` in f64; exact for every value this crate touches well past the
/// needed 1e-12 agreement.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `n!` in f64.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0f64, |acc, i| acc * i as f64)
}

/// Number of ordered tuples realizing a sorted multiset: `p! / prod(mult!)`.
pub fn ordered_multiplicity(sorted: &[usize]) -> f64 {
    let mut coeff = factorial(sorted.len());
    let mut run = 1usize;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            coeff /= factorial(run);
            run = 1;
        }
    }
    coeff
}

/// Iterator over the non-decreasing index tuples of a given length, in
/// lexicographic order (matching the storage layout).
pub struct Multisets {
    n_cells: usize,
    current: Option<Vec<usize>>,
}

pub fn multisets(n_cells: usize, order: usize) -> Multisets {
    let current = if n_cells == 0 && order > 0 { None } else { Some(vec![0; order]) };
    Multisets { n_cells, current }
}

impl Iterator for Multisets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        // successor: bump the rightmost index that can grow, reset the tail
        let mut next = current.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] + 1 < self.n_cells {
                let v = next[i] + 1;
                for slot in &mut next[i..] {
                    *slot = v;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(current)
    }
}

/// Symmetric non-negative function on `order`-tuples of `n_cells` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTable {
    order: usize,
    n_cells: usize,
    values: Vec<f64>,
}

impl SymmetricTable {
    /// Entries of a symmetric table: multisets of size `order` from
    /// `n_cells` symbols. Order 0 always has the single empty tuple.
    pub fn size(n_cells: usize, order: usize) -> usize {
        if order == 0 {
            return 1;
        }
        if n_cells == 0 {
            return 0;
        }
        binomial(n_cells + order - 1, order) as usize
    }

    pub fn constant(n_cells: usize, order: usize, value: f64) -> Self {
        Self { order, n_cells, values: vec![value; Self::size(n_cells, order)] }
    }

    pub fn from_values(n_cells: usize, order: usize, values: Vec<f64>) -> Result<Self> {
        let expect = Self::size(n_cells, order);
        if values.len() != expect {
            return Err(Error::Validation(format!(
                "order-{order} table over {n_cells} cells needs {expect} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { order, n_cells, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Lexicographic rank of a sorted (non-decreasing) tuple, through the
    /// bijection `b_i = a_i + i` onto strictly increasing combinations from
    /// `[0, n_cells + order - 1)`.
    fn rank(&self, sorted: &[usize]) -> usize {
        debug_assert_eq!(sorted.len(), self.order);
        if self.order == 0 {
            return 0;
        }
        let m = self.n_cells + self.order - 1;
        let n = self.order;
        let mut rank = 0usize;
        let mut next_candidate = 0usize;
        for (i, &a) in sorted.iter().enumerate() {
            let b = a + i;
            for v in next_candidate..b {
                rank += binomial(m - 1 - v, n - 1 - i) as usize;
            }
            next_candidate = b + 1;
        }
        rank
    }

    /// Value at an arbitrary (possibly unsorted) tuple of cell indices.
    pub fn get(&self, tuple: &[usize]) -> f64 {
        let mut sorted = tuple.to_vec();
        sorted.sort_unstable();
        self.values[self.rank(&sorted)]
    }

    pub fn get_sorted(&self, sorted: &[usize]) -> f64 {
        self.values[self.rank(sorted)]
    }

    pub fn set_sorted(&mut self, sorted: &[usize], value: f64) {
        let idx = self.rank(sorted);
        self.values[idx] = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_count_matches_size() {
        for (cells, order) in [(1usize, 3usize), (3, 0), (3, 2), (4, 5), (2, 7)] {
            let count = multisets(cells, order).count();
            assert_eq!(count, SymmetricTable::size(cells, order), "{cells} cells order {order}");
        }
    }

    #[test]
    fn ranks_follow_iteration_order() {
        for (cells, order) in [(3usize, 2usize), (4, 3), (2, 5), (5, 1), (3, 0)] {
            let table = SymmetricTable::constant(cells, order, 0.0);
            for (i, m) in multisets(cells, order).enumerate() {
                assert_eq!(table.rank(&m), i, "{m:?}");
            }
        }
    }

    #[test]
    fn get_is_permutation_invariant() {
        let mut table = SymmetricTable::constant(3, 3, 0.0);
        table.set_sorted(&[0, 1, 2], 7.5);
        assert_eq!(table.get(&[2, 0, 1]), 7.5);
        assert_eq!(table.get(&[1, 2, 0]), 7.5);
    }

    #[test]
    fn ordered_multiplicities() {
        assert_eq!(ordered_multiplicity(&[]), 1.0);
        assert_eq!(ordered_multiplicity(&[0, 1, 2]), 6.0);
        assert_eq!(ordered_multiplicity(&[0, 0, 1]), 3.0);
        assert_eq!(ordered_multiplicity(&[1, 1, 1]), 1.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(23, 3), 1771.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }
}
