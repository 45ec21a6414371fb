//! Sparse QUBO, PUBO and Ising Hamiltonians.
//!
//! A [`QuboInstance`] stores the upper triangle only (`i <= j`). Linear terms
//! live on the diagonal since `x_i^2 = x_i`, so
//! `H(x) = offset + sum_{i<=j} Q_ij x_i x_j`. A symmetric matrix `S` with
//! `H = x^T S x` maps to `Q_ii = S_ii` and `Q_ij = 2 S_ij` for `i < j`;
//! [`QuboInstance::from_terms`] does this folding when it is given both
//! `(i, j)` and `(j, i)`.

mod encode;
mod io;
mod ising;
mod pubo;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::Graph;

pub use encode::{build_maxcut_qubo, build_mis_qubo, cut_size, independence_check, Independence};
pub use io::QuboFormatError;
pub use ising::{ising_to_qubo, qubo_to_ising, IsingInstance};
pub use pubo::{pubo_energy, PuboInstance};

/// Slack allowed on probabilities before [`QuboError::OutOfRangeProbability`].
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("expected {expected} variables, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("probability p[{index}] = {value} outside [0, 1]")]
    OutOfRangeProbability { index: usize, value: f64 },
    #[error("penalty must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("non-finite coefficient for term {0:?}")]
    NonFiniteCoefficient(Vec<usize>),
    #[error("term {0:?} repeats a variable")]
    RepeatedIndex(Vec<usize>),
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<(), QuboError> {
    if expected != found {
        return Err(QuboError::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Validates `p` against `[0, 1]` with [`PROBABILITY_TOLERANCE`] slack and clamps it.
pub(crate) fn clamp_probabilities(p: &[f64]) -> Result<Vec<f64>, QuboError> {
    p.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !(-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&value) {
                return Err(QuboError::OutOfRangeProbability { index, value });
            }
            Ok(value.clamp(0.0, 1.0))
        })
        .collect()
}

/// Upper-triangular sparse QUBO.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    n: usize,
    offset: f64,
    diag: Vec<f64>,
    // (i, j, Q_ij) with i < j, sorted
    couplings: Vec<(usize, usize, f64)>,
    // CSR over couplings, both directions
    offsets: Vec<usize>,
    adjacent: Vec<(usize, f64)>,
}

impl QuboInstance {
    /// Builds an instance from `(i, j, c)` triples in any orientation.
    ///
    /// Repeated and mirrored entries are summed; entries that cancel to zero are dropped.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self, QuboError> {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, c) in terms {
            for index in [a, b] {
                if index >= n {
                    return Err(QuboError::IndexOutOfRange { index, n });
                }
            }
            if !c.is_finite() {
                return Err(QuboError::NonFiniteCoefficient(vec![a, b]));
            }
            *map.entry((a.min(b), a.max(b))).or_insert(0.0) += c;
        }
        if !offset.is_finite() {
            return Err(QuboError::NonFiniteCoefficient(vec![]));
        }

        let mut diag = vec![0.0; n];
        let mut couplings = Vec::new();
        for ((i, j), c) in map {
            if c == 0.0 {
                continue;
            }
            if i == j {
                diag[i] = c;
            } else {
                couplings.push((i, j, c));
            }
        }

        let mut counts = vec![0usize; n];
        for &(i, j, _) in &couplings {
            counts[i] += 1;
            counts[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut adjacent = vec![(0, 0.0); offsets[n]];
        for &(i, j, c) in &couplings {
            adjacent[cursor[i]] = (j, c);
            cursor[i] += 1;
            adjacent[cursor[j]] = (i, c);
            cursor[j] += 1;
        }

        Ok(Self {
            n,
            offset,
            diag,
            couplings,
            offsets,
            adjacent,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Diagonal (linear) coefficients `Q_ii`.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal coefficients `(i, j, Q_ij)`, `i < j`, sorted.
    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    /// Coupled variables of `i` with their coefficient.
    pub fn adjacent(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacent[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Coefficient `Q_ij` in upper-triangular convention (either argument order).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        if a == b {
            return self.diag[a];
        }
        self.adjacent(a)
            .iter()
            .find(|&&(k, _)| k == b)
            .map_or(0.0, |&(_, c)| c)
    }

    /// All nonzero terms `((i, j), Q_ij)` with `i <= j` in lexicographic order.
    pub fn terms(&self) -> Vec<((usize, usize), f64)> {
        let mut out: Vec<_> = self
            .diag
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| ((i, i), c))
            .chain(self.couplings.iter().map(|&(i, j, c)| ((i, j), c)))
            .collect();
        out.sort_by_key(|t| t.0);
        out
    }

    pub fn num_terms(&self) -> usize {
        self.diag.iter().filter(|&&c| c != 0.0).count() + self.couplings.len()
    }

    /// `offset + sum_{i<=j} Q_ij x_i x_j`.
    pub fn energy(&self, x: &[bool]) -> Result<f64, QuboError> {
        check_len(self.n, x.len())?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[bool]) -> f64 {
        let mut e = self.offset;
        for (i, &c) in self.diag.iter().enumerate() {
            if x[i] {
                e += c;
            }
        }
        for &(i, j, c) in &self.couplings {
            if x[i] && x[j] {
                e += c;
            }
        }
        e
    }

    /// Local field `Q_ii + sum_{j != i} Q_ij x_j`; flipping `x_i` changes the
    /// energy by `(1 - 2 x_i)` times this value.
    pub fn local_field(&self, x: &[bool], i: usize) -> f64 {
        self.diag[i]
            + self
                .adjacent(i)
                .iter()
                .filter(|&&(j, _)| x[j])
                .map(|&(_, c)| c)
                .sum::<f64>()
    }

    /// Relaxed loss `offset + sum_{i<=j} Q_ij p_i p_j` and its gradient in `p`.
    pub fn relaxed_loss_and_gradient(&self, p: &[f64]) -> Result<(f64, Vec<f64>), QuboError> {
        check_len(self.n, p.len())?;
        let p = clamp_probabilities(p)?;
        let mut grad = vec![0.0; self.n];
        let loss = self.relaxed_into(&p, &mut grad);
        Ok((loss, grad))
    }

    /// Unchecked relaxed loss; writes the gradient into `grad`.
    pub(crate) fn relaxed_into(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let mut loss = self.offset;
        for (i, &c) in self.diag.iter().enumerate() {
            loss += c * p[i] * p[i];
            grad[i] = 2.0 * c * p[i];
        }
        for &(i, j, c) in &self.couplings {
            loss += c * p[i] * p[j];
            grad[i] += c * p[j];
            grad[j] += c * p[i];
        }
        loss
    }

    /// Graph on the variables with an edge per nonzero coupling, weighted by `Q_ij`.
    pub fn interaction_graph(&self) -> Graph {
        Graph::from_edge_list(self.n, self.couplings.iter().copied())
            .expect("couplings are canonical and unique")
    }
}

/// `offset + sum_{i<=j} Q_ij x_i x_j`.
pub fn qubo_energy(q: &QuboInstance, x: &[bool]) -> Result<f64, QuboError> {
    q.energy(x)
}

/// See [`QuboInstance::relaxed_loss_and_gradient`].
pub fn relaxed_loss_and_gradient(q: &QuboInstance, p: &[f64]) -> Result<(f64, Vec<f64>), QuboError> {
    q.relaxed_loss_and_gradient(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::all_bitstrings;

    fn k3() -> QuboInstance {
        build_maxcut_qubo(&Graph::from_edge_list(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap())
    }

    #[test]
    fn zeros_give_offset() {
        let q = QuboInstance::from_terms(3, [(0, 1, 2.0), (2, 2, -1.0)], 4.5).unwrap();
        assert_eq!(q.energy(&[false; 3]).unwrap(), 4.5);
    }

    #[test]
    fn k3_energies() {
        let q = k3();
        assert_eq!(q.energy(&[true, false, false]).unwrap(), -2.0);
        assert_eq!(q.energy(&[true, true, true]).unwrap(), 0.0);
        assert_eq!(
            q.energy(&[true]),
            Err(QuboError::LengthMismatch { expected: 3, found: 1 })
        );
    }

    #[test]
    fn folds_symmetric_input() {
        let q = QuboInstance::from_terms(2, [(0, 1, 1.5), (1, 0, 1.5), (0, 0, 1.0), (1, 1, 0.0)], 0.0)
            .unwrap();
        assert_eq!(q.get(0, 1), 3.0);
        assert_eq!(q.get(1, 0), 3.0);
        assert_eq!(q.terms(), vec![((0, 0), 1.0), ((0, 1), 3.0)]);
        let cancel = QuboInstance::from_terms(2, [(0, 1, 1.0), (1, 0, -1.0)], 0.0).unwrap();
        assert_eq!(cancel.num_terms(), 0);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(matches!(
            QuboInstance::from_terms(2, [(0, 2, 1.0)], 0.0),
            Err(QuboError::IndexOutOfRange { index: 2, n: 2 })
        ));
        assert!(matches!(
            QuboInstance::from_terms(2, [(0, 1, f64::NAN)], 0.0),
            Err(QuboError::NonFiniteCoefficient(_))
        ));
    }

    #[test]
    fn relaxation_agrees_at_corners() {
        let q = QuboInstance::from_terms(4, [(0, 1, 2.0), (1, 3, -1.5), (2, 2, 0.5), (0, 0, -1.0)], 0.25)
            .unwrap();
        for x in all_bitstrings(4) {
            let p: Vec<f64> = x.iter().map(|&b| b as u8 as f64).collect();
            let (loss, _) = q.relaxed_loss_and_gradient(&p).unwrap();
            assert_eq!(loss, q.energy(&x).unwrap());
        }
    }

    #[test]
    fn k3_half_is_stationary() {
        let (loss, grad) = k3().relaxed_loss_and_gradient(&[0.5; 3]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.0; 3]);
    }

    #[test]
    fn mis_edge_half() {
        let g = Graph::from_edge_list(2, [(0, 1, 1.0)]).unwrap();
        let q = build_mis_qubo(&g, 2.0).unwrap();
        let (loss, grad) = q.relaxed_loss_and_gradient(&[0.5, 0.5]).unwrap();
        // diagonal enters as Q_ii p_i^2: 2 * (-1 * 0.25) + 2 * 0.25
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.0, 0.0]);
    }

    #[test]
    fn probability_range() {
        let q = k3();
        assert!(q.relaxed_loss_and_gradient(&[1.0 + 1e-12, 0.0, -1e-12]).is_ok());
        assert!(matches!(
            q.relaxed_loss_and_gradient(&[1.1, 0.0, 0.0]),
            Err(QuboError::OutOfRangeProbability { index: 0, .. })
        ));
        assert!(matches!(
            q.relaxed_loss_and_gradient(&[0.0, f64::NAN, 0.0]),
            Err(QuboError::OutOfRangeProbability { index: 1, .. })
        ));
    }

    #[test]
    fn local_field_matches_flip_delta() {
        let q = QuboInstance::from_terms(4, [(0, 1, 2.0), (1, 3, -1.5), (2, 2, 0.5), (0, 0, -1.0), (0, 3, 1.0)], 0.0)
            .unwrap();
        for x in all_bitstrings(4) {
            for i in 0..4 {
                let mut y = x.clone();
                y[i] = !y[i];
                let delta = q.energy(&y).unwrap() - q.energy(&x).unwrap();
                let sign = if x[i] { -1.0 } else { 1.0 };
                assert!((delta - sign * q.local_field(&x, i)).abs() < 1e-12);
            }
        }
    }
}
