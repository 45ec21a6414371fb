use std::collections::BTreeMap;

use super::{check_len, clamp_probabilities, QuboError};

/// Polynomial (k-local) binary Hamiltonian `offset + sum_t c_t prod_{i in t} x_i`.
///
/// Each term is a strictly ascending index tuple; duplicate tuples are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct PuboInstance {
    n: usize,
    terms: Vec<(Vec<usize>, f64)>,
    offset: f64,
}

impl PuboInstance {
    /// Builds an instance from index tuples in any order.
    ///
    /// A tuple that repeats a variable is rejected rather than reduced via
    /// `x_i^2 = x_i`, since that usually indicates a construction bug upstream.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, f64)>,
        offset: f64,
    ) -> Result<Self, QuboError> {
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (mut idx, c) in terms {
            if let Some(&index) = idx.iter().find(|&&i| i >= n) {
                return Err(QuboError::IndexOutOfRange { index, n });
            }
            if !c.is_finite() {
                return Err(QuboError::NonFiniteCoefficient(idx));
            }
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return Err(QuboError::RepeatedIndex(idx));
            }
            // the empty tuple collects constants
            *map.entry(idx).or_insert(0.0) += c;
        }
        if !offset.is_finite() {
            return Err(QuboError::NonFiniteCoefficient(vec![]));
        }
        let constant = map.remove(&Vec::new()).unwrap_or(0.0);
        let terms = map.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(Self {
            n,
            terms,
            offset: offset + constant,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> &[(Vec<usize>, f64)] {
        &self.terms
    }

    /// Largest locality `k` among the terms.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(t, _)| t.len()).max().unwrap_or(0)
    }

    pub fn energy(&self, x: &[bool]) -> Result<f64, QuboError> {
        check_len(self.n, x.len())?;
        Ok(self.offset
            + self
                .terms
                .iter()
                .filter(|(t, _)| t.iter().all(|&i| x[i]))
                .map(|(_, c)| c)
                .sum::<f64>())
    }

    /// Relaxed loss with every `x_i` replaced by `p_i`, and its gradient.
    pub fn relaxed_loss_and_gradient(&self, p: &[f64]) -> Result<(f64, Vec<f64>), QuboError> {
        check_len(self.n, p.len())?;
        let p = clamp_probabilities(p)?;
        let mut loss = self.offset;
        let mut grad = vec![0.0; self.n];
        let mut prefix = Vec::new();
        for (t, c) in &self.terms {
            // prefix[k] = prod_{s<k} p[t[s]]; suffix product accumulated on the way back
            prefix.clear();
            prefix.push(1.0);
            for &i in t {
                prefix.push(prefix.last().unwrap() * p[i]);
            }
            loss += c * prefix[t.len()];
            let mut suffix = 1.0;
            for (k, &i) in t.iter().enumerate().rev() {
                grad[i] += c * prefix[k] * suffix;
                suffix *= p[i];
            }
        }
        Ok((loss, grad))
    }
}

/// See [`PuboInstance::energy`].
pub fn pubo_energy(p: &PuboInstance, x: &[bool]) -> Result<f64, QuboError> {
    p.energy(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_term() {
        let p = PuboInstance::from_terms(3, [(vec![0, 1, 2], 2.0)], 0.0).unwrap();
        assert_eq!(p.energy(&[true, true, true]).unwrap(), 2.0);
        assert_eq!(p.energy(&[true, false, true]).unwrap(), 0.0);
    }

    #[test]
    fn mixed_terms() {
        let p = PuboInstance::from_terms(3, [(vec![0], -1.0), (vec![2, 0, 1], 3.0)], 0.0).unwrap();
        assert_eq!(p.energy(&[true, true, true]).unwrap(), 2.0);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.terms()[1].0, vec![0, 1, 2]);
    }

    #[test]
    fn merges_and_validates() {
        let p = PuboInstance::from_terms(
            3,
            [(vec![1, 0], 1.0), (vec![0, 1], 2.0), (vec![], 0.5), (vec![2], 0.0)],
            1.0,
        )
        .unwrap();
        assert_eq!(p.terms(), &[(vec![0, 1], 3.0)]);
        assert_eq!(p.offset(), 1.5);
        assert!(matches!(
            PuboInstance::from_terms(3, [(vec![1, 1], 1.0)], 0.0),
            Err(QuboError::RepeatedIndex(_))
        ));
        assert!(matches!(
            PuboInstance::from_terms(3, [(vec![3], 1.0)], 0.0),
            Err(QuboError::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn gradient_with_zero_factor() {
        let p = PuboInstance::from_terms(3, [(vec![0, 1, 2], 2.0)], 0.0).unwrap();
        let (loss, grad) = p.relaxed_loss_and_gradient(&[0.0, 0.5, 0.5]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // loss = -p0 + 3 p0 p1 p2 + 0.5 p1 p3
        let p = PuboInstance::from_terms(
            4,
            [(vec![0], -1.0), (vec![0, 1, 2], 3.0), (vec![1, 3], 0.5)],
            0.0,
        )
        .unwrap();
        let at = [0.3, 0.6, 0.2, 0.9];
        let (_, grad) = p.relaxed_loss_and_gradient(&at).unwrap();
        let h = 1e-6;
        for k in 0..4 {
            let mut plus = at;
            let mut minus = at;
            plus[k] += h;
            minus[k] -= h;
            let fd = (p.relaxed_loss_and_gradient(&plus).unwrap().0
                - p.relaxed_loss_and_gradient(&minus).unwrap().0)
                / (2.0 * h);
            assert!((fd - grad[k]).abs() <= 1e-6 * fd.abs().max(1.0), "k={k} fd={fd} an={}", grad[k]);
        }
        // hand values: d/dp0 = -1 + 3*0.6*0.2 = -0.64
        assert!((grad[0] + 0.64).abs() < 1e-12);
    }
}
