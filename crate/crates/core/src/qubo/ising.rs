use std::collections::BTreeMap;

use super::{check_len, QuboError, QuboInstance};

/// Ising Hamiltonian `offset + sum_{i<j} J_ij z_i z_j + sum_i h_i z_i`, `z_i in {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingInstance {
    /// Couplings may be given in either orientation; mirrored entries are summed.
    pub fn new(
        n: usize,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        fields: Vec<f64>,
        offset: f64,
    ) -> Result<Self, QuboError> {
        check_len(n, fields.len())?;
        let mut map = BTreeMap::new();
        for (a, b, j) in couplings {
            for index in [a, b] {
                if index >= n {
                    return Err(QuboError::IndexOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(QuboError::RepeatedIndex(vec![a, b]));
            }
            if !j.is_finite() {
                return Err(QuboError::NonFiniteCoefficient(vec![a, b]));
            }
            *map.entry((a.min(b), a.max(b))).or_insert(0.0) += j;
        }
        map.retain(|_, j| *j != 0.0);
        Ok(Self {
            n,
            couplings: map,
            fields,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Energy of a spin configuration given as booleans (`true` is `+1`).
    pub fn energy(&self, spins: &[bool]) -> Result<f64, QuboError> {
        check_len(self.n, spins.len())?;
        let z = |i: usize| if spins[i] { 1.0 } else { -1.0 };
        let mut e = self.offset;
        for (i, h) in self.fields.iter().enumerate() {
            e += h * z(i);
        }
        for (&(i, j), c) in &self.couplings {
            e += c * z(i) * z(j);
        }
        Ok(e)
    }
}

/// Substitutes `z_i = 2 x_i - 1`.
///
/// Under this map `x_i = 1` is spin up, so `H_ising(z(x)) == H_qubo(x)` for every `x`.
pub fn ising_to_qubo(s: &IsingInstance) -> QuboInstance {
    let mut offset = s.offset;
    let mut terms = Vec::with_capacity(s.n + 3 * s.couplings.len());
    for (i, &h) in s.fields.iter().enumerate() {
        // h (2x - 1)
        terms.push((i, i, 2.0 * h));
        offset -= h;
    }
    for (&(i, j), &c) in &s.couplings {
        // J (2x_i - 1)(2x_j - 1) = J (4 x_i x_j - 2 x_i - 2 x_j + 1)
        terms.push((i, j, 4.0 * c));
        terms.push((i, i, -2.0 * c));
        terms.push((j, j, -2.0 * c));
        offset += c;
    }
    QuboInstance::from_terms(s.n, terms, offset).expect("ising instance is valid")
}

/// Substitutes `x_i = (z_i + 1) / 2`; inverse of [`ising_to_qubo`].
pub fn qubo_to_ising(q: &QuboInstance) -> IsingInstance {
    let mut offset = q.offset();
    let mut fields = vec![0.0; q.n()];
    for (i, &c) in q.diag().iter().enumerate() {
        // c (z + 1) / 2
        fields[i] += c / 2.0;
        offset += c / 2.0;
    }
    let mut couplings = Vec::with_capacity(q.couplings().len());
    for &(i, j, c) in q.couplings() {
        // c (z_i z_j + z_i + z_j + 1) / 4
        couplings.push((i, j, c / 4.0));
        fields[i] += c / 4.0;
        fields[j] += c / 4.0;
        offset += c / 4.0;
    }
    IsingInstance::new(q.n(), couplings, fields, offset).expect("qubo instance is valid")
}
