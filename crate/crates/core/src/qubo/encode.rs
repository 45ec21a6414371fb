use crate::graph::{Edge, Graph};

use super::{check_len, QuboError, QuboInstance};

/// MaxCut Hamiltonian `sum_{i<j} A_ij (2 x_i x_j - x_i - x_j)`.
///
/// The minimum energy is minus the maximum cut weight.
pub fn build_maxcut_qubo(g: &Graph) -> QuboInstance {
    let terms = g
        .edges()
        .iter()
        .flat_map(|e| [(e.u, e.u, -e.w), (e.v, e.v, -e.w), (e.u, e.v, 2.0 * e.w)]);
    QuboInstance::from_terms(g.n(), terms, 0.0).expect("graph indices are in range")
}

/// MIS Hamiltonian `-sum_i x_i + P sum_{(i,j)} x_i x_j`.
pub fn build_mis_qubo(g: &Graph, penalty: f64) -> Result<QuboInstance, QuboError> {
    if !(penalty > 0.0) {
        return Err(QuboError::NonPositivePenalty(penalty));
    }
    let linear = (0..g.n()).map(|i| (i, i, -1.0));
    let quadratic = g.edges().iter().map(|e| (e.u, e.v, penalty));
    QuboInstance::from_terms(g.n(), linear.chain(quadratic), 0.0)
}

/// Total weight of edges whose endpoints take different values.
pub fn cut_size(g: &Graph, x: &[bool]) -> Result<f64, QuboError> {
    check_len(g.n(), x.len())?;
    Ok(g.edges()
        .iter()
        .filter(|e| x[e.u] != x[e.v])
        .map(|e| e.w)
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Independence {
    pub size: usize,
    pub violated_edges: Vec<(usize, usize)>,
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        self.violated_edges.is_empty()
    }
}

/// Set size and the edges with both endpoints selected.
pub fn independence_check(g: &Graph, x: &[bool]) -> Result<Independence, QuboError> {
    check_len(g.n(), x.len())?;
    Ok(Independence {
        size: x.iter().filter(|&&b| b).count(),
        violated_edges: g
            .edges()
            .iter()
            .filter(|e| x[e.u] && x[e.v])
            .map(|&Edge { u, v, .. }| (u, v))
            .collect(),
    })
}
