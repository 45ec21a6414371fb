use rand::Rng;

use crate::graph::Graph;

/// All `2^n` assignments, `x_i` = bit `i` of the counter.
pub fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

/// Erdos-Renyi graph on `1..=n_max` vertices with random density.
///
/// Weights are small integers when `weighted`, so energies stay exact.
pub fn random_graph(rng: &mut impl Rng, n_max: usize, weighted: bool) -> Graph {
    let n = rng.random_range(1..=n_max);
    let density: f64 = rng.random_range(0.1..0.9);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                let w = if weighted { rng.random_range(-3..=5) as f64 } else { 1.0 };
                edges.push((u, v, if w == 0.0 { 1.0 } else { w }));
            }
        }
    }
    Graph::from_edge_list(n, edges).unwrap()
}
