//! Exact oracle, classical comparators and analytical bounds.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::qubo::{cut_size, QuboInstance};

/// Largest instance [`brute_force_min`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("{n} variables exceed the brute-force limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("no bound is known for degree {0}")]
    UnsupportedDegree(usize),
    #[error("repeats must be at least 1")]
    NoRepeats,
}

/// Constants behind [`theoretical_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants;

impl BoundConstants {
    /// Parisi constant from the large-n MaxCut estimate on random regular graphs.
    pub const PARISI: f64 = 0.7632;

    /// Best known upper bound on `alpha / n` for random d-regular graphs.
    pub fn mis_ratio(d: usize) -> Option<f64> {
        match d {
            3 => Some(0.45537),
            5 => Some(0.38443),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundProblem {
    MaxCut,
    Mis,
}

/// Large-n upper estimates for d-regular graphs: `(d/4 + P* sqrt(d/4)) n` for
/// MaxCut, `ratio(d) n` for MIS.
pub fn theoretical_bounds(problem: BoundProblem, d: usize, n: usize) -> Result<f64, BaselineError> {
    let n = n as f64;
    match problem {
        BoundProblem::MaxCut => {
            if d == 0 {
                return Err(BaselineError::UnsupportedDegree(d));
            }
            let q = d as f64 / 4.0;
            Ok((q + BoundConstants::PARISI * q.sqrt()) * n)
        }
        BoundProblem::Mis => BoundConstants::mis_ratio(d)
            .map(|r| r * n)
            .ok_or(BaselineError::UnsupportedDegree(d)),
    }
}

/// Exhaustive minimum over `m = 0..2^n` with `x_i` = bit `i` of `m`; the
/// smallest `m` wins ties.
pub fn brute_force_min(q: &QuboInstance) -> Result<(Vec<bool>, f64), BaselineError> {
    let n = q.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(BaselineError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    // m-1 -> m flips bits 0..=trailing_zeros(m); energy follows through local fields.
    let mut x = vec![false; n];
    let mut field: Vec<f64> = q.diag().to_vec();
    let mut e = q.offset();
    let mut best_e = e;
    let mut best_m = 0u64;
    let flip = |x: &mut [bool], field: &mut [f64], e: &mut f64, i: usize| {
        if x[i] {
            *e -= field[i];
        } else {
            *e += field[i];
        }
        x[i] = !x[i];
        let sign = if x[i] { 1.0 } else { -1.0 };
        for &(j, c) in q.adjacent(i) {
            field[j] += sign * c;
        }
    };
    for m in 1..(1u64 << n) {
        for i in 0..=m.trailing_zeros() as usize {
            flip(&mut x, &mut field, &mut e, i);
        }
        // slack absorbs drift in the running sum; the winner is recomputed below
        if e < best_e - 1e-9 {
            best_e = e;
            best_m = m;
        }
    }
    let best: Vec<bool> = (0..n).map(|i| best_m >> i & 1 == 1).collect();
    let energy = q.energy_unchecked(&best);
    Ok((best, energy))
}

/// Best cut over `repeats` uniformly random bipartitions.
pub fn random_cut_baseline(g: &Graph, seed: u64, repeats: usize) -> Result<f64, BaselineError> {
    if repeats == 0 {
        return Err(BaselineError::NoRepeats);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![false; g.n()];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..repeats {
        x.iter_mut().for_each(|b| *b = rng.random());
        best = best.max(cut_size(g, &x).expect("length matches"));
    }
    Ok(best)
}

/// Minimum-degree greedy independent set.
pub fn greedy_mis(g: &Graph) -> Vec<bool> {
    let n = g.n();
    let mut degree = g.degrees();
    let mut alive = vec![true; n];
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (degree[v], v)).collect();
    let mut x = vec![false; n];
    while let Some((_, v)) = queue.pop_first() {
        x[v] = true;
        alive[v] = false;
        for &(u, _) in g.neighbors(v) {
            if !alive[u] {
                continue;
            }
            alive[u] = false;
            queue.remove(&(degree[u], u));
            for &(w, _) in g.neighbors(u) {
                if alive[w] {
                    queue.remove(&(degree[w], w));
                    degree[w] -= 1;
                    queue.insert((degree[w], w));
                }
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_d_regular;
    use crate::qubo::{build_maxcut_qubo, build_mis_qubo, independence_check};
    use crate::testutil::{all_bitstrings, random_graph};

    #[test]
    fn brute_force_examples() {
        let q = QuboInstance::from_terms(3, [], 2.5).unwrap();
        assert_eq!(brute_force_min(&q).unwrap(), (vec![false; 3], 2.5));

        let c5 = Graph::from_edge_list(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
        assert_eq!(brute_force_min(&build_maxcut_qubo(&c5)).unwrap().1, -4.0);

        let edge = Graph::from_edge_list(2, [(0, 1, 1.0)]).unwrap();
        let q = build_mis_qubo(&edge, 2.0).unwrap();
        assert_eq!(brute_force_min(&q).unwrap(), (vec![true, false], -1.0));

        let big = QuboInstance::from_terms(27, [], 0.0).unwrap();
        assert!(matches!(brute_force_min(&big), Err(BaselineError::TooLarge { n: 27, .. })));
    }

    #[test]
    fn brute_force_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let g = random_graph(&mut rng, 12, true);
            let q = build_maxcut_qubo(&g);
            let (x, e) = brute_force_min(&q).unwrap();
            assert_eq!(q.energy(&x).unwrap(), e);
            let mut best = f64::INFINITY;
            let mut arg = None;
            for y in all_bitstrings(g.n()) {
                let ey = q.energy(&y).unwrap();
                if ey < best {
                    best = ey;
                    arg = Some(y);
                }
            }
            assert_eq!(e, best);
            assert_eq!(Some(x), arg);
        }
    }

    #[test]
    fn bounds() {
        let b = theoretical_bounds(BoundProblem::MaxCut, 3, 1000).unwrap();
        assert!((b - 1410.95).abs() < 0.01, "{b}");
        let m = theoretical_bounds(BoundProblem::Mis, 3, 1000).unwrap();
        assert!((m - 455.37).abs() < 1e-9);
        assert_eq!(
            theoretical_bounds(BoundProblem::Mis, 4, 10),
            Err(BaselineError::UnsupportedDegree(4))
        );
        for d in 1..50 {
            assert!(theoretical_bounds(BoundProblem::MaxCut, d, 7).unwrap() > d as f64 / 4.0 * 7.0);
        }
    }

    #[test]
    fn random_cut_examples() {
        assert_eq!(random_cut_baseline(&Graph::empty(4), 0, 3).unwrap(), 0.0);
        let edge = Graph::from_edge_list(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(random_cut_baseline(&edge, 0, 100).unwrap(), 1.0);
        let g = generate_d_regular(1000, 3, 5).unwrap();
        let frac = random_cut_baseline(&g, 1, 1).unwrap() / g.num_edges() as f64;
        assert!((0.4..=0.6).contains(&frac), "{frac}");
        assert_eq!(random_cut_baseline(&g, 9, 3), random_cut_baseline(&g, 9, 3));
        assert_eq!(random_cut_baseline(&g, 9, 0), Err(BaselineError::NoRepeats));
    }

    #[test]
    fn random_cut_mean_is_half() {
        let g = generate_d_regular(100, 3, 8).unwrap();
        let m = g.num_edges() as f64;
        let reps = 10_000;
        let mean = (0..reps)
            .map(|s| random_cut_baseline(&g, s, 1).unwrap())
            .sum::<f64>()
            / reps as f64;
        // standard error of the mean is sqrt(m)/2/sqrt(reps)
        let se = m.sqrt() / 2.0 / (reps as f64).sqrt();
        assert!((mean - m / 2.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn greedy_mis_examples() {
        assert_eq!(greedy_mis(&Graph::empty(5)), vec![true; 5]);
        let k3 = Graph::from_edge_list(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(greedy_mis(&k3).iter().filter(|&&b| b).count(), 1);
        let path = Graph::from_edge_list(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(greedy_mis(&path), vec![true, false, true]);
    }

    #[test]
    fn greedy_mis_is_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_graph(&mut rng, 40, false);
            assert!(independence_check(&g, &greedy_mis(&g)).unwrap().is_independent());
        }
    }
}
