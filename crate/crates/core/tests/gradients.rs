//! Analytic gradients against central finite differences.

mod common;

use common::{fd_check, random_graph, STEP};
use proptest::prelude::*;
use qubo_gnn::gnn::{init_parameters, EmbeddingTable, GcnModel};
use qubo_gnn::graph::Graph;
use qubo_gnn::qubo::{build_maxcut_qubo, build_mis_qubo, PuboInstance, QuboInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_fd(model: &mut GcnModel, g: &Graph, emb: &mut EmbeddingTable, q: &QuboInstance) {
    if let Err(msg) = fd_check(model, g, emb, q) {
        panic!("{msg}");
    }
}

fn random_dims(rng: &mut ChaCha8Rng, max_hidden_layers: usize, max_width: usize) -> Vec<usize> {
    let k = rng.random_range(1..=max_hidden_layers);
    let mut dims: Vec<usize> = (0..=k).map(|_| rng.random_range(1..=max_width)).collect();
    dims.push(1);
    dims
}

#[test]
fn gcn_gradients_twenty_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let n = rng.random_range(4..=12);
        let g = random_graph(&mut rng, n);
        let q = if case % 2 == 0 {
            build_maxcut_qubo(&g)
        } else {
            build_mis_qubo(&g, 2.0).unwrap()
        };
        let dims = random_dims(&mut rng, 3, 6);
        let (mut emb, mut model) = init_parameters(n, &dims, case).unwrap();
        assert_fd(&mut model, &g, &mut emb, &q);
    }
}

#[test]
fn gcn_gradients_on_eight_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = random_graph(&mut rng, 8);
    let q = build_maxcut_qubo(&g);
    let (mut emb, mut model) = init_parameters(8, &[3, 4, 1], 1).unwrap();
    assert_fd(&mut model, &g, &mut emb, &q);
}

#[test]
fn gcn_gradients_with_isolated_vertices() {
    let g = Graph::from_edge_list(6, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let q = QuboInstance::from_terms(6, [(0, 0, -1.0), (3, 3, 2.0), (0, 1, 1.5), (4, 5, -2.0)], 0.3).unwrap();
    let (mut emb, mut model) = init_parameters(6, &[2, 3, 2, 1], 5).unwrap();
    assert_fd(&mut model, &g, &mut emb, &q);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gcn_gradients_random(seed in any::<u64>(), n in 4usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n);
        let q = build_maxcut_qubo(&g);
        let dims = random_dims(&mut rng, 3, 6);
        let (mut emb, mut model) = init_parameters(n, &dims, seed).unwrap();
        assert_fd(&mut model, &g, &mut emb, &q);
    }

    #[test]
    fn qubo_gradient_matches_fd(
        terms in proptest::collection::vec((0usize..7, 0usize..7, -3.0f64..3.0), 0..25),
        p in proptest::collection::vec(0.05f64..0.95, 7),
    ) {
        let q = QuboInstance::from_terms(7, terms, 0.0).unwrap();
        let (_, grad) = q.relaxed_loss_and_gradient(&p).unwrap();
        for k in 0..7 {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[k] += STEP;
            down[k] -= STEP;
            let fd = (q.relaxed_loss_and_gradient(&up).unwrap().0
                - q.relaxed_loss_and_gradient(&down).unwrap().0) / (2.0 * STEP);
            prop_assert!((fd - grad[k]).abs() < 1e-6 * fd.abs().max(1.0), "k={} fd={} an={}", k, fd, grad[k]);
        }
    }

    #[test]
    fn pubo_gradient_matches_fd(
        terms in proptest::collection::vec(
            (proptest::collection::btree_set(0usize..6, 1..=4), -3.0f64..3.0), 0..15),
        p in proptest::collection::vec(0.05f64..0.95, 6),
    ) {
        let terms = terms.into_iter().map(|(s, c)| (s.into_iter().collect::<Vec<_>>(), c));
        let pubo = PuboInstance::from_terms(6, terms, 0.0).unwrap();
        let (_, grad) = pubo.relaxed_loss_and_gradient(&p).unwrap();
        for k in 0..6 {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[k] += STEP;
            down[k] -= STEP;
            let fd = (pubo.relaxed_loss_and_gradient(&up).unwrap().0
                - pubo.relaxed_loss_and_gradient(&down).unwrap().0) / (2.0 * STEP);
            prop_assert!((fd - grad[k]).abs() < 1e-6 * fd.abs().max(1.0), "k={} fd={} an={}", k, fd, grad[k]);
        }
    }
}
