#![allow(dead_code)]

use qubo_gnn::graph::Graph;
use rand::Rng;

/// All `2^n` assignments, `x_i` = bit `i` of the counter.
pub fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

/// G(n, density) with unit weights.
pub fn gnp(rng: &mut impl Rng, n: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::from_edge_list(n, edges).unwrap()
}

use qubo_gnn::gnn::{backward, forward, EmbeddingTable, GcnModel};
use qubo_gnn::qubo::QuboInstance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
/// Steps tried in order by [`fd_check`]. Large steps lose to ReLU kinks near
/// the point, small ones to roundoff on tiny gradients.
pub const STENCIL_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];
pub const REL_TOL: f64 = 1e-4;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    gnp(rng, n, 0.4)
}

fn eval_loss(model: &GcnModel, g: &Graph, emb: &EmbeddingTable, q: &QuboInstance) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (p, _) = forward(model, g, emb, false, &mut rng).unwrap();
    q.relaxed_loss_and_gradient(&p).unwrap().0
}

fn set_param(m: &mut GcnModel, k: usize, which: usize, i: usize, v: f64) {
    let layer = &mut m.layers_mut()[k];
    let mat = if which == 0 { &mut layer.w } else { &mut layer.b };
    mat.as_mut_slice()[i] = v;
}

/// `(8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h`.
fn stencil(h: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

/// Tries each of [`STENCIL_STEPS`] until one agrees; a wrong derivative
/// disagrees at every scale. Returns `(rel_err, fd)` of the closest.
fn closest_fd(analytic: f64, mut fd_at: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut closest = (f64::INFINITY, f64::NAN);
    for h in STENCIL_STEPS {
        let fd = fd_at(h);
        let e = rel_err(analytic, fd);
        if e < closest.0 {
            closest = (e, fd);
        }
        if e < REL_TOL {
            break;
        }
    }
    closest
}

fn judge(label: String, analytic: f64, (e, fd): (f64, f64)) -> Result<f64, String> {
    if e < REL_TOL {
        Ok(e)
    } else {
        Err(format!("{label}: analytic {analytic} fd {fd} rel {e}"))
    }
}

/// Central differences on every parameter. Returns the worst relative error,
/// or a description of the first parameter above [`REL_TOL`].
pub fn fd_check(
    model: &mut GcnModel,
    g: &Graph,
    emb: &mut EmbeddingTable,
    q: &QuboInstance,
) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (_, cache) = forward(model, g, emb, false, &mut rng).unwrap();
    let grads = backward(&cache, model, emb, q).unwrap();
    drop(cache);

    let mut worst: f64 = 0.0;
    for i in 0..emb.values().as_slice().len() {
        let orig = emb.values().as_slice()[i];
        let analytic = grads.embedding.as_slice()[i];
        let res = closest_fd(analytic, |h| {
            stencil(h, |d| {
                emb.values_mut().as_mut_slice()[i] = orig + d;
                eval_loss(model, g, emb, q)
            })
        });
        emb.values_mut().as_mut_slice()[i] = orig;
        worst = worst.max(judge(format!("h0[{i}]"), analytic, res)?);
    }
    for k in 0..model.num_layers() {
        for which in 0..2 {
            for i in 0..model.layers()[k].w.as_slice().len() {
                let orig = if which == 0 {
                    model.layers()[k].w.as_slice()[i]
                } else {
                    model.layers()[k].b.as_slice()[i]
                };
                let analytic = if which == 0 {
                    grads.layers[k].0.as_slice()[i]
                } else {
                    grads.layers[k].1.as_slice()[i]
                };
                let res = closest_fd(analytic, |h| {
                    stencil(h, |d| {
                        set_param(model, k, which, i, orig + d);
                        eval_loss(model, g, emb, q)
                    })
                });
                set_param(model, k, which, i, orig);
                let name = if which == 0 { "W" } else { "B" };
                worst = worst.max(judge(format!("{name}{}[{i}]", k + 1), analytic, res)?);
            }
        }
    }
    Ok(worst)
}
