//! Graph convolutional network with mean neighbor aggregation.
//!
//! Layer `k` maps node features `H` (n x d_{k-1}) to
//! `Z = mean_agg(H) W_k + H B_k`, where `mean_agg` averages each node's
//! neighbors (the zero vector for isolated nodes). Hidden layers apply a
//! rectifier followed by inverted dropout; the last layer has width one and a
//! logistic output, giving one probability per node.
//!
//! Since aggregation is linear it commutes with the right multiplication, so the
//! forward pass computes `mean_agg(H W_k)` and the backward pass routes the
//! upstream gradient through the transposed aggregation on the narrow side.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::matrix::{axpy, dot, Matrix};
use super::GnnError;
use crate::graph::Graph;
use crate::qubo::QuboInstance;

/// Smallest and largest probabilities emitted by the output layer.
///
/// The logistic function rounds to exactly 0 or 1 for large pre-activations;
/// outputs are kept strictly inside the unit interval.
pub const P_MIN: f64 = f64::MIN_POSITIVE;
pub const P_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

static VERSION: AtomicU64 = AtomicU64::new(1);

fn next_version() -> u64 {
    VERSION.fetch_add(1, Ordering::Relaxed)
}

fn int_root(n: usize, k: u32) -> usize {
    let mut r = (n as f64).powf(1.0 / k as f64).round() as usize;
    while r > 0 && r.pow(k) > n {
        r -= 1;
    }
    while (r + 1).pow(k) <= n {
        r += 1;
    }
    r
}

/// Embedding and hidden width from the graph size: `d0 = int(sqrt(n))` for
/// `n >= 1e5`, otherwise `int(cbrt(n))`; `d1 = int(d0 / 2)`. Both are at least 1.
pub fn hyperparams_default(n: usize) -> (usize, usize) {
    let d0 = if n >= 100_000 { int_root(n, 2) } else { int_root(n, 3) }.max(1);
    (d0, (d0 / 2).max(1))
}

/// Layer widths below the output: embedding size and hidden sizes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Architecture {
    pub embedding_dim: usize,
    pub hidden_dims: Vec<usize>,
}

impl Architecture {
    /// Two-layer default from [`hyperparams_default`].
    pub fn default_for(n: usize) -> Self {
        let (d0, d1) = hyperparams_default(n);
        Self {
            embedding_dim: d0,
            hidden_dims: vec![d1],
        }
    }

    /// Full width chain `d_0, ..., d_K` with `d_K = 1`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.embedding_dim);
        dims.extend(&self.hidden_dims);
        dims.push(1);
        dims
    }
}

/// Neighbor aggregation rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Aggregation {
    /// Average over neighbors; isolated nodes aggregate to zero.
    #[default]
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayer {
    /// Neighbor weights, `d_in x d_out`.
    pub w: Matrix,
    /// Self weights, `d_in x d_out`.
    pub b: Matrix,
}

#[derive(Debug, Clone)]
pub struct GcnModel {
    dims: Vec<usize>,
    layers: Vec<GcnLayer>,
    dropout: f64,
    aggregation: Aggregation,
    version: u64,
}

impl GcnModel {
    /// Assembles a model from explicit layers; checks the width chain.
    pub fn from_layers(layers: Vec<GcnLayer>, dropout: f64) -> Result<Self, GnnError> {
        if layers.is_empty() {
            return Err(GnnError::InvalidDims("at least one layer required".into()));
        }
        let mut dims = vec![layers[0].w.rows()];
        for (k, l) in layers.iter().enumerate() {
            if l.w.shape() != l.b.shape() || l.w.rows() != dims[k] {
                return Err(GnnError::InvalidDims(format!("layer {k} has inconsistent shapes")));
            }
            if !l.w.is_finite() || !l.b.is_finite() {
                return Err(GnnError::InvalidDims(format!("layer {k} has non-finite weights")));
            }
            dims.push(l.w.cols());
        }
        validate_dims(&dims)?;
        if !(0.0..1.0).contains(&dropout) {
            return Err(GnnError::InvalidConfig(format!("dropout {dropout} outside [0, 1)")));
        }
        Ok(Self {
            dims,
            layers,
            dropout,
            aggregation: Aggregation::Mean,
            version: next_version(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layers(&self) -> &[GcnLayer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    pub fn with_dropout(mut self, dropout: f64) -> Result<Self, GnnError> {
        if !(0.0..1.0).contains(&dropout) {
            return Err(GnnError::InvalidConfig(format!("dropout {dropout} outside [0, 1)")));
        }
        self.dropout = dropout;
        self.version = next_version();
        Ok(self)
    }

    /// Mutable access to the layers; invalidates outstanding forward caches.
    pub fn layers_mut(&mut self) -> &mut [GcnLayer] {
        self.version = next_version();
        &mut self.layers
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| 2 * l.w.as_slice().len()).sum()
    }
}

// Equality is by value; the cache version is bookkeeping only.
impl PartialEq for GcnModel {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.layers == other.layers
            && self.dropout == other.dropout
            && self.aggregation == other.aggregation
    }
}

fn validate_dims(dims: &[usize]) -> Result<(), GnnError> {
    if dims.len() < 2 {
        return Err(GnnError::InvalidDims("need at least one layer".into()));
    }
    if dims.contains(&0) {
        return Err(GnnError::InvalidDims(format!("zero width in {dims:?}")));
    }
    if *dims.last().unwrap() != 1 {
        return Err(GnnError::InvalidDims(format!("output width must be 1, got {dims:?}")));
    }
    Ok(())
}

/// Trainable initial node representations, one row per node.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    values: Matrix,
    version: u64,
}

impl EmbeddingTable {
    pub fn new(values: Matrix) -> Result<Self, GnnError> {
        if !values.is_finite() {
            return Err(GnnError::InvalidDims("non-finite embedding".into()));
        }
        Ok(Self {
            values,
            version: next_version(),
        })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    /// Invalidates outstanding forward caches.
    pub fn values_mut(&mut self) -> &mut Matrix {
        self.version = next_version();
        &mut self.values
    }
}

impl PartialEq for EmbeddingTable {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

/// Random embeddings (standard normal scaled by `1/sqrt(d0)`) and Glorot-uniform
/// weights, deterministic in `seed`.
pub fn init_parameters(
    n: usize,
    dims: &[usize],
    seed: u64,
) -> Result<(EmbeddingTable, GcnModel), GnnError> {
    if n == 0 {
        return Err(GnnError::EmptyGraph);
    }
    validate_dims(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (dims[0] as f64).sqrt();
    let embedding = Matrix::from_fn(n, dims[0], |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * scale
    });
    let layers = dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            GcnLayer {
                w: Matrix::from_fn(fan_in, fan_out, |_, _| dist.sample(&mut rng)),
                b: Matrix::from_fn(fan_in, fan_out, |_, _| dist.sample(&mut rng)),
            }
        })
        .collect();
    Ok((EmbeddingTable::new(embedding)?, GcnModel::from_layers(layers, 0.0)?))
}

/// Intermediates of one forward pass, consumed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache<'g> {
    graph: &'g Graph,
    model_version: u64,
    embedding_version: u64,
    /// Input features of every layer.
    inputs: Vec<Matrix>,
    /// d(output)/d(pre-activation) of each hidden layer: rectifier gate times dropout scale.
    gates: Vec<Matrix>,
    probabilities: Vec<f64>,
}

impl ForwardCache<'_> {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Parameter gradients in the same layout as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Matrix,
    pub layers: Vec<(Matrix, Matrix)>,
}

impl Gradients {
    /// Flat views in the canonical order: embedding, then `W_k`, `B_k` per layer.
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = vec![self.embedding.as_slice()];
        for (w, b) in &self.layers {
            out.push(w.as_slice());
            out.push(b.as_slice());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&v| v == 0.0))
    }
}

/// Mutable parameter views in the order used by [`Gradients::slices`].
pub fn parameter_slices<'a>(
    embedding: &'a mut EmbeddingTable,
    model: &'a mut GcnModel,
) -> Vec<&'a mut [f64]> {
    let mut out = vec![embedding.values_mut().as_mut_slice()];
    for layer in model.layers_mut() {
        out.push(layer.w.as_mut_slice());
        out.push(layer.b.as_mut_slice());
    }
    out
}

/// `[W | B]`, so that both products come out of one pass over the input.
fn fused_weights(layer: &GcnLayer) -> Matrix {
    let (d_in, d_out) = layer.w.shape();
    let mut wb = Matrix::zeros(d_in, 2 * d_out);
    for t in 0..d_in {
        let row = wb.row_mut(t);
        row[..d_out].copy_from_slice(layer.w.row(t));
        row[d_out..].copy_from_slice(layer.b.row(t));
    }
    wb
}

fn layer_forward(g: &Graph, input: &Matrix, layer: &GcnLayer, aggregation: Aggregation) -> Matrix {
    let n = input.rows();
    let width = layer.w.cols();
    let wb = fused_weights(layer);
    // row v holds [h_v W | h_v B]
    let mut hwb = Matrix::zeros(n, 2 * width);
    for v in 0..n {
        let out = hwb.row_mut(v);
        for (t, &x) in input.row(v).iter().enumerate() {
            if x != 0.0 {
                axpy(x, wb.row(t), out);
            }
        }
    }
    let mut z = Matrix::zeros(n, width);
    for v in 0..n {
        let z_v = z.row_mut(v);
        z_v.copy_from_slice(&hwb.row(v)[width..]);
        match aggregation {
            Aggregation::Mean => {
                let nb = g.neighbors(v);
                if nb.is_empty() {
                    continue;
                }
                let inv = 1.0 / nb.len() as f64;
                for &(u, _) in nb {
                    axpy(inv, &hwb.row(u)[..width], z_v);
                }
            }
        }
    }
    z
}

fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(P_MIN, P_MAX)
}

/// Runs the network on `g`. Dropout is active only when `train_mode` is set.
pub fn forward<'g, R: Rng + ?Sized>(
    model: &GcnModel,
    g: &'g Graph,
    embedding: &EmbeddingTable,
    train_mode: bool,
    rng: &mut R,
) -> Result<(Vec<f64>, ForwardCache<'g>), GnnError> {
    let h0 = embedding.values();
    if h0.rows() != g.n() {
        return Err(GnnError::DimensionMismatch(format!(
            "embedding has {} rows, graph has {} nodes",
            h0.rows(),
            g.n()
        )));
    }
    if h0.cols() != model.dims[0] {
        return Err(GnnError::DimensionMismatch(format!(
            "embedding width {} but model expects {}",
            h0.cols(),
            model.dims[0]
        )));
    }

    let last = model.layers.len() - 1;
    let keep = 1.0 - model.dropout;
    let use_dropout = train_mode && model.dropout > 0.0;
    let mut inputs = Vec::with_capacity(model.layers.len());
    let mut gates = Vec::with_capacity(last);
    let mut h = h0.clone();
    for (k, layer) in model.layers.iter().enumerate() {
        let mut z = layer_forward(g, &h, layer, model.aggregation);
        inputs.push(h);
        if k == last {
            h = z;
            break;
        }
        let mut gate = Matrix::zeros(z.rows(), z.cols());
        for (zi, gi) in z.as_mut_slice().iter_mut().zip(gate.as_mut_slice()) {
            let mut scale = 1.0;
            if use_dropout {
                scale = if rng.random::<f64>() < model.dropout { 0.0 } else { 1.0 / keep };
            }
            if *zi > 0.0 {
                *gi = scale;
                *zi *= scale;
            } else {
                *zi = 0.0;
            }
        }
        gates.push(gate);
        h = z;
    }
    let probabilities: Vec<f64> = h.as_slice().iter().map(|&z| sigmoid(z)).collect();
    let cache = ForwardCache {
        graph: g,
        model_version: model.version,
        embedding_version: embedding.version,
        inputs,
        gates,
        probabilities: probabilities.clone(),
    };
    Ok((probabilities, cache))
}

/// Gradients of the relaxed QUBO loss `p^T Q p` with respect to every parameter.
pub fn backward(
    cache: &ForwardCache<'_>,
    model: &GcnModel,
    embedding: &EmbeddingTable,
    q: &QuboInstance,
) -> Result<Gradients, GnnError> {
    if q.n() != cache.graph.n() {
        return Err(GnnError::DimensionMismatch(format!(
            "QUBO has {} variables, graph has {} nodes",
            q.n(),
            cache.graph.n()
        )));
    }
    let mut dp = vec![0.0; q.n()];
    q.relaxed_into(&cache.probabilities, &mut dp);
    backward_from_output_grad(cache, model, embedding, &dp)
}

/// Backpropagates an arbitrary upstream gradient `dL/dp`.
pub fn backward_from_output_grad(
    cache: &ForwardCache<'_>,
    model: &GcnModel,
    embedding: &EmbeddingTable,
    dp: &[f64],
) -> Result<Gradients, GnnError> {
    if cache.model_version != model.version || cache.embedding_version != embedding.version {
        return Err(GnnError::StaleCache);
    }
    let g = cache.graph;
    let n = g.n();
    if dp.len() != n {
        return Err(GnnError::DimensionMismatch(format!(
            "upstream gradient has {} entries, graph has {n} nodes",
            dp.len()
        )));
    }

    let mut dz = Matrix::from_vec(
        n,
        1,
        dp.iter()
            .zip(&cache.probabilities)
            .map(|(&d, &p)| d * p * (1.0 - p))
            .collect(),
    );
    let inv_degree: Vec<f64> = (0..n)
        .map(|v| match g.degree(v) {
            0 => 0.0,
            d => 1.0 / d as f64,
        })
        .collect();

    let mut layer_grads = Vec::with_capacity(model.layers.len());
    let mut embedding_grad = None;
    for (k, layer) in model.layers.iter().enumerate().rev() {
        let input = &cache.inputs[k];
        let (d_in, d_out) = layer.w.shape();

        // row u holds [s_u | dz_u] with s = transpose(mean_agg) dz,
        // s_u = sum_{v in N(u)} dz_v / deg(v)
        let mut sd = Matrix::zeros(n, 2 * d_out);
        for u in 0..n {
            let row = sd.row_mut(u);
            row[d_out..].copy_from_slice(dz.row(u));
            for &(v, _) in g.neighbors(u) {
                axpy(inv_degree[v], dz.row(v), &mut row[..d_out]);
            }
        }

        let wb = fused_weights(layer);
        let mut dwb = Matrix::zeros(d_in, 2 * d_out);
        let mut dh = Matrix::zeros(n, d_in);
        for v in 0..n {
            let sd_v = sd.row(v);
            let h_v = input.row(v);
            let dh_v = dh.row_mut(v);
            for t in 0..d_in {
                let x = h_v[t];
                if x != 0.0 {
                    axpy(x, sd_v, dwb.row_mut(t));
                }
                dh_v[t] = dot(sd_v, wb.row(t));
            }
        }
        let dw = Matrix::from_fn(d_in, d_out, |t, j| dwb.get(t, j));
        let db = Matrix::from_fn(d_in, d_out, |t, j| dwb.get(t, d_out + j));
        layer_grads.push((dw, db));

        if k == 0 {
            embedding_grad = Some(dh);
        } else {
            let gate = &cache.gates[k - 1];
            for (d, &m) in dh.as_mut_slice().iter_mut().zip(gate.as_slice()) {
                *d *= m;
            }
            dz = dh;
        }
    }
    layer_grads.reverse();
    Ok(Gradients {
        embedding: embedding_grad.expect("at least one layer"),
        layers: layer_grads,
    })
}
