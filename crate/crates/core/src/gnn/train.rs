use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::model::{
    backward_from_output_grad, forward, init_parameters, parameter_slices, Architecture,
    EmbeddingTable, GcnModel,
};
use super::GnnError;
use crate::graph::Graph;
use crate::qubo::QuboInstance;
use crate::solver::project;

/// Training schedule for one or more shots.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub abs_tolerance: f64,
    pub patience: usize,
    pub learning_rate: f64,
    pub shots: usize,
    pub seed: u64,
    pub dropout: f64,
    /// Probabilities at or above this value project to 1. `1.0` truncates.
    pub threshold: f64,
    /// Widths below the output layer; `None` picks [`Architecture::default_for`].
    pub architecture: Option<Architecture>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 100_000,
            abs_tolerance: 1e-4,
            patience: 1000,
            learning_rate: 1e-4,
            shots: 5,
            seed: 0,
            dropout: 0.0,
            threshold: 0.5,
            architecture: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GnnError> {
        let bad = |m: String| Err(GnnError::InvalidConfig(m));
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive".into());
        }
        if self.patience == 0 {
            return bad("patience must be positive".into());
        }
        if self.shots == 0 {
            return bad("shots must be positive".into());
        }
        if !(self.abs_tolerance.is_finite() && self.abs_tolerance >= 0.0) {
            return bad(format!("abs_tolerance {} must be finite and non-negative", self.abs_tolerance));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return bad(format!("threshold {} outside (0, 1]", self.threshold));
        }
        Ok(())
    }

    pub fn architecture_for(&self, n: usize) -> Architecture {
        self.architecture.clone().unwrap_or_else(|| Architecture::default_for(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestCandidate {
    pub bits: Vec<bool>,
    pub energy: f64,
    pub epoch: usize,
    /// Whether the candidate filter modified the projected bits.
    pub filtered: bool,
}

#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub loss_history: Vec<f64>,
    /// Energy of the best candidate after each epoch.
    pub best_energy_history: Vec<f64>,
    pub best: BestCandidate,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub seed: u64,
    pub model: GcnModel,
    pub embedding: EmbeddingTable,
}

/// Trains one randomly initialized network on `q` over the graph `g`.
pub fn train_single_shot(
    g: &Graph,
    q: &QuboInstance,
    cfg: &TrainConfig,
    shot_seed: u64,
) -> Result<TrainTrace, GnnError> {
    train_single_shot_with(g, q, cfg, shot_seed, |_| false)
}

/// Like [`train_single_shot`], but every projected candidate passes through
/// `filter` (for example a feasibility repair) before it is scored. The filter
/// returns whether it changed anything.
pub fn train_single_shot_with(
    g: &Graph,
    q: &QuboInstance,
    cfg: &TrainConfig,
    shot_seed: u64,
    mut filter: impl FnMut(&mut [bool]) -> bool,
) -> Result<TrainTrace, GnnError> {
    cfg.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(GnnError::EmptyGraph);
    }
    if q.n() != n {
        return Err(GnnError::DimensionMismatch(format!(
            "QUBO has {} variables, graph has {n} nodes",
            q.n()
        )));
    }

    let dims = cfg.architecture_for(n).layer_dims();
    let (mut embedding, model) = init_parameters(n, &dims, shot_seed)?;
    let mut model = model.with_dropout(cfg.dropout)?;
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(shot_seed);
    dropout_rng.set_stream(1);

    let mut block_lens = vec![n * dims[0]];
    for w in dims.windows(2) {
        block_lens.extend([w[0] * w[1]; 2]);
    }
    let mut adam = AdamState::new(cfg.learning_rate, &block_lens);

    let mut loss_history = Vec::new();
    let mut best_energy_history = Vec::new();
    let mut best: Option<BestCandidate> = None;
    let mut dp = vec![0.0; n];
    let mut best_loss = f64::INFINITY;
    let mut stale = 0usize;
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 0..cfg.max_epochs {
        let (p, cache) = forward(&model, g, &embedding, true, &mut dropout_rng)?;
        let loss = q.relaxed_into(&p, &mut dp);
        if !loss.is_finite() {
            return Err(GnnError::NonFiniteLoss { epoch });
        }
        loss_history.push(loss);

        let mut bits = project(&p, cfg.threshold);
        let filtered = filter(&mut bits);
        let energy = q.energy_unchecked(&bits);
        if best.as_ref().is_none_or(|b| energy < b.energy) {
            best = Some(BestCandidate {
                bits,
                energy,
                epoch,
                filtered,
            });
        }
        best_energy_history.push(best.as_ref().map_or(energy, |b| b.energy));

        let grads = backward_from_output_grad(&cache, &model, &embedding, &dp)?;
        drop(cache);
        let mut params = parameter_slices(&mut embedding, &mut model);
        adam_step(&mut adam, &mut params, &grads.slices())?;

        if loss < best_loss - cfg.abs_tolerance {
            best_loss = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                stop_reason = StopReason::Converged;
                break;
            }
        }
    }

    Ok(TrainTrace {
        epochs_run: loss_history.len(),
        loss_history,
        best_energy_history,
        best: best.expect("at least one epoch"),
        stop_reason,
        seed: shot_seed,
        model,
        embedding,
    })
}
