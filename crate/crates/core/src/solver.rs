//! Projection, MIS repair, bit-flip polish and multi-shot orchestration.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gnn::{train_single_shot_with, GnnError, TrainConfig, TrainTrace};
use crate::graph::Graph;
use crate::qubo::{cut_size, QuboError, QuboInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("expected {expected} entries, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no candidates were produced")]
    EmptyCandidatePool,
    #[error(transparent)]
    Training(#[from] GnnError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

fn check_len(expected: usize, found: usize) -> Result<(), SolverError> {
    if expected != found {
        return Err(SolverError::LengthMismatch { expected, found });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    MaxCut,
    Mis,
    Generic,
}

/// Post-processing and execution knobs that are not part of training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub polish: bool,
    /// Shots run concurrently on up to this many threads. Results do not depend on it.
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            polish: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(with = "crate::bits::serde_bits")]
    pub bitstring: Vec<bool>,
    pub energy: f64,
    pub metric: f64,
    pub shot_index: usize,
    pub epoch_found: usize,
    pub wall_time_ms: f64,
    pub shots_run: usize,
    pub repaired: bool,
}

/// `x_i = 1` iff `p_i >= threshold`.
pub fn project(p: &[f64], threshold: f64) -> Vec<bool> {
    p.iter().map(|&v| v >= threshold).collect()
}

/// Removes vertices until no edge has both endpoints selected. Returns whether
/// anything was removed.
///
/// Edges are visited in `(u, v)` order; from each still-violated edge the endpoint
/// with more selected neighbors is dropped, the larger index on ties.
pub fn repair_mis_in_place(g: &Graph, x: &mut [bool]) -> Result<bool, SolverError> {
    check_len(g.n(), x.len())?;
    let mut in_degree: Vec<usize> = (0..g.n())
        .map(|v| {
            if x[v] {
                g.neighbors(v).iter().filter(|&&(u, _)| x[u]).count()
            } else {
                0
            }
        })
        .collect();
    let mut changed = false;
    for u in 0..g.n() {
        for &(v, _) in g.neighbors(u) {
            if v < u || !(x[u] && x[v]) {
                continue;
            }
            let drop = if in_degree[u] > in_degree[v] { u } else { v };
            x[drop] = false;
            changed = true;
            for &(w, _) in g.neighbors(drop) {
                if x[w] {
                    in_degree[w] -= 1;
                }
            }
            in_degree[drop] = 0;
            if drop == u {
                break;
            }
        }
    }
    Ok(changed)
}

/// See [`repair_mis_in_place`].
pub fn repair_mis(g: &Graph, x: &[bool]) -> Result<Vec<bool>, SolverError> {
    let mut out = x.to_vec();
    repair_mis_in_place(g, &mut out)?;
    Ok(out)
}

/// Flip gains below this are treated as zero.
const FLIP_EPS: f64 = 1e-12;

/// Steepest-descent single bit flips until no flip lowers the energy.
pub fn greedy_bitflip_polish(q: &QuboInstance, x: &[bool]) -> Result<Vec<bool>, SolverError> {
    check_len(q.n(), x.len())?;
    let mut x = x.to_vec();
    let mut field: Vec<f64> = (0..q.n()).map(|i| q.local_field(&x, i)).collect();
    let delta = |x: &[bool], field: &[f64], i: usize| if x[i] { -field[i] } else { field[i] };
    loop {
        let mut best = None;
        let mut best_delta = -FLIP_EPS;
        for i in 0..q.n() {
            let d = delta(&x, &field, i);
            if d < best_delta {
                best_delta = d;
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        x[i] = !x[i];
        let sign = if x[i] { 1.0 } else { -1.0 };
        for &(j, c) in q.adjacent(i) {
            field[j] += sign * c;
        }
    }
    Ok(x)
}

fn metric(g: &Graph, q: &QuboInstance, kind: ProblemKind, x: &[bool], energy: f64) -> f64 {
    match kind {
        ProblemKind::MaxCut => cut_size(g, x).expect("length checked"),
        ProblemKind::Mis => x.iter().filter(|&&b| b).count() as f64,
        ProblemKind::Generic => {
            debug_assert_eq!(q.energy_unchecked(x), energy);
            -energy
        }
    }
}

struct ShotOutcome {
    bits: Vec<bool>,
    energy: f64,
    epoch: usize,
    repaired: bool,
}

fn run_shot(
    g: &Graph,
    q: &QuboInstance,
    kind: ProblemKind,
    cfg: &TrainConfig,
    polish: bool,
    shot: usize,
) -> Result<ShotOutcome, SolverError> {
    let seed = cfg.seed.wrapping_add(shot as u64);
    let trace: TrainTrace = match kind {
        ProblemKind::Mis => train_single_shot_with(g, q, cfg, seed, |x| {
            repair_mis_in_place(g, x).expect("length matches")
        })?,
        _ => train_single_shot_with(g, q, cfg, seed, |_| false)?,
    };
    let mut bits = trace.best.bits;
    let mut repaired = trace.best.filtered;
    if polish {
        bits = greedy_bitflip_polish(q, &bits)?;
        if kind == ProblemKind::Mis {
            repaired |= repair_mis_in_place(g, &mut bits)?;
        }
    }
    let energy = q.energy(&bits)?;
    Ok(ShotOutcome {
        bits,
        energy,
        epoch: trace.best.epoch,
        repaired,
    })
}

/// Trains `cfg.shots` independent networks and returns the lowest-energy
/// candidate seen in any epoch of any shot.
///
/// Shot `s` uses seed `cfg.seed + s`. Energy ties go to the earlier shot, then
/// the earlier epoch.
pub fn solve(
    g: &Graph,
    q: &QuboInstance,
    kind: ProblemKind,
    cfg: &TrainConfig,
    opts: &SolveOptions,
) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    cfg.validate()?;
    check_len(g.n(), q.n())?;
    if g.n() == 0 {
        return Err(GnnError::EmptyGraph.into());
    }

    let threads = opts.threads.clamp(1, cfg.shots);
    let outcomes: Vec<Result<ShotOutcome, SolverError>> = if threads == 1 {
        (0..cfg.shots)
            .map(|s| run_shot(g, q, kind, cfg, opts.polish, s))
            .collect()
    } else {
        let mut slots: Vec<Option<Result<ShotOutcome, SolverError>>> =
            (0..cfg.shots).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    scope.spawn(move || {
                        (t..cfg.shots)
                            .step_by(threads)
                            .map(|s| (s, run_shot(g, q, kind, cfg, opts.polish, s)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (s, r) in h.join().expect("shot worker panicked") {
                    slots[s] = Some(r);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("every shot ran")).collect()
    };

    let mut best: Option<(usize, ShotOutcome)> = None;
    for (shot, outcome) in outcomes.into_iter().enumerate() {
        let o = outcome?;
        let better = match &best {
            None => true,
            Some((_, b)) => o.energy < b.energy,
        };
        if better {
            best = Some((shot, o));
        }
    }
    let (shot_index, o) = best.ok_or(SolverError::EmptyCandidatePool)?;
    Ok(SolveResult {
        metric: metric(g, q, kind, &o.bits, o.energy),
        energy: o.energy,
        shot_index,
        epoch_found: o.epoch,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        shots_run: cfg.shots,
        repaired: o.repaired,
        bitstring: o.bits,
    })
}
