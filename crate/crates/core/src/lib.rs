//! Unsupervised graph neural network solver for QUBO and PUBO problems.
//!
//! A QUBO `min_x x^T Q x` over binary `x` is relaxed to probabilities
//! `p = GCN(graph)`, the network is trained against `p^T Q p`, and the trained
//! probabilities are projected back to bits. The crate also ships encoders for
//! MaxCut, MIS and a few application problems, exact and classical baselines,
//! and a benchmark harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod baselines;
pub mod bench;
pub mod bits;
pub mod gnn;
pub mod graph;
pub mod qubo;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;

use thiserror::Error;

/// Any error produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Qubo(#[from] qubo::QuboError),
    #[error(transparent)]
    QuboFormat(#[from] qubo::QuboFormatError),
    #[error(transparent)]
    Gnn(#[from] gnn::GnnError),
    #[error(transparent)]
    Checkpoint(#[from] gnn::CheckpointError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error(transparent)]
    Baseline(#[from] baselines::BaselineError),
    #[error(transparent)]
    App(#[from] apps::AppError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
}
