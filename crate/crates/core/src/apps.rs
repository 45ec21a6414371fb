//! Encoders for asset selection, interval scheduling and sensor placement.

use std::io::Read;

use thiserror::Error;

use crate::graph::Graph;
use crate::qubo::{QuboError, QuboInstance};

/// Slack for symmetry and unit-diagonal checks on correlation matrices.
pub const CORRELATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("interval {index} has start {start} not before end {end}")]
    InvalidInterval { index: usize, start: f64, end: f64 },
    #[error("correlation matrix is not symmetric at ({0}, {1})")]
    AsymmetricMatrix(usize, usize),
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),
    #[error("threshold {0} outside [0, 1)")]
    InvalidThreshold(f64),
    #[error("cost {value} at index {index} is negative")]
    NegativeCost { index: usize, value: f64 },
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self, AppError> {
        if !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(AppError::InvalidInterval { index: 0, start, end });
        }
        Ok(Self { start, end })
    }

    /// Half-open overlap: touching endpoints do not conflict.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Symmetric matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, AppError> {
        let n = rows.len();
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(AppError::InvalidMatrix(format!(
                "row {r} has {} entries, expected {n}",
                rows[r].len()
            )));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let at = |i: usize, j: usize| values[i * n + j];
        for i in 0..n {
            if (at(i, i) - 1.0).abs() > CORRELATION_TOLERANCE {
                return Err(AppError::InvalidMatrix(format!("diagonal entry {i} is {}", at(i, i))));
            }
            for j in 0..n {
                let c = at(i, j);
                if !(c.abs() <= 1.0 + CORRELATION_TOLERANCE) {
                    return Err(AppError::InvalidMatrix(format!("entry ({i}, {j}) = {c}")));
                }
                if j > i && (c - at(j, i)).abs() > CORRELATION_TOLERANCE {
                    return Err(AppError::AsymmetricMatrix(i, j));
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Whitespace-separated dense rows; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self, AppError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| AppError::Parse {
                        line: i + 1,
                        message: format!("cannot parse {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }
}

/// Unweighted graph with an edge wherever `|c_ij| > lambda`.
pub fn threshold_correlation_graph(c: &CorrelationMatrix, lambda: f64) -> Result<Graph, AppError> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(AppError::InvalidThreshold(lambda));
    }
    let n = c.n();
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| c.get(i, j).abs() > lambda)
        .map(|(i, j)| (i, j, 1.0));
    Ok(Graph::from_edge_list(n, edges).expect("pairs are canonical"))
}

/// Weighted MIS: `-sum_i mu_i x_i + P sum_{(i,j)} x_i x_j`.
pub fn build_wmis_qubo(g: &Graph, mu: &[f64], penalty: f64) -> Result<QuboInstance, AppError> {
    if mu.len() != g.n() {
        return Err(QuboError::LengthMismatch {
            expected: g.n(),
            found: mu.len(),
        }
        .into());
    }
    if !(penalty > 0.0) {
        return Err(QuboError::NonPositivePenalty(penalty).into());
    }
    let linear = mu.iter().enumerate().map(|(i, &m)| (i, i, -m));
    let quadratic = g.edges().iter().map(|e| (e.u, e.v, penalty));
    Ok(QuboInstance::from_terms(g.n(), linear.chain(quadratic), 0.0)?)
}

/// Conflict graph of half-open intervals: one vertex per interval, an edge per overlap.
pub fn interval_graph(intervals: &[Interval]) -> Result<Graph, AppError> {
    for (index, iv) in intervals.iter().enumerate() {
        if !(iv.start < iv.end) || !iv.start.is_finite() || !iv.end.is_finite() {
            return Err(AppError::InvalidInterval {
                index,
                start: iv.start,
                end: iv.end,
            });
        }
    }
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&a, &b| intervals[a].start.total_cmp(&intervals[b].start).then(a.cmp(&b)));
    let mut edges = Vec::new();
    // sweep by start time; later intervals stop overlapping once they start at or after our end
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if intervals[b].start >= intervals[a].end {
                break;
            }
            edges.push((a.min(b), a.max(b), 1.0));
        }
    }
    edges.sort_by_key(|&(u, v, _)| (u, v));
    Ok(Graph::from_edge_list(intervals.len(), edges).expect("pairs are unique"))
}

/// Minimum vertex cover: `sum_i c_i x_i + P sum_{(i,j)} (1 - x_i)(1 - x_j)`.
///
/// Logs a warning when `P` does not exceed the largest cost, since covering is
/// then not guaranteed to be optimal.
pub fn build_mvc_qubo(g: &Graph, costs: &[f64], penalty: f64) -> Result<QuboInstance, AppError> {
    if costs.len() != g.n() {
        return Err(QuboError::LengthMismatch {
            expected: g.n(),
            found: costs.len(),
        }
        .into());
    }
    if let Some((index, &value)) = costs.iter().enumerate().find(|(_, &c)| !(c >= 0.0)) {
        return Err(AppError::NegativeCost { index, value });
    }
    if !(penalty > 0.0) {
        return Err(QuboError::NonPositivePenalty(penalty).into());
    }
    let max_cost = costs.iter().copied().fold(0.0, f64::max);
    if penalty <= max_cost {
        log::warn!("penalty {penalty} does not exceed the largest cost {max_cost}");
    }
    let linear = costs
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, i, c - penalty * g.degree(i) as f64));
    let quadratic = g.edges().iter().map(|e| (e.u, e.v, penalty));
    let offset = penalty * g.num_edges() as f64;
    Ok(QuboInstance::from_terms(g.n(), linear.chain(quadratic), offset)?)
}

#[derive(serde::Deserialize)]
struct ValueRecord {
    value: f64,
}

/// Intervals from CSV with `start,end` headers.
pub fn read_intervals_csv(r: impl Read) -> Result<Vec<Interval>, AppError> {
    let mut out = Vec::new();
    for (index, rec) in csv::Reader::from_reader(r).deserialize::<Interval>().enumerate() {
        let iv = rec?;
        if !(iv.start < iv.end) {
            return Err(AppError::InvalidInterval {
                index,
                start: iv.start,
                end: iv.end,
            });
        }
        out.push(iv);
    }
    Ok(out)
}

/// Vector from a single-column CSV with a `value` header.
pub fn read_vector_csv(r: impl Read) -> Result<Vec<f64>, AppError> {
    csv::Reader::from_reader(r)
        .deserialize::<ValueRecord>()
        .map(|rec| Ok(rec?.value))
        .collect()
}
