use std::io::Read;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::gnn::{Architecture, TrainConfig};

const SHIPPED: &str = include_str!("../../data/gset_hyperparams.csv");

/// Per-instance architecture and optimizer settings, plus reference cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsetHyperparams {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub best_known: Option<f64>,
    /// Cut reported for this configuration by the original GNN runs.
    pub reference_cut: Option<f64>,
    pub embedding_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub learning_rate: f64,
    pub dropout: f64,
}

impl GsetHyperparams {
    /// `base` with this row's architecture, learning rate and dropout.
    pub fn apply(&self, base: &TrainConfig) -> TrainConfig {
        TrainConfig {
            architecture: Some(Architecture {
                embedding_dim: self.embedding_dim,
                hidden_dims: self.hidden_dims.clone(),
            }),
            learning_rate: self.learning_rate,
            dropout: self.dropout,
            ..base.clone()
        }
    }
}

#[derive(Deserialize)]
struct Row {
    name: String,
    nodes: usize,
    edges: usize,
    best_known: Option<f64>,
    reference_cut: Option<f64>,
    d0: usize,
    layers: usize,
    hidden_dims: String,
    learning_rate: f64,
    dropout: f64,
}

/// Parses a table with columns
/// `name,nodes,edges,best_known,reference_cut,d0,layers,hidden_dims,learning_rate,dropout`,
/// where `hidden_dims` is `;`-separated and has `layers` entries.
pub fn parse_hyperparams_csv(r: impl Read) -> Result<Vec<GsetHyperparams>, BenchError> {
    let mut out = Vec::new();
    for rec in csv::Reader::from_reader(r).deserialize::<Row>() {
        let row = rec?;
        let hidden_dims = row
            .hidden_dims
            .split(';')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| BenchError::InvalidConfig(format!("{}: hidden_dims: {e}", row.name)))?;
        if hidden_dims.len() != row.layers || hidden_dims.contains(&0) || row.d0 == 0 {
            return Err(BenchError::InvalidConfig(format!(
                "{}: expected {} positive hidden widths",
                row.name, row.layers
            )));
        }
        out.push(GsetHyperparams {
            name: row.name,
            nodes: row.nodes,
            edges: row.edges,
            best_known: row.best_known,
            reference_cut: row.reference_cut,
            embedding_dim: row.d0,
            hidden_dims,
            learning_rate: row.learning_rate,
            dropout: row.dropout,
        });
    }
    Ok(out)
}

/// The table shipped with the crate.
pub fn gset_table() -> Vec<GsetHyperparams> {
    parse_hyperparams_csv(SHIPPED.as_bytes()).expect("shipped table parses")
}

/// Case-insensitive lookup by instance name.
pub fn find_hyperparams<'a>(table: &'a [GsetHyperparams], name: &str) -> Option<&'a GsetHyperparams> {
    table.iter().find(|h| h.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rows() {
        let t = gset_table();
        assert_eq!(t.len(), 7);
        let g14 = find_hyperparams(&t, "g14").unwrap();
        assert_eq!((g14.nodes, g14.edges), (800, 4694));
        assert_eq!(g14.best_known, Some(3064.0));
        assert_eq!(g14.embedding_dim, 369);
        assert_eq!(g14.hidden_dims, vec![5]);
        assert_eq!(g14.learning_rate, 0.00467);
        let g55 = find_hyperparams(&t, "G55").unwrap();
        assert_eq!(g55.hidden_dims, vec![8412, 8352, 5499]);
        assert_eq!(g55.dropout, 0.1062);
        let cfg = find_hyperparams(&t, "G22").unwrap().apply(&TrainConfig::default());
        assert_eq!(cfg.architecture.unwrap().layer_dims(), vec![419, 1909, 3401, 1]);
        assert!(find_hyperparams(&t, "G1").is_none());
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let bad = "name,nodes,edges,best_known,reference_cut,d0,layers,hidden_dims,learning_rate,dropout\n\
                   X,4,4,,,2,2,3,0.1,0\n";
        assert!(matches!(parse_hyperparams_csv(bad.as_bytes()), Err(BenchError::InvalidConfig(_))));
        let ok = "name,nodes,edges,best_known,reference_cut,d0,layers,hidden_dims,learning_rate,dropout\n\
                  X,4,4,,,2,2,3;1,0.1,0\n";
        let rows = parse_hyperparams_csv(ok.as_bytes()).unwrap();
        assert_eq!(rows[0].best_known, None);
    }
}
