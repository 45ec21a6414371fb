//! Plain-text model dump.
//!
//! ```text
//! gcn-checkpoint 1
//! seed 42
//! dims 10 5 1
//! dropout 0
//! nodes 1000
//! <embedding rows>
//! <W_1 rows> <B_1 rows> ... <W_K rows> <B_K rows>
//! ```
//!
//! Floats are written in shortest round-trip form, so a reloaded model
//! reproduces the original forward pass bit for bit.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::matrix::Matrix;
use super::model::{EmbeddingTable, GcnLayer, GcnModel};
use super::GnnError;

const MAGIC: &str = "gcn-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(String),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error(transparent)]
    Model(#[from] GnnError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    pub model: GcnModel,
    pub embedding: EmbeddingTable,
}

fn write_matrix(w: &mut impl Write, m: &Matrix) -> io::Result<()> {
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn write_checkpoint(mut w: impl Write, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    let model = &ckpt.model;
    let dims: Vec<String> = model.dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "seed {}", ckpt.seed)?;
    writeln!(w, "dims {}", dims.join(" "))?;
    writeln!(w, "dropout {}", model.dropout())?;
    writeln!(w, "nodes {}", ckpt.embedding.values().rows())?;
    write_matrix(&mut w, ckpt.embedding.values())?;
    for layer in model.layers() {
        write_matrix(&mut w, &layer.w)?;
        write_matrix(&mut w, &layer.b)?;
    }
    Ok(())
}

fn malformed(msg: impl Into<String>) -> CheckpointError {
    CheckpointError::Malformed(msg.into())
}

fn keyed<'a>(line: Option<&'a str>, key: &str) -> Result<Vec<&'a str>, CheckpointError> {
    let line = line.ok_or_else(|| malformed(format!("missing `{key}` line")))?;
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(malformed(format!("expected `{key}`, got {line:?}")));
    }
    Ok(it.collect())
}

fn parse<T: std::str::FromStr>(tok: &str) -> Result<T, CheckpointError> {
    tok.parse().map_err(|_| malformed(format!("cannot parse {tok:?}")))
}

pub fn read_checkpoint(r: impl BufRead) -> Result<Checkpoint, CheckpointError> {
    let text = io::read_to_string(r)?;
    let mut lines = text.lines();

    let header = keyed(lines.next(), MAGIC)?;
    if header != [VERSION.to_string()] {
        return Err(CheckpointError::UnsupportedVersion(header.join(" ")));
    }
    let seed = match keyed(lines.next(), "seed")?.as_slice() {
        [s] => parse(s)?,
        _ => return Err(malformed("seed takes one value")),
    };
    let dims = keyed(lines.next(), "dims")?
        .into_iter()
        .map(parse::<usize>)
        .collect::<Result<Vec<_>, _>>()?;
    if dims.len() < 2 {
        return Err(malformed("need at least two dims"));
    }
    let dropout: f64 = match keyed(lines.next(), "dropout")?.as_slice() {
        [s] => parse(s)?,
        _ => return Err(malformed("dropout takes one value")),
    };
    let n: usize = match keyed(lines.next(), "nodes")?.as_slice() {
        [s] => parse(s)?,
        _ => return Err(malformed("nodes takes one value")),
    };

    let mut values = lines.flat_map(str::split_whitespace).map(parse::<f64>);
    let mut take = |rows: usize, cols: usize| -> Result<Matrix, CheckpointError> {
        let data = values
            .by_ref()
            .take(rows * cols)
            .collect::<Result<Vec<_>, _>>()?;
        if data.len() != rows * cols {
            return Err(malformed("truncated parameter data"));
        }
        Ok(Matrix::from_vec(rows, cols, data))
    };
    let embedding = EmbeddingTable::new(take(n, dims[0])?)?;
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for w in dims.windows(2) {
        let wm = take(w[0], w[1])?;
        let bm = take(w[0], w[1])?;
        layers.push(GcnLayer { w: wm, b: bm });
    }
    if values.next().is_some() {
        return Err(malformed("trailing data"));
    }
    let model = GcnModel::from_layers(layers, dropout)?;
    Ok(Checkpoint {
        seed,
        model,
        embedding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{forward, init_parameters};
    use crate::graph::Graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_reproduces_forward() {
        let g = Graph::from_edge_list(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let (embedding, model) = init_parameters(5, &[3, 4, 2, 1], 77).unwrap();
        let model = model.with_dropout(0.25).unwrap();
        let ckpt = Checkpoint { seed: 77, model, embedding };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ckpt).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, ckpt);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (p0, _) = forward(&ckpt.model, &g, &ckpt.embedding, false, &mut rng).unwrap();
        let (p1, _) = forward(&back.model, &g, &back.embedding, false, &mut rng).unwrap();
        assert_eq!(p0.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), p1.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            read_checkpoint("gcn-checkpoint 2\n".as_bytes()),
            Err(CheckpointError::UnsupportedVersion(_))
        ));
        let truncated = "gcn-checkpoint 1\nseed 1\ndims 1 1\ndropout 0\nnodes 2\n0.5\n";
        assert!(matches!(
            read_checkpoint(truncated.as_bytes()),
            Err(CheckpointError::Malformed(_))
        ));
        let extra = "gcn-checkpoint 1\nseed 1\ndims 1 1\ndropout 0\nnodes 1\n0.5\n1\n2\n3\n";
        assert!(matches!(read_checkpoint(extra.as_bytes()), Err(CheckpointError::Malformed(_))));
        let ok = "gcn-checkpoint 1\nseed 1\ndims 1 1\ndropout 0\nnodes 1\n0.5\n1\n2\n";
        assert!(read_checkpoint(ok.as_bytes()).is_ok());
    }
}
