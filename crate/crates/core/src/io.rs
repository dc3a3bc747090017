//! Line-oriented text formats.
//!
//! * node file: `id<TAB>f1,f2,...,fd` (dense) or `id<TAB>idx:val idx:val ...` (sparse)
//! * edge file: `first_id<TAB>second_id<TAB>weight`, weight optional when unlabeled
//! * relation matrix: whitespace-delimited rows of reals
//!
//! Blank lines and lines starting with `#` are skipped.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::{Edge, EdgeDataset, FeatureVector, LabeledEdge, Node, RelationMatrix};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite value {s:?}"))
    }
}

fn parse_features(field: &str) -> std::result::Result<(Option<usize>, Vec<(usize, f64)>, Vec<f64>), String> {
    let field = field.trim();
    if field.contains(':') {
        let mut pairs = Vec::new();
        for tok in field.split_whitespace() {
            let (i, v) = tok.split_once(':').ok_or_else(|| format!("expected idx:val, got {tok:?}"))?;
            let i: usize = i.parse().map_err(|_| format!("bad index {i:?}"))?;
            pairs.push((i, parse_f64(v)?));
        }
        Ok((None, pairs, Vec::new()))
    } else if field.is_empty() {
        Ok((Some(0), Vec::new(), Vec::new()))
    } else {
        let values = field.split(',').map(parse_f64).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok((Some(values.len()), Vec::new(), values))
    }
}

/// Reads a node file. Sparse lines share a dimension of one plus the
/// largest index in the file unless `sparse_dim` is given.
pub fn read_nodes(path: &Path, sparse_dim: Option<usize>) -> Result<Vec<Node>> {
    let text = fs::read_to_string(path)?;
    let mut parsed = Vec::new();
    let mut max_index = 0usize;
    let mut any_sparse = false;
    for (line, l) in content_lines(&text) {
        let (id, rest) = l.split_once('\t').unwrap_or((l, ""));
        if id.is_empty() {
            return Err(parse_err(path, line, "empty node id"));
        }
        let (dim, pairs, dense) = parse_features(rest).map_err(|m| parse_err(path, line, m))?;
        if dim.is_none() {
            any_sparse = true;
            if let Some(m) = pairs.iter().map(|p| p.0 + 1).max() {
                max_index = max_index.max(m);
            }
        }
        parsed.push((line, id.to_string(), dim, pairs, dense));
    }
    let dim = match sparse_dim {
        Some(d) => d,
        None if any_sparse => max_index,
        None => 0,
    };
    let mut nodes = Vec::with_capacity(parsed.len());
    let mut dense_dim = None;
    for (line, id, d, mut pairs, dense) in parsed {
        let features = match d {
            Some(d) if !(d == 0 && any_sparse) => {
                if *dense_dim.get_or_insert(d) != d {
                    return Err(parse_err(path, line, format!("expected {} features, found {d}", dense_dim.unwrap())));
                }
                FeatureVector::dense(dense)
            }
            _ => {
                pairs.sort_by_key(|p| p.0);
                let (indices, values) = pairs.into_iter().unzip();
                FeatureVector::sparse(dim, indices, values).map_err(|e| parse_err(path, line, e.to_string()))?
            }
        };
        nodes.push(Node::new(id, features));
    }
    Ok(nodes)
}

pub fn write_nodes(path: &Path, nodes: &[Node]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for node in nodes {
        write!(out, "{}\t", node.id)?;
        if node.features.is_sparse() {
            let parts: Vec<String> = node.features.nonzeros().map(|(i, v)| format!("{i}:{v:e}")).collect();
            writeln!(out, "{}", parts.join(" "))?;
        } else {
            let parts: Vec<String> = node.features.to_dense().iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", parts.join(","))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads an edge file against `nodes`. Missing weights are read as `NaN`
/// and only accepted when `labeled` is false.
pub fn read_edges(path: &Path, nodes: &[Node], labeled: bool) -> Result<Vec<(Edge, f64)>> {
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for (line, l) in content_lines(&text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(path, line, "expected first<TAB>second[<TAB>weight]"));
        }
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.to_string()));
        let edge = Edge::new(lookup(fields[0])?, lookup(fields[1])?);
        let weight = match fields.get(2) {
            Some(w) => parse_f64(w).map_err(|m| parse_err(path, line, m))?,
            None if !labeled => f64::NAN,
            None => return Err(parse_err(path, line, "missing weight")),
        };
        edges.push((edge, weight));
    }
    Ok(edges)
}

/// Labeled dataset from a node file and an edge file. With `bounded` every
/// weight must lie in `[0, 1]`.
pub fn read_dataset(nodes_path: &Path, edges_path: &Path, bounded: bool) -> Result<EdgeDataset> {
    let nodes = read_nodes(nodes_path, None)?;
    let edges = read_edges(edges_path, &nodes, true)?
        .into_iter()
        .map(|(e, w)| {
            if bounded {
                LabeledEdge::new(e, w)
            } else {
                Ok(LabeledEdge::unbounded(e, w))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    EdgeDataset::new(nodes, edges)
}

pub fn write_edges(path: &Path, nodes: &[Node], edges: &[Edge], weights: Option<&[f64]>) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for (i, e) in edges.iter().enumerate() {
        write!(out, "{}\t{}", nodes[e.first].id, nodes[e.second].id)?;
        match weights {
            Some(w) => writeln!(out, "\t{:.16e}", w[i])?,
            None => writeln!(out)?,
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a square whitespace-delimited matrix. Node ids are the row
/// numbers.
pub fn read_relation_matrix(path: &Path) -> Result<RelationMatrix> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(&text) {
        let row = l
            .split_whitespace()
            .map(parse_f64)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| parse_err(path, line, m))?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("row has {} entries, matrix has {n} rows", r.len()),
        });
    }
    let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
    RelationMatrix::from_values(values)
}

pub fn write_relation_matrix(path: &Path, q: &RelationMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for row in q.values.rows() {
        let parts: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", parts.join(" "))?;
    }
    out.flush()?;
    Ok(())
}
