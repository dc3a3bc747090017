//! Domain types shared across the crate: node features, edges, labeled
//! edge datasets and finite relation matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Node-level feature vector, stored densely or as a coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse {
        dim: usize,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

impl FeatureVector {
    pub fn dense(values: Vec<f64>) -> Self {
        FeatureVector::Dense(values)
    }

    /// Builds a sparse vector. Indices must be strictly increasing and below `dim`.
    pub fn sparse(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "sparse indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::InvalidArgument(format!(
                    "sparse index {last} out of range for dimension {dim}"
                )));
            }
        }
        Ok(FeatureVector::Sparse {
            dim,
            indices,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse { dim, .. } => *dim,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, FeatureVector::Sparse { .. })
    }

    /// Value at coordinate `i` (zero for absent sparse entries).
    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense(v) => v[i],
            FeatureVector::Sparse {
                indices, values, ..
            } => indices
                .binary_search(&i)
                .map(|pos| values[pos])
                .unwrap_or(0.0),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            FeatureVector::Dense(v) => v.clone(),
            FeatureVector::Sparse {
                dim,
                indices,
                values,
            } => {
                let mut out = vec![0.0; *dim];
                for (&i, &x) in indices.iter().zip(values) {
                    out[i] = x;
                }
                out
            }
        }
    }

    pub fn to_sparse(&self) -> FeatureVector {
        match self {
            FeatureVector::Dense(v) => {
                let (indices, values) = v
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(i, &x)| (i, x))
                    .unzip();
                FeatureVector::Sparse {
                    dim: v.len(),
                    indices,
                    values,
                }
            }
            sparse => sparse.clone(),
        }
    }

    /// Iterates the stored non-zero (index, value) entries.
    pub fn nonzeros(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match self {
            FeatureVector::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(i, &x)| (i, x)),
            ),
            FeatureVector::Sparse {
                indices, values, ..
            } => Box::new(indices.iter().copied().zip(values.iter().copied())),
        }
    }

    fn check_dim(&self, other: &FeatureVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &FeatureVector) -> Result<f64> {
        self.check_dim(other)?;
        Ok(match (self, other) {
            (FeatureVector::Dense(a), FeatureVector::Dense(b)) => {
                a.iter().zip(b).map(|(x, y)| x * y).sum()
            }
            (
                FeatureVector::Sparse {
                    indices, values, ..
                },
                FeatureVector::Dense(d),
            )
            | (
                FeatureVector::Dense(d),
                FeatureVector::Sparse {
                    indices, values, ..
                },
            ) => indices.iter().zip(values).map(|(&i, &x)| x * d[i]).sum(),
            (
                FeatureVector::Sparse {
                    indices: ia,
                    values: va,
                    ..
                },
                FeatureVector::Sparse {
                    indices: ib,
                    values: vb,
                    ..
                },
            ) => {
                let (mut p, mut q, mut acc) = (0, 0, 0.0);
                while p < ia.len() && q < ib.len() {
                    match ia[p].cmp(&ib[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            acc += va[p] * vb[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                acc
            }
        })
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> f64 {
        self.nonzeros().map(|(_, x)| x * x).sum()
    }

    /// Squared Euclidean distance `‖self − other‖²`.
    pub fn distance_sq(&self, other: &FeatureVector) -> Result<f64> {
        match (self, other) {
            (FeatureVector::Dense(a), FeatureVector::Dense(b)) => {
                self.check_dim(other)?;
                Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
            }
            _ => {
                let cross = self.dot(other)?;
                Ok((self.norm_sq() + other.norm_sq() - 2.0 * cross).max(0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub features: FeatureVector,
}

impl Node {
    pub fn new(id: impl Into<String>, features: FeatureVector) -> Self {
        Node {
            id: id.into(),
            features,
        }
    }
}

/// Ordered node pair `(first, second)`; both are indices into the node
/// list of the dataset that owns the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub first: usize,
    pub second: usize,
}

impl Edge {
    pub fn new(first: usize, second: usize) -> Self {
        Edge { first, second }
    }

    pub fn swap(self) -> Self {
        Edge {
            first: self.second,
            second: self.first,
        }
    }

    pub fn is_loop(self) -> bool {
        self.first == self.second
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledEdge {
    pub edge: Edge,
    pub weight: f64,
}

impl LabeledEdge {
    /// Relation weights must lie in `[0, 1]`.
    pub fn new(edge: Edge, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidArgument(format!(
                "edge weight {weight} outside [0, 1]"
            )));
        }
        Ok(LabeledEdge { edge, weight })
    }

    /// Real-valued target without the `[0, 1]` restriction. Regression
    /// targets such as shared-word counts go through here.
    pub fn unbounded(edge: Edge, weight: f64) -> Self {
        LabeledEdge { edge, weight }
    }
}

/// Nodes plus a multiset of labeled edges. Repeated edges are kept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeDataset {
    pub nodes: Vec<Node>,
    pub edges: Vec<LabeledEdge>,
}

impl EdgeDataset {
    pub fn new(nodes: Vec<Node>, edges: Vec<LabeledEdge>) -> Result<Self> {
        let n = nodes.len();
        for le in &edges {
            if le.edge.first >= n || le.edge.second >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    le.edge.first, le.edge.second
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for node in &nodes {
            if !seen.insert(node.id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate node id `{}`",
                    node.id
                )));
            }
        }
        Ok(EdgeDataset { nodes, edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges.iter().map(|le| le.edge).collect()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.edges.iter().map(|le| le.weight).collect()
    }
}

/// An `n × n` grid of relation values over a finite node set.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationMatrix {
    pub ids: Vec<String>,
    pub values: Array2<f64>,
}

impl RelationMatrix {
    pub fn new(ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        if ids.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: ids.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("relation matrix"));
        }
        Ok(RelationMatrix { ids, values })
    }

    /// Matrix with ids `"0"`, `"1"`, ...
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let ids = (0..values.nrows()).map(|i| i.to_string()).collect();
        RelationMatrix::new(ids, values)
    }

    /// Evaluates `relation(i, j)` on every ordered pair of nodes.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(ids: Vec<String>, mut relation: F) -> Result<Self> {
        let n = ids.len();
        let values = Array2::from_shape_fn((n, n), |(i, j)| relation(i, j));
        RelationMatrix::new(ids, values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn is_unit_valued(&self) -> bool {
        self.values.iter().all(|v| (0.0..=1.0).contains(v))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> RelationMatrix {
        RelationMatrix {
            ids: self.ids.clone(),
            values: self.values.mapv(f),
        }
    }
}
