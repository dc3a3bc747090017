//! Node-level kernels and Gram matrices.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::{FeatureVector, Node};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKernel {
    /// Dot product of the feature vectors.
    Linear,
    /// Gaussian RBF `exp(−γ‖x − x′‖²)`.
    Rbf { gamma: f64 },
}

impl NodeKernel {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "RBF gamma must be positive, got {gamma}"
            )));
        }
        Ok(NodeKernel::Rbf { gamma })
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            NodeKernel::Linear => None,
            NodeKernel::Rbf { gamma } => Some(*gamma),
        }
    }

    pub fn eval(&self, x: &FeatureVector, y: &FeatureVector) -> Result<f64> {
        match *self {
            NodeKernel::Linear => x.dot(y),
            NodeKernel::Rbf { gamma } => Ok((-gamma * x.distance_sq(y)?).exp()),
        }
    }
}

impl fmt::Display for NodeKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKernel::Linear => write!(f, "linear"),
            NodeKernel::Rbf { gamma } => write!(f, "rbf {gamma:e}"),
        }
    }
}

impl FromStr for NodeKernel {
    type Err = Error;

    /// Parses `linear` or `rbf <gamma>` (also `rbf:<gamma>`).
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(|c: char| c.is_whitespace() || c == ':').filter(|p| !p.is_empty());
        match (parts.next(), parts.next(), parts.next()) {
            (Some("linear"), None, None) => Ok(NodeKernel::Linear),
            (Some("rbf"), Some(g), None) => {
                let gamma = g
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad RBF gamma `{g}`")))?;
                NodeKernel::rbf(gamma)
            }
            _ => Err(Error::UnknownKernel(s.to_string())),
        }
    }
}

pub fn node_kernel(x: &FeatureVector, y: &FeatureVector, cfg: &NodeKernel) -> Result<f64> {
    cfg.eval(x, y)
}

/// `|a| × |b|` matrix of node-kernel values.
pub fn gram_matrix(a: &[Node], b: &[Node], cfg: &NodeKernel) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((a.len(), b.len()));
    for (i, na) in a.iter().enumerate() {
        for (j, nb) in b.iter().enumerate() {
            out[[i, j]] = cfg.eval(&na.features, &nb.features)?;
        }
    }
    Ok(out)
}
