//! Learning graded pairwise relations with pairwise kernels and
//! regularized least-squares, plus checkers for symmetry, reciprocity and
//! transitivity of relation matrices.

pub mod datagen;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod nabla;
pub mod node_kernel;
pub mod pairwise;
pub mod properties;
pub mod rls;
pub mod stats;
pub mod types;

pub use error::{Error, Result};
pub use nabla::{nabla, nabla_inverse, NablaTransform, Sigma};
pub use node_kernel::{gram_matrix, node_kernel, NodeKernel};
pub use pairwise::{edge_gram, EdgeKernel, PairwiseKernelKind};
pub use rls::{
    fit_cg_early_stopping, fit_closed_form, mean_predictor, mse, CgOptions, DualModel, FitMethod,
    FitReport, MeanPredictor, RegularizationPath,
};
pub use types::{Edge, EdgeDataset, FeatureVector, LabeledEdge, Node, RelationMatrix};
