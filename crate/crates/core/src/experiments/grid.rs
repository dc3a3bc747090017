use std::fmt;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::pairwise::{edge_gram_from_node_gram, identity_matrix, PairwiseKernelKind};
use crate::rls::{mse, solve_closed_form, RegularizationPath};
use crate::types::{Edge, EdgeDataset, Node};

/// Candidate regularization parameters and RBF widths.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl GridSpec {
    pub fn new(lambdas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        let ok = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
        if !ok(&lambdas) || !ok(&gammas) {
            return Err(Error::InvalidArgument(
                "grids must be non-empty with positive entries".into(),
            ));
        }
        Ok(GridSpec { lambdas, gammas })
    }

    /// Both grids `2^lo, ..., 2^hi`.
    pub fn pow2(lambda_exps: (i32, i32), gamma_exps: (i32, i32)) -> Self {
        let range = |(lo, hi): (i32, i32)| (lo..=hi).map(|e| 2f64.powi(e)).collect();
        GridSpec {
            lambdas: range(lambda_exps),
            gammas: range(gamma_exps),
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A compared method: the training-mean baseline or closed-form RLS with
/// an RBF node kernel and the given pairwise kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mean,
    Kernel(PairwiseKernelKind),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mean => "MPRED",
            Method::Kernel(k) => k.name(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("mpred") || s.eq_ignore_ascii_case("mean") {
            Ok(Method::Mean)
        } else {
            Ok(Method::Kernel(s.parse()?))
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Selected grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridChoice {
    pub lambda: f64,
    pub gamma: f64,
    pub validation_mse: f64,
}

/// Squared Euclidean distances between node feature vectors.
pub fn squared_distances(a: &[Node], b: &[Node]) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((a.len(), b.len()));
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[[i, j]] = x.features.distance_sq(&y.features)?;
        }
    }
    Ok(out)
}

fn rbf(d2: &Array2<f64>, gamma: f64) -> Array2<f64> {
    d2.mapv(|d| (-gamma * d).exp())
}

/// Node-level data for one pairing of edge sets, reused across the grid.
struct Block<'a> {
    d2: Array2<f64>,
    same: Option<Array2<bool>>,
    rows: &'a [Edge],
    cols: &'a [Edge],
}

impl<'a> Block<'a> {
    fn new(
        row_nodes: &[Node],
        rows: &'a [Edge],
        col_nodes: &[Node],
        cols: &'a [Edge],
        kind: PairwiseKernelKind,
    ) -> Result<Self> {
        Ok(Block {
            d2: squared_distances(row_nodes, col_nodes)?,
            same: kind
                .is_cartesian()
                .then(|| identity_matrix(row_nodes, col_nodes)),
            rows,
            cols,
        })
    }

    fn gram(&self, kind: PairwiseKernelKind, gamma: f64) -> Array2<f64> {
        edge_gram_from_node_gram(kind, &rbf(&self.d2, gamma), self.same.as_ref(), self.rows, self.cols)
    }
}

/// Training labels minus their mean, and the mean. Models are fit to the
/// centered labels and predict `offset + h(e)`.
pub fn centered_labels(train: &EdgeDataset) -> Result<(Array1<f64>, f64)> {
    let offset = crate::rls::mean_predictor(&train.labels())?.mean;
    Ok((Array1::from(train.labels()) - offset, offset))
}

/// Fits closed-form RLS with an RBF node kernel on centered labels for
/// every grid point and returns the point with the lowest validation MSE.
/// Exact ties go to the larger λ, then to the larger γ.
pub fn grid_search(
    train: &EdgeDataset,
    val: &EdgeDataset,
    grid: &GridSpec,
    kind: PairwiseKernelKind,
) -> Result<GridChoice> {
    let tr = train.edge_list();
    let va = val.edge_list();
    let (y, offset) = centered_labels(train)?;
    let yv = Array1::from(val.labels()) - offset;
    let train_block = Block::new(&train.nodes, &tr, &train.nodes, &tr, kind)?;
    let val_block = Block::new(&val.nodes, &va, &train.nodes, &tr, kind)?;

    let mut best: Option<GridChoice> = None;
    for &gamma in &grid.gammas {
        let k = train_block.gram(kind, gamma);
        let kv = val_block.gram(kind, gamma);
        let path = RegularizationPath::new(&k, y.view())?;
        for &lambda in &grid.lambdas {
            let a = path.coefficients(lambda)?;
            let err = mse(kv.dot(&a).view(), yv.view())?;
            let better = match best {
                None => true,
                Some(b) => {
                    err < b.validation_mse
                        || (err == b.validation_mse
                            && (lambda > b.lambda || (lambda == b.lambda && gamma > b.gamma)))
                }
            };
            if better {
                best = Some(GridChoice {
                    lambda,
                    gamma,
                    validation_mse: err,
                });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("empty grid".into()))
}

/// Test MSE of a closed-form fit on centered `train` labels at the chosen
/// grid point.
pub fn test_error(
    train: &EdgeDataset,
    test: &EdgeDataset,
    kind: PairwiseKernelKind,
    choice: &GridChoice,
) -> Result<f64> {
    let tr = train.edge_list();
    let te = test.edge_list();
    let k = Block::new(&train.nodes, &tr, &train.nodes, &tr, kind)?.gram(kind, choice.gamma);
    let (y, offset) = centered_labels(train)?;
    let a = solve_closed_form(&k, y.view(), choice.lambda)?;
    let kt = Block::new(&test.nodes, &te, &train.nodes, &tr, kind)?.gram(kind, choice.gamma);
    mse((kt.dot(&a) + offset).view(), Array1::from(test.labels()).view())
}

/// Test MSE of `method` after model selection on `val`.
pub fn evaluate_method(
    method: Method,
    train: &EdgeDataset,
    val: &EdgeDataset,
    test: &EdgeDataset,
    grid: &GridSpec,
) -> Result<f64> {
    match method {
        Method::Mean => {
            let m = crate::rls::mean_predictor(&train.labels())?;
            mse(m.predict(test.len()).view(), Array1::from(test.labels()).view())
        }
        Method::Kernel(kind) => {
            let choice = grid_search(train, val, grid, kind)?;
            test_error(train, test, kind, &choice)
        }
    }
}
