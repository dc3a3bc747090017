//! Regularized least-squares over edges: closed-form solves, conjugate
//! gradient with early stopping, and prediction through the dual
//! representation `h(ē) = Σ_e a_e K(e, ē)`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, ShiftedSolver};
use crate::node_kernel::{gram_matrix, NodeKernel};
use crate::pairwise::{check_edges, edge_gram, EdgeKernel, PairwiseKernelKind};
use crate::types::{Edge, EdgeDataset, Node};

/// Largest relative residual accepted from a closed-form solve.
pub const MAX_RELATIVE_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    ClosedForm,
    CgEarlyStop,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitMethod::ClosedForm => f.write_str("closed_form"),
            FitMethod::CgEarlyStop => f.write_str("cg_early_stop"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub method: FitMethod,
    /// Iterations run (1 for the closed form).
    pub iterations: usize,
    /// Iteration whose coefficients were kept.
    pub best_iteration: usize,
    pub validation_mse: Option<f64>,
    pub lambda: Option<f64>,
}

/// Trained model in dual form. Edges index into `nodes`, which holds only
/// the nodes referenced by training edges.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub coefficients: Array1<f64>,
    pub kernel: EdgeKernel,
}

impl DualModel {
    pub fn new(
        nodes: &[Node],
        edges: &[Edge],
        coefficients: Array1<f64>,
        kernel: EdgeKernel,
    ) -> Result<Self> {
        check_edges(nodes.len(), edges)?;
        if coefficients.len() != edges.len() {
            return Err(Error::DimensionMismatch {
                expected: edges.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("dual coefficients"));
        }
        let mut remap = HashMap::new();
        let mut kept = Vec::new();
        let mut index = |i: usize| {
            *remap.entry(i).or_insert_with(|| {
                kept.push(nodes[i].clone());
                kept.len() - 1
            })
        };
        let edges = edges
            .iter()
            .map(|e| Edge::new(index(e.first), index(e.second)))
            .collect();
        Ok(DualModel {
            nodes: kept,
            edges,
            coefficients,
            kernel,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Predictions for `edges` over `nodes`.
    pub fn predict(&self, nodes: &[Node], edges: &[Edge]) -> Result<Array1<f64>> {
        const BLOCK: usize = 2048;
        check_edges(nodes.len(), edges)?;
        let mut out = Array1::zeros(edges.len());
        for (block, chunk) in edges.chunks(BLOCK).enumerate() {
            let k = edge_gram(nodes, chunk, &self.nodes, &self.edges, &self.kernel)?;
            let part = k.dot(&self.coefficients);
            out.slice_mut(ndarray::s![block * BLOCK..block * BLOCK + chunk.len()])
                .assign(&part);
        }
        Ok(out)
    }

    /// `n × n` matrix of predictions `h(nodes[i], nodes[j])` for every
    /// ordered pair, including `i = j`.
    pub fn predict_all_pairs(&self, nodes: &[Node]) -> Result<Array2<f64>> {
        use PairwiseKernelKind::*;
        let n = nodes.len();
        match self.kernel.kind {
            Kron | KronSym | KronRec => {
                let g = gram_matrix(nodes, &self.nodes, &self.kernel.node)?;
                let q = self.edges.len();
                // u[t, e] = k(x_t, v_e) a_e, w[t, e] = k(x_t, v′_e)
                let u = Array2::from_shape_fn((n, q), |(t, e)| {
                    g[[t, self.edges[e].first]] * self.coefficients[e]
                });
                let w = Array2::from_shape_fn((n, q), |(t, e)| g[[t, self.edges[e].second]]);
                let h = u.dot(&w.t());
                Ok(match self.kernel.kind {
                    Kron => h,
                    KronSym => (&h + &h.t()) * 2.0,
                    _ => (&h - &h.t()) * 2.0,
                })
            }
            _ => {
                let edges: Vec<Edge> = (0..n)
                    .flat_map(|i| (0..n).map(move |j| Edge::new(i, j)))
                    .collect();
                let flat = self.predict(nodes, &edges)?;
                Ok(flat.into_shape_with_order((n, n)).map_err(|e| Error::Linalg(e.to_string()))?)
            }
        }
    }

    /// Writes the model as text: a header with the kernel configuration,
    /// then one `first_id<TAB>second_id<TAB>coefficient` line per training
    /// edge. Coefficients use the shortest representation that round-trips.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pairwise-rls dual model")?;
        writeln!(w, "pairwise\t{}", self.kernel.kind)?;
        writeln!(w, "node\t{}", self.kernel.node)?;
        writeln!(w, "edges\t{}", self.edges.len())?;
        for (e, a) in self.edges.iter().zip(self.coefficients.iter()) {
            writeln!(w, "{}\t{}\t{:e}", self.nodes[e.first].id, self.nodes[e.second].id, a)?;
        }
        Ok(())
    }

    /// Reads a model written by [`DualModel::write`], resolving edge
    /// endpoints against `nodes` by id.
    pub fn read<R: BufRead>(r: R, nodes: &[Node]) -> Result<Self> {
        let path = std::path::PathBuf::from("<model>");
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.clone(),
            line,
            msg,
        };
        let by_id: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut kind = None;
        let mut node_kernel = None;
        let mut expected = None;
        let mut edges = Vec::new();
        let mut coefficients = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["pairwise", k] => kind = Some(k.parse::<PairwiseKernelKind>()?),
                ["node", k] => node_kernel = Some(k.parse::<NodeKernel>()?),
                ["edges", n] => {
                    expected = Some(
                        n.parse::<usize>()
                            .map_err(|_| parse_err(lineno, format!("bad edge count `{n}`")))?,
                    )
                }
                [a, b, coef] => {
                    let first = *by_id.get(a).ok_or_else(|| Error::UnknownNode(a.to_string()))?;
                    let second = *by_id.get(b).ok_or_else(|| Error::UnknownNode(b.to_string()))?;
                    let c = coef
                        .parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("bad coefficient `{coef}`")))?;
                    edges.push(Edge::new(first, second));
                    coefficients.push(c);
                }
                _ => return Err(parse_err(lineno, "unrecognised model line".into())),
            }
        }
        let kind = kind.ok_or_else(|| parse_err(0, "missing `pairwise` header".into()))?;
        let node_kernel = node_kernel.ok_or_else(|| parse_err(0, "missing `node` header".into()))?;
        if let Some(n) = expected {
            if n != edges.len() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: edges.len(),
                });
            }
        }
        DualModel::new(
            nodes,
            &edges,
            Array1::from(coefficients),
            EdgeKernel::new(kind, node_kernel),
        )
    }
}

/// Constant model predicting the mean training label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPredictor {
    pub mean: f64,
}

impl MeanPredictor {
    pub fn predict(&self, n: usize) -> Array1<f64> {
        Array1::from_elem(n, self.mean)
    }
}

pub fn mean_predictor(y_train: &[f64]) -> Result<MeanPredictor> {
    if y_train.is_empty() {
        return Err(Error::InvalidArgument("no training labels".into()));
    }
    Ok(MeanPredictor {
        mean: y_train.iter().sum::<f64>() / y_train.len() as f64,
    })
}

/// Mean squared error `(1/n) Σ (pred_i − y_i)²`.
pub fn mse(pred: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    if pred.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: pred.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("mse of empty vectors".into()));
    }
    Ok(pred
        .iter()
        .zip(y.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / y.len() as f64)
}

fn check_system(k: &Array2<f64>, y: ArrayView1<f64>) -> Result<usize> {
    let q = k.nrows();
    if k.ncols() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: k.ncols(),
        });
    }
    if y.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: y.len(),
        });
    }
    if q == 0 {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if k.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training system"));
    }
    Ok(q)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Dual coefficients minimising `(1/q) Σ (y_e − h(e))² + λ‖h‖²`, i.e. the
/// solution of `(K + qλI) a = y`.
pub fn solve_closed_form(k: &Array2<f64>, y: ArrayView1<f64>, lambda: f64) -> Result<Array1<f64>> {
    let q = check_system(k, y)?;
    check_lambda(lambda)?;
    let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if k.indexed_iter().any(|((i, j), v)| (v - k[[j, i]]).abs() > 1e-10 * scale) {
        return Err(Error::InvalidArgument("kernel matrix is not symmetric".into()));
    }
    let mut system = k.clone();
    system.diag_mut().mapv_inplace(|d| d + q as f64 * lambda);
    cholesky_solve(&system, &y.to_owned(), MAX_RELATIVE_RESIDUAL)
}

/// Closed-form fit on a labeled edge dataset.
pub fn fit_closed_form(
    train: &EdgeDataset,
    kernel: EdgeKernel,
    lambda: f64,
) -> Result<(DualModel, FitReport)> {
    let edges = train.edge_list();
    let k = edge_gram(&train.nodes, &edges, &train.nodes, &edges, &kernel)?;
    let y = Array1::from(train.labels());
    let a = solve_closed_form(&k, y.view(), lambda)?;
    let model = DualModel::new(&train.nodes, &edges, a, kernel)?;
    Ok((
        model,
        FitReport {
            method: FitMethod::ClosedForm,
            iterations: 1,
            best_iteration: 1,
            validation_mse: None,
            lambda: Some(lambda),
        },
    ))
}

/// Closed-form solutions for many λ from a single tridiagonalization of `K`.
#[derive(Debug, Clone)]
pub struct RegularizationPath {
    solver: ShiftedSolver,
    rotated: Vec<f64>,
}

impl RegularizationPath {
    pub fn new(k: &Array2<f64>, y: ArrayView1<f64>) -> Result<Self> {
        check_system(k, y)?;
        let solver = ShiftedSolver::new(k)?;
        let rotated = solver.rotate(y)?;
        Ok(RegularizationPath { solver, rotated })
    }

    /// Solution of `(K + qλI) a = y`.
    pub fn coefficients(&self, lambda: f64) -> Result<Array1<f64>> {
        check_lambda(lambda)?;
        let shift = self.solver.dim() as f64 * lambda;
        self.solver.solve_rotated(shift, &self.rotated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Stop after this many consecutive iterations without a new best
    /// validation MSE.
    pub patience: usize,
    pub max_iterations: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            patience: 10,
            max_iterations: 1000,
        }
    }
}

/// Conjugate gradient on the least-squares problem `min ‖y − K a‖²`
/// (CG on the normal equations `K² a = K y`) from `a = 0`, keeping the
/// iterate with the lowest validation MSE (earliest on ties). The training
/// residual decreases monotonically, so stopping early acts as the only
/// regularizer.
pub fn solve_cg_early_stopping(
    k_train: &Array2<f64>,
    y_train: ArrayView1<f64>,
    k_val_train: &Array2<f64>,
    y_val: ArrayView1<f64>,
    opts: CgOptions,
) -> Result<(Array1<f64>, FitReport)> {
    let q = check_system(k_train, y_train)?;
    if k_val_train.ncols() != q || k_val_train.nrows() != y_val.len() {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: k_val_train.ncols(),
        });
    }
    if opts.patience == 0 || opts.max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "patience and iteration cap must be at least 1".into(),
        ));
    }
    let k = (k_train + &k_train.t()) * 0.5;

    let mut a = Array1::<f64>::zeros(q);
    let mut r = y_train.to_owned();
    // gradient direction of the least-squares objective
    let mut s = k.dot(&r);
    let mut p = s.clone();
    let mut gamma = s.dot(&s);
    let gamma0 = gamma;

    let mut best_a = a.clone();
    let mut best_mse = f64::INFINITY;
    let mut best_iteration = 0;
    let mut since_best = 0;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        if gamma > 0.0 {
            let kp = k.dot(&p);
            let alpha = gamma / kp.dot(&kp);
            a.scaled_add(alpha, &p);
            r.scaled_add(-alpha, &kp);
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("conjugate gradient iterate"));
        }
        let val = mse(k_val_train.dot(&a).view(), y_val)?;
        if !val.is_finite() {
            return Err(Error::NonFinite("validation error"));
        }
        if val < best_mse {
            best_mse = val;
            best_a.assign(&a);
            best_iteration = iterations;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.patience {
                break;
            }
        }
        s = k.dot(&r);
        let gamma_new = s.dot(&s);
        if gamma_new <= 1e-28 * gamma0 || gamma == 0.0 {
            break;
        }
        p = &s + &(&p * (gamma_new / gamma));
        gamma = gamma_new;
    }
    Ok((
        best_a,
        FitReport {
            method: FitMethod::CgEarlyStop,
            iterations,
            best_iteration,
            validation_mse: Some(best_mse),
            lambda: None,
        },
    ))
}

/// Early-stopped conjugate gradient fit on labeled edge datasets.
pub fn fit_cg_early_stopping(
    train: &EdgeDataset,
    val: &EdgeDataset,
    kernel: EdgeKernel,
    opts: CgOptions,
) -> Result<(DualModel, FitReport)> {
    let edges = train.edge_list();
    let k = edge_gram(&train.nodes, &edges, &train.nodes, &edges, &kernel)?;
    let kv = edge_gram(&val.nodes, &val.edge_list(), &train.nodes, &edges, &kernel)?;
    let y = Array1::from(train.labels());
    let yv = Array1::from(val.labels());
    let (a, report) = solve_cg_early_stopping(&k, y.view(), &kv, yv.view(), opts)?;
    Ok((DualModel::new(&train.nodes, &edges, a, kernel)?, report))
}

/// Regularized objective `(1/q)‖y − K a‖² + λ aᵀ K a`.
pub fn regularized_objective(k: &Array2<f64>, y: ArrayView1<f64>, a: ArrayView1<f64>, lambda: f64) -> f64 {
    let ka = k.dot(&a);
    let resid = &y - &ka;
    resid.dot(&resid) / y.len() as f64 + lambda * a.dot(&ka)
}
