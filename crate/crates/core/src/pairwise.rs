//! Edge-level kernels built from a node kernel.
//!
//! For `e = (v, v′)` and `ē = (v̄, v̄′)` every kernel here is a combination
//! of the four cross evaluations `k(v,v̄)`, `k(v′,v̄′)`, `k(v,v̄′)`, `k(v′,v̄)`
//! and, for the Cartesian variants, the node-identity indicators. Kernels
//! are evaluated in dual form only; the Kronecker feature space is never
//! materialised.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::node_kernel::{gram_matrix, NodeKernel};
use crate::types::{Edge, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairwiseKernelKind {
    /// `k(v,v̄)·k(v′,v̄′)`
    Kron,
    /// `2(k(v,v̄)k(v′,v̄′) + k(v,v̄′)k(v′,v̄))`
    KronSym,
    /// `2(k(v,v̄)k(v′,v̄′) − k(v,v̄′)k(v′,v̄))`
    KronRec,
    /// `k(v′,v̄′)[v=v̄] + k(v,v̄)[v′=v̄′]`
    Cartesian,
    /// `cartesian(e, ē) + cartesian(e, swap(ē))`
    CartesianSym,
    /// `k(v,v̄) + k(v′,v̄′) − k(v,v̄′) − k(v′,v̄)`
    RankRec,
    /// `k(v,v̄) + k(v′,v̄′) + k(v,v̄′) + k(v′,v̄)`
    RankSym,
    /// `rank_rec(e, ē)²`, the metric learning pairwise kernel.
    Mlpk,
}

impl PairwiseKernelKind {
    pub const ALL: [PairwiseKernelKind; 8] = [
        PairwiseKernelKind::Kron,
        PairwiseKernelKind::KronSym,
        PairwiseKernelKind::KronRec,
        PairwiseKernelKind::Cartesian,
        PairwiseKernelKind::CartesianSym,
        PairwiseKernelKind::RankRec,
        PairwiseKernelKind::RankSym,
        PairwiseKernelKind::Mlpk,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PairwiseKernelKind::Kron => "kron",
            PairwiseKernelKind::KronSym => "kron_sym",
            PairwiseKernelKind::KronRec => "kron_rec",
            PairwiseKernelKind::Cartesian => "cartesian",
            PairwiseKernelKind::CartesianSym => "cartesian_sym",
            PairwiseKernelKind::RankRec => "rank_rec",
            PairwiseKernelKind::RankSym => "rank_sym",
            PairwiseKernelKind::Mlpk => "mlpk",
        }
    }

    /// Cartesian kernels only relate edges that share an aligned node.
    pub fn is_cartesian(&self) -> bool {
        matches!(
            self,
            PairwiseKernelKind::Cartesian | PairwiseKernelKind::CartesianSym
        )
    }

    /// Whether every function in the induced RKHS is symmetric in the node order.
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            PairwiseKernelKind::KronSym
                | PairwiseKernelKind::CartesianSym
                | PairwiseKernelKind::RankSym
                | PairwiseKernelKind::Mlpk
        )
    }

    /// Whether every function in the induced RKHS is antisymmetric.
    pub fn is_antisymmetric(&self) -> bool {
        matches!(self, PairwiseKernelKind::KronRec | PairwiseKernelKind::RankRec)
    }

    /// Combines the cross evaluations for one pair of edges.
    pub fn combine(&self, t: &CrossTerms) -> f64 {
        let CrossTerms {
            first_first: a,
            second_second: b,
            first_second: c,
            second_first: d,
            ..
        } = *t;
        let ind = |x: bool| if x { 1.0 } else { 0.0 };
        match self {
            PairwiseKernelKind::Kron => a * b,
            PairwiseKernelKind::KronSym => 2.0 * (a * b + c * d),
            PairwiseKernelKind::KronRec => 2.0 * (a * b - c * d),
            PairwiseKernelKind::Cartesian => {
                b * ind(t.same_first_first) + a * ind(t.same_second_second)
            }
            PairwiseKernelKind::CartesianSym => {
                (b * ind(t.same_first_first) + a * ind(t.same_second_second))
                    + (d * ind(t.same_first_second) + c * ind(t.same_second_first))
            }
            // Grouped so that transposition and node swaps are exact in floating point.
            PairwiseKernelKind::RankRec => (a + b) - (c + d),
            PairwiseKernelKind::RankSym => (a + b) + (c + d),
            PairwiseKernelKind::Mlpk => {
                let r = (a + b) - (c + d);
                r * r
            }
        }
    }
}

impl fmt::Display for PairwiseKernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairwiseKernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PairwiseKernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKernel(s.to_string()))
    }
}

/// Node-kernel values and identity indicators between the endpoints of
/// `e = (v, v′)` and `ē = (v̄, v̄′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerms {
    /// `k(v, v̄)`
    pub first_first: f64,
    /// `k(v′, v̄′)`
    pub second_second: f64,
    /// `k(v, v̄′)`
    pub first_second: f64,
    /// `k(v′, v̄)`
    pub second_first: f64,
    pub same_first_first: bool,
    pub same_second_second: bool,
    pub same_first_second: bool,
    pub same_second_first: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeKernel {
    pub node: NodeKernel,
    pub kind: PairwiseKernelKind,
}

impl EdgeKernel {
    pub fn new(kind: PairwiseKernelKind, node: NodeKernel) -> Self {
        EdgeKernel { node, kind }
    }

    /// Kernel value between two edges given by their endpoint nodes. Node
    /// identity for the Cartesian indicators is decided by node id.
    pub fn eval(&self, e: (&Node, &Node), ebar: (&Node, &Node)) -> Result<f64> {
        let k = |x: &Node, y: &Node| self.node.eval(&x.features, &y.features);
        let terms = CrossTerms {
            first_first: k(e.0, ebar.0)?,
            second_second: k(e.1, ebar.1)?,
            first_second: k(e.0, ebar.1)?,
            second_first: k(e.1, ebar.0)?,
            same_first_first: e.0.id == ebar.0.id,
            same_second_second: e.1.id == ebar.1.id,
            same_first_second: e.0.id == ebar.1.id,
            same_second_first: e.1.id == ebar.0.id,
        };
        Ok(self.kind.combine(&terms))
    }
}

/// Matrix of edge-kernel values between `rows` (over `row_nodes`) and
/// `cols` (over `col_nodes`).
pub fn edge_gram(
    row_nodes: &[Node],
    rows: &[Edge],
    col_nodes: &[Node],
    cols: &[Edge],
    cfg: &EdgeKernel,
) -> Result<Array2<f64>> {
    check_edges(row_nodes.len(), rows)?;
    check_edges(col_nodes.len(), cols)?;
    let node_gram = gram_matrix(row_nodes, col_nodes, &cfg.node)?;
    let same = if cfg.kind.is_cartesian() {
        Some(identity_matrix(row_nodes, col_nodes))
    } else {
        None
    };
    Ok(edge_gram_from_node_gram(
        cfg.kind,
        &node_gram,
        same.as_ref(),
        rows,
        cols,
    ))
}

/// Node-identity indicator matrix `[row_nodes[i].id == col_nodes[j].id]`.
pub fn identity_matrix(row_nodes: &[Node], col_nodes: &[Node]) -> Array2<bool> {
    Array2::from_shape_fn((row_nodes.len(), col_nodes.len()), |(i, j)| {
        row_nodes[i].id == col_nodes[j].id
    })
}

/// Assembles an edge Gram matrix from a precomputed node Gram matrix. The
/// identity matrix is only consulted by the Cartesian kernels; when it is
/// absent every indicator is false.
pub fn edge_gram_from_node_gram(
    kind: PairwiseKernelKind,
    node_gram: &Array2<f64>,
    same: Option<&Array2<bool>>,
    rows: &[Edge],
    cols: &[Edge],
) -> Array2<f64> {
    let is_same = |i: usize, j: usize| same.is_some_and(|s| s[[i, j]]);
    Array2::from_shape_fn((rows.len(), cols.len()), |(r, c)| {
        let (e, ebar) = (rows[r], cols[c]);
        let terms = CrossTerms {
            first_first: node_gram[[e.first, ebar.first]],
            second_second: node_gram[[e.second, ebar.second]],
            first_second: node_gram[[e.first, ebar.second]],
            second_first: node_gram[[e.second, ebar.first]],
            same_first_first: is_same(e.first, ebar.first),
            same_second_second: is_same(e.second, ebar.second),
            same_first_second: is_same(e.first, ebar.second),
            same_second_first: is_same(e.second, ebar.first),
        };
        kind.combine(&terms)
    })
}

pub(crate) fn check_edges(n_nodes: usize, edges: &[Edge]) -> Result<()> {
    match edges
        .iter()
        .find(|e| e.first >= n_nodes || e.second >= n_nodes)
    {
        Some(e) => Err(Error::InvalidArgument(format!(
            "edge ({}, {}) references a node outside 0..{n_nodes}",
            e.first, e.second
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::types::FeatureVector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    use PairwiseKernelKind::*;

    fn node(id: &str, f: &[f64]) -> Node {
        Node::new(id, FeatureVector::dense(f.to_vec()))
    }

    fn lin(kind: PairwiseKernelKind) -> EdgeKernel {
        EdgeKernel::new(kind, NodeKernel::Linear)
    }

    fn rbf(kind: PairwiseKernelKind, gamma: f64) -> EdgeKernel {
        EdgeKernel::new(kind, NodeKernel::rbf(gamma).unwrap())
    }

    fn random_nodes(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Node> {
        (0..n)
            .map(|i| {
                let f: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
                Node::new(format!("n{i}"), FeatureVector::dense(f))
            })
            .collect()
    }

    fn random_edges(rng: &mut impl Rng, n: usize, q: usize) -> Vec<Edge> {
        (0..q)
            .map(|_| Edge::new(rng.random_range(0..n), rng.random_range(0..n)))
            .collect()
    }

    #[test]
    fn kron_examples() {
        let (v, vp, vb, vbp) = (node("a", &[2.0]), node("b", &[3.0]), node("c", &[1.0]), node("d", &[4.0]));
        assert_eq!(lin(Kron).eval((&v, &vp), (&vb, &vbp)).unwrap(), 24.0);
        let k = rbf(Kron, 0.3);
        assert_eq!(k.eval((&v, &vp), (&v, &vp)).unwrap(), 1.0);
        assert_eq!(
            k.eval((&v, &vp), (&vb, &vbp)).unwrap(),
            k.eval((&vb, &vbp), (&v, &vp)).unwrap()
        );
    }

    #[test]
    fn kron_rec_and_sym_examples() {
        let (x, y) = (node("x", &[1.0, 0.0]), node("y", &[0.0, 1.0]));
        assert_eq!(lin(KronRec).eval((&x, &y), (&x, &y)).unwrap(), 2.0);
        assert_eq!(lin(KronSym).eval((&x, &y), (&x, &y)).unwrap(), 2.0);
        // self-pair edge
        let z = node("z", &[0.4, -0.2]);
        assert_eq!(rbf(KronRec, 1.0).eval((&z, &z), (&x, &y)).unwrap(), 0.0);
        // rank-one node kernel: the 2×2 determinant vanishes
        let (a, b, c, d) = (node("a", &[2.0]), node("b", &[-3.0]), node("c", &[0.5]), node("d", &[7.0]));
        assert_eq!(lin(KronRec).eval((&a, &b), (&c, &d)).unwrap(), 0.0);
        // e = ē with RBF: 2(1 + k(v, v′)²)
        let g = 0.8;
        let kvv = NodeKernel::rbf(g).unwrap().eval(&x.features, &y.features).unwrap();
        let v = rbf(KronSym, g).eval((&x, &y), (&x, &y)).unwrap();
        assert!((v - 2.0 * (1.0 + kvv * kvv)).abs() < 1e-15);
    }

    #[test]
    fn cartesian_examples() {
        let a = node("A", &[1.0, 0.5]);
        let b = node("B", &[0.2, -1.0]);
        let c = node("C", &[-0.7, 0.3]);
        let d = node("D", &[0.0, 2.0]);
        let nk = NodeKernel::rbf(0.5).unwrap();
        let k = |x: &Node, y: &Node| nk.eval(&x.features, &y.features).unwrap();
        let cart = EdgeKernel::new(Cartesian, nk);
        let cart_sym = EdgeKernel::new(CartesianSym, nk);
        assert_eq!(cart.eval((&a, &b), (&c, &d)).unwrap(), 0.0);
        assert_eq!(cart.eval((&a, &b), (&a, &c)).unwrap(), k(&b, &c));
        assert_eq!(cart.eval((&a, &b), (&a, &b)).unwrap(), k(&b, &b) + k(&a, &a));
        assert_eq!(cart_sym.eval((&a, &b), (&c, &d)).unwrap(), 0.0);
        // Only the swapped term fires for ē = swap(e): [v=v̄′] and [v′=v̄].
        assert_eq!(cart_sym.eval((&a, &b), (&b, &a)).unwrap(), k(&b, &b) + k(&a, &a));
        // identity is decided by id, not by features
        let a_twin = node("A2", &[1.0, 0.5]);
        assert_eq!(cart.eval((&a, &b), (&a_twin, &c)).unwrap(), 0.0);
    }

    #[test]
    fn ranking_kernel_examples() {
        let (v, vp, vb, vbp) = (node("a", &[3.0]), node("b", &[1.0]), node("c", &[2.0]), node("d", &[0.0]));
        assert_eq!(lin(RankRec).eval((&v, &vp), (&vb, &vbp)).unwrap(), 4.0);
        assert_eq!(lin(RankSym).eval((&v, &vp), (&vb, &vbp)).unwrap(), 8.0);
        assert_eq!(lin(Mlpk).eval((&v, &vp), (&vb, &vbp)).unwrap(), 16.0);
        assert_eq!(lin(RankRec).eval((&v, &v), (&vb, &vbp)).unwrap(), 0.0);
        assert_eq!(lin(Mlpk).eval((&v, &v), (&vb, &vbp)).unwrap(), 0.0);
        let zero = node("z", &[0.0]);
        let zero2 = node("z2", &[0.0]);
        assert_eq!(lin(RankSym).eval((&zero, &zero2), (&zero, &zero2)).unwrap(), 0.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PairwiseKernelKind::ALL {
            assert_eq!(k.name().parse::<PairwiseKernelKind>().unwrap(), k);
        }
        assert!(matches!("tppk".parse::<PairwiseKernelKind>(), Err(Error::UnknownKernel(_))));
    }

    #[test]
    fn edge_gram_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let nodes = random_nodes(&mut rng, 6, 3);
        let edges = random_edges(&mut rng, 6, 5);
        let g = edge_gram(&nodes, &edges, &nodes, &edges, &rbf(Kron, 0.7)).unwrap();
        assert!(min_eigenvalue(&g).unwrap() >= -1e-8);

        let mut with_loop = edges.clone();
        with_loop[2] = Edge::new(4, 4);
        let g = edge_gram(&nodes, &with_loop, &nodes, &with_loop, &rbf(KronRec, 0.7)).unwrap();
        assert!(g.row(2).iter().all(|&v| v == 0.0));
        assert!(g.column(2).iter().all(|&v| v == 0.0));

        let single = [Edge::new(0, 1)];
        let g = edge_gram(&nodes, &single, &nodes, &single, &rbf(Kron, 2.0)).unwrap();
        assert_eq!(g, ndarray::arr2(&[[1.0]]));

        let bad = [Edge::new(0, 9)];
        assert!(edge_gram(&nodes, &bad, &nodes, &single, &rbf(Kron, 2.0)).is_err());
    }

    proptest! {
        #[test]
        fn edge_gram_is_psd(seed in any::<u64>(), q in 1usize..30, log_gamma in -4.0..2.0f64) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let nodes = random_nodes(&mut rng, 8, 3);
            let edges = random_edges(&mut rng, 8, q);
            for kind in PairwiseKernelKind::ALL {
                for nk in [NodeKernel::Linear, NodeKernel::rbf(log_gamma.exp2()).unwrap()] {
                    let g = edge_gram(&nodes, &edges, &nodes, &edges, &EdgeKernel::new(kind, nk)).unwrap();
                    prop_assert_eq!(&g, &g.t());
                    prop_assert!(min_eigenvalue(&g).unwrap() >= -1e-8, "{} {:?}", kind, nk);
                }
            }
        }

        #[test]
        fn algebraic_identities(seed in any::<u64>(), log_gamma in -4.0..2.0f64) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let nodes = random_nodes(&mut rng, 4, 2);
            let nk = NodeKernel::rbf(log_gamma.exp2()).unwrap();
            let e = (&nodes[0], &nodes[1]);
            let se = (&nodes[1], &nodes[0]);
            let eb = (&nodes[2], &nodes[3]);
            let seb = (&nodes[3], &nodes[2]);
            let ev = |kind, x, y| EdgeKernel::new(kind, nk).eval(x, y).unwrap();
            prop_assert_eq!(ev(KronRec, se, eb), -ev(KronRec, e, eb));
            prop_assert_eq!(ev(KronSym, se, eb), ev(KronSym, e, eb));
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-14 * (1.0 + x.abs().max(y.abs()));
            prop_assert!(close(ev(KronSym, e, eb) + ev(KronRec, e, eb), 4.0 * ev(Kron, e, eb)));
            let rr = ev(RankRec, e, eb);
            prop_assert_eq!(ev(Mlpk, e, eb), rr * rr);
            prop_assert!(close(ev(RankRec, e, seb), -rr));
            prop_assert!(close(ev(RankSym, e, seb), ev(RankSym, e, eb)));
            prop_assert!(close(ev(CartesianSym, se, eb), ev(CartesianSym, e, eb)));
            prop_assert_eq!(ev(Cartesian, e, eb), 0.0);
        }
    }
}
