//! Checkers for relational properties of finite relation matrices:
//! symmetry, reciprocity, T-transitivity, g-stochastic transitivity, and
//! ranking extraction by topological sorting.

use std::fmt;

use crate::error::{Error, Result};
use crate::types::RelationMatrix;

/// Tolerance for matrices built by exact construction.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for learned or predicted matrices.
pub const LEARNED_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TNorm {
    Minimum,
    Product,
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Minimum, TNorm::Product, TNorm::Lukasiewicz];

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Minimum => a.min(b),
            TNorm::Product => a * b,
            TNorm::Lukasiewicz => (a + b - 1.0).max(0.0),
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TNorm::Minimum => "T_M",
            TNorm::Product => "T_P",
            TNorm::Lukasiewicz => "T_L",
        })
    }
}

pub fn tnorm_eval(t: TNorm, a: f64, b: f64) -> f64 {
    t.eval(a, b)
}

/// g-stochastic transitivity with `g = 1/2`, `min` or `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochasticTransitivity {
    Weak,
    Moderate,
    Strong,
}

impl StochasticTransitivity {
    pub const ALL: [StochasticTransitivity; 3] = [
        StochasticTransitivity::Weak,
        StochasticTransitivity::Moderate,
        StochasticTransitivity::Strong,
    ];

    pub fn g(&self, a: f64, b: f64) -> f64 {
        match self {
            StochasticTransitivity::Weak => 0.5,
            StochasticTransitivity::Moderate => a.min(b),
            StochasticTransitivity::Strong => a.max(b),
        }
    }
}

impl fmt::Display for StochasticTransitivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StochasticTransitivity::Weak => "weak",
            StochasticTransitivity::Moderate => "moderate",
            StochasticTransitivity::Strong => "strong",
        })
    }
}

/// Index triples `(i, j, k)` violating a transitivity condition, with the
/// largest amount by which the condition failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    pub triples: Vec<(usize, usize, usize)>,
    pub max_violation: f64,
}

impl ViolationReport {
    pub fn holds(&self) -> bool {
        self.triples.is_empty()
    }

    fn record(&mut self, triple: (usize, usize, usize), amount: f64) {
        self.triples.push(triple);
        self.max_violation = self.max_violation.max(amount);
    }
}

pub fn is_symmetric(q: &RelationMatrix, tol: f64) -> bool {
    let n = q.len();
    (0..n).all(|i| (i + 1..n).all(|j| (q.get(i, j) - q.get(j, i)).abs() <= tol))
}

/// `Q(i, j) + Q(j, i) = 1` off the diagonal and `Q(i, i) = 1/2`.
pub fn is_reciprocal(q: &RelationMatrix, tol: f64) -> bool {
    let n = q.len();
    (0..n).all(|i| {
        (q.get(i, i) - 0.5).abs() <= tol
            && (i + 1..n).all(|j| (q.get(i, j) + q.get(j, i) - 1.0).abs() <= tol)
    })
}

/// All triples with `T(Q_ij, Q_jk) > Q_ik + tol`. The matrix must be
/// symmetric within `tol`.
pub fn check_t_transitivity(q: &RelationMatrix, t: TNorm, tol: f64) -> Result<ViolationReport> {
    if !is_symmetric(q, tol) {
        return Err(Error::InvalidArgument(
            "T-transitivity is checked on symmetric relations only".into(),
        ));
    }
    let n = q.len();
    let mut report = ViolationReport::default();
    for i in 0..n {
        for j in 0..n {
            let qij = q.get(i, j);
            for k in 0..n {
                let excess = t.eval(qij, q.get(j, k)) - q.get(i, k);
                if excess > tol {
                    report.record((i, j, k), excess);
                }
            }
        }
    }
    Ok(report)
}

/// All triples with `Q_ij ≥ 1/2`, `Q_jk ≥ 1/2` and `Q_ik < g(Q_ij, Q_jk) − tol`.
/// The matrix must be reciprocal within `tol`.
pub fn check_stochastic_transitivity(
    q: &RelationMatrix,
    kind: StochasticTransitivity,
    tol: f64,
) -> Result<ViolationReport> {
    if !is_reciprocal(q, tol) {
        return Err(Error::InvalidArgument(
            "stochastic transitivity is checked on reciprocal relations only".into(),
        ));
    }
    let n = q.len();
    let mut report = ViolationReport::default();
    for i in 0..n {
        for j in 0..n {
            let qij = q.get(i, j);
            if qij < 0.5 {
                continue;
            }
            for k in 0..n {
                let qjk = q.get(j, k);
                if qjk < 0.5 {
                    continue;
                }
                let shortfall = kind.g(qij, qjk) - q.get(i, k);
                if shortfall > tol {
                    report.record((i, j, k), shortfall);
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankingOutcome {
    /// Node indices from most to least preferred.
    Ranking(Vec<usize>),
    /// A directed cycle `c₀ → c₁ → … → c₀` in the majority graph.
    Cycle(Vec<usize>),
}

/// Topological sort of the graph with an arc `i → j` whenever
/// `Q_ij > threshold`. Ties produce no arc.
pub fn topological_ranking(q: &RelationMatrix, threshold: f64) -> RankingOutcome {
    let n = q.len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && q.get(i, j) > threshold).collect())
        .collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    let mut finished = Vec::with_capacity(n);
    let mut path: Vec<usize> = Vec::new();

    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS; each stack frame is (node, next successor position)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        path.push(root);
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        path.push(w);
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let start = path.iter().position(|&x| x == w).unwrap_or(0);
                        return RankingOutcome::Cycle(path[start..].to_vec());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                finished.push(v);
                path.pop();
                stack.pop();
            }
        }
    }
    finished.reverse();
    RankingOutcome::Ranking(finished)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nabla::NablaTransform;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn matrix(rows: &[&[f64]]) -> RelationMatrix {
        let n = rows.len();
        RelationMatrix::from_values(Array2::from_shape_fn((n, n), |(i, j)| rows[i][j])).unwrap()
    }

    fn from_ranking(f: &[f64]) -> RelationMatrix {
        let t = NablaTransform::linear(4.0).unwrap();
        let n = f.len();
        RelationMatrix::from_values(Array2::from_shape_fn((n, n), |(i, j)| t.apply(f[i] - f[j]))).unwrap()
    }

    fn rock_paper_scissors() -> RelationMatrix {
        matrix(&[&[0.5, 1.0, 0.0], &[0.0, 0.5, 1.0], &[1.0, 0.0, 0.5]])
    }

    fn constant_half(n: usize) -> RelationMatrix {
        RelationMatrix::from_values(Array2::from_elem((n, n), 0.5)).unwrap()
    }

    #[test]
    fn tnorm_examples() {
        assert_eq!(tnorm_eval(TNorm::Lukasiewicz, 0.6, 0.3), 0.0);
        assert_eq!(tnorm_eval(TNorm::Product, 0.5, 0.5), 0.25);
        for a in [0.0, 0.3, 1.0] {
            assert_eq!(tnorm_eval(TNorm::Minimum, a, 1.0), a);
        }
    }

    #[test]
    fn symmetry_examples() {
        let id = RelationMatrix::from_values(Array2::eye(4)).unwrap();
        assert!(is_symmetric(&id, 1e-9));
        let q = matrix(&[&[1.0, 0.3], &[0.4, 1.0]]);
        assert!(!is_symmetric(&q, 1e-9));
        let avg = RelationMatrix::from_values((&q.values + &q.values.t()) * 0.5).unwrap();
        assert!(is_symmetric(&avg, 0.0));
    }

    #[test]
    fn reciprocity_examples() {
        assert!(is_reciprocal(&constant_half(5), 0.0));
        assert!(!is_reciprocal(&matrix(&[&[1.0, 0.3], &[0.3, 1.0]]), 1e-9));
        assert!(is_reciprocal(&rock_paper_scissors(), 0.0));
    }

    #[test]
    fn t_transitivity_examples() {
        let ones = RelationMatrix::from_values(Array2::from_elem((4, 4), 1.0)).unwrap();
        for t in TNorm::ALL {
            assert!(check_t_transitivity(&ones, t, EXACT_TOL).unwrap().holds());
        }
        // Q01 = Q12 = 0.9 forces Q02 ≥ 0.8 under T_L
        let q = matrix(&[&[1.0, 0.9, 0.5], &[0.9, 1.0, 0.9], &[0.5, 0.9, 1.0]]);
        let r = check_t_transitivity(&q, TNorm::Lukasiewicz, EXACT_TOL).unwrap();
        assert!(r.triples.contains(&(0, 1, 2)));
        assert!((r.max_violation - 0.3).abs() < 1e-12);
        assert!(check_t_transitivity(&matrix(&[&[1.0, 0.3], &[0.4, 1.0]]), TNorm::Minimum, 1e-9).is_err());
    }

    #[test]
    fn stochastic_transitivity_examples() {
        let q = from_ranking(&[3.0, 2.0, 1.0]);
        assert!(is_reciprocal(&q, EXACT_TOL));
        for kind in StochasticTransitivity::ALL {
            assert!(check_stochastic_transitivity(&q, kind, EXACT_TOL).unwrap().holds());
        }
        let r = check_stochastic_transitivity(&rock_paper_scissors(), StochasticTransitivity::Weak, EXACT_TOL)
            .unwrap();
        assert!(!r.holds());
        assert!(r.triples.contains(&(0, 1, 2)));
        for kind in StochasticTransitivity::ALL {
            assert!(check_stochastic_transitivity(&constant_half(4), kind, EXACT_TOL)
                .unwrap()
                .holds());
        }
        let sym = matrix(&[&[0.5, 0.7], &[0.7, 0.5]]);
        assert!(check_stochastic_transitivity(&sym, StochasticTransitivity::Weak, EXACT_TOL).is_err());
    }

    #[test]
    fn ranking_examples() {
        let q = from_ranking(&[3.0, 2.0, 1.0]);
        assert_eq!(topological_ranking(&q, 0.5), RankingOutcome::Ranking(vec![0, 1, 2]));
        match topological_ranking(&rock_paper_scissors(), 0.5) {
            RankingOutcome::Cycle(c) => {
                assert_eq!(c.len(), 3);
                let rps = rock_paper_scissors();
                for w in 0..3 {
                    assert!(rps.get(c[w], c[(w + 1) % 3]) > 0.5);
                }
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
        match topological_ranking(&constant_half(4), 0.5) {
            RankingOutcome::Ranking(order) => assert_eq!(order.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn unit_matrix(max_n: usize) -> impl Strategy<Value = RelationMatrix> {
        (2..max_n).prop_flat_map(|n| {
            proptest::collection::vec(0.0..=1.0f64, n * n).prop_map(move |v| {
                RelationMatrix::from_values(Array2::from_shape_vec((n, n), v).unwrap()).unwrap()
            })
        })
    }

    fn symmetric_unit_matrix() -> impl Strategy<Value = RelationMatrix> {
        unit_matrix(8).prop_map(|q| {
            let mut v = (&q.values + &q.values.t()) * 0.5;
            v.diag_mut().fill(1.0);
            RelationMatrix::from_values(v).unwrap()
        })
    }

    fn reciprocal_unit_matrix() -> impl Strategy<Value = RelationMatrix> {
        unit_matrix(8).prop_map(|q| {
            let v = (&q.values - &q.values.t()) * 0.5 + 0.5;
            RelationMatrix::from_values(v).unwrap()
        })
    }

    fn is_subset(a: &ViolationReport, b: &ViolationReport) -> bool {
        a.triples.iter().all(|t| b.triples.contains(t))
    }

    proptest! {
        #[test]
        fn tnorm_ordering(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            prop_assert!(TNorm::Lukasiewicz.eval(a, b) <= TNorm::Product.eval(a, b));
            prop_assert!(TNorm::Product.eval(a, b) <= TNorm::Minimum.eval(a, b));
        }

        #[test]
        fn t_transitivity_violations_nest(q in symmetric_unit_matrix()) {
            let m = check_t_transitivity(&q, TNorm::Minimum, EXACT_TOL).unwrap();
            let p = check_t_transitivity(&q, TNorm::Product, EXACT_TOL).unwrap();
            let l = check_t_transitivity(&q, TNorm::Lukasiewicz, EXACT_TOL).unwrap();
            prop_assert!(is_subset(&l, &p));
            prop_assert!(is_subset(&p, &m));
        }

        #[test]
        fn stochastic_violations_nest(q in reciprocal_unit_matrix()) {
            let w = check_stochastic_transitivity(&q, StochasticTransitivity::Weak, EXACT_TOL).unwrap();
            let m = check_stochastic_transitivity(&q, StochasticTransitivity::Moderate, EXACT_TOL).unwrap();
            let s = check_stochastic_transitivity(&q, StochasticTransitivity::Strong, EXACT_TOL).unwrap();
            prop_assert!(is_subset(&w, &m));
            prop_assert!(is_subset(&m, &s));
        }

        #[test]
        fn ranking_representable_is_strongly_transitive(f in proptest::collection::vec(-3.0..3.0f64, 2..12)) {
            let q = from_ranking(&f);
            prop_assert!(is_reciprocal(&q, EXACT_TOL));
            let s = check_stochastic_transitivity(&q, StochasticTransitivity::Strong, EXACT_TOL).unwrap();
            prop_assert!(s.holds());
        }

        #[test]
        fn topological_order_respects_arcs(q in reciprocal_unit_matrix()) {
            match topological_ranking(&q, 0.5) {
                RankingOutcome::Ranking(order) => {
                    prop_assert_eq!(order.len(), q.len());
                    let mut pos = vec![0; q.len()];
                    for (p, &v) in order.iter().enumerate() {
                        pos[v] = p;
                    }
                    for i in 0..q.len() {
                        for j in 0..q.len() {
                            if i != j && q.get(i, j) > 0.5 {
                                prop_assert!(pos[i] < pos[j]);
                            }
                        }
                    }
                }
                RankingOutcome::Cycle(c) => {
                    prop_assert!(c.len() >= 2);
                    for w in 0..c.len() {
                        prop_assert!(q.get(c[w], c[(w + 1) % c.len()]) > 0.5);
                    }
                }
            }
        }
    }
}
