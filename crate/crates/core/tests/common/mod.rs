//! Randomized property and oracle checks shared by the integration tests
//! and the acceptance runner. Each returns a description of the first
//! failure.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pairwise_rls::datagen::{gen_species, set_similarity, RngSeed, SimilarityParams};
use pairwise_rls::linalg::min_eigenvalue;
use pairwise_rls::properties::{
    check_stochastic_transitivity, check_t_transitivity, is_reciprocal, StochasticTransitivity, TNorm,
    EXACT_TOL,
};
use pairwise_rls::rls::solve_closed_form;
use pairwise_rls::stats::wilcoxon_signed_rank_detailed;
use pairwise_rls::{
    edge_gram, fit_closed_form, Edge, EdgeDataset, EdgeKernel, FeatureVector, LabeledEdge, Node,
    NodeKernel, PairwiseKernelKind, RelationMatrix,
};

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_nodes(r: &mut ChaCha8Rng, n: usize, d: usize, prefix: &str) -> Vec<Node> {
    (0..n)
        .map(|i| {
            let f = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
            Node::new(format!("{prefix}{i}"), FeatureVector::dense(f))
        })
        .collect()
}

pub fn random_edges(r: &mut ChaCha8Rng, n: usize, q: usize) -> Vec<Edge> {
    (0..q)
        .map(|_| Edge::new(r.random_range(0..n), r.random_range(0..n)))
        .collect()
}

pub fn random_dataset(r: &mut ChaCha8Rng, n: usize, d: usize, q: usize) -> EdgeDataset {
    let nodes = random_nodes(r, n, d, "v");
    let edges = random_edges(r, n, q)
        .into_iter()
        .map(|e| LabeledEdge::new(e, r.random_range(0.0..1.0)).unwrap())
        .collect();
    EdgeDataset::new(nodes, edges).unwrap()
}

pub fn node_kernels() -> [NodeKernel; 2] {
    [NodeKernel::Linear, NodeKernel::rbf(0.7).unwrap()]
}

/// Minimum eigenvalue ≥ −1e−8 on `trials` random Gram matrices per kernel.
pub fn check_psd(trials: usize) -> Check {
    let mut r = rng(11);
    for kind in PairwiseKernelKind::ALL {
        for node in node_kernels() {
            for t in 0..trials {
                let nodes = random_nodes(&mut r, 8, 3, "v");
                let edges = random_edges(&mut r, 8, 14);
                let cfg = EdgeKernel::new(kind, node);
                let k = edge_gram(&nodes, &edges, &nodes, &edges, &cfg).map_err(|e| e.to_string())?;
                let min = min_eigenvalue(&k).map_err(|e| e.to_string())?;
                if min < -1e-8 {
                    return Err(format!("{kind}/{node} trial {t}: min eigenvalue {min:e}"));
                }
            }
        }
    }
    Ok(())
}

/// Learned models are symmetric or antisymmetric to 1e−9 when their
/// kernel is.
pub fn check_learned_symmetry(instances: usize) -> Check {
    let mut r = rng(12);
    for kind in PairwiseKernelKind::ALL {
        if !(kind.is_symmetric() || kind.is_antisymmetric()) {
            continue;
        }
        for node in node_kernels() {
            for t in 0..instances {
                let train = random_dataset(&mut r, 10, 3, 25);
                let (model, _) = fit_closed_form(&train, EdgeKernel::new(kind, node), 1e-2)
                    .map_err(|e| e.to_string())?;
                let test = random_nodes(&mut r, 7, 3, "t");
                let mut fwd = Vec::new();
                let mut bwd = Vec::new();
                for i in 0..7 {
                    for j in 0..7 {
                        fwd.push(Edge::new(i, j));
                        bwd.push(Edge::new(j, i));
                    }
                }
                let a = model.predict(&test, &fwd).map_err(|e| e.to_string())?;
                let b = model.predict(&test, &bwd).map_err(|e| e.to_string())?;
                let sign = if kind.is_symmetric() { 1.0 } else { -1.0 };
                for (x, y) in a.iter().zip(b.iter()) {
                    if (x - sign * y).abs() > 1e-9 {
                        return Err(format!("{kind}/{node} instance {t}: h = {x}, swapped = {y}"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Predictions of a `kron_sym` fit on `T` at `lambda`, and of an RLS fit
/// with the kernel `scale · kron` on `T ∪ swap(T)` at `doubled_lambda`.
pub fn edge_doubling_predictions(
    nodes: &[Node],
    train: &[Edge],
    y: &[f64],
    test: &[Edge],
    node: NodeKernel,
    lambda: f64,
    scale: f64,
    doubled_lambda: f64,
) -> Result<(Array1<f64>, Array1<f64>), String> {
    let sym = EdgeKernel::new(PairwiseKernelKind::KronSym, node);
    let kron = EdgeKernel::new(PairwiseKernelKind::Kron, node);
    let e = |m: pairwise_rls::Result<Array2<f64>>| m.map_err(|e| e.to_string());

    let k = e(edge_gram(nodes, train, nodes, train, &sym))?;
    let a = solve_closed_form(&k, Array1::from(y.to_vec()).view(), lambda).map_err(|e| e.to_string())?;
    let p_sym = e(edge_gram(nodes, test, nodes, train, &sym))?.dot(&a);

    let mut doubled: Vec<Edge> = train.to_vec();
    doubled.extend(train.iter().map(|e| e.swap()));
    let mut y2 = y.to_vec();
    y2.extend_from_slice(y);
    let k2 = e(edge_gram(nodes, &doubled, nodes, &doubled, &kron))? * scale;
    let b = solve_closed_form(&k2, Array1::from(y2).view(), doubled_lambda).map_err(|e| e.to_string())?;
    let p_dbl = (e(edge_gram(nodes, test, nodes, &doubled, &kron))? * scale).dot(&b);
    Ok((p_sym, p_dbl))
}

/// `kron_sym` on `T` agrees with `4·kron` on `T ∪ swap(T)` at the same λ
/// to 1e−6 on `instances` random problems with q ≤ 20.
pub fn check_edge_doubling(instances: usize) -> Check {
    let mut r = rng(13);
    for t in 0..instances {
        let q = r.random_range(2..=20);
        let n = r.random_range(3..=9);
        let nodes = random_nodes(&mut r, n, 3, "v");
        let train = random_edges(&mut r, n, q);
        let y: Vec<f64> = (0..q).map(|_| r.random_range(0.0..1.0)).collect();
        let test = random_edges(&mut r, n, 10);
        let node = node_kernels()[t % 2];
        let lambda = 2f64.powi(r.random_range(-8..=0));
        let (p, p2) = edge_doubling_predictions(&nodes, &train, &y, &test, node, lambda, 4.0, lambda)?;
        for (x, z) in p.iter().zip(p2.iter()) {
            if (x - z).abs() > 1e-6 {
                return Err(format!("instance {t} (q={q}, λ={lambda}): {x} vs {z}"));
            }
        }
    }
    Ok(())
}

/// `rank_rec` models satisfy h(u,v) + h(v,w) = h(u,w) to 1e−8.
pub fn check_rank_rec_additivity(instances: usize) -> Check {
    let mut r = rng(14);
    for t in 0..instances {
        let node = node_kernels()[t % 2];
        let train = random_dataset(&mut r, 10, 3, 30);
        let (model, _) = fit_closed_form(&train, EdgeKernel::new(PairwiseKernelKind::RankRec, node), 1e-2)
            .map_err(|e| e.to_string())?;
        let test = random_nodes(&mut r, 6, 3, "t");
        let h = model.predict_all_pairs(&test).map_err(|e| e.to_string())?;
        for u in 0..6 {
            for v in 0..6 {
                for w in 0..6 {
                    let gap = h[[u, v]] + h[[v, w]] - h[[u, w]];
                    if gap.abs() > 1e-8 {
                        return Err(format!("instance {t}: triple ({u},{v},{w}) gap {gap:e}"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn triples(r: &pairwise_rls::properties::ViolationReport) -> BTreeSet<(usize, usize, usize)> {
    r.triples.iter().copied().collect()
}

fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> RelationMatrix {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = 1.0;
        for j in 0..i {
            let v = r.random_range(0.0..1.0);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    RelationMatrix::from_values(m).unwrap()
}

fn random_reciprocal(r: &mut ChaCha8Rng, n: usize) -> RelationMatrix {
    let mut m = Array2::from_elem((n, n), 0.5);
    for i in 0..n {
        for j in 0..i {
            let v: f64 = r.random_range(0.0..1.0);
            m[[i, j]] = v;
            m[[j, i]] = 1.0 - v;
        }
    }
    RelationMatrix::from_values(m).unwrap()
}

/// Violation sets nest: T_L ⊆ T_P ⊆ T_M and weak ⊆ moderate ⊆ strong.
pub fn check_transitivity_nesting(instances: usize) -> Check {
    let mut r = rng(15);
    for t in 0..instances {
        let q = random_symmetric(&mut r, 8);
        let v: Vec<_> = [TNorm::Lukasiewicz, TNorm::Product, TNorm::Minimum]
            .iter()
            .map(|&tn| check_t_transitivity(&q, tn, EXACT_TOL).map(|r| triples(&r)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if !(v[0].is_subset(&v[1]) && v[1].is_subset(&v[2])) {
            return Err(format!("t-norm violation sets not nested on instance {t}"));
        }
        let p = random_reciprocal(&mut r, 8);
        let v: Vec<_> = [
            StochasticTransitivity::Weak,
            StochasticTransitivity::Moderate,
            StochasticTransitivity::Strong,
        ]
        .iter()
        .map(|&k| check_stochastic_transitivity(&p, k, EXACT_TOL).map(|r| triples(&r)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
        if !(v[0].is_subset(&v[1]) && v[1].is_subset(&v[2])) {
            return Err(format!("stochastic violation sets not nested on instance {t}"));
        }
    }
    Ok(())
}

/// Dominance matrices are reciprocal to 1e−12.
pub fn check_dominance_reciprocity(instances: usize) -> Check {
    for t in 0..instances {
        let pool = gen_species(40, 10, RngSeed(100 + t as u64));
        if !is_reciprocal(&pool.dominance_matrix(), 1e-12) {
            return Err(format!("pool {t} is not reciprocal"));
        }
    }
    Ok(())
}

/// Closed-form RLS against an explicit-inverse normal-equations solve to
/// 1e−8 on random systems with q ≤ 15.
pub fn check_closed_form_oracle(instances: usize) -> Check {
    let mut r = rng(16);
    for t in 0..instances {
        let q = r.random_range(1..=15);
        let m = Array2::from_shape_fn((q, q + 2), |_| r.random_range(-1.0..1.0));
        let k = m.dot(&m.t());
        let y = Array1::from_shape_fn(q, |_| r.random_range(0.0..1.0));
        let lambda = 2f64.powi(r.random_range(-6..=1));
        let a = solve_closed_form(&k, y.view(), lambda).map_err(|e| e.to_string())?;
        let shifted = &k + &(Array2::<f64>::eye(q) * (q as f64 * lambda));
        let oracle = shifted.inv().map_err(|e| e.to_string())?.dot(&y);
        for (x, z) in a.iter().zip(oracle.iter()) {
            if (x - z).abs() > 1e-8 {
                return Err(format!("instance {t} (q={q}): {x} vs {z}"));
            }
        }
    }
    Ok(())
}

/// Two-sided p-value by enumerating all 2^n sign assignments.
pub fn wilcoxon_enumeration(d: &[f64]) -> f64 {
    let d: Vec<f64> = d.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let less = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let eq = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect();
    let center = ranks.iter().sum::<f64>() / 2.0;
    let w: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let dev = (w - center).abs();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (s - center).abs() >= dev - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Exact Wilcoxon mode against full sign enumeration for n ≤ 10.
pub fn check_wilcoxon_oracle(instances: usize) -> Check {
    let mut r = rng(17);
    for t in 0..instances {
        let n = r.random_range(1..=10);
        // small integer values force ties and zero differences
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-3..=3) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(-3..=3) as f64).collect();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        if d.iter().all(|x| *x == 0.0) {
            continue;
        }
        let got = wilcoxon_signed_rank_detailed(&a, &b).map_err(|e| e.to_string())?;
        let want = wilcoxon_enumeration(&d);
        if !got.exact || (got.p_value - want).abs() > 1e-12 {
            return Err(format!("instance {t}: p = {} vs enumeration {want}", got.p_value));
        }
    }
    Ok(())
}

/// Set similarity against direct set-cardinality arithmetic, exactly.
pub fn check_similarity_oracle(pairs: usize) -> Check {
    let mut r = rng(18);
    let members = [
        SimilarityParams::INTRANSITIVE,
        SimilarityParams::JACCARD,
        SimilarityParams::PRODUCT_TRANSITIVE,
    ];
    for t in 0..pairs {
        let a: Vec<bool> = (0..20).map(|_| r.random_bool(0.5)).collect();
        let b: Vec<bool> = (0..20).map(|_| r.random_bool(0.5)).collect();
        let sa: HashSet<usize> = (0..20).filter(|&i| a[i]).collect();
        let sb: HashSet<usize> = (0..20).filter(|&i| b[i]).collect();
        let inter = sa.intersection(&sb).count() as f64;
        let sym = sa.symmetric_difference(&sb).count() as f64;
        let outside = (20 - sa.union(&sb).count()) as f64;
        for p in &members {
            let num = p.t * sym + p.u * inter + p.v * outside;
            let den = p.t_prime * sym + p.u * inter + p.v * outside;
            let got = set_similarity(&a, &b, p);
            match (den == 0.0, got) {
                (true, Err(_)) => {}
                (false, Ok(s)) if s == num / den => {}
                (_, other) => return Err(format!("pair {t}, {}: {other:?} vs {num}/{den}", p.label())),
            }
        }
    }
    Ok(())
}
