use std::path::Path;

use ndarray::Array1;

use crate::datagen::{
    binary_pattern, common_words_label, flip_noise, gen_bernoulli_nodes, gen_species, load_bow_corpus,
    set_similarity, Corpus, RngSeed, SimilarityParams,
};
use crate::error::{Error, Result};
use crate::pairwise::{EdgeKernel, PairwiseKernelKind};
use crate::node_kernel::NodeKernel;
use crate::rls::{fit_cg_early_stopping, mean_predictor, CgOptions};
use crate::types::{Edge, EdgeDataset, LabeledEdge, Node};

use super::grid::{centered_labels, evaluate_method, GridSpec, Method};
use super::sampling::{sample_edges, sample_unordered_pairs, split_indices};
use super::ExperimentResult;

/// Settings shared by the two similarity-learning protocols.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityConfig {
    pub reps: usize,
    pub seed: RngSeed,
    pub nodes: usize,
    pub dim: usize,
    pub bernoulli_p: f64,
    pub noise: f64,
    pub edges: usize,
    pub grid: GridSpec,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            reps: 100,
            seed: RngSeed(1),
            nodes: 100,
            dim: 20,
            bernoulli_p: 0.5,
            noise: 0.1,
            edges: 500,
            grid: GridSpec::pow2((-20, 1), (-20, 1)),
        }
    }
}

/// Settings of the species competition protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesConfig {
    pub reps: usize,
    pub seed: RngSeed,
    pub species: usize,
    pub factors: usize,
    /// Species used for training, validation and testing.
    pub split: [usize; 3],
    /// Interactions sampled from each split.
    pub edges: [usize; 3],
    pub grid: GridSpec,
}

impl Default for SpeciesConfig {
    fn default() -> Self {
        SpeciesConfig {
            reps: 100,
            seed: RngSeed(1),
            species: 400,
            factors: 10,
            split: [200, 100, 100],
            edges: [1200, 600, 600],
            grid: GridSpec::pow2((-20, 4), (-10, 1)),
        }
    }
}

/// Methods compared on the partially observed graph.
pub const PARTIAL_GRAPH_METHODS: [Method; 6] = [
    Method::Mean,
    Method::Kernel(PairwiseKernelKind::Kron),
    Method::Kernel(PairwiseKernelKind::KronSym),
    Method::Kernel(PairwiseKernelKind::Mlpk),
    Method::Kernel(PairwiseKernelKind::Cartesian),
    Method::Kernel(PairwiseKernelKind::CartesianSym),
];

/// Methods compared on unseen nodes.
pub const NEW_NODES_METHODS: [Method; 4] = [
    Method::Mean,
    Method::Kernel(PairwiseKernelKind::Kron),
    Method::Kernel(PairwiseKernelKind::KronSym),
    Method::Kernel(PairwiseKernelKind::Mlpk),
];

/// Methods compared on species competition.
pub const SPECIES_METHODS: [Method; 4] = [
    Method::Mean,
    Method::Kernel(PairwiseKernelKind::Kron),
    Method::Kernel(PairwiseKernelKind::KronRec),
    Method::Kernel(PairwiseKernelKind::Mlpk),
];

/// Per-repetition seed.
pub fn repetition_seed(master: RngSeed, rep: usize) -> RngSeed {
    master.derive(rep as u64)
}

fn labeled(nodes: &[Node], edges: Vec<Edge>, label: impl Fn(Edge) -> Result<f64>) -> Result<EdgeDataset> {
    let edges = edges
        .into_iter()
        .map(|e| LabeledEdge::new(e, label(e)?))
        .collect::<Result<Vec<_>>>()?;
    EdgeDataset::new(nodes.to_vec(), edges)
}

fn run_reps(
    methods: &[Method],
    reps: usize,
    seed: RngSeed,
    mut split: impl FnMut(RngSeed) -> Result<[EdgeDataset; 3]>,
    grid: &GridSpec,
) -> Result<Vec<ExperimentResult>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("at least one repetition is required".into()));
    }
    let mut mses = vec![Vec::with_capacity(reps); methods.len()];
    for rep in 0..reps {
        let [train, val, test] = split(repetition_seed(seed, rep))?;
        for (m, method) in methods.iter().enumerate() {
            mses[m].push(evaluate_method(*method, &train, &val, &test, grid)?);
        }
    }
    Ok(methods
        .iter()
        .zip(mses)
        .map(|(m, v)| ExperimentResult::new(m.name(), v))
        .collect())
}

/// Noisy Bernoulli nodes together with the clean binary patterns that
/// define their similarity.
fn similarity_nodes(cfg: &SimilarityConfig, n: usize, seed: RngSeed, prefix: &str) -> Result<(Vec<Node>, Vec<Vec<bool>>)> {
    let clean = gen_bernoulli_nodes(n, cfg.dim, cfg.bernoulli_p, seed.derive(0), prefix)?;
    let patterns = clean.iter().map(|n| binary_pattern(&n.features)).collect();
    let noisy = flip_noise(&clean, cfg.noise, seed.derive(1))?;
    Ok((noisy, patterns))
}

/// One repetition of the partially observed graph protocol: a single node
/// set and three disjoint samples of ordered pairs.
pub fn partial_graph_split(member: &SimilarityParams, cfg: &SimilarityConfig, seed: RngSeed) -> Result<[EdgeDataset; 3]> {
    let (nodes, patterns) = similarity_nodes(cfg, cfg.nodes, seed, "v")?;
    let all = sample_edges(cfg.nodes, 3 * cfg.edges, seed.derive(2), true)?;
    let label = |e: Edge| set_similarity(&patterns[e.first], &patterns[e.second], member);
    let mut parts = all.chunks(cfg.edges).map(|c| labeled(&nodes, c.to_vec(), label));
    Ok([
        parts.next().unwrap()?,
        parts.next().unwrap()?,
        parts.next().unwrap()?,
    ])
}

/// One repetition of the unseen-nodes protocol: three disjoint node sets
/// with edges sampled inside each.
pub fn new_nodes_split(member: &SimilarityParams, cfg: &SimilarityConfig, seed: RngSeed) -> Result<[EdgeDataset; 3]> {
    let mut out = Vec::with_capacity(3);
    for (s, prefix) in ["train", "val", "test"].iter().enumerate() {
        let sub = seed.derive(10 + s as u64);
        let (nodes, patterns) = similarity_nodes(cfg, cfg.nodes, sub, prefix)?;
        let edges = sample_edges(cfg.nodes, cfg.edges, sub.derive(2), true)?;
        out.push(labeled(&nodes, edges, |e| {
            set_similarity(&patterns[e.first], &patterns[e.second], member)
        })?);
    }
    Ok(out.try_into().expect("three splits"))
}

fn check_member(member: &SimilarityParams) -> Result<()> {
    member.validate()
}

/// Known relation values on a fixed node set; predicts the missing ones.
pub fn run_partial_graph_experiment(
    member: &SimilarityParams,
    methods: &[Method],
    cfg: &SimilarityConfig,
) -> Result<Vec<ExperimentResult>> {
    check_member(member)?;
    run_reps(methods, cfg.reps, cfg.seed, |s| partial_graph_split(member, cfg, s), &cfg.grid)
}

/// Trains and tests on disjoint node sets. Cartesian kernels cannot score
/// edges between unseen nodes and are rejected.
pub fn run_new_nodes_experiment(
    member: &SimilarityParams,
    methods: &[Method],
    cfg: &SimilarityConfig,
) -> Result<Vec<ExperimentResult>> {
    check_member(member)?;
    if let Some(m) = methods
        .iter()
        .find(|m| matches!(m, Method::Kernel(k) if k.is_cartesian()))
    {
        return Err(Error::InvalidArgument(format!(
            "{m} cannot predict edges between unseen nodes"
        )));
    }
    run_reps(methods, cfg.reps, cfg.seed, |s| new_nodes_split(member, cfg, s), &cfg.grid)
}

/// One repetition of the species protocol.
pub fn species_split(cfg: &SpeciesConfig, seed: RngSeed) -> Result<[EdgeDataset; 3]> {
    let pool = gen_species(cfg.species, cfg.factors, seed.derive(0));
    let groups = split_indices(cfg.species, &cfg.split, seed.derive(1))?;
    let mut out = Vec::with_capacity(3);
    for (s, group) in groups.iter().enumerate() {
        let nodes = pool.to_nodes(group, "s");
        let edges = sample_unordered_pairs(group.len(), cfg.edges[s], seed.derive(2 + s as u64))?;
        out.push(labeled(&nodes, edges, |e| {
            Ok(crate::datagen::dominance_prob(
                pool.factors_of(group[e.first]),
                pool.factors_of(group[e.second]),
            ))
        })?);
    }
    Ok(out.try_into().expect("three splits"))
}

/// Regresses dominance probabilities between simulated species.
pub fn run_species_experiment(methods: &[Method], cfg: &SpeciesConfig) -> Result<Vec<ExperimentResult>> {
    run_reps(methods, cfg.reps, cfg.seed, |s| species_split(cfg, s), &cfg.grid)
}

/// Settings of the document similarity protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentConfig {
    pub sizes: Vec<usize>,
    pub seed: RngSeed,
    pub reps: usize,
    /// Documents per node set; `None` splits the corpus into equal thirds.
    pub nodes_per_split: Option<usize>,
    pub cg: CgOptions,
}

impl Default for DocumentConfig {
    fn default() -> Self {
        DocumentConfig {
            sizes: vec![100, 200, 400, 800, 1600],
            seed: RngSeed(1),
            reps: 1,
            nodes_per_split: None,
            cg: CgOptions::default(),
        }
    }
}

/// Test errors at one training-set size.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentPoint {
    pub size: usize,
    pub results: Vec<ExperimentResult>,
}

/// Methods evaluated on documents.
pub const DOCUMENT_METHODS: [Method; 3] = [
    Method::Mean,
    Method::Kernel(PairwiseKernelKind::Kron),
    Method::Kernel(PairwiseKernelKind::KronSym),
];

/// Learns the number of shared words between documents from word counts
/// with early-stopped conjugate gradient and a linear node kernel, fitted
/// to deviations from the mean training label.
/// Training and validation edges grow with `sizes`; every ordered pair of
/// distinct test documents is scored.
pub fn run_document_experiment(corpus: &Corpus, cfg: &DocumentConfig) -> Result<Vec<DocumentPoint>> {
    if cfg.sizes.is_empty() || cfg.reps == 0 {
        return Err(Error::InvalidArgument("need at least one size and one repetition".into()));
    }
    let per = cfg.nodes_per_split.unwrap_or(corpus.len() / 3);
    if per < 2 || 3 * per > corpus.len() {
        return Err(Error::InvalidArgument(format!(
            "corpus of {} documents cannot provide three sets of {per}",
            corpus.len()
        )));
    }
    let mut mses = vec![vec![Vec::with_capacity(cfg.reps); DOCUMENT_METHODS.len()]; cfg.sizes.len()];
    for rep in 0..cfg.reps {
        let seed = repetition_seed(cfg.seed, rep);
        let groups = split_indices(corpus.len(), &[per; 3], seed.derive(0))?;
        let sets: Vec<Vec<Node>> = groups
            .iter()
            .map(|g| g.iter().map(|&i| corpus.nodes[i].clone()).collect())
            .collect();
        let (train_nodes, val_nodes, test_nodes) = (&sets[0], &sets[1], &sets[2]);

        let mut test_edges = Vec::with_capacity(per * (per - 1));
        let mut test_y = Vec::with_capacity(per * (per - 1));
        for i in 0..per {
            for j in 0..per {
                if i != j {
                    test_edges.push((i, j));
                    test_y.push(common_words_label(&test_nodes[i], &test_nodes[j]) as f64);
                }
            }
        }
        let test_y = Array1::from(test_y);

        for (s, &size) in cfg.sizes.iter().enumerate() {
            let pick = |nodes: &[Node], stream: u64| -> Result<EdgeDataset> {
                let edges = sample_edges(nodes.len(), size, seed.derive(stream).derive(size as u64), true)?
                    .into_iter()
                    .map(|e| {
                        LabeledEdge::unbounded(e, common_words_label(&nodes[e.first], &nodes[e.second]) as f64)
                    })
                    .collect();
                EdgeDataset::new(nodes.to_vec(), edges)
            };
            let train = pick(train_nodes, 1)?;
            let val = pick(val_nodes, 2)?;
            // fit deviations from the training mean, as the closed-form protocols do
            let (_, offset) = centered_labels(&train)?;
            let shift = |d: &EdgeDataset| -> Result<EdgeDataset> {
                let edges = d
                    .edges
                    .iter()
                    .map(|l| LabeledEdge::unbounded(l.edge, l.weight - offset))
                    .collect();
                EdgeDataset::new(d.nodes.clone(), edges)
            };
            let (train_c, val_c) = (shift(&train)?, shift(&val)?);
            for (m, method) in DOCUMENT_METHODS.iter().enumerate() {
                let pred = match method {
                    Method::Mean => mean_predictor(&train.labels())?.predict(test_y.len()),
                    Method::Kernel(kind) => {
                        let kernel = EdgeKernel::new(*kind, NodeKernel::Linear);
                        let (model, _) = fit_cg_early_stopping(&train_c, &val_c, kernel, cfg.cg)?;
                        let all = model.predict_all_pairs(test_nodes)?;
                        Array1::from_iter(test_edges.iter().map(|&(i, j)| all[[i, j]] + offset))
                    }
                };
                mses[s][m].push(crate::rls::mse(pred.view(), test_y.view())?);
            }
        }
    }
    Ok(cfg
        .sizes
        .iter()
        .zip(mses)
        .map(|(&size, per_method)| DocumentPoint {
            size,
            results: DOCUMENT_METHODS
                .iter()
                .zip(per_method)
                .map(|(m, v)| ExperimentResult::new(m.name(), v))
                .collect(),
        })
        .collect())
}

/// [`run_document_experiment`] on a corpus directory.
pub fn run_document_experiment_at(path: &Path, cfg: &DocumentConfig) -> Result<Vec<DocumentPoint>> {
    run_document_experiment(&load_bow_corpus(path)?, cfg)
}
