//! Dataset generators and loaders: Bernoulli feature nodes with the
//! cardinality-based set similarity family, the limiting-factor species
//! competition model, and bag-of-words document corpora.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Zipf};

use crate::error::{Error, Result};
use crate::types::{FeatureVector, Node, RelationMatrix};

/// Generator identity recorded in experiment metadata.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// 64-bit seed. Every generator is a pure function of its seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for sub-stream `stream` (splitmix64 mixing).
    pub fn derive(self, stream: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// `n` nodes with `d` independent Bernoulli(`p`) features, ids `{prefix}{i}`.
pub fn gen_bernoulli_nodes(n: usize, d: usize, p: f64, seed: RngSeed, prefix: &str) -> Result<Vec<Node>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("Bernoulli p = {p} outside [0, 1]")));
    }
    let mut rng = seed.rng();
    Ok((0..n)
        .map(|i| {
            let f = (0..d)
                .map(|_| if rng.random_bool(p) { 1.0 } else { 0.0 })
                .collect();
            Node::new(format!("{prefix}{i}"), FeatureVector::dense(f))
        })
        .collect())
}

/// Flips every binary feature independently with probability `rate`.
pub fn flip_noise(nodes: &[Node], rate: f64, seed: RngSeed) -> Result<Vec<Node>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("flip rate {rate} outside [0, 1]")));
    }
    let mut rng = seed.rng();
    Ok(nodes
        .iter()
        .map(|node| {
            let f = node
                .features
                .to_dense()
                .into_iter()
                .map(|x| if rng.random_bool(rate) { 1.0 - x } else { x })
                .collect();
            Node::new(node.id.clone(), FeatureVector::dense(f))
        })
        .collect())
}

/// Parameters `(t, t′, u, v)` of the cardinality-based similarity
/// `(tΔ + uδ + vν) / (t′Δ + uδ + vν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    pub t: f64,
    pub t_prime: f64,
    pub u: f64,
    pub v: f64,
}

impl SimilarityParams {
    /// Not T_L-transitive.
    pub const INTRANSITIVE: SimilarityParams = SimilarityParams::new(0.0, 1.0, 2.0, 2.0);
    /// Jaccard coefficient, T_L-transitive.
    pub const JACCARD: SimilarityParams = SimilarityParams::new(0.0, 1.0, 1.0, 0.0);
    /// T_P-transitive.
    pub const PRODUCT_TRANSITIVE: SimilarityParams = SimilarityParams::new(1.0, 2.0, 1.0, 1.0);

    pub const fn new(t: f64, t_prime: f64, u: f64, v: f64) -> Self {
        SimilarityParams { t, t_prime, u, v }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.t, self.t_prime, self.u, self.v]
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "similarity parameters must be non-negative: {self:?}"
            )));
        }
        Ok(())
    }

    /// Similarity from the cardinalities `Δ = |A△B|`, `δ = |A∩B|`, `ν = |(A∪B)ᶜ|`.
    pub fn from_cardinalities(&self, sym_diff: usize, inter: usize, outside: usize) -> Result<f64> {
        let (dd, ii, oo) = (sym_diff as f64, inter as f64, outside as f64);
        let shared = self.u * ii + self.v * oo;
        let den = self.t_prime * dd + shared;
        if den == 0.0 {
            return Err(Error::ZeroDenominator);
        }
        Ok((self.t * dd + shared) / den)
    }

    /// Short label such as `(0,1,2,2)`.
    pub fn label(&self) -> String {
        format!("({},{},{},{})", self.t, self.t_prime, self.u, self.v)
    }
}

/// Similarity of two sets given as indicator vectors over the same universe.
pub fn set_similarity(a: &[bool], b: &[bool], p: &SimilarityParams) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (mut sym_diff, mut inter, mut outside) = (0, 0, 0);
    for (&x, &y) in a.iter().zip(b) {
        match (x, y) {
            (true, true) => inter += 1,
            (false, false) => outside += 1,
            _ => sym_diff += 1,
        }
    }
    p.from_cardinalities(sym_diff, inter, outside)
}

/// Indicator vector of the features above 1/2.
pub fn binary_pattern(f: &FeatureVector) -> Vec<bool> {
    f.to_dense().into_iter().map(|x| x > 0.5).collect()
}

/// Full similarity matrix over binary-feature nodes.
pub fn similarity_matrix(nodes: &[Node], p: &SimilarityParams) -> Result<RelationMatrix> {
    let patterns: Vec<Vec<bool>> = nodes.iter().map(|n| binary_pattern(&n.features)).collect();
    let n = nodes.len();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            values[[i, j]] = set_similarity(&patterns[i], &patterns[j], p)?;
        }
    }
    RelationMatrix::new(nodes.iter().map(|n| n.id.clone()).collect(), values)
}

/// Limiting factors of a pool of species, one row per species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesPool {
    pub factors: Array2<f64>,
}

impl SpeciesPool {
    pub fn new(factors: Array2<f64>) -> Result<Self> {
        if factors.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument("limiting factors must lie in [0, 1]".into()));
        }
        Ok(SpeciesPool { factors })
    }

    pub fn len(&self) -> usize {
        self.factors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.nrows() == 0
    }

    pub fn factors_of(&self, i: usize) -> &[f64] {
        self.factors
            .row(i)
            .to_slice()
            .expect("species factors are stored row-major")
    }

    /// Rows `indices` as nodes with ids `{prefix}{index}`.
    pub fn to_nodes(&self, indices: &[usize], prefix: &str) -> Vec<Node> {
        indices
            .iter()
            .map(|&i| {
                Node::new(
                    format!("{prefix}{i}"),
                    FeatureVector::dense(self.factors_of(i).to_vec()),
                )
            })
            .collect()
    }

    /// Tournament matrix `Q(i, j) = dominance_prob(f_i, f_j)`.
    pub fn dominance_matrix(&self) -> RelationMatrix {
        let n = self.len();
        let values = Array2::from_shape_fn((n, n), |(i, j)| {
            dominance_prob(self.factors_of(i), self.factors_of(j))
        });
        RelationMatrix {
            ids: (0..n).map(|i| format!("s{i}")).collect(),
            values,
        }
    }
}

/// `n` species with `k` limiting factors drawn uniformly from `[0, 1)`.
pub fn gen_species(n: usize, k: usize, seed: RngSeed) -> SpeciesPool {
    let mut rng = seed.rng();
    SpeciesPool {
        factors: Array2::from_shape_fn((n, k), |_| rng.random::<f64>()),
    }
}

/// Fraction of factors on which `f` beats `f2`, ties counting one half.
pub fn dominance_prob(f: &[f64], f2: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), f2.len());
    let score: f64 = f
        .iter()
        .zip(f2)
        .map(|(a, b)| match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Greater) => 1.0,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        })
        .sum();
    score / f.len() as f64
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// Bag-of-words corpus: one node per document with sparse word counts.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub nodes: Vec<Node>,
    /// Group (newsgroup) of every document; empty for flat directories.
    pub groups: Vec<String>,
    pub paths: Vec<PathBuf>,
    pub vocabulary: Vec<String>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Loads every file in `dir` as a document. Files in subdirectories take
/// the subdirectory name as their group.
pub fn load_bow_corpus(dir: &Path) -> Result<Corpus> {
    let mut docs: Vec<(String, PathBuf)> = Vec::new();
    for entry in sorted_entries(dir)? {
        if entry.is_dir() {
            let group = entry
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            for file in sorted_entries(&entry)? {
                if file.is_file() {
                    docs.push((group.clone(), file));
                }
            }
        } else if entry.is_file() {
            docs.push((String::new(), entry));
        }
    }
    if docs.is_empty() {
        return Err(Error::EmptyCorpus(dir.to_path_buf()));
    }

    let mut counts: Vec<BTreeMap<String, f64>> = Vec::with_capacity(docs.len());
    let mut vocab = BTreeSet::new();
    for (_, path) in &docs {
        let bytes = fs::read(path)?;
        let text = String::from_utf8_lossy(&bytes);
        let mut c = BTreeMap::new();
        for tok in tokenize(&text) {
            *c.entry(tok).or_insert(0.0) += 1.0;
        }
        vocab.extend(c.keys().cloned());
        counts.push(c);
    }
    let vocabulary: Vec<String> = vocab.into_iter().collect();
    let index: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let dim = vocabulary.len();

    let mut nodes = Vec::with_capacity(docs.len());
    for (i, c) in counts.iter().enumerate() {
        let mut entries: Vec<(usize, f64)> = c.iter().map(|(w, &n)| (index[w.as_str()], n)).collect();
        entries.sort_by_key(|&(i, _)| i);
        let (indices, values) = entries.into_iter().unzip();
        nodes.push(Node::new(format!("doc{i}"), FeatureVector::sparse(dim, indices, values)?));
    }
    let (groups, paths) = docs.into_iter().unzip();
    Ok(Corpus {
        nodes,
        groups,
        paths,
        vocabulary,
    })
}

/// Number of distinct words occurring in both documents.
pub fn common_words_label(d1: &Node, d2: &Node) -> usize {
    let w1: BTreeSet<usize> = d1.features.nonzeros().filter(|&(_, x)| x > 0.0).map(|(i, _)| i).collect();
    d2.features
        .nonzeros()
        .filter(|&(i, x)| x > 0.0 && w1.contains(&i))
        .count()
}

/// Shape of a synthetic topic corpus written by [`gen_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub groups: Vec<String>,
    pub docs_per_group: usize,
    pub vocabulary_size: usize,
    /// Words reserved for each group's topic distribution.
    pub topic_size: usize,
    /// Probability that a token comes from the group's topic instead of
    /// the shared background distribution.
    pub topic_weight: f64,
    /// Document lengths are log-normal with this median and log-scale
    /// spread, clamped to `[min_len, max_len]`.
    pub median_len: f64,
    pub len_sigma: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub zipf_exponent: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            groups: [
                "comp.sys.ibm.pc.hardware",
                "comp.windows.x",
                "rec.autos",
                "rec.sport.baseball",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            docs_per_group: 150,
            vocabulary_size: 20000,
            topic_size: 1000,
            topic_weight: 0.3,
            median_len: 150.0,
            len_sigma: 0.5,
            min_len: 20,
            max_len: 1000,
            zipf_exponent: 1.0,
        }
    }
}

fn pseudo_word(mut i: usize) -> String {
    const SYLLABLES: [&str; 24] = [
        "ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "be", "da", "fu", "ga", "ho", "ji", "ke",
        "la", "me", "no", "pi", "qua", "re", "so", "tu", "ze",
    ];
    let mut w = String::new();
    for _ in 0..2 {
        w.push_str(SYLLABLES[i % SYLLABLES.len()]);
        i /= SYLLABLES.len();
    }
    while i > 0 {
        w.push_str(SYLLABLES[i % SYLLABLES.len()]);
        i /= SYLLABLES.len();
    }
    w
}

/// Writes a synthetic topic corpus under `dir`, one subdirectory per group.
/// Tokens are drawn from a mixture of a shared Zipf background over the
/// whole vocabulary and a group-specific Zipf topic over a disjoint block of
/// words.
pub fn gen_corpus(dir: &Path, spec: &CorpusSpec, seed: RngSeed) -> Result<()> {
    if spec.groups.is_empty() || spec.docs_per_group == 0 {
        return Err(Error::InvalidArgument("corpus needs at least one document".into()));
    }
    if spec.groups.len() * spec.topic_size > spec.vocabulary_size
        || spec.min_len > spec.max_len
        || !(spec.median_len > 0.0)
    {
        return Err(Error::InvalidArgument(format!("inconsistent corpus spec {spec:?}")));
    }
    let zerr = |e: rand_distr::ZipfError| Error::InvalidArgument(e.to_string());
    let background = Zipf::new(spec.vocabulary_size as f64, spec.zipf_exponent).map_err(zerr)?;
    let topic = Zipf::new(spec.topic_size as f64, spec.zipf_exponent).map_err(zerr)?;
    let lengths = LogNormal::new(spec.median_len.ln(), spec.len_sigma)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = seed.rng();
    // Topic blocks come from the tail of the vocabulary so that frequent
    // background words stay shared.
    let mut order: Vec<usize> = (0..spec.vocabulary_size).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    for (g, group) in spec.groups.iter().enumerate() {
        let gdir = dir.join(group);
        fs::create_dir_all(&gdir)?;
        let block = spec.vocabulary_size - (g + 1) * spec.topic_size;
        for d in 0..spec.docs_per_group {
            let len = (lengths.sample(&mut rng).round() as usize).clamp(spec.min_len, spec.max_len);
            let mut words = Vec::with_capacity(len);
            for _ in 0..len {
                let w = if rng.random_bool(spec.topic_weight) {
                    order[block + topic.sample(&mut rng) as usize - 1]
                } else {
                    order[background.sample(&mut rng) as usize - 1]
                };
                words.push(pseudo_word(w));
            }
            let mut text = String::new();
            for (i, w) in words.iter().enumerate() {
                text.push_str(w);
                text.push(if i % 12 == 11 { '\n' } else { ' ' });
            }
            fs::write(gdir.join(format!("{:05}", 10000 + d)), text)?;
        }
    }
    Ok(())
}
