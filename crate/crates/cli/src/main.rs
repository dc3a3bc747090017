use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;

use pairwise_rls::datagen::{
    self, gen_corpus, CorpusSpec, RngSeed, SimilarityParams, RNG_NAME,
};
use pairwise_rls::experiments::{
    self, run_document_experiment_at, run_new_nodes_experiment, run_partial_graph_experiment,
    run_species_experiment, write_document_results, write_results, DocumentConfig, GridSpec,
    SimilarityConfig, SpeciesConfig, NEW_NODES_METHODS, PARTIAL_GRAPH_METHODS, SPECIES_METHODS,
};
use pairwise_rls::io::{read_dataset, read_edges, read_nodes, read_relation_matrix, write_edges, write_nodes};
use pairwise_rls::properties::{
    check_stochastic_transitivity, check_t_transitivity, is_reciprocal, is_symmetric,
    topological_ranking, RankingOutcome, StochasticTransitivity, TNorm,
};
use pairwise_rls::rls::{fit_cg_early_stopping, fit_closed_form, CgOptions};
use pairwise_rls::{Edge, EdgeKernel, NodeKernel, PairwiseKernelKind};

#[derive(Parser)]
#[command(name = "pairwise-rls", version, about = "Learn and check pairwise relations with pairwise kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset.
    Gen(GenArgs),
    /// Fit a model on a labeled edge file.
    Fit(FitArgs),
    /// Predict relation values for an edge file.
    Predict(PredictArgs),
    /// Report symmetry, reciprocity and transitivity of a relation matrix.
    Props(PropsArgs),
    /// Run an experiment protocol.
    Exp(ExpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Bernoulli nodes labeled with a set similarity.
    Similarity,
    /// Species with limiting factors labeled with dominance probabilities.
    Species,
    /// Synthetic bag-of-words corpus directory.
    Corpus,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    #[arg(long, default_value_t = 500)]
    edges: usize,
    /// Similarity parameters `t,t',u,v`.
    #[arg(long, default_value = "0,1,1,0")]
    member: String,
    /// Feature flip rate for similarity data.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Limiting factors per species.
    #[arg(long, default_value_t = 10)]
    factors: usize,
    /// Documents per group for a synthetic corpus.
    #[arg(long, default_value_t = 150)]
    docs_per_group: usize,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    edges: PathBuf,
    /// Pairwise kernel (kron, kron_sym, kron_rec, cartesian, cartesian_sym, rank_rec, rank_sym, mlpk).
    #[arg(long, default_value = "kron")]
    pairwise: PairwiseKernelKind,
    /// Node kernel: `linear` or `rbf:<gamma>`.
    #[arg(long, default_value = "linear")]
    node_kernel: NodeKernel,
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
    /// Validation edge file; switches to early-stopped conjugate gradient.
    #[arg(long)]
    val_edges: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    patience: usize,
    /// Accept labels outside [0, 1].
    #[arg(long)]
    unbounded: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Node file the model was trained on.
    #[arg(long)]
    train_nodes: PathBuf,
    /// Nodes of the edges to score; defaults to the training nodes.
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(long)]
    edges: PathBuf,
    /// Map predictions to [0, 1] with the linear transform of width b.
    #[arg(long)]
    nabla: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PropsArgs {
    matrix: PathBuf,
    #[arg(long, default_value_t = pairwise_rls::properties::EXACT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Table2,
    Table3,
    Newsgroups,
    Table4,
}

#[derive(Args)]
struct ExpArgs {
    experiment: Experiment,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Result file, or `-` for stdout. Similarity experiments write one
    /// file per member, suffixed with the member name.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Corpus directory for the document experiment; a synthetic corpus
    /// is generated when absent.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Training-set sizes for the document experiment.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800,1600")]
    sizes: Vec<usize>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Props(a) => props(a),
        Command::Exp(a) => exp(a),
    }
}

fn parse_member(s: &str) -> Result<SimilarityParams> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad similarity parameters `{s}`"))?;
    let [t, tp, u, w] = v[..] else {
        bail!("expected four similarity parameters, got `{s}`");
    };
    let p = SimilarityParams::new(t, tp, u, w);
    p.validate()?;
    Ok(p)
}

fn gen(a: GenArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    let seed = RngSeed(a.seed);
    match a.kind {
        GenKind::Similarity => {
            let member = parse_member(&a.member)?;
            let clean = datagen::gen_bernoulli_nodes(a.nodes, 20, 0.5, seed.derive(0), "v")?;
            let noisy = datagen::flip_noise(&clean, a.noise, seed.derive(1))?;
            let edges = experiments::sample_edges(a.nodes, a.edges, seed.derive(2), true)?;
            let labels = edges
                .iter()
                .map(|e| {
                    datagen::set_similarity(
                        &datagen::binary_pattern(&clean[e.first].features),
                        &datagen::binary_pattern(&clean[e.second].features),
                        &member,
                    )
                })
                .collect::<pairwise_rls::Result<Vec<_>>>()?;
            write_nodes(&a.out.join("nodes.tsv"), &noisy)?;
            write_edges(&a.out.join("edges.tsv"), &noisy, &edges, Some(&labels))?;
            let q = datagen::similarity_matrix(&clean, &member)?;
            pairwise_rls::io::write_relation_matrix(&a.out.join("relation.txt"), &q)?;
        }
        GenKind::Species => {
            let pool = datagen::gen_species(a.nodes, a.factors, seed.derive(0));
            let all: Vec<usize> = (0..a.nodes).collect();
            let nodes = pool.to_nodes(&all, "s");
            let edges = experiments::sample_unordered_pairs(a.nodes, a.edges, seed.derive(2))?;
            let labels: Vec<f64> = edges
                .iter()
                .map(|e| datagen::dominance_prob(pool.factors_of(e.first), pool.factors_of(e.second)))
                .collect();
            write_nodes(&a.out.join("nodes.tsv"), &nodes)?;
            write_edges(&a.out.join("edges.tsv"), &nodes, &edges, Some(&labels))?;
            pairwise_rls::io::write_relation_matrix(&a.out.join("relation.txt"), &pool.dominance_matrix())?;
        }
        GenKind::Corpus => {
            let spec = CorpusSpec {
                docs_per_group: a.docs_per_group,
                ..CorpusSpec::default()
            };
            gen_corpus(&a.out, &spec, seed)?;
        }
    }
    eprintln!("wrote {} ({RNG_NAME}, seed {})", a.out.display(), a.seed);
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let bounded = !a.unbounded;
    let train = read_dataset(&a.nodes, &a.edges, bounded)?;
    let kernel = EdgeKernel::new(a.pairwise, a.node_kernel);
    let (model, report) = match &a.val_edges {
        Some(val_path) => {
            let val = read_dataset(&a.nodes, val_path, bounded)?;
            let opts = CgOptions {
                patience: a.patience,
                ..CgOptions::default()
            };
            fit_cg_early_stopping(&train, &val, kernel, opts)?
        }
        None => fit_closed_form(&train, kernel, a.lambda)?,
    };
    model.write(BufWriter::new(File::create(&a.out)?))?;
    eprintln!(
        "{}: {} iteration(s), kept {}{}",
        report.method,
        report.iterations,
        report.best_iteration,
        report
            .validation_mse
            .map(|m| format!(", validation mse {m:.16e}"))
            .unwrap_or_default()
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let train_nodes = read_nodes(&a.train_nodes, None)?;
    let model = pairwise_rls::DualModel::read(BufReader::new(File::open(&a.model)?), &train_nodes)?;
    let sparse_dim = train_nodes.first().map(|n| n.features.dim());
    let nodes = match &a.nodes {
        Some(p) => read_nodes(p, sparse_dim)?,
        None => train_nodes,
    };
    let edges = read_edges(&a.edges, &nodes, false)?;
    let list: Vec<Edge> = edges.iter().map(|e| e.0).collect();
    let mut pred = model.predict(&nodes, &list)?;
    if let Some(b) = a.nabla {
        let t = pairwise_rls::NablaTransform::linear(b)?;
        pred.mapv_inplace(|x| t.apply(x));
    }
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for (e, p) in list.iter().zip(pred.iter()) {
        writeln!(out, "{}\t{}\t{:.16e}", nodes[e.first].id, nodes[e.second].id, p)?;
    }
    let labels: Vec<f64> = edges.iter().map(|e| e.1).collect();
    if labels.iter().all(|y| y.is_finite()) && !labels.is_empty() {
        let m = pairwise_rls::mse(pred.view(), Array1::from(labels).view())?;
        eprintln!("mse\t{m:.16e}");
    }
    out.flush()?;
    Ok(())
}

fn props(a: PropsArgs) -> Result<()> {
    let q = read_relation_matrix(&a.matrix)?;
    let mut out = io::stdout().lock();
    writeln!(out, "nodes\t{}", q.len())?;
    let symmetric = is_symmetric(&q, a.tol);
    let reciprocal = is_reciprocal(&q, a.tol);
    writeln!(out, "symmetric\t{symmetric}")?;
    writeln!(out, "reciprocal\t{reciprocal}")?;
    if symmetric {
        for t in TNorm::ALL {
            let r = check_t_transitivity(&q, t, a.tol)?;
            writeln!(out, "{t}-transitive\t{}\tviolations\t{}\tmax\t{:.16e}", r.holds(), r.triples.len(), r.max_violation)?;
        }
    }
    if reciprocal {
        for kind in StochasticTransitivity::ALL {
            let r = check_stochastic_transitivity(&q, kind, a.tol)?;
            writeln!(out, "{kind} stochastic transitivity\t{}\tviolations\t{}", r.holds(), r.triples.len())?;
        }
        match topological_ranking(&q, a.threshold) {
            RankingOutcome::Ranking(order) => {
                let ids: Vec<&str> = order.iter().map(|&i| q.ids[i].as_str()).collect();
                writeln!(out, "ranking\t{}", ids.join(" "))?;
            }
            RankingOutcome::Cycle(cycle) => {
                let ids: Vec<&str> = cycle.iter().map(|&i| q.ids[i].as_str()).collect();
                writeln!(out, "cycle\t{}", ids.join(" "))?;
            }
        }
    }
    Ok(())
}

fn result_writer(out: &Path, suffix: Option<&str>) -> Result<Box<dyn Write>> {
    if out == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    let path = match suffix {
        Some(s) => {
            let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
            out.with_file_name(format!("{stem}_{s}{ext}"))
        }
        None => out.to_path_buf(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(Box::new(BufWriter::new(File::create(path)?)))
}

const MEMBERS: [(&str, SimilarityParams); 3] = [
    ("intransitive", SimilarityParams::INTRANSITIVE),
    ("t_l", SimilarityParams::JACCARD),
    ("t_p", SimilarityParams::PRODUCT_TRANSITIVE),
];

fn grid_text(g: &GridSpec) -> String {
    let exp = |v: &[f64]| format!("2^{}..2^{}", v[0].log2(), v[v.len() - 1].log2());
    format!("lambda {} gamma {}", exp(&g.lambdas), exp(&g.gammas))
}

fn exp(a: ExpArgs) -> Result<()> {
    let seed = RngSeed(a.seed);
    let start = Instant::now();
    let base = |name: &str| {
        vec![
            ("experiment", name.to_string()),
            ("seed", a.seed.to_string()),
            ("rng", RNG_NAME.to_string()),
            ("reps", a.reps.to_string()),
        ]
    };
    match a.experiment {
        Experiment::Table2 | Experiment::Table3 => {
            let cfg = SimilarityConfig {
                reps: a.reps,
                seed,
                ..SimilarityConfig::default()
            };
            let (name, methods): (&str, &[_]) = match a.experiment {
                Experiment::Table2 => ("partial_graph", &PARTIAL_GRAPH_METHODS),
                _ => ("new_nodes", &NEW_NODES_METHODS),
            };
            for (label, member) in MEMBERS {
                let results = match a.experiment {
                    Experiment::Table2 => run_partial_graph_experiment(&member, methods, &cfg)?,
                    _ => run_new_nodes_experiment(&member, methods, &cfg)?,
                };
                let mut meta = base(name);
                meta.push(("member", format!("{label} {}", member.label())));
                meta.push(("grid", grid_text(&cfg.grid)));
                write_results(result_writer(&a.out, Some(label))?, &meta, &results)?;
                eprintln!("{name} {label} done after {:.1}s", start.elapsed().as_secs_f64());
            }
        }
        Experiment::Table4 => {
            let cfg = SpeciesConfig {
                reps: a.reps,
                seed,
                ..SpeciesConfig::default()
            };
            let results = run_species_experiment(&SPECIES_METHODS, &cfg)?;
            let mut meta = base("species");
            meta.push(("grid", grid_text(&cfg.grid)));
            write_results(result_writer(&a.out, None)?, &meta, &results)?;
        }
        Experiment::Newsgroups => {
            let generated;
            let corpus = match &a.corpus {
                Some(p) => p.clone(),
                None => {
                    generated = tempfile::tempdir()?;
                    gen_corpus(generated.path(), &CorpusSpec::default(), seed.derive(99))?;
                    generated.path().to_path_buf()
                }
            };
            let cfg = DocumentConfig {
                sizes: a.sizes.clone(),
                seed,
                reps: a.reps,
                ..DocumentConfig::default()
            };
            let points = run_document_experiment_at(&corpus, &cfg)?;
            let mut meta = base("documents");
            meta.push((
                "corpus",
                match &a.corpus {
                    Some(p) => p.display().to_string(),
                    None => "synthetic".to_string(),
                },
            ));
            meta.push(("sizes", format!("{:?}", cfg.sizes)));
            write_document_results(result_writer(&a.out, None)?, &meta, &points)?;
        }
    }
    eprintln!("finished in {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
