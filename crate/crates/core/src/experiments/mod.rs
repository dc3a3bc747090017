//! Edge sampling, model selection, the experiment protocols, and result
//! reporting with paired significance tests.

mod grid;
mod protocols;
mod report;
mod sampling;

pub use grid::{
    centered_labels, evaluate_method, grid_search, squared_distances, test_error, GridChoice, GridSpec, Method,
};
pub use protocols::{
    new_nodes_split, partial_graph_split, repetition_seed, run_document_experiment,
    run_document_experiment_at, run_new_nodes_experiment, run_partial_graph_experiment,
    run_species_experiment, species_split, DocumentConfig, DocumentPoint, SimilarityConfig,
    SpeciesConfig, DOCUMENT_METHODS, NEW_NODES_METHODS, PARTIAL_GRAPH_METHODS, SPECIES_METHODS,
};
pub use report::{
    pairwise_significance, write_document_results, write_results, Comparison, ExperimentResult,
};
pub use sampling::{sample_edges, sample_unordered_pairs, split_indices, unordered_pairs_unique};
