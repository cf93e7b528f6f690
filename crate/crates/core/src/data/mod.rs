//! Triple stores and graph utilities.

pub mod closure;
pub mod countries;
mod store;
pub mod synthetic;
pub mod testsets;

pub use closure::{
    maximal_chains, relation_closure, shortest_path_lengths, transitive_closure, TransitiveChain,
};
pub use countries::{
    countries_task, load_countries_task, CountriesDataset, CountriesSpec, CountriesTask,
};
pub use store::{
    ingest, ingest_with_vocab, read_named_triples, write_triples, IngestReport, Split, StoreStats,
    Triple, TripleStore, Vocab,
};
pub use synthetic::{generate_synthetic, SyntheticDataset, SyntheticSpec};
pub use testsets::{build_transitivity_testsets, TransitivitySets};
