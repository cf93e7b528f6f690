//! Evaluation: filtered ranking metrics, AUC-PR and embedding diagnostics.

pub mod auc;
pub mod diagnostics;
pub mod ranking;

pub use auc::{auc_pr, auc_pr_countries};
pub use diagnostics::{
    collinearity_check, export_embedding_slice, is_nontrivial, local_minima, loss_phase_sweep,
    nontrivial_phases, phase_grid, phase_histogram, wrap_phase, PhaseHistogram, SliceRow,
    NONTRIVIAL_TOLERANCE,
};
pub use ranking::{
    evaluate_filtered, evaluate_raw, filtered_ranks, raw_ranks, Metrics, RankingReport, TripleRanks,
};
