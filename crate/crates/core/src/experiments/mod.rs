//! Reconstruction of the three-neuron demonstration and the harness that
//! recomputes its tables.

pub mod harness;
pub mod search;
pub mod system;
pub mod targets;

pub use harness::{
    run_paper_tables, run_paper_tables_with, Check, HarnessOptions, MetcBranch, PaperReport,
    REPORT_SCHEMA,
};
pub use search::{reconstruct_patterns, Candidate, SearchReport};
pub use system::{build_system, rotate, NeuronSystem, Pattern, PATTERN_LEN};

/// The reconstructed system used for the reproduction, as written by
/// [`crate::io::write_system_csv`]. It is the first-ranked candidate of
/// [`reconstruct_patterns`].
pub const CANONICAL_SYSTEM_CSV: &str = include_str!("../../data/canonical_system.csv");

/// Parses [`CANONICAL_SYSTEM_CSV`].
pub fn canonical_system() -> crate::Result<NeuronSystem> {
    crate::io::read_system_csv(CANONICAL_SYSTEM_CSV.as_bytes())
}
