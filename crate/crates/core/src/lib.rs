//! Plug-in information measures, Effort-To-Compress and transfer entropy for
//! short symbolic time series.

pub mod error;
pub mod etc;
pub mod experiments;
pub mod infotheory;
pub mod io;
pub mod symbolic;
pub mod te;

pub use error::{Error, Result};
pub use etc::{etc, etc2d, etc_iterations, metc, nsrps_step, EtcResult, Nsrps, SubstitutionStep};
pub use infotheory::{
    conditional_entropy, empirical_pmf, entropy, joint_entropy, mutual_information,
    DistributionEstimate, LogBase,
};
pub use symbolic::{
    acf, bin_edges, pearson_correlation, quantize, remove_joint_symbol, to_joint_symbols,
    AcfResult, BinStrategy, Symbol, SymbolEncoding, SymbolSequence,
};
pub use te::{
    embed_histories, nonuniform_surrogate_test, nonuniform_transfer_entropy, surrogate_test,
    transfer_entropy, EmbeddedSample, Embedding, EmbeddingTerm, SurrogateOutcome, TeConfig,
    TeResult, TermRole,
};
