//! Bayes factors of covariance structures (BFCS).
//!
//! Closed-form scoring of all eleven conditional-independence models over a
//! triplet of Gaussian variables, turned into posterior probabilities of local
//! causal structures. On top of the per-triplet math sit a parallel
//! marker/trait scanner for gene regulatory network inference, a simulator
//! for synthetic benchmarks and an evaluation harness.
//!
//! ```
//! use bfcs::{log_bayes_factors, posterior, prior_from_counts, AnalysisConfig, CiModel,
//!            CorrelationTriplet, PriorFamily};
//!
//! let t = CorrelationTriplet::new(0.4, 0.16, 0.4, 500);
//! let bf = log_bayes_factors(&t, &AnalysisConfig::default()).unwrap();
//! let post = posterior(&bf, &prior_from_counts(PriorFamily::DmagBk)).unwrap();
//! assert!(post.get(CiModel::M6) > 0.5);
//! ```

pub mod correlation;
pub mod data;
pub mod error;
pub mod eval;
pub mod evidence;
pub mod format;
pub mod model;
pub mod posterior;
pub mod prior;
pub mod scan;
pub mod simulate;

pub use correlation::{compute_correlations, pearson, CorrelationStore};
pub use data::{load_dataset, Dataset, LoadOptions, Role};
pub use error::{BfcsError, ErrorKind, Result};
pub use eval::{brier_score, pr_curve, roc_curve, Curve, CurvePoint, EvalSummary, ScoredEdges};
pub use evidence::{
    log_bayes_factors, log_f, log_g, AnalysisConfig, BayesFactorKernel, BayesFactorVector,
    CorrelationTriplet, DET_FLOOR,
};
pub use model::{CiModel, Pattern, Structure, NUM_MODELS};
pub use posterior::{causal_chain_probability, posterior, PosteriorVector};
pub use prior::{
    prior_from_counts, prior_from_file, uniform_model_prior, GraphCountTable, PriorFamily,
    PriorLabel, StructurePrior,
};
pub use scan::{
    scan, write_regulation_matrix, RegulationMatrix, ScanFilter, ScanOutput, ScanSummary,
};

/// Run `f` on a dedicated rayon pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BfcsError::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
