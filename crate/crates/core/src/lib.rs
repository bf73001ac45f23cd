//! Exact and certified computation of f-divergences.
//!
//! The library computes `D_f(P,R) = ∫ f(p/r) r dμ` for convex generators
//! `f` with `f(1) = 0`, together with the discretized divergences obtained
//! by coarsening `(P,R)` through a finite partition of the likelihood-ratio
//! axis. Coarsening never overshoots (Jensen), and the supremum over all
//! finite measurable partitions recovers `D_f` exactly — the
//! Gel'fand–Yaglom–Peres property. The [`gyp`] module turns that supremum
//! into algorithms: an ε-tight partition builder with a checkable
//! certificate when `D_f` is finite, and an exceedance witness when it is
//! infinite.
//!
//! Modules:
//!
//! - [`generator`] — convex generators, boundary limits, support-line
//!   normalization, subgradients, level thresholds.
//! - [`measure`] — dominated pair models (discrete, grid, Gaussian,
//!   countable) queried through ratio-interval masses and restricted
//!   integrals.
//! - [`divergence`] — reference values `D_f`, Tsallis `T_α`, Rényi `I_α`.
//! - [`partition`] — ratio-axis partitions, coarsened divergences, the
//!   brute-force supremum oracle on small discrete spaces.
//! - [`gyp`] — ε-tight lower-bound certificates and infinite-divergence
//!   evidence.
//! - [`io`] — JSON schemas for pairs and partitions.

// Guards are written as `!(x > 0.0)` on purpose: the negation rejects NaN,
// which `x <= 0.0` silently lets through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod ext;
pub mod generator;
pub mod gyp;
pub mod interval;
pub mod io;
pub mod measure;
pub mod partition;
mod quad;

pub use divergence::{divergence, renyi, tsallis, DivergenceValue};
pub use ext::ExtReal;
pub use generator::{Generator, NormalizedGenerator};
pub use gyp::{convergence_sweep, detect_infinite, gyp_approximate, ApproxResult, InfinityEvidence};
pub use interval::RatioInterval;
pub use measure::{DiscretePair, GaussianPair, MeasurePair};
pub use partition::{
    brute_force_supremum, coarsen, partition_divergence, renyi_partition_bound, Partition,
};

use thiserror::Error;

/// Crate-wide error type.
///
/// [`Error::exit_class`] splits the variants into the two reportable
/// classes: domain/validation problems and accuracy/guard failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("generator definition error: {0}")]
    GeneratorDefinition(String),
    #[error("vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{which} must sum to 1 within {tol:e}, got {sum:.17}")]
    NotNormalized {
        which: &'static str,
        sum: f64,
        tol: f64,
    },
    #[error("negative entry at index {index}: {value}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("malformed ratio interval: {0}")]
    BadInterval(String),
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("split point {split} is not interior to cell {cell}")]
    BadSplit { cell: usize, split: f64 },
    #[error("support size {n} exceeds the brute-force guard {max}")]
    SizeGuard { n: usize, max: usize },
    #[error("alpha must be positive and different from 1, got {0}")]
    BadAlpha(f64),
    #[error("partial sums of {which} exceed 1 at index {index}: {sum:.12}")]
    SeriesExceedsOne {
        which: &'static str,
        index: u64,
        sum: f64,
    },
    #[error("divergence is infinite; use detect_infinite for an exceedance certificate")]
    InfiniteDivergence,
    #[error("accuracy failure in {context}: best estimate {best:e}, error estimate {error:e}")]
    Accuracy {
        context: String,
        best: f64,
        error: f64,
    },
    #[error("unknown generator `{0}` (expected kl, tv, chi2, hellinger or tsallis:<alpha>)")]
    UnknownGenerator(String),
    #[error("unknown countable pair `{0}`")]
    UnknownCountable(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Error class for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid input: bad arguments, malformed files, violated preconditions.
    Domain,
    /// Valid input the implementation cannot serve at the requested
    /// accuracy, plus resource guards.
    Accuracy,
}

impl Error {
    pub fn exit_class(&self) -> ErrorClass {
        match self {
            Error::Accuracy { .. } | Error::InfiniteDivergence | Error::SizeGuard { .. } => {
                ErrorClass::Accuracy
            }
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
