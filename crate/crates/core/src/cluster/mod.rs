//! K-means over argument phrase vectors and cluster inspection.

mod inspect;
mod kmeans;

pub use inspect::{detect_noisy, non_alpha_fraction, summarize, ClusterSummary, NoisyThresholds};
pub use kmeans::{assign, fit_kmeans, fit_kmeans_traced, squared_distance, ClusterModel, KMeansParams};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("need at least {needed} embeddable vectors, found {found}")]
    TooFewVectors { needed: usize, found: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("vector dimension {found} does not match {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot assign an unembeddable vector")]
    Unembeddable,
    #[error("invalid model: {0}")]
    InvalidModel(String),
}
