//! Online maximization of performance metrics that are functions of the
//! confusion matrix.

pub mod algorithms;
pub mod confusion;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod policy;

pub use algorithms::{AlgorithmConfig, AlgorithmKind, OnlineLearner};
pub use confusion::{ConfusionMatrix, ConfusionState, GradientTensor, LabelSet, LabelVector, Prediction, TaskKind};
pub use error::{Error, Result};
pub use metrics::{Averaging, Base, Metric};
pub use policy::ProbEstimate;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/confusion.md")]
    mod confusion {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/policy.md")]
    mod policy {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
