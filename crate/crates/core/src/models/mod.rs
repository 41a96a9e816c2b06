//! Baseline learners and the evaluation metrics used to score them.
//!
//! All learners consume the dense [`Matrix`](crate::tabular::Matrix)
//! produced by one-hot encoding and are deterministic given their inputs
//! and, where randomised, their [`RngStream`](crate::tabular::RngStream).

mod baselines;
mod cart;
mod kmeans;
mod knn;
pub mod metrics;
mod ridge;

pub use baselines::{ClassRatioClassifier, MajorityClassifier, MeanRegressor};
pub use cart::{CartParams, DecisionTree};
pub use kmeans::{kmeans, KMeansParams, KMeansResult};
pub use knn::knn_classify;
pub use metrics::{adjusted_mutual_information, expected_mutual_information, macro_f1, mutual_information, r2};
pub use ridge::Ridge;
