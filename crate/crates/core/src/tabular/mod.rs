//! Typed tabular data: schema, CSV ingestion, seeded streams and encodings.

mod csvio;
mod dataset;
mod encode;
mod manifest;
mod rng;

pub use csvio::{load_csv, read_csv, save_csv, save_csv_with, write_csv};
pub use dataset::{
    snapshot_ground_truth, Category, CategoryBase, CellKey, Column, ColumnMeta, Dataset, FeatureKind, PairedDataset,
    TargetBins, Value,
};
pub use encode::{
    discretize_target, drop_small_classes, one_hot_encode, restore_numeric_target, EncodedColumn, Matrix, OneHotEncoder,
};
pub use manifest::{ColumnSpec, DatasetManifest, Dialect, KindSpec};
pub use rng::{derive_rng, RngStream};

#[cfg(test)]
pub(crate) use dataset::test_support;
