#![allow(dead_code)]

use std::path::PathBuf;

use dqlab::tabular::{load_csv, read_csv, Dataset, DatasetManifest};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Loads `<stem>.csv` against `<stem>.toml` from the bundled fixtures.
pub fn load_fixture(stem: &str) -> (DatasetManifest, Dataset) {
    let manifest = DatasetManifest::load(fixture(&format!("{stem}.toml"))).unwrap();
    let ds = load_csv(fixture(&format!("{stem}.csv")), &manifest).unwrap();
    (manifest, ds)
}

pub fn parse(manifest: &str, csv: &str) -> Dataset {
    read_csv(csv.as_bytes(), &DatasetManifest::from_toml_str(manifest).unwrap()).unwrap()
}
