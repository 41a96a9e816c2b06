//! Dataset manifests: the declared schema a CSV file is read against.
//!
//! ```toml
//! target = "education"
//! bin_step = 0.5          # optional, regression targets only
//!
//! [dialect]
//! delimiter = ";"
//!
//! [[columns]]
//! name = "job"
//! kind = "categorical"
//! placeholder = "empty"
//!
//! [[columns]]
//! name = "age"
//! kind = "numerical"
//! placeholder = -1
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{Category, CategoryBase, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Categorical,
    Numerical,
    Date,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: KindSpec,
    #[serde(default)]
    pub base: CategoryBase,
    #[serde(default)]
    pub placeholder: Option<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dialect {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl Default for Dialect {
    fn default() -> Self {
        Dialect {
            delimiter: default_delimiter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub target: String,
    #[serde(default)]
    pub bin_step: Option<f64>,
    #[serde(default)]
    pub dialect: Dialect,
    pub columns: Vec<ColumnSpec>,
}

impl DatasetManifest {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let manifest: DatasetManifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for c in &self.columns {
            if !names.insert(c.name.as_str()) {
                return Err(Error::Manifest(format!("duplicate column {:?}", c.name)));
            }
            self.placeholder_of(c)?;
        }
        if !names.contains(self.target.as_str()) {
            return Err(Error::Manifest(format!(
                "target {:?} is not a declared column",
                self.target
            )));
        }
        if let Some(step) = self.bin_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Manifest(format!("bin_step must be positive, got {step}")));
            }
        }
        if !self.dialect.delimiter.is_ascii() {
            return Err(Error::Manifest("delimiter must be a single ASCII character".into()));
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Typed placeholder declared for a column.
    pub fn placeholder_of(&self, spec: &ColumnSpec) -> Result<Option<Value>> {
        let Some(raw) = &spec.placeholder else {
            return Ok(None);
        };
        let bad = || {
            Error::Manifest(format!(
                "placeholder {raw} does not fit {:?} column {:?}",
                spec.kind, spec.name
            ))
        };
        let value = match (spec.kind, spec.base, raw) {
            (KindSpec::Categorical, CategoryBase::Text, toml::Value::String(s)) => {
                Value::Cat(Category::Text(s.clone()))
            }
            (KindSpec::Categorical, CategoryBase::Text, toml::Value::Integer(i)) => {
                Value::Cat(Category::Text(i.to_string()))
            }
            (KindSpec::Categorical, CategoryBase::Integer, toml::Value::Integer(i)) => Value::Cat(Category::Int(*i)),
            (KindSpec::Numerical, _, toml::Value::Float(f)) if f.is_finite() => Value::Num(*f),
            (KindSpec::Numerical, _, toml::Value::Integer(i)) => Value::Num(*i as f64),
            (KindSpec::Date, _, toml::Value::String(s)) => Value::Date(s.clone()),
            _ => return Err(bad()),
        };
        Ok(Some(value))
    }
}
