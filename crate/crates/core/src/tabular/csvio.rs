use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use super::dataset::{Category, CategoryBase, Column, ColumnMeta, Dataset, FeatureKind, Value};
use super::manifest::{DatasetManifest, KindSpec};
use crate::error::{Error, Result};

/// Reads a CSV file typed by `manifest`.
pub fn load_csv(path: impl AsRef<Path>, manifest: &DatasetManifest) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, manifest)
}

pub fn read_csv<R: Read>(reader: R, manifest: &DatasetManifest) -> Result<Dataset> {
    manifest.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(manifest.dialect.delimiter as u8)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();

    for name in &header {
        if manifest.column(name).is_none() {
            return Err(Error::Schema(format!(
                "column {name:?} is not declared in the manifest"
            )));
        }
    }
    for spec in &manifest.columns {
        if !header.contains(&spec.name) {
            if spec.name == manifest.target {
                return Err(Error::Schema(format!("missing target column {:?}", spec.name)));
            }
            return Err(Error::Schema(format!("missing column {:?}", spec.name)));
        }
    }

    let specs: Vec<_> = header.iter().map(|h| manifest.column(h).unwrap()).collect();
    let placeholders: Vec<Option<Value>> = specs
        .iter()
        .map(|s| manifest.placeholder_of(s))
        .collect::<Result<_>>()?;
    let mut data: Vec<Column> = specs
        .iter()
        .map(|s| match s.kind {
            KindSpec::Categorical => Column::Categorical(Vec::new()),
            KindSpec::Numerical => Column::Numerical(Vec::new()),
            KindSpec::Date => Column::Date(Vec::new()),
        })
        .collect();

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (c, spec) in specs.iter().enumerate() {
            let raw = record.get(c).unwrap_or("");
            let parse_err = |expected| Error::Parse {
                row,
                column: spec.name.clone(),
                value: raw.to_string(),
                expected,
            };
            match &mut data[c] {
                Column::Categorical(v) => v.push(match spec.base {
                    CategoryBase::Text => Category::Text(raw.to_string()),
                    CategoryBase::Integer => Category::Int(raw.trim().parse().map_err(|_| parse_err("integer"))?),
                }),
                Column::Numerical(v) => {
                    let x: f64 = raw.trim().parse().map_err(|_| parse_err("number"))?;
                    if !x.is_finite() {
                        return Err(parse_err("finite number"));
                    }
                    v.push(x)
                }
                Column::Date(v) => v.push(raw.to_string()),
            }
        }
    }

    let mut metas = Vec::with_capacity(specs.len());
    for ((spec, placeholder), col) in specs.iter().zip(placeholders).zip(&data) {
        let kind = match col {
            Column::Categorical(values) => {
                let p = match &placeholder {
                    Some(Value::Cat(p)) => Some(p),
                    _ => None,
                };
                let domain: BTreeSet<&Category> = values.iter().filter(|v| Some(*v) != p).collect();
                FeatureKind::Categorical {
                    base: spec.base,
                    domain: domain.into_iter().cloned().collect(),
                }
            }
            Column::Numerical(values) => {
                if let Some(Value::Num(p)) = placeholder {
                    let observed = values.iter().filter(|&&v| v != p);
                    let (lo, hi) = observed.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                    if lo <= p && p <= hi {
                        return Err(Error::column(
                            &spec.name,
                            format!("placeholder {p} lies inside the observed range [{lo}, {hi}]"),
                        ));
                    }
                }
                FeatureKind::Numerical
            }
            Column::Date(_) => FeatureKind::Date,
        };
        metas.push(ColumnMeta {
            name: spec.name.clone(),
            kind,
            placeholder,
            is_target: spec.name == manifest.target,
        });
    }
    Dataset::new(metas, data)
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    save_csv_with(ds, path, ',')
}

pub fn save_csv_with(ds: &Dataset, path: impl AsRef<Path>, delimiter: char) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(ds, &mut w, delimiter)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<W: Write>(ds: &Dataset, writer: W, delimiter: char) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter as u8).from_writer(writer);
    w.write_record(ds.columns().iter().map(|c| c.name.as_str()))?;
    let mut record = Vec::with_capacity(ds.columns().len());
    for row in 0..ds.n_rows() {
        record.clear();
        for c in 0..ds.columns().len() {
            record.push(match ds.column(c) {
                Column::Categorical(v) => v[row].to_string(),
                // Display for f64 is the shortest string that parses back to the same bits.
                Column::Numerical(v) => format!("{}", v[row]),
                Column::Date(v) => v[row].clone(),
            });
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
