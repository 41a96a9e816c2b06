//! Result tables: a long table in CSV and JSON plus one wide table per
//! (dimension, scenario) with algorithms as rows and levels as columns.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aggregate of one (dimension, scenario, algorithm, level) cell over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: String,
    pub dimension: String,
    pub scenario: u8,
    pub algorithm: String,
    pub level: String,
    /// Measured quality of the polluted data, averaged over seeds.
    pub quality: f64,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n_runs: usize,
}

pub const RESULT_HEADER: [&str; 10] = [
    "dataset",
    "dimension",
    "scenario",
    "algorithm",
    "level",
    "quality",
    "metric",
    "mean",
    "std",
    "n_runs",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

pub fn write_results_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULT_HEADER)?;
    for r in records {
        out.write_record([
            r.dataset.clone(),
            r.dimension.clone(),
            r.scenario.to_string(),
            r.algorithm.clone(),
            r.level.clone(),
            r.quality.to_string(),
            r.metric.clone(),
            r.mean.to_string(),
            r.std.to_string(),
            r.n_runs.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != RESULT_HEADER {
        return Err(Error::Schema(format!(
            "{} does not have the result header",
            path.display()
        )));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_results_json(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Wide layout: first row the levels, second the measured quality, then one
/// row per algorithm. Columns follow the order levels first appear in.
pub fn write_wide_table<W: Write>(records: &[&ResultRecord], w: W) -> Result<()> {
    let mut levels: Vec<&str> = Vec::new();
    let mut algorithms: Vec<&str> = Vec::new();
    let mut quality: BTreeMap<&str, f64> = BTreeMap::new();
    let mut cells: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in records {
        if !levels.contains(&r.level.as_str()) {
            levels.push(&r.level);
        }
        if !algorithms.contains(&r.algorithm.as_str()) {
            algorithms.push(&r.algorithm);
        }
        quality.entry(&r.level).or_insert(r.quality);
        cells.insert((&r.algorithm, &r.level), r.mean);
    }
    let mut out = csv::Writer::from_writer(w);
    let mut row = vec!["level".to_string()];
    row.extend(levels.iter().map(|l| l.to_string()));
    out.write_record(&row)?;
    let mut row = vec!["quality".to_string()];
    row.extend(levels.iter().map(|l| quality[l].to_string()));
    out.write_record(&row)?;
    for a in &algorithms {
        let mut row = vec![a.to_string()];
        row.extend(
            levels
                .iter()
                .map(|l| cells.get(&(*a, *l)).map(|v| v.to_string()).unwrap_or_default()),
        );
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<wide table>", e))?;
    Ok(())
}

/// Writes `results.csv` and/or `results.json` plus `wide/<dimension>_s<scenario>.csv`.
pub fn emit_report(records: &[ResultRecord], dir: impl AsRef<Path>, formats: &[ReportFormat]) -> Result<()> {
    let dir = dir.as_ref();
    for format in formats {
        match format {
            ReportFormat::Csv => write_results_csv(records, create(&dir.join("results.csv"))?)?,
            ReportFormat::Json => {
                let path = dir.join("results.json");
                let mut f = create(&path)?;
                serde_json::to_writer_pretty(&mut f, records)?;
                f.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    let mut groups: BTreeMap<(&str, u8), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.dimension, r.scenario)).or_default().push(r);
    }
    for ((dim, scenario), group) in groups {
        write_wide_table(
            &group,
            create(&dir.join("wide").join(format!("{dim}_s{scenario}.csv")))?,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(algorithm: &str, level: &str, mean: f64) -> ResultRecord {
        ResultRecord {
            dataset: "toy".into(),
            dimension: "completeness".into(),
            scenario: 1,
            algorithm: algorithm.into(),
            level: level.into(),
            quality: 1.0 - level.parse::<f64>().unwrap(),
            metric: "macro_f1".into(),
            mean,
            std: 0.0,
            n_runs: 5,
        }
    }

    #[test]
    fn empty_records_give_header_only_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[], dir.path(), &[ReportFormat::Csv, ReportFormat::Json]).unwrap();
        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(
            csv,
            "dataset,dimension,scenario,algorithm,level,quality,metric,mean,std,n_runs\n"
        );
        assert_eq!(fs::read_to_string(dir.path().join("results.json")).unwrap(), "[]\n");
    }

    #[test]
    fn csv_and_json_hold_the_same_data() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            record("knn", "0", 0.9),
            record("knn", "0.1", 0.85),
            record("cart", "0", 0.8),
        ];
        emit_report(&records, dir.path(), &[ReportFormat::Csv, ReportFormat::Json]).unwrap();
        assert_eq!(read_results_csv(dir.path().join("results.csv")).unwrap(), records);
        assert_eq!(read_results_json(dir.path().join("results.json")).unwrap(), records);
        let wide = fs::read_to_string(dir.path().join("wide/completeness_s1.csv")).unwrap();
        assert_eq!(wide, "level,0,0.1\nquality,1,0.9\nknn,0.9,0.85\ncart,0.8,\n");
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }
}
