//! Train/test splitting, pollution grids and the three pollution scenarios.
//!
//! Scenario 1 pollutes the training half only, scenario 2 the test half only
//! and scenario 3 both, each half with its own sub-stream (`"train"` and
//! `"test"` children of the scenario stream).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pollute::{
    default_sample_count, plan_class_balance, pollute_class_balance, pollute_completeness,
    pollute_consistent_representation, pollute_feature_accuracy, pollute_target_accuracy, pollute_uniqueness,
    BalancePlan, CompletenessSpec, ConsistencySpec, DupCountDist, DuplicationFactor, FeatureAccuracySpec,
    FeatureLevels, PollutionLog, TargetAccuracySpec, UniquenessSpec,
};
use crate::quality::{self, RepresentationMap};
use crate::tabular::{snapshot_ground_truth, Category, Dataset, PairedDataset, RngStream};

/// One of the six quality dimensions. Consistency carries the number of
/// representations per value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Dimension {
    Consistency { representations: usize },
    Completeness,
    FeatureAccuracy,
    TargetAccuracy,
    Uniqueness,
    ClassBalance,
}

impl Dimension {
    /// Every dimension, with consistency at 2 and 5 representations.
    pub fn all() -> Vec<Dimension> {
        vec![
            Dimension::Consistency { representations: 2 },
            Dimension::Consistency { representations: 5 },
            Dimension::Completeness,
            Dimension::FeatureAccuracy,
            Dimension::TargetAccuracy,
            Dimension::Uniqueness,
            Dimension::ClassBalance,
        ]
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Consistency { representations } => write!(f, "consistency_k{representations}"),
            Dimension::Completeness => f.write_str("completeness"),
            Dimension::FeatureAccuracy => f.write_str("feature_accuracy"),
            Dimension::TargetAccuracy => f.write_str("target_accuracy"),
            Dimension::Uniqueness => f.write_str("uniqueness"),
            Dimension::ClassBalance => f.write_str("class_balance"),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "completeness" => Dimension::Completeness,
            "feature_accuracy" => Dimension::FeatureAccuracy,
            "target_accuracy" => Dimension::TargetAccuracy,
            "uniqueness" => Dimension::Uniqueness,
            "class_balance" => Dimension::ClassBalance,
            other => {
                let k = other
                    .strip_prefix("consistency_k")
                    .and_then(|k| k.parse().ok())
                    .filter(|&k: &usize| k >= 2)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown dimension {other:?}")))?;
                Dimension::Consistency { representations: k }
            }
        })
    }
}

impl TryFrom<String> for Dimension {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Dimension> for String {
    fn from(d: Dimension) -> String {
        d.to_string()
    }
}

/// Polluter setting: a fraction (or noise variance) for most dimensions, a
/// duplication factor for uniqueness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Fraction(f64),
    Rho(DuplicationFactor),
}

impl Level {
    pub fn is_clean(&self) -> bool {
        match self {
            Level::Fraction(v) => *v == 0.0,
            Level::Rho(r) => *r == DuplicationFactor::one(),
        }
    }

    /// Numeric value used for ordering and plotting.
    pub fn value(&self) -> f64 {
        match self {
            Level::Fraction(v) => *v,
            Level::Rho(r) => r.value(),
        }
    }

    /// Reads a level as written on a command line: a ratio such as `10/4`
    /// for uniqueness, a plain number otherwise.
    pub fn parse_for(dim: Dimension, text: &str) -> Result<Level> {
        match dim {
            Dimension::Uniqueness => Ok(Level::Rho(text.parse()?)),
            _ => text
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(Level::Fraction)
                .ok_or_else(|| Error::InvalidParameter(format!("level {text:?} is not a non-negative number"))),
        }
    }

    fn fraction(&self, dim: Dimension) -> Result<f64> {
        match self {
            Level::Fraction(v) => Ok(*v),
            Level::Rho(_) => Err(Error::InvalidParameter(format!(
                "{dim} takes a numeric level, not a ratio"
            ))),
        }
    }

    fn rho(&self) -> Result<DuplicationFactor> {
        match self {
            Level::Rho(r) => Ok(*r),
            Level::Fraction(v) => format!("{v}").parse(),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Fraction(v) => write!(f, "{v}"),
            Level::Rho(r) => write!(f, "{r}"),
        }
    }
}

/// Pollution levels of a dimension, cleanest first.
pub fn quality_grid(dim: Dimension) -> Vec<Level> {
    match dim {
        Dimension::Uniqueness => (2..=10)
            .rev()
            .map(|den| Level::Rho(DuplicationFactor::new(10, den).expect("10/den >= 1")))
            .collect(),
        _ => (0..=10).map(|i| Level::Fraction(i as f64 / 10.0)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Polluted training set, clean test set.
    PollutedTrain,
    /// Clean training set, polluted test set.
    PollutedTest,
    /// Both halves polluted independently.
    PollutedBoth,
}

impl Scenario {
    pub fn all() -> [Scenario; 3] {
        [Scenario::PollutedTrain, Scenario::PollutedTest, Scenario::PollutedBoth]
    }

    pub fn id(&self) -> u8 {
        match self {
            Scenario::PollutedTrain => 1,
            Scenario::PollutedTest => 2,
            Scenario::PollutedBoth => 3,
        }
    }

    fn pollutes_train(&self) -> bool {
        matches!(self, Scenario::PollutedTrain | Scenario::PollutedBoth)
    }

    fn pollutes_test(&self) -> bool {
        matches!(self, Scenario::PollutedTest | Scenario::PollutedBoth)
    }
}

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Scenario::PollutedTrain),
            2 => Ok(Scenario::PollutedTest),
            3 => Ok(Scenario::PollutedBoth),
            _ => Err(Error::InvalidParameter(format!("scenario must be 1, 2 or 3, got {id}"))),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.id()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSplit {
    pub class: Category,
    pub total: usize,
    pub train: usize,
    pub test: usize,
}

/// Which rows of the source went where; written next to split CSVs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub rng_path: Vec<String>,
    pub train_fraction: f64,
    pub classes: Vec<ClassSplit>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub manifest: SplitManifest,
}

/// Per-class `round(fraction * n_cl)` rows go to training, drawn uniformly
/// within the class. The largest class then moves by one row when that
/// brings the overall share closer to `fraction`.
pub fn stratified_split(ds: &Dataset, train_fraction: f64, rng: &RngStream) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let classes = ds.class_rows()?;
    if let Some((class, rows)) = classes.iter().find(|(_, rows)| rows.len() < 2) {
        return Err(Error::InvalidParameter(format!(
            "class {class} has {} row(s); stratified splitting needs at least 2",
            rows.len()
        )));
    }
    let n = ds.n_rows();
    let mut train_counts: BTreeMap<&Category, usize> = classes
        .iter()
        .map(|(c, rows)| (c, crate::pollute::fraction_to_count(train_fraction, rows.len())))
        .collect();

    // largest class, ties to the smallest class value
    let (largest, largest_rows) = classes
        .iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)))
        .expect("at least one class");
    let total: usize = train_counts.values().sum();
    let gap = |t: usize| (t as f64 / n as f64 - train_fraction).abs();
    let own = train_counts[largest];
    let mut best = (gap(total), own);
    if own < largest_rows.len() && gap(total + 1) < best.0 {
        best = (gap(total + 1), own + 1);
    }
    if own >= 1 && gap(total - 1) < best.0 {
        best = (gap(total - 1), own - 1);
    }
    train_counts.insert(largest, best.1);

    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    let mut summary = Vec::with_capacity(classes.len());
    for (class, rows) in &classes {
        let k = train_counts[class];
        let order = rng.child(format!("class:{class}")).permutation(rows.len());
        train_rows.extend(order[..k].iter().map(|&i| rows[i]));
        test_rows.extend(order[k..].iter().map(|&i| rows[i]));
        summary.push(ClassSplit {
            class: class.clone(),
            total: rows.len(),
            train: k,
            test: rows.len() - k,
        });
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    if test_rows.is_empty() {
        return Err(Error::EmptyResult("split leaves the test set empty".into()));
    }
    Ok(Split {
        train: ds.select_rows(&train_rows)?,
        test: ds.select_rows(&test_rows)?,
        manifest: SplitManifest {
            seed: rng.master_seed(),
            rng_path: rng.path().to_vec(),
            train_fraction,
            classes: summary,
            train_rows,
            test_rows,
        },
    })
}

/// Knobs of the polluters that the grid itself does not fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PollutionOptions {
    pub dup_count: DupCountDist,
    /// Rows of a class-balance polluted version; derived from the data when absent.
    pub sample_count: Option<usize>,
}

impl Default for PollutionOptions {
    fn default() -> Self {
        PollutionOptions {
            dup_count: DupCountDist::Always1,
            sample_count: None,
        }
    }
}

/// A polluted dataset together with everything needed to score it.
#[derive(Debug, Clone, PartialEq)]
pub struct PollutedHalf {
    pub dataset: Dataset,
    pub log: PollutionLog,
    pub representations: Option<RepresentationMap>,
    pub plan: Option<BalancePlan>,
}

impl PollutedHalf {
    fn clean(ds: &Dataset) -> Self {
        PollutedHalf {
            dataset: ds.clone(),
            log: PollutionLog::default(),
            representations: None,
            plan: None,
        }
    }
}

/// Applies one dimension's polluter at `level`.
pub fn pollute(
    ds: &Dataset,
    dim: Dimension,
    level: Level,
    options: &PollutionOptions,
    rng: &RngStream,
) -> Result<PollutedHalf> {
    let mut out = PollutedHalf::clean(ds);
    match dim {
        Dimension::Consistency { representations } => {
            let spec = ConsistencySpec {
                fraction: level.fraction(dim)?,
                representations,
            };
            let (p, map) = pollute_consistent_representation(ds, &spec, rng)?;
            out.dataset = p.dataset;
            out.log = p.log;
            out.representations = Some(map);
        }
        Dimension::Completeness => {
            let spec = CompletenessSpec {
                levels: FeatureLevels::All(level.fraction(dim)?),
            };
            let p = pollute_completeness(ds, &spec, rng)?;
            (out.dataset, out.log) = (p.dataset, p.log);
        }
        Dimension::FeatureAccuracy => {
            let spec = FeatureAccuracySpec {
                levels: FeatureLevels::All(level.fraction(dim)?),
            };
            let p = pollute_feature_accuracy(ds, &spec, rng)?;
            (out.dataset, out.log) = (p.dataset, p.log);
        }
        Dimension::TargetAccuracy => {
            let spec = TargetAccuracySpec {
                level: level.fraction(dim)?,
            };
            let p = pollute_target_accuracy(ds, &spec, rng)?;
            (out.dataset, out.log) = (p.dataset, p.log);
        }
        Dimension::Uniqueness => {
            let spec = UniquenessSpec {
                rho: level.rho()?,
                dup_count: options.dup_count,
            };
            let p = pollute_uniqueness(ds, &spec, rng)?;
            (out.dataset, out.log) = (p.dataset, p.log);
        }
        Dimension::ClassBalance => {
            let n_tilde = match options.sample_count {
                Some(n) => n,
                None => default_sample_count(ds)?,
            };
            let plan = plan_class_balance(ds, level.fraction(dim)?, n_tilde)?;
            let p = pollute_class_balance(ds, &plan, rng)?;
            (out.dataset, out.log) = (p.dataset, p.log);
            out.plan = Some(plan);
        }
    }
    Ok(out)
}

/// The quality score of `dim` for a polluted dataset and its clean source.
pub fn measure_dimension(dim: Dimension, half: &PollutedHalf, clean: &Dataset) -> Result<f64> {
    let ds = &half.dataset;
    match dim {
        Dimension::Consistency { .. } => {
            let empty = RepresentationMap::default();
            quality::consistency(ds, half.representations.as_ref().unwrap_or(&empty))
        }
        Dimension::Completeness => Ok(quality::completeness(ds)),
        Dimension::FeatureAccuracy => {
            Ok(quality::feature_accuracy_report(&PairedDataset::new(ds.clone(), clean.clone())?)?.mean)
        }
        Dimension::TargetAccuracy => quality::target_accuracy(&PairedDataset::new(ds.clone(), clean.clone())?),
        Dimension::Uniqueness => quality::uniqueness(ds),
        Dimension::ClassBalance => quality::balance(ds),
    }
}

/// One (scenario, dimension, level) unit of work with its clean snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub dimension: Dimension,
    pub level: Level,
    pub train: PollutedHalf,
    pub test: PollutedHalf,
    pub clean_train: PairedDataset,
    pub clean_test: PairedDataset,
}

impl ScenarioRun {
    /// Measured quality of the polluted part; the mean of both halves in
    /// scenario 3.
    pub fn quality(&self) -> Result<f64> {
        let train = || measure_dimension(self.dimension, &self.train, self.clean_train.ground_truth());
        let test = || measure_dimension(self.dimension, &self.test, self.clean_test.ground_truth());
        match self.scenario {
            Scenario::PollutedTrain => train(),
            Scenario::PollutedTest => test(),
            Scenario::PollutedBoth => Ok((train()? + test()?) / 2.0),
        }
    }
}

pub fn build_scenario(
    scenario: Scenario,
    clean_train: &Dataset,
    clean_test: &Dataset,
    dimension: Dimension,
    level: Level,
    options: &PollutionOptions,
    rng: &RngStream,
) -> Result<ScenarioRun> {
    let gt_train = snapshot_ground_truth(clean_train);
    let gt_test = snapshot_ground_truth(clean_test);
    let train = if scenario.pollutes_train() {
        pollute(clean_train, dimension, level, options, &rng.child("train"))?
    } else {
        PollutedHalf::clean(clean_train)
    };
    let test = if scenario.pollutes_test() {
        pollute(clean_test, dimension, level, options, &rng.child("test"))?
    } else {
        PollutedHalf::clean(clean_test)
    };
    Ok(ScenarioRun {
        scenario,
        dimension,
        level,
        train,
        test,
        clean_train: gt_train,
        clean_test: gt_test,
    })
}
