use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Zipf};
use serde::{Deserialize, Serialize};

use super::{LogEntry, Pollution, PollutionLog};
use crate::error::{Error, Result};
use crate::tabular::{Dataset, RngStream};

/// Duplication factor as an exact ratio `num / den >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DuplicationFactor {
    num: u64,
    den: u64,
}

impl DuplicationFactor {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num < den {
            return Err(Error::InvalidParameter(format!(
                "duplication factor {num}/{den} must be >= 1"
            )));
        }
        let g = gcd(num, den);
        Ok(DuplicationFactor {
            num: num / g,
            den: den / g,
        })
    }

    pub fn one() -> Self {
        DuplicationFactor { num: 1, den: 1 }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// `round((rho - 1) * n)` with halves rounded up, in exact integer arithmetic.
    pub fn extra_rows(&self, n: usize) -> usize {
        let n = n as u128;
        let (num, den) = (self.num as u128, self.den as u128);
        ((2 * (num - den) * n + den) / (2 * den)) as usize
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for DuplicationFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for DuplicationFactor {
    type Err = Error;

    /// Accepts `"10/9"`, `"2"` or a decimal such as `"1.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse duplication factor {s:?}"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            return DuplicationFactor::new(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
        }
        match s.split_once('.') {
            None => DuplicationFactor::new(s.parse().map_err(|_| bad())?, 1),
            Some((int, frac)) => {
                if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
                    return Err(bad());
                }
                let den = 10u64.pow(frac.len() as u32);
                let int: u64 = if int.is_empty() {
                    0
                } else {
                    int.parse().map_err(|_| bad())?
                };
                let frac: u64 = if frac.is_empty() {
                    0
                } else {
                    frac.parse().map_err(|_| bad())?
                };
                DuplicationFactor::new(int * den + frac, den)
            }
        }
    }
}

impl TryFrom<String> for DuplicationFactor {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DuplicationFactor> for String {
    fn from(d: DuplicationFactor) -> String {
        d.to_string()
    }
}

/// How many copies to append each time a row is picked for duplication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DupCountDist {
    Always1,
    /// Inclusive integer range.
    Uniform {
        low: u64,
        high: u64,
    },
    /// Rounded to the nearest integer.
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Zipf over `1..=max`.
    Zipf {
        exponent: f64,
        max: u64,
    },
}

impl DupCountDist {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DupCountDist::Always1 => true,
            DupCountDist::Uniform { low, high } => low <= high,
            DupCountDist::Normal { mean, sd } => mean.is_finite() && sd >= 0.0 && sd.is_finite(),
            DupCountDist::Zipf { exponent, max } => exponent > 0.0 && max >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid duplicate-count distribution {self:?}"
            )))
        }
    }

    /// One draw, clamped to `[1, remaining]`.
    fn draw(&self, rng: &mut RngStream, remaining: usize) -> usize {
        let raw: i64 = match *self {
            DupCountDist::Always1 => 1,
            DupCountDist::Uniform { low, high } => rng.random_range(low..=high) as i64,
            DupCountDist::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                (mean + sd * z).round() as i64
            }
            DupCountDist::Zipf { exponent, max } => {
                let zipf = Zipf::new(max as f64, exponent).expect("validated zipf parameters");
                zipf.sample(rng) as i64
            }
        };
        raw.clamp(1, remaining as i64) as usize
    }
}

impl FromStr for DupCountDist {
    type Err = Error;

    /// `always1`, `uniform:1,5`, `normal:1,5` or `zipf:1.5,100`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse duplicate-count distribution {s:?}"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let f = |i: usize| nums.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or_else(bad);
        let u = |i: usize| nums.get(i).and_then(|v| v.parse::<u64>().ok()).ok_or_else(bad);
        let dist = match name.trim() {
            "always1" | "one" => DupCountDist::Always1,
            "uniform" => DupCountDist::Uniform {
                low: u(0)?,
                high: u(1)?,
            },
            "normal" => DupCountDist::Normal { mean: f(0)?, sd: f(1)? },
            "zipf" => DupCountDist::Zipf {
                exponent: f(0)?,
                max: u(1).unwrap_or(100),
            },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessSpec {
    pub rho: DuplicationFactor,
    pub dup_count: DupCountDist,
}

/// Drops exact duplicate rows, keeping first occurrences in order.
pub fn deduplicate(ds: &Dataset) -> Result<(Dataset, Vec<usize>)> {
    let mut seen = HashSet::with_capacity(ds.n_rows());
    let mut keep = Vec::with_capacity(ds.n_rows());
    let mut dropped = Vec::new();
    for r in 0..ds.n_rows() {
        if seen.insert(ds.row_key(r)) {
            keep.push(r);
        } else {
            dropped.push(r);
        }
    }
    Ok((ds.select_rows(&keep)?, dropped))
}

/// Deduplicates, then appends `round((rho - 1) * n_cl)` duplicates per class
/// so the class ratios are unchanged.
pub fn pollute_uniqueness(ds: &Dataset, spec: &UniquenessSpec, rng: &RngStream) -> Result<Pollution> {
    spec.dup_count.validate()?;
    let (dedup, dropped) = deduplicate(ds)?;
    let mut log = PollutionLog {
        entries: dropped.into_iter().map(|row| LogEntry::RowDropped { row }).collect(),
    };
    let classes = dedup.class_rows()?;
    let mut rows: Vec<usize> = (0..dedup.n_rows()).collect();
    for (class, members) in &classes {
        if members.is_empty() {
            return Err(Error::EmptyResult(format!(
                "class {class} is empty after deduplication"
            )));
        }
        let mut remaining = spec.rho.extra_rows(members.len());
        let mut stream = rng.child(format!("class:{class}"));
        while remaining > 0 {
            let source = members[stream.random_range(0..members.len())];
            let copies = spec.dup_count.draw(&mut stream, remaining);
            for _ in 0..copies {
                log.entries.push(LogEntry::RowDuplicated {
                    source,
                    row: rows.len(),
                });
                rows.push(source);
            }
            remaining -= copies;
        }
    }
    Ok(Pollution {
        dataset: dedup.select_rows(&rows)?,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::{unique_rows, uniqueness};
    use crate::tabular::derive_rng;
    use crate::tabular::test_support::*;

    fn distinct(n_per_class: usize) -> Dataset {
        let labels: Vec<&str> = ["a", "b"]
            .iter()
            .flat_map(|l| std::iter::repeat_n(*l, n_per_class))
            .collect();
        let xs: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
        build(vec![num_col("x", &xs, false), cat_col("t", &labels, true)])
    }

    fn spec(rho: &str) -> UniquenessSpec {
        UniquenessSpec {
            rho: rho.parse().unwrap(),
            dup_count: DupCountDist::Always1,
        }
    }

    #[test]
    fn factor_parsing_and_rounding() {
        assert_eq!(
            "10/9".parse::<DuplicationFactor>().unwrap(),
            DuplicationFactor::new(10, 9).unwrap()
        );
        assert_eq!(
            "1.25".parse::<DuplicationFactor>().unwrap(),
            DuplicationFactor::new(5, 4).unwrap()
        );
        assert_eq!("2".parse::<DuplicationFactor>().unwrap().value(), 2.0);
        assert!("0.5".parse::<DuplicationFactor>().is_err());
        assert_eq!(DuplicationFactor::new(10, 9).unwrap().extra_rows(90), 10);
        // 0.5 rounds up
        assert_eq!(DuplicationFactor::new(3, 2).unwrap().extra_rows(1), 1);
    }

    #[test]
    fn rho_one_only_deduplicates() {
        let mut rows: Vec<usize> = (0..20).collect();
        rows.extend([0, 1, 2]);
        let ds = distinct(10).select_rows(&rows).unwrap();
        let p = pollute_uniqueness(&ds, &spec("1"), &derive_rng(1, &["u"])).unwrap();
        assert_eq!(p.dataset.n_rows(), 20);
        assert_eq!(uniqueness(&p.dataset).unwrap(), 1.0);
    }

    #[test]
    fn rho_two_doubles_each_class() {
        let ds = distinct(50);
        let p = pollute_uniqueness(&ds, &spec("2"), &derive_rng(1, &["u"])).unwrap();
        assert_eq!(p.dataset.n_rows(), 200);
        assert_eq!(unique_rows(&p.dataset) * 2, p.dataset.n_rows());
        assert_eq!(uniqueness(&p.dataset).unwrap(), 99.0 / 199.0);
        let counts = p.dataset.class_counts().unwrap();
        assert!(counts.values().all(|&c| c == 100));
    }

    #[test]
    fn ten_ninths_on_ninety_rows() {
        let labels = vec!["a"; 90];
        let xs: Vec<f64> = (0..90).map(f64::from).collect();
        let ds = build(vec![num_col("x", &xs, false), cat_col("t", &labels, true)]);
        let p = pollute_uniqueness(&ds, &spec("10/9"), &derive_rng(1, &["u"])).unwrap();
        assert_eq!(p.dataset.n_rows(), 100);
    }

    #[test]
    fn distributions_respect_budget() {
        let ds = distinct(100);
        for dist in ["normal:1,5", "uniform:1,7", "zipf:1.5,50"] {
            let s = UniquenessSpec {
                rho: "3".parse().unwrap(),
                dup_count: dist.parse().unwrap(),
            };
            let p = pollute_uniqueness(&ds, &s, &derive_rng(3, &["u"])).unwrap();
            assert_eq!(p.dataset.n_rows(), 600, "{dist}");
            assert_eq!(unique_rows(&p.dataset), 200);
        }
    }
}
