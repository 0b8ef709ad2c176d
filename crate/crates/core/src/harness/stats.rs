//! Chi-square tests on captured label vectors.
//!
//! Values are binned into min(|F|, 16) buckets. When the joint bucket space
//! is small relative to the sample (at most N / 5 cells) the whole vector is
//! one category; otherwise each coordinate is tested on its own and the
//! smallest p-value is Bonferroni corrected.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 1000;
const MAX_BINS: u64 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub test: &'static str,
    pub samples: usize,
    /// Coordinates tested separately (1 in joint mode).
    pub coordinates: usize,
    /// Largest statistic among the coordinates.
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

struct Binning {
    modulus: u64,
    bins: u64,
}

impl Binning {
    fn new(modulus: u64) -> Self {
        Binning {
            modulus,
            bins: modulus.min(MAX_BINS),
        }
    }

    fn bucket(&self, v: u64) -> u64 {
        (v as u128 * self.bins as u128 / self.modulus as u128) as u64
    }

    /// Probability that a uniform element lands in bucket b.
    fn mass(&self, b: u64) -> f64 {
        // Values v with floor(v * B / p) == b form [ceil(b p / B), ceil((b+1) p / B)).
        let lo = (b as u128 * self.modulus as u128).div_ceil(self.bins as u128);
        let hi = ((b + 1) as u128 * self.modulus as u128).div_ceil(self.bins as u128);
        (hi - lo) as f64 / self.modulus as f64
    }
}

fn dimension(samples: &[Vec<u64>]) -> Result<usize> {
    let d = samples.first().map_or(0, Vec::len);
    if samples.iter().any(|s| s.len() != d) {
        return Err(Error::InvalidParameters("views differ in length".into()));
    }
    Ok(d)
}

/// Joint-mode cell count if it fits, else None.
fn joint_cells(bins: u64, d: usize, n: usize) -> Option<u64> {
    let cells = (0..d).try_fold(1u64, |acc, _| acc.checked_mul(bins))?;
    (cells <= (n / 5) as u64).then_some(cells)
}

fn joint_key(b: &Binning, v: &[u64]) -> u64 {
    v.iter().rev().fold(0, |acc, &x| acc * b.bins + b.bucket(x))
}

fn sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("positive df").sf(stat)
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            actual: n,
        });
    }
    Ok(())
}

fn goodness_of_fit(
    counts: &HashMap<u64, u64>,
    expected: impl Fn(u64) -> f64,
    cells: u64,
    n: usize,
) -> (f64, f64) {
    let mut stat = 0.0;
    for c in 0..cells {
        let e = expected(c) * n as f64;
        let o = counts.get(&c).copied().unwrap_or(0) as f64;
        stat += (o - e) * (o - e) / e;
    }
    (stat, (cells - 1) as f64)
}

/// Tests the hypothesis that views are uniform over F^d.
pub fn view_uniformity_test(samples: &[Vec<u64>], modulus: u64) -> Result<StatReport> {
    check_len(samples.len())?;
    let d = dimension(samples)?;
    let b = Binning::new(modulus);
    let n = samples.len();
    if let Some(cells) = joint_cells(b.bins, d, n) {
        let mut counts = HashMap::new();
        for s in samples {
            *counts.entry(joint_key(&b, s)).or_insert(0) += 1;
        }
        let expected = |mut c: u64| {
            let mut p = 1.0;
            for _ in 0..d {
                p *= b.mass(c % b.bins);
                c /= b.bins;
            }
            p
        };
        let (stat, df) = goodness_of_fit(&counts, expected, cells, n);
        return Ok(StatReport {
            test: "uniformity",
            samples: n,
            coordinates: 1,
            statistic: stat,
            df,
            p_value: sf(stat, df),
        });
    }
    let mut worst = (0.0, 0.0, 1.0);
    for k in 0..d {
        let mut counts = HashMap::new();
        for s in samples {
            *counts.entry(b.bucket(s[k])).or_insert(0) += 1;
        }
        let (stat, df) = goodness_of_fit(&counts, |c| b.mass(c), b.bins, n);
        let p = sf(stat, df);
        if p <= worst.2 {
            worst = (stat, df, p);
        }
    }
    Ok(StatReport {
        test: "uniformity",
        samples: n,
        coordinates: d,
        statistic: worst.0,
        df: worst.1,
        p_value: (worst.2 * d as f64).min(1.0),
    })
}

fn homogeneity(a: &HashMap<u64, u64>, b: &HashMap<u64, u64>, na: usize, nb: usize) -> (f64, f64) {
    let total = (na + nb) as f64;
    let mut keys: Vec<u64> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut stat = 0.0;
    for k in &keys {
        let oa = a.get(k).copied().unwrap_or(0) as f64;
        let ob = b.get(k).copied().unwrap_or(0) as f64;
        let ea = (oa + ob) * na as f64 / total;
        let eb = (oa + ob) * nb as f64 / total;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    (stat, keys.len().saturating_sub(1) as f64)
}

/// Tests the hypothesis that two equal-size samples of views come from the
/// same distribution.
pub fn two_sample_view_test(a: &[Vec<u64>], b: &[Vec<u64>], modulus: u64) -> Result<StatReport> {
    check_len(a.len().min(b.len()))?;
    if a.len() != b.len() {
        return Err(Error::InvalidParameters(format!(
            "sample sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let d = dimension(a)?;
    if dimension(b)? != d {
        return Err(Error::InvalidParameters("views differ in length".into()));
    }
    let bin = Binning::new(modulus);
    let n = a.len();
    let tally = |s: &[Vec<u64>], key: &dyn Fn(&[u64]) -> u64| {
        let mut counts = HashMap::new();
        for v in s {
            *counts.entry(key(v)).or_insert(0u64) += 1;
        }
        counts
    };
    if joint_cells(bin.bins, d, n).is_some() {
        let key = |v: &[u64]| joint_key(&bin, v);
        let (stat, df) = homogeneity(&tally(a, &key), &tally(b, &key), n, n);
        return Ok(StatReport {
            test: "two-sample",
            samples: n,
            coordinates: 1,
            statistic: stat,
            df,
            p_value: sf(stat, df),
        });
    }
    let mut worst = (0.0, 0.0, 1.0);
    for k in 0..d {
        let key = |v: &[u64]| bin.bucket(v[k]);
        let (stat, df) = homogeneity(&tally(a, &key), &tally(b, &key), n, n);
        let p = sf(stat, df);
        if p <= worst.2 {
            worst = (stat, df, p);
        }
    }
    Ok(StatReport {
        test: "two-sample",
        samples: n,
        coordinates: d,
        statistic: worst.0,
        df: worst.1,
        p_value: (worst.2 * d as f64).min(1.0),
    })
}
