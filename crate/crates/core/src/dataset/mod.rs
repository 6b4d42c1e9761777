//! Supervised datasets in feature-major layout.
//!
//! A [`Dataset`] stores the sample matrix as `d` rows of `n` values each, so
//! row `k` is the vector of the k-th feature across all samples. This is the
//! orientation every kernel computation wants.

mod csv;
mod synth;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use self::csv::{load_csv, read_csv, OutputColumn};
pub use self::synth::{gen_data1, gen_data2, generate, NormalStream, SyntheticModel};

/// Seed of the deterministic generators.
///
/// Every random draw in the crate comes from a ChaCha20 stream keyed by
/// `ChaCha20Rng::seed_from_u64(seed)`, so a seed reproduces bit-identical
/// data on every platform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Seed of run `r` in a repeated experiment with base seed `self`.
    pub fn run(self, r: u64) -> Seed {
        Seed(self.0.wrapping_add(r))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(Error::InvalidArgument(format!("unknown task `{other}`"))),
        }
    }
}

/// Output vector: real responses or categorical labels.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Real(Vec<f64>),
    Labels(Vec<String>),
}

impl Output {
    pub fn len(&self) -> usize {
        match self {
            Output::Real(v) => v.len(),
            Output::Labels(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Output::Real(_) => Task::Regression,
            Output::Labels(_) => Task::Classification,
        }
    }

    /// Class id of every sample, numbered by first appearance.
    pub fn class_ids(&self) -> Vec<usize> {
        match self {
            Output::Real(v) => {
                let mut seen: HashMap<u64, usize> = HashMap::new();
                v.iter()
                    .map(|x| {
                        let next = seen.len();
                        *seen.entry(x.to_bits()).or_insert(next)
                    })
                    .collect()
            }
            Output::Labels(v) => {
                let mut seen: HashMap<&str, usize> = HashMap::new();
                v.iter()
                    .map(|x| {
                        let next = seen.len();
                        *seen.entry(x.as_str()).or_insert(next)
                    })
                    .collect()
            }
        }
    }

    fn select(&self, rows: &[usize]) -> Output {
        match self {
            Output::Real(v) => Output::Real(rows.iter().map(|&i| v[i]).collect()),
            Output::Labels(v) => Output::Labels(rows.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

/// A supervised dataset with `d` features and `n` samples.
///
/// Immutable once built; the `with_*` methods consume and return a new value.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_features: usize,
    n_samples: usize,
    output: Output,
    feature_names: Option<Vec<String>>,
    truth: Option<Vec<usize>>,
}

impl Dataset {
    /// Builds a dataset from a row-major `d × n` buffer.
    pub fn new(values: Vec<f64>, n_features: usize, output: Output) -> Result<Self> {
        let n_samples = output.len();
        if n_samples == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if n_features == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if values.len() != n_features * n_samples {
            return Err(Error::InvalidDataset(format!(
                "expected {n_features}×{n_samples} feature values, found {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value in feature {} at sample {}",
                pos / n_samples,
                pos % n_samples
            )));
        }
        if let Output::Real(y) = &output {
            if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("non-finite output at sample {i}")));
            }
        }
        Ok(Dataset {
            values,
            n_features,
            n_samples,
            output,
            feature_names: None,
            truth: None,
        })
    }

    /// Builds a dataset from one vector per feature.
    pub fn from_feature_rows(rows: Vec<Vec<f64>>, output: Output) -> Result<Self> {
        let d = rows.len();
        let n = output.len();
        if let Some((k, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidDataset(format!(
                "feature {k} has {} entries, output has {n}",
                row.len()
            )));
        }
        Dataset::new(rows.into_iter().flatten().collect(), d, output)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    /// Attaches the set of truly relevant features (sorted, deduplicated).
    pub fn with_truth(mut self, mut truth: Vec<usize>) -> Result<Self> {
        truth.sort_unstable();
        truth.dedup();
        if let Some(&k) = truth.iter().find(|&&k| k >= self.n_features) {
            return Err(Error::InvalidDataset(format!(
                "truth index {k} out of range for {} features",
                self.n_features
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    /// Appends one feature row at index `d`.
    pub fn with_appended_feature(mut self, values: Vec<f64>, name: Option<String>) -> Result<Self> {
        if values.len() != self.n_samples {
            return Err(Error::DimensionMismatch {
                expected: self.n_samples,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite value in appended feature".into()));
        }
        let k = self.n_features;
        self.values.extend_from_slice(&values);
        self.n_features += 1;
        if let Some(names) = &mut self.feature_names {
            names.push(name.unwrap_or_else(|| default_feature_name(k)));
        }
        Ok(self)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Values of feature `k` across all samples.
    pub fn feature(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_samples..(k + 1) * self.n_samples]
    }

    pub fn features(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_samples)
    }

    pub fn output(&self) -> &Output {
        &self.output
    }

    pub fn task(&self) -> Task {
        self.output.task()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// User-facing name of feature `k`: its header, or `X{k+1}`.
    pub fn feature_name(&self, k: usize) -> String {
        match &self.feature_names {
            Some(names) => names[k].clone(),
            None => default_feature_name(k),
        }
    }

    pub fn truth(&self) -> Option<&[usize]> {
        self.truth.as_deref()
    }

    /// Sub-dataset made of the given samples, in the given order.
    pub fn select_samples(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("empty sample selection".into()));
        }
        if let Some(&i) = rows.iter().find(|&&i| i >= self.n_samples) {
            return Err(Error::InvalidArgument(format!(
                "sample index {i} out of range for {} samples",
                self.n_samples
            )));
        }
        let values = self
            .features()
            .flat_map(|u| rows.iter().map(move |&i| u[i]))
            .collect();
        Ok(Dataset {
            values,
            n_features: self.n_features,
            n_samples: rows.len(),
            output: self.output.select(rows),
            feature_names: self.feature_names.clone(),
            truth: self.truth.clone(),
        })
    }
}

fn default_feature_name(k: usize) -> String {
    format!("X{}", k + 1)
}

/// Randomly partitions the samples into a training part holding
/// `round(train_fraction · n)` samples and a test part with the rest.
///
/// The permutation is a Fisher–Yates shuffle driven by `seed`. Each part
/// keeps the original sample order.
pub fn split(data: &Dataset, train_fraction: f64, seed: Seed) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} is outside (0, 1)"
        )));
    }
    let n = data.n_samples();
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} leaves an empty part with {n} samples"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed.0));
    let (train, test) = order.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.select_samples(train)?, data.select_samples(test)?))
}
