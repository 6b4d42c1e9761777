//! Synthetic benchmark data with known relevant features.
//!
//! Both models draw every feature i.i.d. from N(0, 1) and add N(0, 1) noise:
//!
//! * additive (`data1`), d = 256:
//!   `Y = −2 sin(2 X₁) + X₂² + X₃ + exp(−X₄) + E`
//! * non-additive (`data2`), d = 1000:
//!   `Y = X₁ exp(2 X₂) + X₃² + E`
//!
//! # Reproducibility
//!
//! Draws come from two ChaCha20 streams keyed by `seed_from_u64(seed)`:
//! stream 0 for the features, stream 1 for the noise. Features are drawn in
//! sample-major order (all d features of sample 0, then sample 1, ...) so
//! the dataset for `n` samples is a prefix of the one for `n + 1`.
//!
//! Normal variates use Box–Muller on 53-bit uniforms: `u = (w >> 11) · 2⁻⁵³`
//! for each 64-bit output word `w`, then for a pair `(u₁, u₂)`
//! `r = sqrt(−2 ln(1 − u₁))` and the variates `r cos(2π u₂)`, `r sin(2π u₂)`
//! are emitted in that order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Output, Seed};
use crate::{Error, Result};

const FEATURE_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Standard normal variates from a ChaCha20 stream via Box–Muller.
#[derive(Clone, Debug)]
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: Seed, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.0);
        rng.set_stream(stream);
        NormalStream { rng, spare: None }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntheticModel {
    /// `Y = −2 sin(2X₁) + X₂² + X₃ + exp(−X₄) + E`
    #[serde(rename = "data1")]
    Additive,
    /// `Y = X₁ exp(2X₂) + X₃² + E`
    #[serde(rename = "data2")]
    NonAdditive,
}

impl SyntheticModel {
    pub fn default_features(self) -> usize {
        match self {
            SyntheticModel::Additive => 256,
            SyntheticModel::NonAdditive => 1000,
        }
    }

    /// Number of leading features the response depends on.
    pub fn n_relevant(self) -> usize {
        match self {
            SyntheticModel::Additive => 4,
            SyntheticModel::NonAdditive => 3,
        }
    }

    /// Noise-free response given the relevant features `x[..n_relevant]`.
    pub fn response(self, x: &[f64]) -> f64 {
        match self {
            SyntheticModel::Additive => -2.0 * (2.0 * x[0]).sin() + x[1] * x[1] + x[2] + (-x[3]).exp(),
            SyntheticModel::NonAdditive => x[0] * (2.0 * x[1]).exp() + x[2] * x[2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SyntheticModel::Additive => "data1",
            SyntheticModel::NonAdditive => "data2",
        }
    }
}

impl std::str::FromStr for SyntheticModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "data1" | "additive" => Ok(SyntheticModel::Additive),
            "data2" | "non-additive" | "nonadditive" => Ok(SyntheticModel::NonAdditive),
            other => Err(Error::InvalidArgument(format!("unknown synthetic dataset `{other}`"))),
        }
    }
}

/// Draws `n` samples of `model` with `d` features.
pub fn generate(model: SyntheticModel, n: usize, d: usize, seed: Seed) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let r = model.n_relevant();
    if d < r {
        return Err(Error::InvalidArgument(format!(
            "{} needs at least {r} features, got {d}",
            model.name()
        )));
    }
    let mut features = NormalStream::new(seed, FEATURE_STREAM);
    let mut noise = NormalStream::new(seed, NOISE_STREAM);

    let mut values = vec![0.0; d * n];
    let mut y = Vec::with_capacity(n);
    let mut x = vec![0.0; d];
    for i in 0..n {
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = features.next_normal();
            values[k * n + i] = *xk;
        }
        y.push(model.response(&x) + noise.next_normal());
    }
    Dataset::new(values, d, Output::Real(y))?.with_truth((0..r).collect())
}

/// Additive benchmark: 256 features, relevant features X₁..X₄.
pub fn gen_data1(n: usize, seed: Seed) -> Result<Dataset> {
    generate(SyntheticModel::Additive, n, 256, seed)
}

/// Non-additive benchmark: 1000 features, relevant features X₁..X₃.
pub fn gen_data2(n: usize, seed: Seed) -> Result<Dataset> {
    generate(SyntheticModel::NonAdditive, n, 1000, seed)
}
