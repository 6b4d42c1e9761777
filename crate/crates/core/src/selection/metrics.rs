use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::{Error, Result};

/// Fraction of `truth` recovered among the first `|truth|` ranked features.
pub fn fraction_correct(ranked: &[usize], truth: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::MissingTruth);
    }
    let top = &ranked[..ranked.len().min(truth.len())];
    let hits = truth.iter().filter(|t| top.contains(t)).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Pearson correlation, `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa.sqrt() * sbb.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Redundancy {
    pub value: f64,
    /// Pairs involving a zero-variance feature; they count as zero.
    pub degenerate_pairs: usize,
}

/// Redundancy rate `Σ_{k>l} |ρ_kl| / (m(m−1))`.
///
/// The sum runs over unordered pairs while the denominator counts ordered
/// ones, so the value is half the mean absolute correlation and never
/// exceeds 0.5.
pub fn redundancy_rate(data: &Dataset, selected: &[usize]) -> Result<Redundancy> {
    let m = selected.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("redundancy needs at least 2 features, got {m}")));
    }
    if let Some(&bad) = selected.iter().find(|&&k| k >= data.n_features()) {
        return Err(Error::InvalidArgument(format!("feature index {bad} out of range")));
    }
    let mut total = 0.0;
    let mut degenerate_pairs = 0;
    for (a, &i) in selected.iter().enumerate() {
        for &j in &selected[a + 1..] {
            match pearson(data.feature(i), data.feature(j)) {
                Some(r) => total += r.abs(),
                None => degenerate_pairs += 1,
            }
        }
    }
    Ok(Redundancy { value: total / (m * (m - 1)) as f64, degenerate_pairs })
}
