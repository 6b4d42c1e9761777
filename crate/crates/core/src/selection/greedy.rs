use rayon::prelude::*;

use super::{check_k, output_gram, Diagnostics, Method, SelectConfig, SelectionResult};
use crate::dataset::Dataset;
use crate::kernels::{median_of_distances, KernelKind};
use crate::{Error, Result};

/// Greedy forward selection maximizing HSIC between the selected feature set
/// and the output.
///
/// The set kernel is a Gaussian on the joint squared distance of the selected
/// features; its bandwidth is the median joint distance, recomputed for every
/// candidate set. The criterion is `Σ M_ij L̄_ij`, which equals the centered
/// HSIC because `L̄` is already centered. Scores are the marginal gains.
pub fn fhsic_forward_select(data: &Dataset, k: usize, cfg: &SelectConfig) -> Result<SelectionResult> {
    check_k(data, k)?;
    cfg.validate()?;
    let n = data.n_samples();
    let (lc, _) = output_gram(data, cfg)?;
    let lc = lc.matrix();
    // packed strict upper triangle, row-major over i < j
    let pairs = n * (n - 1) / 2;
    let mut l_pairs = Vec::with_capacity(pairs);
    for i in 0..n {
        for j in i + 1..n {
            l_pairs.push(lc[(i, j)]);
        }
    }
    let l_trace: f64 = (0..n).map(|i| lc[(i, i)]).sum();
    let fixed_sigma = match cfg.input_kernel {
        KernelKind::Gaussian { sigma } => Some(sigma),
        _ => None,
    };

    let mut joint = vec![0.0; pairs];
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut chosen = vec![false; data.n_features()];
    let mut scores = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut negative_gain_steps = Vec::new();
    let mut current = 0.0;

    for step in 0..k {
        let best = (0..data.n_features())
            .into_par_iter()
            .filter(|&j| !chosen[j])
            .map_init(
                || (vec![0.0; pairs], vec![0.0; pairs]),
                |(sq, dist), j| {
                    let crit = set_criterion(data.feature(j), &joint, &l_pairs, l_trace, fixed_sigma, sq, dist)?;
                    Ok((j, crit))
                },
            )
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(None, |acc: Option<(usize, f64)>, (j, v)| match acc {
                // ties keep the lower index, which arrives first
                Some((_, bv)) if v <= bv => acc,
                _ => Some((j, v)),
            });
        let Some((j, value)) = best else { break };
        let gain = value - current;
        if gain < 0.0 {
            negative_gain_steps.push(step);
        }
        current = value;
        chosen[j] = true;
        selected.push(j);
        scores.push(gain);
        trace.push(value);
        let x = data.feature(j);
        let mut p = 0;
        for a in 0..n {
            for b in a + 1..n {
                let diff = x[a] - x[b];
                joint[p] += diff * diff;
                p += 1;
            }
        }
    }

    let flagged = selected.len() < k;
    Ok(SelectionResult {
        method: Method::Fhsic,
        ranked: selected,
        scores,
        lambda: None,
        diagnostics: Diagnostics {
            flagged,
            greedy_trace: trace,
            negative_gain_steps,
            ..Diagnostics::default()
        },
    })
}

/// Criterion for the current set plus feature `x`.
fn set_criterion(
    x: &[f64],
    joint: &[f64],
    l_pairs: &[f64],
    l_trace: f64,
    fixed_sigma: Option<f64>,
    sq: &mut [f64],
    dist: &mut [f64],
) -> Result<f64> {
    let n = x.len();
    let mut p = 0;
    for a in 0..n {
        for b in a + 1..n {
            let diff = x[a] - x[b];
            sq[p] = joint[p] + diff * diff;
            p += 1;
        }
    }
    let sigma = match fixed_sigma {
        Some(s) => s,
        None => {
            for (d, s) in dist.iter_mut().zip(sq.iter()) {
                *d = s.sqrt();
            }
            match median_of_distances(dist) {
                Ok(s) => s,
                // all samples coincide: constant kernel, zero after centering
                Err(Error::DegenerateBandwidth) => return Ok(0.0),
                Err(e) => return Err(e),
            }
        }
    };
    let scale = -0.5 / (sigma * sigma);
    let off: f64 = sq.iter().zip(l_pairs).map(|(s, l)| (s * scale).exp() * l).sum();
    Ok(l_trace + 2.0 * off)
}
