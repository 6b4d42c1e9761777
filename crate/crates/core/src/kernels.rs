//! Gram matrices, centering and the NOCCO normalization.
//!
//! Input features use the Gaussian kernel `exp(−(x − x')² / 2σ²)` with σ
//! from the median heuristic. Regression outputs use the same kernel;
//! classification outputs use the delta kernel, `1/n_y` within class `y`
//! and 0 across classes.

use std::collections::HashMap;
use std::hash::Hash;
use std::path::Path;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_NOCCO_EPSILON: f64 = 1e-3;

/// Relative tolerance used when validating user-supplied Gram matrices.
const INPUT_SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    GaussianMedian,
    Gaussian { sigma: f64 },
    Delta,
    Precomputed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// When set, Grams are mapped through `K̄ (K̄ + εnI)⁻¹`.
    pub nocco_epsilon: Option<f64>,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        KernelSpec { kind, nocco_epsilon: None }
    }

    pub fn with_nocco(mut self, epsilon: f64) -> Self {
        self.nocco_epsilon = Some(epsilon);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelKind::Gaussian { sigma } = self.kind {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {sigma}")));
            }
        }
        if let Some(eps) = self.nocco_epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidArgument(format!("NOCCO epsilon must be positive, got {eps}")));
            }
        }
        Ok(())
    }
}

/// Median of pairwise distances over unordered pairs `i < j`.
///
/// Even counts average the two middle values. If the median is zero while
/// some distance is positive (heavy ties), the median of the positive
/// distances is returned instead so the kernel stays well defined.
pub fn median_of_distances(distances: &mut [f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::InvalidArgument("need at least 2 samples for a bandwidth".into()));
    }
    let med = median_in_place(distances);
    if med > 0.0 {
        return Ok(med);
    }
    let mut positive: Vec<f64> = distances.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::DegenerateBandwidth);
    }
    Ok(median_in_place(&mut positive))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let m = v.len();
    let (_, &mut hi, _) = v.select_nth_unstable_by(m / 2, f64::total_cmp);
    if m % 2 == 1 {
        hi
    } else {
        // the lower middle is the largest element left of the pivot
        let lo = v[..m / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Median heuristic bandwidth: `median{|x_i − x_j| : i < j}`.
///
/// Returns [`Error::DegenerateBandwidth`] for a constant vector.
pub fn median_bandwidth(values: &[f64]) -> Result<f64> {
    let n = values.len();
    let mut dists = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (i, &xi) in values.iter().enumerate() {
        dists.extend(values[i + 1..].iter().map(|&xj| (xi - xj).abs()));
    }
    median_of_distances(&mut dists)
}

fn check_bandwidth(sigma: f64) -> Result<()> {
    if sigma > 0.0 && !sigma.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("bandwidth must be positive, got {sigma}")))
    }
}

/// Gaussian Gram matrix of a scalar feature.
pub fn gaussian_gram(values: &[f64], sigma: f64) -> Result<Mat<f64>> {
    check_bandwidth(sigma)?;
    let n = values.len();
    let scale = -0.5 / (sigma * sigma);
    let mut k = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        k[(j, j)] = 1.0;
        for i in j + 1..n {
            let d = values[i] - values[j];
            let v = (scale * d * d).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Gaussian Gram matrix from a matrix of squared distances.
pub fn gaussian_gram_from_sq_dists(sq_dists: &Mat<f64>, sigma: f64) -> Result<Mat<f64>> {
    check_bandwidth(sigma)?;
    let scale = -0.5 / (sigma * sigma);
    Ok(Mat::from_fn(sq_dists.nrows(), sq_dists.ncols(), |i, j| (scale * sq_dists[(i, j)]).exp()))
}

/// Delta kernel Gram matrix: entry `(i, j)` is `1/n_c` when samples `i` and
/// `j` share class `c`, else 0.
pub fn delta_gram<T: Eq + Hash>(labels: &[T]) -> Result<Mat<f64>> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("delta kernel needs at least one label".into()));
    }
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len();
    Ok(Mat::from_fn(n, n, |i, j| {
        if labels[i] == labels[j] {
            1.0 / counts[&labels[i]] as f64
        } else {
            0.0
        }
    }))
}

/// A doubly centered symmetric Gram matrix `ΓKΓ`, `Γ = I − 11ᵀ/n`.
#[derive(Clone, Debug)]
pub struct CenteredGram {
    matrix: Mat<f64>,
}

impl CenteredGram {
    pub fn zeros(n: usize) -> Self {
        CenteredGram { matrix: Mat::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<f64> {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    /// Largest `|M_ij − M_ji|`.
    pub fn symmetry_gap(&self) -> f64 {
        let m = &self.matrix;
        let n = self.n();
        let mut gap: f64 = 0.0;
        for j in 0..n {
            for i in j + 1..n {
                gap = gap.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        gap
    }

    /// Largest absolute row or column sum.
    pub fn max_line_sum(&self) -> f64 {
        let m = &self.matrix;
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| m[(i, j)]).sum();
            let col: f64 = (0..n).map(|j| m[(j, i)]).sum();
            worst = worst.max(row.abs()).max(col.abs());
        }
        worst
    }
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut v: f64 = 0.0;
    for j in 0..m.ncols() {
        for &x in m.col_as_slice(j) {
            v = v.max(x.abs());
        }
    }
    v
}

/// Double centering `ΓKΓ`: subtracts row and column means and adds back the
/// grand mean.
pub fn center(gram: &Mat<f64>) -> Result<CenteredGram> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: gram.ncols() });
    }
    if n == 0 {
        return Ok(CenteredGram::zeros(0));
    }
    let inv_n = 1.0 / n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| (0..n).map(|j| gram[(i, j)]).sum::<f64>() * inv_n).collect();
    let col_mean: Vec<f64> = (0..n).map(|j| gram.col_as_slice(j).iter().sum::<f64>() * inv_n).collect();
    let grand = row_mean.iter().sum::<f64>() * inv_n;
    let matrix = Mat::from_fn(n, n, |i, j| gram[(i, j)] - row_mean[i] - col_mean[j] + grand);
    Ok(CenteredGram { matrix })
}

/// NOCCO normalization `K̄ (K̄ + εnI)⁻¹`.
///
/// Computed spectrally: with `K̄ = U diag(μ) Uᵀ`, the result is
/// `U diag(μ / (μ + εn)) Uᵀ`. Negative eigenvalues are roundoff on a PSD
/// matrix and are clamped to zero first. The output is recentered so the
/// zero line sums survive the eigen-solver's roundoff.
pub fn nocco_transform(kc: &CenteredGram, epsilon: f64) -> Result<CenteredGram> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("NOCCO epsilon must be positive, got {epsilon}")));
    }
    let n = kc.n();
    if n == 0 || kc.is_zero() {
        return Ok(CenteredGram::zeros(n));
    }
    let shift = epsilon * n as f64;
    let evd = kc
        .matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // V = U diag(sqrt f) so that V Vᵀ is exactly symmetric and PSD
    let v = Mat::from_fn(n, n, |i, j| {
        let mu = s[j].max(0.0);
        u[(i, j)] * (mu / (mu + shift)).sqrt()
    });
    let product = &v * v.transpose();
    crate::simd::clear_upper_state();
    center(&product)
}

/// Reads a headerless `n × n` CSV matrix (e.g. a precomputed output Gram)
/// and checks it is symmetric to a relative tolerance of 1e-9. The returned
/// matrix is exactly symmetrized.
pub fn load_gram_csv(path: impl AsRef<Path>) -> Result<Mat<f64>> {
    let path = path.as_ref();
    let parse_err = |line: usize, column: String, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
            other => parse_err(1, "-".into(), format!("{other:?}")),
        })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(rows.len() + 1, "-".into(), e.to_string()))?;
        let line = rows.len() + 1;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(line, j.to_string(), format!("invalid value `{cell}`"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(1, "-".into(), "empty matrix".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(parse_err(i + 1, "-".into(), format!("expected {n} columns, found {}", r.len())));
    }
    let gram = Mat::from_fn(n, n, |i, j| rows[i][j]);
    symmetrize_checked(&gram, INPUT_SYMMETRY_TOL)
}

/// Returns `(M + Mᵀ)/2` after checking `|M_ij − M_ji| ≤ rel_tol · max|M|`.
pub fn symmetrize_checked(m: &Mat<f64>, rel_tol: f64) -> Result<Mat<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    let bound = rel_tol * max_abs(m);
    for j in 0..n {
        for i in j + 1..n {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > bound {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
    }
    Ok(Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
}
