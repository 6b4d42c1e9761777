//! HSIC scores and the quadratic program they induce.
//!
//! Expanding `½‖L̄ − Σ_k α_k K̄⁽ᵏ⁾‖²_F` gives
//! `½ αᵀHα − cᵀα + ½⟨L̄, L̄⟩_F` with `H_kl = ⟨K̄⁽ᵏ⁾, K̄⁽ˡ⁾⟩_F` and
//! `c_k = ⟨K̄⁽ᵏ⁾, L̄⟩_F`, each an empirical HSIC value `tr(K̄⁽ᵏ⁾ L̄)`.
//!
//! The Frobenius products are evaluated on a packed representation of each
//! symmetric Gram: its diagonal followed by `√2` times its strict lower
//! triangle, `n(n+1)/2` values per feature. Plain dot products of packed
//! columns are then exactly the Frobenius products, and `H` is a blocked
//! `ZᵀZ` over the packed columns. The packed columns replace the full Grams,
//! so no `n² × d` design matrix is ever formed.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernels::CenteredGram;
use crate::{Error, Result};

/// Side length of the `H` tiles computed independently.
const TILE: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Hsic,
    Nocco,
}

/// `min_{α ≥ 0} ½ αᵀHα − cᵀα + const_term + λ‖α‖₁`.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    h: Mat<f64>,
    c: Vec<f64>,
    const_term: f64,
    measure: Measure,
}

impl QuadraticProblem {
    pub fn new(h: Mat<f64>, c: Vec<f64>, const_term: f64, measure: Measure) -> Result<Self> {
        let d = c.len();
        if d == 0 {
            return Err(Error::InvalidArgument("problem has no features".into()));
        }
        if h.nrows() != d || h.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: h.nrows().max(h.ncols()) });
        }
        let finite = c.iter().all(|v| v.is_finite())
            && const_term.is_finite()
            && (0..d).all(|j| h.col_as_slice(j).iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidArgument("problem data contains non-finite values".into()));
        }
        Ok(QuadraticProblem { h, c, const_term, measure })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn h(&self) -> &Mat<f64> {
        &self.h
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn const_term(&self) -> f64 {
        self.const_term
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// `Hα − c`.
    pub fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut g: Vec<f64> = self.c.iter().map(|v| -v).collect();
        for (l, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                for (gk, &hkl) in g.iter_mut().zip(self.h.col_as_slice(l)) {
                    *gk += hkl * a;
                }
            }
        }
        debug_assert_eq!(g.len(), d);
        g
    }

    /// Smooth part `½αᵀHα − cᵀα + const_term`.
    pub fn smooth_objective(&self, alpha: &[f64]) -> f64 {
        let g = self.gradient(alpha);
        // ½αᵀHα − cᵀα = ½αᵀ(Hα − c) − ½cᵀα
        let mut v = 0.0;
        for ((a, gk), ck) in alpha.iter().zip(&g).zip(&self.c) {
            v += 0.5 * a * (gk - ck);
        }
        v + self.const_term
    }

    /// Full objective including `λ‖α‖₁`.
    pub fn objective(&self, alpha: &[f64], lambda: f64) -> f64 {
        self.smooth_objective(alpha) + lambda * alpha.iter().map(|a| a.abs()).sum::<f64>()
    }
}

/// `⟨A, B⟩_F = Σ_ij A_ij B_ij`.
pub fn frobenius(a: &Mat<f64>, b: &Mat<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok((0..a.ncols())
        .map(|j| a.col_as_slice(j).iter().zip(b.col_as_slice(j)).map(|(x, y)| x * y).sum::<f64>())
        .sum())
}

/// Empirical HSIC `tr(K̄ L̄)`, evaluated as the entrywise product sum.
pub fn hsic(kc: &CenteredGram, lc: &CenteredGram) -> Result<f64> {
    frobenius(kc.matrix(), lc.matrix())
}

/// Number of packed values for an `n × n` symmetric matrix.
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Writes the packed form of a symmetric matrix (diagonal, then `√2` times
/// the strict lower triangle, column by column) into `out`.
pub fn pack_symmetric(m: &Mat<f64>, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), packed_len(n));
    let (diag, rest) = out.split_at_mut(n);
    for (j, v) in diag.iter_mut().enumerate() {
        *v = m[(j, j)];
    }
    let mut idx = 0;
    for j in 0..n {
        let col = &m.col_as_slice(j)[j + 1..];
        for (dst, &x) in rest[idx..idx + col.len()].iter_mut().zip(col) {
            *dst = std::f64::consts::SQRT_2 * x;
        }
        idx += col.len();
    }
}

/// Packed centered Grams of `d` features, one contiguous column each.
#[derive(Clone, Debug)]
pub struct GramDesign {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl GramDesign {
    /// Builds the packed columns in parallel. `f(k)` produces the centered
    /// Gram of feature `k` plus a side value that is returned in order.
    pub fn build<T, F>(n: usize, d: usize, f: F) -> Result<(Self, Vec<T>)>
    where
        T: Send,
        F: Fn(usize) -> Result<(CenteredGram, T)> + Sync,
    {
        if d == 0 {
            return Err(Error::InvalidArgument("problem has no features".into()));
        }
        let m = packed_len(n);
        let mut data = vec![0.0; m * d];
        let side = data
            .par_chunks_mut(m.max(1))
            .enumerate()
            .map(|(k, col)| {
                let (gram, extra) = f(k)?;
                if gram.n() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: gram.n() });
                }
                pack_symmetric(gram.matrix(), col);
                Ok(extra)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok((GramDesign { n, d, data }, side))
    }

    pub fn from_grams(grams: &[CenteredGram]) -> Result<Self> {
        let n = grams.first().map_or(0, CenteredGram::n);
        Ok(Self::build(n, grams.len(), |k| Ok((grams[k].clone(), ())))?.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column(&self, k: usize) -> &[f64] {
        let m = packed_len(self.n);
        &self.data[k * m..(k + 1) * m]
    }

    fn block(&self, cols: std::ops::Range<usize>) -> MatRef<'_, f64> {
        let m = packed_len(self.n);
        MatRef::from_column_major_slice(&self.data[cols.start * m..cols.end * m], m, cols.len())
    }

    /// Assembles `H`, `c` and the constant term against an output Gram.
    ///
    /// `H` is computed in fixed `TILE × TILE` blocks, each by one sequential
    /// product, so the result does not depend on the thread count.
    pub fn assemble(&self, output: &CenteredGram, measure: Measure) -> Result<QuadraticProblem> {
        if output.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: output.n() });
        }
        let d = self.d;
        let mut y = vec![0.0; packed_len(self.n)];
        pack_symmetric(output.matrix(), &mut y);

        let c: Vec<f64> = (0..d)
            .into_par_iter()
            .map(|k| self.column(k).iter().zip(&y).map(|(a, b)| a * b).sum())
            .collect();
        let const_term = 0.5 * y.iter().map(|v| v * v).sum::<f64>();

        let n_blocks = d.div_ceil(TILE);
        let tiles: Vec<(usize, usize)> = (0..n_blocks)
            .flat_map(|bi| (bi..n_blocks).map(move |bj| (bi, bj)))
            .collect();
        let span = |b: usize| b * TILE..((b + 1) * TILE).min(d);
        let products: Vec<Mat<f64>> = tiles
            .par_iter()
            .map(|&(bi, bj)| {
                let (ri, rj) = (span(bi), span(bj));
                let mut out = Mat::<f64>::zeros(ri.len(), rj.len());
                matmul(
                    out.as_mut(),
                    Accum::Replace,
                    self.block(ri).transpose(),
                    self.block(rj),
                    1.0,
                    Par::Seq,
                );
                crate::simd::clear_upper_state();
                out
            })
            .collect();

        let mut h = Mat::<f64>::zeros(d, d);
        for (&(bi, bj), tile) in tiles.iter().zip(&products) {
            let (ri, rj) = (span(bi), span(bj));
            for (a, i) in ri.clone().enumerate() {
                for (b, j) in rj.clone().enumerate() {
                    h[(i, j)] = tile[(a, b)];
                    h[(j, i)] = tile[(a, b)];
                }
            }
        }
        // diagonal tiles are symmetric only up to roundoff
        for j in 0..d {
            for i in j + 1..d {
                let v = 0.5 * (h[(i, j)] + h[(j, i)]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        QuadraticProblem::new(h, c, const_term, measure)
    }
}

/// Builds the quadratic program from per-feature centered Grams and the
/// centered output Gram. For NOCCO the inputs are the normalized Grams.
pub fn assemble_problem(
    feature_grams: &[CenteredGram],
    output_gram: &CenteredGram,
    measure: Measure,
) -> Result<QuadraticProblem> {
    if feature_grams.is_empty() {
        return Err(Error::InvalidArgument("problem has no features".into()));
    }
    let n = output_gram.n();
    if let Some(g) = feature_grams.iter().find(|g| g.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: g.n() });
    }
    GramDesign::from_grams(feature_grams)?.assemble(output_gram, measure)
}
