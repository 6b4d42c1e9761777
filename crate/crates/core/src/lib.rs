//! Kernel-based non-linear feature selection.
//!
//! `ksel` selects features that are individually dependent on an output and
//! mutually non-redundant by regressing a centered output Gram matrix onto a
//! non-negative combination of per-feature centered Gram matrices:
//!
//! ```text
//! min_{α ≥ 0}  ½‖L̄ − Σ_k α_k K̄⁽ᵏ⁾‖²_F + λ‖α‖₁
//! ```
//!
//! Expanding the Frobenius term turns this into a non-negative Lasso over a
//! d×d matrix of pairwise HSIC scores, which is convex and solved to a
//! certified global optimum.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`dataset`] | feature-major datasets, CSV ingestion, synthetic generators, splits |
//! | [`kernels`] | Gaussian / delta Gram matrices, centering, NOCCO normalization |
//! | [`dependence`] | HSIC scores and quadratic-program assembly |
//! | [`solver`] | non-negative Lasso solvers, KKT certificate, λ paths and search |
//! | [`selection`] | HSIC Lasso, NOCCO Lasso and greedy HSIC pipelines, metrics |
//! | [`bench`] | synthetic recovery trials |
//!
//! Feature indices are 0-based throughout the library. Front ends print them
//! 1-based.

pub mod bench;
pub mod dataset;
pub mod dependence;
mod error;
pub mod kernels;
pub mod selection;
mod simd;
pub mod solver;

pub use error::{Error, Result};

pub use faer::Mat;
