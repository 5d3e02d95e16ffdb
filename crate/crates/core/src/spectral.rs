//! Dense spectral toolkit for small graphs.
//!
//! Everything here densifies its input and is capped at [`DENSE_LIMIT`]
//! nodes. Operations take the normalized Laplacian unless noted; the exact
//! denoiser takes the combinatorial Laplacian `L = D - A`.

use std::io::{self, Write};
use std::time::Instant;

use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::graph::{self, GraphError, SparseSymMatrix};
use crate::netlist::{Design, Region};
use crate::Placement;

pub const DENSE_LIMIT: usize = 2000;

/// Eigenvalues at or below this are treated as zero when checking for a
/// degenerate (disconnected) spectrum.
const ZERO_EIG: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("{n} nodes exceed the dense limit of {limit}")]
    TooLargeForDense { n: usize, limit: usize },
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cutoff {t} outside 1..={n}")]
    CutoffOutOfRange { t: usize, n: usize },
    #[error("need at least {need} nodes, have {n}")]
    TooFewNodes { n: usize, need: usize },
    #[error("I + L is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn guard(n: usize) -> Result<(), SpectralError> {
    if n > DENSE_LIMIT {
        return Err(SpectralError::TooLargeForDense {
            n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

fn dense(mat: &SparseSymMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(mat.n(), mat.n(), &mat.to_dense())
}

/// Ascending eigenvalues and orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    lambdas: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// `U diag(h(lambda_i)) U^T` as a dense matrix.
    pub fn filter_matrix(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.n(), self.n(), |r, c| {
            self.vectors[(r, c)] * h(self.lambdas[c])
        });
        scaled * self.vectors.transpose()
    }

    fn check(&self, len: usize) -> Result<(), SpectralError> {
        if len != self.n() {
            return Err(SpectralError::DimensionMismatch {
                expected: self.n(),
                found: len,
            });
        }
        Ok(())
    }
}

pub fn eigendecompose(mat: &SparseSymMatrix) -> Result<SpectralBasis, SpectralError> {
    guard(mat.n())?;
    let scale = mat.to_dense().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !mat.is_symmetric(1e-12 * scale.max(1.0)) {
        return Err(SpectralError::NonSymmetric);
    }
    let eig = SymmetricEigen::new(dense(mat));
    let mut order: Vec<usize> = (0..mat.n()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambdas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(mat.n(), mat.n(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralBasis { lambdas, vectors })
}

/// Graph Fourier transform `U^T g`.
pub fn gft(basis: &SpectralBasis, g: &[f64]) -> Result<Vec<f64>, SpectralError> {
    basis.check(g.len())?;
    let out = basis.vectors.tr_mul(&DVector::from_column_slice(g));
    Ok(out.iter().copied().collect())
}

/// Inverse transform `U g_hat`.
pub fn igft(basis: &SpectralBasis, coeffs: &[f64]) -> Result<Vec<f64>, SpectralError> {
    basis.check(coeffs.len())?;
    let out = &basis.vectors * DVector::from_column_slice(coeffs);
    Ok(out.iter().copied().collect())
}

/// Projection onto the `t` lowest-frequency eigenvectors.
pub fn ideal_lowpass(
    basis: &SpectralBasis,
    g: &[f64],
    t: usize,
) -> Result<Vec<f64>, SpectralError> {
    basis.check(g.len())?;
    if t == 0 || t > basis.n() {
        return Err(SpectralError::CutoffOutOfRange { t, n: basis.n() });
    }
    let u_t = basis.vectors.columns(0, t);
    let coeffs = u_t.tr_mul(&DVector::from_column_slice(g));
    Ok((u_t * coeffs).iter().copied().collect())
}

#[derive(Debug, Clone)]
pub struct EigenPlacement {
    pub placement: Placement,
    /// At least three zero eigenvalues: `u2` and `u3` both lie in the kernel.
    pub degenerate: bool,
}

/// `x = u2`, `y = u3`, each affinely rescaled onto the region.
pub fn eigenvector_placement(
    basis: &SpectralBasis,
    region: &Region,
) -> Result<EigenPlacement, SpectralError> {
    if basis.n() < 3 {
        return Err(SpectralError::TooFewNodes {
            n: basis.n(),
            need: 3,
        });
    }
    let degenerate = basis.lambdas[2] <= ZERO_EIG;
    if degenerate {
        warn!("degenerate spectrum: graph has at least three components; eigenvector placement is not meaningful");
    }
    let fit = |v: Vec<f64>, lo: f64, hi: f64| -> Vec<f64> {
        let (min, max) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        if max - min <= f64::EPSILON * max.abs().max(1.0) {
            return vec![0.5 * (lo + hi); v.len()];
        }
        v.iter()
            .map(|x| lo + (x - min) / (max - min) * (hi - lo))
            .collect()
    };
    let x = fit(basis.vector(1), region.xmin, region.xmax);
    let y = fit(basis.vector(2), region.ymin, region.ymax);
    Ok(EigenPlacement {
        placement: Placement::new(x, y),
        degenerate,
    })
}

/// Eigenvector baseline end to end: normalized Laplacian, dense
/// eigendecomposition, rescale, then re-pin fixed cells and clamp.
#[derive(Debug, Clone)]
pub struct EigenBaseline {
    pub placement: Placement,
    pub decompose_seconds: f64,
    pub total_seconds: f64,
    pub degenerate: bool,
}

pub fn eigenvector_baseline(
    design: &Design,
    adj: &SparseSymMatrix,
) -> Result<EigenBaseline, SpectralError> {
    guard(adj.n())?;
    let start = Instant::now();
    let lap = graph::augmented_normalized_laplacian(adj, 0.0)?;
    let t0 = Instant::now();
    let basis = eigendecompose(&lap)?;
    let decompose_seconds = t0.elapsed().as_secs_f64();
    let EigenPlacement {
        mut placement,
        degenerate,
    } = eigenvector_placement(&basis, design.region())?;
    design.legalize_bounds(&mut placement);
    Ok(EigenBaseline {
        placement,
        decompose_seconds,
        total_seconds: start.elapsed().as_secs_f64(),
        degenerate,
    })
}

/// Exact smoothing denoiser `(I + L)^{-1} g` by dense Cholesky. Takes the
/// combinatorial Laplacian.
pub fn exact_denoise(laplacian: &SparseSymMatrix, g: &[f64]) -> Result<Vec<f64>, SpectralError> {
    guard(laplacian.n())?;
    if g.len() != laplacian.n() {
        return Err(SpectralError::DimensionMismatch {
            expected: laplacian.n(),
            found: g.len(),
        });
    }
    let m = dense(laplacian) + DMatrix::identity(g.len(), g.len());
    let chol = Cholesky::new(m).ok_or(SpectralError::NotPositiveDefinite)?;
    Ok(chol
        .solve(&DVector::from_column_slice(g))
        .iter()
        .copied()
        .collect())
}

/// Frequency response curve `h(lambda)` sampled at given eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterResponse {
    pub label: String,
    pub samples: Vec<(f64, f64)>,
}

/// `(1 - lambda)^k` at each eigenvalue of the sigma-augmented normalized
/// Laplacian.
pub fn filter_response(sigma: f64, k: u32, lambdas: &[f64]) -> FilterResponse {
    FilterResponse {
        label: format!("sigma={sigma} k={k}"),
        samples: lambdas
            .iter()
            .map(|&l| (l, (1.0 - l).powi(k as i32)))
            .collect(),
    }
}

/// Response of the exact denoiser, `1 / (1 + lambda)`.
pub fn denoiser_response(lambda: f64) -> f64 {
    1.0 / (1.0 + lambda)
}

/// First-order Taylor approximation of the denoiser around 0, `1 - lambda`.
pub fn first_order_response(lambda: f64) -> f64 {
    1.0 - lambda
}

/// Gap between the exact denoiser and its first-order approximation,
/// `lambda^2 / (1 + lambda)`.
pub fn taylor_gap(lambda: f64) -> f64 {
    lambda * lambda / (1.0 + lambda)
}

/// Histogram of eigenvalues over `[0, 2]` with `bins` equal-width bins;
/// returns `(bin center, count)`. Values outside are clamped to the ends.
pub fn eigenvalue_histogram(lambdas: &[f64], bins: usize) -> Vec<(f64, usize)> {
    let bins = bins.max(1);
    let width = 2.0 / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in lambdas {
        let b = ((l / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| ((b as f64 + 0.5) * width, c))
        .collect()
}

/// `sigma,lambda,count` rows.
pub fn write_histogram_csv<W: Write>(
    mut w: W,
    series: &[(f64, Vec<(f64, usize)>)],
) -> io::Result<()> {
    writeln!(w, "sigma,lambda,count")?;
    for (sigma, hist) in series {
        for (l, c) in hist {
            writeln!(w, "{sigma},{l:.6},{c}")?;
        }
    }
    Ok(())
}

/// `sigma,k,lambda,h` rows.
pub fn write_response_csv<W: Write>(
    mut w: W,
    series: &[(f64, u32, FilterResponse)],
) -> io::Result<()> {
    writeln!(w, "sigma,k,lambda,h")?;
    for (sigma, k, resp) in series {
        for (l, h) in &resp.samples {
            writeln!(w, "{sigma},{k},{l:.9},{h:.9}")?;
        }
    }
    Ok(())
}
