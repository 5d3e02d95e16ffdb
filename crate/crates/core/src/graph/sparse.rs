//! Symmetric sparse matrices in compressed sparse row layout.

use std::io::{self, Write};

use rayon::prelude::*;

use super::GraphError;

/// Rows at or above this count are multiplied in parallel.
const PAR_ROWS: usize = 8192;

/// Square symmetric matrix in CSR form. Column indices are strictly
/// increasing within each row and every stored `(i, j)` has a matching
/// `(j, i)` with the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Build from entries of the upper (or lower) triangle, diagonal
    /// included. Each off-diagonal entry is mirrored; repeated coordinates
    /// are summed in input order and exact zeros are dropped.
    pub fn from_sym_triplets(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, GraphError> {
        let mut full = Vec::new();
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(GraphError::InvalidMatrix(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(GraphError::InvalidMatrix(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        // Stable: duplicates keep input order, so sums are reproducible.
        full.sort_by_key(|&(i, j, _)| (i, j));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(full.len());
        for (i, j, v) in full {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (i, j) => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);

        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (i, j, v) in merged {
            indptr[i + 1] += 1;
            indices.push(j);
            values.push(v);
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        let m = SparseSymMatrix {
            n,
            indptr,
            indices,
            values,
        };
        debug_assert!(
            m.is_symmetric(0.0),
            "mirrored construction must be symmetric"
        );
        Ok(m)
    }

    /// Build from raw CSR arrays, validating layout and symmetry.
    pub fn from_csr(
        n: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, GraphError> {
        let bad = |m: &str| Err(GraphError::InvalidMatrix(m.to_string()));
        if indptr.len() != n + 1 || indptr[0] != 0 || indices.len() != values.len() {
            return bad("inconsistent CSR array lengths");
        }
        if indptr.windows(2).any(|w| w[0] > w[1]) || indptr[n] != indices.len() {
            return bad("row offsets not monotone");
        }
        for i in 0..n {
            let cols = &indices[indptr[i]..indptr[i + 1]];
            if cols.iter().any(|&j| j >= n) || cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad("column indices out of range or unsorted");
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value");
        }
        let m = SparseSymMatrix {
            n,
            indptr,
            indices,
            values,
        };
        if !m.is_symmetric(0.0) {
            return Err(GraphError::NonSymmetric);
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        SparseSymMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries (both triangles and the diagonal).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Number of stored off-diagonal pairs, i.e. undirected edges.
    pub fn num_edges(&self) -> usize {
        self.iter_upper().filter(|&(i, j, _)| i != j).count()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Entries with `i <= j`, in row-major order.
    pub fn iter_upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .filter(move |(&j, _)| j >= i)
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Structural and numerical symmetry within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| {
                let (cj, vj) = self.row(j);
                match cj.binary_search(&i) {
                    Ok(k) => (vj[k] - v).abs() <= tol,
                    Err(_) => false,
                }
            })
        })
    }

    /// `y = self * x`. Each row is reduced sequentially in column order, so
    /// results are identical with or without the parallel path.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), GraphError> {
        if x.len() != self.n || y.len() != self.n {
            return Err(GraphError::DimensionMismatch {
                expected: self.n,
                found: if x.len() != self.n { x.len() } else { y.len() },
            });
        }
        let row_dot = |i: usize| -> f64 {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            acc
        };
        if self.n >= PAR_ROWS {
            y.par_iter_mut()
                .with_min_len(1024)
                .enumerate()
                .for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, GraphError> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y)?;
        Ok(y)
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64, GraphError> {
        let y = self.mul_vec(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a * b).sum())
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[i * self.n + j] = v;
            }
        }
        out
    }

    /// Scale entry `(i, j)` by `s[i] * s[j]`, i.e. `S M S` for diagonal `S`.
    pub(crate) fn sym_scaled(&self, s: &[f64]) -> Self {
        let mut values = self.values.clone();
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                values[k] *= s[i] * s[self.indices[k]];
            }
        }
        SparseSymMatrix {
            n: self.n,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values,
        }
    }

    /// `a * self + diag(d)`.
    pub(crate) fn scaled_plus_diagonal(&self, a: f64, d: &[f64]) -> Self {
        let upper = self
            .iter_upper()
            .map(|(i, j, v)| (i, j, a * v))
            .chain(d.iter().enumerate().map(|(i, &v)| (i, i, v)));
        Self::from_sym_triplets(self.n, upper.collect::<Vec<_>>())
            .expect("entries of a valid matrix stay valid")
    }

    /// MatrixMarket `coordinate real symmetric` dump (lower triangle).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        let lower: Vec<_> = self.iter_upper().collect();
        writeln!(w, "{} {} {}", self.n, self.n, lower.len())?;
        for (i, j, v) in lower {
            // Stored as (row >= col), 1-based.
            writeln!(w, "{} {} {:e}", j + 1, i + 1, v)?;
        }
        Ok(())
    }

    /// Parse a MatrixMarket coordinate matrix (`symmetric` or `general`).
    pub fn read_matrix_market(text: &str) -> Result<Self, GraphError> {
        let err = |line: usize, reason: &str| GraphError::MatrixMarket {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, banner) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let banner: Vec<String> = banner
            .split_whitespace()
            .map(str::to_ascii_lowercase)
            .collect();
        if banner.len() != 5
            || banner[0] != "%%matrixmarket"
            || banner[1] != "matrix"
            || banner[2] != "coordinate"
            || !matches!(banner[3].as_str(), "real" | "integer")
        {
            return Err(err(1, "unsupported banner"));
        }
        let symmetric = match banner[4].as_str() {
            "symmetric" => true,
            "general" => false,
            _ => return Err(err(1, "unsupported symmetry")),
        };
        let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
        let (ln, size) = body.next().ok_or_else(|| err(1, "missing size line"))?;
        let dims: Vec<usize> = size
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, "bad size line")))
            .collect::<Result<_, _>>()?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(err(ln, "size line needs three integers"));
        };
        if rows != cols {
            return Err(err(ln, "matrix is not square"));
        }
        let mut entries = Vec::with_capacity(nnz.min(1 << 20));
        for (ln, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            let [i, j, v] = t[..] else {
                return Err(err(ln, "entry needs `row col value`"));
            };
            let i: usize = i.parse().map_err(|_| err(ln, "bad row"))?;
            let j: usize = j.parse().map_err(|_| err(ln, "bad column"))?;
            let v: f64 = v.parse().map_err(|_| err(ln, "bad value"))?;
            if i == 0 || j == 0 || i > rows || j > rows {
                return Err(err(ln, "index out of range"));
            }
            entries.push((i - 1, j - 1, v));
        }
        if entries.len() != nnz {
            return Err(err(ln, "entry count differs from size line"));
        }
        if symmetric {
            if entries.iter().any(|&(i, j, _)| i < j) {
                return Err(err(ln, "symmetric storage must be lower-triangular"));
            }
            Self::from_sym_triplets(rows, entries)
        } else {
            // Accept general storage only if it is already symmetric.
            let upper: Vec<_> = entries
                .iter()
                .copied()
                .filter(|&(i, j, _)| i <= j)
                .collect();
            let m = Self::from_sym_triplets(rows, upper)?;
            let lower = entries.iter().filter(|&&(i, j, _)| i > j);
            let lower_count = lower.clone().count();
            let off_diag = m.iter_upper().filter(|&(i, j, _)| i != j).count();
            if lower_count != off_diag || lower.into_iter().any(|&(i, j, v)| m.get(i, j) != v) {
                return Err(GraphError::NonSymmetric);
            }
            Ok(m)
        }
    }
}
