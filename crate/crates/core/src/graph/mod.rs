//! Clique-model circuit graph and the sparse operators derived from it.

mod sparse;

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::Design;
use crate::Placement;

pub use sparse::SparseSymMatrix;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("dimension mismatch: expected {expected} rows, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("node {node} is isolated and sigma is 0; the normalization is undefined")]
    IsolatedNodeWithZeroSigma { node: usize },
    #[error("self-loop weight must be finite and >= 0, got {0}")]
    InvalidSigma(f64),
    #[error("operator power must be >= 1, got {0}")]
    InvalidPower(u32),
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("MatrixMarket line {line}: {reason}")]
    MatrixMarket { line: usize, reason: String },
}

/// Weighted degrees `d_i = sum_j w_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    pub fn of(adj: &SparseSymMatrix) -> Self {
        DegreeVector(adj.row_sums())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn isolated(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0.0)
            .map(|(i, _)| i)
    }

    pub fn is_regular(&self, tol: f64) -> bool {
        match self.0.first() {
            None => true,
            Some(&d0) => self.0.iter().all(|d| (d - d0).abs() <= tol),
        }
    }
}

/// One term `alpha * (A_sigma)^k` of a multi-frequency filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterTerm {
    pub sigma: f64,
    pub k: u32,
    pub alpha: f64,
}

impl FilterTerm {
    pub const fn new(sigma: f64, k: u32, alpha: f64) -> Self {
        FilterTerm { sigma, k, alpha }
    }
}

/// Clique expansion: every net with `M >= 2` pins adds `2 / M` to each
/// unordered pair of distinct cells it touches. Weights from different nets
/// accumulate. Nets with more than `max_clique_pins` pins are skipped.
pub fn build_clique_graph(design: &Design, max_clique_pins: Option<usize>) -> SparseSymMatrix {
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    let mut cells = Vec::new();
    for net in design.nets() {
        let m = net.pins.len();
        if m < 2 {
            continue;
        }
        if max_clique_pins.is_some_and(|cap| m > cap) {
            skipped += 1;
            continue;
        }
        let w = 2.0 / m as f64;
        cells.clear();
        cells.extend(net.pins.iter().map(|p| p.cell));
        cells.sort_unstable();
        cells.dedup();
        for (a, &i) in cells.iter().enumerate() {
            for &j in &cells[a + 1..] {
                entries.push((i, j, w));
            }
        }
    }
    if skipped > 0 {
        info!("clique model skipped {skipped} nets above {max_clique_pins:?} pins");
    }
    SparseSymMatrix::from_sym_triplets(design.num_cells(), entries)
        .expect("pin cell ids are validated by Design")
}

/// `L = D - A`.
pub fn laplacian(adj: &SparseSymMatrix) -> SparseSymMatrix {
    let d = DegreeVector::of(adj);
    adj.scaled_plus_diagonal(-1.0, d.as_slice())
}

/// `(D + sigma I)^{-1/2} (A + sigma I) (D + sigma I)^{-1/2}`.
pub fn normalized_augmented_adjacency(
    adj: &SparseSymMatrix,
    sigma: f64,
) -> Result<SparseSymMatrix, GraphError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(GraphError::InvalidSigma(sigma));
    }
    let d = DegreeVector::of(adj);
    if sigma == 0.0 {
        if let Some(node) = d.isolated().next() {
            return Err(GraphError::IsolatedNodeWithZeroSigma { node });
        }
    }
    let scale: Vec<f64> = d
        .as_slice()
        .iter()
        .map(|&di| 1.0 / (di + sigma).sqrt())
        .collect();
    let augmented = adj.scaled_plus_diagonal(1.0, &vec![sigma; adj.n()]);
    Ok(augmented.sym_scaled(&scale))
}

/// `I - A_sigma`; with `sigma = 0` this is the normalized Laplacian.
pub fn augmented_normalized_laplacian(
    adj: &SparseSymMatrix,
    sigma: f64,
) -> Result<SparseSymMatrix, GraphError> {
    let a = normalized_augmented_adjacency(adj, sigma)?;
    Ok(a.scaled_plus_diagonal(-1.0, &vec![1.0; adj.n()]))
}

/// `op^k x` by `k` sparse products; the power is never formed.
pub fn apply_power_column(op: &SparseSymMatrix, x: &[f64], k: u32) -> Result<Vec<f64>, GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidPower(k));
    }
    let mut cur = x.to_vec();
    let mut next = vec![0.0; x.len()];
    for _ in 0..k {
        op.mul_vec_into(&cur, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Apply `op^k` to both signal columns.
pub fn apply_operator_power(
    op: &SparseSymMatrix,
    g: &Placement,
    k: u32,
) -> Result<Placement, GraphError> {
    if g.len() != op.n() {
        return Err(GraphError::DimensionMismatch {
            expected: op.n(),
            found: g.len(),
        });
    }
    let (x, y) = rayon::join(
        || apply_power_column(op, g.x(), k),
        || apply_power_column(op, g.y(), k),
    );
    Ok(Placement::new(x?, y?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Cell, Net, Pin, Region};

    fn design_with_nets(n: usize, nets: &[&[usize]]) -> Design {
        let cells = (0..n)
            .map(|i| Cell::movable(i, format!("c{i}"), 1.0, 1.0))
            .collect();
        let nets = nets
            .iter()
            .enumerate()
            .map(|(id, pins)| Net {
                id,
                name: format!("n{id}"),
                pins: pins.iter().map(|&c| Pin::at_center(c)).collect(),
            })
            .collect();
        Design::new(cells, nets, Region::new(0.0, 0.0, 10.0, 10.0).unwrap()).unwrap()
    }

    fn edge(w: f64) -> SparseSymMatrix {
        SparseSymMatrix::from_sym_triplets(2, [(0, 1, w)]).unwrap()
    }

    #[test]
    fn clique_weights() {
        let g = build_clique_graph(&design_with_nets(2, &[&[0, 1]]), None);
        assert_eq!(g.get(0, 1), 1.0);

        let g = build_clique_graph(&design_with_nets(3, &[&[0, 1, 2]]), None);
        assert_eq!(g.num_edges(), 3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(g.get(i, j), 2.0 / 3.0);
        }

        let g = build_clique_graph(&design_with_nets(2, &[&[0, 1], &[1, 0]]), None);
        // Per-net contributions summed by brute force.
        let expected: f64 = [2.0 / 2.0, 2.0 / 2.0].iter().sum();
        assert_eq!(g.get(0, 1), expected);

        let g = build_clique_graph(&design_with_nets(2, &[&[0], &[]]), None);
        assert_eq!(g.nnz(), 0);
    }

    #[test]
    fn clique_drops_self_pairs_and_respects_cap() {
        // Cell 0 appears twice: one pair (0, 1) at weight 2/3.
        let g = build_clique_graph(&design_with_nets(2, &[&[0, 0, 1]]), None);
        assert_eq!(g.nnz(), 2);
        assert_eq!(g.get(0, 1), 2.0 / 3.0);
        assert_eq!(g.get(0, 0), 0.0);

        let d = design_with_nets(4, &[&[0, 1], &[0, 1, 2, 3]]);
        let g = build_clique_graph(&d, Some(3));
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn laplacian_examples() {
        let l = laplacian(&edge(1.0));
        assert_eq!(l.to_dense(), vec![1.0, -1.0, -1.0, 1.0]);

        let iso = SparseSymMatrix::from_sym_triplets(3, [(0, 1, 1.0)]).unwrap();
        let l = laplacian(&iso);
        assert_eq!(l.row(2).0.len(), 0);

        let tri =
            SparseSymMatrix::from_sym_triplets(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let l = laplacian(&tri);
        // Dense oracle: diag(2,2,2) - A.
        let dense = tri.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 2.0 } else { 0.0 } - dense[i * 3 + j];
                assert_eq!(l.get(i, j), expect);
            }
        }
        assert!(l.row_sums().iter().all(|s| s.abs() < 1e-15));
    }

    #[test]
    fn normalized_examples() {
        let a0 = normalized_augmented_adjacency(&edge(1.0), 0.0).unwrap();
        assert_eq!(a0.to_dense(), vec![0.0, 1.0, 1.0, 0.0]);

        let a2 = normalized_augmented_adjacency(&edge(1.0), 2.0).unwrap();
        let expect = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        for (got, want) in a2.to_dense().iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }

        let iso = SparseSymMatrix::from_sym_triplets(3, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            normalized_augmented_adjacency(&iso, 0.0),
            Err(GraphError::IsolatedNodeWithZeroSigma { node: 2 })
        ));
        let a = normalized_augmented_adjacency(&iso, 1.0).unwrap();
        assert_eq!(a.get(2, 2), 1.0);
        assert!(normalized_augmented_adjacency(&iso, -1.0).is_err());
    }

    #[test]
    fn operator_power_examples() {
        let a2 = normalized_augmented_adjacency(&edge(1.0), 2.0).unwrap();
        let out = apply_power_column(&a2, &[0.0, 3.0], 2).unwrap();
        // Dense oracle: A^2 = [[5/9, 4/9], [4/9, 5/9]].
        assert!((out[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((out[1] - 5.0 / 3.0).abs() < 1e-14);

        let once = apply_power_column(&a2, &[0.0, 3.0], 1).unwrap();
        let twice = apply_power_column(&a2, &once, 1).unwrap();
        assert_eq!(twice, out);

        // Regular graph, constant signal.
        let ring = SparseSymMatrix::from_sym_triplets(
            4,
            [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)],
        )
        .unwrap();
        let a = normalized_augmented_adjacency(&ring, 0.0).unwrap();
        let g = Placement::constant(4, 2.5, -1.0);
        let out = apply_operator_power(&a, &g, 1).unwrap();
        for i in 0..4 {
            assert!((out.x()[i] - 2.5).abs() < 1e-15 && (out.y()[i] + 1.0).abs() < 1e-15);
        }

        assert!(matches!(
            apply_power_column(&a2, &[1.0, 2.0], 0),
            Err(GraphError::InvalidPower(0))
        ));
        assert!(matches!(
            apply_operator_power(&a2, &Placement::zeros(3), 1),
            Err(GraphError::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn degree_vector() {
        let iso = SparseSymMatrix::from_sym_triplets(3, [(0, 1, 2.0)]).unwrap();
        let d = DegreeVector::of(&iso);
        assert_eq!(d.as_slice(), &[2.0, 2.0, 0.0]);
        assert_eq!(d.isolated().collect::<Vec<_>>(), vec![2]);
        assert!(!d.is_regular(0.0));
    }
}
