//! Per-cell coordinate table. The same type doubles as the two-column graph
//! signal that the filters operate on.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

/// Cell-center coordinates stored column-wise (`x`, `y`), one row per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Placement {
    /// Panics if the columns differ in length.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "placement columns must have equal length");
        Self { x, y }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }

    pub fn constant(n: usize, x: f64, y: f64) -> Self {
        Self::new(vec![x; n], vec![y; n])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }

    pub fn column_mut(&mut self, axis: Axis) -> &mut [f64] {
        match axis {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
        }
    }

    pub fn get(&self, i: usize) -> (f64, f64) {
        (self.x[i], self.y[i])
    }

    pub fn set(&mut self, i: usize, (x, y): (f64, f64)) {
        self.x[i] = x;
        self.y[i] = y;
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn into_columns(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }

    /// `a * self + b * other`, row for row.
    pub fn lin_comb(&self, a: f64, other: &Placement, b: f64) -> Placement {
        assert_eq!(self.len(), other.len());
        let mix = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(p, q)| a * p + b * q).collect();
        Placement::new(mix(&self.x, &other.x), mix(&self.y, &other.y))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Placement {
        Placement::new(
            self.x.iter().map(|v| v + dx).collect(),
            self.y.iter().map(|v| v + dy).collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> Placement {
        Placement::new(
            self.x.iter().map(|v| v * c).collect(),
            self.y.iter().map(|v| v * c).collect(),
        )
    }
}
