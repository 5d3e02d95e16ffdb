//! Synthetic Bookshelf designs: a logical grid of movable cells tied
//! together by local mesh nets and a few random long-range nets, with fixed
//! IO terminals spread around the region boundary.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Cell, Design, Net, NetlistError, Pin, Region, Row};

pub const MIN_FANOUT: usize = 2;
pub const MAX_FANOUT: usize = 8;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least 4 cells, got {0}")]
    TooFewCells(usize),
    #[error("grid {rows}x{cols} cannot hold {movable} movable cells")]
    GridTooSmall {
        rows: usize,
        cols: usize,
        movable: usize,
    },
    #[error("invalid fanout profile `{0}`")]
    BadProfile(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Relative frequency of each net degree from 2 to 8 pins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoutProfile {
    weights: [f64; MAX_FANOUT - MIN_FANOUT + 1],
}

impl FanoutProfile {
    pub fn all_two_pin() -> Self {
        let mut weights = [0.0; MAX_FANOUT - MIN_FANOUT + 1];
        weights[0] = 1.0;
        FanoutProfile { weights }
    }

    /// Roughly the degree mix of standard-cell netlists: mostly 2- and
    /// 3-pin nets with a thin tail.
    pub fn mixed() -> Self {
        FanoutProfile {
            weights: [0.60, 0.18, 0.09, 0.05, 0.04, 0.02, 0.02],
        }
    }

    pub fn from_weights(pairs: &[(usize, f64)]) -> Result<Self, BenchError> {
        let mut weights = [0.0; MAX_FANOUT - MIN_FANOUT + 1];
        for &(deg, w) in pairs {
            if !(MIN_FANOUT..=MAX_FANOUT).contains(&deg) || !(w.is_finite() && w >= 0.0) {
                return Err(BenchError::BadProfile(format!("{deg}:{w}")));
            }
            weights[deg - MIN_FANOUT] += w;
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(BenchError::BadProfile("all weights zero".into()));
        }
        Ok(FanoutProfile { weights })
    }

    pub fn weight(&self, degree: usize) -> f64 {
        self.weights
            .get(degree.wrapping_sub(MIN_FANOUT))
            .copied()
            .unwrap_or(0.0)
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total: f64 = self.weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (i, &w) in self.weights.iter().enumerate() {
            if u < w {
                return i + MIN_FANOUT;
            }
            u -= w;
        }
        // Rounding at the top end.
        MIN_FANOUT + self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

impl Default for FanoutProfile {
    fn default() -> Self {
        Self::mixed()
    }
}

/// `all2`, `mixed`, or explicit `degree:weight` pairs such as `2:0.7,3:0.3`.
impl FromStr for FanoutProfile {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all2" => return Ok(Self::all_two_pin()),
            "mixed" => return Ok(Self::mixed()),
            _ => {}
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let (d, w) = part
                .split_once(':')
                .ok_or_else(|| BenchError::BadProfile(s.to_string()))?;
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| BenchError::BadProfile(s.to_string()))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| BenchError::BadProfile(s.to_string()))?;
            pairs.push((d, w));
        }
        Self::from_weights(&pairs)
    }
}

impl fmt::Display for FanoutProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, w)| format!("{}:{}", i + MIN_FANOUT, w))
            .collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    /// Total cells, terminals included.
    pub cells: usize,
    /// Logical grid shape for movable cells; near-square when unset.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Fixed IO terminals; about `2 sqrt(cells)` when unset.
    pub terminals: Option<usize>,
    pub fanout: FanoutProfile,
    /// Random long-range nets per movable cell.
    pub long_range_ratio: f64,
    /// Movable area over region area.
    pub utilization: f64,
    pub seed: u64,
}

impl BenchSpec {
    pub fn new(cells: usize, seed: u64) -> Self {
        BenchSpec {
            cells,
            rows: None,
            cols: None,
            terminals: None,
            fanout: FanoutProfile::default(),
            long_range_ratio: 0.05,
            utilization: 0.6,
            seed,
        }
    }

    pub fn with_fanout(mut self, fanout: FanoutProfile) -> Self {
        self.fanout = fanout;
        self
    }
}

/// Generate a design. Deterministic in `spec`.
pub fn generate(spec: &BenchSpec) -> Result<Design, BenchError> {
    if spec.cells < 4 {
        return Err(BenchError::TooFewCells(spec.cells));
    }
    if !(spec.utilization > 0.0 && spec.utilization <= 1.0) {
        return Err(BenchError::BadParameter(format!(
            "utilization {}",
            spec.utilization
        )));
    }
    if !(spec.long_range_ratio.is_finite() && spec.long_range_ratio >= 0.0) {
        return Err(BenchError::BadParameter(format!(
            "long-range ratio {}",
            spec.long_range_ratio
        )));
    }
    let n = spec.cells;
    let terminals = spec
        .terminals
        .unwrap_or_else(|| (2.0 * (n as f64).sqrt()).round() as usize)
        .clamp(1, n - 2);
    let movable = n - terminals;
    let (rows, cols) = match (spec.rows, spec.cols) {
        (Some(r), Some(c)) => (r, c),
        (Some(r), None) => (r, movable.div_ceil(r.max(1))),
        (None, Some(c)) => (movable.div_ceil(c.max(1)), c),
        (None, None) => {
            let c = (movable as f64).sqrt().ceil() as usize;
            (movable.div_ceil(c), c)
        }
    };
    if rows == 0 || cols == 0 || rows * cols < movable {
        return Err(BenchError::GridTooSmall {
            rows,
            cols,
            movable,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Movable cells: one row tall, 1..=3 sites wide.
    let mut cells: Vec<Cell> = (0..movable)
        .map(|i| Cell::movable(i, format!("c{i}"), rng.random_range(1..=3) as f64, 1.0))
        .collect();
    let movable_area: f64 = cells.iter().map(Cell::area).sum();
    let side = (movable_area / spec.utilization).sqrt().ceil().max(4.0);
    let num_rows = side as usize;
    let region = Region {
        xmin: 0.0,
        ymin: 0.0,
        xmax: side,
        ymax: side,
        rows: (0..num_rows)
            .map(|r| Row {
                y: r as f64,
                height: 1.0,
                site_width: 1.0,
                site_spacing: 1.0,
                x_origin: 0.0,
                num_sites: num_rows,
            })
            .collect(),
    };

    // Logical grid slot of each movable cell; row-major, last row partial.
    let slot = |i: usize| (i / cols, i % cols);
    let at = |r: usize, c: usize| -> Option<usize> {
        let i = r * cols + c;
        (r < rows && c < cols && i < movable).then_some(i)
    };

    let mut nets: Vec<Vec<usize>> = Vec::new();
    let mut local = Vec::new();
    // Extra pins for a net anchored at grid slot (r, c), drawn from the
    // surrounding 5x5 window.
    let mut grow =
        |pins: &mut Vec<usize>, r: usize, c: usize, degree: usize, rng: &mut ChaCha8Rng| {
            local.clear();
            for dr in -2i64..=2 {
                for dc in -2i64..=2 {
                    let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                    if rr < 0 || cc < 0 {
                        continue;
                    }
                    if let Some(j) = at(rr as usize, cc as usize) {
                        if !pins.contains(&j) {
                            local.push(j);
                        }
                    }
                }
            }
            local.shuffle(rng);
            let need = degree.saturating_sub(pins.len());
            pins.extend(local.iter().take(need));
        };

    // Mesh: right and down neighbors keep the grid connected for any profile.
    for i in 0..movable {
        let (r, c) = slot(i);
        for nb in [at(r, c + 1), at(r + 1, c)].into_iter().flatten() {
            let degree = spec.fanout.sample(&mut rng);
            let mut pins = vec![i, nb];
            grow(&mut pins, r, c, degree, &mut rng);
            nets.push(pins);
        }
    }

    // Long-range nets over uniformly random cells.
    let long_nets = (spec.long_range_ratio * movable as f64).round() as usize;
    for _ in 0..long_nets {
        let degree = spec.fanout.sample(&mut rng).min(movable);
        let mut pins = Vec::with_capacity(degree);
        while pins.len() < degree {
            let j = rng.random_range(0..movable);
            if !pins.contains(&j) {
                pins.push(j);
            }
        }
        nets.push(pins);
    }

    // Terminals walk the region boundary; each ties to the grid boundary
    // slot at the same fraction of the way around.
    let boundary = grid_boundary(rows, cols, movable);
    let perimeter = 4.0 * side;
    for t in 0..terminals {
        let frac = (t as f64 + 0.5) / terminals as f64;
        let pos = boundary_point(side, frac * perimeter);
        let id = cells.len();
        cells.push(Cell::fixed(id, format!("io{t}"), 1.0, 1.0, pos));
        let anchor = boundary[((frac * boundary.len() as f64) as usize).min(boundary.len() - 1)];
        let degree = spec.fanout.sample(&mut rng);
        let (r, c) = slot(anchor);
        let mut pins = vec![id, anchor];
        grow(&mut pins, r, c, degree, &mut rng);
        nets.push(pins);
    }

    let nets = nets
        .into_iter()
        .enumerate()
        .map(|(id, pins)| Net {
            id,
            name: format!("n{id}"),
            pins: pins.into_iter().map(Pin::at_center).collect(),
        })
        .collect();
    Ok(Design::new(cells, nets, region)?)
}

/// Grid boundary slots clockwise from the top-left corner. Row 0 is the top.
fn grid_boundary(rows: usize, cols: usize, movable: usize) -> Vec<usize> {
    let last_row = (movable - 1) / cols;
    let last_full = if movable.is_multiple_of(cols) {
        last_row
    } else {
        last_row.saturating_sub(1)
    };
    let mut out = Vec::new();
    let mut push = |i: usize| {
        if i < movable && out.last() != Some(&i) && !out.contains(&i) {
            out.push(i);
        }
    };
    let _ = rows;
    for c in 0..cols {
        push(c);
    }
    for r in 1..=last_full {
        push(r * cols + cols - 1);
    }
    for c in (0..cols).rev() {
        push(last_row * cols + c);
    }
    for r in (1..last_row).rev() {
        push(r * cols);
    }
    out
}

/// Point at arc length `s` along the square boundary, clockwise from the
/// top-left corner (y grows upward, so top is `y = side`).
fn boundary_point(side: f64, s: f64) -> (f64, f64) {
    let s = s.rem_euclid(4.0 * side);
    if s < side {
        (s, side)
    } else if s < 2.0 * side {
        (side, side - (s - side))
    } else if s < 3.0 * side {
        (side - (s - 2.0 * side), 0.0)
    } else {
        (0.0, s - 3.0 * side)
    }
}
