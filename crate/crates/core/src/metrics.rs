//! Placement quality measures.
//!
//! Quadratic wirelength and Rayleigh smoothness work on cell centers and the
//! clique graph; HPWL works on absolute pin positions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, SparseSymMatrix};
use crate::netlist::Design;
use crate::{Axis, Placement};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("signal is zero after centering")]
    ZeroSignal,
}

fn check(expected: usize, found: usize) -> Result<(), MetricsError> {
    if expected != found {
        return Err(MetricsError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `sum_{i<j} w_ij ((x_i - x_j)^2 + (y_i - y_j)^2)` over stored edges.
pub fn quadratic_wirelength(adj: &SparseSymMatrix, g: &Placement) -> Result<f64, MetricsError> {
    check(adj.n(), g.len())?;
    let (x, y) = (g.x(), g.y());
    Ok(adj
        .iter_upper()
        .filter(|&(i, j, _)| i != j)
        .map(|(i, j, w)| {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            w * (dx * dx + dy * dy)
        })
        .sum())
}

/// `tr(g^T L g)`, the same quantity through the Laplacian.
pub fn laplacian_form(laplacian: &SparseSymMatrix, g: &Placement) -> Result<f64, MetricsError> {
    check(laplacian.n(), g.len())?;
    Axis::BOTH
        .iter()
        .map(|&a| {
            laplacian
                .quadratic_form(g.column(a))
                .map_err(|_| MetricsError::DimensionMismatch {
                    expected: laplacian.n(),
                    found: g.len(),
                })
        })
        .sum()
}

/// Raw quotient `g^T M g / g^T g`.
pub fn rayleigh_quotient(op: &SparseSymMatrix, column: &[f64]) -> Result<f64, MetricsError> {
    check(op.n(), column.len())?;
    let norm2: f64 = column.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(MetricsError::ZeroSignal);
    }
    let num = op.quadratic_form(column).expect("length checked");
    Ok(num / norm2)
}

/// Rayleigh quotient of the mean-centered column. Placements carry a large
/// constant offset (the region center), which centering removes.
pub fn rayleigh_smoothness(
    laplacian: &SparseSymMatrix,
    column: &[f64],
) -> Result<f64, MetricsError> {
    check(laplacian.n(), column.len())?;
    if column.is_empty() {
        return Err(MetricsError::ZeroSignal);
    }
    let mean = column.iter().sum::<f64>() / column.len() as f64;
    let centered: Vec<f64> = column.iter().map(|v| v - mean).collect();
    // Relative threshold: treat rounding residue of a constant as zero.
    let scale = column.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if centered.iter().all(|v| v.abs() <= 1e-12 * scale) {
        return Err(MetricsError::ZeroSignal);
    }
    rayleigh_quotient(laplacian, &centered)
}

/// Half-perimeter wirelength over absolute pin positions.
pub fn hpwl(design: &Design, g: &Placement) -> f64 {
    net_hpwls(design, g).sum()
}

pub(crate) fn net_hpwls<'a>(
    design: &'a Design,
    g: &'a Placement,
) -> impl Iterator<Item = f64> + 'a {
    design
        .nets()
        .iter()
        .filter(|n| n.pins.len() >= 2)
        .map(move |net| {
            let mut lo = (f64::INFINITY, f64::INFINITY);
            let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for p in &net.pins {
                let (cx, cy) = g.get(p.cell);
                let (px, py) = (cx + p.dx, cy + p.dy);
                lo = (lo.0.min(px), lo.1.min(py));
                hi = (hi.0.max(px), hi.1.max(py));
            }
            (hi.0 - lo.0) + (hi.1 - lo.1)
        })
}

/// Bin grid shape and target density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    /// Target fraction of each bin's area, in `(0, 1]`.
    pub target_density: f64,
}

impl GridConfig {
    /// The coarser of 128x128 and bins about eight average cells wide.
    pub fn for_design(design: &Design) -> Self {
        let movable: Vec<_> = design.cells().iter().filter(|c| !c.is_fixed()).collect();
        let pool: Vec<_> = if movable.is_empty() {
            design.cells().iter().collect()
        } else {
            movable
        };
        let n = pool.len().max(1) as f64;
        let avg_w = pool.iter().map(|c| c.width).sum::<f64>() / n;
        let avg_h = pool.iter().map(|c| c.height).sum::<f64>() / n;
        let r = design.region();
        let count = |span: f64, avg: f64| -> usize {
            if avg > 0.0 {
                ((span / (8.0 * avg)).round() as usize).clamp(1, 128)
            } else {
                128
            }
        };
        GridConfig {
            nx: count(r.width(), avg_w),
            ny: count(r.height(), avg_h),
            target_density: 1.0,
        }
    }
}

/// Per-bin occupied area over the region.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub ymin: f64,
    pub bin_w: f64,
    pub bin_h: f64,
    /// Row-major by `iy * nx + ix`, area units.
    pub rho: Vec<f64>,
    pub target_density: f64,
}

impl DensityGrid {
    pub fn bin_area(&self) -> f64 {
        self.bin_w * self.bin_h
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.rho[iy * self.nx + ix]
    }

    pub fn total(&self) -> f64 {
        self.rho.iter().sum()
    }

    /// Largest bin occupancy as a fraction of bin area.
    pub fn max_density(&self) -> f64 {
        self.rho.iter().fold(0.0f64, |m, &r| m.max(r)) / self.bin_area()
    }
}

/// Overlap of `[lo, hi]` with each bin of a 1-D grid. Returns the first bin
/// touched and the overlap lengths from there on.
pub(crate) fn axis_overlaps(
    lo: f64,
    hi: f64,
    origin: f64,
    bin: f64,
    nbins: usize,
) -> (usize, Vec<f64>) {
    if hi <= lo {
        return (0, Vec::new());
    }
    let first = (((lo - origin) / bin).floor().max(0.0) as usize).min(nbins - 1);
    let last = (((hi - origin) / bin).ceil().max(1.0) as usize).min(nbins) - 1;
    let mut out = Vec::with_capacity(last + 1 - first);
    for b in first..=last {
        let b0 = origin + b as f64 * bin;
        let b1 = b0 + bin;
        out.push((hi.min(b1) - lo.max(b0)).max(0.0));
    }
    (first, out)
}

/// Exact area of each cell rectangle (clipped to the region) per bin. Fixed
/// cells count toward occupancy.
pub fn density_map(design: &Design, g: &Placement, grid: &GridConfig) -> DensityGrid {
    let r = design.region();
    let nx = grid.nx.max(1);
    let ny = grid.ny.max(1);
    let bin_w = r.width() / nx as f64;
    let bin_h = r.height() / ny as f64;
    let mut rho = vec![0.0; nx * ny];
    for cell in design.cells() {
        let (cx, cy) = g.get(cell.id);
        let x0 = (cx - 0.5 * cell.width).max(r.xmin);
        let x1 = (cx + 0.5 * cell.width).min(r.xmax);
        let y0 = (cy - 0.5 * cell.height).max(r.ymin);
        let y1 = (cy + 0.5 * cell.height).min(r.ymax);
        let (fx, lx) = axis_overlaps(x0, x1, r.xmin, bin_w, nx);
        let (fy, ly) = axis_overlaps(y0, y1, r.ymin, bin_h, ny);
        for (dy, &oy) in ly.iter().enumerate() {
            for (dx, &ox) in lx.iter().enumerate() {
                rho[(fy + dy) * nx + fx + dx] += ox * oy;
            }
        }
    }
    DensityGrid {
        nx,
        ny,
        xmin: r.xmin,
        ymin: r.ymin,
        bin_w,
        bin_h,
        rho,
        target_density: grid.target_density,
    }
}

/// `sum_b max(0, rho_b - rho_t * bin_area) / sum_b rho_b`, in `[0, 1]`.
pub fn overflow(grid: &DensityGrid) -> f64 {
    let total = grid.total();
    if total <= 0.0 {
        return 0.0;
    }
    let cap = grid.target_density * grid.bin_area();
    grid.rho.iter().map(|&r| (r - cap).max(0.0)).sum::<f64>() / total
}

/// The `metrics report` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hpwl: f64,
    pub quadratic_wl: f64,
    pub rayleigh_x: Option<f64>,
    pub rayleigh_y: Option<f64>,
    pub overflow: f64,
    pub max_bin_density: f64,
}

pub fn report(
    design: &Design,
    adj: &SparseSymMatrix,
    g: &Placement,
    grid: &GridConfig,
) -> Result<MetricsReport, MetricsError> {
    let lap = graph::laplacian(adj);
    let density = density_map(design, g, grid);
    Ok(MetricsReport {
        hpwl: hpwl(design, g),
        quadratic_wl: quadratic_wirelength(adj, g)?,
        rayleigh_x: rayleigh_smoothness(&lap, g.x()).ok(),
        rayleigh_y: rayleigh_smoothness(&lap, g.y()).ok(),
        overflow: overflow(&density),
        max_bin_density: density.max_density(),
    })
}
