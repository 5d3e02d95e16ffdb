//! A small analytical global placer: log-sum-exp wirelength plus a
//! quadratic bin-density penalty, minimized by projected gradient descent
//! with a density weight that grows geometrically every iteration.
//!
//! This is not a competitive placer. It exists to count iterations from
//! different starting points under one fixed configuration.

use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, GridConfig};
use crate::netlist::Design;
use crate::{Axis, Placement};

/// Minimum width, in bins per axis, of a cell's density footprint.
pub const FOOTPRINT_BINS: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum PlacerError {
    #[error("objective became non-finite at iteration {iter}; step {step:e} is too large")]
    DivergenceDetected { iter: usize, step: f64 },
    #[error("invalid placer config: {0}")]
    InvalidConfig(String),
    #[error("placement has {found} cells, design has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacerConfig {
    pub gamma: f64,
    /// Initial density weight relative to the gradient balance at the start:
    /// the run begins at `lambda0 * |grad WL|_1 / |grad D|_1`.
    pub lambda0: f64,
    pub lambda_growth: f64,
    /// Root-mean-square move per step in length units; picked by
    /// backtracking on the first step when unset.
    pub step: Option<f64>,
    pub max_iters: usize,
    pub stop_overflow: f64,
    /// Bins for the overflow stop test.
    pub grid: GridConfig,
    /// The density penalty uses `grid` split this many times per axis.
    pub penalty_refine: usize,
    pub seed: u64,
}

impl PlacerConfig {
    pub fn for_design(design: &Design) -> Self {
        let grid = GridConfig::for_design(design);
        let r = design.region();
        PlacerConfig {
            gamma: 0.01 * r.width(),
            lambda0: 0.03,
            lambda_growth: 1.02,
            step: None,
            max_iters: 1000,
            stop_overflow: 0.15,
            grid,
            penalty_refine: 4,
            seed: 1,
        }
    }

    /// Grid the density penalty is evaluated on.
    pub fn penalty_grid(&self) -> GridConfig {
        GridConfig {
            nx: self.grid.nx * self.penalty_refine,
            ny: self.grid.ny * self.penalty_refine,
            ..self.grid
        }
    }

    pub fn validate(&self) -> Result<(), PlacerError> {
        let bad = |m: String| Err(PlacerError::InvalidConfig(m));
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return bad(format!("lambda0 must be >= 0, got {}", self.lambda0));
        }
        if !(self.lambda_growth.is_finite() && self.lambda_growth >= 1.0) {
            return bad(format!(
                "lambda_growth must be >= 1, got {}",
                self.lambda_growth
            ));
        }
        if let Some(s) = self.step {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("step must be > 0, got {s}"));
            }
        }
        if !(self.stop_overflow > 0.0 && self.stop_overflow < 1.0) {
            return bad(format!(
                "stop_overflow must be in (0, 1), got {}",
                self.stop_overflow
            ));
        }
        if self.penalty_refine == 0 {
            return bad("penalty_refine must be >= 1".into());
        }
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return bad("grid needs at least one bin per axis".into());
        }
        if !(self.grid.target_density.is_finite() && self.grid.target_density > 0.0) {
            return bad(format!(
                "target density must be > 0, got {}",
                self.grid.target_density
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub wl: f64,
    pub hpwl: f64,
    pub overflow: f64,
    pub lambda: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacerTrace {
    pub records: Vec<TraceRecord>,
    pub stop: StopReason,
    /// Learning rate actually used.
    pub step: f64,
}

impl PlacerTrace {
    /// Optimizer steps taken.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("trace always holds the starting record")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iter,wl,hpwl,overflow,lambda,seconds")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.9e},{:.9e},{:.9e},{:.9e},{:.6}",
                r.iter, r.wl, r.hpwl, r.overflow, r.lambda, r.seconds
            )?;
        }
        Ok(())
    }
}

fn zero_fixed(design: &Design, grad: &mut Placement) {
    for c in design.cells().iter().filter(|c| c.is_fixed()) {
        grad.set(c.id, (0.0, 0.0));
    }
}

/// Log-sum-exp wirelength `gamma * (log sum e^{x/gamma} + log sum e^{-x/gamma})`
/// over every net and both axes, with its exact gradient. Fixed cells get
/// zero gradient.
pub fn smooth_wirelength_grad(design: &Design, g: &Placement, gamma: f64) -> (f64, Placement) {
    assert!(gamma > 0.0, "gamma must be positive");
    let mut grad = Placement::zeros(design.num_cells());
    let mut value = 0.0;
    let mut pos = Vec::new();
    let mut wplus = Vec::new();
    let mut wminus = Vec::new();
    for axis in Axis::BOTH {
        let coords = g.column(axis);
        for net in design.nets() {
            if net.pins.len() < 2 {
                continue;
            }
            pos.clear();
            pos.extend(net.pins.iter().map(|p| {
                coords[p.cell]
                    + match axis {
                        Axis::X => p.dx,
                        Axis::Y => p.dy,
                    }
            }));
            let hi = pos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = pos.iter().copied().fold(f64::INFINITY, f64::min);
            wplus.clear();
            wplus.extend(pos.iter().map(|&p| ((p - hi) / gamma).exp()));
            wminus.clear();
            wminus.extend(pos.iter().map(|&p| ((lo - p) / gamma).exp()));
            let sp: f64 = wplus.iter().sum();
            let sm: f64 = wminus.iter().sum();
            value += (hi - lo) + gamma * (sp.ln() + sm.ln());
            let col = grad.column_mut(axis);
            for (k, p) in net.pins.iter().enumerate() {
                col[p.cell] += wplus[k] / sp - wminus[k] / sm;
            }
        }
    }
    zero_fixed(design, &mut grad);
    (value, grad)
}

/// Density-penalty footprint of one cell along one axis: center, half
/// extent, and the factor that keeps its area unchanged.
fn footprint(center: f64, size: f64, bin: f64) -> (f64, f64, f64) {
    let w = size.max(FOOTPRINT_BINS * bin);
    (center, 0.5 * w, size / w)
}

/// Overlap of `[c - h, c + h]` with each bin, together with its derivative
/// in `c`. The outermost bins extend to infinity.
fn overlaps_with_slope(
    c: f64,
    h: f64,
    origin: f64,
    bin: f64,
    nbins: usize,
) -> (usize, Vec<f64>, Vec<f64>) {
    let (lo, hi) = (c - h, c + h);
    let first = (((lo - origin) / bin).floor().max(0.0) as usize).min(nbins - 1);
    let last = (((hi - origin) / bin).ceil().max(1.0) as usize).min(nbins) - 1;
    let mut lens = Vec::with_capacity(last + 1 - first);
    let mut slopes = Vec::with_capacity(last + 1 - first);
    for b in first..=last {
        let b0 = if b == 0 {
            f64::NEG_INFINITY
        } else {
            origin + b as f64 * bin
        };
        let b1 = if b + 1 == nbins {
            f64::INFINITY
        } else {
            origin + (b + 1) as f64 * bin
        };
        let len = (hi.min(b1) - lo.max(b0)).max(0.0);
        let slope = if len > 0.0 {
            f64::from(u8::from(hi < b1)) - f64::from(u8::from(lo > b0))
        } else {
            0.0
        };
        lens.push(len);
        slopes.push(slope);
    }
    (first, lens, slopes)
}

/// Penalty density map: every cell spread over a footprint at least
/// `FOOTPRINT_BINS` bins wide, scaled to keep its area.
fn smoothed_density(design: &Design, g: &Placement, grid: &GridConfig) -> (Vec<f64>, f64, f64) {
    let r = design.region();
    let (nx, ny) = (grid.nx, grid.ny);
    let bin_w = r.width() / nx as f64;
    let bin_h = r.height() / ny as f64;
    let mut rho = vec![0.0; nx * ny];
    for cell in design.cells() {
        let (cx, cy) = g.get(cell.id);
        let (_, hx, sx) = footprint(cx, cell.width, bin_w);
        let (_, hy, sy) = footprint(cy, cell.height, bin_h);
        let (fx, lx, _) = overlaps_with_slope(cx, hx, r.xmin, bin_w, nx);
        let (fy, ly, _) = overlaps_with_slope(cy, hy, r.ymin, bin_h, ny);
        for (dy, &oy) in ly.iter().enumerate() {
            for (dx, &ox) in lx.iter().enumerate() {
                rho[(fy + dy) * nx + fx + dx] += sx * sy * ox * oy;
            }
        }
    }
    (rho, bin_w, bin_h)
}

/// `sum_b max(0, rho_b - target * bin_area)^2` over the penalty density map,
/// with the gradient from each cell's piecewise-constant overlap slopes.
/// Fixed cells contribute density but get zero gradient.
pub fn density_penalty_grad(design: &Design, g: &Placement, grid: &GridConfig) -> (f64, Placement) {
    let r = design.region();
    let (nx, ny) = (grid.nx.max(1), grid.ny.max(1));
    let grid = GridConfig { nx, ny, ..*grid };
    let (rho, bin_w, bin_h) = smoothed_density(design, g, &grid);
    let cap = grid.target_density * bin_w * bin_h;
    let excess: Vec<f64> = rho.iter().map(|&p| (p - cap).max(0.0)).collect();
    let value = excess.iter().map(|e| e * e).sum();

    let mut grad = Placement::zeros(design.num_cells());
    for cell in design.cells().iter().filter(|c| !c.is_fixed()) {
        let (cx, cy) = g.get(cell.id);
        let (_, hx, sx) = footprint(cx, cell.width, bin_w);
        let (_, hy, sy) = footprint(cy, cell.height, bin_h);
        let (fx, lx, tx) = overlaps_with_slope(cx, hx, r.xmin, bin_w, nx);
        let (fy, ly, ty) = overlaps_with_slope(cy, hy, r.ymin, bin_h, ny);
        let (mut gx, mut gy) = (0.0, 0.0);
        for dy in 0..ly.len() {
            for dx in 0..lx.len() {
                let e = excess[(fy + dy) * nx + fx + dx];
                if e > 0.0 {
                    gx += 2.0 * e * tx[dx] * ly[dy];
                    gy += 2.0 * e * lx[dx] * ty[dy];
                }
            }
        }
        grad.set(cell.id, (sx * sy * gx, sx * sy * gy));
    }
    (value, grad)
}

fn clamp_movable(design: &Design, g: &mut Placement) {
    design.legalize_bounds(g);
}

fn exact_overflow(design: &Design, g: &Placement, grid: &GridConfig) -> f64 {
    metrics::overflow(&metrics::density_map(design, g, grid))
}

struct Objective<'a> {
    design: &'a Design,
    config: &'a PlacerConfig,
}

impl Objective<'_> {
    fn value(&self, g: &Placement, lambda: f64) -> f64 {
        let (wl, _) = smooth_wirelength_grad(self.design, g, self.config.gamma);
        let (d, _) = density_penalty_grad(self.design, g, &self.pgrid());
        wl + lambda * d
    }

    fn pgrid(&self) -> GridConfig {
        self.config.penalty_grid()
    }

    fn grad(&self, g: &Placement, lambda: f64) -> (f64, Placement) {
        let (wl, gw) = smooth_wirelength_grad(self.design, g, self.config.gamma);
        let (d, gd) = density_penalty_grad(self.design, g, &self.pgrid());
        (wl + lambda * d, gw.lin_comb(1.0, &gd, lambda))
    }

    /// Step along `-grad` scaled so the root-mean-square move of a movable
    /// cell equals `step`, then clamp into the region.
    fn descend(&self, g: &Placement, grad: &Placement, step: f64) -> Placement {
        let (mut ss, mut n) = (0.0, 0usize);
        for c in self.design.cells().iter().filter(|c| !c.is_fixed()) {
            let (gx, gy) = grad.get(c.id);
            ss += gx * gx + gy * gy;
            n += 1;
        }
        let rms = (ss / (2.0 * n.max(1) as f64)).sqrt();
        if rms == 0.0 || !rms.is_finite() {
            return g.clone();
        }
        let mut next = g.lin_comb(1.0, grad, -step / rms);
        clamp_movable(self.design, &mut next);
        next
    }

    /// Largest step of the form `s0 / 2^k` that lowers the objective, with
    /// `s0` an eighth of a penalty bin.
    fn backtrack(&self, g: &Placement, lambda: f64) -> f64 {
        let (f0, grad) = self.grad(g, lambda);
        let r = self.design.region();
        let pg = self.pgrid();
        let mut step = 0.125 * (r.width() / pg.nx as f64).min(r.height() / pg.ny as f64);
        for _ in 0..60 {
            let f = self.value(&self.descend(g, &grad, step), lambda);
            if f < f0 {
                break;
            }
            step *= 0.5;
        }
        step
    }

    /// Density weight that balances the two gradients at `g`:
    /// `scale * |grad WL|_1 / |grad D|_1`.
    fn balanced_lambda(&self, g: &Placement, scale: f64) -> f64 {
        let (_, gw) = smooth_wirelength_grad(self.design, g, self.config.gamma);
        let (_, gd) = density_penalty_grad(self.design, g, &self.pgrid());
        let l1 = |p: &Placement| p.x().iter().chain(p.y()).map(|v| v.abs()).sum::<f64>();
        let (a, b) = (l1(&gw), l1(&gd));
        if a > 0.0 && b > 0.0 {
            scale * a / b
        } else {
            scale
        }
    }
}

/// Projected gradient descent from `g0`. Record 0 of the trace is the start;
/// each following record is one optimizer step.
pub fn run_placer(
    design: &Design,
    g0: &Placement,
    config: &PlacerConfig,
) -> Result<(Placement, PlacerTrace), PlacerError> {
    config.validate()?;
    if g0.len() != design.num_cells() {
        return Err(PlacerError::DimensionMismatch {
            expected: design.num_cells(),
            found: g0.len(),
        });
    }
    let obj = Objective { design, config };
    let start = Instant::now();
    let mut g = g0.clone();
    let mut lambda = obj.balanced_lambda(&g, config.lambda0);
    let record = |iter: usize, g: &Placement, lambda: f64| TraceRecord {
        iter,
        wl: smooth_wirelength_grad(design, g, config.gamma).0,
        hpwl: metrics::hpwl(design, g),
        overflow: exact_overflow(design, g, &config.grid),
        lambda,
        seconds: start.elapsed().as_secs_f64(),
    };

    let mut records = vec![record(0, &g, lambda)];
    if records[0].overflow <= config.stop_overflow {
        return Ok((
            g,
            PlacerTrace {
                records,
                stop: StopReason::Converged,
                step: config.step.unwrap_or(0.0),
            },
        ));
    }
    let step = match config.step {
        Some(s) => s,
        None => obj.backtrack(&g, lambda),
    };
    log::debug!("placer step {step:e}, lambda0 {lambda:e}");

    let mut stop = StopReason::BudgetExhausted;
    for iter in 1..=config.max_iters {
        let (f, grad) = obj.grad(&g, lambda);
        if !f.is_finite() || !g.is_finite() {
            return Err(PlacerError::DivergenceDetected { iter, step });
        }
        g = obj.descend(&g, &grad, step);
        if !g.is_finite() {
            return Err(PlacerError::DivergenceDetected { iter, step });
        }
        lambda *= config.lambda_growth;
        let rec = record(iter, &g, lambda);
        if !rec.wl.is_finite() {
            return Err(PlacerError::DivergenceDetected { iter, step });
        }
        records.push(rec);
        if rec.overflow <= config.stop_overflow {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok((
        g,
        PlacerTrace {
            records,
            stop,
            step,
        },
    ))
}
