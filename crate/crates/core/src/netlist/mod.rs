//! In-memory design model: cells, nets and the placement region.
//!
//! Coordinates inside a [`Design`] are always cell centers. Bookshelf files
//! carry lower-left corners; the conversion lives in [`bookshelf`].

pub mod bookshelf;

use std::collections::HashMap;
use std::path::PathBuf;

use thiserror::Error;

pub use bookshelf::{
    format_placement, parse_design, read_placement, write_design, write_placement, BookshelfSources,
};

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("{file}:{line}: {reason} (in `{context}`)")]
    MalformedLine {
        file: String,
        line: usize,
        context: String,
        reason: String,
    },
    #[error("{file}:{line}: net `{net}` references undeclared cell `{cell}`")]
    DanglingPinReference {
        file: String,
        line: usize,
        net: String,
        cell: String,
    },
    #[error("{file}:{line}: unknown cell `{name}`")]
    UnknownCell {
        file: String,
        line: usize,
        name: String,
    },
    #[error("duplicate cell name `{0}`")]
    DuplicateCellName(String),
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{file}: header declares {declared} {what}, body has {found}")]
    CountMismatch {
        file: String,
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("fixed cell `{0}` has no location")]
    MissingFixedLocation(String),
    #[error("cell `{0}` has no location in the placement file")]
    MissingLocation(String),
    #[error("cell `{name}`: {reason}")]
    InvalidCell { name: String, reason: String },
    #[error("invalid placement region: {0}")]
    InvalidRegion(String),
    #[error("placement has {found} rows, design has {expected} cells")]
    PlacementSize { expected: usize, found: usize },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Movable,
    /// Terminal with a predetermined location (IO pad, macro).
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub kind: CellKind,
    /// Center coordinates; present exactly when `kind` is `Fixed`.
    pub fixed_pos: Option<(f64, f64)>,
}

impl Cell {
    pub fn movable(id: usize, name: impl Into<String>, width: f64, height: f64) -> Self {
        Cell {
            id,
            name: name.into(),
            width,
            height,
            kind: CellKind::Movable,
            fixed_pos: None,
        }
    }

    pub fn fixed(
        id: usize,
        name: impl Into<String>,
        width: f64,
        height: f64,
        center: (f64, f64),
    ) -> Self {
        Cell {
            id,
            name: name.into(),
            width,
            height,
            kind: CellKind::Fixed,
            fixed_pos: Some(center),
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.kind == CellKind::Fixed
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// One net pin: the owning cell and its offset from the cell center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub cell: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Pin {
    pub fn at_center(cell: usize) -> Self {
        Pin {
            cell,
            dx: 0.0,
            dy: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub id: usize,
    pub name: String,
    pub pins: Vec<Pin>,
}

/// A placement row from the `.scl` file. Parsed for completeness; the core
/// math only uses the overall region bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub y: f64,
    pub height: f64,
    pub site_width: f64,
    pub site_spacing: f64,
    pub x_origin: f64,
    pub num_sites: usize,
}

impl Row {
    pub fn x_end(&self) -> f64 {
        self.x_origin + self.num_sites as f64 * self.site_spacing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
    pub rows: Vec<Row>,
}

impl Region {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, NetlistError> {
        let region = Region {
            xmin,
            ymin,
            xmax,
            ymax,
            rows: Vec::new(),
        };
        region.validate()?;
        Ok(region)
    }

    fn validate(&self) -> Result<(), NetlistError> {
        let finite = [self.xmin, self.ymin, self.xmax, self.ymax]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.xmax <= self.xmin || self.ymax <= self.ymin {
            return Err(NetlistError::InvalidRegion(format!(
                "[{}, {}] x [{}, {}]",
                self.xmin, self.xmax, self.ymin, self.ymax
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Clamp a center coordinate so a `w`-wide cell stays inside `[lo, hi]`.
    /// Cells wider than the span are centered.
    pub(crate) fn clamp_center(lo: f64, hi: f64, w: f64, v: f64) -> f64 {
        let a = lo + 0.5 * w;
        let b = hi - 0.5 * w;
        if a > b {
            0.5 * (lo + hi)
        } else {
            v.clamp(a, b)
        }
    }

    /// Clamp a cell center so the cell lies inside the region.
    pub fn clamp_cell(&self, cell: &Cell, (x, y): (f64, f64)) -> (f64, f64) {
        (
            Self::clamp_center(self.xmin, self.xmax, cell.width, x),
            Self::clamp_center(self.ymin, self.ymax, cell.height, y),
        )
    }
}

/// Validated, immutable design. Cell ids are `0..N`, net ids `0..E`.
#[derive(Debug, Clone)]
pub struct Design {
    cells: Vec<Cell>,
    nets: Vec<Net>,
    region: Region,
    by_name: HashMap<String, usize>,
}

impl Design {
    pub fn new(cells: Vec<Cell>, nets: Vec<Net>, region: Region) -> Result<Self, NetlistError> {
        region.validate()?;
        let mut by_name = HashMap::with_capacity(cells.len());
        for (i, cell) in cells.iter().enumerate() {
            if cell.id != i {
                return Err(NetlistError::InvalidCell {
                    name: cell.name.clone(),
                    reason: format!("id {} out of sequence (expected {i})", cell.id),
                });
            }
            if !(cell.width > 0.0 && cell.height > 0.0)
                || !cell.width.is_finite()
                || !cell.height.is_finite()
            {
                return Err(NetlistError::InvalidCell {
                    name: cell.name.clone(),
                    reason: format!("non-positive size {} x {}", cell.width, cell.height),
                });
            }
            match (cell.kind, cell.fixed_pos) {
                (CellKind::Fixed, None) => {
                    return Err(NetlistError::MissingFixedLocation(cell.name.clone()))
                }
                (CellKind::Movable, Some(_)) => {
                    return Err(NetlistError::InvalidCell {
                        name: cell.name.clone(),
                        reason: "movable cell carries a fixed location".into(),
                    })
                }
                (CellKind::Fixed, Some((x, y))) if !(x.is_finite() && y.is_finite()) => {
                    return Err(NetlistError::InvalidCell {
                        name: cell.name.clone(),
                        reason: "non-finite fixed location".into(),
                    })
                }
                _ => {}
            }
            if by_name.insert(cell.name.clone(), i).is_some() {
                return Err(NetlistError::DuplicateCellName(cell.name.clone()));
            }
        }
        for (i, net) in nets.iter().enumerate() {
            if net.id != i {
                return Err(NetlistError::InvalidCell {
                    name: net.name.clone(),
                    reason: format!("net id {} out of sequence (expected {i})", net.id),
                });
            }
            for pin in &net.pins {
                if pin.cell >= cells.len() {
                    return Err(NetlistError::DanglingPinReference {
                        file: "<memory>".into(),
                        line: 0,
                        net: net.name.clone(),
                        cell: format!("#{}", pin.cell),
                    });
                }
            }
        }
        Ok(Design {
            cells,
            nets,
            region,
            by_name,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_nets(&self) -> usize {
        self.nets.len()
    }

    pub fn num_fixed(&self) -> usize {
        self.cells.iter().filter(|c| c.is_fixed()).count()
    }

    pub fn num_movable(&self) -> usize {
        self.num_cells() - self.num_fixed()
    }

    pub fn num_pins(&self) -> usize {
        self.nets.iter().map(|n| n.pins.len()).sum()
    }

    pub fn cell_id(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    /// Re-pin fixed cells to their locations and clamp movable cells into
    /// the region.
    pub fn legalize_bounds(&self, placement: &mut crate::Placement) {
        for cell in &self.cells {
            let p = match cell.fixed_pos {
                Some(pos) => pos,
                None => self.region.clamp_cell(cell, placement.get(cell.id)),
            };
            placement.set(cell.id, p);
        }
    }
}
