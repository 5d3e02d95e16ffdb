//! Multi-frequency graph filter for initial placement.
//!
//! Movable cells start at the region center with Gaussian jitter, fixed
//! cells at their locations. The start signal is then smoothed by
//! `sum_t alpha_t * (A_sigma_t)^k_t`, where `A_sigma` is the normalized
//! adjacency with `sigma` self-loops. Small `sigma` and `k` keep local
//! detail; large ones keep only the global, low-frequency layout.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, FilterTerm, GraphError, SparseSymMatrix};
use crate::netlist::Design;
use crate::Placement;

/// High-, medium- and low-pass terms with weights 0.1, 0.7 and 0.2.
pub const DEFAULT_TERMS: [FilterTerm; 3] = [
    FilterTerm::new(2.0, 2, 0.1),
    FilterTerm::new(4.0, 2, 0.7),
    FilterTerm::new(4.0, 4, 0.2),
];

#[derive(Debug, Error)]
pub enum GiftError {
    #[error("filter has no terms")]
    EmptyFilter,
    #[error("jitter scale must be finite and >= 0, got {0}")]
    InvalidJitter(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiftConfig {
    pub terms: Vec<FilterTerm>,
    pub seed: u64,
    /// Standard deviation of the start jitter, in length units.
    pub jitter_scale: f64,
}

impl Default for GiftConfig {
    fn default() -> Self {
        GiftConfig {
            terms: DEFAULT_TERMS.to_vec(),
            seed: 1,
            jitter_scale: 1.0,
        }
    }
}

impl GiftConfig {
    pub fn validate(&self) -> Result<(), GiftError> {
        if self.terms.is_empty() {
            return Err(GiftError::EmptyFilter);
        }
        if !(self.jitter_scale.is_finite() && self.jitter_scale >= 0.0) {
            return Err(GiftError::InvalidJitter(self.jitter_scale));
        }
        for t in &self.terms {
            if t.k == 0 {
                return Err(GraphError::InvalidPower(0).into());
            }
            if !(t.sigma.is_finite() && t.sigma >= 0.0) {
                return Err(GraphError::InvalidSigma(t.sigma).into());
            }
        }
        Ok(())
    }
}

/// `{phase, seconds}` timing record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

impl PhaseTiming {
    pub fn new(phase: impl Into<String>, seconds: f64) -> Self {
        PhaseTiming {
            phase: phase.into(),
            seconds,
        }
    }
}

/// Region center plus `N(0, jitter^2)` per axis for movable cells; fixed
/// cells at their locations. Deterministic in `config.seed`.
pub fn initial_signal(design: &Design, config: &GiftConfig) -> Placement {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (cx, cy) = design.region().center();
    let mut g = Placement::zeros(design.num_cells());
    for cell in design.cells() {
        let pos = match cell.fixed_pos {
            Some(p) => p,
            None => {
                let zx: f64 = StandardNormal.sample(&mut rng);
                let zy: f64 = StandardNormal.sample(&mut rng);
                (cx + config.jitter_scale * zx, cy + config.jitter_scale * zy)
            }
        };
        g.set(cell.id, pos);
    }
    g
}

/// `sum_t alpha_t * (A_sigma_t)^k_t g`, column by column. Terms sharing a
/// `sigma` share one operator and one chain of products.
pub fn gift_filter(
    adj: &SparseSymMatrix,
    g: &Placement,
    terms: &[FilterTerm],
) -> Result<Placement, GiftError> {
    if terms.is_empty() {
        return Err(GiftError::EmptyFilter);
    }
    if g.len() != adj.n() {
        return Err(GraphError::DimensionMismatch {
            expected: adj.n(),
            found: g.len(),
        }
        .into());
    }
    // sigma bits -> (k -> A_sigma^k g)
    let mut powers: BTreeMap<u64, BTreeMap<u32, Placement>> = BTreeMap::new();
    for t in terms {
        if t.k == 0 {
            return Err(GraphError::InvalidPower(0).into());
        }
        powers
            .entry(t.sigma.to_bits())
            .or_default()
            .insert(t.k, Placement::zeros(0));
    }
    for (&bits, by_k) in powers.iter_mut() {
        let op = graph::normalized_augmented_adjacency(adj, f64::from_bits(bits))?;
        let mut cur = g.clone();
        let mut done = 0;
        for (&k, slot) in by_k.iter_mut() {
            cur = graph::apply_operator_power(&op, &cur, k - done)?;
            done = k;
            *slot = cur.clone();
        }
    }
    let mut out = Placement::zeros(g.len());
    for t in terms {
        let term = &powers[&t.sigma.to_bits()][&t.k];
        out = out.lin_comb(1.0, term, t.alpha);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct GiftRun {
    pub initial: Placement,
    pub placement: Placement,
    pub filter_seconds: f64,
}

impl GiftRun {
    pub fn timing(&self) -> PhaseTiming {
        PhaseTiming::new("filter", self.filter_seconds)
    }
}

/// Start signal, filter, re-pin fixed cells, clamp movable cells into the
/// region. The filter runs on coordinates relative to the region center.
pub fn gift_place(
    design: &Design,
    adj: &SparseSymMatrix,
    config: &GiftConfig,
) -> Result<GiftRun, GiftError> {
    config.validate()?;
    let initial = initial_signal(design, config);
    let (cx, cy) = design.region().center();
    let start = Instant::now();
    let mut placement =
        gift_filter(adj, &initial.translated(-cx, -cy), &config.terms)?.translated(cx, cy);
    let filter_seconds = start.elapsed().as_secs_f64();
    design.legalize_bounds(&mut placement);
    Ok(GiftRun {
        initial,
        placement,
        filter_seconds,
    })
}
