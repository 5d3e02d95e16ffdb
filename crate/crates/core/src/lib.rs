//! Graph-filter initial placement for analytical global placers.
//!
//! A netlist is expanded into a weighted clique graph, a random start is
//! smoothed by a sum of powered augmented normalized adjacency operators,
//! and the result seeds a small gradient-descent placer. The `spectral`
//! module holds the dense reference machinery used to check the filters.

pub mod bench;
pub mod gift;
pub mod graph;
pub mod metrics;
pub mod netlist;
mod placement;
pub mod placer;
pub mod spectral;

pub use graph::{FilterTerm, GraphError, SparseSymMatrix};
pub use netlist::{Design, NetlistError};
pub use placement::{Axis, Placement};
