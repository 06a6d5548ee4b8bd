//! Cellwise polynomial fields on box grids: jumps, traces, norms and
//! pairings.

mod domain;
mod field;
mod jumps;
mod norms;

pub use domain::{BoxDomain, Facet, FacetKind};
pub(crate) use field::facet_cells;
pub use field::{
    BoundaryData, CellwiseField, PiecewiseAffineField, PiecewiseConstantField, Sbv2Field, ValueShape,
    DEFAULT_JUMP_TOLERANCE,
};
pub use jumps::{
    canonical_orientation, facet_jumps, gauss_green_residual, jump_set, total_jump_mass, trace_boundary, BoundaryTrace,
    JumpFacet,
};
pub use norms::{l1_distance, l1_norm, monomial_battery, weak_star_pairing, Monomial, Polynomial};
