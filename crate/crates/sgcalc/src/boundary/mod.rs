//! Reduction of half-space boundary value problems to the boundary:
//! trace symbols of the parametrix (computed two independent ways),
//! assembly of the normalized Calderón-type system, and its
//! left-ellipticity margin.

pub mod apply;
pub mod contour;
pub mod ratfn;
pub mod symbol;
pub mod system;

pub use apply::{poisson_apply, transmission_apply, TransmissionConfig};
pub use contour::{ContourKind, ContourPath};
pub use ratfn::{extract_ratfn, RatFn};
pub use symbol::{
    assumption_a_audit, boundary_symbol_at, boundary_symbol_dual, boundary_symbol_table,
    plateau_guard, AssumptionAProfile, BoundarySymbolTable, BsMethod,
};
pub use system::{
    assemble_ptilde, left_elliptic_check, remainder_bound_audit, smallest_singular_value,
    BoundarySystem, LeftReport, PtildeTable, TailAuditReport, DEFAULT_LEFT_CMIN,
};
