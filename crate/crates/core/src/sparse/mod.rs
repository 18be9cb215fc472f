//! Sparse families, stopping-time constructions and domination checks.

mod construct;
mod domination;
mod family;

pub use construct::{fractional_sparse, fractional_sparse_with, oscillation_sparse};
pub use domination::{
    domination_ratio, fractional_maximal, sparse_bound_ratio, sparse_bound_rhs, sparse_operator,
    verify_fractional_domination, verify_fractional_domination_with, verify_oscillation_domination,
    verify_subcritical_tl_domination, verify_subcritical_tl_domination_with, DominationReport,
    DominatorForm, SparseMode,
};
pub use family::{sparsity_check, SparseFamily, SparseMember};

/// The stopping constant in every construction.
pub const STOPPING_THRESHOLD: f64 = 4.0;
