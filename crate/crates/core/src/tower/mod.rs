//! Tower experiments: error terms between levels, ball comparisons, effective
//! bounds and genus arithmetic.

pub mod bounds;
pub mod report;
pub mod stability;

pub use bounds::{
    effective_bound_rhs, genus_bookkeeping, termwise_ej_inequality, upper_bound_31,
    EffectiveBound, EffectiveInputs, GenusBookkeeping,
};
pub use report::{default_grid, run_tower_report, TowerExperiment, TowerReport, TowerRow, MAX_LEVELS};
pub use stability::{
    l2_difference_check, semicontinuity_check, semicontinuity_from, stability_error, ErrorIndexSet,
    L2Check, Semicontinuity, StabilityError,
};
