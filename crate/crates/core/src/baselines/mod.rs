//! Reference algorithms and the disagreement objective.

mod brute;
mod cost;
mod dynamic_pivot;
mod pivot;
mod static_agreement;

pub use brute::{brute_force_opt, BRUTE_FORCE_MAX_NODES};
pub use cost::{cost, CostBreakdown};
pub use dynamic_pivot::{DynamicPivot, PivotCounters};
pub use pivot::{pivot, pivot_with_priorities, Priority};
pub use static_agreement::{singletons, static_agreement};
