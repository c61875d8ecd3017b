//! Commutants, generated algebras, fixed-point algebras and the span-growth
//! form of the one-sided duality, on the tensor slots where operators act.

mod basis;
mod commutant;
mod fixed;
mod slots;

pub use basis::{AlgebraBasis, InertPart};
pub use commutant::{
    bicommutant_basis, commutant_basis, generated_algebra_dim, span_closure, ReducedGenerators, RANK_TOLERANCE,
    SLOT_TOLERANCE,
};
pub use fixed::{
    fixed_point_basis, fixed_point_dimension, group_span_dim, lr_representation, relative_gap, relative_gap_with,
    span_growth_check, GapMethod, RelativeGapReport, SpanGrowthReport, GAP_ALGEBRA_LIMIT, GRAM_TOLERANCE,
};
pub use slots::SlotLayout;
