//! The structured operator engine on `L^2(M_N, tr)^{(x) m}`.

mod dense;
mod norm;
mod space;
mod structured;

pub use dense::{read_vector, write_vector, DenseOperator, FlatHeader, DEFAULT_DENSE_CAP};
pub use norm::{operator_norm, operator_norm_with, NormOptions};
pub use space::ModelSpace;
pub use structured::{
    left_mult, permutation_op, right_mult, LegFactor, OperatorTerm, StructuredOperator, MERGE_TOLERANCE,
};
