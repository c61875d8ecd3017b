//! The crossed product of the leg algebra `F` by `S_p x S_q`: twisted
//! multiplication, traces, compression, center and the trace inequality.

mod analysis;
mod group;
mod operator;

pub use analysis::{
    center_basis, compression_check, equivalence_criterion, tau_prime_dense, tau_prime_table, theta_average,
    trace_inequality_check, trace_tau_prime, twisted_trace, write_tau_prime_csv, CenterBasis, CompressionReport,
    NamedError, TauPrime, TauPrimeRow, TraceInequalityReport,
};
pub use group::{permutation_matrix, theta, ProductGroup, ProductGroupElement};
pub use operator::{
    cyclic_vector, f_embed, f_slots, implementing_unitary, right_regular, trace_vector, CrossedOperator,
};
