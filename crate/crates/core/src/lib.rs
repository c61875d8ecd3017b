//! A finite-N laboratory for Schur-Weyl duality of unitary groups acting on
//! tensor powers of `L^2(M_N, tr)` by left and right multiplication.
//!
//! The modules follow the constructions bottom-up:
//!
//! * [`symcomb`]: partitions, characters and dimensions of `S_p`.
//! * [`legops`]: symbolic operators on `L^2(M_N)^{(x) m}` (leg sandwiches and
//!   leg permutations) with a dense oracle.
//! * [`duality`]: mixed derivation operators, Young projections, Haar
//!   averages, conditional expectations and spectral binning.
//! * [`algebra`]: commutants, generated algebras and fixed-point algebras.
//! * [`crossed`]: the crossed product by `S_p x S_q`, its traces and center.
//! * [`runner`]: the experiment registry behind the `swlab` binary.

pub mod algebra;
pub mod crossed;
pub mod duality;
pub mod error;
pub mod legops;
pub mod linalg;
pub mod perm;
pub mod runner;
pub mod symcomb;

pub use error::{Error, Result};
