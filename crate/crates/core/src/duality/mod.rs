//! Mixed derivation operators, Young projections, Haar averaging, the
//! conditional-expectation tower, the cross-term residual and spectral binning.

mod haar;
mod mixed;
mod sigma;
mod spectral;
mod tower;

pub use haar::{
    haar_average_mc, haar_pair_average, haar_pair_average_exact, AveragingGroup, HaarConfig,
    McAverage, PairMode,
};
pub use mixed::{t_minus, t_mixed, t_plus, young_projection, young_projections, Side};
pub use sigma::{exact_tt_average, limit_formula_check, sigma_residual, LimitFormulaReport};
pub use spectral::{dyadic_witness, spectral_binning, DyadicWitness, SpectralBinning, SpectralGrid};
pub use tower::{conditional_expectation, SubfactorTower};
