use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tower::{conditional_expectation, SubfactorTower};
use crate::error::{argument, Result};
use crate::legops::{LegFactor, ModelSpace, OperatorTerm, StructuredOperator};
use crate::linalg::{c, haar_unitary, identity, kron, matrix_unit, ntrace, Mat, C64};


/// Which pair of leg actions is averaged: `l(u*) l(u)`, `r(u*) r(u)` or `l(u*) r(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    Ll,
    Rr,
    Lr,
}

/// Compact group integrated over, acting on one N x N leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragingGroup {
    /// All of U(N).
    Full,
    /// `U(2^k) (x) I` inside the tower.
    TowerLevel { tower: SubfactorTower, level: usize },
}

impl AveragingGroup {
    /// Size of the unitary block that is averaged.
    pub fn block(&self, n: usize) -> Result<usize> {
        match self {
            AveragingGroup::Full => Ok(n),
            AveragingGroup::TowerLevel { tower, level } => {
                tower.check(n, *level)?;
                Ok(1 << level)
            }
        }
    }

    /// Matrix units `e_ab (x) I` of the averaged block.
    pub fn units(&self, n: usize) -> Result<Vec<Vec<Mat>>> {
        let d = self.block(n)?;
        let rest = identity(n / d);
        Ok((0..d)
            .map(|a| (0..d).map(|b| kron(&matrix_unit(d, a, b), &rest)).collect())
            .collect())
    }

    /// `int u a u* du` over the group.
    pub fn expectation(&self, a: &Mat) -> Result<Mat> {
        match self {
            AveragingGroup::Full => Ok(identity(a.nrows()) * ntrace(a)),
            AveragingGroup::TowerLevel { tower, level } => conditional_expectation(tower, *level, a),
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Mat> {
        let d = self.block(n)?;
        let v = haar_unitary(d, rng);
        Ok(if d == n { v } else { kron(&v, &identity(n / d)) })
    }
}

/// Exact average of `k-leg(u*) . j-leg(u)` over U(N).
pub fn haar_pair_average_exact(space: &ModelSpace, k: usize, j: usize, mode: PairMode) -> Result<StructuredOperator> {
    haar_pair_average(space, &AveragingGroup::Full, k, j, mode)
}

/// Exact average of `k-leg(u*) . j-leg(u)` as `d^-1 sum_ab X_k(e_ab) Y_j(e_ba)`.
pub fn haar_pair_average(
    space: &ModelSpace,
    group: &AveragingGroup,
    k: usize,
    j: usize,
    mode: PairMode,
) -> Result<StructuredOperator> {
    space.check_leg(k)?;
    space.check_leg(j)?;
    if k == j {
        return Err(argument("pair average needs two distinct legs"));
    }
    let units = group.units(space.n())?;
    let d = units.len();
    let wrap = |m: &Mat, left: bool| if left { LegFactor::left(m.clone()) } else { LegFactor::right(m.clone()) };
    let (kl, jl) = match mode {
        PairMode::Ll => (true, true),
        PairMode::Rr => (false, false),
        PairMode::Lr => (true, false),
    };
    let mut terms = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut term = OperatorTerm::identity(space.legs());
            term.coefficient = c(1.0 / d as f64);
            term.factors[k] = wrap(&units[a][b], kl);
            term.factors[j] = wrap(&units[b][a], jl);
            terms.push(term);
        }
    }
    StructuredOperator::from_terms(*space, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarConfig {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl HaarConfig {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(argument("sample count must be positive"));
        }
        Ok(Self { samples, seed, workers: 8 })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// Empirical Haar mean with its standard error.
#[derive(Debug, Clone)]
pub struct McAverage {
    pub mean: Mat,
    /// Frobenius standard error of the mean, `sqrt(sum_entries var / n)`.
    pub std_error: f64,
    pub samples: usize,
    pub workers: usize,
}

impl McAverage {
    /// Frobenius distance to `exact` in units of the standard error.
    pub fn z_score(&self, exact: &Mat) -> f64 {
        let dist = (&self.mean - exact).norm();
        if self.std_error == 0.0 {
            if dist == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            dist / self.std_error
        }
    }
}

/// Monte Carlo mean of `f(u)` over Haar-distributed `u` in `group`.
///
/// The budget is split over `config.workers` independent ChaCha streams and the
/// partial sums are reduced in worker order, so the result only depends on the
/// seed and the worker count.
pub fn haar_average_mc<F>(
    space: &ModelSpace,
    group: &AveragingGroup,
    f: F,
    config: &HaarConfig,
) -> Result<McAverage>
where
    F: Fn(&Mat) -> Result<StructuredOperator> + Sync,
{
    let n = space.n();
    let dim = space.dim();
    let workers = config.workers.max(1).min(config.samples);
    let partials: Vec<Result<(Mat, f64)>> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let share = config.samples / workers + usize::from(w < config.samples % workers);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(w as u64 + 1);
            let mut sum = Mat::zeros(dim, dim);
            let mut sq = 0.0;
            for _ in 0..share {
                let u = group.sample(n, &mut rng)?;
                let x = f(&u)?.to_dense()?.into_matrix();
                sq += x.norm_squared();
                sum += x;
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum = Mat::zeros(dim, dim);
    let mut sq = 0.0;
    for part in partials {
        let (s, q) = part?;
        sum += s;
        sq += q;
    }
    let count = config.samples as f64;
    let mean = sum / C64::new(count, 0.0);
    let total_var = if config.samples > 1 {
        ((sq - count * mean.norm_squared()) / (count - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McAverage { mean, std_error: (total_var / count).sqrt(), samples: config.samples, workers })
}

