use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::linalg::{identity, kron, Mat, C64};

/// `M_N = M_{2^levels} (x) M_complement`, the first factor being a product of
/// commuting copies of `M_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubfactorTower {
    levels: usize,
    complement: usize,
}

impl SubfactorTower {
    pub fn new(levels: usize, complement: usize) -> Result<Self> {
        if complement == 0 || levels >= usize::BITS as usize - 1 {
            return Err(argument("invalid tower shape"));
        }
        Ok(Self { levels, complement })
    }

    /// Tallest tower inside `M_n`.
    pub fn for_size(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(argument("empty matrix size"));
        }
        let levels = n.trailing_zeros() as usize;
        Self::new(levels, n >> levels)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn complement(&self) -> usize {
        self.complement
    }

    pub fn n(&self) -> usize {
        (1 << self.levels) * self.complement
    }

    pub(crate) fn check(&self, n: usize, level: usize) -> Result<()> {
        if n != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: n });
        }
        if level > self.levels {
            return Err(argument(format!("tower level {level} exceeds {}", self.levels)));
        }
        Ok(())
    }

    /// `r (x) I` with `r` acting on the first `level` copies of `M_2`.
    pub fn embed_lower(&self, level: usize, r: &Mat) -> Result<Mat> {
        self.check(self.n(), level)?;
        let d = 1 << level;
        if r.nrows() != d || r.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.nrows() });
        }
        Ok(kron(r, &identity(self.n() / d)))
    }

    /// `I (x) b`, an element of the relative commutant of level `level`.
    pub fn embed_upper(&self, level: usize, b: &Mat) -> Result<Mat> {
        self.check(self.n(), level)?;
        let d = 1 << level;
        let rest = self.n() / d;
        if b.nrows() != rest || b.ncols() != rest {
            return Err(Error::DimensionMismatch { expected: rest, got: b.nrows() });
        }
        Ok(kron(&identity(d), b))
    }
}

/// `E_k(a) = I_{2^k} (x) (normalized partial trace of a over M_{2^k})`.
pub fn conditional_expectation(tower: &SubfactorTower, level: usize, a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    tower.check(n, level)?;
    let d = 1 << level;
    let rest = n / d;
    let mut reduced = Mat::zeros(rest, rest);
    for i in 0..d {
        reduced += a.view((i * rest, i * rest), (rest, rest));
    }
    reduced /= C64::new(d as f64, 0.0);
    Ok(kron(&identity(d), &reduced))
}
