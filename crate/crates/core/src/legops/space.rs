use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// The model space `L^2(M_N, tr)^{(x) p} (x) L^2(M_N, tr)^{(x) q}`.
///
/// Each leg is the space of `N x N` matrices; legs `0..p` are the left legs
/// and `p..p+q` the right legs. Vectors are stored row-major with leg 0 most
/// significant and, inside a leg, the row index before the column index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpace {
    n: usize,
    p: usize,
    q: usize,
}

impl ModelSpace {
    pub fn new(n: usize, p: usize, q: usize) -> Result<Self> {
        if n < 2 {
            return Err(argument(format!("leg size N = {n} must be at least 2")));
        }
        if p + q == 0 {
            return Err(argument("model space needs at least one leg"));
        }
        let legs = p + q;
        let dim = (n * n).checked_pow(legs as u32);
        if dim.is_none() {
            return Err(argument(format!("dimension N^(2m) overflows for N = {n}, m = {legs}")));
        }
        Ok(ModelSpace { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn legs(&self) -> usize {
        self.p + self.q
    }

    /// `N^2`, the dimension of one leg.
    pub fn leg_dim(&self) -> usize {
        self.n * self.n
    }

    /// `N^(2m)`.
    pub fn dim(&self) -> usize {
        self.leg_dim().pow(self.legs() as u32)
    }

    pub fn is_left_leg(&self, k: usize) -> bool {
        k < self.p
    }

    pub fn check_leg(&self, k: usize) -> Result<()> {
        if k >= self.legs() {
            return Err(Error::LegOutOfRange { leg: k, legs: self.legs() });
        }
        Ok(())
    }

    pub fn ensure_same(&self, other: &ModelSpace) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch { left: self.to_string(), right: other.to_string() });
        }
        Ok(())
    }

    /// Stride of leg `k` in the flat vector index.
    pub fn leg_stride(&self, k: usize) -> usize {
        self.leg_dim().pow((self.legs() - 1 - k) as u32)
    }

    /// Index map of the leg permutation: `P(sigma) e_i = e_{map[i]}`, where
    /// the content of leg `k` moves to leg `sigma(k)`.
    pub fn permutation_index_map(&self, sigma: &crate::perm::Perm) -> Vec<usize> {
        let legs = self.legs();
        let ld = self.leg_dim();
        let strides: Vec<usize> = (0..legs).map(|k| self.leg_stride(k)).collect();
        (0..self.dim())
            .map(|idx| {
                (0..legs)
                    .map(|k| ((idx / strides[k]) % ld) * strides[sigma.apply(k)])
                    .sum()
            })
            .collect()
    }
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelSpace(N={}, p={}, q={})", self.n, self.p, self.q)
    }
}
