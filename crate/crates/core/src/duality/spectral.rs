use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::tower::SubfactorTower;
use crate::error::{argument, Result};
use crate::linalg::{c, is_hermitian, max_abs, Mat, ZERO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub lower: f64,
    pub upper: f64,
    pub epsilon: f64,
    /// `a_1 < ... < a_M` with `a_1 = lower` and `a_M > upper`.
    pub cuts: Vec<f64>,
    /// One representative per bin `[a_i, a_{i+1})`.
    pub representatives: Vec<f64>,
}

impl SpectralGrid {
    pub fn bins(&self) -> usize {
        self.cuts.len() - 1
    }

    pub fn mesh(&self) -> f64 {
        self.cuts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn bin_of(&self, x: f64) -> usize {
        let h = self.cuts[1] - self.cuts[0];
        (((x - self.lower) / h).floor().max(0.0) as usize).min(self.bins() - 1)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralBinning {
    pub approximation: Mat,
    pub grid: SpectralGrid,
    /// Spectral projections of the bins, pairwise orthogonal and summing to I.
    pub projections: Vec<Mat>,
    pub ranks: Vec<usize>,
    /// Eigenvector unitary, columns grouped bin by bin.
    pub eigenvectors: Mat,
}

/// Replaces every eigenvalue by the mean eigenvalue of its bin on a grid of mesh < eps.
pub fn spectral_binning(a: &Mat, epsilon: f64) -> Result<SpectralBinning> {
    if !(epsilon > 0.0) {
        return Err(argument("epsilon must be positive"));
    }
    if a.nrows() != a.ncols() || a.nrows() == 0 || !is_hermitian(a, 1e-10) {
        return Err(argument("matrix is not Hermitian within 1e-10"));
    }
    let n = a.nrows();
    let herm = (a + a.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let (lower, upper) = (values[0], values[n - 1]);

    let bins = ((upper - lower) / epsilon).floor() as usize + 1;
    let h = ((upper - lower) / bins as f64 + epsilon) / 2.0;
    let cuts: Vec<f64> = (0..=bins).map(|i| lower + i as f64 * h).collect();
    let mut grid = SpectralGrid { lower, upper, epsilon, cuts, representatives: Vec::new() };

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); bins];
    for (pos, &x) in values.iter().enumerate() {
        members[grid.bin_of(x)].push(pos);
    }
    grid.representatives = members
        .iter()
        .enumerate()
        .map(|(b, idx)| {
            if idx.is_empty() {
                (grid.cuts[b] + grid.cuts[b + 1]) / 2.0
            } else {
                idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
            }
        })
        .collect();

    let mut vectors = Mat::zeros(n, n);
    for (pos, &i) in order.iter().enumerate() {
        vectors.set_column(pos, &eig.eigenvectors.column(i));
    }
    let mut approximation = Mat::zeros(n, n);
    let mut projections = Vec::with_capacity(bins);
    for (b, idx) in members.iter().enumerate() {
        let mut proj = Mat::from_element(n, n, ZERO);
        for &pos in idx {
            let v = vectors.column(pos);
            proj += v * v.adjoint();
        }
        approximation += &proj * c(grid.representatives[b]);
        projections.push(proj);
    }
    let ranks = members.iter().map(Vec::len).collect();
    Ok(SpectralBinning { approximation, grid, projections, ranks, eigenvectors: vectors })
}

#[derive(Debug, Clone)]
pub enum DyadicWitness {
    /// `u E_i u*` is a diagonal projection of `M_{2^levels} (x) I`.
    Realizable { unitary: Mat, traces: Vec<f64>, max_error: f64 },
    NotRealizable { reason: String },
}

/// Tries to move the bin projections into the dyadic subalgebra of the tower.
pub fn dyadic_witness(binning: &SpectralBinning, tower: &SubfactorTower) -> DyadicWitness {
    let n = binning.eigenvectors.nrows();
    if tower.n() != n {
        return DyadicWitness::NotRealizable { reason: format!("tower size {} differs from {n}", tower.n()) };
    }
    let k = tower.complement();
    if let Some(r) = binning.ranks.iter().find(|&&r| r % k != 0) {
        return DyadicWitness::NotRealizable {
            reason: format!("not dyadically realizable at this N: rank {r} is not a multiple of {k}"),
        };
    }
    // eigenvector columns are already grouped by bin, so u* sends bin i to a
    // run of consecutive basis vectors whose length is a multiple of k
    let unitary = binning.eigenvectors.adjoint();
    let mut start = 0;
    let mut max_error: f64 = 0.0;
    let mut traces = Vec::with_capacity(binning.ranks.len());
    for (proj, &r) in binning.projections.iter().zip(&binning.ranks) {
        let mut target = Mat::zeros(n, n);
        for i in start..start + r {
            target[(i, i)] = c(1.0);
        }
        start += r;
        let moved = &unitary * proj * unitary.adjoint();
        max_error = max_error.max(max_abs(&(moved - target)));
        traces.push(r as f64 / n as f64);
    }
    DyadicWitness::Realizable { unitary, traces, max_error }
}
