use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::structured::StructuredOperator;
use crate::error::{Error, Result};
use crate::linalg::{c, random_vector, Vector, ONE};

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    /// Relative accuracy of the returned norm.
    pub tolerance: f64,
    /// Total number of `X* X` applications before giving up.
    pub max_iterations: usize,
    /// Krylov dimension before a restart from the best Ritz vector.
    pub restart: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { tolerance: 1e-10, max_iterations: 2000, restart: 48, seed: 0x6e6f726d }
    }
}

/// Largest singular value of `x`, from the top eigenvalue of `X* X`.
///
/// The power sequence `v, X*X v, (X*X)^2 v, ..` is orthogonalized into a
/// Krylov basis (Lanczos with full reorthogonalization) and the top Ritz
/// value is read off the tridiagonal projection; the iteration restarts from
/// the best Ritz vector to bound memory.
pub fn operator_norm(x: &StructuredOperator, tolerance: f64) -> Result<f64> {
    operator_norm_with(x, &NormOptions { tolerance, ..NormOptions::default() })
}

pub fn operator_norm_with(x: &StructuredOperator, opts: &NormOptions) -> Result<f64> {
    if x.is_symbolically_zero() {
        return Ok(0.0);
    }
    let xa = x.adjoint();
    let gram = |v: &Vector| -> Result<Vector> { xa.apply(&x.apply(v)?) };
    let dim = x.space().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = random_vector(dim, &mut rng);
    start /= c(start.norm());
    let kmax = opts.restart.max(2).min(dim);
    let mut used = 0usize;
    loop {
        let mut basis: Vec<Vector> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut best = (0.0f64, start.clone());
        for j in 0..kmax {
            let mut w = gram(&basis[j])?;
            used += 1;
            let alpha = basis[j].dotc(&w).re;
            alphas.push(alpha);
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&w);
                    w.axpy(-proj, b, ONE);
                }
            }
            let beta = w.norm();
            let k = alphas.len();
            let mut t = DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alphas[i];
                if i + 1 < k {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (top, theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            let y = eig.eigenvectors.column(top);
            let residual = beta * y[k - 1].abs();
            let mut ritz = Vector::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                ritz.axpy(c(y[i]), b, ONE);
            }
            best = (theta, ritz);
            let scale = theta.abs().max(f64::MIN_POSITIVE);
            if beta <= 1e-14 * scale.max(alpha.abs()) || residual <= opts.tolerance * scale {
                return Ok(theta.max(0.0).sqrt());
            }
            if used >= opts.max_iterations {
                return Err(Error::Numeric(format!(
                    "operator norm did not converge in {} iterations (residual {residual:e})",
                    opts.max_iterations
                )));
            }
            betas.push(beta);
            basis.push(w / c(beta));
        }
        let (_, ritz) = best;
        let nrm = ritz.norm();
        start = ritz / c(nrm);
    }
}
