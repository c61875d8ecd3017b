//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Matrix unit `e_{ij}` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Kronecker product with the first factor most significant.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Normalized trace `Tr(a)/n`.
pub fn ntrace(a: &Mat) -> C64 {
    a.trace() / c(a.nrows() as f64)
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn is_hermitian(a: &Mat, tol: f64) -> bool {
    a.is_square() && max_abs(&(a - a.adjoint())) <= tol
}

pub fn is_unitary(u: &Mat, tol: f64) -> bool {
    u.is_square() && max_abs(&(u.adjoint() * u - identity(u.nrows()))) <= tol
}

/// Operator norm of a small dense matrix (largest singular value).
pub fn spectral_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    Mat::from_fn(n, n, |_, _| gaussian(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(n, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the diagonal of `R`
/// rotated to the positive reals.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix from the GUE-like ensemble `(G + G*)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let g = ginibre(n, rng);
    (&g + g.adjoint()) * c(0.5)
}

/// Null space of a linear map given as a stream of row blocks over `ncols`
/// unknowns.
///
/// Row blocks are folded into an `ncols x ncols` triangular factor by
/// repeated QR, so memory stays `O(ncols^2)` however many constraints are
/// supplied. A direction is null when its singular value is at most
/// `rel_tol` times the largest one. Returns an `ncols x k` orthonormal basis.
pub struct NullSpaceAccumulator {
    r: Mat,
}

impl NullSpaceAccumulator {
    pub fn new(ncols: usize) -> Self {
        NullSpaceAccumulator { r: Mat::zeros(ncols, ncols) }
    }

    pub fn ncols(&self) -> usize {
        self.r.ncols()
    }

    pub fn push(&mut self, block: &Mat) {
        assert_eq!(block.ncols(), self.ncols());
        if block.nrows() == 0 || self.ncols() == 0 {
            return;
        }
        let n = self.ncols();
        let mut stacked = Mat::zeros(n + block.nrows(), n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&self.r);
        stacked.view_mut((n, 0), (block.nrows(), n)).copy_from(block);
        let r = stacked.qr().r();
        self.r.fill(ZERO);
        let rows = r.nrows().min(n);
        self.r.view_mut((0, 0), (rows, n)).copy_from(&r.rows(0, rows));
    }

    pub fn finish(self, rel_tol: f64) -> Mat {
        self.finish_with_scale(rel_tol, 0.0)
    }

    /// Like [`finish`](Self::finish) but the cutoff is `rel_tol * max(sigma_max, scale)`,
    /// so constraints that are all numerically zero relative to `scale` are ignored.
    pub fn finish_with_scale(self, rel_tol: f64, scale: f64) -> Mat {
        let n = self.ncols();
        if n == 0 {
            return Mat::zeros(0, 0);
        }
        let svd = self.r.svd(false, true);
        let v_t = svd.v_t.expect("v_t requested");
        let smax = svd.singular_values.max();
        let cut = rel_tol * smax.max(scale);
        let null: Vec<usize> = (0..n)
            .filter(|&i| smax == 0.0 || svd.singular_values[i] <= cut)
            .collect();
        let mut out = Mat::zeros(n, null.len());
        for (col, &i) in null.iter().enumerate() {
            for k in 0..n {
                out[(k, col)] = v_t[(i, k)].conj();
            }
        }
        out
    }
}

/// Orthonormal basis grown one vector at a time with twice-iterated
/// modified Gram-Schmidt.
#[derive(Clone, Debug, Default)]
pub struct OrthoBasis {
    vectors: Vec<Vector>,
}

impl OrthoBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vector> {
        self.vectors
    }

    /// Component of `v` orthogonal to the current span.
    pub fn residual(&self, v: &Vector) -> Vector {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &self.vectors {
                let proj = b.dotc(&w);
                w.axpy(-proj, b, ONE);
            }
        }
        w
    }

    /// Adds `v` if its residual exceeds `rel_tol * |v|`; returns whether it was added.
    pub fn try_add(&mut self, v: &Vector, rel_tol: f64) -> bool {
        let norm = v.norm();
        if norm == 0.0 {
            return false;
        }
        let w = self.residual(v);
        let rn = w.norm();
        if rn <= rel_tol * norm {
            return false;
        }
        self.vectors.push(w / c(rn));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            assert!(is_unitary(&haar_unitary(n, &mut rng), 1e-12));
        }
    }

    #[test]
    fn null_space_of_rank_one_map() {
        // x + y + z = 0 has a two-dimensional solution space
        let mut acc = NullSpaceAccumulator::new(3);
        acc.push(&Mat::from_element(1, 3, ONE));
        acc.push(&Mat::from_element(2, 3, c(2.0)));
        let ns = acc.finish(1e-10);
        assert_eq!(ns.ncols(), 2);
        let check = Mat::from_element(1, 3, ONE) * &ns;
        assert!(max_abs(&check) < 1e-12);
    }

    #[test]
    fn ortho_basis_rejects_dependent_vectors() {
        let mut b = OrthoBasis::new();
        let e0 = Vector::from_vec(vec![ONE, ZERO]);
        let e1 = Vector::from_vec(vec![ONE, ONE]);
        assert!(b.try_add(&e0, 1e-10));
        assert!(b.try_add(&e1, 1e-10));
        assert!(!b.try_add(&(e0 + e1), 1e-10));
    }
}
