use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::basis::{orthonormal_elements, ortho_from, AlgebraBasis, InertPart};
use super::commutant::{generated_algebra_dim, RANK_TOLERANCE};
use crate::duality::{t_plus, Side};
use crate::error::{argument, Error, Result};
use crate::legops::{DenseOperator, LegFactor, ModelSpace, StructuredOperator, DEFAULT_DENSE_CAP};
use crate::linalg::{haar_unitary, kron, matrix_unit, Mat, OrthoBasis, Vector, C64, ONE};
use crate::perm::Perm;

/// `C(N^2 + p - 1, p)`, the number of multisets of size `p` from `N^2` letters.
pub fn fixed_point_dimension(p: usize, n: usize) -> u128 {
    let letters = (n * n) as u128;
    let mut acc: u128 = 1;
    for i in 0..p as u128 {
        acc = acc * (letters + i) / (i + 1);
    }
    acc
}

fn multisets(letters: usize, size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur = vec![0; size];
    loop {
        out.push(cur.clone());
        let mut i = size;
        while i > 0 && cur[i - 1] == letters - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let v = cur[i - 1] + 1;
        for x in &mut cur[i - 1..] {
            *x = v;
        }
    }
}

/// Basis of `S_p`-invariant operators in `M_N^{(x)p}` acting on `p` legs of one
/// side: symmetrized words of matrix units, by left multiplication on left legs
/// and by right multiplication on right legs.
pub fn fixed_point_basis(p: usize, n: usize, side: Side) -> Result<AlgebraBasis> {
    let space = match side {
        Side::Left => ModelSpace::new(n, p, 0)?,
        Side::Right => ModelSpace::new(n, 0, p)?,
    };
    if space.dim() > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { dimension: space.dim(), cap: DEFAULT_DENSE_CAP });
    }
    let active_slots: Vec<usize> = (0..p)
        .map(|k| match side {
            Side::Left => 2 * k,
            Side::Right => 2 * k + 1,
        })
        .collect();
    let d = n.pow(p as u32);
    let perms = Perm::all(p);
    let mut words = Vec::new();
    for word in multisets(n * n, p) {
        let mut sym = Mat::zeros(d, d);
        for s in &perms {
            let mut m = Mat::identity(1, 1);
            for k in 0..p {
                let letter = word[s.apply(k)];
                let e = matrix_unit(n, letter / n, letter % n);
                // right multiplication by x acts on a column slot as x^T
                let e = if side == Side::Right { e.transpose() } else { e };
                m = kron(&m, &e);
            }
            sym += m;
        }
        words.push(sym);
    }
    let elements = orthonormal_elements(ortho_from(&words, RANK_TOLERANCE), d);
    let mut basis = AlgebraBasis { space, active_slots, elements, inert: InertPart::Identity, is_algebra: false };
    basis.is_algebra = basis.check_closure(64, 1e-8);
    Ok(basis)
}

/// `l(u)` on every left leg and `r(u*)` on every right leg.
pub fn lr_representation(space: &ModelSpace, u: &Mat) -> Result<StructuredOperator> {
    let us = u.adjoint();
    let factors = (0..space.legs())
        .map(|k| if space.is_left_leg(k) { LegFactor::left(u.clone()) } else { LegFactor::right(us.clone()) })
        .collect();
    StructuredOperator::product(*space, factors)
}

/// How the generated dimension in [`relative_gap`] is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    /// Double commutant and span closure of the sampled operators.
    Algebra,
    /// Rank of the Gram matrix of the sampled group elements; the linear span
    /// of a unitary representation is already the algebra it generates.
    GroupSpan,
}

/// Eigenvalue cutoff, relative to the largest, for Gram-matrix ranks.
pub const GRAM_TOLERANCE: f64 = 1e-10;

/// Largest `(N^2)^(p+q)` for which [`relative_gap`] uses [`GapMethod::Algebra`].
pub const GAP_ALGEBRA_LIMIT: usize = 81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeGapReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub method: GapMethod,
    pub generated_dim: usize,
    pub fixed_dim: u128,
    pub gap: f64,
    /// `(samples, generated dimension)` for every budget tried.
    pub budgets: Vec<(usize, usize)>,
    pub saturated: bool,
}

/// Dimension of `span{l(u)^p (x) r(u*)^q}` over the given unitaries, from the
/// Gram matrix `Tr(pi(u)* pi(v)) = N^(p+q) Tr(u*v)^p conj(Tr(u*v))^q`.
pub fn group_span_dim(p: usize, q: usize, n: usize, unitaries: &[Mat]) -> usize {
    let k = unitaries.len();
    if k == 0 {
        return 0;
    }
    let mut gram = Mat::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let t = (unitaries[i].adjoint() * &unitaries[j]).trace() / C64::new(n as f64, 0.0);
            let v = t.powu(p as u32) * t.conj().powu(q as u32);
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
    }
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let top = eig.iter().cloned().fold(0.0, f64::max);
    eig.iter().filter(|&&e| e > GRAM_TOLERANCE * top).count()
}

/// Generated dimension of `{l(u)^p (x) r(u*)^q}` over Haar samples against the
/// fixed-point product dimension. The sample budget doubles from `initial`
/// until the dimension is unchanged across two successive doublings.
pub fn relative_gap(p: usize, q: usize, n: usize, initial: usize, max_samples: usize, seed: u64) -> Result<RelativeGapReport> {
    let space = ModelSpace::new(n, p, q)?;
    let method = if space.dim() <= GAP_ALGEBRA_LIMIT { GapMethod::Algebra } else { GapMethod::GroupSpan };
    relative_gap_with(p, q, n, initial, max_samples, seed, method)
}

/// [`relative_gap`] with an explicit measurement route.
pub fn relative_gap_with(
    p: usize,
    q: usize,
    n: usize,
    initial: usize,
    max_samples: usize,
    seed: u64,
    method: GapMethod,
) -> Result<RelativeGapReport> {
    if initial == 0 {
        return Err(argument("initial budget must be positive"));
    }
    let space = ModelSpace::new(n, p, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unitaries: Vec<Mat> = Vec::new();
    let mut gens: Vec<DenseOperator> = Vec::new();
    let mut budgets = Vec::new();
    let mut budget = initial;
    let saturated = loop {
        while unitaries.len() < budget {
            let u = haar_unitary(n, &mut rng);
            if method == GapMethod::Algebra {
                gens.push(lr_representation(&space, &u)?.to_dense()?);
            }
            unitaries.push(u);
        }
        let dim = match method {
            GapMethod::Algebra => generated_algebra_dim(&space, &gens)?.0,
            GapMethod::GroupSpan => group_span_dim(p, q, n, &unitaries),
        };
        budgets.push((budget, dim));
        let k = budgets.len();
        if k >= 3 && budgets[k - 1].1 == budgets[k - 2].1 && budgets[k - 2].1 == budgets[k - 3].1 {
            break true;
        }
        if budget * 2 > max_samples {
            break false;
        }
        budget *= 2;
    };
    let generated_dim = budgets.last().map(|b| b.1).unwrap_or(0);
    let fixed_dim = fixed_point_dimension(p, n) * fixed_point_dimension(q, n);
    Ok(RelativeGapReport {
        n,
        p,
        q,
        method,
        generated_dim,
        fixed_dim,
        gap: (fixed_dim as f64 - generated_dim as f64) / fixed_dim as f64,
        budgets,
        saturated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanGrowthReport {
    pub n: usize,
    pub p: usize,
    /// Dimension of the cyclic subspace after each round, starting with round 0.
    pub round_dims: Vec<usize>,
    /// Rounds needed until the subspace stopped growing.
    pub rounds: usize,
    pub cyclic_dim: usize,
    pub generated_dim: usize,
    pub fixed_dim: u128,
    pub pass: bool,
}

/// Grows `L_0 = span{I (x) ... (x) I}` by `L_{r+1} = L_r + sum_l T+(b_l) L_r`
/// over the matrix units `b_l`, and compares with the algebra generated by the
/// `T+(b_l)`.
pub fn span_growth_check(p: usize, n: usize) -> Result<SpanGrowthReport> {
    let space = ModelSpace::new(n, p, 0)?;
    if space.dim() > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { dimension: space.dim(), cap: DEFAULT_DENSE_CAP });
    }
    let ops: Vec<StructuredOperator> = (0..n * n)
        .map(|l| t_plus(&space, &matrix_unit(n, l / n, l % n)))
        .collect::<Result<_>>()?;
    let mut xi = Vector::zeros(space.dim());
    for idx in 0..space.dim() {
        let mut rest = idx;
        let mut diag = true;
        for _ in 0..p {
            diag &= rest % n == (rest / n) % n;
            rest /= n * n;
        }
        if diag {
            xi[idx] = ONE;
        }
    }
    let mut basis = OrthoBasis::new();
    basis.try_add(&xi, RANK_TOLERANCE);
    let mut frontier = vec![xi];
    let mut round_dims = vec![basis.len()];
    while !frontier.is_empty() {
        let mut fresh = Vec::new();
        for v in &frontier {
            for op in &ops {
                let w = op.apply(v)?;
                if basis.try_add(&w, RANK_TOLERANCE) {
                    fresh.push(w);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        round_dims.push(basis.len());
        frontier = fresh;
    }
    let dense: Vec<DenseOperator> = ops.iter().map(|o| o.to_dense()).collect::<Result<_>>()?;
    let (generated_dim, _) = generated_algebra_dim(&space, &dense)?;
    let fixed_dim = fixed_point_dimension(p, n);
    let cyclic_dim = basis.len();
    Ok(SpanGrowthReport {
        n,
        p,
        rounds: round_dims.len() - 1,
        round_dims,
        cyclic_dim,
        generated_dim,
        fixed_dim,
        pass: cyclic_dim as u128 == fixed_dim && generated_dim as u128 == fixed_dim,
    })
}
