//! Test-only dense oracles, built from first principles on basis vectors and
//! independent of the library's dense materialization.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swlab::legops::{LegFactor, ModelSpace, OperatorTerm, StructuredOperator};
use swlab::linalg::{ginibre, Mat, C64};
use swlab::perm::Perm;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Multi-index of a flat model-space index: `(row, col)` per leg.
pub fn digits(space: &ModelSpace, mut idx: usize) -> Vec<(usize, usize)> {
    let n = space.n();
    let mut out = vec![(0, 0); space.legs()];
    for leg in (0..space.legs()).rev() {
        let col = idx % n;
        idx /= n;
        let row = idx % n;
        idx /= n;
        out[leg] = (row, col);
    }
    out
}

pub fn flat(space: &ModelSpace, d: &[(usize, usize)]) -> usize {
    let n = space.n();
    d.iter().fold(0, |acc, &(r, c)| (acc * n + r) * n + c)
}

/// Dense matrix of `eta -> A eta B` on one leg, column `i*N+j` = image of `e_ij`.
pub fn leg_matrix(n: usize, a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = Mat::zeros(n, n);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let img = a * e * b;
            for r in 0..n {
                for c in 0..n {
                    out[(r * n + c, i * n + j)] = img[(r, c)];
                }
            }
        }
    }
    out
}

/// Dense oracle for a structured operator: every basis tensor is pushed
/// through the permutation and the leg maps by hand.
pub fn oracle_dense(op: &StructuredOperator) -> Mat {
    let space = *op.space();
    let n = space.n();
    let d = space.dim();
    let eye = Mat::identity(n, n);
    let mut out = Mat::zeros(d, d);
    for term in op.terms() {
        let legs: Vec<Mat> = term
            .factors
            .iter()
            .map(|f| {
                leg_matrix(n, f.left.as_ref().unwrap_or(&eye), f.right.as_ref().unwrap_or(&eye))
            })
            .collect();
        for col in 0..d {
            let src = digits(&space, col);
            // P(sigma): leg k content goes to leg sigma(k)
            let mut moved = src.clone();
            for (k, &dk) in src.iter().enumerate() {
                moved[term.sigma.apply(k)] = dk;
            }
            // tensor product of leg images
            let mut images: Vec<(usize, C64)> = vec![(0, term.coefficient)];
            for (leg, &(r, c)) in moved.iter().enumerate() {
                let colv = legs[leg].column(r * n + c);
                let mut next = Vec::new();
                for (prefix, w) in &images {
                    for t in 0..n * n {
                        let z = colv[t];
                        if z != Complex64::new(0.0, 0.0) {
                            next.push((prefix * n * n + t, w * z));
                        }
                    }
                }
                images = next;
            }
            for (row, w) in images {
                out[(row, col)] += w;
            }
        }
    }
    out
}

pub fn random_term(space: &ModelSpace, rng: &mut ChaCha8Rng) -> OperatorTerm {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let n = space.n();
    let legs = space.legs();
    let factors = (0..legs)
        .map(|_| match rng.random_range(0..4) {
            0 => LegFactor::identity(),
            1 => LegFactor::left(ginibre(n, rng)),
            2 => LegFactor::right(ginibre(n, rng)),
            _ => LegFactor::sandwich(ginibre(n, rng), ginibre(n, rng)),
        })
        .collect();
    let mut images: Vec<usize> = (0..legs).collect();
    images.shuffle(rng);
    OperatorTerm {
        coefficient: Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        factors,
        sigma: Perm::from_images(images).unwrap(),
    }
}

pub fn random_operator(space: &ModelSpace, terms: usize, rng: &mut ChaCha8Rng) -> StructuredOperator {
    let ts = (0..terms).map(|_| random_term(space, rng)).collect();
    StructuredOperator::from_terms(*space, ts).unwrap()
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn rel_err(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1e-300)
}

/// Clock-and-shift unitaries `X^a Z^b`, a unitary 1-design on C^n.
pub fn weyl_heisenberg(n: usize) -> Vec<Mat> {
    let omega = |k: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut w = Mat::zeros(n, n);
            for j in 0..n {
                w[((j + a) % n, j)] = omega((b * j) % n);
            }
            out.push(w);
        }
    }
    out
}

/// Exact Haar average of an integrand of degree one in `u` and one in `u*`.
pub fn design_average<F: Fn(&Mat) -> Mat>(units: &[Mat], f: F) -> Mat {
    let mut acc: Option<Mat> = None;
    for u in units {
        let x = f(u);
        acc = Some(match acc {
            None => x,
            Some(s) => s + x,
        });
    }
    acc.unwrap() / Complex64::new(units.len() as f64, 0.0)
}

/// Dense `T(x)` from first principles: left legs `x eta`, right legs `eta x`.
pub fn dense_t_mixed(space: &ModelSpace, x: &Mat) -> Mat {
    let n = space.n();
    let eye = Mat::identity(n, n);
    let mut out = Mat::zeros(space.dim(), space.dim());
    for leg in 0..space.legs() {
        let (single, sign) = if leg < space.p() {
            (leg_matrix(n, x, &eye), 1.0)
        } else {
            (leg_matrix(n, &eye, x), -1.0)
        };
        let before = Mat::identity((n * n).pow(leg as u32), (n * n).pow(leg as u32));
        let after_legs = space.legs() - leg - 1;
        let after = Mat::identity((n * n).pow(after_legs as u32), (n * n).pow(after_legs as u32));
        out += before.kronecker(&single).kronecker(&after) * Complex64::new(sign, 0.0);
    }
    out
}

pub fn spectral(m: &Mat) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

pub fn rank(m: &Mat, rel: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    sv.iter().filter(|&&s| s > rel * top).count()
}

/// Orthonormal null-space basis of the commutation constraints, brute force.
pub fn brute_commutant(gens: &[Mat]) -> Vec<Mat> {
    let d = gens[0].nrows();
    let eye = Mat::identity(d, d);
    let mut rows: Vec<Mat> = Vec::new();
    for g in gens {
        for h in [g.clone(), g.adjoint()] {
            rows.push(h.kronecker(&eye) - eye.kronecker(&h.transpose()));
        }
    }
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut big = Mat::zeros(total.max(d * d), d * d);
    let mut at = 0;
    for r in &rows {
        big.view_mut((at, 0), (r.nrows(), d * d)).copy_from(r);
        at += r.nrows();
    }
    let svd = big.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    (0..d * d)
        .filter(|&i| svd.singular_values[i] <= 1e-8 * smax)
        .map(|i| Mat::from_fn(d, d, |r, c| vt[(i, r * d + c)].conj()))
        .collect()
}
