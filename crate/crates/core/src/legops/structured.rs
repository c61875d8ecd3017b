//! Symbolic operators: finite sums of `c * (F_1 (x) .. (x) F_m) * P(sigma)`
//! where each `F_k` is a sandwich map `eta -> A eta B` on leg `k`.
//!
//! Within a term the permutation acts first, then the leg factors.


use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::space::ModelSpace;
use crate::error::{argument, Error, Result};
use crate::linalg::{c, random_vector, Mat, Vector, C64, ONE, ZERO};
use crate::perm::Perm;

/// Coefficients below this magnitude are dropped by canonicalization.
pub const MERGE_TOLERANCE: f64 = 1e-14;

/// A sandwich map `eta -> A eta B` on one leg; `None` stands for the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct LegFactor {
    pub left: Option<Mat>,
    pub right: Option<Mat>,
}

fn mul_opt(a: &Option<Mat>, b: &Option<Mat>) -> Option<Mat> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => Some(x * y),
    }
}

fn opt_adjoint(a: &Option<Mat>) -> Option<Mat> {
    a.as_ref().map(|m| m.adjoint())
}

fn opt_trace(a: &Option<Mat>, n: usize) -> C64 {
    match a {
        None => c(n as f64),
        Some(m) => m.trace(),
    }
}

impl LegFactor {
    pub fn identity() -> Self {
        LegFactor { left: None, right: None }
    }

    pub fn sandwich(a: Mat, b: Mat) -> Self {
        LegFactor { left: Some(a), right: Some(b) }
    }

    pub fn left(a: Mat) -> Self {
        LegFactor { left: Some(a), right: None }
    }

    pub fn right(b: Mat) -> Self {
        LegFactor { left: None, right: Some(b) }
    }

    pub fn is_identity(&self) -> bool {
        self.left.is_none() && self.right.is_none()
    }

    fn has_zero_matrix(&self) -> bool {
        let zero = |m: &Option<Mat>| m.as_ref().is_some_and(|m| m.iter().all(|z| *z == ZERO));
        zero(&self.left) || zero(&self.right)
    }

    /// `self` after `inner`: `(A, B) o (A', B') = (A A', B' B)`.
    pub fn after(&self, inner: &LegFactor) -> LegFactor {
        LegFactor {
            left: mul_opt(&self.left, &inner.left),
            right: mul_opt(&inner.right, &self.right),
        }
    }

    /// Adjoint for the trace inner product: `(A, B) -> (A*, B*)`.
    pub fn adjoint(&self) -> LegFactor {
        LegFactor { left: opt_adjoint(&self.left), right: opt_adjoint(&self.right) }
    }

    /// Conjugation by `eta -> eta*`: `(A, B) -> (B*, A*)`.
    pub fn j_conjugate(&self) -> LegFactor {
        LegFactor { left: opt_adjoint(&self.right), right: opt_adjoint(&self.left) }
    }

    /// Matrix of the map on row-major `vec(eta)`: `A (x) B^T`.
    pub fn to_matrix(&self, n: usize) -> Mat {
        let a = self.left.clone().unwrap_or_else(|| Mat::identity(n, n));
        let b = self.right.as_ref().map(|m| m.transpose()).unwrap_or_else(|| Mat::identity(n, n));
        a.kronecker(&b)
    }

    fn signature(&self, out: &mut Vec<u64>) {
        let mut push = |m: &Option<Mat>| match m {
            None => out.push(0),
            Some(m) => {
                out.push(1);
                for z in m.iter() {
                    // +0.0 and -0.0 must agree
                    out.push((z.re + 0.0).to_bits());
                    out.push((z.im + 0.0).to_bits());
                }
            }
        };
        push(&self.left);
        push(&self.right);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTerm {
    pub coefficient: C64,
    pub factors: Vec<LegFactor>,
    pub sigma: Perm,
}

impl OperatorTerm {
    pub fn identity(legs: usize) -> Self {
        OperatorTerm {
            coefficient: ONE,
            factors: vec![LegFactor::identity(); legs],
            sigma: Perm::identity(legs),
        }
    }

    fn signature(&self) -> Vec<u64> {
        let mut sig: Vec<u64> = self.sigma.images().iter().map(|&x| x as u64).collect();
        for f in &self.factors {
            f.signature(&mut sig);
        }
        sig
    }

    /// `(c F P(s)) (c' F' P(s'))` = `c c' [F . theta_s(F')] P(s s')`.
    fn compose(&self, inner: &OperatorTerm) -> OperatorTerm {
        let sigma_inv = self.sigma.inverse();
        let factors = (0..self.factors.len())
            .map(|leg| self.factors[leg].after(&inner.factors[sigma_inv.apply(leg)]))
            .collect();
        OperatorTerm {
            coefficient: self.coefficient * inner.coefficient,
            factors,
            sigma: self.sigma.compose(&inner.sigma),
        }
    }

    /// `(c F P(s))* = conj(c) theta_{s^-1}(F*) P(s^-1)`.
    fn adjoint(&self) -> OperatorTerm {
        let factors = (0..self.factors.len())
            .map(|leg| self.factors[self.sigma.apply(leg)].adjoint())
            .collect();
        OperatorTerm { coefficient: self.coefficient.conj(), factors, sigma: self.sigma.inverse() }
    }

    /// Unnormalized trace via the cycle factorization of `sigma`.
    fn trace(&self, n: usize) -> C64 {
        let mut total = self.coefficient;
        for cycle in self.sigma.cycles() {
            // cycle = [i1, s(i1), ..]; the leg maps compose as F_{ir} .. F_{i1}
            let mut composed = LegFactor::identity();
            for &leg in &cycle {
                composed = self.factors[leg].after(&composed);
            }
            total *= opt_trace(&composed.left, n) * opt_trace(&composed.right, n);
        }
        total
    }
}

/// A canonical sum of operator terms on a fixed model space.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredOperator {
    space: ModelSpace,
    terms: Vec<OperatorTerm>,
}

impl StructuredOperator {
    pub fn zero(space: ModelSpace) -> Self {
        StructuredOperator { space, terms: Vec::new() }
    }

    pub fn identity(space: ModelSpace) -> Self {
        StructuredOperator { space, terms: vec![OperatorTerm::identity(space.legs())] }
    }

    pub fn from_terms(space: ModelSpace, terms: Vec<OperatorTerm>) -> Result<Self> {
        let n = space.n();
        for t in &terms {
            if t.factors.len() != space.legs() || t.sigma.len() != space.legs() {
                return Err(argument(format!(
                    "term has {} factors / permutation on {} points, space has {} legs",
                    t.factors.len(),
                    t.sigma.len(),
                    space.legs()
                )));
            }
            for f in &t.factors {
                for m in [&f.left, &f.right].into_iter().flatten() {
                    if m.nrows() != n || m.ncols() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
                    }
                }
            }
        }
        Ok(Self::canonical(space, terms))
    }

    /// Single term with the given leg factor on leg `k` and identity elsewhere.
    pub fn single_leg(space: ModelSpace, k: usize, factor: LegFactor) -> Result<Self> {
        space.check_leg(k)?;
        let mut term = OperatorTerm::identity(space.legs());
        term.factors[k] = factor;
        Self::from_terms(space, vec![term])
    }

    /// Product of one leg factor per leg, no permutation.
    pub fn product(space: ModelSpace, factors: Vec<LegFactor>) -> Result<Self> {
        let term = OperatorTerm { coefficient: ONE, factors, sigma: Perm::identity(space.legs()) };
        Self::from_terms(space, vec![term])
    }

    fn canonical(space: ModelSpace, terms: Vec<OperatorTerm>) -> Self {
        let mut keyed: Vec<(Vec<u64>, OperatorTerm)> = terms
            .into_iter()
            .filter(|t| t.coefficient.norm() >= MERGE_TOLERANCE)
            .filter(|t| !t.factors.iter().any(LegFactor::has_zero_matrix))
            .map(|t| (t.signature(), t))
            .collect();
        keyed.sort_by(|(ka, ta), (kb, tb)| {
            ka.cmp(kb).then_with(|| {
                let a = (ta.coefficient.re.to_bits(), ta.coefficient.im.to_bits());
                let b = (tb.coefficient.re.to_bits(), tb.coefficient.im.to_bits());
                a.cmp(&b)
            })
        });
        let mut merged: Vec<(Vec<u64>, OperatorTerm)> = Vec::with_capacity(keyed.len());
        for (key, term) in keyed {
            match merged.last_mut() {
                Some((k, t)) if *k == key => t.coefficient += term.coefficient,
                _ => merged.push((key, term)),
            }
        }
        let terms = merged
            .into_iter()
            .map(|(_, t)| t)
            .filter(|t| t.coefficient.norm() >= MERGE_TOLERANCE)
            .collect();
        StructuredOperator { space, terms }
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn is_symbolically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let terms = self
            .terms
            .iter()
            .cloned()
            .map(|mut t| {
                t.coefficient *= s;
                t
            })
            .collect();
        Self::canonical(self.space, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(Self::canonical(self.space, terms))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(c(-1.0)))
    }

    /// Sum of many operators on a common space.
    pub fn sum<'a>(space: ModelSpace, ops: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut terms = Vec::new();
        for op in ops {
            space.ensure_same(&op.space)?;
            terms.extend(op.terms.iter().cloned());
        }
        Ok(Self::canonical(space, terms))
    }

    /// Operator product `self . inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.space.ensure_same(&inner.space)?;
        let terms = self
            .terms
            .iter()
            .flat_map(|a| inner.terms.iter().map(move |b| a.compose(b)))
            .collect();
        Ok(Self::canonical(self.space, terms))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    pub fn adjoint(&self) -> Self {
        Self::canonical(self.space, self.terms.iter().map(OperatorTerm::adjoint).collect())
    }

    /// `J X J` with `J` the entrywise adjoint `eta -> eta*` on every leg.
    pub fn j_conjugate(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm {
                coefficient: t.coefficient.conj(),
                factors: t.factors.iter().map(LegFactor::j_conjugate).collect(),
                sigma: t.sigma.clone(),
            })
            .collect();
        Self::canonical(self.space, terms)
    }

    /// Trace normalized so that the identity has trace one.
    pub fn normalized_trace(&self) -> C64 {
        let n = self.space.n();
        let total: C64 = self.terms.iter().map(|t| t.trace(n)).sum();
        total / c(self.space.dim() as f64)
    }

    /// Matrix-free action on a vector of length `N^(2m)`.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        let dim = self.space.dim();
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        const CHUNK: usize = 8;
        let partials: Vec<Vector> = self
            .terms
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = Vector::zeros(dim);
                let mut scratch = Vec::new();
                for term in chunk {
                    let w = apply_term(&self.space, term, v, &mut scratch);
                    acc.axpy(term.coefficient, &w, ONE);
                }
                acc
            })
            .collect();
        let mut out = Vector::zeros(dim);
        for part in partials {
            out += part;
        }
        Ok(out)
    }

    /// Largest `|X v| / |v|` over a few fixed pseudo-random probes.
    ///
    /// This is a lower bound for the operator norm that vanishes exactly when
    /// the operator does, and it does not suffer the cancellation that the
    /// trace form of the Hilbert-Schmidt norm has.
    pub fn probe_norm(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_9b0be);
        (0..3)
            .map(|_| {
                let v = random_vector(self.space.dim(), &mut rng);
                let w = self.apply(&v).expect("dimension matches");
                w.norm() / v.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Canonically zero, or numerically zero within `tol` on random probes.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.is_symbolically_zero() || self.probe_norm() <= tol
    }
}

/// Action of one term without its coefficient.
fn apply_term(space: &ModelSpace, term: &OperatorTerm, v: &Vector, scratch: &mut Vec<C64>) -> Vector {
    let mut w = if term.sigma.is_identity() {
        v.clone()
    } else {
        let map = space.permutation_index_map(&term.sigma);
        let mut out = Vector::zeros(v.len());
        for (i, &j) in map.iter().enumerate() {
            out[j] = v[i];
        }
        out
    };
    let n = space.n();
    for (leg, f) in term.factors.iter().enumerate() {
        if f.is_identity() {
            continue;
        }
        let inner = space.leg_stride(leg);
        let outer = v.len() / (inner * n * n);
        if let Some(a) = &f.left {
            // rows: index = ((o * n + r) * n + col) * inner + i
            apply_slot(w.as_mut_slice(), outer, n, n * inner, a, false, scratch);
        }
        if let Some(b) = &f.right {
            apply_slot(w.as_mut_slice(), outer * n, n, inner, b, true, scratch);
        }
    }
    w
}

/// Multiplies the slot of size `n` with stride `stride` by `m` (or by `m^T`
/// when `transpose`), for every `outer` block.
fn apply_slot(
    data: &mut [C64],
    outer: usize,
    n: usize,
    stride: usize,
    m: &Mat,
    transpose: bool,
    scratch: &mut Vec<C64>,
) {
    scratch.resize(n, ZERO);
    for o in 0..outer {
        let base = o * n * stride;
        for s in 0..stride {
            for (r, slot) in scratch.iter_mut().enumerate() {
                *slot = data[base + r * stride + s];
            }
            for r in 0..n {
                let mut acc = ZERO;
                for (l, x) in scratch.iter().enumerate() {
                    let coeff = if transpose { m[(l, r)] } else { m[(r, l)] };
                    acc += coeff * x;
                }
                data[base + r * stride + s] = acc;
            }
        }
    }
}

/// `k_l(a)`: left multiplication by `a` on leg `k`.
pub fn left_mult(space: &ModelSpace, a: &Mat, k: usize) -> Result<StructuredOperator> {
    StructuredOperator::single_leg(*space, k, LegFactor::left(a.clone()))
}

/// `k_r(a)`: right multiplication `eta -> eta a` on leg `k`.
pub fn right_mult(space: &ModelSpace, a: &Mat, k: usize) -> Result<StructuredOperator> {
    StructuredOperator::single_leg(*space, k, LegFactor::right(a.clone()))
}

/// `P(s)`: the content of leg `i` moves to leg `s(i)`.
pub fn permutation_op(space: &ModelSpace, s: &Perm) -> Result<StructuredOperator> {
    if s.len() != space.legs() {
        return Err(argument(format!("permutation on {} points for {} legs", s.len(), space.legs())));
    }
    let mut term = OperatorTerm::identity(space.legs());
    term.sigma = s.clone();
    StructuredOperator::from_terms(*space, vec![term])
}
