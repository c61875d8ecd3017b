use serde::{Deserialize, Serialize};

use super::slots::SlotLayout;
use crate::error::{Error, Result};
use crate::legops::{DenseOperator, ModelSpace};
use crate::linalg::{c, ntrace, Mat, OrthoBasis, Vector};

/// What an algebra looks like on the slots it does not act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InertPart {
    /// Elements are `x (x) I`.
    Identity,
    /// Elements span `x (x) M` with `M` the full matrix algebra of the inert slots.
    Full,
}

/// Orthonormal basis, in the normalized trace inner product, of a subspace of
/// operators on the model space, stored on the active tensor slots only.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    pub space: ModelSpace,
    pub active_slots: Vec<usize>,
    pub elements: Vec<Mat>,
    pub inert: InertPart,
    pub is_algebra: bool,
}

impl AlgebraBasis {
    pub fn active_dim(&self) -> usize {
        self.space.n().pow(self.active_slots.len() as u32)
    }

    pub fn inert_dim(&self) -> usize {
        self.space.dim() / self.active_dim()
    }

    /// Dimension of the subspace on the full model space.
    pub fn dimension(&self) -> usize {
        match self.inert {
            InertPart::Identity => self.elements.len(),
            InertPart::Full => self.elements.len() * self.inert_dim() * self.inert_dim(),
        }
    }

    /// Dimension on the active slots alone.
    pub fn reduced_dimension(&self) -> usize {
        self.elements.len()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, x) in self.elements.iter().enumerate() {
            for (j, y) in self.elements.iter().enumerate() {
                let g = ntrace(&(x.adjoint() * y));
                let target = if i == j { c(1.0) } else { c(0.0) };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// Whether `x` lies in the subspace, up to `tol` relative to `|x|`.
    pub fn contains(&self, x: &DenseOperator, tol: f64) -> Result<bool> {
        self.space.ensure_same(x.space())?;
        let layout = SlotLayout::new(&self.space);
        let inactive: Vec<usize> = (0..layout.slots()).filter(|s| !self.active_slots.contains(s)).collect();
        if self.inert == InertPart::Identity && inactive.iter().any(|&s| !layout.is_inert(x.matrix(), s, tol)) {
            return Ok(false);
        }
        if self.inert == InertPart::Full {
            // x lies in A (x) M iff every inert-slot matrix coefficient of x lies in A
            return Ok(self.inert_blocks(x.matrix()).iter().all(|b| self.reduced_contains(b, tol)));
        }
        Ok(self.reduced_contains(&layout.reduce(x.matrix(), &self.active_slots), tol))
    }

    fn inert_blocks(&self, x: &Mat) -> Vec<Mat> {
        let layout = SlotLayout::new(&self.space);
        let inactive: Vec<usize> = (0..layout.slots()).filter(|s| !self.active_slots.contains(s)).collect();
        let act = layout.active_indices(&self.active_slots);
        let off = layout.active_indices(&inactive);
        let mut out = Vec::with_capacity(off.len() * off.len());
        for &o1 in &off {
            for &o2 in &off {
                out.push(Mat::from_fn(act.len(), act.len(), |i, j| x[(act[i] + o1, act[j] + o2)]));
            }
        }
        out
    }

    pub(crate) fn reduced_contains(&self, x: &Mat, tol: f64) -> bool {
        self.reduced_contains_scaled(x, tol, 0.0)
    }

    /// Residual test against `tol * max(|x|, reference)`.
    fn reduced_contains_scaled(&self, x: &Mat, tol: f64, reference: f64) -> bool {
        let norm = x.norm().max(reference);
        if norm == 0.0 {
            return true;
        }
        let mut residual = x.clone();
        for _ in 0..2 {
            for e in &self.elements {
                let coeff = e.dotc(&residual) / e.norm_squared();
                residual -= e * coeff;
            }
        }
        residual.norm() <= tol * norm
    }

    /// Full-size dense elements; only for `InertPart::Identity`.
    pub fn materialize(&self, cap: usize) -> Result<Vec<DenseOperator>> {
        let d = self.space.dim();
        if d > cap {
            return Err(Error::CapExceeded { dimension: d, cap });
        }
        if self.inert == InertPart::Full && self.inert_dim() > 1 {
            return Err(crate::error::argument("materialize needs an algebra acting trivially on inert slots"));
        }
        let layout = SlotLayout::new(&self.space);
        self.elements
            .iter()
            .map(|e| DenseOperator::new(self.space, layout.embed(e, &self.active_slots)))
            .collect()
    }

    /// Checks closure under products and adjoints on up to `pairs` element pairs.
    pub(crate) fn check_closure(&self, pairs: usize, tol: f64) -> bool {
        let k = self.elements.len();
        if k == 0 {
            return false;
        }
        let step = ((k * k) / pairs.max(1)).max(1);
        let mut idx = 0;
        while idx < k * k {
            let (i, j) = (idx / k, idx % k);
            let prod = &self.elements[i] * &self.elements[j];
            let reference = self.elements[i].norm() * self.elements[j].norm();
            if !self.reduced_contains_scaled(&prod, tol, reference) {
                return false;
            }
            idx += step;
        }
        self.elements.iter().all(|e| self.reduced_contains(&e.adjoint(), tol))
    }
}

/// Orthonormalizes matrices of size `d` in the normalized trace inner product.
pub(crate) fn orthonormal_elements(vectors: Vec<Vector>, d: usize) -> Vec<Mat> {
    let scale = c((d as f64).sqrt());
    vectors
        .into_iter()
        .map(|v| Mat::from_row_slice(d, d, v.as_slice()) * scale)
        .collect()
}

pub(crate) fn vec_row(x: &Mat) -> Vector {
    Vector::from_iterator(x.len(), x.transpose().iter().cloned())
}

pub(crate) fn ortho_from(mats: &[Mat], tol: f64) -> Vec<Vector> {
    let mut ob = OrthoBasis::new();
    for m in mats {
        ob.try_add(&vec_row(m), tol);
    }
    ob.into_vectors()
}

