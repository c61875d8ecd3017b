use std::collections::BTreeMap;

use super::group::{permutation_matrix, theta, ProductGroup, ProductGroupElement};
use crate::algebra::SlotLayout;
use crate::error::{Error, Result};
use crate::legops::{DenseOperator, ModelSpace, DEFAULT_DENSE_CAP};
use crate::linalg::{Mat, Vector, C64, ONE, ZERO};

/// Finite sum `sum_g Pi(a_g) lambda_g` in the crossed product by `S_p x S_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossedOperator {
    space: ModelSpace,
    blocks: BTreeMap<ProductGroupElement, DenseOperator>,
}

impl CrossedOperator {
    pub fn new(space: ModelSpace, blocks: BTreeMap<ProductGroupElement, DenseOperator>) -> Result<Self> {
        let group = ProductGroup::for_space(&space);
        for (g, a) in &blocks {
            group.check(g)?;
            space.ensure_same(a.space())?;
        }
        Ok(Self { space, blocks })
    }

    pub fn zero(space: ModelSpace) -> Self {
        Self { space, blocks: BTreeMap::new() }
    }

    /// `Pi(a)`.
    pub fn pi(a: DenseOperator) -> Self {
        let space = *a.space();
        let e = ProductGroupElement::identity(space.p(), space.q());
        Self { space, blocks: BTreeMap::from([(e, a)]) }
    }

    /// `lambda_g`.
    pub fn lambda(space: ModelSpace, g: ProductGroupElement) -> Result<Self> {
        ProductGroup::for_space(&space).check(&g)?;
        Ok(Self { space, blocks: BTreeMap::from([(g, DenseOperator::identity(space))]) })
    }

    /// `Pi(a) lambda_g`.
    pub fn monomial(a: DenseOperator, g: ProductGroupElement) -> Result<Self> {
        let space = *a.space();
        Self::new(space, BTreeMap::from([(g, a)]))
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn blocks(&self) -> &BTreeMap<ProductGroupElement, DenseOperator> {
        &self.blocks
    }

    pub fn block(&self, g: &ProductGroupElement) -> Option<&DenseOperator> {
        self.blocks.get(g)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let mut blocks = self.blocks.clone();
        for (g, b) in &other.blocks {
            match blocks.get_mut(g) {
                Some(a) => *a = DenseOperator::new(self.space, a.matrix() + b.matrix())?,
                None => {
                    blocks.insert(g.clone(), b.clone());
                }
            }
        }
        Ok(Self { space: self.space, blocks })
    }

    pub fn scaled(&self, s: C64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(g, a)| (g.clone(), DenseOperator::new(self.space, a.matrix() * s).expect("same shape")))
            .collect();
        Self { space: self.space, blocks }
    }

    /// Twisted product: `c_k = sum_{gh = k} a_g theta_g(b_h)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let mut blocks: BTreeMap<ProductGroupElement, Mat> = BTreeMap::new();
        for (g, a) in &self.blocks {
            for (h, b) in &other.blocks {
                let term = a.matrix() * theta(g, b).matrix();
                let k = g.compose(h);
                match blocks.get_mut(&k) {
                    Some(acc) => *acc += term,
                    None => {
                        blocks.insert(k, term);
                    }
                }
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|(k, m)| DenseOperator::new(self.space, m).map(|d| (k, d)))
            .collect::<Result<_>>()?;
        Ok(Self { space: self.space, blocks })
    }

    /// `(Pi(a) lambda_g)* = Pi(theta_{g^-1}(a*)) lambda_{g^-1}`.
    pub fn adjoint(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(g, a)| {
                let gi = g.inverse();
                let b = theta(&gi, &a.adjoint());
                (gi, b)
            })
            .collect();
        Self { space: self.space, blocks }
    }

    /// `tau_hat(A) = tr(a_e)`, the normalized trace of the identity block.
    pub fn tau_hat(&self) -> C64 {
        let e = ProductGroupElement::identity(self.space.p(), self.space.q());
        self.blocks.get(&e).map(DenseOperator::normalized_trace).unwrap_or(ZERO)
    }

    /// Largest block entry.
    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|a| crate::linalg::max_abs(a.matrix())).fold(0.0, f64::max)
    }

    /// Block matrix on `l^2(G, H)`, with `(Pi(a) eta)(g) = theta_{g^-1}(a) eta(g)`
    /// and `(lambda_s eta)(g) = eta(s^-1 g)`.
    pub fn to_dense(&self, group: &ProductGroup) -> Result<Mat> {
        let d = l2_dim(&self.space, group)?;
        let n = self.space.dim();
        let mut out = Mat::zeros(d, d);
        for (s, a) in &self.blocks {
            for (gi, g) in group.elements().iter().enumerate() {
                // (Pi(a) lambda_s eta)(g) = theta_{g^-1}(a) eta(s^-1 g)
                let src = group.index_of(&s.inverse().compose(g)).expect("closed group");
                let block = theta(&g.inverse(), a);
                out.view_mut((gi * n, src * n), (n, n)).copy_from(block.matrix());
            }
        }
        Ok(out)
    }
}

fn l2_dim(space: &ModelSpace, group: &ProductGroup) -> Result<usize> {
    group.check_space(space)?;
    let d = group.order() * space.dim();
    if d > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { dimension: d, cap: DEFAULT_DENSE_CAP });
    }
    Ok(d)
}

/// `xi_I = delta_e (x) (I (x) ... (x) I)` normalized, in `l^2(G, H)`.
pub fn cyclic_vector(space: &ModelSpace, group: &ProductGroup) -> Result<Vector> {
    let d = l2_dim(space, group)?;
    let mut v = Vector::zeros(d);
    let xi = trace_vector(space);
    let e = group.index_of(&group.identity()).expect("identity");
    v.rows_mut(e * space.dim(), space.dim()).copy_from(&xi);
    Ok(v)
}

/// Unit vector `I (x) ... (x) I` of the model space.
pub fn trace_vector(space: &ModelSpace) -> Vector {
    let n = space.n();
    let mut v = Vector::zeros(space.dim());
    let scale = C64::new((n as f64).powi(space.legs() as i32).sqrt(), 0.0);
    for idx in 0..space.dim() {
        let mut rest = idx;
        let mut diag = true;
        for _ in 0..space.legs() {
            diag &= rest % n == (rest / n) % n;
            rest /= n * n;
        }
        if diag {
            v[idx] = ONE / scale;
        }
    }
    v
}

/// `(lambda'_s eta)(g) = P(s) eta(g s)`, which commutes with the crossed product.
pub fn right_regular(space: &ModelSpace, group: &ProductGroup, s: &ProductGroupElement) -> Result<Mat> {
    let d = l2_dim(space, group)?;
    let n = space.dim();
    let ps = permutation_matrix(space, s);
    let mut out = Mat::zeros(d, d);
    for (gi, g) in group.elements().iter().enumerate() {
        let src = group.index_of(&g.compose(s)).expect("closed group");
        out.view_mut((gi * n, src * n), (n, n)).copy_from(&ps);
    }
    Ok(out)
}

/// Tensor slots on which the algebra `F` acts: rows of left legs, columns of right legs.
pub fn f_slots(space: &ModelSpace) -> Vec<usize> {
    (0..space.legs())
        .map(|k| if space.is_left_leg(k) { 2 * k } else { 2 * k + 1 })
        .collect()
}

/// Element of `F` from a matrix on the active slots of `F`.
pub fn f_embed(space: &ModelSpace, y: &Mat) -> Result<DenseOperator> {
    let layout = SlotLayout::new(space);
    DenseOperator::new(*space, layout.embed(y, &f_slots(space)))
}

/// Unitary of `F` implementing `theta_g`: it permutes the active slots of `F`
/// the way `g` permutes legs.
pub fn implementing_unitary(space: &ModelSpace, g: &ProductGroupElement) -> Mat {
    let n = space.n();
    let m = space.legs();
    let sigma = g.leg_perm();
    let d = n.pow(m as u32);
    let mut out = Mat::zeros(d, d);
    for idx in 0..d {
        let mut digits = vec![0; m];
        let mut rest = idx;
        for k in (0..m).rev() {
            digits[k] = rest % n;
            rest /= n;
        }
        let mut moved = vec![0; m];
        for k in 0..m {
            moved[sigma.apply(k)] = digits[k];
        }
        let target = moved.iter().fold(0, |acc, &x| acc * n + x);
        out[(target, idx)] = ONE;
    }
    out
}
