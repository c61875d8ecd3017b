use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legops::{DenseOperator, ModelSpace};
use crate::linalg::Mat;
use crate::perm::Perm;

/// `(s, t)` in `S_p x S_q`, acting on the left and right legs separately.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProductGroupElement {
    pub s: Perm,
    pub t: Perm,
}

impl ProductGroupElement {
    pub fn new(s: Perm, t: Perm) -> Self {
        Self { s, t }
    }

    pub fn identity(p: usize, q: usize) -> Self {
        Self { s: Perm::identity(p), t: Perm::identity(q) }
    }

    pub fn is_identity(&self) -> bool {
        self.s.is_identity() && self.t.is_identity()
    }

    pub fn compose(&self, inner: &Self) -> Self {
        Self { s: self.s.compose(&inner.s), t: self.t.compose(&inner.t) }
    }

    pub fn inverse(&self) -> Self {
        Self { s: self.s.inverse(), t: self.t.inverse() }
    }

    /// The element as a permutation of all `p + q` legs.
    pub fn leg_perm(&self) -> Perm {
        let p = self.s.len();
        let m = p + self.t.len();
        let mut images: Vec<usize> = self.s.images().to_vec();
        images.extend(self.t.images().iter().map(|&x| x + p));
        debug_assert_eq!(images.len(), m);
        Perm::from_images(images).expect("block permutation")
    }
}

impl fmt::Display for ProductGroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.s, self.t)
    }
}

/// `S_p x S_q` with a fixed element order, identity first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductGroup {
    p: usize,
    q: usize,
    elements: Vec<ProductGroupElement>,
}

impl ProductGroup {
    pub fn new(p: usize, q: usize) -> Self {
        let mut elements = Vec::new();
        for s in Perm::all(p) {
            for t in Perm::all(q) {
                elements.push(ProductGroupElement::new(s.clone(), t));
            }
        }
        Self { p, q, elements }
    }

    pub fn for_space(space: &ModelSpace) -> Self {
        Self::new(space.p(), space.q())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ProductGroupElement] {
        &self.elements
    }

    pub fn identity(&self) -> ProductGroupElement {
        ProductGroupElement::identity(self.p, self.q)
    }

    pub fn index_of(&self, g: &ProductGroupElement) -> Option<usize> {
        self.elements.iter().position(|h| h == g)
    }

    pub fn check(&self, g: &ProductGroupElement) -> Result<()> {
        if g.s.len() != self.p || g.t.len() != self.q {
            return Err(Error::Argument(format!("{g} is not in S_{} x S_{}", self.p, self.q)));
        }
        Ok(())
    }

    pub(crate) fn check_space(&self, space: &ModelSpace) -> Result<()> {
        if space.p() != self.p || space.q() != self.q {
            return Err(Error::Argument(format!(
                "group S_{} x S_{} does not act on {space}",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// Dense `P(g)` on the model space.
pub fn permutation_matrix(space: &ModelSpace, g: &ProductGroupElement) -> Mat {
    let map = space.permutation_index_map(&g.leg_perm());
    let d = space.dim();
    let mut out = Mat::zeros(d, d);
    for (i, &j) in map.iter().enumerate() {
        out[(j, i)] = crate::linalg::ONE;
    }
    out
}

/// `theta_g(a) = P(g) a P(g)*`.
pub fn theta(g: &ProductGroupElement, a: &DenseOperator) -> DenseOperator {
    let space = *a.space();
    let map = space.permutation_index_map(&g.leg_perm());
    let d = space.dim();
    let src = a.matrix();
    let mut out = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(map[i], map[j])] = src[(i, j)];
        }
    }
    DenseOperator::new(space, out).expect("same shape")
}
