use super::basis::{orthonormal_elements, vec_row, AlgebraBasis, InertPart};
use super::slots::SlotLayout;
use crate::error::{Error, Result};
use crate::legops::{DenseOperator, ModelSpace, DEFAULT_DENSE_CAP};
use crate::linalg::{identity, max_abs, Mat, NullSpaceAccumulator, OrthoBasis, Vector};

/// Singular-value cutoff, relative to the largest, for rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Tolerance for deciding that a generator acts trivially on a tensor slot.
pub const SLOT_TOLERANCE: f64 = 1e-10;

/// Generators restricted to the slots on which at least one of them acts.
#[derive(Debug, Clone)]
pub struct ReducedGenerators {
    pub space: ModelSpace,
    pub active_slots: Vec<usize>,
    pub matrices: Vec<Mat>,
}

impl ReducedGenerators {
    pub fn new(space: &ModelSpace, generators: &[DenseOperator]) -> Result<Self> {
        for g in generators {
            space.ensure_same(g.space())?;
        }
        let layout = SlotLayout::new(space);
        let mats: Vec<&Mat> = generators.iter().map(|g| g.matrix()).collect();
        let active_slots = layout.active_slots(&mats, SLOT_TOLERANCE);
        let matrices = mats.iter().map(|m| layout.reduce(m, &active_slots)).collect();
        Ok(Self { space: *space, active_slots, matrices })
    }

    pub fn active_dim(&self) -> usize {
        self.space.n().pow(self.active_slots.len() as u32)
    }

    /// Generators closed under adjoints, skipping self-adjoint duplicates.
    fn with_adjoints(&self) -> Vec<Mat> {
        let mut out = Vec::with_capacity(2 * self.matrices.len());
        for g in &self.matrices {
            out.push(g.clone());
            let a = g.adjoint();
            if max_abs(&(&a - g)) > SLOT_TOLERANCE * max_abs(g).max(1e-300) {
                out.push(a);
            }
        }
        out
    }
}

fn check_cap(space: &ModelSpace) -> Result<()> {
    if space.dim() > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { dimension: space.dim(), cap: DEFAULT_DENSE_CAP });
    }
    Ok(())
}

/// Null space of `X -> [G, X]` for every generator, on `d x d` matrices.
fn reduced_commutant(gens: &[Mat], d: usize) -> Vec<Mat> {
    let mut acc = NullSpaceAccumulator::new(d * d);
    let eye = identity(d);
    let mut scale: f64 = 0.0;
    for g in gens {
        scale = scale.max(g.norm());
        // row-major vec: vec(GX - XG) = (G (x) I - I (x) G^T) vec(X)
        let block = g.kronecker(&eye) - eye.kronecker(&g.transpose());
        acc.push(&block);
    }
    let null = acc.finish_with_scale(RANK_TOLERANCE, scale);
    let vectors: Vec<Vector> = (0..null.ncols()).map(|j| null.column(j).into_owned()).collect();
    orthonormal_elements(vectors, d)
}

/// Commutant of `{G_i, G_i*}` on the model space.
pub fn commutant_basis(space: &ModelSpace, generators: &[DenseOperator]) -> Result<AlgebraBasis> {
    check_cap(space)?;
    let red = ReducedGenerators::new(space, generators)?;
    let elements = reduced_commutant(&red.with_adjoints(), red.active_dim());
    let mut basis = AlgebraBasis {
        space: *space,
        active_slots: red.active_slots,
        elements,
        inert: InertPart::Full,
        is_algebra: false,
    };
    basis.is_algebra = basis.check_closure(64, 1e-8);
    Ok(basis)
}

/// Double commutant of the generators; always contains the identity.
pub fn bicommutant_basis(space: &ModelSpace, generators: &[DenseOperator]) -> Result<AlgebraBasis> {
    check_cap(space)?;
    let red = ReducedGenerators::new(space, generators)?;
    let d = red.active_dim();
    let first = reduced_commutant(&red.with_adjoints(), d);
    let elements = reduced_commutant(&first, d);
    let mut basis = AlgebraBasis {
        space: *space,
        active_slots: red.active_slots,
        elements,
        inert: InertPart::Identity,
        is_algebra: false,
    };
    basis.is_algebra = basis.check_closure(64, 1e-8);
    Ok(basis)
}

/// Span of all words in the generators and their adjoints, grown from the
/// identity by left multiplication until no new direction appears.
pub fn span_closure(space: &ModelSpace, generators: &[DenseOperator]) -> Result<AlgebraBasis> {
    check_cap(space)?;
    let red = ReducedGenerators::new(space, generators)?;
    let d = red.active_dim();
    let gens = red.with_adjoints();
    let mut ob = OrthoBasis::new();
    let mut mats = vec![identity(d)];
    ob.try_add(&vec_row(&mats[0]), RANK_TOLERANCE);
    let mut next = 0;
    while next < mats.len() && ob.len() < d * d {
        let b = mats[next].clone();
        next += 1;
        for g in &gens {
            let w = g * &b;
            if ob.try_add(&vec_row(&w), RANK_TOLERANCE) {
                mats.push(w);
            }
        }
    }
    let elements = orthonormal_elements(ob.into_vectors(), d);
    let mut basis = AlgebraBasis {
        space: *space,
        active_slots: red.active_slots,
        elements,
        inert: InertPart::Identity,
        is_algebra: false,
    };
    basis.is_algebra = basis.check_closure(64, 1e-8);
    Ok(basis)
}

/// Dimension of the unital *-algebra generated by `generators`, computed as a
/// double commutant and as a span closure; the two must agree.
pub fn generated_algebra_dim(space: &ModelSpace, generators: &[DenseOperator]) -> Result<(usize, AlgebraBasis)> {
    let bicomm = bicommutant_basis(space, generators)?;
    let span = span_closure(space, generators)?;
    if bicomm.dimension() != span.dimension() {
        return Err(Error::Numeric(format!(
            "bicommutant dimension {} disagrees with span closure {}",
            bicomm.dimension(),
            span.dimension()
        )));
    }
    Ok((bicomm.dimension(), bicomm))
}

