use serde::{Deserialize, Serialize};

use super::haar::{haar_pair_average, AveragingGroup, PairMode};
use super::mixed::{t_minus, t_plus};
use crate::error::{argument, Result};
use crate::legops::{left_mult, operator_norm, right_mult, ModelSpace, StructuredOperator};
use crate::linalg::{c, is_unitary, spectral_norm, Mat, Vector, ONE};

/// Cross terms of `T(au*) T(u)` that are not single-leg.
pub fn sigma_residual(space: &ModelSpace, a: &Mat, u: &Mat) -> Result<StructuredOperator> {
    if !is_unitary(u, 1e-10) {
        return Err(argument("u is not unitary within 1e-10"));
    }
    let us = u.adjoint();
    let (p, m) = (space.p(), space.legs());
    let mut ops = Vec::new();
    for k in 0..p {
        for j in (0..p).filter(|&j| j != k) {
            ops.push(chain(&[
                left_mult(space, a, k)?,
                left_mult(space, &us, k)?,
                left_mult(space, u, j)?,
            ])?);
        }
    }
    for k in p..m {
        for j in (p..m).filter(|&j| j != k) {
            ops.push(chain(&[
                right_mult(space, &us, k)?,
                right_mult(space, u, j)?,
                right_mult(space, a, k)?,
            ])?);
        }
    }
    for k in 0..p {
        for j in p..m {
            ops.push(
                chain(&[left_mult(space, a, k)?, left_mult(space, &us, k)?, right_mult(space, u, j)?])?
                    .scaled(-ONE),
            );
            ops.push(
                chain(&[left_mult(space, u, k)?, right_mult(space, &us, j)?, right_mult(space, a, j)?])?
                    .scaled(-ONE),
            );
        }
    }
    StructuredOperator::sum(*space, &ops)
}

fn chain(ops: &[StructuredOperator]) -> Result<StructuredOperator> {
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = acc.compose(op)?;
    }
    Ok(acc)
}

/// Exact group average of `T(au*) T(u)`, assembled from pair averages.
pub fn exact_tt_average(space: &ModelSpace, group: &AveragingGroup, a: &Mat) -> Result<StructuredOperator> {
    let (p, m) = (space.p(), space.legs());
    let ea = group.expectation(a)?;
    let mut ops = Vec::new();
    for k in 0..p {
        ops.push(left_mult(space, a, k)?);
    }
    for k in p..m {
        ops.push(right_mult(space, &ea, k)?);
    }
    for k in 0..p {
        for j in (0..p).filter(|&j| j != k) {
            let t = haar_pair_average(space, group, k, j, PairMode::Ll)?;
            ops.push(left_mult(space, a, k)?.compose(&t)?);
        }
    }
    for k in p..m {
        for j in (p..m).filter(|&j| j != k) {
            let t = haar_pair_average(space, group, k, j, PairMode::Rr)?;
            ops.push(t.compose(&right_mult(space, a, k)?)?);
        }
    }
    for k in 0..p {
        for j in p..m {
            let pk = haar_pair_average(space, group, k, j, PairMode::Lr)?;
            ops.push(left_mult(space, a, k)?.compose(&pk)?.scaled(-ONE));
            ops.push(pk.compose(&right_mult(space, a, j)?)?.scaled(-ONE));
        }
    }
    StructuredOperator::sum(*space, &ops)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitFormulaReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub a_norm: f64,
    /// `|| avg T(au*)T(u) - (T+(a) - T-(E(a))) ||`.
    pub residual_norm: f64,
    /// `2 ||a||^2 (p+q)^2 / N`.
    pub bound: f64,
    /// Same residual against `T+(a) + T-(E(a))`, i.e. the averaged cross terms alone.
    pub corrected_residual_norm: f64,
    /// Corrected residual applied to the unit trace vector `I (x) ... (x) I`.
    pub trace_vector_residual: f64,
}

/// Compares the exact average of `T(au*)T(u)` with `T+(a) - T-(E(a))`.
pub fn limit_formula_check(
    space: &ModelSpace,
    group: &AveragingGroup,
    a: &Mat,
    tolerance: f64,
) -> Result<LimitFormulaReport> {
    let avg = exact_tt_average(space, group, a)?;
    let ea = group.expectation(a)?;
    let plus = if space.p() > 0 { t_plus(space, a)? } else { StructuredOperator::zero(*space) };
    let minus = if space.q() > 0 { t_minus(space, &ea)? } else { StructuredOperator::zero(*space) };
    let literal = avg.sub(&plus.sub(&minus)?)?;
    let corrected = avg.sub(&plus.add(&minus)?)?;
    let a_norm = spectral_norm(a);
    let m = space.legs() as f64;
    Ok(LimitFormulaReport {
        n: space.n(),
        p: space.p(),
        q: space.q(),
        a_norm,
        residual_norm: operator_norm(&literal, tolerance)?,
        bound: 2.0 * a_norm * a_norm * m * m / space.n() as f64,
        corrected_residual_norm: operator_norm(&corrected, tolerance)?,
        trace_vector_residual: corrected.apply(&trace_vector(space))?.norm(),
    })
}

/// Unit vector `I (x) ... (x) I` in the normalized-trace inner product.
fn trace_vector(space: &ModelSpace) -> Vector {
    let n = space.n();
    let mut v = Vector::zeros(space.dim());
    let scale = (n as f64).powi(space.legs() as i32).sqrt();
    for idx in 0..space.dim() {
        let mut rest = idx;
        let mut diag = true;
        for _ in 0..space.legs() {
            let col = rest % n;
            rest /= n;
            let row = rest % n;
            rest /= n;
            diag &= row == col;
        }
        if diag {
            v[idx] = c(1.0 / scale);
        }
    }
    v
}
