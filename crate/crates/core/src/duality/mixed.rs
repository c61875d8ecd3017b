use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::legops::{left_mult, permutation_op, right_mult, ModelSpace, StructuredOperator};
use crate::linalg::{c, Mat};
use crate::perm::Perm;
use crate::symcomb::{character, enumerate_partitions, factorial, CycleType, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `sum_k l_k(a) - sum_k r_k(a)` over left and right legs.
pub fn t_mixed(space: &ModelSpace, a: &Mat) -> Result<StructuredOperator> {
    let plus = sum_left(space, a)?;
    let minus = sum_right(space, a)?;
    plus.sub(&minus)
}

pub fn t_plus(space: &ModelSpace, a: &Mat) -> Result<StructuredOperator> {
    if space.p() == 0 {
        return Err(argument("t_plus needs at least one left leg"));
    }
    sum_left(space, a)
}

pub fn t_minus(space: &ModelSpace, a: &Mat) -> Result<StructuredOperator> {
    if space.q() == 0 {
        return Err(argument("t_minus needs at least one right leg"));
    }
    sum_right(space, a)
}

fn sum_left(space: &ModelSpace, a: &Mat) -> Result<StructuredOperator> {
    let ops = (0..space.p())
        .map(|k| left_mult(space, a, k))
        .collect::<Result<Vec<_>>>()?;
    StructuredOperator::sum(*space, &ops)
}

fn sum_right(space: &ModelSpace, a: &Mat) -> Result<StructuredOperator> {
    let ops = (space.p()..space.legs())
        .map(|k| right_mult(space, a, k))
        .collect::<Result<Vec<_>>>()?;
    StructuredOperator::sum(*space, &ops)
}

/// `(dim lambda / p!) sum_s chi(s) P(s)` with `s` permuting the legs of one side.
pub fn young_projection(space: &ModelSpace, lambda: &Partition, side: Side) -> Result<StructuredOperator> {
    let (offset, width) = match side {
        Side::Left => (0, space.p()),
        Side::Right => (space.p(), space.q()),
    };
    if lambda.weight() != width {
        return Err(Error::WeightMismatch { expected: width, got: lambda.weight() });
    }
    let scale = lambda.dimension() as f64 / factorial(width) as f64;
    let mut ops = Vec::new();
    for s in Perm::all(width) {
        let chi = character(lambda, &CycleType::of(&s))?;
        if chi == 0 {
            continue;
        }
        let op = permutation_op(space, &s.embed(offset, space.legs()))?;
        ops.push(op.scaled(c(scale * chi as f64)));
    }
    StructuredOperator::sum(*space, &ops)
}

/// All Young projections of one side, in partition order.
pub fn young_projections(space: &ModelSpace, side: Side) -> Result<Vec<(Partition, StructuredOperator)>> {
    let width = match side {
        Side::Left => space.p(),
        Side::Right => space.q(),
    };
    enumerate_partitions(width)
        .into_iter()
        .map(|l| young_projection(space, &l, side).map(|op| (l, op)))
        .collect()
}
