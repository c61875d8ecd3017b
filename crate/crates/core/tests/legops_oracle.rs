mod common;

use common::*;
use num_complex::Complex64;
use swlab::legops::*;
use swlab::linalg::{c, ginibre, haar_unitary, matrix_unit, random_vector, Mat, Vector};
use swlab::perm::Perm;

const SIZES: [(usize, usize, usize); 4] = [(2, 1, 0), (2, 1, 1), (3, 1, 0), (2, 0, 2)];

#[test]
fn to_dense_matches_oracle() {
    let mut r = rng(1);
    for (n, p, q) in SIZES {
        let space = ModelSpace::new(n, p, q).unwrap();
        let x = random_operator(&space, 3, &mut r);
        let dense = x.to_dense().unwrap();
        assert!(rel_err(dense.matrix(), &oracle_dense(&x)) < 1e-12);
    }
}

#[test]
fn compose_adjoint_trace_apply_match_dense() {
    let mut r = rng(2);
    for (n, p, q) in SIZES {
        let space = ModelSpace::new(n, p, q).unwrap();
        for _ in 0..4 {
            let x = random_operator(&space, 2, &mut r);
            let y = random_operator(&space, 2, &mut r);
            let dx = oracle_dense(&x);
            let dy = oracle_dense(&y);

            let xy = x.compose(&y).unwrap();
            assert!(rel_err(&oracle_dense(&xy), &(&dx * &dy)) < 1e-10);

            assert!(rel_err(&oracle_dense(&x.adjoint()), &dx.adjoint()) < 1e-10);

            let tr = dx.trace() / c(space.dim() as f64);
            assert!((x.normalized_trace() - tr).norm() <= 1e-10 * tr.norm().max(1.0));

            let v = random_vector(space.dim(), &mut r);
            let got = x.apply(&v).unwrap();
            let want: Vector = &dx * &v;
            assert!((got - &want).norm() <= 1e-10 * want.norm());
        }
    }
}

#[test]
fn trace_is_cyclic_and_positive() {
    let mut r = rng(3);
    for (n, p, q) in SIZES {
        let space = ModelSpace::new(n, p, q).unwrap();
        let x = random_operator(&space, 3, &mut r);
        let y = random_operator(&space, 2, &mut r);
        let a = x.compose(&y).unwrap().normalized_trace();
        let b = y.compose(&x).unwrap().normalized_trace();
        assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        let pos = x.adjoint().compose(&x).unwrap().normalized_trace();
        assert!(pos.re > 0.0 && pos.im.abs() < 1e-10 * pos.re);
    }
    let space = ModelSpace::new(2, 1, 1).unwrap();
    let zero = StructuredOperator::zero(space);
    assert_eq!(zero.adjoint().compose(&zero).unwrap().normalized_trace(), c(0.0));
}

#[test]
fn left_mult_on_basis_vector() {
    let space = ModelSpace::new(2, 1, 1).unwrap();
    let mut r = rng(4);
    let a = ginibre(2, &mut r);
    let op = left_mult(&space, &a, 1).unwrap();
    // e_11 (x) e_11 is flat index 0; leg 1 becomes a e_11
    let mut v = Vector::zeros(space.dim());
    v[0] = c(1.0);
    let w = op.apply(&v).unwrap();
    for idx in 0..space.dim() {
        let d = digits(&space, idx);
        let expect = if d[0] == (0, 0) && d[1].1 == 0 { a[(d[1].0, 0)] } else { c(0.0) };
        assert!((w[idx] - expect).norm() < 1e-14);
    }
}

#[test]
fn algebraic_identities() {
    let space = ModelSpace::new(3, 1, 1).unwrap();
    let mut r = rng(5);
    let a = ginibre(3, &mut r);
    let b = ginibre(3, &mut r);
    let id = StructuredOperator::identity(space);
    assert!(left_mult(&space, &Mat::identity(3, 3), 0).unwrap().sub(&id).unwrap().is_zero(1e-12));

    let lhs = left_mult(&space, &a, 0).unwrap().compose(&left_mult(&space, &b, 0).unwrap()).unwrap();
    assert!(lhs.sub(&left_mult(&space, &(&a * &b), 0).unwrap()).unwrap().is_zero(1e-12));

    let rhs = right_mult(&space, &a, 1).unwrap().compose(&right_mult(&space, &b, 1).unwrap()).unwrap();
    assert!(rhs.sub(&right_mult(&space, &(&b * &a), 1).unwrap()).unwrap().is_zero(1e-12));

    let comm = left_mult(&space, &a, 1).unwrap().commutator(&right_mult(&space, &b, 1).unwrap()).unwrap();
    assert!(comm.is_zero(1e-12));

    let swap = permutation_op(&space, &Perm::transposition(2, 0, 1).unwrap()).unwrap();
    let conj = swap.compose(&left_mult(&space, &a, 0).unwrap()).unwrap().compose(&swap).unwrap();
    assert!(conj.sub(&left_mult(&space, &a, 1).unwrap()).unwrap().is_zero(1e-12));
    assert!(swap.compose(&swap).unwrap().sub(&id).unwrap().is_zero(0.0));

    // trace of the swap is 1/N^2
    assert!((swap.normalized_trace() - c(1.0 / 9.0)).norm() < 1e-15);
    let s2 = ModelSpace::new(2, 2, 0).unwrap();
    let sw2 = permutation_op(&s2, &Perm::transposition(2, 0, 1).unwrap()).unwrap();
    assert!((sw2.normalized_trace() - c(0.25)).norm() < 1e-15);
    let dense_tr = oracle_dense(&sw2).trace() / c(16.0);
    assert!((dense_tr - c(0.25)).norm() < 1e-15);

    assert!((left_mult(&space, &a, 0).unwrap().normalized_trace() - a.trace() / c(3.0)).norm() < 1e-12);
}

#[test]
fn permutation_action_is_a_group_action() {
    let space = ModelSpace::new(2, 2, 1).unwrap();
    for s in Perm::all(3) {
        for t in Perm::all(3) {
            let lhs = permutation_op(&space, &s).unwrap().compose(&permutation_op(&space, &t).unwrap()).unwrap();
            let rhs = permutation_op(&space, &s.compose(&t)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn j_conjugation() {
    let space = ModelSpace::new(2, 2, 0).unwrap();
    let mut r = rng(6);
    let a = ginibre(2, &mut r);
    let b = ginibre(2, &mut r);
    let ja = left_mult(&space, &a, 1).unwrap().j_conjugate();
    assert_eq!(ja, right_mult(&space, &a.adjoint(), 1).unwrap());
    let id = StructuredOperator::identity(space);
    assert_eq!(id.j_conjugate(), id);
    // left operators commute with J-conjugated left operators
    let x = left_mult(&space, &a, 0).unwrap().add(&left_mult(&space, &b, 1).unwrap()).unwrap();
    let y = left_mult(&space, &b, 0).unwrap().compose(&left_mult(&space, &a, 1).unwrap()).unwrap();
    assert!(x.commutator(&y.j_conjugate()).unwrap().is_zero(1e-12));
    // dense check of J X J on a random operator
    let z = random_operator(&space, 2, &mut r);
    let jz = oracle_dense(&z.j_conjugate());
    let dz = oracle_dense(&z);
    let v = random_vector(space.dim(), &mut r);
    // J acts on a vector by conjugating every leg matrix: transpose rows/cols and conjugate
    let jmap = |v: &Vector| -> Vector {
        let mut out = Vector::zeros(v.len());
        for idx in 0..v.len() {
            let d: Vec<(usize, usize)> = digits(&space, idx).into_iter().map(|(r, c)| (c, r)).collect();
            out[flat(&space, &d)] = v[idx].conj();
        }
        out
    };
    let want = jmap(&(&dz * jmap(&v)));
    assert!((&jz * &v - want).norm() < 1e-10);
}

#[test]
fn canonical_form_is_order_independent() {
    let space = ModelSpace::new(2, 1, 1).unwrap();
    let mut r = rng(7);
    let mut terms: Vec<OperatorTerm> = (0..5).map(|_| random_term(&space, &mut r)).collect();
    let dup = terms[0].clone();
    terms.push(dup);
    let a = StructuredOperator::from_terms(space, terms.clone()).unwrap();
    terms.reverse();
    let b = StructuredOperator::from_terms(space, terms).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.terms().len(), 5);
    // a zero matrix factor kills the term
    let mut t = OperatorTerm::identity(2);
    t.factors[0] = LegFactor::left(matrix_unit(2, 0, 1) * matrix_unit(2, 0, 1));
    assert!(StructuredOperator::from_terms(space, vec![t]).unwrap().is_symbolically_zero());
}

#[test]
fn operator_norm_matches_svd() {
    let mut r = rng(8);
    for (n, p, q) in SIZES {
        let space = ModelSpace::new(n, p, q).unwrap();
        let x = random_operator(&space, 2, &mut r);
        let svd = oracle_dense(&x).svd(false, false).singular_values.max();
        let got = operator_norm(&x, 1e-10).unwrap();
        assert!((got - svd).abs() <= 1e-8 * svd, "{got} vs {svd}");
    }
    let space = ModelSpace::new(3, 1, 1).unwrap();
    assert!((operator_norm(&StructuredOperator::identity(space), 1e-10).unwrap() - 1.0).abs() < 1e-10);
    let u = haar_unitary(3, &mut r);
    let w = haar_unitary(3, &mut r);
    let unitary = StructuredOperator::product(
        space,
        vec![LegFactor::sandwich(u.clone(), w), LegFactor::right(u)],
    )
    .unwrap()
    .compose(&permutation_op(&space, &Perm::transposition(2, 0, 1).unwrap()).unwrap())
    .unwrap();
    assert!((operator_norm(&unitary, 1e-10).unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(operator_norm(&StructuredOperator::zero(space), 1e-10).unwrap(), 0.0);
}

#[test]
fn dense_cap_and_errors() {
    let space = ModelSpace::new(3, 2, 2).unwrap();
    assert!(matches!(
        StructuredOperator::identity(space).to_dense(),
        Err(swlab::Error::CapExceeded { dimension: 6561, cap: 4096 })
    ));
    assert!(left_mult(&space, &Mat::identity(3, 3), 4).is_err());
    let other = ModelSpace::new(2, 1, 0).unwrap();
    assert!(StructuredOperator::identity(space).compose(&StructuredOperator::identity(other)).is_err());
    assert!(StructuredOperator::identity(other).apply(&Vector::zeros(3)).is_err());
    assert!(ModelSpace::new(1, 1, 0).is_err());
    assert!(ModelSpace::new(2, 0, 0).is_err());
}

#[test]
fn binary_roundtrip() {
    let space = ModelSpace::new(2, 1, 1).unwrap();
    let mut r = rng(9);
    let x = random_operator(&space, 2, &mut r).to_dense().unwrap();
    let mut buf = Vec::new();
    x.write_binary(&mut buf).unwrap();
    // header is JSON after the magic and length prefix
    let len = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let header: serde_json::Value = serde_json::from_slice(&buf[8..8 + len]).unwrap();
    assert_eq!(header["N"], 2);
    assert_eq!(header["m"], 2);
    assert_eq!(buf.len(), 8 + len + 16 * 16 * 16);
    // first entry, row-major, little-endian re then im
    let re = f64::from_le_bytes(buf[8 + len..16 + len].try_into().unwrap());
    assert_eq!(re, x.matrix()[(0, 0)].re);
    let back = DenseOperator::read_binary(buf.as_slice()).unwrap();
    assert_eq!(back, x);

    let v = random_vector(space.dim(), &mut r);
    let mut vb = Vec::new();
    write_vector(&mut vb, &space, &v).unwrap();
    let (s2, v2) = read_vector(vb.as_slice()).unwrap();
    assert_eq!(s2, space);
    assert_eq!(v2, v);
    assert_eq!(v2[1], Complex64::new(v[1].re, v[1].im));
}
