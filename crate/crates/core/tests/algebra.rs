mod common;

use common::*;
use swlab::algebra::*;
use swlab::duality::{t_plus, Side};
use swlab::legops::*;
use swlab::linalg::{ginibre, haar_unitary, identity, kron, matrix_unit, Mat};
use swlab::perm::Perm;

fn dense(op: StructuredOperator) -> DenseOperator {
    op.to_dense().unwrap()
}

#[test]
fn commutant_trivial_cases() {
    let space = ModelSpace::new(2, 1, 0).unwrap();
    let c = commutant_basis(&space, &[DenseOperator::identity(space)]).unwrap();
    assert_eq!(c.dimension(), 16);
    let c = commutant_basis(&space, &[]).unwrap();
    assert_eq!(c.dimension(), 16);

    let units: Vec<DenseOperator> = (0..16)
        .map(|i| {
            let mut m = Mat::zeros(4, 4);
            m[(i / 4, i % 4)] = swlab::linalg::c(1.0);
            DenseOperator::new(space, m).unwrap()
        })
        .collect();
    let c = commutant_basis(&space, &units).unwrap();
    assert_eq!(c.dimension(), 1);
    assert!(c.gram_error() < 1e-8);
}

#[test]
fn classical_schur_weyl_commutant() {
    for n in [2usize, 3] {
        let mut r = rng(30 + n as u64);
        let space = ModelSpace::new(n, 2, 0).unwrap();
        let us: Vec<Mat> = (0..20).map(|_| haar_unitary(n, &mut r)).collect();
        let gens: Vec<DenseOperator> = us
            .iter()
            .map(|u| dense(StructuredOperator::product(space, vec![LegFactor::left(u.clone()), LegFactor::left(u.clone())]).unwrap()))
            .collect();
        let c = commutant_basis(&space, &gens).unwrap();
        // on (C^N)^(x)2 the commutant is span{I, swap}
        assert_eq!(c.reduced_dimension(), 2);
        assert_eq!(c.active_slots, vec![0, 2]);
        assert_eq!(c.dimension(), 2 * n.pow(4));
        let oracle = brute_commutant(&us.iter().map(|u| kron(u, u)).collect::<Vec<_>>());
        assert_eq!(oracle.len(), 2);
        assert!(c.gram_error() < 1e-8);
        assert!(c.is_algebra);
        // the swap of the two legs lies in the commutant
        let swap = dense(permutation_op(&space, &Perm::transposition(2, 0, 1).unwrap()).unwrap());
        assert!(c.contains(&swap, 1e-8).unwrap());
        assert!(!c.contains(&gens[0], 1e-8).unwrap());
    }
}

#[test]
fn mixed_generated_dimensions() {
    for (n, want) in [(2usize, 10usize), (3, 65)] {
        let space = ModelSpace::new(n, 1, 1).unwrap();
        let mut r = rng(40 + n as u64);
        let us: Vec<Mat> = (0..12).map(|_| haar_unitary(n, &mut r)).collect();
        let gens: Vec<DenseOperator> = us.iter().map(|u| dense(lr_representation(&space, u).unwrap())).collect();
        let (dim, basis) = generated_algebra_dim(&space, &gens).unwrap();
        assert_eq!(dim, want);
        assert_eq!(dim, n.pow(4) - 2 * n * n + 2);
        assert!(basis.is_algebra);
        assert!(basis.gram_error() < 1e-8);
        for g in &gens {
            assert!(basis.contains(g, 1e-8).unwrap());
        }
        // independent oracle on C^N (x) C^N with u (x) conj(u)
        let reduced: Vec<Mat> = us.iter().map(|u| kron(u, &u.map(|z| z.conj()))).collect();
        let first = brute_commutant(&reduced);
        assert_eq!(first.len(), 2);
        let second = brute_commutant(&first);
        assert_eq!(second.len(), want);
    }
}

#[test]
fn generated_algebra_edge_cases() {
    let space = ModelSpace::new(2, 1, 1).unwrap();
    let (dim, _) = generated_algebra_dim(&space, &[]).unwrap();
    assert_eq!(dim, 1);
    let mut r = rng(50);
    let a = ginibre(2, &mut r);
    let g = dense(left_mult(&space, &a, 0).unwrap());
    // a generic matrix generates all of M_2 on one slot
    let (dim, basis) = generated_algebra_dim(&space, std::slice::from_ref(&g)).unwrap();
    assert_eq!(dim, 4);
    assert_eq!(basis.active_slots, vec![0]);
    let comm = commutant_basis(&space, &[g]).unwrap();
    assert_eq!(comm.dimension(), 4 * 16);
    let big = ModelSpace::new(3, 2, 2).unwrap();
    assert!(matches!(commutant_basis(&big, &[]), Err(swlab::Error::CapExceeded { .. })));
}

#[test]
fn fixed_point_dimensions() {
    for n in [2usize, 3] {
        for p in 1..=3usize {
            if n.pow(2 * p as u32) > DEFAULT_DENSE_CAP {
                continue;
            }
            let b = fixed_point_basis(p, n, Side::Left).unwrap();
            assert_eq!(b.dimension() as u128, fixed_point_dimension(p, n));
            assert!(b.gram_error() < 1e-8);
            assert!(b.is_algebra);
        }
    }
    assert_eq!(fixed_point_dimension(2, 2), 10);
    assert_eq!(fixed_point_dimension(3, 2), 20);
    assert_eq!(fixed_point_dimension(0, 5), 1);
    assert_eq!(fixed_point_basis(1, 3, Side::Left).unwrap().dimension(), 9);
    let right = fixed_point_basis(2, 2, Side::Right).unwrap();
    assert_eq!(right.dimension(), 10);
    assert_eq!(right.active_slots, vec![1, 3]);
}

#[test]
fn fixed_points_are_permutation_invariant() {
    for side in [Side::Left, Side::Right] {
        let b = fixed_point_basis(3, 2, side).unwrap();
        let space = b.space;
        let elems = b.materialize(DEFAULT_DENSE_CAP).unwrap();
        for s in Perm::all(3) {
            let ps = dense(permutation_op(&space, &s).unwrap());
            for e in &elems {
                let lhs = ps.matrix() * e.matrix();
                let rhs = e.matrix() * ps.matrix();
                assert!(max_abs(&(lhs - rhs)) < 1e-10);
            }
        }
    }
}

#[test]
fn right_fixed_points_are_right_multiplications() {
    let b = fixed_point_basis(2, 2, Side::Right).unwrap();
    let space = b.space;

    // right multiplication by the symmetric tensor x on the two legs
    let mut op = StructuredOperator::zero(space);
    for (a, bb) in [((0, 1), (1, 1)), ((1, 1), (0, 1))] {
        let term = StructuredOperator::product(
            space,
            vec![LegFactor::right(matrix_unit(2, a.0, a.1)), LegFactor::right(matrix_unit(2, bb.0, bb.1))],
        )
        .unwrap();
        op = op.add(&term).unwrap();
    }
    assert!(b.contains(&dense(op), 1e-8).unwrap());
}

#[test]
fn one_sided_duality_is_exact() {
    for (p, n) in [(2usize, 2usize), (3, 2), (2, 3)] {
        let space = ModelSpace::new(n, p, 0).unwrap();
        let gens: Vec<DenseOperator> = (0..n * n)
            .map(|l| dense(t_plus(&space, &matrix_unit(n, l / n, l % n)).unwrap()))
            .collect();
        let (dim, basis) = generated_algebra_dim(&space, &gens).unwrap();
        assert_eq!(dim as u128, fixed_point_dimension(p, n));
        // generated algebra equals the fixed-point algebra, not just its dimension
        let fixed = fixed_point_basis(p, n, Side::Left).unwrap();
        for e in fixed.materialize(DEFAULT_DENSE_CAP).unwrap() {
            assert!(basis.contains(&e, 1e-8).unwrap());
        }
    }
}

#[test]
fn span_growth_rounds() {
    let r1 = span_growth_check(1, 3).unwrap();
    assert_eq!(r1.cyclic_dim, 9);
    assert_eq!(r1.rounds, 1);
    assert!(r1.pass);
    let r2 = span_growth_check(2, 2).unwrap();
    assert_eq!(r2.cyclic_dim, 10);
    assert_eq!(r2.rounds, 2);
    assert_eq!(r2.round_dims, vec![1, 4, 10]);
    assert!(r2.pass);
    let r3 = span_growth_check(3, 2).unwrap();
    assert_eq!(r3.cyclic_dim, 20);
    assert_eq!(r3.rounds, 3);
    assert!(r3.pass);
}

#[test]
fn relative_gap_values() {
    let r = relative_gap(1, 0, 2, 2, 64, 1).unwrap();
    assert_eq!((r.generated_dim, r.fixed_dim), (4, 4));
    assert!(r.saturated);
    let r2 = relative_gap(1, 1, 2, 2, 64, 1).unwrap();
    assert_eq!((r2.generated_dim, r2.fixed_dim), (10, 16));
    assert!((r2.gap - 6.0 / 16.0).abs() < 1e-15);
    let r3 = relative_gap(1, 1, 3, 2, 64, 1).unwrap();
    assert_eq!((r3.generated_dim, r3.fixed_dim), (65, 81));
    assert!(r3.gap < r2.gap);
    assert_eq!(r3.method, GapMethod::Algebra);
    let r4 = relative_gap(1, 1, 4, 2, 2048, 1).unwrap();
    assert_eq!(r4.method, GapMethod::GroupSpan);
    assert_eq!((r4.generated_dim, r4.fixed_dim), (226, 256));
    assert!(r4.saturated);
    assert!(r4.gap < r3.gap);
}

#[test]
fn group_span_agrees_with_algebra_route() {
    for (p, q, n) in [(1, 0, 2), (1, 1, 2), (2, 0, 2), (1, 1, 3), (2, 1, 2)] {
        let a = relative_gap_with(p, q, n, 4, 64, 5, GapMethod::Algebra).unwrap();
        let g = relative_gap_with(p, q, n, 4, 1024, 5, GapMethod::GroupSpan).unwrap();
        assert_eq!(a.generated_dim, g.generated_dim, "{p} {q} {n}");
        assert!(a.saturated && g.saturated);
    }
    // N^4 - 2N^2 + 2 for the mixed one-plus-one case
    for n in [2usize, 3, 4] {
        let r = relative_gap(1, 1, n, 8, 2048, 9).unwrap();
        assert_eq!(r.generated_dim, n.pow(4) - 2 * n * n + 2);
    }
    assert_eq!(group_span_dim(1, 1, 2, &[]), 0);
}

#[test]
fn slot_layout_roundtrip() {
    let space = ModelSpace::new(2, 1, 1).unwrap();
    let layout = SlotLayout::new(&space);
    let mut r = rng(60);
    let y = ginibre(4, &mut r);
    let full = layout.embed(&y, &[1, 2]);
    assert!(layout.is_inert(&full, 0, 1e-12));
    assert!(layout.is_inert(&full, 3, 1e-12));
    assert!(!layout.is_inert(&full, 1, 1e-12));
    assert_eq!(layout.reduce(&full, &[1, 2]), y);
    assert_eq!(layout.embed(&identity(1), &[]), identity(16));
}
