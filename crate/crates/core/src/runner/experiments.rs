use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Check, Context, Defaults, ExperimentConfig, ExperimentSpec};
use crate::algebra::{
    commutant_basis, fixed_point_dimension, generated_algebra_dim, lr_representation, relative_gap, span_growth_check,
};
use crate::crossed::{
    center_basis, compression_check, equivalence_criterion, tau_prime_dense, tau_prime_table, trace_inequality_check,
    write_tau_prime_csv, CrossedOperator, ProductGroup, ProductGroupElement,
};
use crate::duality::{
    conditional_expectation, dyadic_witness, haar_average_mc, haar_pair_average_exact, limit_formula_check,
    sigma_residual, spectral_binning, t_minus, t_mixed, t_plus, young_projections, AveragingGroup, DyadicWitness,
    HaarConfig, PairMode, Side, SubfactorTower,
};
use crate::error::{argument, Result};
use crate::legops::{
    left_mult, operator_norm, right_mult, DenseOperator, LegFactor, ModelSpace, StructuredOperator,
};
use crate::linalg::{c, ginibre, haar_unitary, identity, matrix_unit, max_abs, ntrace, random_hermitian, spectral_norm, Mat};
use crate::symcomb::{enumerate_partitions, factorial};

const fn d(n: usize, p: usize, q: usize, samples: usize) -> Defaults {
    Defaults { n, p, q, samples }
}

fn no_dense(_: &ExperimentConfig) -> Option<usize> {
    None
}

fn model_dense(c: &ExperimentConfig) -> Option<usize> {
    Some((c.n * c.n).saturating_pow((c.p + c.q) as u32))
}

fn crossed_dense(c: &ExperimentConfig) -> Option<usize> {
    model_dense(c).map(|d| d.saturating_mul((factorial(c.p) * factorial(c.q)) as usize))
}

fn one_sided_dense(c: &ExperimentConfig) -> Option<usize> {
    Some((c.n * c.n).saturating_pow(c.p.max(c.q) as u32))
}

pub(super) static REGISTRY: &[ExperimentSpec] = &[
    ExperimentSpec {
        name: "young-check",
        description: "Young projections: self-adjoint, idempotent, orthogonal, complete, commuting with T+/T-",
        defaults: d(2, 3, 0, 2),
        dense_dim: no_dense,
        run: young_check,
    },
    ExperimentSpec {
        name: "haar-relations",
        description: "Matrix-unit pair averages: exact algebraic relations and Monte Carlo agreement",
        defaults: d(2, 1, 1, 10_000),
        dense_dim: model_dense,
        run: haar_relations,
    },
    ExperimentSpec {
        name: "sigma-decay",
        description: "Exact expansion of T(au*)T(u) and the size of the averaged remainder",
        defaults: d(2, 1, 1, 20),
        dense_dim: no_dense,
        run: sigma_decay,
    },
    ExperimentSpec {
        name: "limit-formula",
        description: "Averaged T(au*)T(u) against T+(a) - T-(E(a)) at N, 2N and 4N",
        defaults: d(2, 1, 1, 1),
        dense_dim: no_dense,
        run: limit_formula,
    },
    ExperimentSpec {
        name: "cond-expectation",
        description: "Conditional expectations of the dyadic tower inside M_N",
        defaults: d(4, 0, 0, 5),
        dense_dim: no_dense,
        run: cond_expectation,
    },
    ExperimentSpec {
        name: "commutant-dims",
        description: "Generated algebras and commutants against fixed-point and permutation dimensions",
        defaults: d(2, 2, 0, 8),
        dense_dim: model_dense,
        run: commutant_dims,
    },
    ExperimentSpec {
        name: "span-growth",
        description: "Cyclic subspace growth from the identity vector under T+(b_l)",
        defaults: d(2, 2, 0, 0),
        dense_dim: one_sided_dense,
        run: span_growth,
    },
    ExperimentSpec {
        name: "relative-gap",
        description: "Generated dimension of u (x) conj(u) tensor powers against the fixed-point product, N = 2..N",
        defaults: d(3, 1, 1, 2048),
        dense_dim: no_dense,
        run: relative_gap_exp,
    },
    ExperimentSpec {
        name: "crossed-center",
        description: "Crossed product by S_p x S_q: covariance relations, trace and center dimension",
        defaults: d(2, 2, 0, 3),
        dense_dim: crossed_dense,
        run: crossed_center,
    },
    ExperimentSpec {
        name: "compression-check",
        description: "Compression by the averaged group projection onto the fixed-point algebra",
        defaults: d(2, 2, 0, 3),
        dense_dim: crossed_dense,
        run: compression,
    },
    ExperimentSpec {
        name: "trace-table",
        description: "Trace of the central projections P^lambda (x) P^mu and the equivalence classes",
        defaults: d(2, 3, 0, 0),
        dense_dim: no_dense,
        run: trace_table,
    },
    ExperimentSpec {
        name: "trace-inequality",
        description: "|tr(U_s (u_1 (x) .. (x) u_m))| <= 1/N over Haar tuples, with the equality case",
        defaults: d(2, 2, 0, 100),
        dense_dim: no_dense,
        run: trace_inequality,
    },
    ExperimentSpec {
        name: "spectral-binning",
        description: "Spectral binning of random Hermitian matrices and its dyadic realization",
        defaults: d(2, 0, 0, 50),
        dense_dim: no_dense,
        run: spectral_binning_exp,
    },
];

fn rng(ctx: &Context) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ctx.seed)
}

fn space(ctx: &Context) -> Result<ModelSpace> {
    ModelSpace::new(ctx.config.n, ctx.config.p, ctx.config.q)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn young_check(ctx: &mut Context) -> Result<()> {
    let space = space(ctx)?;
    let tol = ctx.tol("young", 1e-10);
    let mut r = rng(ctx);
    let id = StructuredOperator::identity(space);
    for side in [Side::Left, Side::Right] {
        let weight = if side == Side::Left { space.p() } else { space.q() };
        if weight == 0 {
            continue;
        }
        let name = side_name(side);
        let projs = young_projections(&space, side)?;
        let (mut adj, mut idem, mut orth, mut comm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut total = StructuredOperator::zero(space);
        let gens: Vec<StructuredOperator> = (0..ctx.config.samples.max(1))
            .map(|_| {
                let a = ginibre(space.n(), &mut r);
                if side == Side::Left { t_plus(&space, &a) } else { t_minus(&space, &a) }
            })
            .collect::<Result<_>>()?;
        for (i, (_, pr)) in projs.iter().enumerate() {
            adj = adj.max(pr.sub(&pr.adjoint())?.probe_norm());
            idem = idem.max(pr.compose(pr)?.sub(pr)?.probe_norm());
            for (_, other) in &projs[i + 1..] {
                orth = orth.max(pr.compose(other)?.probe_norm());
            }
            for g in &gens {
                comm = comm.max(pr.commutator(g)?.probe_norm());
            }
            total = total.add(pr)?;
        }
        ctx.push(Check::zero(format!("{name}_self_adjoint"), adj, tol));
        ctx.push(Check::zero(format!("{name}_idempotent"), idem, tol));
        ctx.push(Check::zero(format!("{name}_orthogonal"), orth, tol));
        ctx.push(Check::zero(format!("{name}_resolution"), total.sub(&id)?.probe_norm(), tol));
        ctx.push(Check::zero(format!("{name}_commutes_with_derivation"), comm, tol));
        ctx.observe(format!("{name}_projections"), projs.len() as f64);
    }
    if ctx.checks.is_empty() {
        return Err(argument("young-check needs p > 0 or q > 0"));
    }
    Ok(())
}

fn pair_mc(space: &ModelSpace, k: usize, j: usize, config: &HaarConfig) -> Result<f64> {
    let mode = match (space.is_left_leg(k), space.is_left_leg(j)) {
        (true, true) => PairMode::Ll,
        (false, false) => PairMode::Rr,
        _ => PairMode::Lr,
    };
    let exact = haar_pair_average_exact(space, k, j, mode)?.to_dense()?.into_matrix();
    let leg = |x: &Mat, leg: usize| if space.is_left_leg(leg) { left_mult(space, x, leg) } else { right_mult(space, x, leg) };
    let mc = haar_average_mc(space, &AveragingGroup::Full, |u| leg(&u.adjoint(), k)?.compose(&leg(u, j)?), config)?;
    Ok(mc.z_score(&exact))
}

fn haar_relations(ctx: &mut Context) -> Result<()> {
    let space = space(ctx)?;
    let (p, q, n) = (space.p(), space.q(), space.n());
    if p + q < 2 {
        return Err(argument("haar-relations needs at least two legs"));
    }
    let tol = ctx.tol("haar", 1e-12);
    let id = StructuredOperator::identity(space);
    let inv_n = 1.0 / n as f64;
    let mut pairs = Vec::new();
    if p >= 2 {
        pairs.push(("ll", 0, 1));
    }
    if q >= 2 {
        pairs.push(("rr", p, p + 1));
    }
    if p >= 1 && q >= 1 {
        pairs.push(("lr", 0, p));
    }
    for &(label, k, j) in &pairs {
        let mode = match label {
            "ll" => PairMode::Ll,
            "rr" => PairMode::Rr,
            _ => PairMode::Lr,
        };
        let t = haar_pair_average_exact(&space, k, j, mode)?;
        let sq = t.compose(&t)?;
        ctx.push(Check::zero(format!("{label}_self_adjoint"), t.sub(&t.adjoint())?.probe_norm(), tol));
        if mode == PairMode::Lr {
            ctx.push(Check::zero("lr_square_equals_p_over_n", sq.sub(&t.scaled(c(inv_n)))?.probe_norm(), tol));
            ctx.push(Check::zero("lr_square_equals_p", sq.sub(&t)?.probe_norm(), tol));
            ctx.observe("lr_normalized_trace", t.normalized_trace().re);
        } else {
            ctx.push(Check::zero(
                format!("{label}_square_equals_n_inv_squared"),
                sq.sub(&id.scaled(c(inv_n * inv_n)))?.probe_norm(),
                tol,
            ));
        }
    }
    let config = HaarConfig::new(ctx.config.samples, ctx.seed)?;
    let z_tol = ctx.tol("mc_z", 0.0);
    for &(label, k, j) in &pairs {
        let z = pair_mc(&space, k, j, &config)?;
        ctx.push(Check::at_most(format!("{label}_monte_carlo_z"), z, 3.0, z_tol));
    }
    Ok(())
}

fn expansion_residual(space: &ModelSpace, a: &Mat, u: &Mat) -> Result<f64> {
    let us = u.adjoint();
    let lhs = t_mixed(space, &(a * &us))?.compose(&t_mixed(space, u)?)?;
    let mut rhs = sigma_residual(space, a, u)?;
    let uau = u * a * &us;
    for k in 0..space.legs() {
        let term = if space.is_left_leg(k) { left_mult(space, a, k)? } else { right_mult(space, &uau, k)? };
        rhs = rhs.add(&term)?;
    }
    Ok(lhs.sub(&rhs)?.probe_norm())
}

fn sigma_decay(ctx: &mut Context) -> Result<()> {
    let space = space(ctx)?;
    let tol = ctx.tol("expansion", 1e-10);
    let mut r = rng(ctx);
    let mut worst = 0.0f64;
    for _ in 0..ctx.config.samples.max(1) {
        let a = ginibre(space.n(), &mut r);
        let u = haar_unitary(space.n(), &mut r);
        worst = worst.max(expansion_residual(&space, &a, &u)?);
    }
    ctx.push(Check::zero("expansion_exact", worst, tol));
    let a = normalized_hermitian(space.n(), &mut r);
    let rep = limit_formula_check(&space, &AveragingGroup::Full, &a, 1e-10)?;
    ctx.observe("averaged_remainder_norm", rep.corrected_residual_norm);
    ctx.observe("averaged_remainder_on_trace_vector", rep.trace_vector_residual);
    ctx.push(Check::at_most("averaged_remainder_on_trace_vector_bound", rep.trace_vector_residual, rep.bound, 0.0));
    Ok(())
}

fn normalized_hermitian<R: Rng + ?Sized>(n: usize, r: &mut R) -> Mat {
    let h = random_hermitian(n, r);
    let s = spectral_norm(&h);
    h / c(s)
}

fn limit_formula(ctx: &mut Context) -> Result<()> {
    let (n, p, q) = (ctx.config.n, ctx.config.p, ctx.config.q);
    if p == 0 || q == 0 {
        return Err(argument("limit-formula needs p > 0 and q > 0"));
    }
    let ratio_tol = ctx.tol("ratio", 0.1);
    let mut r = rng(ctx);
    let mut rows = Vec::new();
    for size in [n, 2 * n, 4 * n] {
        let space = ModelSpace::new(size, p, q)?;
        let a = normalized_hermitian(size, &mut r);
        let rep = limit_formula_check(&space, &AveragingGroup::Full, &a, 1e-10)?;
        ctx.push(Check::at_most(format!("residual_bound_N{size}"), rep.residual_norm, rep.bound, 0.0));
        ctx.observe(format!("residual_N{size}"), rep.residual_norm);
        ctx.observe(format!("corrected_residual_N{size}"), rep.corrected_residual_norm);
        ctx.observe(format!("trace_vector_residual_N{size}"), rep.trace_vector_residual);
        rows.push(rep);
    }
    for w in rows.windows(2) {
        ctx.push(Check::close(
            format!("residual_ratio_N{}_to_N{}", w[0].n, w[1].n),
            w[1].residual_norm / w[0].residual_norm,
            0.5,
            ratio_tol,
        ));
        ctx.observe(
            format!("trace_vector_ratio_N{}_to_N{}", w[0].n, w[1].n),
            w[1].trace_vector_residual / w[0].trace_vector_residual,
        );
    }
    let stem = ctx.config.file_stem();
    if let Some(file) = ctx.table(&format!("{stem}.csv"))? {
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["N", "a_norm", "residual", "bound", "corrected_residual", "trace_vector_residual"])?;
        for rep in &rows {
            w.write_record([
                rep.n.to_string(),
                rep.a_norm.to_string(),
                rep.residual_norm.to_string(),
                rep.bound.to_string(),
                rep.corrected_residual_norm.to_string(),
                rep.trace_vector_residual.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn rel(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

fn cond_expectation(ctx: &mut Context) -> Result<()> {
    let n = ctx.config.n;
    let tower = SubfactorTower::for_size(n)?;
    let tol = ctx.tol("expectation", 1e-10);
    let mut r = rng(ctx);
    for k in 1..=tower.levels().min(2) {
        let blk = 1usize << k;
        let (mut trace, mut idem, mut module, mut scalar, mut pos, mut nested) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..ctx.config.samples.max(1) {
            let a = ginibre(n, &mut r);
            let e = conditional_expectation(&tower, k, &a)?;
            trace = trace.max((ntrace(&e) - ntrace(&a)).norm());
            idem = idem.max(rel(&conditional_expectation(&tower, k, &e)?, &e));
            let x = tower.embed_upper(k, &ginibre(n / blk, &mut r))?;
            let y = tower.embed_upper(k, &ginibre(n / blk, &mut r))?;
            module = module.max(rel(&conditional_expectation(&tower, k, &(&x * &a * &y))?, &(&x * &e * &y)));
            let low = ginibre(blk, &mut r);
            let r0 = tower.embed_lower(k, &low)?;
            scalar = scalar.max(rel(&conditional_expectation(&tower, k, &r0)?, &(identity(n) * ntrace(&low))));
            let g = ginibre(n, &mut r);
            let eig = SymmetricEigen::new(conditional_expectation(&tower, k, &(g.adjoint() * &g))?).eigenvalues;
            pos = pos.max(-eig.min());
            if k < tower.levels() {
                let next = conditional_expectation(&tower, k + 1, &a)?;
                nested = nested.max(rel(&conditional_expectation(&tower, k, &next)?, &next));
            }
        }
        ctx.push(Check::zero(format!("level{k}_trace_preserving"), trace, tol));
        ctx.push(Check::zero(format!("level{k}_idempotent"), idem, tol));
        ctx.push(Check::zero(format!("level{k}_module_property"), module, tol));
        ctx.push(Check::zero(format!("level{k}_scalar_on_lower_block"), scalar, tol));
        ctx.push(Check::zero(format!("level{k}_positive"), pos.max(0.0), tol));
        if k < tower.levels() {
            ctx.push(Check::zero(format!("level{k}_nested_ranges"), nested, tol));
        }
    }
    ctx.observe("tower_levels", tower.levels() as f64);
    ctx.observe("tower_complement", tower.complement() as f64);
    Ok(())
}

/// `sum (dim lambda)^2` over partitions of `p` with at most `n` rows.
fn permutation_algebra_dim(p: usize, n: usize) -> u128 {
    enumerate_partitions(p)
        .iter()
        .filter(|l| l.len() <= n)
        .map(|l| (l.dimension() as u128).pow(2))
        .sum()
}

fn commutant_dims(ctx: &mut Context) -> Result<()> {
    let (n, p, q) = (ctx.config.n, ctx.config.p, ctx.config.q);
    let mut r = rng(ctx);
    let units: Vec<Mat> = (0..n * n).map(|l| matrix_unit(n, l / n, l % n)).collect();
    for (side, weight) in [(Side::Left, p), (Side::Right, q)] {
        if weight == 0 {
            continue;
        }
        let name = side_name(side);
        let space = match side {
            Side::Left => ModelSpace::new(n, weight, 0)?,
            Side::Right => ModelSpace::new(n, 0, weight)?,
        };
        let gens: Vec<DenseOperator> = units
            .iter()
            .map(|b| match side {
                Side::Left => t_plus(&space, b)?.to_dense(),
                Side::Right => t_minus(&space, b)?.to_dense(),
            })
            .collect::<Result<_>>()?;
        let (dim, _) = generated_algebra_dim(&space, &gens)?;
        ctx.push(Check::count(format!("{name}_generated_equals_fixed_point"), dim as u128, fixed_point_dimension(weight, n)));
        let us: Vec<DenseOperator> = (0..ctx.config.samples.max(2))
            .map(|_| {
                let u = haar_unitary(n, &mut r);
                let f = match side {
                    Side::Left => LegFactor::left(u),
                    Side::Right => LegFactor::right(u),
                };
                StructuredOperator::product(space, vec![f; weight])?.to_dense()
            })
            .collect::<Result<_>>()?;
        let comm = commutant_basis(&space, &us)?;
        ctx.push(Check::count(
            format!("{name}_commutant_equals_permutation_algebra"),
            comm.reduced_dimension() as u128,
            permutation_algebra_dim(weight, n),
        ));
    }
    if p > 0 && q > 0 {
        let space = ModelSpace::new(n, p, q)?;
        let gens: Vec<DenseOperator> = (0..ctx.config.samples.max(2))
            .map(|_| lr_representation(&space, &haar_unitary(n, &mut r))?.to_dense())
            .collect::<Result<_>>()?;
        let comm = commutant_basis(&space, &gens)?;
        let dim = comm.reduced_dimension() as u128;
        ctx.observe("mixed_commutant_dim", dim as f64);
        // walled Brauer algebra: faithful, of dimension (p+q)!, once N >= p+q
        if n >= p + q {
            ctx.push(Check::count("mixed_commutant_equals_walled_brauer", dim, factorial(p + q)));
        }
    }
    if ctx.checks.is_empty() {
        return Err(argument("commutant-dims needs p > 0 or q > 0"));
    }
    Ok(())
}

fn span_growth(ctx: &mut Context) -> Result<()> {
    let (n, p) = (ctx.config.n, ctx.config.p);
    if p == 0 {
        return Err(argument("span-growth needs p > 0"));
    }
    let rep = span_growth_check(p, n)?;
    ctx.push(Check::count("cyclic_dim_equals_fixed_point", rep.cyclic_dim as u128, rep.fixed_dim));
    ctx.push(Check::count("generated_dim_equals_fixed_point", rep.generated_dim as u128, rep.fixed_dim));
    ctx.push(Check::count("rounds_equal_p", rep.rounds as u128, p as u128));
    for (i, dim) in rep.round_dims.iter().enumerate() {
        ctx.observe(format!("round{i}_dim"), *dim as f64);
    }
    Ok(())
}

fn relative_gap_exp(ctx: &mut Context) -> Result<()> {
    let (n, p, q) = (ctx.config.n, ctx.config.p, ctx.config.q);
    let max_samples = ctx.config.samples.max(8);
    let mut reports = Vec::new();
    for size in 2..=n {
        let rep = relative_gap(p, q, size, 8, max_samples, ctx.seed.wrapping_add(size as u64))?;
        ctx.push(Check::count(format!("saturated_N{size}"), rep.saturated as u128, 1));
        if p == 1 && q == 1 {
            let s = size as u128;
            ctx.push(Check::count(format!("generated_dim_N{size}"), rep.generated_dim as u128, s.pow(4) - 2 * s * s + 2));
        }
        ctx.observe(format!("generated_dim_N{size}"), rep.generated_dim as f64);
        ctx.observe(format!("fixed_dim_N{size}"), rep.fixed_dim as f64);
        ctx.observe(format!("gap_N{size}"), rep.gap);
        reports.push(rep);
    }
    for w in reports.windows(2) {
        ctx.push(Check::below(format!("gap_decreases_N{}_to_N{}", w[0].n, w[1].n), w[1].gap, w[0].gap));
    }
    let stem = ctx.config.file_stem();
    if let Some(file) = ctx.table(&format!("{stem}.csv"))? {
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["N", "p", "q", "method", "generated_dim", "fixed_dim", "gap", "samples"])?;
        for rep in &reports {
            w.write_record([
                rep.n.to_string(),
                rep.p.to_string(),
                rep.q.to_string(),
                serde_json::to_value(rep.method)?.as_str().unwrap_or_default().to_string(),
                rep.generated_dim.to_string(),
                rep.fixed_dim.to_string(),
                rep.gap.to_string(),
                rep.budgets.last().map(|b| b.0).unwrap_or(0).to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn random_f<R: Rng + ?Sized>(space: &ModelSpace, r: &mut R) -> Result<DenseOperator> {
    let mut op = StructuredOperator::zero(*space);
    for _ in 0..2 {
        let factors = (0..space.legs())
            .map(|k| {
                let a = ginibre(space.n(), r);
                if space.is_left_leg(k) { LegFactor::left(a) } else { LegFactor::right(a) }
            })
            .collect();
        op = op.add(&StructuredOperator::product(*space, factors)?)?;
    }
    op.to_dense()
}

fn random_crossed<R: Rng + ?Sized>(space: &ModelSpace, group: &ProductGroup, r: &mut R) -> Result<CrossedOperator> {
    let mut blocks = BTreeMap::new();
    for g in group.elements() {
        blocks.insert(g.clone(), random_f(space, r)?);
    }
    CrossedOperator::new(*space, blocks)
}

fn crossed_center(ctx: &mut Context) -> Result<()> {
    let space = space(ctx)?;
    let group = ProductGroup::for_space(&space);
    let tol = ctx.tol("crossed", 1e-10);
    let mut r = rng(ctx);
    let (mut law, mut cov) = (0.0f64, 0.0f64);
    let f = random_f(&space, &mut r)?;
    for g in group.elements() {
        let lg = CrossedOperator::lambda(space, g.clone())?;
        for h in group.elements() {
            let prod = lg.multiply(&CrossedOperator::lambda(space, h.clone())?)?;
            let want = CrossedOperator::lambda(space, g.compose(h))?;
            law = law.max(prod.add(&want.scaled(c(-1.0)))?.max_abs());
        }
        let lgi = CrossedOperator::lambda(space, g.inverse())?;
        let moved = lg.multiply(&CrossedOperator::pi(f.clone()))?.multiply(&lgi)?;
        let want = CrossedOperator::pi(crate::crossed::theta(g, &f));
        cov = cov.max(moved.add(&want.scaled(c(-1.0)))?.max_abs() / f.matrix().norm().max(1.0));
    }
    ctx.push(Check::zero("group_law", law, tol));
    ctx.push(Check::zero("covariance", cov, tol));
    let (mut tracial, mut faithful) = (0.0f64, f64::INFINITY);
    for _ in 0..ctx.config.samples.max(1) {
        let a = random_crossed(&space, &group, &mut r)?;
        let b = random_crossed(&space, &group, &mut r)?;
        let ab = a.multiply(&b)?.tau_hat();
        let ba = b.multiply(&a)?.tau_hat();
        tracial = tracial.max((ab - ba).norm() / ab.norm().max(1.0));
        let pos = a.adjoint().multiply(&a)?.tau_hat();
        faithful = faithful.min(pos.re / a.max_abs().powi(2));
    }
    ctx.push(Check::zero("trace_tracial", tracial, tol));
    ctx.push(Check::above("trace_faithful", faithful, 0.0));
    let classes = (enumerate_partitions(space.p()).len() * enumerate_partitions(space.q()).len()) as u128;
    let center = center_basis(&space, &group)?;
    ctx.observe("center_dim", center.dimension() as f64);
    ctx.observe("group_order", group.order() as f64);
    ctx.push(Check::count("center_dim_equals_class_count", center.dimension() as u128, classes));
    Ok(())
}

fn compression(ctx: &mut Context) -> Result<()> {
    let space = space(ctx)?;
    let group = ProductGroup::for_space(&space);
    let tol = ctx.tol("compression", 1e-10);
    let mut r = rng(ctx);
    let samples: Vec<DenseOperator> = (0..ctx.config.samples.max(1)).map(|_| random_f(&space, &mut r)).collect::<Result<_>>()?;
    let rep = compression_check(&space, &group, &samples)?;
    for e in rep.checks {
        ctx.push(Check::zero(e.name, e.error, tol));
    }
    Ok(())
}

fn trace_table(ctx: &mut Context) -> Result<()> {
    let (n, p, q) = (ctx.config.n, ctx.config.p, ctx.config.q);
    let rows = tau_prime_table(p, q);
    let total: num_rational::Ratio<u128> = rows.iter().map(|r| r.computed).sum();
    ctx.push(Check::close("computed_traces_sum_to_one", ratio_f64(total), 1.0, 0.0));
    let mut mismatches = 0u128;
    for a in &rows {
        for b in &rows {
            let crit = equivalence_criterion(&a.lambda, &a.mu, &b.lambda, &b.mu)?;
            mismatches += u128::from(crit != (a.computed == b.computed));
            mismatches += u128::from(crit != (a.stated == b.stated));
        }
    }
    ctx.push(Check::count("criterion_matches_trace_equality", mismatches, 0));
    let classes = rows.iter().map(|r| r.class_id).max().map(|m| m + 1).unwrap_or(0);
    ctx.observe("rows", rows.len() as f64);
    ctx.observe("classes", classes as f64);
    ctx.observe("rows_where_stated_differs", rows.iter().filter(|r| r.computed != r.stated).count() as f64);
    let space = ModelSpace::new(n, p, q)?;
    let group = ProductGroup::for_space(&space);
    if space.dim() * group.order() <= 1024 {
        let tol = ctx.tol("dense_trace", 1e-12);
        let mut worst = 0.0f64;
        for row in &rows {
            let (value, _) = tau_prime_dense(&space, &group, &row.lambda, &row.mu)?;
            worst = worst.max((value - ratio_f64(row.computed)).abs());
        }
        ctx.push(Check::zero("dense_trace_matches_computed", worst, tol));
    }
    let stem = ctx.config.file_stem();
    if let Some(file) = ctx.table(&format!("{stem}.csv"))? {
        write_tau_prime_csv(&rows, file)?;
    }
    Ok(())
}

fn ratio_f64(r: num_rational::Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn trace_inequality(ctx: &mut Context) -> Result<()> {
    let space = space(ctx)?;
    let group = ProductGroup::for_space(&space);
    let n = space.n();
    let m = space.legs();
    let mut r = rng(ctx);
    let bound = 1.0 / n as f64;
    let tol = ctx.tol("trace_bound", 1e-12);
    let mut checked = 0;
    for g in group.elements().iter().filter(|g| !g.is_identity()) {
        let tuples: Vec<Vec<Mat>> =
            (0..ctx.config.samples.max(1)).map(|_| (0..m).map(|_| haar_unitary(n, &mut r)).collect()).collect();
        let rep = trace_inequality_check(&space, g, &tuples)?;
        let label = element_label(g);
        ctx.push(Check::at_most(format!("haar_tuples_{label}"), rep.max_value, bound, tol));
        let ones = vec![vec![identity(n); m]];
        let at_identity = trace_inequality_check(&space, g, &ones)?.max_value;
        let cycles = g.leg_perm().cycles().len() as i32;
        let predicted = (n as f64).powi(cycles - m as i32);
        ctx.push(Check::close(format!("identity_tuple_{label}"), at_identity, predicted, tol));
        checked += 1;
    }
    if checked == 0 {
        return Err(argument("trace-inequality needs a non-trivial group (p >= 2 or q >= 2)"));
    }
    Ok(())
}

fn element_label(g: &ProductGroupElement) -> String {
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join("");
    format!("s{}_t{}", join(g.s.images()), join(g.t.images()))
}

fn spectral_binning_exp(ctx: &mut Context) -> Result<()> {
    let mut r = rng(ctx);
    let matrices: Vec<Mat> = (0..ctx.config.samples.max(1))
        .map(|_| {
            let size = r.random_range(4..=16);
            random_hermitian(size, &mut r)
        })
        .collect();
    for eps in [0.3, 0.1, 0.03] {
        let mut worst = 0.0f64;
        for a in &matrices {
            let b = spectral_binning(a, eps)?;
            let space = ModelSpace::new(a.nrows(), 1, 0)?;
            let diff = left_mult(&space, &(a - &b.approximation), 0)?;
            worst = worst.max(operator_norm(&diff, 1e-10)?);
        }
        ctx.push(Check::below(format!("max_error_eps_{eps}"), worst, eps));
    }
    let n = ctx.config.n;
    if let Ok(tower) = SubfactorTower::for_size(n) {
        let a = random_hermitian(n, &mut r);
        let b = spectral_binning(&a, 0.1)?;
        let realizable = matches!(dyadic_witness(&b, &tower), DyadicWitness::Realizable { .. });
        ctx.observe("dyadic_witness_realizable", f64::from(u8::from(realizable)));
    }
    Ok(())
}
