use std::collections::BTreeMap;
use std::io::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::group::{ProductGroup, ProductGroupElement};
use super::operator::{cyclic_vector, f_embed, implementing_unitary, right_regular, CrossedOperator};
use crate::algebra::RANK_TOLERANCE;
use crate::error::{argument, Error, Result};
use crate::legops::{DenseOperator, ModelSpace, DEFAULT_DENSE_CAP};
use crate::linalg::{c, identity, is_unitary, matrix_unit, max_abs, ntrace, Mat, NullSpaceAccumulator, C64};
use crate::perm::Perm;
use crate::symcomb::{character, enumerate_partitions, factorial, CycleType, Partition};

/// Basis of the center of `F x| G`, as crossed operators with blocks in `F`.
#[derive(Debug, Clone)]
pub struct CenterBasis {
    pub space: ModelSpace,
    pub elements: Vec<CrossedOperator>,
}

impl CenterBasis {
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }
}

/// Generators `e_{i,i+1}`, `e_{i+1,i}` of `M_d` (or the identity when `d = 1`).
fn algebra_generators(d: usize) -> Vec<Mat> {
    if d == 1 {
        return vec![identity(1)];
    }
    (0..d - 1)
        .flat_map(|i| [matrix_unit(d, i, i + 1), matrix_unit(d, i + 1, i)])
        .collect()
}

/// Center of the crossed product: `sum_g Pi(z_g) lambda_g` with
/// `b z_g = z_g theta_g(b)` for all `b` in `F` and `z_{h g h^-1} = theta_h(z_g)`.
pub fn center_basis(space: &ModelSpace, group: &ProductGroup) -> Result<CenterBasis> {
    group.check_space(space)?;
    let total = group.order() * space.dim();
    if total > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { dimension: total, cap: DEFAULT_DENSE_CAP });
    }
    let d = space.n().pow(space.legs() as u32);
    let dd = d * d;
    let order = group.order();
    let units: Vec<Mat> = group.elements().iter().map(|g| implementing_unitary(space, g)).collect();
    let eye = identity(d);
    let mut acc = NullSpaceAccumulator::new(order * dd);
    for (gi, u) in units.iter().enumerate() {
        for b in algebra_generators(d) {
            let tb = u * &b * u.adjoint();
            let local = b.kronecker(&eye) - eye.kronecker(&tb.transpose());
            let mut block = Mat::zeros(dd, order * dd);
            block.view_mut((0, gi * dd), (dd, dd)).copy_from(&local);
            acc.push(&block);
        }
    }
    for h in group.elements() {
        let uh = &units[group.index_of(h).expect("member")];
        // vec(U y U*) = (U (x) conj(U)) vec(y) in row-major order
        let conj = uh.kronecker(&uh.map(|z| z.conj()));
        for (gi, g) in group.elements().iter().enumerate() {
            let target = group.index_of(&h.compose(g).compose(&h.inverse())).expect("closed");
            let mut block = Mat::zeros(dd, order * dd);
            block.view_mut((0, target * dd), (dd, dd)).copy_from(&identity(dd));
            let mut cur = block.view((0, gi * dd), (dd, dd)).into_owned();
            cur -= &conj;
            block.view_mut((0, gi * dd), (dd, dd)).copy_from(&cur);
            acc.push(&block);
        }
    }
    let null = acc.finish_with_scale(RANK_TOLERANCE, 1.0);
    let mut elements = Vec::with_capacity(null.ncols());
    for col in 0..null.ncols() {
        let mut blocks = BTreeMap::new();
        for (gi, g) in group.elements().iter().enumerate() {
            let entries: Vec<C64> = null.view((gi * dd, col), (dd, 1)).iter().cloned().collect();
            let y = Mat::from_row_slice(d, d, &entries);
            if max_abs(&y) > 1e-12 {
                blocks.insert(g.clone(), f_embed(space, &y)?);
            }
        }
        elements.push(CrossedOperator::new(*space, blocks)?);
    }
    Ok(CenterBasis { space: *space, elements })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedError {
    pub name: String,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub checks: Vec<NamedError>,
    pub tolerance: f64,
    pub pass: bool,
}

/// `E(a) = |G|^-1 sum_g theta_g(a)`.
pub fn theta_average(group: &ProductGroup, a: &DenseOperator) -> DenseOperator {
    let mut acc = Mat::zeros(a.space().dim(), a.space().dim());
    for g in group.elements() {
        acc += super::group::theta(g, a).matrix();
    }
    DenseOperator::new(*a.space(), acc / c(group.order() as f64)).expect("same shape")
}

/// Checks the relations of `P = |G|^-1 sum_g lambda_g` on `l^2(G, H)` against
/// the supplied elements of `F`.
pub fn compression_check(space: &ModelSpace, group: &ProductGroup, samples: &[DenseOperator]) -> Result<CompressionReport> {
    let order = group.order();
    let n = space.dim();
    let mut proj: Option<Mat> = None;
    let mut lambdas = Vec::with_capacity(order);
    for g in group.elements() {
        let l = CrossedOperator::lambda(*space, g.clone())?.to_dense(group)?;
        proj = Some(match proj {
            None => l.clone(),
            Some(p) => p + &l,
        });
        lambdas.push(l);
    }
    let p = proj.expect("nonempty group") / c(order as f64);
    // isometry V eta = |G|^-1/2 sum_g delta_g (x) eta onto the range of P
    let mut v = Mat::zeros(order * n, n);
    for gi in 0..order {
        v.view_mut((gi * n, 0), (n, n)).copy_from(&(identity(n) / c((order as f64).sqrt())));
    }
    let mut checks = Vec::new();
    let mut push = |name: &str, error: f64| checks.push(NamedError { name: name.to_string(), error });
    push("P* = P", max_abs(&(p.adjoint() - &p)));
    push("P^2 = P", max_abs(&(&p * &p - &p)));
    push("V*V = I", max_abs(&(v.adjoint() * &v - identity(n))));
    push("VV* = P", max_abs(&(&v * v.adjoint() - &p)));
    let mut worst_plp: f64 = 0.0;
    let mut worst_vlv: f64 = 0.0;
    for l in &lambdas {
        worst_plp = worst_plp.max(max_abs(&(&p * l * &p - &p)));
        worst_vlv = worst_vlv.max(max_abs(&(v.adjoint() * l * &v - identity(n))));
    }
    push("P lambda_g P = P", worst_plp);
    push("V* lambda_g V = I", worst_vlv);
    let mut worst_avg: f64 = 0.0;
    let mut worst_fixed: f64 = 0.0;
    let mut worst_range: f64 = 0.0;
    for a in samples {
        let pi = CrossedOperator::pi(a.clone()).to_dense(group)?;
        let e = theta_average(group, a);
        worst_avg = worst_avg.max(max_abs(&(v.adjoint() * &pi * &v - e.matrix())));
        for g in group.elements() {
            worst_fixed = worst_fixed.max(max_abs(&(super::group::theta(g, &e).matrix() - e.matrix())));
        }
        // a general element sum_g Pi(a) lambda_g compresses into F^G
        let mut general = CrossedOperator::zero(*space);
        for g in group.elements() {
            general = general.add(&CrossedOperator::monomial(a.clone(), g.clone())?)?;
        }
        let compressed = v.adjoint() * general.to_dense(group)? * &v;
        let expected = e.matrix() * c(order as f64);
        worst_range = worst_range.max(max_abs(&(compressed - expected)));
    }
    push("V* Pi(a) V = average of theta_g(a)", worst_avg);
    push("average is G-fixed", worst_fixed);
    push("P (F x| G) P lies in F^G", worst_range);
    let tolerance = 1e-10;
    let pass = checks.iter().all(|c| c.error <= tolerance);
    Ok(CompressionReport { n: space.n(), p: space.p(), q: space.q(), checks, tolerance, pass })
}

/// `tau'` of the central projection `P^lambda (x) P^mu`: the value forced by
/// `tau'(U_g) = delta_{g,e}` and the value printed in the source formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauPrime {
    pub computed: Ratio<u128>,
    pub stated: Ratio<u128>,
}

impl TauPrime {
    pub fn agree(&self) -> bool {
        self.computed == self.stated
    }
}

pub fn trace_tau_prime(lambda: &Partition, mu: &Partition) -> TauPrime {
    let dims = lambda.dimension() as u128 * mu.dimension() as u128;
    let order = factorial(lambda.weight()) * factorial(mu.weight());
    TauPrime { computed: Ratio::new(dims * dims, order), stated: Ratio::new(dims, order) }
}

/// `<P' xi_I, xi_I>` for `P' = P^lambda (x) P^mu` built from the right regular
/// unitaries, which commute with the crossed product.
pub fn tau_prime_dense(space: &ModelSpace, group: &ProductGroup, lambda: &Partition, mu: &Partition) -> Result<(f64, Mat)> {
    if lambda.weight() != space.p() {
        return Err(Error::WeightMismatch { expected: space.p(), got: lambda.weight() });
    }
    if mu.weight() != space.q() {
        return Err(Error::WeightMismatch { expected: space.q(), got: mu.weight() });
    }
    let xi = cyclic_vector(space, group)?;
    let scale = (lambda.dimension() * mu.dimension()) as f64 / group.order() as f64;
    let mut proj = Mat::zeros(xi.len(), xi.len());
    for g in group.elements() {
        let chi = character(lambda, &CycleType::of(&g.s))? * character(mu, &CycleType::of(&g.t))?;
        if chi != 0 {
            proj += right_regular(space, group, g)? * c(scale * chi as f64);
        }
    }
    let value = xi.dotc(&(&proj * &xi)).re;
    Ok((value, proj))
}

/// `dim lambda . dim mu = dim gamma . dim delta`.
pub fn equivalence_criterion(lambda: &Partition, mu: &Partition, gamma: &Partition, delta: &Partition) -> Result<bool> {
    if lambda.weight() != gamma.weight() {
        return Err(Error::WeightMismatch { expected: lambda.weight(), got: gamma.weight() });
    }
    if mu.weight() != delta.weight() {
        return Err(Error::WeightMismatch { expected: mu.weight(), got: delta.weight() });
    }
    Ok(lambda.dimension() * mu.dimension() == gamma.dimension() * delta.dimension())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPrimeRow {
    pub lambda: Partition,
    pub mu: Partition,
    pub dim_lambda: u64,
    pub dim_mu: u64,
    pub computed: Ratio<u128>,
    pub stated: Ratio<u128>,
    pub class_id: usize,
}

/// All pairs `(lambda, mu)` with classes numbered by first appearance of `dim lambda . dim mu`.
pub fn tau_prime_table(p: usize, q: usize) -> Vec<TauPrimeRow> {
    let mut classes: Vec<u64> = Vec::new();
    let mut rows = Vec::new();
    for lambda in enumerate_partitions(p) {
        for mu in enumerate_partitions(q) {
            let product = lambda.dimension() * mu.dimension();
            let class_id = match classes.iter().position(|&x| x == product) {
                Some(i) => i,
                None => {
                    classes.push(product);
                    classes.len() - 1
                }
            };
            let tau = trace_tau_prime(&lambda, &mu);
            rows.push(TauPrimeRow {
                dim_lambda: lambda.dimension(),
                dim_mu: mu.dimension(),
                lambda: lambda.clone(),
                mu,
                computed: tau.computed,
                stated: tau.stated,
                class_id,
            });
        }
    }
    rows
}

pub fn write_tau_prime_csv<W: Write>(rows: &[TauPrimeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "mu", "dim_lambda", "dim_mu", "computed_tau", "paper_tau", "class_id"])?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.mu.to_string(),
            r.dim_lambda.to_string(),
            r.dim_mu.to_string(),
            r.computed.to_string(),
            r.stated.to_string(),
            r.class_id.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceInequalityReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub element: String,
    pub values: Vec<f64>,
    pub bound: f64,
    pub max_value: f64,
    pub pass: bool,
}

/// Normalized trace of `U_s (X_1 (x) ... (x) X_m)` on `(C^N)^(x)m`, one factor
/// `Tr(X_{c_r} ... X_{c_1})` per cycle `c_1 -> c_2 -> ...` of `s`.
pub fn twisted_trace(sigma: &Perm, factors: &[Mat]) -> C64 {
    let n = factors[0].nrows();
    let mut value = c(1.0);
    for cycle in sigma.cycles() {
        let mut prod = identity(n);
        for &k in &cycle {
            prod = &factors[k] * prod;
        }
        value *= ntrace(&prod);
    }
    let fixed_norm = (n as f64).powi((factors.len() - sigma.cycles().len()) as i32);
    value / c(fixed_norm)
}

/// Checks `|tr(U_s (u_1 (x) ... (x) u_m))| <= 1/N` for every tuple, where right
/// legs carry `r(u*)`, which acts on the column index as `conj(u)`.
pub fn trace_inequality_check(
    space: &ModelSpace,
    s: &ProductGroupElement,
    tuples: &[Vec<Mat>],
) -> Result<TraceInequalityReport> {
    ProductGroup::for_space(space).check(s)?;
    if s.is_identity() {
        return Err(argument("the trace inequality needs a non-identity element"));
    }
    let sigma = s.leg_perm();
    let mut values = Vec::with_capacity(tuples.len());
    for tuple in tuples {
        if tuple.len() != space.legs() {
            return Err(Error::DimensionMismatch { expected: space.legs(), got: tuple.len() });
        }
        let mut factors = Vec::with_capacity(tuple.len());
        for (k, u) in tuple.iter().enumerate() {
            if u.nrows() != space.n() || !is_unitary(u, 1e-10) {
                return Err(argument(format!("entry {k} is not an N x N unitary")));
            }
            factors.push(if space.is_left_leg(k) { u.clone() } else { u.map(|z| z.conj()) });
        }
        values.push(twisted_trace(&sigma, &factors).norm());
    }
    let bound = 1.0 / space.n() as f64;
    let max_value = values.iter().cloned().fold(0.0, f64::max);
    Ok(TraceInequalityReport {
        n: space.n(),
        p: space.p(),
        q: space.q(),
        element: s.to_string(),
        pass: values.iter().all(|&v| v <= bound * (1.0 + 1e-12)),
        values,
        bound,
        max_value,
    })
}
